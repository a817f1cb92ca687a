pub mod cli;
pub mod conll;
pub mod features;
pub mod harness;
pub mod merge;
pub mod model;
pub mod onf;
pub mod scoring;
