//! Plug an external program in as a resolver. The program reads one JSON
//! request on stdin and answers on stdout.
//!
//! ```bash
//! cargo build --bin zeroref
//! cargo run --example subprocess_resolver -- target/debug/zeroref protocol-baseline
//! ```

use std::path::Path;

use zeroref::conll::parse_conll;
use zeroref::harness::subprocess::{Op, SubprocessResolver};
use zeroref::harness::{AzpIdentifier, CorefResolver};
use zeroref::merge::strip_azps;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let Some(program) = args.next() else {
        eprintln!("usage: subprocess_resolver PROGRAM [ARGS...]");
        std::process::exit(2);
    };
    let resolver = SubprocessResolver::new(program, args.collect());

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bush_extended.conll");
    let doc = strip_azps(&parse_conll(&std::fs::read_to_string(path)?)?.remove(0));

    let raw = resolver.call(Op::Identify, &doc)?;
    println!("raw identify response: {}", serde_json::to_string(&raw)?);
    for azp in resolver.identify(&doc)? {
        println!("gap before word {} of sentence {}", azp.gap, azp.sentence);
    }
    for cluster in CorefResolver::resolve(&resolver, &doc)?.clusters {
        let members: Vec<String> = cluster.members.iter().map(ToString::to_string).collect();
        println!("cluster {}: {}", cluster.id, members.join(", "));
    }
    Ok(())
}
