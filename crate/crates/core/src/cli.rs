//! Corpus-level commands behind the `zeroref` binary.
//!
//! Each command reads files, does its work per document (in parallel when
//! `jobs > 1`), and returns a serializable result that echoes the
//! [`RunConfig`] it ran with. Directories are walked in lexicographic order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::conll::{extract_mentions, parse_conll, raw_mentions, write_conll, Document, ParseError, WriteError};
use crate::features::{ClusterRepresentation, DistanceBuckets};
use crate::harness::subprocess::SubprocessResolver;
use crate::harness::{
    run_joint_test, run_pipeline, AzpIdentifier, ClusterDiff, CorefResolver, GoldAzpIdentifier, GoldAzpResolver,
    GoldCoref, HarnessConfig, HarnessError, NearestClusterResolver, PipelineDiagnostics, StringMatchCoref,
    VerbGapIdentifier,
};
use crate::merge::{
    apply_merge, corpus_stats, doc_key, materialize, plan_merge, strip_azps, CorpusStats, MergeError, Reject, RowFill,
};
use crate::model::{ClusterSet, Member};
use crate::onf::{parse_onf_named, OnfError};
use crate::scoring::{AzpHitMode, ScoreAccumulator, ScoreOptions, ScoreReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Onf { path: PathBuf, source: OnfError },
    #[error("no ONF file for: {}", .0.join(", "))]
    MissingOnf(Vec<String>),
    #[error("documents differ between key and response (only in key: {only_key:?}; only in response: {only_response:?})")]
    DocumentMismatch { only_key: Vec<String>, only_response: Vec<String> },
    #[error("{doc_id}: {source}")]
    Merge { doc_id: String, source: MergeError },
    #[error("{doc_id}: {source}")]
    Harness { doc_id: String, source: HarnessError },
    #[error(transparent)]
    Write(#[from] WriteError),
    #[error("{0}")]
    Config(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Merge,
    Stats,
    Score,
    Resolve,
    Validate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Pipeline,
    Joint,
}

impl Mode {
    fn other(self) -> Mode {
        match self {
            Mode::Pipeline => Mode::Joint,
            Mode::Joint => Mode::Pipeline,
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pipeline" => Ok(Mode::Pipeline),
            "joint" => Ok(Mode::Joint),
            other => Err(format!("unknown mode {other:?}; expected pipeline or joint")),
        }
    }
}

/// Which resolvers `resolve` plugs in.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ResolverChoice {
    /// String-match coreference, verb-gap identification, nearest-cluster
    /// AZP resolution.
    #[default]
    Baseline,
    /// Gold clusters; needs gold data.
    Oracle,
    /// An external program for coreference and identification; AZP
    /// resolution in the pipeline uses the nearest-cluster baseline.
    Subprocess { program: PathBuf, args: Vec<String> },
}

impl FromStr for ResolverChoice {
    type Err = String;

    /// `baseline`, `oracle`, or `subprocess:PROGRAM [ARGS...]`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(ResolverChoice::Baseline),
            "oracle" => Ok(ResolverChoice::Oracle),
            _ => {
                let cmd = s.strip_prefix("subprocess:").ok_or_else(|| {
                    format!("unknown resolver {s:?}; expected baseline, oracle or subprocess:PROGRAM")
                })?;
                let mut words = cmd.split_whitespace();
                let program = words.next().ok_or("subprocess: needs a program")?;
                Ok(ResolverChoice::Subprocess { program: program.into(), args: words.map(String::from).collect() })
            }
        }
    }
}

fn serialize_buckets<S: Serializer>(b: &DistanceBuckets, s: S) -> Result<S::Ok, S::Error> {
    b.thresholds().serialize(s)
}

fn deserialize_buckets<'de, D: serde::Deserializer<'de>>(d: D) -> Result<DistanceBuckets, D::Error> {
    let v = Vec::<usize>::deserialize(d)?;
    DistanceBuckets::new(v).map_err(serde::de::Error::custom)
}

/// Everything a command needs, echoed into its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onf: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub mode: Mode,
    pub resolver: ResolverChoice,
    pub cluster_rep: ClusterRepresentation,
    pub azp_hit: AzpHitMode,
    pub include_pro_in_coref: bool,
    #[serde(serialize_with = "serialize_buckets", deserialize_with = "deserialize_buckets")]
    pub buckets: DistanceBuckets,
    pub seed: u64,
    pub jobs: usize,
    /// Also run the other mode and report how the clusters differ.
    pub compare: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            inputs: Vec::new(),
            onf: None,
            gold: None,
            out: None,
            mode: Mode::default(),
            resolver: ResolverChoice::default(),
            cluster_rep: ClusterRepresentation::default(),
            azp_hit: AzpHitMode::default(),
            include_pro_in_coref: true,
            buckets: DistanceBuckets::default(),
            seed: 0,
            jobs: 1,
            compare: false,
        }
    }

    fn input(&self, i: usize, what: &str) -> Result<&Path, CliError> {
        self.inputs
            .get(i)
            .map(PathBuf::as_path)
            .ok_or_else(|| CliError::Config(format!("missing {what} path")))
    }

    fn score_options(&self) -> ScoreOptions {
        ScoreOptions { azp_hit: self.azp_hit, include_pro_in_coref: self.include_pro_in_coref }
    }

    fn harness(&self) -> HarnessConfig {
        HarnessConfig { representation: self.cluster_rep, buckets: self.buckets.clone(), ..HarnessConfig::with_seed(self.seed) }
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

fn is_conll(path: &Path) -> bool {
    path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with("conll"))
}

fn is_onf(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "onf")
}

/// `path` itself if it is a file, else the matching files below it.
pub fn list_files(path: &Path, keep: fn(&Path) -> bool) -> Result<Vec<PathBuf>, CliError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(path).sort_by_file_name() {
        let entry = entry.map_err(|e| CliError::Io {
            path: e.path().unwrap_or(path).to_path_buf(),
            source: e.into_io_error().unwrap_or_else(|| std::io::Error::other("directory loop")),
        })?;
        if entry.file_type().is_file() && keep(entry.path()) {
            out.push(entry.into_path());
        }
    }
    Ok(out)
}

pub fn read_conll(path: &Path) -> Result<Vec<Document>, CliError> {
    let text = std::fs::read(path).map_err(io_err(path))?;
    crate::conll::parse_conll_bytes(&text).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

fn read_corpus(path: &Path) -> Result<Vec<Document>, CliError> {
    let mut docs = Vec::new();
    for f in list_files(path, is_conll)? {
        docs.extend(read_conll(&f)?);
    }
    Ok(docs)
}

fn write_file(path: &Path, data: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, data).map_err(io_err(path))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeSummary {
    pub files: usize,
    pub documents: usize,
    pub inserted: usize,
    pub new_chains: usize,
    pub already_present: usize,
    pub rejected: usize,
    pub reject_log: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeOutput {
    pub config: RunConfig,
    pub summary: MergeSummary,
}

pub const REJECT_LOG: &str = "merge_rejects.jsonl";

/// Writes an extended copy of every CoNLL file under `config.out`, keeping
/// relative paths, plus a JSON-lines log of rejected AZPs. Files that gain
/// nothing are copied byte for byte.
pub fn cmd_merge(config: &RunConfig) -> Result<MergeOutput, CliError> {
    let conll_root = config.input(0, "CoNLL")?;
    let onf_root = config.onf.as_deref().ok_or_else(|| CliError::Config("missing --onf".into()))?;
    let out_root = config.out.as_deref().ok_or_else(|| CliError::Config("missing --out".into()))?;

    let mut onf_paths: HashMap<String, PathBuf> = HashMap::new();
    for p in list_files(onf_root, is_onf)? {
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        onf_paths.entry(doc_key(stem).to_string()).or_insert(p);
    }

    let files = list_files(conll_root, is_conll)?;
    let mut parsed = Vec::with_capacity(files.len());
    for f in &files {
        let bytes = std::fs::read(f).map_err(io_err(f))?;
        let docs = crate::conll::parse_conll_bytes(&bytes).map_err(|source| CliError::Parse { path: f.clone(), source })?;
        parsed.push((f.clone(), bytes, docs));
    }
    let unmatched: BTreeSet<String> = parsed
        .iter()
        .flat_map(|(_, _, docs)| docs.iter())
        .filter(|d| !onf_paths.contains_key(doc_key(&d.doc_id)))
        .map(|d| d.doc_id.clone())
        .collect();
    if !unmatched.is_empty() {
        return Err(CliError::MissingOnf(unmatched.into_iter().collect()));
    }

    let merge_file = |(path, bytes, docs): &(PathBuf, Vec<u8>, Vec<Document>)| -> Result<(MergeSummary, Vec<Reject>), CliError> {
        let mut summary = MergeSummary { files: 1, documents: docs.len(), ..Default::default() };
        let mut rejects = Vec::new();
        let mut merged = Vec::with_capacity(docs.len());
        let mut changed = false;
        for doc in docs {
            let onf_path = &onf_paths[doc_key(&doc.doc_id)];
            let text = std::fs::read_to_string(onf_path).map_err(io_err(onf_path))?;
            let stem = onf_path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let onf = parse_onf_named(&text, stem).map_err(|source| CliError::Onf { path: onf_path.clone(), source })?;
            let wrap = |source| CliError::Merge { doc_id: doc.doc_id.clone(), source };
            let plan = plan_merge(&onf, doc).map_err(wrap)?;
            summary.inserted += plan.insertions.len();
            summary.new_chains += plan.new_mentions.len();
            summary.already_present += plan.already_present;
            summary.rejected += plan.rejects.len();
            rejects.extend(plan.rejects.iter().cloned());
            changed |= !plan.is_empty();
            merged.push(apply_merge(&plan, doc).map_err(wrap)?);
        }
        let rel = path.strip_prefix(conll_root).ok().filter(|r| !r.as_os_str().is_empty());
        let target = out_root.join(rel.unwrap_or_else(|| Path::new(path.file_name().unwrap_or_default())));
        if changed {
            write_file(&target, write_conll(&merged)?.as_bytes())?;
        } else {
            write_file(&target, bytes)?;
        }
        Ok((summary, rejects))
    };

    let results: Vec<Result<(MergeSummary, Vec<Reject>), CliError>> =
        config.pool()?.install(|| parsed.par_iter().map(merge_file).collect());
    let mut summary = MergeSummary::default();
    let mut log = String::new();
    for r in results {
        let (s, rejects) = r?;
        summary.files += s.files;
        summary.documents += s.documents;
        summary.inserted += s.inserted;
        summary.new_chains += s.new_chains;
        summary.already_present += s.already_present;
        summary.rejected += s.rejected;
        for rej in rejects {
            log.push_str(&serde_json::to_string(&rej).expect("rejects serialize"));
            log.push('\n');
        }
    }
    summary.reject_log = out_root.join(REJECT_LOG);
    write_file(&summary.reject_log, log.as_bytes())?;
    Ok(MergeOutput { config: config.clone(), summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsOutput {
    pub config: RunConfig,
    #[serde(flatten)]
    pub stats: CorpusStats,
}

pub fn cmd_stats(config: &RunConfig) -> Result<StatsOutput, CliError> {
    let root = config.input(0, "CoNLL")?;
    let files = list_files(root, is_conll)?;
    let per_file: Vec<Result<CorpusStats, CliError>> =
        config.pool()?.install(|| files.par_iter().map(|f| read_conll(f).map(|d| corpus_stats(&d))).collect());
    let mut stats = CorpusStats::default();
    for s in per_file {
        stats = stats + s?;
    }
    if stats.documents == 0 {
        log::warn!("no CoNLL documents under {}", root.display());
    }
    Ok(StatsOutput { config: config.clone(), stats })
}

/// The score report with the run configuration alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOutput {
    pub config: RunConfig,
    pub documents: usize,
    pub report: ScoreReport,
}

impl Serialize for ScoreOutput {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = &self.report;
        let avg = serde_json::value::RawValue::from_string(format!("{:.4}", r.conll_avg_f1))
            .map_err(serde::ser::Error::custom)?;
        let mut m = s.serialize_map(Some(8))?;
        m.serialize_entry("muc", &r.muc)?;
        m.serialize_entry("b_cubed", &r.b_cubed)?;
        m.serialize_entry("ceaf_phi4", &r.ceaf_phi4)?;
        m.serialize_entry("conll_avg_f1", &avg)?;
        m.serialize_entry("azp", &r.azp)?;
        m.serialize_entry("documents", &self.documents)?;
        m.serialize_entry("config", &self.config)?;
        m.end()
    }
}

fn pair_documents<'a>(
    key: &'a [Document],
    response: &'a [Document],
) -> Result<Vec<(&'a Document, &'a Document)>, CliError> {
    let resp: BTreeMap<&str, &Document> = response.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let key_ids: BTreeSet<&str> = key.iter().map(|d| d.doc_id.as_str()).collect();
    let only_key: Vec<String> = key_ids.iter().filter(|k| !resp.contains_key(*k)).map(|k| k.to_string()).collect();
    let only_response: Vec<String> = resp.keys().filter(|k| !key_ids.contains(*k)).map(|k| k.to_string()).collect();
    if !only_key.is_empty() || !only_response.is_empty() {
        return Err(CliError::DocumentMismatch { only_key, only_response });
    }
    Ok(key.iter().map(|k| (k, resp[k.doc_id.as_str()])).collect())
}

/// Scores response clusters against key clusters, document by document.
pub fn score_documents(key: &[Document], response: &[Document], options: &ScoreOptions) -> Result<ScoreAccumulator, CliError> {
    let mut acc = ScoreAccumulator::new();
    for (k, r) in pair_documents(key, response)? {
        acc.add_document(&extract_mentions(k), &extract_mentions(r), options);
    }
    Ok(acc)
}

pub fn cmd_score(config: &RunConfig) -> Result<ScoreOutput, CliError> {
    let key = read_corpus(config.input(0, "key")?)?;
    let response = read_corpus(config.input(1, "response")?)?;
    let acc = score_documents(&key, &response, &config.score_options())?;
    Ok(ScoreOutput { config: config.clone(), documents: acc.documents, report: acc.report() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentSummary {
    pub doc_id: String,
    pub clusters: usize,
    pub azps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<PipelineDiagnostics>,
    /// Pipeline clusters on the left, joint on the right.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<ClusterDiff>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolveSummary {
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ScoreReport>,
    pub documents: Vec<DocumentSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolveOutput {
    /// Input documents with the resolved clusters written in, AZPs as
    /// `*pro*` rows.
    pub documents: Vec<Document>,
    pub summary: ResolveSummary,
}

impl ResolveOutput {
    pub fn conll(&self) -> Result<String, CliError> {
        Ok(write_conll(&self.documents)?)
    }
}

fn resolve_one(
    config: &RunConfig,
    mode: Mode,
    doc: &Document,
    gold: Option<&ClusterSet>,
) -> Result<(ClusterSet, Option<PipelineDiagnostics>), CliError> {
    let wrap = |source| CliError::Harness { doc_id: doc.doc_id.clone(), source };
    let fill = RowFill::default();
    let harness = config.harness();
    let gold_or_err = || {
        gold.ok_or_else(|| CliError::Config(format!("oracle resolvers need gold data for {:?}", doc.doc_id)))
    };
    let (coref, ident): (Box<dyn CorefResolver>, Box<dyn AzpIdentifier>) = match &config.resolver {
        ResolverChoice::Baseline => (Box::new(StringMatchCoref::default()), Box::new(VerbGapIdentifier::default())),
        ResolverChoice::Oracle => {
            let g = gold_or_err()?;
            (Box::new(GoldCoref::new(g.clone())), Box::new(GoldAzpIdentifier::new(g)))
        }
        ResolverChoice::Subprocess { program, args } => {
            let r = SubprocessResolver::new(program, args.clone());
            (Box::new(r.clone()), Box::new(r))
        }
    };
    match mode {
        Mode::Pipeline => {
            let out = match &config.resolver {
                ResolverChoice::Oracle => {
                    run_pipeline(doc, coref.as_ref(), ident.as_ref(), &GoldAzpResolver::new(gold_or_err()?), &harness)
                }
                _ => run_pipeline(doc, coref.as_ref(), ident.as_ref(), &NearestClusterResolver, &harness),
            }
            .map_err(wrap)?;
            Ok((out.clusters, Some(out.diagnostics)))
        }
        Mode::Joint => {
            let out = run_joint_test(doc, ident.as_ref(), coref.as_ref(), &fill).map_err(wrap)?;
            Ok((out.clusters, None))
        }
    }
}

/// Resolves every input document; scores against gold when available.
///
/// Inputs that still carry `*pro*` rows are masked first, and, if no gold
/// file is given, serve as their own gold.
pub fn cmd_resolve(config: &RunConfig) -> Result<ResolveOutput, CliError> {
    let inputs = read_corpus(config.input(0, "input")?)?;
    let gold_docs = match &config.gold {
        Some(p) => Some(read_corpus(p)?),
        None if inputs.iter().any(Document::has_pro_rows) => Some(inputs.clone()),
        None => None,
    };
    let gold: Option<HashMap<String, ClusterSet>> = gold_docs
        .as_ref()
        .map(|docs| docs.iter().map(|d| (d.doc_id.clone(), extract_mentions(d))).collect());
    if let Some(g) = &gold {
        let missing: Vec<String> = inputs.iter().filter(|d| !g.contains_key(&d.doc_id)).map(|d| d.doc_id.clone()).collect();
        if !missing.is_empty() {
            return Err(CliError::DocumentMismatch { only_key: Vec::new(), only_response: missing });
        }
    }

    let run = |doc: &Document| -> Result<(Document, ClusterSet, DocumentSummary), CliError> {
        let masked = strip_azps(doc);
        let g = gold.as_ref().map(|g| &g[&doc.doc_id]);
        let (clusters, diagnostics) = resolve_one(config, config.mode, &masked, g)?;
        let diff = if config.compare {
            let (other, _) = resolve_one(config, config.mode.other(), &masked, g)?;
            Some(match config.mode {
                Mode::Pipeline => ClusterDiff::between(&clusters, &other),
                Mode::Joint => ClusterDiff::between(&other, &clusters),
            })
        } else {
            None
        };
        let out = materialize(&masked, &clusters, &RowFill::for_document(doc))
            .map_err(|source| CliError::Merge { doc_id: doc.doc_id.clone(), source })?;
        let summary = DocumentSummary {
            doc_id: doc.doc_id.clone(),
            clusters: clusters.len(),
            azps: clusters.azp_records().len(),
            diagnostics,
            diff,
        };
        Ok((out, clusters, summary))
    };
    let results: Vec<Result<_, CliError>> = config.pool()?.install(|| inputs.par_iter().map(run).collect());

    let mut documents = Vec::with_capacity(results.len());
    let mut summaries = Vec::with_capacity(results.len());
    let mut acc = ScoreAccumulator::new();
    for (doc, r) in inputs.iter().zip(results) {
        let (out, clusters, summary) = r?;
        if let Some(g) = &gold {
            acc.add_document(&g[&doc.doc_id], &clusters, &config.score_options());
        }
        documents.push(out);
        summaries.push(summary);
    }
    let report = gold.as_ref().map(|_| acc.report());
    Ok(ResolveOutput { documents, summary: ResolveSummary { config: config.clone(), report, documents: summaries } })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    ParseError,
    UnbalancedBrackets,
    AzpOnlyChain,
    SingletonChain,
    DuplicateMention,
    DuplicateDocument,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub file: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
    pub severity: Severity,
    pub kind: FindingKind,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file.display())?;
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
        }
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, ": {sev}: {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateOutput {
    pub config: RunConfig,
    pub findings: Vec<Finding>,
}

impl ValidateOutput {
    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }
}

/// Line number of every token row, in file order.
fn row_lines(text: &str) -> Vec<usize> {
    let mut inside = false;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with("#begin document") {
            inside = true;
        } else if line.starts_with("#end document") {
            inside = false;
        } else if inside && !line.trim().is_empty() && !line.starts_with('#') {
            out.push(i + 1);
        }
    }
    out
}

fn validate_text(file: &Path, text: &str) -> Vec<Finding> {
    let finding = |line, doc_id: Option<&str>, severity, kind, message: String| Finding {
        file: file.to_path_buf(),
        line,
        doc_id: doc_id.map(String::from),
        severity,
        kind,
        message,
    };
    let docs = match parse_conll(text) {
        Ok(d) => d,
        Err(e) => {
            let kind = match e {
                ParseError::UnbalancedCorefBrackets { .. } => FindingKind::UnbalancedBrackets,
                _ => FindingKind::ParseError,
            };
            return vec![finding(e.line(), None, Severity::Error, kind, e.to_string())];
        }
    };

    let lines = row_lines(text);
    let mut findings = Vec::new();
    let mut offset = 0;
    let mut seen_ids: BTreeSet<&str> = BTreeSet::new();
    for doc in &docs {
        let id = Some(doc.doc_id.as_str());
        if !seen_ids.insert(&doc.doc_id) {
            findings.push(finding(
                lines.get(offset).copied(),
                id,
                Severity::Error,
                FindingKind::DuplicateDocument,
                format!("document {:?} appears more than once", doc.doc_id),
            ));
        }
        // first row of each (part, sentence), as an index into `lines`
        let mut starts = HashMap::new();
        let mut rows_per_sentence = HashMap::new();
        for (p, s, sent) in doc.sentences() {
            starts.insert((p, s), offset);
            rows_per_sentence.insert((p, s), sent.overt_row_indices());
            offset += sent.rows.len();
        }
        let line_of = |m: &Member| -> Option<usize> {
            let base = starts.get(&(m.part(), m.sentence()))?;
            let row = match m {
                Member::Mention(x) => *rows_per_sentence[&(x.part, x.sentence)].get(x.start)?,
                Member::Azp(a) => {
                    doc.sentence(a.part, a.sentence)?.pro_gaps().into_iter().find(|(_, g)| *g == a.gap)?.0
                }
            };
            lines.get(base + row).copied()
        };

        let extended = doc.has_pro_rows();
        for c in &extract_mentions(doc).clusters {
            let first = c.members.first().and_then(|m| line_of(m));
            if c.mentions().next().is_none() {
                findings.push(finding(
                    first,
                    id,
                    Severity::Error,
                    FindingKind::AzpOnlyChain,
                    format!("AZP-only chain {} in {:?}", c.id, doc.doc_id),
                ));
            } else if extended && c.len() == 1 {
                findings.push(finding(
                    first,
                    id,
                    Severity::Warning,
                    FindingKind::SingletonChain,
                    format!("singleton chain {} in extended document {:?}", c.id, doc.doc_id),
                ));
            }
        }
        // the cluster model collapses duplicates, so count raw tags
        let mut raw: BTreeMap<(u32, Member), usize> = BTreeMap::new();
        for (chain, m) in raw_mentions(doc) {
            *raw.entry((chain, m)).or_default() += 1;
        }
        for ((chain, m), n) in raw {
            if n > 1 {
                findings.push(finding(
                    line_of(&m),
                    id,
                    Severity::Warning,
                    FindingKind::DuplicateMention,
                    format!("chain {chain} tags {m} {n} times"),
                ));
            }
        }
    }
    findings
}

pub fn cmd_validate(config: &RunConfig) -> Result<ValidateOutput, CliError> {
    let root = config.input(0, "input")?;
    let mut findings = Vec::new();
    for f in list_files(root, is_conll)? {
        let bytes = std::fs::read(&f).map_err(io_err(&f))?;
        match std::str::from_utf8(&bytes) {
            Ok(text) => findings.extend(validate_text(&f, text)),
            Err(e) => findings.push(Finding {
                file: f.clone(),
                line: None,
                doc_id: None,
                severity: Severity::Error,
                kind: FindingKind::ParseError,
                message: format!("not UTF-8 after byte {}", e.valid_up_to()),
            }),
        }
    }
    Ok(ValidateOutput { config: config.clone(), findings })
}
