use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use zeroref::cli::{self, CliError, Command, Mode, ResolverChoice, RunConfig};
use zeroref::features::{ClusterRepresentation, DistanceBuckets};
use zeroref::scoring::AzpHitMode;

#[derive(Parser)]
#[command(name = "zeroref", version, about = "Arabic coreference with anaphoric zero pronouns")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Cluster representative paired with an AZP: first or last.
    #[arg(long, default_value = "last")]
    cluster_rep: ClusterRepresentation,
    /// AZP hit counting: position or entity.
    #[arg(long, default_value = "entity")]
    azp_hit: AzpHitMode,
    /// Keep *pro* members when computing MUC, B3 and CEAF.
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    include_pro_in_coref: bool,
    /// Sentence-distance bucket thresholds.
    #[arg(long, default_value = "0,1,2,4,8")]
    buckets: DistanceBuckets,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print results as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Insert ONF zero pronouns into CoNLL files as *pro* rows.
    Merge {
        #[arg(long)]
        conll: PathBuf,
        #[arg(long)]
        onf: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Count documents, sentences, words and AZPs.
    Stats {
        #[arg(long)]
        conll: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Score a response file against a key file.
    Score {
        key: PathBuf,
        response: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Resolve coreference and AZPs in a CoNLL file.
    Resolve {
        #[arg(long)]
        conll: PathBuf,
        #[arg(long, default_value = "pipeline")]
        mode: Mode,
        /// baseline, oracle, or subprocess:PROGRAM [ARGS...]
        #[arg(long, default_value = "baseline")]
        resolver: ResolverChoice,
        /// Gold CoNLL for oracle resolvers and scoring.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Where to write the resolved CoNLL; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the JSON summary.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also run the other mode and report the cluster differences.
        #[arg(long)]
        compare: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check CoNLL files for invariant violations.
    Validate {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Answer one subprocess-protocol request on stdin with the baselines.
    #[command(hide = true)]
    ProtocolBaseline,
}

fn config(command: Command, c: &Common) -> RunConfig {
    RunConfig {
        cluster_rep: c.cluster_rep,
        azp_hit: c.azp_hit,
        include_pro_in_coref: c.include_pro_in_coref,
        buckets: c.buckets.clone(),
        jobs: c.jobs,
        seed: c.seed,
        ..RunConfig::new(command)
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("outputs serialize"));
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Cmd::Merge { conll, onf, out, common } => {
            let cfg = RunConfig { inputs: vec![conll], onf: Some(onf), out: Some(out), ..config(Command::Merge, &common) };
            let res = cli::cmd_merge(&cfg)?;
            if common.json {
                print_json(&res);
            } else {
                let s = &res.summary;
                println!(
                    "{} files, {} documents: {} AZPs inserted, {} new chains, {} rejected (see {})",
                    s.files,
                    s.documents,
                    s.inserted,
                    s.new_chains,
                    s.rejected,
                    s.reject_log.display()
                );
            }
        }
        Cmd::Stats { conll, common } => {
            let res = cli::cmd_stats(&RunConfig { inputs: vec![conll], ..config(Command::Stats, &common) })?;
            if common.json {
                print_json(&res);
            } else {
                let s = res.stats;
                println!("documents {}\nsentences {}\nwords {}\nazps {}", s.documents, s.sentences, s.words, s.azps);
            }
        }
        Cmd::Score { key, response, common } => {
            let res = cli::cmd_score(&RunConfig { inputs: vec![key, response], ..config(Command::Score, &common) })?;
            if common.json {
                print_json(&res);
            } else {
                let r = &res.report;
                for (name, t) in [("MUC", r.muc), ("B3", r.b_cubed), ("CEAF-phi4", r.ceaf_phi4), ("AZP", r.azp)] {
                    println!("{name:<10} R {:.4}  P {:.4}  F1 {:.4}", t.recall, t.precision, t.f1);
                }
                println!("{:<10} F1 {:.4}", "CoNLL", r.conll_avg_f1);
            }
        }
        Cmd::Resolve { conll, mode, resolver, gold, out, report, compare, common } => {
            let cfg = RunConfig {
                inputs: vec![conll],
                mode,
                resolver,
                gold,
                out: out.clone(),
                compare,
                ..config(Command::Resolve, &common)
            };
            let res = cli::cmd_resolve(&cfg)?;
            let text = res.conll()?;
            match &out {
                Some(p) => std::fs::write(p, &text).map_err(|source| CliError::Io { path: p.clone(), source })?,
                None => print!("{text}"),
            }
            let summary = serde_json::to_string_pretty(&res.summary).expect("summaries serialize");
            match &report {
                Some(p) => std::fs::write(p, summary + "\n").map_err(|source| CliError::Io { path: p.clone(), source })?,
                None if common.json => eprintln!("{summary}"),
                None => {}
            }
        }
        Cmd::Validate { path, common } => {
            let res = cli::cmd_validate(&RunConfig { inputs: vec![path], ..config(Command::Validate, &common) })?;
            if common.json {
                print_json(&res);
            } else {
                for f in &res.findings {
                    println!("{f}");
                }
            }
            if res.has_errors() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Cmd::ProtocolBaseline => {
            let mut request = String::new();
            std::io::stdin().read_to_string(&mut request).map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
            let mut stdout = std::io::stdout();
            writeln!(stdout, "{}", zeroref::harness::subprocess::serve_baseline(&request))
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
