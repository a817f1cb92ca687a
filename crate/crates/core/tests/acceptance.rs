//! Acceptance criteria, one line each. Run with
//! `cargo test --test acceptance -- --nocapture` or just look at the output
//! of `cargo test`.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL but do not fail
//! the target; each one is explained next to the list.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::oracle::{self, q};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeroref::cli::{cmd_resolve, cmd_stats, Command, Mode, RunConfig};
use zeroref::conll::{extract_mentions, parse_conll, write_conll};
use zeroref::harness::losses::{
    loss_azp_resolution, loss_azp_resolution_grad, loss_bce, loss_bce_grad, loss_coref_marginal,
    loss_coref_marginal_grad, loss_coref_marginal_unchecked, ProbabilityTable,
};
use zeroref::harness::{run_joint_test, run_pipeline, GoldAzpIdentifier, GoldAzpResolver, GoldCoref, HarnessConfig};
use zeroref::merge::{apply_merge, plan_merge, strip_azps, strip_merge, CorpusStats, Provenance, RowFill};
use zeroref::model::{Azp, ChainId, ClusterSet, Member, Mention};
use zeroref::scoring::{
    azp_counts, b_cubed_counts, ceaf_phi4_counts, ceaf_phi4_similarity, conll_average, muc_counts, resolution_records,
    score_document, AzpHitMode, ScoreOptions, ScoreTriple,
};

/// 3: the published 67.1 is not the mean of 70.0, 65.3 and 66.2 (67.17).
const KNOWN_FAILURES: &[u32] = &[3];

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

type Groups = Vec<Vec<u32>>;

fn random_partition(rng: &mut ChaCha8Rng, n: u32, k: u32, keep: f64) -> Groups {
    let mut by: std::collections::BTreeMap<u32, Vec<u32>> = Default::default();
    for m in 0..n {
        if rng.gen_bool(keep) {
            by.entry(rng.gen_range(0..k)).or_default().push(m);
        }
    }
    by.into_values().collect()
}

// 1
fn scorer_oracles() -> Outcome {
    let start = Instant::now();
    let g = |groups: &[&[u32]]| -> Groups { groups.iter().map(|c| c.to_vec()).collect() };
    let (a, b, c, d, e) = (0, 1, 2, 3, 4);
    // key, response, MUC (r, p), B3 (r, p), CEAF (r, p), worked out by hand
    #[allow(clippy::type_complexity)]
    let hand: Vec<(Groups, Groups, [(i64, i64); 6])> = vec![
        (g(&[&[a, b, c]]), g(&[&[a, b], &[c]]), [(1, 2), (1, 1), (5, 9), (1, 1), (4, 5), (2, 5)]),
        (g(&[&[a, b], &[c]]), g(&[&[a, b], &[c]]), [(1, 1), (1, 1), (1, 1), (1, 1), (1, 1), (1, 1)]),
        (g(&[&[a, b]]), g(&[&[c, d]]), [(0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)]),
        (g(&[&[a, b, c, d]]), g(&[&[a, b], &[c, d]]), [(2, 3), (1, 1), (1, 2), (1, 1), (2, 3), (1, 3)]),
        (g(&[&[a, b], &[c, d]]), g(&[&[a, b, c, d]]), [(1, 1), (2, 3), (1, 1), (1, 2), (1, 3), (2, 3)]),
        (g(&[&[a], &[b]]), g(&[&[a, b]]), [(0, 1), (0, 1), (1, 1), (1, 2), (1, 3), (2, 3)]),
        (g(&[&[a, b, c]]), g(&[&[a, b, d]]), [(1, 2), (1, 2), (4, 9), (4, 9), (2, 3), (2, 3)]),
        (g(&[&[a, b], &[c, d], &[e]]), g(&[&[a, c], &[b, d, e]]), [(0, 1), (0, 1), (3, 5), (2, 5), (1, 3), (1, 2)]),
        (g(&[&[a, b]]), g(&[]), [(0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)]),
        (g(&[]), g(&[]), [(0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)]),
    ];
    let mut failures = Vec::new();
    for (i, (key, resp, v)) in hand.iter().enumerate() {
        let expect = |k: usize| (q(v[k].0, v[k].1), q(v[k + 1].0, v[k + 1].1));
        let m = muc_counts(key, resp);
        let b3 = b_cubed_counts(key, resp);
        let ce = ceaf_phi4_counts(key, resp);
        let got = [(m.recall(), m.precision()), (b3.recall(), b3.precision()), (ce.recall(), ce.precision())];
        let oracle = [oracle::muc(key, resp), oracle::b_cubed(key, resp), oracle::ceaf_phi4(key, resp)];
        for (j, name) in ["MUC", "B3", "CEAF"].iter().enumerate() {
            if got[j] != expect(2 * j) || got[j] != oracle[j] {
                failures.push(format!("hand pair {i} {name}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let random = 40;
    for i in 0..random {
        let n = rng.gen_range(1..=8);
        let key = random_partition(&mut rng, n, 4, 0.9);
        let resp = random_partition(&mut rng, n, 4, 0.9);
        let m = muc_counts(&key, &resp);
        let b3 = b_cubed_counts(&key, &resp);
        let ce = ceaf_phi4_counts(&key, &resp);
        if (m.recall(), m.precision()) != oracle::muc(&key, &resp)
            || (b3.recall(), b3.precision()) != oracle::b_cubed(&key, &resp)
            || (ce.recall(), ce.precision()) != oracle::ceaf_phi4(&key, &resp)
        {
            failures.push(format!("random pair {i}"));
        }
    }
    // the floating-point view of the worked pair
    let t = muc_counts(&hand[0].0, &hand[0].1).triple();
    if (t.f1 - 2.0 / 3.0).abs() > 1e-9 {
        failures.push("worked pair MUC F1".into());
    }
    let took = start.elapsed();
    let detail = format!("{} hand + {random} random pairs, {} mismatches, {took:.2?}", hand.len(), failures.len());
    check(failures.is_empty() && took < Duration::from_secs(5), format!("{detail} {failures:?}"))
}

// 2
fn ceaf_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=14);
        let key = random_partition(&mut rng, n, 6, 0.85);
        let resp = random_partition(&mut rng, n, 6, 0.85);
        if ceaf_phi4_similarity(&key, &resp) != oracle::ceaf_best(&key, &resp) {
            bad += 1;
        }
    }
    check(bad == 0, format!("200 instances up to 6x6 clusters, {bad} differ from exhaustive search"))
}

// 3
fn conll_average_regression() -> Outcome {
    let triple = |f1: f64| ScoreTriple { recall: f1, precision: f1, f1 };
    let rows = [([66.5, 61.2, 62.7], 63.5), ([70.0, 65.3, 66.2], 67.1)];
    let mut parts = Vec::new();
    let mut ok = true;
    for (f, published) in rows {
        let avg = conll_average(&triple(f[0]), &triple(f[1]), &triple(f[2]));
        let within = (avg - published).abs() <= 0.05;
        ok &= within;
        parts.push(format!("{f:?} -> {avg:.4} vs {published} ({})", if within { "ok" } else { "off by more than 0.05" }));
    }
    check(ok, parts.join("; "))
}

fn random_azp_world(rng: &mut ChaCha8Rng) -> ClusterSet {
    let mut by: std::collections::BTreeMap<ChainId, BTreeSet<Member>> = Default::default();
    for _ in 0..rng.gen_range(0..12) {
        let (s, i) = (rng.gen_range(0..3), rng.gen_range(0..4));
        let m = if rng.gen_bool(0.5) { Member::Azp(Azp::new(0, s, i)) } else { Member::Mention(Mention::new(0, s, i, i)) };
        if by.values().any(|c| c.contains(&m)) {
            continue;
        }
        by.entry(rng.gen_range(0..4)).or_default().insert(m);
    }
    ClusterSet::from_groups(by.into_iter().map(|(id, m)| (id, m.into_iter().collect())))
}

// 4
fn azp_formulas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = 0;
    let trials = 300;
    for _ in 0..trials {
        let key = random_azp_world(&mut rng);
        let resp = random_azp_world(&mut rng);
        let records = resolution_records(&resp);
        let pairs: Vec<(Azp, ChainId)> = records.iter().map(|r| (r.position, r.resolved_cluster)).collect();
        for mode in [AzpHitMode::PositionOnly, AzpHitMode::PositionAndEntity] {
            let c = azp_counts(&key.azp_records(), &records, &key, &resp, mode);
            if (c.recall(), c.precision()) != oracle::azp(&key.azp_records(), &pairs, &key, &resp, mode) {
                bad += 1;
            }
        }
    }
    check(bad == 0, format!("{trials} random key/response sets x 2 hit modes, {bad} mismatches"))
}

// 5
fn merge_correctness() -> Outcome {
    let onf = load_onf("figure1.onf", "figure1");
    let doc = load("figure1.conll");
    let plan = match plan_merge(&onf, &doc) {
        Ok(p) => p,
        Err(e) => return Fail(format!("plan failed: {e}")),
    };
    let merged = match apply_merge(&plan, &doc) {
        Ok(m) => m,
        Err(e) => return Fail(format!("apply failed: {e}")),
    };
    let clusters = extract_mentions(&merged);
    let new: Vec<ChainId> = plan.new_chain_ids().into_iter().collect();
    let new_sizes: Vec<usize> = new.iter().filter_map(|id| clusters.get(*id)).map(|c| c.len()).collect();
    let joined: Vec<(ChainId, ChainId)> = plan
        .insertions
        .iter()
        .filter(|i| i.provenance == Provenance::ExistingChain)
        .map(|i| (i.onf_chain, i.chain_id))
        .collect();
    let expected = write_conll(&[merged.clone()]).ok() == Some(fixture_text("figure1_merged.conll"));
    let restored = write_conll(&[strip_merge(&merged, &plan)]).ok() == Some(fixture_text("figure1.conll"));

    let basic = load("basic.conll");
    let identity = plan_merge(&load_onf("basic.onf", "basic"), &basic)
        .and_then(|p| apply_merge(&p, &basic))
        .ok()
        .and_then(|m| write_conll(&[m]).ok())
        == Some(fixture_text("basic.conll"));

    let ok = new_sizes == vec![2] && joined == vec![(92, 5)] && expected && restored && identity;
    check(
        ok,
        format!(
            "new chains {new:?} sizes {new_sizes:?}; joined (onf, conll) {joined:?}; expected file {expected}; \
             strip-and-restore {restored}; AZP-free identity {identity}"
        ),
    )
}

// 6
fn round_trip() -> Outcome {
    let mut bad = Vec::new();
    for name in CONLL_FIXTURES {
        let text = fixture_text(name);
        let ok = parse_conll(&text)
            .ok()
            .and_then(|docs| write_conll(&docs).ok().map(|w| (docs, w)))
            .is_some_and(|(docs, w)| w == text && parse_conll(&w).ok() == Some(docs));
        if !ok {
            bad.push(*name);
        }
    }
    let padded = load("basic_aligned.conll");
    let canonical = write_conll(&[padded]).ok() == Some(fixture_text("basic.conll"));
    check(
        bad.is_empty() && canonical,
        format!("{} fixtures, failing {bad:?}; padded input canonicalizes {canonical}", CONLL_FIXTURES.len()),
    )
}

// 7
fn oracle_end_to_end() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for name in ["bush_extended.conll", "figure1_merged.conll", "multipart.conll", "table2_extended.conll"] {
        for gold_doc in load_all(name) {
            let gold = extract_mentions(&gold_doc);
            let masked = strip_azps(&gold_doc);
            let pipe = run_pipeline(
                &masked,
                &GoldCoref::new(gold.clone()),
                &GoldAzpIdentifier::new(&gold),
                &GoldAzpResolver::new(&gold),
                &HarnessConfig::default(),
            );
            let joint =
                run_joint_test(&masked, &GoldAzpIdentifier::new(&gold), &GoldCoref::new(gold.clone()), &RowFill::default());
            for (mode, clusters) in [("pipeline", pipe.map(|o| o.clusters)), ("joint", joint.map(|o| o.clusters))] {
                match clusters {
                    Ok(c) => {
                        let r = score_document(&gold, &c, &ScoreOptions::default());
                        let (avg, azp) = (100.0 * r.conll_avg_f1, 100.0 * r.azp.f1);
                        ok &= avg == 100.0 && azp == 100.0;
                        lines.push(format!("{name} {mode} {avg:.1}/{azp:.1}"));
                    }
                    Err(e) => {
                        ok = false;
                        lines.push(format!("{name} {mode} error {e}"));
                    }
                }
            }
        }
    }
    check(ok, format!("CoNLL avg/AZP F1: {}", lines.join(", ")))
}

fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn random_table(rng: &mut ChaCha8Rng, normalized: bool) -> (ProbabilityTable, Vec<BTreeSet<u32>>) {
    let n = rng.gen_range(1..5);
    let mut rows = Vec::new();
    let mut gold = Vec::new();
    for _ in 0..n {
        let k = rng.gen_range(2..6);
        let mut probs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..0.95)).collect();
        if normalized {
            let s: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= s);
        }
        rows.push(probs.into_iter().enumerate().map(|(c, p)| (c as u32, p)).collect::<Vec<_>>());
        let mut g: BTreeSet<u32> = (0..k as u32).filter(|_| rng.gen_bool(0.4)).collect();
        if g.is_empty() {
            g.insert(rng.gen_range(0..k as u32));
        }
        gold.push(g);
    }
    (ProbabilityTable::new(rows), gold)
}

fn worst_table_gradient(
    table: &ProbabilityTable,
    loss: impl Fn(&ProbabilityTable) -> f64,
    grad: &[Vec<f64>],
) -> f64 {
    const H: f64 = 1e-5;
    let probs = table.probs();
    let flat: Vec<f64> = grad.iter().flatten().copied().collect();
    (0..probs.len())
        .map(|i| {
            let mut up = probs.clone();
            let mut down = probs.clone();
            up[i] += H;
            down[i] -= H;
            let fd = (loss(&table.with_probs(&up)) - loss(&table.with_probs(&down))) / (2.0 * H);
            relative_error(flat[i], fd)
        })
        .fold(0.0, f64::max)
}

// 8
fn loss_analytics() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut expect = |what: &str, got: Result<f64, _>, want: f64, tol: f64| {
        let good = matches!(got, Ok(v) if (v - want).abs() <= tol);
        ok &= good;
        if !good {
            notes.push(format!("{what}: {got:?} vs {want}"));
        }
    };
    let set = |ids: &[u32]| ids.iter().copied().collect::<BTreeSet<u32>>();
    expect("bce(1, 0.5)", loss_bce(&[true], &[0.5]), std::f64::consts::LN_2, 1e-9);
    expect("bce([1,0], [0.9,0.1])", loss_bce(&[true, false], &[0.9, 0.1]), -(0.9f64.ln()), 1e-12);
    expect("bce perfect", loss_bce(&[true, false], &[1.0, 0.0]), 0.0, 1.0001e-7);
    let one = |p: f64| ProbabilityTable::new(vec![vec![(0, p), (1, 1.0 - p)]]);
    expect("azp p=1", loss_azp_resolution(&one(1.0), &[set(&[0])]), 0.0, 1.0001e-7);
    expect("azp p=1/e", loss_azp_resolution(&one((-1.0f64).exp()), &[set(&[0])]), 1.0, 1e-12);
    let two = ProbabilityTable::new(vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 0.25), (1, 0.75)]]);
    expect("azp 0.5 and 0.25", loss_azp_resolution(&two, &[set(&[0]), set(&[0])]), 2.0f64.ln() + 4.0f64.ln(), 1e-12);
    expect("marginal perfect", loss_coref_marginal(&one(1.0), &[set(&[0])]), 0.0, 1e-12);
    expect("marginal all gold", loss_coref_marginal(&two, &[set(&[0, 1]), set(&[1, 0])]), 0.0, 1e-12);
    expect("marginal ln 2", loss_coref_marginal(&one(0.5), &[set(&[1])]), std::f64::consts::LN_2, 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let labels: Vec<bool> = (0..6).map(|_| rng.gen_bool(0.5)).collect();
        let probs: Vec<f64> = (0..6).map(|_| rng.gen_range(0.05..0.95)).collect();
        let g = loss_bce_grad(&labels, &probs).unwrap();
        let t = ProbabilityTable::new(vec![probs.iter().enumerate().map(|(i, p)| (i as u32, *p)).collect()]);
        worst = worst.max(worst_table_gradient(&t, |t| loss_bce(&labels, &t.probs()).unwrap(), &[g]));

        let (t, gold) = random_table(&mut rng, false);
        let g = loss_azp_resolution_grad(&t, &gold).unwrap();
        worst = worst.max(worst_table_gradient(&t, |t| loss_azp_resolution(t, &gold).unwrap(), &g));

        let (t, gold) = random_table(&mut rng, true);
        let g = loss_coref_marginal_grad(&t, &gold).unwrap();
        worst = worst.max(worst_table_gradient(&t, |t| loss_coref_marginal_unchecked(t, &gold).unwrap(), &g));
    }
    ok &= worst <= 1e-4;
    notes.push(format!("worst finite-difference relative error {worst:.1e} over 100 tables per loss"));
    check(ok, notes.join("; "))
}

// 9
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    for name in ["bush_extended.conll", "figure1_merged.conll", "multipart.conll", "table2_extended.conll"] {
        std::fs::copy(fixture_path(name), dir.path().join(name)).expect("copy fixture");
    }
    let mut same = true;
    for mode in [Mode::Pipeline, Mode::Joint] {
        let cfg = RunConfig {
            inputs: vec![dir.path().to_path_buf()],
            mode,
            seed: 11,
            jobs: 4,
            compare: true,
            ..RunConfig::new(Command::Resolve)
        };
        let run = || {
            cmd_resolve(&cfg).ok().and_then(|o| {
                let summary = serde_json::to_string(&o.summary).ok()?;
                Some((o.conll().ok()?, summary))
            })
        };
        let (a, b) = (run(), run());
        same &= a.is_some() && a == b;
    }
    check(same, "two runs per mode, CoNLL output and JSON summary compared byte for byte".into())
}

// 10
fn table1_stats() -> Outcome {
    let Some(root) = std::env::var_os("AZP_CONLL_SPLITS_DIR").map(PathBuf::from) else {
        return Skip("set AZP_CONLL_SPLITS_DIR to a directory with train/, dev/ and test/ extended files".into());
    };
    let expected = [
        ("train", CorpusStats { documents: 359, sentences: 7422, words: 264_589, azps: 3495 }),
        ("dev", CorpusStats { documents: 44, sentences: 950, words: 30_942, azps: 474 }),
        ("test", CorpusStats { documents: 44, sentences: 1003, words: 30_935, azps: 412 }),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (split, want) in expected {
        let cfg = RunConfig { inputs: vec![root.join(split)], ..RunConfig::new(Command::Stats) };
        match cmd_stats(&cfg) {
            Ok(out) => {
                ok &= out.stats == want;
                let s = out.stats;
                parts.push(format!("{split} {}/{}/{}/{}", s.documents, s.sentences, s.words, s.azps));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{split}: {e}"));
            }
        }
    }
    check(ok, parts.join(", "))
}

fn main() -> ExitCode {
    let suite = Instant::now();
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "scorer oracle suite", scorer_oracles),
        (2, "CEAF alignment optimality", ceaf_optimality),
        (3, "CoNLL-average regression", conll_average_regression),
        (4, "AZP score formulas", azp_formulas),
        (5, "merge correctness", merge_correctness),
        (6, "round trip", round_trip),
        (7, "oracle end-to-end", oracle_end_to_end),
        (8, "loss analytics", loss_analytics),
        (9, "determinism", determinism),
        (10, "extended split statistics", table1_stats),
    ];
    let mut unexpected = Vec::new();
    let mut report = |id: u32, name: &str, outcome: Outcome| {
        let known = KNOWN_FAILURES.contains(&id);
        let (tag, detail) = match outcome {
            Pass(d) => {
                if known {
                    unexpected.push(format!("{id} passes but is listed as a known failure"));
                }
                ("PASS", d)
            }
            Fail(d) => {
                if !known {
                    unexpected.push(format!("{id} failed"));
                }
                ("FAIL", if known { format!("{d} [known, see KNOWN_FAILURES]") } else { d })
            }
            Skip(d) => ("SKIP", d),
        };
        println!("{tag} {id:>2} {name}: {detail}");
    };
    for (id, name, run) in criteria {
        report(id, name, run());
    }
    let took = suite.elapsed();
    report(
        11,
        "fixture suite runtime",
        check(took < Duration::from_secs(60), format!("criteria 1-10 took {took:.2?}; limit 60 s")),
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("acceptance: {}", unexpected.join("; "));
        ExitCode::FAILURE
    }
}
