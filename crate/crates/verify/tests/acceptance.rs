//! Acceptance criteria, run sequentially so that wall-clock budgets are
//! measured on an otherwise idle machine. Prints one PASS/FAIL line per
//! criterion and exits non-zero when any fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;
use vsl_bdd::Manager;
use vsl_cli::execute_args;
use vsl_core::bdd_learner::{self, conjoin_in, plan, BuildOptions, ConjunctionOrder, EncodingLayout};
use vsl_core::cardinality::{function_diagram, CountOutcome};
use vsl_core::datagen::{generate, GenSpec};
use vsl_core::oracle::oracle_version_space;
use vsl_core::sat_learner::{
    self, build_cnf, encode_exact_l, encode_positive_sample, BackendKind, SolverLimits, VarMap,
};
use vsl_core::search::{learn, Cardinality, LearnOutcome, VersionSpaceReport};
use vsl_core::{Dataset, Engine, Hypothesis, Label, LearnerConfig, Sample, SubspaceSpec};

struct Verdict {
    pass: bool,
    detail: String,
}

fn below(r: usize, rng: &mut ChaCha8Rng) -> usize {
    (rng.next_u64() % r as u64) as usize
}

fn random_dataset(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let samples = (0..m)
        .map(|_| {
            let bits = (0..n).map(|_| rng.next_u64() & 1 == 1).collect();
            let label = if rng.next_u64() & 1 == 1 {
                Label::Positive
            } else {
                Label::Negative
            };
            Sample::new(bits, label)
        })
        .collect();
    Dataset::new(n, samples).unwrap()
}

/// Terms over pairwise disjoint random features, e.g. `x3&~x17 | x40&x9`.
fn random_target(n: usize, term_sizes: &[usize], rng: &mut ChaCha8Rng) -> String {
    let mut used = HashSet::new();
    let terms: Vec<String> = term_sizes
        .iter()
        .map(|&size| {
            let mut lits = Vec::new();
            while lits.len() < size {
                let f = below(n, rng) + 1;
                if used.insert(f) {
                    let neg = if rng.next_u64() & 1 == 1 { "~" } else { "" };
                    lits.push(format!("{neg}x{f}"));
                }
            }
            lits.join("&")
        })
        .collect();
    terms.join(" | ")
}

fn planted(n: usize, target: &str, m_p: usize, m_n: usize, seed: u64, witness: bool) -> (Hypothesis, Dataset) {
    let target = Hypothesis::parse(target, n).unwrap();
    let g = generate(&GenSpec {
        n,
        target: target.clone(),
        m_p,
        m_n,
        seed,
        per_term_witness: witness,
    })
    .unwrap();
    (target, g.dataset)
}

fn equivalent(a: &Hypothesis, b: &Hypothesis) -> bool {
    let mut m = Manager::new(a.n() as u32);
    function_diagram(&mut m, a).unwrap() == function_diagram(&mut m, b).unwrap()
}

/// Learned a single hypothesis, and whether it computes the target.
fn solved_with_one(r: &VersionSpaceReport, target: &Hypothesis) -> Option<bool> {
    match &r.result {
        LearnOutcome::Solved {
            cardinality: 1,
            hypotheses,
            ..
        } => Some(equivalent(&hypotheses[0], target)),
        _ => None,
    }
}

fn sat_config(l_max: usize, k_max: usize, conflicts: u64) -> LearnerConfig {
    let mut c = LearnerConfig::new(l_max, k_max).with_engine(Engine::Sat);
    c.sat_conflict_limit = Some(conflicts);
    c
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let limits = SolverLimits::default();
    let instances = 400;
    let mut mismatches = Vec::new();
    let mut nonempty = 0;
    for i in 0..instances {
        let n = 2 + below(3, &mut rng);
        let k = 1 + below(2, &mut rng);
        // sub-spaces wider than n*k slots are empty by size and never reach an engine
        let l = k + below(4.min(n * k) + 1 - k, &mut rng);
        let m = below(7, &mut rng);
        let data = random_dataset(n, m, &mut rng);
        let spec = SubspaceSpec::new(l, k).unwrap();
        let oracle = oracle_version_space(&data, spec).unwrap();
        nonempty += usize::from(oracle.count() > 0);
        let want = (CountOutcome::Exact(oracle.count()), oracle.representatives());
        let bdd = bdd_learner::learn_subspace(&data, spec, usize::MAX, &BuildOptions::default()).unwrap();
        let sat =
            sat_learner::learn_subspace(&data, spec, usize::MAX, usize::MAX, &BackendKind::Embedded, &limits).unwrap();
        for (name, r) in [("bdd", bdd), ("sat", sat)] {
            let got = (r.outcome, r.members.iter().map(|h| h.to_string()).collect::<Vec<_>>());
            if got != want {
                mismatches.push(format!("#{i} {name} n={n} {spec}"));
            }
        }
    }
    Verdict {
        pass: mismatches.is_empty(),
        detail: format!(
            "{instances} instances ({nonempty} non-empty), {} mismatches {:?}",
            mismatches.len(),
            mismatches.iter().take(5).collect::<Vec<_>>()
        ),
    }
}

fn monomial_shape() -> Verdict {
    let target = "x2&~x75&x63&x78&~x80";
    let start = Instant::now();
    let mut shaped = 0;
    let mut unsound = 0;
    let mut other = Vec::new();
    for m_p in [0, 1, 2] {
        let mut outcomes = Vec::new();
        for seed in 0..10 {
            let (t, data) = planted(100, target, m_p, 1000, seed, false);
            // only the two-positive runs are gated on shape; the others get a small budget
            let conflicts = if m_p == 2 { 2_000_000 } else { 20_000 };
            let r = learn(&data, &sat_config(5, 1, conflicts)).unwrap();
            if solved_with_one(&r, &t) == Some(false) {
                unsound += 1;
            }
            let cards: Vec<Option<Cardinality>> = r.visited.iter().map(|v| v.cardinality).collect();
            let mut expected = vec![Some(Cardinality::Exact(0)); 4];
            expected.push(Some(Cardinality::Exact(1)));
            if m_p == 2 && cards == expected && solved_with_one(&r, &t) == Some(true) {
                shaped += 1;
            }
            outcomes.push(kind(&r.result));
        }
        if m_p < 2 {
            other.push(format!("m_p={m_p}: {}", summarize(&outcomes)));
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: shaped >= 9 && unsound == 0 && elapsed < Duration::from_secs(600),
        detail: format!(
            "m_p=2 shape held in {shaped}/10 seeds (need 9); unsound {unsound}; {}; {:.0} s (limit 600)",
            other.join(", "),
            elapsed.as_secs_f64()
        ),
    }
}

fn kind(r: &LearnOutcome) -> &'static str {
    match r {
        LearnOutcome::Solved { .. } => "solved",
        LearnOutcome::NoFit => "nofit",
        LearnOutcome::Overfit { .. } => "overfit",
        LearnOutcome::Conflict { .. } => "conflict",
        LearnOutcome::Aborted { .. } => "aborted",
    }
}

fn summarize(kinds: &[&str]) -> String {
    let mut distinct: Vec<&str> = kinds.to_vec();
    distinct.sort();
    distinct.dedup();
    distinct
        .iter()
        .map(|k| format!("{} {k}", kinds.iter().filter(|x| *x == k).count()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn one_term_recovery() -> Verdict {
    let start = Instant::now();
    let mut unsound = 0;
    let mut solved_two = 0;
    let mut runs_two = 0;
    let mut misses = Vec::new();
    for l in 3..=7 {
        for m_p in [0, 1, 2] {
            for seed in 0..5u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 * l as u64 + seed);
                let target = random_target(100, &[l], &mut rng);
                let (t, data) = planted(100, &target, m_p, 10_000, seed, false);
                // budgets keep the whole sweep inside its time limit
                let conflicts = if m_p == 2 { 150_000 } else { 10_000 };
                let r = learn(&data, &sat_config(7, 1, conflicts)).unwrap();
                match solved_with_one(&r, &t) {
                    Some(false) => unsound += 1,
                    Some(true) if m_p == 2 => solved_two += 1,
                    _ => {}
                }
                if m_p == 2 {
                    runs_two += 1;
                    if solved_with_one(&r, &t) != Some(true) {
                        let at = r.visited.last().map(|v| v.spec.to_string()).unwrap_or_default();
                        misses.push(format!("l={l} seed={seed} {} at {at}", kind(&r.result)));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: unsound == 0 && solved_two == runs_two && elapsed < Duration::from_secs(1800),
        detail: format!(
            "unsound {unsound}/75; m_p=2 solved with 1 in {solved_two}/{runs_two} (need all); {:.0} s (limit 1800); misses {misses:?}",
            elapsed.as_secs_f64()
        ),
    }
}

fn two_term_recovery() -> Verdict {
    let start = Instant::now();
    let (mut recovered, mut unsound) = (0, 0);
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(77 + seed);
        let a = 2 + below(2, &mut rng);
        let b = 2 + below(2, &mut rng);
        let target = random_target(30, &[a, b], &mut rng);
        let (t, data) = planted(30, &target, 6, 2000, seed, true);
        let r = learn(&data, &LearnerConfig::new(6, 2)).unwrap();
        match solved_with_one(&r, &t) {
            Some(true) => recovered += 1,
            Some(false) => unsound += 1,
            None => {}
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: recovered >= 8 && unsound == 0 && elapsed < Duration::from_secs(1800),
        detail: format!(
            "recovered {recovered}/10 (need 8); unsound {unsound}; {:.1} s (limit 1800)",
            elapsed.as_secs_f64()
        ),
    }
}

fn encoding_arithmetic() -> Verdict {
    let (n, k) = (100, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sample: Vec<bool> = (0..n).map(|_| rng.next_u64() & 1 == 1).collect();
    let mut faults = Vec::new();
    for l in k..=7 {
        let vm = VarMap::new(n, k, l, 1);
        let clauses = encode_positive_sample(&sample, 0, &vm).len();
        if clauses != (n + 1) * k + 1 || clauses != 304 {
            faults.push(format!("l={l}: {clauses} positive-sample clauses"));
        }
        if vm.counter_vars() != l * (n * k - 1) {
            faults.push(format!("l={l}: {} counter variables", vm.counter_vars()));
        }
        // the counter's clauses mention exactly those registers
        let used: HashSet<u32> = encode_exact_l(&vm)
            .unwrap()
            .iter()
            .flatten()
            .map(|lit| lit.var())
            .filter(|&v| v as usize > 3 * n * k)
            .collect();
        if used.len() != l * (n * k - 1) {
            faults.push(format!("l={l}: counter clauses use {} registers", used.len()));
        }
    }
    // with one term there are no ordering variables: slots, registers, one indicator per positive
    let data = Dataset::new(n, vec![Sample::new(sample, Label::Positive)]).unwrap();
    let (cnf, _) = build_cnf(&data, SubspaceSpec::new(5, 1).unwrap()).unwrap();
    if cnf.num_vars() as usize != 3 * n + 5 * (n - 1) + 1 {
        faults.push(format!("(5,1) formula has {} variables", cnf.num_vars()));
    }
    Verdict {
        pass: faults.is_empty(),
        detail: if faults.is_empty() {
            "304 clauses per positive sample, l(nk-1) counter variables for l=3..7".into()
        } else {
            faults.join("; ")
        },
    }
}

fn order_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut differing_roots, mut differing_counts, mut differing_traces) = (0, 0, 0);
    for _ in 0..50 {
        let n = 3 + below(3, &mut rng);
        let k = 1 + below(2, &mut rng);
        let l = k + below(4 - k, &mut rng);
        let data = random_dataset(n, 2 + below(7, &mut rng), &mut rng);
        let spec = SubspaceSpec::new(l, k).unwrap();
        let layout = EncodingLayout::new(n, k);
        let mut m = Manager::new(layout.var_count());
        let base = plan(&data, spec, &ConjunctionOrder::Heuristic);
        let mut roots = Vec::new();
        let mut counts = Vec::new();
        let mut traces = Vec::new();
        for _ in 0..3 {
            let mut order = base.clone();
            for i in (1..order.len()).rev() {
                order.swap(i, below(i + 1, &mut rng));
            }
            let options = BuildOptions {
                order: ConjunctionOrder::Explicit(order),
                trace: true,
                ..BuildOptions::default()
            };
            let (root, trace) = conjoin_in(&mut m, &layout, &data, spec, &options).unwrap();
            counts.push(m.count_minterms(root, layout.var_count()).unwrap());
            roots.push(root);
            traces.push(trace.iter().map(|t| t.nodes).collect::<Vec<_>>());
        }
        differing_roots += usize::from(roots.iter().any(|r| *r != roots[0]));
        differing_counts += usize::from(counts.iter().any(|c| *c != counts[0]));
        differing_traces += usize::from(traces.iter().any(|t| *t != traces[0]));
    }
    Verdict {
        pass: differing_roots == 0 && differing_counts == 0,
        detail: format!(
            "50 instances x 3 orders: roots differ in {differing_roots}, counts differ in {differing_counts}, node traces differ in {differing_traces}"
        ),
    }
}

fn determinism() -> Verdict {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("d.csv");
    let data_arg = data.to_str().unwrap();
    let target = "x4&~x9&x17 | ~x2&x25";
    let gen = [
        "vsl", "gen", "--n", "30", "--target", target, "--mp", "6", "--mn", "500", "--seed", "5",
    ];
    let code = execute_args(gen.into_iter().chain(["--witness", "--out", data_arg])).unwrap();
    assert_eq!(code, 0);
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        // an empty solver command selects the embedded solver whatever the environment says
        let args = [
            "vsl", "learn", "--lmax", "6", "--kmax", "2", "--engine", "race", "--solver", "",
        ];
        let code = execute_args(
            args.into_iter()
                .chain(["--data", data_arg, "--out", out.to_str().unwrap()]),
        )
        .unwrap();
        let mut r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        for v in r["visited"].as_array_mut().unwrap() {
            v.as_object_mut().unwrap().remove("timing");
        }
        reports.push((code, r));
    }
    Verdict {
        pass: reports[0] == reports[1] && reports[0].0 == 0,
        detail: format!(
            "two `learn` runs: exit {}/{}, reports {} modulo timing",
            reports[0].0,
            reports[1].0,
            if reports[0].1 == reports[1].1 {
                "identical"
            } else {
                "differ"
            }
        ),
    }
}

fn main() {
    // `cargo test -- <filter>` passes the filter through; honour it loosely
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("monomial version-space shape", monomial_shape),
        ("one-term recovery", one_term_recovery),
        ("two-term recovery", two_term_recovery),
        ("encoding arithmetic", encoding_arithmetic),
        ("conjunction-order invariance", order_invariance),
        ("report determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        failed += usize::from(!v.pass);
        println!(
            "{} {name}: {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
