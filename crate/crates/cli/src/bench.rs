//! Benchmark sweeps over generated datasets, emitted as CSV for plotting.
//!
//! The configuration is a JSON object `{"sweeps": [...]}`; every sweep has
//! a `kind` and the fields of [`DataSpec`] plus its own parameters. Sweep
//! `i` is written to `<out_dir>/<i>_<kind>.csv`.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use serde::Deserialize;
use vsl_core::bdd_learner::{build_version_space, semantic_cardinality, BuildOptions, ConjunctionOrder, Constraint};
use vsl_core::cardinality::CountOutcome;
use vsl_core::datagen::{generate, GenSpec};
use vsl_core::sat_learner::{self, BackendKind, SolverLimits};
use vsl_core::{Dataset, Hypothesis, Label, SubspaceSpec};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub sweeps: Vec<Sweep>,
}

/// Planted-target dataset shared by all sweep kinds.
#[derive(Debug, Clone, Deserialize)]
pub struct DataSpec {
    pub n: usize,
    pub target: String,
    pub m_n: usize,
    #[serde(default)]
    pub witness: bool,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BenchEngine {
    Bdd,
    Sat,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sweep {
    /// Outcome and runtime per sub-space size, engine and positive count.
    LSweep {
        #[serde(flatten)]
        data: DataSpec,
        m_p: Vec<usize>,
        seeds: Vec<u64>,
        l: Vec<usize>,
        #[serde(default = "one")]
        k: usize,
        engines: Vec<BenchEngine>,
        #[serde(default = "one")]
        bound: usize,
        bdd_node_limit: Option<usize>,
        sat_conflict_limit: Option<u64>,
    },
    /// Diagram size after each conjoined constraint (positives first).
    SampleTrace {
        #[serde(flatten)]
        data: DataSpec,
        m_p: usize,
        seed: u64,
        l: usize,
        #[serde(default = "one")]
        k: usize,
        bdd_node_limit: Option<usize>,
    },
    /// Positives-first against negatives-first build times.
    PosNegOrder {
        #[serde(flatten)]
        data: DataSpec,
        m_p: usize,
        seeds: Vec<u64>,
        l: usize,
        #[serde(default = "one")]
        k: usize,
        bdd_node_limit: Option<usize>,
    },
    /// Sub-space constraint first against last.
    SubspacePlacement {
        #[serde(flatten)]
        data: DataSpec,
        m_p: usize,
        seeds: Vec<u64>,
        l: usize,
        #[serde(default = "one")]
        k: usize,
        bdd_node_limit: Option<usize>,
    },
}

fn one() -> usize {
    1
}

impl Sweep {
    fn name(&self) -> &'static str {
        match self {
            Sweep::LSweep { .. } => "l_sweep",
            Sweep::SampleTrace { .. } => "sample_trace",
            Sweep::PosNegOrder { .. } => "pos_neg_order",
            Sweep::SubspacePlacement { .. } => "subspace_placement",
        }
    }
}

fn dataset(d: &DataSpec, m_p: usize, seed: u64) -> Result<Dataset> {
    let target = Hypothesis::parse(&d.target, d.n)?;
    let g = generate(&GenSpec {
        n: d.n,
        target,
        m_p,
        m_n: d.m_n,
        seed,
        per_term_witness: d.witness,
    })?;
    Ok(g.dataset)
}

fn outcome_text(o: &CountOutcome) -> String {
    match o {
        CountOutcome::Exact(c) => format!("exact:{c}"),
        CountOutcome::Exceeds(c) => format!("exceeds:{c}"),
    }
}

fn constraint_text(c: Constraint, data: &Dataset) -> String {
    match c {
        Constraint::Base => "base".into(),
        Constraint::Subspace => "subspace".into(),
        Constraint::Lex(j) => format!("lex{}", j + 1),
        Constraint::Sample(i) => match data.samples()[i].label {
            Label::Positive => format!("pos{i}"),
            Label::Negative => format!("neg{i}"),
        },
    }
}

fn build_options(order: ConjunctionOrder, node_limit: Option<usize>) -> BuildOptions {
    BuildOptions {
        order,
        node_limit,
        interrupt: None,
        trace: true,
    }
}

/// Geometric mean of positive values.
pub fn geometric_mean(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64).exp()
}

/// Build time in milliseconds, or the error text. Untraced so that node
/// counting does not distort the timing.
fn timed_build(
    data: &Dataset,
    spec: SubspaceSpec,
    order: ConjunctionOrder,
    node_limit: Option<usize>,
) -> std::result::Result<f64, String> {
    let mut opts = build_options(order, node_limit);
    opts.trace = false;
    let t = Instant::now();
    build_version_space(data, spec, &opts).map_err(|e| e.to_string())?;
    Ok(t.elapsed().as_secs_f64() * 1e3)
}

fn csv_ms(r: &std::result::Result<f64, String>) -> String {
    match r {
        Ok(v) => format!("{v:.3}"),
        Err(e) => format!("\"error: {}\"", e.replace('"', "'")),
    }
}

fn paired_orders(
    data: &DataSpec,
    m_p: usize,
    seeds: &[u64],
    spec: SubspaceSpec,
    node_limit: Option<usize>,
    orders: [(&str, ConjunctionOrder); 2],
) -> Result<String> {
    let [(a_name, a), (b_name, b)] = orders;
    let mut out = format!("seed,{a_name}_ms,{b_name}_ms,ratio\n");
    let mut ratios = Vec::new();
    for &seed in seeds {
        let d = dataset(data, m_p, seed)?;
        let ta = timed_build(&d, spec, a.clone(), node_limit);
        let tb = timed_build(&d, spec, b.clone(), node_limit);
        let ratio = match (&ta, &tb) {
            (Ok(x), Ok(y)) if *x > 0.0 && *y > 0.0 => {
                ratios.push(x / y);
                format!("{:.6}", x / y)
            }
            _ => String::new(),
        };
        writeln!(out, "{seed},{},{},{ratio}", csv_ms(&ta), csv_ms(&tb))?;
    }
    if !ratios.is_empty() {
        writeln!(out, "geomean,,,{:.6}", geometric_mean(&ratios))?;
    }
    Ok(out)
}

fn run_sweep(s: &Sweep) -> Result<String> {
    match s {
        Sweep::LSweep {
            data,
            m_p,
            seeds,
            l,
            k,
            engines,
            bound,
            bdd_node_limit,
            sat_conflict_limit,
        } => {
            ensure!(
                !m_p.is_empty() && !seeds.is_empty() && !l.is_empty() && !engines.is_empty(),
                "l_sweep has an empty axis"
            );
            let mut out = String::from("m_p,seed,l,k,engine,outcome,elapsed_ms,peak_nodes\n");
            for &mp in m_p {
                for &seed in seeds {
                    let d = dataset(data, mp, seed)?;
                    for &ll in l {
                        let spec = SubspaceSpec::new(ll, *k)?;
                        for &engine in engines {
                            let t = Instant::now();
                            let (outcome, peak) = match engine {
                                BenchEngine::Bdd => {
                                    let opts = build_options(ConjunctionOrder::Heuristic, *bdd_node_limit);
                                    match build_version_space(&d, spec, &opts).and_then(|vs| {
                                        Ok((semantic_cardinality(&vs, 1000.max(10 * bound))?, vs.peak_nodes))
                                    }) {
                                        Ok((r, peak)) => (outcome_text(&r.outcome), peak.to_string()),
                                        Err(e) => (format!("\"error: {e}\""), String::new()),
                                    }
                                }
                                BenchEngine::Sat => {
                                    let limits = SolverLimits {
                                        conflict_limit: *sat_conflict_limit,
                                        ..SolverLimits::default()
                                    };
                                    let r = sat_learner::learn_subspace(
                                        &d,
                                        spec,
                                        *bound,
                                        1000.max(10 * bound),
                                        &BackendKind::Embedded,
                                        &limits,
                                    );
                                    match r {
                                        Ok(r) => (outcome_text(&r.outcome), String::new()),
                                        Err(e) => (format!("\"error: {e}\""), String::new()),
                                    }
                                }
                            };
                            let name = match engine {
                                BenchEngine::Bdd => "bdd",
                                BenchEngine::Sat => "sat",
                            };
                            writeln!(
                                out,
                                "{mp},{seed},{ll},{k},{name},{outcome},{:.3},{peak}",
                                t.elapsed().as_secs_f64() * 1e3
                            )?;
                        }
                    }
                }
            }
            Ok(out)
        }
        Sweep::SampleTrace {
            data,
            m_p,
            seed,
            l,
            k,
            bdd_node_limit,
        } => {
            let d = dataset(data, *m_p, *seed)?;
            let opts = build_options(ConjunctionOrder::PositivesFirst, *bdd_node_limit);
            let vs = build_version_space(&d, SubspaceSpec::new(*l, *k)?, &opts)?;
            let mut out = String::from("step,constraint,processed_samples,nodes\n");
            let mut processed = 0;
            for (i, step) in vs.trace.iter().enumerate() {
                if let Constraint::Sample(_) = step.constraint {
                    processed += 1;
                }
                writeln!(
                    out,
                    "{i},{},{processed},{}",
                    constraint_text(step.constraint, &d),
                    step.nodes
                )?;
            }
            Ok(out)
        }
        Sweep::PosNegOrder {
            data,
            m_p,
            seeds,
            l,
            k,
            bdd_node_limit,
        } => {
            ensure!(!seeds.is_empty(), "pos_neg_order has no seeds");
            paired_orders(
                data,
                *m_p,
                seeds,
                SubspaceSpec::new(*l, *k)?,
                *bdd_node_limit,
                [
                    ("pos_first", ConjunctionOrder::PositivesFirst),
                    ("neg_first", ConjunctionOrder::NegativesFirst),
                ],
            )
        }
        Sweep::SubspacePlacement {
            data,
            m_p,
            seeds,
            l,
            k,
            bdd_node_limit,
        } => {
            ensure!(!seeds.is_empty(), "subspace_placement has no seeds");
            paired_orders(
                data,
                *m_p,
                seeds,
                SubspaceSpec::new(*l, *k)?,
                *bdd_node_limit,
                [
                    ("subspace_first", ConjunctionOrder::PositivesFirst),
                    ("subspace_last", ConjunctionOrder::SubspaceLast),
                ],
            )
        }
    }
}

/// Runs every sweep of the configuration file, writing one CSV per sweep.
pub fn run(config: &Path, out_dir: &Path) -> Result<()> {
    let text = std::fs::read_to_string(config).with_context(|| format!("cannot read {}", config.display()))?;
    let cfg: BenchConfig = serde_json::from_str(&text).with_context(|| format!("in {}", config.display()))?;
    if cfg.sweeps.is_empty() {
        bail!("{} lists no sweeps", config.display());
    }
    std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    for (i, s) in cfg.sweeps.iter().enumerate() {
        let csv = run_sweep(s).with_context(|| format!("sweep {i} ({})", s.name()))?;
        let path = out_dir.join(format!("{i}_{}.csv", s.name()));
        std::fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;
        eprintln!("vsl: wrote {}", path.display());
    }
    Ok(())
}
