//! Commands behind the `vsl` binary: learn k-term DNF concepts from
//! labelled binary data, generate datasets, run benchmark sweeps.
//!
//! Exit codes of `learn`: 0 solved, 2 no fitting sub-space, 3 over-fitting,
//! 4 conflicting samples, 1 any operational error.

pub mod bench;
pub mod report;

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use vsl_core::datagen::{generate, GenSpec};
use vsl_core::sat_learner::cnf::{format_solver_output, CnfFormula};
use vsl_core::sat_learner::external::SOLVER_ENV;
use vsl_core::sat_learner::{solve, BackendKind, SolveResult};
use vsl_core::search::{learn, LearnOutcome};
use vsl_core::{Dataset, Engine, Hypothesis, LearnerConfig, OverfitPolicy};

#[derive(Parser)]
#[command(name = "vsl", version, about = "Version-space cardinality concept learning")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn from a CSV dataset and write a JSON report.
    Learn(LearnArgs),
    /// Generate a dataset labelled by a planted target hypothesis.
    Gen(GenArgs),
    /// Run the benchmark sweeps listed in a JSON file and write CSV traces.
    Bench(BenchArgs),
    /// Solve a DIMACS CNF file with the embedded solver (SAT-competition output).
    Solve { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Bdd,
    Sat,
    Race,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Fail,
    Continue,
}

#[derive(Args)]
pub struct LearnArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 7)]
    lmax: usize,
    #[arg(long, default_value_t = 2)]
    kmax: usize,
    #[arg(long, default_value_t = vsl_core::config::DEFAULT_BOUND)]
    bound: usize,
    #[arg(long, value_enum, default_value_t = EngineArg::Race)]
    engine: EngineArg,
    /// Syntactic enumeration cap [default: max(1000, 10 * bound)].
    #[arg(long)]
    enum_cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Fail)]
    overfit_policy: PolicyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// External DIMACS solver command; the embedded solver is used otherwise.
    #[arg(long, env = SOLVER_ENV)]
    solver: Option<String>,
    #[arg(long)]
    bdd_node_limit: Option<usize>,
    #[arg(long)]
    sat_conflict_limit: Option<u64>,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Target hypothesis, e.g. "x2&~x75 | x63".
    #[arg(long)]
    target: String,
    #[arg(long)]
    mp: usize,
    #[arg(long)]
    mn: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lead the positives with one vector per term that only that term explains.
    #[arg(long)]
    witness: bool,
    /// CSV path; the CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON sweep configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving one CSV file per sweep.
    #[arg(long)]
    out_dir: PathBuf,
}

fn read_dataset(path: &Path) -> Result<(Dataset, Vec<u8>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .with_context(|| format!("cannot read {}", path.display()))?;
    let data = Dataset::from_csv(bytes.as_slice()).with_context(|| format!("in {}", path.display()))?;
    Ok((data, bytes))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write to stdout"),
    }
}

pub fn cmd_learn(a: &LearnArgs) -> Result<u8> {
    let (data, bytes) = read_dataset(&a.data)?;
    let mut config = LearnerConfig::new(a.lmax, a.kmax).with_bound(a.bound);
    config.engine = match a.engine {
        EngineArg::Bdd => Engine::Bdd,
        EngineArg::Sat => Engine::Sat,
        EngineArg::Race => Engine::Race,
    };
    config.overfit_policy = match a.overfit_policy {
        PolicyArg::Fail => OverfitPolicy::Fail,
        PolicyArg::Continue => OverfitPolicy::Continue,
    };
    if let Some(cap) = a.enum_cap {
        config.enum_cap = cap;
    }
    config.seed = a.seed;
    config.external_solver_cmd = a.solver.clone().filter(|s| !s.trim().is_empty());
    if a.bdd_node_limit.is_some() {
        config.bdd_node_limit = a.bdd_node_limit;
    }
    config.sat_conflict_limit = a.sat_conflict_limit;

    let r = learn(&data, &config)?;
    let code = match &r.result {
        LearnOutcome::Solved { .. } => 0,
        LearnOutcome::NoFit => 2,
        LearnOutcome::Overfit { .. } => 3,
        LearnOutcome::Conflict { .. } => 4,
        LearnOutcome::Aborted { .. } => 1,
    };
    let file = report::RunReportFile::new(&a.data, &bytes, &data, &config, r);
    write_output(a.out.as_deref(), &file.to_json()?)?;
    if let LearnOutcome::Aborted { spec, reason } = &file.report.result {
        eprintln!("vsl: aborted at {spec}: {reason}");
    }
    Ok(code)
}

fn cmd_gen(a: &GenArgs) -> Result<u8> {
    let target = Hypothesis::parse(&a.target, a.n)?;
    let g = generate(&GenSpec {
        n: a.n,
        target: target.clone(),
        m_p: a.mp,
        m_n: a.mn,
        seed: a.seed,
        per_term_witness: a.witness,
    })?;
    for w in &g.warnings {
        eprintln!("vsl: warning: {w}");
    }
    write_output(a.out.as_deref(), &g.dataset.to_csv())?;
    if a.out.is_some() {
        println!("{target}");
    } else {
        eprintln!("{target}");
    }
    Ok(0)
}

fn cmd_solve(file: &Path) -> Result<u8> {
    let text = std::fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    let cnf = CnfFormula::from_dimacs(&text)?;
    let r = solve(&cnf, &BackendKind::Embedded)?;
    print!("{}", format_solver_output(&r));
    Ok(match r {
        SolveResult::Sat(_) => 10,
        SolveResult::Unsat => 20,
    })
}

/// Runs one parsed command and returns its exit code.
pub fn execute(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Learn(a) => cmd_learn(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => bench::run(&a.config, &a.out_dir).map(|_| 0),
        Command::Solve { file } => cmd_solve(file),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn execute_args<I, T>(args: I) -> Result<u8>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    execute(&Cli::try_parse_from(args)?)
}
