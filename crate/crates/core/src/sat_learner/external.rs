//! Adapter for an external DIMACS solver process.
//!
//! The configured command line is split on whitespace and the path of a
//! temporary DIMACS file is appended as the last argument. The process must
//! print SAT-competition output (`s SATISFIABLE` / `s UNSATISFIABLE` and
//! `v` value lines); its exit status is ignored when a verdict was printed.

use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::cnf::{parse_solver_output, CnfFormula, Lit, SolveResult};
use crate::error::{Error, Result};

/// Environment variable naming the external solver command.
pub const SOLVER_ENV: &str = "VSL_SAT_SOLVER";

pub struct ExternalSolver {
    program: String,
    args: Vec<String>,
    cnf: CnfFormula,
    timeout: Option<Duration>,
    interrupt: Option<Arc<AtomicBool>>,
}

impl ExternalSolver {
    pub fn new(command: &str, cnf: CnfFormula) -> Result<Self> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| Error::InvalidInput("empty solver command".into()))?;
        Ok(ExternalSolver {
            program,
            args: parts.collect(),
            cnf,
            timeout: None,
            interrupt: None,
        })
    }

    pub fn set_timeout(&mut self, timeout: Option<Duration>) {
        self.timeout = timeout;
    }

    pub fn set_interrupt(&mut self, flag: Option<Arc<AtomicBool>>) {
        self.interrupt = flag;
    }

    pub fn add_clause(&mut self, clause: &[Lit]) -> Result<()> {
        self.cnf.add_clause(clause.to_vec())
    }

    pub fn solve(&mut self) -> Result<SolveResult> {
        let mut file = tempfile::Builder::new()
            .prefix("vsl-")
            .suffix(".cnf")
            .tempfile()
            .map_err(|e| Error::Solver(format!("temporary file: {e}")))?;
        file.write_all(self.cnf.to_dimacs().as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| Error::Solver(format!("writing DIMACS: {e}")))?;
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(file.path())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::Solver(format!("cannot start `{}`: {e}", self.program)))?;

        // drain stdout on a helper thread so a chatty solver cannot block on a full pipe
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            std::io::Read::read_to_string(&mut stdout, &mut s).map(|_| s)
        });

        let start = Instant::now();
        let status = loop {
            if let Some(status) = child
                .try_wait()
                .map_err(|e| Error::Solver(format!("waiting for solver: {e}")))?
            {
                break status;
            }
            let cancelled = self.interrupt.as_ref().is_some_and(|f| f.load(Ordering::Relaxed));
            let timed_out = self.timeout.is_some_and(|t| start.elapsed() > t);
            if cancelled || timed_out {
                let _ = child.kill();
                let _ = child.wait();
                return Err(if cancelled {
                    Error::Cancelled
                } else {
                    Error::ResourceExhausted("external solver timeout".into())
                });
            }
            std::thread::sleep(Duration::from_millis(2));
        };
        let output = reader
            .join()
            .map_err(|_| Error::Solver("output reader panicked".into()))?
            .map_err(|e| Error::Solver(format!("reading solver output: {e}")))?;
        match parse_solver_output(&output, self.cnf.num_vars()) {
            Ok(r) => Ok(r),
            Err(e) if !status.success() => Err(Error::Solver(format!(
                "solver exited with {status} without a verdict ({e})"
            ))),
            Err(e) => Err(e),
        }
    }
}
