use std::fmt::Write as _;
use std::ops::Not;

use crate::error::{Error, Result};

/// Propositional variable, numbered from 1 as in DIMACS.
pub type Var = u32;

/// A literal in DIMACS convention: `v` or `-v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn pos(v: Var) -> Lit {
        debug_assert!(v > 0);
        Lit(v as i32)
    }

    pub fn neg(v: Var) -> Lit {
        debug_assert!(v > 0);
        Lit(-(v as i32))
    }

    pub fn new(v: Var, positive: bool) -> Lit {
        if positive {
            Lit::pos(v)
        } else {
            Lit::neg(v)
        }
    }

    pub fn from_dimacs(x: i32) -> Option<Lit> {
        (x != 0).then_some(Lit(x))
    }

    pub fn var(self) -> Var {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Truth value under a model indexed by `var - 1`.
    pub fn eval(self, model: &[bool]) -> bool {
        model[self.var() as usize - 1] == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> Self {
        CnfFormula {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Raises the declared variable count (never lowers it).
    pub fn reserve_vars(&mut self, num_vars: u32) {
        self.num_vars = self.num_vars.max(num_vars);
    }

    pub fn add_clause(&mut self, clause: Vec<Lit>) -> Result<()> {
        if clause.is_empty() {
            return Err(Error::InvalidInput("empty clause".into()));
        }
        if let Some(l) = clause.iter().find(|l| l.var() > self.num_vars) {
            return Err(Error::InvalidInput(format!(
                "literal {} exceeds {} declared variables",
                l.to_dimacs(),
                self.num_vars
            )));
        }
        self.clauses.push(clause);
        Ok(())
    }

    pub fn extend(&mut self, clauses: Vec<Vec<Lit>>) -> Result<()> {
        clauses.into_iter().try_for_each(|c| self.add_clause(c))
    }

    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(model)))
    }

    /// DIMACS text: `p cnf <vars> <clauses>` then one 0-terminated clause per line.
    pub fn to_dimacs(&self) -> String {
        let mut s = String::with_capacity(self.clauses.len() * 16 + 32);
        let _ = writeln!(s, "p cnf {} {}", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(s, "{} ", l.to_dimacs());
            }
            s.push_str("0\n");
        }
        s
    }

    pub fn from_dimacs(text: &str) -> Result<CnfFormula> {
        let mut cnf: Option<CnfFormula> = None;
        let mut declared = 0usize;
        let mut current = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            let err = |column: usize, message: String| Error::Parse {
                line: no as u64 + 1,
                column,
                message,
            };
            if let Some(rest) = line.strip_prefix("p ") {
                let f: Vec<&str> = rest.split_whitespace().collect();
                match f.as_slice() {
                    ["cnf", v, c] => {
                        let v = v.parse().map_err(|_| err(7, "bad variable count".into()))?;
                        declared = c.parse().map_err(|_| err(0, "bad clause count".into()))?;
                        cnf = Some(CnfFormula::new(v));
                    }
                    _ => return Err(err(1, "malformed problem line".into())),
                }
                continue;
            }
            let f = cnf
                .as_mut()
                .ok_or_else(|| err(1, "clause before problem line".into()))?;
            for (col, tok) in line.split_whitespace().enumerate() {
                let x: i32 = tok.parse().map_err(|_| err(col + 1, format!("bad literal `{tok}`")))?;
                match Lit::from_dimacs(x) {
                    Some(l) => current.push(l),
                    None => f
                        .add_clause(std::mem::take(&mut current))
                        .map_err(|e| err(col + 1, e.to_string()))?,
                }
            }
        }
        let f = cnf.ok_or_else(|| Error::Parse {
            line: 0,
            column: 0,
            message: "missing problem line".into(),
        })?;
        if !current.is_empty() || f.len() != declared {
            return Err(Error::Parse {
                line: 0,
                column: 0,
                message: format!("declared {declared} clauses, read {}", f.len()),
            });
        }
        Ok(f)
    }
}

/// Verdict of a solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// Model indexed by `var - 1`.
    Sat(Vec<bool>),
    Unsat,
}

/// Parses SAT-competition style output (`s ...` status and `v ...` values).
/// Variables missing from the value lines default to false.
pub fn parse_solver_output(text: &str, num_vars: u32) -> Result<SolveResult> {
    let mut status = None;
    let mut model = vec![false; num_vars as usize];
    for line in text.lines() {
        let line = line.trim();
        if let Some(s) = line.strip_prefix("s ") {
            status = Some(match s.trim() {
                "SATISFIABLE" => true,
                "UNSATISFIABLE" => false,
                other => return Err(Error::Solver(format!("unknown status `{other}`"))),
            });
        } else if let Some(vals) = line.strip_prefix("v ") {
            for tok in vals.split_whitespace() {
                let x: i32 = tok.parse().map_err(|_| Error::Solver(format!("bad value `{tok}`")))?;
                if let Some(l) = Lit::from_dimacs(x) {
                    if let Some(slot) = model.get_mut(l.var() as usize - 1) {
                        *slot = l.is_positive();
                    }
                }
            }
        }
    }
    match status {
        Some(true) => Ok(SolveResult::Sat(model)),
        Some(false) => Ok(SolveResult::Unsat),
        None => Err(Error::Solver("no status line in solver output".into())),
    }
}

/// SAT-competition output for a verdict.
pub fn format_solver_output(result: &SolveResult) -> String {
    match result {
        SolveResult::Unsat => "s UNSATISFIABLE\n".to_string(),
        SolveResult::Sat(model) => {
            let mut s = String::from("s SATISFIABLE\n");
            for chunk in model.chunks(16).enumerate() {
                s.push('v');
                for (i, &b) in chunk.1.iter().enumerate() {
                    let v = (chunk.0 * 16 + i + 1) as i32;
                    let _ = write!(s, " {}", if b { v } else { -v });
                }
                s.push('\n');
            }
            s.push_str("v 0\n");
            s
        }
    }
}
