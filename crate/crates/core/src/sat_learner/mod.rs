//! Version spaces as CNF formulas whose models are enumerated.
//!
//! Every slot (term `j`, feature `i`) gets three one-hot variables for the
//! negative, positive and absent forms. An exact-`l` sequential counter over
//! the "present" inputs restricts the sub-space, adjacent-term lexicographic
//! constraints remove term permutations, and each sample adds its
//! consistency clauses. Models are enumerated with blocking clauses projected
//! onto the slot variables.

pub mod cnf;
pub mod external;
pub mod solver;

use std::collections::HashSet;
use std::ops::ControlFlow;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use vsl_bdd::Manager;

use crate::cardinality::{dedupe_semantic, function_diagram, CountOutcome, EngineResult};
use crate::complexity::SubspaceSpec;
use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, LiteralState, Term};

pub use cnf::{CnfFormula, Lit, SolveResult, Var};
pub use external::ExternalSolver;
pub use solver::Solver;

/// The three one-hot forms of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Neg = 1,
    Pos = 2,
    Absent = 3,
}

impl Form {
    /// The form that makes a term false on a sample whose feature has value `bit`.
    pub fn killing(bit: bool) -> Form {
        if bit {
            Form::Neg
        } else {
            Form::Pos
        }
    }
}

/// Assignment of propositional variables to slots and auxiliaries.
///
/// Layout: the `3nk` slot variables first, then the `l(nk-1)` counter
/// registers, then `k` term indicators per positive sample, then any fresh
/// auxiliaries (lexicographic constraints).
#[derive(Debug, Clone)]
pub struct VarMap {
    n: usize,
    k: usize,
    l: usize,
    positives: usize,
    counter_base: u32,
    indicator_base: u32,
    next: u32,
}

impl VarMap {
    pub fn new(n: usize, k: usize, l: usize, positives: usize) -> Self {
        let slots = (3 * n * k) as u32;
        let counter = (l * (n * k - 1)) as u32;
        let counter_base = slots + 1;
        let indicator_base = counter_base + counter;
        VarMap {
            n,
            k,
            l,
            positives,
            counter_base,
            indicator_base,
            next: indicator_base + (k * positives) as u32,
        }
    }

    /// Slot variable for 0-based `term` and `feature`.
    #[inline]
    pub fn x(&self, term: usize, feature: usize, form: Form) -> Var {
        ((term * self.n + feature) * 3 + form as usize) as Var
    }

    /// Counter register `S(t, c)`: at least `c` of the first `t` inputs are
    /// present; `1 <= t < nk`, `1 <= c <= l`.
    #[inline]
    pub fn s(&self, t: usize, c: usize) -> Var {
        debug_assert!(t >= 1 && t < self.n * self.k && c >= 1 && c <= self.l);
        self.counter_base + ((t - 1) * self.l + (c - 1)) as Var
    }

    /// Indicator "term `term` is true on positive sample `sample`".
    #[inline]
    pub fn a(&self, sample: usize, term: usize) -> Var {
        debug_assert!(sample < self.positives && term < self.k);
        self.indicator_base + (sample * self.k + term) as Var
    }

    pub fn fresh(&mut self) -> Var {
        let v = self.next;
        self.next += 1;
        v
    }

    pub fn num_vars(&self) -> u32 {
        self.next - 1
    }

    pub fn slot_vars(&self) -> Vec<Var> {
        (1..=(3 * self.n * self.k) as Var).collect()
    }

    pub fn counter_vars(&self) -> usize {
        (self.indicator_base - self.counter_base) as usize
    }

    /// Reads the hypothesis encoded by the slot variables of `model`.
    pub fn decode(&self, model: &[bool]) -> Result<Hypothesis> {
        let mut terms = Vec::with_capacity(self.k);
        for j in 0..self.k {
            let mut t = Term::empty(self.n);
            for i in 0..self.n {
                let on = |f: Form| model[self.x(j, i, f) as usize - 1];
                t.0[i] = match (on(Form::Neg), on(Form::Pos), on(Form::Absent)) {
                    (true, false, false) => LiteralState::Neg,
                    (false, true, false) => LiteralState::Pos,
                    (false, false, true) => LiteralState::DontCare,
                    _ => {
                        return Err(Error::Encoding(format!(
                            "one-hot violated at term {} feature {}",
                            j + 1,
                            i + 1
                        )))
                    }
                };
            }
            terms.push(t);
        }
        Hypothesis::new(self.n, terms)
    }
}

/// Exactly one form per slot: `4nk` clauses.
pub fn encode_onehot(vm: &VarMap) -> Vec<Vec<Lit>> {
    let mut out = Vec::with_capacity(4 * vm.n * vm.k);
    for j in 0..vm.k {
        for i in 0..vm.n {
            let [a, b, c] = [Form::Neg, Form::Pos, Form::Absent].map(|f| vm.x(j, i, f));
            out.push(vec![Lit::pos(a), Lit::pos(b), Lit::pos(c)]);
            out.push(vec![Lit::neg(a), Lit::neg(b)]);
            out.push(vec![Lit::neg(a), Lit::neg(c)]);
            out.push(vec![Lit::neg(b), Lit::neg(c)]);
        }
    }
    out
}

/// Exactly `l` present slots, as a sequential counter whose registers are
/// fully defined by the inputs (so projected model counts are exact).
pub fn encode_exact_l(vm: &VarMap) -> Result<Vec<Vec<Lit>>> {
    let (n_in, l) = (vm.n * vm.k, vm.l);
    if l < vm.k || l > n_in {
        return Err(Error::InvalidInput(format!(
            "literal count {l} outside {}..={n_in}",
            vm.k
        )));
    }
    // input t (1-based) is "slot t is present"
    let x = |t: usize| Lit::neg(vm.x((t - 1) / vm.n, (t - 1) % vm.n, Form::Absent));
    let s = |t: usize, c: usize| vm.s(t, c);
    let mut out = Vec::new();
    if n_in == 1 {
        out.push(vec![x(1)]);
        return Ok(out);
    }
    out.push(vec![!x(1), Lit::pos(s(1, 1))]);
    out.push(vec![x(1), Lit::neg(s(1, 1))]);
    for c in 2..=l {
        out.push(vec![Lit::neg(s(1, c))]);
    }
    for t in 2..n_in {
        out.push(vec![!x(t), Lit::pos(s(t, 1))]);
        out.push(vec![Lit::neg(s(t - 1, 1)), Lit::pos(s(t, 1))]);
        out.push(vec![x(t), Lit::pos(s(t - 1, 1)), Lit::neg(s(t, 1))]);
        for c in 2..=l {
            out.push(vec![Lit::neg(s(t - 1, c)), Lit::pos(s(t, c))]);
            out.push(vec![!x(t), Lit::neg(s(t - 1, c - 1)), Lit::pos(s(t, c))]);
            out.push(vec![x(t), Lit::pos(s(t - 1, c)), Lit::neg(s(t, c))]);
            out.push(vec![
                Lit::pos(s(t - 1, c - 1)),
                Lit::pos(s(t - 1, c)),
                Lit::neg(s(t, c)),
            ]);
        }
    }
    // never more than l
    for t in 2..=n_in {
        out.push(vec![!x(t), Lit::neg(s(t - 1, l))]);
    }
    // at least l
    out.push(vec![x(n_in), Lit::pos(s(n_in - 1, l))]);
    if l >= 2 {
        out.push(vec![Lit::pos(s(n_in - 1, l - 1)), Lit::pos(s(n_in - 1, l))]);
    }
    Ok(out)
}

/// Some term is true on the positive sample `s`: `(n + 1)k + 1` clauses.
pub fn encode_positive_sample(s: &[bool], sample: usize, vm: &VarMap) -> Vec<Vec<Lit>> {
    let mut out = Vec::with_capacity((vm.n + 1) * vm.k + 1);
    out.push((0..vm.k).map(|j| Lit::pos(vm.a(sample, j))).collect());
    for j in 0..vm.k {
        let a = vm.a(sample, j);
        let mut define = Vec::with_capacity(vm.n + 1);
        for (i, &bit) in s.iter().enumerate() {
            let kill = vm.x(j, i, Form::killing(bit));
            out.push(vec![Lit::neg(kill), Lit::neg(a)]);
            define.push(Lit::pos(kill));
        }
        define.push(Lit::pos(a));
        out.push(define);
    }
    out
}

/// Every term is false on the negative sample `s`: `k` clauses.
pub fn encode_negative_sample(s: &[bool], vm: &VarMap) -> Vec<Vec<Lit>> {
    (0..vm.k)
        .map(|j| {
            s.iter()
                .enumerate()
                .map(|(i, &bit)| Lit::pos(vm.x(j, i, Form::killing(bit))))
                .collect()
        })
        .collect()
}

/// Term `j` strictly precedes term `j + 1` for every adjacent pair.
///
/// Per pair, `D_i` selects the first position where the terms differ (and
/// the earlier term is smaller there) and `E_i` asserts the terms agree on
/// features `1..=i`.
pub fn encode_lex_cnf(vm: &mut VarMap) -> Vec<Vec<Lit>> {
    let mut out = Vec::new();
    for j in 0..vm.k.saturating_sub(1) {
        let (t1, t2) = (j, j + 1);
        let d: Vec<Var> = (0..vm.n).map(|_| vm.fresh()).collect();
        let e: Vec<Var> = (0..vm.n.saturating_sub(1)).map(|_| vm.fresh()).collect();
        out.push(d.iter().map(|&v| Lit::pos(v)).collect());
        for i in 0..vm.n {
            let neg1 = vm.x(t1, i, Form::Neg);
            let pos1 = vm.x(t1, i, Form::Pos);
            let neg2 = vm.x(t2, i, Form::Neg);
            let abs2 = vm.x(t2, i, Form::Absent);
            let nd = Lit::neg(d[i]);
            // D_i -> (neg1 & !neg2) | (pos1 & abs2)
            out.push(vec![nd, Lit::pos(neg1), Lit::pos(pos1)]);
            out.push(vec![nd, Lit::pos(neg1), Lit::pos(abs2)]);
            out.push(vec![nd, Lit::neg(neg2), Lit::pos(pos1)]);
            out.push(vec![nd, Lit::neg(neg2), Lit::pos(abs2)]);
            if i > 0 {
                out.push(vec![nd, Lit::pos(e[i - 1])]);
            }
        }
        for (i, &ev) in e.iter().enumerate() {
            for f in [Form::Neg, Form::Pos, Form::Absent] {
                let (a, b) = (vm.x(t1, i, f), vm.x(t2, i, f));
                out.push(vec![Lit::neg(ev), Lit::neg(a), Lit::pos(b)]);
                out.push(vec![Lit::neg(ev), Lit::pos(a), Lit::neg(b)]);
            }
            if i > 0 {
                out.push(vec![Lit::neg(ev), Lit::pos(e[i - 1])]);
            }
        }
    }
    out
}

/// Complete version-space formula for one sub-space.
pub fn build_cnf(data: &Dataset, spec: SubspaceSpec) -> Result<(CnfFormula, VarMap)> {
    let n = data.n();
    if spec.l > n * spec.k {
        return Err(Error::InvalidInput(format!(
            "sub-space {spec} needs more than {} slots",
            n * spec.k
        )));
    }
    let mut vm = VarMap::new(n, spec.k, spec.l, data.m_p());
    let mut clauses = encode_onehot(&vm);
    clauses.extend(encode_exact_l(&vm)?);
    clauses.extend(encode_lex_cnf(&mut vm));
    let mut p = 0;
    for s in data.samples() {
        match s.label {
            Label::Positive => {
                clauses.extend(encode_positive_sample(&s.bits, p, &vm));
                p += 1;
            }
            Label::Negative => clauses.extend(encode_negative_sample(&s.bits, &vm)),
        }
    }
    let mut cnf = CnfFormula::new(vm.num_vars());
    cnf.extend(clauses)?;
    Ok((cnf, vm))
}

/// Which solver answers the queries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum BackendKind {
    #[default]
    Embedded,
    /// Command line of a DIMACS solver.
    External(String),
}

#[derive(Debug, Clone, Default)]
pub struct SolverLimits {
    pub conflict_limit: Option<u64>,
    pub timeout: Option<std::time::Duration>,
    pub interrupt: Option<Arc<AtomicBool>>,
}

/// A solver instance that accepts clauses between calls.
pub enum Backend {
    Embedded(Box<Solver>),
    External(ExternalSolver),
}

impl Backend {
    pub fn new(kind: &BackendKind, cnf: &CnfFormula, limits: &SolverLimits) -> Result<Self> {
        Ok(match kind {
            BackendKind::Embedded => {
                let mut s = Solver::from_cnf(cnf);
                s.set_conflict_limit(limits.conflict_limit);
                s.set_interrupt(limits.interrupt.clone());
                Backend::Embedded(Box::new(s))
            }
            BackendKind::External(cmd) => {
                let mut s = ExternalSolver::new(cmd, cnf.clone())?;
                s.set_timeout(limits.timeout);
                s.set_interrupt(limits.interrupt.clone());
                Backend::External(s)
            }
        })
    }

    pub fn add_clause(&mut self, clause: &[Lit]) -> Result<()> {
        match self {
            Backend::Embedded(s) => {
                s.add_clause(clause);
                Ok(())
            }
            Backend::External(s) => s.add_clause(clause),
        }
    }

    pub fn solve(&mut self) -> Result<SolveResult> {
        match self {
            Backend::Embedded(s) => s.solve(),
            Backend::External(s) => s.solve(),
        }
    }
}

/// One-shot satisfiability check.
pub fn solve(cnf: &CnfFormula, kind: &BackendKind) -> Result<SolveResult> {
    Backend::new(kind, cnf, &SolverLimits::default())?.solve()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub models: Vec<Vec<bool>>,
    /// True when the formula has no further models (projected).
    pub exhausted: bool,
}

/// Enumerates models that differ on `projection`, calling `on_model` for
/// each; stops at `limit` models, at UNSAT, or when `on_model` breaks.
pub fn enumerate_models_with(
    backend: &mut Backend,
    projection: &[Var],
    limit: usize,
    mut on_model: impl FnMut(&[bool]) -> Result<ControlFlow<()>>,
) -> Result<Enumeration> {
    if limit == 0 {
        return Err(Error::InvalidInput("enumeration limit must be at least 1".into()));
    }
    let mut models = Vec::new();
    loop {
        match backend.solve()? {
            SolveResult::Unsat => {
                return Ok(Enumeration {
                    models,
                    exhausted: true,
                })
            }
            SolveResult::Sat(model) => {
                let block: Vec<Lit> = projection
                    .iter()
                    .map(|&v| Lit::new(v, !model[v as usize - 1]))
                    .collect();
                let flow = on_model(&model)?;
                models.push(model);
                if flow.is_break() || models.len() >= limit {
                    return Ok(Enumeration {
                        models,
                        exhausted: false,
                    });
                }
                backend.add_clause(&block)?;
            }
        }
    }
}

pub fn enumerate_models(cnf: &CnfFormula, projection: &[Var], limit: usize, kind: &BackendKind) -> Result<Enumeration> {
    let mut backend = Backend::new(kind, cnf, &SolverLimits::default())?;
    enumerate_models_with(&mut backend, projection, limit, |_| Ok(ControlFlow::Continue(())))
}

/// Measures the version space of one sub-space by enumerating up to
/// `enum_cap` syntactic models, stopping early once more than `bound`
/// semantically distinct hypotheses have been seen.
pub fn learn_subspace(
    data: &Dataset,
    spec: SubspaceSpec,
    bound: usize,
    enum_cap: usize,
    kind: &BackendKind,
    limits: &SolverLimits,
) -> Result<EngineResult> {
    let (cnf, vm) = build_cnf(data, spec)?;
    let mut backend = Backend::new(kind, &cnf, limits)?;
    let mut functions = Manager::new(data.n() as u32);
    let mut distinct = HashSet::new();
    let mut found = Vec::new();
    let mut early: Option<CountOutcome> = None;
    let en = enumerate_models_with(&mut backend, &vm.slot_vars(), enum_cap.saturating_add(1), |model| {
        let h = vm.decode(model)?;
        distinct.insert(function_diagram(&mut functions, &h)?);
        found.push(h);
        if distinct.len() > bound {
            early = Some(CountOutcome::Exceeds(bound));
            return Ok(ControlFlow::Break(()));
        }
        Ok(ControlFlow::Continue(()))
    })?;
    if let Some(outcome) = early {
        return Ok(EngineResult {
            outcome,
            members: Vec::new(),
        });
    }
    if !en.exhausted {
        return Ok(EngineResult {
            outcome: CountOutcome::Exceeds(enum_cap),
            members: Vec::new(),
        });
    }
    let members = dedupe_semantic(data.n(), &found)?;
    Ok(EngineResult {
        outcome: CountOutcome::Exact(members.len()),
        members,
    })
}
