//! Embedded conflict-driven clause-learning solver.
//!
//! Two watched literals per clause, first-UIP learning with recursive clause
//! minimisation, activity-ordered decisions with saved phases (initially
//! false), restarts when the recent learnt-clause LBD average rises above
//! the running average, and periodic removal of low-quality learnt clauses.
//! Everything is deterministic: ties in the decision order go to the lowest
//! variable index.
//!
//! Clauses may be added between calls to [`Solver::solve`], which is how
//! blocking clauses are fed in during model enumeration.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use super::cnf::{CnfFormula, Lit, SolveResult};
use crate::error::{Error, Result};

const FALSE: u8 = 0;
const TRUE: u8 = 1;
const UNDEF: u8 = 2;
const NO_REASON: u32 = u32::MAX;
/// Learnt clauses in the moving LBD window that drives restarts.
const LBD_WINDOW: usize = 50;
const RESTART_MARGIN: f64 = 0.8;

// Internal literal code: 2 * var + sign, var 0-based, sign 1 = negative.
type ILit = u32;

#[inline]
fn to_ilit(l: Lit) -> ILit {
    ((l.var() - 1) << 1) | u32::from(!l.is_positive())
}

#[inline]
fn val(assigns: &[u8], lit: ILit) -> u8 {
    let a = assigns[(lit >> 1) as usize];
    if a == UNDEF {
        UNDEF
    } else {
        a ^ (lit & 1) as u8
    }
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: ILit,
    /// Binary clauses are decided by the blocker alone.
    binary: bool,
}

struct Clause {
    lits: Vec<ILit>,
    learnt: bool,
    lbd: u32,
    activity: f64,
}

/// Max-heap of variables keyed by activity, ties to the lower index.
struct VarOrder {
    heap: Vec<u32>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarOrder {
    fn new(n: usize) -> Self {
        VarOrder {
            heap: (0..n as u32).collect(),
            pos: (0..n).collect(),
        }
    }

    #[inline]
    fn before(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] != NOT_IN_HEAP
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if !Self::before(act, v, self.heap[p]) {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i] as usize] = i;
            i = p;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && Self::before(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            if !Self::before(act, self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = i;
        self.sift_up(i, act);
    }

    fn increased(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v as usize], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }
}

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<u8>,
    levels: Vec<u32>,
    reasons: Vec<u32>,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    cla_inc: f64,
    num_learnts: usize,
    max_learnts: f64,
    recent_lbd: std::collections::VecDeque<u32>,
    recent_sum: u64,
    total_lbd: u64,
    learnt_count: u64,
    /// Trail length at the last level-0 simplification.
    simplified_at: usize,
    ok: bool,
    conflicts: u64,
    conflict_limit: Option<u64>,
    interrupt: Option<Arc<AtomicBool>>,
    model: Vec<bool>,
}

impl Solver {
    pub fn new(num_vars: u32) -> Self {
        let n = num_vars as usize;
        Solver {
            num_vars: n,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![UNDEF; n],
            levels: vec![0; n],
            reasons: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            order: VarOrder::new(n),
            phase: vec![false; n],
            seen: vec![false; n],
            cla_inc: 1.0,
            num_learnts: 0,
            max_learnts: 0.0,
            simplified_at: 0,
            recent_lbd: Default::default(),
            recent_sum: 0,
            total_lbd: 0,
            learnt_count: 0,
            ok: true,
            conflicts: 0,
            conflict_limit: None,
            interrupt: None,
            model: Vec::new(),
        }
    }

    pub fn from_cnf(cnf: &CnfFormula) -> Self {
        let mut s = Solver::new(cnf.num_vars());
        for c in cnf.clauses() {
            s.add_clause(c);
        }
        s
    }

    /// Fails with [`Error::ResourceExhausted`] once this many conflicts have
    /// occurred over the solver's lifetime.
    pub fn set_conflict_limit(&mut self, limit: Option<u64>) {
        self.conflict_limit = limit;
    }

    pub fn set_interrupt(&mut self, flag: Option<Arc<AtomicBool>>) {
        self.interrupt = flag;
    }

    /// Value tried first when `var` is decided (until a saved phase replaces it).
    pub fn set_phase(&mut self, var: super::cnf::Var, value: bool) {
        self.phase[var as usize - 1] = value;
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars as u32
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause; returns false when the formula became trivially unsatisfiable.
    pub fn add_clause(&mut self, clause: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut lits: Vec<ILit> = clause.iter().map(|&l| to_ilit(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        // tautologies and clauses already satisfied at level 0 are dropped
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) || lits.iter().any(|&l| val(&self.assigns, l) == TRUE) {
            return true;
        }
        lits.retain(|&l| val(&self.assigns, l) != FALSE);
        match lits.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(lits[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(Clause {
                    lits,
                    learnt: false,
                    lbd: 0,
                    activity: 0.0,
                });
                true
            }
        }
    }

    fn attach(&mut self, c: Clause) -> u32 {
        let cref = self.clauses.len() as u32;
        let (a, b) = (c.lits[0], c.lits[1]);
        let binary = c.lits.len() == 2;
        self.watches[a as usize].push(Watcher {
            cref,
            blocker: b,
            binary,
        });
        self.watches[b as usize].push(Watcher {
            cref,
            blocker: a,
            binary,
        });
        if c.learnt {
            self.num_learnts += 1;
        }
        self.clauses.push(c);
        cref
    }

    #[inline]
    fn enqueue(&mut self, lit: ILit, reason: u32) {
        let v = (lit >> 1) as usize;
        self.assigns[v] = u8::from(lit & 1 == 0);
        self.levels[v] = self.decision_level();
        self.reasons[v] = reason;
        self.trail.push(lit);
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let v = self.trail[i] >> 1;
            self.phase[v as usize] = self.assigns[v as usize] == TRUE;
            self.assigns[v as usize] = UNDEF;
            self.reasons[v as usize] = NO_REASON;
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    /// Unit propagation; returns a conflicting clause if one arises.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                let blocker_val = val(&self.assigns, w.blocker);
                if blocker_val == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                if w.binary {
                    ws[j] = w;
                    j += 1;
                    if blocker_val == FALSE {
                        conflict = Some(w.cref);
                        while i < ws.len() {
                            ws[j] = ws[i];
                            i += 1;
                            j += 1;
                        }
                    } else {
                        self.enqueue(w.blocker, w.cref);
                    }
                    continue;
                }
                let lits = &mut self.clauses[w.cref as usize].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if first != w.blocker && val(&self.assigns, first) == TRUE {
                    ws[j] = Watcher { blocker: first, ..w };
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    if val(&self.assigns, lits[k]) != FALSE {
                        lits.swap(1, k);
                        self.watches[lits[1] as usize].push(Watcher { blocker: first, ..w });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watcher { blocker: first, ..w };
                j += 1;
                if val(&self.assigns, first) == FALSE {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: u32) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<ILit>, u32) {
        let mut learnt: Vec<ILit> = vec![0];
        let mut path = 0usize;
        let mut p: Option<ILit> = None;
        let mut index = self.trail.len();
        let level = self.decision_level();
        loop {
            self.bump_clause(confl);
            // the implied literal of a reason clause is not always first (binary clauses)
            let implied = p.map_or(u32::MAX, |l| l >> 1);
            let n = self.clauses[confl as usize].lits.len();
            for k in 0..n {
                let q = self.clauses[confl as usize].lits[k];
                let v = q >> 1;
                if v != implied && !self.seen[v as usize] && self.levels[v as usize] > 0 {
                    self.bump_var(v);
                    self.seen[v as usize] = true;
                    if self.levels[v as usize] >= level {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[(self.trail[index] >> 1) as usize] {
                    break;
                }
            }
            let lit = self.trail[index];
            let v = (lit >> 1) as usize;
            self.seen[v] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reasons[v];
        }
        learnt[0] = p.expect("conflict analysis visits at least one literal") ^ 1;

        // drop literals implied by the rest of the clause
        let abstract_levels = learnt[1..]
            .iter()
            .fold(0u32, |acc, &q| acc | self.abstract_level(q >> 1));
        let mut kept = vec![learnt[0]];
        let mut cleanup = learnt.clone();
        for &q in &learnt[1..] {
            if self.reasons[(q >> 1) as usize] == NO_REASON || !self.lit_redundant(q, abstract_levels, &mut cleanup) {
                kept.push(q);
            }
        }
        for &q in &cleanup {
            self.seen[(q >> 1) as usize] = false;
        }
        let mut learnt = kept;

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.levels[(learnt[i] >> 1) as usize] > self.levels[(learnt[max_i] >> 1) as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.levels[(learnt[1] >> 1) as usize]
        };
        (learnt, bt)
    }

    #[inline]
    fn abstract_level(&self, v: u32) -> u32 {
        1 << (self.levels[v as usize] & 31)
    }

    /// Whether `p` follows from the seen literals through reason clauses.
    /// Literals proven redundant stay marked and are appended to `cleanup`.
    fn lit_redundant(&mut self, p: ILit, abstract_levels: u32, cleanup: &mut Vec<ILit>) -> bool {
        let mut stack = vec![p];
        let top = cleanup.len();
        while let Some(q) = stack.pop() {
            let r = self.reasons[(q >> 1) as usize] as usize;
            for k in 0..self.clauses[r].lits.len() {
                let x = self.clauses[r].lits[k];
                let v = (x >> 1) as usize;
                if v as u32 == q >> 1 || self.seen[v] || self.levels[v] == 0 {
                    continue;
                }
                if self.reasons[v] != NO_REASON && self.abstract_level(v as u32) & abstract_levels != 0 {
                    self.seen[v] = true;
                    stack.push(x);
                    cleanup.push(x);
                } else {
                    for &c in &cleanup[top..] {
                        self.seen[(c >> 1) as usize] = false;
                    }
                    cleanup.truncate(top);
                    return false;
                }
            }
        }
        true
    }

    fn lbd(&self, lits: &[ILit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|&l| self.levels[(l >> 1) as usize]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn check_limits(&self) -> Result<()> {
        if let Some(flag) = &self.interrupt {
            if flag.load(Ordering::Relaxed) {
                return Err(Error::Cancelled);
            }
        }
        if let Some(limit) = self.conflict_limit {
            if self.conflicts >= limit {
                return Err(Error::ResourceExhausted(format!("{limit} solver conflicts")));
            }
        }
        Ok(())
    }

    fn pick_branch(&mut self) -> Option<ILit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize] == UNDEF {
                return Some((v << 1) | u32::from(!self.phase[v as usize]));
            }
        }
        None
    }

    /// Removes the less useful half of the learnt clauses. Only called at level 0.
    fn reduce_db(&mut self) {
        let mut learnt_idx: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| self.clauses[i].learnt && self.clauses[i].lbd > 2)
            .collect();
        learnt_idx.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a], &self.clauses[b]);
            cb.lbd.cmp(&ca.lbd).then(
                ca.activity
                    .partial_cmp(&cb.activity)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
        });
        let mut drop = vec![false; self.clauses.len()];
        for &i in learnt_idx.iter().take(learnt_idx.len() / 2) {
            drop[i] = true;
        }
        self.rebuild(&drop);
    }

    /// Rebuilds the clause database at level 0 without the dropped clauses,
    /// removing clauses satisfied by level-0 facts and their false literals.
    fn rebuild(&mut self, drop: &[bool]) {
        debug_assert_eq!(self.decision_level(), 0);
        let old = std::mem::take(&mut self.clauses);
        self.num_learnts = 0;
        for w in self.watches.iter_mut() {
            w.clear();
        }
        for v in 0..self.num_vars {
            self.reasons[v] = NO_REASON;
        }
        for (i, mut c) in old.into_iter().enumerate() {
            if drop.get(i).copied().unwrap_or(false) || c.lits.iter().any(|&l| val(&self.assigns, l) == TRUE) {
                continue;
            }
            c.lits.retain(|&l| val(&self.assigns, l) == UNDEF);
            debug_assert!(c.lits.len() >= 2, "level 0 is propagated");
            self.attach(c);
        }
        self.simplified_at = self.trail.len();
    }

    fn note_lbd(&mut self, lbd: u32) {
        self.total_lbd += u64::from(lbd);
        self.learnt_count += 1;
        self.recent_lbd.push_back(lbd);
        self.recent_sum += u64::from(lbd);
        if self.recent_lbd.len() > LBD_WINDOW {
            self.recent_sum -= u64::from(self.recent_lbd.pop_front().expect("non-empty"));
        }
    }

    fn search(&mut self) -> Result<Option<bool>> {
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Ok(Some(false));
                }
                self.check_limits()?;
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let lbd = self.lbd(&learnt);
                    self.note_lbd(lbd);
                    let asserting = learnt[0];
                    let cref = self.attach(Clause {
                        lits: learnt,
                        learnt: true,
                        lbd,
                        activity: 0.0,
                    });
                    self.bump_clause(cref);
                    self.enqueue(asserting, cref);
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
            } else {
                if self.recent_lbd.len() == LBD_WINDOW
                    && self.recent_sum as f64 / LBD_WINDOW as f64 * RESTART_MARGIN
                        > self.total_lbd as f64 / self.learnt_count as f64
                {
                    self.recent_lbd.clear();
                    self.recent_sum = 0;
                    return Ok(None);
                }
                match self.pick_branch() {
                    None => {
                        self.model = self.assigns.iter().map(|&a| a == TRUE).collect();
                        return Ok(Some(true));
                    }
                    Some(lit) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(lit, NO_REASON);
                    }
                }
            }
        }
    }

    pub fn solve(&mut self) -> Result<SolveResult> {
        if !self.ok {
            return Ok(SolveResult::Unsat);
        }
        self.cancel_until(0);
        self.check_limits()?;
        if self.propagate().is_some() {
            self.ok = false;
            return Ok(SolveResult::Unsat);
        }
        if self.trail.len() > self.simplified_at {
            self.rebuild(&[]);
        }
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        }
        loop {
            match self.search() {
                Ok(Some(true)) => return Ok(SolveResult::Sat(self.model.clone())),
                Ok(Some(false)) => return Ok(SolveResult::Unsat),
                Ok(None) => {
                    self.cancel_until(0);
                    if self.num_learnts as f64 > self.max_learnts {
                        self.reduce_db();
                        self.max_learnts *= 1.1;
                    } else if self.trail.len() > self.simplified_at + 100 {
                        self.rebuild(&[]);
                    }
                }
                Err(e) => {
                    self.cancel_until(0);
                    return Err(e);
                }
            }
        }
    }
}
