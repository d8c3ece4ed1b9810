//! Version spaces as decision diagrams.
//!
//! Each slot (feature `i` in term `j`) takes one of three states and is
//! stored in two adjacent diagram variables. Codes are `pos = 10`,
//! `neg = 01`, `dcare = 00`; the pattern `11` is excluded by the base space.
//! Slots are laid out feature-major, term-minor, so the slots of one feature
//! across all terms sit next to each other in the variable order.
//!
//! A version space is the conjunction of the base space, the exact-`l`
//! sub-space, the `k - 1` adjacent lexicographic constraints and one diagram
//! per sample. Its minterms are in bijection with term-sorted syntactic
//! hypotheses; semantic duplicates are removed afterwards.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use vsl_bdd::{Manager, NodeRef};

use crate::cardinality::{dedupe_semantic, CountOutcome, EngineResult};
use crate::complexity::SubspaceSpec;
use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, LiteralState, Term};

/// Maps slots `(feature, term, bit)` (0-based) to diagram variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingLayout {
    pub n: usize,
    pub k: usize,
}

impl EncodingLayout {
    pub fn new(n: usize, k: usize) -> Self {
        EncodingLayout { n, k }
    }

    pub fn var_count(&self) -> u32 {
        (2 * self.n * self.k) as u32
    }

    #[inline]
    pub fn bit_index(&self, feature: usize, term: usize, bit: usize) -> u32 {
        (((feature * self.k) + term) * 2 + bit) as u32
    }

    pub fn code(state: LiteralState) -> (bool, bool) {
        match state {
            LiteralState::Pos => (true, false),
            LiteralState::Neg => (false, true),
            LiteralState::DontCare => (false, false),
        }
    }

    pub fn decode(bits: (bool, bool)) -> Option<LiteralState> {
        match bits {
            (true, false) => Some(LiteralState::Pos),
            (false, true) => Some(LiteralState::Neg),
            (false, false) => Some(LiteralState::DontCare),
            (true, true) => None,
        }
    }
}

/// Diagram of "slot (feature, term) holds `state`".
pub fn slot_is(
    m: &mut Manager,
    layout: &EncodingLayout,
    feature: usize,
    term: usize,
    state: LiteralState,
) -> Result<NodeRef> {
    let (b0, b1) = EncodingLayout::code(state);
    let v1 = m.literal(layout.bit_index(feature, term, 1), b1)?;
    let v0 = m.literal(layout.bit_index(feature, term, 0), b0)?;
    Ok(m.and(v0, v1)?)
}

/// Diagram of "slot (feature, term) holds one of `states`".
fn slot_in(
    m: &mut Manager,
    layout: &EncodingLayout,
    feature: usize,
    term: usize,
    states: &[LiteralState],
) -> Result<NodeRef> {
    let mut f = m.zero();
    for &s in states {
        let g = slot_is(m, layout, feature, term, s)?;
        f = m.or(f, g)?;
    }
    Ok(f)
}

/// Every slot holds a valid code; `3^(nk)` minterms.
pub fn encode_base_space(m: &mut Manager, layout: &EncodingLayout) -> Result<NodeRef> {
    let mut dd = m.one();
    // bottom-up keeps every intermediate result linear in size
    for i in (0..layout.n).rev() {
        for j in (0..layout.k).rev() {
            let tmp = slot_in(m, layout, i, j, &LiteralState::ALL)?;
            dd = m.and(tmp, dd)?;
        }
    }
    Ok(dd)
}

/// Exactly `l` non-dcare slots, by dynamic programming over "at least `w`
/// literals so far". Only meaningful conjoined with the base space.
pub fn encode_subspace(m: &mut Manager, layout: &EncodingLayout, l: usize) -> Result<NodeRef> {
    if l < layout.k || l > layout.n * layout.k {
        return Err(Error::InvalidInput(format!(
            "literal count {l} outside {}..={} for n={} k={}",
            layout.k,
            layout.n * layout.k,
            layout.n,
            layout.k
        )));
    }
    let mut lit_dd = vec![m.zero(); l + 2];
    lit_dd[0] = m.one();
    for j in 0..layout.k {
        for i in 0..layout.n {
            let var_dd = slot_in(m, layout, i, j, &[LiteralState::Pos, LiteralState::Neg])?;
            for w in (1..=l + 1).rev() {
                let tmp = m.and(lit_dd[w - 1], var_dd)?;
                lit_dd[w] = m.or(lit_dd[w], tmp)?;
            }
        }
    }
    let over = m.negate(lit_dd[l + 1])?;
    Ok(m.and(lit_dd[l], over)?)
}

fn check_len(layout: &EncodingLayout, s: &[bool]) -> Result<()> {
    if s.len() != layout.n {
        return Err(Error::DimensionMismatch {
            expected: layout.n,
            got: s.len(),
        });
    }
    Ok(())
}

/// Hypotheses with at least one term true on `s`.
pub fn encode_positive(m: &mut Manager, layout: &EncodingLayout, s: &[bool]) -> Result<NodeRef> {
    check_len(layout, s)?;
    let mut dd = m.zero();
    for j in 0..layout.k {
        let mut term_dd = m.one();
        for i in (0..layout.n).rev() {
            let keep = if s[i] {
                [LiteralState::Pos, LiteralState::DontCare]
            } else {
                [LiteralState::Neg, LiteralState::DontCare]
            };
            let tmp = slot_in(m, layout, i, j, &keep)?;
            term_dd = m.and(tmp, term_dd)?;
        }
        dd = m.or(dd, term_dd)?;
    }
    Ok(dd)
}

/// Hypotheses with every term false on `s`.
pub fn encode_negative(m: &mut Manager, layout: &EncodingLayout, s: &[bool]) -> Result<NodeRef> {
    check_len(layout, s)?;
    let mut dd = m.one();
    for j in 0..layout.k {
        let mut term_dd = m.zero();
        for i in (0..layout.n).rev() {
            let kill = if s[i] { LiteralState::Neg } else { LiteralState::Pos };
            let tmp = slot_is(m, layout, i, j, kill)?;
            term_dd = m.or(tmp, term_dd)?;
        }
        dd = m.and(dd, term_dd)?;
    }
    Ok(dd)
}

/// Term `k1` strictly precedes term `k2` (0-based) under `neg < pos < dcare`.
pub fn encode_lex_pair(m: &mut Manager, layout: &EncodingLayout, k1: usize, k2: usize) -> Result<NodeRef> {
    if !(k1 < k2 && k2 < layout.k) {
        return Err(Error::InvalidInput(format!(
            "lexicographic pair ({k1},{k2}) invalid for k={}",
            layout.k
        )));
    }
    use LiteralState::{DontCare, Neg, Pos};
    let mut dd = m.zero();
    let mut eq_dd = m.one();
    for i in 0..layout.n {
        let mut cond = m.zero();
        for (a, b) in [(Neg, Pos), (Neg, DontCare), (Pos, DontCare)] {
            let x = slot_is(m, layout, i, k1, a)?;
            let y = slot_is(m, layout, i, k2, b)?;
            let c = m.and(x, y)?;
            cond = m.or(cond, c)?;
        }
        let tmp = m.and(eq_dd, cond)?;
        dd = m.or(dd, tmp)?;
        for bit in 0..2 {
            let x = m.var(layout.bit_index(i, k1, bit))?;
            let y = m.var(layout.bit_index(i, k2, bit))?;
            let same = m.xnor(x, y)?;
            eq_dd = m.and(eq_dd, same)?;
        }
    }
    Ok(dd)
}

/// One conjunct of a version space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constraint {
    Base,
    Subspace,
    /// Term `j` precedes term `j + 1`.
    Lex(usize),
    /// Index into the dataset's sample list.
    Sample(usize),
}

/// Order in which the conjuncts are intersected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConjunctionOrder {
    /// Base, sub-space, lexicographic constraints, then samples: positives
    /// first when `k <= 2`, negatives first otherwise.
    Heuristic,
    PositivesFirst,
    NegativesFirst,
    /// Base, lexicographic constraints, positives, negatives, sub-space last.
    SubspaceLast,
    Explicit(Vec<Constraint>),
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub order: ConjunctionOrder,
    pub node_limit: Option<usize>,
    pub interrupt: Option<Arc<AtomicBool>>,
    /// Record the node count after every conjunction.
    pub trace: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            order: ConjunctionOrder::Heuristic,
            node_limit: None,
            interrupt: None,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub constraint: Constraint,
    pub nodes: usize,
}

/// Conjunction plan for a dataset and sub-space.
pub fn plan(data: &Dataset, spec: SubspaceSpec, order: &ConjunctionOrder) -> Vec<Constraint> {
    let samples = |label: Label| -> Vec<Constraint> {
        data.samples()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label == label)
            .map(|(i, _)| Constraint::Sample(i))
            .collect()
    };
    let lex = (0..spec.k - 1).map(Constraint::Lex);
    let (pos, neg) = (samples(Label::Positive), samples(Label::Negative));
    let positives_first = match order {
        ConjunctionOrder::Explicit(v) => return v.clone(),
        ConjunctionOrder::PositivesFirst | ConjunctionOrder::SubspaceLast => true,
        ConjunctionOrder::NegativesFirst => false,
        ConjunctionOrder::Heuristic => spec.k <= 2,
    };
    let (first, second) = if positives_first { (pos, neg) } else { (neg, pos) };
    let mut out = vec![Constraint::Base];
    if *order != ConjunctionOrder::SubspaceLast {
        out.push(Constraint::Subspace);
    }
    out.extend(lex);
    out.extend(first);
    out.extend(second);
    if *order == ConjunctionOrder::SubspaceLast {
        out.push(Constraint::Subspace);
    }
    out
}

/// A finished version-space diagram together with the manager that owns it.
pub struct VersionSpaceDiagram {
    pub manager: Manager,
    pub root: NodeRef,
    pub layout: EncodingLayout,
    /// Number of minterms over all `2nk` variables.
    pub syntactic_count: BigUint,
    pub trace: Vec<TraceStep>,
    /// Largest node count seen after any conjunction (only with tracing).
    pub peak_nodes: usize,
}

fn encode_constraint(
    m: &mut Manager,
    layout: &EncodingLayout,
    data: &Dataset,
    spec: SubspaceSpec,
    c: Constraint,
) -> Result<NodeRef> {
    match c {
        Constraint::Base => encode_base_space(m, layout),
        Constraint::Subspace => encode_subspace(m, layout, spec.l),
        Constraint::Lex(j) => encode_lex_pair(m, layout, j, j + 1),
        Constraint::Sample(i) => {
            let s = data
                .samples()
                .get(i)
                .ok_or_else(|| Error::InvalidInput(format!("no sample {i}")))?;
            match s.label {
                Label::Positive => encode_positive(m, layout, &s.bits),
                Label::Negative => encode_negative(m, layout, &s.bits),
            }
        }
    }
}

/// Intersects the sub-space with every sample's consistent set.
pub fn build_version_space(data: &Dataset, spec: SubspaceSpec, options: &BuildOptions) -> Result<VersionSpaceDiagram> {
    let layout = EncodingLayout::new(data.n(), spec.k);
    let mut m = Manager::new(layout.var_count());
    if let Some(limit) = options.node_limit {
        m = m.with_node_limit(limit);
    }
    if let Some(flag) = &options.interrupt {
        m = m.with_interrupt(flag.clone());
    }
    let (root, trace) = conjoin_in(&mut m, &layout, data, spec, options)?;
    let syntactic_count = m.count_minterms(root, layout.var_count())?;
    Ok(VersionSpaceDiagram {
        manager: m,
        root,
        layout,
        syntactic_count,
        peak_nodes: trace.iter().map(|t| t.nodes).max().unwrap_or(0),
        trace,
    })
}

/// Conjoins the planned constraints inside an existing manager, so that
/// diagrams built in different orders can be compared by handle. Node
/// limits and interrupts are those of `m`; the trace is empty unless
/// `options.trace` is set.
pub fn conjoin_in(
    m: &mut Manager,
    layout: &EncodingLayout,
    data: &Dataset,
    spec: SubspaceSpec,
    options: &BuildOptions,
) -> Result<(NodeRef, Vec<TraceStep>)> {
    if spec.l > layout.n * layout.k {
        return Err(Error::InvalidInput(format!(
            "sub-space {spec} needs more than {} slots",
            layout.n * layout.k
        )));
    }
    let mut acc = m.one();
    let mut trace = Vec::new();
    for c in plan(data, spec, &options.order) {
        if let Some(flag) = &options.interrupt {
            if flag.load(Ordering::Relaxed) {
                return Err(Error::Cancelled);
            }
        }
        let f = encode_constraint(m, layout, data, spec, c)?;
        acc = m.and(acc, f)?;
        if options.trace {
            let nodes = m.node_count(acc)?;
            trace.push(TraceStep { constraint: c, nodes });
        }
    }
    Ok((acc, trace))
}

/// Reads a hypothesis back from a total assignment of the `2nk` variables.
pub fn decode_minterm(assignment: &[bool], layout: &EncodingLayout) -> Result<Hypothesis> {
    if assignment.len() != layout.var_count() as usize {
        return Err(Error::DimensionMismatch {
            expected: layout.var_count() as usize,
            got: assignment.len(),
        });
    }
    let mut terms = vec![Term::empty(layout.n); layout.k];
    for (j, term) in terms.iter_mut().enumerate() {
        for i in 0..layout.n {
            let b0 = assignment[layout.bit_index(i, j, 0) as usize];
            let b1 = assignment[layout.bit_index(i, j, 1) as usize];
            term.0[i] = EncodingLayout::decode((b0, b1))
                .ok_or_else(|| Error::Encoding(format!("invalid code 11 at feature {} term {}", i + 1, j + 1)))?;
        }
    }
    Hypothesis::new(layout.n, terms)
}

/// Semantic size of a version space, with class representatives when the
/// syntactic count is at most `enum_cap`.
pub fn semantic_cardinality(vs: &VersionSpaceDiagram, enum_cap: usize) -> Result<EngineResult> {
    let syntactic = vs.syntactic_count.to_usize().unwrap_or(usize::MAX);
    if syntactic > enum_cap {
        return Ok(EngineResult {
            outcome: CountOutcome::Exceeds(enum_cap),
            members: Vec::new(),
        });
    }
    let minterms = vs
        .manager
        .enumerate_minterms(vs.root, vs.layout.var_count(), enum_cap)?;
    let hyps = minterms
        .assignments
        .iter()
        .map(|a| decode_minterm(a, &vs.layout))
        .collect::<Result<Vec<_>>>()?;
    let members = dedupe_semantic(vs.layout.n, &hyps)?;
    Ok(EngineResult {
        outcome: CountOutcome::Exact(members.len()),
        members,
    })
}

/// Builds and measures the version space of one sub-space.
pub fn learn_subspace(
    data: &Dataset,
    spec: SubspaceSpec,
    enum_cap: usize,
    options: &BuildOptions,
) -> Result<EngineResult> {
    let vs = build_version_space(data, spec, options)?;
    semantic_cardinality(&vs, enum_cap)
}
