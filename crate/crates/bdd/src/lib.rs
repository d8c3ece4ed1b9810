//! Reduced ordered binary decision diagrams over a fixed variable order.
//!
//! A [`Manager`] owns every node it creates. Nodes are hash-consed through a
//! unique table, so two handles compare equal exactly when they denote the
//! same Boolean function. Variable `0` sits at the top of every diagram and
//! the order never changes. There are no complement edges and no garbage
//! collection: nodes live until the manager is dropped.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

static NEXT_MANAGER_ID: AtomicU32 = AtomicU32::new(1);

const ZERO_INDEX: u32 = 0;
const ONE_INDEX: u32 = 1;
const TERMINAL_VAR: u32 = u32::MAX;
/// Interrupt flag is polled once per this many freshly created nodes.
const POLL_INTERVAL: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BddError {
    #[error("variable index {index} out of range (manager has {count} variables)")]
    VarOutOfRange { index: u32, count: u32 },
    #[error("node handle belongs to a different manager")]
    ForeignNode,
    #[error("counting over {over_vars} variables but the diagram depends on variable {max_var}")]
    TooFewVars { over_vars: u32, max_var: u32 },
    #[error("node limit of {0} reached")]
    NodeLimit(usize),
    #[error("interrupted")]
    Interrupted,
}

pub type Result<T> = std::result::Result<T, BddError>;

/// Binary operators supported by [`Manager::apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    And,
    Or,
    Xnor,
}

/// Handle to a node of a particular [`Manager`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    manager: u32,
    index: u32,
}

impl NodeRef {
    pub fn is_zero(self) -> bool {
        self.index == ZERO_INDEX
    }

    pub fn is_one(self) -> bool {
        self.index == ONE_INDEX
    }

    pub fn is_terminal(self) -> bool {
        self.index <= ONE_INDEX
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    low: u32,
    high: u32,
}

/// Result of [`Manager::enumerate_minterms`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Minterms {
    pub assignments: Vec<Vec<bool>>,
    /// True when further satisfying assignments exist beyond the limit.
    pub more: bool,
}

pub struct Manager {
    id: u32,
    var_count: u32,
    nodes: Vec<Node>,
    unique: HashMap<Node, u32>,
    apply_cache: HashMap<(Op, u32, u32), u32>,
    not_cache: HashMap<u32, u32>,
    node_limit: Option<usize>,
    interrupt: Option<Arc<AtomicBool>>,
    created_since_poll: usize,
}

impl std::fmt::Debug for Manager {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Manager")
            .field("id", &self.id)
            .field("var_count", &self.var_count)
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl Manager {
    pub fn new(var_count: u32) -> Self {
        let terminal = |i| Node {
            var: TERMINAL_VAR,
            low: i,
            high: i,
        };
        Manager {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            var_count,
            nodes: vec![terminal(ZERO_INDEX), terminal(ONE_INDEX)],
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            not_cache: HashMap::new(),
            node_limit: None,
            interrupt: None,
            created_since_poll: 0,
        }
    }

    /// Caps the number of internal nodes; operations that would exceed it
    /// fail with [`BddError::NodeLimit`].
    pub fn with_node_limit(mut self, limit: usize) -> Self {
        self.node_limit = Some(limit);
        self
    }

    /// Installs a flag that aborts running operations with
    /// [`BddError::Interrupted`] once it becomes true.
    pub fn with_interrupt(mut self, flag: Arc<AtomicBool>) -> Self {
        self.interrupt = Some(flag);
        self
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    /// Number of internal nodes allocated so far (across all diagrams).
    pub fn allocated(&self) -> usize {
        self.nodes.len() - 2
    }

    fn handle(&self, index: u32) -> NodeRef {
        NodeRef {
            manager: self.id,
            index,
        }
    }

    fn check(&self, f: NodeRef) -> Result<u32> {
        if f.manager == self.id {
            Ok(f.index)
        } else {
            Err(BddError::ForeignNode)
        }
    }

    pub fn zero(&self) -> NodeRef {
        self.handle(ZERO_INDEX)
    }

    pub fn one(&self) -> NodeRef {
        self.handle(ONE_INDEX)
    }

    pub fn constant(&self, value: bool) -> NodeRef {
        if value {
            self.one()
        } else {
            self.zero()
        }
    }

    /// Projection function of variable `index`.
    pub fn var(&mut self, index: u32) -> Result<NodeRef> {
        self.literal(index, true)
    }

    /// The literal `index` (when `positive`) or its negation.
    pub fn literal(&mut self, index: u32, positive: bool) -> Result<NodeRef> {
        if index >= self.var_count {
            return Err(BddError::VarOutOfRange {
                index,
                count: self.var_count,
            });
        }
        let (low, high) = if positive {
            (ZERO_INDEX, ONE_INDEX)
        } else {
            (ONE_INDEX, ZERO_INDEX)
        };
        let n = self.mk(index, low, high)?;
        Ok(self.handle(n))
    }

    fn mk(&mut self, var: u32, low: u32, high: u32) -> Result<u32> {
        if low == high {
            return Ok(low);
        }
        let node = Node { var, low, high };
        if let Some(&i) = self.unique.get(&node) {
            return Ok(i);
        }
        if let Some(limit) = self.node_limit {
            if self.allocated() >= limit {
                return Err(BddError::NodeLimit(limit));
            }
        }
        self.created_since_poll += 1;
        if self.created_since_poll >= POLL_INTERVAL {
            self.created_since_poll = 0;
            if let Some(flag) = &self.interrupt {
                if flag.load(Ordering::Relaxed) {
                    return Err(BddError::Interrupted);
                }
            }
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(node);
        self.unique.insert(node, i);
        Ok(i)
    }

    fn var_of(&self, i: u32) -> u32 {
        self.nodes[i as usize].var
    }

    fn cofactors(&self, i: u32, var: u32) -> (u32, u32) {
        let n = self.nodes[i as usize];
        if n.var == var {
            (n.low, n.high)
        } else {
            (i, i)
        }
    }

    pub fn apply(&mut self, op: Op, f: NodeRef, g: NodeRef) -> Result<NodeRef> {
        let (a, b) = (self.check(f)?, self.check(g)?);
        let r = self.apply_rec(op, a, b)?;
        Ok(self.handle(r))
    }

    pub fn and(&mut self, f: NodeRef, g: NodeRef) -> Result<NodeRef> {
        self.apply(Op::And, f, g)
    }

    pub fn or(&mut self, f: NodeRef, g: NodeRef) -> Result<NodeRef> {
        self.apply(Op::Or, f, g)
    }

    pub fn xnor(&mut self, f: NodeRef, g: NodeRef) -> Result<NodeRef> {
        self.apply(Op::Xnor, f, g)
    }

    pub fn negate(&mut self, f: NodeRef) -> Result<NodeRef> {
        let a = self.check(f)?;
        let r = self.not_rec(a)?;
        Ok(self.handle(r))
    }

    /// Conjunction of all operands; `ONE` for an empty iterator.
    pub fn and_all<I: IntoIterator<Item = NodeRef>>(&mut self, items: I) -> Result<NodeRef> {
        let mut acc = self.one();
        for f in items {
            acc = self.and(acc, f)?;
        }
        Ok(acc)
    }

    /// Disjunction of all operands; `ZERO` for an empty iterator.
    pub fn or_all<I: IntoIterator<Item = NodeRef>>(&mut self, items: I) -> Result<NodeRef> {
        let mut acc = self.zero();
        for f in items {
            acc = self.or(acc, f)?;
        }
        Ok(acc)
    }

    fn not_rec(&mut self, f: u32) -> Result<u32> {
        match f {
            ZERO_INDEX => return Ok(ONE_INDEX),
            ONE_INDEX => return Ok(ZERO_INDEX),
            _ => {}
        }
        if let Some(&r) = self.not_cache.get(&f) {
            return Ok(r);
        }
        let n = self.nodes[f as usize];
        let low = self.not_rec(n.low)?;
        let high = self.not_rec(n.high)?;
        let r = self.mk(n.var, low, high)?;
        self.not_cache.insert(f, r);
        Ok(r)
    }

    fn apply_rec(&mut self, op: Op, f: u32, g: u32) -> Result<u32> {
        match op {
            Op::And => {
                if f == ZERO_INDEX || g == ZERO_INDEX {
                    return Ok(ZERO_INDEX);
                }
                if f == ONE_INDEX || f == g {
                    return Ok(g);
                }
                if g == ONE_INDEX {
                    return Ok(f);
                }
            }
            Op::Or => {
                if f == ONE_INDEX || g == ONE_INDEX {
                    return Ok(ONE_INDEX);
                }
                if f == ZERO_INDEX || f == g {
                    return Ok(g);
                }
                if g == ZERO_INDEX {
                    return Ok(f);
                }
            }
            Op::Xnor => {
                if f == g {
                    return Ok(ONE_INDEX);
                }
                if f == ONE_INDEX {
                    return Ok(g);
                }
                if g == ONE_INDEX {
                    return Ok(f);
                }
                if f == ZERO_INDEX {
                    return self.not_rec(g);
                }
                if g == ZERO_INDEX {
                    return self.not_rec(f);
                }
            }
        }
        // every operator here is commutative
        let key = (op, f.min(g), f.max(g));
        if let Some(&r) = self.apply_cache.get(&key) {
            return Ok(r);
        }
        let var = self.var_of(f).min(self.var_of(g));
        let (f0, f1) = self.cofactors(f, var);
        let (g0, g1) = self.cofactors(g, var);
        let low = self.apply_rec(op, f0, g0)?;
        let high = self.apply_rec(op, f1, g1)?;
        let r = self.mk(var, low, high)?;
        self.apply_cache.insert(key, r);
        Ok(r)
    }

    /// Evaluates `f` under a total assignment indexed by variable.
    pub fn eval(&self, f: NodeRef, assignment: &[bool]) -> Result<bool> {
        let mut i = self.check(f)?;
        while i > ONE_INDEX {
            let n = self.nodes[i as usize];
            let bit = *assignment.get(n.var as usize).ok_or(BddError::VarOutOfRange {
                index: n.var,
                count: assignment.len() as u32,
            })?;
            i = if bit { n.high } else { n.low };
        }
        Ok(i == ONE_INDEX)
    }

    fn reachable(&self, root: u32) -> Vec<u32> {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![root];
        let mut out = Vec::new();
        while let Some(i) = stack.pop() {
            if i <= ONE_INDEX || !seen.insert(i) {
                continue;
            }
            out.push(i);
            let n = self.nodes[i as usize];
            stack.push(n.low);
            stack.push(n.high);
        }
        out
    }

    /// Number of distinct internal nodes reachable from `f`.
    pub fn node_count(&self, f: NodeRef) -> Result<usize> {
        let i = self.check(f)?;
        Ok(self.reachable(i).len())
    }

    /// Largest variable index `f` depends on, `None` for constants.
    pub fn max_var(&self, f: NodeRef) -> Result<Option<u32>> {
        let i = self.check(f)?;
        Ok(self.reachable(i).into_iter().map(|n| self.var_of(n)).max())
    }

    fn level(&self, i: u32, over_vars: u32) -> u32 {
        if i <= ONE_INDEX {
            over_vars
        } else {
            self.var_of(i)
        }
    }

    fn check_over_vars(&self, f: NodeRef, over_vars: u32) -> Result<u32> {
        let i = self.check(f)?;
        if let Some(max_var) = self.max_var(f)? {
            if max_var >= over_vars {
                return Err(BddError::TooFewVars { over_vars, max_var });
            }
        }
        Ok(i)
    }

    /// Number of satisfying assignments of `f` over variables `0..over_vars`.
    pub fn count_minterms(&self, f: NodeRef, over_vars: u32) -> Result<BigUint> {
        let root = self.check_over_vars(f, over_vars)?;
        let mut memo: HashMap<u32, BigUint> = HashMap::new();
        let below = self.count_rec(root, over_vars, &mut memo);
        Ok(below << self.level(root, over_vars))
    }

    // Models over the variables from this node's level down to `over_vars`.
    fn count_rec(&self, i: u32, over_vars: u32, memo: &mut HashMap<u32, BigUint>) -> BigUint {
        match i {
            ZERO_INDEX => return BigUint::zero(),
            ONE_INDEX => return BigUint::one(),
            _ => {}
        }
        if let Some(c) = memo.get(&i) {
            return c.clone();
        }
        let n = self.nodes[i as usize];
        let low = self.count_rec(n.low, over_vars, memo) << (self.level(n.low, over_vars) - n.var - 1);
        let high = self.count_rec(n.high, over_vars, memo) << (self.level(n.high, over_vars) - n.var - 1);
        let c = low + high;
        memo.insert(i, c.clone());
        c
    }

    /// Lists up to `limit` satisfying assignments over `0..over_vars`, ordered
    /// lexicographically with variable 0 most significant and `false` first.
    pub fn enumerate_minterms(&self, f: NodeRef, over_vars: u32, limit: usize) -> Result<Minterms> {
        let root = self.check_over_vars(f, over_vars)?;
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(over_vars as usize);
        let want = limit.saturating_add(1);
        self.enum_rec(root, 0, over_vars, &mut current, &mut out, want);
        let more = out.len() > limit;
        out.truncate(limit);
        Ok(Minterms { assignments: out, more })
    }

    fn enum_rec(
        &self,
        i: u32,
        level: u32,
        over_vars: u32,
        current: &mut Vec<bool>,
        out: &mut Vec<Vec<bool>>,
        want: usize,
    ) {
        if i == ZERO_INDEX || out.len() >= want {
            return;
        }
        if level == over_vars {
            out.push(current.clone());
            return;
        }
        let (low, high) = self.cofactors(i, level);
        for (bit, child) in [(false, low), (true, high)] {
            current.push(bit);
            self.enum_rec(child, level + 1, over_vars, current, out, want);
            current.pop();
        }
    }

    /// Graphviz rendering of `f`, for debugging.
    pub fn to_dot(&self, f: NodeRef) -> Result<String> {
        let root = self.check(f)?;
        let mut nodes = self.reachable(root);
        nodes.sort_unstable();
        let mut s = String::from("digraph bdd {\n  zero [shape=box,label=\"0\"];\n  one [shape=box,label=\"1\"];\n");
        let name = |i: u32| match i {
            ZERO_INDEX => "zero".to_string(),
            ONE_INDEX => "one".to_string(),
            _ => format!("n{i}"),
        };
        for &i in &nodes {
            let n = self.nodes[i as usize];
            let _ = writeln!(s, "  n{i} [label=\"v{}\"];", n.var);
            let _ = writeln!(s, "  n{i} -> {} [style=dashed];", name(n.low));
            let _ = writeln!(s, "  n{i} -> {};", name(n.high));
        }
        if root <= ONE_INDEX {
            let _ = writeln!(s, "  root -> {};", name(root));
        }
        s.push_str("}\n");
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_vars_are_hash_consed() {
        let mut m = Manager::new(4);
        assert_eq!(m.constant(true), m.constant(true));
        assert_eq!(m.var(3).unwrap(), m.var(3).unwrap());
        let a = m.var(0).unwrap();
        let zero = m.constant(false);
        assert_eq!(m.and(a, zero).unwrap(), m.zero());
    }

    #[test]
    fn var_out_of_range() {
        let mut m = Manager::new(2);
        assert_eq!(m.var(2), Err(BddError::VarOutOfRange { index: 2, count: 2 }));
    }

    #[test]
    fn idempotence_and_involution() {
        let mut m = Manager::new(3);
        let a = m.var(0).unwrap();
        let b = m.var(2).unwrap();
        let f = m.or(a, b).unwrap();
        assert_eq!(m.and(f, f).unwrap(), f);
        let nf = m.negate(f).unwrap();
        assert_eq!(m.negate(nf).unwrap(), f);
    }

    #[test]
    fn xnor_two_minterms_three_nodes() {
        let mut m = Manager::new(2);
        let a = m.var(0).unwrap();
        let b = m.var(1).unwrap();
        let f = m.xnor(a, b).unwrap();
        assert_eq!(m.count_minterms(f, 2).unwrap(), BigUint::from(2u32));
        let e = m.enumerate_minterms(f, 2, 10).unwrap();
        assert_eq!(e.assignments, vec![vec![false, false], vec![true, true]]);
        assert_eq!(m.node_count(f).unwrap(), 3);
    }

    #[test]
    fn node_counts_of_small_functions() {
        let mut m = Manager::new(2);
        assert_eq!(m.node_count(m.one()).unwrap(), 0);
        let a = m.var(1).unwrap();
        assert_eq!(m.node_count(a).unwrap(), 1);
    }

    #[test]
    fn counting_examples() {
        let mut m = Manager::new(10);
        let a = m.var(0).unwrap();
        assert_eq!(m.count_minterms(a, 2).unwrap(), BigUint::from(2u32));
        assert_eq!(m.count_minterms(m.one(), 10).unwrap(), BigUint::from(1024u32));
        assert_eq!(m.count_minterms(m.zero(), 10).unwrap(), BigUint::zero());
        let c = m.var(5).unwrap();
        assert_eq!(
            m.count_minterms(c, 5),
            Err(BddError::TooFewVars {
                over_vars: 5,
                max_var: 5
            })
        );
    }

    #[test]
    fn enumeration_order_and_limit() {
        let mut m = Manager::new(2);
        let a = m.var(0).unwrap();
        let b = m.var(1).unwrap();
        let z = m.enumerate_minterms(m.zero(), 2, 10).unwrap();
        assert!(z.assignments.is_empty() && !z.more);
        let ab = m.and(a, b).unwrap();
        let e = m.enumerate_minterms(ab, 2, 10).unwrap();
        assert_eq!(e.assignments, vec![vec![true, true]]);
        assert!(!e.more);
        let aorb = m.or(a, b).unwrap();
        let e = m.enumerate_minterms(aorb, 2, 2).unwrap();
        assert_eq!(e.assignments, vec![vec![false, true], vec![true, false]]);
        assert!(e.more);
    }

    #[test]
    fn foreign_handles_rejected() {
        let mut m1 = Manager::new(2);
        let mut m2 = Manager::new(2);
        let a = m1.var(0).unwrap();
        let b = m2.var(0).unwrap();
        assert_eq!(m1.and(a, b), Err(BddError::ForeignNode));
        assert_eq!(m2.negate(a), Err(BddError::ForeignNode));
    }

    #[test]
    fn node_limit_and_interrupt() {
        let mut m = Manager::new(8).with_node_limit(3);
        for i in 0..3 {
            m.var(i).unwrap();
        }
        assert_eq!(m.var(3), Err(BddError::NodeLimit(3)));

        // equality of two 13-bit halves needs ~2^13 nodes in this order
        let flag = Arc::new(AtomicBool::new(true));
        let mut m = Manager::new(26).with_interrupt(flag);
        let mut acc = Ok(m.one());
        for i in 0..13 {
            let x = m.var(i).unwrap();
            let y = m.var(i + 13).unwrap();
            acc = acc.and_then(|a| {
                let t = m.xnor(x, y)?;
                m.and(a, t)
            });
        }
        assert_eq!(acc, Err(BddError::Interrupted));
    }

    #[test]
    fn dot_output_mentions_every_node() {
        let mut m = Manager::new(2);
        let a = m.var(0).unwrap();
        let b = m.var(1).unwrap();
        let f = m.xnor(a, b).unwrap();
        let dot = m.to_dot(f).unwrap();
        assert_eq!(dot.matches("[label=\"v").count(), 3);
    }
}
