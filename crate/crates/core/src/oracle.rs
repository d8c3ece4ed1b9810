//! Brute-force version spaces for small instances.
//!
//! Everything here is deliberately naive: hypotheses are listed one by one,
//! filtered against every sample, and grouped by explicit truth table. No
//! decision diagrams or solvers are involved, so results can serve as ground
//! truth for both learning engines.

use std::collections::HashMap;

use crate::complexity::SubspaceSpec;
use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, LiteralState, Term};

/// Largest `n * k` the oracle will enumerate.
pub const MAX_SLOTS: usize = 20;
/// Largest `n` for which truth tables are built.
pub const MAX_TABLE_FEATURES: usize = 16;

/// A Boolean function over `n` features with one syntactic representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticClass {
    /// Row `r` holds the value on the input whose feature `i` is bit `i` of `r`.
    pub truth_table: Vec<bool>,
    pub representative: Hypothesis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVersionSpace {
    /// Classes sorted by the representative's text.
    pub classes: Vec<SemanticClass>,
}

impl OracleVersionSpace {
    pub fn count(&self) -> usize {
        self.classes.len()
    }

    pub fn representatives(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.representative.to_string()).collect()
    }
}

fn guard(n: usize, spec: SubspaceSpec) -> Result<()> {
    if n == 0 || n * spec.k > MAX_SLOTS {
        return Err(Error::InvalidInput(format!(
            "oracle limited to n*k <= {MAX_SLOTS}, got n={n} k={}",
            spec.k
        )));
    }
    Ok(())
}

// Terms with at most `budget` literals, in increasing canonical order.
fn terms_up_to(n: usize, budget: usize) -> Vec<Term> {
    fn rec(n: usize, budget: usize, cur: &mut Vec<LiteralState>, out: &mut Vec<Term>) {
        if cur.len() == n {
            out.push(Term(cur.clone()));
            return;
        }
        for s in LiteralState::ALL {
            if s.is_literal() && budget == 0 {
                continue;
            }
            cur.push(s);
            rec(n, budget - usize::from(s.is_literal()), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, budget, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Every syntactic hypothesis of the sub-space with strictly increasing terms.
pub fn enumerate_hypotheses(n: usize, spec: SubspaceSpec) -> Result<Vec<Hypothesis>> {
    guard(n, spec)?;
    let terms = terms_up_to(n, spec.l);
    let counts: Vec<usize> = terms.iter().map(Term::literal_count).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(spec.k);
    choose(&terms, &counts, 0, spec.k, spec.l, &mut chosen, &mut |idx| {
        let ts = idx.iter().map(|&i| terms[i].clone()).collect();
        out.push(Hypothesis::new(n, ts).expect("terms have length n"));
    });
    Ok(out)
}

fn choose(
    terms: &[Term],
    counts: &[usize],
    start: usize,
    k_left: usize,
    l_left: usize,
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if k_left == 0 {
        if l_left == 0 {
            emit(chosen);
        }
        return;
    }
    for i in start..terms.len() {
        if counts[i] > l_left {
            continue;
        }
        chosen.push(i);
        choose(terms, counts, i + 1, k_left - 1, l_left - counts[i], chosen, emit);
        chosen.pop();
    }
}

fn consistent(h: &Hypothesis, data: &Dataset) -> bool {
    data.samples().iter().all(|s| {
        let value = h.terms().iter().any(|t| {
            t.0.iter().zip(&s.bits).all(|(st, &b)| match st {
                LiteralState::Neg => !b,
                LiteralState::Pos => b,
                LiteralState::DontCare => true,
            })
        });
        value == (s.label == Label::Positive)
    })
}

fn truth_table(h: &Hypothesis) -> Vec<bool> {
    let n = h.n();
    (0usize..1 << n)
        .map(|row| {
            let bits: Vec<bool> = (0..n).map(|i| row >> i & 1 == 1).collect();
            h.eval_unchecked(&bits)
        })
        .collect()
}

/// Consistent hypotheses of the sub-space grouped into semantic classes.
///
/// Each class is represented by its member with the smallest text form.
pub fn oracle_version_space(data: &Dataset, spec: SubspaceSpec) -> Result<OracleVersionSpace> {
    let n = data.n();
    guard(n, spec)?;
    if n > MAX_TABLE_FEATURES {
        return Err(Error::InvalidInput(format!(
            "oracle truth tables limited to n <= {MAX_TABLE_FEATURES}"
        )));
    }
    let mut classes: HashMap<Vec<bool>, (String, Hypothesis)> = HashMap::new();
    for h in enumerate_hypotheses(n, spec)? {
        if !consistent(&h, data) {
            continue;
        }
        let text = h.to_string();
        classes
            .entry(truth_table(&h))
            .and_modify(|(best, rep)| {
                if text < *best {
                    *best = text.clone();
                    *rep = h.clone();
                }
            })
            .or_insert((text, h));
    }
    let mut classes: Vec<(String, SemanticClass)> = classes
        .into_iter()
        .map(|(truth_table, (text, representative))| {
            (
                text,
                SemanticClass {
                    truth_table,
                    representative,
                },
            )
        })
        .collect();
    classes.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(OracleVersionSpace {
        classes: classes.into_iter().map(|(_, c)| c).collect(),
    })
}
