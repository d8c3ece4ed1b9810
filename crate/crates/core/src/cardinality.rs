use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use vsl_bdd::{Manager, NodeRef};

use crate::error::Result;
use crate::hypothesis::{Hypothesis, LiteralState};

/// Version-space size as determined by one engine for one sub-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountOutcome {
    /// Exactly this many semantically distinct hypotheses.
    Exact(usize),
    /// More than this many hypotheses; enumeration stopped early.
    Exceeds(usize),
}

/// Outcome of one engine on one sub-space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineResult {
    pub outcome: CountOutcome,
    /// One representative per semantic class when `outcome` is exact,
    /// sorted by text; empty otherwise.
    pub members: Vec<Hypothesis>,
}

/// Decision diagram of the Boolean function a hypothesis computes, over
/// feature variables `0..n`.
pub fn function_diagram(m: &mut Manager, h: &Hypothesis) -> Result<NodeRef> {
    let mut f = m.zero();
    for t in h.terms() {
        let mut term = m.one();
        // conjoin bottom-up so every step only adds a node on top
        for (i, s) in t.0.iter().enumerate().rev() {
            let lit = match s {
                LiteralState::DontCare => continue,
                LiteralState::Pos => m.literal(i as u32, true)?,
                LiteralState::Neg => m.literal(i as u32, false)?,
            };
            term = m.and(lit, term)?;
        }
        f = m.or(f, term)?;
    }
    Ok(f)
}

/// Groups hypotheses by the function they compute.
///
/// Returns one representative per class (the member with the smallest text
/// form, after canonical term sorting), sorted by text.
pub fn dedupe_semantic(n: usize, hypotheses: &[Hypothesis]) -> Result<Vec<Hypothesis>> {
    let mut m = Manager::new(n as u32);
    let mut classes: HashMap<NodeRef, (String, Hypothesis)> = HashMap::new();
    for h in hypotheses {
        let h = h.canonical_term_sort()?;
        let f = function_diagram(&mut m, &h)?;
        let text = h.to_string();
        match classes.get_mut(&f) {
            Some((best, rep)) => {
                if text < *best {
                    *best = text;
                    *rep = h;
                }
            }
            None => {
                classes.insert(f, (text, h));
            }
        }
    }
    let mut reps: Vec<(String, Hypothesis)> = classes.into_values().collect();
    reps.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(reps.into_iter().map(|(_, h)| h).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(text: &str, n: usize) -> Hypothesis {
        Hypothesis::parse(text, n).unwrap()
    }

    #[test]
    fn absorbed_forms_collapse() {
        let reps = dedupe_semantic(2, &[h("x1 + x1 x2", 2), h("x1 + x1 ~x2", 2)]).unwrap();
        assert_eq!(reps.len(), 1);
        assert_eq!(reps[0].to_string(), "x1 x2 + x1");
    }

    #[test]
    fn distinct_monomials_stay_apart() {
        let reps = dedupe_semantic(2, &[h("x2", 2), h("x1", 2)]).unwrap();
        assert_eq!(reps.iter().map(|r| r.to_string()).collect::<Vec<_>>(), ["x1", "x2"]);
    }

    #[test]
    fn function_diagram_matches_evaluation() {
        let hyp = h("x1 ~x3 + x2 x3", 3);
        let mut m = Manager::new(3);
        let f = function_diagram(&mut m, &hyp).unwrap();
        for v in 0..8u32 {
            let bits: Vec<bool> = (0..3).map(|i| v >> i & 1 == 1).collect();
            assert_eq!(m.eval(f, &bits).unwrap(), hyp.eval_unchecked(&bits));
        }
    }
}
