//! Planted-concept datasets.
//!
//! Vectors are drawn uniformly with [`ChaCha8Rng`] seeded through
//! `SeedableRng::seed_from_u64`; feature `i` of a vector is bit `i % 64` of
//! the `i / 64`-th `next_u64` output. Both are fixed, platform-independent
//! algorithms, so a seed reproduces the same dataset on every build.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsl_bdd::Manager;

use crate::cardinality::function_diagram;
use crate::dataset::{Dataset, Label, Sample};
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, LiteralState};

/// Draws allowed per class before generation gives up.
pub const MAX_DRAWS_PER_CLASS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub target: Hypothesis,
    pub m_p: usize,
    pub m_n: usize,
    pub seed: u64,
    /// Start the positives with, per term, a vector only that term explains.
    pub per_term_witness: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    /// Positives first (witnesses leading), then negatives, each in draw order.
    pub dataset: Dataset,
    /// Problems that did not stop generation, e.g. a witness that cannot exist.
    pub warnings: Vec<String>,
}

fn draw(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    let mut bits = Vec::with_capacity(n);
    while bits.len() < n {
        let w = rng.next_u64();
        let take = (n - bits.len()).min(64);
        bits.extend((0..take).map(|i| w >> i & 1 == 1));
    }
    bits
}

/// A vector on which term `j` is true and every other term is false, built
/// from `base` by forcing term `j`'s literals and then, for each other term,
/// one free feature to the value that term forbids.
pub fn witness(target: &Hypothesis, j: usize, base: &[bool]) -> Option<Vec<bool>> {
    let terms = target.terms();
    let mut v = base.to_vec();
    let mut fixed = vec![false; target.n()];
    for (i, s) in terms[j].0.iter().enumerate() {
        if s.is_literal() {
            v[i] = *s == LiteralState::Pos;
            fixed[i] = true;
        }
    }
    for (o, t) in terms.iter().enumerate() {
        if o == j {
            continue;
        }
        let already_false = t.0.iter().enumerate().any(|(i, s)| fixed[i] && !s.admits(v[i]));
        if already_false {
            continue;
        }
        let i = (0..target.n()).find(|&i| !fixed[i] && t.0[i].is_literal())?;
        v[i] = t.0[i] == LiteralState::Neg;
        fixed[i] = true;
    }
    let only_j = terms.iter().enumerate().all(|(o, t)| t.eval(&v) == (o == j));
    only_j.then_some(v)
}

pub fn generate(g: &GenSpec) -> Result<Generated> {
    if g.target.n() != g.n {
        return Err(Error::DimensionMismatch {
            expected: g.n,
            got: g.target.n(),
        });
    }
    if g.m_n > 0 {
        let mut m = Manager::new(g.n as u32);
        if function_diagram(&mut m, &g.target)?.is_one() {
            return Err(Error::Generation(format!(
                "target `{}` is always true; no negative sample exists",
                g.target
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let mut warnings = Vec::new();
    let mut positives = Vec::with_capacity(g.m_p);
    if g.per_term_witness {
        for j in 0..g.target.k() {
            let base = draw(&mut rng, g.n);
            if positives.len() == g.m_p {
                warnings.push(format!(
                    "no room for witness of term {} within {} positives",
                    j + 1,
                    g.m_p
                ));
                continue;
            }
            match witness(&g.target, j, &base) {
                Some(v) => positives.push(v),
                None => warnings.push(format!(
                    "term {} cannot be separated from the other terms; witness skipped",
                    j + 1
                )),
            }
        }
    }
    let mut negatives = Vec::with_capacity(g.m_n);
    let (mut pos_draws, mut neg_draws) = (0u64, 0u64);
    while positives.len() < g.m_p || negatives.len() < g.m_n {
        if pos_draws > MAX_DRAWS_PER_CLASS || neg_draws > MAX_DRAWS_PER_CLASS {
            let class = if pos_draws > MAX_DRAWS_PER_CLASS {
                "positive"
            } else {
                "negative"
            };
            return Err(Error::Generation(format!(
                "{class} quota not met after {MAX_DRAWS_PER_CLASS} draws"
            )));
        }
        pos_draws += u64::from(positives.len() < g.m_p);
        neg_draws += u64::from(negatives.len() < g.m_n);
        let v = draw(&mut rng, g.n);
        if g.target.eval_unchecked(&v) {
            if positives.len() < g.m_p {
                positives.push(v);
            }
        } else if negatives.len() < g.m_n {
            negatives.push(v);
        }
    }
    let samples = positives
        .into_iter()
        .map(|b| Sample::new(b, Label::Positive))
        .chain(negatives.into_iter().map(|b| Sample::new(b, Label::Negative)))
        .collect();
    Ok(Generated {
        dataset: Dataset::new(g.n, samples)?,
        warnings,
    })
}
