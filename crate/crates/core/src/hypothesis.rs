//! k-term DNF hypotheses, their evaluation and the textual form.
//!
//! A hypothesis over `n` binary features is a list of terms; each term
//! assigns every feature one of three states. The textual form joins terms
//! with `" + "` and literals within a term with a single space, e.g.
//! `x1 ~x3 + x2`. Features are 1-indexed and an empty (always-true) term is
//! written `1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Role of one feature inside one term.
///
/// The declaration order is the canonical term order: `Neg < Pos < DontCare`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LiteralState {
    Neg,
    Pos,
    DontCare,
}

impl LiteralState {
    pub const ALL: [LiteralState; 3] = [LiteralState::Neg, LiteralState::Pos, LiteralState::DontCare];

    pub fn is_literal(self) -> bool {
        self != LiteralState::DontCare
    }

    /// Whether a term holding this state for a feature can stay true when the
    /// feature has value `bit`.
    #[inline]
    pub fn admits(self, bit: bool) -> bool {
        match self {
            LiteralState::Neg => !bit,
            LiteralState::Pos => bit,
            LiteralState::DontCare => true,
        }
    }
}

/// One conjunction; `Term`s compare lexicographically under the canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term(pub Vec<LiteralState>);

impl Term {
    pub fn empty(n: usize) -> Self {
        Term(vec![LiteralState::DontCare; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn literal_count(&self) -> usize {
        self.0.iter().filter(|s| s.is_literal()).count()
    }

    pub fn eval(&self, bits: &[bool]) -> bool {
        self.0.iter().zip(bits).all(|(s, &b)| s.admits(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hypothesis {
    n: usize,
    terms: Vec<Term>,
}

impl Hypothesis {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("a hypothesis needs at least one term".into()));
        }
        if let Some(t) = terms.iter().find(|t| t.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: t.len(),
            });
        }
        Ok(Hypothesis { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn literal_count(&self) -> usize {
        self.terms.iter().map(Term::literal_count).sum()
    }

    pub fn evaluate(&self, bits: &[bool]) -> Result<bool> {
        if bits.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: bits.len(),
            });
        }
        Ok(self.eval_unchecked(bits))
    }

    /// Evaluation without the length check; callers guarantee `bits.len() == n`.
    #[inline]
    pub fn eval_unchecked(&self, bits: &[bool]) -> bool {
        self.terms.iter().any(|t| t.eval(bits))
    }

    /// Sorts terms strictly increasing under the canonical order.
    pub fn canonical_term_sort(&self) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.sort();
        if let Some(w) = terms.windows(2).find(|w| w[0] == w[1]) {
            let dup = Hypothesis::new(self.n, vec![w[0].clone()])?;
            return Err(Error::NonCanonical(format!("duplicate term `{dup}`")));
        }
        Ok(Hypothesis { n: self.n, terms })
    }

    /// Whether the terms are already strictly increasing.
    pub fn is_canonical(&self) -> bool {
        self.terms.windows(2).all(|w| w[0] < w[1])
    }

    /// Parses the textual form. Terms are separated by `+` or `|`; literals
    /// by whitespace or `&`; negation is `~` (or `!`).
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut terms = Vec::new();
        for raw in text.split(['+', '|']) {
            let raw = raw.trim();
            if raw.is_empty() {
                return Err(Error::InvalidInput(format!("empty term in `{text}`")));
            }
            let mut term = Term::empty(n);
            if raw != "1" && raw != "true" {
                for lit in raw
                    .split(|c: char| c.is_whitespace() || c == '&')
                    .filter(|s| !s.is_empty())
                {
                    let (state, rest) = match lit.strip_prefix(['~', '!']) {
                        Some(rest) => (LiteralState::Neg, rest),
                        None => (LiteralState::Pos, lit),
                    };
                    let index: usize = rest
                        .strip_prefix('x')
                        .and_then(|d| d.parse().ok())
                        .ok_or_else(|| Error::InvalidInput(format!("bad literal `{lit}`")))?;
                    if index == 0 || index > n {
                        return Err(Error::InvalidInput(format!("literal `{lit}` outside features 1..={n}")));
                    }
                    let slot = &mut term.0[index - 1];
                    if *slot != LiteralState::DontCare {
                        return Err(Error::InvalidInput(format!(
                            "feature x{index} appears twice in term `{raw}`"
                        )));
                    }
                    *slot = state;
                }
            }
            terms.push(term);
        }
        Hypothesis::new(n, terms)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, s) in self.0.iter().enumerate() {
            let neg = match s {
                LiteralState::DontCare => continue,
                LiteralState::Neg => "~",
                LiteralState::Pos => "",
            };
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{neg}x{}", i + 1)?;
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, t) in self.terms.iter().enumerate() {
            if j > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
