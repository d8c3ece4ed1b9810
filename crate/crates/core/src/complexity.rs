use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A hypothesis sub-space: all `k`-term DNFs with exactly `l` literals in total.
///
/// The derived ordering compares `l` first and `k` second, which is the
/// complexity order used by the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubspaceSpec {
    pub l: usize,
    pub k: usize,
}

impl SubspaceSpec {
    pub fn new(l: usize, k: usize) -> Result<Self> {
        if k == 0 || l < k {
            return Err(Error::InvalidInput(format!("sub-space ({l},{k}) needs 1 <= k <= l")));
        }
        Ok(SubspaceSpec { l, k })
    }
}

impl fmt::Display for SubspaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.l, self.k)
    }
}

/// All sub-spaces with `l <= l_max` and `k <= min(l, k_max)`, simplest first.
pub fn complexity_order(l_max: usize, k_max: usize) -> Vec<SubspaceSpec> {
    (1..=l_max)
        .flat_map(|l| (1..=l.min(k_max)).map(move |k| SubspaceSpec { l, k }))
        .collect()
}
