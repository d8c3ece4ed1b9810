use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Bdd,
    Sat,
    Race,
}

/// What to do when the first sub-space with a non-empty version space
/// exceeds the cardinality bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverfitPolicy {
    Fail,
    Continue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub l_max: usize,
    pub k_max: usize,
    /// Largest version-space cardinality accepted as a fit.
    pub bound: usize,
    pub engine: Engine,
    /// Syntactic models above this count are not enumerated.
    pub enum_cap: usize,
    pub overfit_policy: OverfitPolicy,
    pub seed: u64,
    /// Command line of an external DIMACS solver; the embedded solver is used when unset.
    pub external_solver_cmd: Option<String>,
    /// Upper bound on decision-diagram nodes per sub-space.
    pub bdd_node_limit: Option<usize>,
    /// Upper bound on embedded-solver conflicts per sub-space.
    pub sat_conflict_limit: Option<u64>,
}

pub const DEFAULT_BOUND: usize = 10;

pub fn default_enum_cap(bound: usize) -> usize {
    1000.max(bound.saturating_mul(10))
}

impl LearnerConfig {
    pub fn new(l_max: usize, k_max: usize) -> Self {
        LearnerConfig {
            l_max,
            k_max,
            bound: DEFAULT_BOUND,
            engine: Engine::Race,
            enum_cap: default_enum_cap(DEFAULT_BOUND),
            overfit_policy: OverfitPolicy::Fail,
            seed: 0,
            external_solver_cmd: None,
            bdd_node_limit: Some(20_000_000),
            sat_conflict_limit: None,
        }
    }

    /// Sets the bound and resets `enum_cap` to its default for that bound.
    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self.enum_cap = default_enum_cap(bound);
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_overfit_policy(mut self, policy: OverfitPolicy) -> Self {
        self.overfit_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.bound == 0 {
            return Err(Error::InvalidInput("bound must be at least 1".into()));
        }
        if self.k_max == 0 || self.l_max < self.k_max {
            return Err(Error::InvalidInput(format!(
                "need l_max >= k_max >= 1, got l_max={} k_max={}",
                self.l_max, self.k_max
            )));
        }
        if self.enum_cap < self.bound {
            return Err(Error::InvalidInput("enum_cap must be at least the bound".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = LearnerConfig::new(5, 2);
        assert_eq!(c.bound, 10);
        assert_eq!(c.enum_cap, 1000);
        assert_eq!(c.clone().with_bound(500).enum_cap, 5000);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn validation() {
        assert!(LearnerConfig::new(1, 2).validate().is_err());
        assert!(LearnerConfig::new(3, 0).validate().is_err());
        let mut c = LearnerConfig::new(3, 1);
        c.bound = 0;
        assert!(c.validate().is_err());
    }
}
