//! Concept learning of k-term DNF targets by counting version spaces.
//!
//! Hypothesis sub-spaces are visited in complexity order; for each one the
//! set of hypotheses consistent with the data is built either as a decision
//! diagram ([`bdd_learner`]) or as a CNF formula whose models are enumerated
//! ([`sat_learner`]). The first sub-space whose version space is non-empty
//! and no larger than the configured bound yields the result ([`search`]).

pub mod bdd_learner;
pub mod cardinality;
pub mod complexity;
pub mod config;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod hypothesis;
pub mod oracle;
pub mod sat_learner;
pub mod search;

pub use complexity::{complexity_order, SubspaceSpec};
pub use config::{Engine, LearnerConfig, OverfitPolicy};
pub use dataset::{Dataset, Label, Sample};
pub use error::{Error, Result};
pub use hypothesis::{Hypothesis, LiteralState, Term};
