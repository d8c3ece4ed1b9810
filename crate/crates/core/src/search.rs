//! The learning loop: visit sub-spaces in complexity order and stop at the
//! first one whose version space is non-empty and within the bound.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};

use crate::bdd_learner::{self, BuildOptions, ConjunctionOrder};
use crate::cardinality::{CountOutcome, EngineResult};
use crate::complexity::{complexity_order, SubspaceSpec};
use crate::config::{Engine, LearnerConfig, OverfitPolicy};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::sat_learner::{self, BackendKind, SolverLimits};

/// Backend that produced a sub-space result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Bdd,
    Sat,
}

/// Version-space size relative to the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum Cardinality {
    Exact(usize),
    GreaterThan(usize),
}

impl Cardinality {
    pub fn from_outcome(outcome: CountOutcome, bound: usize) -> Self {
        match outcome {
            CountOutcome::Exact(c) if c <= bound => Cardinality::Exact(c),
            _ => Cardinality::GreaterThan(bound),
        }
    }
}

/// Result of one engine (or the winner of a race) on one sub-space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceResult {
    pub spec: SubspaceSpec,
    pub outcome: CountOutcome,
    pub members: Vec<Hypothesis>,
    /// `None` when no engine had to run (the sub-space is empty by size).
    pub engine: Option<EngineKind>,
    pub elapsed: Duration,
}

/// Non-deterministic facts about a visit, excluded from report comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub engine: Option<EngineKind>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Visit {
    #[serde(serialize_with = "spec_text")]
    pub spec: SubspaceSpec,
    /// `None` when the engines failed on this sub-space.
    pub cardinality: Option<Cardinality>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LearnOutcome {
    Solved {
        #[serde(serialize_with = "spec_text")]
        spec: SubspaceSpec,
        cardinality: usize,
        #[serde(serialize_with = "hypotheses_text")]
        hypotheses: Vec<Hypothesis>,
    },
    NoFit,
    Overfit {
        #[serde(serialize_with = "spec_text")]
        spec: SubspaceSpec,
    },
    /// Samples at these 0-based indices share a vector but not a label.
    Conflict {
        first: usize,
        second: usize,
    },
    /// An engine failed; `visited` holds the partial trace.
    Aborted {
        #[serde(serialize_with = "spec_text")]
        spec: SubspaceSpec,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VersionSpaceReport {
    pub visited: Vec<Visit>,
    pub result: LearnOutcome,
}

impl VersionSpaceReport {
    /// The report with every timing field removed.
    pub fn without_timing(&self) -> VersionSpaceReport {
        let mut r = self.clone();
        r.visited.iter_mut().for_each(|v| v.timing = None);
        r
    }
}

fn spec_text<S: Serializer>(spec: &SubspaceSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(spec)
}

fn hypotheses_text<S: Serializer>(hs: &[Hypothesis], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(hs.iter().map(|h| h.to_string()))
}

/// Runs one engine on one sub-space.
pub fn run_engine(
    engine: EngineKind,
    data: &Dataset,
    spec: SubspaceSpec,
    config: &LearnerConfig,
    stop: Option<Arc<AtomicBool>>,
) -> Result<SubspaceResult> {
    let start = Instant::now();
    let r: EngineResult = match engine {
        EngineKind::Bdd => {
            let options = BuildOptions {
                order: ConjunctionOrder::Heuristic,
                node_limit: config.bdd_node_limit,
                interrupt: stop,
                trace: false,
            };
            bdd_learner::learn_subspace(data, spec, config.enum_cap, &options)?
        }
        EngineKind::Sat => {
            let kind = match &config.external_solver_cmd {
                Some(cmd) => BackendKind::External(cmd.clone()),
                None => BackendKind::Embedded,
            };
            let limits = SolverLimits {
                conflict_limit: config.sat_conflict_limit,
                timeout: None,
                interrupt: stop,
            };
            sat_learner::learn_subspace(data, spec, config.bound, config.enum_cap, &kind, &limits)?
        }
    };
    Ok(SubspaceResult {
        spec,
        outcome: r.outcome,
        members: r.members,
        engine: Some(engine),
        elapsed: start.elapsed(),
    })
}

/// Runs both engines concurrently and keeps the first successful result;
/// the other engine is signalled to stop and joined before returning.
pub fn race(
    data: &Dataset,
    spec: SubspaceSpec,
    config: &LearnerConfig,
    cancel: Option<&AtomicBool>,
) -> Result<SubspaceResult> {
    let stop = Arc::new(AtomicBool::new(false));
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for engine in [EngineKind::Bdd, EngineKind::Sat] {
            let (tx, stop) = (tx.clone(), stop.clone());
            scope.spawn(move || {
                let _ = tx.send(run_engine(engine, data, spec, config, Some(stop)));
            });
        }
        drop(tx);
        let mut errors = Vec::new();
        loop {
            match rx.recv_timeout(Duration::from_millis(20)) {
                Ok(Ok(r)) => {
                    stop.store(true, Ordering::Relaxed);
                    return Ok(r);
                }
                Ok(Err(e)) => errors.push(e),
                Err(mpsc::RecvTimeoutError::Timeout) => {
                    if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                        stop.store(true, Ordering::Relaxed);
                    }
                }
                Err(mpsc::RecvTimeoutError::Disconnected) => break,
            }
        }
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(Error::Cancelled);
        }
        let reasons: Vec<String> = errors.iter().map(ToString::to_string).collect();
        Err(Error::ResourceExhausted(format!(
            "both engines failed: {}",
            reasons.join("; ")
        )))
    })
}

/// Computes one sub-space with the configured engine(s).
pub fn evaluate_subspace(
    data: &Dataset,
    spec: SubspaceSpec,
    config: &LearnerConfig,
    cancel: Option<Arc<AtomicBool>>,
) -> Result<SubspaceResult> {
    if spec.l > data.n() * spec.k {
        // more literals than slots: nothing to build
        return Ok(SubspaceResult {
            spec,
            outcome: CountOutcome::Exact(0),
            members: Vec::new(),
            engine: None,
            elapsed: Duration::ZERO,
        });
    }
    match config.engine {
        Engine::Bdd => run_engine(EngineKind::Bdd, data, spec, config, cancel),
        Engine::Sat => run_engine(EngineKind::Sat, data, spec, config, cancel),
        Engine::Race => race(data, spec, config, cancel.as_deref()),
    }
}

pub fn learn(data: &Dataset, config: &LearnerConfig) -> Result<VersionSpaceReport> {
    learn_with_cancel(data, config, None)
}

/// Visits sub-spaces in complexity order until one has between 1 and
/// `bound` semantically distinct consistent hypotheses.
///
/// Engine failures end the search with an `Aborted` result carrying the
/// visits so far; only configuration errors and cancellation are returned
/// as `Err`.
pub fn learn_with_cancel(
    data: &Dataset,
    config: &LearnerConfig,
    cancel: Option<Arc<AtomicBool>>,
) -> Result<VersionSpaceReport> {
    config.validate()?;
    if data.n() == 0 {
        return Err(Error::InvalidInput("dataset has no features".into()));
    }
    let mut visited = Vec::new();
    if let Some((first, second)) = data.find_conflict() {
        return Ok(VersionSpaceReport {
            visited,
            result: LearnOutcome::Conflict { first, second },
        });
    }
    for spec in complexity_order(config.l_max, config.k_max) {
        if cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(Error::Cancelled);
        }
        let r = match evaluate_subspace(data, spec, config, cancel.clone()) {
            Ok(r) => r,
            Err(Error::Cancelled) => return Err(Error::Cancelled),
            Err(e) => {
                let reason = e.to_string();
                visited.push(Visit {
                    spec,
                    cardinality: None,
                    error: Some(reason.clone()),
                    timing: None,
                });
                return Ok(VersionSpaceReport {
                    visited,
                    result: LearnOutcome::Aborted { spec, reason },
                });
            }
        };
        let cardinality = Cardinality::from_outcome(r.outcome, config.bound);
        visited.push(Visit {
            spec,
            cardinality: Some(cardinality),
            error: None,
            timing: Some(Timing {
                engine: r.engine,
                elapsed_ms: r.elapsed.as_secs_f64() * 1e3,
            }),
        });
        match cardinality {
            Cardinality::Exact(0) => {}
            Cardinality::Exact(c) => {
                return Ok(VersionSpaceReport {
                    visited,
                    result: LearnOutcome::Solved {
                        spec,
                        cardinality: c,
                        hypotheses: r.members,
                    },
                });
            }
            Cardinality::GreaterThan(_) => {
                if config.overfit_policy == OverfitPolicy::Fail {
                    return Ok(VersionSpaceReport {
                        visited,
                        result: LearnOutcome::Overfit { spec },
                    });
                }
            }
        }
    }
    Ok(VersionSpaceReport {
        visited,
        result: LearnOutcome::NoFit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Label, Sample};
    use crate::oracle::oracle_version_space;
    use proptest::prelude::*;

    fn data(n: usize, pos: &[&str], neg: &[&str]) -> Dataset {
        let mut v: Vec<Sample> = pos.iter().map(|s| Sample::from_bits(s, Label::Positive)).collect();
        v.extend(neg.iter().map(|s| Sample::from_bits(s, Label::Negative)));
        Dataset::new(n, v).unwrap()
    }

    fn spec(l: usize, k: usize) -> SubspaceSpec {
        SubspaceSpec::new(l, k).unwrap()
    }

    fn texts(r: &VersionSpaceReport) -> Vec<String> {
        match &r.result {
            LearnOutcome::Solved { hypotheses, .. } => hypotheses.iter().map(|h| h.to_string()).collect(),
            _ => Vec::new(),
        }
    }

    #[test]
    fn empty_dataset_single_feature() {
        let c = LearnerConfig::new(1, 1).with_bound(2);
        for engine in [Engine::Bdd, Engine::Sat, Engine::Race] {
            let r = learn(&Dataset::empty(1).unwrap(), &c.clone().with_engine(engine)).unwrap();
            assert!(matches!(r.result, LearnOutcome::Solved { cardinality: 2, .. }));
            assert_eq!(texts(&r), ["x1", "~x1"]);
        }
    }

    #[test]
    fn xnor_is_no_monomial() {
        let d = data(2, &["11", "00"], &["01", "10"]);
        let r = learn(&d, &LearnerConfig::new(2, 1)).unwrap();
        assert_eq!(r.result, LearnOutcome::NoFit);
        let cards: Vec<_> = r.visited.iter().map(|v| v.cardinality).collect();
        assert_eq!(cards, [Some(Cardinality::Exact(0)), Some(Cardinality::Exact(0))]);
    }

    #[test]
    fn conflict_is_reported() {
        let d = data(2, &["10"], &["01", "10"]);
        let r = learn(&d, &LearnerConfig::new(2, 1)).unwrap();
        assert_eq!(r.result, LearnOutcome::Conflict { first: 0, second: 2 });
        assert!(r.visited.is_empty());
    }

    #[test]
    fn overfit_policies() {
        // no negatives: (1,1) has 2n hypotheses
        let d = data(3, &["111"], &[]);
        let c = LearnerConfig::new(3, 1).with_bound(2);
        let r = learn(&d, &c).unwrap();
        assert_eq!(r.result, LearnOutcome::Overfit { spec: spec(1, 1) });
        assert_eq!(r.visited[0].cardinality, Some(Cardinality::GreaterThan(2)));
        let r = learn(&d, &c.with_overfit_policy(OverfitPolicy::Continue)).unwrap();
        // (3,1) has the single consistent hypothesis x1 x2 x3
        assert_eq!(texts(&r), ["x1 x2 x3"]);
        assert_eq!(r.visited.len(), 3);
    }

    #[test]
    fn oversized_subspaces_are_empty_without_engines() {
        let r = learn(
            &data(1, &["1"], &["0"]),
            &LearnerConfig::new(3, 1).with_engine(Engine::Bdd),
        )
        .unwrap();
        assert_eq!(texts(&r), ["x1"]);
        let d = data(1, &[], &["0", "1"]);
        let r = learn(&d, &LearnerConfig::new(3, 1)).unwrap();
        assert_eq!(r.result, LearnOutcome::NoFit);
        assert_eq!(r.visited[2].timing.as_ref().unwrap().engine, None);
    }

    #[test]
    fn engine_failure_aborts_with_partial_report() {
        let d = data(3, &["111"], &["000"]);
        let mut c = LearnerConfig::new(3, 1).with_engine(Engine::Bdd);
        c.bdd_node_limit = Some(3);
        let r = learn(&d, &c).unwrap();
        assert!(matches!(r.result, LearnOutcome::Aborted { .. }));
        assert!(r.visited.last().unwrap().error.is_some());

        c.engine = Engine::Sat;
        c.external_solver_cmd = Some("/nonexistent/solver".into());
        assert!(matches!(learn(&d, &c).unwrap().result, LearnOutcome::Aborted { .. }));
    }

    #[test]
    fn race_survives_one_failing_engine() {
        let d = data(3, &["110"], &["000", "011"]);
        let mut c = LearnerConfig::new(2, 1).with_engine(Engine::Race);
        c.bdd_node_limit = Some(3);
        let r = race(&d, spec(1, 1), &c, None).unwrap();
        assert_eq!(r.engine, Some(EngineKind::Sat));
        c.external_solver_cmd = Some("/nonexistent/solver".into());
        assert!(race(&d, spec(1, 1), &c, None).is_err());
    }

    #[test]
    fn cancellation_is_an_error() {
        let flag = Arc::new(AtomicBool::new(true));
        let d = Dataset::empty(12).unwrap();
        for engine in [Engine::Bdd, Engine::Sat, Engine::Race] {
            let c = LearnerConfig::new(6, 2).with_bound(1000).with_engine(engine);
            let r = learn_with_cancel(&d, &c, Some(flag.clone()));
            assert!(matches!(r, Err(Error::Cancelled)), "{engine:?}: {r:?}");
        }
    }

    #[test]
    fn report_json_shape() {
        let r = learn(&data(2, &["11"], &["00", "01"]), &LearnerConfig::new(2, 1)).unwrap();
        let v = serde_json::to_value(r.without_timing()).unwrap();
        assert_eq!(v["result"]["kind"], "solved");
        assert_eq!(v["result"]["spec"], "(1,1)");
        assert_eq!(v["result"]["hypotheses"][0], "x1");
        assert_eq!(v["visited"][0]["cardinality"]["kind"], "Exact");
        assert!(v["visited"][0].get("timing").is_none());
    }

    fn random_dataset() -> impl Strategy<Value = Dataset> {
        (2usize..=3).prop_flat_map(|n| {
            prop::collection::vec((prop::collection::vec(any::<bool>(), n), any::<bool>()), 0..6).prop_map(move |s| {
                let mut samples: Vec<Sample> = Vec::new();
                for (b, p) in s {
                    // drop conflicting duplicates so the search runs
                    if samples.iter().all(|x| x.bits != b) {
                        samples.push(Sample::new(b, if p { Label::Positive } else { Label::Negative }));
                    }
                }
                Dataset::new(n, samples).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn engines_produce_identical_reports(d in random_dataset(), bound in 1usize..6) {
            let base = LearnerConfig::new(4, 2).with_bound(bound).with_overfit_policy(OverfitPolicy::Continue);
            let bdd = learn(&d, &base.clone().with_engine(Engine::Bdd)).unwrap().without_timing();
            let sat = learn(&d, &base.clone().with_engine(Engine::Sat)).unwrap().without_timing();
            let race = learn(&d, &base.clone().with_engine(Engine::Race)).unwrap().without_timing();
            prop_assert_eq!(&bdd, &sat);
            prop_assert_eq!(&bdd, &race);
            let again = learn(&d, &base.with_engine(Engine::Race)).unwrap().without_timing();
            prop_assert_eq!(&race, &again);
        }

        #[test]
        fn solved_members_are_sound(d in random_dataset()) {
            let r = learn(&d, &LearnerConfig::new(4, 2).with_bound(8)).unwrap();
            if let LearnOutcome::Solved { spec, cardinality, hypotheses } = &r.result {
                prop_assert_eq!(*cardinality, hypotheses.len());
                prop_assert!(*cardinality >= 1 && *cardinality <= 8);
                for h in hypotheses {
                    prop_assert_eq!((h.literal_count(), h.k()), (spec.l, spec.k));
                    for s in d.samples() {
                        prop_assert_eq!(h.eval_unchecked(&s.bits), s.label == Label::Positive);
                    }
                }
                let oracle = oracle_version_space(&d, *spec).unwrap();
                prop_assert_eq!(texts(&r), oracle.representatives());
            }
        }

        #[test]
        fn planted_target_is_in_its_version_space(
            (n, target, pts) in (2usize..=4).prop_flat_map(|n| (
                Just(n),
                prop::collection::vec(prop::sample::select(vec![
                    crate::LiteralState::Neg, crate::LiteralState::Pos, crate::LiteralState::DontCare,
                ]), n * 2),
                prop::collection::vec(prop::collection::vec(any::<bool>(), n), 0..8),
            ))
        ) {
            let terms = vec![crate::Term(target[..n].to_vec()), crate::Term(target[n..].to_vec())];
            prop_assume!(terms[0] != terms[1] && terms.iter().all(|t| t.literal_count() > 0));
            let h = Hypothesis::new(n, terms).unwrap().canonical_term_sort().unwrap();
            let samples = pts
                .into_iter()
                .map(|b| {
                    let label = if h.eval_unchecked(&b) { Label::Positive } else { Label::Negative };
                    Sample::new(b, label)
                })
                .collect();
            let d = Dataset::new(n, samples).unwrap();
            let s = spec(h.literal_count(), 2);
            let c = LearnerConfig::new(s.l, 2).with_bound(100_000);
            let r = evaluate_subspace(&d, s, &c, None).unwrap();
            let CountOutcome::Exact(_) = r.outcome else { panic!("bound too small") };
            let mut m = vsl_bdd::Manager::new(n as u32);
            let target = crate::cardinality::function_diagram(&mut m, &h).unwrap();
            let mut found = false;
            for member in &r.members {
                found |= crate::cardinality::function_diagram(&mut m, member).unwrap() == target;
            }
            prop_assert!(found);
        }
    }
}
