//! Random term generation and the executable meta-theory suite.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::projective::HeadContext;
use crate::syntax::{Label, Term};
use crate::translate::SourceTerm;
use crate::typing::infer;

pub mod gen;
pub mod props;
pub mod shrink;

pub use gen::{base_env, enumerate_terms, gen_head_instance, gen_source, gen_term, gen_typed, gen_untyped};
pub use props::{check_diamond_exhaustive, PROPERTIES};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    /// Upper bound on the node count of generated terms.
    pub max_size: usize,
    /// Upper bound on the number of generators (or source sums).
    pub max_labels: usize,
    pub typed_only: bool,
    /// How many free variable names random terms draw from.
    pub var_pool: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { seed: 0, max_size: 25, max_labels: 4, typed_only: false, var_pool: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("no suitable term after {attempts} attempts")]
    GenerationExhausted { attempts: usize },
}

/// The input of one trial.
#[derive(Clone, Debug)]
pub enum Case {
    Term(Term),
    Source(SourceTerm),
    Head(HeadContext, Label, Term),
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Case::Term(t) => write!(f, "{t}"),
            Case::Source(s) => write!(f, "{s}"),
            Case::Head(h, a, n) => write!(f, "H = {h}; label {}; N = {n}", a.name()),
        }
    }
}

/// Result of checking one case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Holds; an optional tag is tallied in the report notes.
    Pass(Option<&'static str>),
    /// Not applicable (for instance a budget ran out where that is allowed).
    Skip(String),
    Fail(String),
}

impl Outcome {
    pub fn pass() -> Self {
        Outcome::Pass(None)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Outcome::Fail(_))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    /// Replays with `--seed <seed> --trials 1`.
    pub seed: u64,
    pub case: String,
    /// Smallest failing term found by shrinking, when the case is a term.
    pub shrunk: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub trials: usize,
    pub passed: usize,
    pub skipped: usize,
    pub failures: Vec<Counterexample>,
    /// Tallies of pass tags and skip reasons.
    pub notes: BTreeMap<String, usize>,
    #[serde(rename = "elapsed_ms")]
    #[serde(serialize_with = "as_millis")]
    pub elapsed: Duration,
}

fn as_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u128(d.as_millis())
}

impl PropertyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} trials, {} passed, {} skipped, {} failed",
            self.property,
            self.trials,
            self.passed,
            self.skipped,
            self.failures.len(),
        )?;
        if !self.elapsed.is_zero() {
            write!(f, " ({:.2}s)", self.elapsed.as_secs_f64())?;
        }
        for (k, v) in &self.notes {
            write!(f, "\n  {k}: {v}")?;
        }
        for c in &self.failures {
            write!(f, "\n  seed {}: {}\n    case: {}", c.seed, c.message, c.case)?;
            if let Some(s) = &c.shrunk {
                write!(f, "\n    shrunk: {s}")?;
            }
        }
        Ok(())
    }
}

/// A named executable property.
pub struct Property {
    pub name: &'static str,
    pub summary: &'static str,
    pub default_trials: usize,
    pub config: fn() -> GenConfig,
    pub generate: fn(&mut ChaCha8Rng, &GenConfig) -> Result<Case, GenError>,
    pub check: fn(&Case, &mut ChaCha8Rng) -> Outcome,
}

pub fn find_property(name: &str) -> Option<&'static Property> {
    PROPERTIES.iter().find(|p| p.name == name)
}

/// Seed of trial `i` of a run started at `seed`.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

fn run_trial(prop: &Property, cfg: &GenConfig, seed: u64) -> (Option<Case>, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let case = match (prop.generate)(&mut rng, cfg) {
        Ok(c) => c,
        Err(e) => return (None, Outcome::Skip(e.to_string())),
    };
    let outcome = (prop.check)(&case, &mut rng);
    (Some(case), outcome)
}

/// Run `trials` trials with seeds `cfg.seed, cfg.seed + 1, ...`, spread over
/// the available cores and merged in seed order.
pub fn run_property(prop: &Property, cfg: &GenConfig, trials: usize) -> PropertyReport {
    let start = Instant::now();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(trials.max(1));
    let mut results: Vec<(u64, Option<Case>, Outcome)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w..trials)
                        .step_by(workers)
                        .map(|i| {
                            let seed = trial_seed(cfg.seed, i);
                            let (case, outcome) = run_trial(prop, cfg, seed);
                            (seed, case, outcome)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("trial thread panicked")).collect()
    });
    results.sort_by_key(|r| r.0.wrapping_sub(cfg.seed));
    let mut report = PropertyReport {
        property: prop.name.to_owned(),
        trials,
        passed: 0,
        skipped: 0,
        failures: Vec::new(),
        notes: BTreeMap::new(),
        elapsed: Duration::ZERO,
    };
    for (seed, case, outcome) in results {
        match outcome {
            Outcome::Pass(tag) => {
                report.passed += 1;
                if let Some(tag) = tag {
                    *report.notes.entry(tag.to_owned()).or_default() += 1;
                }
            }
            Outcome::Skip(reason) => {
                report.skipped += 1;
                *report.notes.entry(format!("skipped: {reason}")).or_default() += 1;
            }
            Outcome::Fail(message) => {
                let case = case.expect("a failing trial has a case");
                let shrunk = match &case {
                    Case::Term(t) => {
                        let typed = cfg.typed_only;
                        let s = shrink::shrink(t, |c| {
                            if typed && infer(&base_env(), c).is_err() {
                                return false;
                            }
                            let mut rng = ChaCha8Rng::seed_from_u64(seed);
                            let _ = (prop.generate)(&mut rng, cfg);
                            (prop.check)(&Case::Term(c.clone()), &mut rng).is_fail()
                        });
                        Some(s.to_string())
                    }
                    _ => None,
                };
                report.failures.push(Counterexample { seed, case: case.to_string(), shrunk, message });
            }
        }
    }
    report.elapsed = start.elapsed();
    report
}

/// Re-run a single trial.
pub fn replay(prop: &Property, cfg: &GenConfig, seed: u64) -> (Option<Case>, Outcome) {
    run_trial(prop, cfg, seed)
}
