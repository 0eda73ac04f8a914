//! Core of the false-predictor laboratory.
//!
//! A single-clause Bayesian logic program `X_A :- body` over binary
//! variables, learned online by greedy refinement search with binary
//! conditional probability tables. The crate provides:
//!
//! * [`model`]: the ground-truth world (`X_A` copies `X_0` with probability
//!   `alpha`, `X_1..X_n` are independent fair bits) and its seeded sampler.
//! * [`hypothesis`]: structures, patterns, binary CPTs, fitting and scoring.
//! * [`learner`]: the add/remove refinement operator, hill climbing and the
//!   online loop that refits after every new sample.
//! * [`metrics`]: structural size, distance, life times, hop sizes, the
//!   batched size/life table and the regret trace.
//! * [`oracle`]: brute-force comparators (false-predictor census, expected
//!   census, exhaustive structure search, survival trials).
//! * [`monitor`]: alarm-rate estimates, the operational threshold gate,
//!   universal-stability checks and the structural rule of thumb.
//!
//! The crate is `no_std` (it needs `alloc`). IO, CLI and parallel
//! orchestration live in the `blp-lab` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod hypothesis;
pub mod learner;
pub mod metrics;
pub mod model;
pub mod monitor;
pub mod oracle;
pub mod seed;

pub use error::{Error, Result};
pub use hypothesis::{BinaryCpt, Hypothesis, Pattern, Structure};
pub use learner::{AcceptRule, LearnerConfig, RestartPolicy, Score, SelectionRule, StepRecord};
pub use metrics::{HistoryStats, LifeAttribution, Table1Row};
pub use model::{Sample, World, WorldConfig};
pub use monitor::{MonitorConfig, RateEstimate, Verdict};
pub use oracle::CensusResult;
