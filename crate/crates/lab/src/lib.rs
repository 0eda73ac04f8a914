//! Experiment harness for the false-predictor laboratory: configuration,
//! parallel orchestration of online-learning histories, and CSV/JSON
//! output.
//!
//! Histories are independent and seeded from `(base seed, history index)`,
//! and results are merged in index order, so every output is identical at
//! any level of parallelism.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
pub use run::{
    run_census, run_histories, run_history, run_monitor_demo, run_rate_histories, run_regret,
    run_survival, run_table1, CensusCase, CensusRow, HistoryDump, Provenance, RateHistory,
    RunReport, SurvivalResult,
};
