use blp_lab_core::learner::online_learn;
use blp_lab_core::metrics::{
    analyze_history, phase_summary, regret_trace, table1, PhaseSummary, RegretTrace,
};
use blp_lab_core::model::generate_stream;
use blp_lab_core::monitor::{
    evaluate_rates_on, masquerade_report, test_stream, universal_stability_violations, Masquerade,
};
use blp_lab_core::oracle::{big_mean, census_trial, expected_false_predictors, survival_trial};
use blp_lab_core::{HistoryStats, Hypothesis, RateEstimate, StepRecord, Table1Row, WorldConfig};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
}

impl Provenance {
    pub fn of(config: &ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.world.seed(),
            config: config.echo(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusCase {
    pub n: usize,
    pub s: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub n: usize,
    pub s: usize,
    pub m: usize,
    pub trials: usize,
    pub analytic: f64,
    pub mc_mean: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub provenance: Provenance,
    pub table1: Vec<Table1Row>,
    pub phase: PhaseSummary,
    pub masquerades: Vec<Masquerade>,
    pub census: Vec<CensusRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalResult {
    pub n: usize,
    pub alpha: f64,
    pub s: usize,
    pub warmup_m: usize,
    pub trials: usize,
    pub mean_life: f64,
}

/// One history with its derived statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryDump {
    pub index: usize,
    pub world: WorldConfig,
    pub records: Vec<StepRecord>,
    pub stats: HistoryStats,
}

/// Per-step alarm rates of one history on its own held-out test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateHistory {
    pub index: usize,
    pub rates: Vec<RateEstimate>,
    pub violations: Vec<usize>,
}

/// Runs `f` on a pool of the configured size.
fn in_pool<T: Send>(config: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Every history of the experiment, in index order.
pub fn run_histories(config: &ExperimentConfig) -> Result<Vec<(Vec<StepRecord>, HistoryStats)>> {
    config.validate()?;
    in_pool(config, || {
        (0..config.histories)
            .into_par_iter()
            .map(|h| {
                let records = online_learn(config.history_world(h), config.learner, config.max_m)?;
                let stats = analyze_history(&records)?;
                Ok((records, stats))
            })
            .collect::<Result<Vec<_>>>()
    })?
}

pub fn run_table1(config: &ExperimentConfig) -> Result<RunReport> {
    let runs = run_histories(config)?;
    let stats: Vec<_> = runs.iter().map(|(_, s)| s.clone()).collect();
    Ok(RunReport {
        provenance: Provenance::of(config),
        table1: table1(
            &stats,
            config.batch,
            config.table_m_limit,
            config.life_attribution,
        )?,
        phase: phase_summary(&stats),
        masquerades: masquerade_report(&runs, &config.monitor),
        census: Vec::new(),
    })
}

pub fn run_monitor_demo(config: &ExperimentConfig) -> Result<Vec<Masquerade>> {
    let runs = run_histories(config)?;
    Ok(masquerade_report(&runs, &config.monitor))
}

/// Census mean over `trials` training sets per case, against the expected
/// count. The world's seed and alpha are used; `n` comes from each case.
pub fn run_census(
    config: &ExperimentConfig,
    cases: &[CensusCase],
    trials: usize,
) -> Result<Vec<CensusRow>> {
    if trials == 0 {
        return Err(LabError::Config("trials must be at least 1".into()));
    }
    if config.parallelism == Some(0) {
        return Err(LabError::Config("parallelism must be at least 1".into()));
    }
    cases
        .iter()
        .map(|c| {
            let world = WorldConfig::new(c.n, config.world.alpha(), config.world.seed())?;
            let total = in_pool(config, || {
                (0..trials as u64)
                    .into_par_iter()
                    .map(|t| census_trial(&world, c.s, c.m, t))
                    .try_reduce(BigUint::default, |a, b| Ok(a + b))
            })??;
            let analytic = expected_false_predictors(c.n, c.s, c.m);
            let mc_mean = big_mean(&total, trials);
            Ok(CensusRow {
                n: c.n,
                s: c.s,
                m: c.m,
                trials,
                analytic,
                mc_mean,
                rel_err: (mc_mean - analytic).abs() / analytic,
            })
        })
        .collect()
}

pub fn run_survival(
    config: &ExperimentConfig,
    s: usize,
    warmup_m: usize,
    trials: usize,
) -> Result<SurvivalResult> {
    let mean_life = survival_trial(&config.world, s, warmup_m, trials)?;
    Ok(SurvivalResult {
        n: config.world.n_redundant(),
        alpha: config.world.alpha(),
        s,
        warmup_m,
        trials,
        mean_life,
    })
}

/// Regret trace of history `index`, the comparator restricted to bodies of
/// at most `max_size` variables.
pub fn run_regret(
    config: &ExperimentConfig,
    index: usize,
    max_size: Option<usize>,
) -> Result<RegretTrace> {
    config.validate()?;
    let world = config.history_world(index);
    let records = online_learn(world, config.learner, config.max_m)?;
    let stream = generate_stream(&world, records.len());
    Ok(regret_trace(
        &records,
        &stream,
        world.n_redundant(),
        &config.learner.initial_structure,
        max_size,
    )?)
}

pub fn run_history(config: &ExperimentConfig, index: usize) -> Result<HistoryDump> {
    config.validate()?;
    let world = config.history_world(index);
    let records = online_learn(world, config.learner, config.max_m)?;
    let stats = analyze_history(&records)?;
    Ok(HistoryDump {
        index,
        world,
        records,
        stats,
    })
}

/// Alarm rates of every selected hypothesis along each history, each
/// history scored on its own fixed test set of `test_m` samples.
pub fn run_rate_histories(config: &ExperimentConfig, test_m: usize) -> Result<Vec<RateHistory>> {
    config.validate()?;
    in_pool(config, || {
        (0..config.histories)
            .into_par_iter()
            .map(|h| {
                let world = config.history_world(h);
                let records = online_learn(world, config.learner, config.max_m)?;
                let train = generate_stream(&world, records.len());
                let test = test_stream(&world, test_m);
                let rates = records
                    .iter()
                    .map(|r| evaluate_rates_on(&Hypothesis::fit(r.structure, &train[..r.m]), &test))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                Ok(RateHistory {
                    index: h,
                    violations: universal_stability_violations(&rates),
                    rates,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?
}
