use std::path::{Path, PathBuf};

use blp_lab_core::{LearnerConfig, LifeAttribution, MonitorConfig, WorldConfig};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const DEFAULT_SEED: u64 = 2012;

/// Everything that determines an experiment's output.
///
/// Loaded from a JSON document in which every field is optional; missing
/// fields take the defaults of the false-predictor experiment (12 redundant
/// variables, `alpha = 0.8`, 1000 histories, batches of 20 steps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub world: WorldConfig,
    pub learner: LearnerConfig,
    pub monitor: MonitorConfig,
    pub histories: usize,
    /// Longest history; histories usually end earlier at the ground truth.
    pub max_m: usize,
    pub batch: usize,
    /// Steps covered by the size/life table.
    pub table_m_limit: usize,
    pub life_attribution: LifeAttribution,
    /// Worker threads; `None` uses every available core. Never affects
    /// results.
    pub parallelism: Option<usize>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::experiment(DEFAULT_SEED),
            learner: LearnerConfig::experiment(),
            monitor: MonitorConfig::default(),
            histories: 1000,
            max_m: 5000,
            batch: 20,
            table_m_limit: 240,
            life_attribution: LifeAttribution::Death,
            parallelism: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.histories == 0 {
            return Err(LabError::Config("histories must be at least 1".into()));
        }
        if self.max_m == 0 {
            return Err(LabError::Config("max_m must be at least 1".into()));
        }
        if self.batch == 0 {
            return Err(LabError::Config("batch must be at least 1".into()));
        }
        if self.parallelism == Some(0) {
            return Err(LabError::Config("parallelism must be at least 1".into()));
        }
        self.learner.validate(self.world.n_redundant())?;
        self.monitor.validate()?;
        Ok(())
    }

    /// The world of history `index`.
    pub fn history_world(&self, index: usize) -> WorldConfig {
        self.world.for_history(index as u64)
    }

    /// The configuration with settings that cannot change results cleared,
    /// so reports do not depend on them.
    pub fn echo(&self) -> Self {
        Self {
            parallelism: None,
            out_dir: PathBuf::new(),
            ..self.clone()
        }
    }
}
