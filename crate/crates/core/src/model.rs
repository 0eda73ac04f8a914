//! Ground-truth world of the toy model.
//!
//! Variables are addressed by index: `0` is `X_0`, `1..=n` are the redundant
//! variables `X_1..X_n`. The anomaly variable `X_A` is kept apart because it
//! is never a body variable.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, Rng};

/// Largest supported number of redundant variables. Samples pack the
/// variables `X_0..X_n` into one `u64`.
pub const MAX_REDUNDANT: usize = 62;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWorldConfig")]
pub struct WorldConfig {
    n_redundant: usize,
    alpha: f64,
    seed: u64,
}

#[derive(Deserialize)]
struct RawWorldConfig {
    n_redundant: usize,
    alpha: f64,
    seed: u64,
}

impl TryFrom<RawWorldConfig> for WorldConfig {
    type Error = Error;

    fn try_from(raw: RawWorldConfig) -> Result<Self> {
        WorldConfig::new(raw.n_redundant, raw.alpha, raw.seed)
    }
}

impl WorldConfig {
    pub fn new(n_redundant: usize, alpha: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if n_redundant > MAX_REDUNDANT {
            return Err(Error::InvalidConfig(format!(
                "at most {MAX_REDUNDANT} redundant variables are supported, got {n_redundant}"
            )));
        }
        Ok(Self {
            n_redundant,
            alpha,
            seed,
        })
    }

    /// Twelve redundant variables, 80% coupling.
    pub fn experiment(seed: u64) -> Self {
        Self {
            n_redundant: 12,
            alpha: 0.8,
            seed,
        }
    }

    pub fn n_redundant(&self) -> usize {
        self.n_redundant
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// Same distribution, seed of history `index`.
    pub fn for_history(self, index: u64) -> Self {
        self.with_seed(seed::mix(self.seed, index))
    }
}

/// One complete joint observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sample {
    x_a: bool,
    /// Bit `i` holds the value of `X_i` for `i` in `0..=n`.
    bits: u64,
    n_redundant: u8,
}

impl Sample {
    /// Builds a sample from explicit values; `redundant[i - 1]` is `X_i`.
    pub fn new(x_a: bool, x_0: bool, redundant: &[bool]) -> Self {
        assert!(
            redundant.len() <= MAX_REDUNDANT,
            "too many redundant variables"
        );
        let mut bits = x_0 as u64;
        for (i, &b) in redundant.iter().enumerate() {
            bits |= (b as u64) << (i + 1);
        }
        Self {
            x_a,
            bits,
            n_redundant: redundant.len() as u8,
        }
    }

    /// Builds a sample from a packed variable word (bit `i` is `X_i`).
    pub fn from_bits(x_a: bool, bits: u64, n_redundant: usize) -> Self {
        assert!(n_redundant <= MAX_REDUNDANT, "too many redundant variables");
        Self {
            x_a,
            bits: bits & full_mask(n_redundant),
            n_redundant: n_redundant as u8,
        }
    }

    pub fn x_a(&self) -> bool {
        self.x_a
    }

    pub fn x_0(&self) -> bool {
        self.bits & 1 == 1
    }

    pub fn n_redundant(&self) -> usize {
        self.n_redundant as usize
    }

    /// Value of variable `index` (0 = `X_0`). Panics when out of range.
    pub fn value(&self, index: usize) -> bool {
        assert!(
            index <= self.n_redundant(),
            "variable index {index} out of range for n = {}",
            self.n_redundant
        );
        (self.bits >> index) & 1 == 1
    }

    pub fn redundant(&self) -> Vec<bool> {
        (1..=self.n_redundant()).map(|i| self.value(i)).collect()
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }
}

/// Mask with bits `0..=n` set.
pub(crate) fn full_mask(n_redundant: usize) -> u64 {
    if n_redundant + 1 >= 64 {
        u64::MAX
    } else {
        (1u64 << (n_redundant + 1)) - 1
    }
}

/// Draws one sample. The variable word is drawn first, then the coupling.
pub fn sample_world(config: &WorldConfig, rng: &mut Rng) -> Sample {
    let bits = rng.gen::<u64>() & full_mask(config.n_redundant);
    let x_0 = bits & 1 == 1;
    let x_a = if rng.gen_bool(config.alpha) {
        x_0
    } else {
        !x_0
    };
    Sample {
        x_a,
        bits,
        n_redundant: config.n_redundant as u8,
    }
}

/// The first `m` samples of the training stream of `config`.
pub fn generate_stream(config: &WorldConfig, m: usize) -> Vec<Sample> {
    World::new(*config).take(m).collect()
}

/// An endless sample stream. Streams are prefix-stable: the `k`-th sample
/// does not depend on how many samples are drawn afterwards.
#[derive(Debug, Clone)]
pub struct World {
    config: WorldConfig,
    rng: Rng,
}

impl World {
    /// Training stream for `config.seed`.
    pub fn new(config: WorldConfig) -> Self {
        Self::in_domain(config, seed::DOMAIN_TRAIN)
    }

    /// Stream in a separate seed domain, e.g. held-out test data.
    pub fn in_domain(config: WorldConfig, domain: u64) -> Self {
        let seed = if domain == seed::DOMAIN_TRAIN {
            config.seed
        } else {
            seed::mix(config.seed, domain)
        };
        Self {
            config,
            rng: seed::rng(seed),
        }
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn draw(&mut self) -> Sample {
        sample_world(&self.config, &mut self.rng)
    }
}

impl Iterator for World {
    type Item = Sample;

    fn next(&mut self) -> Option<Sample> {
        Some(self.draw())
    }
}
