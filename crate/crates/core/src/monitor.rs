//! Alarm-rate estimates, operational threshold gates and the structural
//! rule of thumb.
//!
//! `p_false` is the fraction of normal situations (`x_a = 0`) flagged as
//! anomalous; `p_missed` is the fraction of anomalies (`x_a = 1`) not
//! flagged. The rule of thumb looks only at the structure history:
//!
//! 1. the current structure has been selected for longer than
//!    `stability_factor * m_star` steps,
//! 2. the last `window` structure changes were all hops of at most
//!    `minor_hop_max`,
//! 3. the last `life_increase_span` completed lives are non-decreasing.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, Pattern, Structure};
use crate::learner::StepRecord;
use crate::metrics::HistoryStats;
use crate::model::{Sample, World, WorldConfig};
use crate::seed;

/// Largest structure for which [`exact_rates`] enumerates patterns.
pub const EXACT_RATES_MAX_S: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    /// Maintenance interval in training samples.
    pub m_star: usize,
    pub t_false: f64,
    pub t_missed: f64,
    pub minor_hop_max: usize,
    pub window: usize,
    pub life_increase_span: usize,
    pub test_set_size: usize,
    /// Condition 1 requires an ongoing life above `stability_factor * m_star`.
    pub stability_factor: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            m_star: 20,
            t_false: 0.25,
            t_missed: 0.25,
            minor_hop_max: 1,
            window: 3,
            life_increase_span: 3,
            test_set_size: 10_000,
            stability_factor: 1.0,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.t_false) || !unit.contains(&self.t_missed) {
            return Err(Error::InvalidConfig("thresholds must lie in [0, 1]".into()));
        }
        if self.m_star == 0 {
            return Err(Error::InvalidConfig("m_star must be at least 1".into()));
        }
        if self.stability_factor.is_nan() || self.stability_factor < 0.0 {
            return Err(Error::InvalidConfig(
                "stability_factor must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub p_false: f64,
    pub p_missed: f64,
    /// Test samples used; 0 for exact rates.
    pub test_m: usize,
}

/// Rates of `h` on the held-out stream of `world` (a seed domain disjoint
/// from training), using its first `test_m` samples.
pub fn evaluate_rates(h: &Hypothesis, world: &WorldConfig, test_m: usize) -> Result<RateEstimate> {
    if test_m == 0 {
        return Err(Error::InvalidConfig("test_m must be at least 1".into()));
    }
    let test = test_stream(world, test_m);
    evaluate_rates_on(h, &test)
}

pub fn test_stream(world: &WorldConfig, test_m: usize) -> Vec<Sample> {
    World::in_domain(*world, seed::DOMAIN_TEST)
        .take(test_m)
        .collect()
}

/// Rates of `h` on an explicit sample set.
pub fn evaluate_rates_on(h: &Hypothesis, samples: &[Sample]) -> Result<RateEstimate> {
    let mut class = [0usize; 2];
    let mut wrong = [0usize; 2];
    for s in samples {
        let label = s.x_a() as usize;
        class[label] += 1;
        wrong[label] += (h.predict(s) != s.x_a()) as usize;
    }
    for (c, &count) in class.iter().enumerate() {
        if count == 0 {
            return Err(Error::MissingClass { class: c as u8 });
        }
    }
    Ok(RateEstimate {
        p_false: wrong[0] as f64 / class[0] as f64,
        p_missed: wrong[1] as f64 / class[1] as f64,
        test_m: samples.len(),
    })
}

/// Exact rates under the world distribution: a sum over all body patterns
/// of the pattern probability given `x_a` times the error indicator.
pub fn exact_rates(h: &Hypothesis, alpha: f64) -> Result<RateEstimate> {
    let st: &Structure = h.structure();
    let s = st.size();
    if s > EXACT_RATES_MAX_S {
        return Err(Error::Guard {
            what: "structure size",
            got: s,
            limit: EXACT_RATES_MAX_S,
        });
    }
    // Position of X_0 inside the pattern, if present.
    let x0_pos = st.contains(0).then_some(0);
    let mut p_false = 0.0;
    let mut p_missed = 0.0;
    let uniform = libm::exp2(-(s as f64));
    for bits in 0..1u64 << s {
        let pattern = Pattern::new(bits, s);
        let pred = h.cpt().lookup(&pattern);
        // P(pattern | x_a = 0) and P(pattern | x_a = 1).
        let (given0, given1) = match x0_pos {
            None => (uniform, uniform),
            Some(pos) => {
                let rest = 2.0 * uniform;
                if pattern.get(pos) {
                    (rest * (1.0 - alpha), rest * alpha)
                } else {
                    (rest * alpha, rest * (1.0 - alpha))
                }
            }
        };
        if pred {
            p_false += given0;
        } else {
            p_missed += given1;
        }
    }
    Ok(RateEstimate {
        p_false,
        p_missed,
        test_m: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum OperationalCheck {
    /// Both thresholds held at every one of the `m_star` steps.
    Pass,
    /// First step (0-based) where a threshold was not met.
    Fail { step: usize },
    /// Fewer than `m_star` steps are available.
    Inconclusive { available: usize, required: usize },
}

impl OperationalCheck {
    pub fn passed(&self) -> bool {
        matches!(self, OperationalCheck::Pass)
    }
}

/// Checks both alarm-rate thresholds over the `m_star` steps following a
/// check-point. `rates[k]` belongs to the `k+1`-th step after it.
pub fn check_operational(rates: &[RateEstimate], config: &MonitorConfig) -> OperationalCheck {
    if rates.len() < config.m_star {
        return OperationalCheck::Inconclusive {
            available: rates.len(),
            required: config.m_star,
        };
    }
    rates[..config.m_star]
        .iter()
        .position(|r| r.p_false >= config.t_false || r.p_missed >= config.t_missed)
        .map_or(OperationalCheck::Pass, |step| OperationalCheck::Fail {
            step,
        })
}

/// Positions `k` where adding one sample made either rate worse:
/// `rates[k+1] > rates[k]` in `p_false` or in `p_missed`.
pub fn universal_stability_violations(rates: &[RateEstimate]) -> Vec<usize> {
    rates
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].p_false > w[0].p_false || w[1].p_missed > w[0].p_missed)
        .map(|(k, _)| k)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub cond1_long_stability: bool,
    pub cond2_minor_refinements: bool,
    pub cond3_increasing_lives: bool,
    pub approved: bool,
    /// Some condition failed only because the history was too short to
    /// evaluate it.
    pub insufficient_data: bool,
}

/// Applies the rule of thumb to the history as it stood at step `at_m`.
pub fn rule_of_thumb(stats: &HistoryStats, config: &MonitorConfig, at_m: usize) -> Verdict {
    let mut insufficient = false;

    let cond1 = match stats.life_at(at_m) {
        Some(life) => {
            let ongoing = (at_m + 1 - life.born_m) as f64;
            ongoing > config.stability_factor * config.m_star as f64
        }
        None => {
            insufficient = true;
            false
        }
    };

    let hops: Vec<_> = stats.hops.iter().filter(|h| h.m <= at_m).collect();
    let cond2 = if hops.len() < config.window {
        insufficient = true;
        false
    } else {
        hops[hops.len() - config.window..]
            .iter()
            .all(|h| h.size <= config.minor_hop_max)
    };

    let lives: Vec<usize> = stats
        .lives
        .iter()
        .filter(|l| l.ended_m.is_some_and(|e| e <= at_m))
        .map(|l| l.life)
        .collect();
    let cond3 = if lives.len() < config.life_increase_span {
        insufficient = true;
        false
    } else {
        lives[lives.len() - config.life_increase_span..]
            .windows(2)
            .all(|w| w[0] <= w[1])
    };

    Verdict {
        cond1_long_stability: cond1,
        cond2_minor_refinements: cond2,
        cond3_increasing_lives: cond3,
        approved: cond1 && cond2 && cond3,
        insufficient_data: insufficient,
    }
}

/// A rule-of-thumb approval of a false predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Masquerade {
    pub history: usize,
    pub m: usize,
    pub structure: Structure,
}

/// Every `(history, m)` at which the rule of thumb approves a structure
/// that was a false predictor when selected.
pub fn masquerade_report(
    histories: &[(Vec<StepRecord>, HistoryStats)],
    config: &MonitorConfig,
) -> Vec<Masquerade> {
    let mut out = Vec::new();
    for (history, (records, stats)) in histories.iter().enumerate() {
        for r in records.iter().filter(|r| r.is_false_predictor) {
            if rule_of_thumb(stats, config, r.m).approved {
                out.push(Masquerade {
                    history,
                    m: r.m,
                    structure: r.structure,
                });
            }
        }
    }
    out
}
