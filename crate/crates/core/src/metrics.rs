//! Structural stability metrics, the batched size/life table and regret.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, Structure};
use crate::learner::StepRecord;
use crate::model::Sample;
use crate::oracle::{HindsightComparator, EXHAUSTIVE_MAX_N};

pub fn structural_size(s: &Structure) -> usize {
    s.size()
}

/// Number of add/remove refinements separating `a` from `b`.
pub fn structural_distance(a: &Structure, b: &Structure) -> usize {
    a.distance(b)
}

/// One uninterrupted stretch during which a structure was selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Life {
    pub structure: Structure,
    /// First step at which the structure was selected.
    pub born_m: usize,
    /// Number of consecutive steps the structure stayed selected.
    pub life: usize,
    /// Step at which a different structure replaced it; `None` if it was
    /// still selected at the last record.
    pub ended_m: Option<usize>,
}

impl Life {
    pub fn is_complete(&self) -> bool {
        self.ended_m.is_some()
    }
}

/// A change of the selected structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hop {
    /// Step at which the new structure was selected.
    pub m: usize,
    pub from: Structure,
    pub to: Structure,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HistoryStats {
    pub lives: Vec<Life>,
    pub hops: Vec<Hop>,
    /// First step that selected the ground-truth structure `{X_0}`.
    pub exit_m: Option<usize>,
    /// `(m, structural size)` for every record.
    pub sizes: Vec<(usize, usize)>,
}

impl HistoryStats {
    /// The life that covers step `m`, if any.
    pub fn life_at(&self, m: usize) -> Option<&Life> {
        self.lives
            .iter()
            .find(|l| l.born_m <= m && l.ended_m.is_none_or(|e| e > m))
    }

    /// Hops that stay inside the false-predictor phase, i.e. not the final
    /// jump to the ground truth.
    pub fn phase_hops(&self) -> impl Iterator<Item = &Hop> {
        self.hops.iter().filter(|h| !h.to.is_ground_truth())
    }
}

pub fn analyze_history(records: &[StepRecord]) -> Result<HistoryStats> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidConfig("history has no records".into()))?;
    let mut stats = HistoryStats {
        exit_m: records.iter().find(|r| r.is_ground_truth).map(|r| r.m),
        sizes: records.iter().map(|r| (r.m, r.structure.size())).collect(),
        ..HistoryStats::default()
    };
    let mut current = Life {
        structure: first.structure,
        born_m: first.m,
        life: 1,
        ended_m: None,
    };
    for r in &records[1..] {
        if r.structure == current.structure {
            current.life += 1;
            continue;
        }
        stats.hops.push(Hop {
            m: r.m,
            from: current.structure,
            to: r.structure,
            size: current.structure.distance(&r.structure),
        });
        current.ended_m = Some(r.m);
        stats.lives.push(current);
        current = Life {
            structure: r.structure,
            born_m: r.m,
            life: 1,
            ended_m: None,
        };
    }
    stats.lives.push(current);
    Ok(stats)
}

/// Which batch a completed life is counted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifeAttribution {
    /// The batch containing the step at which the structure was selected.
    Birth,
    /// The batch containing the step at which the structure was replaced.
    Death,
    /// Every step the structure was selected contributes the full life of
    /// that structure to its own batch (a step-weighted average).
    PerStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub range_lo: usize,
    pub range_hi: usize,
    pub size_count: usize,
    pub mean_size: Option<f64>,
    pub sd_size: Option<f64>,
    pub life_count: usize,
    pub mean_life: Option<f64>,
    pub sd_life: Option<f64>,
}

/// Running mean and variance (Welford); sample standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    pub fn sd(&self) -> Option<f64> {
        match self.count {
            0 => None,
            1 => Some(0.0),
            c => Some(libm::sqrt(self.m2 / (c - 1) as f64)),
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Batched structural size and life time over many histories.
///
/// Rows cover `[k*batch, (k+1)*batch - 1]` for every `k` with
/// `k*batch < m_limit`. Sizes are pooled over all (history, step) pairs
/// strictly before the history's exit. Lives are pooled over completed
/// lives of structures other than the ground truth and placed in a batch
/// according to `attribution`.
pub fn table1(
    histories: &[HistoryStats],
    batch: usize,
    m_limit: usize,
    attribution: LifeAttribution,
) -> Result<Vec<Table1Row>> {
    if batch == 0 {
        return Err(Error::InvalidConfig("batch must be at least 1".into()));
    }
    if histories.is_empty() {
        return Ok(Vec::new());
    }
    let rows = m_limit.div_ceil(batch);
    let mut sizes = alloc::vec![Moments::default(); rows];
    let mut lives = alloc::vec![Moments::default(); rows];
    for h in histories {
        let exit = h.exit_m.unwrap_or(usize::MAX);
        for &(m, size) in h.sizes.iter().filter(|(m, _)| *m < exit) {
            if let Some(slot) = sizes.get_mut(m / batch) {
                slot.push(size as f64);
            }
        }
        for l in h.lives.iter().filter(|l| !l.structure.is_ground_truth()) {
            let Some(ended) = l.ended_m else { continue };
            let at = match attribution {
                LifeAttribution::Birth => l.born_m,
                LifeAttribution::Death => ended,
                LifeAttribution::PerStep => {
                    for m in l.born_m..ended {
                        if let Some(slot) = lives.get_mut(m / batch) {
                            slot.push(l.life as f64);
                        }
                    }
                    continue;
                }
            };
            if let Some(slot) = lives.get_mut(at / batch) {
                slot.push(l.life as f64);
            }
        }
    }
    Ok((0..rows)
        .map(|k| Table1Row {
            range_lo: k * batch,
            range_hi: (k + 1) * batch - 1,
            size_count: sizes[k].count(),
            mean_size: sizes[k].mean(),
            sd_size: sizes[k].sd(),
            life_count: lives[k].count(),
            mean_life: lives[k].mean(),
            sd_life: lives[k].sd(),
        })
        .collect())
}

/// Exit-time and hop-size summaries over many histories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub histories: usize,
    pub exited: usize,
    pub exit_mean: Option<f64>,
    pub exit_sd: Option<f64>,
    pub hop_count: usize,
    pub hop_mean: Option<f64>,
    /// Fraction of hops of size exactly one.
    pub unit_hop_fraction: Option<f64>,
}

pub fn phase_summary(histories: &[HistoryStats]) -> PhaseSummary {
    let exits: Moments = histories
        .iter()
        .filter_map(|h| h.exit_m)
        .map(|m| m as f64)
        .collect();
    let hops: Moments = histories
        .iter()
        .flat_map(|h| h.phase_hops())
        .map(|h| h.size as f64)
        .collect();
    let unit = histories
        .iter()
        .flat_map(|h| h.phase_hops())
        .filter(|h| h.size == 1)
        .count();
    PhaseSummary {
        histories: histories.len(),
        exited: exits.count(),
        exit_mean: exits.mean(),
        exit_sd: exits.sd(),
        hop_count: hops.count(),
        hop_mean: hops.mean(),
        unit_hop_fraction: (hops.count() > 0).then(|| unit as f64 / hops.count() as f64),
    }
}

/// Cumulative online loss against the best fixed hypothesis in hindsight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    /// Entry `m-1` is the online loss on samples `1..=m`.
    pub online_loss: Vec<usize>,
    /// Entry `m-1` is the smallest training error of any (fitted) structure
    /// on samples `1..=m`.
    pub comparator_loss: Vec<usize>,
    /// `R_m`.
    pub regret: Vec<f64>,
    /// `R_m / m`.
    pub average_regret: Vec<f64>,
}

/// Regret of an online history under 0/1 loss.
///
/// The hypothesis charged for sample `i` is the structure selected after
/// `i - 1` samples (`initial` for the first sample), refitted on those
/// `i - 1` samples, so it never sees the sample it is scored on. The
/// comparator minimum runs over every structure on `{0..=n}` of size at
/// most `max_size` (all of them when `None`).
pub fn regret_trace(
    records: &[StepRecord],
    stream: &[Sample],
    n: usize,
    initial: &Structure,
    max_size: Option<usize>,
) -> Result<RegretTrace> {
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::Guard {
            what: "n",
            got: n,
            limit: EXHAUSTIVE_MAX_N,
        });
    }
    if records.len() > stream.len() {
        return Err(Error::InvalidConfig(
            "stream is shorter than the record list".into(),
        ));
    }
    if records.iter().enumerate().any(|(k, r)| r.m != k + 1) {
        return Err(Error::InvalidConfig(
            "records must cover m = 1, 2, ... without gaps".into(),
        ));
    }
    let mut comparator = HindsightComparator::new(n, max_size)?;
    let mut trace = RegretTrace {
        online_loss: Vec::with_capacity(records.len()),
        comparator_loss: Vec::with_capacity(records.len()),
        regret: Vec::with_capacity(records.len()),
        average_regret: Vec::with_capacity(records.len()),
    };
    let mut online = 0usize;
    for (i, sample) in stream.iter().take(records.len()).enumerate() {
        let structure = if i == 0 {
            *initial
        } else {
            records[i - 1].structure
        };
        let h = Hypothesis::fit(structure, &stream[..i]);
        online += (h.predict(sample) != sample.x_a()) as usize;
        comparator.push(sample);
        let best = comparator.best_errors();
        let r = online as f64 - best as f64;
        trace.online_loss.push(online);
        trace.comparator_loss.push(best);
        trace.regret.push(r);
        trace.average_regret.push(r / (i + 1) as f64);
    }
    Ok(trace)
}
