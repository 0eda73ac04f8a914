//! Brute-force comparators: the false-predictor census and its expected
//! value, exhaustive structure search, best-in-hindsight tracking and
//! false-predictor survival trials.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::hypothesis::{ErrorCounter, Hypothesis, Structure};
use crate::learner::Score;
use crate::model::{Sample, World, WorldConfig};
use crate::seed::{self, Rng};

/// Largest `n` for which all `2^(n+1)` structures are enumerated.
pub const EXHAUSTIVE_MAX_N: usize = 16;
/// Largest structure size for which full tables are counted.
pub const CENSUS_MAX_S: usize = 16;
/// Training sets redrawn per survival trial before giving up.
pub const SURVIVAL_MAX_REDRAWS: usize = 100;
/// A single false predictor is followed for at most this many steps.
pub const SURVIVAL_MAX_STEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureCensus {
    pub structure: Structure,
    /// Number of distinct observed patterns `k`.
    pub distinct_patterns: usize,
    /// No observed pattern carries both values of `x_a`.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusResult {
    /// Number of (redundant structure, full table) pairs that classify
    /// every training sample correctly.
    pub exact_count: BigUint,
    /// `log2(exact_count)`; negative infinity for zero.
    pub log2_count: f64,
    pub per_structure: Vec<StructureCensus>,
}

/// All size-`s` subsets of `{1..=n}` in ascending mask order.
pub fn redundant_structures(n: usize, s: usize) -> impl Iterator<Item = Structure> {
    let limit = 1u64 << n;
    let mut next = if s > n { None } else { Some((1u64 << s) - 1) };
    core::iter::from_fn(move || {
        let v = next?;
        next = if v == 0 {
            None
        } else {
            // Gosper's hack: next integer with the same popcount.
            let c = v & v.wrapping_neg();
            let r = v + c;
            let w = (((r ^ v) >> 2) / c) | r;
            (w < limit).then_some(w)
        };
        Some(Structure::from_mask(v << 1))
    })
}

/// Distinct observed patterns of `structure` and whether they are all
/// unambiguous.
pub fn pattern_census(structure: &Structure, data: &[Sample]) -> (usize, bool) {
    let mut seen: BTreeMap<u64, bool> = BTreeMap::new();
    let mut consistent = true;
    for s in data {
        let key = s.bits() & structure.mask();
        match seen.get(&key) {
            Some(&v) if v != s.x_a() => consistent = false,
            Some(_) => {}
            None => {
                seen.insert(key, s.x_a());
            }
        }
    }
    (seen.len(), consistent)
}

fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 63 {
        return libm::log2(x.to_u64().expect("fits in u64") as f64);
    }
    let top = (x >> (bits - 63)).to_u64().expect("63 bits fit in u64");
    libm::log2(top as f64) + (bits - 63) as f64
}

/// Counts false predictors of size `s` on `data`: every consistent
/// redundant structure contributes `2^(2^s - k)` full tables (observed
/// rows are forced, unseen rows are free).
pub fn count_false_predictors(data: &[Sample], n: usize, s: usize) -> Result<CensusResult> {
    if s > CENSUS_MAX_S {
        return Err(Error::Guard {
            what: "structure size s",
            got: s,
            limit: CENSUS_MAX_S,
        });
    }
    if s > n {
        return Err(Error::Guard {
            what: "structure size s",
            got: s,
            limit: n,
        });
    }
    let rows = 1usize << s;
    let mut exact_count = BigUint::zero();
    let mut per_structure = Vec::new();
    for structure in redundant_structures(n, s) {
        let (k, consistent) = pattern_census(&structure, data);
        if consistent {
            exact_count += BigUint::from(1u8) << (rows - k);
        }
        per_structure.push(StructureCensus {
            structure,
            distinct_patterns: k,
            consistent,
        });
    }
    Ok(CensusResult {
        log2_count: log2_big(&exact_count),
        exact_count,
        per_structure,
    })
}

/// `log2(C(n, s))`; negative infinity when `s > n`.
pub fn log2_binomial(n: usize, s: usize) -> f64 {
    if s > n {
        return f64::NEG_INFINITY;
    }
    let s = s.min(n - s);
    (1..=s)
        .map(|i| libm::log2((n - s + i) as f64) - libm::log2(i as f64))
        .sum()
}

/// `log2` of the expected number of size-`s` false predictors after `m`
/// samples: `log2 C(n,s) + 2^s - m`.
pub fn expected_false_predictors_log2(n: usize, s: usize, m: usize) -> f64 {
    log2_binomial(n, s) + libm::exp2(s as f64) - m as f64
}

/// Expected number of size-`s` false predictors, `C(n,s) * 2^(2^s - m)`.
pub fn expected_false_predictors(n: usize, s: usize, m: usize) -> f64 {
    if s > n {
        return 0.0;
    }
    // Direct product first: exact whenever C(n,s) fits the mantissa.
    let k = s.min(n - s);
    let binomial = (1..=k).fold(1.0f64, |c, i| c * (n - k + i) as f64 / i as f64);
    let direct = binomial * libm::exp2(libm::exp2(s as f64) - m as f64);
    if direct.is_finite() && direct > 0.0 {
        direct
    } else {
        libm::exp2(expected_false_predictors_log2(n, s, m))
    }
}

/// Monte Carlo mean of the census over `trials` independent training sets
/// of size `m`, next to the analytic expectation.
pub fn census_monte_carlo(
    world: &WorldConfig,
    s: usize,
    m: usize,
    trials: usize,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let mut total = BigUint::zero();
    for t in 0..trials {
        total += census_trial(world, s, m, t as u64)?;
    }
    Ok((
        big_mean(&total, trials),
        expected_false_predictors(world.n_redundant(), s, m),
    ))
}

/// Census of trial `index` of [`census_monte_carlo`]: the false-predictor
/// count on the first `m` samples of history `index`.
pub fn census_trial(world: &WorldConfig, s: usize, m: usize, index: u64) -> Result<BigUint> {
    let data = crate::model::generate_stream(&world.for_history(index), m);
    Ok(count_false_predictors(&data, world.n_redundant(), s)?.exact_count)
}

/// `total / count` as a float, exact up to rounding even when `total` does
/// not fit a float.
pub fn big_mean(total: &BigUint, count: usize) -> f64 {
    match total.to_f64() {
        Some(x) if x.is_finite() => x / count as f64,
        _ => libm::exp2(log2_big(total) - libm::log2(count as f64)),
    }
}

/// Mean number of steps a uniformly chosen false predictor of size `s`
/// survives, counting the step that falsifies it.
///
/// Each trial draws `warmup_m` samples, picks a (structure, full table)
/// pair uniformly among those that fit them, then feeds further samples
/// until the table misclassifies one.
pub fn survival_trial(
    world: &WorldConfig,
    s: usize,
    warmup_m: usize,
    trials: usize,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let n = world.n_redundant();
    let mut total = 0usize;
    for t in 0..trials {
        let mut picks = seed::rng(seed::mix_domain(
            world.seed(),
            t as u64,
            seed::DOMAIN_ORACLE,
        ));
        let mut attempt = 0;
        let steps = loop {
            let index = (t * SURVIVAL_MAX_REDRAWS + attempt) as u64;
            let mut stream = World::new(world.for_history(index));
            match survive(|| stream.draw(), n, s, warmup_m, &mut picks)? {
                Some(steps) => break steps,
                None if attempt + 1 < SURVIVAL_MAX_REDRAWS => attempt += 1,
                None => {
                    return Err(Error::NoFalsePredictor {
                        size: s,
                        retries: SURVIVAL_MAX_REDRAWS,
                    })
                }
            }
        };
        total += steps;
    }
    Ok(total as f64 / trials as f64)
}

/// One survival run; `Ok(None)` when nothing survives the warm-up.
fn survive<F: FnMut() -> Sample>(
    mut draw: F,
    n: usize,
    s: usize,
    warmup_m: usize,
    rng: &mut Rng,
) -> Result<Option<usize>> {
    let data: Vec<Sample> = (0..warmup_m).map(|_| draw()).collect();
    let census = count_false_predictors(&data, n, s)?;
    let candidates: Vec<_> = census
        .per_structure
        .iter()
        .filter(|c| c.consistent)
        .collect();
    let Some(k_min) = candidates.iter().map(|c| c.distinct_patterns).min() else {
        return Ok(None);
    };
    // Structure j carries 2^(2^s - k_j) tables; weights relative to the
    // largest one.
    let weights: Vec<f64> = candidates
        .iter()
        .map(|c| libm::exp2(k_min as f64 - c.distinct_patterns as f64))
        .collect();
    let mut u = rng.gen::<f64>() * weights.iter().sum::<f64>();
    let mut chosen = candidates[candidates.len() - 1].structure;
    for (c, w) in candidates.iter().zip(&weights) {
        if u < *w {
            chosen = c.structure;
            break;
        }
        u -= w;
    }
    let mut table: BTreeMap<u64, bool> = data
        .iter()
        .map(|x| (x.bits() & chosen.mask(), x.x_a()))
        .collect();
    for step in 1..=SURVIVAL_MAX_STEPS {
        let x = draw();
        let key = x.bits() & chosen.mask();
        // Unseen rows were free in the uniform pick: fill them on demand.
        let p = *table.entry(key).or_insert_with(|| rng.gen::<bool>());
        if p != x.x_a() {
            return Ok(Some(step));
        }
    }
    Err(Error::SurvivalUnbounded {
        max_steps: SURVIVAL_MAX_STEPS,
    })
}

/// The [`Score`]-minimal fitted hypothesis over all `2^(n+1)` structures.
pub fn exhaustive_best(data: &[Sample], n: usize) -> Result<Hypothesis> {
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::Guard {
            what: "n",
            got: n,
            limit: EXHAUSTIVE_MAX_N,
        });
    }
    let mut counter = ErrorCounter::default();
    let best = (0..1u64 << (n + 1))
        .map(Structure::from_mask)
        .map(|st| Score::new(&st, counter.fitted_errors(&st, data)))
        .min()
        .expect("at least the empty structure");
    Ok(Hypothesis::fit(Structure::from_mask(best.tiebreak), data))
}

/// Incrementally tracks the smallest training error of any structure on a
/// growing sample prefix.
#[derive(Debug, Clone)]
pub struct HindsightComparator {
    structures: Vec<Structure>,
    counts: Vec<BTreeMap<u64, [usize; 2]>>,
    errors: Vec<usize>,
}

impl HindsightComparator {
    /// All structures on `{0..=n}`, optionally capped in size.
    pub fn new(n: usize, max_size: Option<usize>) -> Result<Self> {
        if n > EXHAUSTIVE_MAX_N {
            return Err(Error::Guard {
                what: "n",
                got: n,
                limit: EXHAUSTIVE_MAX_N,
            });
        }
        let structures: Vec<_> = (0..1u64 << (n + 1))
            .map(Structure::from_mask)
            .filter(|s| max_size.is_none_or(|cap| s.size() <= cap))
            .collect();
        let len = structures.len();
        Ok(Self {
            structures,
            counts: alloc::vec![BTreeMap::new(); len],
            errors: alloc::vec![0; len],
        })
    }

    pub fn push(&mut self, sample: &Sample) {
        let label = sample.x_a() as usize;
        for ((st, counts), errors) in self
            .structures
            .iter()
            .zip(&mut self.counts)
            .zip(&mut self.errors)
        {
            let c = counts.entry(sample.bits() & st.mask()).or_default();
            let before = c[0].min(c[1]);
            c[label] += 1;
            *errors += c[0].min(c[1]) - before;
        }
    }

    pub fn best_errors(&self) -> usize {
        self.errors.iter().copied().min().unwrap_or(0)
    }
}
