//! Structures, patterns and binary conditional probability tables.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Sample, MAX_REDUNDANT};

/// The body of the single clause: a set of variable indices (0 = `X_0`).
///
/// Stored as a bit set, so iteration is always ascending and duplicate
/// free. Serialized as the sorted index list.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct Structure(u64);

impl Structure {
    pub const fn empty() -> Self {
        Structure(0)
    }

    /// `{X_0}`, the body of the ground-truth clause.
    pub const fn ground_truth() -> Self {
        Structure(1)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        let mut mask = 0u64;
        for i in indices {
            if i > MAX_REDUNDANT {
                return Err(Error::InvalidConfig(format!(
                    "variable index {i} exceeds the supported maximum {MAX_REDUNDANT}"
                )));
            }
            mask |= 1 << i;
        }
        Ok(Structure(mask))
    }

    /// Like [`Structure::from_indices`], also checking every index is `<= n`.
    pub fn for_world<I: IntoIterator<Item = usize>>(indices: I, n: usize) -> Result<Self> {
        let s = Self::from_indices(indices)?;
        if !s.fits(n) {
            return Err(Error::InvalidConfig(format!(
                "structure {s} uses a variable beyond X_{n}"
            )));
        }
        Ok(s)
    }

    /// All redundant variables `{1..=n}`, plus `X_0` when `with_x0`.
    pub fn full(n: usize, with_x0: bool) -> Self {
        let all = crate::model::full_mask(n);
        Structure(if with_x0 { all } else { all & !1 })
    }

    pub(crate) const fn from_mask(mask: u64) -> Self {
        Structure(mask)
    }

    pub const fn mask(&self) -> u64 {
        self.0
    }

    pub const fn size(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub const fn contains(&self, index: usize) -> bool {
        index < 64 && (self.0 >> index) & 1 == 1
    }

    /// True iff `X_0` is absent: every body variable is redundant.
    pub const fn is_redundant(&self) -> bool {
        !self.contains(0)
    }

    pub const fn is_ground_truth(&self) -> bool {
        self.0 == 1
    }

    /// True iff every index is `<= n`.
    pub fn fits(&self, n: usize) -> bool {
        self.0 & !crate::model::full_mask(n) == 0
    }

    pub const fn with(self, index: usize) -> Self {
        Structure(self.0 | (1 << index))
    }

    pub const fn without(self, index: usize) -> Self {
        Structure(self.0 & !(1 << index))
    }

    pub const fn is_subset_of(&self, other: &Structure) -> bool {
        self.0 & !other.0 == 0
    }

    /// Size of the symmetric difference.
    pub const fn distance(&self, other: &Structure) -> usize {
        (self.0 ^ other.0).count_ones() as usize
    }

    /// Body variable indices in ascending order.
    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        let mut rest = self.0;
        core::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }
}

impl From<Structure> for Vec<usize> {
    fn from(s: Structure) -> Self {
        s.vars().collect()
    }
}

impl TryFrom<Vec<usize>> for Structure {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Structure::from_indices(v)
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.vars().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Structure{self}")
    }
}

/// Values of the body variables of one sample, in structure order: bit `i`
/// is the value of the `i`-th variable of the structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    bits: u64,
    len: u8,
}

impl Pattern {
    pub fn new(bits: u64, len: usize) -> Self {
        assert!(len <= 64);
        let bits = if len == 64 {
            bits
        } else {
            bits & ((1u64 << len) - 1)
        };
        Self {
            bits,
            len: len as u8,
        }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        let bits = values
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        Self::new(bits, values.len())
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len());
        (self.bits >> i) & 1 == 1
    }
}

/// Extracts the body-variable values of `sample`.
///
/// Panics if the structure names a variable the sample does not have.
pub fn project(sample: &Sample, structure: &Structure) -> Pattern {
    let mut bits = 0u64;
    for (k, var) in structure.vars().enumerate() {
        bits |= (sample.value(var) as u64) << k;
    }
    Pattern {
        bits,
        len: structure.size() as u8,
    }
}

/// Conditional table with entries in {0, 1}. Patterns without an entry
/// predict `default_prediction`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryCpt {
    entries: BTreeMap<Pattern, bool>,
    default_prediction: bool,
}

impl BinaryCpt {
    /// Builds a table; all keyed patterns must share one length.
    pub fn new(entries: BTreeMap<Pattern, bool>, default_prediction: bool) -> Result<Self> {
        let mut lens = entries.keys().map(Pattern::len);
        if let Some(first) = lens.next() {
            if lens.any(|l| l != first) {
                return Err(Error::InvalidConfig(
                    "CPT patterns have different lengths".into(),
                ));
            }
        }
        Ok(Self {
            entries,
            default_prediction,
        })
    }

    /// Constant table: every pattern predicts `value`.
    pub fn constant(value: bool) -> Self {
        Self {
            entries: BTreeMap::new(),
            default_prediction: value,
        }
    }

    pub fn entries(&self) -> &BTreeMap<Pattern, bool> {
        &self.entries
    }

    pub fn default_prediction(&self) -> bool {
        self.default_prediction
    }

    pub fn lookup(&self, pattern: &Pattern) -> bool {
        self.entries
            .get(pattern)
            .copied()
            .unwrap_or(self.default_prediction)
    }

    fn pattern_len(&self) -> Option<usize> {
        self.entries.keys().next().map(Pattern::len)
    }
}

/// Majority fit: each observed pattern predicts the majority value of `x_a`
/// among its samples (ties predict 0); unseen patterns predict the overall
/// majority (ties predict 0). This minimizes training errors over all
/// binary tables for the structure.
pub fn fit_cpt(structure: &Structure, data: &[Sample]) -> BinaryCpt {
    let mut counts: BTreeMap<Pattern, [u32; 2]> = BTreeMap::new();
    let mut total = [0u32; 2];
    for s in data {
        let c = counts.entry(project(s, structure)).or_default();
        c[s.x_a() as usize] += 1;
        total[s.x_a() as usize] += 1;
    }
    let entries = counts
        .into_iter()
        .map(|(p, [zeros, ones])| (p, ones > zeros))
        .collect();
    BinaryCpt {
        entries,
        default_prediction: total[1] > total[0],
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    structure: Structure,
    cpt: BinaryCpt,
}

impl Hypothesis {
    pub fn new(structure: Structure, cpt: BinaryCpt) -> Result<Self> {
        if let Some(len) = cpt.pattern_len() {
            if len != structure.size() {
                return Err(Error::InvalidConfig(format!(
                    "CPT pattern length {len} does not match structure size {}",
                    structure.size()
                )));
            }
        }
        Ok(Self { structure, cpt })
    }

    /// The structure with its majority-fitted table.
    pub fn fit(structure: Structure, data: &[Sample]) -> Self {
        Self {
            structure,
            cpt: fit_cpt(&structure, data),
        }
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn cpt(&self) -> &BinaryCpt {
        &self.cpt
    }

    pub fn predict(&self, sample: &Sample) -> bool {
        self.cpt.lookup(&project(sample, &self.structure))
    }
}

pub fn predict(h: &Hypothesis, sample: &Sample) -> bool {
    h.predict(sample)
}

/// Number of samples whose `x_a` the hypothesis gets wrong.
pub fn training_errors(h: &Hypothesis, data: &[Sample]) -> usize {
    data.iter().filter(|s| h.predict(s) != s.x_a()).count()
}

/// A redundant structure whose fitted table classifies every (of at least
/// one) training sample correctly.
pub fn is_false_predictor(structure: &Structure, data: &[Sample]) -> bool {
    structure.is_redundant() && !data.is_empty() && fitted_errors(structure, data) == 0
}

/// Training errors of the fitted table, `sum over patterns of min(#0, #1)`,
/// computed without building the table.
pub fn fitted_errors(structure: &Structure, data: &[Sample]) -> usize {
    ErrorCounter::default().fitted_errors(structure, data)
}

/// Reusable scratch space for [`fitted_errors`]; the learner scores many
/// candidate structures per step.
#[derive(Debug, Default, Clone)]
pub struct ErrorCounter {
    keys: Vec<u64>,
}

impl ErrorCounter {
    pub fn fitted_errors(&mut self, structure: &Structure, data: &[Sample]) -> usize {
        let mask = structure.mask();
        self.keys.clear();
        // Masked variable word in the high bits, x_a in bit 0. Variables
        // occupy bits 0..=62, so the shift cannot lose information.
        self.keys.extend(
            data.iter()
                .map(|s| ((s.bits() & mask) << 1) | s.x_a() as u64),
        );
        self.keys.sort_unstable();
        let mut errors = 0;
        let mut i = 0;
        while i < self.keys.len() {
            let group = self.keys[i] >> 1;
            let mut counts = [0usize; 2];
            while i < self.keys.len() && self.keys[i] >> 1 == group {
                counts[(self.keys[i] & 1) as usize] += 1;
                i += 1;
            }
            errors += counts[0].min(counts[1]);
        }
        errors
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn s(idx: &[usize]) -> Structure {
        Structure::from_indices(idx.iter().copied()).unwrap()
    }

    /// Sample with `X_0 = x0` and `X_i = bits[i-1]`.
    fn smp(x_a: bool, x0: bool, bits: &[bool]) -> Sample {
        Sample::new(x_a, x0, bits)
    }

    #[test]
    fn structure_basics() {
        let st = s(&[3, 1, 3]);
        assert_eq!(st.vars().collect::<Vec<_>>(), [1, 3]);
        assert!(st.is_redundant());
        assert!(!s(&[0, 2]).is_redundant());
        assert!(Structure::empty().is_redundant());
        assert!(st.fits(3) && !st.fits(2));
        assert!(Structure::for_world([4], 3).is_err());
        assert_eq!(Structure::full(12, true).size(), 13);
        assert_eq!(Structure::full(12, false).size(), 12);
        assert_eq!(alloc::format!("{}", s(&[1, 3, 4])), "{1,3,4}");
    }

    #[test]
    fn structure_serializes_as_index_list() {
        let v: Vec<usize> = s(&[0, 5]).into();
        assert_eq!(v, [0, 5]);
        assert_eq!(Structure::try_from(vec![5, 0]).unwrap(), s(&[0, 5]));
    }

    #[test]
    fn project_examples() {
        let sample = smp(false, true, &[true, false, false]);
        assert_eq!(
            project(&sample, &s(&[1, 3])),
            Pattern::from_bools(&[true, false])
        );
        assert_eq!(project(&sample, &Structure::empty()), Pattern::new(0, 0));
        assert_eq!(project(&sample, &s(&[0])), Pattern::from_bools(&[true]));
    }

    #[test]
    #[should_panic]
    fn project_out_of_range_panics() {
        let sample = smp(false, true, &[true]);
        project(&sample, &s(&[2]));
    }

    #[test]
    fn fit_separable() {
        let data = [smp(true, false, &[true]), smp(false, false, &[false])];
        let cpt = fit_cpt(&s(&[1]), &data);
        assert_eq!(cpt.entries().len(), 2);
        assert!(cpt.lookup(&Pattern::from_bools(&[true])));
        assert!(!cpt.lookup(&Pattern::from_bools(&[false])));
    }

    #[test]
    fn fit_majority_and_tie() {
        let p = |x_a| smp(x_a, false, &[true]);
        let three_one = [p(true), p(true), p(true), p(false)];
        let cpt = fit_cpt(&s(&[1]), &three_one);
        assert!(cpt.lookup(&Pattern::from_bools(&[true])));
        // Both possible values for the single row, counted directly.
        let errs = |v: bool| three_one.iter().filter(|x| x.x_a() != v).count();
        assert_eq!(errs(true).min(errs(false)), 1);
        let h = Hypothesis::fit(s(&[1]), &three_one);
        assert_eq!(training_errors(&h, &three_one), 1);

        let two_two = [p(true), p(true), p(false), p(false)];
        assert!(!fit_cpt(&s(&[1]), &two_two).lookup(&Pattern::from_bools(&[true])));
        assert!(!fit_cpt(&s(&[1]), &two_two).default_prediction());
    }

    #[test]
    fn predict_examples() {
        let data = [
            smp(true, false, &[true, false]),
            smp(false, false, &[false, true]),
            smp(true, true, &[true, true]),
        ];
        let h = Hypothesis::fit(s(&[1]), &data);
        assert!(data.iter().all(|x| h.predict(x) == x.x_a()));

        let h = Hypothesis::new(s(&[1, 2]), BinaryCpt::constant(false)).unwrap();
        assert!(!h.predict(&smp(true, true, &[true, true])));

        let mut rows = BTreeMap::new();
        rows.insert(Pattern::from_bools(&[false]), false);
        rows.insert(Pattern::from_bools(&[true]), true);
        let identity = Hypothesis::new(s(&[0]), BinaryCpt::new(rows, false).unwrap()).unwrap();
        assert!(identity.predict(&smp(false, true, &[])));
    }

    #[test]
    fn hypothesis_rejects_mismatched_table() {
        let mut rows = BTreeMap::new();
        rows.insert(Pattern::from_bools(&[true, true]), true);
        let cpt = BinaryCpt::new(rows.clone(), false).unwrap();
        assert!(Hypothesis::new(s(&[1]), cpt).is_err());
        rows.insert(Pattern::from_bools(&[true]), true);
        assert!(BinaryCpt::new(rows, false).is_err());
    }

    #[test]
    fn training_error_examples() {
        let mut data = Vec::new();
        for i in 0..10 {
            data.push(smp(i < 7, i % 2 == 0, &[i % 3 == 0]));
        }
        let h = Hypothesis::fit(Structure::empty(), &data);
        assert!(h.cpt().default_prediction());
        assert_eq!(training_errors(&h, &data), 3);
        assert_eq!(fitted_errors(&Structure::empty(), &data), 3);

        // Four samples, structure {1}: pattern (1) carries both labels once.
        let data = [
            smp(true, false, &[true]),
            smp(false, false, &[true]),
            smp(false, false, &[false]),
            smp(false, true, &[false]),
        ];
        let h = Hypothesis::fit(s(&[1]), &data);
        assert_eq!(training_errors(&h, &data), 1);
        // All four tables over the two rows.
        let best = (0..4u8)
            .map(|t| {
                data.iter()
                    .filter(|x| ((t >> x.value(1) as u8) & 1 == 1) != x.x_a())
                    .count()
            })
            .min()
            .unwrap();
        assert_eq!(best, 1);
    }

    #[test]
    fn false_predictor_examples() {
        let data = [smp(true, true, &[true]), smp(false, false, &[false])];
        assert!(!is_false_predictor(&s(&[0]), &data));
        assert!(is_false_predictor(&s(&[1]), &data));
        assert!(!is_false_predictor(&s(&[1]), &[]));
        let ambiguous = [smp(true, true, &[true]), smp(false, true, &[true])];
        assert!(!is_false_predictor(&s(&[1]), &ambiguous));
    }

    #[test]
    fn fast_errors_match_table_errors() {
        let data: Vec<_> =
            crate::model::generate_stream(&crate::model::WorldConfig::new(5, 0.8, 3).unwrap(), 40);
        for mask in 0..64u64 {
            let st = Structure::from_mask(mask);
            let h = Hypothesis::fit(st, &data);
            assert_eq!(
                fitted_errors(&st, &data),
                training_errors(&h, &data),
                "{st}"
            );
        }
    }
}
