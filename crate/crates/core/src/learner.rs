//! Greedy refinement search and the online learning loop.
//!
//! Candidates are compared by [`Score`]: training errors of the fitted
//! binary table first, then structure size, then the structure itself as a
//! deterministic tie-break. [`AcceptRule`] decides whether an equally
//! accurate but smaller neighbor counts as an improvement, and
//! [`SelectionRule`] decides whether the search result or the initial
//! clause is selected.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{ErrorCounter, Hypothesis, Structure};
use crate::model::{Sample, World, WorldConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartPolicy {
    /// Each step's search starts from the previously selected structure.
    WarmStart,
    /// Each step's search starts from the initial structure.
    RestartFromInitial,
}

/// When a hill-climbing move is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptRule {
    /// Move to the best neighbor whenever its [`Score`] is strictly smaller,
    /// so equally accurate smaller structures are taken.
    StrictScore,
    /// Move to the best neighbor only when it makes strictly fewer training
    /// errors. Size and tie-break still rank the neighbors.
    StrictErrors,
}

/// How the searched hypothesis is turned into the selected one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// The search result is selected as is.
    BestScore,
    /// The search result is selected only if it fits the training data
    /// perfectly; otherwise the initial model is kept.
    ///
    /// Under binary tables the likelihood of a hypothesis is 1 if it makes
    /// no training error and 0 otherwise, while the initial model (the
    /// ground-truth clause with its real-valued table) always has a
    /// likelihood strictly between the two. Ranking by likelihood therefore
    /// reduces to this rule.
    PerfectFitOrInitial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub restart_policy: RestartPolicy,
    pub initial_structure: Structure,
    /// Whether the search may put `X_0` into a body. When false, search
    /// starting points have `X_0` removed.
    pub allow_x0_in_body: bool,
    pub max_structure_size: Option<usize>,
    pub stop_at_ground_truth: bool,
    pub accept: AcceptRule,
    /// When the search stalls on a structure that still makes training
    /// errors, keep adding the best-ranked variable as long as that does
    /// not add errors. Additions never add errors, so the search ends at a
    /// perfect fit whenever some superset of the stalled structure has one.
    pub grow_on_plateau: bool,
    pub selection: SelectionRule,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            restart_policy: RestartPolicy::WarmStart,
            initial_structure: Structure::ground_truth(),
            allow_x0_in_body: true,
            max_structure_size: None,
            stop_at_ground_truth: true,
            accept: AcceptRule::StrictScore,
            grow_on_plateau: false,
            selection: SelectionRule::BestScore,
        }
    }
}

impl LearnerConfig {
    /// Configuration of the false-predictor experiment: the search runs over
    /// redundant bodies, moves only when the likelihood improves, grows
    /// through plateaus, and a search result replaces the initial clause
    /// only when it fits every training sample.
    pub fn experiment() -> Self {
        Self {
            allow_x0_in_body: false,
            accept: AcceptRule::StrictErrors,
            grow_on_plateau: true,
            selection: SelectionRule::PerfectFitOrInitial,
            ..Self::default()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !self.initial_structure.fits(n) {
            return Err(Error::InvalidConfig(alloc::format!(
                "initial structure {} does not fit n = {n}",
                self.initial_structure
            )));
        }
        Ok(())
    }

    fn search_start(&self, s: Structure) -> Structure {
        if self.allow_x0_in_body {
            s
        } else {
            s.without(0)
        }
    }
}

/// Candidate ranking; smaller is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Score {
    pub errors: usize,
    pub size: usize,
    pub tiebreak: u64,
}

impl Score {
    pub fn new(structure: &Structure, errors: usize) -> Self {
        Self {
            errors,
            size: structure.size(),
            tiebreak: structure.mask(),
        }
    }
}

/// The hypothesis selected after one online step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Training set size at this step.
    pub m: usize,
    pub structure: Structure,
    pub errors: usize,
    pub is_false_predictor: bool,
    pub is_ground_truth: bool,
}

/// All structures one refinement away: every single removal and every
/// allowed single addition, sorted by [`Structure`] order. Without
/// `allow_x0_in_body` no candidate other than a removal of `X_0` itself may
/// contain `X_0`.
pub fn refine(structure: &Structure, n: usize, config: &LearnerConfig) -> Vec<Structure> {
    let can_grow = config
        .max_structure_size
        .is_none_or(|cap| structure.size() < cap);
    let first = if config.allow_x0_in_body { 0 } else { 1 };
    let mut out: Vec<Structure> = structure.vars().map(|i| structure.without(i)).collect();
    if can_grow && (config.allow_x0_in_body || structure.is_redundant()) {
        out.extend(
            (first..=n)
                .filter(|&i| !structure.contains(i))
                .map(|i| structure.with(i)),
        );
    }
    out.sort_unstable();
    out
}

/// Steepest-descent search from `start`; returns the fitted local optimum.
pub fn hill_climb(
    start: Structure,
    data: &[Sample],
    n: usize,
    config: &LearnerConfig,
) -> Hypothesis {
    let path = hill_climb_path(start, data, n, config, &mut ErrorCounter::default());
    let (end, _) = *path.last().expect("path holds the start");
    Hypothesis::fit(end, data)
}

/// Every structure visited by [`hill_climb`], with its score, start first.
pub fn hill_climb_path(
    start: Structure,
    data: &[Sample],
    n: usize,
    config: &LearnerConfig,
    counter: &mut ErrorCounter,
) -> Vec<(Structure, Score)> {
    let mut current = start;
    let mut score = Score::new(&start, counter.fitted_errors(&start, data));
    let mut path = alloc::vec![(current, score)];
    // After growing through a plateau only fewer errors count as progress,
    // otherwise the grown variable would be pruned again.
    let mut grown_at = None;
    loop {
        let best = refine(&current, n, config)
            .into_iter()
            .map(|c| (c, Score::new(&c, counter.fitted_errors(&c, data))))
            .min_by_key(|&(_, sc)| sc);
        match best {
            Some((c, sc))
                if improves(config.accept, &sc, &score)
                    && grown_at.is_none_or(|e| sc.errors < e) =>
            {
                current = c;
                score = sc;
                grown_at = None;
                path.push((c, sc));
            }
            _ if config.grow_on_plateau && score.errors > 0 => {
                let grown = refine(&current, n, config)
                    .into_iter()
                    .filter(|c| c.size() > current.size())
                    .map(|c| (c, Score::new(&c, counter.fitted_errors(&c, data))))
                    .filter(|(_, sc)| sc.errors <= score.errors)
                    .min_by_key(|&(_, sc)| sc);
                match grown {
                    Some((c, sc)) => {
                        current = c;
                        score = sc;
                        grown_at = Some(sc.errors);
                        path.push((c, sc));
                    }
                    None => return path,
                }
            }
            _ => return path,
        }
    }
}

fn improves(rule: AcceptRule, candidate: &Score, current: &Score) -> bool {
    match rule {
        AcceptRule::StrictScore => candidate < current,
        AcceptRule::StrictErrors => candidate.errors < current.errors,
    }
}

/// Online learner driven by a world stream. Each call to [`step`] draws one
/// sample, reruns the search on the grown training set and records the
/// selection.
///
/// [`step`]: OnlineLearner::step
#[derive(Debug, Clone)]
pub struct OnlineLearner {
    world: World,
    config: LearnerConfig,
    data: Vec<Sample>,
    selected: Structure,
    counter: ErrorCounter,
}

impl OnlineLearner {
    pub fn new(world: WorldConfig, config: LearnerConfig) -> Result<Self> {
        config.validate(world.n_redundant())?;
        Ok(Self {
            world: World::new(world),
            config,
            data: Vec::new(),
            selected: config.initial_structure,
            counter: ErrorCounter::default(),
        })
    }

    pub fn data(&self) -> &[Sample] {
        &self.data
    }

    pub fn selected(&self) -> Structure {
        self.selected
    }

    pub fn step(&mut self) -> StepRecord {
        let sample = self.world.draw();
        self.data.push(sample);
        let n = self.world.config().n_redundant();
        let origin = match self.config.restart_policy {
            RestartPolicy::WarmStart => self.selected,
            RestartPolicy::RestartFromInitial => self.config.initial_structure,
        };
        let start = self.config.search_start(origin);
        let path = hill_climb_path(start, &self.data, n, &self.config, &mut self.counter);
        let (found, score) = *path.last().expect("path holds the start");
        let (structure, errors) = match self.config.selection {
            SelectionRule::PerfectFitOrInitial if score.errors > 0 => {
                let init = self.config.initial_structure;
                (init, self.counter.fitted_errors(&init, &self.data))
            }
            _ => (found, score.errors),
        };
        self.selected = structure;
        StepRecord {
            m: self.data.len(),
            structure,
            errors,
            is_false_predictor: structure.is_redundant() && errors == 0,
            is_ground_truth: structure.is_ground_truth(),
        }
    }

    pub fn hypothesis(&self) -> Hypothesis {
        Hypothesis::fit(self.selected, &self.data)
    }
}

/// Runs one history for `m = 1..=max_m`, stopping early at the ground truth
/// when configured to.
pub fn online_learn(
    world: WorldConfig,
    config: LearnerConfig,
    max_m: usize,
) -> Result<Vec<StepRecord>> {
    if max_m == 0 {
        return Err(Error::InvalidConfig("max_m must be at least 1".into()));
    }
    let mut learner = OnlineLearner::new(world, config)?;
    let mut records = Vec::with_capacity(max_m.min(4096));
    for _ in 0..max_m {
        let rec = learner.step();
        records.push(rec);
        if config.stop_at_ground_truth && rec.is_ground_truth {
            break;
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn s(idx: &[usize]) -> Structure {
        Structure::from_indices(idx.iter().copied()).unwrap()
    }

    fn smp(x_a: bool, bits: &[bool]) -> Sample {
        Sample::new(x_a, false, bits)
    }

    #[test]
    fn refine_examples() {
        let cfg = LearnerConfig::default();
        assert_eq!(
            refine(&s(&[1]), 3, &cfg),
            [s(&[]), s(&[0, 1]), s(&[1, 2]), s(&[1, 3])]
        );
        assert_eq!(refine(&s(&[]), 2, &cfg), [s(&[0]), s(&[1]), s(&[2])]);
        let full = Structure::full(4, true);
        let r = refine(&full, 4, &cfg);
        assert_eq!(r.len(), 5);
        assert!(r.iter().all(|c| c.size() == 4 && c.is_subset_of(&full)));
    }

    #[test]
    fn refine_respects_x0_and_cap() {
        let no_x0 = LearnerConfig {
            allow_x0_in_body: false,
            ..LearnerConfig::default()
        };
        assert_eq!(refine(&s(&[]), 2, &no_x0), [s(&[1]), s(&[2])]);
        assert_eq!(refine(&s(&[0]), 2, &no_x0), [s(&[])]);
        let capped = LearnerConfig {
            max_structure_size: Some(1),
            ..LearnerConfig::default()
        };
        assert_eq!(refine(&s(&[2]), 3, &capped), [s(&[])]);
        assert_eq!(refine(&s(&[]), 1, &capped).len(), 2);
    }

    #[test]
    fn score_orders_lexicographically() {
        let a = Score::new(&s(&[1, 2]), 0);
        let b = Score::new(&s(&[1]), 1);
        let c = Score::new(&s(&[3]), 1);
        assert!(a < b && b < c);
        assert!(Score::new(&s(&[]), 1) < b);
    }

    #[test]
    fn climbs_to_separating_variable() {
        let data: Vec<_> = (0..16u32)
            .map(|k| {
                let bits = [k & 1 == 1, k & 2 == 2, k & 4 == 4];
                smp(bits[0], &bits)
            })
            .collect();
        let h = hill_climb(s(&[]), &data, 3, &LearnerConfig::default());
        assert_eq!(*h.structure(), s(&[1]));
    }

    #[test]
    fn local_optimum_is_a_fixed_point() {
        let data = vec![smp(true, &[true, false]), smp(false, &[false, false])];
        let h = hill_climb(s(&[1]), &data, 2, &LearnerConfig::default());
        assert_eq!(*h.structure(), s(&[1]));
    }

    #[test]
    fn xor_traps_greedy_search_at_the_empty_body() {
        let data: Vec<_> = (0..4u32)
            .map(|k| {
                let (a, b) = (k & 1 == 1, k & 2 == 2);
                smp(a ^ b, &[a, b])
            })
            .collect();
        let cfg = LearnerConfig {
            allow_x0_in_body: false,
            ..LearnerConfig::default()
        };
        let h = hill_climb(s(&[]), &data, 2, &cfg);
        assert_eq!(*h.structure(), s(&[]));
        assert_eq!(crate::hypothesis::training_errors(&h, &data), 2);

        let grow = LearnerConfig {
            grow_on_plateau: true,
            ..cfg
        };
        let path = hill_climb_path(s(&[]), &data, 2, &grow, &mut ErrorCounter::default());
        let ends: Vec<_> = path.iter().map(|(st, sc)| (*st, sc.errors)).collect();
        assert_eq!(ends, vec![(s(&[]), 2), (s(&[1]), 2), (s(&[1, 2]), 0)]);
    }

    #[test]
    fn online_learn_basics() {
        let world = WorldConfig::experiment(3);
        assert!(online_learn(world, LearnerConfig::default(), 0).is_err());
        assert_eq!(
            online_learn(world, LearnerConfig::default(), 1)
                .unwrap()
                .len(),
            1
        );
        let a = online_learn(world, LearnerConfig::experiment(), 300).unwrap();
        let b = online_learn(world, LearnerConfig::experiment(), 300).unwrap();
        assert_eq!(a, b);
        for (k, r) in a.iter().enumerate() {
            assert_eq!(r.m, k + 1);
        }
    }

    #[test]
    fn rejects_initial_structure_outside_world() {
        let cfg = LearnerConfig {
            initial_structure: s(&[5]),
            ..LearnerConfig::default()
        };
        assert!(OnlineLearner::new(WorldConfig::new(3, 0.8, 0).unwrap(), cfg).is_err());
    }

    #[test]
    fn experiment_learner_selects_only_perfect_fits_before_exit() {
        let recs = online_learn(
            WorldConfig::experiment(17),
            LearnerConfig::experiment(),
            2000,
        )
        .unwrap();
        let (last, before) = recs.split_last().unwrap();
        assert!(last.is_ground_truth);
        assert!(before.iter().all(|r| r.is_false_predictor && r.errors == 0));
    }
}
