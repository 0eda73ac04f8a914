use std::collections::HashMap;

use blp_lab_core::hypothesis::{
    fit_cpt, fitted_errors, is_false_predictor, training_errors, ErrorCounter,
};
use blp_lab_core::learner::{hill_climb, hill_climb_path, refine};
use blp_lab_core::metrics::{analyze_history, regret_trace, structural_distance};
use blp_lab_core::monitor::{check_operational, universal_stability_violations};
use blp_lab_core::oracle::{count_false_predictors, exhaustive_best, HindsightComparator};
use blp_lab_core::*;
use num_bigint::BigUint;
use proptest::prelude::*;

const N: usize = 4;

fn structure(n: usize) -> impl Strategy<Value = Structure> {
    (0u64..1 << (n + 1)).prop_map(move |mask| {
        Structure::for_world((0..=n).filter(|i| mask >> i & 1 == 1), n).unwrap()
    })
}

fn redundant(n: usize) -> impl Strategy<Value = Structure> {
    structure(n).prop_map(|s| s.without(0))
}

fn data(n: usize, max_len: usize) -> impl Strategy<Value = Vec<Sample>> {
    prop::collection::vec(
        (any::<bool>(), any::<u64>()).prop_map(move |(a, b)| Sample::from_bits(a, b, n)),
        1..=max_len,
    )
}

fn key(sample: &Sample, s: &Structure) -> Vec<bool> {
    s.vars().map(|i| sample.value(i)).collect()
}

// Errors of the best table for `s`, counted directly from pattern tallies.
fn tally_errors(s: &Structure, data: &[Sample]) -> usize {
    let mut tally: HashMap<Vec<bool>, [usize; 2]> = HashMap::new();
    for d in data {
        tally.entry(key(d, s)).or_default()[d.x_a() as usize] += 1;
    }
    tally.values().map(|c| c[0].min(c[1])).sum()
}

// Every full table on `s`, as a row index -> prediction function.
fn all_tables(s: &Structure) -> impl Iterator<Item = impl Fn(&Sample) -> bool + '_> {
    let rows = 1usize << s.size();
    (0u64..1 << rows).map(move |table| {
        move |d: &Sample| {
            let row = s
                .vars()
                .enumerate()
                .fold(0usize, |acc, (k, i)| acc | (d.value(i) as usize) << k);
            table >> row & 1 == 1
        }
    })
}

proptest! {
    #[test]
    fn distance_is_a_metric(a in structure(8), b in structure(8), c in structure(8)) {
        prop_assert_eq!(structural_distance(&a, &a), 0);
        prop_assert_eq!(structural_distance(&a, &b) == 0, a == b);
        prop_assert_eq!(structural_distance(&a, &b), structural_distance(&b, &a));
        prop_assert!(structural_distance(&a, &c) <= structural_distance(&a, &b) + structural_distance(&b, &c));
    }

    #[test]
    fn refinement_never_adds_errors(a in structure(N), extra in structure(N), d in data(N, 16)) {
        let b = Structure::for_world(a.vars().chain(extra.vars()), N).unwrap();
        prop_assert!(a.is_subset_of(&b));
        prop_assert!(fitted_errors(&b, &d) <= fitted_errors(&a, &d));
    }

    #[test]
    fn fitted_table_is_optimal(s in structure(N).prop_filter("s <= 3", |s| s.size() <= 3), d in data(N, 16)) {
        let h = Hypothesis::fit(s, &d);
        let fitted = training_errors(&h, &d);
        let best = all_tables(&s)
            .map(|t| d.iter().filter(|x| t(x) != x.x_a()).count())
            .min()
            .unwrap();
        prop_assert_eq!(fitted, best);
        prop_assert_eq!(fitted, tally_errors(&s, &d));
        prop_assert_eq!(fitted_errors(&s, &d), best);
        prop_assert_eq!(ErrorCounter::default().fitted_errors(&s, &d), best);
    }

    #[test]
    fn fitted_table_covers_observed_patterns(s in structure(N), d in data(N, 16)) {
        let cpt = fit_cpt(&s, &d);
        let distinct: std::collections::HashSet<_> = d.iter().map(|x| key(x, &s)).collect();
        prop_assert_eq!(cpt.entries().len(), distinct.len());
    }

    #[test]
    fn greedy_never_beats_exhaustive(start in structure(N), d in data(N, 16)) {
        let greedy = hill_climb(start, &d, N, &LearnerConfig::default());
        let best = exhaustive_best(&d, N).unwrap();
        let g = Score::new(greedy.structure(), training_errors(&greedy, &d));
        let e = Score::new(best.structure(), training_errors(&best, &d));
        prop_assert!(e <= g);
        if g.errors == 0 {
            prop_assert_eq!(e.errors, 0);
        }
    }

    #[test]
    fn climb_path_steps_once_and_never_worsens(
        start in structure(N),
        d in data(N, 16),
        strict_errors in any::<bool>(),
        grow in any::<bool>(),
    ) {
        let cfg = LearnerConfig {
            accept: if strict_errors { AcceptRule::StrictErrors } else { AcceptRule::StrictScore },
            grow_on_plateau: grow,
            ..LearnerConfig::default()
        };
        let path = hill_climb_path(start, &d, N, &cfg, &mut ErrorCounter::default());
        for w in path.windows(2) {
            prop_assert_eq!(structural_distance(&w[0].0, &w[1].0), 1);
            prop_assert!(w[1].1.errors <= w[0].1.errors);
            if !grow {
                prop_assert!(w[1].1 < w[0].1);
            }
        }
    }

    #[test]
    fn refine_yields_exact_neighbors(s in structure(N), allow in any::<bool>(), cap in prop::option::of(0usize..=N + 1)) {
        let cfg = LearnerConfig { allow_x0_in_body: allow, max_structure_size: cap, ..LearnerConfig::default() };
        let next = refine(&s, N, &cfg);
        for c in &next {
            prop_assert_eq!(structural_distance(&s, c), 1);
            if c.size() > s.size() {
                prop_assert!(cap.is_none_or(|k| c.size() <= k));
                prop_assert!(allow || !c.contains(0));
            }
        }
        prop_assert_eq!(next.iter().filter(|c| c.size() < s.size()).count(), s.size());
    }

    #[test]
    fn false_predictors_are_closed_under_supersets(a in redundant(N), extra in redundant(N), d in data(N, 10)) {
        let b = Structure::for_world(a.vars().chain(extra.vars()), N).unwrap();
        if is_false_predictor(&a, &d) {
            prop_assert!(is_false_predictor(&b, &d));
        }
    }

    #[test]
    fn census_matches_full_table_enumeration(n in 1usize..=4, s in 0usize..=3, d in prop::collection::vec((any::<bool>(), any::<u64>()), 0..8)) {
        prop_assume!(s <= n);
        let d: Vec<_> = d.into_iter().map(|(a, b)| Sample::from_bits(a, b, n)).collect();
        let census = count_false_predictors(&d, n, s).unwrap();
        let mut direct = 0u64;
        for mask in 0u64..1 << n {
            if mask.count_ones() as usize != s {
                continue;
            }
            let st = Structure::for_world((1..=n).filter(|i| mask >> (i - 1) & 1 == 1), n).unwrap();
            direct += all_tables(&st)
                .filter(|t| d.iter().all(|x| t(x) == x.x_a()))
                .count() as u64;
        }
        prop_assert_eq!(census.exact_count, BigUint::from(direct));
        for c in &census.per_structure {
            prop_assert_eq!(c.consistent, tally_errors(&c.structure, &d) == 0);
        }
    }

    #[test]
    fn comparator_is_monotone_in_restriction(d in data(3, 20)) {
        let mut all = HindsightComparator::new(3, None).unwrap();
        let mut small = HindsightComparator::new(3, Some(1)).unwrap();
        for x in &d {
            all.push(x);
            small.push(x);
            prop_assert!(small.best_errors() >= all.best_errors());
        }
        let brute = (0u64..16)
            .map(|m| Structure::for_world((0..=3).filter(|i| m >> i & 1 == 1), 3).unwrap())
            .map(|s| tally_errors(&s, &d))
            .min()
            .unwrap();
        prop_assert_eq!(all.best_errors(), brute);
    }

    #[test]
    fn lives_cover_every_record(seed in any::<u64>(), warm in any::<bool>()) {
        let cfg = LearnerConfig {
            restart_policy: if warm { RestartPolicy::WarmStart } else { RestartPolicy::RestartFromInitial },
            ..LearnerConfig::experiment()
        };
        let recs = learner::online_learn(WorldConfig::new(6, 0.8, seed).unwrap(), cfg, 120).unwrap();
        let stats = analyze_history(&recs).unwrap();
        prop_assert_eq!(stats.lives.iter().map(|l| l.life).sum::<usize>(), recs.len());
        prop_assert!(stats.lives.iter().all(|l| l.life >= 1));
        prop_assert!(stats.hops.iter().all(|h| h.size >= 1));
        prop_assert_eq!(stats.hops.len() + 1, stats.lives.len());
    }

    #[test]
    fn stability_violations_match_definition(pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..30)) {
        let rates: Vec<_> = pairs
            .iter()
            .map(|&(f, m)| RateEstimate { p_false: f, p_missed: m, test_m: 1 })
            .collect();
        let v = universal_stability_violations(&rates);
        for k in 0..rates.len().saturating_sub(1) {
            let worse = rates[k + 1].p_false > rates[k].p_false || rates[k + 1].p_missed > rates[k].p_missed;
            prop_assert_eq!(v.contains(&k), worse);
        }
    }

    #[test]
    fn operational_check_is_monotone_in_thresholds(
        pairs in prop::collection::vec((0.0f64..0.5, 0.0f64..0.5), 20..30),
        t in 0.0f64..0.5,
        dt in 0.0f64..0.5,
    ) {
        let rates: Vec<_> = pairs
            .iter()
            .map(|&(f, m)| RateEstimate { p_false: f, p_missed: m, test_m: 1 })
            .collect();
        let tight = MonitorConfig { t_false: t, t_missed: t, ..MonitorConfig::default() };
        let loose = MonitorConfig { t_false: t + dt, t_missed: t + dt, ..MonitorConfig::default() };
        if check_operational(&rates, &tight).passed() {
            prop_assert!(check_operational(&rates, &loose).passed());
        }
    }

    #[test]
    fn regret_is_zero_when_online_is_best_in_hindsight(
        bits in prop::collection::vec(any::<u64>(), 1..30),
        body in structure(3),
    ) {
        // x_a is always 0: every table fitted so far, and the untrained
        // default, predicts 0, as does the best structure in hindsight.
        let d: Vec<_> = bits.iter().map(|&b| Sample::from_bits(false, b, 3)).collect();
        let recs: Vec<_> = (1..=d.len())
            .map(|m| StepRecord {
                m,
                structure: body,
                errors: 0,
                is_false_predictor: body.is_redundant(),
                is_ground_truth: body.is_ground_truth(),
            })
            .collect();
        let tr = regret_trace(&recs, &d, 3, &body, None).unwrap();
        prop_assert!(tr.regret.iter().all(|&r| r == 0.0));
        prop_assert!(tr.online_loss.iter().all(|&l| l == 0));
    }
}
