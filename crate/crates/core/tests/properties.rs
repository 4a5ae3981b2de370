mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::oracle;
use tireplan::evaluator::{
    compare, compute_kpis, compute_kpis_range, settle, tire_output, PlanSolution,
};
use tireplan::instance::{generate, SizeSpec};
use tireplan::integrated::solve_integrated;
use tireplan::milp::SolverConfig;
use tireplan::scenarios::restrict_eligibility;
use tireplan::taguchi::{rank_by_company_rules, sn_ratio};
use tireplan::{Instance, KpiReport, ObjectiveWeights};

fn spec_strategy() -> impl Strategy<Value = SizeSpec> {
    (
        1usize..6,
        1usize..5,
        2usize..8,
        1usize..3,
        1usize..4,
        0.3f64..1.5,
        any::<bool>(),
    )
        .prop_map(|(items, presses, periods, weeks, classes, load, warm)| {
            let mut s = SizeSpec::small(items, presses, periods);
            s.tires = items.div_ceil(2);
            s.macro_periods = weeks;
            s.classes = classes;
            s.load = load;
            s.warm_start = warm;
            s
        })
}

/// Every press-period idles or runs a random eligible item at full rate.
fn random_plan(inst: &Instance, seed: u64) -> PlanSolution {
    let (n_n, p_n, t_n) = (inst.sets.items, inst.sets.presses, inst.periods());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![vec![vec![0u32; t_n]; p_n]; n_n];
    let mut y = vec![vec![vec![0u8; t_n]; p_n]; n_n];
    for p in 0..p_n {
        for t in 0..t_n {
            let options: Vec<usize> = (0..n_n)
                .filter(|&i| inst.eligible(i, p) && inst.available(p, t))
                .collect();
            if !options.is_empty() && rng.gen_bool(0.6) {
                let i = options[rng.gen_range(0..options.len())];
                y[i][p][t] = 1;
                x[i][p][t] = inst.capacity.rate[i][t];
            }
        }
    }
    PlanSolution::from_production(inst, x, y).unwrap()
}

fn report(values: &[f64]) -> KpiReport {
    KpiReport {
        classes: values[..2].to_vec(),
        bt: values[2],
        os: values[3],
        us: values[4],
        of: values[5],
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generation_is_deterministic_and_valid(seed in any::<u64>(), spec in spec_strategy()) {
        let a = generate(seed, &spec);
        let b = generate(seed, &spec);
        prop_assert_eq!(a.as_ref().ok(), b.as_ref().ok());
        prop_assume!(a.is_ok());
        let a = a.unwrap();
        prop_assert!(a.validate().is_empty(), "{:?}", a.validate());
        prop_assert_eq!(a.periods(), spec.periods_per_macro * spec.macro_periods);
    }

    #[test]
    fn instances_survive_json(seed in any::<u64>(), spec in spec_strategy()) {
        let a = generate(seed, &spec);
        prop_assume!(a.is_ok());
        let a = a.unwrap();
        prop_assert_eq!(Instance::from_json(&a.to_json().unwrap()).unwrap(), a);
    }

    #[test]
    fn scaling_responses_shifts_the_ratio(z in prop::collection::vec(0.01f64..1e4, 1..12), k in 0.01f64..100.0) {
        let scaled: Vec<f64> = z.iter().map(|v| v * k).collect();
        let shift = sn_ratio(&scaled).unwrap() - sn_ratio(&z).unwrap();
        prop_assert!((shift + 20.0 * k.log10()).abs() < 1e-9);
    }

    #[test]
    fn ranking_is_a_sorted_stable_permutation(tuples in prop::collection::vec(prop::array::uniform5(0u8..4), 0..20)) {
        let tuples: Vec<[f64; 5]> = tuples.iter().map(|t| t.map(f64::from)).collect();
        let order = rank_by_company_rules(&tuples);
        let mut seen = order.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..tuples.len()).collect::<Vec<_>>());
        for w in order.windows(2) {
            let (a, b) = (tuples[w[0]], tuples[w[1]]);
            prop_assert!(a < b || (a == b && w[0] < w[1]));
        }
    }

    #[test]
    fn gaps_are_relative_changes(a in prop::collection::vec(0.0f64..1e3, 6), b in prop::collection::vec(0.0f64..1e3, 6)) {
        let gaps = compare(&report(&a), &report(&b)).unwrap();
        prop_assert_eq!(gaps.gaps.len(), 6);
        for (g, (x, y)) in gaps.gaps.iter().zip(a.iter().zip(&b)) {
            match g.percent {
                None => prop_assert_eq!(*x, 0.0),
                Some(p) => prop_assert!((p * x - (y - x) * 100.0).abs() <= 1e-9 * (1.0 + y.abs() * 100.0)),
            }
        }
        let same = compare(&report(&a), &report(&a)).unwrap();
        prop_assert!(same.gaps.iter().all(|g| g.percent.is_none_or(|p| p == 0.0)));
    }

    #[test]
    fn weekly_reports_add_up(seed in any::<u64>(), spec in spec_strategy()) {
        let inst = generate(seed, &spec);
        prop_assume!(inst.is_ok());
        let inst = inst.unwrap();
        let w = ObjectiveWeights::calibrated(inst.sets.classes);
        let plan = random_plan(&inst, seed);
        let full = compute_kpis(&inst, &plan, &w);
        let mut sum = vec![0.0; full.values().len()];
        for h in 0..inst.calendar.macro_periods {
            let part = compute_kpis_range(&inst, &plan, &w, inst.calendar.macro_range(h));
            for (s, v) in sum.iter_mut().zip(part.values()) {
                *s += v;
            }
        }
        for (s, v) in sum.iter().zip(full.values()) {
            prop_assert!((s - v).abs() <= 1e-9 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn settled_stock_balances(seed in any::<u64>(), spec in spec_strategy()) {
        let inst = generate(seed, &spec);
        prop_assume!(inst.is_ok());
        let inst = inst.unwrap();
        let plan = random_plan(&inst, seed ^ 1);
        let output = tire_output(&inst, &plan.x);
        let (inventory, backorder) = settle(&inst, &output);
        for a in 0..inst.sets.tires {
            let mut net = inst.inventory.initial[a] as i64
                - inst.demand.initial_backorder[a].iter().map(|&b| b as i64).sum::<i64>();
            for t in 0..inst.periods() {
                net += output[a][t] as i64;
                net -= (0..inst.sets.classes).map(|c| inst.demand.demand[a][c][t] as i64).sum::<i64>();
                let owed: i64 = (0..inst.sets.classes).map(|c| backorder[a][c][t] as i64).sum();
                prop_assert_eq!(inventory[a][t] as i64 - owed, net);
                prop_assert!(inventory[a][t] == 0 || owed == 0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn scaling_weights_scales_the_optimum(seed in 0u64..1000, k in 0.5f64..8.0) {
        let inst = common::tiny_instance(seed);
        let w = ObjectiveWeights::calibrated(inst.sets.classes);
        let scaled = ObjectiveWeights {
            classes: w.classes.iter().map(|c| c * k).collect(),
            overstock: w.overstock * k,
            understock: w.understock * k,
        };
        let a = solve_integrated(&inst, &w, &SolverConfig::exact()).unwrap();
        let b = solve_integrated(&inst, &scaled, &SolverConfig::exact()).unwrap();
        let (oa, ob) = (a.objective.unwrap(), b.objective.unwrap());
        prop_assert!((ob - k * oa).abs() <= 1e-6 * (1.0 + ob.abs()), "{} vs {}", ob, k * oa);
        let of = compute_kpis(&inst, &b.plan.unwrap(), &w).of;
        prop_assert!((of - oa).abs() <= 1e-6 * (1.0 + oa.abs()));
    }

    #[test]
    fn restricting_presses_never_helps(seed in 0u64..1000, pick in any::<u64>()) {
        let inst = common::tiny_instance(seed);
        let w = ObjectiveWeights::calibrated(inst.sets.classes);
        let mut rng = ChaCha8Rng::seed_from_u64(pick);
        let item = rng.gen_range(0..inst.sets.items);
        let press = rng.gen_range(0..inst.sets.presses);
        let Ok(narrow) = restrict_eligibility(&inst, &[item], &[press]) else {
            return Ok(());
        };
        let wide = oracle::optimum(&inst, &w);
        let tight = oracle::optimum(&narrow, &w);
        match (wide, tight) {
            (Some(a), Some(b)) => prop_assert!(b >= a - 1e-9),
            (None, Some(_)) => prop_assert!(false, "restriction made an infeasible instance feasible"),
            _ => {}
        }
    }
}
