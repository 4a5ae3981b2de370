//! Lot sizing, assignment and the week loop against independent checks.

mod common;

use std::time::Duration;

use tireplan::assp::{solve_assp, Threshold};
use tireplan::evaluator::{check_feasibility, PlanSolution};
use tireplan::instance::{generate, SizeSpec};
use tireplan::integrated::solve_integrated;
use tireplan::lssp::{mold_setups, plan_objective, LsspPlan, LsspPool};
use tireplan::matheuristic::{solve_week, RunConfig};
use tireplan::milp::SolverConfig;
use tireplan::{Instance, ObjectiveWeights};

fn pool(inst: &Instance, k: usize) -> Vec<LsspPlan> {
    let w = ObjectiveWeights::calibrated(inst.sets.classes);
    let mut pool = LsspPool::new(inst, &w, SolverConfig::exact(), k).unwrap();
    std::iter::from_fn(|| pool.next_plan().unwrap()).collect()
}

fn instances() -> Vec<Instance> {
    (1..=4)
        .map(|seed| common::small_instance(seed, 6, 3))
        .collect()
}

#[test]
fn lot_sizes_are_whole_molds_within_capacity() {
    for inst in instances() {
        for plan in pool(&inst, 3) {
            for i in 0..inst.sets.items {
                for t in 0..inst.periods() {
                    assert_eq!(plan.x[i][t], inst.capacity.rate[i][t] * plan.molds[i][t]);
                    assert!(plan.molds[i][t] <= inst.capacity.molds[inst.tire_of(i)]);
                    assert_eq!(plan.y[i][t] == 1, plan.molds[i][t] > 0);
                }
            }
            for a in 0..inst.sets.tires {
                for t in 0..inst.periods() {
                    let used: u32 = inst.items_of_tire(a).map(|i| plan.molds[i][t]).sum();
                    assert!(used <= inst.capacity.molds[a]);
                }
            }
        }
    }
}

#[test]
fn mold_setups_are_counted_and_capped() {
    for inst in instances() {
        let f = &inst.flexibility;
        for plan in pool(&inst, 3) {
            let implied = mold_setups(&inst, &plan.molds);
            let mut week = 0;
            for t in 0..inst.periods() {
                let mut day = 0;
                for i in 0..inst.sets.items {
                    assert!(plan.setup[i][t] >= implied[i][t], "item {i} period {t}");
                    day += plan.setup[i][t];
                }
                assert!(day <= f.max_setups_per_period);
                week += day;
            }
            assert!(week <= f.max_setups_per_macro);
        }
    }
}

#[test]
fn pool_entries_are_distinct_and_ordered() {
    for inst in instances() {
        let w = ObjectiveWeights::calibrated(inst.sets.classes);
        let plans = pool(&inst, 4);
        assert!(!plans.is_empty());
        for pair in plans.windows(2) {
            assert!(pair[0].objective <= pair[1].objective + 1e-9);
            assert_ne!(pair[0].y, pair[1].y);
        }
        for plan in &plans {
            assert!((plan_objective(&inst, plan, &w) - plan.objective).abs() < 1e-6);
        }
    }
}

#[test]
fn assignments_make_feasible_plans() {
    for inst in instances() {
        for plan in pool(&inst, 3) {
            let a = solve_assp(&inst, &plan.x, &SolverConfig::exact()).unwrap();
            if a.status.has_solution() {
                let realized = PlanSolution::from_production(&inst, a.x, a.y).unwrap();
                assert!(check_feasibility(&inst, &realized).unwrap().is_empty());
            }
        }
    }
}

/// Output of a feasible schedule can always be placed again without deviation.
#[test]
fn placeable_targets_are_met_exactly() {
    for inst in instances() {
        let w = ObjectiveWeights::calibrated(inst.sets.classes);
        let plan = solve_integrated(&inst, &w, &SolverConfig::exact())
            .unwrap()
            .plan
            .unwrap();
        let target: Vec<Vec<u32>> = plan
            .x
            .iter()
            .map(|rows| {
                (0..inst.periods())
                    .map(|t| rows.iter().map(|r| r[t]).sum())
                    .collect()
            })
            .collect();
        let a = solve_assp(&inst, &target, &SolverConfig::exact()).unwrap();
        assert_eq!(a.deviation, 0.0);
        for i in 0..inst.sets.items {
            for t in 0..inst.periods() {
                let got: u32 = a.x[i].iter().map(|r| r[t]).sum();
                assert_eq!(got, target[i][t]);
            }
        }
        let replaced =
            PlanSolution::from_parts(&inst, a.x, a.y, plan.inventory, plan.backorder).unwrap();
        assert!(check_feasibility(&inst, &replaced).unwrap().is_empty());
    }
}

/// Least per-period deviation any press assignment can reach, ignoring
/// every rule that links periods.
fn deviation_lower_bound(inst: &Instance, target: &[Vec<u32>]) -> f64 {
    let (n_n, p_n) = (inst.sets.items, inst.sets.presses);
    let mut total = 0.0;
    for t in 0..inst.periods() {
        let mut best = f64::INFINITY;
        let mut pick = vec![0usize; p_n];
        loop {
            let mut got = vec![0u32; n_n];
            let mut presses = vec![0u32; inst.sets.tires];
            let mut ok = true;
            for (p, &c) in pick.iter().enumerate() {
                if c > 0 {
                    let i = c - 1;
                    ok &= inst.eligible(i, p) && inst.available(p, t);
                    got[i] += inst.capacity.rate[i][t];
                    presses[inst.tire_of(i)] += 1;
                }
            }
            ok &= (0..inst.sets.tires).all(|a| presses[a] <= inst.capacity.molds[a]);
            if ok {
                let dev: f64 = (0..n_n)
                    .map(|i| (target[i][t] as f64 - got[i] as f64).abs())
                    .sum();
                best = best.min(dev);
            }
            let mut k = 0;
            while k < p_n {
                pick[k] += 1;
                if pick[k] <= n_n {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == p_n {
                break;
            }
        }
        total += best;
    }
    total
}

#[test]
fn assignment_deviation_respects_the_matching_bound() {
    for inst in instances() {
        for plan in pool(&inst, 3) {
            let a = solve_assp(&inst, &plan.x, &SolverConfig::exact()).unwrap();
            if a.status.has_solution() {
                let bound = deviation_lower_bound(&inst, &plan.x);
                assert!(a.deviation >= bound - 1e-9, "{} < {bound}", a.deviation);
            }
        }
    }
}

#[test]
fn unplaceable_mold_costs_one_rate() {
    let mut spec = SizeSpec::small(1, 2, 3);
    spec.eligibility_density = 1.0;
    let mut inst = generate(3, &spec).unwrap();
    inst.capacity.eligibility = vec![vec![1, 0]];
    inst.capacity.molds = vec![2];
    inst.capacity.maintenance = vec![vec![1; 3]; 2];
    let target: Vec<Vec<u32>> = vec![inst.capacity.rate[0].iter().map(|r| 2 * r).collect()];
    let a = solve_assp(&inst, &target, &SolverConfig::exact()).unwrap();
    let rates: u32 = inst.capacity.rate[0].iter().sum();
    assert_eq!(a.deviation, rates as f64);
    assert_eq!(deviation_lower_bound(&inst, &target), rates as f64);
}

#[test]
fn week_keeps_the_first_accepted_entry() {
    let config = RunConfig {
        lssp_time_limit: Duration::from_secs(30),
        assp_time_limit: Duration::from_secs(30),
        threshold: Threshold::default(),
        ..RunConfig::default()
    };
    for inst in instances() {
        let w = ObjectiveWeights::calibrated(inst.sets.classes);
        let slice = inst.macro_slice(0, &inst.initial_state());
        let week = solve_week(&slice, 0, &w, &config).unwrap();
        let n = week.entries.len();
        assert!(n <= config.pool_size && week.rank < n);
        for pair in week.entries.windows(2) {
            assert!(pair[0].lssp_objective <= pair[1].lssp_objective + 1e-9);
        }
        let accepted = |e: &tireplan::matheuristic::EntryRecord| {
            e.assp_status.has_solution() && e.deviation <= config.threshold.absolute
        };
        if week.degraded {
            assert!(week.entries.iter().all(|e| !accepted(e)));
            let least = week
                .entries
                .iter()
                .map(|e| e.deviation)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(week.deviation, least);
        } else {
            assert_eq!(week.rank, n - 1);
            assert!(accepted(&week.entries[week.rank]));
            assert!(week.entries[..week.rank].iter().all(|e| !accepted(e)));
            assert!(check_feasibility(&slice, &week.plan).unwrap().is_empty());
        }
    }
}
