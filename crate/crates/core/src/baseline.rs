//! Greedy earliest-due-date planner used as a reference point.
//!
//! Period by period, tires are ranked by the first period in which the
//! current plan leaves a backorder (most urgent class first). A press run
//! is added when every upper-limit rule of the plan still holds; runs are
//! extended before new ones are started, and a new run covers the minimum
//! run length at once.

use crate::error::Result;
use crate::evaluator::{audit, settle, tire_output, PlanSolution};
use crate::instance::Instance;
use crate::integrated::tags::*;

/// Families that only more production can satisfy; a partial plan may
/// breach them.
const LOWER_LIMITS: &[&str] = &[
    DAILY_TONNAGE_MIN,
    WEEKLY_TONNAGE_MIN,
    MIN_MOLDS,
    ENFORCED_TRIAL,
];

struct Draft<'a> {
    inst: &'a Instance,
    x: Vec<Vec<Vec<u32>>>,
    y: Vec<Vec<Vec<u8>>>,
}

impl Draft<'_> {
    fn plan(&self) -> PlanSolution {
        PlanSolution::from_production(self.inst, self.x.clone(), self.y.clone())
            .expect("draft dimensions")
    }

    fn hard_violations(&self) -> usize {
        let report = audit(self.inst, &self.plan(), usize::MAX).expect("draft dimensions");
        report
            .violations
            .iter()
            .filter(|v| !LOWER_LIMITS.contains(&v.tag.as_str()))
            .count()
    }

    fn set(&mut self, i: usize, p: usize, periods: &[usize], on: bool) {
        for &t in periods {
            self.y[i][p][t] = on as u8;
            self.x[i][p][t] = if on { self.inst.capacity.rate[i][t] } else { 0 };
        }
    }

    /// Adds the runs if no upper-limit rule breaks.
    fn try_add(&mut self, i: usize, p: usize, periods: &[usize], baseline: usize) -> bool {
        if periods
            .iter()
            .any(|&t| (0..self.inst.sets.items).any(|j| self.y[j][p][t] == 1))
        {
            return false;
        }
        self.set(i, p, periods, true);
        if self.hard_violations() > baseline {
            self.set(i, p, periods, false);
            return false;
        }
        true
    }

    /// First period from `from` on with a projected backorder, and its most
    /// urgent class.
    fn urgency(&self, from: usize) -> Vec<Option<(usize, usize)>> {
        let (_, backorder) = settle(self.inst, &tire_output(self.inst, &self.x));
        backorder
            .iter()
            .map(|classes| {
                (from..self.inst.periods()).find_map(|t| {
                    (0..classes.len())
                        .find(|&c| classes[c][t] > 0)
                        .map(|c| (t, c))
                })
            })
            .collect()
    }
}

pub fn greedy_edd(inst: &Instance) -> Result<PlanSolution> {
    inst.ensure_valid()?;
    let (n_n, p_n, t_n) = (inst.sets.items, inst.sets.presses, inst.periods());
    let mut d = Draft {
        inst,
        x: vec![vec![vec![0; t_n]; p_n]; n_n],
        y: vec![vec![vec![0; t_n]; p_n]; n_n],
    };
    for &[i, p, t] in &inst.enforcement.production {
        d.set(i, p, &[t], true);
    }
    let mut baseline = d.hard_violations();
    let tm = inst.flexibility.min_run as usize;

    for t in 0..t_n {
        loop {
            let urgency = d.urgency(t);
            let mut order: Vec<(usize, (usize, usize))> = urgency
                .iter()
                .enumerate()
                .filter_map(|(a, u)| u.map(|u| (a, u)))
                .collect();
            order.sort_by_key(|&(a, (due, class))| (due, class, a));
            let mut added = false;
            'tires: for (a, _) in order {
                for i in inst.items_of_tire(a) {
                    let mut presses: Vec<usize> = (0..p_n)
                        .filter(|&p| {
                            inst.eligible(i, p)
                                && inst.available(p, t)
                                && inst.capacity.rate[i][t] > 0
                        })
                        .collect();
                    // presses that ran the item just before come first
                    presses.sort_by_key(|&p| (t == 0 || d.y[i][p][t - 1] == 0, p));
                    for p in presses {
                        let continuing = t > 0 && d.y[i][p][t - 1] == 1;
                        let block: Vec<usize> = if continuing {
                            vec![t]
                        } else {
                            (t..(t + tm + 1).min(t_n)).collect()
                        };
                        if d.try_add(i, p, &block, baseline) {
                            added = true;
                            break 'tires;
                        }
                    }
                }
            }
            if !added {
                break;
            }
            baseline = d.hard_violations();
        }
    }
    Ok(d.plan())
}
