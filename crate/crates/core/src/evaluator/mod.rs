//! Solver-independent plan audit and KPIs.
//!
//! Every check is plain arithmetic on a [`PlanSolution`]; setup, run-start,
//! ending, simultaneity and drum indicators are recomputed from the press
//! assignment so externally produced plans can be audited as well.

mod file;
mod kpi;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::integrated::tags::*;

pub use file::{load_plan, save_plan, write_violations_csv, PlanFile};
pub use kpi::{
    compare, compute_kpis, compute_kpis_range, read_kpi_csv, summarize_gaps, write_kpi_csv, Gap,
    GapReport, GapStat, KpiReport,
};

/// Default number of violations kept by [`audit`].
pub const DEFAULT_AUDIT_CAP: usize = 1000;

const TOL: f64 = 1e-6;

/// Derived 0/1 indicators of a press assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indicators {
    /// `[item][press][period]`
    pub setup: Vec<Vec<Vec<u8>>>,
    /// `[item][press][period]`
    pub run_start: Vec<Vec<Vec<u8>>>,
    /// `[item][period]`
    pub ending: Vec<Vec<u8>>,
    /// `[item][period]`
    pub simultaneity: Vec<Vec<u8>>,
    /// `[item][drum][period]`, drums needed; zero off the item's drum types.
    pub drum_count: Vec<Vec<Vec<u32>>>,
    /// `[item][drum][period]`, 1 when more than one drum's yield is needed.
    pub drum_on: Vec<Vec<Vec<u8>>>,
}

/// A production plan over the instance horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSolution {
    /// `[item][press][period]`
    pub x: Vec<Vec<Vec<u32>>>,
    /// `[item][press][period]`
    pub y: Vec<Vec<Vec<u8>>>,
    /// `[tire][period]`
    pub inventory: Vec<Vec<u32>>,
    /// `[tire][class][period]`
    pub backorder: Vec<Vec<Vec<u32>>>,
    /// `[tire][period]`
    pub overstock: Vec<Vec<u32>>,
    /// `[tire][period]`
    pub understock: Vec<Vec<u32>>,
    pub indicators: Indicators,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub tag: String,
    pub index: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
    pub total: usize,
}

impl AuditReport {
    pub fn is_feasible(&self) -> bool {
        self.total == 0
    }
}

fn dims<T>(v: &[Vec<T>], outer: usize, inner: usize, what: &str) -> Result<()> {
    if v.len() != outer || v.iter().any(|r| r.len() != inner) {
        return Err(Error::Dimension(format!("{what} is not {outer}x{inner}")));
    }
    Ok(())
}

fn dims3<T>(v: &[Vec<Vec<T>>], a: usize, b: usize, c: usize, what: &str) -> Result<()> {
    if v.len() != a {
        return Err(Error::Dimension(format!(
            "{what} has {} rows, expected {a}",
            v.len()
        )));
    }
    v.iter().try_for_each(|m| dims(m, b, c, what))
}

impl PlanSolution {
    /// Assembles a plan from production and stock, deriving the slacks and
    /// all indicators.
    pub fn from_parts(
        inst: &Instance,
        x: Vec<Vec<Vec<u32>>>,
        y: Vec<Vec<Vec<u8>>>,
        inventory: Vec<Vec<u32>>,
        backorder: Vec<Vec<Vec<u32>>>,
    ) -> Result<Self> {
        let (n, p, t, a, g) = (
            inst.sets.items,
            inst.sets.presses,
            inst.periods(),
            inst.sets.tires,
            inst.sets.classes,
        );
        dims3(&x, n, p, t, "X")?;
        dims3(&y, n, p, t, "Y")?;
        dims(&inventory, a, t, "I")?;
        dims3(&backorder, a, g, t, "B")?;
        let (overstock, understock) = slacks(inst, &inventory);
        let indicators = derive_indicators(inst, &y);
        Ok(Self {
            x,
            y,
            inventory,
            backorder,
            overstock,
            understock,
            indicators,
        })
    }

    /// Plan from press production alone: stock and backorders follow from
    /// [`settle`].
    pub fn from_production(
        inst: &Instance,
        x: Vec<Vec<Vec<u32>>>,
        y: Vec<Vec<Vec<u8>>>,
    ) -> Result<Self> {
        let (n, p, t) = (inst.sets.items, inst.sets.presses, inst.periods());
        dims3(&x, n, p, t, "X")?;
        let produced = tire_output(inst, &x);
        let (inventory, backorder) = settle(inst, &produced);
        Self::from_parts(inst, x, y, inventory, backorder)
    }

    /// Empty plan: no production, stock settled against demand.
    pub fn idle(inst: &Instance) -> Self {
        let (n, p, t) = (inst.sets.items, inst.sets.presses, inst.periods());
        Self::from_production(
            inst,
            vec![vec![vec![0; t]; p]; n],
            vec![vec![vec![0; t]; p]; n],
        )
        .expect("dimensions follow the instance")
    }

    /// Periods `range` of the plan, as a plan of the matching macro slice.
    pub fn slice(&self, range: std::ops::Range<usize>) -> PlanSolution {
        let cut3 = |v: &Vec<Vec<Vec<u32>>>| -> Vec<Vec<Vec<u32>>> {
            v.iter()
                .map(|m| m.iter().map(|r| r[range.clone()].to_vec()).collect())
                .collect()
        };
        let cut3b = |v: &Vec<Vec<Vec<u8>>>| -> Vec<Vec<Vec<u8>>> {
            v.iter()
                .map(|m| m.iter().map(|r| r[range.clone()].to_vec()).collect())
                .collect()
        };
        let cut2 = |v: &Vec<Vec<u32>>| -> Vec<Vec<u32>> {
            v.iter().map(|r| r[range.clone()].to_vec()).collect()
        };
        let cut2b = |v: &Vec<Vec<u8>>| -> Vec<Vec<u8>> {
            v.iter().map(|r| r[range.clone()].to_vec()).collect()
        };
        let ind = &self.indicators;
        PlanSolution {
            x: cut3(&self.x),
            y: cut3b(&self.y),
            inventory: cut2(&self.inventory),
            backorder: cut3(&self.backorder),
            overstock: cut2(&self.overstock),
            understock: cut2(&self.understock),
            indicators: Indicators {
                setup: cut3b(&ind.setup),
                run_start: cut3b(&ind.run_start),
                ending: cut2b(&ind.ending),
                simultaneity: cut2b(&ind.simultaneity),
                drum_count: cut3(&ind.drum_count),
                drum_on: cut3b(&ind.drum_on),
            },
        }
    }
}

/// Output per tire and period, `[tire][period]`.
pub fn tire_output(inst: &Instance, x: &[Vec<Vec<u32>>]) -> Vec<Vec<u64>> {
    let mut out = vec![vec![0u64; inst.periods()]; inst.sets.tires];
    for (i, xi) in x.iter().enumerate() {
        let a = inst.tire_of(i);
        for row in xi {
            for (t, &v) in row.iter().enumerate() {
                out[a][t] += v as u64;
            }
        }
    }
    out
}

/// Allocates output to demand class by class, oldest backorders included;
/// whatever is left is stocked.
pub fn settle(inst: &Instance, produced: &[Vec<u64>]) -> (Vec<Vec<u32>>, Vec<Vec<Vec<u32>>>) {
    let (a_n, g_n, t_n) = (inst.sets.tires, inst.sets.classes, inst.periods());
    let mut inventory = vec![vec![0u32; t_n]; a_n];
    let mut backorder = vec![vec![vec![0u32; t_n]; g_n]; a_n];
    for a in 0..a_n {
        let mut stock = inst.inventory.initial[a] as u64;
        let mut owed: Vec<u64> = inst.demand.initial_backorder[a]
            .iter()
            .map(|&b| b as u64)
            .collect();
        for t in 0..t_n {
            let mut supply = stock + produced[a][t];
            for c in 0..g_n {
                let need = owed[c] + inst.demand.demand[a][c][t] as u64;
                let served = need.min(supply);
                supply -= served;
                owed[c] = need - served;
                backorder[a][c][t] = owed[c] as u32;
            }
            stock = supply;
            inventory[a][t] = stock as u32;
        }
    }
    (inventory, backorder)
}

/// Overstock and understock of each tire and period.
pub fn slacks(inst: &Instance, inventory: &[Vec<u32>]) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let over = inventory
        .iter()
        .enumerate()
        .map(|(a, row)| {
            row.iter()
                .enumerate()
                .map(|(t, &i)| i.saturating_sub(inst.inventory.max[a][t]))
                .collect()
        })
        .collect();
    let under = inventory
        .iter()
        .enumerate()
        .map(|(a, row)| {
            row.iter()
                .enumerate()
                .map(|(t, &i)| inst.inventory.min[a][t].saturating_sub(i))
                .collect()
        })
        .collect();
    (over, under)
}

/// Assignment flag at any period, reading the warm state before the horizon.
fn ran(inst: &Instance, y: &[Vec<Vec<u8>>], i: usize, p: usize, t: isize) -> bool {
    if t >= 0 {
        y[i][p][t as usize] == 1
    } else {
        inst.warm_state.produced(i, p, t)
    }
}

fn presses_running(inst: &Instance, y: &[Vec<Vec<u8>>], i: usize, t: isize) -> u32 {
    (0..inst.sets.presses)
        .filter(|&p| ran(inst, y, i, p, t))
        .count() as u32
}

/// Recomputes setups, run starts, endings, simultaneity and drum use from `y`.
///
/// A run on a press is a setup unless the item ran on the same press within
/// the last `τs` periods, and, when it did not run on the restart reference
/// period, no other item used the press in that window. An ending is
/// counted `τe` periods after the item's last production.
pub fn derive_indicators(inst: &Instance, y: &[Vec<Vec<u8>>]) -> Indicators {
    let (n_n, p_n, t_n, d_n) = (
        inst.sets.items,
        inst.sets.presses,
        inst.periods(),
        inst.sets.drums,
    );
    let tau_s = inst.flexibility.setup_suspension as isize;
    let tau_e = inst.flexibility.ending_suspension as isize;
    let mut setup = vec![vec![vec![0u8; t_n]; p_n]; n_n];
    let mut run_start = vec![vec![vec![0u8; t_n]; p_n]; n_n];
    for i in 0..n_n {
        for p in 0..p_n {
            for t in 0..t_n {
                if y[i][p][t] == 0 {
                    continue;
                }
                let ti = t as isize;
                let reference = inst.restart_reference(ti);
                let continued = ran(inst, y, i, p, reference);
                run_start[i][p][t] = u8::from(!continued);
                let recent = (ti - tau_s..ti).any(|o| ran(inst, y, i, p, o));
                let intruded =
                    (ti - tau_s..ti).any(|o| (0..n_n).any(|j| j != i && ran(inst, y, j, p, o)));
                setup[i][p][t] = u8::from(!recent || (!continued && intruded));
            }
        }
    }
    let mut ending = vec![vec![0u8; t_n]; n_n];
    let mut simultaneity = vec![vec![0u8; t_n]; n_n];
    let mut drum_count = vec![vec![vec![0u32; t_n]; d_n]; n_n];
    let mut drum_on = vec![vec![vec![0u8; t_n]; d_n]; n_n];
    for i in 0..n_n {
        for t in 0..t_n {
            let ti = t as isize;
            let n = presses_running(inst, y, i, ti);
            simultaneity[i][t] = u8::from(n > 0);
            let stopped = presses_running(inst, y, i, ti - tau_e) > 0
                && (ti - tau_e + 1..=ti).all(|o| presses_running(inst, y, i, o) == 0);
            ending[i][t] = u8::from(stopped);
            for d in 0..d_n {
                if let Some(eps) = inst.upstream.drum_yield[i][d] {
                    let count = if n == 0 {
                        0
                    } else if eps == 0 {
                        u32::MAX
                    } else {
                        n.div_ceil(eps)
                    };
                    drum_count[i][d][t] = count;
                    drum_on[i][d][t] = u8::from(count >= 2);
                }
            }
        }
    }
    Indicators {
        setup,
        run_start,
        ending,
        simultaneity,
        drum_count,
        drum_on,
    }
}

struct Sink {
    violations: Vec<Violation>,
    total: usize,
    cap: usize,
}

impl Sink {
    fn push(&mut self, tag: &str, index: &[usize], lhs: f64, rhs: f64) {
        self.total += 1;
        if self.violations.len() < self.cap {
            self.violations.push(Violation {
                tag: tag.to_string(),
                index: index.to_vec(),
                lhs,
                rhs,
            });
        }
    }

    fn le(&mut self, tag: &str, index: &[usize], lhs: f64, rhs: f64) {
        if lhs > rhs + TOL * rhs.abs().max(1.0) {
            self.push(tag, index, lhs, rhs);
        }
    }

    fn ge(&mut self, tag: &str, index: &[usize], lhs: f64, rhs: f64) {
        if lhs < rhs - TOL * rhs.abs().max(1.0) {
            self.push(tag, index, lhs, rhs);
        }
    }

    fn eq(&mut self, tag: &str, index: &[usize], lhs: f64, rhs: f64) {
        if (lhs - rhs).abs() > TOL * rhs.abs().max(1.0) {
            self.push(tag, index, lhs, rhs);
        }
    }
}

/// Every breached constraint of the plan.
pub fn check_feasibility(inst: &Instance, plan: &PlanSolution) -> Result<Vec<Violation>> {
    Ok(audit(inst, plan, usize::MAX)?.violations)
}

/// Audits the plan, keeping at most `cap` violations but counting all.
pub fn audit(inst: &Instance, plan: &PlanSolution, cap: usize) -> Result<AuditReport> {
    let (n_n, p_n, t_n) = (inst.sets.items, inst.sets.presses, inst.periods());
    let (a_n, g_n) = (inst.sets.tires, inst.sets.classes);
    dims3(&plan.x, n_n, p_n, t_n, "X")?;
    dims3(&plan.y, n_n, p_n, t_n, "Y")?;
    dims(&plan.inventory, a_n, t_n, "I")?;
    dims3(&plan.backorder, a_n, g_n, t_n, "B")?;
    dims(&plan.overstock, a_n, t_n, "OS")?;
    dims(&plan.understock, a_n, t_n, "US")?;
    if plan.y.iter().flatten().flatten().any(|&v| v > 1) {
        return Err(Error::Dimension("Y holds a value other than 0 or 1".into()));
    }

    let mut s = Sink {
        violations: Vec::new(),
        total: 0,
        cap,
    };
    let ind = derive_indicators(inst, &plan.y);
    let big_m = inst.big_m();
    let f = &inst.flexibility;
    let out = tire_output(inst, &plan.x);

    for a in 0..a_n {
        for t in 0..t_n {
            let prev_i = if t == 0 {
                inst.inventory.initial[a]
            } else {
                plan.inventory[a][t - 1]
            } as f64;
            let prev_b = |c: usize| {
                (if t == 0 {
                    inst.demand.initial_backorder[a][c]
                } else {
                    plan.backorder[a][c][t - 1]
                }) as f64
            };
            let supply = prev_i + out[a][t] as f64;
            let inv = plan.inventory[a][t] as f64;
            let dsum: f64 = (0..g_n).map(|c| inst.demand.demand[a][c][t] as f64).sum();
            let bdelta: f64 = (0..g_n)
                .map(|c| plan.backorder[a][c][t] as f64 - prev_b(c))
                .sum();
            s.eq(BALANCE, &[a, t], supply - inv + bdelta, dsum);
            s.ge(NO_GHOST_INVENTORY, &[a, t], supply - inv, 0.0);
            for c in 0..g_n.saturating_sub(1) {
                let d = inst.demand.demand[a][c][t] as f64;
                s.ge(
                    CLASS_PRIORITY,
                    &[a, c, t],
                    supply + plan.backorder[a][c][t] as f64 - prev_b(c),
                    d,
                );
            }
            for c in 1..g_n {
                let d = inst.demand.demand[a][c][t] as f64;
                s.le(
                    NO_GHOST_BACKORDER,
                    &[a, c, t],
                    plan.backorder[a][c][t] as f64 - prev_b(c),
                    d,
                );
            }
            s.le(
                OVERSTOCK_DEF,
                &[a, t],
                inv - plan.overstock[a][t] as f64,
                inst.inventory.max[a][t] as f64,
            );
            s.ge(
                UNDERSTOCK_DEF,
                &[a, t],
                inv + plan.understock[a][t] as f64,
                inst.inventory.min[a][t] as f64,
            );
        }
    }

    for i in 0..n_n {
        let a = inst.tire_of(i);
        for p in 0..p_n {
            for t in 0..t_n {
                let x = plan.x[i][p][t] as f64;
                let y = plan.y[i][p][t] as f64;
                s.le(SETUP_LINK_UPPER, &[i, p, t], x, big_m * y);
                s.ge(SETUP_LINK_LOWER, &[i, p, t], x, y);
                s.eq(
                    ALL_OR_NOTHING,
                    &[i, p, t],
                    x,
                    inst.capacity.rate[i][t] as f64 * y,
                );
                if !inst.available(p, t) {
                    s.le(MAINTENANCE, &[i, p, t], x, 0.0);
                }
                if !inst.eligible(i, p) {
                    s.le(ELIGIBILITY, &[a, i, p, t], x, 0.0);
                }
                if !inst.day_off(t as isize) {
                    let started: f64 = inst
                        .min_run_window(t as isize)
                        .map(|o| {
                            if o >= 0 {
                                ind.run_start[i][p][o as usize] as f64
                            } else {
                                crate::integrated::warm_run_start(inst, i, p, o) as u8 as f64
                            }
                        })
                        .sum();
                    s.ge(MIN_RUN_HOLD, &[i, p, t], y, started);
                }
            }
        }
    }
    for &[i, p, t] in &inst.enforcement.production {
        s.ge(ENFORCED_TRIAL, &[i, p, t], plan.y[i][p][t] as f64, 1.0);
    }

    for p in 0..p_n {
        for t in 0..t_n {
            let used: f64 = (0..n_n).map(|i| plan.y[i][p][t] as f64).sum();
            s.le(PRESS_SINGLE_ITEM, &[p, t], used, 1.0);
        }
    }
    for a in 0..a_n {
        for t in 0..t_n {
            let used: f64 = inst
                .items_of_tire(a)
                .map(|i| (0..p_n).map(|p| plan.y[i][p][t] as f64).sum::<f64>())
                .sum();
            s.le(MOLD_CAPACITY, &[a, t], used, inst.capacity.molds[a] as f64);
        }
    }

    let setups_at = |t: usize| -> f64 {
        (0..n_n)
            .map(|i| (0..p_n).map(|p| ind.setup[i][p][t] as f64).sum::<f64>())
            .sum()
    };
    let mass_at = |t: usize| -> f64 {
        (0..n_n)
            .map(|i| {
                inst.weights.unit_weight[i] * (0..p_n).map(|p| plan.x[i][p][t] as f64).sum::<f64>()
            })
            .sum()
    };
    for t in 0..t_n {
        s.le(
            DAILY_SETUP_CAP,
            &[t],
            setups_at(t),
            f.max_setups_per_period as f64,
        );
        let m = mass_at(t);
        let w = &inst.weights;
        s.le(DAILY_TONNAGE_MAX, &[t], m, w.target[t] + w.upper_period[t]);
        s.ge(DAILY_TONNAGE_MIN, &[t], m, w.target[t] - w.lower_period[t]);
        let items: f64 = (0..n_n).map(|i| ind.simultaneity[i][t] as f64).sum();
        s.le(
            SIMULTANEITY_CAP,
            &[t],
            items,
            f.max_simultaneous_items as f64,
        );
    }
    for h in 0..inst.calendar.macro_periods {
        let range = inst.calendar.macro_range(h);
        let setups: f64 = range.clone().map(setups_at).sum();
        s.le(
            WEEKLY_SETUP_CAP,
            &[h],
            setups,
            f.max_setups_per_macro as f64,
        );
        let mass: f64 = range.clone().map(mass_at).sum();
        let target: f64 = range.clone().map(|t| inst.weights.target[t]).sum();
        s.le(
            WEEKLY_TONNAGE_MAX,
            &[h],
            mass,
            target + inst.weights.upper_macro[h],
        );
        s.ge(
            WEEKLY_TONNAGE_MIN,
            &[h],
            mass,
            target - inst.weights.lower_macro[h],
        );
        let endings: f64 = range
            .clone()
            .map(|t| (0..n_n).map(|i| ind.ending[i][t] as f64).sum::<f64>())
            .sum();
        s.le(
            WEEKLY_ENDING_CAP,
            &[h],
            endings,
            f.max_endings_per_macro as f64,
        );
        for w in 0..inst.sets.workshops {
            let load: f64 = inst
                .items_of_workshop(w)
                .map(|i| {
                    let units: f64 = range
                        .clone()
                        .map(|t| (0..p_n).map(|p| plan.x[i][p][t] as f64).sum::<f64>())
                        .sum();
                    units * inst.upstream.unit_time[i]
                })
                .sum();
            s.le(
                WORKSHOP_SATURATION,
                &[w, h],
                load,
                inst.upstream.workshop_capacity[w],
            );
        }
    }

    for i in 0..n_n {
        for d in 0..inst.sets.drums {
            if let Some(eps) = inst.upstream.drum_yield[i][d] {
                for t in 0..t_n {
                    let n = presses_running(inst, &plan.y, i, t as isize) as f64;
                    s.ge(DRUM_COVER, &[i, d, t], 2.0 * eps as f64, n);
                }
            }
        }
    }
    for d in 0..inst.sets.drums {
        for t in 0..t_n {
            let used: f64 = (0..n_n)
                .map(|i| ind.drum_count[i][d][t].min(2) as f64)
                .sum();
            s.le(
                DRUM_CAPACITY,
                &[d, t],
                used,
                inst.upstream.drum_count[d] as f64,
            );
        }
    }
    for &i in &f.special_items {
        for t in 0..t_n {
            let n = presses_running(inst, &plan.y, i, t as isize) as f64;
            s.ge(
                MIN_MOLDS,
                &[i, t],
                n,
                f.min_molds as f64 * ind.simultaneity[i][t] as f64,
            );
        }
    }

    Ok(AuditReport {
        violations: s.violations,
        total: s.total,
    })
}
