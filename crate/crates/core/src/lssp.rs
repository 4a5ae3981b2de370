//! The lot-sizing sub-problem: press-free lot sizing on mold counts `ν`.
//!
//! Quantities are whole multiples of the one-mold rate, mold setups are
//! counted on increases of `ν`, and the press assignment is left to the
//! assignment stage. Alternatives for that stage come from a solution pool
//! grown lazily with no-good cuts on the item/period pattern.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::slacks;
use crate::instance::Instance;
use crate::integrated::tags::*;
use crate::integrated::{add_inventory_block, compute_normalizers, ObjectiveWeights};
use crate::milp::{self, LinExpr, MilpModel, RawSolution, Sense, SolverConfig, VarId};

pub mod tags {
    pub const MOLD_LINK_UPPER: &str = "mold_link_upper";
    pub const MOLD_LINK_LOWER: &str = "mold_link_lower";
    pub const MOLD_RATE: &str = "mold_rate";
    pub const MOLD_SETUP: &str = "mold_setup";
    pub const MOLD_SETUP_DAYOFF: &str = "mold_setup_dayoff";
    pub const ENFORCED_MOLDS: &str = "enforced_molds";
    pub const PRESS_COUNT: &str = "press_count";
    pub const ELIGIBLE_PRESS_COUNT: &str = "eligible_press_count";
    pub const POOL_EXCLUSION: &str = "pool_exclusion";
}

use self::tags::*;

/// Default number of pool entries tried per week.
pub const DEFAULT_POOL_SIZE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LsspOptions {
    /// Add press-count and minimum-mold cuts that any press assignment
    /// satisfies. They remove lot sizes no assignment can realize.
    pub press_cuts: bool,
}

impl Default for LsspOptions {
    fn default() -> Self {
        Self { press_cuts: true }
    }
}

/// A decoded lot-sizing solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsspPlan {
    /// `[item][period]`
    pub x: Vec<Vec<u32>>,
    /// `[item][period]`, molds in use.
    pub molds: Vec<Vec<u32>>,
    /// `[item][period]`
    pub y: Vec<Vec<u8>>,
    /// `[item][period]`, mold setups.
    pub setup: Vec<Vec<u32>>,
    /// `[item][period]`
    pub ending: Vec<Vec<u8>>,
    /// `[tire][period]`
    pub inventory: Vec<Vec<u32>>,
    /// `[tire][class][period]`
    pub backorder: Vec<Vec<Vec<u32>>>,
    /// `[tire][period]`
    pub overstock: Vec<Vec<u32>>,
    /// `[tire][period]`
    pub understock: Vec<Vec<u32>>,
    /// Normalized objective of the plan.
    pub objective: f64,
    /// Backorders per class summed over tires and periods.
    pub class_backorders: Vec<f64>,
    pub total_overstock: f64,
    pub total_understock: f64,
}

/// Molds of an item at any period, reading the warm state before the horizon.
fn molds_at(inst: &Instance, nu: &[Vec<VarId>], i: usize, t: isize, e: &mut LinExpr, k: f64) {
    if t >= 0 {
        e.add(nu[i][t as usize], k);
    } else {
        e.add_constant(k * inst.warm_state.molds_at(i, t) as f64);
    }
}

fn item_ran(inst: &Instance, y: &[Vec<VarId>], i: usize, t: isize, e: &mut LinExpr, k: f64) {
    if t >= 0 {
        e.add(y[i][t as usize], k);
    } else if inst.warm_state.molds_at(i, t) > 0 {
        e.add_constant(k);
    }
}

/// Available presses eligible for tire `a` at `t`, or all available presses.
fn press_supply(inst: &Instance, a: Option<usize>, t: usize) -> usize {
    (0..inst.sets.presses)
        .filter(|&p| {
            inst.available(p, t) && a.is_none_or(|a| inst.capacity.eligibility[a][p] == 1)
        })
        .count()
}

pub fn build_lssp(inst: &Instance, weights: &ObjectiveWeights) -> Result<MilpModel> {
    build_lssp_with(inst, weights, LsspOptions::default())
}

pub fn build_lssp_with(
    inst: &Instance,
    weights: &ObjectiveWeights,
    opts: LsspOptions,
) -> Result<MilpModel> {
    inst.ensure_valid()?;
    weights.check(inst.sets.classes)?;
    let (n_n, t_n) = (inst.sets.items, inst.periods());
    let f = &inst.flexibility;
    let inf = f64::INFINITY;
    let big_m = inst.big_m();
    let mut model = MilpModel::new(format!("lssp_{}", inst.meta.name));

    let cap = |i: usize| inst.capacity.molds[inst.tire_of(i)] as f64;
    let x: Vec<Vec<VarId>> = (0..n_n)
        .map(|i| {
            (0..t_n)
                .map(|t| model.integer(format!("X_{i}_{t}"), 0.0, inf))
                .collect()
        })
        .collect();
    let nu: Vec<Vec<VarId>> = (0..n_n)
        .map(|i| {
            (0..t_n)
                .map(|t| model.integer(format!("nu_{i}_{t}"), 0.0, cap(i)))
                .collect()
        })
        .collect();
    let y: Vec<Vec<VarId>> = (0..n_n)
        .map(|i| {
            (0..t_n)
                .map(|t| model.binary(format!("Y_{i}_{t}")))
                .collect()
        })
        .collect();
    let s: Vec<Vec<VarId>> = (0..n_n)
        .map(|i| {
            (0..t_n)
                .map(|t| model.integer(format!("s_{i}_{t}"), 0.0, cap(i)))
                .collect()
        })
        .collect();
    let e: Vec<Vec<VarId>> = (0..n_n)
        .map(|i| {
            (0..t_n)
                .map(|t| model.binary(format!("e_{i}_{t}")))
                .collect()
        })
        .collect();
    let mut drums = Vec::new();
    for i in 0..n_n {
        for d in 0..inst.sets.drums {
            if let Some(eps) = inst.upstream.drum_yield[i][d] {
                let on: Vec<VarId> = (0..t_n)
                    .map(|t| model.binary(format!("drumon_{i}_{d}_{t}")))
                    .collect();
                let count: Vec<VarId> = (0..t_n)
                    .map(|t| model.integer(format!("drums_{i}_{d}_{t}"), 0.0, inf))
                    .collect();
                drums.push((i, d, eps as f64, on, count));
            }
        }
    }

    let tau_e = f.ending_suspension as isize;
    for i in 0..n_n {
        let link = big_m.max(cap(i));
        for t in 0..t_n {
            let ti = t as isize;
            let idx = format!("{i}_{t}");
            let mut r = LinExpr::var(nu[i][t], 1.0);
            r.add(y[i][t], -link);
            model.add_row(
                MOLD_LINK_UPPER,
                format!("mold_link_upper_{idx}"),
                r,
                Sense::Le,
                0.0,
            );
            let mut r = LinExpr::var(nu[i][t], 1.0);
            r.add(y[i][t], -1.0);
            model.add_row(
                MOLD_LINK_LOWER,
                format!("mold_link_lower_{idx}"),
                r,
                Sense::Ge,
                0.0,
            );
            let mut r = LinExpr::var(x[i][t], 1.0);
            r.add(nu[i][t], -(inst.capacity.rate[i][t] as f64));
            model.add_row(MOLD_RATE, format!("mold_rate_{idx}"), r, Sense::Eq, 0.0);

            let tag = if inst.day_off(ti - 1) {
                MOLD_SETUP_DAYOFF
            } else {
                MOLD_SETUP
            };
            let mut r = LinExpr::var(s[i][t], 1.0);
            r.add(nu[i][t], -1.0);
            molds_at(inst, &nu, i, inst.restart_reference(ti), &mut r, 1.0);
            model.add_row(tag, format!("{tag}_{idx}"), r, Sense::Ge, 0.0);

            let mut r = LinExpr::var(e[i][t], 1.0);
            item_ran(inst, &y, i, ti - tau_e, &mut r, -1.0);
            for o in ti - tau_e + 1..=ti {
                item_ran(inst, &y, i, o, &mut r, 1.0);
            }
            model.add_row(
                CAMPAIGN_ENDING,
                format!("campaign_ending_{idx}"),
                r,
                Sense::Ge,
                0.0,
            );

            let enforced = inst.enforcement.molds[i][t] as f64;
            model.add_row(
                ENFORCED_MOLDS,
                format!("enforced_molds_{idx}"),
                LinExpr::var(nu[i][t], 1.0),
                Sense::Ge,
                enforced,
            );
        }
    }
    for a in 0..inst.sets.tires {
        for t in 0..t_n {
            let mut r = LinExpr::new();
            for i in inst.items_of_tire(a) {
                r.add(nu[i][t], 1.0);
            }
            let k = inst.capacity.molds[a] as f64;
            model.add_row(
                MOLD_CAPACITY,
                format!("mold_capacity_{a}_{t}"),
                r.clone(),
                Sense::Le,
                k,
            );
            if opts.press_cuts {
                let supply = press_supply(inst, Some(a), t) as f64;
                model.add_row(
                    ELIGIBLE_PRESS_COUNT,
                    format!("eligible_press_count_{a}_{t}"),
                    r,
                    Sense::Le,
                    supply,
                );
            }
        }
    }

    let sum_over_items = |vars: &[Vec<VarId>], t: usize, coef: &dyn Fn(usize) -> f64| -> LinExpr {
        let mut r = LinExpr::new();
        for i in 0..n_n {
            r.add(vars[i][t], coef(i));
        }
        r
    };
    let one = |_: usize| 1.0;
    let mass = |i: usize| inst.weights.unit_weight[i];
    for t in 0..t_n {
        model.add_row(
            DAILY_SETUP_CAP,
            format!("daily_setup_cap_{t}"),
            sum_over_items(&s, t, &one),
            Sense::Le,
            f.max_setups_per_period as f64,
        );
        let w = &inst.weights;
        let r = sum_over_items(&x, t, &mass);
        model.add_row(
            DAILY_TONNAGE_MAX,
            format!("daily_tonnage_max_{t}"),
            r.clone(),
            Sense::Le,
            w.target[t] + w.upper_period[t],
        );
        model.add_row(
            DAILY_TONNAGE_MIN,
            format!("daily_tonnage_min_{t}"),
            r,
            Sense::Ge,
            w.target[t] - w.lower_period[t],
        );
        model.add_row(
            SIMULTANEITY_CAP,
            format!("simultaneity_cap_{t}"),
            sum_over_items(&y, t, &one),
            Sense::Le,
            f.max_simultaneous_items as f64,
        );
        if opts.press_cuts {
            let supply = press_supply(inst, None, t) as f64;
            model.add_row(
                PRESS_COUNT,
                format!("press_count_{t}"),
                sum_over_items(&nu, t, &one),
                Sense::Le,
                supply,
            );
        }
    }
    for h in 0..inst.calendar.macro_periods {
        let range = inst.calendar.macro_range(h);
        let mut setups = LinExpr::new();
        let mut tonnage = LinExpr::new();
        let mut endings = LinExpr::new();
        for t in range.clone() {
            setups.extend(&sum_over_items(&s, t, &one), 1.0);
            tonnage.extend(&sum_over_items(&x, t, &mass), 1.0);
            endings.extend(&sum_over_items(&e, t, &one), 1.0);
        }
        let target: f64 = range.clone().map(|t| inst.weights.target[t]).sum();
        model.add_row(
            WEEKLY_SETUP_CAP,
            format!("weekly_setup_cap_{h}"),
            setups,
            Sense::Le,
            f.max_setups_per_macro as f64,
        );
        model.add_row(
            WEEKLY_TONNAGE_MAX,
            format!("weekly_tonnage_max_{h}"),
            tonnage.clone(),
            Sense::Le,
            target + inst.weights.upper_macro[h],
        );
        model.add_row(
            WEEKLY_TONNAGE_MIN,
            format!("weekly_tonnage_min_{h}"),
            tonnage,
            Sense::Ge,
            target - inst.weights.lower_macro[h],
        );
        model.add_row(
            WEEKLY_ENDING_CAP,
            format!("weekly_ending_cap_{h}"),
            endings,
            Sense::Le,
            f.max_endings_per_macro as f64,
        );
        for w in 0..inst.sets.workshops {
            let mut r = LinExpr::new();
            for i in inst.items_of_workshop(w) {
                for t in range.clone() {
                    r.add(x[i][t], inst.upstream.unit_time[i]);
                }
            }
            model.add_row(
                WORKSHOP_SATURATION,
                format!("workshop_saturation_{w}_{h}"),
                r,
                Sense::Le,
                inst.upstream.workshop_capacity[w],
            );
        }
    }

    for d in 0..inst.sets.drums {
        for t in 0..t_n {
            let mut r = LinExpr::new();
            for (_, dd, _, _, count) in &drums {
                if *dd == d {
                    r.add(count[t], 1.0);
                }
            }
            model.add_row(
                DRUM_CAPACITY,
                format!("drum_capacity_{d}_{t}"),
                r,
                Sense::Le,
                inst.upstream.drum_count[d] as f64,
            );
        }
    }
    let md = big_m.max(2.0);
    for (i, d, eps, on, count) in &drums {
        let (i, d, eps) = (*i, *d, *eps);
        let md = md.max(cap(i));
        for t in 0..t_n {
            let idx = format!("{i}_{d}_{t}");
            let pair = |kc: f64, ko: f64| {
                let mut r = LinExpr::var(count[t], kc);
                r.add(on[t], ko);
                r
            };
            model.add_row(
                DRUM_LEVEL_TWO_LO,
                format!("drum_level_two_lo_{idx}"),
                pair(1.0, -md),
                Sense::Ge,
                2.0 - md,
            );
            model.add_row(
                DRUM_LEVEL_TWO_HI,
                format!("drum_level_two_hi_{idx}"),
                pair(1.0, md),
                Sense::Le,
                2.0 + md,
            );
            model.add_row(
                DRUM_LEVEL_LOW_LO,
                format!("drum_level_low_lo_{idx}"),
                pair(1.0, md),
                Sense::Ge,
                0.0,
            );
            model.add_row(
                DRUM_LEVEL_LOW_HI,
                format!("drum_level_low_hi_{idx}"),
                pair(1.0, -md),
                Sense::Le,
                1.0,
            );
            // scaled by the yield ε
            let mut r = LinExpr::var(count[t], eps);
            r.add(nu[i][t], -1.0);
            model.add_row(DRUM_COVER, format!("drum_cover_{idx}"), r, Sense::Ge, 0.0);
            let mut r = LinExpr::var(nu[i][t], 1.0);
            r.add(on[t], -eps * md);
            model.add_row(
                DRUM_SWITCH_ON,
                format!("drum_switch_on_{idx}"),
                r.clone(),
                Sense::Ge,
                eps - eps * md,
            );
            model.add_row(
                DRUM_SWITCH_OFF,
                format!("drum_switch_off_{idx}"),
                r,
                Sense::Le,
                eps,
            );
        }
    }

    if opts.press_cuts {
        let molds = f.min_molds as f64;
        for &i in &f.special_items {
            for t in 0..t_n {
                let mut r = LinExpr::var(nu[i][t], 1.0);
                r.add(y[i][t], -molds);
                model.add_row(MIN_MOLDS, format!("min_molds_{i}_{t}"), r, Sense::Ge, 0.0);
            }
        }
    }

    add_inventory_block(&mut model, inst, weights, |a, t| {
        let mut r = LinExpr::new();
        for i in inst.items_of_tire(a) {
            r.add(x[i][t], 1.0);
        }
        r
    });
    Ok(model)
}

fn read(model: &MilpModel, raw: &RawSolution, name: &str) -> Result<u32> {
    let id = model
        .var_by_name(name)
        .ok_or_else(|| Error::Decode(format!("{name} is not a model variable")))?;
    let v = raw.int_value(model, id)?;
    u32::try_from(v).map_err(|_| Error::Decode(format!("{name} = {v} is negative")))
}

/// Reads a solved lot-sizing model. Slacks and setups are recomputed from
/// stock and mold counts; `X = R·ν` must hold exactly.
pub fn decode_lssp(inst: &Instance, model: &MilpModel, raw: &RawSolution) -> Result<LsspPlan> {
    raw.require_solution()?;
    let (n_n, t_n, a_n, g_n) = (
        inst.sets.items,
        inst.periods(),
        inst.sets.tires,
        inst.sets.classes,
    );
    let grid = |prefix: &str| -> Result<Vec<Vec<u32>>> {
        (0..n_n)
            .map(|i| {
                (0..t_n)
                    .map(|t| read(model, raw, &format!("{prefix}_{i}_{t}")))
                    .collect()
            })
            .collect()
    };
    let x = grid("X")?;
    let molds = grid("nu")?;
    let y: Vec<Vec<u8>> = grid("Y")?
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.min(1) as u8).collect())
        .collect();
    let ending: Vec<Vec<u8>> = grid("e")?
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.min(1) as u8).collect())
        .collect();
    for i in 0..n_n {
        for t in 0..t_n {
            if x[i][t] != inst.capacity.rate[i][t] * molds[i][t] {
                return Err(Error::Decode(format!(
                    "X_{i}_{t} = {} is not {} molds at rate {}",
                    x[i][t], molds[i][t], inst.capacity.rate[i][t]
                )));
            }
        }
    }
    let setup = mold_setups(inst, &molds);
    let inventory: Vec<Vec<u32>> = (0..a_n)
        .map(|a| {
            (0..t_n)
                .map(|t| read(model, raw, &format!("I_{a}_{t}")))
                .collect()
        })
        .collect::<Result<_>>()?;
    let backorder: Vec<Vec<Vec<u32>>> = (0..a_n)
        .map(|a| {
            (0..g_n)
                .map(|c| {
                    (0..t_n)
                        .map(|t| read(model, raw, &format!("B_{a}_{c}_{t}")))
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let (overstock, understock) = slacks(inst, &inventory);

    let class_backorders: Vec<f64> = (0..g_n)
        .map(|c| {
            backorder
                .iter()
                .map(|b| b[c].iter().map(|&v| v as f64).sum::<f64>())
                .sum()
        })
        .collect();
    let total = |v: &Vec<Vec<u32>>| v.iter().flatten().map(|&k| k as f64).sum::<f64>();
    let total_overstock = total(&overstock);
    let total_understock = total(&understock);
    Ok(LsspPlan {
        x,
        molds,
        y,
        setup,
        ending,
        inventory,
        backorder,
        overstock,
        understock,
        objective: raw.objective.unwrap_or(f64::NAN),
        class_backorders,
        total_overstock,
        total_understock,
    })
}

/// Setups implied by mold counts: increases over the restart reference period.
pub fn mold_setups(inst: &Instance, molds: &[Vec<u32>]) -> Vec<Vec<u32>> {
    molds
        .iter()
        .enumerate()
        .map(|(i, row)| {
            (0..row.len())
                .map(|t| {
                    let r = inst.restart_reference(t as isize);
                    let prev = if r >= 0 {
                        row[r as usize]
                    } else {
                        inst.warm_state.molds_at(i, r)
                    };
                    row[t].saturating_sub(prev)
                })
                .collect()
        })
        .collect()
}

/// Orders raw solutions of one lot-sizing model into plans, best first.
/// Infeasible entries are skipped.
pub fn extract_pool(
    inst: &Instance,
    model: &MilpModel,
    raw_pool: &[RawSolution],
) -> Result<Vec<LsspPlan>> {
    let mut plans = raw_pool
        .iter()
        .filter(|r| r.status.has_solution())
        .map(|r| decode_lssp(inst, model, r))
        .collect::<Result<Vec<_>>>()?;
    plans.sort_by(|a, b| a.objective.total_cmp(&b.objective));
    Ok(plans)
}

/// Lot-sizing solution pool grown on demand: every call to [`next`]
/// excludes the previous entries' item/period patterns and re-solves.
///
/// [`next`]: LsspPool::next
pub struct LsspPool<'a> {
    inst: &'a Instance,
    model: MilpModel,
    config: SolverConfig,
    limit: usize,
    produced: usize,
    exhausted: bool,
    /// Status of every solve so far.
    pub statuses: Vec<milp::SolveStatus>,
    pub solve_times: Vec<std::time::Duration>,
}

impl<'a> LsspPool<'a> {
    pub fn new(
        inst: &'a Instance,
        weights: &ObjectiveWeights,
        config: SolverConfig,
        limit: usize,
    ) -> Result<Self> {
        let model = build_lssp(inst, weights)?;
        Ok(Self {
            inst,
            model,
            config,
            limit,
            produced: 0,
            exhausted: false,
            statuses: Vec::new(),
            solve_times: Vec::new(),
        })
    }

    pub fn model(&self) -> &MilpModel {
        &self.model
    }

    /// Next pool entry, `None` once the limit is reached or no other
    /// pattern is feasible.
    pub fn next_plan(&mut self) -> Result<Option<LsspPlan>> {
        if self.exhausted || self.produced >= self.limit {
            return Ok(None);
        }
        let raw = milp::solve(&self.model, &self.config)?;
        self.statuses.push(raw.status);
        self.solve_times.push(raw.solve_time);
        if !raw.status.has_solution() {
            self.exhausted = true;
            if self.produced == 0 {
                return Err(Error::Milp(milp::MilpError::NoSolution {
                    status: raw.status,
                }));
            }
            return Ok(None);
        }
        let plan = decode_lssp(self.inst, &self.model, &raw)?;
        self.exclude(&plan.y);
        self.produced += 1;
        Ok(Some(plan))
    }

    fn exclude(&mut self, pattern: &[Vec<u8>]) {
        let mut r = LinExpr::new();
        let mut ones = 0.0;
        for (i, row) in pattern.iter().enumerate() {
            for (t, &v) in row.iter().enumerate() {
                let id = self
                    .model
                    .var_by_name(&format!("Y_{i}_{t}"))
                    .expect("pattern variable");
                if v == 1 {
                    r.add(id, -1.0);
                    ones += 1.0;
                } else {
                    r.add(id, 1.0);
                }
            }
        }
        let k = self.produced;
        model_add_cut(&mut self.model, r, 1.0 - ones, k);
    }
}

fn model_add_cut(model: &mut MilpModel, expr: LinExpr, rhs: f64, k: usize) {
    model.add_row(
        POOL_EXCLUSION,
        format!("pool_exclusion_{k}"),
        expr,
        Sense::Ge,
        rhs,
    );
}

/// Normalized objective of a lot-sizing plan, recomputed from its stock.
pub fn plan_objective(inst: &Instance, plan: &LsspPlan, weights: &ObjectiveWeights) -> f64 {
    let (lc, los, lus) = compute_normalizers(inst).coefficients(weights);
    plan.class_backorders
        .iter()
        .zip(&lc)
        .map(|(b, k)| b * k)
        .sum::<f64>()
        + los * plan.total_overstock
        + lus * plan.total_understock
}
