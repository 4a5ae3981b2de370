//! The integrated lot-sizing and press-scheduling model.
//!
//! Production `X`, press assignment `Y`, mold setups `s`, run starts `m`,
//! campaign endings `e`, simultaneity flags `σ` and drum counts `Δ`/`δ` live
//! per press (see [`PressBlock`]); inventory `I`, backorders `B` and the
//! overstock/understock slacks live per tire. Row families are tagged with
//! the names listed in [`tags`].

mod press;
mod size;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::PlanSolution;
use crate::instance::Instance;
use crate::milp::{LinExpr, MilpModel, RawSolution, Sense, SolveStatus, SolverConfig, VarId};

pub(crate) use press::{warm_run_start, PressBlock};
pub use size::{closed_form_size, FormulaModel};

/// Constraint family names, as they appear in rows and violations.
pub mod tags {
    pub const BALANCE: &str = "balance";
    pub const NO_GHOST_INVENTORY: &str = "no_ghost_inventory";
    pub const CLASS_PRIORITY: &str = "class_priority";
    pub const NO_GHOST_BACKORDER: &str = "no_ghost_backorder";
    pub const OVERSTOCK_DEF: &str = "overstock_def";
    pub const UNDERSTOCK_DEF: &str = "understock_def";
    pub const SETUP_LINK_UPPER: &str = "setup_link_upper";
    pub const SETUP_LINK_LOWER: &str = "setup_link_lower";
    pub const PRESS_SINGLE_ITEM: &str = "press_single_item";
    pub const MOLD_CAPACITY: &str = "mold_capacity";
    pub const ALL_OR_NOTHING: &str = "all_or_nothing";
    pub const SETUP_WINDOW: &str = "setup_window";
    pub const SETUP_INTRUSION_DAYOFF: &str = "setup_intrusion_dayoff";
    pub const SETUP_INTRUSION: &str = "setup_intrusion";
    pub const DAILY_SETUP_CAP: &str = "daily_setup_cap";
    pub const WEEKLY_SETUP_CAP: &str = "weekly_setup_cap";
    pub const WEEKLY_TONNAGE_MAX: &str = "weekly_tonnage_max";
    pub const WEEKLY_TONNAGE_MIN: &str = "weekly_tonnage_min";
    pub const DAILY_TONNAGE_MAX: &str = "daily_tonnage_max";
    pub const DAILY_TONNAGE_MIN: &str = "daily_tonnage_min";
    pub const SIMULTANEITY_LOWER: &str = "simultaneity_lower";
    pub const SIMULTANEITY_UPPER: &str = "simultaneity_upper";
    pub const SIMULTANEITY_CAP: &str = "simultaneity_cap";
    pub const CAMPAIGN_ENDING: &str = "campaign_ending";
    pub const WEEKLY_ENDING_CAP: &str = "weekly_ending_cap";
    pub const WORKSHOP_SATURATION: &str = "workshop_saturation";
    pub const DRUM_CAPACITY: &str = "drum_capacity";
    pub const DRUM_LEVEL_TWO_LO: &str = "drum_level_two_lo";
    pub const DRUM_LEVEL_TWO_HI: &str = "drum_level_two_hi";
    pub const DRUM_LEVEL_LOW_LO: &str = "drum_level_low_lo";
    pub const DRUM_LEVEL_LOW_HI: &str = "drum_level_low_hi";
    pub const DRUM_COVER: &str = "drum_cover";
    pub const DRUM_SWITCH_ON: &str = "drum_switch_on";
    pub const DRUM_SWITCH_OFF: &str = "drum_switch_off";
    pub const MIN_RUN_START: &str = "min_run_start";
    pub const MIN_RUN_START_DAYOFF: &str = "min_run_start_dayoff";
    pub const MIN_RUN_HOLD: &str = "min_run_hold";
    pub const ENFORCED_TRIAL: &str = "enforced_trial";
    pub const MAINTENANCE: &str = "maintenance";
    pub const MIN_MOLDS: &str = "min_molds";
    pub const ELIGIBILITY: &str = "eligibility";
}

/// Objective weights: one per demand class, then overstock and understock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub classes: Vec<f64>,
    pub overstock: f64,
    pub understock: f64,
}

impl ObjectiveWeights {
    /// The calibrated setting (class weights 20, 16, 12, overstock 48,
    /// understock 4), truncated or padded to `classes` classes.
    pub fn calibrated(classes: usize) -> Self {
        let base = [20.0, 16.0, 12.0];
        let classes = (0..classes).map(|c| base[c.min(base.len() - 1)]).collect();
        Self {
            classes,
            overstock: 48.0,
            understock: 4.0,
        }
    }

    pub fn check(&self, classes: usize) -> Result<()> {
        let all = self
            .classes
            .iter()
            .chain([&self.overstock, &self.understock]);
        if self.classes.len() != classes {
            return Err(Error::Dimension(format!(
                "{} class weights for {classes} classes",
                self.classes.len()
            )));
        }
        let mut any = false;
        for &w in all {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Parse(format!(
                    "objective weight {w} is not a finite non-negative number"
                )));
            }
            any |= w > 0.0;
        }
        if !any {
            return Err(Error::Parse("objective weights are all zero".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            classes: self.classes.iter().map(|w| w * k).collect(),
            overstock: self.overstock * k,
            understock: self.understock * k,
        }
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Scale factors dividing each objective term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizers {
    pub classes: Vec<f64>,
    pub overstock: f64,
    pub understock: f64,
}

impl Normalizers {
    /// Per-unit objective coefficients `λ/μ`.
    pub fn coefficients(&self, w: &ObjectiveWeights) -> (Vec<f64>, f64, f64) {
        let classes = w
            .classes
            .iter()
            .zip(&self.classes)
            .map(|(l, m)| l / m)
            .collect();
        (
            classes,
            w.overstock / self.overstock,
            w.understock / self.understock,
        )
    }
}

fn guard(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x
    }
}

/// Overstock and understock of the initial stock, against the first period's bounds.
pub fn initial_slacks(inst: &Instance, tire: usize) -> (f64, f64) {
    let i0 = inst.inventory.initial[tire] as f64;
    let (lo, hi) = match (
        inst.inventory.min[tire].first(),
        inst.inventory.max[tire].first(),
    ) {
        (Some(&lo), Some(&hi)) => (lo as f64, hi as f64),
        _ => return (0.0, 0.0),
    };
    ((i0 - hi).max(0.0), (lo - i0).max(0.0))
}

pub fn compute_normalizers(inst: &Instance) -> Normalizers {
    let (a_n, g_n, t_n) = (inst.sets.tires, inst.sets.classes, inst.periods());
    let classes: Vec<f64> = (0..g_n)
        .map(|c| {
            (0..a_n)
                .map(|a| {
                    inst.demand.initial_backorder[a][c] as f64
                        + inst.demand.demand[a][c]
                            .iter()
                            .map(|&d| d as f64)
                            .sum::<f64>()
                })
                .sum()
        })
        .collect();
    let mut overstock = 0.0;
    let mut understock = 0.0;
    for a in 0..a_n {
        let (os0, us0) = initial_slacks(inst, a);
        let rates: Vec<f64> = inst
            .items_of_tire(a)
            .flat_map(|i| inst.capacity.rate[i].iter().map(|&r| r as f64))
            .collect();
        let mean = if rates.is_empty() {
            0.0
        } else {
            rates.iter().sum::<f64>() / rates.len() as f64
        };
        overstock += os0 + inst.capacity.molds[a] as f64 * mean * t_n as f64;
        understock += us0;
    }
    understock += classes.iter().sum::<f64>();
    Normalizers {
        classes: classes.into_iter().map(guard).collect(),
        overstock: guard(overstock),
        understock: guard(understock),
    }
}

/// Model construction switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    /// Omit press variables of ineligible tire/press pairs and rows that are
    /// satisfied by construction. The solution set is unchanged.
    pub prune: bool,
}

/// Adds the inventory side shared by the integrated and lot-sizing models:
/// `I`, `B`, the slacks, the balance and prioritization rows and the
/// normalized objective. `production(a, t)` is the tire's output.
pub(crate) fn add_inventory_block(
    model: &mut MilpModel,
    inst: &Instance,
    weights: &ObjectiveWeights,
    production: impl Fn(usize, usize) -> LinExpr,
) {
    let (a_n, g_n, t_n) = (inst.sets.tires, inst.sets.classes, inst.periods());
    let inf = f64::INFINITY;
    let inventory: Vec<Vec<VarId>> = (0..a_n)
        .map(|a| {
            (0..t_n)
                .map(|t| model.integer(format!("I_{a}_{t}"), 0.0, inf))
                .collect()
        })
        .collect();
    let backorder: Vec<Vec<Vec<VarId>>> = (0..a_n)
        .map(|a| {
            (0..g_n)
                .map(|c| {
                    (0..t_n)
                        .map(|t| model.integer(format!("B_{a}_{c}_{t}"), 0.0, inf))
                        .collect()
                })
                .collect()
        })
        .collect();
    let overstock: Vec<Vec<VarId>> = (0..a_n)
        .map(|a| {
            (0..t_n)
                .map(|t| model.continuous(format!("OS_{a}_{t}"), 0.0, inf))
                .collect()
        })
        .collect();
    let understock: Vec<Vec<VarId>> = (0..a_n)
        .map(|a| {
            (0..t_n)
                .map(|t| model.continuous(format!("US_{a}_{t}"), 0.0, inf))
                .collect()
        })
        .collect();

    for a in 0..a_n {
        for t in 0..t_n {
            // I_{t-1} + production
            let mut supply = production(a, t);
            if t == 0 {
                supply.add_constant(inst.inventory.initial[a] as f64);
            } else {
                supply.add(inventory[a][t - 1], 1.0);
            }
            let prev_b = |c: usize, e: &mut LinExpr, k: f64| {
                if t == 0 {
                    e.add_constant(k * inst.demand.initial_backorder[a][c] as f64);
                } else {
                    e.add(backorder[a][c][t - 1], k);
                }
            };
            let total_d: f64 = (0..g_n).map(|c| inst.demand.demand[a][c][t] as f64).sum();
            let mut e = supply.clone();
            e.add(inventory[a][t], -1.0);
            for c in 0..g_n {
                e.add(backorder[a][c][t], 1.0);
                prev_b(c, &mut e, -1.0);
            }
            model.add_row(
                tags::BALANCE,
                format!("balance_{a}_{t}"),
                e,
                Sense::Eq,
                total_d,
            );

            let mut e = supply.clone();
            e.add(inventory[a][t], -1.0);
            model.add_row(
                tags::NO_GHOST_INVENTORY,
                format!("no_ghost_inventory_{a}_{t}"),
                e,
                Sense::Ge,
                0.0,
            );

            for c in 0..g_n.saturating_sub(1) {
                let mut e = supply.clone();
                e.add(backorder[a][c][t], 1.0);
                prev_b(c, &mut e, -1.0);
                let d = inst.demand.demand[a][c][t] as f64;
                model.add_row(
                    tags::CLASS_PRIORITY,
                    format!("class_priority_{a}_{c}_{t}"),
                    e,
                    Sense::Ge,
                    d,
                );
            }
            for c in 1..g_n {
                let mut e = LinExpr::var(backorder[a][c][t], 1.0);
                prev_b(c, &mut e, -1.0);
                let d = inst.demand.demand[a][c][t] as f64;
                model.add_row(
                    tags::NO_GHOST_BACKORDER,
                    format!("no_ghost_backorder_{a}_{c}_{t}"),
                    e,
                    Sense::Le,
                    d,
                );
            }

            let mut e = LinExpr::var(inventory[a][t], 1.0);
            e.add(overstock[a][t], -1.0);
            let hi = inst.inventory.max[a][t] as f64;
            model.add_row(
                tags::OVERSTOCK_DEF,
                format!("overstock_def_{a}_{t}"),
                e,
                Sense::Le,
                hi,
            );
            let mut e = LinExpr::var(inventory[a][t], 1.0);
            e.add(understock[a][t], 1.0);
            let lo = inst.inventory.min[a][t] as f64;
            model.add_row(
                tags::UNDERSTOCK_DEF,
                format!("understock_def_{a}_{t}"),
                e,
                Sense::Ge,
                lo,
            );
        }
    }

    let (lc, los, lus) = compute_normalizers(inst).coefficients(weights);
    let mut obj = Vec::new();
    for a in 0..a_n {
        for t in 0..t_n {
            for c in 0..g_n {
                obj.push((backorder[a][c][t], lc[c]));
            }
            obj.push((overstock[a][t], los));
            obj.push((understock[a][t], lus));
        }
    }
    model.set_objective(obj);
}

/// Builds the integrated model with every row family, dense over all
/// item/press pairs.
pub fn build_integrated(inst: &Instance, weights: &ObjectiveWeights) -> Result<MilpModel> {
    build_integrated_with(inst, weights, BuildOptions::default())
}

pub fn build_integrated_with(
    inst: &Instance,
    weights: &ObjectiveWeights,
    opts: BuildOptions,
) -> Result<MilpModel> {
    inst.ensure_valid()?;
    weights.check(inst.sets.classes)?;
    let mut model = MilpModel::new(format!("integrated_{}", inst.meta.name));
    let press = PressBlock::add(&mut model, inst, opts);
    add_inventory_block(&mut model, inst, weights, |a, t| {
        let mut e = LinExpr::new();
        for i in inst.items_of_tire(a) {
            for p in 0..inst.sets.presses {
                if let Some(x) = press.x(i, p, t) {
                    e.add(x, 1.0);
                }
            }
        }
        e
    });
    Ok(model)
}

/// Outcome of [`solve_integrated`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedSolution {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub solve_time: std::time::Duration,
    /// Decoded plan, `None` without a solution.
    pub plan: Option<PlanSolution>,
}

/// Builds the pruned model, solves it with the default adapter and decodes
/// the plan.
pub fn solve_integrated(
    inst: &Instance,
    weights: &ObjectiveWeights,
    config: &SolverConfig,
) -> Result<IntegratedSolution> {
    let model = build_integrated_with(inst, weights, BuildOptions { prune: true })?;
    let raw = crate::milp::solve(&model, config)?;
    let plan = if raw.status.has_solution() {
        Some(decode_plan(inst, &model, &raw)?)
    } else {
        None
    };
    Ok(IntegratedSolution {
        status: raw.status,
        objective: raw.objective,
        gap: raw.gap,
        solve_time: raw.solve_time,
        plan,
    })
}

fn read_int(model: &MilpModel, raw: &RawSolution, name: &str) -> Result<u32> {
    match model.var_by_name(name) {
        None => Ok(0),
        Some(id) => {
            let v = raw.int_value(model, id)?;
            u32::try_from(v).map_err(|_| Error::Decode(format!("{name} = {v} is negative")))
        }
    }
}

/// Press-level production and assignment arrays `[item][press][period]`.
/// Variables absent from the model read as zero.
pub fn decode_production(
    inst: &Instance,
    model: &MilpModel,
    raw: &RawSolution,
) -> Result<(Vec<Vec<Vec<u32>>>, Vec<Vec<Vec<u8>>>)> {
    raw.require_solution()?;
    let (n_n, p_n, t_n) = (inst.sets.items, inst.sets.presses, inst.periods());
    let mut x = vec![vec![vec![0u32; t_n]; p_n]; n_n];
    let mut y = vec![vec![vec![0u8; t_n]; p_n]; n_n];
    for i in 0..n_n {
        for p in 0..p_n {
            for t in 0..t_n {
                x[i][p][t] = read_int(model, raw, &format!("X_{i}_{p}_{t}"))?;
                let b = read_int(model, raw, &format!("Y_{i}_{p}_{t}"))?;
                if b > 1 {
                    return Err(Error::Decode(format!("Y_{i}_{p}_{t} = {b} is not binary")));
                }
                y[i][p][t] = b as u8;
            }
        }
    }
    Ok((x, y))
}

/// Reads a solved integrated model back into a plan. Overstock, understock
/// and all indicators are recomputed from the decoded quantities.
pub fn decode_plan(inst: &Instance, model: &MilpModel, raw: &RawSolution) -> Result<PlanSolution> {
    let (x, y) = decode_production(inst, model, raw)?;
    let (a_n, g_n, t_n) = (inst.sets.tires, inst.sets.classes, inst.periods());
    let mut inventory = vec![vec![0u32; t_n]; a_n];
    let mut backorder = vec![vec![vec![0u32; t_n]; g_n]; a_n];
    for a in 0..a_n {
        for t in 0..t_n {
            inventory[a][t] = read_int(model, raw, &format!("I_{a}_{t}"))?;
            for c in 0..g_n {
                backorder[a][c][t] = read_int(model, raw, &format!("B_{a}_{c}_{t}"))?;
            }
        }
    }
    PlanSolution::from_parts(inst, x, y, inventory, backorder)
}
