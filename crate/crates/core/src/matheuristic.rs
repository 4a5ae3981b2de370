//! Two-stage lot-sizing/assignment loop run over a rolling weekly horizon.
//!
//! Each week the lot-sizing pool is walked in objective order; the first
//! entry whose assignment is accepted wins, otherwise the entry with the
//! smallest deviation is kept and the week is flagged degraded. Ending stock,
//! backorders and press history roll into the next week.

use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::assp::{accept, solve_assp, Threshold};
use crate::error::{Error, Result};
use crate::evaluator::{compute_kpis, PlanSolution};
use crate::instance::{roll_warm_state, CarryState, Instance};
use crate::integrated::ObjectiveWeights;
use crate::lssp::{LsspPlan, LsspPool, DEFAULT_POOL_SIZE};
use crate::milp::{Emphasis, SolveStatus, SolverConfig};

/// Production fixed ahead of the optimized weeks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrozenPrefix {
    /// Leading macro periods taken as given.
    pub weeks: usize,
    /// `(item, press, period)` triples running inside those weeks.
    pub production: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub lssp_time_limit: Duration,
    pub assp_time_limit: Duration,
    pub pool_size: usize,
    pub threshold: Threshold,
    pub emphasis: Emphasis,
    pub mip_rel_gap: f64,
    pub threads: Option<u32>,
    pub frozen: Option<FrozenPrefix>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lssp_time_limit: Duration::from_secs(1800),
            assp_time_limit: Duration::from_secs(3600),
            pool_size: DEFAULT_POOL_SIZE,
            threshold: Threshold::default(),
            emphasis: Emphasis::Feasibility,
            mip_rel_gap: 1e-4,
            threads: None,
            frozen: None,
        }
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<()> {
        if self.lssp_time_limit.is_zero() || self.assp_time_limit.is_zero() {
            return Err(Error::Parse("time limits must be positive".into()));
        }
        if self.pool_size == 0 {
            return Err(Error::Parse("pool size must be at least 1".into()));
        }
        Ok(())
    }

    fn solver(&self, limit: Duration) -> SolverConfig {
        SolverConfig {
            time_limit: Some(limit),
            mip_rel_gap: self.mip_rel_gap,
            emphasis: self.emphasis,
            threads: self.threads,
            ..SolverConfig::default()
        }
    }
}

/// One pool entry tried during a week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub rank: usize,
    pub lssp_objective: f64,
    pub assp_status: SolveStatus,
    pub deviation: f64,
    pub assp_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeekResult {
    pub week: usize,
    /// Pool rank of the kept entry.
    pub rank: usize,
    pub lssp_objective: f64,
    pub deviation: f64,
    /// No entry met the acceptance threshold.
    pub degraded: bool,
    /// Taken from the frozen prefix rather than optimized.
    pub frozen: bool,
    /// Plan of the week's slice.
    pub plan: PlanSolution,
    pub entries: Vec<EntryRecord>,
    pub lssp_seconds: Vec<f64>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingResult {
    pub weeks: Vec<WeekResult>,
    /// Full-horizon plan; `None` when a week failed.
    pub plan: Option<PlanSolution>,
    /// Week index and reason of the failure that stopped the run.
    pub failure: Option<(usize, String)>,
}

fn week_plan(
    slice: &Instance,
    lssp: &LsspPlan,
    x: Vec<Vec<Vec<u32>>>,
    y: Vec<Vec<Vec<u8>>>,
    exact: bool,
) -> Result<PlanSolution> {
    if exact {
        PlanSolution::from_parts(slice, x, y, lssp.inventory.clone(), lssp.backorder.clone())
    } else {
        PlanSolution::from_production(slice, x, y)
    }
}

/// Runs the pool loop on one macro-period slice. The slice carries its own
/// starting stock and press history.
pub fn solve_week(
    slice: &Instance,
    week: usize,
    weights: &ObjectiveWeights,
    config: &RunConfig,
) -> Result<WeekResult> {
    config.check()?;
    let start = Instant::now();
    let fail = |reason: String| Error::WeekFailed { week, reason };
    let mut pool = match LsspPool::new(
        slice,
        weights,
        config.solver(config.lssp_time_limit),
        config.pool_size,
    ) {
        Ok(p) => p,
        Err(e) => return Err(fail(format!("lot-sizing model: {e}"))),
    };
    let assp_config = config.solver(config.assp_time_limit);
    let mut entries = Vec::new();
    // fallback when no entry is accepted: the assignable entry with the least
    // deviation, ties broken by the realized week objective
    let mut best: Option<(usize, LsspPlan, f64, PlanSolution)> = None;
    let mut chosen = None;
    for rank in 0.. {
        let plan = match pool.next_plan() {
            Ok(Some(p)) => p,
            Ok(None) => break,
            Err(Error::Milp(crate::milp::MilpError::NoSolution { status })) => {
                return Err(fail(format!("lot sizing has no solution ({status})")));
            }
            Err(e) => return Err(fail(e.to_string())),
        };
        let assp = solve_assp(slice, &plan.x, &assp_config)
            .map_err(|e| fail(format!("assignment of entry {rank}: {e}")))?;
        entries.push(EntryRecord {
            rank,
            lssp_objective: plan.objective,
            assp_status: assp.status,
            deviation: assp.deviation,
            assp_seconds: assp.solve_time.as_secs_f64(),
        });
        log::info!(
            "week {week} entry {rank}: lssp {:.6} assp {} deviation {}",
            plan.objective,
            assp.status,
            assp.deviation
        );
        if accept(&assp, &config.threshold) {
            let realized = week_plan(slice, &plan, assp.x, assp.y, assp.deviation == 0.0)?;
            chosen = Some((rank, plan, assp.deviation, realized));
            break;
        }
        if assp.status.has_solution() {
            let deviation = assp.deviation;
            let realized = week_plan(slice, &plan, assp.x, assp.y, false)?;
            let of = compute_kpis(slice, &realized, weights).of;
            let better = best.as_ref().is_none_or(|b| {
                let best_of = compute_kpis(slice, &b.3, weights).of;
                deviation < b.2 || (deviation == b.2 && of < best_of)
            });
            if better {
                best = Some((rank, plan, deviation, realized));
            }
        }
    }
    let degraded = chosen.is_none();
    let Some((rank, lssp, deviation, plan)) = chosen.or(best) else {
        let statuses: Vec<String> = entries
            .iter()
            .map(|e| format!("#{}: {}", e.rank, e.assp_status))
            .collect();
        return Err(fail(format!(
            "no pool entry could be assigned ({})",
            statuses.join(", ")
        )));
    };
    Ok(WeekResult {
        week,
        rank,
        lssp_objective: lssp.objective,
        deviation,
        degraded,
        frozen: false,
        plan,
        entries,
        lssp_seconds: pool.solve_times.iter().map(|d| d.as_secs_f64()).collect(),
        elapsed: start.elapsed(),
    })
}

fn frozen_week(
    slice: &Instance,
    week: usize,
    offset: usize,
    frozen: &FrozenPrefix,
) -> Result<WeekResult> {
    let (n, p, t) = (slice.sets.items, slice.sets.presses, slice.periods());
    let mut x = vec![vec![vec![0u32; t]; p]; n];
    let mut y = vec![vec![vec![0u8; t]; p]; n];
    for &[i, pp, tt] in &frozen.production {
        if (offset..offset + t).contains(&tt) {
            if i >= n || pp >= p {
                return Err(Error::Dimension(format!(
                    "frozen entry ({i}, {pp}, {tt}) is out of range"
                )));
            }
            y[i][pp][tt - offset] = 1;
            x[i][pp][tt - offset] = slice.capacity.rate[i][tt - offset];
        }
    }
    Ok(WeekResult {
        week,
        rank: 0,
        lssp_objective: f64::NAN,
        deviation: 0.0,
        degraded: false,
        frozen: true,
        plan: PlanSolution::from_production(slice, x, y)?,
        entries: Vec::new(),
        lssp_seconds: Vec::new(),
        elapsed: Duration::ZERO,
    })
}

/// Solves the macro periods in order, carrying state between them.
pub fn run_rolling_horizon(
    inst: &Instance,
    weights: &ObjectiveWeights,
    config: &RunConfig,
) -> Result<RollingResult> {
    inst.ensure_valid()?;
    config.check()?;
    let (n_n, p_n, t_n, a_n, g_n) = (
        inst.sets.items,
        inst.sets.presses,
        inst.periods(),
        inst.sets.tires,
        inst.sets.classes,
    );
    let mut x = vec![vec![vec![0u32; t_n]; p_n]; n_n];
    let mut y = vec![vec![vec![0u8; t_n]; p_n]; n_n];
    let mut inventory = vec![vec![0u32; t_n]; a_n];
    let mut backorder = vec![vec![vec![0u32; t_n]; g_n]; a_n];
    let mut state: CarryState = inst.initial_state();
    let mut weeks = Vec::new();
    let frozen_weeks = config.frozen.as_ref().map_or(0, |f| f.weeks);

    for h in 0..inst.calendar.macro_periods {
        let range = inst.calendar.macro_range(h);
        let slice = inst.macro_slice(h, &state);
        let result = match &config.frozen {
            Some(f) if h < frozen_weeks => frozen_week(&slice, h, range.start, f),
            _ => solve_week(&slice, h, weights, config),
        };
        let week = match result {
            Ok(w) => w,
            Err(e) => {
                log::warn!("stopping at week {h}: {e}");
                return Ok(RollingResult {
                    weeks,
                    plan: None,
                    failure: Some((h, e.to_string())),
                });
            }
        };
        for i in 0..n_n {
            for p in 0..p_n {
                for (k, t) in range.clone().enumerate() {
                    x[i][p][t] = week.plan.x[i][p][k];
                    y[i][p][t] = week.plan.y[i][p][k];
                }
            }
        }
        for a in 0..a_n {
            for (k, t) in range.clone().enumerate() {
                inventory[a][t] = week.plan.inventory[a][k];
                for c in 0..g_n {
                    backorder[a][c][t] = week.plan.backorder[a][c][k];
                }
            }
        }
        let last = range.end - 1;
        state = CarryState {
            inventory: (0..a_n).map(|a| inventory[a][last]).collect(),
            backorder: (0..a_n)
                .map(|a| (0..g_n).map(|c| backorder[a][c][last]).collect())
                .collect(),
            warm: roll_warm_state(&inst.warm_state, &inst.calendar.days_off, &y, range.end),
        };
        weeks.push(week);
    }
    let plan = PlanSolution::from_parts(inst, x, y, inventory, backorder)?;
    Ok(RollingResult {
        weeks,
        plan: Some(plan),
        failure: None,
    })
}

#[derive(Serialize)]
struct ManifestWeek<'a> {
    week: usize,
    frozen: bool,
    rank: usize,
    degraded: bool,
    lssp_objective: Option<f64>,
    deviation: f64,
    elapsed_seconds: f64,
    lssp_seconds: &'a [f64],
    entries: &'a [EntryRecord],
}

#[derive(Serialize)]
struct Manifest<'a> {
    instance: &'a str,
    config: &'a RunConfig,
    weights: &'a ObjectiveWeights,
    weeks: Vec<ManifestWeek<'a>>,
    complete: bool,
    failure: Option<&'a (usize, String)>,
}

/// Writes the run record: configuration, per-week timings, statuses and ranks.
pub fn write_manifest(
    path: impl AsRef<Path>,
    inst: &Instance,
    weights: &ObjectiveWeights,
    config: &RunConfig,
    result: &RollingResult,
) -> Result<()> {
    let manifest = Manifest {
        instance: &inst.meta.name,
        config,
        weights,
        weeks: result
            .weeks
            .iter()
            .map(|w| ManifestWeek {
                week: w.week,
                frozen: w.frozen,
                rank: w.rank,
                degraded: w.degraded,
                lssp_objective: w.lssp_objective.is_finite().then_some(w.lssp_objective),
                deviation: w.deviation,
                elapsed_seconds: w.elapsed.as_secs_f64(),
                lssp_seconds: &w.lssp_seconds,
                entries: &w.entries,
            })
            .collect(),
        complete: result.plan.is_some(),
        failure: result.failure.as_ref(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}
