//! The assignment sub-problem: place lot sizes on eligible presses.
//!
//! All press-level rules of the integrated model apply; inventory and
//! backorders are gone and the objective is the total absolute deviation
//! from the lot-sizing quantities.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::Instance;
use crate::integrated::{decode_production, BuildOptions, PressBlock};
use crate::lssp::LsspPlan;
use crate::milp::{self, LinExpr, MilpModel, Sense, SolveStatus, SolverConfig};

pub const DEVIATION: &str = "deviation";

/// Deviation allowed by [`accept`]: `absolute + relative · ΣX^LSSP` tires.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Threshold {
    pub absolute: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsspSolution {
    pub status: SolveStatus,
    /// Total absolute deviation; infinite without a solution.
    pub deviation: f64,
    /// Sum of the lot-sizing quantities.
    pub target_total: f64,
    /// `[item][press][period]`, empty without a solution.
    pub x: Vec<Vec<Vec<u32>>>,
    pub y: Vec<Vec<Vec<u8>>>,
    pub solve_time: std::time::Duration,
}

pub fn build_assp(inst: &Instance, plan: &LsspPlan) -> Result<MilpModel> {
    build_assp_with(inst, &plan.x, BuildOptions::default())
}

/// Builds the model against target quantities `target[item][period]`.
pub fn build_assp_with(
    inst: &Instance,
    target: &[Vec<u32>],
    opts: BuildOptions,
) -> Result<MilpModel> {
    inst.ensure_valid()?;
    let (n_n, p_n, t_n) = (inst.sets.items, inst.sets.presses, inst.periods());
    if target.len() != n_n || target.iter().any(|r| r.len() != t_n) {
        return Err(crate::Error::Dimension(format!(
            "lot sizes are not {n_n}x{t_n}"
        )));
    }
    let mut model = MilpModel::new(format!("assp_{}", inst.meta.name));
    let press = PressBlock::add(&mut model, inst, opts);
    let mut objective = Vec::new();
    for i in 0..n_n {
        for t in 0..t_n {
            let over = model.continuous(format!("dplus_{i}_{t}"), 0.0, f64::INFINITY);
            let under = model.continuous(format!("dminus_{i}_{t}"), 0.0, f64::INFINITY);
            let mut r = LinExpr::new();
            for p in 0..p_n {
                if let Some(x) = press.x(i, p, t) {
                    r.add(x, 1.0);
                }
            }
            r.add(over, 1.0);
            r.add(under, -1.0);
            model.add_row(
                DEVIATION,
                format!("deviation_{i}_{t}"),
                r,
                Sense::Eq,
                target[i][t] as f64,
            );
            objective.push((over, 1.0));
            objective.push((under, 1.0));
        }
    }
    model.set_objective(objective);
    Ok(model)
}

/// Builds, solves and decodes the assignment of `target`.
pub fn solve_assp(
    inst: &Instance,
    target: &[Vec<u32>],
    config: &SolverConfig,
) -> Result<AsspSolution> {
    let model = build_assp_with(inst, target, BuildOptions { prune: true })?;
    let raw = milp::solve(&model, config)?;
    let target_total = target.iter().flatten().map(|&v| v as f64).sum();
    if !raw.status.has_solution() {
        return Ok(AsspSolution {
            status: raw.status,
            deviation: f64::INFINITY,
            target_total,
            x: Vec::new(),
            y: Vec::new(),
            solve_time: raw.solve_time,
        });
    }
    let (x, y) = decode_production(inst, &model, &raw)?;
    let deviation = target
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(t, &want)| {
                    let got: u32 = x[i].iter().map(|r| r[t]).sum();
                    (want as f64 - got as f64).abs()
                })
                .sum::<f64>()
        })
        .sum();
    Ok(AsspSolution {
        status: raw.status,
        deviation,
        target_total,
        x,
        y,
        solve_time: raw.solve_time,
    })
}

/// True when the assignment has a solution whose deviation is within the threshold.
pub fn accept(solution: &AsspSolution, threshold: &Threshold) -> bool {
    accept_parts(
        solution.status,
        solution.deviation,
        solution.target_total,
        threshold,
    )
}

pub fn accept_parts(
    status: SolveStatus,
    deviation: f64,
    target_total: f64,
    threshold: &Threshold,
) -> bool {
    status.has_solution()
        && deviation <= threshold.absolute + threshold.relative * target_total + 1e-9
}
