//! In-process HiGHS solver.

use std::num::NonZeroU32;
use std::time::Instant;

use highs::{ColProblem, HighsModelStatus, HighsSolutionStatus, Sense as HSense};

use super::{
    Emphasis, MilpError, MilpModel, RawSolution, Sense, SolveStatus, SolverAdapter, SolverConfig,
    VarKind,
};

#[derive(Debug, Clone, Copy, Default)]
pub struct HighsAdapter;

impl HighsAdapter {
    fn fail(message: impl Into<String>) -> MilpError {
        MilpError::Adapter {
            adapter: "highs".into(),
            message: message.into(),
            diagnostics: String::new(),
        }
    }
}

impl SolverAdapter for HighsAdapter {
    fn name(&self) -> &str {
        "highs"
    }

    fn solve(&self, model: &MilpModel, config: &SolverConfig) -> Result<RawSolution, MilpError> {
        model.check()?;
        let start = Instant::now();
        if model.num_vars() == 0 {
            let ok = model
                .constraints()
                .iter()
                .all(|c| c.sense.holds(0.0, c.rhs, 1e-9));
            let status = if ok {
                SolveStatus::Optimal
            } else {
                SolveStatus::Infeasible
            };
            let mut raw = RawSolution::without_solution(status, start.elapsed(), "empty model");
            if ok {
                raw.objective = Some(0.0);
            }
            return Ok(raw);
        }

        let mut pb = ColProblem::new();
        let rows: Vec<_> = model
            .constraints()
            .iter()
            .map(|c| match c.sense {
                Sense::Le => pb.add_row(..=c.rhs),
                Sense::Ge => pb.add_row(c.rhs..),
                Sense::Eq => pb.add_row(c.rhs..=c.rhs),
            })
            .collect();
        let mut columns: Vec<Vec<(highs::Row, f64)>> = vec![Vec::new(); model.num_vars()];
        for (r, c) in model.constraints().iter().enumerate() {
            for &(v, k) in &c.terms {
                columns[v.0].push((rows[r], k));
            }
        }
        let mut cost = vec![0.0; model.num_vars()];
        for &(v, k) in model.objective() {
            cost[v.0] = k;
        }
        for (j, v) in model.variables().iter().enumerate() {
            let integral = v.kind != VarKind::Continuous;
            pb.add_column_with_integrality(cost[j], v.lower..=v.upper, &columns[j], integral);
        }

        let mut hm = pb
            .try_optimise(HSense::Minimise)
            .map_err(|s| Self::fail(format!("cannot load model: {s:?}")))?;
        hm.set_option("output_flag", config.verbose);
        hm.set_option("mip_rel_gap", config.mip_rel_gap);
        if let Some(abs) = config.mip_abs_gap {
            hm.set_option("mip_abs_gap", abs);
        }
        if let Some(limit) = config.time_limit {
            hm.set_option("time_limit", limit.as_secs_f64());
        }
        if let Some(t) = config.threads.and_then(NonZeroU32::new) {
            hm.set_threads(t);
        }
        match config.emphasis {
            Emphasis::Balanced => {}
            Emphasis::Feasibility => hm.set_option("mip_heuristic_effort", 0.3),
            Emphasis::Optimality => hm.set_option("mip_heuristic_effort", 0.01),
        }
        hm.set_option("mip_feasibility_tolerance", 1e-7);

        let solved = hm
            .try_solve()
            .map_err(|s| Self::fail(format!("solve failed: {s:?}")))?;
        let elapsed = start.elapsed();
        let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let model_status = solved.status();
        let status = match model_status {
            HighsModelStatus::Optimal => SolveStatus::Optimal,
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => {
                SolveStatus::Infeasible
            }
            HighsModelStatus::ReachedTimeLimit if has_primal => SolveStatus::TimeLimit,
            HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt
            | HighsModelStatus::ObjectiveBound
            | HighsModelStatus::ObjectiveTarget
                if has_primal =>
            {
                SolveStatus::Feasible
            }
            _ => SolveStatus::Error,
        };
        if !status.has_solution() {
            return Ok(RawSolution::without_solution(
                status,
                elapsed,
                format!("{model_status:?}"),
            ));
        }
        let values = solved.get_solution().columns().to_vec();
        let gap = Some(solved.mip_gap()).filter(|g| g.is_finite());
        Ok(RawSolution {
            status,
            objective: Some(model.evaluate_objective(&values)),
            values,
            solve_time: elapsed,
            gap,
            message: format!("{model_status:?}"),
        })
    }
}
