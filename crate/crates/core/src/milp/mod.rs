//! Solver-neutral mixed-integer linear models.
//!
//! A [`MilpModel`] is built once, then exported ([`export_lp`], [`export_mps`])
//! or handed to a [`SolverAdapter`]. Variables are addressed by [`VarId`]; every
//! variable also carries a unique structured name such as `X_3_1_0`, which is
//! what the text formats and the decoders use.

mod command;
#[cfg(feature = "highs")]
mod highs;
mod lp;
mod mps;

use std::collections::HashMap;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use command::{CommandAdapter, SolutionFormat, SolverProfile, PROFILE_ENV};
#[cfg(feature = "highs")]
pub use highs::HighsAdapter;
pub use lp::export_lp;
pub use mps::{export_mps, MpsExport};

/// Values within this distance of an integer are read as that integer.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("structural error in model {model:?}: {message}")]
    Structural { model: String, message: String },
    #[error("variable {name:?} has fractional value {value}")]
    Fractional { name: String, value: f64 },
    #[error("solver reported {status} without a solution")]
    NoSolution { status: SolveStatus },
    #[error("{adapter} adapter failed: {message}")]
    Adapter {
        adapter: String,
        message: String,
        diagnostics: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Sense::Le => lhs <= rhs + tol,
            Sense::Ge => lhs >= rhs - tol,
            Sense::Eq => (lhs - rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub name: String,
    /// Constraint family, shared by every row of the same kind.
    pub tag: &'static str,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Linear expression with a constant part, used while assembling rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(v: VarId, coef: f64) -> Self {
        Self {
            terms: vec![(v, coef)],
            constant: 0.0,
        }
    }

    pub fn add(&mut self, v: VarId, coef: f64) -> &mut Self {
        self.terms.push((v, coef));
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn extend(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        self.terms
            .extend(other.terms.iter().map(|&(v, c)| (v, c * scale)));
        self.constant += other.constant * scale;
        self
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<(VarId, f64)>,
    by_name: HashMap<String, VarId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelSize {
    pub binaries: usize,
    pub integers: usize,
    pub continuous: usize,
    pub constraints: usize,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    /// Adds a variable. Names must be unique; binaries get bounds clipped to `[0, 1]`.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> VarId {
        let name = name.into();
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        let id = VarId(self.variables.len());
        let previous = self.by_name.insert(name.clone(), id);
        assert!(previous.is_none(), "duplicate variable name {name}");
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        id
    }

    pub fn binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn integer(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, VarKind::Integer, lower, upper)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    /// Adds `expr (sense) rhs`, moving the expression's constant to the right.
    /// Duplicate variables are merged and zero coefficients dropped.
    pub fn add_row(
        &mut self,
        tag: &'static str,
        name: impl Into<String>,
        expr: LinExpr,
        sense: Sense,
        rhs: f64,
    ) {
        let terms = merge_terms(expr.terms);
        self.constraints.push(LinearConstraint {
            name: name.into(),
            tag,
            terms,
            sense,
            rhs: rhs - expr.constant,
        });
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>) {
        self.objective = merge_terms(terms);
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Checks references, bounds and coefficients.
    pub fn check(&self) -> Result<(), MilpError> {
        let err = |message: String| {
            Err(MilpError::Structural {
                model: self.name.clone(),
                message,
            })
        };
        let n = self.variables.len();
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return err(format!(
                    "variable {} has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                ));
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return err(format!("row {} has right-hand side {}", c.name, c.rhs));
            }
            let mut seen = std::collections::HashSet::new();
            for &(v, coef) in &c.terms {
                if v.0 >= n {
                    return err(format!(
                        "row {} references undeclared variable #{}",
                        c.name, v.0
                    ));
                }
                if !coef.is_finite() {
                    return err(format!(
                        "row {} has coefficient {coef} on {}",
                        c.name, self.variables[v.0].name
                    ));
                }
                if !seen.insert(v) {
                    return err(format!(
                        "row {} lists {} twice",
                        c.name, self.variables[v.0].name
                    ));
                }
            }
        }
        for &(v, coef) in &self.objective {
            if v.0 >= n {
                return err(format!("objective references undeclared variable #{}", v.0));
            }
            if !coef.is_finite() {
                return err(format!(
                    "objective coefficient {coef} on {}",
                    self.variables[v.0].name
                ));
            }
        }
        Ok(())
    }

    /// Objective value of an assignment indexed by [`VarId`].
    pub fn evaluate_objective(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Rows violated by an assignment, with their activity.
    pub fn violated_rows(&self, values: &[f64], tol: f64) -> Vec<(&LinearConstraint, f64)> {
        self.constraints
            .iter()
            .filter_map(|c| {
                let lhs: f64 = c.terms.iter().map(|&(v, k)| k * values[v.0]).sum();
                (!c.sense.holds(lhs, c.rhs, tol)).then_some((c, lhs))
            })
            .collect()
    }

    /// Number of rows per constraint family, in first-appearance order.
    pub fn rows_by_tag(&self) -> Vec<(&'static str, usize)> {
        let mut out: Vec<(&'static str, usize)> = Vec::new();
        for c in &self.constraints {
            match out.iter_mut().find(|(t, _)| *t == c.tag) {
                Some(e) => e.1 += 1,
                None => out.push((c.tag, 1)),
            }
        }
        out
    }
}

fn merge_terms(terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    let mut out: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    let mut pos: HashMap<VarId, usize> = HashMap::new();
    for (v, c) in terms {
        match pos.get(&v) {
            Some(&k) => out[k].1 += c,
            None => {
                pos.insert(v, out.len());
                out.push((v, c));
            }
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}

/// Counts variables by kind and rows.
pub fn model_size(model: &MilpModel) -> ModelSize {
    let mut size = ModelSize {
        constraints: model.constraints.len(),
        ..ModelSize::default()
    };
    for v in &model.variables {
        match v.kind {
            VarKind::Binary => size.binaries += 1,
            VarKind::Integer => size.integers += 1,
            VarKind::Continuous => size.continuous += 1,
        }
    }
    size
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
    Error,
}

impl SolveStatus {
    /// True when the solution carries a value for every variable.
    pub fn has_solution(self) -> bool {
        matches!(
            self,
            SolveStatus::Optimal | SolveStatus::Feasible | SolveStatus::TimeLimit
        )
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Error => "error",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSolution {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    /// Indexed by [`VarId`]; empty when there is no solution.
    pub values: Vec<f64>,
    pub solve_time: Duration,
    pub gap: Option<f64>,
    pub message: String,
}

impl RawSolution {
    pub fn without_solution(
        status: SolveStatus,
        solve_time: Duration,
        message: impl Into<String>,
    ) -> Self {
        Self {
            status,
            objective: None,
            values: Vec::new(),
            solve_time,
            gap: None,
            message: message.into(),
        }
    }

    pub fn value(&self, id: VarId) -> f64 {
        self.values[id.0]
    }

    pub fn value_by_name(&self, model: &MilpModel, name: &str) -> Option<f64> {
        model.var_by_name(name).map(|id| self.values[id.0])
    }

    /// Value of an integral variable, rounded; fails beyond the tolerance.
    pub fn int_value(&self, model: &MilpModel, id: VarId) -> Result<i64, MilpError> {
        let v = self.values[id.0];
        let r = v.round();
        if (v - r).abs() > INTEGRALITY_TOLERANCE {
            return Err(MilpError::Fractional {
                name: model.var(id).name.clone(),
                value: v,
            });
        }
        Ok(r as i64)
    }

    pub fn require_solution(&self) -> Result<(), MilpError> {
        if self.status.has_solution() && !self.values.is_empty() {
            Ok(())
        } else {
            Err(MilpError::NoSolution {
                status: self.status,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emphasis {
    #[default]
    Balanced,
    Feasibility,
    Optimality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub time_limit: Option<Duration>,
    /// Relative optimality gap at which the search stops.
    pub mip_rel_gap: f64,
    pub mip_abs_gap: Option<f64>,
    pub emphasis: Emphasis,
    pub threads: Option<u32>,
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_limit: None,
            mip_rel_gap: 1e-4,
            mip_abs_gap: None,
            emphasis: Emphasis::Balanced,
            threads: None,
            verbose: false,
        }
    }
}

impl SolverConfig {
    /// Proven optimality, for comparisons against exhaustive enumeration.
    pub fn exact() -> Self {
        Self {
            mip_rel_gap: 0.0,
            mip_abs_gap: Some(1e-9),
            ..Self::default()
        }
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }
}

pub trait SolverAdapter: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, model: &MilpModel, config: &SolverConfig) -> Result<RawSolution, MilpError>;
}

/// The adapter named by the profile in [`PROFILE_ENV`], or the in-process
/// HiGHS adapter when the variable is unset.
pub fn default_adapter() -> Result<Box<dyn SolverAdapter>, MilpError> {
    if let Ok(path) = std::env::var(PROFILE_ENV) {
        if !path.is_empty() {
            let profile = SolverProfile::load(&path)?;
            return Ok(Box::new(CommandAdapter::new(profile)));
        }
    }
    builtin_adapter()
}

#[cfg(feature = "highs")]
fn builtin_adapter() -> Result<Box<dyn SolverAdapter>, MilpError> {
    Ok(Box::new(HighsAdapter))
}

#[cfg(not(feature = "highs"))]
fn builtin_adapter() -> Result<Box<dyn SolverAdapter>, MilpError> {
    Err(MilpError::Adapter {
        adapter: "default".into(),
        message: format!("built without an in-process solver and {PROFILE_ENV} is unset"),
        diagnostics: String::new(),
    })
}

/// Solves with the default adapter.
pub fn solve(model: &MilpModel, config: &SolverConfig) -> Result<RawSolution, MilpError> {
    default_adapter()?.solve(model, config)
}

/// Text form of a number that reads back to the same `f64`.
pub(crate) fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
