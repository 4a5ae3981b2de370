//! External solvers driven through files.
//!
//! A [`SolverProfile`] names the executable, its argument template and the
//! solution format it writes. Template tokens may contain `{model_path}`,
//! `{solution_path}`, `{time_limit}` and `{mip_gap}`, substituted per token.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{
    export_lp, export_mps, MilpError, MilpModel, RawSolution, SolveStatus, SolverAdapter,
    SolverConfig,
};

/// Environment variable holding the path of a profile file.
pub const PROFILE_ENV: &str = "TIREPLAN_SOLVER_PROFILE";

/// Extra wall-clock time granted past the configured limit before the
/// child process is killed.
const KILL_SLACK: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionFormat {
    Highs,
    Cbc,
    Scip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFormat {
    #[default]
    Lp,
    Mps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverProfile {
    pub name: String,
    /// Executable followed by its arguments.
    pub command: Vec<String>,
    #[serde(default)]
    pub model_format: ModelFormat,
    pub solution_format: SolutionFormat,
}

impl SolverProfile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MilpError> {
        let path = path.as_ref();
        let fail = |message: String| MilpError::Adapter {
            adapter: "command".into(),
            message,
            diagnostics: String::new(),
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| fail(format!("cannot read profile {}: {e}", path.display())))?;
        let profile: SolverProfile = serde_json::from_str(&text)
            .map_err(|e| fail(format!("invalid profile {}: {e}", path.display())))?;
        if profile.command.is_empty() {
            return Err(fail(format!(
                "profile {} has an empty command",
                path.display()
            )));
        }
        Ok(profile)
    }

    /// Stock profile for a solver binary of the given family found on `PATH`.
    pub fn stock(format: SolutionFormat) -> Self {
        let (name, command): (&str, &[&str]) = match format {
            SolutionFormat::Highs => (
                "highs",
                &[
                    "highs",
                    "--model_file",
                    "{model_path}",
                    "--solution_file",
                    "{solution_path}",
                    "--time_limit",
                    "{time_limit}",
                    "--mip_rel_gap",
                    "{mip_gap}",
                ],
            ),
            SolutionFormat::Cbc => (
                "cbc",
                &[
                    "cbc",
                    "{model_path}",
                    "sec",
                    "{time_limit}",
                    "ratio",
                    "{mip_gap}",
                    "solve",
                    "solu",
                    "{solution_path}",
                ],
            ),
            SolutionFormat::Scip => (
                "scip",
                &[
                    "scip",
                    "-c",
                    "set limits time {time_limit}",
                    "-c",
                    "set limits gap {mip_gap}",
                    "-c",
                    "read {model_path}",
                    "-c",
                    "optimize",
                    "-c",
                    "write solution {solution_path}",
                    "-c",
                    "quit",
                ],
            ),
        };
        Self {
            name: name.into(),
            command: command.iter().map(|s| s.to_string()).collect(),
            model_format: ModelFormat::Lp,
            solution_format: format,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CommandAdapter {
    pub profile: SolverProfile,
}

impl CommandAdapter {
    pub fn new(profile: SolverProfile) -> Self {
        Self { profile }
    }

    fn fail(&self, message: impl Into<String>, diagnostics: impl Into<String>) -> MilpError {
        MilpError::Adapter {
            adapter: self.profile.name.clone(),
            message: message.into(),
            diagnostics: diagnostics.into(),
        }
    }
}

fn substitute(token: &str, vars: &[(&str, String)]) -> String {
    let mut s = token.to_string();
    for (k, v) in vars {
        s = s.replace(&format!("{{{k}}}"), v);
    }
    s
}

impl SolverAdapter for CommandAdapter {
    fn name(&self) -> &str {
        &self.profile.name
    }

    fn solve(&self, model: &MilpModel, config: &SolverConfig) -> Result<RawSolution, MilpError> {
        let dir = tempfile::tempdir()
            .map_err(|e| self.fail(format!("cannot create work directory: {e}"), ""))?;
        let (ext, text, code_map) = match self.profile.model_format {
            ModelFormat::Lp => ("lp", export_lp(model)?, HashMap::new()),
            ModelFormat::Mps => {
                let out = export_mps(model)?;
                (
                    "mps",
                    out.text,
                    out.name_map.into_iter().collect::<HashMap<_, _>>(),
                )
            }
        };
        let model_path = dir.path().join(format!("model.{ext}"));
        let solution_path = dir.path().join("model.sol");
        std::fs::write(&model_path, text)
            .map_err(|e| self.fail(format!("cannot write model: {e}"), ""))?;

        let limit = config.time_limit.map_or(1e7, |d| d.as_secs_f64());
        let vars = [
            ("model_path", model_path.display().to_string()),
            ("solution_path", solution_path.display().to_string()),
            ("time_limit", format!("{limit}")),
            ("mip_gap", format!("{}", config.mip_rel_gap)),
        ];
        let argv: Vec<String> = self
            .profile
            .command
            .iter()
            .map(|t| substitute(t, &vars))
            .collect();

        let start = Instant::now();
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| self.fail(format!("cannot launch {:?}: {e}", argv[0]), ""))?;
        let deadline = config.time_limit.map(|d| d + KILL_SLACK);
        loop {
            match child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) => {
                    if deadline.is_some_and(|d| start.elapsed() > d) {
                        let _ = child.kill();
                        break;
                    }
                    std::thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(self.fail(format!("waiting for solver failed: {e}"), "")),
            }
        }
        let output = child
            .wait_with_output()
            .map_err(|e| self.fail(format!("cannot collect output: {e}"), ""))?;
        let elapsed = start.elapsed();
        let diagnostics = format!(
            "exit: {}\nstdout:\n{}\nstderr:\n{}",
            output.status,
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
        let text = match std::fs::read_to_string(&solution_path) {
            Ok(t) => t,
            Err(e) => return Err(self.fail(format!("no solution file: {e}"), diagnostics)),
        };
        let parsed = parse_solution(self.profile.solution_format, &text)
            .map_err(|m| self.fail(format!("cannot parse solution: {m}"), diagnostics.clone()))?;
        assemble(model, parsed, &code_map, elapsed).map_err(|m| self.fail(m, diagnostics))
    }
}

/// Solver-agnostic content of a solution file.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ParsedSolution {
    pub status: SolveStatus,
    pub values: Vec<(String, f64)>,
    /// Whether variables missing from the file are zero (sparse writers).
    pub sparse: bool,
}

fn assemble(
    model: &MilpModel,
    parsed: ParsedSolution,
    code_map: &HashMap<String, String>,
    elapsed: Duration,
) -> Result<RawSolution, String> {
    if !parsed.status.has_solution() {
        return Ok(RawSolution::without_solution(
            parsed.status,
            elapsed,
            "no solution in file",
        ));
    }
    let mut values = vec![f64::NAN; model.num_vars()];
    for (name, v) in parsed.values {
        let full = code_map.get(&name).map_or(name.as_str(), |s| s.as_str());
        if let Some(id) = model.var_by_name(full) {
            values[id.0] = v;
        }
    }
    for (k, v) in values.iter_mut().enumerate() {
        if v.is_nan() {
            if parsed.sparse {
                *v = 0.0;
            } else {
                return Err(format!(
                    "solution misses variable {}",
                    model.variables()[k].name
                ));
            }
        }
    }
    Ok(RawSolution {
        status: parsed.status,
        objective: Some(model.evaluate_objective(&values)),
        values,
        solve_time: elapsed,
        gap: None,
        message: String::new(),
    })
}

pub(crate) fn parse_solution(format: SolutionFormat, text: &str) -> Result<ParsedSolution, String> {
    match format {
        SolutionFormat::Highs => parse_highs(text),
        SolutionFormat::Cbc => parse_cbc(text),
        SolutionFormat::Scip => parse_scip(text),
    }
}

fn parse_highs(text: &str) -> Result<ParsedSolution, String> {
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let status_line = lines
        .iter()
        .position(|l| *l == "Model status")
        .and_then(|k| lines.get(k + 1))
        .ok_or("missing model status")?;
    let columns_at = lines.iter().position(|l| l.starts_with("# Columns"));
    let has_values = columns_at.is_some()
        && !lines
            .iter()
            .any(|l| *l == "None" || l.starts_with("Infeasible"));
    let status = match *status_line {
        "Optimal" => SolveStatus::Optimal,
        "Infeasible" => SolveStatus::Infeasible,
        "Time limit reached" if has_values => SolveStatus::TimeLimit,
        _ if has_values => SolveStatus::Feasible,
        _ => SolveStatus::Error,
    };
    let mut values = Vec::new();
    if let Some(k) = columns_at.filter(|_| status.has_solution()) {
        let n: usize = lines[k]["# Columns".len()..]
            .trim()
            .parse()
            .map_err(|_| "bad column count")?;
        for l in &lines[k + 1..k + 1 + n] {
            let mut it = l.split_whitespace();
            let (name, v) = (
                it.next().ok_or("bad column line")?,
                it.next().ok_or("bad column line")?,
            );
            values.push((
                name.to_string(),
                v.parse().map_err(|_| format!("bad value {v}"))?,
            ));
        }
    }
    Ok(ParsedSolution {
        status,
        values,
        sparse: false,
    })
}

fn parse_cbc(text: &str) -> Result<ParsedSolution, String> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .ok_or("empty solution file")?
        .to_ascii_lowercase();
    let status = if head.starts_with("optimal") {
        SolveStatus::Optimal
    } else if head.contains("infeasible") {
        SolveStatus::Infeasible
    } else if head.starts_with("stopped on time") {
        SolveStatus::TimeLimit
    } else if head.starts_with("stopped") {
        SolveStatus::Feasible
    } else {
        SolveStatus::Error
    };
    if status == SolveStatus::TimeLimit && head.contains("no integer solution") {
        return Ok(ParsedSolution {
            status: SolveStatus::Error,
            values: vec![],
            sparse: true,
        });
    }
    let mut values = Vec::new();
    for l in lines {
        let l = l.trim_start_matches("**").trim();
        if l.is_empty() {
            continue;
        }
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() < 3 {
            return Err(format!("bad line {l:?}"));
        }
        values.push((
            parts[1].to_string(),
            parts[2]
                .parse()
                .map_err(|_| format!("bad value in {l:?}"))?,
        ));
    }
    Ok(ParsedSolution {
        status,
        values,
        sparse: true,
    })
}

fn parse_scip(text: &str) -> Result<ParsedSolution, String> {
    let mut status = SolveStatus::Error;
    let mut values = Vec::new();
    let mut saw_objective = false;
    for l in text.lines() {
        let l = l.trim();
        if let Some(s) = l.strip_prefix("solution status:") {
            let s = s.trim();
            status = if s.starts_with("optimal") {
                SolveStatus::Optimal
            } else if s.starts_with("infeasible") {
                SolveStatus::Infeasible
            } else if s.starts_with("time limit") {
                SolveStatus::TimeLimit
            } else {
                SolveStatus::Feasible
            };
        } else if l.starts_with("objective value:") {
            saw_objective = true;
        } else if l.starts_with("no solution available") {
            saw_objective = false;
        } else if saw_objective && !l.is_empty() {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() >= 2 {
                values.push((
                    parts[0].to_string(),
                    parts[1]
                        .parse()
                        .map_err(|_| format!("bad value in {l:?}"))?,
                ));
            }
        }
    }
    if status.has_solution() && !saw_objective {
        status = SolveStatus::Error;
    }
    Ok(ParsedSolution {
        status,
        values,
        sparse: true,
    })
}
