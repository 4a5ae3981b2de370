//! Eligibility-restriction sensitivity study.
//!
//! A scenario limits a set of items to a list of presses; every
//! configuration scales the starting stock. Each (scenario, configuration)
//! cell is compared against the reference scenario under the same
//! configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{compare, compute_kpis, GapReport, KpiReport};
use crate::instance::Instance;
use crate::integrated::ObjectiveWeights;
use crate::matheuristic::{run_rolling_horizon, RunConfig};

/// Returns a copy of `inst` where the tires of `items` may only use
/// `presses`. History on presses that become ineligible is dropped.
pub fn restrict_eligibility(
    inst: &Instance,
    items: &[usize],
    presses: &[usize],
) -> Result<Instance> {
    let (n_n, p_n) = (inst.sets.items, inst.sets.presses);
    if let Some(&i) = items.iter().find(|&&i| i >= n_n) {
        return Err(Error::Scenario(format!(
            "item {i} is out of range (0..{n_n})"
        )));
    }
    if let Some(&p) = presses.iter().find(|&&p| p >= p_n) {
        return Err(Error::Scenario(format!(
            "press {p} is out of range (0..{p_n})"
        )));
    }
    let mut out = inst.clone();
    let mut tires: Vec<usize> = items.iter().map(|&i| inst.tire_of(i)).collect();
    tires.sort_unstable();
    tires.dedup();
    for &a in &tires {
        for p in 0..p_n {
            if !presses.contains(&p) {
                out.capacity.eligibility[a][p] = 0;
            }
        }
        if out.capacity.eligibility[a].iter().all(|&m| m == 0) {
            return Err(Error::Scenario(format!(
                "tire {a} has no eligible press left"
            )));
        }
    }
    for i in 0..n_n {
        for p in 0..p_n {
            if !out.eligible(i, p) {
                out.warm_state.production[i][p]
                    .iter_mut()
                    .for_each(|v| *v = 0);
            }
        }
    }
    if let Some(&[i, p, t]) = out
        .enforcement
        .production
        .iter()
        .find(|&&[i, p, _]| !out.eligible(i, p))
    {
        return Err(Error::Scenario(format!(
            "enforced run of item {i} on press {p} at period {t} is no longer eligible"
        )));
    }
    out.ensure_valid()?;
    Ok(out)
}

/// Starting stock scaled by `multiplier`, rounded to whole tires.
pub fn scale_initial_inventory(inst: &Instance, multiplier: f64) -> Result<Instance> {
    if !(multiplier.is_finite() && multiplier >= 0.0) {
        return Err(Error::Scenario(format!(
            "inventory multiplier {multiplier} must be finite and non-negative"
        )));
    }
    let mut out = inst.clone();
    for v in &mut out.inventory.initial {
        *v = (*v as f64 * multiplier).round() as u32;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    /// Items whose tires are restricted; all items when absent.
    #[serde(default)]
    pub items: Option<Vec<usize>>,
    /// Presses left to them; no restriction when absent.
    #[serde(default)]
    pub presses: Option<Vec<usize>>,
}

impl ScenarioSpec {
    pub fn apply(&self, inst: &Instance) -> Result<Instance> {
        match &self.presses {
            None => Ok(inst.clone()),
            Some(presses) => {
                let all: Vec<usize>;
                let items = match &self.items {
                    Some(items) => items.as_slice(),
                    None => {
                        all = (0..inst.sets.items).collect();
                        &all
                    }
                };
                restrict_eligibility(inst, items, presses)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryConfig {
    pub name: String,
    pub multiplier: f64,
}

/// Low, medium and high starting stock.
pub fn default_configs() -> Vec<InventoryConfig> {
    [("low", 0.25), ("medium", 1.0), ("high", 2.0)]
        .into_iter()
        .map(|(name, multiplier)| InventoryConfig {
            name: name.into(),
            multiplier,
        })
        .collect()
}

fn default_reference() -> String {
    "S0".into()
}

/// Contents of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default = "default_reference")]
    pub reference: String,
    pub scenarios: Vec<ScenarioSpec>,
    #[serde(default = "default_configs")]
    pub configurations: Vec<InventoryConfig>,
}

impl ScenarioFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        file.check()?;
        Ok(file)
    }

    pub fn check(&self) -> Result<()> {
        if !self.scenarios.iter().any(|s| s.name == self.reference) {
            return Err(Error::Scenario(format!(
                "reference scenario {} is not listed",
                self.reference
            )));
        }
        for (k, s) in self.scenarios.iter().enumerate() {
            if self.scenarios[..k].iter().any(|o| o.name == s.name) {
                return Err(Error::Scenario(format!(
                    "scenario {} is listed twice",
                    s.name
                )));
            }
        }
        if self.configurations.is_empty() {
            return Err(Error::Scenario("no inventory configuration".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioCell {
    pub scenario: String,
    pub config: String,
    pub report: Option<KpiReport>,
    /// Gaps against the reference scenario in the same configuration.
    pub gaps: Option<GapReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub reference: String,
    pub classes: usize,
    pub cells: Vec<ScenarioCell>,
}

impl ScenarioResult {
    pub fn get(&self, scenario: &str, config: &str) -> Option<&ScenarioCell> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario && c.config == config)
    }
}

/// Runs every (scenario, configuration) pair through `run_fn`. A failed
/// run is recorded in its cell; cells of a failed reference carry no gaps.
pub fn run_sensitivity<F>(
    base: &Instance,
    file: &ScenarioFile,
    mut run_fn: F,
) -> Result<ScenarioResult>
where
    F: FnMut(&Instance) -> Result<KpiReport>,
{
    file.check()?;
    let mut cells = Vec::new();
    for cfg in &file.configurations {
        let scaled = scale_initial_inventory(base, cfg.multiplier)?;
        let mut row: Vec<ScenarioCell> = file
            .scenarios
            .iter()
            .map(|s| {
                let outcome = s.apply(&scaled).and_then(|inst| run_fn(&inst));
                if let Err(e) = &outcome {
                    log::warn!("scenario {} under {} failed: {e}", s.name, cfg.name);
                }
                let (report, error) = match outcome {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                ScenarioCell {
                    scenario: s.name.clone(),
                    config: cfg.name.clone(),
                    report,
                    gaps: None,
                    error,
                }
            })
            .collect();
        let reference = row
            .iter()
            .find(|c| c.scenario == file.reference)
            .and_then(|c| c.report.clone());
        if let Some(reference) = reference {
            for cell in &mut row {
                if let Some(r) = &cell.report {
                    cell.gaps = Some(compare(&reference, r)?);
                }
            }
        }
        cells.extend(row);
    }
    Ok(ScenarioResult {
        reference: file.reference.clone(),
        classes: base.sets.classes,
        cells,
    })
}

/// Rolling-horizon run scored by its full-horizon KPIs; incomplete runs fail.
pub fn matheuristic_runner<'a>(
    weights: &'a ObjectiveWeights,
    config: &'a RunConfig,
) -> impl FnMut(&Instance) -> Result<KpiReport> + 'a {
    move |inst| {
        let result = run_rolling_horizon(inst, weights, config)?;
        match (&result.plan, &result.failure) {
            (Some(plan), _) => Ok(compute_kpis(inst, plan, weights)),
            (None, Some((week, reason))) => Err(Error::WeekFailed {
                week: *week,
                reason: reason.clone(),
            }),
            (None, None) => Err(Error::Scenario("run produced no plan".into())),
        }
    }
}

/// One line per cell: `scenario,config,status`, then each KPI value followed
/// by its gap in percent (`NA` on a zero reference).
pub fn write_results_csv(path: impl AsRef<Path>, result: &ScenarioResult) -> Result<()> {
    let names = KpiReport::names(result.classes);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["scenario".to_string(), "config".into(), "status".into()];
    for n in &names {
        header.push(n.clone());
        header.push(format!("{n}_gap"));
    }
    w.write_record(&header)?;
    for cell in &result.cells {
        let mut rec = vec![cell.scenario.clone(), cell.config.clone()];
        match &cell.report {
            None => {
                rec.push("failed".into());
                rec.extend(std::iter::repeat_n(String::new(), 2 * names.len()));
            }
            Some(r) => {
                rec.push("ok".into());
                for (k, v) in r.values().iter().enumerate() {
                    rec.push(v.to_string());
                    rec.push(match &cell.gaps {
                        Some(g) => g.gaps[k].percent.map_or("NA".into(), |p| format!("{p:.2}")),
                        None => String::new(),
                    });
                }
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
