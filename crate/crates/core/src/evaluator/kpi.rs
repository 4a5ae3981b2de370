use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PlanSolution;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::integrated::{compute_normalizers, ObjectiveWeights};

/// Backorders per class, total backorders, overstock, understock (tire
/// counts) and the normalized objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub classes: Vec<f64>,
    pub bt: f64,
    pub os: f64,
    pub us: f64,
    pub of: f64,
}

impl KpiReport {
    /// KPI names in report order: `BC1..BCγ, BT, OS, US, OF`.
    pub fn names(classes: usize) -> Vec<String> {
        let mut out: Vec<String> = (1..=classes).map(|c| format!("BC{c}")).collect();
        out.extend(["BT", "OS", "US", "OF"].map(String::from));
        out
    }

    pub fn values(&self) -> Vec<f64> {
        let mut out = self.classes.clone();
        out.extend([self.bt, self.os, self.us, self.of]);
        out
    }

    fn from_values(classes: usize, v: &[f64]) -> Self {
        Self {
            classes: v[..classes].to_vec(),
            bt: v[classes],
            os: v[classes + 1],
            us: v[classes + 2],
            of: v[classes + 3],
        }
    }
}

pub fn compute_kpis(inst: &Instance, plan: &PlanSolution, weights: &ObjectiveWeights) -> KpiReport {
    compute_kpis_range(inst, plan, weights, 0..inst.periods())
}

/// KPIs over `periods` only, with the normalizers of the whole instance, so
/// reports of consecutive ranges add up to the full-horizon report.
pub fn compute_kpis_range(
    inst: &Instance,
    plan: &PlanSolution,
    weights: &ObjectiveWeights,
    periods: std::ops::Range<usize>,
) -> KpiReport {
    let (a_n, g_n) = (inst.sets.tires, inst.sets.classes);
    let sum2 = |v: &Vec<Vec<u32>>| -> f64 {
        (0..a_n)
            .map(|a| periods.clone().map(|t| v[a][t] as f64).sum::<f64>())
            .sum()
    };
    let classes: Vec<f64> = (0..g_n)
        .map(|c| {
            (0..a_n)
                .map(|a| {
                    periods
                        .clone()
                        .map(|t| plan.backorder[a][c][t] as f64)
                        .sum::<f64>()
                })
                .sum()
        })
        .collect();
    let os = sum2(&plan.overstock);
    let us = sum2(&plan.understock);
    let (lc, los, lus) = compute_normalizers(inst).coefficients(weights);
    let of = classes.iter().zip(&lc).map(|(b, k)| b * k).sum::<f64>() + los * os + lus * us;
    KpiReport {
        bt: classes.iter().sum(),
        classes,
        os,
        us,
        of,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub kpi: String,
    pub reference: f64,
    pub value: f64,
    /// Percent change from the reference; `None` when the reference is zero.
    pub percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gaps: Vec<Gap>,
}

impl GapReport {
    pub fn get(&self, kpi: &str) -> Option<&Gap> {
        self.gaps.iter().find(|g| g.kpi == kpi)
    }
}

impl fmt::Display for GapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, g) in self.gaps.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            match g.percent {
                Some(p) => write!(f, "{}={:+.0}%", g.kpi, p)?,
                None => write!(f, "{}=NA", g.kpi)?,
            }
        }
        Ok(())
    }
}

fn percent(reference: f64, value: f64) -> Option<f64> {
    if reference == 0.0 || !reference.is_finite() || !value.is_finite() {
        None
    } else {
        Some((value - reference) / reference * 100.0)
    }
}

/// Gaps of `b` against the reference `a`; negative means `b` is smaller.
pub fn compare(a: &KpiReport, b: &KpiReport) -> Result<GapReport> {
    if a.classes.len() != b.classes.len() {
        return Err(Error::Dimension(format!(
            "{} vs {} demand classes",
            a.classes.len(),
            b.classes.len()
        )));
    }
    let names = KpiReport::names(a.classes.len());
    let gaps = names
        .into_iter()
        .zip(a.values().into_iter().zip(b.values()))
        .map(|(kpi, (reference, value))| Gap {
            kpi,
            reference,
            value,
            percent: percent(reference, value),
        })
        .collect();
    Ok(GapReport { gaps })
}

/// Spread of one KPI's gaps over several comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStat {
    pub kpi: String,
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean, standard deviation, minimum and maximum per KPI, skipping NA gaps.
pub fn summarize_gaps(reports: &[GapReport]) -> Vec<GapStat> {
    let Some(first) = reports.first() else {
        return Vec::new();
    };
    first
        .gaps
        .iter()
        .map(|g| {
            let xs: Vec<f64> = reports
                .iter()
                .filter_map(|r| r.get(&g.kpi).and_then(|x| x.percent))
                .collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            GapStat {
                kpi: g.kpi.clone(),
                count: xs.len(),
                mean,
                std_dev: var.sqrt(),
                min: xs.iter().copied().fold(f64::INFINITY, f64::min),
                max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

/// Writes `dataset,BC1..BCγ,BT,OS,US,OF` rows.
pub fn write_kpi_csv(path: impl AsRef<Path>, rows: &[(String, KpiReport)]) -> Result<()> {
    let classes = rows.first().map_or(0, |r| r.1.classes.len());
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["dataset".to_string()];
    header.extend(KpiReport::names(classes));
    w.write_record(&header)?;
    for (name, r) in rows {
        if r.classes.len() != classes {
            return Err(Error::Dimension(format!(
                "report {name} has {} classes",
                r.classes.len()
            )));
        }
        let mut rec = vec![name.clone()];
        rec.extend(r.values().iter().map(|v| {
            if v.is_nan() {
                String::new()
            } else {
                v.to_string()
            }
        }));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a KPI CSV written by [`write_kpi_csv`]. Empty cells read as NaN.
pub fn read_kpi_csv(path: impl AsRef<Path>) -> Result<Vec<(String, KpiReport)>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let classes = header.iter().filter(|h| h.starts_with("BC")).count();
    if header.len() != classes + 5 || header.get(0) != Some("dataset") {
        return Err(Error::Parse(format!("unexpected KPI header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals = rec
            .iter()
            .skip(1)
            .map(|c| {
                if c.trim().is_empty() {
                    Ok(f64::NAN)
                } else {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("KPI cell {c:?}: {e}")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push((rec[0].to_string(), KpiReport::from_values(classes, &vals)));
    }
    Ok(out)
}
