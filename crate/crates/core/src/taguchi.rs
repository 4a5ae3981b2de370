//! Objective-weight calibration with an L16(4^5) orthogonal array.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::KpiReport;
use crate::instance::Instance;
use crate::integrated::{compute_normalizers, ObjectiveWeights};

/// Factor names in array column order.
pub const FACTORS: [&str; 5] = ["BC1", "OS", "BC2", "BC3", "US"];

/// Four candidate values for each weight, in [`FACTORS`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorLevels {
    pub levels: [[f64; 4]; 5],
}

impl Default for FactorLevels {
    fn default() -> Self {
        Self {
            levels: [
                [20.0, 40.0, 60.0, 80.0],
                [12.0, 24.0, 36.0, 48.0],
                [4.0, 8.0, 12.0, 16.0],
                [3.0, 6.0, 9.0, 12.0],
                [1.0, 2.0, 3.0, 4.0],
            ],
        }
    }
}

impl FactorLevels {
    pub fn check(&self) -> Result<()> {
        for (f, row) in self.levels.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Calibration(format!(
                        "{} level {} is {v}",
                        FACTORS[f],
                        k + 1
                    )));
                }
                if row[..k].contains(&v) {
                    return Err(Error::Calibration(format!(
                        "{} repeats level value {v}",
                        FACTORS[f]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let levels: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        levels.check()?;
        Ok(levels)
    }

    /// Weights of one array row (level indices from 0). Classes past the
    /// third take the third class's weight.
    pub fn weights(&self, row: &[usize; 5], classes: usize) -> ObjectiveWeights {
        let v = |f: usize| self.levels[f][row[f]];
        let per_class = [v(0), v(2), v(3)];
        ObjectiveWeights {
            classes: (0..classes).map(|c| per_class[c.min(2)]).collect(),
            overstock: v(1),
            understock: v(4),
        }
    }
}

/// The standard L16(4^5) array, level indices from 0.
pub fn l16_array() -> [[usize; 5]; 16] {
    const ROWS: [&str; 16] = [
        "11111", "12222", "13333", "14444", "21234", "22143", "23412", "24321", "31342", "32431",
        "33124", "34213", "41423", "42314", "43241", "44132",
    ];
    let mut out = [[0; 5]; 16];
    for (r, digits) in ROWS.iter().enumerate() {
        for (c, d) in digits.bytes().enumerate() {
            out[r][c] = (d - b'1') as usize;
        }
    }
    out
}

/// True when every pair of columns holds every level pair equally often.
pub fn is_orthogonal(array: &[[usize; 5]]) -> bool {
    let levels = 4;
    let per_pair = array.len() / (levels * levels);
    (0..5).all(|a| {
        (a + 1..5).all(|b| {
            let mut counts = [[0usize; 4]; 4];
            for row in array {
                counts[row[a]][row[b]] += 1;
            }
            counts.iter().flatten().all(|&n| n == per_pair)
        })
    })
}

/// Smaller-is-better signal-to-noise ratio in decibels.
pub fn sn_ratio(responses: &[f64]) -> Result<f64> {
    if responses.is_empty() {
        return Err(Error::Calibration("no responses".into()));
    }
    if responses.iter().any(|z| !(z.is_finite() && *z >= 0.0)) {
        return Err(Error::Calibration(
            "responses must be finite and non-negative".into(),
        ));
    }
    let mean_sq = responses.iter().map(|z| z * z).sum::<f64>() / responses.len() as f64;
    if mean_sq == 0.0 {
        return Err(Error::Calibration(
            "ratio is undefined for all-zero responses".into(),
        ));
    }
    Ok(-10.0 * mean_sq.log10())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoeRow {
    /// Row number from 1.
    pub row: usize,
    pub levels: [usize; 5],
    pub weights: ObjectiveWeights,
    pub report: Option<KpiReport>,
    pub sn: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoeReport {
    pub rows: Vec<DoeRow>,
    /// `[factor][level]`, mean S/N of the successful rows at that level.
    pub effects: [[Option<f64>; 4]; 5],
    /// Row number with the largest S/N.
    pub best_row: Option<usize>,
}

/// Runs all sixteen rows; the response of a row is its objective value.
/// Failed rows are reported and left out of the effects.
pub fn run_doe<F>(instance: &Instance, levels: &FactorLevels, mut run_fn: F) -> Result<DoeReport>
where
    F: FnMut(&Instance, &ObjectiveWeights) -> Result<KpiReport>,
{
    levels.check()?;
    let mut rows = Vec::new();
    for (r, lv) in l16_array().iter().enumerate() {
        let weights = levels.weights(lv, instance.sets.classes);
        let outcome =
            run_fn(instance, &weights).and_then(|rep| sn_ratio(&[rep.of]).map(|sn| (rep, sn)));
        let row = match outcome {
            Ok((rep, sn)) => DoeRow {
                row: r + 1,
                levels: *lv,
                weights,
                report: Some(rep),
                sn: Some(sn),
                error: None,
            },
            Err(e) => {
                log::warn!("design row {} failed: {e}", r + 1);
                DoeRow {
                    row: r + 1,
                    levels: *lv,
                    weights,
                    report: None,
                    sn: None,
                    error: Some(e.to_string()),
                }
            }
        };
        rows.push(row);
    }
    let mut effects = [[None; 4]; 5];
    for (f, eff) in effects.iter_mut().enumerate() {
        for (k, slot) in eff.iter_mut().enumerate() {
            let sns: Vec<f64> = rows
                .iter()
                .filter(|r| r.levels[f] == k)
                .filter_map(|r| r.sn)
                .collect();
            if !sns.is_empty() {
                *slot = Some(sns.iter().sum::<f64>() / sns.len() as f64);
            }
        }
    }
    let best_row = rows
        .iter()
        .filter_map(|r| r.sn.map(|sn| (r.row, sn)))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(row, _)| row);
    Ok(DoeReport {
        rows,
        effects,
        best_row,
    })
}

/// `(BC1, OS, BC2, BC3, US)` of a report; missing classes read as zero.
pub fn company_tuple(report: &KpiReport) -> [f64; 5] {
    let c = |k: usize| report.classes.get(k).copied().unwrap_or(0.0);
    [c(0), report.os, c(1), c(2), report.us]
}

/// Indices sorted by (BC1, OS, BC2, BC3, US), ties kept in input order.
pub fn rank_by_company_rules(tuples: &[[f64; 5]]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..tuples.len()).collect();
    order.sort_by(|&a, &b| {
        tuples[a]
            .iter()
            .zip(&tuples[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

/// Share of each weighted objective term in the objective value, in
/// [`FACTORS`] order, as percentages. Classes past the third are folded
/// into the third.
pub fn contributions(inst: &Instance, report: &KpiReport, weights: &ObjectiveWeights) -> [f64; 5] {
    let (lc, los, lus) = compute_normalizers(inst).coefficients(weights);
    let mut terms = [0.0; 5];
    for (c, (b, k)) in report.classes.iter().zip(&lc).enumerate() {
        let slot = [0, 2, 3][c.min(2)];
        terms[slot] += b * k;
    }
    terms[1] = report.os * los;
    terms[4] = report.us * lus;
    let total: f64 = terms.iter().sum();
    if total > 0.0 {
        terms.map(|t| t / total * 100.0)
    } else {
        [0.0; 5]
    }
}

/// Writes `row,L_BC1..L_US,BC1..BCγ,BT,OS,US,OF,SN` with one line per row.
pub fn write_doe_csv(path: impl AsRef<Path>, report: &DoeReport) -> Result<()> {
    let classes = report
        .rows
        .iter()
        .find_map(|r| r.report.as_ref())
        .map_or(0, |r| r.classes.len());
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["row".to_string()];
    header.extend(FACTORS.iter().map(|f| format!("L_{f}")));
    header.extend(KpiReport::names(classes));
    header.push("SN".into());
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![r.row.to_string()];
        rec.extend(r.levels.iter().map(|l| (l + 1).to_string()));
        match &r.report {
            Some(k) => rec.extend(k.values().iter().map(|v| v.to_string())),
            None => rec.extend(std::iter::repeat_n(String::new(), classes + 4)),
        }
        rec.push(r.sn.map(|s| s.to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `factor,level,mean_sn`.
pub fn write_effects_csv(path: impl AsRef<Path>, report: &DoeReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["factor", "level", "mean_sn"])?;
    for (f, eff) in report.effects.iter().enumerate() {
        for (k, v) in eff.iter().enumerate() {
            w.write_record([
                FACTORS[f].to_string(),
                (k + 1).to_string(),
                v.map(|x| x.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
