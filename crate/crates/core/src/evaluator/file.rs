use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PlanSolution, Violation};
use crate::error::{Error, Result};
use crate::instance::{Instance, SCHEMA_VERSION};

/// On-disk plan: sparse press production plus dense stock arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub schema_version: String,
    pub instance: String,
    /// `[item, press, period, y, x]` for every nonzero `y` or `x`.
    pub production: Vec<[u32; 5]>,
    /// `[tire][period]`
    pub inventory: Vec<Vec<u32>>,
    /// `[tire][class][period]`
    pub backorder: Vec<Vec<Vec<u32>>>,
    /// `[tire][period]`
    pub overstock: Vec<Vec<u32>>,
    /// `[tire][period]`
    pub understock: Vec<Vec<u32>>,
}

impl PlanFile {
    pub fn from_plan(inst: &Instance, plan: &PlanSolution) -> Self {
        let mut production = Vec::new();
        for (i, xi) in plan.x.iter().enumerate() {
            for (p, row) in xi.iter().enumerate() {
                for (t, &x) in row.iter().enumerate() {
                    let y = plan.y[i][p][t];
                    if x > 0 || y > 0 {
                        production.push([i as u32, p as u32, t as u32, y as u32, x]);
                    }
                }
            }
        }
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            instance: inst.meta.name.clone(),
            production,
            inventory: plan.inventory.clone(),
            backorder: plan.backorder.clone(),
            overstock: plan.overstock.clone(),
            understock: plan.understock.clone(),
        }
    }

    /// Expands into a plan of `inst`. Stored slacks are kept as written so
    /// that the audit sees them; indicators are recomputed.
    pub fn into_plan(self, inst: &Instance) -> Result<PlanSolution> {
        let (n, p, t) = (inst.sets.items, inst.sets.presses, inst.periods());
        let mut x = vec![vec![vec![0u32; t]; p]; n];
        let mut y = vec![vec![vec![0u8; t]; p]; n];
        for &[i, pp, tt, yy, xx] in &self.production {
            let (i, pp, tt) = (i as usize, pp as usize, tt as usize);
            if i >= n || pp >= p || tt >= t {
                return Err(Error::Dimension(format!(
                    "production entry ({i}, {pp}, {tt}) is out of range"
                )));
            }
            if yy > 1 {
                return Err(Error::Parse(format!(
                    "production entry ({i}, {pp}, {tt}) has y = {yy}"
                )));
            }
            x[i][pp][tt] = xx;
            y[i][pp][tt] = yy as u8;
        }
        let mut plan = PlanSolution::from_parts(inst, x, y, self.inventory, self.backorder)?;
        super::dims(&self.overstock, inst.sets.tires, t, "OS")?;
        super::dims(&self.understock, inst.sets.tires, t, "US")?;
        plan.overstock = self.overstock;
        plan.understock = self.understock;
        Ok(plan)
    }
}

pub fn save_plan(path: impl AsRef<Path>, inst: &Instance, plan: &PlanSolution) -> Result<()> {
    let text = serde_json::to_string(&PlanFile::from_plan(inst, plan))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_plan(path: impl AsRef<Path>, inst: &Instance) -> Result<PlanSolution> {
    let file: PlanFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    file.into_plan(inst)
}

/// Writes `tag,index,lhs,rhs` rows; the index is `:`-separated.
pub fn write_violations_csv(path: impl AsRef<Path>, violations: &[Violation]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["tag", "index", "lhs", "rhs"])?;
    for v in violations {
        let index = v
            .index
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(":");
        w.write_record([v.tag.clone(), index, v.lhs.to_string(), v.rhs.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
