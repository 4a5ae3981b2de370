use serde::{Deserialize, Serialize};

use crate::milp::ModelSize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaModel {
    Integrated,
    Lssp,
    Assp,
}

/// Published closed-form sizes for `n` items, `p` presses, `t` periods and
/// `w` workshops. Continuous variables are not counted by the formulas.
pub fn closed_form_size(model: FormulaModel, n: usize, p: usize, t: usize, w: usize) -> ModelSize {
    let (npt, nt, pt) = (n * p * t, n * t, p * t);
    let (binaries, integers, constraints) = match model {
        FormulaModel::Integrated => (
            4 * npt + 2 * nt,
            2 * npt + 3 * nt,
            21 * npt + 10 * nt + 2 * pt + 5 * t + w + 4,
        ),
        FormulaModel::Lssp => (
            npt + 6 * nt,
            npt + 4 * nt,
            3 * npt + 15 * nt + pt + 4 * t + w + 4,
        ),
        FormulaModel::Assp => (
            4 * npt + 2 * nt,
            2 * npt,
            21 * npt + 3 * nt + 2 * pt + 5 * t + w + 4,
        ),
    };
    ModelSize {
        binaries,
        integers,
        continuous: 0,
        constraints,
    }
}
