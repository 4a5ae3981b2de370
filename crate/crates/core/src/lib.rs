//! Lot sizing and press scheduling for tire-curing workshops.
//!
//! The crate builds the integrated mixed-integer model of the curing
//! workshop, a two-stage matheuristic (lot sizing on mold counts, then press
//! assignment) run over a rolling weekly horizon, an independent plan
//! auditor, objective-weight calibration by orthogonal arrays and an
//! eligibility sensitivity study.

pub mod assp;
pub mod baseline;
pub mod error;
pub mod evaluator;
pub mod instance;
pub mod integrated;
pub mod lssp;
pub mod matheuristic;
pub mod milp;
pub mod scenarios;
pub mod taguchi;

pub use error::{Error, Result};
pub use evaluator::{KpiReport, PlanSolution};
pub use instance::Instance;
pub use integrated::ObjectiveWeights;
