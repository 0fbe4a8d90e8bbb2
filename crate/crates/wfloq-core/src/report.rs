//! The run-report document shared by classical and encoding-based solvers.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::farm::{FarmProblem, Layout};
use crate::optimize::RunResult;
use crate::solvers::{check_validity, SolveReport};

/// One solver run in a serializable, method-agnostic form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub seed: u64,
    /// Occupancy bits in site order, site 0 first.
    pub layout: String,
    pub cost: f64,
    pub model_power: f64,
    pub turbine_count: usize,
    pub valid: bool,
    pub iterations: u64,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn from_run_result(method: &str, seed: u64, run: &RunResult) -> Self {
        Self {
            method: method.to_string(),
            seed,
            layout: run.best_layout.to_bit_string(),
            cost: run.best_cost,
            model_power: run.model_power,
            turbine_count: run.turbine_count,
            valid: run.valid,
            iterations: run.iterations as u64,
            wall_time_s: run.wall_time.as_secs_f64(),
        }
    }

    pub fn from_solve_report(
        method: &str,
        seed: u64,
        problem: &FarmProblem,
        report: &SolveReport,
    ) -> Result<Self> {
        let validity = check_validity(problem, &report.best_layout)?;
        Ok(Self {
            method: method.to_string(),
            seed,
            layout: report.best_layout.to_bit_string(),
            cost: report.best_cost,
            model_power: problem.layout_power(&report.best_layout)?,
            turbine_count: validity.turbine_count,
            valid: validity.is_valid(),
            iterations: report.evaluations,
            wall_time_s: report.wall_time.as_secs_f64(),
        })
    }

    pub fn parse_layout(&self) -> Layout {
        Layout::from_bools(self.layout.chars().map(|c| c == '1').collect())
    }
}
