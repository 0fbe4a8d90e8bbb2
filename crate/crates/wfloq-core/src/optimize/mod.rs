//! Classical outer loops driving the two encodings, plus the local-gradient
//! machinery they share.

mod nelder_mead;
mod sgd;

pub use nelder_mead::{MinimizeOutcome, Minimizer, NelderMead};
pub use sgd::{sgd_optimize_sqoe, sgd_optimize_sqoe_from, warm_start, WarmStart};

use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{pce_build_ansatz, pce_enumerate, PceConfig};
use crate::error::{Error, Result};
use crate::farm::{FarmProblem, Layout};
use crate::qubo::{assemble_qubo, to_ising, IsingModel, QuboMatrix};
use crate::sim::{exact_expectation, run_circuit};
use crate::solvers::check_validity;

/// A problem with its assembled cost matrix and spin form, shared read-only
/// by optimization runs.
#[derive(Debug, Clone)]
pub struct CompiledProblem {
    pub problem: FarmProblem,
    pub qubo: QuboMatrix,
    pub ising: IsingModel,
}

impl CompiledProblem {
    pub fn compile(problem: FarmProblem) -> Result<Self> {
        let qubo = assemble_qubo(&problem)?;
        let ising = to_ising(&qubo);
        Ok(Self {
            problem,
            qubo,
            ising,
        })
    }

    pub fn variable_count(&self) -> usize {
        self.qubo.dimension()
    }
}

/// Hyperparameters for both outer loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Iteration cap.
    pub max_iterations: usize,
    /// Parameters whose gradient is estimated per iteration; `None` picks
    /// `min(qubits, ceil(N / 8))`.
    pub batch: Option<usize>,
    /// Central-difference half-step bounds in radians.
    pub h_min: f64,
    pub h_max: f64,
    pub learning_rate: f64,
    /// Largest parameter move per iteration in radians; gradient steps are
    /// clipped here because penalty-weighted costs make raw gradients span
    /// orders of magnitude.
    pub max_step: f64,
    /// Stop after this many iterations without improving the best layout.
    pub stall_window: usize,
    pub seed: u64,
    /// Shots per expectation batch; `None` runs noiseless.
    pub shots: Option<u64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            batch: None,
            h_min: 0.05,
            h_max: 1.0,
            learning_rate: 0.3,
            max_step: 0.5,
            stall_window: 200,
            seed: 0,
            shots: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_min > 0.0 && self.h_min <= self.h_max) {
            return Err(Error::Config(format!(
                "need 0 < h_min <= h_max, got [{}, {}]",
                self.h_min, self.h_max
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("need at least one iteration".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::Config("max step must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// One point of an optimization trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    /// Relaxed spin cost at the current parameters.
    pub relaxed_cost: f64,
    /// Best rounded-layout cost seen so far.
    pub best_cost: f64,
}

/// Result of a single optimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub best_layout: Layout,
    /// Full QUBO cost of the best rounded layout, offset included.
    pub best_cost: f64,
    /// Model power recomputed from the layout, never from the relaxed cost.
    pub model_power: f64,
    pub turbine_count: usize,
    /// Turbine count equals the budget, spacing respected, no high-avoidance
    /// site occupied.
    pub valid: bool,
    pub iterations: usize,
    pub wall_time: Duration,
    pub trace: Vec<TracePoint>,
}

impl RunResult {
    pub(crate) fn finalize(
        compiled: &CompiledProblem,
        best_layout: Layout,
        best_cost: f64,
        iterations: usize,
        wall_time: Duration,
        trace: Vec<TracePoint>,
    ) -> Result<Self> {
        let model_power = compiled.problem.layout_power(&best_layout)?;
        let validity = check_validity(&compiled.problem, &best_layout)?;
        Ok(Self {
            turbine_count: best_layout.turbine_count(),
            valid: validity.is_valid(),
            best_layout,
            best_cost,
            model_power,
            iterations,
            wall_time,
            trace,
        })
    }

    /// Trace as CSV with an `iteration,relaxed_cost,best_cost` header.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,relaxed_cost,best_cost\n");
        for p in &self.trace {
            out.push_str(&format!(
                "{},{:?},{:?}\n",
                p.iteration, p.relaxed_cost, p.best_cost
            ));
        }
        out
    }
}

/// The objective both optimizers minimize: the Ising cost at the
/// tanh-relaxed spins `s_i = tanh(t * raw_i)`.
pub fn relaxed_cost(model: &IsingModel, raw: &[f64], step_scale: f64) -> Result<f64> {
    if raw.len() != model.dimension() {
        return Err(Error::Dimension {
            expected: model.dimension(),
            got: raw.len(),
        });
    }
    let spins: Vec<f64> = raw.iter().map(|&r| (step_scale * r).tanh()).collect();
    model.evaluate(&spins)
}

/// Exact cost difference from changing only the listed variables, using only
/// their coupling rows and columns: `O(|changes| * N)` work.
///
/// On a quadratic this is an identity, not an approximation: the return value
/// equals `f(s') - f(s)` with `s'` the updated spin vector.
pub fn local_cost_delta(
    model: &IsingModel,
    spins: &[f64],
    changes: &[(usize, f64)],
) -> Result<f64> {
    let n = model.dimension();
    if spins.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: spins.len(),
        });
    }
    for &(i, _) in changes {
        if i >= n {
            return Err(Error::OutOfRange { index: i, len: n });
        }
    }
    let changed = |j: usize| changes.iter().any(|&(i, _)| i == j);
    let mut delta = 0.0;
    for &(i, new) in changes {
        let step = new - spins[i];
        delta += model.field(i) * step;
        let row = model.coupling_row(i);
        for (j, &sj) in spins.iter().enumerate() {
            if !changed(j) {
                delta += (row[j] + model.coupling(j, i)) * step * sj;
            }
        }
    }
    // Pairs inside the change set, counted once per ordered pair.
    for &(i, si_new) in changes {
        for &(j, sj_new) in changes {
            if i != j {
                delta += model.coupling(i, j) * (si_new * sj_new - spins[i] * spins[j]);
            }
        }
    }
    Ok(delta)
}

/// Minimizes the relaxed cost over the correlator-encoding ansatz parameters
/// with the simplex minimizer, tracking the best rounded layout by full QUBO
/// cost across every objective evaluation.
pub fn simplex_optimize_pce(
    compiled: &CompiledProblem,
    pce: &PceConfig,
    config: &OptimizerConfig,
) -> Result<RunResult> {
    config.validate()?;
    let started = Instant::now();
    let n_vars = compiled.variable_count();
    let map = pce_enumerate(pce.qubits, pce.body, n_vars)?;
    let ansatz = pce_build_ansatz(pce.qubits, pce.body)?;
    let step_scale = crate::encoding::DEFAULT_STEP_SCALE;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start: Vec<f64> = (0..ansatz.parameter_count())
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();

    let mut best_cost = f64::INFINITY;
    let mut best_layout = Layout::empty(n_vars);
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut evaluation = 0usize;
    let mut objective = |params: &[f64]| -> f64 {
        evaluation += 1;
        let circuit = match ansatz.bind(params) {
            Ok(c) => c,
            Err(_) => return f64::INFINITY,
        };
        let state = match run_circuit(&circuit) {
            Ok(s) => s,
            Err(_) => return f64::INFINITY,
        };
        let mut raw = Vec::with_capacity(n_vars);
        for obs in map.observables() {
            match exact_expectation(&state, obs) {
                Ok(value) => raw.push(value),
                Err(_) => return f64::INFINITY,
            }
        }
        let layout = Layout::from_bools(raw.iter().map(|&r| r > 0.0).collect());
        if let Ok(cost) = compiled.qubo.evaluate(&layout) {
            if cost < best_cost {
                best_cost = cost;
                best_layout = layout;
            }
        }
        let relaxed = relaxed_cost(&compiled.ising, &raw, step_scale).unwrap_or(f64::INFINITY);
        trace.push(TracePoint {
            iteration: evaluation,
            relaxed_cost: relaxed,
            best_cost,
        });
        relaxed
    };

    let minimizer = NelderMead {
        max_iterations: config.max_iterations,
        stall_window: config.stall_window,
        ..NelderMead::default()
    };
    let outcome = minimizer.minimize(&mut objective, &start);

    RunResult::finalize(
        compiled,
        best_layout,
        best_cost,
        outcome.iterations,
        started.elapsed(),
        trace,
    )
}
