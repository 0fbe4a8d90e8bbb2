//! Stochastic gradient descent for the single-qubit operator encoding.
//!
//! Per iteration a random batch of rotation parameters is selected (one per
//! distinct qubit, so a single counts table can serve the whole batch in shot
//! mode), each gradient is estimated by a central difference with a half-step
//! drawn fresh from `[h_min, h_max]`, and the two cost evaluations per
//! parameter touch only the rows and columns of the two spin variables that
//! parameter drives.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{local_cost_delta, CompiledProblem, OptimizerConfig, RunResult, TracePoint};
use crate::encoding::{
    sqoe_expectations, sqoe_expectations_sampled, SlotAxis, SqoeConfig,
};
use crate::error::{Error, Result};
use crate::farm::Layout;

/// Avoidance weight above which a site is pinned to zero by the warm start.
pub const WARM_START_AVOIDANCE_THRESHOLD: f64 = 0.5;

/// A warm-started parameter vector with its frozen-parameter mask.
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub theta: Vec<f64>,
    /// Parameters excluded from gradient batches.
    pub frozen: Vec<bool>,
}

/// Finds an angle whose Z and X slot readouts carry the requested signs,
/// preferring the angle that saturates both readouts the most.
fn angle_for_signs(config: &SqoeConfig, want_z: bool, want_x: bool) -> f64 {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for step in 0..720 {
        let theta = step as f64 * std::f64::consts::TAU / 720.0;
        let z = config.slot_value(SlotAxis::Z, theta);
        let x = config.slot_value(SlotAxis::X, theta);
        if (z > 0.0) == want_z && (x > 0.0) == want_x {
            let margin = z.abs().min(x.abs());
            if margin > best.0 {
                best = (margin, theta);
            }
        }
    }
    if best.0 > f64::NEG_INFINITY {
        return best.1;
    }
    // No angle carries both signs under this transform; match the Z slot.
    if want_z {
        0.0
    } else {
        std::f64::consts::PI
    }
}

/// Builds a warm start from the problem structure: every site with avoidance
/// weight above the threshold is pinned to zero and its parameter frozen,
/// then exactly `M` of the remaining variables start occupied, picked by the
/// strongest (most negative) assembled diagonal.
pub fn warm_start(compiled: &CompiledProblem, config: &SqoeConfig) -> Result<WarmStart> {
    let n = compiled.variable_count();
    if config.variable_count() != n {
        return Err(Error::Dimension {
            expected: n,
            got: config.variable_count(),
        });
    }
    let zero = vec![0.0; n];
    let avoidance = compiled.problem.avoidance.as_deref().unwrap_or(&zero);

    let parameter_count = config.parameter_count();
    let mut frozen = vec![false; parameter_count];
    let mut frozen_variables = 0usize;
    for (variable, &p) in avoidance.iter().enumerate() {
        if p > WARM_START_AVOIDANCE_THRESHOLD {
            frozen[variable / 2] = true;
        }
    }
    for (m, &is_frozen) in frozen.iter().enumerate() {
        if is_frozen {
            let (z_var, x_var) = config.variables_of_parameter(m);
            frozen_variables += 1 + usize::from(x_var.is_some());
            let _ = z_var;
        }
    }
    let budget = compiled.problem.max_turbines;
    if frozen_variables > n - budget {
        return Err(Error::Config(format!(
            "warm start freezes {frozen_variables} of {n} sites, leaving fewer than {budget}"
        )));
    }

    // Pick the M strongest unfrozen diagonals to start occupied.
    let mut candidates: Vec<usize> = (0..n).filter(|&v| !frozen[v / 2]).collect();
    candidates.sort_by(|&a, &b| {
        compiled
            .qubo
            .get(a, a)
            .total_cmp(&compiled.qubo.get(b, b))
            .then(a.cmp(&b))
    });
    let mut occupied = vec![false; n];
    for &v in candidates.iter().take(budget) {
        occupied[v] = true;
    }

    let theta = (0..parameter_count)
        .map(|m| {
            let (z_var, x_var) = config.variables_of_parameter(m);
            let want_z = occupied[z_var] && !frozen[m];
            let want_x = x_var.map(|v| occupied[v] && !frozen[m]).unwrap_or(false);
            angle_for_signs(config, want_z, want_x)
        })
        .collect();

    Ok(WarmStart { theta, frozen })
}

/// SGD over the SQOE parameter store, cold-started uniformly in `[0, 2pi)`.
pub fn sgd_optimize_sqoe(
    compiled: &CompiledProblem,
    sqoe: &SqoeConfig,
    config: &OptimizerConfig,
) -> Result<RunResult> {
    sgd_optimize_sqoe_from(compiled, sqoe, config, None)
}

/// SGD with an optional warm start.
pub fn sgd_optimize_sqoe_from(
    compiled: &CompiledProblem,
    sqoe: &SqoeConfig,
    config: &OptimizerConfig,
    warm: Option<&WarmStart>,
) -> Result<RunResult> {
    config.validate()?;
    let n = compiled.variable_count();
    if sqoe.variable_count() != n {
        return Err(Error::Dimension {
            expected: n,
            got: sqoe.variable_count(),
        });
    }
    let started = Instant::now();
    let parameter_count = sqoe.parameter_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let (mut theta, frozen) = match warm {
        Some(w) => {
            if w.theta.len() != parameter_count || w.frozen.len() != parameter_count {
                return Err(Error::Dimension {
                    expected: parameter_count,
                    got: w.theta.len(),
                });
            }
            (w.theta.clone(), w.frozen.clone())
        }
        None => (
            (0..parameter_count)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect(),
            vec![false; parameter_count],
        ),
    };
    let initial_theta = theta.clone();

    let free_parameters: Vec<usize> = (0..parameter_count).filter(|&m| !frozen[m]).collect();
    let batch_size = config
        .batch
        .unwrap_or_else(|| sqoe.qubits().min(n.div_ceil(8)).max(1))
        .min(free_parameters.len().max(1));

    let step_scale = sqoe.step_scale;
    let mut raw = sqoe_expectations(sqoe, &theta)?;
    let mut spins: Vec<f64> = raw.iter().map(|&r| (step_scale * r).tanh()).collect();

    let evaluate_layout = |raw: &[f64]| -> Result<(Layout, f64)> {
        let layout = Layout::from_bools(raw.iter().map(|&r| r > 0.0).collect());
        let cost = compiled.qubo.evaluate(&layout)?;
        Ok((layout, cost))
    };

    let (mut best_layout, mut best_cost) = evaluate_layout(&raw)?;
    let mut trace = Vec::with_capacity(config.max_iterations.min(4096) + 1);
    trace.push(TracePoint {
        iteration: 0,
        relaxed_cost: compiled.ising.evaluate(&spins)?,
        best_cost,
    });

    let mut stall = 0usize;
    let mut iterations = 0usize;
    let mut order = free_parameters.clone();

    for iteration in 1..=config.max_iterations {
        iterations = iteration;
        if order.is_empty() {
            break;
        }
        // Batch of parameters on pairwise-distinct qubits.
        order.shuffle(&mut rng);
        let mut used_qubits = vec![false; sqoe.qubits()];
        let mut batch = Vec::with_capacity(batch_size);
        for &m in &order {
            if batch.len() == batch_size {
                break;
            }
            let qubit = sqoe.parameter_qubit(m);
            if !used_qubits[qubit] {
                used_qubits[qubit] = true;
                batch.push(m);
            }
        }

        let half_steps: Vec<f64> = batch
            .iter()
            .map(|_| rng.random_range(config.h_min..=config.h_max))
            .collect();

        // Raw slot readouts at theta_m +/- h_m for every batch member.
        let (plus_raw, minus_raw) = match config.shots {
            None => {
                let values = |shift: f64| -> Vec<(f64, f64)> {
                    batch
                        .iter()
                        .zip(&half_steps)
                        .map(|(&m, &h)| {
                            let angle = theta[m] + shift * h;
                            (
                                sqoe.slot_value(SlotAxis::Z, angle),
                                sqoe.slot_value(SlotAxis::X, angle),
                            )
                        })
                        .collect()
                };
                (values(1.0), values(-1.0))
            }
            Some(shots) => {
                let sampled = |shift: f64, seed: u64| -> Result<Vec<(f64, f64)>> {
                    let mut shifted = theta.clone();
                    for (&m, &h) in batch.iter().zip(&half_steps) {
                        shifted[m] += shift * h;
                    }
                    let raw = sqoe_expectations_sampled(sqoe, &shifted, shots, seed)?;
                    Ok(batch
                        .iter()
                        .map(|&m| {
                            let (z_var, x_var) = sqoe.variables_of_parameter(m);
                            (raw[z_var], x_var.map(|v| raw[v]).unwrap_or(0.0))
                        })
                        .collect())
                };
                let plus = sampled(1.0, rng.random())?;
                let minus = sampled(-1.0, rng.random())?;
                (plus, minus)
            }
        };

        // Central-difference gradients from local cost deltas.
        let mut updates = Vec::with_capacity(batch.len());
        for (slot, &m) in batch.iter().enumerate() {
            let (z_var, x_var) = sqoe.variables_of_parameter(m);
            let changes = |readout: (f64, f64)| -> Vec<(usize, f64)> {
                let mut c = vec![(z_var, (step_scale * readout.0).tanh())];
                if let Some(x) = x_var {
                    c.push((x, (step_scale * readout.1).tanh()));
                }
                c
            };
            let plus = local_cost_delta(&compiled.ising, &spins, &changes(plus_raw[slot]))?;
            let minus = local_cost_delta(&compiled.ising, &spins, &changes(minus_raw[slot]))?;
            let gradient = (plus - minus) / (2.0 * half_steps[slot]);
            let step = (config.learning_rate * gradient).clamp(-config.max_step, config.max_step);
            updates.push((m, step));
        }
        for (m, step) in updates {
            theta[m] -= step;
        }

        raw = sqoe_expectations(sqoe, &theta)?;
        for (s, &r) in spins.iter_mut().zip(&raw) {
            *s = (step_scale * r).tanh();
        }
        let (layout, cost) = evaluate_layout(&raw)?;
        if cost < best_cost {
            best_cost = cost;
            best_layout = layout;
            stall = 0;
        } else {
            stall += 1;
        }
        trace.push(TracePoint {
            iteration,
            relaxed_cost: compiled.ising.evaluate(&spins)?,
            best_cost,
        });
        if stall >= config.stall_window {
            break;
        }
    }

    for (m, &is_frozen) in frozen.iter().enumerate() {
        if is_frozen {
            debug_assert_eq!(theta[m], initial_theta[m], "frozen parameter moved");
        }
    }

    RunResult::finalize(
        compiled,
        best_layout,
        best_cost,
        iterations,
        started.elapsed(),
        trace,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farm::presets::{load_preset, Preset};
    use crate::farm::{
        FarmProblem, GridSpec, JensenInterpretation, PenaltyWeights, WindArrangement, WindRegime,
    };
    use crate::qubo::{IsingModel, QuboMatrix};
    use crate::solvers::brute_force;

    fn compiled_preset() -> CompiledProblem {
        CompiledProblem::compile(load_preset(Preset::WindfarmA, 4).unwrap()).unwrap()
    }

    #[test]
    fn zero_model_leaves_parameters_unchanged() {
        let problem = load_preset(Preset::WindfarmA, 4).unwrap();
        let compiled = CompiledProblem {
            qubo: QuboMatrix::zeros(16),
            ising: IsingModel::new(16, vec![0.0; 256], vec![0.0; 16], 0.0).unwrap(),
            problem,
        };
        let sqoe = crate::encoding::sqoe_assign(16, 8).unwrap();
        let config = OptimizerConfig {
            max_iterations: 50,
            stall_window: 500,
            ..OptimizerConfig::default()
        };
        let run = sgd_optimize_sqoe(&compiled, &sqoe, &config).unwrap();
        // Gradients vanish everywhere, so the best cost never moves off zero.
        assert_eq!(run.best_cost, 0.0);
        for p in &run.trace {
            assert_eq!(p.relaxed_cost, 0.0);
        }
    }

    #[test]
    fn one_dimensional_field_descends_to_the_right_sign() {
        // Cost h * s0 with h > 0: the minimum wants s0 = -1, i.e. cos(theta)
        // negative. A single-variable model exercises the full loop.
        let grid = GridSpec::new(2, 100.0).unwrap();
        let problem = FarmProblem::new(
            grid,
            load_preset(Preset::WindfarmA, 4).unwrap().turbine,
            WindRegime::new(vec![WindArrangement::new(0.0, 12.0, 1.0).unwrap()]).unwrap(),
            4,
            None,
            None,
            PenaltyWeights::uniform(0.0),
            JensenInterpretation::OneMinusDeficit,
        )
        .unwrap();
        let mut fields = vec![0.0; 4];
        fields[0] = 3.0;
        let compiled = CompiledProblem {
            qubo: {
                // Matching QUBO: 6 x_0 - 3 (so x_0 = 0 optimal), irrelevant here.
                let mut q = QuboMatrix::zeros(4);
                q.add(0, 0, 6.0);
                q.set_offset(-3.0);
                q
            },
            ising: IsingModel::new(4, vec![0.0; 16], fields, 0.0).unwrap(),
            problem,
        };
        let sqoe = crate::encoding::sqoe_assign(4, 2).unwrap();
        for seed in 0..5 {
            let config = OptimizerConfig {
                max_iterations: 400,
                stall_window: 400,
                batch: Some(2),
                ..OptimizerConfig::default()
            }
            .with_seed(seed);
            let run = sgd_optimize_sqoe(&compiled, &sqoe, &config).unwrap();
            assert!(!run.best_layout.is_occupied(0), "seed {seed}");
        }
    }

    #[test]
    fn reaches_the_exhaustive_optimum_on_the_small_preset() {
        let compiled = compiled_preset();
        let target = brute_force(&compiled.qubo).unwrap();
        let sqoe = crate::encoding::sqoe_assign(16, 8).unwrap();
        let mut matched = false;
        for seed in 0..16 {
            let config = OptimizerConfig::default().with_seed(seed);
            let run = sgd_optimize_sqoe(&compiled, &sqoe, &config).unwrap();
            if (run.best_cost - target.best_cost).abs() < 1e-6 {
                matched = true;
                break;
            }
        }
        assert!(matched, "no restart reached the exhaustive optimum");
    }

    #[test]
    fn best_cost_trace_is_monotone() {
        let compiled = compiled_preset();
        let sqoe = crate::encoding::sqoe_assign(16, 8).unwrap();
        let config = OptimizerConfig {
            max_iterations: 300,
            ..OptimizerConfig::default()
        }
        .with_seed(3);
        let run = sgd_optimize_sqoe(&compiled, &sqoe, &config).unwrap();
        for pair in run.trace.windows(2) {
            assert!(pair[1].best_cost <= pair[0].best_cost + 1e-12);
        }
        assert_eq!(run.turbine_count, run.best_layout.turbine_count());
    }

    #[test]
    fn shot_mode_still_optimizes() {
        let compiled = compiled_preset();
        let sqoe = crate::encoding::sqoe_assign(16, 8).unwrap();
        let config = OptimizerConfig {
            max_iterations: 250,
            stall_window: 250,
            shots: Some(2048),
            ..OptimizerConfig::default()
        }
        .with_seed(1);
        let run = sgd_optimize_sqoe(&compiled, &sqoe, &config).unwrap();
        let empty_cost = compiled.qubo.evaluate(&Layout::empty(16)).unwrap();
        assert!(run.best_cost < empty_cost);
    }

    #[test]
    fn warm_start_freezes_avoidance_sites() {
        let compiled =
            CompiledProblem::compile(load_preset(Preset::Alltwalis, 7).unwrap()).unwrap();
        let sqoe = crate::encoding::sqoe_assign(49, 10).unwrap();
        let warm = warm_start(&compiled, &sqoe).unwrap();
        let avoidance = compiled.problem.avoidance.clone().unwrap();
        let raw = sqoe_expectations(&sqoe, &warm.theta).unwrap();
        // Every avoidance site decodes to zero at the start.
        for (v, &p) in avoidance.iter().enumerate() {
            if p > WARM_START_AVOIDANCE_THRESHOLD {
                assert!(raw[v] <= 0.0, "avoidance site {v} starts occupied");
                assert!(warm.frozen[v / 2], "parameter of site {v} not frozen");
            }
        }
        // Exactly M sites start occupied.
        let occupied = raw.iter().filter(|&&r| r > 0.0).count();
        assert_eq!(occupied, 10);
        // Frozen parameters never move during a run.
        let config = OptimizerConfig {
            max_iterations: 120,
            ..OptimizerConfig::default()
        }
        .with_seed(5);
        let run = sgd_optimize_sqoe_from(&compiled, &sqoe, &config, Some(&warm)).unwrap();
        for (v, &p) in avoidance.iter().enumerate() {
            if p > WARM_START_AVOIDANCE_THRESHOLD {
                assert!(!run.best_layout.is_occupied(v));
            }
        }
    }

    #[test]
    fn warm_start_without_avoidance_freezes_nothing() {
        let compiled = compiled_preset();
        let sqoe = crate::encoding::sqoe_assign(16, 8).unwrap();
        let warm = warm_start(&compiled, &sqoe).unwrap();
        assert!(warm.frozen.iter().all(|&f| !f));
        let raw = sqoe_expectations(&sqoe, &warm.theta).unwrap();
        assert_eq!(raw.iter().filter(|&&r| r > 0.0).count(), 16);
    }

    #[test]
    fn infeasible_warm_start_rejected() {
        let mut problem = load_preset(Preset::WindfarmA, 4).unwrap();
        problem.avoidance = Some(vec![1.0; 16]);
        let compiled = CompiledProblem::compile(problem).unwrap();
        let sqoe = crate::encoding::sqoe_assign(16, 8).unwrap();
        assert!(warm_start(&compiled, &sqoe).is_err());
    }
}
