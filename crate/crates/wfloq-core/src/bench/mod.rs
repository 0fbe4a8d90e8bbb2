//! Benchmark harness: sampled solver runs per instance, raw and trimmed
//! power summaries, and log-log time-scaling fits.

pub mod emit;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::encoding::{pce_minimal_qubits, sqoe_assign, PceConfig};
use crate::error::{Error, Result};
use crate::farm::presets::{load_preset, Preset};
use crate::optimize::{
    sgd_optimize_sqoe_from, simplex_optimize_pce, warm_start, CompiledProblem, OptimizerConfig,
};
use crate::report::RunReport;
use crate::sim::MAX_QUBITS;
use crate::solvers::{brute_force, simulated_annealing, AnnealSchedule, EXHAUSTIVE_MAX_SITES};

/// Which solver family a benchmark exercises, with its parameter list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum MethodSpec {
    /// Correlator encoding with one group per body size `k`.
    Pce { k: Vec<usize> },
    /// Single-qubit operator encoding with one group per qubit count `q`.
    Sqoe { q: Vec<usize> },
    /// Exhaustive search (small instances only).
    Exact,
    /// Simulated annealing baseline.
    Anneal,
}

impl MethodSpec {
    pub fn label(&self) -> &'static str {
        match self {
            MethodSpec::Pce { .. } => "pce",
            MethodSpec::Sqoe { .. } => "sqoe",
            MethodSpec::Exact => "exact",
            MethodSpec::Anneal => "anneal",
        }
    }

    /// Parameter values, one benchmark group per entry.
    fn parameters(&self) -> Vec<Option<usize>> {
        match self {
            MethodSpec::Pce { k } => k.iter().copied().map(Some).collect(),
            MethodSpec::Sqoe { q } => q.iter().copied().map(Some).collect(),
            MethodSpec::Exact | MethodSpec::Anneal => vec![None],
        }
    }
}

fn default_samples() -> usize {
    64
}

/// A benchmark request: preset instances crossed with method parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Preset name (`windfarm_a`, `windfarm_b`, `alltwalis`, `mosetti_swr`).
    pub preset: String,
    /// Grid sides to benchmark.
    pub l_values: Vec<usize>,
    pub method: MethodSpec,
    /// Sampled runs per group.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Run `i` of a group uses seed `base_seed + i`.
    #[serde(default)]
    pub base_seed: u64,
    /// Shots per expectation batch; absent means noiseless.
    #[serde(default)]
    pub shots: Option<u64>,
    /// Uniform penalty weight override; absent keeps the preset default.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Start SQOE runs from the structure-derived warm start.
    #[serde(default)]
    pub warm_start: bool,
    /// Optimizer overrides for the encoding methods.
    #[serde(default)]
    pub optimizer: Option<OptimizerConfig>,
    /// Annealing schedule override.
    #[serde(default)]
    pub anneal: Option<AnnealSchedule>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse_preset(&self) -> Result<Preset> {
        self.preset.parse()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Rejects infeasible method and size combinations before any run.
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("need at least one sample".into()));
        }
        if self.l_values.is_empty() {
            return Err(Error::Config("need at least one grid side".into()));
        }
        let preset = self.parse_preset()?;
        for &l in &self.l_values {
            // Both checks the loader would also perform, done up front.
            load_preset(preset, l)?;
            let n = l * l;
            match &self.method {
                MethodSpec::Pce { k } => {
                    if k.is_empty() {
                        return Err(Error::Config("PCE needs at least one k value".into()));
                    }
                    for &body in k {
                        let qubits = pce_minimal_qubits(n, body)?;
                        if qubits > MAX_QUBITS {
                            return Err(Error::Capability(format!(
                                "PCE k={body} on {n} variables needs {qubits} qubits"
                            )));
                        }
                    }
                }
                MethodSpec::Sqoe { q } => {
                    if q.is_empty() {
                        return Err(Error::Config("SQOE needs at least one q value".into()));
                    }
                    for &qubits in q {
                        if qubits == 0 || qubits > MAX_QUBITS {
                            return Err(Error::Capability(format!(
                                "SQOE qubit count must lie in 1..={MAX_QUBITS}, got {qubits}"
                            )));
                        }
                    }
                }
                MethodSpec::Exact => {
                    if n > EXHAUSTIVE_MAX_SITES {
                        return Err(Error::Capability(format!(
                            "exact solve of {n} sites exceeds the {EXHAUSTIVE_MAX_SITES} limit"
                        )));
                    }
                }
                MethodSpec::Anneal => {}
            }
        }
        Ok(())
    }

    /// Stable content hash used to name output files. The output directory
    /// is excluded so the same experiment hashes identically anywhere.
    pub fn content_hash(&self) -> u64 {
        let mut keyed = self.clone();
        keyed.output_dir = PathBuf::new();
        let canonical = serde_json::to_string(&keyed).expect("config serializes");
        fnv1a64(canonical.as_bytes())
    }
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Five-number summary of a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub count: usize,
}

impl Summary {
    /// Linear-interpolation quartiles over the sample set.
    pub fn from_samples(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let quantile = |p: f64| -> f64 {
            let h = (sorted.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let frac = h - lo as f64;
            if lo + 1 < sorted.len() {
                sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
            } else {
                sorted[lo]
            }
        };
        Some(Self {
            min: sorted[0],
            q1: quantile(0.25),
            median: quantile(0.5),
            q3: quantile(0.75),
            max: sorted[sorted.len() - 1],
            count: sorted.len(),
        })
    }
}

/// Results of one (grid side, method parameter) group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupResult {
    pub l: usize,
    pub n: usize,
    /// `k` for PCE, `q` for SQOE, absent for the classical methods.
    pub parameter: Option<usize>,
    pub runs: Vec<RunReport>,
    /// Power summary over all runs.
    pub raw: Summary,
    /// Power summary after dropping runs whose turbine count misses the
    /// budget; absent when every run was invalid.
    pub trimmed: Option<Summary>,
    pub invalid_count: usize,
    pub mean_seconds: f64,
}

/// A full benchmark: configuration plus per-group results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: ExperimentConfig,
    pub groups: Vec<GroupResult>,
}

/// Runs every sample of every group with per-run seeds, then summarizes
/// power distributions before and after the turbine-count trim.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<BenchReport> {
    config.validate()?;
    let preset = config.parse_preset()?;
    let mut groups = Vec::new();
    for &l in &config.l_values {
        let mut problem = load_preset(preset, l)?;
        if let Some(lambda) = config.lambda {
            problem.weights = crate::farm::PenaltyWeights::uniform(lambda);
        }
        let compiled = CompiledProblem::compile(problem)?;
        for parameter in config.method.parameters() {
            let runs = run_group(config, &compiled, parameter)?;
            groups.push(summarize_group(&compiled, l, parameter, runs));
        }
    }
    Ok(BenchReport {
        config: config.clone(),
        groups,
    })
}

fn run_group(
    config: &ExperimentConfig,
    compiled: &CompiledProblem,
    parameter: Option<usize>,
) -> Result<Vec<RunReport>> {
    let n = compiled.variable_count();
    let base = config.base_seed;
    let method = config.method.label();
    let optimizer_base = config.optimizer.unwrap_or_default();

    // SQOE warm starts are structure-only and shared across samples.
    let warm = match (&config.method, parameter, config.warm_start) {
        (MethodSpec::Sqoe { .. }, Some(q), true) => {
            let sqoe = sqoe_assign(n, q)?;
            Some(warm_start(compiled, &sqoe)?)
        }
        _ => None,
    };

    (0..config.samples)
        .into_par_iter()
        .map(|sample| {
            let seed = base + sample as u64;
            match &config.method {
                MethodSpec::Exact => {
                    let solve = brute_force(&compiled.qubo)?;
                    RunReport::from_solve_report(method, seed, &compiled.problem, &solve)
                }
                MethodSpec::Anneal => {
                    let schedule = config.anneal.unwrap_or_default();
                    let solve = simulated_annealing(&compiled.qubo, &schedule, seed);
                    RunReport::from_solve_report(method, seed, &compiled.problem, &solve)
                }
                MethodSpec::Sqoe { .. } => {
                    let q = parameter.expect("sqoe groups carry q");
                    let sqoe = sqoe_assign(n, q)?;
                    let opt = OptimizerConfig {
                        seed,
                        shots: config.shots,
                        ..optimizer_base
                    };
                    let run = sgd_optimize_sqoe_from(compiled, &sqoe, &opt, warm.as_ref())?;
                    Ok(RunReport::from_run_result(method, seed, &run))
                }
                MethodSpec::Pce { .. } => {
                    let body = parameter.expect("pce groups carry k");
                    let qubits = pce_minimal_qubits(n, body)?;
                    let pce = PceConfig::new(qubits, body)?;
                    let opt = OptimizerConfig {
                        seed,
                        shots: config.shots,
                        ..optimizer_base
                    };
                    let run = simplex_optimize_pce(compiled, &pce, &opt)?;
                    Ok(RunReport::from_run_result(method, seed, &run))
                }
            }
        })
        .collect()
}

fn summarize_group(
    compiled: &CompiledProblem,
    l: usize,
    parameter: Option<usize>,
    runs: Vec<RunReport>,
) -> GroupResult {
    let budget = compiled.problem.max_turbines;
    let raw_powers: Vec<f64> = runs.iter().map(|r| r.model_power).collect();
    let trimmed_powers: Vec<f64> = runs
        .iter()
        .filter(|r| r.turbine_count == budget)
        .map(|r| r.model_power)
        .collect();
    let mean_seconds =
        runs.iter().map(|r| r.wall_time_s).sum::<f64>() / runs.len().max(1) as f64;
    GroupResult {
        l,
        n: compiled.variable_count(),
        parameter,
        raw: Summary::from_samples(&raw_powers).expect("at least one sample"),
        trimmed: Summary::from_samples(&trimmed_powers),
        invalid_count: runs.len() - trimmed_powers.len(),
        mean_seconds,
        runs,
    }
}

/// A fitted power law `time = exp(intercept) * N^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
}

/// Least-squares fit of `ln(time)` against `ln(N)`; the slope is the scaling
/// exponent.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::Config(format!(
            "scaling fit needs at least two points, got {}",
            points.len()
        )));
    }
    let mut distinct = points.iter().map(|&(n, _)| n).collect::<Vec<_>>();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Config(
            "scaling fit needs at least two distinct sizes".into(),
        ));
    }
    for &(n, t) in points {
        if !(n > 0.0 && t > 0.0) {
            return Err(Error::Domain(format!(
                "scaling fit needs positive sizes and times, got ({n}, {t})"
            )));
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let count = logs.len() as f64;
    let mean_x = logs.iter().map(|&(x, _)| x).sum::<f64>() / count;
    let mean_y = logs.iter().map(|&(_, y)| y).sum::<f64>() / count;
    let mut cov = 0.0;
    let mut var = 0.0;
    for &(x, y) in &logs {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    let exponent = cov / var;
    Ok(ScalingFit {
        exponent,
        intercept: mean_y - exponent * mean_x,
    })
}

/// One scaling group: a method parameter tracked across instance sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingGroup {
    pub label: String,
    /// `(N, mean seconds)` per grid side.
    pub points: Vec<(f64, f64)>,
    /// Absent when fewer than two distinct sizes ran.
    pub fit: Option<ScalingFit>,
}

/// Groups a benchmark's timings by method parameter and fits each group.
pub fn scaling_groups(report: &BenchReport) -> Vec<ScalingGroup> {
    let mut parameters: Vec<Option<usize>> =
        report.groups.iter().map(|g| g.parameter).collect();
    parameters.sort();
    parameters.dedup();
    parameters
        .iter()
        .map(|&parameter| {
            let points: Vec<(f64, f64)> = report
                .groups
                .iter()
                .filter(|g| g.parameter == parameter)
                .map(|g| (g.n as f64, g.mean_seconds))
                .collect();
            let label = match parameter {
                Some(p) => format!("{}_{p}", report.config.method.label()),
                None => report.config.method.label().to_string(),
            };
            ScalingGroup {
                label,
                fit: fit_scaling(&points).ok(),
                points,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tiny_config(method: MethodSpec) -> ExperimentConfig {
        ExperimentConfig {
            preset: "windfarm_a".into(),
            l_values: vec![4],
            method,
            samples: 4,
            base_seed: 9,
            shots: None,
            lambda: None,
            warm_start: false,
            optimizer: Some(OptimizerConfig {
                max_iterations: 60,
                stall_window: 60,
                ..OptimizerConfig::default()
            }),
            anneal: Some(AnnealSchedule {
                sweeps: 200,
                ..AnnealSchedule::default()
            }),
            output_dir: std::env::temp_dir(),
        }
    }

    #[test]
    fn exact_groups_have_zero_spread() {
        let report = run_benchmark(&tiny_config(MethodSpec::Exact)).unwrap();
        assert_eq!(report.groups.len(), 1);
        let group = &report.groups[0];
        assert_eq!(group.invalid_count, 0);
        assert_relative_eq!(group.raw.min, group.raw.max, epsilon = 1e-12);
        assert_eq!(group.trimmed.unwrap().count, 4);
        // The exact optimum on this preset fills the budget.
        assert!(group.runs.iter().all(|r| r.turbine_count == 16));
    }

    #[test]
    fn sqoe_benchmark_trims_by_turbine_count() {
        let report = run_benchmark(&tiny_config(MethodSpec::Sqoe { q: vec![8] })).unwrap();
        let group = &report.groups[0];
        assert_eq!(group.runs.len(), 4);
        if let Some(trimmed) = group.trimmed {
            assert!(trimmed.max <= group.raw.max + 1e-12);
            assert_eq!(trimmed.count + group.invalid_count, 4);
        } else {
            assert_eq!(group.invalid_count, 4);
        }
        for run in &group.runs {
            assert_eq!(run.turbine_count == 16, run.valid);
        }
    }

    #[test]
    fn infeasible_exact_rejected_before_running() {
        let mut config = tiny_config(MethodSpec::Exact);
        config.l_values = vec![7];
        assert!(matches!(config.validate(), Err(Error::Capability(_))));
    }

    #[test]
    fn infeasible_pce_rejected_before_running() {
        // k=1 on an 81-variable grid would need 27 qubits.
        let mut config = tiny_config(MethodSpec::Pce { k: vec![1] });
        config.preset = "windfarm_b".into();
        config.l_values = vec![9];
        assert!(config.validate().is_err());
    }

    #[test]
    fn summary_quartiles_interpolate() {
        let s = Summary::from_samples(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 4.0);
        assert_relative_eq!(s.q1, 1.75, epsilon = 1e-12);
        assert_relative_eq!(s.median, 2.5, epsilon = 1e-12);
        assert_relative_eq!(s.q3, 3.25, epsilon = 1e-12);
        assert!(Summary::from_samples(&[]).is_none());
    }

    #[test]
    fn planted_exponents_recovered_exactly() {
        for p in [1.0, 2.0, 3.0] {
            let points: Vec<(f64, f64)> = [16.0f64, 49.0, 81.0]
                .iter()
                .map(|&n| (n, 0.37 * n.powf(p)))
                .collect();
            let fit = fit_scaling(&points).unwrap();
            assert_relative_eq!(fit.exponent, p, epsilon = 1e-6);
            assert_relative_eq!(fit.intercept, 0.37f64.ln(), epsilon = 1e-6);
        }
    }

    #[test]
    fn constant_times_fit_zero_exponent() {
        let points = vec![(16.0, 2.5), (49.0, 2.5), (81.0, 2.5)];
        let fit = fit_scaling(&points).unwrap();
        assert_relative_eq!(fit.exponent, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn scaling_fit_needs_two_distinct_sizes() {
        assert!(fit_scaling(&[(16.0, 1.0)]).is_err());
        assert!(fit_scaling(&[(16.0, 1.0), (16.0, 2.0)]).is_err());
    }

    #[test]
    fn config_hash_is_stable_and_content_sensitive() {
        let a = tiny_config(MethodSpec::Exact);
        let b = tiny_config(MethodSpec::Exact);
        assert_eq!(a.content_hash(), b.content_hash());
        let mut c = tiny_config(MethodSpec::Exact);
        c.base_seed = 10;
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn config_json_round_trip() {
        let config = tiny_config(MethodSpec::Sqoe { q: vec![5, 8] });
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(config, back);
    }
}
