//! Ground-truth and baseline solvers: exhaustive enumeration for small
//! instances, simulated annealing as the large-instance baseline, and layout
//! validity checks.

use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farm::{FarmProblem, Layout};
use crate::qubo::QuboMatrix;

/// Exhaustive enumeration is capped at `2^24` layouts.
pub const EXHAUSTIVE_MAX_SITES: usize = 24;

/// Outcome of a classical solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub best_layout: Layout,
    pub best_cost: f64,
    /// True only for exhaustive search.
    pub optimal: bool,
    pub evaluations: u64,
    pub wall_time: Duration,
}

/// Incremental flip evaluator: tracks `sigma_k = sum_j Q_kj x_j` so a single
/// flip costs `O(N)` to score and commit.
struct FlipState<'a> {
    q: &'a QuboMatrix,
    x: Vec<bool>,
    sigma: Vec<f64>,
    cost: f64,
}

impl<'a> FlipState<'a> {
    fn new(q: &'a QuboMatrix, layout: &Layout) -> Self {
        let n = q.dimension();
        let x: Vec<bool> = layout.as_bools().to_vec();
        let mut sigma = vec![0.0; n];
        for (k, s) in sigma.iter_mut().enumerate() {
            let row = q.row(k);
            *s = x
                .iter()
                .enumerate()
                .filter(|&(_, &b)| b)
                .map(|(j, _)| row[j])
                .sum();
        }
        let mut cost = q.offset();
        for (i, &b) in x.iter().enumerate() {
            if b {
                cost += sigma[i];
            }
        }
        Self { q, x, sigma, cost }
    }

    /// Cost change if site `k` were flipped.
    #[inline]
    fn flip_delta(&self, k: usize) -> f64 {
        let sign = if self.x[k] { -1.0 } else { 1.0 };
        // Delta = sign * (Q_kk + 2 * sum_{j != k} Q_kj x_j), with the
        // symmetric sigma already containing Q_kk when x_k is set.
        let cross = self.sigma[k] - if self.x[k] { self.q.get(k, k) } else { 0.0 };
        sign * (self.q.get(k, k) + 2.0 * cross)
    }

    fn flip(&mut self, k: usize) {
        let delta = self.flip_delta(k);
        let sign = if self.x[k] { -1.0 } else { 1.0 };
        self.x[k] = !self.x[k];
        self.cost += delta;
        let n = self.q.dimension();
        for j in 0..n {
            self.sigma[j] += sign * self.q.get(j, k);
        }
    }

    fn layout(&self) -> Layout {
        Layout::from_bools(self.x.clone())
    }
}

/// Costs closer than this are treated as the same value when picking the
/// second-best distinct cost; symmetric layouts evaluate to analytically
/// equal costs that differ by accumulated rounding.
const DISTINCT_COST_TOL: f64 = 1e-9;

/// Running (best cost, best layout bits, second-best distinct cost).
#[derive(Clone, Copy)]
struct BestTwo {
    cost: f64,
    bits: u64,
    second: Option<f64>,
}

impl BestTwo {
    fn empty() -> Self {
        Self {
            cost: f64::INFINITY,
            bits: u64::MAX,
            second: None,
        }
    }

    fn note(&mut self, cost: f64, bits: u64) {
        if cost < self.cost {
            if self.cost.is_finite() && self.cost > cost + DISTINCT_COST_TOL {
                self.note_second(self.cost);
            }
            self.cost = cost;
            self.bits = bits;
        } else if cost == self.cost && bits < self.bits {
            self.bits = bits;
        } else if cost > self.cost + DISTINCT_COST_TOL {
            self.note_second(cost);
        }
    }

    fn note_second(&mut self, cost: f64) {
        self.second = Some(self.second.map_or(cost, |s| s.min(cost)));
    }

    fn merge(mut self, other: BestTwo) -> BestTwo {
        self.note(other.cost, other.bits);
        if let Some(s) = other.second {
            if s > self.cost + DISTINCT_COST_TOL {
                self.note_second(s);
            }
        }
        self
    }
}

/// Exhaustively enumerates every layout, returning the best cost, the best
/// layout and the second-best distinct cost. Deterministic tie-break: among
/// exactly equal costs the layout with the lowest integer value (site `i` at
/// bit `i`) wins.
pub(crate) fn exhaustive_best_two(q: &QuboMatrix) -> Result<(f64, Layout, Option<f64>)> {
    let n = q.dimension();
    if n > EXHAUSTIVE_MAX_SITES {
        return Err(Error::Capability(format!(
            "{n} sites exceed the exhaustive limit of {EXHAUSTIVE_MAX_SITES}"
        )));
    }
    if n == 0 {
        return Err(Error::Config("empty problem".into()));
    }
    // Partition the space by a high-bit prefix and Gray-walk the rest.
    let prefix_bits = n.min(4);
    let low_bits = n - prefix_bits;
    let merged = (0u64..1 << prefix_bits)
        .into_par_iter()
        .map(|prefix| {
            let start = prefix << low_bits;
            let mut state = FlipState::new(q, &Layout::from_bits(n, start));
            let mut gray = 0u64;
            let mut acc = BestTwo::empty();
            acc.note(state.cost, start);
            for step in 1u64..1 << low_bits {
                let next_gray = step ^ (step >> 1);
                let flipped = (gray ^ next_gray).trailing_zeros() as usize;
                gray = next_gray;
                state.flip(flipped);
                acc.note(state.cost, start | gray);
            }
            acc
        })
        .reduce(BestTwo::empty, BestTwo::merge);

    let best_layout = Layout::from_bits(n, merged.bits);
    // Recompute the winning cost directly; the Gray walk accumulates rounding.
    let best_cost = q.evaluate(&best_layout)?;
    Ok((best_cost, best_layout, merged.second))
}

/// Exhaustive search over all `2^N` layouts with incremental cost updates.
pub fn brute_force(q: &QuboMatrix) -> Result<SolveReport> {
    let started = Instant::now();
    let n = q.dimension();
    let (best_cost, best_layout, _) = exhaustive_best_two(q)?;
    Ok(SolveReport {
        best_layout,
        best_cost,
        optimal: true,
        evaluations: 1u64 << n,
        wall_time: started.elapsed(),
    })
}

/// Geometric annealing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    /// Starting temperature; `None` uses the largest matrix magnitude.
    pub initial_temperature: Option<f64>,
    /// Multiplicative decay applied per sweep.
    pub decay: f64,
    /// Number of sweeps; each sweep proposes `N` single flips.
    pub sweeps: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            initial_temperature: None,
            decay: 0.999,
            sweeps: 2000,
        }
    }
}

impl AnnealSchedule {
    /// The same schedule stretched by a factor, for self-consistency bounds.
    pub fn stretched(&self, factor: usize) -> Self {
        Self {
            initial_temperature: self.initial_temperature,
            // Keep the same final temperature over more sweeps.
            decay: self.decay.powf(1.0 / factor as f64),
            sweeps: self.sweeps * factor,
        }
    }
}

/// Single-flip Metropolis annealing, deterministic per seed.
pub fn simulated_annealing(q: &QuboMatrix, schedule: &AnnealSchedule, seed: u64) -> SolveReport {
    let started = Instant::now();
    let n = q.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Layout::from_bools((0..n).map(|_| rng.random_bool(0.5)).collect());
    let mut state = FlipState::new(q, &start);
    let mut best_cost = state.cost;
    let mut best_layout = state.layout();
    let mut temperature = schedule
        .initial_temperature
        .unwrap_or_else(|| q.max_abs_entry().max(f64::MIN_POSITIVE));
    let mut evaluations = 0u64;
    for _ in 0..schedule.sweeps {
        for _ in 0..n {
            let k = rng.random_range(0..n);
            let delta = state.flip_delta(k);
            evaluations += 1;
            if delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp() {
                state.flip(k);
                if state.cost < best_cost {
                    best_cost = state.cost;
                    best_layout = state.layout();
                }
            }
        }
        temperature *= schedule.decay;
    }
    SolveReport {
        best_layout,
        best_cost,
        optimal: false,
        evaluations,
        wall_time: started.elapsed(),
    }
}

/// Validity breakdown of a layout against its problem constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub turbine_count: usize,
    /// Turbine count equals the budget `M`.
    pub count_ok: bool,
    /// Occupied pairs closer than the minimum spacing.
    pub spacing_violations: Vec<(usize, usize)>,
    /// Occupied sites with avoidance weight above 0.5.
    pub occupied_avoidance: Vec<usize>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.count_ok && self.spacing_violations.is_empty() && self.occupied_avoidance.is_empty()
    }
}

/// Checks the turbine budget, pairwise spacing and avoidance sites.
pub fn check_validity(problem: &FarmProblem, layout: &Layout) -> Result<ValidityReport> {
    let n = problem.site_count();
    if layout.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: layout.len(),
        });
    }
    let turbine_count = layout.turbine_count();
    let mut spacing_violations = Vec::new();
    if let Some(e) = problem.min_spacing {
        let occupied: Vec<usize> = layout.occupied_sites().collect();
        for (a, &i) in occupied.iter().enumerate() {
            for &j in &occupied[a + 1..] {
                if problem.grid.site_distance(i, j)? < e {
                    spacing_violations.push((i, j));
                }
            }
        }
    }
    let mut occupied_avoidance = Vec::new();
    if let Some(p) = &problem.avoidance {
        for i in layout.occupied_sites() {
            if p[i] > 0.5 {
                occupied_avoidance.push(i);
            }
        }
    }
    Ok(ValidityReport {
        turbine_count,
        count_ok: turbine_count == problem.max_turbines,
        spacing_violations,
        occupied_avoidance,
    })
}
