//! QUBO assembly from the farm model, the spin-variable (Ising) form, cost
//! evaluation, heatmap data and the penalty-weight scan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farm::{FarmProblem, Layout};

/// Symmetry tolerance for externally supplied matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense symmetric cost matrix with a scalar offset channel.
///
/// The offset carries constants produced by constraint expansion (for example
/// the `M^2` of the turbine-count term) so that the quadratic form plus
/// offset is exactly the constraint value, which in turn makes the
/// QUBO <-> Ising equivalence exactly testable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboMatrix {
    dimension: usize,
    entries: Vec<f64>,
    offset: f64,
}

impl QuboMatrix {
    pub fn zeros(dimension: usize) -> Self {
        Self {
            dimension,
            entries: vec![0.0; dimension * dimension],
            offset: 0.0,
        }
    }

    /// Builds from a dense row-major entry slice, validating symmetry.
    pub fn from_entries(dimension: usize, entries: Vec<f64>, offset: f64) -> Result<Self> {
        if entries.len() != dimension * dimension {
            return Err(Error::Dimension {
                expected: dimension * dimension,
                got: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        let q = Self {
            dimension,
            entries,
            offset,
        };
        for i in 0..dimension {
            for j in (i + 1)..dimension {
                if (q.get(i, j) - q.get(j, i)).abs() > SYMMETRY_TOL {
                    return Err(Error::Domain(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(q)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn add_offset(&mut self, delta: f64) {
        self.offset += delta;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dimension + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.dimension + j] += value;
    }

    /// Adds `value/2` to each of `(i, j)` and `(j, i)`, preserving symmetry.
    pub fn add_symmetric_pair(&mut self, i: usize, j: usize, value: f64) {
        self.add(i, j, value / 2.0);
        self.add(j, i, value / 2.0);
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `self += weight * other`, offsets included.
    pub fn add_scaled(&mut self, other: &QuboMatrix, weight: f64) -> Result<()> {
        if other.dimension != self.dimension {
            return Err(Error::Dimension {
                expected: self.dimension,
                got: other.dimension,
            });
        }
        for (dst, src) in self.entries.iter_mut().zip(&other.entries) {
            *dst += weight * src;
        }
        self.offset += weight * other.offset;
        Ok(())
    }

    /// `x^T Q x + offset` for a binary layout.
    pub fn evaluate(&self, layout: &Layout) -> Result<f64> {
        if layout.len() != self.dimension {
            return Err(Error::Dimension {
                expected: self.dimension,
                got: layout.len(),
            });
        }
        let mut total = self.offset;
        for i in layout.occupied_sites() {
            let row = self.row(i);
            for j in layout.occupied_sites() {
                total += row[j];
            }
        }
        Ok(total)
    }

    /// `log10 |Q_ij|` per cell, `None` where the entry is exactly zero.
    pub fn heatmap_data(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.dimension)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|&v| (v != 0.0).then(|| v.abs().log10()))
                    .collect()
            })
            .collect()
    }

    /// Plain-text export: a `N offset` header line, then one `i j value`
    /// triple per nonzero entry with `i <= j` (symmetric entries once).
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {:?}\n", self.dimension, self.offset);
        for i in 0..self.dimension {
            for j in i..self.dimension {
                let v = self.get(i, j);
                if v != 0.0 {
                    out.push_str(&format!("{i} {j} {v:?}\n"));
                }
            }
        }
        out
    }

    /// Parses the [`to_text`](Self::to_text) format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty QUBO document".into()))?;
        let mut parts = header.split_whitespace();
        let dimension: usize = parts
            .next()
            .ok_or_else(|| Error::Parse("missing dimension".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
        let offset: f64 = parts
            .next()
            .ok_or_else(|| Error::Parse("missing offset".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad offset: {e}")))?;
        let mut q = QuboMatrix::zeros(dimension);
        q.set_offset(offset);
        for line in lines {
            let mut cols = line.split_whitespace();
            let (i, j, v) = match (cols.next(), cols.next(), cols.next()) {
                (Some(i), Some(j), Some(v)) => (i, j, v),
                _ => return Err(Error::Parse(format!("bad triple line '{line}'"))),
            };
            let i: usize = i
                .parse()
                .map_err(|e| Error::Parse(format!("bad row index: {e}")))?;
            let j: usize = j
                .parse()
                .map_err(|e| Error::Parse(format!("bad column index: {e}")))?;
            let v: f64 = v
                .parse()
                .map_err(|e| Error::Parse(format!("bad value: {e}")))?;
            if i > j {
                return Err(Error::Parse(format!(
                    "triples must satisfy i <= j, got ({i}, {j})"
                )));
            }
            if j >= dimension {
                return Err(Error::OutOfRange {
                    index: j,
                    len: dimension,
                });
            }
            if i == j {
                q.add(i, i, v);
            } else {
                // The file stores the symmetric entry once; mirror it.
                q.add(i, j, v);
                q.add(j, i, v);
            }
        }
        Ok(q)
    }
}

/// Spin-form counterpart of a QUBO: couplings `H` (zero diagonal), fields `h`
/// and the constant absorbed while mapping `x = (1 + s) / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    dimension: usize,
    couplings: Vec<f64>,
    fields: Vec<f64>,
    offset: f64,
}

impl IsingModel {
    pub fn new(dimension: usize, couplings: Vec<f64>, fields: Vec<f64>, offset: f64) -> Result<Self> {
        if couplings.len() != dimension * dimension {
            return Err(Error::Dimension {
                expected: dimension * dimension,
                got: couplings.len(),
            });
        }
        if fields.len() != dimension {
            return Err(Error::Dimension {
                expected: dimension,
                got: fields.len(),
            });
        }
        for i in 0..dimension {
            if couplings[i * dimension + i] != 0.0 {
                return Err(Error::Domain(format!(
                    "coupling diagonal must be zero, got {} at {i}",
                    couplings[i * dimension + i]
                )));
            }
        }
        Ok(Self {
            dimension,
            couplings,
            fields,
            offset,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    #[inline]
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.dimension + j]
    }

    pub fn coupling_row(&self, i: usize) -> &[f64] {
        &self.couplings[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields[i]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `s^T H s + h . s + offset`; accepts relaxed spins in `[-1, 1]`.
    pub fn evaluate(&self, spins: &[f64]) -> Result<f64> {
        if spins.len() != self.dimension {
            return Err(Error::Dimension {
                expected: self.dimension,
                got: spins.len(),
            });
        }
        let mut total = self.offset;
        for i in 0..self.dimension {
            let si = spins[i];
            total += self.fields[i] * si;
            let row = self.coupling_row(i);
            let mut acc = 0.0;
            for (j, &sj) in spins.iter().enumerate() {
                acc += row[j] * sj;
            }
            total += si * acc;
        }
        Ok(total)
    }

    /// Evaluate at the spin image of a binary layout (`x=1 -> s=+1`).
    pub fn evaluate_layout(&self, layout: &Layout) -> Result<f64> {
        let spins: Vec<f64> = layout
            .as_bools()
            .iter()
            .map(|&b| if b { 1.0 } else { -1.0 })
            .collect();
        self.evaluate(&spins)
    }
}

/// A relaxed spin vector with entries constrained to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinVector(Vec<f64>);

impl SpinVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::Domain("spin values must lie in [-1, 1]".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Spin vector of a binary layout.
    pub fn from_layout(layout: &Layout) -> Self {
        Self(
            layout
                .as_bools()
                .iter()
                .map(|&b| if b { 1.0 } else { -1.0 })
                .collect(),
        )
    }
}

/// Wake-power cost matrix: `f(x) = -sum_d sum_i p_d [v^3/3 x_i x_i -
/// sum_{j in wake(i)} (v^3 - u_ij^3)/3 x_i x_j]`.
///
/// Each directed wake term is split equally onto `(i, j)` and `(j, i)`.
pub fn power_qubo(problem: &FarmProblem) -> Result<QuboMatrix> {
    let n = problem.site_count();
    let mut q = QuboMatrix::zeros(n);
    for arrangement in problem.regime.arrangements() {
        let p = arrangement.probability;
        let v = arrangement.free_speed;
        let v3 = v.powi(3);
        for i in 0..n {
            q.add(i, i, -p * v3 / 3.0);
            for (j, distance) in problem.wake_set(i, arrangement)? {
                let u = problem.waked_windspeed(v, distance)?;
                q.add_symmetric_pair(i, j, p * (v3 - u.powi(3)) / 3.0);
            }
        }
    }
    Ok(q)
}

/// Turbine-count penalty `(sum_i x_i - M)^2` in quadratic form: diagonal
/// `1 - 2M` (using `x^2 = x`), off-diagonal pairs `1 + 1`, constant `M^2` in
/// the offset channel.
pub fn count_constraint(n: usize, max_turbines: usize) -> QuboMatrix {
    assert!(max_turbines <= n, "turbine budget exceeds site count");
    let m = max_turbines as f64;
    let mut q = QuboMatrix::zeros(n);
    for i in 0..n {
        q.add(i, i, 1.0 - 2.0 * m);
        for j in 0..n {
            if i != j {
                q.add(i, j, 1.0);
            }
        }
    }
    q.set_offset(m * m);
    q
}

/// Minimum-spacing penalty: `1/2` on each ordered pair closer than `E`.
pub fn spacing_constraint(problem: &FarmProblem) -> Result<QuboMatrix> {
    let n = problem.site_count();
    let mut q = QuboMatrix::zeros(n);
    let Some(e) = problem.min_spacing else {
        return Ok(q);
    };
    for i in 0..n {
        for j in (i + 1)..n {
            if problem.grid.site_distance(i, j)? < e {
                q.add_symmetric_pair(i, j, 1.0);
            }
        }
    }
    Ok(q)
}

/// Avoidance penalty: `P_i` on the diagonal.
pub fn avoidance_constraint(avoidance: &[f64]) -> Result<QuboMatrix> {
    if avoidance.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::Config("avoidance weights must lie in [0, 1]".into()));
    }
    let mut q = QuboMatrix::zeros(avoidance.len());
    for (i, &p) in avoidance.iter().enumerate() {
        q.add(i, i, p);
    }
    Ok(q)
}

/// Full cost matrix: power term plus the three weighted penalty terms.
pub fn assemble_qubo(problem: &FarmProblem) -> Result<QuboMatrix> {
    problem.validate()?;
    let n = problem.site_count();
    let mut q = power_qubo(problem)?;
    q.add_scaled(
        &count_constraint(n, problem.max_turbines),
        problem.weights.count,
    )?;
    if problem.min_spacing.is_some() {
        q.add_scaled(&spacing_constraint(problem)?, problem.weights.spacing)?;
    }
    if let Some(p) = &problem.avoidance {
        if p.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: p.len(),
            });
        }
        q.add_scaled(&avoidance_constraint(p)?, problem.weights.avoidance)?;
    }
    Ok(q)
}

/// Maps a QUBO to spin variables via `x_i = (1 + s_i) / 2`, using
/// `x_i^2 = x_i` on the diagonal. For every binary assignment the Ising value
/// equals the QUBO value exactly.
pub fn to_ising(q: &QuboMatrix) -> IsingModel {
    let n = q.dimension();
    let mut couplings = vec![0.0; n * n];
    let mut fields = vec![0.0; n];
    let mut offset = q.offset();
    for i in 0..n {
        let qii = q.get(i, i);
        fields[i] += qii / 2.0;
        offset += qii / 2.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            // Q_ij x_i x_j = Q_ij (1 + s_i + s_j + s_i s_j) / 4.
            let qij = q.get(i, j);
            couplings[i * n + j] = qij / 4.0;
            fields[i] += qij / 4.0;
            fields[j] += qij / 4.0;
            offset += qij / 4.0;
        }
    }
    IsingModel::new(n, couplings, fields, offset).expect("construction preserves invariants")
}

/// One row of a penalty-weight scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaScanPoint {
    pub lambda: f64,
    /// Turbine count of the exact optimum.
    pub turbines: usize,
    /// Cost difference between the best and second-best distinct values.
    pub gap: f64,
}

/// Scans penalty weights, applying each `lambda` to all three constraint
/// terms and solving exactly. Requires `N <= 24` sites.
pub fn lambda_scan(problem: &FarmProblem, lambdas: &[f64]) -> Result<Vec<LambdaScanPoint>> {
    let n = problem.site_count();
    if n > crate::solvers::EXHAUSTIVE_MAX_SITES {
        return Err(Error::Capability(format!(
            "lambda scan needs an exact solve; {n} sites exceed the {} limit",
            crate::solvers::EXHAUSTIVE_MAX_SITES
        )));
    }
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut scaled = problem.clone();
        scaled.weights = crate::farm::PenaltyWeights::uniform(lambda);
        let q = assemble_qubo(&scaled)?;
        let (best_cost, best_layout, second) = crate::solvers::exhaustive_best_two(&q)?;
        let gap = second.map_or(0.0, |c| c - best_cost);
        points.push(LambdaScanPoint {
            lambda,
            turbines: best_layout.turbine_count(),
            gap,
        });
    }
    Ok(points)
}
