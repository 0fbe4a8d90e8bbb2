//! Dependency-free Nelder-Mead simplex minimizer.
//!
//! Stands in for the linear-surrogate derivative-free optimizer used on the
//! correlator encoding; anything implementing [`Minimizer`] can be slotted in
//! instead.

/// Outcome of a derivative-free minimization.
#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// A black-box minimizer over a fixed-dimension parameter vector.
pub trait Minimizer {
    fn minimize(&self, f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64]) -> MinimizeOutcome;
}

/// Standard Nelder-Mead with reflection, expansion, contraction and shrink.
#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Initial simplex edge length around the start point.
    pub initial_step: f64,
    /// Terminate once the simplex value spread falls below this.
    pub value_tolerance: f64,
    /// Terminate after this many iterations without improving the best value.
    pub stall_window: usize,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            initial_step: 0.5,
            value_tolerance: 1e-10,
            stall_window: 200,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

impl Minimizer for NelderMead {
    fn minimize(&self, f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64]) -> MinimizeOutcome {
        let dim = x0.len();
        let mut evaluations = 0usize;
        let mut eval = |x: &[f64], evaluations: &mut usize| {
            *evaluations += 1;
            f(x)
        };

        // Simplex of dim + 1 points: the start plus one step per axis.
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        points.push(x0.to_vec());
        for axis in 0..dim {
            let mut p = x0.to_vec();
            p[axis] += self.initial_step;
            points.push(p);
        }
        let mut values: Vec<f64> = points
            .iter()
            .map(|p| eval(p, &mut evaluations))
            .collect();

        let mut best_seen = f64::INFINITY;
        let mut stall = 0usize;
        let mut iterations = 0usize;

        for _ in 0..self.max_iterations {
            iterations += 1;
            // Order the simplex by value.
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let best = order[0];
            let worst = order[dim];
            let second_worst = order[dim.saturating_sub(1).max(0)];

            if values[best] < best_seen - 1e-15 {
                best_seen = values[best];
                stall = 0;
            } else {
                stall += 1;
            }
            if stall >= self.stall_window {
                break;
            }
            if (values[worst] - values[best]).abs() <= self.value_tolerance {
                break;
            }

            // Centroid of all but the worst point.
            let mut centroid = vec![0.0; dim];
            for &idx in order.iter().take(dim) {
                for (c, x) in centroid.iter_mut().zip(&points[idx]) {
                    *c += x;
                }
            }
            for c in &mut centroid {
                *c /= dim as f64;
            }

            let blend = |from: &[f64], towards: &[f64], t: f64| -> Vec<f64> {
                from.iter()
                    .zip(towards)
                    .map(|(&a, &b)| a + t * (b - a))
                    .collect()
            };

            // Reflect the worst point through the centroid.
            let reflected = blend(&centroid, &points[worst], -self.reflection);
            let reflected_value = eval(&reflected, &mut evaluations);

            if reflected_value < values[best] {
                let expanded = blend(&centroid, &points[worst], -self.expansion);
                let expanded_value = eval(&expanded, &mut evaluations);
                if expanded_value < reflected_value {
                    points[worst] = expanded;
                    values[worst] = expanded_value;
                } else {
                    points[worst] = reflected;
                    values[worst] = reflected_value;
                }
            } else if reflected_value < values[second_worst] {
                points[worst] = reflected;
                values[worst] = reflected_value;
            } else {
                // Contract toward the centroid, inside or outside.
                let (candidate, candidate_value) = if reflected_value < values[worst] {
                    let outside = blend(&centroid, &reflected, self.contraction);
                    let v = eval(&outside, &mut evaluations);
                    (outside, v)
                } else {
                    let inside = blend(&centroid, &points[worst], self.contraction);
                    let v = eval(&inside, &mut evaluations);
                    (inside, v)
                };
                if candidate_value < values[worst].min(reflected_value) {
                    points[worst] = candidate;
                    values[worst] = candidate_value;
                } else {
                    // Shrink everything toward the best point.
                    let anchor = points[best].clone();
                    for idx in 0..points.len() {
                        if idx == best {
                            continue;
                        }
                        points[idx] = blend(&anchor, &points[idx], self.shrink);
                        values[idx] = eval(&points[idx], &mut evaluations);
                    }
                }
            }
        }

        let best = (0..points.len())
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("simplex is non-empty");
        MinimizeOutcome {
            best_point: points[best].clone(),
            best_value: values[best],
            iterations,
            evaluations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic_bowl_in_four_parameters() {
        let target = [1.0, -2.0, 0.5, 3.0];
        let mut f = |x: &[f64]| -> f64 {
            x.iter()
                .zip(&target)
                .map(|(&xi, &ti)| (xi - ti) * (xi - ti))
                .sum()
        };
        let nm = NelderMead {
            max_iterations: 5000,
            value_tolerance: 1e-14,
            ..NelderMead::default()
        };
        let outcome = nm.minimize(&mut f, &[0.0, 0.0, 0.0, 0.0]);
        for (got, want) in outcome.best_point.iter().zip(&target) {
            assert_relative_eq!(got, want, epsilon = 1e-4);
        }
        assert!(outcome.best_value < 1e-8);
    }

    #[test]
    fn constant_objective_terminates_at_start() {
        let mut f = |_: &[f64]| 42.0;
        let nm = NelderMead::default();
        let outcome = nm.minimize(&mut f, &[0.3, 0.7]);
        assert_eq!(outcome.best_value, 42.0);
        assert!(outcome.iterations <= nm.max_iterations);
    }

    #[test]
    fn rosenbrock_two_dimensional_progress() {
        let mut f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let nm = NelderMead {
            max_iterations: 10000,
            stall_window: 2000,
            value_tolerance: 1e-15,
            ..NelderMead::default()
        };
        let outcome = nm.minimize(&mut f, &[-1.2, 1.0]);
        assert!(outcome.best_value < 1e-6, "got {}", outcome.best_value);
    }
}
