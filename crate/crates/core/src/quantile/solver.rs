//! Exact minimization of a sum of check losses `Σ_r ρ_{τ_r}(y_r - z_rᵀθ)`.
//!
//! A few iteratively reweighted least-squares passes on the smoothed loss
//! provide a warm start. The warm start is snapped to a basic solution (d
//! rows interpolated exactly) and improved by edge descent over adjacent
//! basic solutions until no edge decreases the objective. Each move follows
//! an edge to the minimizer of the convex piecewise-linear objective along
//! it, so the objective strictly decreases and the walk cannot cycle.

use crate::error::{Error, Result};
use crate::numerics::{dot, Cholesky, Lu, Matrix};

/// Smoothing floor for the reweighting step.
const IRLS_EPSILON: f64 = 1e-8;
/// Warm-start passes; the exact phase does the rest.
const IRLS_PASSES: usize = 30;
const MAX_PIVOTS: usize = 20_000;

pub fn check_loss(t: f64, tau: f64) -> f64 {
    if t >= 0.0 {
        tau * t
    } else {
        (tau - 1.0) * t
    }
}

/// Rows `z_r`, responses `y_r` and per-row quantile levels `τ_r`.
pub(crate) struct CheckLossProblem<'a> {
    pub design: &'a Matrix,
    pub response: &'a [f64],
    pub levels: &'a [f64],
}

#[derive(Debug, Clone)]
pub(crate) struct CheckLossSolution {
    pub params: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl CheckLossProblem<'_> {
    fn rows(&self) -> usize {
        self.design.rows()
    }

    fn dim(&self) -> usize {
        self.design.cols()
    }

    fn residuals(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|r| self.response[r] - dot(self.design.row(r), theta))
            .collect()
    }

    pub fn objective(&self, theta: &[f64]) -> f64 {
        self.residuals(theta)
            .iter()
            .zip(self.levels)
            .map(|(&r, &t)| check_loss(r, t))
            .sum()
    }

    /// Weighted least squares `argmin Σ c_r (y_r - z_rᵀθ)²`.
    fn weighted_least_squares(&self, weights: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        let mut gram = Matrix::zeros(d, d);
        let mut rhs = vec![0.0; d];
        for r in 0..self.rows() {
            let z = self.design.row(r);
            let c = weights[r];
            if c == 0.0 {
                continue;
            }
            for i in 0..d {
                let ci = c * z[i];
                if ci == 0.0 {
                    continue;
                }
                rhs[i] += ci * self.response[r];
                for j in 0..=i {
                    gram[(i, j)] += ci * z[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                gram[(j, i)] = gram[(i, j)];
            }
        }
        let chol = Cholesky::new(&gram).map_err(|_| Error::RankDeficient)?;
        Ok(chol.solve(&rhs))
    }

    fn irls(&self, passes: usize) -> Result<Vec<f64>> {
        let n = self.rows();
        let mut theta = self.weighted_least_squares(&vec![1.0; n])?;
        let scale = self.response.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let eps = IRLS_EPSILON * scale;
        let mut best = (self.objective(&theta), theta.clone());
        for _ in 0..passes {
            let weights: Vec<f64> = self
                .residuals(&theta)
                .iter()
                .zip(self.levels)
                .map(|(&r, &t)| {
                    let side = if r >= 0.0 { t } else { 1.0 - t };
                    side / r.abs().max(eps)
                })
                .collect();
            theta = match self.weighted_least_squares(&weights) {
                Ok(t) => t,
                Err(_) => break,
            };
            let obj = self.objective(&theta);
            if !obj.is_finite() {
                break;
            }
            let improved = best.0 - obj;
            if obj < best.0 {
                best = (obj, theta.clone());
            }
            if improved.abs() <= 1e-9 * (1.0 + best.0) {
                break;
            }
        }
        Ok(best.1)
    }

    /// Picks `d` linearly independent rows with the smallest residuals.
    fn initial_basis(&self, theta: &[f64]) -> Result<Vec<usize>> {
        let d = self.dim();
        let res = self.residuals(theta);
        let mut order: Vec<usize> = (0..self.rows()).collect();
        order.sort_by(|&a, &b| res[a].abs().total_cmp(&res[b].abs()).then(a.cmp(&b)));
        let mut basis = Vec::with_capacity(d);
        let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(d);
        for r in order {
            let z = self.design.row(r);
            let norm = dot(z, z).sqrt();
            if norm == 0.0 {
                continue;
            }
            let mut v = z.to_vec();
            for q in &ortho {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
            let vn = dot(&v, &v).sqrt();
            if vn > 1e-8 * norm {
                v.iter_mut().for_each(|a| *a /= vn);
                ortho.push(v);
                basis.push(r);
                if basis.len() == d {
                    return Ok(basis);
                }
            }
        }
        Err(Error::RankDeficient)
    }

    pub fn solve(&self, start: Option<&[f64]>) -> Result<CheckLossSolution> {
        let n = self.rows();
        let d = self.dim();
        if n < d || d == 0 {
            return Err(Error::RankDeficient);
        }
        let warm = match start {
            Some(s) => s.to_vec(),
            None => self.irls(IRLS_PASSES)?,
        };
        let mut basis = self.initial_basis(&warm)?;
        let mut in_basis = vec![false; n];
        basis.iter().for_each(|&r| in_basis[r] = true);

        let scale = self.response.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let zero_tol = 1e-11 * scale;
        let mut theta = vec![0.0; d];

        for pivot in 0..MAX_PIVOTS {
            let basis_matrix = Matrix::from_fn(d, d, |i, j| self.design[(basis[i], j)]);
            let lu = Lu::new(&basis_matrix, 1e-13).ok_or(Error::RankDeficient)?;
            let y_b: Vec<f64> = basis.iter().map(|&r| self.response[r]).collect();
            theta = lu.solve(&y_b);
            let res = self.residuals(&theta);

            // Gradient of the non-basic, non-zero part along parameter space,
            // and the rows sitting exactly on the fit.
            let mut grad = vec![0.0; d];
            let mut ties = Vec::new();
            for r in 0..n {
                if in_basis[r] {
                    continue;
                }
                let slope = if res[r] > zero_tol {
                    self.levels[r]
                } else if res[r] < -zero_tol {
                    self.levels[r] - 1.0
                } else {
                    ties.push(r);
                    continue;
                };
                // loss rate = slope * (-z_rᵀ dθ)
                for (g, &z) in grad.iter_mut().zip(self.design.row(r)) {
                    *g -= slope * z;
                }
            }

            // Edge j, sign σ: dθ = -σ B⁻¹ e_j moves basic row j's residual at rate σ.
            let mut best_edge: Option<(usize, f64, Vec<f64>, f64)> = None;
            for j in 0..d {
                let mut e = vec![0.0; d];
                e[j] = 1.0;
                let col = lu.solve(&e);
                let base = dot(&grad, &col);
                for sigma in [1.0, -1.0] {
                    let dir: Vec<f64> = col.iter().map(|c| -sigma * c).collect();
                    let own = if sigma > 0.0 {
                        self.levels[basis[j]]
                    } else {
                        1.0 - self.levels[basis[j]]
                    };
                    let mut rate = -sigma * base + own;
                    for &r in &ties {
                        let s = -dot(self.design.row(r), &dir);
                        rate += if s > 0.0 {
                            self.levels[r] * s
                        } else {
                            (self.levels[r] - 1.0) * s
                        };
                    }
                    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let normalized = rate / norm.max(f64::MIN_POSITIVE);
                    if rate < -1e-12 * (1.0 + norm) && best_edge.as_ref().is_none_or(|b| normalized < b.3)
                    {
                        best_edge = Some((j, rate, dir, normalized));
                    }
                }
            }

            let Some((leave, rate, dir, _)) = best_edge else {
                return Ok(CheckLossSolution {
                    objective: self.objective(&theta),
                    params: theta,
                    iterations: pivot,
                });
            };

            // Line search: breakpoints where a residual moving toward zero crosses it.
            let mut breaks: Vec<(f64, f64, usize)> = Vec::new();
            for r in 0..n {
                if in_basis[r] {
                    continue;
                }
                let s = -dot(self.design.row(r), &dir);
                if s == 0.0 || res[r].abs() <= zero_tol {
                    continue;
                }
                let t = -res[r] / s;
                if t > 0.0 {
                    breaks.push((t, s.abs(), r));
                }
            }
            breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
            let mut slope = rate;
            let mut entering = None;
            for &(_, gain, r) in &breaks {
                slope += gain;
                if slope >= 0.0 {
                    entering = Some(r);
                    break;
                }
            }
            let Some(enter) = entering else {
                return Err(Error::InvalidInput(
                    "check-loss objective is unbounded along an edge".into(),
                ));
            };
            in_basis[basis[leave]] = false;
            in_basis[enter] = true;
            basis[leave] = enter;
        }
        Err(Error::NoConvergence {
            what: "check-loss edge descent",
            iterations: MAX_PIVOTS,
            residual: f64::NAN,
            best: theta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_loss_values() {
        assert_eq!(check_loss(0.0, 0.3), 0.0);
        assert_eq!(check_loss(2.0, 0.5), 1.0);
        assert!((check_loss(-1.0, 0.3) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn intercept_only_median() {
        let z = Matrix::from_row_major(3, 1, vec![1.0; 3]).unwrap();
        let y = [1.0, 2.0, 100.0];
        let p = CheckLossProblem {
            design: &z,
            response: &y,
            levels: &[0.5; 3],
        };
        let s = p.solve(None).unwrap();
        assert!((s.params[0] - 2.0).abs() < 1e-12);
        assert!((s.objective - 49.5).abs() < 1e-9);
    }
}
