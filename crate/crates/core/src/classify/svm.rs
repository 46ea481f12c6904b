//! Sequential minimal optimization for the soft-margin SVM dual
//!
//! ```text
//! min ½ αᵀQα − eᵀα   s.t.  0 ≤ α ≤ C,  yᵀα = 0,   Q_ij = y_i y_j K_ij
//! ```
//!
//! with second-order working-set selection. The bias is unregularized and
//! recovered from the free support vectors.

use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `Σ α_i y_i K(x_i, x) + bias`.
    pub bias: f64,
    /// Dual objective in maximization form, `eᵀα − ½ αᵀQα`.
    pub objective: f64,
    pub iterations: usize,
}

/// Solves the dual given a row-major `n × n` kernel matrix and labels `±1`.
/// Stops when the maximal KKT violation drops below `tolerance`.
pub fn solve_dual(kernel: &[f64], labels: &[f64], cost: f64, tolerance: f64, max_iter: usize) -> Result<DualSolution> {
    let n = labels.len();
    assert_eq!(kernel.len(), n * n, "kernel matrix must be n x n");
    if !(cost > 0.0) || !cost.is_finite() {
        return Err(Error::InvalidArgument(format!("SVM cost must be positive, got {cost}")));
    }
    let k = |i: usize, j: usize| kernel[i * n + j];
    let y = labels;
    let mut alpha = vec![0.0; n];
    // Gradient of the minimization objective: G = Qα − e.
    let mut grad = vec![-1.0; n];
    let up = |a: f64, yi: f64| if yi > 0.0 { a < cost } else { a > 0.0 };
    let low = |a: f64, yi: f64| if yi > 0.0 { a > 0.0 } else { a < cost };

    let mut iterations = 0;
    loop {
        // i maximizes −y_t G_t over I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = t;
                }
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i_sel == usize::MAX {
                continue;
            }
            let b = gmax - v;
            if b > 0.0 {
                let a = k(i_sel, i_sel) + k(t, t) - 2.0 * k(i_sel, t);
                let obj = -(b * b) / if a > 0.0 { a } else { TAU };
                if obj < best {
                    best = obj;
                    j_sel = t;
                }
            }
        }
        if gmax - gmin < tolerance || j_sel == usize::MAX {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::Training(format!(
                "SMO did not reach KKT tolerance {tolerance:e} in {max_iter} iterations (gap {:e})",
                gmax - gmin
            )));
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = (k(i, i) + k(j, j) - 2.0 * k(i, j)).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > cost {
                    alpha[i] = cost;
                    alpha[j] = cost - diff;
                }
            } else if alpha[j] > cost {
                alpha[j] = cost;
                alpha[i] = cost + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > cost {
                if alpha[i] > cost {
                    alpha[i] = cost;
                    alpha[j] = sum - cost;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cost {
                if alpha[j] > cost {
                    alpha[j] = cost;
                    alpha[i] = sum - cost;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
        }
    }

    // ρ from free vectors, else the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= cost {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 { sum_free / free as f64 } else { (ub + lb) / 2.0 };

    // With G = Qα − e, eᵀα − ½αᵀQα = −½ Σ α_t (G_t − 1).
    let objective = alpha.iter().zip(&grad).map(|(a, g)| -0.5 * a * (g - 1.0)).sum();

    Ok(DualSolution {
        alpha,
        bias: -rho,
        objective,
        iterations,
    })
}
