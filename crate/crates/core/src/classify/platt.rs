//! Platt scaling: fits `P(y = +1 | f) = 1 / (1 + exp(A·f + B))` to decision
//! values by regularized maximum likelihood with Newton steps and
//! backtracking, using smoothed targets `(N₊ + 1)/(N₊ + 2)` and `1/(N₋ + 2)`.

use crate::error::{Error, Result};

const MAX_ITER: usize = 100;
const MIN_STEP: f64 = 1e-10;
const HESSIAN_RIDGE: f64 = 1e-12;
const GRAD_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Platt {
    pub a: f64,
    pub b: f64,
}

impl Platt {
    /// Probability of the positive class for decision value `f`.
    pub fn probability(&self, f: f64) -> f64 {
        let z = self.a * f + self.b;
        // exp never overflows on either branch.
        if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        }
    }
}

/// Negative log-likelihood with soft targets, evaluated stably.
fn objective(dec: &[f64], targets: &[f64], a: f64, b: f64) -> f64 {
    dec.iter()
        .zip(targets)
        .map(|(&f, &t)| {
            let z = f * a + b;
            if z >= 0.0 {
                t * z + (-z).exp().ln_1p()
            } else {
                (t - 1.0) * z + z.exp().ln_1p()
            }
        })
        .sum()
}

pub fn fit_platt(dec: &[f64], labels: &[f64]) -> Result<Platt> {
    assert_eq!(dec.len(), labels.len());
    let n_pos = labels.iter().filter(|&&y| y > 0.0).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(Error::Calibration("calibration data must contain both classes".into()));
    }
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let targets: Vec<f64> = labels.iter().map(|&y| if y > 0.0 { hi } else { lo }).collect();

    let mut a = 0.0;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
    let mut fval = objective(dec, &targets, a, b);

    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21) = (HESSIAN_RIDGE, HESSIAN_RIDGE, 0.0);
        let (mut g1, mut g2) = (0.0, 0.0);
        for (&f, &t) in dec.iter().zip(&targets) {
            let z = f * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = t - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < GRAD_TOL && g2.abs() < GRAD_TOL {
            return Ok(Platt { a, b });
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = 1.0;
        loop {
            if step < MIN_STEP {
                // No further decrease is representable: accept the point.
                log::debug!("Platt line search stalled at gradient ({g1:e}, {g2:e})");
                return Ok(Platt { a, b });
            }
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(dec, &targets, na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
    }
    Err(Error::Calibration(format!(
        "Platt scaling did not converge in {MAX_ITER} Newton iterations"
    )))
}
