//! Stationary Gaussian random fields with Matérn covariance.

mod bessel;
mod model;
mod sampler;

pub use bessel::bessel_k;
pub use model::{sample_model, ModelSpec, Transform};
pub use sampler::{
    sample_field_cholesky, sample_field_circulant, sample_rng, CholeskySampler, CirculantSampler,
    FieldSampler, SamplerKind, MAX_CHOLESKY_VERTICES,
};

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Matérn covariance parameters. Distances are in the same units as
/// `spacing`, the distance between neighbouring grid vertices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaternParams {
    /// Range `η`.
    pub eta: f64,
    /// Smoothness `ν`.
    pub nu: f64,
    /// Variance `σ²`.
    pub sigma2: f64,
    pub spacing: f64,
}

impl MaternParams {
    pub fn new(eta: f64, nu: f64, sigma2: f64, spacing: f64) -> Result<Self> {
        let p = MaternParams {
            eta,
            nu,
            sigma2,
            spacing,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit variance and unit spacing.
    pub fn unit(eta: f64, nu: f64) -> Result<Self> {
        Self::new(eta, nu, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.eta) && ok(self.nu) && ok(self.sigma2) && ok(self.spacing)) {
            return Err(Error::InvalidArgument(format!(
                "Matérn parameters must be finite and positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Matérn covariance at distance `d ≥ 0`:
/// `σ² 2^{1−ν}/Γ(ν) (√(2ν) d/η)^ν K_ν(√(2ν) d/η)`, with `C(0) = σ²`.
pub fn matern_cov(d: f64, p: &MaternParams) -> Result<f64> {
    p.validate()?;
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::InvalidArgument(format!("distance must be finite and >= 0, got {d}")));
    }
    let x = (2.0 * p.nu).sqrt() * d / p.eta;
    if x < 1e-12 {
        return Ok(p.sigma2);
    }
    // K_ν(x) underflows beyond ~700.
    if x > 700.0 {
        return Ok(0.0);
    }
    let log_scale = (1.0 - p.nu) * std::f64::consts::LN_2 - gamma(p.nu).ln() + p.nu * x.ln();
    Ok(p.sigma2 * log_scale.exp() * bessel_k(p.nu, x)?)
}
