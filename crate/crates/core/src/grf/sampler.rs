//! Exact samplers for zero-mean stationary Gaussian fields on a grid.
//!
//! [`CholeskySampler`] factors the dense covariance matrix and is the ground
//! truth at small sizes. [`CirculantSampler`] embeds the covariance on a
//! periodic torus, diagonalises it with a 2-D FFT and draws in
//! `O(M log M)` per sample, `M` being the torus size.
//!
//! Randomness comes from ChaCha20, a counter-based generator: `seed` selects
//! the key and `stream` an independent substream, so samples drawn in
//! parallel are reproducible regardless of scheduling.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{matern_cov, MaternParams};
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Largest grid the dense sampler accepts.
pub const MAX_CHOLESKY_VERTICES: usize = 4096;

/// Diagonal jitter relative to `σ²`.
const JITTER: f64 = 1e-10;

/// Torus sizes tried are `2(n − 1)·p` for `p = 1..=MAX_PAD_FACTOR`.
const MAX_PAD_FACTOR: usize = 8;

/// Negative embedding eigenvalues down to this fraction of the largest are
/// treated as rounding and clamped to zero.
const EIGEN_TOLERANCE: f64 = 1e-9;

/// Generator for substream `stream` of `seed`.
pub fn sample_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Cholesky,
    Circulant,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(SamplerKind::Cholesky),
            "circulant" => Ok(SamplerKind::Circulant),
            other => Err(Error::Config(format!("unknown sampler `{other}`"))),
        }
    }
}

fn grid_distance(p: &MaternParams, dr: f64, dc: f64) -> f64 {
    p.spacing * (dr * dr + dc * dc).sqrt()
}

/// Dense sampler: `x = L z` with `L Lᵀ = C + jitter·I`.
#[derive(Clone, Debug)]
pub struct CholeskySampler {
    rows: usize,
    cols: usize,
    lower: DMatrix<f64>,
}

impl CholeskySampler {
    pub fn new(params: &MaternParams, rows: usize, cols: usize) -> Result<Self> {
        params.validate()?;
        let n = rows * cols;
        if n == 0 {
            return Err(Error::InvalidArgument("grid must be at least 1x1".into()));
        }
        if n > MAX_CHOLESKY_VERTICES {
            return Err(Error::InvalidArgument(format!(
                "dense sampler supports at most {MAX_CHOLESKY_VERTICES} vertices, got {n}"
            )));
        }
        // Covariance depends only on |displacement|; tabulate it once.
        let mut table = vec![0.0; rows * cols];
        for dr in 0..rows {
            for dc in 0..cols {
                table[dr * cols + dc] = matern_cov(grid_distance(params, dr as f64, dc as f64), params)?;
            }
        }
        let cov = DMatrix::from_fn(n, n, |i, j| {
            let (ri, ci) = (i / cols, i % cols);
            let (rj, cj) = (j / cols, j % cols);
            let c = table[ri.abs_diff(rj) * cols + ci.abs_diff(cj)];
            if i == j {
                c + JITTER * params.sigma2
            } else {
                c
            }
        });
        let chol = cov.cholesky().ok_or_else(|| {
            Error::Factorization(format!("{rows}x{cols} covariance is not positive definite"))
        })?;
        Ok(CholeskySampler {
            rows,
            cols,
            lower: chol.unpack(),
        })
    }

    pub fn sample(&self, seed: u64, stream: u64) -> ScalarField {
        let n = self.rows * self.cols;
        let mut rng = sample_rng(seed, stream);
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let values = (0..n)
            .map(|i| (0..=i).map(|j| self.lower[(i, j)] * z[j]).sum())
            .collect();
        ScalarField::new(self.rows, self.cols, values).expect("finite Gaussian sample")
    }
}

/// Circulant-embedding sampler.
#[derive(Clone)]
pub struct CirculantSampler {
    rows: usize,
    cols: usize,
    m_rows: usize,
    m_cols: usize,
    /// `sqrt(λ / M)` for each torus frequency, row-major.
    scale: Vec<f64>,
    fft_rows: Arc<dyn Fft<f64>>,
    fft_cols: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("torus", &(self.m_rows, self.m_cols))
            .finish()
    }
}

fn fft_2d(data: &mut [Complex<f64>], m_rows: usize, m_cols: usize, along_row: &dyn Fft<f64>, along_col: &dyn Fft<f64>) {
    for row in data.chunks_exact_mut(m_cols) {
        along_row.process(row);
    }
    if m_rows > 1 {
        let mut column = vec![Complex::new(0.0, 0.0); m_rows];
        for c in 0..m_cols {
            for r in 0..m_rows {
                column[r] = data[r * m_cols + c];
            }
            along_col.process(&mut column);
            for r in 0..m_rows {
                data[r * m_cols + c] = column[r];
            }
        }
    }
}

impl CirculantSampler {
    /// Finds the smallest padded torus whose embedding is nonnegative
    /// definite. Fails if none exists up to the maximum padding.
    pub fn new(params: &MaternParams, rows: usize, cols: usize) -> Result<Self> {
        params.validate()?;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("grid must be at least 1x1".into()));
        }
        let torus = |n: usize, pad: usize| if n == 1 { 1 } else { 2 * (n - 1) * pad };
        let mut planner = FftPlanner::<f64>::new();
        let mut worst = 0.0;
        for pad in 1..=MAX_PAD_FACTOR {
            let (m_rows, m_cols) = (torus(rows, pad), torus(cols, pad));
            let fft_rows = planner.plan_fft_forward(m_cols);
            let fft_cols = planner.plan_fft_forward(m_rows);
            let mut base = vec![Complex::new(0.0, 0.0); m_rows * m_cols];
            for i in 0..m_rows {
                let di = i.min(m_rows - i) as f64;
                for j in 0..m_cols {
                    let dj = j.min(m_cols - j) as f64;
                    base[i * m_cols + j].re = matern_cov(grid_distance(params, di, dj), params)?;
                }
            }
            fft_2d(&mut base, m_rows, m_cols, fft_rows.as_ref(), fft_cols.as_ref());
            let max = base.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            let min = base.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            worst = min / max;
            if min >= -EIGEN_TOLERANCE * max {
                let m = (m_rows * m_cols) as f64;
                let scale = base.iter().map(|z| (z.re.max(0.0) / m).sqrt()).collect();
                return Ok(CirculantSampler {
                    rows,
                    cols,
                    m_rows,
                    m_cols,
                    scale,
                    fft_rows,
                    fft_cols,
                });
            }
        }
        Err(Error::Factorization(format!(
            "circulant embedding of {rows}x{cols} grid is not nonnegative definite \
             (min/max eigenvalue {worst:.3e} at {MAX_PAD_FACTOR}x padding)"
        )))
    }

    /// Torus dimensions used for the embedding.
    pub fn torus(&self) -> (usize, usize) {
        (self.m_rows, self.m_cols)
    }

    pub fn sample(&self, seed: u64, stream: u64) -> ScalarField {
        let mut rng = sample_rng(seed, stream);
        let mut data: Vec<Complex<f64>> = self
            .scale
            .iter()
            .map(|&s| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex::new(s * re, s * im)
            })
            .collect();
        fft_2d(&mut data, self.m_rows, self.m_cols, self.fft_rows.as_ref(), self.fft_cols.as_ref());
        let mut values = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            values.extend(data[r * self.m_cols..r * self.m_cols + self.cols].iter().map(|z| z.re));
        }
        ScalarField::new(self.rows, self.cols, values).expect("finite Gaussian sample")
    }
}

/// A prepared sampler for one parameter set and grid.
#[derive(Clone, Debug)]
pub enum FieldSampler {
    Cholesky(CholeskySampler),
    Circulant(CirculantSampler),
}

impl FieldSampler {
    /// Prepares the preferred sampler. A failed circulant embedding falls
    /// back to the dense sampler with a logged warning.
    pub fn new(params: &MaternParams, rows: usize, cols: usize, preferred: SamplerKind) -> Result<Self> {
        match preferred {
            SamplerKind::Cholesky => Ok(FieldSampler::Cholesky(CholeskySampler::new(params, rows, cols)?)),
            SamplerKind::Circulant => match CirculantSampler::new(params, rows, cols) {
                Ok(s) => Ok(FieldSampler::Circulant(s)),
                Err(Error::Factorization(msg)) => {
                    log::warn!("{msg}; falling back to the Cholesky sampler");
                    Ok(FieldSampler::Cholesky(CholeskySampler::new(params, rows, cols)?))
                }
                Err(e) => Err(e),
            },
        }
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            FieldSampler::Cholesky(_) => SamplerKind::Cholesky,
            FieldSampler::Circulant(_) => SamplerKind::Circulant,
        }
    }

    pub fn sample(&self, seed: u64, stream: u64) -> ScalarField {
        match self {
            FieldSampler::Cholesky(s) => s.sample(seed, stream),
            FieldSampler::Circulant(s) => s.sample(seed, stream),
        }
    }
}

pub fn sample_field_cholesky(p: &MaternParams, rows: usize, cols: usize, seed: u64) -> Result<ScalarField> {
    Ok(CholeskySampler::new(p, rows, cols)?.sample(seed, 0))
}

pub fn sample_field_circulant(p: &MaternParams, rows: usize, cols: usize, seed: u64) -> Result<ScalarField> {
    Ok(FieldSampler::new(p, rows, cols, SamplerKind::Circulant)?.sample(seed, 0))
}
