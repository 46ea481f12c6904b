//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topostat::landscape::{LandscapeLayout, LandscapeVector, SampleGrid};
use topostat::ScalarField;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `K_ν(x) = ∫₀^∞ exp(−x cosh t) cosh(νt) dt` by composite Gauss-Legendre,
/// truncated where the integrand is 1e-18 below its value at the origin
/// scale `e^{−x}`.
pub fn bessel_k_quadrature(nu: f64, x: f64) -> f64 {
    let log_f = |t: f64| -x * t.cosh() + nu * t;
    let mut upper = 1.0;
    while log_f(upper) > -x - 42.0 || upper < (nu / x).asinh() {
        upper += 0.5;
    }
    let nodes = gauss_legendre(24);
    let panels = 600;
    let h = upper / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for &(u, w) in &nodes {
            let t = mid + 0.5 * h * u;
            s += w * (-x * t.cosh()).exp() * (nu * t).cosh();
        }
        total += 0.5 * h * s;
    }
    total
}

/// Minimum of `½αᵀQα − eᵀα` over `0 ≤ α ≤ C`, `yᵀα = 0`, by enumerating
/// which coordinates sit at 0, at `C`, or strictly between. Each face's
/// stationary point comes from its KKT linear system.
pub fn brute_force_dual(q: &[f64], y: &[f64], cost: f64) -> f64 {
    let n = y.len();
    let mut best = f64::INFINITY;
    let states = 3usize.pow(n as u32);
    for code in 0..states {
        let mut state = vec![0u8; n];
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { cost } else { 0.0 }).collect();
        let m = free.len();
        if m > 0 {
            let mut a = nalgebra::DMatrix::<f64>::zeros(m + 1, m + 1);
            let mut rhs = nalgebra::DVector::<f64>::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (c, &j) in free.iter().enumerate() {
                    a[(r, c)] = q[i * n + j];
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                let fixed: f64 = (0..n).filter(|&j| state[j] != 2).map(|j| q[i * n + j] * alpha[j]).sum();
                rhs[r] = 1.0 - fixed;
            }
            rhs[m] = -(0..n).filter(|&j| state[j] != 2).map(|j| y[j] * alpha[j]).sum::<f64>();
            let Some(sol) = a.lu().solve(&rhs) else { continue };
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
        }
        let eq: f64 = alpha.iter().zip(y).map(|(a, y)| a * y).sum();
        if eq.abs() > 1e-9 || alpha.iter().any(|&a| !(-1e-12..=cost + 1e-12).contains(&a)) {
            continue;
        }
        let mut obj = 0.0;
        for i in 0..n {
            obj -= alpha[i];
            for j in 0..n {
                obj += 0.5 * alpha[i] * q[i * n + j] * alpha[j];
            }
        }
        best = best.min(obj);
    }
    best
}

/// Field with i.i.d. uniform values, distinct with probability one.
pub fn random_field(rng: &mut impl Rng, rows: usize, cols: usize) -> ScalarField {
    ScalarField::from_fn(rows, cols, |_, _| rng.random_range(-10.0..10.0)).unwrap()
}

/// Field with small integer values, so ties are common.
pub fn tied_field(rng: &mut impl Rng, rows: usize, cols: usize) -> ScalarField {
    ScalarField::from_fn(rows, cols, |_, _| rng.random_range(0..5) as f64).unwrap()
}

/// Nonnegative feature vectors in a single-point, single-level layout of
/// width two: exactly the 2-D point `(a, b)`.
pub fn point2(a: f64, b: f64) -> LandscapeVector {
    let layout = LandscapeLayout::new(SampleGrid::new(vec![0.0]).unwrap(), 1).unwrap();
    LandscapeVector::from_dense(layout, vec![a, b]).unwrap()
}

/// Random bars `(b, d)` with `b < d` inside `[-5, 5]`.
pub fn random_bars(rng: &mut impl Rng, max: usize) -> Vec<(f64, f64)> {
    let n = rng.random_range(0..=max);
    (0..n)
        .map(|_| {
            let b: f64 = rng.random_range(-5.0..4.9);
            let d = rng.random_range(b + 1e-3..5.0);
            (b, d)
        })
        .collect()
}

/// Level-`k` landscape by sorting every tent value at `t`.
pub fn landscape_oracle(bars: &[(f64, f64)], k: usize, t: f64) -> f64 {
    let mut tents: Vec<f64> = bars.iter().map(|&(b, d)| (t - b).min(d - t).max(0.0)).collect();
    tents.sort_by(|a, b| b.total_cmp(a));
    tents.get(k - 1).copied().unwrap_or(0.0)
}
