mod common;

use topostat::grf::{bessel_k, matern_cov, MaternParams};

fn log_grid(n: usize) -> Vec<f64> {
    let (lo, hi) = (0.01f64.ln(), 20f64.ln());
    (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    let nodes = common::gauss_legendre(24);
    let total: f64 = nodes.iter().map(|&(_, w)| w).sum();
    assert!((total - 2.0).abs() < 1e-14);
    let x46: f64 = nodes.iter().map(|&(x, w)| w * x.powi(46)).sum();
    assert!((x46 - 2.0 / 47.0).abs() < 1e-14);
}

#[test]
fn quadrature_oracle_reproduces_reference_values() {
    // Reference values computed with mpmath at 30 digits.
    for (nu, x, reference) in [
        (1.0, 1.0, 0.601_907_230_197_234_6),
        (2.0, 1.0, 1.624_838_898_635_177_5),
    ] {
        let q = common::bessel_k_quadrature(nu, x);
        assert!(((q - reference) / reference).abs() < 1e-13, "K_{nu}({x}) = {q}");
    }
}

#[test]
fn bessel_matches_quadrature_on_log_grid() {
    for nu in [0.5, 1.0, 1.5, 2.0, 2.7] {
        for x in log_grid(60) {
            let got = bessel_k(nu, x).unwrap();
            let want = common::bessel_k_quadrature(nu, x);
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-10, "K_{nu}({x}): {got} vs {want}, rel {rel:e}");
        }
    }
}

#[test]
fn k2_recurrence_holds() {
    for x in log_grid(80) {
        let k2 = bessel_k(2.0, x).unwrap();
        let rhs = bessel_k(0.0, x).unwrap() + 2.0 / x * bessel_k(1.0, x).unwrap();
        assert!(((k2 - rhs) / k2).abs() < 1e-10, "x = {x}");
    }
}

#[test]
fn matern_pins_the_reference_value() {
    // √2 K₁(√2), the unit-variance covariance at d = η = 5 with ν = 1.
    let c = matern_cov(5.0, &MaternParams::unit(5.0, 1.0).unwrap()).unwrap();
    assert!((c - 0.444_342_523_632_236_04).abs() < 1e-13, "{c}");
}
