use topostat::grf::{matern_cov, CirculantSampler, FieldSampler, MaternParams, SamplerKind};

#[test]
fn circulant_moments_at_desk_scale() {
    let p = MaternParams::unit(5.0, 1.0).unwrap();
    let sampler = CirculantSampler::new(&p, 32, 32).unwrap();
    let n = 400;
    let (mut mean, mut var, mut lag) = (0.0, 0.0, 0.0);
    for s in 0..n {
        let f = sampler.sample(2, s);
        // One interior vertex and its neighbour five columns over.
        let (x, y) = (f.get(16, 10), f.get(16, 15));
        mean += x;
        var += x * x;
        lag += x * y;
    }
    let nf = n as f64;
    let c5 = matern_cov(5.0, &p).unwrap();
    assert!((mean / nf).abs() < 5.0 / nf.sqrt());
    assert!((var / nf - 1.0).abs() < 5.0 * (2.0 / nf).sqrt());
    assert!((lag / nf - c5).abs() < 5.0 * ((1.0 + c5 * c5) / nf).sqrt());
}

#[test]
fn samples_are_pure_functions_of_seed_and_stream() {
    let p = MaternParams::unit(10.0, 1.0).unwrap();
    let s = FieldSampler::new(&p, 12, 9, SamplerKind::Circulant).unwrap();
    assert_eq!(s.sample(1, 7), s.sample(1, 7));
    assert_ne!(s.sample(1, 7), s.sample(1, 8));
    assert_ne!(s.sample(1, 7), s.sample(2, 7));
}
