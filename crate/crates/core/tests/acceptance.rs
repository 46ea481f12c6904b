//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::fs;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use topostat::critical::{census_and_diagram, critical_values_from_diagram, locality_gap_demo, search_locality_witness};
use topostat::cubical::CubicalFiltration;
use topostat::grf::{bessel_k, matern_cov, CholeskySampler, CirculantSampler, MaternParams};
use topostat::harness::{self, ExperimentConfig, RawConfig, ReportRow};
use topostat::landscape::{eval_landscape, vectorize, LandscapeVector, SampleGrid};
use topostat::persistence::{betti_oracle, compute_persistence, PersistenceDiagram};

/// Lowest accuracy accepted for η = 5 against η = 10 with identity
/// transforms at desk scale. Pilot runs over seeds 1 to 5 gave 97.5 to 99.5.
const PILOT_THRESHOLD: f64 = 95.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(1001);
    let (mut checks, mut mismatches) = (0usize, 0usize);
    for i in 0..500 {
        let (r, c) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let field = if i % 2 == 0 {
            common::random_field(&mut rng, r, c)
        } else {
            common::tied_field(&mut rng, r, c)
        };
        let filt = CubicalFiltration::from_field(&field).unwrap();
        let diagram = compute_persistence(&filt);
        for &a in field.values() {
            checks += 1;
            if diagram.betti_curve(a).unwrap() != betti_oracle(&filt, a) {
                mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 30.0,
        format!("500 fields up to 6x6, {checks} thresholds, {mismatches} mismatches, {secs:.2} s (limit 30 s)"),
    )
}

fn census_agreement() -> Outcome {
    let mut rng = common::rng(1002);
    let mut mismatches = 0;
    for _ in 0..500 {
        let (r, c) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let field = common::random_field(&mut rng, r, c);
        let (census, diagram) = census_and_diagram(&field).unwrap();
        let derived = critical_values_from_diagram(&diagram, field.min_value());
        if census.value_index_multiset() != derived.value_index_multiset() {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("500 generic fields up to 8x8, {mismatches} mismatches"))
}

fn locality_witness() -> Outcome {
    let (a, b) = locality_gap_demo();
    let (ca, da) = census_and_diagram(&a).unwrap();
    let (cb, db) = census_and_diagram(&b).unwrap();
    let found = search_locality_witness(5);
    let reproduced = found.as_ref() == Some(&(a.values().to_vec(), b.values().to_vec()));
    outcome(
        ca.same_values(&cb) && da != db && reproduced,
        format!(
            "{:?} vs {:?}: equal censuses {}, diagrams {:?} vs {:?}, search reproduces pair {}",
            a.values(),
            b.values(),
            ca.same_values(&cb),
            da.bars(0),
            db.bars(0),
            reproduced
        ),
    )
}

fn landscape_laws() -> Outcome {
    let mut rng = common::rng(1004);
    let grid = SampleGrid::uniform(-5.0, 5.0, 200).unwrap();
    let depth = 12;
    let n = grid.len();
    let mut failures = 0;
    for _ in 0..1000 {
        let bars = common::random_bars(&mut rng, 10);
        let split = rng.random_range(0..=bars.len());
        let tagged: Vec<(u8, f64, f64)> = bars
            .iter()
            .enumerate()
            .map(|(i, &(b, d))| (u8::from(i >= split), b, d))
            .collect();
        let diagram = PersistenceDiagram::from_bars(&tagged, Some(-6.0));
        let v = vectorize(&diagram, &grid, depth).unwrap().to_dense_vec();
        for degree in 0..2usize {
            let deg_bars = diagram.bars(degree as u8);
            for k in 1..=depth {
                for (i, &t) in grid.points().iter().enumerate() {
                    let x = v[(degree * depth + k - 1) * n + i];
                    let below = if k < depth { v[(degree * depth + k) * n + i] } else { 0.0 };
                    let oracle = common::landscape_oracle(&deg_bars, k, t);
                    let lipschitz = i == 0
                        || (x - v[(degree * depth + k - 1) * n + i - 1]).abs() <= t - grid.points()[i - 1] + 1e-12;
                    if !(x >= below && below >= 0.0 && lipschitz && x == oracle && eval_landscape(&deg_bars, k, t) == oracle) {
                        failures += 1;
                    }
                }
            }
        }
    }
    outcome(failures == 0, format!("1000 diagrams, K = {depth}, {n} points, {failures} violations"))
}

fn vector_shape() -> Outcome {
    let mut rng = common::rng(1005);
    let mut failures = 0;
    for _ in 0..300 {
        let (n, k) = (rng.random_range(1..=50), rng.random_range(1..=8));
        let bars = common::random_bars(&mut rng, 10);
        let tagged: Vec<(u8, f64, f64)> = bars.iter().enumerate().map(|(i, &(b, d))| ((i % 2) as u8, b, d)).collect();
        let diagram = PersistenceDiagram::from_bars(&tagged, Some(-6.0));
        let grid = SampleGrid::uniform(-5.0, 5.0, n).unwrap();
        let v = vectorize(&diagram, &grid, k).unwrap();
        let dense = v.to_dense_vec();
        let round = v.sparsify().densify();
        let file = LandscapeVector::from_csv_str(&v.to_csv_string().unwrap(), "v.csv".as_ref()).unwrap();
        if v.len() != 2 * (n + 1) * k || round != v || file.to_dense_vec() != dense || v.sparsify().to_dense_vec() != dense {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("300 random (N <= 50, K <= 8), {failures} failures of length or round trip"))
}

/// Largest `|empirical − expected| / SE` over all covariance entries.
fn covariance_z(samples: &[Vec<f64>], expected: impl Fn(usize, usize) -> f64) -> f64 {
    let m = samples[0].len();
    let n = samples.len() as f64;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in i..m {
            let emp = samples.iter().map(|s| s[i] * s[j]).sum::<f64>() / n;
            let c = expected(i, j);
            let se = ((expected(i, i) * expected(j, j) + c * c) / n).sqrt();
            worst = worst.max((emp - c).abs() / se);
        }
    }
    worst
}

/// Largest two-sample z-score between the covariance estimates of `a` and `b`.
fn two_sample_z(a: &[Vec<f64>], b: &[Vec<f64>], expected: impl Fn(usize, usize) -> f64) -> f64 {
    let m = a[0].len();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in i..m {
            let ea = a.iter().map(|s| s[i] * s[j]).sum::<f64>() / na;
            let eb = b.iter().map(|s| s[i] * s[j]).sum::<f64>() / nb;
            let c = expected(i, j);
            let var = expected(i, i) * expected(j, j) + c * c;
            let se = (var / na + var / nb).sqrt();
            worst = worst.max((ea - eb).abs() / se);
        }
    }
    worst
}

fn sampler_fidelity() -> Outcome {
    let start = Instant::now();
    let p = MaternParams::unit(5.0, 1.0).unwrap();
    let cov = |cols: usize| {
        move |i: usize, j: usize| {
            let (dr, dc) = ((i / cols) as f64 - (j / cols) as f64, (i % cols) as f64 - (j % cols) as f64);
            matern_cov((dr * dr + dc * dc).sqrt(), &p).unwrap()
        }
    };
    let draws = 10_000u64;
    let chol4 = CholeskySampler::new(&p, 4, 4).unwrap();
    let s4: Vec<Vec<f64>> = (0..draws).map(|s| chol4.sample(77, s).values().to_vec()).collect();
    let z4 = covariance_z(&s4, cov(4));

    let chol8 = CholeskySampler::new(&p, 8, 8).unwrap();
    let circ8 = CirculantSampler::new(&p, 8, 8).unwrap();
    let c8: Vec<Vec<f64>> = (0..draws).map(|s| chol8.sample(78, s).values().to_vec()).collect();
    let f8: Vec<Vec<f64>> = (0..draws).map(|s| circ8.sample(79, s).values().to_vec()).collect();
    let z8 = two_sample_z(&c8, &f8, cov(8));
    let z8_circ = covariance_z(&f8, cov(8));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        z4 < 5.0 && z8 < 5.0 && z8_circ < 5.0 && secs < 120.0,
        format!(
            "4x4 Cholesky max z {z4:.2}; 8x8 circulant vs Cholesky max z {z8:.2}, circulant vs model {z8_circ:.2} (limit 5); {secs:.1} s (limit 120 s)"
        ),
    )
}

fn bessel_accuracy() -> Outcome {
    let (lo, hi) = (0.01f64.ln(), 20f64.ln());
    let mut worst: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    for i in 0..100 {
        let x = (lo + (hi - lo) * i as f64 / 99.0).exp();
        for nu in [1.0, 2.0] {
            let want = common::bessel_k_quadrature(nu, x);
            worst = worst.max(((bessel_k(nu, x).unwrap() - want) / want).abs());
        }
        let k2 = bessel_k(2.0, x).unwrap();
        let rhs = bessel_k(0.0, x).unwrap() + 2.0 / x * bessel_k(1.0, x).unwrap();
        worst_rec = worst_rec.max(((k2 - rhs) / k2).abs());
    }
    outcome(
        worst < 1e-10 && worst_rec < 1e-10,
        format!("max relative error vs quadrature {worst:.2e}, K2 recurrence {worst_rec:.2e} (limit 1e-10)"),
    )
}

fn run_desk(seed: u64, dir: &std::path::Path, models: Option<&str>, comparisons: Option<&str>, matern: Option<&str>) -> Vec<ReportRow> {
    let cfg = ExperimentConfig::from_raw(RawConfig {
        seed: Some(seed),
        out: Some(dir.to_path_buf()),
        models: models.map(Into::into),
        comparisons: comparisons.map(Into::into),
        matern: matern.map(Into::into),
        ..RawConfig::default()
    })
    .unwrap();
    harness::run_experiment(&cfg).unwrap()
}

/// Calibration may exceed accuracy by at most three binomial standard errors
/// of a test set with `n` samples.
fn calibration_excess_ok(row: &ReportRow, n: f64) -> bool {
    let p = ((row.accuracy + row.calibration) / 200.0).clamp(0.0, 1.0);
    let noise = 300.0 * (p * (1.0 - p) / n).sqrt();
    row.calibration <= row.accuracy + noise + 0.05
}

fn table_substitutes() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut self_acc = Vec::new();
    let mut pair_acc = Vec::new();
    let mut rows = Vec::new();
    for seed in 1..=5u64 {
        let report = run_desk(
            seed,
            &tmp.path().join(format!("s{seed}")),
            Some("A:identity,B:identity@10:1,C:identity"),
            Some("A:B,C:C"),
            Some("5:1"),
        );
        pair_acc.push(report[0].accuracy);
        self_acc.push(report[1].accuracy);
        rows.extend(report);
    }
    rows.extend(run_desk(1, &tmp.path().join("table"), None, None, None));
    let self_mean = self_acc.iter().sum::<f64>() / self_acc.len() as f64;
    let pair_min = pair_acc.iter().copied().fold(f64::INFINITY, f64::min);
    let test_n = 2.0 * harness::DEFAULT_SAMPLES as f64;
    let violations: Vec<String> = rows
        .iter()
        .filter(|r| !calibration_excess_ok(r, test_n))
        .map(|r| format!("{} ({},{}) acc {:.1} cal {:.1}", r.comparison, r.eta, r.nu, r.accuracy, r.calibration))
        .collect();
    let a = (self_mean - 50.0).abs() <= 5.0;
    let b = pair_min >= PILOT_THRESHOLD;
    let c = violations.is_empty();
    outcome(
        a && b && c,
        format!(
            "(a) self-comparison mean accuracy {self_mean:.1} over 5 seeds {self_acc:?} (need 50 +/- 5): {}; \
             (b) eta 5 vs 10 min accuracy {pair_min:.1} {pair_acc:?} (need >= {PILOT_THRESHOLD}): {}; \
             (c) calibration above accuracy beyond noise in {} of {} rows{}: {}. \
             Reference accuracies for the original model classes are not reproduced.",
            pass_word(a),
            pass_word(b),
            violations.len(),
            rows.len(),
            if c { String::new() } else { format!(" {violations:?}") },
            pass_word(c)
        ),
    )
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| -> Vec<u8> {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_topostat"))
            .args(["experiment", "--seed", "2024", "--threads", threads, "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        fs::read(out.join("report.csv")).unwrap()
    };
    let first = run("a", "1");
    let second = run("b", "1");
    let threaded = run("c", "4");
    let same = first == second && first == threaded;
    outcome(
        same,
        format!(
            "desk-scale experiment at --threads 1, 1, 4: report CSVs byte-identical {same} ({} bytes)",
            first.len()
        ),
    )
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("census agreement", census_agreement),
        ("locality-gap witness", locality_witness),
        ("landscape laws", landscape_laws),
        ("vector shape", vector_shape),
        ("sampler fidelity", sampler_fidelity),
        ("bessel accuracy", bessel_accuracy),
        ("table substitutes", table_substitutes),
        ("end-to-end determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1} s]",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
