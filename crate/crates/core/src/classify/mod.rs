//! Linear soft-margin SVM on landscape vectors, Platt calibration, and the
//! accuracy and calibration metrics.
//!
//! Features are used as-is: no centring or rescaling, so the kernel is the
//! plain dot product of landscape vectors.

mod platt;
mod svm;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub use platt::{fit_platt, Platt};
pub use svm::{solve_dual, DualSolution};

use crate::error::{Error, Result};
use crate::landscape::{LandscapeLayout, LandscapeVector};

pub const DEFAULT_COST: f64 = 1.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const CALIBRATION_FOLDS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmParams {
    pub cost: f64,
    /// Maximal KKT violation at termination.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            cost: DEFAULT_COST,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: 10_000_000,
        }
    }
}

impl SvmParams {
    pub fn with_cost(cost: f64) -> Self {
        SvmParams {
            cost,
            ..Self::default()
        }
    }
}

/// Landscape vectors with labels `±1`, all sharing one layout.
#[derive(Clone, Debug)]
pub struct LabeledSet {
    vectors: Vec<LandscapeVector>,
    labels: Vec<f64>,
}

impl LabeledSet {
    pub fn new(vectors: Vec<LandscapeVector>, labels: Vec<i8>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidArgument("labeled set is empty".into()));
        }
        if vectors.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} vectors but {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l != 1 && l != -1) {
            return Err(Error::InvalidArgument(format!("labels must be +1 or -1, got {l}")));
        }
        let layout = vectors[0].layout();
        if vectors.iter().any(|v| v.layout() != layout) {
            return Err(Error::InvalidArgument(
                "labeled vectors use different sample grids or depths".into(),
            ));
        }
        Ok(LabeledSet {
            vectors,
            labels: labels.into_iter().map(f64::from).collect(),
        })
    }

    /// Builds a set from a positive and a negative class.
    pub fn from_classes(positive: Vec<LandscapeVector>, negative: Vec<LandscapeVector>) -> Result<Self> {
        let labels = std::iter::repeat_n(1i8, positive.len())
            .chain(std::iter::repeat_n(-1i8, negative.len()))
            .collect();
        let mut vectors = positive;
        vectors.extend(negative);
        Self::new(vectors, labels)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[LandscapeVector] {
        &self.vectors
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn layout(&self) -> &LandscapeLayout {
        self.vectors[0].layout()
    }

    fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y > 0.0).count();
        (pos, self.labels.len() - pos)
    }

    fn subset(&self, idx: &[usize]) -> LabeledSet {
        LabeledSet {
            vectors: idx.iter().map(|&i| self.vectors[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Row-major Gram matrix of the linear kernel.
    fn gram(&self) -> Vec<f64> {
        let n = self.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.vectors[i].dot(&self.vectors[j]);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        k
    }
}

/// A trained linear classifier `f(x) = ⟨w, x⟩ + b`, optionally calibrated.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierModel {
    /// Grid intervals `N` and depth `K` of the feature layout.
    pub intervals: usize,
    pub depth: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub cost: f64,
    pub platt: Option<Platt>,
}

impl ClassifierModel {
    pub fn feature_len(&self) -> usize {
        2 * (self.intervals + 1) * self.depth
    }

    pub fn decision(&self, x: &LandscapeVector) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        x.dot_dense(&self.weights) + self.bias
    }

    /// `+1` when the decision value is nonnegative.
    pub fn predict(&self, x: &LandscapeVector) -> i8 {
        if self.decision(x) >= 0.0 {
            1
        } else {
            -1
        }
    }

    /// Calibrated probability of the positive class.
    pub fn probability(&self, x: &LandscapeVector) -> Result<f64> {
        let platt = self
            .platt
            .ok_or_else(|| Error::Calibration("model has no Platt parameters".into()))?;
        Ok(platt.probability(self.decision(x)))
    }

    /// Text encoding: a header `N,K,C,A,B,bias` and its values, then
    /// `index,value` lines for the nonzero weights.
    pub fn to_text(&self) -> String {
        let platt = self.platt.unwrap_or(Platt { a: f64::NAN, b: f64::NAN });
        let mut out = String::from("N,K,C,A,B,bias\n");
        let _ = writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.intervals, self.depth, self.cost, platt.a, platt.b, self.bias
        );
        out.push_str("index,value\n");
        for (i, w) in self.weights.iter().enumerate() {
            if *w != 0.0 {
                let _ = writeln!(out, "{i},{w:.16e}");
            }
        }
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("N,K,C,A,B,bias") {
            return Err(Error::parse(origin, "expected header `N,K,C,A,B,bias`"));
        }
        let meta = lines.next().ok_or_else(|| Error::parse(origin, "missing model header values"))?;
        let f: Vec<&str> = meta.split(',').map(str::trim).collect();
        let bad = || Error::parse(origin, format!("bad model header `{meta}`"));
        if f.len() != 6 {
            return Err(bad());
        }
        let intervals: usize = f[0].parse().map_err(|_| bad())?;
        let depth: usize = f[1].parse().map_err(|_| bad())?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let (cost, a, b, bias) = (num(f[2])?, num(f[3])?, num(f[4])?, num(f[5])?);
        if lines.next() != Some("index,value") {
            return Err(Error::parse(origin, "expected header `index,value`"));
        }
        let mut weights = vec![0.0; 2 * (intervals + 1) * depth];
        for line in lines {
            let bad = || Error::parse(origin, format!("bad weight `{line}`"));
            let (i, v) = line.split_once(',').ok_or_else(bad)?;
            let i: usize = i.trim().parse().map_err(|_| bad())?;
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            *weights.get_mut(i).ok_or_else(bad)? = v;
        }
        let platt = (a.is_finite() && b.is_finite()).then_some(Platt { a, b });
        Ok(ClassifierModel {
            intervals,
            depth,
            weights,
            bias,
            cost,
            platt,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}

/// Trains an uncalibrated linear SVM.
pub fn train_svm(data: &LabeledSet, params: &SvmParams) -> Result<ClassifierModel> {
    let (pos, neg) = data.class_counts();
    if pos == 0 || neg == 0 {
        return Err(Error::Training("training data must contain both classes".into()));
    }
    let first = &data.vectors[0];
    let dense0 = first.to_dense_vec();
    if data.vectors.iter().all(|v| v.to_dense_vec() == dense0) {
        return Err(Error::Training("all training vectors are identical".into()));
    }
    let kernel = data.gram();
    let sol = solve_dual(&kernel, &data.labels, params.cost, params.tolerance, params.max_iter)?;
    let mut weights = vec![0.0; first.len()];
    for ((v, &y), &a) in data.vectors.iter().zip(&data.labels).zip(&sol.alpha) {
        if a != 0.0 {
            v.add_scaled_to(a * y, &mut weights);
        }
    }
    let layout = data.layout();
    Ok(ClassifierModel {
        intervals: layout.grid.intervals(),
        depth: layout.depth,
        weights,
        bias: sol.bias,
        cost: params.cost,
        platt: None,
    })
}

/// Fits Platt parameters from the model's decision values on `holdout`.
pub fn platt_calibrate(model: &ClassifierModel, holdout: &LabeledSet) -> Result<Platt> {
    let dec: Vec<f64> = holdout.vectors.iter().map(|v| model.decision(v)).collect();
    fit_platt(&dec, &holdout.labels)
}

/// Stratified fold assignment: the `j`-th member of each class goes to fold
/// `j mod folds`.
fn stratified_folds(labels: &[f64], folds: usize) -> Vec<usize> {
    let (mut seen_pos, mut seen_neg) = (0, 0);
    labels
        .iter()
        .map(|&y| {
            let c = if y > 0.0 { &mut seen_pos } else { &mut seen_neg };
            let f = *c % folds;
            *c += 1;
            f
        })
        .collect()
}

/// Trains on all of `data`, with Platt parameters fitted to out-of-fold
/// decision values from a 3-fold stratified split. Classes with fewer than
/// three members fall back to in-sample decision values.
pub fn train_calibrated(data: &LabeledSet, params: &SvmParams) -> Result<ClassifierModel> {
    let mut model = train_svm(data, params)?;
    let (pos, neg) = data.class_counts();
    let dec: Vec<f64> = if pos.min(neg) < CALIBRATION_FOLDS {
        data.vectors.iter().map(|v| model.decision(v)).collect()
    } else {
        let fold = stratified_folds(&data.labels, CALIBRATION_FOLDS);
        let mut dec = vec![0.0; data.len()];
        for k in 0..CALIBRATION_FOLDS {
            let train_idx: Vec<usize> = (0..data.len()).filter(|&i| fold[i] != k).collect();
            let sub = data.subset(&train_idx);
            let held: Vec<usize> = (0..data.len()).filter(|&i| fold[i] == k).collect();
            match train_svm(&sub, params) {
                Ok(m) => {
                    for &i in &held {
                        dec[i] = m.decision(&data.vectors[i]);
                    }
                }
                // A fold whose training part is degenerate predicts nothing.
                Err(Error::Training(_)) => {
                    for &i in &held {
                        dec[i] = 0.0;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        dec
    };
    model.platt = Some(fit_platt(&dec, &data.labels)?);
    Ok(model)
}

/// Accuracy and calibration, both in percent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    /// Share of test samples assigned to their true class.
    pub accuracy: f64,
    /// Mean calibrated probability given to the true class.
    pub calibration: f64,
    pub samples: usize,
}

pub fn evaluate(model: &ClassifierModel, test: &LabeledSet) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("test set is empty".into()));
    }
    if test.layout().len() != model.feature_len() {
        return Err(Error::InvalidArgument(format!(
            "test vectors have length {}, model expects {}",
            test.layout().len(),
            model.feature_len()
        )));
    }
    let mut correct = 0usize;
    let mut prob_sum = 0.0;
    for (v, &y) in test.vectors.iter().zip(&test.labels) {
        if f64::from(model.predict(v)) == y {
            correct += 1;
        }
        let p = model.probability(v)?;
        prob_sum += if y > 0.0 { p } else { 1.0 - p };
    }
    let n = test.len() as f64;
    Ok(EvalReport {
        accuracy: 100.0 * correct as f64 / n,
        calibration: 100.0 * prob_sum / n,
        samples: test.len(),
    })
}
