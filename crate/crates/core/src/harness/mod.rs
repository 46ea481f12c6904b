//! Experiment runner: simulate → persistence → landscapes → classification
//! → report, plus SVG plots of average landscapes and their differences.
//!
//! Every sample has a fixed identity ([`SampleId`]) that determines both its
//! output path and its random substream, so results do not depend on the
//! number of threads or the order in which work is scheduled.

mod commands;
mod config;
mod plot;

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

pub use commands::{
    ph_single, read_report, report_to_csv, run_classify, run_experiment, run_landscape, run_ph, run_plot,
    run_simulate, run_vectorize, ReportRow,
};
pub use config::{
    ExperimentConfig, ModelEntry, RawConfig, DEFAULT_COMPARISONS, DEFAULT_GRID, DEFAULT_MATERN, DEFAULT_MODELS,
    DEFAULT_SAMPLES,
};
pub use plot::{render_svg, PlotKind};

use crate::classify::{evaluate, train_calibrated, ClassifierModel, EvalReport, LabeledSet, SvmParams};
use crate::cubical::CubicalFiltration;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grf::FieldSampler;
use crate::landscape::{default_grid, vectorize, LandscapeVector, SampleGrid};
use crate::persistence::{compute_persistence, PersistenceDiagram};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// Identity of one simulated sample.
///
/// `replica` separates independent draws from the same model: the second
/// class of a self-comparison uses replica 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SampleId {
    pub row: usize,
    pub model: usize,
    pub replica: u8,
    pub split: Split,
    pub index: usize,
}

impl SampleId {
    /// Substream id: row, model, replica, split and index packed into
    /// disjoint bit ranges.
    pub fn stream(&self) -> u64 {
        let split = match self.split {
            Split::Train => 0,
            Split::Test => 1,
        };
        ((self.row as u64) << 48)
            | ((self.model as u64) << 40)
            | (u64::from(self.replica) << 32)
            | (split << 31)
            | self.index as u64
    }

    /// Relative path without extension, e.g. `r0_eta5_nu1/M1/train/0003`.
    pub fn stem(&self, cfg: &ExperimentConfig) -> String {
        format!(
            "{}/{}/{}/{:04}",
            row_dir(cfg, self.row),
            class_dir(cfg, self.model, self.replica),
            self.split,
            self.index
        )
    }
}

/// Directory name of a Matérn row.
pub fn row_dir(cfg: &ExperimentConfig, row: usize) -> String {
    let (eta, nu) = cfg.matern[row];
    format!("r{row}_eta{eta}_nu{nu}")
}

pub(crate) fn class_dir(cfg: &ExperimentConfig, model: usize, replica: u8) -> String {
    let name = &cfg.models[model].name;
    if replica == 0 {
        name.clone()
    } else {
        format!("{name}_rep{replica}")
    }
}

/// `(model, replica)` of the positive and negative class of a comparison.
pub fn comparison_classes(cfg: &ExperimentConfig, c: usize) -> ((usize, u8), (usize, u8)) {
    let (a, b) = cfg.comparisons[c];
    ((a, 0), (b, u8::from(a == b)))
}

/// Distinct `(model, replica)` classes needed by the comparisons, sorted.
pub fn classes(cfg: &ExperimentConfig) -> Vec<(usize, u8)> {
    let mut out: Vec<(usize, u8)> = (0..cfg.comparisons.len())
        .flat_map(|c| {
            let (p, n) = comparison_classes(cfg, c);
            [p, n]
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Every sample of the experiment in manifest order: row, class, split,
/// index.
pub fn plan(cfg: &ExperimentConfig) -> Vec<SampleId> {
    let classes = classes(cfg);
    let mut out = Vec::new();
    for row in 0..cfg.matern.len() {
        for &(model, replica) in &classes {
            for (split, n) in [(Split::Train, cfg.train), (Split::Test, cfg.test)] {
                out.extend((0..n).map(|index| SampleId {
                    row,
                    model,
                    replica,
                    split,
                    index,
                }));
            }
        }
    }
    out
}

fn thread_pool(cfg: &ExperimentConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", cfg.threads)))
}

/// Maps `f` over `items` on `pool`, keeping input order.
fn par_map<T, U, F>(pool: &rayon::ThreadPool, items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    pool.install(|| items.par_iter().map(f).collect())
}

/// One sampler per `(row, model)` pair.
struct Samplers {
    models: usize,
    samplers: Vec<Option<FieldSampler>>,
}

impl Samplers {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let models = cfg.models.len();
        let used: Vec<usize> = classes(cfg).iter().map(|&(m, _)| m).collect();
        let mut samplers = Vec::with_capacity(cfg.matern.len() * models);
        for row in 0..cfg.matern.len() {
            for m in 0..models {
                samplers.push(if used.contains(&m) {
                    let spec = cfg.model_spec(row, m);
                    Some(FieldSampler::new(&spec.matern, cfg.rows, cfg.cols, cfg.sampler)?)
                } else {
                    None
                });
            }
        }
        Ok(Samplers { models, samplers })
    }

    fn get(&self, row: usize, model: usize) -> &FieldSampler {
        self.samplers[row * self.models + model]
            .as_ref()
            .expect("sampler exists for every planned class")
    }
}

fn simulate_sample(cfg: &ExperimentConfig, samplers: &Samplers, id: &SampleId) -> Result<ScalarField> {
    let gaussian = samplers.get(id.row, id.model).sample(cfg.seed, id.stream());
    cfg.models[id.model].transform.apply_field(&gaussian)
}

fn sample_diagram(field: &ScalarField) -> Result<PersistenceDiagram> {
    Ok(compute_persistence(&CubicalFiltration::from_field(field)?))
}

/// Sample grid of a row, derived from its training diagrams only.
pub fn row_grid(cfg: &ExperimentConfig, ids: &[SampleId], diagrams: &[PersistenceDiagram], row: usize) -> Result<SampleGrid> {
    let train: Vec<PersistenceDiagram> = ids
        .iter()
        .zip(diagrams)
        .filter(|(id, _)| id.row == row && id.split == Split::Train)
        .map(|(_, d)| d.clone())
        .collect();
    default_grid(&train, cfg.points)
}

fn vectorize_all(
    cfg: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    ids: &[SampleId],
    diagrams: &[PersistenceDiagram],
) -> Result<Vec<LandscapeVector>> {
    let grids = (0..cfg.matern.len())
        .map(|row| row_grid(cfg, ids, diagrams, row))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, &PersistenceDiagram)> = ids.iter().map(|id| id.row).zip(diagrams).collect();
    par_map(pool, &jobs, |&(row, d)| vectorize(d, &grids[row], cfg.depth))
}

/// Vectors of one class and split, in index order.
fn class_vectors<'a>(
    index: &HashMap<SampleId, usize>,
    vectors: &'a [LandscapeVector],
    row: usize,
    (model, replica): (usize, u8),
    split: Split,
    n: usize,
) -> Vec<&'a LandscapeVector> {
    (0..n)
        .map(|i| {
            let id = SampleId {
                row,
                model,
                replica,
                split,
                index: i,
            };
            &vectors[index[&id]]
        })
        .collect()
}

fn labeled(pos: Vec<&LandscapeVector>, neg: Vec<&LandscapeVector>) -> Result<LabeledSet> {
    LabeledSet::from_classes(pos.into_iter().cloned().collect(), neg.into_iter().cloned().collect())
}

/// Trains, calibrates and evaluates one comparison on one row.
fn classify_comparison(
    cfg: &ExperimentConfig,
    index: &HashMap<SampleId, usize>,
    vectors: &[LandscapeVector],
    row: usize,
    c: usize,
) -> Result<(ClassifierModel, EvalReport)> {
    let (pos, neg) = comparison_classes(cfg, c);
    let train = labeled(
        class_vectors(index, vectors, row, pos, Split::Train, cfg.train),
        class_vectors(index, vectors, row, neg, Split::Train, cfg.train),
    )?;
    let test = labeled(
        class_vectors(index, vectors, row, pos, Split::Test, cfg.test),
        class_vectors(index, vectors, row, neg, Split::Test, cfg.test),
    )?;
    let model = train_calibrated(&train, &SvmParams::with_cost(cfg.cost))?;
    let report = evaluate(&model, &test)?;
    log::info!(
        "{} {}: accuracy {:.1}, calibration {:.1}",
        row_dir(cfg, row),
        cfg.comparison_label(c),
        report.accuracy,
        report.calibration
    );
    Ok((model, report))
}
