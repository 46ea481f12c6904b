//! Experiment configuration: a flat TOML file whose keys can each be
//! overridden by a CLI flag of the same name.
//!
//! ```toml
//! seed = 7
//! out = "run"
//! grid = "32x32"
//! points = 100          # grid intervals N; N + 1 sample points
//! depth = 10            # landscape levels K
//! train = 100           # samples per class
//! test = 100
//! cost = 1.0
//! threads = 0           # 0: one per core
//! matern = "5:1,10:1,5:2"
//! models = "M1:identity,M2:square,M3:absolute"
//! comparisons = "M1:M2,M1:M3,M2:M3"
//! sampler = "circulant"
//! sigma2 = 1.0
//! spacing = 1.0
//! ```
//!
//! A model may pin its own Matérn parameters with `name:transform@eta:nu`;
//! otherwise it uses the `(eta, nu)` of the row being run. `samples` sets
//! `train` and `test` together.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grf::{MaternParams, ModelSpec, SamplerKind, Transform};
use crate::landscape::{DEFAULT_DEPTH, DEFAULT_POINTS};

pub const DEFAULT_GRID: (usize, usize) = (32, 32);
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_MATERN: &str = "5:1,10:1,5:2";
/// Placeholder transforms: the published model classes are not specified
/// here, so these only make the experiment runnable.
pub const DEFAULT_MODELS: &str = "M1:identity,M2:square,M3:absolute";
pub const DEFAULT_COMPARISONS: &str = "M1:M2,M1:M3,M2:M3";

/// Unvalidated settings, from a file or from CLI flags.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub grid: Option<String>,
    pub points: Option<usize>,
    pub depth: Option<usize>,
    pub samples: Option<usize>,
    pub train: Option<usize>,
    pub test: Option<usize>,
    pub cost: Option<f64>,
    pub threads: Option<usize>,
    pub matern: Option<String>,
    pub models: Option<String>,
    pub comparisons: Option<String>,
    pub sampler: Option<String>,
    pub sigma2: Option<f64>,
    pub spacing: Option<f64>,
}

impl RawConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", origin.display(), e.message())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    /// Values set in `over` replace those in `self`.
    pub fn merge(self, over: RawConfig) -> RawConfig {
        // A `samples` override beats per-split values from the file.
        let (train, test) = match over.samples {
            Some(_) => (over.train, over.test),
            None => (over.train.or(self.train), over.test.or(self.test)),
        };
        RawConfig {
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            grid: over.grid.or(self.grid),
            points: over.points.or(self.points),
            depth: over.depth.or(self.depth),
            samples: over.samples.or(self.samples),
            train,
            test,
            cost: over.cost.or(self.cost),
            threads: over.threads.or(self.threads),
            matern: over.matern.or(self.matern),
            models: over.models.or(self.models),
            comparisons: over.comparisons.or(self.comparisons),
            sampler: over.sampler.or(self.sampler),
            sigma2: over.sigma2.or(self.sigma2),
            spacing: over.spacing.or(self.spacing),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelEntry {
    pub name: String,
    pub transform: Transform,
    /// Pinned `(eta, nu)`, replacing the row's parameters.
    pub matern: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub rows: usize,
    pub cols: usize,
    /// Landscape grid intervals `N`.
    pub points: usize,
    /// Landscape depth `K`.
    pub depth: usize,
    pub train: usize,
    pub test: usize,
    pub cost: f64,
    pub threads: usize,
    pub matern: Vec<(f64, f64)>,
    pub models: Vec<ModelEntry>,
    /// Pairs of indices into `models`; the first is the positive class.
    pub comparisons: Vec<(usize, usize)>,
    pub sampler: SamplerKind,
    pub sigma2: f64,
    pub spacing: f64,
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("grid must look like `32x32`, got `{s}`"));
    let (r, c) = s.split_once(['x', 'X', '×']).ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    Ok((r, c))
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("{what} must look like `eta:nu`, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn parse_models(s: &str) -> Result<Vec<ModelEntry>> {
    let mut models: Vec<ModelEntry> = Vec::new();
    for item in list(s) {
        let (head, pinned) = match item.split_once('@') {
            Some((h, p)) => (h, Some(parse_pair(p, "model parameters")?)),
            None => (item, None),
        };
        let (name, transform) = head
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("model must look like `name:transform`, got `{item}`")))?;
        let name = name.trim();
        if name.is_empty() || name.contains(['/', '\\', ' ']) {
            return Err(Error::Config(format!("bad model name `{name}`")));
        }
        if models.iter().any(|m| m.name == name) {
            return Err(Error::Config(format!("model `{name}` listed twice")));
        }
        models.push(ModelEntry {
            name: name.to_string(),
            transform: transform.trim().parse()?,
            matern: pinned,
        });
    }
    Ok(models)
}

fn parse_comparisons(s: &str, models: &[ModelEntry]) -> Result<Vec<(usize, usize)>> {
    let find = |n: &str| {
        models
            .iter()
            .position(|m| m.name == n.trim())
            .ok_or_else(|| Error::Config(format!("comparison names unknown model `{}`", n.trim())))
    };
    list(s)
        .map(|item| {
            let (a, b) = item
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("comparison must look like `A:B`, got `{item}`")))?;
            Ok((find(a)?, find(b)?))
        })
        .collect()
}

impl ExperimentConfig {
    /// Reads the optional config file and applies `overrides` on top.
    pub fn load(path: Option<&Path>, overrides: RawConfig) -> Result<Self> {
        let base = match path {
            Some(p) => RawConfig::read(p)?,
            None => RawConfig::default(),
        };
        Self::from_raw(base.merge(overrides))
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let seed = raw
            .seed
            .ok_or_else(|| Error::Config("a seed is required (config key or --seed)".into()))?;
        let (rows, cols) = match &raw.grid {
            Some(g) => parse_grid(g)?,
            None => DEFAULT_GRID,
        };
        let samples = raw.samples.unwrap_or(DEFAULT_SAMPLES);
        let matern = list(raw.matern.as_deref().unwrap_or(DEFAULT_MATERN))
            .map(|p| parse_pair(p, "matern row"))
            .collect::<Result<Vec<_>>>()?;
        let models = parse_models(raw.models.as_deref().unwrap_or(DEFAULT_MODELS))?;
        let comparisons = parse_comparisons(raw.comparisons.as_deref().unwrap_or(DEFAULT_COMPARISONS), &models)?;
        let sampler = match &raw.sampler {
            Some(s) => s.parse()?,
            None => SamplerKind::Circulant,
        };
        let cfg = ExperimentConfig {
            seed,
            out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
            rows,
            cols,
            points: raw.points.unwrap_or(DEFAULT_POINTS),
            depth: raw.depth.unwrap_or(DEFAULT_DEPTH),
            train: raw.train.unwrap_or(samples),
            test: raw.test.unwrap_or(samples),
            cost: raw.cost.unwrap_or(crate::classify::DEFAULT_COST),
            threads: raw.threads.unwrap_or(0),
            matern,
            models,
            comparisons,
            sampler,
            sigma2: raw.sigma2.unwrap_or(1.0),
            spacing: raw.spacing.unwrap_or(1.0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("grid rows", self.rows),
            ("grid cols", self.cols),
            ("points", self.points),
            ("depth", self.depth),
            ("train", self.train),
            ("test", self.test),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.train > 1 << 30 || self.test > 1 << 30 {
            return Err(Error::Config("sample counts must be below 2^30".into()));
        }
        if self.matern.is_empty() || self.matern.len() > 1 << 15 {
            return Err(Error::Config("matern needs between 1 and 32768 rows".into()));
        }
        if self.models.is_empty() || self.models.len() > 255 {
            return Err(Error::Config("models needs between 1 and 255 entries".into()));
        }
        if self.comparisons.is_empty() {
            return Err(Error::Config("at least one comparison is required".into()));
        }
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(Error::Config(format!("cost must be positive, got {}", self.cost)));
        }
        for row in 0..self.matern.len() {
            for m in 0..self.models.len() {
                self.model_spec(row, m)
                    .validate()
                    .map_err(|e| Error::Config(format!("row {row}, model {}: {e}", self.models[m].name)))?;
            }
        }
        Ok(())
    }

    /// Fully resolved model for a Matérn row.
    pub fn model_spec(&self, row: usize, model: usize) -> ModelSpec {
        let entry = &self.models[model];
        let (eta, nu) = entry.matern.unwrap_or(self.matern[row]);
        ModelSpec::new(
            entry.name.clone(),
            entry.transform,
            MaternParams {
                eta,
                nu,
                sigma2: self.sigma2,
                spacing: self.spacing,
            },
        )
    }

    /// Text label of a comparison, e.g. `M1 v M2`.
    pub fn comparison_label(&self, c: usize) -> String {
        let (a, b) = self.comparisons[c];
        format!("{} v {}", self.models[a].name, self.models[b].name)
    }
}
