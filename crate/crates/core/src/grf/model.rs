//! Model classes: a Matérn Gaussian field followed by a pointwise transform.
//!
//! The built-in transforms are placeholders that make the experiment runnable;
//! they are not tied to any particular published model definitions.

use std::fmt;
use std::str::FromStr;

use super::{FieldSampler, MaternParams, SamplerKind};
use crate::error::{Error, Result};
use crate::field::ScalarField;

#[derive(Clone, Copy)]
pub enum Transform {
    Identity,
    Square,
    Absolute,
    Exp,
    Cube,
    /// A user-registered map.
    Custom(&'static str, fn(f64) -> f64),
}

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Square => "square",
            Transform::Absolute => "absolute",
            Transform::Exp => "exp",
            Transform::Cube => "cube",
            Transform::Custom(name, _) => name,
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Square => x * x,
            Transform::Absolute => x.abs(),
            Transform::Exp => x.exp(),
            Transform::Cube => x * x * x,
            Transform::Custom(_, f) => f(x),
        }
    }

    pub fn apply_field(&self, field: &ScalarField) -> Result<ScalarField> {
        match self {
            Transform::Identity => Ok(field.clone()),
            _ => field.map(|x| self.apply(x)),
        }
    }

    /// Looks up `name` among the built-ins, then in `custom`.
    pub fn lookup(name: &str, custom: &[Transform]) -> Result<Transform> {
        name.parse()
            .or_else(|e| custom.iter().copied().find(|t| t.name() == name).ok_or(e))
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" | "id" => Ok(Transform::Identity),
            "square" => Ok(Transform::Square),
            "absolute" | "abs" => Ok(Transform::Absolute),
            "exp" => Ok(Transform::Exp),
            "cube" => Ok(Transform::Cube),
            other => Err(Error::Config(format!("unknown transform `{other}`"))),
        }
    }
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transform({})", self.name())
    }
}

impl PartialEq for Transform {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub transform: Transform,
    pub matern: MaternParams,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, transform: Transform, matern: MaternParams) -> Self {
        ModelSpec {
            name: name.into(),
            transform,
            matern,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.matern.validate()
    }
}

/// Draws one Gaussian field and applies the model transform.
pub fn sample_model(spec: &ModelSpec, rows: usize, cols: usize, seed: u64) -> Result<ScalarField> {
    spec.validate()?;
    let sampler = FieldSampler::new(&spec.matern, rows, cols, SamplerKind::Circulant)?;
    spec.transform.apply_field(&sampler.sample(seed, 0))
}
