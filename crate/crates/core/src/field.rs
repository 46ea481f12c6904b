//! Grid-sampled scalar fields and their CSV encoding.
//!
//! The file format is a `rows,cols` line followed by one line of
//! comma-separated values per grid row. Values are written with 17
//! significant digits so a write/read cycle is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Function values on the vertices of a `rows × cols` grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidField(format!(
                "grid must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if rows.checked_mul(cols) != Some(values.len()) {
            return Err(Error::InvalidField(format!(
                "{rows}x{cols} grid needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite value {} at vertex {i}",
                values[i]
            )));
        }
        Ok(ScalarField { rows, cols, values })
    }

    /// Builds a field by evaluating `f(row, col)` at every vertex.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self::new(rows, cols, values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.index(row, col)]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Applies `f` at every vertex; fails if the result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.rows, self.cols, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24 + 16);
        let _ = writeln!(out, "{},{}", self.rows, self.cols);
        for row in self.values.chunks(self.cols) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(origin, "empty field file"))?;
        let (rows, cols) = header
            .split_once(',')
            .and_then(|(r, c)| Some((r.trim().parse::<usize>().ok()?, c.trim().parse::<usize>().ok()?)))
            .ok_or_else(|| Error::parse(origin, format!("bad header `{header}`")))?;
        let mut values = Vec::with_capacity(rows.saturating_mul(cols));
        for (r, line) in lines.enumerate() {
            let before = values.len();
            for tok in line.split(',') {
                let v = tok
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(origin, format!("bad value `{tok}` on row {r}")))?;
                values.push(v);
            }
            if values.len() - before != cols {
                return Err(Error::parse(
                    origin,
                    format!("row {r} has {} values, expected {cols}", values.len() - before),
                ));
            }
        }
        Self::new(rows, cols, values)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, path)
    }
}
