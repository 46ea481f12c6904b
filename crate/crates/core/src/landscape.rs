//! Persistence landscapes sampled on a grid and flattened into feature
//! vectors.
//!
//! For bars `(b, d)` the level-`k` landscape `λ_k(t)` is the `k`-th largest
//! tent value `max(0, min(t − b, d − t))`. A [`LandscapeVector`] stores
//! `λ_k(t_i)` for degrees 0 and 1, levels `1..=K` and sample points
//! `t_0..=t_N`, laid out degree-major, then level, then sample point:
//!
//! ```text
//! λ⁰_1(t_0) … λ⁰_1(t_N)  λ⁰_2(t_0) … λ⁰_K(t_N)  λ¹_1(t_0) … λ¹_K(t_N)
//! ```
//!
//! The plain dot product of two such vectors is a Riemann sum of the `L²`
//! inner product of the landscapes up to the constant factor `Δt`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;

pub const DEFAULT_POINTS: usize = 100;
pub const DEFAULT_DEPTH: usize = 10;

/// Strictly increasing sample points `t_0 < t_1 < … < t_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    points: Vec<f64>,
}

impl SampleGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("sample grid is empty".into()));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("sample grid has non-finite points".into()));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("sample grid must be strictly increasing".into()));
        }
        Ok(SampleGrid { points })
    }

    /// `intervals + 1` equally spaced points from `lo` to `hi` inclusive.
    pub fn uniform(lo: f64, hi: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            if lo.is_finite() {
                return Self::new(vec![lo]);
            }
            return Err(Error::InvalidArgument("non-finite grid bound".into()));
        }
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!("grid bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        let step = (hi - lo) / intervals as f64;
        let mut points: Vec<f64> = (0..=intervals).map(|i| lo + step * i as f64).collect();
        points[intervals] = hi;
        Self::new(points)
    }

    #[inline]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of sample points, `N + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of intervals `N`.
    #[inline]
    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    fn is_uniform(&self) -> bool {
        match Self::uniform(self.first(), self.last(), self.intervals()) {
            Ok(u) => u
                .points
                .iter()
                .zip(&self.points)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs())),
            Err(_) => false,
        }
    }
}

/// Uniform grid with `intervals + 1` points spanning the smallest birth to the
/// largest death over all `diagrams`.
pub fn default_grid(diagrams: &[PersistenceDiagram], intervals: usize) -> Result<SampleGrid> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in diagrams.iter().flat_map(|d| d.pairs()) {
        lo = lo.min(p.birth);
        hi = hi.max(p.death);
    }
    if lo > hi {
        return Err(Error::InvalidArgument(
            "cannot derive a sample grid: every diagram is empty".into(),
        ));
    }
    SampleGrid::uniform(lo, hi, intervals)
}

/// Tent value of bar `(b, d)` at `t`.
#[inline]
fn tent(b: f64, d: f64, t: f64) -> f64 {
    (t - b).min(d - t).max(0.0)
}

/// `λ_k(t)` for `k ≥ 1`.
pub fn eval_landscape(bars: &[(f64, f64)], k: usize, t: f64) -> f64 {
    assert!(k >= 1, "landscape levels start at 1");
    let mut tents: Vec<f64> = bars.iter().map(|&(b, d)| tent(b, d, t)).filter(|&v| v > 0.0).collect();
    if tents.len() < k {
        return 0.0;
    }
    let (_, kth, _) = tents.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    *kth
}

/// Writes `λ_1(t), …, λ_K(t)` for every sample point into `out`, which is
/// `K` consecutive blocks of `grid.len()` entries.
fn sample_levels(bars: &[(f64, f64)], grid: &SampleGrid, depth: usize, out: &mut [f64]) {
    let n = grid.len();
    let mut tents = Vec::with_capacity(bars.len());
    for (i, &t) in grid.points().iter().enumerate() {
        tents.clear();
        tents.extend(bars.iter().map(|&(b, d)| tent(b, d, t)).filter(|&v| v > 0.0));
        let keep = tents.len().min(depth);
        if keep == 0 {
            continue;
        }
        if tents.len() > keep {
            tents.select_nth_unstable_by(keep - 1, |a, b| b.total_cmp(a));
        }
        let top = &mut tents[..keep];
        top.sort_unstable_by(|a, b| b.total_cmp(a));
        for (k, &v) in top.iter().enumerate() {
            out[k * n + i] = v;
        }
    }
}

/// Sample grid and depth shared by a family of vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeLayout {
    pub grid: SampleGrid,
    pub depth: usize,
}

impl LandscapeLayout {
    pub fn new(grid: SampleGrid, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument("landscape depth must be at least 1".into()));
        }
        Ok(LandscapeLayout { grid, depth })
    }

    /// Vector length `2(N + 1)K`.
    #[inline]
    pub fn len(&self) -> usize {
        2 * self.grid.len() * self.depth
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Offset of `λ^{degree}_level(t_point)`, `level` starting at 1.
    #[inline]
    pub fn offset(&self, degree: usize, level: usize, point: usize) -> usize {
        (degree * self.depth + (level - 1)) * self.grid.len() + point
    }

    fn check_same(&self, other: &LandscapeLayout) -> Result<()> {
        if self != other {
            return Err(Error::InvalidArgument(
                "landscape vectors use different sample grids or depths".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    Dense(Vec<f64>),
    /// Nonzero entries as `(index, value)`, ascending by index.
    Sparse(Vec<(u32, f64)>),
}

/// A flattened landscape; all entries are nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeVector {
    layout: LandscapeLayout,
    storage: Storage,
}

impl LandscapeVector {
    pub fn zeros(layout: LandscapeLayout) -> Self {
        let len = layout.len();
        LandscapeVector {
            layout,
            storage: Storage::Dense(vec![0.0; len]),
        }
    }

    /// Wraps dense entries; fails on a length mismatch or negative entries.
    pub fn from_dense(layout: LandscapeLayout, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != layout.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries, got {}",
                layout.len(),
                entries.len()
            )));
        }
        if entries.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("landscape entries must be finite and nonnegative".into()));
        }
        Ok(LandscapeVector {
            layout,
            storage: Storage::Dense(entries),
        })
    }

    #[inline]
    pub fn layout(&self) -> &LandscapeLayout {
        &self.layout
    }

    #[inline]
    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.layout.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn to_dense_vec(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(v) => v.clone(),
            Storage::Sparse(pairs) => {
                let mut v = vec![0.0; self.len()];
                for &(i, x) in pairs {
                    v[i as usize] = x;
                }
                v
            }
        }
    }

    /// Same vector with sparse storage.
    pub fn sparsify(&self) -> LandscapeVector {
        let pairs = match &self.storage {
            Storage::Sparse(p) => p.clone(),
            Storage::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, x)| x.abs() > 0.0)
                .map(|(i, &x)| (i as u32, x))
                .collect(),
        };
        LandscapeVector {
            layout: self.layout.clone(),
            storage: Storage::Sparse(pairs),
        }
    }

    /// Same vector with dense storage.
    pub fn densify(&self) -> LandscapeVector {
        LandscapeVector {
            layout: self.layout.clone(),
            storage: Storage::Dense(self.to_dense_vec()),
        }
    }

    /// Nonzero entries as `(index, value)` pairs, ascending.
    pub fn nonzeros(&self) -> Vec<(u32, f64)> {
        match self.sparsify().storage {
            Storage::Sparse(p) => p,
            Storage::Dense(_) => unreachable!(),
        }
    }

    /// Dot product with a dense vector, summed in index order.
    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v.iter().zip(w).map(|(a, b)| a * b).sum(),
            Storage::Sparse(p) => p.iter().map(|&(i, x)| x * w[i as usize]).sum(),
        }
    }

    /// Dot product summed in index order, so dense and sparse storage agree
    /// bit for bit.
    pub fn dot(&self, other: &LandscapeVector) -> f64 {
        match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            (Storage::Sparse(_), Storage::Dense(b)) => self.dot_dense(b),
            (Storage::Dense(a), Storage::Sparse(_)) => other.dot_dense(a),
            (Storage::Sparse(a), Storage::Sparse(b)) => {
                let (mut i, mut j, mut s) = (0, 0, 0.0);
                while i < a.len() && j < b.len() {
                    match a[i].0.cmp(&b[j].0) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            s += a[i].1 * b[j].1;
                            i += 1;
                            j += 1;
                        }
                    }
                }
                s
            }
        }
    }

    /// `acc += scale · self`.
    pub fn add_scaled_to(&self, scale: f64, acc: &mut [f64]) {
        match &self.storage {
            Storage::Dense(v) => {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += scale * x;
                }
            }
            Storage::Sparse(p) => {
                for &(i, x) in p {
                    acc[i as usize] += scale * x;
                }
            }
        }
    }

    /// Multiplies every entry by `gamma ≥ 0`.
    pub fn scaled(&self, gamma: f64) -> LandscapeVector {
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(v.iter().map(|x| x * gamma).collect()),
            Storage::Sparse(p) => Storage::Sparse(p.iter().map(|&(i, x)| (i, x * gamma)).collect()),
        };
        LandscapeVector {
            layout: self.layout.clone(),
            storage,
        }
    }
}

/// Samples the degree-0 and degree-1 landscapes of `diagram` on `grid` up to
/// depth `depth`.
pub fn vectorize(diagram: &PersistenceDiagram, grid: &SampleGrid, depth: usize) -> Result<LandscapeVector> {
    let layout = LandscapeLayout::new(grid.clone(), depth)?;
    let mut entries = vec![0.0; layout.len()];
    let block = grid.len() * depth;
    for degree in 0..2u8 {
        let bars = diagram.bars(degree);
        let start = degree as usize * block;
        sample_levels(&bars, grid, depth, &mut entries[start..start + block]);
    }
    Ok(LandscapeVector {
        layout,
        storage: Storage::Dense(entries),
    })
}

/// Pointwise mean.
pub fn average(vectors: &[LandscapeVector]) -> Result<LandscapeVector> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot average an empty set of vectors".into()))?;
    let mut sum = vec![0.0; first.len()];
    for v in vectors {
        first.layout.check_same(&v.layout)?;
        v.add_scaled_to(1.0, &mut sum);
    }
    let n = vectors.len() as f64;
    for x in &mut sum {
        *x /= n;
    }
    LandscapeVector::from_dense(first.layout.clone(), sum)
}

/// Entrywise difference of two landscape vectors; may be negative.
#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeDifference {
    pub layout: LandscapeLayout,
    pub entries: Vec<f64>,
}

pub fn difference(a: &LandscapeVector, b: &LandscapeVector) -> Result<LandscapeDifference> {
    a.layout.check_same(&b.layout)?;
    let mut entries = a.to_dense_vec();
    b.add_scaled_to(-1.0, &mut entries);
    Ok(LandscapeDifference {
        layout: a.layout.clone(),
        entries,
    })
}

/// File encoding shared by landscape vectors and differences: a metadata
/// header `N,K,t0,tN` and its values, then `index,value` lines for the
/// nonzero entries. Only uniform grids can be written.
pub fn layout_entries_to_csv(layout: &LandscapeLayout, nonzeros: &[(u32, f64)]) -> Result<String> {
    if !layout.grid.is_uniform() {
        return Err(Error::InvalidArgument("only uniform sample grids can be written".into()));
    }
    let mut out = String::from("N,K,t0,tN\n");
    let _ = writeln!(
        out,
        "{},{},{:.16e},{:.16e}",
        layout.grid.intervals(),
        layout.depth,
        layout.grid.first(),
        layout.grid.last()
    );
    out.push_str("index,value\n");
    for &(i, v) in nonzeros {
        let _ = writeln!(out, "{i},{v:.16e}");
    }
    Ok(out)
}

/// Parses the vector file format into a layout and dense entries.
pub fn layout_entries_from_csv(text: &str, origin: &Path) -> Result<(LandscapeLayout, Vec<f64>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some("N,K,t0,tN") {
        return Err(Error::parse(origin, "expected header `N,K,t0,tN`"));
    }
    let meta = lines.next().ok_or_else(|| Error::parse(origin, "missing metadata line"))?;
    let fields: Vec<&str> = meta.split(',').map(str::trim).collect();
    let bad_meta = || Error::parse(origin, format!("bad metadata `{meta}`"));
    if fields.len() != 4 {
        return Err(bad_meta());
    }
    let n: usize = fields[0].parse().map_err(|_| bad_meta())?;
    let k: usize = fields[1].parse().map_err(|_| bad_meta())?;
    let t0: f64 = fields[2].parse().map_err(|_| bad_meta())?;
    let tn: f64 = fields[3].parse().map_err(|_| bad_meta())?;
    let grid = SampleGrid::uniform(t0, tn, n).map_err(|e| Error::parse(origin, e.to_string()))?;
    let layout = LandscapeLayout::new(grid, k).map_err(|e| Error::parse(origin, e.to_string()))?;
    if lines.next() != Some("index,value") {
        return Err(Error::parse(origin, "expected header `index,value`"));
    }
    let mut entries = vec![0.0; layout.len()];
    for line in lines {
        let bad = || Error::parse(origin, format!("bad entry `{line}`"));
        let (i, v) = line.split_once(',').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        if i >= entries.len() || !v.is_finite() {
            return Err(bad());
        }
        entries[i] = v;
    }
    Ok((layout, entries))
}

impl LandscapeVector {
    pub fn to_csv_string(&self) -> Result<String> {
        layout_entries_to_csv(&self.layout, &self.nonzeros())
    }

    pub fn from_csv_str(text: &str, origin: &Path) -> Result<Self> {
        let (layout, entries) = layout_entries_from_csv(text, origin)?;
        LandscapeVector::from_dense(layout, entries).map_err(|e| Error::parse(origin, e.to_string()))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, path)
    }
}

impl LandscapeDifference {
    pub fn to_csv_string(&self) -> Result<String> {
        let nz: Vec<(u32, f64)> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs() > 0.0)
            .map(|(i, &x)| (i as u32, x))
            .collect();
        layout_entries_to_csv(&self.layout, &nz)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()?).map_err(|e| Error::io(path, e))
    }
}
