//! Degree-0 and degree-1 persistent homology of cubical filtrations.
//!
//! The boundary matrix is reduced over GF(2) in filtration order. Faces are
//! reduced first; each face pivot marks an edge that creates a cycle, and
//! those edge columns are cleared instead of reduced. Edge columns always
//! stay two entries long, so degree-0 reduction is cheap.
//!
//! Diagrams follow the reduced-homology convention: the essential class born
//! at the global minimum is omitted and recorded separately. On a full
//! rectangle every degree-1 class dies, so no other infinite pairs remain.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cubical::CubicalFiltration;
use crate::error::{Error, Result};

const UNPAIRED: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistencePair {
    pub degree: u8,
    pub birth: f64,
    pub death: f64,
    /// Filtration positions of the creating and destroying cells.
    pub birth_cell: usize,
    pub death_cell: usize,
}

impl PersistencePair {
    #[inline]
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// `true` while the class is alive in the closed sublevel set at `a`.
    #[inline]
    pub fn alive_at(&self, a: f64) -> bool {
        self.birth <= a && a < self.death
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceDiagram {
    pairs: Vec<PersistencePair>,
    /// Birth value of the omitted essential component. `None` when the
    /// diagram was read back from a file, which does not carry it.
    essential_min: Option<f64>,
    shape: Option<(usize, usize)>,
}

impl PersistenceDiagram {
    /// Builds a diagram from explicit pairs; used for files and tests.
    pub fn from_pairs(mut pairs: Vec<PersistencePair>, essential_min: Option<f64>) -> Self {
        sort_pairs(&mut pairs);
        PersistenceDiagram {
            pairs,
            essential_min,
            shape: None,
        }
    }

    /// Convenience constructor from `(degree, birth, death)` triples.
    pub fn from_bars(bars: &[(u8, f64, f64)], essential_min: Option<f64>) -> Self {
        let pairs = bars
            .iter()
            .map(|&(degree, birth, death)| PersistencePair {
                degree,
                birth,
                death,
                birth_cell: 0,
                death_cell: 0,
            })
            .collect();
        Self::from_pairs(pairs, essential_min)
    }

    #[inline]
    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    #[inline]
    pub fn essential_min(&self) -> Option<f64> {
        self.essential_min
    }

    /// Grid shape of the source field, if known.
    #[inline]
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.shape
    }

    pub fn degree(&self, degree: u8) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.degree == degree)
    }

    /// `(birth, death)` bars of one degree.
    pub fn bars(&self, degree: u8) -> Vec<(f64, f64)> {
        self.degree(degree).map(|p| (p.birth, p.death)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Betti numbers of the sublevel set at `a`, read off the diagram.
    ///
    /// Fails if the essential minimum is unknown.
    pub fn betti_curve(&self, a: f64) -> Result<(usize, usize)> {
        let min = self.essential_min.ok_or_else(|| {
            Error::InvalidArgument("diagram has no essential minimum recorded".into())
        })?;
        if a < min {
            return Ok((0, 0));
        }
        let b0 = 1 + self.degree(0).filter(|p| p.alive_at(a)).count();
        let b1 = self.degree(1).filter(|p| p.alive_at(a)).count();
        Ok((b0, b1))
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("degree,birth,death\n");
        for p in &self.pairs {
            let _ = writeln!(out, "{},{:.16e},{:.16e}", p.degree, p.birth, p.death);
        }
        out
    }

    pub fn from_csv_str(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        match lines.next() {
            Some("degree,birth,death") => {}
            other => {
                return Err(Error::parse(
                    origin,
                    format!("expected header `degree,birth,death`, got {other:?}"),
                ))
            }
        }
        let mut bars = Vec::new();
        for line in lines {
            let mut it = line.split(',').map(str::trim);
            let bad = || Error::parse(origin, format!("bad diagram line `{line}`"));
            let degree: u8 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let birth: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let death: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() || degree > 1 || !(birth < death) {
                return Err(bad());
            }
            bars.push((degree, birth, death));
        }
        Ok(Self::from_bars(&bars, None))
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

fn sort_pairs(pairs: &mut [PersistencePair]) {
    pairs.sort_by(|a, b| {
        a.degree
            .cmp(&b.degree)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
            .then(a.birth_cell.cmp(&b.birth_cell))
    });
}

/// Raw `(birth position, death position)` pairs from the boundary-matrix
/// reduction, including zero-length pairs. The second value lists unpaired
/// positions (the essential classes).
pub fn reduce_boundary(filt: &CubicalFiltration) -> (Vec<(usize, usize)>, Vec<usize>) {
    let n = filt.len();
    let cells = filt.cells();
    let mut pivot_col = vec![UNPAIRED; n];
    let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut cleared = vec![false; n];
    let mut pairs = Vec::new();
    let mut col: Vec<u32> = Vec::with_capacity(16);
    let mut scratch: Vec<u32> = Vec::with_capacity(16);

    for dim in [2u8, 1u8] {
        for j in 0..n {
            if cells[j].dim != dim || cleared[j] {
                continue;
            }
            col.clear();
            col.extend_from_slice(filt.boundary(j));
            while let Some(&low) = col.last() {
                let owner = pivot_col[low as usize];
                if owner == UNPAIRED {
                    break;
                }
                symmetric_difference(&col, &reduced[owner as usize], &mut scratch);
                std::mem::swap(&mut col, &mut scratch);
            }
            if let Some(&low) = col.last() {
                pivot_col[low as usize] = j as u32;
                cleared[low as usize] = true;
                reduced[j] = col.clone();
                pairs.push((low as usize, j));
            }
        }
    }

    let mut paired = vec![false; n];
    for &(b, d) in &pairs {
        paired[b] = true;
        paired[d] = true;
    }
    let essential = (0..n).filter(|&p| !paired[p]).collect();
    (pairs, essential)
}

fn symmetric_difference(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Persistence diagram of `filt` in degrees 0 and 1 under reduced homology.
///
/// Pairs whose birth and death values are numerically equal carry no
/// persistence and are dropped.
pub fn compute_persistence(filt: &CubicalFiltration) -> PersistenceDiagram {
    let cells = filt.cells();
    let (raw, essential) = reduce_boundary(filt);
    debug_assert_eq!(essential.len(), 1, "full rectangle has one essential class");
    let mut pairs: Vec<PersistencePair> = raw
        .into_iter()
        .filter(|&(b, d)| cells[b].value < cells[d].value)
        .map(|(b, d)| PersistencePair {
            degree: cells[b].dim,
            birth: cells[b].value,
            death: cells[d].value,
            birth_cell: b,
            death_cell: d,
        })
        .collect();
    sort_pairs(&mut pairs);
    let f = filt.field();
    PersistenceDiagram {
        pairs,
        essential_min: Some(f.min_value()),
        shape: Some((f.rows(), f.cols())),
    }
}

/// Minimal union-find with path halving and union by size.
struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

/// Betti numbers of the sublevel complex at `a`, computed from scratch.
///
/// `β0` comes from union-find on the vertices and edges with value `≤ a`;
/// `β1 = β0 − χ` with `χ = V − E + F`, which holds for planar complexes.
/// Independent of the boundary-matrix reduction.
pub fn betti_oracle(filt: &CubicalFiltration, a: f64) -> (usize, usize) {
    let f = filt.field();
    let cols = f.cols();
    let vals = f.values();
    let n = vals.len();
    let mut sets = DisjointSets::new(n);
    let mut v_count = 0usize;
    let mut components = 0usize;
    for &x in vals {
        if x <= a {
            v_count += 1;
            components += 1;
        }
    }
    let mut e_count = 0usize;
    let mut f_count = 0usize;
    for cell in filt.cells() {
        if cell.value > a {
            continue;
        }
        match cell.dim {
            1 => {
                e_count += 1;
                let (r, c) = cell.anchor;
                let u = r * cols + c;
                let w = match cell.orientation {
                    Some(crate::cubical::Orientation::Horizontal) => u + 1,
                    _ => u + cols,
                };
                debug_assert!(vals[u] <= a && vals[w] <= a);
                if sets.union(u as u32, w as u32) {
                    components -= 1;
                }
            }
            2 => f_count += 1,
            _ => {}
        }
    }
    let chi = v_count as i64 - e_count as i64 + f_count as i64;
    let b1 = components as i64 - chi;
    debug_assert!(b1 >= 0);
    (components, b1 as usize)
}
