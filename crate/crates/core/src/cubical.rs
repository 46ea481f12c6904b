//! Cubical complexes of grid-sampled functions and their sublevel-set
//! filtrations.
//!
//! A `rows × cols` field defines the standard cubical structure: one vertex
//! per sample, horizontal and vertical edges between 4-neighbours, and a square
//! face per grid cell. Edges and faces take the maximum value of their
//! boundary vertices.
//!
//! Ties between equal vertex values are broken symbolically by vertex index,
//! so the stored values are never perturbed. Every cell is owned by its
//! maximal vertex under that order, and the filtration lists each vertex's
//! lower star (the vertex, then its edges, then its faces) in vertex order.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// A field whose vertices are totally ordered by `(value, vertex index)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericField {
    field: ScalarField,
    rank: Vec<u32>,
    order: Vec<u32>,
}

/// Resolves ties in `field` by vertex index. Stored values are unchanged.
pub fn make_generic(field: &ScalarField) -> Result<GenericField> {
    if field.len() >= (1 << 30) {
        return Err(Error::InvalidField(format!(
            "{} vertices exceed the supported grid size",
            field.len()
        )));
    }
    let vals = field.values();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidField("non-finite vertex value".into()));
    }
    let mut order: Vec<u32> = (0..field.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| compare_vertices(vals, a as usize, b as usize));
    let mut rank = vec![0u32; field.len()];
    for (r, &v) in order.iter().enumerate() {
        rank[v as usize] = r as u32;
    }
    Ok(GenericField {
        field: field.clone(),
        rank,
        order,
    })
}

#[inline]
pub(crate) fn compare_vertices(values: &[f64], a: usize, b: usize) -> Ordering {
    values[a]
        .partial_cmp(&values[b])
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

impl GenericField {
    #[inline]
    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    /// Position of vertex `v` in the tie-broken order.
    #[inline]
    pub fn rank(&self, v: usize) -> usize {
        self.rank[v] as usize
    }

    /// Vertices listed from lowest to highest.
    pub fn vertex_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.order.iter().map(|&v| v as usize)
    }

    /// `true` if vertex `a` comes strictly before vertex `b`.
    #[inline]
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.rank[a] < self.rank[b]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A vertex, edge or square of the grid complex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub dim: u8,
    /// Top-left vertex `(row, col)`.
    pub anchor: (usize, usize),
    /// Set for edges only.
    pub orientation: Option<Orientation>,
    pub value: f64,
    /// Vertex index at which this cell enters the filtration.
    pub owner: usize,
}

/// Cell counts `(vertices, edges, faces)` of a full `rows × cols` grid.
pub fn cell_counts(rows: usize, cols: usize) -> (usize, usize, usize) {
    let v = rows * cols;
    let e = rows * (cols - 1) + (rows - 1) * cols;
    let f = (rows - 1) * (cols - 1);
    (v, e, f)
}

/// The max-extension filtration of a generic field, stored as a flat array
/// of cells in filtration order with boundaries given as positions into that
/// array.
#[derive(Clone, Debug)]
pub struct CubicalFiltration {
    field: GenericField,
    cells: Vec<Cell>,
    boundary_start: Vec<u32>,
    boundary: Vec<u32>,
}

struct Grid {
    rows: usize,
    cols: usize,
    n_v: usize,
    n_h: usize,
    n_e: usize,
}

impl Grid {
    fn new(rows: usize, cols: usize) -> Self {
        let n_v = rows * cols;
        let n_h = rows * (cols - 1);
        let n_e = n_h + (rows - 1) * cols;
        Grid {
            rows,
            cols,
            n_v,
            n_h,
            n_e,
        }
    }

    #[inline]
    fn vertex(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    #[inline]
    fn h_edge(&self, r: usize, c: usize) -> usize {
        self.n_v + r * (self.cols - 1) + c
    }

    #[inline]
    fn v_edge(&self, r: usize, c: usize) -> usize {
        self.n_v + self.n_h + r * self.cols + c
    }

    #[inline]
    fn face(&self, r: usize, c: usize) -> usize {
        self.n_v + self.n_e + r * (self.cols - 1) + c
    }

    fn total(&self) -> usize {
        self.n_e + self.n_v + (self.rows - 1) * (self.cols - 1)
    }

    /// Cell with natural id `id` as (dim, anchor, orientation).
    fn describe(&self, id: usize) -> (u8, (usize, usize), Option<Orientation>) {
        if id < self.n_v {
            (0, (id / self.cols, id % self.cols), None)
        } else if id < self.n_v + self.n_h {
            let k = id - self.n_v;
            let w = self.cols - 1;
            (1, (k / w, k % w), Some(Orientation::Horizontal))
        } else if id < self.n_v + self.n_e {
            let k = id - self.n_v - self.n_h;
            (1, (k / self.cols, k % self.cols), Some(Orientation::Vertical))
        } else {
            let k = id - self.n_v - self.n_e;
            let w = self.cols - 1;
            (2, (k / w, k % w), None)
        }
    }

    fn boundary_ids(&self, id: usize, out: &mut Vec<usize>) {
        out.clear();
        let (dim, (r, c), orient) = self.describe(id);
        match (dim, orient) {
            (1, Some(Orientation::Horizontal)) => {
                out.extend([self.vertex(r, c), self.vertex(r, c + 1)]);
            }
            (1, Some(Orientation::Vertical)) => {
                out.extend([self.vertex(r, c), self.vertex(r + 1, c)]);
            }
            (2, _) => out.extend([
                self.h_edge(r, c),
                self.h_edge(r + 1, c),
                self.v_edge(r, c),
                self.v_edge(r, c + 1),
            ]),
            _ => {}
        }
    }
}

impl CubicalFiltration {
    /// Resolves ties and builds the filtration in one step.
    pub fn from_field(field: &ScalarField) -> Result<Self> {
        Ok(build_filtration(&make_generic(field)?))
    }

    #[inline]
    pub fn generic_field(&self) -> &GenericField {
        &self.field
    }

    #[inline]
    pub fn field(&self) -> &ScalarField {
        &self.field.field
    }

    #[inline]
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Filtration positions of the boundary of the cell at `pos`, ascending.
    #[inline]
    pub fn boundary(&self, pos: usize) -> &[u32] {
        let s = self.boundary_start[pos] as usize;
        let e = self.boundary_start[pos + 1] as usize;
        &self.boundary[s..e]
    }

    /// All cells with value `≤ a`. Always a prefix of the filtration.
    pub fn sublevel_complex(&self, a: f64) -> &[Cell] {
        &self.cells[..self.sublevel_len(a)]
    }

    pub fn sublevel_len(&self, a: f64) -> usize {
        self.cells.partition_point(|c| c.value <= a)
    }
}

/// Builds the cubical filtration of `field` under the max rule.
pub fn build_filtration(field: &GenericField) -> CubicalFiltration {
    let f = &field.field;
    let (rows, cols) = (f.rows(), f.cols());
    let grid = Grid::new(rows, cols);
    let vals = f.values();
    let total = grid.total();

    // Natural ids in filtration order: each vertex's lower star in turn.
    let mut order: Vec<usize> = Vec::with_capacity(total);
    let mut owner_of = vec![0usize; total];
    let lower = |a: usize, b: usize| field.rank[a] < field.rank[b];
    for v in field.vertex_order() {
        let (r, c) = (v / cols, v % cols);
        order.push(v);
        owner_of[v] = v;
        // Edges ordered by natural id: horizontal before vertical.
        let mut edges: [(usize, usize); 4] = [(0, 0); 4];
        let mut n = 0;
        if c > 0 && lower(grid.vertex(r, c - 1), v) {
            edges[n] = (grid.h_edge(r, c - 1), 0);
            n += 1;
        }
        if c + 1 < cols && lower(grid.vertex(r, c + 1), v) {
            edges[n] = (grid.h_edge(r, c), 0);
            n += 1;
        }
        if r > 0 && lower(grid.vertex(r - 1, c), v) {
            edges[n] = (grid.v_edge(r - 1, c), 0);
            n += 1;
        }
        if r + 1 < rows && lower(grid.vertex(r + 1, c), v) {
            edges[n] = (grid.v_edge(r, c), 0);
            n += 1;
        }
        let edges = &mut edges[..n];
        edges.sort_unstable();
        for &(e, _) in edges.iter() {
            order.push(e);
            owner_of[e] = v;
        }
        let mut faces: [usize; 4] = [0; 4];
        let mut m = 0;
        for (dr, dc) in [(-1isize, -1isize), (-1, 0), (0, -1), (0, 0)] {
            let fr = r as isize + dr;
            let fc = c as isize + dc;
            if fr < 0 || fc < 0 || fr as usize + 1 >= rows || fc as usize + 1 >= cols {
                continue;
            }
            let (fr, fc) = (fr as usize, fc as usize);
            let corners = [
                grid.vertex(fr, fc),
                grid.vertex(fr, fc + 1),
                grid.vertex(fr + 1, fc),
                grid.vertex(fr + 1, fc + 1),
            ];
            if corners.iter().all(|&u| u == v || lower(u, v)) {
                faces[m] = grid.face(fr, fc);
                m += 1;
            }
        }
        let faces = &mut faces[..m];
        faces.sort_unstable();
        for &q in faces.iter() {
            order.push(q);
            owner_of[q] = v;
        }
    }
    debug_assert_eq!(order.len(), total);

    let mut position = vec![0u32; total];
    for (p, &id) in order.iter().enumerate() {
        position[id] = p as u32;
    }

    let mut cells = Vec::with_capacity(total);
    let mut boundary_start = Vec::with_capacity(total + 1);
    let mut boundary = Vec::with_capacity(2 * grid.n_e + 4 * (total - grid.n_v - grid.n_e));
    let mut scratch = Vec::with_capacity(4);
    boundary_start.push(0u32);
    for &id in &order {
        let (dim, anchor, orientation) = grid.describe(id);
        let owner = owner_of[id];
        cells.push(Cell {
            dim,
            anchor,
            orientation,
            value: vals[owner],
            owner,
        });
        grid.boundary_ids(id, &mut scratch);
        let start = boundary.len();
        boundary.extend(scratch.iter().map(|&b| position[b]));
        boundary[start..].sort_unstable();
        boundary_start.push(boundary.len() as u32);
    }

    CubicalFiltration {
        field: field.clone(),
        cells,
        boundary_start,
        boundary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(rows: usize, cols: usize, v: &[f64]) -> ScalarField {
        ScalarField::new(rows, cols, v.to_vec()).unwrap()
    }

    pub(crate) fn ring_field() -> ScalarField {
        // Boundary walked clockwise from the top-left corner, centre 10.
        field(3, 3, &[1.0, 2.0, 3.0, 8.0, 10.0, 4.0, 7.0, 6.0, 5.0])
    }

    #[test]
    fn tie_break_uses_vertex_index() {
        let g = make_generic(&field(1, 2, &[3.0, 3.0])).unwrap();
        assert!(g.precedes(0, 1));
        assert_eq!(g.field().values(), &[3.0, 3.0]);

        let g = make_generic(&field(1, 3, &[0.0, 2.0, 1.0])).unwrap();
        assert_eq!(g.vertex_order().collect::<Vec<_>>(), vec![0, 2, 1]);

        let g = make_generic(&field(2, 2, &[1.0; 4])).unwrap();
        assert_eq!(g.vertex_order().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn make_generic_is_idempotent() {
        let f = field(2, 3, &[1.0, 0.0, 1.0, 0.0, 2.0, 1.0]);
        let g1 = make_generic(&f).unwrap();
        let g2 = make_generic(g1.field()).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn single_edge() {
        let filt = CubicalFiltration::from_field(&field(1, 2, &[0.0, 5.0])).unwrap();
        let cells = filt.cells();
        assert_eq!(cells.len(), 3);
        assert_eq!((cells[0].dim, cells[0].value), (0, 0.0));
        assert_eq!((cells[1].dim, cells[1].value), (0, 5.0));
        assert_eq!((cells[2].dim, cells[2].value), (1, 5.0));
    }

    #[test]
    fn square_values() {
        let filt = CubicalFiltration::from_field(&field(2, 2, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        let faces: Vec<_> = filt.cells().iter().filter(|c| c.dim == 2).collect();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].value, 4.0);
        let left = filt
            .cells()
            .iter()
            .find(|c| c.dim == 1 && c.anchor == (0, 0) && c.orientation == Some(Orientation::Vertical))
            .unwrap();
        assert_eq!(left.value, 3.0);
    }

    #[test]
    fn ring_faces_touch_the_centre() {
        let filt = CubicalFiltration::from_field(&ring_field()).unwrap();
        let faces: Vec<f64> = filt.cells().iter().filter(|c| c.dim == 2).map(|c| c.value).collect();
        assert_eq!(faces, vec![10.0; 4]);
    }

    #[test]
    fn sublevel_slices() {
        let filt = CubicalFiltration::from_field(&field(1, 3, &[0.0, 2.0, 1.0])).unwrap();
        assert!(filt.sublevel_complex(f64::NEG_INFINITY).is_empty());
        assert_eq!(filt.sublevel_complex(2.0).len(), filt.len());
        let s = filt.sublevel_complex(1.0);
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|c| c.dim == 0));
        let mut anchors: Vec<_> = s.iter().map(|c| c.anchor).collect();
        anchors.sort();
        assert_eq!(anchors, vec![(0, 0), (0, 2)]);
    }

    #[test]
    fn degenerate_grids_have_no_faces() {
        let filt = CubicalFiltration::from_field(&field(4, 1, &[3.0, 1.0, 2.0, 0.0])).unwrap();
        assert_eq!(filt.len(), 4 + 3);
        assert!(filt.cells().iter().all(|c| c.dim < 2));
    }

    fn arb_field() -> impl Strategy<Value = ScalarField> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0i32..6, r * c)
                .prop_map(move |v| ScalarField::new(r, c, v.into_iter().map(f64::from).collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn filtration_invariants(f in arb_field()) {
            let filt = CubicalFiltration::from_field(&f).unwrap();
            let (v, e, q) = cell_counts(f.rows(), f.cols());
            prop_assert_eq!(filt.len(), v + e + q);
            prop_assert_eq!(v as i64 - e as i64 + q as i64, 1);
            for (p, cell) in filt.cells().iter().enumerate() {
                let b = filt.boundary(p);
                prop_assert_eq!(b.len(), [0, 2, 4][cell.dim as usize]);
                let mut max = f64::NEG_INFINITY;
                for &x in b {
                    prop_assert!((x as usize) < p, "boundary after cell");
                    let bc = filt.cells()[x as usize];
                    prop_assert_eq!(bc.dim + 1, cell.dim);
                    max = max.max(bc.value);
                }
                if cell.dim > 0 {
                    prop_assert_eq!(cell.value, max);
                }
            }
        }

        #[test]
        fn sublevels_are_nested_and_closed(f in arb_field(), a in -1.0f64..7.0, d in 0.0f64..3.0) {
            let filt = CubicalFiltration::from_field(&f).unwrap();
            let lo = filt.sublevel_len(a);
            let hi = filt.sublevel_len(a + d);
            prop_assert!(lo <= hi);
            for p in 0..lo {
                prop_assert!(filt.cells()[p].value <= a);
                prop_assert!(filt.boundary(p).iter().all(|&x| (x as usize) < lo));
            }
            prop_assert!(filt.cells()[lo..].iter().all(|c| c.value > a));
        }

        #[test]
        fn build_is_deterministic(f in arb_field()) {
            let a = CubicalFiltration::from_field(&f).unwrap();
            let b = CubicalFiltration::from_field(&f).unwrap();
            prop_assert_eq!(a.cells(), b.cells());
            prop_assert_eq!(&a.boundary, &b.boundary);
        }
    }
}
