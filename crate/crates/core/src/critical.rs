//! Critical-point censuses from local lower-star information.
//!
//! A vertex `v` enters the sublevel filtration together with its lower star:
//! the edges to lower neighbours and the squares whose other three corners are
//! lower. Attaching that star is a cone over the lower link, so the homology
//! change is read off the link alone. In the cubical grid the link of `v` is a
//! 4-cycle through its neighbours N, E, S, W whose arcs are the incident
//! squares. With `c` link components and `h` independent link cycles:
//!
//! * empty lower link: one index-0 event (a new component);
//! * `c ≥ 2`: `c − 1` index-1 events, each merging components or closing a loop;
//! * full link: one index-2 event (a hole is filled).
//!
//! Everything here reads at most the 3×3 neighbourhood of `v`. Which way an
//! index-1 event goes is not decidable locally; the persistence diagram
//! determines it, and [`locality_gap_demo`] shows the census cannot recover
//! the diagram.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cubical::{compare_vertices, CubicalFiltration};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::persistence::{compute_persistence, PersistenceDiagram};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalEvent {
    /// `(row, col)` of the vertex; unknown for censuses derived from diagrams.
    pub vertex: Option<(usize, usize)>,
    pub value: f64,
    pub index: u8,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CriticalCensus {
    events: Vec<CriticalEvent>,
    counts: [usize; 3],
}

impl CriticalCensus {
    fn push(&mut self, event: CriticalEvent) {
        self.counts[event.index as usize] += event.multiplicity as usize;
        self.events.push(event);
    }

    #[inline]
    pub fn events(&self) -> &[CriticalEvent] {
        &self.events
    }

    /// Totals `(n0, n1, n2)` counted with multiplicity.
    #[inline]
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.counts[0], self.counts[1], self.counts[2])
    }

    /// `n0 − n1 + n2`; equals 1 on a full rectangle.
    pub fn euler(&self) -> i64 {
        self.counts[0] as i64 - self.counts[1] as i64 + self.counts[2] as i64
    }

    /// Sorted `(value, index)` list with each event repeated by multiplicity.
    pub fn value_index_multiset(&self) -> Vec<(f64, u8)> {
        let mut out: Vec<(f64, u8)> = self
            .events
            .iter()
            .flat_map(|e| std::iter::repeat_n((e.value, e.index), e.multiplicity as usize))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    /// `true` if both censuses list the same critical values and indices.
    pub fn same_values(&self, other: &CriticalCensus) -> bool {
        self.value_index_multiset() == other.value_index_multiset()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("row,col,value,index,multiplicity\n");
        for e in &self.events {
            match e.vertex {
                Some((r, c)) => {
                    let _ = write!(out, "{r},{c},");
                }
                None => out.push_str(",,"),
            }
            let _ = writeln!(out, "{:.16e},{},{}", e.value, e.index, e.multiplicity);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Lower-link shape of one vertex: `(nodes, arcs, full cycle)`.
fn lower_link(field: &ScalarField, r: usize, c: usize) -> (u32, u32, bool) {
    let (rows, cols) = (field.rows(), field.cols());
    let vals = field.values();
    let v = field.index(r, c);
    let lower = |rr: isize, cc: isize| -> bool {
        if rr < 0 || cc < 0 || rr as usize >= rows || cc as usize >= cols {
            return false;
        }
        let u = rr as usize * cols + cc as usize;
        compare_vertices(vals, u, v).is_lt()
    };
    let (ri, ci) = (r as isize, c as isize);
    // N, E, S, W; the diagonal between consecutive neighbours closes a square.
    let nbr = [(ri - 1, ci), (ri, ci + 1), (ri + 1, ci), (ri, ci - 1)];
    let diag = [(ri - 1, ci + 1), (ri + 1, ci + 1), (ri + 1, ci - 1), (ri - 1, ci - 1)];
    let present = nbr.map(|(a, b)| lower(a, b));
    let nodes = present.iter().filter(|&&p| p).count() as u32;
    let mut arcs = 0;
    for k in 0..4 {
        if present[k] && present[(k + 1) % 4] && lower(diag[k].0, diag[k].1) {
            arcs += 1;
        }
    }
    (nodes, arcs, arcs == 4)
}

/// Critical events of a field from each vertex's lower star.
///
/// Ties between equal values are broken by vertex index.
pub fn detect_critical(field: &ScalarField) -> CriticalCensus {
    let mut census = CriticalCensus::default();
    for r in 0..field.rows() {
        for c in 0..field.cols() {
            let value = field.get(r, c);
            let vertex = Some((r, c));
            let (nodes, arcs, full) = lower_link(field, r, c);
            if nodes == 0 {
                census.push(CriticalEvent {
                    vertex,
                    value,
                    index: 0,
                    multiplicity: 1,
                });
                continue;
            }
            let components = if full { 1 } else { nodes - arcs };
            if components > 1 {
                census.push(CriticalEvent {
                    vertex,
                    value,
                    index: 1,
                    multiplicity: components - 1,
                });
            }
            if full {
                census.push(CriticalEvent {
                    vertex,
                    value,
                    index: 2,
                    multiplicity: 1,
                });
            }
        }
    }
    census
}

/// Critical values and indices recovered from a persistence diagram and the
/// value of the omitted essential minimum. Vertex locations are unknown.
pub fn critical_values_from_diagram(diagram: &PersistenceDiagram, essential_min: f64) -> CriticalCensus {
    let mut census = CriticalCensus::default();
    let mut add = |value: f64, index: u8| {
        census.push(CriticalEvent {
            vertex: None,
            value,
            index,
            multiplicity: 1,
        })
    };
    add(essential_min, 0);
    for p in diagram.pairs() {
        add(p.birth, p.degree);
        add(p.death, p.degree + 1);
    }
    census
}

/// Census and diagram of a field, computed from scratch.
pub fn census_and_diagram(field: &ScalarField) -> Result<(CriticalCensus, PersistenceDiagram)> {
    let filt = CubicalFiltration::from_field(field)?;
    Ok((detect_critical(field), compute_persistence(&filt)))
}

// Found by `search_locality_witness(5)`; the unit tests re-run the search.
const WITNESS_A: [f64; 5] = [0.0, 3.0, 1.0, 4.0, 2.0];
const WITNESS_B: [f64; 5] = [0.0, 3.0, 2.0, 4.0, 1.0];

/// Two 1×5 fields with identical critical values and indices but different
/// persistence diagrams.
///
/// In both, minima sit at 0, 1, 2 and saddles at 3, 4. In the first, the
/// saddle at 3 merges the components born at 0 and 1; in the second, it
/// merges those born at 0 and 2.
pub fn locality_gap_demo() -> (ScalarField, ScalarField) {
    (
        ScalarField::new(1, 5, WITNESS_A.to_vec()).expect("valid witness"),
        ScalarField::new(1, 5, WITNESS_B.to_vec()).expect("valid witness"),
    )
}

/// Exhaustive search over 1×`len` fields whose values are a permutation of
/// `0..len`, returning the first pair (in lexicographic order of the second
/// field, then the first) with equal censuses and unequal diagrams.
pub fn search_locality_witness(len: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut perm: Vec<usize> = (0..len).collect();
    let mut seen: Vec<(Vec<f64>, Vec<(f64, u8)>, PersistenceDiagram)> = Vec::new();
    loop {
        let vals: Vec<f64> = perm.iter().map(|&x| x as f64).collect();
        let field = ScalarField::new(1, len, vals.clone()).ok()?;
        let (census, diagram) = census_and_diagram(&field).ok()?;
        let key = census.value_index_multiset();
        for (other, other_key, other_diagram) in &seen {
            if *other_key == key && *other_diagram != diagram {
                return Some((other.clone(), vals));
            }
        }
        seen.push((vals, key, diagram));
        if !next_permutation(&mut perm) {
            return None;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(rows: usize, cols: usize, v: &[f64]) -> ScalarField {
        ScalarField::new(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn one_by_three_census() {
        let census = detect_critical(&field(1, 3, &[0.0, 2.0, 1.0]));
        assert_eq!(census.counts(), (2, 1, 0));
        assert_eq!(census.euler(), 1);
        assert_eq!(census.value_index_multiset(), vec![(0.0, 0), (1.0, 0), (2.0, 1)]);
        let idx1 = census.events().iter().find(|e| e.index == 1).unwrap();
        assert_eq!(idx1.vertex, Some((0, 1)));
    }

    #[test]
    fn ring_census() {
        let f = field(3, 3, &[1.0, 2.0, 3.0, 8.0, 10.0, 4.0, 7.0, 6.0, 5.0]);
        let census = detect_critical(&f);
        let twos: Vec<_> = census.events().iter().filter(|e| e.index == 2).collect();
        assert_eq!(twos.len(), 1);
        assert_eq!((twos[0].value, twos[0].vertex), (10.0, Some((1, 1))));
        let ones: Vec<_> = census.events().iter().filter(|e| e.index == 1).collect();
        assert_eq!(ones.len(), 1);
        assert_eq!((ones[0].value, ones[0].multiplicity), (8.0, 1));
        // The diagram shows the saddle at 8 closes a loop.
        let (_, diagram) = census_and_diagram(&f).unwrap();
        assert_eq!(diagram.bars(1), vec![(8.0, 10.0)]);
        let from_diagram = critical_values_from_diagram(&diagram, 1.0);
        assert_eq!(from_diagram.value_index_multiset(), vec![(1.0, 0), (8.0, 1), (10.0, 2)]);
    }

    #[test]
    fn monotone_field_has_single_minimum() {
        let f = ScalarField::from_fn(5, 7, |r, c| (r * 7 + c) as f64).unwrap();
        let census = detect_critical(&f);
        assert_eq!(census.counts().0, 1);
        assert_eq!(census.euler(), 1);
    }

    #[test]
    fn monkey_saddle_has_multiplicity() {
        // Centre above its four neighbours, below the four diagonals.
        let f = field(3, 3, &[9.0, 1.0, 9.0, 2.0, 5.0, 3.0, 9.0, 4.0, 9.0]);
        let census = detect_critical(&f);
        let centre = census.events().iter().find(|e| e.vertex == Some((1, 1))).unwrap();
        assert_eq!((centre.index, centre.multiplicity), (1, 3));
        assert_eq!(census.euler(), 1);
        let (_, d) = census_and_diagram(&f).unwrap();
        assert!(census.same_values(&critical_values_from_diagram(&d, 1.0)));
    }

    #[test]
    fn diagram_census_definitions() {
        let d = PersistenceDiagram::from_bars(&[(0, 1.0, 2.0)], Some(0.0));
        let c = critical_values_from_diagram(&d, 0.0);
        assert_eq!(c.value_index_multiset(), vec![(0.0, 0), (1.0, 0), (2.0, 1)]);
        assert!(c.events().iter().all(|e| e.vertex.is_none()));

        let empty = PersistenceDiagram::from_bars(&[], Some(-3.0));
        assert_eq!(critical_values_from_diagram(&empty, -3.0).value_index_multiset(), vec![(-3.0, 0)]);
    }

    #[test]
    fn witness_is_reproduced_by_search() {
        let (a, b) = search_locality_witness(5).expect("a witness exists for 1x5 fields");
        assert_eq!(a, WITNESS_A.to_vec());
        assert_eq!(b, WITNESS_B.to_vec());
        let (fa, fb) = locality_gap_demo();
        let (ca, da) = census_and_diagram(&fa).unwrap();
        let (cb, db) = census_and_diagram(&fb).unwrap();
        assert!(ca.same_values(&cb));
        assert_ne!(da, db);
    }

    #[test]
    fn census_csv_layout() {
        let census = detect_critical(&field(1, 2, &[0.0, 1.0]));
        assert_eq!(census.to_csv_string(), "row,col,value,index,multiplicity\n0,0,0.0000000000000000e0,0,1\n");
    }

    fn arb_generic() -> impl Strategy<Value = ScalarField> {
        (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-1e3f64..1e3, r * c)
                .prop_map(move |v| ScalarField::new(r, c, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn census_agrees_with_diagram(f in arb_generic()) {
            let (census, diagram) = census_and_diagram(&f).unwrap();
            prop_assert_eq!(census.euler(), 1);
            let derived = critical_values_from_diagram(&diagram, f.min_value());
            prop_assert_eq!(census.value_index_multiset(), derived.value_index_multiset());
        }

        #[test]
        fn detection_is_local(f in arb_generic(), noise in proptest::collection::vec(-1e3f64..1e3, 36)) {
            let census = detect_critical(&f);
            // Perturb everything outside the 3x3 block around (1, 1).
            let mut vals = f.values().to_vec();
            for (i, v) in vals.iter_mut().enumerate() {
                let (r, c) = (i / f.cols(), i % f.cols());
                if r > 2 || c > 2 {
                    *v = noise[i % noise.len()];
                }
            }
            let g = ScalarField::new(f.rows(), f.cols(), vals).unwrap();
            let pick = |c: &CriticalCensus| -> Vec<CriticalEvent> {
                c.events().iter().copied().filter(|e| e.vertex == Some((1, 1))).collect()
            };
            prop_assert_eq!(pick(&census), pick(&detect_critical(&g)));
        }
    }
}
