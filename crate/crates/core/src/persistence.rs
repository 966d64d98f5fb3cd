//! Persistence pairs from GF(2) boundary-matrix reduction.
//!
//! Columns are indexed by filtration position and reduced with the clearing
//! ("twist") optimization: dimension-2 columns first, so every edge that
//! turns out to be the pivot of a triangle column is cleared before the
//! dimension-1 pass ever touches it. Columns are sparse sorted index lists;
//! addition is a symmetric-difference merge.
//!
//! Pairs come out as:
//! * H0 — `(vertex, edge)` pivots from the dimension-1 pass, birth 0;
//! * H1 — `(edge, triangle)` pivots from the dimension-2 pass, with the
//!   reduced triangle column retained as the raw representative cycle;
//! * essential classes (never paired) with death = +∞. On a periodic cell
//!   the torus itself contributes up to three essential H1 classes; they
//!   reflect cell topology, not local structure, and the descriptor window
//!   never sees them.
//!
//! Representative cycles can be tightened: within the subgraph of edges
//! entering strictly before the birth edge, the shortest path (edge count,
//! then total length) between the birth edge's endpoints closes it into a
//! cycle. The search falls back to the raw reduced column when it exceeds a
//! node budget.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filtration::{Convention, Filtration, Simplex};

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("malformed filtration: face {face} of simplex {simplex} at position {position} is missing or appears later")]
    FaceOrder {
        position: usize,
        simplex: String,
        face: String,
    },
    #[error("malformed filtration: duplicate simplex {simplex} at position {position}")]
    DuplicateSimplex { position: usize, simplex: String },
    #[error("malformed filtration: values decrease at position {position}")]
    ValueOrder { position: usize },
    #[error("malformed filtration: vertex at position {position} has nonzero value {value}")]
    NonzeroVertexValue { position: usize, value: f64 },
    #[error("representative cycles exist only for finite dimension-1 pairs of this diagram")]
    UnsupportedPair,
}

/// One birth–death pair. `death` is `f64::INFINITY` for essential classes.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistencePair {
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
    pub birth_index: u32,
    pub death_index: Option<u32>,
    pub birth_simplex: Simplex,
    pub death_simplex: Option<Simplex>,
}

impl PersistencePair {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    /// Zero-persistence pairs are retained but carry no descriptor content.
    pub fn is_zero_persistence(&self) -> bool {
        self.birth == self.death
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EdgeRecord {
    pub position: u32,
    pub u: u32,
    pub v: u32,
    pub value: f64,
}

/// How a representative cycle was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleExtraction {
    /// Shortest-cycle heuristic through edges born at or before the birth.
    Tightened,
    /// The reduced death column, verbatim.
    RawColumn,
}

/// Node budget for the tightening search before it falls back to the raw
/// reduced column.
pub const DEFAULT_TIGHTEN_BUDGET: usize = 10_000;

/// All H0/H1 pairs of one filtration, plus the edge data needed to extract
/// and tighten representative cycles.
#[derive(Debug, Clone)]
pub struct PersistenceDiagram {
    pairs: Vec<PersistencePair>,
    convention: Convention,
    cutoff: f64,
    n_vertices: usize,
    structure_id: Option<String>,
    edges: Vec<EdgeRecord>,
    position_to_edge: HashMap<u32, usize>,
    cycle_columns: HashMap<u32, Vec<u32>>,
}

impl PersistenceDiagram {
    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn structure_id(&self) -> Option<&str> {
        self.structure_id.as_deref()
    }

    pub fn with_structure_id(mut self, id: impl Into<String>) -> Self {
        self.structure_id = Some(id.into());
        self
    }

    /// Finite pairs with strictly positive persistence — what the descriptor
    /// consumes.
    pub fn finite_positive_pairs(&self) -> impl Iterator<Item = &PersistencePair> {
        self.pairs
            .iter()
            .filter(|p| !p.is_essential() && !p.is_zero_persistence())
    }

    /// Betti numbers (b0, b1) of the complex at scale `t`: classes born at or
    /// before `t` and still alive after it.
    pub fn betti_at(&self, t: f64) -> (usize, usize) {
        let mut b0 = 0;
        let mut b1 = 0;
        for pair in &self.pairs {
            if pair.birth <= t && pair.death > t {
                match pair.dim {
                    0 => b0 += 1,
                    _ => b1 += 1,
                }
            }
        }
        (b0, b1)
    }

    /// Tightened representative cycle for a finite H1 pair, as vertex pairs.
    pub fn representative_cycle(
        &self,
        pair: &PersistencePair,
    ) -> Result<Vec<(u32, u32)>, PersistenceError> {
        self.representative_cycle_with_method(pair, DEFAULT_TIGHTEN_BUDGET)
            .map(|(edges, _)| edges)
    }

    /// Representative cycle plus the extraction method that produced it.
    pub fn representative_cycle_with_method(
        &self,
        pair: &PersistencePair,
        budget: usize,
    ) -> Result<(Vec<(u32, u32)>, CycleExtraction), PersistenceError> {
        if pair.dim != 1 || pair.is_essential() {
            return Err(PersistenceError::UnsupportedPair);
        }
        let death = pair.death_index.ok_or(PersistenceError::UnsupportedPair)?;
        let column = self
            .cycle_columns
            .get(&death)
            .ok_or(PersistenceError::UnsupportedPair)?;
        if column.last() != Some(&pair.birth_index) {
            // pair does not belong to this diagram
            return Err(PersistenceError::UnsupportedPair);
        }
        if let Some(cycle) = self.tighten(pair.birth_index, budget) {
            return Ok((cycle, CycleExtraction::Tightened));
        }
        let mut raw: Vec<(u32, u32)> = column
            .iter()
            .map(|pos| {
                let e = self.edges[self.position_to_edge[pos]];
                (e.u, e.v)
            })
            .collect();
        raw.sort_unstable();
        Ok((raw, CycleExtraction::RawColumn))
    }

    /// Raw reduced-column cycle, without tightening.
    pub fn raw_representative_cycle(
        &self,
        pair: &PersistencePair,
    ) -> Result<Vec<(u32, u32)>, PersistenceError> {
        if pair.dim != 1 || pair.is_essential() {
            return Err(PersistenceError::UnsupportedPair);
        }
        let death = pair.death_index.ok_or(PersistenceError::UnsupportedPair)?;
        let column = self
            .cycle_columns
            .get(&death)
            .ok_or(PersistenceError::UnsupportedPair)?;
        let mut raw: Vec<(u32, u32)> = column
            .iter()
            .map(|pos| {
                let e = self.edges[self.position_to_edge[pos]];
                (e.u, e.v)
            })
            .collect();
        raw.sort_unstable();
        Ok(raw)
    }

    /// Shortest path between the birth edge's endpoints using only strictly
    /// earlier edges; `None` when the settled-node budget is exhausted.
    fn tighten(&self, birth_position: u32, budget: usize) -> Option<Vec<(u32, u32)>> {
        let birth = self.edges[self.position_to_edge[&birth_position]];
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.n_vertices];
        for e in &self.edges {
            if e.position >= birth_position {
                break; // edges are stored in filtration order
            }
            adj[e.u as usize].push((e.v, e.value));
            adj[e.v as usize].push((e.u, e.value));
        }
        let path = shortest_path(&adj, birth.u, birth.v, budget)?;
        let mut cycle: Vec<(u32, u32)> = path
            .windows(2)
            .map(|w| if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) })
            .collect();
        cycle.push(if birth.u < birth.v {
            (birth.u, birth.v)
        } else {
            (birth.v, birth.u)
        });
        cycle.sort_unstable();
        Some(cycle)
    }
}

/// Dijkstra on (hop count, total length), deterministic tie-break by vertex
/// index. Returns the vertex path from `src` to `dst`.
fn shortest_path(
    adj: &[Vec<(u32, f64)>],
    src: u32,
    dst: u32,
    budget: usize,
) -> Option<Vec<u32>> {
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Entry {
        hops: u32,
        length: f64,
        vertex: u32,
    }
    impl Eq for Entry {}
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> Ordering {
            // BinaryHeap is a max-heap; reverse for smallest-first
            other
                .hops
                .cmp(&self.hops)
                .then_with(|| other.length.total_cmp(&self.length))
                .then_with(|| other.vertex.cmp(&self.vertex))
        }
    }
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }

    let n = adj.len();
    let mut best: Vec<Option<(u32, f64)>> = vec![None; n];
    let mut prev: Vec<u32> = vec![u32::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[src as usize] = Some((0, 0.0));
    heap.push(Entry {
        hops: 0,
        length: 0.0,
        vertex: src,
    });
    let mut settled_count = 0usize;
    while let Some(Entry { hops, length, vertex }) = heap.pop() {
        if settled[vertex as usize] {
            continue;
        }
        settled[vertex as usize] = true;
        settled_count += 1;
        if settled_count > budget {
            return None;
        }
        if vertex == dst {
            let mut path = vec![dst];
            let mut v = dst;
            while v != src {
                v = prev[v as usize];
                path.push(v);
            }
            path.reverse();
            return Some(path);
        }
        for &(next, w) in &adj[vertex as usize] {
            if settled[next as usize] {
                continue;
            }
            let cand = (hops + 1, length + w);
            let better = match best[next as usize] {
                None => true,
                Some((h, l)) => cand.0 < h || (cand.0 == h && cand.1 < l),
            };
            if better {
                best[next as usize] = Some(cand);
                prev[next as usize] = vertex;
                heap.push(Entry {
                    hops: cand.0,
                    length: cand.1,
                    vertex: next,
                });
            }
        }
    }
    None
}

fn sym_diff(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
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
    out
}

/// Reduce a filtration to its persistence diagram (dimensions 0 and 1).
///
/// Deterministic given the filtration order. Zero-persistence pairs are
/// retained and flagged; essential classes get death = +∞.
pub fn reduce(filtration: &Filtration) -> Result<PersistenceDiagram, PersistenceError> {
    let simplices = filtration.simplices();
    let m = simplices.len();

    let mut index: HashMap<Simplex, u32> = HashMap::with_capacity(m);
    let mut previous_value = f64::NEG_INFINITY;
    for (position, (simplex, value)) in simplices.iter().enumerate() {
        if *value < previous_value {
            return Err(PersistenceError::ValueOrder { position });
        }
        previous_value = *value;
        if simplex.dim() == 0 && *value != 0.0 {
            return Err(PersistenceError::NonzeroVertexValue {
                position,
                value: *value,
            });
        }
        if index.insert(*simplex, position as u32).is_some() {
            return Err(PersistenceError::DuplicateSimplex {
                position,
                simplex: simplex.to_string(),
            });
        }
    }

    let mut boundary: Vec<Vec<u32>> = Vec::with_capacity(m);
    for (position, (simplex, _)) in simplices.iter().enumerate() {
        let mut column = Vec::with_capacity(3);
        for face in simplex.facets() {
            match index.get(&face) {
                Some(&fp) if (fp as usize) < position => column.push(fp),
                _ => {
                    return Err(PersistenceError::FaceOrder {
                        position,
                        simplex: simplex.to_string(),
                        face: face.to_string(),
                    })
                }
            }
        }
        column.sort_unstable();
        boundary.push(column);
    }

    let dims: Vec<u8> = simplices.iter().map(|(s, _)| s.dim() as u8).collect();
    let mut pivot_owner: Vec<Option<u32>> = vec![None; m];
    let mut cleared = vec![false; m];
    let mut reduced: Vec<Option<Vec<u32>>> = vec![None; m];
    let mut h1_pairs: Vec<(u32, u32)> = Vec::new();
    let mut h0_pairs: Vec<(u32, u32)> = Vec::new();
    let mut essential_edges: Vec<u32> = Vec::new();

    for dim in [2u8, 1u8] {
        for j in 0..m {
            if dims[j] != dim || cleared[j] {
                continue;
            }
            let mut column = std::mem::take(&mut boundary[j]);
            while let Some(&pivot) = column.last() {
                match pivot_owner[pivot as usize] {
                    Some(owner) => {
                        let other = reduced[owner as usize]
                            .as_ref()
                            .expect("pivot owner retains its reduced column");
                        column = sym_diff(&column, other);
                    }
                    None => break,
                }
            }
            if let Some(&pivot) = column.last() {
                pivot_owner[pivot as usize] = Some(j as u32);
                cleared[pivot as usize] = true;
                if dim == 2 {
                    h1_pairs.push((pivot, j as u32));
                } else {
                    h0_pairs.push((pivot, j as u32));
                }
                reduced[j] = Some(column);
            } else if dim == 1 {
                essential_edges.push(j as u32);
            }
        }
    }

    let values: Vec<f64> = simplices.iter().map(|(_, v)| *v).collect();
    let mut pairs = Vec::with_capacity(h0_pairs.len() + h1_pairs.len() + 8);
    for &(edge, triangle) in &h1_pairs {
        pairs.push(PersistencePair {
            dim: 1,
            birth: values[edge as usize],
            death: values[triangle as usize],
            birth_index: edge,
            death_index: Some(triangle),
            birth_simplex: simplices[edge as usize].0,
            death_simplex: Some(simplices[triangle as usize].0),
        });
    }
    for &(vertex, edge) in &h0_pairs {
        pairs.push(PersistencePair {
            dim: 0,
            birth: 0.0,
            death: values[edge as usize],
            birth_index: vertex,
            death_index: Some(edge),
            birth_simplex: simplices[vertex as usize].0,
            death_simplex: Some(simplices[edge as usize].0),
        });
    }
    for j in 0..m {
        if dims[j] == 0 && pivot_owner[j].is_none() {
            pairs.push(PersistencePair {
                dim: 0,
                birth: 0.0,
                death: f64::INFINITY,
                birth_index: j as u32,
                death_index: None,
                birth_simplex: simplices[j].0,
                death_simplex: None,
            });
        }
    }
    for &edge in &essential_edges {
        pairs.push(PersistencePair {
            dim: 1,
            birth: values[edge as usize],
            death: f64::INFINITY,
            birth_index: edge,
            death_index: None,
            birth_simplex: simplices[edge as usize].0,
            death_simplex: None,
        });
    }
    pairs.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then_with(|| a.birth.total_cmp(&b.birth))
            .then_with(|| a.death.total_cmp(&b.death))
            .then_with(|| a.birth_index.cmp(&b.birth_index))
    });

    let mut cycle_columns = HashMap::with_capacity(h1_pairs.len());
    for &(_, triangle) in &h1_pairs {
        cycle_columns.insert(
            triangle,
            reduced[triangle as usize]
                .take()
                .expect("paired triangle keeps its column"),
        );
    }

    let mut edges = Vec::new();
    let mut position_to_edge = HashMap::new();
    for (position, (simplex, value)) in simplices.iter().enumerate() {
        if simplex.dim() == 1 {
            let vs = simplex.vertices();
            position_to_edge.insert(position as u32, edges.len());
            edges.push(EdgeRecord {
                position: position as u32,
                u: vs[0],
                v: vs[1],
                value: *value,
            });
        }
    }

    Ok(PersistenceDiagram {
        pairs,
        convention: filtration.convention(),
        cutoff: filtration.cutoff(),
        n_vertices: filtration.n_vertices(),
        structure_id: None,
        edges,
        position_to_edge,
        cycle_columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::build_rips;
    use crate::geometry::PeriodicStructure;

    fn big_cell() -> [f64; 3] {
        [100.0, 100.0, 100.0]
    }

    fn unit_square() -> PeriodicStructure {
        PeriodicStructure::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
            ],
            big_cell(),
        )
        .unwrap()
    }

    #[test]
    fn two_points_pair_at_half_distance() {
        let s = PeriodicStructure::new(vec![[0.0; 3], [2.0, 0.0, 0.0]], big_cell()).unwrap();
        let filt = build_rips(&s, 3.0, Convention::Radius).unwrap();
        let diagram = reduce(&filt).unwrap();
        let h0: Vec<_> = diagram.pairs().iter().filter(|p| p.dim == 0).collect();
        assert_eq!(h0.len(), 2);
        let finite: Vec<_> = h0.iter().filter(|p| !p.is_essential()).collect();
        assert_eq!(finite.len(), 1);
        assert_eq!(finite[0].birth, 0.0);
        assert!((finite[0].death - 1.0).abs() < 1e-12);
        assert_eq!(h0.iter().filter(|p| p.is_essential()).count(), 1);
    }

    #[test]
    fn unit_square_has_one_h1_pair() {
        let filt = build_rips(&unit_square(), 2.0, Convention::Radius).unwrap();
        let diagram = reduce(&filt).unwrap();
        let h1: Vec<_> = diagram
            .pairs()
            .iter()
            .filter(|p| p.dim == 1 && !p.is_essential() && !p.is_zero_persistence())
            .collect();
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - 0.5).abs() < 1e-12);
        assert!((h1[0].death - 2.0_f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn equilateral_triangle_cycle_has_zero_persistence() {
        let h = 3.0_f64.sqrt() / 2.0;
        let s = PeriodicStructure::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]],
            big_cell(),
        )
        .unwrap();
        let filt = build_rips(&s, 2.0, Convention::Radius).unwrap();
        let diagram = reduce(&filt).unwrap();
        let positive: Vec<_> = diagram
            .pairs()
            .iter()
            .filter(|p| p.dim == 1 && !p.is_essential() && !p.is_zero_persistence())
            .collect();
        assert!(positive.is_empty());
        // the cycle exists, but birth == death
        let zero: Vec<_> = diagram
            .pairs()
            .iter()
            .filter(|p| p.dim == 1 && p.is_zero_persistence())
            .collect();
        assert_eq!(zero.len(), 1);
    }

    #[test]
    fn unit_square_tightened_cycle_is_the_four_sides() {
        let filt = build_rips(&unit_square(), 2.0, Convention::Radius).unwrap();
        let diagram = reduce(&filt).unwrap();
        let pair = diagram
            .pairs()
            .iter()
            .find(|p| p.dim == 1 && !p.is_essential() && !p.is_zero_persistence())
            .unwrap();
        let (cycle, method) = diagram
            .representative_cycle_with_method(pair, DEFAULT_TIGHTEN_BUDGET)
            .unwrap();
        assert_eq!(method, CycleExtraction::Tightened);
        let mut expected = vec![(0, 1), (1, 2), (2, 3), (0, 3)];
        expected.sort_unstable();
        assert_eq!(cycle, expected);
    }

    #[test]
    fn hexagon_cycle_is_the_six_ring_edges() {
        let r = 1.5;
        let positions: Vec<[f64; 3]> = (0..6)
            .map(|k| {
                let a = std::f64::consts::PI / 3.0 * k as f64;
                [r * a.cos() + 10.0, r * a.sin() + 10.0, 10.0]
            })
            .collect();
        let s = PeriodicStructure::new(positions, big_cell()).unwrap();
        let filt = build_rips(&s, 4.0, Convention::SquaredRadius).unwrap();
        let diagram = reduce(&filt).unwrap();
        let pair = diagram
            .pairs()
            .iter()
            .filter(|p| p.dim == 1 && !p.is_essential() && !p.is_zero_persistence())
            .max_by(|a, b| a.persistence().total_cmp(&b.persistence()))
            .unwrap();
        let cycle = diagram.representative_cycle(pair).unwrap();
        let mut expected = vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)];
        expected.sort_unstable();
        assert_eq!(cycle, expected);
    }

    #[test]
    fn essential_pair_has_no_cycle() {
        let s = PeriodicStructure::new(vec![[0.0; 3], [2.0, 0.0, 0.0]], big_cell()).unwrap();
        let filt = build_rips(&s, 3.0, Convention::Radius).unwrap();
        let diagram = reduce(&filt).unwrap();
        let essential = diagram
            .pairs()
            .iter()
            .find(|p| p.is_essential())
            .unwrap()
            .clone();
        assert!(matches!(
            diagram.representative_cycle(&essential),
            Err(PersistenceError::UnsupportedPair)
        ));
    }

    #[test]
    fn betti_counts_for_unit_square() {
        let filt = build_rips(&unit_square(), 2.0, Convention::Radius).unwrap();
        let diagram = reduce(&filt).unwrap();
        assert_eq!(diagram.betti_at(0.1), (4, 0));
        assert_eq!(diagram.betti_at(0.6), (1, 1));
        assert_eq!(diagram.betti_at(1.0), (1, 0));
    }

    #[test]
    fn malformed_filtration_is_rejected() {
        // edge without its vertices
        let filt = Filtration::from_parts(
            vec![(Simplex::edge(0, 1), 1.0)],
            Convention::Radius,
            2.0,
            2,
        );
        assert!(matches!(
            reduce(&filt),
            Err(PersistenceError::FaceOrder { .. })
        ));
    }

    #[test]
    fn cycle_edge_values_do_not_exceed_birth() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let cell = [9.0, 9.0, 9.0];
        let positions: Vec<[f64; 3]> = (0..40)
            .map(|_| {
                [
                    rng.random::<f64>() * cell[0],
                    rng.random::<f64>() * cell[1],
                    rng.random::<f64>() * cell[2],
                ]
            })
            .collect();
        let s = PeriodicStructure::new(positions, cell).unwrap();
        let filt = build_rips(&s, 3.1, Convention::SquaredRadius).unwrap();
        let diagram = reduce(&filt).unwrap();
        let conv = diagram.convention();
        for pair in diagram.finite_positive_pairs().filter(|p| p.dim == 1) {
            let cycle = diagram.representative_cycle(pair).unwrap();
            assert!(!cycle.is_empty());
            // closed: every vertex has even degree
            let mut degree: HashMap<u32, usize> = HashMap::new();
            for &(u, v) in &cycle {
                *degree.entry(u).or_default() += 1;
                *degree.entry(v).or_default() += 1;
            }
            assert!(degree.values().all(|d| d % 2 == 0));
            for &(u, v) in &cycle {
                let value = conv.scale(s.distance(u as usize, v as usize));
                assert!(value <= pair.birth + 1e-12);
            }
        }
    }
}
