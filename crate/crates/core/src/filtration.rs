//! Vietoris–Rips filtrations (dimensions 0–2) over the minimum-image metric.
//!
//! A simplex enters at the scale set by its largest pairwise distance:
//! vertices at 0, the edge {i,j} at `f(d(i,j))`, a triangle at the max of
//! its edge values. `f` is the scale convention: half the distance
//! ([`Convention::Radius`]) or its square ([`Convention::SquaredRadius`],
//! the default — it matches the squared-scale axes the descriptor window
//! assumes).
//!
//! Simplices are sorted by `(value, dim, vertex tuple)`, so faces always
//! precede cofaces and ties break deterministically.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{neighbor_pairs, GeometryError, PeriodicStructure};

/// A 0-, 1- or 2-simplex over atom indices, vertices strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Simplex {
    verts: [u32; 3], // unused slots padded with u32::MAX
    dim: u8,
}

impl Simplex {
    pub fn vertex(v: u32) -> Self {
        Self {
            verts: [v, u32::MAX, u32::MAX],
            dim: 0,
        }
    }

    pub fn edge(a: u32, b: u32) -> Self {
        assert_ne!(a, b, "edge endpoints must differ");
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Self {
            verts: [a, b, u32::MAX],
            dim: 1,
        }
    }

    pub fn triangle(a: u32, b: u32, c: u32) -> Self {
        let mut v = [a, b, c];
        v.sort_unstable();
        assert!(v[0] < v[1] && v[1] < v[2], "triangle vertices must be distinct");
        Self { verts: v, dim: 2 }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts[..=self.dim as usize]
    }

    /// Codimension-1 faces, in lexicographic order.
    pub fn facets(&self) -> Vec<Simplex> {
        match self.dim {
            0 => Vec::new(),
            1 => vec![Self::vertex(self.verts[0]), Self::vertex(self.verts[1])],
            _ => vec![
                Self::edge(self.verts[0], self.verts[1]),
                Self::edge(self.verts[0], self.verts[2]),
                Self::edge(self.verts[1], self.verts[2]),
            ],
        }
    }

    fn order_key(&self) -> (u8, [u32; 3]) {
        (self.dim, self.verts)
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.vertices())
    }
}

/// Filtration scale convention applied to interatomic distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// f(d) = d / 2 — the radius at which two atom-centered balls touch.
    Radius,
    /// f(d) = (d / 2)² — squared-radius scale.
    #[serde(rename = "squared")]
    SquaredRadius,
}

impl Convention {
    pub fn scale(self, distance: f64) -> f64 {
        let r = distance * 0.5;
        match self {
            Convention::Radius => r,
            Convention::SquaredRadius => r * r,
        }
    }

    /// Largest interatomic distance consistent with a filtration value.
    pub fn distance_at(self, value: f64) -> f64 {
        match self {
            Convention::Radius => 2.0 * value,
            Convention::SquaredRadius => 2.0 * value.max(0.0).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Radius => "radius",
            Convention::SquaredRadius => "squared",
        }
    }
}

impl Default for Convention {
    fn default() -> Self {
        Convention::SquaredRadius
    }
}

impl FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "radius" => Ok(Convention::Radius),
            "squared" => Ok(Convention::SquaredRadius),
            other => Err(format!("unknown convention `{other}` (expected radius|squared)")),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Simplices with entry values, sorted by `(value, dim, vertex tuple)`.
#[derive(Debug, Clone)]
pub struct Filtration {
    simplices: Vec<(Simplex, f64)>,
    convention: Convention,
    cutoff: f64,
    n_vertices: usize,
}

impl Filtration {
    pub fn simplices(&self) -> &[(Simplex, f64)] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
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

    /// Assemble from raw parts, applying the canonical ordering. Intended for
    /// tests and oracles; `build_rips` is the production path.
    pub fn from_parts(
        mut simplices: Vec<(Simplex, f64)>,
        convention: Convention,
        cutoff: f64,
        n_vertices: usize,
    ) -> Self {
        sort_filtration(&mut simplices);
        Self {
            simplices,
            convention,
            cutoff,
            n_vertices,
        }
    }
}

fn sort_filtration(simplices: &mut [(Simplex, f64)]) {
    simplices.sort_unstable_by(|(s1, v1), (s2, v2)| {
        v1.total_cmp(v2).then_with(|| s1.order_key().cmp(&s2.order_key()))
    });
}

/// Build the Rips filtration of `structure` up to `cutoff` (Å).
///
/// Contains every vertex at value 0, every edge with `d <= cutoff` at
/// `f(d)`, and every triangle whose three edges are present at the max of
/// their values. Duplicate atoms (d = 0) simply yield edges at value 0.
///
/// Errors when `cutoff >= min(cell)/2`, naming the offending cell axis.
pub fn build_rips(
    structure: &PeriodicStructure,
    cutoff: f64,
    convention: Convention,
) -> Result<Filtration, GeometryError> {
    let pairs = neighbor_pairs(structure, cutoff)?;
    let n = structure.len();
    // pairs are sorted by (i, j), so both push orders below stay ascending
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for &(i, j, d) in &pairs {
        adj[i as usize].push((j, d));
        adj[j as usize].push((i, d));
    }
    let mut simplices: Vec<(Simplex, f64)> = Vec::with_capacity(n + 2 * pairs.len());
    for v in 0..n {
        simplices.push((Simplex::vertex(v as u32), 0.0));
    }
    for &(i, j, d) in &pairs {
        simplices.push((Simplex::edge(i, j), convention.scale(d)));
    }
    // triangles from adjacency intersections, k > j keeps each one unique
    for &(i, j, dij) in &pairs {
        let ai = &adj[i as usize];
        let aj = &adj[j as usize];
        let (mut p, mut q) = (0, 0);
        while p < ai.len() && q < aj.len() {
            let (ki, dik) = ai[p];
            let (kj, djk) = aj[q];
            match ki.cmp(&kj) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    if ki > j {
                        let dmax = dij.max(dik).max(djk);
                        simplices.push((Simplex::triangle(i, j, ki), convention.scale(dmax)));
                    }
                    p += 1;
                    q += 1;
                }
            }
        }
    }
    sort_filtration(&mut simplices);
    Ok(Filtration {
        simplices,
        convention,
        cutoff,
        n_vertices: n,
    })
}

/// Exact number of edges `build_rips` would emit at this cutoff.
///
/// Total function (used for preflight estimates): counts minimum-image pairs
/// with `d <= cutoff` by direct sweep, regardless of cutoff validity.
pub fn edge_count_bound(structure: &PeriodicStructure, cutoff: f64) -> usize {
    let n = structure.len();
    let mut count = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if structure.distance(i, j) <= cutoff {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big_cell() -> [f64; 3] {
        [100.0, 100.0, 100.0]
    }

    fn values_of_dim(filt: &Filtration, dim: usize) -> Vec<f64> {
        filt.simplices()
            .iter()
            .filter(|(s, _)| s.dim() == dim)
            .map(|(_, v)| *v)
            .collect()
    }

    #[test]
    fn two_points_make_one_edge_at_half_distance() {
        let s =
            PeriodicStructure::new(vec![[0.0; 3], [2.0, 0.0, 0.0]], big_cell()).unwrap();
        let filt = build_rips(&s, 3.0, Convention::Radius).unwrap();
        let edges = values_of_dim(&filt, 1);
        assert_eq!(edges, vec![1.0]);
        assert_eq!(values_of_dim(&filt, 2).len(), 0);
    }

    #[test]
    fn unit_square_simplices() {
        let s = PeriodicStructure::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
            ],
            big_cell(),
        )
        .unwrap();
        let filt = build_rips(&s, 2.0, Convention::Radius).unwrap();
        let mut edges = values_of_dim(&filt, 1);
        edges.sort_by(f64::total_cmp);
        assert_eq!(edges.len(), 6);
        for v in &edges[..4] {
            assert!((v - 0.5).abs() < 1e-12);
        }
        let diag = 2.0_f64.sqrt() / 2.0;
        for v in &edges[4..] {
            assert!((v - diag).abs() < 1e-12);
        }
        let tris = values_of_dim(&filt, 2);
        assert_eq!(tris.len(), 4);
        for v in &tris {
            assert!((v - diag).abs() < 1e-12);
        }
    }

    #[test]
    fn equilateral_triangle_fills_at_edge_value() {
        let h = 3.0_f64.sqrt() / 2.0;
        let s = PeriodicStructure::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]],
            big_cell(),
        )
        .unwrap();
        let filt = build_rips(&s, 2.0, Convention::Radius).unwrap();
        let edges = values_of_dim(&filt, 1);
        assert_eq!(edges.len(), 3);
        for v in &edges {
            assert!((v - 0.5).abs() < 1e-12);
        }
        let tris = values_of_dim(&filt, 2);
        assert_eq!(tris.len(), 1);
        assert!((tris[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn squared_convention_squares_the_radius() {
        let s =
            PeriodicStructure::new(vec![[0.0; 3], [2.0, 0.0, 0.0]], big_cell()).unwrap();
        let filt = build_rips(&s, 3.0, Convention::SquaredRadius).unwrap();
        assert_eq!(values_of_dim(&filt, 1), vec![1.0]);
        let s2 = PeriodicStructure::new(vec![[0.0; 3], [3.0, 0.0, 0.0]], big_cell()).unwrap();
        let filt2 = build_rips(&s2, 4.0, Convention::SquaredRadius).unwrap();
        assert_eq!(values_of_dim(&filt2, 1), vec![2.25]);
    }

    #[test]
    fn faces_precede_cofaces() {
        let s = PeriodicStructure::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.1, 0.0, 0.0],
                [0.4, 1.0, 0.0],
                [1.6, 1.2, 0.3],
            ],
            big_cell(),
        )
        .unwrap();
        let filt = build_rips(&s, 3.0, Convention::SquaredRadius).unwrap();
        let mut seen = std::collections::HashSet::new();
        for (simplex, value) in filt.simplices() {
            for face in simplex.facets() {
                assert!(seen.contains(&face), "face {face} after coface {simplex}");
            }
            assert!(*value >= 0.0);
            seen.insert(*simplex);
        }
    }

    #[test]
    fn cutoff_at_half_cell_is_rejected() {
        let s = PeriodicStructure::new(vec![[0.0; 3], [1.0; 3]], [8.0, 6.0, 8.0]).unwrap();
        let err = build_rips(&s, 3.0, Convention::Radius).unwrap_err();
        assert!(matches!(
            err,
            GeometryError::CutoffExceedsCell { axis: 1, .. }
        ));
    }

    #[test]
    fn edge_count_bound_trivial_cases() {
        let s = PeriodicStructure::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], big_cell()).unwrap();
        assert_eq!(edge_count_bound(&s, 2.0), 1);
        assert_eq!(edge_count_bound(&s, 1e-9), 0);
    }

    #[test]
    fn edge_count_bound_matches_build_rips() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let cell = [12.0, 12.0, 12.0];
        let positions: Vec<[f64; 3]> = (0..216)
            .map(|_| {
                [
                    rng.random::<f64>() * cell[0],
                    rng.random::<f64>() * cell[1],
                    rng.random::<f64>() * cell[2],
                ]
            })
            .collect();
        let s = PeriodicStructure::new(positions, cell).unwrap();
        let filt = build_rips(&s, 3.5, Convention::SquaredRadius).unwrap();
        let emitted = filt
            .simplices()
            .iter()
            .filter(|(s, _)| s.dim() == 1)
            .count();
        assert_eq!(edge_count_bound(&s, 3.5), emitted);
    }

    #[test]
    fn duplicate_atoms_produce_zero_value_edge() {
        let s = PeriodicStructure::new(vec![[1.0; 3], [1.0; 3]], big_cell()).unwrap();
        let filt = build_rips(&s, 1.0, Convention::Radius).unwrap();
        assert_eq!(values_of_dim(&filt, 1), vec![0.0]);
        // vertices still come first at the shared value 0
        assert_eq!(filt.simplices()[0].0.dim(), 0);
        assert_eq!(filt.simplices()[1].0.dim(), 0);
    }
}
