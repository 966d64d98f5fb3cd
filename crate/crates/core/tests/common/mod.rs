//! Independent oracles shared by the property and acceptance suites.
//!
//! Nothing here reuses the production reduction/metric code paths: the
//! naive reduction works on dense boolean columns with no clearing, the
//! MST oracle is Kruskal over a direct O(n²) distance sweep, Betti numbers
//! come from GF(2) Gaussian elimination, and the minimum image is found by
//! enumerating all 27 neighbor offsets.

use std::collections::HashMap;

use rand::Rng;

use rand_chacha::ChaCha8Rng;

use phdesc::filtration::Filtration;
use phdesc::geometry::{PeriodicStructure, Vec3};

/// Minimum-image distance by brute enumeration of the 27 image offsets.
/// Valid for points already wrapped into the cell.
pub fn brute_min_image(p: Vec3, q: Vec3, cell: Vec3) -> f64 {
    let mut best = f64::INFINITY;
    for ox in -1i64..=1 {
        for oy in -1i64..=1 {
            for oz in -1i64..=1 {
                let dx = q[0] + ox as f64 * cell[0] - p[0];
                let dy = q[1] + oy as f64 * cell[1] - p[1];
                let dz = q[2] + oz as f64 * cell[2] - p[2];
                best = best.min((dx * dx + dy * dy + dz * dz).sqrt());
            }
        }
    }
    best
}

pub fn random_structure(rng: &mut ChaCha8Rng, n: usize, cell: Vec3) -> PeriodicStructure {
    let positions: Vec<Vec3> = (0..n)
        .map(|_| {
            [
                rng.random::<f64>() * cell[0],
                rng.random::<f64>() * cell[1],
                rng.random::<f64>() * cell[2],
            ]
        })
        .collect();
    PeriodicStructure::new(positions, cell).expect("random structure is valid")
}

/// Left-to-right dense GF(2) reduction with no clearing; returns the full
/// (dim, birth, death) multiset including zero-persistence and essential
/// pairs of dimensions 0 and 1.
pub fn naive_reduce(filtration: &Filtration) -> Vec<(u8, f64, f64)> {
    let simplices = filtration.simplices();
    let m = simplices.len();
    let mut index: HashMap<Vec<u32>, usize> = HashMap::with_capacity(m);
    for (pos, (s, _)) in simplices.iter().enumerate() {
        index.insert(s.vertices().to_vec(), pos);
    }
    let mut columns: Vec<Vec<bool>> = Vec::with_capacity(m);
    for (s, _) in simplices {
        let mut col = vec![false; m];
        let vs = s.vertices();
        match s.dim() {
            0 => {}
            1 => {
                col[index[&vec![vs[0]]]] = true;
                col[index[&vec![vs[1]]]] = true;
            }
            _ => {
                for face in [
                    vec![vs[0], vs[1]],
                    vec![vs[0], vs[2]],
                    vec![vs[1], vs[2]],
                ] {
                    col[index[&face]] = true;
                }
            }
        }
        columns.push(col);
    }
    let low = |col: &[bool]| col.iter().rposition(|&b| b);
    let mut low_owner: HashMap<usize, usize> = HashMap::new();
    let mut paired = vec![false; m];
    let mut pairs: Vec<(u8, f64, f64)> = Vec::new();
    for j in 0..m {
        while let Some(l) = low(&columns[j]) {
            let Some(&owner) = low_owner.get(&l) else {
                break;
            };
            let other = columns[owner].clone();
            for (a, b) in columns[j].iter_mut().zip(&other) {
                *a ^= b;
            }
        }
        if let Some(l) = low(&columns[j]) {
            low_owner.insert(l, j);
            paired[l] = true;
            paired[j] = true;
            pairs.push((
                simplices[l].0.dim() as u8,
                simplices[l].1,
                simplices[j].1,
            ));
        }
    }
    for j in 0..m {
        if !paired[j] && simplices[j].0.dim() <= 1 {
            pairs.push((simplices[j].0.dim() as u8, simplices[j].1, f64::INFINITY));
        }
    }
    pairs
}

/// Sort key for exact (bitwise) pair-multiset comparison.
pub fn pair_key(p: &(u8, f64, f64)) -> (u8, u64, u64) {
    (p.0, p.1.to_bits(), p.2.to_bits())
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Kruskal spanning-forest edge distances over pairs within the cutoff,
/// sorted ascending. These are exactly the H0 merge distances.
pub fn kruskal_forest_distances(structure: &PeriodicStructure, cutoff: f64) -> Vec<f64> {
    let n = structure.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = brute_min_image(structure.positions()[i], structure.positions()[j], structure.cell());
            if d <= cutoff {
                edges.push((d, i, j));
            }
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| (a.1, a.2).cmp(&(b.1, b.2))));
    let mut set = DisjointSet::new(n);
    let mut chosen = Vec::new();
    for (d, i, j) in edges {
        if set.union(i, j) {
            chosen.push(d);
        }
    }
    chosen.sort_by(f64::total_cmp);
    chosen
}

/// GF(2) rank by Gaussian elimination over bit-packed columns.
fn gf2_rank(mut columns: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let mut pivot_cols: Vec<(usize, Vec<u64>)> = Vec::new();
    'next: for col in columns.iter_mut() {
        loop {
            let Some(high) = highest_bit(col) else {
                continue 'next;
            };
            if let Some((_, pivot)) = pivot_cols.iter().find(|(h, _)| *h == high) {
                for (a, b) in col.iter_mut().zip(pivot) {
                    *a ^= b;
                }
            } else {
                pivot_cols.push((high, col.clone()));
                rank += 1;
                continue 'next;
            }
        }
    }
    rank
}

fn highest_bit(words: &[u64]) -> Option<usize> {
    for (w, &word) in words.iter().enumerate().rev() {
        if word != 0 {
            return Some(w * 64 + 63 - word.leading_zeros() as usize);
        }
    }
    None
}

/// Betti numbers (b0, b1) of the complex at scale `t`, from boundary-matrix
/// ranks: b0 = V − rank ∂1, b1 = E − rank ∂1 − rank ∂2.
pub fn betti_rank_oracle(filtration: &Filtration, t: f64) -> (usize, usize) {
    let mut vertex_ids: Vec<u32> = Vec::new();
    let mut edge_index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut edges: Vec<Vec<u32>> = Vec::new();
    let mut triangles: Vec<Vec<u32>> = Vec::new();
    for (s, value) in filtration.simplices() {
        if *value > t {
            break; // sorted by value
        }
        match s.dim() {
            0 => vertex_ids.push(s.vertices()[0]),
            1 => {
                edge_index.insert(s.vertices().to_vec(), edges.len());
                edges.push(s.vertices().to_vec());
            }
            _ => triangles.push(s.vertices().to_vec()),
        }
    }
    let vertex_pos: HashMap<u32, usize> = vertex_ids
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let words = |len: usize| len.div_ceil(64);
    let d1: Vec<Vec<u64>> = edges
        .iter()
        .map(|e| {
            let mut col = vec![0u64; words(vertex_ids.len())];
            for &v in e {
                let row = vertex_pos[&v];
                col[row / 64] |= 1 << (row % 64);
            }
            col
        })
        .collect();
    let d2: Vec<Vec<u64>> = triangles
        .iter()
        .map(|tri| {
            let mut col = vec![0u64; words(edges.len())];
            for face in [
                vec![tri[0], tri[1]],
                vec![tri[0], tri[2]],
                vec![tri[1], tri[2]],
            ] {
                let row = edge_index[&face];
                col[row / 64] |= 1 << (row % 64);
            }
            col
        })
        .collect();
    let rank1 = gf2_rank(d1);
    let rank2 = gf2_rank(d2);
    (
        vertex_ids.len() - rank1,
        edges.len() - rank1 - rank2,
    )
}

/// Deterministic shuffled permutation of 0..n.
pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}
