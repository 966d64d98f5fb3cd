//! Periodic point clouds and the minimum-image metric.
//!
//! Cells are orthorhombic: three positive edge lengths with axes along x, y,
//! z. Distances are measured on the flat torus, i.e. to the nearest periodic
//! image of the other point. For an orthorhombic cell the per-axis rounding
//! in [`minimum_image_displacement`] is exact, so no image enumeration is
//! needed.
//!
//! Any distance consumed downstream (Rips cutoffs, potential cutoffs) must
//! stay below half the shortest cell edge; [`neighbor_pairs`] enforces that
//! and is the single neighbor-search entry point for the filtration and the
//! data generator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cartesian 3-vector (Å).
pub type Vec3 = [f64; 3];

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("atom {atom} has a non-finite coordinate ({x}, {y}, {z})")]
    NonFiniteCoordinate { atom: usize, x: f64, y: f64, z: f64 },
    #[error("cell lengths must be strictly positive and finite, got ({0}, {1}, {2})")]
    InvalidCell(f64, f64, f64),
    #[error("structure must contain at least one atom")]
    EmptyStructure,
    #[error("species count {species} does not match atom count {atoms}")]
    SpeciesMismatch { species: usize, atoms: usize },
    #[error("energy label must be finite, got {0}")]
    NonFiniteLabel(f64),
    #[error("bond angle undefined: zero-length displacement at the vertex")]
    DegenerateAngle,
    #[error(
        "cutoff {cutoff} must be below half the cell length along axis {axis} \
         (cell edge {cell}, half {half})"
    )]
    CutoffExceedsCell {
        cutoff: f64,
        axis: usize,
        cell: f64,
        half: f64,
    },
    #[error("cutoff must be positive and finite, got {0}")]
    InvalidCutoff(f64),
}

fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

/// Minimum-image displacement `to - from` on the torus defined by `cell`.
pub fn minimum_image_displacement(from: Vec3, to: Vec3, cell: Vec3) -> Vec3 {
    let mut d = [to[0] - from[0], to[1] - from[1], to[2] - from[2]];
    for axis in 0..3 {
        d[axis] -= cell[axis] * (d[axis] / cell[axis]).round();
    }
    d
}

/// Euclidean distance to the nearest periodic image of `q`.
///
/// Total function; callers guarantee positive cell lengths. The result never
/// exceeds half the cell diagonal.
pub fn minimum_image_distance(p: Vec3, q: Vec3, cell: Vec3) -> f64 {
    norm3(minimum_image_displacement(p, q, cell))
}

/// Angle (degrees, in [0, 180]) at `vertex` between the minimum-image
/// displacements toward `a` and `b`.
pub fn bond_angle(a: Vec3, vertex: Vec3, b: Vec3, cell: Vec3) -> Result<f64, GeometryError> {
    let u = minimum_image_displacement(vertex, a, cell);
    let v = minimum_image_displacement(vertex, b, cell);
    let nu = norm3(u);
    let nv = norm3(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(GeometryError::DegenerateAngle);
    }
    let cos = (dot3(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

fn wrap_coord(x: f64, cell: f64) -> f64 {
    let w = x.rem_euclid(cell);
    // rem_euclid can round up to exactly `cell` for tiny negative inputs
    if w >= cell {
        0.0
    } else {
        w
    }
}

/// A periodic atomic configuration: wrapped Cartesian positions, an
/// orthorhombic cell, per-atom species labels and an optional energy-per-atom
/// label.
///
/// Construction wraps all coordinates into `[0, cell)` per axis; wrapping
/// never changes minimum-image distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicStructure {
    positions: Vec<Vec3>,
    cell: Vec3,
    species: Vec<String>,
    label: Option<f64>,
}

impl PeriodicStructure {
    /// Single-species ("C") structure.
    pub fn new(positions: Vec<Vec3>, cell: Vec3) -> Result<Self, GeometryError> {
        let species = vec!["C".to_string(); positions.len()];
        Self::with_species(positions, cell, species)
    }

    pub fn with_species(
        mut positions: Vec<Vec3>,
        cell: Vec3,
        species: Vec<String>,
    ) -> Result<Self, GeometryError> {
        if cell.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(GeometryError::InvalidCell(cell[0], cell[1], cell[2]));
        }
        if positions.is_empty() {
            return Err(GeometryError::EmptyStructure);
        }
        if species.len() != positions.len() {
            return Err(GeometryError::SpeciesMismatch {
                species: species.len(),
                atoms: positions.len(),
            });
        }
        for (atom, p) in positions.iter_mut().enumerate() {
            if p.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFiniteCoordinate {
                    atom,
                    x: p[0],
                    y: p[1],
                    z: p[2],
                });
            }
            for axis in 0..3 {
                p[axis] = wrap_coord(p[axis], cell[axis]);
            }
        }
        Ok(Self {
            positions,
            cell,
            species,
            label: None,
        })
    }

    pub fn with_label(mut self, label: f64) -> Result<Self, GeometryError> {
        self.set_label(label)?;
        Ok(self)
    }

    pub fn set_label(&mut self, label: f64) -> Result<(), GeometryError> {
        if !label.is_finite() {
            return Err(GeometryError::NonFiniteLabel(label));
        }
        self.label = Some(label);
        Ok(())
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn cell(&self) -> Vec3 {
        self.cell
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn label(&self) -> Option<f64> {
        self.label
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one atom by construction
    }

    pub fn min_cell_edge(&self) -> f64 {
        self.cell[0].min(self.cell[1]).min(self.cell[2])
    }

    /// Minimum-image distance between atoms `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        minimum_image_distance(self.positions[i], self.positions[j], self.cell)
    }

    /// Minimum-image displacement from atom `i` to atom `j`.
    pub fn displacement(&self, i: usize, j: usize) -> Vec3 {
        minimum_image_displacement(self.positions[i], self.positions[j], self.cell)
    }

    /// Dense pairwise distance matrix.
    pub fn metric(&self) -> MetricView {
        let n = self.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.distance(i, j);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        MetricView { n, dist }
    }

    /// Rigid translation; coordinates re-wrap, distances are unchanged.
    pub fn translated(&self, shift: Vec3) -> Self {
        let mut out = self.clone();
        for p in &mut out.positions {
            for axis in 0..3 {
                p[axis] = wrap_coord(p[axis] + shift[axis], out.cell[axis]);
            }
        }
        out
    }

    /// Relabel atoms: new atom `k` is old atom `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.len(), "permutation length mismatch");
        let positions = perm.iter().map(|&i| self.positions[i]).collect();
        let species = perm.iter().map(|&i| self.species[i].clone()).collect();
        Self {
            positions,
            cell: self.cell,
            species,
            label: self.label,
        }
    }

    /// Periodic replication; the per-atom label is intensive and carries over.
    pub fn supercell(&self, reps: [usize; 3]) -> Self {
        assert!(reps.iter().all(|&r| r >= 1), "replication counts must be >= 1");
        let mut positions = Vec::with_capacity(self.len() * reps[0] * reps[1] * reps[2]);
        let mut species = Vec::with_capacity(positions.capacity());
        for ix in 0..reps[0] {
            for iy in 0..reps[1] {
                for iz in 0..reps[2] {
                    let shift = [
                        ix as f64 * self.cell[0],
                        iy as f64 * self.cell[1],
                        iz as f64 * self.cell[2],
                    ];
                    for (p, s) in self.positions.iter().zip(&self.species) {
                        positions.push([p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]]);
                        species.push(s.clone());
                    }
                }
            }
        }
        let cell = [
            self.cell[0] * reps[0] as f64,
            self.cell[1] * reps[1] as f64,
            self.cell[2] * reps[2] as f64,
        ];
        Self::with_species(positions, cell, species)
            .expect("supercell of a valid structure is valid")
            .with_optional_label(self.label)
    }

    fn with_optional_label(mut self, label: Option<f64>) -> Self {
        self.label = label;
        self
    }
}

/// Symmetric pairwise-distance view with `d(i,i) = 0`.
#[derive(Debug, Clone)]
pub struct MetricView {
    n: usize,
    dist: Vec<f64>,
}

impl MetricView {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }
}

pub(crate) fn validate_cutoff(cell: Vec3, cutoff: f64) -> Result<(), GeometryError> {
    if !cutoff.is_finite() || cutoff <= 0.0 {
        return Err(GeometryError::InvalidCutoff(cutoff));
    }
    for axis in 0..3 {
        let half = cell[axis] / 2.0;
        if cutoff >= half {
            return Err(GeometryError::CutoffExceedsCell {
                cutoff,
                axis,
                cell: cell[axis],
                half,
            });
        }
    }
    Ok(())
}

/// All unordered pairs `(i, j, d)` with minimum-image distance `d <= cutoff`,
/// sorted by `(i, j)`.
///
/// Uses cell lists (bin edge >= cutoff) when the cell is large enough for at
/// least 3 bins per axis, otherwise a direct O(n²) sweep. Errors when
/// `cutoff >= min(cell)/2`, the minimum-image validity bound.
pub fn neighbor_pairs(
    structure: &PeriodicStructure,
    cutoff: f64,
) -> Result<Vec<(u32, u32, f64)>, GeometryError> {
    let cell = structure.cell();
    validate_cutoff(cell, cutoff)?;
    let n = structure.len();
    let nbins = [
        (cell[0] / cutoff).floor() as usize,
        (cell[1] / cutoff).floor() as usize,
        (cell[2] / cutoff).floor() as usize,
    ];
    let mut pairs = if n < 100 || nbins.iter().any(|&b| b < 3) {
        brute_pairs(structure, cutoff)
    } else {
        cell_list_pairs(structure, cutoff, nbins)
    };
    pairs.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(pairs)
}

fn brute_pairs(structure: &PeriodicStructure, cutoff: f64) -> Vec<(u32, u32, f64)> {
    let n = structure.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = structure.distance(i, j);
            if d <= cutoff {
                pairs.push((i as u32, j as u32, d));
            }
        }
    }
    pairs
}

fn cell_list_pairs(
    structure: &PeriodicStructure,
    cutoff: f64,
    nbins: [usize; 3],
) -> Vec<(u32, u32, f64)> {
    let cell = structure.cell();
    let widths = [
        cell[0] / nbins[0] as f64,
        cell[1] / nbins[1] as f64,
        cell[2] / nbins[2] as f64,
    ];
    let bin_of = |p: Vec3| -> [usize; 3] {
        let mut b = [0usize; 3];
        for axis in 0..3 {
            b[axis] = ((p[axis] / widths[axis]).floor() as usize).min(nbins[axis] - 1);
        }
        b
    };
    let flat = |b: [usize; 3]| b[0] * nbins[1] * nbins[2] + b[1] * nbins[2] + b[2];
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); nbins[0] * nbins[1] * nbins[2]];
    for (i, &p) in structure.positions().iter().enumerate() {
        bins[flat(bin_of(p))].push(i as u32);
    }
    let mut pairs = Vec::new();
    for (i, &p) in structure.positions().iter().enumerate() {
        let b = bin_of(p);
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                for dz in -1i64..=1 {
                    let nb = [
                        (b[0] as i64 + dx).rem_euclid(nbins[0] as i64) as usize,
                        (b[1] as i64 + dy).rem_euclid(nbins[1] as i64) as usize,
                        (b[2] as i64 + dz).rem_euclid(nbins[2] as i64) as usize,
                    ];
                    for &j in &bins[flat(nb)] {
                        if (j as usize) <= i {
                            continue;
                        }
                        let d = structure.distance(i, j as usize);
                        if d <= cutoff {
                            pairs.push((i as u32, j, d));
                        }
                    }
                }
            }
        }
    }
    pairs
}
