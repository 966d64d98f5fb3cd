//! Inverse analysis: from Ridge coefficients back to local geometry.
//!
//! The weight vector reshapes onto the descriptor mesh as a coefficient map;
//! bins above/below the thresholds form the high/low-energy regions. Every
//! finite H1 pair whose (birth, death) bin falls in a region contributes its
//! representative cycle, and the cycle's bond lengths and vertex angles are
//! aggregated (appended, never averaged) into per-region histograms.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::GridSpec;
use crate::filtration::Convention;
use crate::geometry::{bond_angle, PeriodicStructure};
use crate::model::RidgeModel;
use crate::persistence::{CycleExtraction, PersistenceDiagram, PersistenceError};

/// Coefficient threshold defaults for the high/low energy regions.
pub const DEFAULT_HIGH_THRESHOLD: f64 = 0.003;
pub const DEFAULT_LOW_THRESHOLD: f64 = -0.0045;

#[derive(Debug, Error)]
pub enum InverseError {
    #[error("diagram was computed with convention {got}, the model expects {expected}")]
    ConventionMismatch {
        expected: Convention,
        got: Convention,
    },
    #[error("diagram has {diagram} vertices but the structure has {structure} atoms")]
    StructureMismatch { diagram: usize, structure: usize },
    #[error("histogram bin width must be positive, got {0}")]
    NonPositiveBinWidth(f64),
    #[error("report has no cycles in either region")]
    EmptyReport,
    #[error(transparent)]
    Persistence(#[from] PersistenceError),
}

/// Ridge weights reshaped onto the (birth row, death column) mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMap {
    pub spec: GridSpec,
    pub grid: Vec<f64>,
}

impl CoefficientMap {
    pub fn value_at(&self, row: u32, col: u32) -> f64 {
        self.grid[row as usize * self.spec.bins as usize + col as usize]
    }
}

/// Reshape the model's flat weight vector onto the descriptor mesh. Flat
/// index i maps to (i / bins, i % bins) — the same layout `histogram` uses.
pub fn coefficient_map(model: &RidgeModel) -> CoefficientMap {
    CoefficientMap {
        spec: model.spec,
        grid: model.weights.clone(),
    }
}

/// Bins with coefficient above `hi_threshold` (high) or below `lo_threshold`
/// (low); disjoint by construction. Callers validate `hi > 0 > lo`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionSelection {
    pub high: BTreeSet<(u32, u32)>,
    pub low: BTreeSet<(u32, u32)>,
}

pub fn select_regions(map: &CoefficientMap, hi_threshold: f64, lo_threshold: f64) -> RegionSelection {
    let bins = map.spec.bins;
    let mut selection = RegionSelection::default();
    for row in 0..bins {
        for col in 0..bins {
            let v = map.value_at(row, col);
            if v > hi_threshold {
                selection.high.insert((row, col));
            } else if v < lo_threshold {
                selection.low.insert((row, col));
            }
        }
    }
    selection
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    High,
    Low,
}

/// One extracted cycle with its geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleRecord {
    pub structure_id: String,
    pub region: Region,
    pub birth: f64,
    pub death: f64,
    pub bin: (u32, u32),
    pub edges: Vec<(u32, u32)>,
    pub bond_lengths: Vec<f64>,
    pub angles: Vec<f64>,
    pub extraction: CycleExtraction,
}

/// Multiset of cycle records; aggregation across structures appends.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CycleReport {
    pub records: Vec<CycleRecord>,
}

impl CycleReport {
    pub fn merge(&mut self, other: CycleReport) {
        self.records.extend(other.records);
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Atoms touched by cycles of a region.
    pub fn atoms_in_region(&self, region: Region) -> BTreeSet<u32> {
        let mut atoms = BTreeSet::new();
        for record in self.records.iter().filter(|r| r.region == region) {
            for &(u, v) in &record.edges {
                atoms.insert(u);
                atoms.insert(v);
            }
        }
        atoms
    }
}

/// Extract the representative cycle of every finite H1 pair whose bin falls
/// in a selected region, and measure its bond lengths and the angle at each
/// cycle vertex between its two incident cycle edges.
pub fn assign_cycles(
    structure: &PeriodicStructure,
    diagram: &PersistenceDiagram,
    regions: &RegionSelection,
    spec: &GridSpec,
    convention: Convention,
    tighten_budget: usize,
) -> Result<CycleReport, InverseError> {
    if diagram.convention() != convention {
        return Err(InverseError::ConventionMismatch {
            expected: convention,
            got: diagram.convention(),
        });
    }
    if diagram.n_vertices() != structure.len() {
        return Err(InverseError::StructureMismatch {
            diagram: diagram.n_vertices(),
            structure: structure.len(),
        });
    }
    let structure_id = diagram.structure_id().unwrap_or("unknown").to_string();
    let mut report = CycleReport::default();
    for pair in diagram.finite_positive_pairs() {
        if pair.dim != 1 {
            continue;
        }
        let Some(bin) = spec.bin_of(pair.birth, pair.death) else {
            continue;
        };
        let region = if regions.high.contains(&bin) {
            Region::High
        } else if regions.low.contains(&bin) {
            Region::Low
        } else {
            continue;
        };
        let (edges, extraction) = diagram.representative_cycle_with_method(pair, tighten_budget)?;
        let cell = structure.cell();
        let positions = structure.positions();
        let bond_lengths: Vec<f64> = edges
            .iter()
            .map(|&(u, v)| structure.distance(u as usize, v as usize))
            .collect();
        // angles only at vertices with exactly two incident cycle edges
        let mut incident: HashMap<u32, Vec<u32>> = HashMap::new();
        for &(u, v) in &edges {
            incident.entry(u).or_default().push(v);
            incident.entry(v).or_default().push(u);
        }
        let mut vertices: Vec<u32> = incident.keys().copied().collect();
        vertices.sort_unstable();
        let mut angles = Vec::new();
        for vertex in vertices {
            let neighbors = &incident[&vertex];
            if neighbors.len() != 2 {
                continue;
            }
            if let Ok(angle) = bond_angle(
                positions[neighbors[0] as usize],
                positions[vertex as usize],
                positions[neighbors[1] as usize],
                cell,
            ) {
                angles.push(angle);
            }
        }
        report.records.push(CycleRecord {
            structure_id: structure_id.clone(),
            region,
            birth: pair.birth,
            death: pair.death,
            bin,
            edges,
            bond_lengths,
            angles,
            extraction,
        });
    }
    Ok(report)
}

/// Count histogram with bins `[k·width, (k+1)·width)` starting at 0. Values
/// within 1e-9·width of a bin boundary count toward the upper bin, so that
/// decimal widths such as 0.1 bin decimal values intuitively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram1d {
    pub width: f64,
    pub counts: Vec<u64>,
    pub empty: bool,
}

impl Histogram1d {
    pub fn from_values(values: &[f64], width: f64) -> Self {
        if values.is_empty() {
            return Self {
                width,
                counts: Vec::new(),
                empty: true,
            };
        }
        let mut counts = Vec::new();
        for &v in values {
            let idx = (v / width + 1e-9).floor().max(0.0) as usize;
            if idx >= counts.len() {
                counts.resize(idx + 1, 0);
            }
            counts[idx] += 1;
        }
        Self {
            width,
            counts,
            empty: false,
        }
    }

    /// Left edge of the fullest bin.
    pub fn peak_position(&self) -> Option<f64> {
        self.counts
            .iter()
            .enumerate()
            .max_by_key(|(_, &c)| c)
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i as f64 * self.width)
    }
}

/// Bond-length and angle histograms for both regions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryHistograms {
    pub bond_high: Histogram1d,
    pub bond_low: Histogram1d,
    pub angle_high: Histogram1d,
    pub angle_low: Histogram1d,
}

pub fn geometry_histograms(
    report: &CycleReport,
    bond_bin_width: f64,
    angle_bin_width: f64,
) -> Result<GeometryHistograms, InverseError> {
    if !(bond_bin_width > 0.0) {
        return Err(InverseError::NonPositiveBinWidth(bond_bin_width));
    }
    if !(angle_bin_width > 0.0) {
        return Err(InverseError::NonPositiveBinWidth(angle_bin_width));
    }
    if report.is_empty() {
        return Err(InverseError::EmptyReport);
    }
    let collect = |region: Region, angles: bool| -> Vec<f64> {
        report
            .records
            .iter()
            .filter(|r| r.region == region)
            .flat_map(|r| if angles { &r.angles } else { &r.bond_lengths })
            .copied()
            .collect()
    };
    Ok(GeometryHistograms {
        bond_high: Histogram1d::from_values(&collect(Region::High, false), bond_bin_width),
        bond_low: Histogram1d::from_values(&collect(Region::Low, false), bond_bin_width),
        angle_high: Histogram1d::from_values(&collect(Region::High, true), angle_bin_width),
        angle_low: Histogram1d::from_values(&collect(Region::Low, true), angle_bin_width),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{fit_standardization, histogram, DimSet};
    use crate::filtration::build_rips;
    use crate::model::RidgeModel;
    use crate::persistence::{reduce, DEFAULT_TIGHTEN_BUDGET};

    fn toy_model(bins: u32, weights: Vec<f64>) -> RidgeModel {
        let spec = GridSpec::new(bins, 0.0, 8.0).unwrap();
        let g = vec![1.0 / spec.cells() as f64; spec.cells()];
        let h = crate::descriptor::DescriptorHistogram::from_normalized_grid(spec, g).unwrap();
        let mut g2 = vec![0.0; spec.cells()];
        g2[0] = 1.0;
        let h2 = crate::descriptor::DescriptorHistogram::from_normalized_grid(spec, g2).unwrap();
        let stats = fit_standardization(&[h, h2]).unwrap();
        RidgeModel {
            spec,
            convention: Convention::SquaredRadius,
            cutoff: 3.5,
            lambda: 200.0,
            seed: 0,
            split: 0.8,
            intercept: 0.0,
            weights,
            stats,
        }
    }

    #[test]
    fn zero_weights_give_zero_map_and_empty_regions() {
        let model = toy_model(4, vec![0.0; 16]);
        let map = coefficient_map(&model);
        assert!(map.grid.iter().all(|&v| v == 0.0));
        let sel = select_regions(&map, DEFAULT_HIGH_THRESHOLD, DEFAULT_LOW_THRESHOLD);
        assert!(sel.high.is_empty());
        assert!(sel.low.is_empty());
    }

    #[test]
    fn flat_index_layout_is_row_major() {
        let mut weights = vec![0.0; 16];
        weights[7] = 0.01; // (7 / 4, 7 % 4) = (1, 3)
        let model = toy_model(4, weights);
        let map = coefficient_map(&model);
        assert_eq!(map.value_at(1, 3), 0.01);
        let sel = select_regions(&map, 0.003, -0.0045);
        assert_eq!(sel.high.iter().copied().collect::<Vec<_>>(), vec![(1, 3)]);
    }

    #[test]
    fn map_round_trips_through_flattening() {
        let weights: Vec<f64> = (0..16).map(|i| i as f64 * 0.1 - 0.8).collect();
        let model = toy_model(4, weights.clone());
        let map = coefficient_map(&model);
        let flattened: Vec<f64> = (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .map(|(r, c)| map.value_at(r, c))
            .collect();
        assert_eq!(flattened, weights);
    }

    #[test]
    fn threshold_scaling_selects_identical_bins() {
        let weights: Vec<f64> = (0..16).map(|i| (i as f64 - 8.0) * 1e-3).collect();
        let model = toy_model(4, weights.clone());
        let map = coefficient_map(&model);
        let sel1 = select_regions(&map, 0.003, -0.0045);
        let scaled = CoefficientMap {
            spec: map.spec,
            grid: weights.iter().map(|w| w * 7.0).collect(),
        };
        let sel2 = select_regions(&scaled, 0.003 * 7.0, -0.0045 * 7.0);
        assert_eq!(sel1, sel2);
    }

    #[test]
    fn hexagon_low_region_geometry() {
        let r = 1.5;
        let positions: Vec<[f64; 3]> = (0..6)
            .map(|k| {
                let a = std::f64::consts::PI / 3.0 * k as f64;
                [r * a.cos() + 10.0, r * a.sin() + 10.0, 10.0]
            })
            .collect();
        let s = PeriodicStructure::new(positions, [50.0, 50.0, 50.0]).unwrap();
        let diagram = reduce(&build_rips(&s, 4.0, Convention::SquaredRadius).unwrap())
            .unwrap()
            .with_structure_id("hex");
        let spec = GridSpec::default();
        // force the main hexagon pair's bin into the low set
        let pair = diagram
            .finite_positive_pairs()
            .filter(|p| p.dim == 1)
            .max_by(|a, b| a.persistence().total_cmp(&b.persistence()))
            .unwrap()
            .clone();
        let bin = spec.bin_of(pair.birth, pair.death).unwrap();
        let mut regions = RegionSelection::default();
        regions.low.insert(bin);
        let report = assign_cycles(
            &s,
            &diagram,
            &regions,
            &spec,
            Convention::SquaredRadius,
            DEFAULT_TIGHTEN_BUDGET,
        )
        .unwrap();
        let low: Vec<_> = report
            .records
            .iter()
            .filter(|r| r.region == Region::Low)
            .collect();
        assert_eq!(low.len(), 1);
        assert_eq!(low[0].bond_lengths.len(), 6);
        for b in &low[0].bond_lengths {
            assert!((b - 1.5).abs() < 1e-9);
        }
        assert_eq!(low[0].angles.len(), 6);
        for a in &low[0].angles {
            assert!((a - 120.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_regions_give_empty_report() {
        let s = PeriodicStructure::new(
            vec![[0.0; 3], [1.5, 0.0, 0.0]],
            [50.0, 50.0, 50.0],
        )
        .unwrap();
        let diagram = reduce(&build_rips(&s, 3.0, Convention::SquaredRadius).unwrap()).unwrap();
        let report = assign_cycles(
            &s,
            &diagram,
            &RegionSelection::default(),
            &GridSpec::default(),
            Convention::SquaredRadius,
            DEFAULT_TIGHTEN_BUDGET,
        )
        .unwrap();
        assert!(report.is_empty());
        assert!(matches!(
            geometry_histograms(&report, 0.05, 5.0),
            Err(InverseError::EmptyReport)
        ));
    }

    #[test]
    fn convention_mismatch_is_a_configuration_error() {
        let s = PeriodicStructure::new(
            vec![[0.0; 3], [1.5, 0.0, 0.0]],
            [50.0, 50.0, 50.0],
        )
        .unwrap();
        let diagram = reduce(&build_rips(&s, 3.0, Convention::Radius).unwrap()).unwrap();
        let err = assign_cycles(
            &s,
            &diagram,
            &RegionSelection::default(),
            &GridSpec::default(),
            Convention::SquaredRadius,
            DEFAULT_TIGHTEN_BUDGET,
        )
        .unwrap_err();
        assert!(matches!(err, InverseError::ConventionMismatch { .. }));
    }

    #[test]
    fn bond_histogram_bins_decimal_values() {
        let h = Histogram1d::from_values(&[1.5, 1.5, 1.6], 0.1);
        assert_eq!(h.counts[15], 2);
        assert_eq!(h.counts[16], 1);
        let peak = h.peak_position().unwrap();
        assert!((peak - 1.5).abs() < 1e-12);
    }

    #[test]
    fn zero_width_is_rejected() {
        let mut report = CycleReport::default();
        report.records.push(CycleRecord {
            structure_id: "x".into(),
            region: Region::Low,
            birth: 0.5,
            death: 1.0,
            bin: (0, 0),
            edges: vec![(0, 1)],
            bond_lengths: vec![1.0],
            angles: vec![],
            extraction: CycleExtraction::Tightened,
        });
        assert!(matches!(
            geometry_histograms(&report, 0.0, 5.0),
            Err(InverseError::NonPositiveBinWidth(_))
        ));
    }

    #[test]
    fn empty_region_yields_flagged_zero_histogram() {
        let mut report = CycleReport::default();
        report.records.push(CycleRecord {
            structure_id: "x".into(),
            region: Region::Low,
            birth: 0.5,
            death: 1.0,
            bin: (0, 0),
            edges: vec![(0, 1)],
            bond_lengths: vec![1.52],
            angles: vec![120.0],
            extraction: CycleExtraction::Tightened,
        });
        let h = geometry_histograms(&report, 0.05, 5.0).unwrap();
        assert!(h.bond_high.empty);
        assert!(h.bond_high.counts.is_empty());
        assert!(!h.bond_low.empty);
    }
}
