//! Birth–death histograms: fixed-size, size-independent feature vectors.
//!
//! Each finite positive-persistence pair of the selected homology dimensions
//! lands in a square grid (rows = birth bins, columns = death bins, default
//! 128×128 over [0, 8]²). Bins are half-open with the top edge inclusive;
//! pairs outside the window are dropped and counted, never clamped. The grid
//! is normalized to a probability distribution so that replicating a
//! structure leaves the descriptor unchanged, then z-scored per bin against
//! training-set statistics so bin magnitudes are comparable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::tree_sum_by;
use crate::persistence::PersistenceDiagram;

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("grid must have at least 1 bin and hi > lo, got bins={bins} window=[{lo}, {hi}]")]
    InvalidSpec { bins: u32, lo: f64, hi: f64 },
    #[error("need at least 2 histograms to fit standardization, got {0}")]
    TooFewHistograms(usize),
    #[error("histogram {index} has grid spec {got:?}, expected {expected:?}")]
    MixedSpecs {
        index: usize,
        got: GridSpec,
        expected: GridSpec,
    },
    #[error("histogram {0} is not normalized")]
    NotNormalized(usize),
    #[error("histogram {0} is already standardized")]
    AlreadyStandardized(usize),
    #[error("grid spec mismatch: histogram {got:?} vs stats {expected:?}")]
    SpecMismatch { got: GridSpec, expected: GridSpec },
}

/// Standard-deviation floor for zero-variance bins, so constant bins
/// standardize to ~0 instead of NaN.
pub const STD_EPSILON: f64 = 1e-12;

/// Square histogram mesh: `bins` per axis over the window `[lo, hi]` shared
/// by the birth and death axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bins: u32,
    pub lo: f64,
    pub hi: f64,
}

impl GridSpec {
    pub fn new(bins: u32, lo: f64, hi: f64) -> Result<Self, DescriptorError> {
        if bins < 1 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(DescriptorError::InvalidSpec { bins, lo, hi });
        }
        Ok(Self { bins, lo, hi })
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn cells(&self) -> usize {
        (self.bins as usize) * (self.bins as usize)
    }

    /// Half-open bin index for a value, the top edge mapping into the last
    /// bin. `None` when the value lies outside the window.
    pub fn bin_index(&self, value: f64) -> Option<usize> {
        if !(value >= self.lo && value <= self.hi) {
            return None;
        }
        let idx = ((value - self.lo) / self.bin_width()).floor() as usize;
        Some(idx.min(self.bins as usize - 1))
    }

    /// (birth row, death column) of a pair, if both are in the window.
    pub fn bin_of(&self, birth: f64, death: f64) -> Option<(u32, u32)> {
        Some((self.bin_index(birth)? as u32, self.bin_index(death)? as u32))
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            bins: 128,
            lo: 0.0,
            hi: 8.0,
        }
    }
}

/// Which homology dimensions feed the histogram. H1 alone is the default;
/// H0 can be folded in (its pairs occupy the birth = 0 row).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimSet {
    pub h0: bool,
    pub h1: bool,
}

impl DimSet {
    pub fn h1_only() -> Self {
        Self { h0: false, h1: true }
    }

    pub fn h0_only() -> Self {
        Self { h0: true, h1: false }
    }

    pub fn both() -> Self {
        Self { h0: true, h1: true }
    }

    fn selects(&self, dim: u8) -> bool {
        (dim == 0 && self.h0) || (dim == 1 && self.h1)
    }
}

impl Default for DimSet {
    fn default() -> Self {
        Self::h1_only()
    }
}

/// A bins×bins grid in row-major order (row = birth bin, column = death
/// bin), with normalization/standardization state and drop diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorHistogram {
    spec: GridSpec,
    grid: Vec<f64>,
    normalized: bool,
    standardized: bool,
    in_window: u64,
    dropped: u64,
}

impl DescriptorHistogram {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.grid
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Pairs that landed in the window.
    pub fn in_window_count(&self) -> u64 {
        self.in_window
    }

    /// Finite positive-persistence pairs outside the window.
    pub fn dropped_count(&self) -> u64 {
        self.dropped
    }

    /// Warning flag: the diagram contributed no in-window pairs, the grid is
    /// all zeros.
    pub fn is_blank(&self) -> bool {
        self.in_window == 0
    }

    pub fn value_at(&self, row: u32, col: u32) -> f64 {
        self.grid[row as usize * self.spec.bins as usize + col as usize]
    }

    /// Rehydrate a normalized histogram from a feature file grid.
    pub fn from_normalized_grid(spec: GridSpec, grid: Vec<f64>) -> Result<Self, DescriptorError> {
        if grid.len() != spec.cells() {
            return Err(DescriptorError::SpecMismatch {
                got: GridSpec {
                    bins: (grid.len() as f64).sqrt() as u32,
                    lo: spec.lo,
                    hi: spec.hi,
                },
                expected: spec,
            });
        }
        let nonzero = grid.iter().any(|&v| v != 0.0);
        Ok(Self {
            spec,
            grid,
            normalized: true,
            standardized: false,
            in_window: u64::from(nonzero),
            dropped: 0,
        })
    }
}

/// Histogram a diagram onto `spec`, then normalize to a probability
/// distribution. Essential and zero-persistence pairs never contribute.
pub fn histogram(
    diagram: &PersistenceDiagram,
    spec: GridSpec,
    dims: DimSet,
) -> DescriptorHistogram {
    let mut grid = vec![0.0; spec.cells()];
    let mut in_window = 0u64;
    let mut dropped = 0u64;
    for pair in diagram.finite_positive_pairs() {
        if !dims.selects(pair.dim) {
            continue;
        }
        match spec.bin_of(pair.birth, pair.death) {
            Some((row, col)) => {
                grid[row as usize * spec.bins as usize + col as usize] += 1.0;
                in_window += 1;
            }
            None => dropped += 1,
        }
    }
    if in_window > 0 {
        let total = in_window as f64;
        for v in &mut grid {
            *v /= total;
        }
    }
    DescriptorHistogram {
        spec,
        grid,
        normalized: true,
        standardized: false,
        in_window,
        dropped,
    }
}

/// Per-bin mean and population standard deviation over a training set, with
/// the [`STD_EPSILON`] floor on zero-variance bins.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationStats {
    pub spec: GridSpec,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub epsilon: f64,
    pub fitted_on: u32,
}

/// Fit per-bin z-score statistics on normalized histograms.
pub fn fit_standardization(
    histograms: &[DescriptorHistogram],
) -> Result<StandardizationStats, DescriptorError> {
    if histograms.len() < 2 {
        return Err(DescriptorError::TooFewHistograms(histograms.len()));
    }
    let spec = histograms[0].spec;
    for (index, h) in histograms.iter().enumerate() {
        if h.spec != spec {
            return Err(DescriptorError::MixedSpecs {
                index,
                got: h.spec,
                expected: spec,
            });
        }
        if !h.normalized {
            return Err(DescriptorError::NotNormalized(index));
        }
        if h.standardized {
            return Err(DescriptorError::AlreadyStandardized(index));
        }
    }
    let n = histograms.len() as f64;
    // fixed pairwise trees over the sample axis: thread-count independent
    let mut mean = tree_sum_by(histograms.len(), &|i| histograms[i].grid.clone());
    for m in &mut mean {
        *m /= n;
    }
    let mean_ref = &mean;
    let mut var = tree_sum_by(histograms.len(), &|i| {
        histograms[i]
            .grid
            .iter()
            .zip(mean_ref)
            .map(|(&x, &m)| (x - m) * (x - m))
            .collect()
    });
    for v in &mut var {
        *v /= n;
    }
    let std = var
        .iter()
        .map(|&v| v.sqrt().max(STD_EPSILON))
        .collect();
    Ok(StandardizationStats {
        spec,
        mean,
        std,
        epsilon: STD_EPSILON,
        fitted_on: histograms.len() as u32,
    })
}

/// Per-bin z-score of a normalized histogram.
pub fn standardize(
    histogram: &DescriptorHistogram,
    stats: &StandardizationStats,
) -> Result<DescriptorHistogram, DescriptorError> {
    if histogram.spec != stats.spec {
        return Err(DescriptorError::SpecMismatch {
            got: histogram.spec,
            expected: stats.spec,
        });
    }
    if !histogram.normalized {
        return Err(DescriptorError::NotNormalized(0));
    }
    if histogram.standardized {
        return Err(DescriptorError::AlreadyStandardized(0));
    }
    let grid = histogram
        .grid
        .iter()
        .zip(&stats.mean)
        .zip(&stats.std)
        .map(|((&x, &m), &s)| (x - m) / s)
        .collect();
    Ok(DescriptorHistogram {
        spec: histogram.spec,
        grid,
        normalized: true,
        standardized: true,
        in_window: histogram.in_window,
        dropped: histogram.dropped,
    })
}
