//! Persistent-homology descriptors for periodic atomic structures.
//!
//! The pipeline goes: periodic point cloud → Vietoris–Rips filtration over
//! the minimum-image metric → persistence diagram (H0/H1 via boundary-matrix
//! reduction) → normalized 128×128 birth–death histogram → Ridge regression
//! on per-atom energies → inverse analysis mapping Ridge coefficients back
//! to representative cycles and their bond geometry.
//!
//! Modules mirror the pipeline stages:
//!
//! * [`geometry`] — periodic cells, minimum-image distances, bond angles.
//! * [`filtration`] — Rips complexes (dimensions 0–2) with cell-list
//!   neighbor search.
//! * [`persistence`] — GF(2) column reduction with the clearing
//!   optimization, representative cycles, Betti queries.
//! * [`descriptor`] — histogram vectorization, normalization, z-scoring.
//! * [`model`] — Ridge regression (primal and dual forms) and PCA.
//! * [`inverse`] — coefficient maps, region selection, cycle geometry
//!   reports.
//! * [`datagen`] — synthetic labeled datasets from a shifted Lennard-Jones
//!   potential (lattices, perturbed lattices, Metropolis quenches).
//! * [`io`] — extended-XYZ, binary feature files, model files, diagram CSV,
//!   SVG plots.
//! * [`pipeline`] — the orchestration layer behind the `phdesc` CLI.
//!
//! Batch stages run on rayon when the default `parallel` feature is enabled
//! and fall back to sequential iteration otherwise; all reductions use fixed
//! pairwise trees so both modes produce identical bytes.

pub mod datagen;
pub mod descriptor;
pub mod filtration;
pub mod geometry;
pub mod inverse;
pub mod io;
pub mod model;
pub mod numeric;
pub mod parallel;
pub mod persistence;
pub mod pipeline;

pub use descriptor::{DescriptorHistogram, DimSet, GridSpec, StandardizationStats};
pub use filtration::{build_rips, Convention, Filtration, Simplex};
pub use geometry::{bond_angle, minimum_image_distance, PeriodicStructure};
pub use model::RidgeModel;
pub use persistence::{reduce, PersistenceDiagram, PersistencePair};
