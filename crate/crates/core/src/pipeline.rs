//! Pipeline orchestration behind the `phdesc` CLI.
//!
//! Each `run_*` function is one subcommand: plain structs in, summary
//! structs out, every artifact written atomically. The CLI layer only
//! parses flags and prints summaries, so the full pipeline is exercisable
//! (and tested) in-process.
//!
//! Per-structure stages (`pd`, `featurize`, `inverse`) fan out over the
//! worker pool; outputs are collected and written by a single writer in
//! input order, so identical inputs and seeds produce identical bytes.


use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{self, DatagenError, DatasetRecipe, PairPotential};
use crate::descriptor::{
    fit_standardization, histogram, standardize, DescriptorError, DescriptorHistogram, DimSet,
    GridSpec,
};
use crate::filtration::{build_rips, Convention};
use crate::geometry::GeometryError;
use crate::inverse::{
    assign_cycles, coefficient_map, geometry_histograms, select_regions, CycleReport,
    GeometryHistograms, InverseError, Region,
};
use crate::io::{
    self, diagram_to_csv, write_extxyz, ExtxyzFrame, IoError, SvgPlot,
};
use crate::model::{fit_pca, ridge_solve, rmse, DenseMatrix, ModelError, RidgeModel};
use crate::parallel::par_map;
use crate::persistence::{reduce, PersistenceDiagram, PersistenceError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Persistence(#[from] PersistenceError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inverse(#[from] InverseError),
    #[error(transparent)]
    Datagen(#[from] DatagenError),
}

impl PipelineError {
    /// Stable exit codes: 2 config, 3 parse, 4 shape mismatch, 5 solver,
    /// 6 other io, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Io(IoError::Parse { .. }) => 3,
            PipelineError::Io(IoError::Format(_)) => 3,
            PipelineError::Io(_) => 6,
            PipelineError::Descriptor(DescriptorError::SpecMismatch { .. })
            | PipelineError::Descriptor(DescriptorError::MixedSpecs { .. }) => 4,
            PipelineError::Model(ModelError::ShapeMismatch(_))
            | PipelineError::Model(ModelError::BadComponentCount { .. }) => 4,
            PipelineError::Model(ModelError::SingularSystem) => 5,
            PipelineError::Geometry(_) => 2,
            PipelineError::Datagen(_) => 2,
            PipelineError::Inverse(InverseError::ConventionMismatch { .. }) => 2,
            _ => 1,
        }
    }
}

fn frame_id(frame: &ExtxyzFrame, index: usize) -> String {
    frame
        .id
        .clone()
        .unwrap_or_else(|| format!("frame{index:05}"))
}

// ---------------------------------------------------------------------------
// gen

#[derive(Debug, Clone)]
pub struct GenParams {
    pub out: PathBuf,
    pub manifest: PathBuf,
    pub recipe: DatasetRecipe,
    pub potential: PairPotential,
}

#[derive(Debug)]
pub struct GenSummary {
    pub structures: usize,
    pub out: PathBuf,
    pub manifest: PathBuf,
}

pub fn run_gen(params: &GenParams) -> Result<GenSummary, PipelineError> {
    let samples = datagen::generate_dataset(&params.recipe, &params.potential)?;
    let frames: Vec<ExtxyzFrame> = samples
        .iter()
        .map(|s| {
            ExtxyzFrame::new(s.structure.clone())
                .with_id(s.id.clone())
                .with_density(s.config.density)
        })
        .collect();
    write_extxyz(&params.out, &frames)?;
    let records: Vec<io::DatasetRecord> = samples
        .iter()
        .map(|s| io::DatasetRecord {
            id: s.id.clone(),
            kind: s.config.kind.name().to_string(),
            density: s.config.density,
            n_atoms: s.config.n_atoms,
            seed: s.config.seed,
            energy_per_atom: s.structure.label().unwrap_or(f64::NAN),
        })
        .collect();
    io::write_dataset_manifest(&params.manifest, &records)?;
    Ok(GenSummary {
        structures: samples.len(),
        out: params.out.clone(),
        manifest: params.manifest.clone(),
    })
}

// ---------------------------------------------------------------------------
// pd

#[derive(Debug, Clone)]
pub struct PdParams {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub cutoff: f64,
    pub convention: Convention,
}

#[derive(Debug)]
pub struct PdSummary {
    pub diagrams: usize,
    pub out_dir: PathBuf,
}

fn diagrams_for(
    frames: &[ExtxyzFrame],
    cutoff: f64,
    convention: Convention,
) -> Result<Vec<PersistenceDiagram>, PipelineError> {
    let indexed: Vec<(usize, &ExtxyzFrame)> = frames.iter().enumerate().collect();
    let results = par_map(&indexed, |(index, frame)| -> Result<_, PipelineError> {
        let filtration = build_rips(&frame.structure, cutoff, convention)?;
        Ok(reduce(&filtration)?.with_structure_id(frame_id(frame, *index)))
    });
    results.into_iter().collect()
}

pub fn run_pd(params: &PdParams) -> Result<PdSummary, PipelineError> {
    let frames = io::parse_extxyz(&params.input)?;
    let diagrams = diagrams_for(&frames, params.cutoff, params.convention)?;
    std::fs::create_dir_all(&params.out_dir).map_err(IoError::from)?;
    for diagram in &diagrams {
        let name = format!("{}.csv", diagram.structure_id().unwrap_or("diagram"));
        io::atomic_write(
            &params.out_dir.join(name),
            diagram_to_csv(diagram).as_bytes(),
        )?;
    }
    Ok(PdSummary {
        diagrams: diagrams.len(),
        out_dir: params.out_dir.clone(),
    })
}

// ---------------------------------------------------------------------------
// featurize

#[derive(Debug, Clone)]
pub struct FeaturizeParams {
    pub input: PathBuf,
    pub features_out: PathBuf,
    pub manifest_out: PathBuf,
    pub cutoff: f64,
    pub convention: Convention,
    pub spec: GridSpec,
    pub dims: DimSet,
}

#[derive(Debug)]
pub struct FeaturizeSummary {
    pub samples: usize,
    pub dropped_pairs: u64,
    pub blank_histograms: usize,
}

pub fn run_featurize(params: &FeaturizeParams) -> Result<FeaturizeSummary, PipelineError> {
    let frames = io::parse_extxyz(&params.input)?;
    let diagrams = diagrams_for(&frames, params.cutoff, params.convention)?;
    let histograms: Vec<DescriptorHistogram> = diagrams
        .iter()
        .map(|d| histogram(d, params.spec, params.dims))
        .collect();
    let grids: Vec<Vec<f64>> = histograms.iter().map(|h| h.values().to_vec()).collect();
    io::write_features(&params.features_out, params.spec, &grids)?;
    let records: Vec<io::SampleRecord> = frames
        .iter()
        .enumerate()
        .map(|(index, frame)| io::SampleRecord {
            index: index as u32,
            id: frame_id(frame, index),
            label: frame.structure.label(),
            density: frame.density,
        })
        .collect();
    io::write_sample_manifest(&params.manifest_out, &records)?;
    Ok(FeaturizeSummary {
        samples: histograms.len(),
        dropped_pairs: histograms.iter().map(|h| h.dropped_count()).sum(),
        blank_histograms: histograms.iter().filter(|h| h.is_blank()).count(),
    })
}

// ---------------------------------------------------------------------------
// train / predict / eval

#[derive(Debug, Clone)]
pub struct TrainParams {
    pub features: PathBuf,
    pub manifest: PathBuf,
    pub model_out: PathBuf,
    pub stats_out: Option<PathBuf>,
    pub lambda: f64,
    pub seed: u64,
    pub split: f64,
    pub convention: Convention,
    pub cutoff: f64,
}

#[derive(Debug)]
pub struct TrainSummary {
    pub n_train: usize,
    pub n_test: usize,
    pub train_rmse_mev: f64,
    pub test_rmse_mev: f64,
}

/// Seeded shuffle split: first `round(split·n)` shuffled indices train,
/// clamped so both sides stay nonempty.
pub fn split_indices(n: usize, split: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let n_train = ((n as f64 * split).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let test = indices.split_off(n_train);
    (indices, test)
}

fn load_features(
    features: &Path,
    manifest: &Path,
) -> Result<(GridSpec, Vec<DescriptorHistogram>, Vec<io::SampleRecord>), PipelineError> {
    let (spec, grids) = io::read_features(features)?;
    let records = io::read_sample_manifest(manifest)?;
    if records.len() != grids.len() {
        return Err(PipelineError::Config(format!(
            "feature file has {} samples but the manifest lists {}",
            grids.len(),
            records.len()
        )));
    }
    let histograms = grids
        .into_iter()
        .map(|g| DescriptorHistogram::from_normalized_grid(spec, g))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((spec, histograms, records))
}

fn labels_of(records: &[io::SampleRecord]) -> Result<Vec<f64>, PipelineError> {
    records
        .iter()
        .map(|r| {
            r.label.ok_or_else(|| {
                PipelineError::Config(format!("sample {} has no energy label", r.id))
            })
        })
        .collect()
}

pub fn run_train(params: &TrainParams) -> Result<(TrainSummary, RidgeModel), PipelineError> {
    if !(params.split > 0.0 && params.split < 1.0) {
        return Err(PipelineError::Config(format!(
            "--split must be in (0, 1), got {}",
            params.split
        )));
    }
    let (spec, histograms, records) = load_features(&params.features, &params.manifest)?;
    let labels = labels_of(&records)?;
    if histograms.len() < 3 {
        return Err(PipelineError::Config(format!(
            "need at least 3 samples to train and hold out, got {}",
            histograms.len()
        )));
    }
    let (train_idx, test_idx) = split_indices(histograms.len(), params.split, params.seed);
    let train_hists: Vec<DescriptorHistogram> =
        train_idx.iter().map(|&i| histograms[i].clone()).collect();
    let stats = fit_standardization(&train_hists)?;
    let train_rows: Vec<Vec<f64>> = train_hists
        .iter()
        .map(|h| Ok(standardize(h, &stats)?.values().to_vec()))
        .collect::<Result<_, PipelineError>>()?;
    let train_labels: Vec<f64> = train_idx.iter().map(|&i| labels[i]).collect();
    let x = DenseMatrix::from_rows(&train_rows)?;
    let solution = ridge_solve(&x, &train_labels, params.lambda)?;
    let model = RidgeModel {
        spec,
        convention: params.convention,
        cutoff: params.cutoff,
        lambda: params.lambda,
        seed: params.seed,
        split: params.split,
        intercept: solution.intercept,
        weights: solution.weights,
        stats,
    };
    io::write_model(&params.model_out, &model)?;
    if let Some(stats_out) = &params.stats_out {
        io::write_stats(stats_out, &model.stats)?;
    }
    let predict_set = |idx: &[usize]| -> Result<f64, PipelineError> {
        let predictions: Vec<f64> = idx
            .iter()
            .map(|&i| model.predict(&histograms[i]))
            .collect::<Result<_, _>>()?;
        let actual: Vec<f64> = idx.iter().map(|&i| labels[i]).collect();
        Ok(rmse(&predictions, &actual))
    };
    Ok((
        TrainSummary {
            n_train: train_idx.len(),
            n_test: test_idx.len(),
            train_rmse_mev: predict_set(&train_idx)? * 1000.0,
            test_rmse_mev: predict_set(&test_idx)? * 1000.0,
        },
        model,
    ))
}

#[derive(Debug, Clone)]
pub struct PredictParams {
    pub model: PathBuf,
    pub features: PathBuf,
    pub manifest: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct PredictSummary {
    pub predictions: usize,
}

pub fn run_predict(params: &PredictParams) -> Result<PredictSummary, PipelineError> {
    let model = io::read_model(&params.model)?;
    let (spec, histograms, records) = load_features(&params.features, &params.manifest)?;
    if spec != model.spec {
        return Err(PipelineError::Model(ModelError::ShapeMismatch(format!(
            "feature grid {spec:?} does not match model grid {:?}",
            model.spec
        ))));
    }
    let mut out = String::from("id,predicted\n");
    for (h, r) in histograms.iter().zip(&records) {
        let p = model.predict(h)?;
        out.push_str(&format!("{},{}\n", r.id, crate::io::fmt_f64(p)));
    }
    io::atomic_write(&params.out, out.as_bytes())?;
    Ok(PredictSummary {
        predictions: records.len(),
    })
}

#[derive(Debug, Clone)]
pub struct EvalParams {
    pub model: PathBuf,
    pub features: PathBuf,
    pub manifest: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct EvalSummary {
    pub n_train: usize,
    pub n_test: usize,
    pub train_rmse_mev: f64,
    pub test_rmse_mev: f64,
}

/// Re-derives the train/test split from the seed and fraction recorded in
/// the model file, evaluates both sides, and writes `id,actual,predicted`.
pub fn run_eval(params: &EvalParams) -> Result<EvalSummary, PipelineError> {
    let model = io::read_model(&params.model)?;
    let (spec, histograms, records) = load_features(&params.features, &params.manifest)?;
    if spec != model.spec {
        return Err(PipelineError::Model(ModelError::ShapeMismatch(format!(
            "feature grid {spec:?} does not match model grid {:?}",
            model.spec
        ))));
    }
    let labels = labels_of(&records)?;
    let predictions: Vec<f64> = histograms
        .iter()
        .map(|h| model.predict(h))
        .collect::<Result<_, _>>()?;
    let mut out = String::from("id,actual,predicted\n");
    for ((r, &a), &p) in records.iter().zip(&labels).zip(&predictions) {
        out.push_str(&format!(
            "{},{},{}\n",
            r.id,
            crate::io::fmt_f64(a),
            crate::io::fmt_f64(p)
        ));
    }
    io::atomic_write(&params.out, out.as_bytes())?;
    let (train_idx, test_idx) = split_indices(histograms.len(), model.split, model.seed);
    let rmse_of = |idx: &[usize]| {
        let p: Vec<f64> = idx.iter().map(|&i| predictions[i]).collect();
        let a: Vec<f64> = idx.iter().map(|&i| labels[i]).collect();
        rmse(&p, &a)
    };
    Ok(EvalSummary {
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        train_rmse_mev: rmse_of(&train_idx) * 1000.0,
        test_rmse_mev: rmse_of(&test_idx) * 1000.0,
    })
}

// ---------------------------------------------------------------------------
// pca

#[derive(Debug, Clone)]
pub struct PcaParams {
    pub features: PathBuf,
    pub manifest: PathBuf,
    pub components: usize,
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct PcaSummary {
    pub samples: usize,
    pub explained: Vec<f64>,
}

/// PCA of the standardized descriptors (stats fit on the whole file), CSV
/// output `sample_id,pc1,pc2,label,density`.
pub fn run_pca(params: &PcaParams) -> Result<PcaSummary, PipelineError> {
    if params.components < 2 {
        return Err(PipelineError::Config(
            "pca needs at least 2 components for the scatter output".into(),
        ));
    }
    let (_, histograms, records) = load_features(&params.features, &params.manifest)?;
    let stats = fit_standardization(&histograms)?;
    let rows: Vec<Vec<f64>> = histograms
        .iter()
        .map(|h| Ok(standardize(h, &stats)?.values().to_vec()))
        .collect::<Result<_, PipelineError>>()?;
    let x = DenseMatrix::from_rows(&rows)?;
    let projection = fit_pca(&x, params.components)?;
    let mut out = String::from("sample_id,pc1,pc2,label,density\n");
    for (r, coords) in records.iter().zip(&projection.coords) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.id,
            crate::io::fmt_f64(coords[0]),
            crate::io::fmt_f64(coords[1]),
            r.label.map(crate::io::fmt_f64).unwrap_or_default(),
            r.density.map(crate::io::fmt_f64).unwrap_or_default(),
        ));
    }
    io::atomic_write(&params.out, out.as_bytes())?;
    Ok(PcaSummary {
        samples: records.len(),
        explained: projection.explained,
    })
}

// ---------------------------------------------------------------------------
// inverse

#[derive(Debug, Clone)]
pub struct InverseParams {
    pub model: PathBuf,
    pub input: PathBuf,
    pub hi_threshold: f64,
    pub lo_threshold: f64,
    pub bond_bin_width: f64,
    pub angle_bin_width: f64,
    pub report_out: PathBuf,
    pub annotate_out: Option<PathBuf>,
    pub tighten_budget: usize,
}

/// The report document written by `inverse`.
#[derive(Debug, Serialize, Deserialize)]
pub struct InverseReport {
    pub hi_threshold: f64,
    pub lo_threshold: f64,
    pub bond_bin_width: f64,
    pub angle_bin_width: f64,
    pub high_bins: Vec<(u32, u32)>,
    pub low_bins: Vec<(u32, u32)>,
    pub cycles: CycleReport,
    pub histograms: Option<GeometryHistograms>,
}

#[derive(Debug)]
pub struct InverseSummary {
    pub structures: usize,
    pub high_cycles: usize,
    pub low_cycles: usize,
}

pub fn run_inverse(params: &InverseParams) -> Result<InverseSummary, PipelineError> {
    if !(params.hi_threshold > 0.0) || !(params.lo_threshold < 0.0) {
        return Err(PipelineError::Config(format!(
            "thresholds must satisfy hi > 0 > lo, got hi={} lo={}",
            params.hi_threshold, params.lo_threshold
        )));
    }
    let model = io::read_model(&params.model)?;
    let frames = io::parse_extxyz(&params.input)?;
    let map = coefficient_map(&model);
    let regions = select_regions(&map, params.hi_threshold, params.lo_threshold);
    let indexed: Vec<(usize, &ExtxyzFrame)> = frames.iter().enumerate().collect();
    let reports = par_map(&indexed, |(index, frame)| -> Result<_, PipelineError> {
        let filtration = build_rips(&frame.structure, model.cutoff, model.convention)?;
        let diagram = reduce(&filtration)?.with_structure_id(frame_id(frame, *index));
        Ok(assign_cycles(
            &frame.structure,
            &diagram,
            &regions,
            &model.spec,
            model.convention,
            params.tighten_budget,
        )?)
    });
    let mut cycles = CycleReport::default();
    for report in reports {
        cycles.merge(report?);
    }
    let histograms = if cycles.is_empty() {
        None
    } else {
        Some(geometry_histograms(
            &cycles,
            params.bond_bin_width,
            params.angle_bin_width,
        )?)
    };
    let high_cycles = cycles.records.iter().filter(|r| r.region == Region::High).count();
    let low_cycles = cycles.records.len() - high_cycles;
    if let Some(annotate_out) = &params.annotate_out {
        let mut annotated = Vec::with_capacity(frames.len());
        for (index, frame) in frames.iter().enumerate() {
            let id = frame_id(frame, index);
            let mut tags = vec!["none".to_string(); frame.structure.len()];
            for record in cycles.records.iter().filter(|r| r.structure_id == id) {
                let tag = match record.region {
                    Region::High => "high",
                    Region::Low => "low",
                };
                for &(u, v) in &record.edges {
                    for atom in [u as usize, v as usize] {
                        tags[atom] = match (tags[atom].as_str(), tag) {
                            ("none", t) => t.to_string(),
                            (existing, t) if existing == t => existing.to_string(),
                            _ => "both".to_string(),
                        };
                    }
                }
            }
            let mut f = frame.clone();
            f.regions = Some(tags);
            annotated.push(f);
        }
        write_extxyz(annotate_out, &annotated)?;
    }
    let report = InverseReport {
        hi_threshold: params.hi_threshold,
        lo_threshold: params.lo_threshold,
        bond_bin_width: params.bond_bin_width,
        angle_bin_width: params.angle_bin_width,
        high_bins: regions.high.iter().copied().collect(),
        low_bins: regions.low.iter().copied().collect(),
        cycles,
        histograms,
    };
    let mut bytes = serde_json::to_vec_pretty(&report).map_err(IoError::from)?;
    bytes.push(b'\n');
    io::atomic_write(&params.report_out, &bytes)?;
    Ok(InverseSummary {
        structures: frames.len(),
        high_cycles,
        low_cycles,
    })
}

// ---------------------------------------------------------------------------
// plot

#[derive(Debug, Clone)]
pub enum PlotParams {
    Pd {
        input: PathBuf,
        window: (f64, f64),
        out: PathBuf,
    },
    Coeff {
        model: PathBuf,
        out: PathBuf,
    },
    Pca {
        input: PathBuf,
        color_by_density: bool,
        out: PathBuf,
    },
    Hist {
        report: PathBuf,
        kind: HistKind,
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistKind {
    Bond,
    Angle,
}

pub fn run_plot(params: &PlotParams) -> Result<PathBuf, PipelineError> {
    match params {
        PlotParams::Pd { input, window, out } => {
            let rows = io::read_diagram_csv(input)?;
            io::emit_svg(
                &SvgPlot::PdScatter {
                    pairs: &rows,
                    window: *window,
                },
                out,
            )?;
            Ok(out.clone())
        }
        PlotParams::Coeff { model, out } => {
            let model = io::read_model(model)?;
            let map = coefficient_map(&model);
            io::emit_svg(&SvgPlot::CoeffHeatmap { map: &map }, out)?;
            Ok(out.clone())
        }
        PlotParams::Pca {
            input,
            color_by_density,
            out,
        } => {
            let text = std::fs::read_to_string(input).map_err(IoError::from)?;
            let mut points = Vec::new();
            let mut colors = Vec::new();
            let mut has_colors = true;
            for (i, line) in text.lines().enumerate() {
                if i == 0 || line.trim().is_empty() {
                    continue;
                }
                let parts: Vec<&str> = line.split(',').collect();
                if parts.len() < 5 {
                    return Err(PipelineError::Io(IoError::parse(
                        input,
                        i + 1,
                        "expected sample_id,pc1,pc2,label,density",
                    )));
                }
                let parse = |s: &str, what: &str| -> Result<f64, PipelineError> {
                    s.parse::<f64>().map_err(|e| {
                        PipelineError::Io(IoError::parse(input, i + 1, format!("bad {what}: {e}")))
                    })
                };
                points.push((parse(parts[1], "pc1")?, parse(parts[2], "pc2")?));
                let color_field = if *color_by_density { parts[4] } else { parts[3] };
                if color_field.is_empty() {
                    has_colors = false;
                } else {
                    colors.push(parse(color_field, "color value")?);
                }
            }
            io::emit_svg(
                &SvgPlot::PcaScatter {
                    points: &points,
                    color_by: if has_colors && colors.len() == points.len() {
                        Some(&colors)
                    } else {
                        None
                    },
                },
                out,
            )?;
            Ok(out.clone())
        }
        PlotParams::Hist { report, kind, out } => {
            let text = std::fs::read_to_string(report).map_err(IoError::from)?;
            let doc: InverseReport = serde_json::from_str(&text).map_err(IoError::from)?;
            let histograms = doc.histograms.ok_or_else(|| {
                PipelineError::Config("report has no histograms (no cycles matched)".into())
            })?;
            let (high, low, label) = match kind {
                HistKind::Bond => (
                    &histograms.bond_high,
                    &histograms.bond_low,
                    "bond length (A)",
                ),
                HistKind::Angle => (
                    &histograms.angle_high,
                    &histograms.angle_low,
                    "bond angle (deg)",
                ),
            };
            io::emit_svg(
                &SvgPlot::Hist1d {
                    high,
                    low,
                    x_label: label,
                },
                out,
            )?;
            Ok(out.clone())
        }
    }
}
