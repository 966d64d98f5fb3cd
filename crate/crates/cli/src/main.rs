//! `phdesc` — persistent-homology descriptors for periodic structures.
//!
//! Subcommands compose the pipeline: `gen` → `pd`/`featurize` → `train` →
//! `eval`/`predict`/`pca`/`inverse` → `plot`. Run `phdesc <cmd> --help` for
//! the flags of each stage.

mod fetch;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phdesc::datagen::{DatasetRecipe, PairPotential};
use phdesc::descriptor::{DimSet, GridSpec};
use phdesc::filtration::Convention;
use phdesc::inverse::{DEFAULT_HIGH_THRESHOLD, DEFAULT_LOW_THRESHOLD};
use phdesc::model::DEFAULT_LAMBDA;
use phdesc::persistence::DEFAULT_TIGHTEN_BUDGET;
use phdesc::pipeline::{self, PipelineError};

#[derive(Parser)]
#[command(name = "phdesc", version, about = "Persistence-diagram descriptors, energy models and inverse analysis for periodic atomic structures")]
struct Cli {
    /// Worker threads for per-structure stages (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Radius,
    Squared,
}

impl From<ConventionArg> for Convention {
    fn from(value: ConventionArg) -> Self {
        match value {
            ConventionArg::Radius => Convention::Radius,
            ConventionArg::Squared => Convention::SquaredRadius,
        }
    }
}

#[derive(Args, Clone)]
struct PdFlags {
    /// Rips cutoff distance in Angstrom (must be below half the cell).
    #[arg(long, default_value_t = 3.5)]
    cutoff: f64,
    /// Filtration scale: radius (d/2) or squared ((d/2)^2).
    #[arg(long, value_enum, default_value_t = ConventionArg::Squared)]
    convention: ConventionArg,
}

#[derive(Args, Clone)]
struct GridFlags {
    /// Histogram mesh size per axis.
    #[arg(long, default_value_t = 128)]
    bins: u32,
    /// Histogram window as LO:HI, shared by both axes.
    #[arg(long, default_value = "0:8")]
    window: String,
}

impl GridFlags {
    fn spec(&self) -> Result<GridSpec, String> {
        let (lo, hi) = self
            .window
            .split_once(':')
            .ok_or_else(|| format!("--window wants LO:HI, got `{}`", self.window))?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("bad window lo: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("bad window hi: {e}"))?;
        GridSpec::new(self.bins, lo, hi).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset (perturbed lattices + quenches).
    Gen {
        /// Output extended-XYZ path.
        #[arg(long)]
        out: PathBuf,
        /// Dataset manifest CSV path.
        #[arg(long)]
        manifest: PathBuf,
        /// Atoms per structure.
        #[arg(long, default_value_t = 216)]
        n_atoms: usize,
        /// Comma-separated densities in g/cm3.
        #[arg(long, default_value = "1.5,1.7,2.0,2.2,2.4,2.6,2.8,3.0,3.2,3.4,3.5")]
        densities: String,
        /// Perturbed-lattice structures per density.
        #[arg(long, default_value_t = 30)]
        perturbed_per_density: usize,
        /// Gaussian displacement range as LO:HI (ladder across structures).
        #[arg(long, default_value = "0.02:0.45")]
        sigma_range: String,
        /// Metropolis-quench structures per density.
        #[arg(long, default_value_t = 25)]
        quench_per_density: usize,
        /// Base RNG seed; structure i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lennard-Jones well depth (eV).
        #[arg(long, default_value_t = 1.0)]
        lj_epsilon: f64,
        /// Lennard-Jones sigma (Angstrom).
        #[arg(long, default_value_t = 1.372)]
        lj_sigma: f64,
        /// Pair-potential cutoff (Angstrom).
        #[arg(long, default_value_t = 3.5)]
        lj_cutoff: f64,
    },
    /// Compute persistence diagrams, one CSV per structure.
    Pd {
        /// Input extended-XYZ file.
        #[arg(long)]
        input: PathBuf,
        /// Directory for the per-structure diagram CSVs.
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        pd: PdFlags,
    },
    /// Convert structures to normalized histogram features.
    Featurize {
        #[arg(long)]
        input: PathBuf,
        /// Binary feature file to write.
        #[arg(long)]
        features: PathBuf,
        /// Sidecar sample manifest CSV.
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        pd: PdFlags,
        #[command(flatten)]
        grid: GridFlags,
        /// Fold the H0 sub-diagram into the histogram as well.
        #[arg(long)]
        include_h0: bool,
    },
    /// Fit the ridge model on a feature file.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
        /// Also write the standardization stats as a binary grid file.
        #[arg(long)]
        stats_out: Option<PathBuf>,
        /// Ridge regularization strength.
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
        /// Split/shuffle seed (recorded in the model file).
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Training fraction of the data.
        #[arg(long, default_value_t = 0.8)]
        split: f64,
        #[command(flatten)]
        pd: PdFlags,
    },
    /// Predict energies for a feature file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Predictions CSV (id,predicted).
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a model: train/test RMSE plus a predictions CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Predictions CSV (id,actual,predicted).
        #[arg(long)]
        out: PathBuf,
    },
    /// PCA of the standardized descriptors.
    Pca {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Number of components (>= 2; pc1/pc2 go into the CSV).
        #[arg(long, default_value_t = 2)]
        components: usize,
        /// Output CSV (sample_id,pc1,pc2,label,density).
        #[arg(long)]
        out: PathBuf,
    },
    /// Map ridge coefficients back to cycles and their bond geometry.
    Inverse {
        #[arg(long)]
        model: PathBuf,
        /// Structures to analyze (extended-XYZ).
        #[arg(long)]
        input: PathBuf,
        /// Coefficient threshold for the high-energy region.
        #[arg(long, default_value_t = DEFAULT_HIGH_THRESHOLD)]
        hi_threshold: f64,
        /// Coefficient threshold for the low-energy region.
        #[arg(long, default_value_t = DEFAULT_LOW_THRESHOLD)]
        lo_threshold: f64,
        /// Bond-length histogram bin width (Angstrom).
        #[arg(long, default_value_t = 0.05)]
        bond_width: f64,
        /// Angle histogram bin width (degrees).
        #[arg(long, default_value_t = 5.0)]
        angle_width: f64,
        /// Report JSON to write.
        #[arg(long)]
        report: PathBuf,
        /// Optional region-annotated extended-XYZ copy of the input.
        #[arg(long)]
        annotate_out: Option<PathBuf>,
        /// Node budget for cycle tightening before raw-column fallback.
        #[arg(long, default_value_t = DEFAULT_TIGHTEN_BUDGET)]
        tighten_budget: usize,
    },
    /// Render SVG plots from pipeline outputs.
    Plot {
        #[command(subcommand)]
        kind: PlotCommand,
    },
    /// Download the published dataset archive (needs the `fetch` feature).
    Fetch {
        /// Archive URL.
        #[arg(long, default_value = "https://zenodo.org/api/records/7905585/files-archive")]
        url: String,
        /// Destination file.
        #[arg(long)]
        dest: PathBuf,
        /// Expected SHA-256 (hex) of the archive.
        #[arg(long)]
        sha256: Option<String>,
        /// Never touch the network; use the cache or skip.
        #[arg(long)]
        offline: bool,
    },
}

#[derive(Subcommand)]
enum PlotCommand {
    /// Birth-death scatter from a diagram CSV.
    Pd {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ridge coefficient heatmap from a model file.
    Coeff {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scatter of a PCA CSV, colored by label or density.
    Pca {
        #[arg(long)]
        input: PathBuf,
        /// Color by density instead of label.
        #[arg(long)]
        by_density: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bond or angle histograms from an inverse report.
    Hist {
        #[arg(long)]
        report: PathBuf,
        /// Which histogram: bond or angle.
        #[arg(long, value_enum, default_value_t = HistArg::Bond)]
        kind: HistArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum HistArg {
    Bond,
    Angle,
}

fn parse_densities(text: &str) -> Result<Vec<f64>, String> {
    let densities: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad density `{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    if densities.is_empty() || densities.iter().any(|&d| !(d > 0.0)) {
        return Err("densities must be positive".into());
    }
    Ok(densities)
}

fn parse_range(text: &str, what: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("--{what} wants LO:HI, got `{text}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad {what} lo: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad {what} hi: {e}"))?;
    if !(hi >= lo) {
        return Err(format!("--{what}: hi must be >= lo"));
    }
    Ok((lo, hi))
}

fn config_error(message: String) -> PipelineError {
    PipelineError::Config(message)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    if cli.jobs > 0 {
        if let Err(msg) = phdesc::parallel::set_jobs(cli.jobs) {
            eprintln!("warning: --jobs {}: {msg}", cli.jobs);
        }
    }
    match cli.command {
        Command::Gen {
            out,
            manifest,
            n_atoms,
            densities,
            perturbed_per_density,
            sigma_range,
            quench_per_density,
            seed,
            lj_epsilon,
            lj_sigma,
            lj_cutoff,
        } => {
            let recipe = DatasetRecipe {
                densities: parse_densities(&densities).map_err(config_error)?,
                n_atoms,
                perturbed_per_density,
                sigma_range: parse_range(&sigma_range, "sigma-range").map_err(config_error)?,
                quench_per_density,
                base_seed: seed,
                ..DatasetRecipe::default()
            };
            if !(lj_epsilon > 0.0) || !(lj_sigma > 0.0) || !(lj_cutoff > 0.0) {
                return Err(config_error("LJ parameters must be positive".into()));
            }
            let potential = PairPotential {
                epsilon: lj_epsilon,
                sigma: lj_sigma,
                cutoff: lj_cutoff,
            };
            let summary = pipeline::run_gen(&pipeline::GenParams {
                out,
                manifest,
                recipe,
                potential,
            })?;
            println!(
                "generated {} structures -> {} (manifest {})",
                summary.structures,
                summary.out.display(),
                summary.manifest.display()
            );
        }
        Command::Pd { input, out_dir, pd } => {
            let summary = pipeline::run_pd(&pipeline::PdParams {
                input,
                out_dir,
                cutoff: pd.cutoff,
                convention: pd.convention.into(),
            })?;
            println!(
                "wrote {} diagrams to {}",
                summary.diagrams,
                summary.out_dir.display()
            );
        }
        Command::Featurize {
            input,
            features,
            manifest,
            pd,
            grid,
            include_h0,
        } => {
            let spec = grid.spec().map_err(config_error)?;
            let dims = if include_h0 { DimSet::both() } else { DimSet::h1_only() };
            let summary = pipeline::run_featurize(&pipeline::FeaturizeParams {
                input,
                features_out: features,
                manifest_out: manifest,
                cutoff: pd.cutoff,
                convention: pd.convention.into(),
                spec,
                dims,
            })?;
            println!(
                "featurized {} samples ({} out-of-window pairs dropped, {} blank)",
                summary.samples, summary.dropped_pairs, summary.blank_histograms
            );
        }
        Command::Train {
            features,
            manifest,
            out,
            stats_out,
            lambda,
            seed,
            split,
            pd,
        } => {
            let (summary, _) = pipeline::run_train(&pipeline::TrainParams {
                features,
                manifest,
                model_out: out.clone(),
                stats_out,
                lambda,
                seed,
                split,
                convention: pd.convention.into(),
                cutoff: pd.cutoff,
            })?;
            println!(
                "trained on {} samples, held out {}: train RMSE {:.3} meV/atom, test RMSE {:.3} meV/atom -> {}",
                summary.n_train,
                summary.n_test,
                summary.train_rmse_mev,
                summary.test_rmse_mev,
                out.display()
            );
        }
        Command::Predict {
            model,
            features,
            manifest,
            out,
        } => {
            let summary = pipeline::run_predict(&pipeline::PredictParams {
                model,
                features,
                manifest,
                out: out.clone(),
            })?;
            println!("wrote {} predictions -> {}", summary.predictions, out.display());
        }
        Command::Eval {
            model,
            features,
            manifest,
            out,
        } => {
            let summary = pipeline::run_eval(&pipeline::EvalParams {
                model,
                features,
                manifest,
                out: out.clone(),
            })?;
            println!(
                "train RMSE {:.3} meV/atom ({} samples), test RMSE {:.3} meV/atom ({} samples); predictions -> {}",
                summary.train_rmse_mev,
                summary.n_train,
                summary.test_rmse_mev,
                summary.n_test,
                out.display()
            );
        }
        Command::Pca {
            features,
            manifest,
            components,
            out,
        } => {
            let summary = pipeline::run_pca(&pipeline::PcaParams {
                features,
                manifest,
                components,
                out: out.clone(),
            })?;
            let explained: Vec<String> = summary
                .explained
                .iter()
                .map(|f| format!("{:.4}", f))
                .collect();
            println!(
                "projected {} samples, explained variance fractions [{}] -> {}",
                summary.samples,
                explained.join(", "),
                out.display()
            );
        }
        Command::Inverse {
            model,
            input,
            hi_threshold,
            lo_threshold,
            bond_width,
            angle_width,
            report,
            annotate_out,
            tighten_budget,
        } => {
            let summary = pipeline::run_inverse(&pipeline::InverseParams {
                model,
                input,
                hi_threshold,
                lo_threshold,
                bond_bin_width: bond_width,
                angle_bin_width: angle_width,
                report_out: report.clone(),
                annotate_out,
                tighten_budget,
            })?;
            println!(
                "analyzed {} structures: {} high-region cycles, {} low-region cycles -> {}",
                summary.structures,
                summary.high_cycles,
                summary.low_cycles,
                report.display()
            );
        }
        Command::Plot { kind } => {
            let params = match kind {
                PlotCommand::Pd { input, grid, out } => {
                    let spec = grid.spec().map_err(config_error)?;
                    pipeline::PlotParams::Pd {
                        input,
                        window: (spec.lo, spec.hi),
                        out,
                    }
                }
                PlotCommand::Coeff { model, out } => pipeline::PlotParams::Coeff { model, out },
                PlotCommand::Pca {
                    input,
                    by_density,
                    out,
                } => pipeline::PlotParams::Pca {
                    input,
                    color_by_density: by_density,
                    out,
                },
                PlotCommand::Hist { report, kind, out } => pipeline::PlotParams::Hist {
                    report,
                    kind: match kind {
                        HistArg::Bond => pipeline::HistKind::Bond,
                        HistArg::Angle => pipeline::HistKind::Angle,
                    },
                    out,
                },
            };
            let path = pipeline::run_plot(&params)?;
            println!("wrote {}", path.display());
        }
        Command::Fetch {
            url,
            dest,
            sha256,
            offline,
        } => match fetch::fetch_dataset(&url, &dest, sha256.as_deref(), offline) {
            Ok(fetch::FetchOutcome::Cached(p)) => println!("cached archive is valid: {}", p.display()),
            Ok(fetch::FetchOutcome::Downloaded(p)) => println!("downloaded {}", p.display()),
            Ok(fetch::FetchOutcome::SkippedOffline) => {
                println!("offline mode: skipping download of {url}")
            }
            Err(e) => return Err(config_error(e.to_string())),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
