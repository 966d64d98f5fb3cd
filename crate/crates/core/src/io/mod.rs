//! File formats and plot emission.
//!
//! * extended-XYZ for structures (orthorhombic lattices only),
//! * a little-endian binary container for descriptor grids and z-score stats,
//! * a self-describing JSON model file,
//! * `dim,birth,death` CSV for diagrams,
//! * CSV manifests tying sample indices to ids/labels,
//! * deterministic SVG emitters for the standard plots.
//!
//! All writers go through [`atomic_write`]: a temp file in the target
//! directory followed by a rename, so partial outputs never land under the
//! final name.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::geometry::GeometryError;

pub mod diagram_csv;
pub mod extxyz;
pub mod feature_file;
pub mod manifest;
pub mod model_file;
pub mod svg;

pub use diagram_csv::{diagram_to_csv, read_diagram_csv, write_diagram_csv};
pub use extxyz::{frames_to_string, parse_extxyz, parse_extxyz_str, write_extxyz, ExtxyzFrame};
pub use feature_file::{read_features, read_stats, write_features, write_stats, FEATURE_MAGIC};
pub use manifest::{
    read_dataset_manifest, read_sample_manifest, write_dataset_manifest, write_sample_manifest,
    DatasetRecord, SampleRecord,
};
pub use model_file::{model_to_json, read_model, write_model};
pub use svg::{emit_svg, render_svg, SvgPlot};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("bad file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl IoError {
    pub(crate) fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }
}

/// Write via a temp file in the same directory plus rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| IoError::Io(e.error))?;
    Ok(())
}

/// 17 significant digits: enough for exact f64 round trips.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_round_trips_f64_exactly() {
        for &x in &[0.1, -3.5355339059327378, 1e-300, 12.0, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
    }
}
