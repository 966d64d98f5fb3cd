//! Persistence diagram CSV: header `dim,birth,death`, one row per pair,
//! values with 9 significant digits, `inf` for essential deaths.
//!
//! Zero-persistence pairs are omitted (they carry no descriptor content).

use std::path::Path;

use crate::io::{atomic_write, IoError};
use crate::persistence::PersistenceDiagram;

fn fmt_sig9(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.8e}")
    }
}

pub fn diagram_to_csv(diagram: &PersistenceDiagram) -> String {
    let mut out = String::from("dim,birth,death\n");
    for pair in diagram.pairs() {
        if pair.is_zero_persistence() {
            continue;
        }
        out.push_str(&format!(
            "{},{},{}\n",
            pair.dim,
            fmt_sig9(pair.birth),
            fmt_sig9(pair.death)
        ));
    }
    out
}

pub fn write_diagram_csv(path: &Path, diagram: &PersistenceDiagram) -> Result<(), IoError> {
    atomic_write(path, diagram_to_csv(diagram).as_bytes())
}

/// Rows of `(dim, birth, death)`; death is +∞ for `inf`.
pub fn read_diagram_csv(path: &Path) -> Result<Vec<(u8, f64, f64)>, IoError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "dim,birth,death" {
                return Err(IoError::parse(path, 1, format!("bad header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(IoError::parse(path, i + 1, "expected dim,birth,death"));
        }
        let dim: u8 = parts[0]
            .parse()
            .map_err(|e| IoError::parse(path, i + 1, format!("bad dim: {e}")))?;
        let birth: f64 = parts[1]
            .parse()
            .map_err(|e| IoError::parse(path, i + 1, format!("bad birth: {e}")))?;
        let death: f64 = if parts[2] == "inf" {
            f64::INFINITY
        } else {
            parts[2]
                .parse()
                .map_err(|e| IoError::parse(path, i + 1, format!("bad death: {e}")))?
        };
        rows.push((dim, birth, death));
    }
    Ok(rows)
}
