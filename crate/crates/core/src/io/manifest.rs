//! CSV manifests.
//!
//! * Sample manifest (`index,id,label,density`) — the sidecar of a feature
//!   file; label/density may be empty.
//! * Dataset manifest (`id,kind,density,n_atoms,seed,energy_per_atom`) —
//!   written by the generator.
//!
//! Fields never contain commas; ids are validated on write.

use std::path::Path;

use crate::io::{atomic_write, fmt_f64, IoError};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub index: u32,
    pub id: String,
    pub label: Option<f64>,
    pub density: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub id: String,
    pub kind: String,
    pub density: f64,
    pub n_atoms: usize,
    pub seed: u64,
    pub energy_per_atom: f64,
}

fn check_field(path: &Path, value: &str) -> Result<(), IoError> {
    if value.contains(',') || value.contains('\n') {
        return Err(IoError::Format(format!(
            "{}: field `{value}` may not contain commas or newlines",
            path.display()
        )));
    }
    Ok(())
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn parse_opt_f64(path: &Path, line: usize, s: &str) -> Result<Option<f64>, IoError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|e| IoError::parse(path, line, format!("bad number `{s}`: {e}")))
}

pub fn write_sample_manifest(path: &Path, records: &[SampleRecord]) -> Result<(), IoError> {
    let mut out = String::from("index,id,label,density\n");
    for r in records {
        check_field(path, &r.id)?;
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.index,
            r.id,
            opt_f64(r.label),
            opt_f64(r.density)
        ));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_sample_manifest(path: &Path) -> Result<Vec<SampleRecord>, IoError> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "index,id,label,density" {
                return Err(IoError::parse(path, 1, format!("bad header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(IoError::parse(path, i + 1, format!("expected 4 fields, got {}", parts.len())));
        }
        records.push(SampleRecord {
            index: parts[0]
                .parse()
                .map_err(|e| IoError::parse(path, i + 1, format!("bad index: {e}")))?,
            id: parts[1].to_string(),
            label: parse_opt_f64(path, i + 1, parts[2])?,
            density: parse_opt_f64(path, i + 1, parts[3])?,
        });
    }
    Ok(records)
}

pub fn write_dataset_manifest(path: &Path, records: &[DatasetRecord]) -> Result<(), IoError> {
    let mut out = String::from("id,kind,density,n_atoms,seed,energy_per_atom\n");
    for r in records {
        check_field(path, &r.id)?;
        check_field(path, &r.kind)?;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.id,
            r.kind,
            fmt_f64(r.density),
            r.n_atoms,
            r.seed,
            fmt_f64(r.energy_per_atom)
        ));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_dataset_manifest(path: &Path) -> Result<Vec<DatasetRecord>, IoError> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "id,kind,density,n_atoms,seed,energy_per_atom" {
                return Err(IoError::parse(path, 1, format!("bad header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 6 {
            return Err(IoError::parse(path, i + 1, format!("expected 6 fields, got {}", parts.len())));
        }
        let bad = |e: String| IoError::parse(path, i + 1, e);
        records.push(DatasetRecord {
            id: parts[0].to_string(),
            kind: parts[1].to_string(),
            density: parts[2].parse().map_err(|e| bad(format!("bad density: {e}")))?,
            n_atoms: parts[3].parse().map_err(|e| bad(format!("bad n_atoms: {e}")))?,
            seed: parts[4].parse().map_err(|e| bad(format!("bad seed: {e}")))?,
            energy_per_atom: parts[5]
                .parse()
                .map_err(|e| bad(format!("bad energy: {e}")))?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let records = vec![
            SampleRecord {
                index: 0,
                id: "s00000".into(),
                label: Some(-1.25),
                density: Some(2.4),
            },
            SampleRecord {
                index: 1,
                id: "s00001".into(),
                label: None,
                density: None,
            },
        ];
        write_sample_manifest(&path, &records).unwrap();
        assert_eq!(read_sample_manifest(&path).unwrap(), records);
    }

    #[test]
    fn dataset_manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let records = vec![DatasetRecord {
            id: "s00000".into(),
            kind: "perturbed".into(),
            density: 2.0,
            n_atoms: 64,
            seed: 17,
            energy_per_atom: -0.875,
        }];
        write_dataset_manifest(&path, &records).unwrap();
        assert_eq!(read_dataset_manifest(&path).unwrap(), records);
    }

    #[test]
    fn commas_in_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let records = vec![SampleRecord {
            index: 0,
            id: "a,b".into(),
            label: None,
            density: None,
        }];
        assert!(write_sample_manifest(&path, &records).is_err());
    }
}
