//! Binary container for descriptor grids.
//!
//! Layout (little-endian): magic `PHDESC1\0`, u32 bins, f64 lo, f64 hi,
//! u32 sample count, then row-major f64 grids back to back. A sidecar CSV
//! manifest (see [`crate::io::manifest`]) ties sample indices to structure
//! ids and labels.
//!
//! Standardization stats reuse the header with exactly two grids following
//! (mean, then std); there the count field records how many training
//! histograms the stats were fitted on.

use std::path::Path;

use crate::descriptor::{GridSpec, StandardizationStats, STD_EPSILON};
use crate::io::{atomic_write, IoError};

pub const FEATURE_MAGIC: [u8; 8] = *b"PHDESC1\0";

fn push_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IoError> {
        if self.at + n > self.bytes.len() {
            return Err(IoError::Format(format!(
                "truncated feature file: wanted {n} bytes at offset {}",
                self.at
            )));
        }
        let slice = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, IoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, IoError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn grid(&mut self, cells: usize) -> Result<Vec<f64>, IoError> {
        let raw = self.take(cells * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn encode_header(spec: GridSpec, count: u32) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&FEATURE_MAGIC);
    push_u32(&mut out, spec.bins);
    push_f64(&mut out, spec.lo);
    push_f64(&mut out, spec.hi);
    push_u32(&mut out, count);
    out
}

fn decode_header(reader: &mut Reader) -> Result<(GridSpec, u32), IoError> {
    let magic = reader.take(8)?;
    if magic != FEATURE_MAGIC {
        return Err(IoError::Format(format!(
            "bad magic {magic:?}, expected {FEATURE_MAGIC:?}"
        )));
    }
    let bins = reader.u32()?;
    let lo = reader.f64()?;
    let hi = reader.f64()?;
    let count = reader.u32()?;
    let spec = GridSpec::new(bins, lo, hi)
        .map_err(|e| IoError::Format(format!("bad grid spec in header: {e}")))?;
    Ok((spec, count))
}

/// Write grids (each of length bins²) under one spec.
pub fn write_features(path: &Path, spec: GridSpec, grids: &[Vec<f64>]) -> Result<(), IoError> {
    let mut out = encode_header(spec, grids.len() as u32);
    for (i, grid) in grids.iter().enumerate() {
        if grid.len() != spec.cells() {
            return Err(IoError::Format(format!(
                "grid {i} has {} cells, spec wants {}",
                grid.len(),
                spec.cells()
            )));
        }
        for &v in grid {
            push_f64(&mut out, v);
        }
    }
    atomic_write(path, &out)
}

pub fn read_features(path: &Path) -> Result<(GridSpec, Vec<Vec<f64>>), IoError> {
    let bytes = std::fs::read(path)?;
    let mut reader = Reader {
        bytes: &bytes,
        at: 0,
    };
    let (spec, count) = decode_header(&mut reader)?;
    let grids = (0..count)
        .map(|_| reader.grid(spec.cells()))
        .collect::<Result<Vec<_>, _>>()?;
    if reader.at != bytes.len() {
        return Err(IoError::Format(format!(
            "{} trailing bytes after {count} grids",
            bytes.len() - reader.at
        )));
    }
    Ok((spec, grids))
}

/// Stats file: header (count = fit-set size) + mean grid + std grid.
pub fn write_stats(path: &Path, stats: &StandardizationStats) -> Result<(), IoError> {
    let mut out = encode_header(stats.spec, stats.fitted_on);
    for &v in &stats.mean {
        push_f64(&mut out, v);
    }
    for &v in &stats.std {
        push_f64(&mut out, v);
    }
    atomic_write(path, &out)
}

pub fn read_stats(path: &Path) -> Result<StandardizationStats, IoError> {
    let bytes = std::fs::read(path)?;
    let mut reader = Reader {
        bytes: &bytes,
        at: 0,
    };
    let (spec, fitted_on) = decode_header(&mut reader)?;
    let mean = reader.grid(spec.cells())?;
    let std = reader.grid(spec.cells())?;
    if reader.at != bytes.len() {
        return Err(IoError::Format("trailing bytes after stats grids".into()));
    }
    if std.iter().any(|&s| !(s > 0.0)) {
        return Err(IoError::Format("stats std grid has non-positive entries".into()));
    }
    Ok(StandardizationStats {
        spec,
        mean,
        std,
        epsilon: STD_EPSILON,
        fitted_on,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.phdesc");
        let spec = GridSpec::new(3, 0.0, 8.0).unwrap();
        let grids = vec![
            (0..9).map(|i| i as f64 * 0.125).collect::<Vec<_>>(),
            (0..9).map(|i| (9 - i) as f64 * 0.0625).collect::<Vec<_>>(),
        ];
        write_features(&path, spec, &grids).unwrap();
        let (spec2, grids2) = read_features(&path).unwrap();
        assert_eq!(spec2, spec);
        assert_eq!(grids2, grids);
    }

    #[test]
    fn stats_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stats.phdesc");
        let spec = GridSpec::new(2, 0.0, 1.0).unwrap();
        let stats = StandardizationStats {
            spec,
            mean: vec![0.1, 0.2, 0.3, 0.4],
            std: vec![1.0, 0.5, STD_EPSILON, 2.0],
            epsilon: STD_EPSILON,
            fitted_on: 7,
        };
        write_stats(&path, &stats).unwrap();
        let back = read_stats(&path).unwrap();
        assert_eq!(back, stats);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"NOTMAGIC00000000000000000000").unwrap();
        assert!(matches!(read_features(&path), Err(IoError::Format(_))));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.phdesc");
        let spec = GridSpec::new(3, 0.0, 8.0).unwrap();
        write_features(&path, spec, &[vec![0.0; 9]]).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(read_features(&path), Err(IoError::Format(_))));
    }
}
