//! Extended-XYZ reader/writer.
//!
//! Per frame: an atom-count line, a comment line of `key=value` fields
//! (values may be double-quoted), then one `species x y z` line per atom.
//! The comment line must carry `Lattice="ax 0 0 0 by 0 0 0 cz"`; only
//! orthorhombic lattices (zero off-diagonals) are accepted. Recognized
//! optional fields: `energy_per_atom`, `id`, `density`. Extra per-atom
//! columns are ignored on read; [`ExtxyzFrame::regions`] adds a trailing
//! string column on write (used by the inverse-analysis annotation).

use std::path::Path;

use crate::geometry::PeriodicStructure;
use crate::io::{atomic_write, fmt_f64, IoError};

#[derive(Debug, Clone, PartialEq)]
pub struct ExtxyzFrame {
    pub structure: PeriodicStructure,
    pub id: Option<String>,
    pub density: Option<f64>,
    pub regions: Option<Vec<String>>,
}

impl ExtxyzFrame {
    pub fn new(structure: PeriodicStructure) -> Self {
        Self {
            structure,
            id: None,
            density: None,
            regions: None,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = Some(density);
        self
    }
}

/// Split a comment line into key=value pairs, honoring double quotes.
fn split_key_values(line: &str) -> Vec<(String, String)> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    for c in line.chars() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                current.push(c);
            }
            c if c.is_whitespace() && !in_quotes => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
        .into_iter()
        .filter_map(|t| {
            let (k, v) = t.split_once('=')?;
            Some((k.to_string(), v.trim_matches('"').to_string()))
        })
        .collect()
}

fn parse_lattice(value: &str, path: &Path, line: usize) -> Result<[f64; 3], IoError> {
    let numbers: Vec<f64> = value
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| IoError::parse(path, line, format!("bad lattice number: {e}")))?;
    if numbers.len() != 9 {
        return Err(IoError::parse(
            path,
            line,
            format!("lattice needs 9 numbers, got {}", numbers.len()),
        ));
    }
    for (i, &v) in numbers.iter().enumerate() {
        let diagonal = i == 0 || i == 4 || i == 8;
        if !diagonal && v.abs() > 1e-10 {
            return Err(IoError::parse(
                path,
                line,
                format!("non-orthorhombic lattice: off-diagonal entry {v} at position {i}"),
            ));
        }
    }
    let cell = [numbers[0], numbers[4], numbers[8]];
    if cell.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
        return Err(IoError::parse(
            path,
            line,
            format!("lattice lengths must be positive, got {cell:?}"),
        ));
    }
    Ok(cell)
}

/// Parse every frame of an extended-XYZ file. An empty file is an empty
/// list, not an error.
pub fn parse_extxyz(path: &Path) -> Result<Vec<ExtxyzFrame>, IoError> {
    let text = std::fs::read_to_string(path)?;
    parse_extxyz_str(&text, path)
}

/// Parse from a string; `path` only labels error messages.
pub fn parse_extxyz_str(text: &str, path: &Path) -> Result<Vec<ExtxyzFrame>, IoError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut frames = Vec::new();
    let mut cursor = 0usize;
    while cursor < lines.len() {
        if lines[cursor].trim().is_empty() {
            cursor += 1;
            continue;
        }
        let count_line = cursor;
        let n_atoms: usize = lines[count_line].trim().parse().map_err(|_| {
            IoError::parse(
                path,
                count_line + 1,
                format!("expected an atom count, got `{}`", lines[count_line].trim()),
            )
        })?;
        if n_atoms == 0 {
            return Err(IoError::parse(path, count_line + 1, "atom count must be >= 1"));
        }
        let comment_line = count_line + 1;
        if comment_line >= lines.len() {
            return Err(IoError::parse(path, comment_line + 1, "missing comment line"));
        }
        let fields = split_key_values(lines[comment_line]);
        let mut cell = None;
        let mut energy = None;
        let mut id = None;
        let mut density = None;
        for (key, value) in &fields {
            match key.as_str() {
                "Lattice" => cell = Some(parse_lattice(value, path, comment_line + 1)?),
                "energy_per_atom" => {
                    let e: f64 = value.parse().map_err(|e| {
                        IoError::parse(path, comment_line + 1, format!("bad energy_per_atom: {e}"))
                    })?;
                    if !e.is_finite() {
                        return Err(IoError::parse(
                            path,
                            comment_line + 1,
                            "energy_per_atom must be finite",
                        ));
                    }
                    energy = Some(e);
                }
                "id" => id = Some(value.clone()),
                "density" => {
                    density = Some(value.parse::<f64>().map_err(|e| {
                        IoError::parse(path, comment_line + 1, format!("bad density: {e}"))
                    })?)
                }
                _ => {}
            }
        }
        let cell = cell.ok_or_else(|| {
            IoError::parse(path, comment_line + 1, "comment line is missing Lattice=\"...\"")
        })?;
        let mut positions = Vec::with_capacity(n_atoms);
        let mut species = Vec::with_capacity(n_atoms);
        for k in 0..n_atoms {
            let line_no = comment_line + 1 + k;
            let line = lines.get(line_no).ok_or_else(|| {
                IoError::parse(
                    path,
                    line_no + 1,
                    format!("frame declares {n_atoms} atoms but the file ends after {k}"),
                )
            })?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() < 4 {
                return Err(IoError::parse(
                    path,
                    line_no + 1,
                    format!("atom line needs `species x y z`, got `{}`", line.trim()),
                ));
            }
            let mut coords = [0.0; 3];
            for (axis, part) in parts[1..4].iter().enumerate() {
                let v: f64 = part.parse().map_err(|e| {
                    IoError::parse(path, line_no + 1, format!("bad coordinate: {e}"))
                })?;
                if !v.is_finite() {
                    return Err(IoError::parse(path, line_no + 1, "non-finite coordinate"));
                }
                coords[axis] = v;
            }
            species.push(parts[0].to_string());
            positions.push(coords);
        }
        let mut structure = PeriodicStructure::with_species(positions, cell, species)
            .map_err(|e| IoError::parse(path, count_line + 1, e.to_string()))?;
        if let Some(e) = energy {
            structure
                .set_label(e)
                .map_err(|e| IoError::parse(path, comment_line + 1, e.to_string()))?;
        }
        frames.push(ExtxyzFrame {
            structure,
            id,
            density,
            regions: None,
        });
        cursor = comment_line + 1 + n_atoms;
    }
    Ok(frames)
}

pub fn frames_to_string(frames: &[ExtxyzFrame]) -> String {
    let mut out = String::new();
    for frame in frames {
        let s = &frame.structure;
        let cell = s.cell();
        out.push_str(&format!("{}\n", s.len()));
        let mut comment = format!(
            "Lattice=\"{} 0 0 0 {} 0 0 0 {}\"",
            fmt_f64(cell[0]),
            fmt_f64(cell[1]),
            fmt_f64(cell[2])
        );
        if frame.regions.is_some() {
            comment.push_str(" Properties=species:S:1:pos:R:3:region:S:1");
        } else {
            comment.push_str(" Properties=species:S:1:pos:R:3");
        }
        if let Some(e) = s.label() {
            comment.push_str(&format!(" energy_per_atom={}", fmt_f64(e)));
        }
        if let Some(id) = &frame.id {
            comment.push_str(&format!(" id={id}"));
        }
        if let Some(d) = frame.density {
            comment.push_str(&format!(" density={}", fmt_f64(d)));
        }
        out.push_str(&comment);
        out.push('\n');
        for (i, (p, sp)) in s.positions().iter().zip(s.species()).enumerate() {
            out.push_str(&format!(
                "{sp} {} {} {}",
                fmt_f64(p[0]),
                fmt_f64(p[1]),
                fmt_f64(p[2])
            ));
            if let Some(regions) = &frame.regions {
                out.push(' ');
                out.push_str(&regions[i]);
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_extxyz(path: &Path, frames: &[ExtxyzFrame]) -> Result<(), IoError> {
    atomic_write(path, frames_to_string(frames).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> std::path::PathBuf {
        std::path::PathBuf::from("test.extxyz")
    }

    #[test]
    fn two_atom_frame_with_energy() {
        let text = "2\nLattice=\"10 0 0 0 10 0 0 0 10\" energy_per_atom=-1.0 id=abc\nC 0 0 0\nC 1.5 0 0\n";
        let frames = parse_extxyz_str(text, &path()).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].structure.len(), 2);
        assert_eq!(frames[0].structure.label(), Some(-1.0));
        assert_eq!(frames[0].id.as_deref(), Some("abc"));
    }

    #[test]
    fn empty_file_is_empty_list() {
        assert!(parse_extxyz_str("", &path()).unwrap().is_empty());
        assert!(parse_extxyz_str("\n  \n", &path()).unwrap().is_empty());
    }

    #[test]
    fn round_trip_preserves_coordinates_exactly() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let cell = [9.7, 11.3, 10.1];
        let positions: Vec<[f64; 3]> = (0..17)
            .map(|_| {
                [
                    rng.random::<f64>() * cell[0],
                    rng.random::<f64>() * cell[1],
                    rng.random::<f64>() * cell[2],
                ]
            })
            .collect();
        let s = PeriodicStructure::new(positions, cell)
            .unwrap()
            .with_label(-2.375)
            .unwrap();
        let frame = ExtxyzFrame::new(s).with_id("rt").with_density(2.2);
        let text = frames_to_string(&[frame.clone()]);
        let back = parse_extxyz_str(&text, &path()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].id.as_deref(), Some("rt"));
        assert_eq!(back[0].density, Some(2.2));
        assert_eq!(back[0].structure.label(), Some(-2.375));
        for (a, b) in frame
            .structure
            .positions()
            .iter()
            .zip(back[0].structure.positions())
        {
            for axis in 0..3 {
                assert_eq!(a[axis].to_bits(), b[axis].to_bits());
            }
        }
    }

    #[test]
    fn non_orthorhombic_lattice_is_rejected_with_line_number() {
        let text = "1\nLattice=\"10 0.5 0 0 10 0 0 0 10\"\nC 0 0 0\n";
        let err = parse_extxyz_str(text, &path()).unwrap_err();
        match err {
            IoError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("non-orthorhombic"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn count_mismatch_is_reported() {
        let text = "3\nLattice=\"10 0 0 0 10 0 0 0 10\"\nC 0 0 0\nC 1 0 0\n";
        let err = parse_extxyz_str(text, &path()).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 5, .. }));
    }

    #[test]
    fn non_finite_coordinate_is_rejected() {
        let text = "1\nLattice=\"10 0 0 0 10 0 0 0 10\"\nC nan 0 0\n";
        let err = parse_extxyz_str(text, &path()).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 3, .. }));
    }

    #[test]
    fn multi_frame_files_parse_in_order() {
        let text = "1\nLattice=\"10 0 0 0 10 0 0 0 10\" id=a\nC 0 0 0\n1\nLattice=\"12 0 0 0 12 0 0 0 12\" id=b\nC 1 1 1\n";
        let frames = parse_extxyz_str(text, &path()).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].id.as_deref(), Some("a"));
        assert_eq!(frames[1].id.as_deref(), Some("b"));
        assert_eq!(frames[1].structure.cell(), [12.0, 12.0, 12.0]);
    }

    #[test]
    fn region_column_is_written() {
        let s = PeriodicStructure::new(vec![[0.0; 3], [1.0; 3]], [10.0, 10.0, 10.0]).unwrap();
        let mut frame = ExtxyzFrame::new(s);
        frame.regions = Some(vec!["high".into(), "none".into()]);
        let text = frames_to_string(&[frame]);
        assert!(text.contains("region:S:1"));
        assert!(text.lines().nth(2).unwrap().ends_with(" high"));
    }
}
