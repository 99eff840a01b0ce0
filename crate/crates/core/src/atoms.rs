//! Plain-text atom files.
//!
//! One atom per line as `re im`, optionally followed by a positive weight.
//! Blank lines and lines starting with `#` are skipped.

use std::fmt::Write as _;
use std::path::Path;

use crate::{Complex, Error, Result};

/// Atoms and, when every line carried one, their weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AtomFile {
    pub atoms: Vec<Complex>,
    pub weights: Option<Vec<f64>>,
}

pub fn parse_atoms(text: &str, origin: &Path) -> Result<AtomFile> {
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    let mut weighted_lines = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: origin.into(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err(format!("expected 2 or 3 columns, found {}", fields.len())));
        }
        let mut nums = [0.0; 3];
        for (slot, f) in nums.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .map_err(|e| err(format!("{f:?}: {e}")))?;
            if !slot.is_finite() {
                return Err(err(format!("{f:?} is not finite")));
            }
        }
        atoms.push(Complex::new(nums[0], nums[1]));
        if fields.len() == 3 {
            if nums[2] <= 0.0 {
                return Err(err("weights must be positive".into()));
            }
            weighted_lines += 1;
            weights.push(nums[2]);
        } else {
            weights.push(1.0);
        }
    }
    if weighted_lines != 0 && weighted_lines != atoms.len() {
        return Err(Error::Parse {
            path: origin.into(),
            line: 0,
            message: "either every atom carries a weight or none does".into(),
        });
    }
    Ok(AtomFile {
        atoms,
        weights: (weighted_lines > 0).then_some(weights),
    })
}

pub fn read_atoms(path: &Path) -> Result<AtomFile> {
    let text = std::fs::read_to_string(path)?;
    parse_atoms(&text, path)
}

/// Formats atoms with enough digits to round-trip exactly.
pub fn format_atoms(atoms: &[Complex], weights: Option<&[f64]>) -> String {
    let mut out = String::with_capacity(atoms.len() * 48);
    for (k, z) in atoms.iter().enumerate() {
        match weights {
            Some(w) => writeln!(out, "{:e} {:e} {:e}", z.re, z.im, w[k]),
            None => writeln!(out, "{:e} {:e}", z.re, z.im),
        }
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn write_atoms(path: &Path, atoms: &[Complex], weights: Option<&[f64]>) -> Result<()> {
    std::fs::write(path, format_atoms(atoms, weights))?;
    Ok(())
}
