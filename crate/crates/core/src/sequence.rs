//! Reliability sequence handling for polar code construction.
//!
//! The shipped asset is a length-1024 universal reliability sequence in the
//! 5G style: a plain-text file with one channel index per line, least
//! reliable first, most reliable last. Sequences for shorter block lengths
//! are obtained by the standard sub-sequence extraction: keep only the
//! entries smaller than N, preserving their order.

use crate::{Error, Result};

/// Universal length-1024 sequence shipped with the crate.
const SEQUENCE_1024: &str = include_str!("../assets/reliability_1024.txt");

pub const MAX_SEQUENCE_N: usize = 1024;

/// Parse a reliability sequence from its text form.
pub fn parse_sequence(text: &str) -> Result<Vec<usize>> {
    let mut seq = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let idx: usize = line
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad sequence entry on line {}", lineno + 1)))?;
        seq.push(idx);
    }
    Ok(seq)
}

/// The built-in length-1024 sequence, least reliable first.
pub fn builtin_sequence() -> Vec<usize> {
    parse_sequence(SEQUENCE_1024).expect("shipped sequence asset is valid")
}

/// Load a sequence from an external asset file.
pub fn load_sequence(path: &std::path::Path) -> Result<Vec<usize>> {
    parse_sequence(&std::fs::read_to_string(path)?)
}

/// Extract the length-N sub-sequence: entries `< N`, order preserved.
pub fn subsequence(full: &[usize], n: usize) -> Result<Vec<usize>> {
    if full.len() < n {
        return Err(Error::SequenceTooShort { n, max: full.len() });
    }
    let seq: Vec<usize> = full.iter().copied().filter(|&i| i < n).collect();
    if seq.len() != n {
        return Err(Error::InvalidInput(format!(
            "sequence does not cover all indices below {n}"
        )));
    }
    Ok(seq)
}
