use std::path::Path;

use super::write_atomic;
use crate::compressor::FrequencyTable;
use crate::error::{Error, Result};

/// Parses `token<TAB>count` lines. Tokens are carried for readability only;
/// line order is row order.
pub fn parse_frequency_text(text: &str) -> Result<(Vec<String>, Vec<u64>)> {
    let mut tokens = Vec::new();
    let mut counts = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (token, count) = line.rsplit_once('\t').ok_or_else(|| Error::Parse {
            line: line_no,
            message: "expected token<TAB>count".into(),
        })?;
        let count: u64 = count.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("count {count:?} is not a nonnegative integer"),
        })?;
        tokens.push(token.to_string());
        counts.push(count);
    }
    Ok((tokens, counts))
}

/// Reads tokens and raw counts without any row-count check.
pub fn read_frequency_file(path: &Path) -> Result<(Vec<String>, Vec<u64>)> {
    parse_frequency_text(&std::fs::read_to_string(path)?)
}

/// Reads exactly `rows` counts, flooring zeros to 1.
pub fn read_frequencies(path: &Path, rows: usize) -> Result<FrequencyTable> {
    let (_, counts) = read_frequency_file(path)?;
    if counts.len() != rows {
        return Err(Error::FrequencyCountMismatch {
            expected: rows,
            actual: counts.len(),
        });
    }
    Ok(FrequencyTable::from_counts(&counts))
}

pub fn write_frequency_file(path: &Path, tokens: &[String], counts: &[u64]) -> Result<()> {
    if tokens.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: counts.len(),
            actual: tokens.len(),
        });
    }
    let mut text = String::new();
    for (t, c) in tokens.iter().zip(counts) {
        text.push_str(t);
        text.push('\t');
        text.push_str(&c.to_string());
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}
