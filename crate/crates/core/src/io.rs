//! CSV ranking files.
//!
//! One ranking per line, comma separated. In `ranks` format column `i` holds
//! the rank of item `i`; in `ordering` format a row lists items from most to
//! least preferred. An optional header row (detected by a non-numeric field)
//! supplies item labels.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::sample::RankingSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingFormat {
    #[default]
    Ranks,
    Ordering,
}

impl fmt::Display for RankingFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankingFormat::Ranks => "ranks",
            RankingFormat::Ordering => "ordering",
        })
    }
}

impl FromStr for RankingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ranks" | "rank" => Ok(RankingFormat::Ranks),
            "ordering" | "order" => Ok(RankingFormat::Ordering),
            other => Err(Error::Domain(format!("unknown ranking format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub format: RankingFormat,
    pub one_based: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { format: RankingFormat::Ranks, one_based: true }
    }
}

fn fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

/// Parses rankings from CSV text. Errors carry the 1-based line number.
pub fn parse_rankings(text: &str, opts: CsvOptions) -> Result<RankingSample> {
    let mut labels: Option<Vec<String>> = None;
    let mut rankings = Vec::new();
    let mut width: Option<usize> = None;
    for (k, raw) in text.lines().enumerate() {
        let row = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let cells = fields(line);
        if let Some(w) = width {
            if cells.len() != w {
                return Err(Error::Parse { row, message: format!("expected {w} fields, found {}", cells.len()) });
            }
        }
        let parsed: std::result::Result<Vec<usize>, _> = cells.iter().map(|c| c.parse::<usize>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if width.is_none() => {
                labels = Some(cells.iter().map(|c| c.to_string()).collect());
                width = Some(cells.len());
                continue;
            }
            Err(e) => return Err(Error::Parse { row, message: format!("non-integer field: {e}") }),
        };
        width = Some(values.len());
        let zero: Vec<usize> = if opts.one_based {
            values
                .iter()
                .map(|&v| v.checked_sub(1))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Parse { row, message: "one-based entries must be at least 1".into() })?
        } else {
            values
        };
        let perm = match opts.format {
            RankingFormat::Ranks => Permutation::new(zero),
            RankingFormat::Ordering => Permutation::from_ordering(&zero),
        }
        .map_err(|e| Error::Parse { row, message: format!("not a bijection: {e}") })?;
        rankings.push(perm);
    }
    if rankings.is_empty() {
        return Err(Error::Parse { row: 0, message: "no rankings found".into() });
    }
    let sample = RankingSample::new(rankings)?;
    match labels {
        Some(l) => sample.with_labels(l),
        None => Ok(sample),
    }
}

pub fn read_rankings(path: impl AsRef<Path>, opts: CsvOptions) -> Result<RankingSample> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_rankings(&text, opts)
}

/// Inverse of [`parse_rankings`]; weights are not written.
pub fn emit_rankings(sample: &RankingSample, opts: CsvOptions) -> String {
    let mut out = String::new();
    if let Some(labels) = sample.labels() {
        out.push_str(&labels.join(","));
        out.push('\n');
    }
    let shift = usize::from(opts.one_based);
    for r in sample.iter() {
        let values = match opts.format {
            RankingFormat::Ranks => r.ranks().to_vec(),
            RankingFormat::Ordering => r.ordering(),
        };
        let cells: Vec<String> = values.iter().map(|v| (v + shift).to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
