//! Text formats: quartet lists (`a b || c d` strict, `a b | c d` weak, `#`
//! comments), partition files (`Block1: name …`), PHYLIP-style distance
//! matrices, and the JSON run report.

use crate::quartet::{
    CompleteSystem, FullMultipartiteSystem, FullSystem, Quartet, QuartetKind, SystemError,
};
use crate::taxa::{Taxon, TaxonPartition};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {0}: cannot parse quartet `{1}`")]
    BadQuartetLine(usize, String),
    #[error("line {0}: cannot parse partition entry `{1}`")]
    BadPartitionLine(usize, String),
    #[error("unknown taxon `{0}`")]
    UnknownTaxon(String),
    #[error("taxon `{0}` listed twice in the partition")]
    DuplicateTaxon(String),
    #[error("partition file declares no blocks")]
    EmptyPartition,
    #[error("line {0}: cannot parse matrix row `{1}`")]
    BadMatrixLine(usize, String),
    #[error("matrix declares {0} taxa but provides {1} rows")]
    MatrixShape(usize, usize),
    #[error("malformed quartet system: {0}")]
    Malformed(#[from] SystemError),
}

/// Parse `Block<i>: name name …` lines; taxa get ids in order of first
/// appearance.
pub fn parse_partition(text: &str) -> Result<TaxonPartition, FormatError> {
    let mut names: Vec<String> = Vec::new();
    let mut blocks: Vec<Vec<Taxon>> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (_, rest) = line
            .split_once(':')
            .ok_or_else(|| FormatError::BadPartitionLine(no + 1, raw.to_string()))?;
        let mut block = Vec::new();
        for name in rest.split_whitespace() {
            if names.iter().any(|n| n == name) {
                return Err(FormatError::DuplicateTaxon(name.to_string()));
            }
            block.push(names.len() as Taxon);
            names.push(name.to_string());
        }
        if block.is_empty() {
            return Err(FormatError::BadPartitionLine(no + 1, raw.to_string()));
        }
        blocks.push(block);
    }
    if blocks.is_empty() {
        return Err(FormatError::EmptyPartition);
    }
    Ok(TaxonPartition::new(names, blocks).expect("first-appearance ids partition the universe"))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

/// Parse quartet lines against a partition's taxon names.
pub fn parse_quartets(text: &str, p: &TaxonPartition) -> Result<Vec<Quartet>, FormatError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let bad = || FormatError::BadQuartetLine(no + 1, raw.to_string());
        let (left, right, kind) = if let Some((l, r)) = line.split_once("||") {
            (l, r, QuartetKind::Strict)
        } else if let Some((l, r)) = line.split_once('|') {
            (l, r, QuartetKind::Weak)
        } else {
            return Err(bad());
        };
        let side = |s: &str| -> Result<[Taxon; 2], FormatError> {
            let names: Vec<&str> = s.split_whitespace().collect();
            if names.len() != 2 {
                return Err(bad());
            }
            let mut ids = [0; 2];
            for (i, name) in names.iter().enumerate() {
                ids[i] = p
                    .taxon_by_name(name)
                    .ok_or_else(|| FormatError::UnknownTaxon(name.to_string()))?;
            }
            Ok(ids)
        };
        let [a, b] = side(left)?;
        let [c, d] = side(right)?;
        out.push(match kind {
            QuartetKind::Strict => Quartet::strict(a, b, c, d),
            QuartetKind::Weak => Quartet::weak(a, b, c, d),
        });
    }
    Ok(out)
}

/// The parsed system class, auto-detected: any quartet with all four taxa
/// in one block makes the input a full A-partite system.
pub enum ParsedSystem {
    Complete(CompleteSystem),
    Full(FullMultipartiteSystem),
}

/// Build the system a quartet file describes; `force_full` lifts a purely
/// cross input into a full A-partite system with unresolved blocks.
pub fn build_system(
    p: &TaxonPartition,
    quartets: &[Quartet],
    force_full: bool,
) -> Result<ParsedSystem, FormatError> {
    let within_block = |q: &Quartet| {
        let b = p.block_of(q.taxa()[0]);
        b.is_some() && q.taxa().iter().all(|&t| p.block_of(t) == b)
    };
    let (within, cross): (Vec<Quartet>, Vec<Quartet>) =
        quartets.iter().partition(|q| within_block(q));
    let cross_sys = CompleteSystem::new(p.clone(), &cross)?;
    if within.is_empty() && !force_full {
        return Ok(ParsedSystem::Complete(cross_sys));
    }
    let mut per_block = Vec::new();
    for i in 0..p.num_blocks() {
        let qs: Vec<Quartet> = within
            .iter()
            .filter(|q| p.block_of(q.taxa()[0]) == Some(i))
            .copied()
            .collect();
        per_block.push(FullSystem::new(p.block(i).clone(), &qs)?);
    }
    Ok(ParsedSystem::Full(FullMultipartiteSystem::new(
        cross_sys, per_block,
    )?))
}

/// Render a system back into the quartet line format (strict quartets only;
/// weak entries are implied).
pub fn render_quartets(strict: &[Quartet], p: &TaxonPartition) -> String {
    let mut lines: Vec<String> = strict
        .iter()
        .map(|q| {
            let [a, b] = q.pair1();
            let [c, d] = q.pair2();
            format!("{} {} || {} {}", p.name(a), p.name(b), p.name(c), p.name(d))
        })
        .collect();
    lines.sort();
    lines.join("\n") + "\n"
}

pub fn render_partition(p: &TaxonPartition) -> String {
    (0..p.num_blocks())
        .map(|i| {
            let names: Vec<&str> = p.block(i).iter().map(|t| p.name(t)).collect();
            format!("Block{}: {}", i + 1, names.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

/// Parse a PHYLIP-style square matrix: first line the count, then
/// `name v1 v2 …` rows.
pub fn parse_square_matrix(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(no, l)| (no, strip_comment(l)))
        .filter(|(_, l)| !l.is_empty());
    let (no, head) = lines
        .next()
        .ok_or_else(|| FormatError::BadMatrixLine(1, String::new()))?;
    let count: usize = head
        .trim()
        .parse()
        .map_err(|_| FormatError::BadMatrixLine(no + 1, head.to_string()))?;
    let mut names = Vec::new();
    let mut values = Vec::new();
    for (no, line) in lines {
        let mut it = line.split_whitespace();
        let name = it
            .next()
            .ok_or_else(|| FormatError::BadMatrixLine(no + 1, line.to_string()))?;
        let row: Result<Vec<f64>, _> = it.map(str::parse).collect();
        let row = row.map_err(|_| FormatError::BadMatrixLine(no + 1, line.to_string()))?;
        if row.len() != count {
            return Err(FormatError::BadMatrixLine(no + 1, line.to_string()));
        }
        names.push(name.to_string());
        values.push(row);
    }
    if names.len() != count {
        return Err(FormatError::MatrixShape(count, names.len()));
    }
    Ok((names, values))
}

/// The machine-readable run report.
#[derive(Debug, Serialize)]
pub struct Report {
    pub verdict: String,
    pub phase: String,
    pub displaying_family: Vec<Vec<String>>,
    pub laminar_family: Vec<Vec<String>>,
    pub newick: Option<String>,
    pub witness: Option<ReportWitness>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportWitness {
    NonLaminarTriple {
        members: Vec<Vec<String>>,
        blocks: (usize, usize, usize),
    },
    DisplayMismatch { taxa: Vec<String> },
}
