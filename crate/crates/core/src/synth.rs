//! Seeded random tables and controlled perturbations.
//!
//! Every random draw comes from a ChaCha stream addressed by
//! `(seed, purpose, row, col)`, so a cell's value does not depend on the order
//! in which cells are visited.

use std::collections::HashSet;
use std::fmt;

use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::metrics::{rms_with_transposition, rnss_tables, MetricConfig};
use crate::table::{parse_number, CellNumber, Table};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("out of bounds: {0}")]
    Bounds(String),
}

// Purposes keep streams for different jobs disjoint under the same seed.
const HEADERS: u64 = 1;
const VALUES: u64 = 2;
const SHUFFLE: u64 = 3;
const JITTER: u64 = 4;
const EDITS: u64 = 5;
const TRIALS: u64 = 6;

fn stream(seed: u64, purpose: u64, row: u64, col: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream((row << 32) ^ col);
    rng
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

fn word(rng: &mut impl Rng) -> String {
    let syllables = rng.random_range(2..=3);
    let mut w = String::with_capacity(2 * syllables);
    for _ in 0..syllables {
        w.push(*CONSONANTS.choose(rng).expect("non-empty") as char);
        w.push(*VOWELS.choose(rng).expect("non-empty") as char);
    }
    w
}

fn fresh_word(rng: &mut impl Rng, taken: &mut HashSet<String>) -> String {
    loop {
        let w = word(rng);
        if taken.insert(w.clone()) {
            return w;
        }
    }
}

fn data_value(seed: u64, purpose: u64, row: usize, col: usize) -> String {
    let tenths: u32 = stream(seed, purpose, row as u64, col as u64).random_range(1..=9999);
    format!("{:.1}", f64::from(tenths) / 10.0)
}

fn build(grid: Vec<Vec<String>>) -> Table {
    Table::from_rows(grid).expect("synthetic cells never contain delimiters")
}

/// A `rows × cols` table (header row and column included) with distinct
/// pronounceable header words and one-decimal data values.
pub fn generate_table(seed: u64, rows: usize, cols: usize) -> Result<Table, SynthError> {
    if rows < 2 || cols < 2 {
        return Err(SynthError::Bounds(format!("table must be at least 2x2, got {rows}x{cols}")));
    }
    let mut names = stream(seed, HEADERS, 0, 0);
    let mut taken = HashSet::new();
    let mut grid = vec![vec![String::new(); cols]; rows];
    for cell in grid[0].iter_mut() {
        *cell = fresh_word(&mut names, &mut taken);
    }
    for (r, row) in grid.iter_mut().enumerate().skip(1) {
        row[0] = fresh_word(&mut names, &mut taken);
        for (c, cell) in row.iter_mut().enumerate().skip(1) {
            *cell = data_value(seed, VALUES, r, c);
        }
    }
    Ok(build(grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Identity,
    PermuteRows,
    PermuteCols,
    Transpose,
    /// Multiplies each numeric data cell by `1 + u * epsilon`, `u` uniform in `[-1, 1]`.
    JitterValues { epsilon: f64 },
    /// Single-character substitutions at distinct header positions.
    EditHeaders { edits: usize },
    DropRows { count: usize },
    AddRows { count: usize },
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbationKind::Identity => f.write_str("identity"),
            PerturbationKind::PermuteRows => f.write_str("permute_rows"),
            PerturbationKind::PermuteCols => f.write_str("permute_cols"),
            PerturbationKind::Transpose => f.write_str("transpose"),
            PerturbationKind::JitterValues { epsilon } => write!(f, "jitter_values({epsilon})"),
            PerturbationKind::EditHeaders { edits } => write!(f, "edit_headers({edits})"),
            PerturbationKind::DropRows { count } => write!(f, "drop_rows({count})"),
            PerturbationKind::AddRows { count } => write!(f, "add_rows({count})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub seed: u64,
}

impl Perturbation {
    pub fn new(kind: PerturbationKind, seed: u64) -> Self {
        Perturbation { kind, seed }
    }
}

/// Header positions that feed entry keys: the header row and header column,
/// without the corner cell.
fn header_cells(table: &Table) -> Vec<(usize, usize)> {
    (1..table.cols()).map(|c| (0, c)).chain((1..table.rows()).map(|r| (r, 0))).collect()
}

/// Applies one perturbation. Permutations keep the header row and column in
/// place; dropped and added rows are data rows.
pub fn perturb(table: &Table, p: &Perturbation) -> Result<Table, SynthError> {
    let mut grid = table.grid().to_vec();
    match p.kind {
        PerturbationKind::Identity => {}
        PerturbationKind::PermuteRows => {
            grid[1..].shuffle(&mut stream(p.seed, SHUFFLE, 0, 0));
        }
        PerturbationKind::PermuteCols => {
            let mut order: Vec<usize> = (1..table.cols()).collect();
            order.shuffle(&mut stream(p.seed, SHUFFLE, 0, 1));
            for row in &mut grid {
                let moved: Vec<String> = order.iter().map(|&c| row[c].clone()).collect();
                row.splice(1.., moved);
            }
        }
        PerturbationKind::Transpose => return Ok(table.transpose()),
        PerturbationKind::JitterValues { epsilon } => {
            if !(epsilon >= 0.0 && epsilon.is_finite()) {
                return Err(SynthError::Bounds(format!("epsilon must be >= 0, got {epsilon}")));
            }
            for (r, row) in grid.iter_mut().enumerate().skip(1) {
                for (c, cell) in row.iter_mut().enumerate().skip(1) {
                    if let CellNumber::Numeric(v) = parse_number(cell) {
                        let u: f64 = stream(p.seed, JITTER, r as u64, c as u64).random_range(-1.0..=1.0);
                        let moved = v * (1.0 + u * epsilon);
                        if moved != v {
                            *cell = moved.to_string();
                        }
                    }
                }
            }
        }
        PerturbationKind::EditHeaders { edits } => {
            let mut positions: Vec<(usize, usize, usize)> = header_cells(table)
                .into_iter()
                .flat_map(|(r, c)| (0..table.cell(r, c).chars().count()).map(move |i| (r, c, i)))
                .collect();
            if edits > positions.len() {
                return Err(SynthError::Bounds(format!(
                    "{edits} header edits requested, only {} characters available",
                    positions.len()
                )));
            }
            // The order and replacement letters do not depend on `edits`, so
            // k edits are always a subset of k+1 edits.
            let mut rng = stream(p.seed, EDITS, 0, 0);
            positions.shuffle(&mut rng);
            for &(r, c, i) in &positions[..edits] {
                // Uppercase letters never occur in generated headers, which
                // keeps key distances monotone in the number of edits.
                let mut letter = b'A' + rng.random_range(0..26u8);
                let mut chars: Vec<char> = grid[r][c].chars().collect();
                if chars[i] == char::from(letter) {
                    letter = b'A' + (letter - b'A' + 1) % 26;
                }
                chars[i] = char::from(letter);
                grid[r][c] = chars.into_iter().collect();
            }
        }
        PerturbationKind::DropRows { count } => {
            let data_rows = table.rows() - 1;
            if count > data_rows {
                return Err(SynthError::Bounds(format!("cannot drop {count} of {data_rows} data rows")));
            }
            let mut rng = stream(p.seed, SHUFFLE, 1, 0);
            let dropped: HashSet<usize> =
                index::sample(&mut rng, data_rows, count).into_iter().map(|i| i + 1).collect();
            grid = grid.into_iter().enumerate().filter(|(r, _)| !dropped.contains(r)).map(|(_, row)| row).collect();
        }
        PerturbationKind::AddRows { count } => {
            let mut taken: HashSet<String> = table.grid().iter().flatten().cloned().collect();
            let mut names = stream(p.seed, HEADERS, 1, 0);
            for k in 0..count {
                let r = table.rows() + k;
                let mut row = vec![fresh_word(&mut names, &mut taken)];
                row.extend((1..table.cols()).map(|c| data_value(p.seed, VALUES, r, c)));
                grid.push(row);
            }
        }
    }
    Ok(build(grid))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub kind: String,
    pub mean_rnss: f64,
    pub mean_rms_f1: f64,
}

/// The perturbations, at fixed strength, covered by [`sensitivity_report`].
pub fn sensitivity_kinds() -> Vec<PerturbationKind> {
    use PerturbationKind::*;
    vec![
        Identity,
        PermuteRows,
        PermuteCols,
        Transpose,
        JitterValues { epsilon: 0.1 },
        EditHeaders { edits: 1 },
        EditHeaders { edits: 2 },
        EditHeaders { edits: 4 },
        DropRows { count: 1 },
        AddRows { count: 1 },
    ]
}

/// Mean RNSS and RMS F1 of `perturb(t)` against `t` for each kind in
/// [`sensitivity_kinds`], over `trials` generated tables of 3 to 6 rows and
/// 3 to 5 columns.
pub fn sensitivity_report(seed: u64, trials: usize) -> Result<Vec<SensitivityRow>, SynthError> {
    if trials == 0 {
        return Err(SynthError::Bounds("at least one trial is required".into()));
    }
    let cfg = MetricConfig::default();
    let tables: Vec<(Table, u64)> = (0..trials)
        .map(|trial| {
            let mut rng = stream(seed, TRIALS, trial as u64, 0);
            let rows = rng.random_range(3..=6);
            let cols = rng.random_range(3..=5);
            let table = generate_table(rng.random(), rows, cols)?;
            Ok((table, rng.random()))
        })
        .collect::<Result<_, SynthError>>()?;

    sensitivity_kinds()
        .into_iter()
        .map(|kind| {
            let scores: Vec<(f64, f64)> = tables
                .par_iter()
                .map(|(table, pseed)| {
                    let pred = perturb(table, &Perturbation::new(kind, *pseed))?;
                    Ok((rnss_tables(&pred, table), rms_with_transposition(&pred, table, &cfg).f1))
                })
                .collect::<Result<_, SynthError>>()?;
            let n = scores.len() as f64;
            Ok(SensitivityRow {
                kind: kind.to_string(),
                mean_rnss: scores.iter().map(|s| s.0).sum::<f64>() / n,
                mean_rms_f1: scores.iter().map(|s| s.1).sum::<f64>() / n,
            })
        })
        .collect()
}
