//! Linearized tables: `|` between cells, newline between rows.
//!
//! The first row holds column headers and the first column holds row headers.
//! A table decomposes into an unordered set of `(row header, column header, value)`
//! entries, which is what the mapping metric compares.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("empty input: no non-blank line")]
    EmptyInput,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Rectangular grid of trimmed text cells, row-major, at least 1×1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Table {
    cells: Vec<Vec<String>>,
}

impl Table {
    /// Builds a table from rows, trimming cells and padding ragged rows with
    /// empty cells.
    pub fn from_rows<R, C>(rows: R) -> Result<Self, TableError>
    where
        R: IntoIterator<Item = C>,
        C: IntoIterator,
        C::Item: AsRef<str>,
    {
        let mut cells: Vec<Vec<String>> = Vec::new();
        for (idx, row) in rows.into_iter().enumerate() {
            let row: Vec<String> = row.into_iter().map(|c| c.as_ref().trim().to_owned()).collect();
            for cell in &row {
                if cell.contains('|') || cell.contains('\n') || cell.contains('\r') {
                    return Err(TableError::Malformed {
                        line: idx + 1,
                        message: format!("cell {cell:?} contains a delimiter"),
                    });
                }
            }
            cells.push(row);
        }
        let width = cells.iter().map(Vec::len).max().unwrap_or(0);
        if cells.is_empty() || width == 0 {
            return Err(TableError::EmptyInput);
        }
        for row in &mut cells {
            row.resize(width, String::new());
        }
        Ok(Table { cells })
    }

    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn cols(&self) -> usize {
        self.cells[0].len()
    }

    pub fn cell(&self, row: usize, col: usize) -> &str {
        &self.cells[row][col]
    }

    pub fn row(&self, row: usize) -> &[String] {
        &self.cells[row]
    }

    pub fn grid(&self) -> &[Vec<String>] {
        &self.cells
    }

    pub fn into_grid(self) -> Vec<Vec<String>> {
        self.cells
    }

    /// Cell `(i, j)` of the result is cell `(j, i)` of `self`.
    pub fn transpose(&self) -> Table {
        let cells = (0..self.cols())
            .map(|j| self.cells.iter().map(|row| row[j].clone()).collect())
            .collect();
        Table { cells }
    }

    /// Decomposes the table into header/value entries.
    ///
    /// With at least two rows and two columns this yields one entry per data
    /// cell. A single-column table keys each data cell by the lone header with
    /// an empty row header. A header-only (single-row) table has no entries.
    pub fn entries(&self) -> EntryMapping {
        let (rows, cols) = (self.rows(), self.cols());
        let mut entries = Vec::new();
        if rows >= 2 && cols >= 2 {
            entries.reserve((rows - 1) * (cols - 1));
            for i in 1..rows {
                for j in 1..cols {
                    entries.push(Entry::new(&self.cells[i][0], &self.cells[0][j], &self.cells[i][j]));
                }
            }
        } else if cols == 1 {
            for i in 1..rows {
                entries.push(Entry::new("", &self.cells[0][0], &self.cells[i][0]));
            }
        }
        EntryMapping { entries }
    }

    /// Every cell, headers included, that reads as a number.
    pub fn numbers(&self) -> Vec<f64> {
        self.cells
            .iter()
            .flatten()
            .filter_map(|c| parse_number(c).value())
            .collect()
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            f.write_str(&row.join(" | "))?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Table {
    type Err = TableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_table(s)
    }
}

/// Parses a linearized table. Blank lines are skipped; `\r\n` line endings are
/// accepted.
pub fn parse_table(text: &str) -> Result<Table, TableError> {
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| line.split('|').collect())
        .collect();
    if rows.is_empty() {
        return Err(TableError::EmptyInput);
    }
    Table::from_rows(rows)
}

/// Rows joined by `\n`, cells joined by ` | `, no trailing newline.
pub fn serialize_table(table: &Table) -> String {
    table.to_string()
}

/// One `(row header, column header, value)` mapping.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entry {
    pub row_header: String,
    pub col_header: String,
    pub value: String,
}

impl Entry {
    pub fn new(row_header: &str, col_header: &str, value: &str) -> Self {
        Entry {
            row_header: row_header.to_owned(),
            col_header: col_header.to_owned(),
            value: value.to_owned(),
        }
    }

    /// Matching key: headers joined by a single space so that `("ab", "c")`
    /// and `("a", "bc")` stay distinct.
    pub fn key(&self) -> String {
        format!("{} {}", self.row_header, self.col_header)
    }
}

/// Unordered multiset of entries. Order is incidental; no metric depends on it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntryMapping {
    entries: Vec<Entry>,
}

impl EntryMapping {
    pub fn new(entries: Vec<Entry>) -> Self {
        EntryMapping { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Entry> {
        self.entries.iter()
    }

    pub fn as_slice(&self) -> &[Entry] {
        &self.entries
    }

    /// Entries sorted, for multiset comparison.
    pub fn sorted(&self) -> Vec<Entry> {
        let mut v = self.entries.clone();
        v.sort();
        v
    }
}

impl<'a> IntoIterator for &'a EntryMapping {
    type Item = &'a Entry;
    type IntoIter = std::slice::Iter<'a, Entry>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Numeric reading of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellNumber {
    Numeric(f64),
    Textual,
}

impl CellNumber {
    pub fn value(self) -> Option<f64> {
        match self {
            CellNumber::Numeric(v) => Some(v),
            CellNumber::Textual => None,
        }
    }
}

/// Interprets a cell as a number.
///
/// Strips surrounding whitespace, one leading currency symbol, every comma and
/// one trailing `%` (percentages are not rescaled), then accepts a plain signed
/// decimal.
pub fn parse_number(cell: &str) -> CellNumber {
    let mut s = cell.trim();
    if let Some(rest) = s.strip_prefix(['$', '€', '£']) {
        s = rest;
    }
    let s = s.strip_suffix('%').unwrap_or(s);
    let cleaned: String = s.chars().filter(|&c| c != ',').collect();
    match parse_decimal(cleaned.trim()) {
        Some(v) => CellNumber::Numeric(v),
        None => CellNumber::Textual,
    }
}

/// Accepts `[+-]?(digits[.digits*] | .digits)` only; no exponents, no
/// `inf`/`nan`.
pub(crate) fn parse_decimal(s: &str) -> Option<f64> {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    let ok = match frac {
        None => !int.is_empty() && digits(int),
        Some(f) => digits(int) && digits(f) && !(int.is_empty() && f.is_empty()),
    };
    if !ok {
        return None;
    }
    s.parse::<f64>().ok()
}
