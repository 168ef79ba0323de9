//! JSONL ingestion: QA examples, table pairs and id-keyed score files.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::table::{parse_table, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaExample {
    pub id: String,
    /// Linearized table text.
    pub table: String,
    pub question: String,
    /// Gold answer.
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

impl QaExample {
    pub fn parsed_table(&self) -> Table {
        parse_table(&self.table).expect("validated when loaded")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablePairExample {
    pub id: String,
    pub prediction: String,
    pub target: String,
}

/// One line of a metric or human score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: String,
    pub score: f64,
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })
}

/// Parses one JSON object per non-blank line; line numbers are 1-based.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<(usize, T)>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(idx, line)| {
            serde_json::from_str(line)
                .map(|v| (idx + 1, v))
                .map_err(|e| HarnessError::Schema { line: idx + 1, message: e.to_string() })
        })
        .collect()
}

fn check_unique<'a>(ids: impl Iterator<Item = (usize, &'a str)>) -> Result<(), HarnessError> {
    let mut seen = HashSet::new();
    for (line, id) in ids {
        if !seen.insert(id) {
            return Err(HarnessError::Schema { line, message: format!("duplicate id `{id}`") });
        }
    }
    Ok(())
}

fn check_table(line: usize, field: &str, text: &str) -> Result<(), HarnessError> {
    parse_table(text)
        .map(drop)
        .map_err(|e| HarnessError::Schema { line, message: format!("{field}: {e}") })
}

pub fn parse_qa_dataset(text: &str) -> Result<Vec<QaExample>, HarnessError> {
    let rows: Vec<(usize, QaExample)> = parse_jsonl(text)?;
    check_unique(rows.iter().map(|(l, e)| (*l, e.id.as_str())))?;
    for (line, ex) in &rows {
        check_table(*line, "table", &ex.table)?;
    }
    Ok(rows.into_iter().map(|(_, e)| e).collect())
}

/// Reads a QA dataset: objects with `id`, `table`, `question`, `answer` and an
/// optional `title`. Order is preserved.
pub fn load_qa_dataset(path: impl AsRef<Path>) -> Result<Vec<QaExample>, HarnessError> {
    parse_qa_dataset(&read(path.as_ref())?)
}

pub fn parse_table_pairs(text: &str) -> Result<Vec<TablePairExample>, HarnessError> {
    let rows: Vec<(usize, TablePairExample)> = parse_jsonl(text)?;
    check_unique(rows.iter().map(|(l, e)| (*l, e.id.as_str())))?;
    for (line, ex) in &rows {
        check_table(*line, "prediction", &ex.prediction)?;
        check_table(*line, "target", &ex.target)?;
    }
    Ok(rows.into_iter().map(|(_, e)| e).collect())
}

/// Reads table pairs: objects with `id`, `prediction`, `target`.
pub fn load_table_pairs(path: impl AsRef<Path>) -> Result<Vec<TablePairExample>, HarnessError> {
    parse_table_pairs(&read(path.as_ref())?)
}

pub fn parse_scores(text: &str) -> Result<Vec<ScoreRecord>, HarnessError> {
    let rows: Vec<(usize, ScoreRecord)> = parse_jsonl(text)?;
    check_unique(rows.iter().map(|(l, e)| (*l, e.id.as_str())))?;
    if let Some((line, r)) = rows.iter().find(|(_, r)| !r.score.is_finite()) {
        return Err(HarnessError::Schema { line: *line, message: format!("score for `{}` is not finite", r.id) });
    }
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Reads `{id, score}` lines.
pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>, HarnessError> {
    parse_scores(&read(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_valid_lines() {
        let text = concat!(
            r#"{"id":"a","table":"x | y\n1 | 2","question":"q1","answer":"2"}"#,
            "\n",
            r#"{"id":"b","table":"x | y\n3 | 4","question":"q2","answer":"4","title":"T"}"#,
            "\n"
        );
        let ds = parse_qa_dataset(text).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[0].id, "a");
        assert_eq!(ds[1].title.as_deref(), Some("T"));
    }

    #[test]
    fn reports_schema_line() {
        let text = r#"{"id":"a","table":"x","question":"q"}"#;
        assert!(matches!(parse_qa_dataset(text), Err(HarnessError::Schema { line: 1, .. })));
        let text = "\n{\"id\":\"a\",\"table\":\"x\",\"question\":\"q\",\"answer\":\"1\"}\nnot json";
        assert!(matches!(parse_qa_dataset(text), Err(HarnessError::Schema { line: 3, .. })));
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        assert!(parse_qa_dataset("").unwrap().is_empty());
        assert!(parse_table_pairs("\n\n").unwrap().is_empty());
    }

    #[test]
    fn rejects_duplicates_and_bad_tables() {
        let dup = "{\"id\":\"a\",\"table\":\"x\",\"question\":\"q\",\"answer\":\"1\"}\n{\"id\":\"a\",\"table\":\"x\",\"question\":\"q\",\"answer\":\"1\"}";
        assert!(matches!(parse_qa_dataset(dup), Err(HarnessError::Schema { line: 2, .. })));
        let blank = r#"{"id":"a","prediction":"  ","target":"x"}"#;
        assert!(matches!(parse_table_pairs(blank), Err(HarnessError::Schema { line: 1, .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_qa_dataset("/nonexistent/x.jsonl"), Err(HarnessError::Io { .. })));
    }

    #[test]
    fn scores() {
        let s = parse_scores("{\"id\":\"a\",\"score\":0.5}\n{\"id\":\"b\",\"score\":1}").unwrap();
        assert_eq!(s[1], ScoreRecord { id: "b".into(), score: 1.0 });
        assert!(parse_scores("{\"id\":\"a\",\"score\":\"high\"}").is_err());
    }
}
