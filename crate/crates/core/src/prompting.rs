//! One-shot chain-of-thought and program-of-thought prompts, answer
//! extraction and self-consistency voting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics::{answer_number, normalize_answer};
use crate::pot;
use crate::table::Table;

/// Chain-of-thought demonstration: instruction line, demo table, five
/// worked questions.
pub const COT_EXEMPLAR: &str = include_str!("../assets/cot_exemplar.txt");
/// Program-of-thought demonstration: instruction line, demo table, five
/// questions answered with code.
pub const POT_EXEMPLAR: &str = include_str!("../assets/pot_exemplar.txt");

const ANSWER_MARKER: &str = "the answer is";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    Cot,
    Pot,
}

impl PromptMode {
    pub fn exemplar(self) -> &'static str {
        match self {
            PromptMode::Cot => COT_EXEMPLAR,
            PromptMode::Pot => POT_EXEMPLAR,
        }
    }

    /// Text that follows the question and cues the model to start answering.
    pub fn cue(self) -> &'static str {
        match self {
            PromptMode::Cot => "A:",
            PromptMode::Pot => "#Python",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PromptMode::Cot => "cot",
            PromptMode::Pot => "pot",
        }
    }
}

impl fmt::Display for PromptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cot" => Ok(PromptMode::Cot),
            "pot" => Ok(PromptMode::Pot),
            other => Err(format!("unknown prompt mode `{other}` (expected cot or pot)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptRequest {
    pub mode: PromptMode,
    pub table: Table,
    pub question: String,
    pub title: Option<String>,
    /// Number of demonstrations to prepend; 0 keeps only the instruction line.
    pub shots: usize,
}

impl PromptRequest {
    pub fn new(mode: PromptMode, table: Table, question: impl Into<String>) -> Self {
        PromptRequest { mode, table, question: question.into(), title: None, shots: 1 }
    }
}

/// Renders the table the way the demonstrations do: a `Header:` line, then
/// `Row i:` lines numbered from 1. Trailing empty cells (padding of ragged
/// rows) are left out.
pub fn format_table_for_prompt(table: &Table) -> String {
    let line = |cells: &[String]| {
        let keep = cells.iter().rposition(|c| !c.is_empty()).map_or(0, |p| p + 1);
        cells[..keep].join(" | ")
    };
    let mut out = format!("Header: {}", line(table.row(0)));
    for i in 1..table.rows() {
        out.push_str(&format!("\nRow {i}: {}", line(table.row(i))));
    }
    out
}

/// Builds the complete prompt text. Pure: equal requests give equal bytes.
///
/// Only one built-in demonstration exists per mode, so `shots` above 1 is
/// treated as 1.
pub fn build_prompt(req: &PromptRequest) -> String {
    let exemplar = req.mode.exemplar().trim_end();
    let mut out = if req.shots == 0 {
        exemplar.lines().next().unwrap_or_default().to_owned()
    } else {
        exemplar.to_owned()
    };
    out.push_str("\n\n");
    if let Some(title) = req.title.as_deref().map(str::trim).filter(|t| !t.is_empty()) {
        out.push_str("Title: ");
        out.push_str(title);
        out.push('\n');
    }
    out.push_str(&format_table_for_prompt(&req.table));
    out.push_str("\n\nQ: ");
    out.push_str(req.question.trim());
    out.push('\n');
    out.push_str(req.mode.cue());
    out
}

/// Answer stated after the last "The answer is" (any case), up to the end of
/// that line or a sentence-ending period. Decimal points do not end it.
pub fn extract_cot_answer(completion: &str) -> Option<String> {
    // ASCII lowercasing keeps byte offsets aligned with the original.
    let lower = completion.to_ascii_lowercase();
    let start = lower
        .match_indices(ANSWER_MARKER)
        .map(|(i, _)| i + ANSWER_MARKER.len())
        .filter(|&end| completion[end..].starts_with(char::is_whitespace))
        .last()?;
    let rest = completion[start..].trim_start();
    let mut end = rest.len();
    let mut chars = rest.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c == '\n' || c == '\r' {
            end = i;
            break;
        }
        if c == '.' && chars.peek().is_none_or(|&(_, next)| next.is_whitespace()) {
            end = i;
            break;
        }
    }
    let answer = rest[..end].trim();
    (!answer.is_empty()).then(|| answer.to_owned())
}

/// Code part of a PoT completion: everything before the model starts a new
/// `Q:` block.
pub fn pot_code(completion: &str) -> &str {
    let mut offset = 0;
    for line in completion.split_inclusive('\n') {
        if line.trim_start().starts_with("Q:") {
            return &completion[..offset];
        }
        offset += line.len();
    }
    completion
}

/// Runs the code part of a PoT completion and renders `ans`.
pub fn extract_pot_answer(completion: &str) -> Result<String, pot::PotError> {
    pot::run(pot_code(completion)).map(|a| a.rendered)
}

/// Grouping key for voting: the normalized answer, with numbers in canonical
/// form so that `6.8` and `6.80` agree.
pub fn vote_key(answer: &str) -> String {
    let normalized = normalize_answer(answer);
    match answer_number(&normalized) {
        Some(0.0) => "0".to_owned(),
        Some(v) => v.to_string(),
        None => normalized,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub mode: PromptMode,
    pub raw: String,
    pub answer: Option<String>,
    pub normalized: Option<String>,
    /// Why no answer was extracted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Completions for one question in generation order. CoT and PoT samples share
/// one pool.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
}

impl SampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Extracts the answer from a completion and appends the sample.
    pub fn push_completion(&mut self, mode: PromptMode, raw: impl Into<String>) {
        let raw = raw.into();
        let (answer, failure) = match mode {
            PromptMode::Cot => match extract_cot_answer(&raw) {
                Some(a) => (Some(a), None),
                None => (None, Some("no answer statement".to_owned())),
            },
            PromptMode::Pot => match extract_pot_answer(&raw) {
                Ok(a) => (Some(a), None),
                Err(e) => (None, Some(format!("{}: {e}", e.kind()))),
            },
        };
        let normalized = answer.as_deref().map(vote_key);
        self.samples.push(Sample { mode, raw, answer, normalized, failure });
    }

    /// Appends an already-extracted answer.
    pub fn push_answer(&mut self, mode: PromptMode, answer: impl Into<String>) {
        let answer = answer.into();
        let normalized = Some(vote_key(&answer));
        self.samples.push(Sample { mode, raw: answer.clone(), answer: Some(answer), normalized, failure: None });
    }

    pub fn answered(&self) -> usize {
        self.samples.iter().filter(|s| s.answer.is_some()).count()
    }
}

/// Majority vote over the samples that produced an answer. Returns the raw
/// answer of the earliest member of the largest group; tied groups resolve to
/// the one that appeared first.
pub fn self_consistency_vote(set: &SampleSet) -> Option<String> {
    // (key, count, first sample index), in first-appearance order
    let mut groups: Vec<(&str, usize, usize)> = Vec::new();
    for (idx, sample) in set.samples.iter().enumerate() {
        let Some(key) = sample.normalized.as_deref().filter(|_| sample.answer.is_some()) else {
            continue;
        };
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1 += 1,
            None => groups.push((key, 1, idx)),
        }
    }
    let mut best: Option<&(&str, usize, usize)> = None;
    for g in &groups {
        if best.is_none_or(|b| g.1 > b.1) {
            best = Some(g);
        }
    }
    best.and_then(|&(_, _, idx)| set.samples[idx].answer.clone())
}
