//! Table similarity (RNSS, RMS), relaxed QA accuracy and correlation statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{min_cost_matching, CostMatrix};
use crate::distance::{nl_tau, Tau};
use crate::table::{parse_decimal, parse_number, parse_table, Entry, EntryMapping, Table, TableError};

/// Thresholds for the mapping metric: `tau` clamps key distances, `theta`
/// clamps relative value distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub tau: Tau,
    pub theta: f64,
}

impl MetricConfig {
    pub fn new(tau: f64, theta: f64) -> Result<Self, MetricError> {
        let tau = Tau::new(tau).ok_or(MetricError::Threshold { name: "tau", value: tau })?;
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(MetricError::Threshold { name: "theta", value: theta });
        }
        Ok(MetricConfig { tau, theta })
    }
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { tau: Tau::DEFAULT, theta: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("{name} must lie in (0, 1], got {value}")]
    Threshold { name: &'static str, value: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("{side} table: {source}")]
    Table { side: &'static str, source: TableError },
}

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RmsScore {
    fn from_parts(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RmsScore { precision, recall, f1 }
    }
}

/// `min(1, |p - t| / |t|)`, further clamped to 1 above `theta` when given.
/// A zero target is matched only by a zero prediction.
pub fn relative_distance(p: f64, t: f64, theta: Option<f64>) -> f64 {
    let d = if t == 0.0 {
        if p == 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        ((p - t).abs() / t.abs()).min(1.0)
    };
    match theta {
        Some(theta) if d > theta => 1.0,
        _ => d,
    }
}

/// Relative number set similarity between two multisets of numbers.
///
/// An empty side contributes an empty matching, so the score is 1 whenever
/// either side is empty.
pub fn rnss(pred: &[f64], target: &[f64]) -> f64 {
    let longest = pred.len().max(target.len());
    if longest == 0 {
        return 1.0;
    }
    let costs = CostMatrix::from_fn(pred.len(), target.len(), |i, j| {
        relative_distance(pred[i], target[j], None)
    });
    let matched = min_cost_matching(&costs).total_cost(&costs);
    1.0 - matched / longest as f64
}

/// [`rnss`] over every numeric cell of each table.
pub fn rnss_tables(pred: &Table, target: &Table) -> f64 {
    rnss(&pred.numbers(), &target.numbers())
}

fn key_similarity(p: &Entry, t: &Entry, tau: Tau) -> f64 {
    1.0 - nl_tau(&p.key(), &t.key(), tau)
}

fn value_similarity(p: &str, t: &str, cfg: &MetricConfig) -> f64 {
    match (parse_number(p).value(), parse_number(t).value()) {
        (Some(pv), Some(tv)) => 1.0 - relative_distance(pv, tv, Some(cfg.theta)),
        _ => 1.0 - nl_tau(p, t, cfg.tau),
    }
}

/// Key similarity times value similarity; 1 for identical entries.
pub fn entry_similarity(p: &Entry, t: &Entry, cfg: &MetricConfig) -> f64 {
    key_similarity(p, t, cfg.tau) * value_similarity(&p.value, &t.value, cfg)
}

/// Mapping similarity between two entry sets. Entries are matched on keys
/// alone; the matched pairs then contribute their full entry similarity.
pub fn rms_mappings(pred: &EntryMapping, target: &EntryMapping, cfg: &MetricConfig) -> RmsScore {
    let (n, m) = (pred.len(), target.len());
    if n == 0 && m == 0 {
        return RmsScore { precision: 1.0, recall: 1.0, f1: 1.0 };
    }
    let (p, t) = (pred.as_slice(), target.as_slice());
    let costs = CostMatrix::from_fn(n, m, |i, j| nl_tau(&p[i].key(), &t[j].key(), cfg.tau));
    let total: f64 = min_cost_matching(&costs)
        .pairs()
        .iter()
        .map(|&(i, j)| entry_similarity(&p[i], &t[j], cfg))
        .sum();
    let precision = if n == 0 { 0.0 } else { total / n as f64 };
    let recall = if m == 0 { 0.0 } else { total / m as f64 };
    RmsScore::from_parts(precision, recall)
}

/// Mapping similarity of `pred` against `target` in their given orientation.
pub fn rms(pred: &Table, target: &Table, cfg: &MetricConfig) -> RmsScore {
    rms_mappings(&pred.entries(), &target.entries(), cfg)
}

/// The better (by F1) of scoring `pred` and its transpose; ties keep the
/// untransposed score.
pub fn rms_with_transposition(pred: &Table, target: &Table, cfg: &MetricConfig) -> RmsScore {
    let target_entries = target.entries();
    let straight = rms_mappings(&pred.entries(), &target_entries, cfg);
    let flipped = rms_mappings(&pred.transpose().entries(), &target_entries, cfg);
    if flipped.f1 > straight.f1 {
        flipped
    } else {
        straight
    }
}

/// Every table metric for one prediction/target pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub rnss: f64,
    pub rms_precision: f64,
    pub rms_recall: f64,
    pub rms_f1: f64,
}

/// Parses both linearized tables and computes RNSS and transposition-aware RMS.
pub fn score_texts(pred: &str, target: &str, cfg: &MetricConfig) -> Result<PairScore, MetricError> {
    let pred = parse_table(pred).map_err(|source| MetricError::Table { side: "prediction", source })?;
    let target = parse_table(target).map_err(|source| MetricError::Table { side: "target", source })?;
    let rms = rms_with_transposition(&pred, &target, cfg);
    Ok(PairScore {
        rnss: rnss_tables(&pred, &target),
        rms_precision: rms.precision,
        rms_recall: rms.recall,
        rms_f1: rms.f1,
    })
}

/// Comparison form of a QA answer: trimmed, lowercased, one trailing period
/// dropped, `$`, `%` and `,` removed, and `yes`/`true`, `no`/`false` folded.
pub fn normalize_answer(answer: &str) -> String {
    let lower = answer.trim().to_lowercase();
    let lower = lower.strip_suffix('.').unwrap_or(&lower);
    let cleaned: String = lower.chars().filter(|c| !matches!(c, '$' | '%' | ',')).collect();
    let cleaned = cleaned.trim();
    match cleaned {
        "yes" | "true" => "yes".to_owned(),
        "no" | "false" => "no".to_owned(),
        other => other.to_owned(),
    }
}

/// Numeric reading of a normalized answer.
pub(crate) fn answer_number(normalized: &str) -> Option<f64> {
    parse_decimal(normalized)
}

/// Exact match with a 5% relative tolerance for numeric answers.
pub fn relaxed_accuracy(pred_answer: &str, gold_answer: &str) -> bool {
    let pred = normalize_answer(pred_answer);
    let gold = normalize_answer(gold_answer);
    match (answer_number(&pred), answer_number(&gold)) {
        (Some(p), Some(g)) => {
            if g == 0.0 {
                p == 0.0
            } else {
                (p - g).abs() <= 0.05 * g.abs()
            }
        }
        _ => pred == gold,
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::DegenerateInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(MetricError::DegenerateInput(format!("need at least 2 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(MetricError::DegenerateInput("non-finite value".into()));
    }
    Ok(())
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mean_x, b - mean_y);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricError::DegenerateInput("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation: Pearson over fractional ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    check_pair(x, y)?;
    pearson(&fractional_ranks(x), &fractional_ranks(y))
}
