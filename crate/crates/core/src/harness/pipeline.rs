//! Prompt → sample → vote → score, plus table-pair evaluation and metric/human
//! correlation.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::client::{ClientConfig, LlmClient};
use super::dataset::{load_scores, QaExample, ScoreRecord, TablePairExample};
use super::report::Percent;
use super::HarnessError;
use crate::metrics::{self, relaxed_accuracy, MetricConfig};
use crate::prompting::{build_prompt, self_consistency_vote, PromptMode, PromptRequest, SampleSet};

/// Per-run options that are not about the client.
#[derive(Debug, Clone, PartialEq)]
pub struct QaOptions {
    pub modes: Vec<PromptMode>,
    /// Fail the whole run on the first client error instead of counting the
    /// example as incorrect.
    pub strict: bool,
    pub shots: usize,
}

impl Default for QaOptions {
    fn default() -> Self {
        QaOptions { modes: vec![PromptMode::Cot, PromptMode::Pot], strict: false, shots: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaRunConfig {
    pub client: String,
    pub modes: Vec<PromptMode>,
    pub samples_per_mode: usize,
    pub temperature: f64,
    pub shots: usize,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub mode: PromptMode,
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaRecord {
    pub id: String,
    pub question: String,
    pub gold: String,
    pub prediction: Option<String>,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub samples: Vec<SampleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaAggregates {
    pub total: usize,
    pub correct: usize,
    pub errored: usize,
    /// `correct / total`; absent for an empty dataset.
    pub accuracy: Option<f64>,
}

impl QaAggregates {
    pub fn from_records(records: &[QaRecord]) -> Self {
        let total = records.len();
        let correct = records.iter().filter(|r| r.correct).count();
        let errored = records.iter().filter(|r| r.error.is_some()).count();
        let accuracy = (total > 0).then(|| correct as f64 / total as f64);
        QaAggregates { total, correct, errored, accuracy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaReport {
    pub config: QaRunConfig,
    pub examples: Vec<QaRecord>,
    pub aggregates: QaAggregates,
}

fn answer_example(
    example: &QaExample,
    client: &dyn LlmClient,
    cfg: &ClientConfig,
    opts: &QaOptions,
) -> Result<QaRecord, (String, HarnessError)> {
    let table = example.parsed_table();
    let mut set = SampleSet::new();
    for &mode in &opts.modes {
        let mut req = PromptRequest::new(mode, table.clone(), example.question.as_str());
        req.title = example.title.clone();
        req.shots = opts.shots;
        let prompt = build_prompt(&req);
        let completions = client
            .generate(&prompt, cfg.samples_per_mode, cfg.temperature)
            .map_err(|e| (example.id.clone(), HarnessError::Client(e)))?;
        for c in completions {
            set.push_completion(mode, c);
        }
    }
    let prediction = self_consistency_vote(&set);
    let correct = prediction.as_deref().is_some_and(|p| relaxed_accuracy(p, &example.answer));
    Ok(QaRecord {
        id: example.id.clone(),
        question: example.question.clone(),
        gold: example.answer.clone(),
        prediction,
        correct,
        error: None,
        samples: set
            .samples
            .into_iter()
            .map(|s| SampleRecord { mode: s.mode, answer: s.answer, failure: s.failure })
            .collect(),
    })
}

/// Answers every example and scores it with relaxed accuracy.
///
/// Examples run on up to `cfg.parallelism` workers; records come back in
/// dataset order. A client error marks the example as errored and incorrect,
/// or aborts the run when `opts.strict` is set.
pub fn run_qa_pipeline(
    dataset: &[QaExample],
    client: &dyn LlmClient,
    cfg: &ClientConfig,
    opts: &QaOptions,
) -> Result<QaReport, HarnessError> {
    cfg.validate()?;
    if opts.modes.is_empty() {
        return Err(HarnessError::Config("at least one prompt mode is required".into()));
    }
    let mut modes = opts.modes.clone();
    modes.sort();
    modes.dedup();
    let opts = QaOptions { modes, ..opts.clone() };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let outcomes: Vec<_> =
        pool.install(|| dataset.par_iter().map(|ex| answer_example(ex, client, cfg, &opts)).collect());

    let mut examples = Vec::with_capacity(outcomes.len());
    for (outcome, ex) in outcomes.into_iter().zip(dataset) {
        match outcome {
            Ok(record) => examples.push(record),
            Err((id, err)) if opts.strict => {
                return Err(HarnessError::Example { id, source: Box::new(err) });
            }
            Err((_, err)) => examples.push(QaRecord {
                id: ex.id.clone(),
                question: ex.question.clone(),
                gold: ex.answer.clone(),
                prediction: None,
                correct: false,
                error: Some(err.to_string()),
                samples: Vec::new(),
            }),
        }
    }
    let aggregates = QaAggregates::from_records(&examples);
    Ok(QaReport {
        config: QaRunConfig {
            client: client.describe(),
            modes: opts.modes.clone(),
            samples_per_mode: cfg.samples_per_mode,
            temperature: cfg.temperature,
            shots: opts.shots,
            strict: opts.strict,
        },
        examples,
        aggregates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableEvalConfig {
    pub tau: f64,
    pub theta: f64,
}

/// Scores for one prediction/target pair, as fractions in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablePairRecord {
    pub id: String,
    pub rnss: f64,
    pub rms_precision: f64,
    pub rms_recall: f64,
    pub rms_f1: f64,
}

/// Means over examples, in percent with two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableAggregates {
    pub count: usize,
    pub rnss: Option<Percent>,
    pub rms_precision: Option<Percent>,
    pub rms_recall: Option<Percent>,
    pub rms_f1: Option<Percent>,
}

impl TableAggregates {
    pub fn from_records(records: &[TablePairRecord]) -> Self {
        let mean = |f: fn(&TablePairRecord) -> f64| {
            (!records.is_empty())
                .then(|| Percent::from_fraction(records.iter().map(f).sum::<f64>() / records.len() as f64))
        };
        TableAggregates {
            count: records.len(),
            rnss: mean(|r| r.rnss),
            rms_precision: mean(|r| r.rms_precision),
            rms_recall: mean(|r| r.rms_recall),
            rms_f1: mean(|r| r.rms_f1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub config: TableEvalConfig,
    pub examples: Vec<TablePairRecord>,
    pub aggregates: TableAggregates,
}

/// RNSS and transposition-aware RMS for every pair.
pub fn run_table_eval(dataset: &[TablePairExample], cfg: &MetricConfig) -> Result<TableReport, HarnessError> {
    let examples = dataset
        .par_iter()
        .map(|ex| {
            let score = metrics::score_texts(&ex.prediction, &ex.target, cfg)
                .map_err(|e| HarnessError::Example { id: ex.id.clone(), source: Box::new(e.into()) })?;
            Ok(TablePairRecord {
                id: ex.id.clone(),
                rnss: score.rnss,
                rms_precision: score.rms_precision,
                rms_recall: score.rms_recall,
                rms_f1: score.rms_f1,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let aggregates = TableAggregates::from_records(&examples);
    Ok(TableReport {
        config: TableEvalConfig { tau: cfg.tau.get(), theta: cfg.theta },
        examples,
        aggregates,
    })
}

/// Joins two score lists on id (in the order of `metric`) and returns
/// `(pearson, spearman)`.
pub fn correlate(metric: &[ScoreRecord], human: &[ScoreRecord]) -> Result<(f64, f64), HarnessError> {
    let human_by_id: HashMap<&str, f64> = human.iter().map(|r| (r.id.as_str(), r.score)).collect();
    let metric_ids: std::collections::HashSet<&str> = metric.iter().map(|r| r.id.as_str()).collect();
    let missing_in_human: Vec<String> =
        metric.iter().filter(|r| !human_by_id.contains_key(r.id.as_str())).map(|r| r.id.clone()).collect();
    let missing_in_metric: Vec<String> =
        human.iter().filter(|r| !metric_ids.contains(r.id.as_str())).map(|r| r.id.clone()).collect();
    if !missing_in_human.is_empty() || !missing_in_metric.is_empty() {
        return Err(HarnessError::KeyMismatch { missing_in_human, missing_in_metric });
    }
    let x: Vec<f64> = metric.iter().map(|r| r.score).collect();
    let y: Vec<f64> = metric.iter().map(|r| human_by_id[r.id.as_str()]).collect();
    Ok((metrics::pearson(&x, &y)?, metrics::spearman(&x, &y)?))
}

/// [`correlate`] over two `{id, score}` JSONL files.
pub fn run_correlation(metric_scores: impl AsRef<Path>, human_scores: impl AsRef<Path>) -> Result<(f64, f64), HarnessError> {
    correlate(&load_scores(metric_scores)?, &load_scores(human_scores)?)
}
