//! Dataset loading, LLM clients and the evaluation pipelines built on them.

pub mod client;
pub mod dataset;
pub mod pipeline;
pub mod report;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::metrics::MetricError;
use crate::pot::PotError;
use crate::table::TableError;

pub use client::{ClientConfig, ClientError, ClientKind, LlmClient, RemoteClient, ReplayClient, ReplayRecord};
pub use dataset::{QaExample, ScoreRecord, TablePairExample};
pub use pipeline::{
    correlate, run_correlation, run_qa_pipeline, run_table_eval, QaOptions, QaReport, TableReport,
};
pub use report::Percent;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Pot(#[from] PotError),
    #[error("ids differ between score files (only in metric: {missing_in_human:?}; only in human: {missing_in_metric:?})")]
    KeyMismatch { missing_in_human: Vec<String>, missing_in_metric: Vec<String> },
    #[error("example `{id}`: {source}")]
    Example { id: String, source: Box<HarnessError> },
    #[error("{0}")]
    Config(String),
}
