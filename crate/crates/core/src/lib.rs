//! Table similarity metrics and a chart question-answering evaluation harness.
//!
//! - [`table`]: linearized table parsing and entry extraction
//! - [`distance`], [`assignment`]: clamped edit distance and min-cost matching
//! - [`metrics`]: RNSS, RMS, relaxed accuracy, correlation
//! - [`pot`]: the sandboxed interpreter for program-of-thought snippets
//! - [`prompting`]: prompt construction, answer extraction, voting
//! - [`harness`]: datasets, LLM clients and evaluation pipelines
//! - [`synth`]: seeded tables and perturbations

pub mod assignment;
pub mod distance;
pub mod harness;
pub mod metrics;
pub mod pot;
pub mod prompting;
pub mod synth;
pub mod table;

pub use assignment::{min_cost_matching, CostMatrix, Matching};
pub use distance::{levenshtein, nl_tau, Tau};
pub use metrics::{
    normalize_answer, pearson, relaxed_accuracy, rms, rms_with_transposition, rnss, rnss_tables, score_texts,
    spearman, MetricConfig, MetricError, PairScore, RmsScore,
};
pub use table::{parse_table, serialize_table, Entry, EntryMapping, Table, TableError};
