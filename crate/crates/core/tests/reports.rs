use std::path::PathBuf;

use tabeval::harness::client::{ClientConfig, ClientKind, ReplayClient};
use tabeval::harness::dataset::{load_qa_dataset, parse_table_pairs};
use tabeval::harness::pipeline::{QaAggregates, QaReport, TableAggregates, TableReport};
use tabeval::harness::report::to_json;
use tabeval::harness::{run_qa_pipeline, run_table_eval, QaOptions};
use tabeval::prompting::PromptMode;
use tabeval::MetricConfig;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn qa_aggregates_recompute_from_records() {
    let store = fixture("replay_small.jsonl");
    let client = ReplayClient::load(&store).unwrap();
    let dataset = load_qa_dataset(fixture("qa_small.jsonl")).unwrap();
    for samples in [1, 2, 3, 4] {
        let mut cfg = ClientConfig::new(ClientKind::Replay(store.clone()));
        cfg.samples_per_mode = samples;
        cfg.parallelism = 3;
        let report = run_qa_pipeline(&dataset, &client, &cfg, &QaOptions::default()).unwrap();
        let back: QaReport = serde_json::from_str(&to_json(&report)).unwrap();
        assert_eq!(back, report);
        assert_eq!(QaAggregates::from_records(&back.examples), back.aggregates);
    }
}

#[test]
fn qa_records_follow_dataset_order() {
    let store = fixture("replay_small.jsonl");
    let client = ReplayClient::load(&store).unwrap();
    let dataset = load_qa_dataset(fixture("qa_small.jsonl")).unwrap();
    let mut cfg = ClientConfig::new(ClientKind::Replay(store));
    cfg.samples_per_mode = 3;
    cfg.parallelism = 8;
    let opts = QaOptions { modes: vec![PromptMode::Pot, PromptMode::Cot], ..QaOptions::default() };
    let report = run_qa_pipeline(&dataset, &client, &cfg, &opts).unwrap();
    let ids: Vec<&str> = report.examples.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, ["shares", "identity-theft", "female-points", "penetration", "belize"]);
    // CoT samples are always drawn and listed first.
    assert_eq!(report.config.modes, [PromptMode::Cot, PromptMode::Pot]);
    assert!(report.examples.iter().all(|e| e.samples[0].mode == PromptMode::Cot));
    assert_eq!(report.examples[1].prediction.as_deref(), Some("Yes"));
    assert_eq!(report.examples[4].prediction.as_deref(), Some("Belize"));
    assert!(!report.examples[4].correct);
}

#[test]
fn table_aggregates_recompute_from_records() {
    let pairs = parse_table_pairs(concat!(
        r#"{"id":"a","prediction":"k | x | y\nr | 1 | 2","target":"k | x | y\nr | 1 | 2"}"#, "\n",
        r#"{"id":"b","prediction":"k | x | y\nr | 1.1 | 2","target":"k | x | y\nr | 1 | 2"}"#, "\n",
        r#"{"id":"c","prediction":"k | x\nr | 1\ns | 9","target":"k | x | y\nr | 1 | 2"}"#, "\n",
    ))
    .unwrap();
    let report = run_table_eval(&pairs, &MetricConfig::default()).unwrap();
    let back: TableReport = serde_json::from_str(&to_json(&report)).unwrap();
    assert_eq!(TableAggregates::from_records(&back.examples), back.aggregates);
    assert_eq!(back.aggregates, report.aggregates);
}
