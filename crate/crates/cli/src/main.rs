use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use tabeval::harness::report::to_json;
use tabeval::harness::{self, ClientConfig, ClientKind, QaOptions};
use tabeval::prompting::{build_prompt, PromptMode, PromptRequest};
use tabeval::{metrics, pot, synth, MetricConfig, Table};

const ENDPOINT_VAR: &str = "TABEVAL_ENDPOINT";

#[derive(Parser)]
#[command(name = "tabeval", version, about = "Table similarity metrics and chart QA evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Thresholds {
    /// Edit-distance threshold for header keys and text values.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Relative-error threshold for numeric values.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
}

impl Thresholds {
    fn config(&self) -> Result<MetricConfig> {
        Ok(MetricConfig::new(self.tau, self.theta)?)
    }
}

#[derive(Args)]
struct TablePair {
    /// Predicted linearized table.
    #[arg(long)]
    pred: PathBuf,
    /// Reference linearized table.
    #[arg(long)]
    gold: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Mapping similarity (precision, recall, F1) of a predicted table.
    Rms {
        #[command(flatten)]
        pair: TablePair,
        #[command(flatten)]
        thresholds: Thresholds,
        /// Score the prediction only in its given orientation.
        #[arg(long)]
        no_transpose: bool,
    },
    /// Number set similarity of a predicted table.
    Rnss {
        #[command(flatten)]
        pair: TablePair,
    },
    /// RNSS and RMS together.
    Score {
        #[command(flatten)]
        pair: TablePair,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Score a JSONL file of {id, prediction, target} pairs.
    TableEval {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        thresholds: Thresholds,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer a QA dataset with CoT/PoT prompting and self-consistency.
    Qa(QaArgs),
    #[command(subcommand)]
    Prompt(PromptCommand),
    #[command(subcommand)]
    Pot(PotCommand),
    /// Pearson and Spearman correlation of two {id, score} files.
    Corr {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        human: PathBuf,
    },
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Args)]
struct QaArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// `replay:PATH`, `remote:URL`, or `remote` with the URL in TABEVAL_ENDPOINT.
    #[arg(long)]
    client: String,
    #[arg(long, value_delimiter = ',', default_value = "cot,pot")]
    modes: Vec<PromptMode>,
    /// Samples drawn per mode.
    #[arg(long, default_value_t = ClientConfig::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = ClientConfig::DEFAULT_TEMPERATURE)]
    temperature: f64,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Abort on the first client error instead of scoring the example as wrong.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PromptCommand {
    /// Print the exact prompt sent to the model.
    Build {
        #[arg(long)]
        mode: PromptMode,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        question: String,
        #[arg(long)]
        title: Option<String>,
    },
}

#[derive(Subcommand)]
enum PotCommand {
    /// Execute a program-of-thought snippet and print `ans`.
    Run { file: PathBuf },
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Mean metric scores under each perturbation kind.
    Sensitivity {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    tabeval::parse_table(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable"));
}

fn emit(report: String, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, report).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(report.as_bytes())?;
            Ok(())
        }
    }
}

fn run_qa(args: QaArgs) -> Result<()> {
    let fallback = std::env::var(ENDPOINT_VAR).ok();
    let kind = ClientKind::parse(&args.client, fallback.as_deref())?;
    let client = kind.build()?;
    let mut cfg = ClientConfig::new(kind);
    cfg.samples_per_mode = args.samples;
    cfg.temperature = args.temperature;
    cfg.parallelism = args.parallelism;
    let dataset = harness::dataset::load_qa_dataset(&args.dataset)?;
    let opts = QaOptions { modes: args.modes, strict: args.strict, ..QaOptions::default() };
    let report = harness::run_qa_pipeline(&dataset, client.as_ref(), &cfg, &opts)?;
    emit(to_json(&report), args.out.as_deref())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Rms { pair, thresholds, no_transpose } => {
            let cfg = thresholds.config()?;
            let (pred, gold) = (read_table(&pair.pred)?, read_table(&pair.gold)?);
            let score = if no_transpose {
                metrics::rms(&pred, &gold, &cfg)
            } else {
                metrics::rms_with_transposition(&pred, &gold, &cfg)
            };
            print_json(&score);
        }
        Command::Rnss { pair } => {
            let (pred, gold) = (read_table(&pair.pred)?, read_table(&pair.gold)?);
            print_json(&json!({ "rnss": metrics::rnss_tables(&pred, &gold) }));
        }
        Command::Score { pair, thresholds } => {
            let cfg = thresholds.config()?;
            let score = metrics::score_texts(&read_text(&pair.pred)?, &read_text(&pair.gold)?, &cfg)?;
            print_json(&score);
        }
        Command::TableEval { dataset, thresholds, out } => {
            let cfg = thresholds.config()?;
            let pairs = harness::dataset::load_table_pairs(&dataset)?;
            let report = harness::run_table_eval(&pairs, &cfg)?;
            emit(to_json(&report), out.as_deref())?;
        }
        Command::Qa(args) => run_qa(args)?,
        Command::Prompt(PromptCommand::Build { mode, table, question, title }) => {
            let mut req = PromptRequest::new(mode, read_table(&table)?, question);
            req.title = title;
            print!("{}", build_prompt(&req));
        }
        Command::Pot(PotCommand::Run { file }) => {
            let source = read_text(&file)?;
            return Ok(match pot::run(&source) {
                Ok(answer) => {
                    println!("{}", answer.rendered);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    println!("ERROR: {}: {e}", e.kind());
                    ExitCode::from(1)
                }
            });
        }
        Command::Corr { metric, human } => {
            let (pearson, spearman) = harness::run_correlation(&metric, &human)?;
            print_json(&json!({ "pearson": pearson, "spearman": spearman }));
        }
        Command::Synth(SynthCommand::Sensitivity { seed, trials }) => {
            if trials == 0 {
                bail!("--trials must be at least 1");
            }
            let rows = synth::sensitivity_report(seed, trials)?;
            print!("{}", to_json(&json!({ "seed": seed, "trials": trials, "perturbations": rows })));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
