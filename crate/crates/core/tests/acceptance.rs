//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tabeval::harness::client::{ClientConfig, ClientKind, ReplayClient};
use tabeval::harness::dataset::load_qa_dataset;
use tabeval::harness::report::to_json;
use tabeval::harness::{run_qa_pipeline, QaOptions};
use tabeval::metrics::{pearson, relaxed_accuracy, rms, rms_mappings, rms_with_transposition, rnss, spearman};
use tabeval::pot;
use tabeval::prompting::{extract_cot_answer, COT_EXEMPLAR};
use tabeval::synth::{generate_table, perturb, Perturbation, PerturbationKind};
use tabeval::{parse_table, Entry, EntryMapping, MetricConfig, Table};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Outcome {
    check(elapsed < budget, || format!("took {elapsed:?}, budget {budget:?}"))
}

fn self_identity() -> Outcome {
    let cfg = MetricConfig::default();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..200 {
        let t = generate_table(rng.random(), rng.random_range(2..=12), rng.random_range(2..=12)).unwrap();
        let f1 = rms_with_transposition(&t, &t, &cfg).f1;
        check(f1 == 1.0, || format!("table {i}: f1 {f1}"))?;
    }
    within(start.elapsed(), Duration::from_secs(5))
}

fn invariance() -> Outcome {
    let cfg = MetricConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let target = generate_table(rng.random(), rng.random_range(2..=7), rng.random_range(2..=7)).unwrap();
        // A noisy prediction, so the reference F1 is not trivially 1.
        let mut pred = perturb(&target, &Perturbation::new(PerturbationKind::JitterValues { epsilon: 0.3 }, rng.random())).unwrap();
        pred = perturb(&pred, &Perturbation::new(PerturbationKind::EditHeaders { edits: 2 }, rng.random())).unwrap();
        let base = rms_with_transposition(&pred, &target, &cfg).f1;

        let mut moved = perturb(&pred, &Perturbation::new(PerturbationKind::PermuteRows, rng.random())).unwrap();
        moved = perturb(&moved, &Perturbation::new(PerturbationKind::PermuteCols, rng.random())).unwrap();
        if rng.random_bool(0.5) {
            moved = moved.transpose();
        }
        let delta = (rms_with_transposition(&moved, &target, &cfg).f1 - base).abs();
        worst = worst.max(delta);
        check(delta <= 1e-12, || format!("trial {trial}: f1 moved by {delta:e}"))?;
    }
    println!("      worst f1 change {worst:e}");
    Ok(())
}

// Independent reference implementations for the matching oracle.

fn oracle_levenshtein(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn oracle_nl(a: &str, b: &str, tau: f64) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    let d = oracle_levenshtein(a, b) as f64 / longest as f64;
    if d > tau {
        1.0
    } else {
        d
    }
}

fn oracle_rel(p: f64, t: f64) -> f64 {
    if t == 0.0 {
        return if p == 0.0 { 0.0 } else { 1.0 };
    }
    ((p - t).abs() / t.abs()).min(1.0)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All assignments of the zero-padded square matrix in lexicographic order;
/// the first one that no later one beats by more than 1e-12 wins. Returns the
/// real (row, col) pairs in row order.
fn brute_force(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let k = n.max(m);
    let padded = |i: usize, j: usize| if i < n && j < m { cost(i, j) } else { 0.0 };
    let total = |perm: &[usize]| perm.iter().enumerate().map(|(i, &j)| padded(i, j)).sum::<f64>();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = perm.clone();
    let mut best_cost = total(&perm);
    while next_permutation(&mut perm) {
        let c = total(&perm);
        if c < best_cost - 1e-12 {
            best_cost = c;
            best = perm.clone();
        }
    }
    best.iter().enumerate().filter(|&(i, &j)| i < n && j < m).map(|(i, &j)| (i, j)).collect()
}

fn number(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => f64::from(rng.random_range(1..6)),
        2 => f64::from(rng.random_range(-50..50)) / 4.0,
        _ => rng.random_range(-100.0..100.0),
    }
}

fn word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(0..4);
    (0..len).map(|_| *b"abc".choose(rng).unwrap() as char).collect()
}

fn entry(rng: &mut ChaCha8Rng) -> Entry {
    let value = if rng.random_bool(0.7) { format!("{}", f64::from(rng.random_range(0..20)) / 2.0) } else { word(rng) };
    Entry::new(&word(rng), &word(rng), &value)
}

fn oracle_rms(p: &[Entry], t: &[Entry], tau: f64, theta: f64) -> (f64, f64, f64) {
    let (n, m) = (p.len(), t.len());
    if n == 0 && m == 0 {
        return (1.0, 1.0, 1.0);
    }
    let key = |e: &Entry| format!("{} {}", e.row_header, e.col_header);
    let pairs = brute_force(n, m, |i, j| oracle_nl(&key(&p[i]), &key(&t[j]), tau));
    let s: f64 = pairs
        .iter()
        .map(|&(i, j)| {
            let key_sim = 1.0 - oracle_nl(&key(&p[i]), &key(&t[j]), tau);
            let value_sim = match (p[i].value.parse::<f64>(), t[j].value.parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    let d = oracle_rel(a, b);
                    1.0 - if d > theta { 1.0 } else { d }
                }
                _ => 1.0 - oracle_nl(&p[i].value, &t[j].value, tau),
            };
            key_sim * value_sim
        })
        .sum();
    let precision = if n == 0 { 0.0 } else { s / n as f64 };
    let recall = if m == 0 { 0.0 } else { s / m as f64 };
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    (precision, recall, f1)
}

fn matching_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = MetricConfig::default();
    for case in 0..500 {
        let (n, m) = (rng.random_range(0..=6), rng.random_range(0..=6));
        let pred: Vec<f64> = (0..n).map(|_| number(&mut rng)).collect();
        let target: Vec<f64> = (0..m).map(|_| number(&mut rng)).collect();
        let expected = if n.max(m) == 0 {
            1.0
        } else {
            let pairs = brute_force(n, m, |i, j| oracle_rel(pred[i], target[j]));
            1.0 - pairs.iter().map(|&(i, j)| oracle_rel(pred[i], target[j])).sum::<f64>() / n.max(m) as f64
        };
        let got = rnss(&pred, &target);
        check(got == expected, || format!("rnss case {case}: {got} != {expected} for {pred:?} vs {target:?}"))?;

        let (n, m) = (rng.random_range(0..=6), rng.random_range(0..=6));
        let p: Vec<Entry> = (0..n).map(|_| entry(&mut rng)).collect();
        let t: Vec<Entry> = (0..m).map(|_| entry(&mut rng)).collect();
        let got = rms_mappings(&EntryMapping::new(p.clone()), &EntryMapping::new(t.clone()), &cfg);
        let (ep, er, ef) = oracle_rms(&p, &t, 0.5, 0.5);
        check((got.precision, got.recall, got.f1) == (ep, er, ef), || {
            format!("rms case {case}: {got:?} != ({ep}, {er}, {ef})")
        })?;
    }
    Ok(())
}

fn single(value: &str) -> Table {
    parse_table(&format!("k | c\nr | {value}")).unwrap()
}

fn thresholds() -> Outcome {
    let cfg = MetricConfig::default();
    let target = single("100");
    for (e, pred, expected) in
        [(0.01, "101", 0.99), (0.1, "110", 0.9), (0.49, "149", 0.51), (0.51, "151", 0.0), (0.9, "190", 0.0)]
    {
        let f1 = rms(&single(pred), &target, &cfg).f1;
        check((f1 - expected).abs() <= 1e-12, || format!("e = {e}: f1 {f1}, expected {expected}"))?;
    }
    Ok(())
}

fn directionality() -> Outcome {
    let cfg = MetricConfig::default();
    for seed in 0..20 {
        let target = generate_table(seed, 4, 4).unwrap();
        let added = perturb(&target, &Perturbation::new(PerturbationKind::AddRows { count: 1 }, seed)).unwrap();
        let s = rms_with_transposition(&added, &target, &cfg);
        check(s.precision < 1.0 && s.recall == 1.0, || format!("seed {seed} add_rows(1): {s:?}"))?;
        let dropped = perturb(&target, &Perturbation::new(PerturbationKind::DropRows { count: 1 }, seed)).unwrap();
        let s = rms_with_transposition(&dropped, &target, &cfg);
        check(s.precision == 1.0 && (s.recall - 2.0 / 3.0).abs() <= 1e-12, || {
            format!("seed {seed} drop_rows(1): {s:?}")
        })?;
    }
    Ok(())
}

fn rnss_blindness() -> Outcome {
    let score = rnss(&[100.0, 50.0], &[100.0]);
    check(score == 1.0, || format!("rnss {score}"))?;
    let pred = parse_table("k | c\na | 100\nb | 50").unwrap();
    let target = parse_table("k | c\na | 100").unwrap();
    let s = rms(&pred, &target, &MetricConfig::default());
    check(s.precision == 0.5 && s.recall == 1.0, || format!("rms {s:?}"))
}

const POT_GOLDEN: [(&str, &str); 4] = [
    ("indonesia = 2.88\nireland = 2.33\nmauritania = 4.15\nans=(indonesia+ireland)-mauritania\n", "1.06"),
    (
        "#Python\n#year 2009 corresponds to row 11\n#year 2019 corresponds to row 1\nfemale_2009 = 5.27 \nfemale_2019 = 5.9 \nans = female_2019 - female_2009 \n",
        "0.63",
    ),
    (
        "#Python\n# Years 2013, 2011, 2009, 2007, and 2005 correspond to rows 1, 2, 3, 4, and 5.\npenetration_2013 = 48\npenetration_2011 = 43\npenetration_2009 = 33\npenetration_2007 = 26\npenetration_2005 = 18\nans = (penetration_2013 + penetration_2011 + penetration_2009 + penetration_2007 + penetration_2005) / 5\n",
        "33.6",
    ),
    (
        "#Identity theft corresponds to row 5\n#Numbers on row 5 are [66, 17, 16]\n#Highest value of the gray bar is 79\nans = 66 > 79\n",
        "No",
    ),
];

fn pot_golden() -> Outcome {
    let start = Instant::now();
    for (src, gold) in POT_GOLDEN {
        let answer = pot::run(src).map_err(|e| format!("{e}"))?;
        check(relaxed_accuracy(&answer.rendered, gold), || format!("`{}` vs gold `{gold}`", answer.rendered))?;
    }
    check(pot::run(POT_GOLDEN[3].0).unwrap().value == pot::PotValue::Boolean(false), || "expected False".into())?;
    within(start.elapsed(), Duration::from_secs(1))
}

fn cot_golden() -> Outcome {
    let blocks: Vec<&str> = COT_EXEMPLAR.split("\n\nQ:").skip(1).collect();
    check(blocks.len() == 5, || format!("{} answer blocks", blocks.len()))?;
    for (block, gold) in blocks.iter().zip(["2007", "210.1", "6.8", "Republicans", "Independents"]) {
        let got = extract_cot_answer(block);
        check(got.as_deref() == Some(gold), || format!("{got:?}, expected {gold}"))?;
    }
    Ok(())
}

fn relaxed_rule() -> Outcome {
    for (pred, gold, expected) in [("34", "33.6", true), ("10.6", "10", false), ("republicans ", "Republicans", true)] {
        check(relaxed_accuracy(pred, gold) == expected, || format!("({pred:?}, {gold:?}) should be {expected}"))?;
    }
    Ok(())
}

fn textbook_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Average ranks by counting: rank = #smaller + (#equal + 1) / 2.
fn textbook_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let less = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn correlation_oracle() -> Outcome {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let x: Vec<f64> = (0..50).map(|_| f64::from(rng.random_range(0..10))).collect();
        let y: Vec<f64> = x.iter().map(|a| a + (rng.random_range(-3.0f64..3.0) * 2.0).round() / 2.0).collect();
        let p = pearson(&x, &y).map_err(|e| e.to_string())?;
        let s = spearman(&x, &y).map_err(|e| e.to_string())?;
        let (ep, es) = (textbook_pearson(&x, &y), textbook_pearson(&textbook_ranks(&x), &textbook_ranks(&y)));
        check((p - ep).abs() <= 1e-9 && (s - es).abs() <= 1e-9, || {
            format!("seed {seed}: pearson {p} vs {ep}, spearman {s} vs {es}")
        })?;
    }
    Ok(())
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn replay_report(parallelism: usize) -> Result<String, String> {
    let store = fixture("replay_small.jsonl");
    let client = ReplayClient::load(&store).map_err(|e| e.to_string())?;
    let dataset = load_qa_dataset(fixture("qa_small.jsonl")).map_err(|e| e.to_string())?;
    let mut cfg = ClientConfig::new(ClientKind::Replay(store));
    cfg.samples_per_mode = 3;
    cfg.parallelism = parallelism;
    let report = run_qa_pipeline(&dataset, &client, &cfg, &QaOptions::default()).map_err(|e| e.to_string())?;
    check(report.examples.len() == 5, || "expected 5 records".into())?;
    Ok(to_json(&report))
}

fn replay_determinism() -> Outcome {
    let first = replay_report(1)?;
    let second = replay_report(1)?;
    let wide = replay_report(8)?;
    check(first == second, || "two runs differ".into())?;
    check(first == wide, || "parallelism 1 and 8 differ".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("metric self-identity on 200 generated tables", self_identity),
        ("permutation and transposition invariance over 200 trials", invariance),
        ("matching oracle on 500 brute-force instances", matching_oracle),
        ("threshold semantics at theta 0.5", thresholds),
        ("precision/recall directionality", directionality),
        ("RNSS blindness to extra numbers", rnss_blindness),
        ("PoT golden snippets", pot_golden),
        ("CoT exemplar answer extraction", cot_golden),
        ("relaxed accuracy rule", relaxed_rule),
        ("correlation oracle with tied ranks", correlation_oracle),
        ("replay determinism across runs and parallelism", replay_determinism),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        match criterion() {
            Ok(()) => println!("PASS  {name}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
