//! End-to-end runs of the command-line tool through `run_cli`.

use std::fs;
use std::path::Path;

use esgbench::harness::{time_query, BenchConfig};
use esgbench::report::{emit_report, BenchReport};
use esgbench::run_cli;
use esgbench_core::engine::GraphEngine;
use esgbench_core::ingest::{generate, GeneratorConfig};
use esgbench_core::model::QueryId;

const SMALL: [&str; 10] = ["--stocks", "8", "--sectors", "3", "--news", "300", "--days", "6", "--bars-per-day", "3"];

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(std::iter::once("esgbench").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(SMALL).collect()
}

#[test]
fn verify_passes_on_a_generated_dataset() {
    let (code, out, err) = run(&with_small(&["verify", "--seed", "3"]));
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.matches("equivalent").count(), 3, "{out}");
}

#[test]
fn verify_reads_a_dataset_directory() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().to_str().unwrap();
    assert_eq!(run(&with_small(&["gen", "--out", data])).0, 0);
    let (code, out, _) = run(&["ingest", "--data", data]);
    assert_eq!(code, 0);
    assert!(out.contains("accepted 3 sectors, 8 stocks, 300 news"), "{out}");
    assert_eq!(run(&["verify", "--data", data, "--shards", "3"]).0, 0);
}

#[test]
fn bench_graph_five_reps_gives_five_samples_per_query() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("report");
    let out_arg = out_dir.to_str().unwrap();
    let args = with_small(&["bench", "--engines", "graph", "--reps", "5", "--warmups", "0", "--interval-ms", "5", "--out", out_arg]);
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("| graph | Q5 |"));

    let samples = fs::read_to_string(out_dir.join("samples.tsv")).unwrap();
    let rows: Vec<&str> = samples.lines().skip(1).collect();
    assert_eq!(rows.len(), 25);
    for q in QueryId::ALL {
        assert_eq!(rows.iter().filter(|r| r.split('\t').nth(1) == Some(q.as_str())).count(), 5);
    }
    let report = BenchReport::parse_csv(&fs::read_to_string(out_dir.join("report.csv")).unwrap()).unwrap();
    assert_eq!(report.cells.len(), 5);
    assert!(report.cells.values().all(|c| c.samples == 5 && c.median_wall_ms <= c.p95_wall_ms));
    assert!(report.host.contains_key("logical_cpus"));
    let md = fs::read_to_string(out_dir.join("report.md")).unwrap();
    assert!(md.contains("| Stock | Date | Media | Score |"));
    assert!(out_dir.join("series/median_wall_ms.tsv").exists());
}

fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push((path.strip_prefix(dir).unwrap().display().to_string(), fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn gen_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(run(&with_small(&["gen", "--seed", "7", "--out", d.to_str().unwrap()])).0, 0);
    }
    let (ta, tb) = (tree_bytes(&a), tree_bytes(&b));
    assert!(ta.len() >= 10);
    assert_eq!(ta, tb);
    let c = dir.path().join("c");
    run(&with_small(&["gen", "--seed", "8", "--out", c.to_str().unwrap()]));
    assert_ne!(tree_bytes(&c), ta);
}

#[test]
fn query_prints_rows() {
    let (code, out, _) = run(&with_small(&["query", "--engine", "doc", "--query", "Q1", "--k", "3", "--esg-fraction", "1"]));
    assert_eq!(code, 0);
    assert!(out.starts_with("stock\tdate\tmedia\tscore\n"));
    assert!(out.lines().count() > 3);
    let (code, out, _) = run(&with_small(&["query", "--engine", "graph", "--query", "Q5"]));
    assert_eq!(code, 0);
    assert!(out.lines().skip(1).all(|l| l.starts_with("peer\t")));
}

#[test]
fn report_rerenders_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let args = with_small(&["bench", "--engines", "relational,graph,document", "--reps", "1", "--warmups", "0", "--out", first.to_str().unwrap()]);
    assert_eq!(run(&args).0, 0);
    let second = dir.path().join("second");
    let csv = first.join("report.csv");
    let (code, out, err) = run(&["report", "--input", csv.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let cells = out.lines().filter(|l| QueryId::ALL.iter().any(|q| l.contains(&format!(" | {q} |")))).count();
    assert_eq!(cells, 15);
    assert_eq!(fs::read(second.join("report.csv")).unwrap(), fs::read(&csv).unwrap());

    let (code, _, err) = run(&["report", "--input", dir.path().join("missing.csv").to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("missing.csv"));
}

#[test]
fn usage_errors_exit_2() {
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    assert!(err.contains("Usage"), "{err}");
    assert_eq!(run(&[]).0, 2);
    assert_eq!(run(&["bench", "--reps", "0"]).0, 2);
    assert_eq!(run(&["bench", "--engines", "columnar"]).0, 2);
    assert_eq!(run(&["query", "--engine", "graph", "--query", "Q1", "--k", "zero"]).0, 2);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify"));
}

#[test]
fn missing_dataset_is_a_runtime_failure() {
    let (code, _, err) = run(&["ingest", "--data", "/nonexistent/esgbench"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
}

#[test]
fn single_repetition_gives_one_sample() {
    let ds = generate(&GeneratorConfig { n_news: 100, days: 3, ..GeneratorConfig::default() }).unwrap();
    let g = GraphEngine::load(&ds).unwrap();
    let config = BenchConfig { warmups: 0, repetitions: 1, ..BenchConfig::default() };
    let s = time_query(&g, QueryId::Q1, None, &config).unwrap();
    assert_eq!(s.len(), 1);
    assert!(s[0].cpu_avg_pct <= s[0].cpu_max_pct);
    assert!(time_query(&g, QueryId::Q2, None, &config).is_err());
}

#[test]
fn unwritable_report_dir_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let ds = generate(&GeneratorConfig { n_news: 50, days: 2, ..GeneratorConfig::default() }).unwrap();
    let g = GraphEngine::load(&ds).unwrap();
    let samples = time_query(&g, QueryId::Q1, None, &BenchConfig { warmups: 0, repetitions: 2, ..BenchConfig::default() }).unwrap();
    let report = BenchReport::from_samples(&samples, Default::default(), Default::default()).unwrap();
    assert!(emit_report(&report, &samples, None, &blocker.join("out")).is_err());
    assert!(BenchReport::from_samples(&[], Default::default(), Default::default()).is_err());
}
