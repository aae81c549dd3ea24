//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 divergence or runtime failure, 2 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use esgbench_core::ingest::{generate, load_dataset_dir, write_dataset, GeneratorConfig};
use esgbench_core::model::{Dataset, EngineKind, QueryId, Rows};
use esgbench_core::workload::{run_query, QueryParams, QuerySpec};

use crate::harness::{cpu_count, BenchConfig};
use crate::matrix::{load_engine, run_matrix, verify_engines};
use crate::report::{emit_report, BenchReport};

const ECHO_ROWS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "esgbench", version, about = "ESG query benchmark over relational, document and graph engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset directory.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate and load a dataset directory.
    Ingest {
        #[arg(long)]
        data: PathBuf,
    },
    /// Check that all engines return equivalent results.
    Verify {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1)]
        shards: usize,
        /// Query parameter file (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Time every (engine, query) cell and write reports.
    Bench {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',', default_value = "relational,document,graph")]
        engines: Vec<EngineKind>,
        #[arg(long, default_value_t = 30)]
        reps: usize,
        #[arg(long, default_value_t = 3)]
        warmups: usize,
        #[arg(long, default_value_t = 50)]
        interval_ms: u64,
        #[arg(long, default_value_t = 1)]
        shards: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        /// Run even if the engines disagree.
        #[arg(long)]
        force: bool,
    },
    /// Run one query on one engine and print its rows.
    Query {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        engine: EngineKind,
        #[arg(long)]
        query: QueryId,
        /// Q1 article limit, or `all`.
        #[arg(long)]
        k: Option<String>,
        #[arg(long, default_value_t = 1)]
        shards: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Re-render reports from a report CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    stocks: usize,
    #[arg(long, default_value_t = 5)]
    sectors: usize,
    #[arg(long, default_value_t = 10_000)]
    news: usize,
    /// Trading days of bars.
    #[arg(long, default_value_t = 42)]
    days: usize,
    #[arg(long, default_value_t = 8)]
    bars_per_day: usize,
    #[arg(long, default_value_t = 0.1)]
    esg_fraction: f64,
}

impl GenArgs {
    fn config(&self) -> GeneratorConfig {
        GeneratorConfig {
            seed: self.seed,
            n_stocks: self.stocks,
            n_sectors: self.sectors,
            n_news: self.news,
            days: self.days,
            bars_per_day: self.bars_per_day,
            esg_fraction: self.esg_fraction,
        }
    }
}

/// A dataset directory, or generator settings when `--data` is absent.
#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
}

impl DataArgs {
    fn dataset(&self) -> Result<(Dataset, BTreeMap<String, String>), String> {
        let mut meta = BTreeMap::new();
        let ds = match &self.data {
            Some(dir) => {
                let (v, loaded) = load_dataset_dir(dir).map_err(|e| e.to_string())?;
                meta.insert("dataset".into(), dir.display().to_string());
                meta.insert("rejected_records".into(), (v.report.rejected.len() + loaded.rejects.len()).to_string());
                v.dataset
            }
            None => {
                let c = self.gen.config();
                meta.insert(
                    "dataset".into(),
                    format!(
                        "generated seed={} stocks={} sectors={} news={} days={} bars_per_day={} esg_fraction={}",
                        c.seed, c.n_stocks, c.n_sectors, c.n_news, c.days, c.bars_per_day, c.esg_fraction
                    ),
                );
                generate(&c).map_err(|e| e.to_string())?
            }
        };
        meta.insert("news".into(), ds.news().len().to_string());
        meta.insert("bars".into(), ds.bars().len().to_string());
        meta.insert("stocks".into(), ds.stocks().len().to_string());
        Ok((ds, meta))
    }
}

fn query_params(config: Option<&Path>) -> Result<QueryParams, String> {
    match config {
        Some(p) => QueryParams::load(p).map_err(|e| e.to_string()),
        None => Ok(QueryParams::default()),
    }
}

fn parse_k(s: &str) -> Result<Option<usize>, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(None);
    }
    match s.parse::<usize>() {
        Ok(k) if k > 0 => Ok(Some(k)),
        _ => Err(format!("--k expects a positive integer or `all`, got {s:?}")),
    }
}

/// Host description stored in every report.
pub fn host_metadata() -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("os".into(), format!("{} {}", std::env::consts::OS, std::env::consts::ARCH));
    m.insert("logical_cpus".into(), cpu_count().to_string());
    if let Ok(info) = fs::read_to_string("/proc/cpuinfo") {
        if let Some(model) = info.lines().find_map(|l| l.strip_prefix("model name").and_then(|r| r.split(':').nth(1))) {
            m.insert("cpu_model".into(), model.trim().to_string());
        }
    }
    if let Ok(info) = fs::read_to_string("/proc/meminfo") {
        let kb = info
            .lines()
            .find_map(|l| l.strip_prefix("MemTotal:"))
            .and_then(|r| r.split_whitespace().next())
            .and_then(|v| v.parse::<u64>().ok());
        if let Some(kb) = kb {
            m.insert("mem_total_mb".into(), (kb / 1024).to_string());
        }
    }
    m
}

enum Failure {
    /// Engines disagree or a command failed at runtime.
    Runtime(String),
    Usage(String),
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Runtime(s)
    }
}

/// Runs the CLI with explicit output streams; returns the exit code.
pub fn run_cli<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

/// Process entry point.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_cli(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let w = |e: std::io::Error| Failure::Runtime(e.to_string());
    match cmd {
        Command::Gen { gen, out: dir } => {
            let ds = generate(&gen.config()).map_err(|e| e.to_string())?;
            write_dataset(&ds, &dir).map_err(|e| e.to_string())?;
            writeln!(out, "wrote {} stocks, {} news, {} bars to {}", ds.stocks().len(), ds.news().len(), ds.bars().len(), dir.display())
                .map_err(w)?;
        }
        Command::Ingest { data } => {
            let (v, loaded) = load_dataset_dir(&data).map_err(|e| e.to_string())?;
            let r = &v.report;
            writeln!(
                out,
                "accepted {} sectors, {} stocks, {} news, {} bars; {} duplicate bars dropped",
                r.accepted_sectors, r.accepted_stocks, r.accepted_news, r.accepted_bars, loaded.duplicate_bars
            )
            .map_err(w)?;
            for rej in &loaded.rejects {
                writeln!(out, "rejected {rej}").map_err(w)?;
            }
            for rej in &r.rejected {
                writeln!(out, "rejected {:?} {}: {}", rej.kind, rej.key, rej.reason).map_err(w)?;
            }
        }
        Command::Verify { data, shards, config } => {
            if shards == 0 {
                return Err(Failure::Usage("--shards must be at least 1".into()));
            }
            let (ds, _) = data.dataset()?;
            let params = query_params(config.as_deref())?.with_k(None);
            verify(&ds, shards, &params, out)?;
        }
        Command::Bench { data, engines, reps, warmups, interval_ms, shards, config, out: dir, force } => {
            let mut engines = engines;
            engines.sort();
            engines.dedup();
            let bench = BenchConfig {
                warmups,
                repetitions: reps,
                sample_interval_ms: interval_ms,
                engines,
                params: query_params(config.as_deref())?.with_k(None),
                shards,
            };
            if shards == 0 {
                return Err(Failure::Usage("--shards must be at least 1".into()));
            }
            bench.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let (ds, meta) = data.dataset()?;
            if let Err(Failure::Runtime(msg)) = verify(&ds, shards, &bench.params, out) {
                if !force {
                    return Err(Failure::Runtime(format!("{msg}; refusing to benchmark (use --force)")));
                }
                writeln!(err, "warning: {msg}; continuing because of --force").map_err(w)?;
            }
            let outcome = run_matrix(&ds, &bench).map_err(|e| e.to_string())?;
            let mut host = host_metadata();
            host.extend(meta);
            host.insert("repetitions".into(), reps.to_string());
            host.insert("warmups".into(), warmups.to_string());
            host.insert("shards".into(), shards.to_string());
            let report = BenchReport::from_samples(&outcome.samples, host, outcome.load_ms.clone()).map_err(|e| e.to_string())?;
            report.check_complete(&bench.engines, &QueryId::ALL).map_err(|e| e.to_string())?;
            let echo = outcome.hits.iter().next_back().map(|(k, h)| (*k, &h[..h.len().min(ECHO_ROWS)]));
            let files = emit_report(&report, &outcome.samples, echo, &dir).map_err(|e| e.to_string())?;
            write!(out, "{}", report.to_markdown(None)).map_err(w)?;
            for f in files {
                writeln!(out, "wrote {}", f.display()).map_err(w)?;
            }
        }
        Command::Query { data, engine, query, k, shards, config } => {
            if shards == 0 {
                return Err(Failure::Usage("--shards must be at least 1".into()));
            }
            let mut params = query_params(config.as_deref())?;
            if let Some(k) = k {
                params = params.with_k(parse_k(&k).map_err(Failure::Usage)?);
            }
            let (ds, _) = data.dataset()?;
            let e = load_engine(engine, &ds, shards).map_err(|e| e.to_string())?;
            let q1 = QuerySpec { query_id: QueryId::Q1, params: params.clone() };
            let hits = run_query(e.as_ref(), &q1, None).map_err(|e| e.to_string())?;
            let result = if query == QueryId::Q1 {
                hits
            } else {
                run_query(e.as_ref(), &QuerySpec { query_id: query, params }, hits.hits()).map_err(|e| e.to_string())?
            };
            print_rows(&result.rows, out).map_err(w)?;
        }
        Command::Report { input, out: dir } => {
            let text = fs::read_to_string(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            let report = BenchReport::parse_csv(&text).map_err(|e| e.to_string())?;
            let engines: Vec<EngineKind> = report.engines();
            report.check_complete(&engines, &QueryId::ALL).map_err(|e| e.to_string())?;
            emit_report(&report, &[], None, &dir).map_err(|e| e.to_string())?;
            write!(out, "{}", report.to_markdown(None)).map_err(w)?;
        }
    }
    Ok(())
}

fn verify(ds: &Dataset, shards: usize, params: &QueryParams, out: &mut dyn Write) -> Result<(), Failure> {
    let reports = verify_engines(ds, shards, params).map_err(|e| e.to_string())?;
    let mut ok = true;
    for r in &reports {
        writeln!(out, "{r}").map_err(|e| e.to_string())?;
        ok &= r.is_equivalent();
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Runtime("engines diverge".into()))
    }
}

fn print_rows(rows: &Rows, out: &mut dyn Write) -> std::io::Result<()> {
    match rows {
        Rows::Hits(hits) => {
            writeln!(out, "stock\tdate\tmedia\tscore")?;
            for h in hits {
                writeln!(out, "{}\t{}\t{}\t{:.6}", h.symbol, h.date, h.media, h.score)?;
            }
        }
        Rows::Bars(bars) => {
            writeln!(out, "tag\tstock\ttimestamp\tanchor\tvia\topen\thigh\tlow\tclose\tvolume")?;
            for r in bars {
                let b = &r.bar;
                let via = r.via.as_ref().map(|v| v.as_str()).unwrap_or("-");
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.tag.as_str(),
                    b.symbol,
                    b.timestamp,
                    r.anchor,
                    via,
                    b.open,
                    b.high,
                    b.low,
                    b.close,
                    b.volume
                )?;
            }
        }
    }
    Ok(())
}
