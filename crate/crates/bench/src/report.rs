//! Report model and its CSV, markdown and TSV renderings.
//!
//! The CSV is the machine format and has four columns,
//! `engine,query,metric,value`:
//!
//! * host metadata rows use engine `host` and query `-`;
//! * load-phase rows use query `load` and metric `load_ms`;
//! * every (engine, query) cell contributes the metrics in [`CELL_METRICS`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use esgbench_core::model::{BenchSample, EngineKind, QueryId, SearchHit};
use thiserror::Error;

use crate::harness::{median, percentile};

pub const CELL_METRICS: [&str; 6] = ["samples", "median_wall_ms", "p95_wall_ms", "cpu_max_pct", "cpu_avg_pct", "peak_mem_mb"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("report line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("report has no cell for {0} {1}")]
    MissingCell(EngineKind, QueryId),
    #[error("no samples to report")]
    Empty,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ReportError {
    ReportError::Io { path: path.to_path_buf(), message: e.to_string() }
}

/// Summary statistics of one (engine, query) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub samples: usize,
    pub median_wall_ms: f64,
    pub p95_wall_ms: f64,
    pub cpu_max_pct: f64,
    pub cpu_avg_pct: f64,
    pub peak_mem_mb: f64,
}

impl CellStats {
    pub fn from_samples(samples: &[&BenchSample]) -> Option<Self> {
        let wall: Vec<f64> = samples.iter().map(|s| s.wall_ms).collect();
        let n = samples.len();
        Some(CellStats {
            samples: n,
            median_wall_ms: median(&wall)?,
            p95_wall_ms: percentile(&wall, 95.0)?,
            cpu_max_pct: samples.iter().map(|s| s.cpu_max_pct).fold(0.0, f64::max),
            cpu_avg_pct: samples.iter().map(|s| s.cpu_avg_pct).sum::<f64>() / n as f64,
            peak_mem_mb: samples.iter().map(|s| s.peak_mem_mb).fold(0.0, f64::max),
        })
    }

    fn metric(&self, name: &str) -> f64 {
        match name {
            "samples" => self.samples as f64,
            "median_wall_ms" => self.median_wall_ms,
            "p95_wall_ms" => self.p95_wall_ms,
            "cpu_max_pct" => self.cpu_max_pct,
            "cpu_avg_pct" => self.cpu_avg_pct,
            "peak_mem_mb" => self.peak_mem_mb,
            _ => f64::NAN,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub host: BTreeMap<String, String>,
    pub loads: BTreeMap<EngineKind, f64>,
    pub cells: BTreeMap<(EngineKind, QueryId), CellStats>,
}

impl BenchReport {
    pub fn from_samples(
        samples: &[BenchSample],
        host: BTreeMap<String, String>,
        loads: BTreeMap<EngineKind, f64>,
    ) -> Result<Self, ReportError> {
        if samples.is_empty() {
            return Err(ReportError::Empty);
        }
        let mut grouped: BTreeMap<(EngineKind, QueryId), Vec<&BenchSample>> = BTreeMap::new();
        for s in samples {
            grouped.entry((s.engine, s.query)).or_default().push(s);
        }
        let cells = grouped
            .into_iter()
            .filter_map(|(key, s)| CellStats::from_samples(&s).map(|c| (key, c)))
            .collect();
        Ok(BenchReport { host, loads, cells })
    }

    pub fn engines(&self) -> Vec<EngineKind> {
        let mut e: Vec<EngineKind> = self.cells.keys().map(|k| k.0).collect();
        e.dedup();
        e
    }

    /// Every configured cell must be present.
    pub fn check_complete(&self, engines: &[EngineKind], queries: &[QueryId]) -> Result<(), ReportError> {
        for &e in engines {
            for &q in queries {
                if !self.cells.contains_key(&(e, q)) {
                    return Err(ReportError::MissingCell(e, q));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |r: [&str; 4]| w.write_record(r).expect("in-memory write");
        row(["engine", "query", "metric", "value"]);
        for (k, v) in &self.host {
            row(["host", "-", k, v]);
        }
        for (e, ms) in &self.loads {
            row([e.as_str(), "load", "load_ms", &ms.to_string()]);
        }
        for ((e, q), c) in &self.cells {
            for m in CELL_METRICS {
                row([e.as_str(), q.as_str(), m, &c.metric(m).to_string()]);
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn parse_csv(text: &str) -> Result<Self, ReportError> {
        let mut report = BenchReport::default();
        let mut partial: BTreeMap<(EngineKind, QueryId), BTreeMap<String, f64>> = BTreeMap::new();
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| ReportError::Parse { line: 1, message: e.to_string() })?;
        if header.iter().ne(["engine", "query", "metric", "value"]) {
            return Err(ReportError::Parse { line: 1, message: "expected header engine,query,metric,value".into() });
        }
        for rec in r.records() {
            let rec = rec.map_err(|e| ReportError::Parse { line: 0, message: e.to_string() })?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |message: String| ReportError::Parse { line, message };
            if rec.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", rec.len())));
            }
            let (engine, query, metric, value) = (&rec[0], &rec[1], &rec[2], &rec[3]);
            if engine == "host" {
                report.host.insert(metric.to_string(), value.to_string());
                continue;
            }
            let e: EngineKind = engine.parse().map_err(|_| bad(format!("unknown engine {engine:?}")))?;
            let v: f64 = value.parse().map_err(|_| bad(format!("non-numeric value {value:?}")))?;
            if query == "load" {
                report.loads.insert(e, v);
                continue;
            }
            let q: QueryId = query.parse().map_err(|_| bad(format!("unknown query {query:?}")))?;
            if !CELL_METRICS.contains(&metric) {
                return Err(bad(format!("unknown metric {metric:?}")));
            }
            partial.entry((e, q)).or_default().insert(metric.to_string(), v);
        }
        for (key, m) in partial {
            let get = |name: &str| {
                m.get(name).copied().ok_or_else(|| ReportError::Parse {
                    line: 0,
                    message: format!("{} {} lacks metric {name}", key.0, key.1),
                })
            };
            report.cells.insert(
                key,
                CellStats {
                    samples: get("samples")? as usize,
                    median_wall_ms: get("median_wall_ms")?,
                    p95_wall_ms: get("p95_wall_ms")?,
                    cpu_max_pct: get("cpu_max_pct")?,
                    cpu_avg_pct: get("cpu_avg_pct")?,
                    peak_mem_mb: get("peak_mem_mb")?,
                },
            );
        }
        Ok(report)
    }

    /// Human-readable tables; `echo` adds the Q1 hits of one engine.
    pub fn to_markdown(&self, echo: Option<(EngineKind, &[SearchHit])>) -> String {
        let mut s = String::from("# Benchmark report\n\n## Host\n\n| Key | Value |\n|---|---|\n");
        for (k, v) in &self.host {
            let _ = writeln!(s, "| {k} | {v} |");
        }
        if !self.loads.is_empty() {
            s.push_str("\n## Load phase\n\n| Engine | Load ms |\n|---|---:|\n");
            for (e, ms) in &self.loads {
                let _ = writeln!(s, "| {e} | {ms:.2} |");
            }
        }
        s.push_str("\n## Query response\n\n");
        s.push_str("| Engine | Query | Median ms | p95 ms | CPU max % | CPU avg % | Peak MB | Samples |\n");
        s.push_str("|---|---|---:|---:|---:|---:|---:|---:|\n");
        for ((e, q), c) in &self.cells {
            let _ = writeln!(
                s,
                "| {e} | {q} | {:.3} | {:.3} | {:.1} | {:.1} | {:.1} | {} |",
                c.median_wall_ms, c.p95_wall_ms, c.cpu_max_pct, c.cpu_avg_pct, c.peak_mem_mb, c.samples
            );
        }
        if let Some((engine, hits)) = echo {
            let _ = write!(s, "\n## Q1 result ({engine})\n\n| Stock | Date | Media | Score |\n|---|---|---|---:|\n");
            for h in hits {
                let _ = writeln!(s, "| {} | {} | {} | {:.6} |", h.symbol, h.date, h.media, h.score);
            }
        }
        s
    }

    /// Plot-ready series: one file per metric, a row per query, a column per
    /// engine.
    pub fn to_tsv_series(&self) -> Vec<(String, String)> {
        let engines = self.engines();
        let queries: Vec<QueryId> = {
            let mut q: Vec<QueryId> = self.cells.keys().map(|k| k.1).collect();
            q.sort();
            q.dedup();
            q
        };
        CELL_METRICS[1..]
            .iter()
            .map(|m| {
                let mut s = String::from("query");
                for e in &engines {
                    let _ = write!(s, "\t{e}");
                }
                s.push('\n');
                for q in &queries {
                    s.push_str(q.as_str());
                    for e in &engines {
                        match self.cells.get(&(*e, *q)) {
                            Some(c) => {
                                let _ = write!(s, "\t{}", c.metric(m));
                            }
                            None => s.push_str("\tNA"),
                        }
                    }
                    s.push('\n');
                }
                (format!("{m}.tsv"), s)
            })
            .collect()
    }
}

/// Raw per-repetition samples as TSV.
pub fn samples_tsv(samples: &[BenchSample]) -> String {
    let mut s = String::from("engine\tquery\trep\twall_ms\tcpu_max_pct\tcpu_avg_pct\tpeak_mem_mb\n");
    let mut rep: BTreeMap<(EngineKind, QueryId), usize> = BTreeMap::new();
    for x in samples {
        let r = rep.entry((x.engine, x.query)).or_default();
        let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}\t{}\t{}", x.engine, x.query, r, x.wall_ms, x.cpu_max_pct, x.cpu_avg_pct, x.peak_mem_mb);
        *r += 1;
    }
    s
}

/// Writes `report.csv`, `report.md`, `samples.tsv` (when samples are given)
/// and `series/<metric>.tsv` under `dir`.
pub fn emit_report(
    report: &BenchReport,
    samples: &[BenchSample],
    echo: Option<(EngineKind, &[SearchHit])>,
    dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    let series = dir.join("series");
    fs::create_dir_all(&series).map_err(|e| io_err(&series, e))?;
    let mut files = vec![
        (dir.join("report.csv"), report.to_csv()),
        (dir.join("report.md"), report.to_markdown(echo)),
    ];
    if !samples.is_empty() {
        files.push((dir.join("samples.tsv"), samples_tsv(samples)));
    }
    for (name, body) in report.to_tsv_series() {
        files.push((series.join(name), body));
    }
    let mut written = Vec::new();
    for (path, body) in files {
        fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
