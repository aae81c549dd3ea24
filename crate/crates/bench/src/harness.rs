//! Timing, CPU and memory sampling around single query executions.

use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use esgbench_core::engine::Engine;
use esgbench_core::model::{BenchSample, EngineKind, QueryId, SearchHit};
use esgbench_core::workload::{run_query, QueryParams, QuerySpec, WorkloadError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("sample interval must be at least 1 ms")]
    BadInterval,
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error("invalid sample: {0}")]
    Sample(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub warmups: usize,
    pub repetitions: usize,
    pub sample_interval_ms: u64,
    pub engines: Vec<EngineKind>,
    pub params: QueryParams,
    /// Document engine shard count.
    pub shards: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            warmups: 3,
            repetitions: 30,
            sample_interval_ms: 50,
            engines: EngineKind::ALL.to_vec(),
            params: QueryParams::default().with_k(None),
            shards: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.repetitions == 0 {
            return Err(BenchError::NoRepetitions);
        }
        if self.sample_interval_ms == 0 {
            return Err(BenchError::BadInterval);
        }
        Ok(())
    }
}

/// CPU time consumed by all threads of this process.
pub fn process_cpu_time() -> Duration {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid out-pointer for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return Duration::ZERO;
    }
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}

/// Resident set size in bytes; 0 where `/proc` is unavailable.
pub fn resident_bytes() -> u64 {
    let Ok(statm) = std::fs::read_to_string("/proc/self/statm") else { return 0 };
    let pages: u64 = statm.split_whitespace().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    // SAFETY: sysconf has no preconditions.
    let page = unsafe { libc::sysconf(libc::_SC_PAGESIZE) };
    pages * page.max(0) as u64
}

pub fn cpu_count() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

const MB: f64 = 1024.0 * 1024.0;

/// Process CPU use over an interval, as a share of all cores.
fn cpu_pct(cpu: Duration, wall: Duration) -> f64 {
    if wall.is_zero() {
        return 0.0;
    }
    (100.0 * cpu.as_secs_f64() / wall.as_secs_f64() / cpu_count() as f64).clamp(0.0, 100.0)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PollSample {
    pub cpu_pct: f64,
    pub rss_bytes: u64,
}

/// Background sampler. The thread owns its buffer and hands it back on
/// [`ResourcePoller::stop`].
pub struct ResourcePoller {
    stop: mpsc::Sender<()>,
    handle: JoinHandle<Vec<PollSample>>,
}

impl ResourcePoller {
    pub fn start(interval: Duration) -> Self {
        let (stop, rx) = mpsc::channel::<()>();
        let handle = thread::spawn(move || {
            let mut samples = Vec::new();
            let mut last_wall = Instant::now();
            let mut last_cpu = process_cpu_time();
            while let Err(RecvTimeoutError::Timeout) = rx.recv_timeout(interval) {
                let (wall, cpu) = (Instant::now(), process_cpu_time());
                samples.push(PollSample {
                    cpu_pct: cpu_pct(cpu.saturating_sub(last_cpu), wall - last_wall),
                    rss_bytes: resident_bytes(),
                });
                (last_wall, last_cpu) = (wall, cpu);
            }
            samples
        });
        ResourcePoller { stop, handle }
    }

    pub fn stop(self) -> Vec<PollSample> {
        let _ = self.stop.send(());
        self.handle.join().unwrap_or_default()
    }
}

/// One measured call of `f`.
pub fn measure<T, E>(
    engine: EngineKind,
    query: QueryId,
    interval: Duration,
    f: impl FnOnce() -> Result<T, E>,
) -> Result<(T, BenchSample), E> {
    let poller = ResourcePoller::start(interval);
    let rss_before = resident_bytes();
    let cpu0 = process_cpu_time();
    let t0 = Instant::now();
    let out = f();
    let wall = t0.elapsed();
    let cpu = process_cpu_time().saturating_sub(cpu0);
    let rss_after = resident_bytes();
    let polled = poller.stop();
    let value = out?;

    let avg = cpu_pct(cpu, wall);
    let max = polled.iter().map(|s| s.cpu_pct).fold(avg, f64::max);
    let peak = polled.iter().map(|s| s.rss_bytes).chain([rss_before, rss_after]).max().unwrap_or(0);
    let wall_ms = (wall.as_secs_f64() * 1e3).max(1e-6);
    let sample = BenchSample::new(engine, query, wall_ms, max, avg, peak as f64 / MB)
        .expect("measured values satisfy the sample invariants");
    Ok((value, sample))
}

/// Warmups, then `repetitions` measured runs of one query. Q2-Q5 receive
/// precomputed Q1 hits so only the query's own work is timed.
pub fn time_query(
    engine: &dyn Engine,
    query: QueryId,
    hits: Option<&[SearchHit]>,
    config: &BenchConfig,
) -> Result<Vec<BenchSample>, BenchError> {
    config.validate()?;
    let spec = QuerySpec { query_id: query, params: config.params.clone() };
    for _ in 0..config.warmups {
        run_query(engine, &spec, hits)?;
    }
    let interval = Duration::from_millis(config.sample_interval_ms);
    let mut samples = Vec::with_capacity(config.repetitions);
    for _ in 0..config.repetitions {
        let (_, sample) = measure(engine.kind(), query, interval, || run_query(engine, &spec, hits))?;
        samples.push(sample);
    }
    Ok(samples)
}

/// Nearest-rank percentile of an unsorted slice; `None` when empty.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    Some(v[rank.min(v.len()) - 1])
}

/// Middle value, or the mean of the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}
