//! Engine loading, cross-engine verification and the full benchmark matrix.

use std::collections::BTreeMap;
use std::time::Instant;

use esgbench_core::engine::{DocumentEngine, Engine, EngineError, GraphEngine, RelationalEngine};
use esgbench_core::model::{BenchSample, Dataset, EngineKind, QueryId, SearchHit};
use esgbench_core::workload::{assert_equivalent, run_query, run_workload, EquivalenceReport, QueryParams, QuerySpec, WorkloadError};

use crate::harness::{time_query, BenchConfig, BenchError};

/// Builds one engine over `ds`. The document engine uses `shards` shards.
pub fn load_engine(kind: EngineKind, ds: &Dataset, shards: usize) -> Result<Box<dyn Engine>, EngineError> {
    Ok(match kind {
        EngineKind::Relational => Box::new(RelationalEngine::load(ds)?),
        EngineKind::Document => Box::new(DocumentEngine::load(ds, shards)?),
        EngineKind::Graph => Box::new(GraphEngine::load(ds)?),
    })
}

/// Runs the workload on every engine and compares each pair against the
/// first engine, plus document against graph.
pub fn verify_engines(ds: &Dataset, shards: usize, params: &QueryParams) -> Result<Vec<EquivalenceReport>, WorkloadError> {
    let mut results = Vec::new();
    for kind in EngineKind::ALL {
        let engine = load_engine(kind, ds, shards).map_err(|e| WorkloadError::Engine(kind, e))?;
        results.push(run_workload(engine.as_ref(), params)?);
    }
    Ok(vec![
        assert_equivalent(&results[0], &results[1]),
        assert_equivalent(&results[0], &results[2]),
        assert_equivalent(&results[1], &results[2]),
    ])
}

#[derive(Clone, Debug, Default)]
pub struct MatrixOutcome {
    pub samples: Vec<BenchSample>,
    /// Load and index build time per engine, kept out of query timings.
    pub load_ms: BTreeMap<EngineKind, f64>,
    pub hits: BTreeMap<EngineKind, Vec<SearchHit>>,
}

/// Times every configured (engine, query) cell. Engines are loaded one at a
/// time and dropped before the next, so memory readings do not overlap.
pub fn run_matrix(ds: &Dataset, config: &BenchConfig) -> Result<MatrixOutcome, BenchError> {
    config.validate()?;
    let mut out = MatrixOutcome::default();
    for &kind in &config.engines {
        let t0 = Instant::now();
        let engine = load_engine(kind, ds, config.shards).map_err(|e| WorkloadError::Engine(kind, e))?;
        out.load_ms.insert(kind, t0.elapsed().as_secs_f64() * 1e3);

        let q1 = QuerySpec { query_id: QueryId::Q1, params: config.params.clone() };
        let hits = run_query(engine.as_ref(), &q1, None)?.hits().unwrap_or_default().to_vec();
        for q in QueryId::ALL {
            let input = (q != QueryId::Q1).then_some(&hits[..]);
            out.samples.extend(time_query(engine.as_ref(), q, input, config)?);
        }
        out.hits.insert(kind, hits);
    }
    Ok(out)
}
