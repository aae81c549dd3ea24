//! The five benchmark queries, composed from the engine primitives, and
//! the cross-engine equivalence check.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Engine, EngineError, ScorerFamily};
use crate::model::{
    canonical_order, BarRow, EngineKind, EsgLexicon, QueryId, ResultSet, Rows, SearchHit,
};
use crate::text::QueryTerms;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("{0} engine is not loaded")]
    NotLoaded(EngineKind),
    #[error("{0} engine failed: {1}")]
    Engine(EngineKind, EngineError),
    #[error("{0} needs the Q1 hits")]
    MissingHits(QueryId),
    #[error("invalid query config: {0}")]
    Config(String),
}

/// Parameters shared by all five queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryParams {
    pub lexicon: EsgLexicon,
    /// Q1 top-k over articles; `None` keeps every match.
    pub k: Option<usize>,
    /// Q4 looks at days `1..=horizon_days` after each article.
    pub horizon_days: u32,
}

impl Default for QueryParams {
    fn default() -> Self {
        QueryParams { lexicon: EsgLexicon::default(), k: Some(10), horizon_days: 5 }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    lexicon: Vec<String>,
    k: KValue,
    horizon_days: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum KValue {
    Count(u64),
    Word(String),
}

impl QueryParams {
    pub fn with_k(mut self, k: Option<usize>) -> Self {
        self.k = k;
        self
    }

    pub fn terms(&self) -> QueryTerms {
        QueryTerms::from_lexicon(&self.lexicon)
    }

    /// Q4 offsets: the horizon, never the article day itself.
    pub fn horizon_offsets(&self) -> Vec<i32> {
        (1..=self.horizon_days as i32).collect()
    }

    /// Key-value config form; `k = "all"` stands for no limit.
    pub fn to_toml(&self) -> String {
        let file = ParamsFile {
            lexicon: self.lexicon.terms().map(str::to_string).collect(),
            k: match self.k {
                Some(k) => KValue::Count(k as u64),
                None => KValue::Word("all".into()),
            },
            horizon_days: self.horizon_days,
        };
        toml::to_string(&file).expect("params serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self, WorkloadError> {
        let file: ParamsFile = toml::from_str(text).map_err(|e| WorkloadError::Config(e.to_string()))?;
        let lexicon = EsgLexicon::new(&file.lexicon).map_err(|e| WorkloadError::Config(e.to_string()))?;
        let k = match file.k {
            KValue::Count(n) => Some(n as usize),
            KValue::Word(w) if w == "all" => None,
            KValue::Word(w) => return Err(WorkloadError::Config(format!("k must be an integer or \"all\", got {w:?}"))),
        };
        Ok(QueryParams { lexicon, k, horizon_days: file.horizon_days })
    }

    pub fn load(path: &Path) -> Result<Self, WorkloadError> {
        let text = std::fs::read_to_string(path).map_err(|e| WorkloadError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySpec {
    pub query_id: QueryId,
    pub params: QueryParams,
}

/// Runs one query. Q2-Q5 take the Q1 hits as input and fail without them.
pub fn run_query(
    engine: &dyn Engine,
    spec: &QuerySpec,
    hits: Option<&[SearchHit]>,
) -> Result<ResultSet, WorkloadError> {
    let kind = engine.kind();
    if !engine.is_loaded() {
        return Err(WorkloadError::NotLoaded(kind));
    }
    let err = |e| WorkloadError::Engine(kind, e);
    let q = spec.query_id;
    let need = || hits.ok_or(WorkloadError::MissingHits(q));
    let rows = match q {
        QueryId::Q1 => Rows::Hits(canonical_order(engine.fulltext(&spec.params.terms(), spec.params.k).map_err(err)?)),
        QueryId::Q2 => Rows::Bars(engine.affected_bars(need()?, &[0]).map_err(err)?),
        QueryId::Q3 => Rows::Bars(engine.unaffected_bars(need()?, &[0]).map_err(err)?),
        QueryId::Q4 => {
            let offsets = spec.params.horizon_offsets();
            let mut rows = engine.affected_bars(need()?, &offsets).map_err(err)?;
            rows.extend(engine.unaffected_bars(need()?, &offsets).map_err(err)?);
            Rows::Bars(rows)
        }
        QueryId::Q5 => Rows::Bars(engine.sector_peer_bars(need()?).map_err(err)?),
    };
    Ok(ResultSet { query: q, rows: finish(rows) })
}

/// Canonical order, and no duplicate bar rows.
fn finish(rows: Rows) -> Rows {
    match rows {
        Rows::Hits(h) => Rows::Hits(h),
        Rows::Bars(b) => {
            let mut b = canonical_order(b);
            b.dedup();
            Rows::Bars(b)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadResults {
    pub engine: EngineKind,
    pub scorer: ScorerFamily,
    pub results: BTreeMap<QueryId, ResultSet>,
}

impl WorkloadResults {
    pub fn get(&self, q: QueryId) -> Option<&ResultSet> {
        self.results.get(&q)
    }

    pub fn hits(&self) -> &[SearchHit] {
        self.get(QueryId::Q1).and_then(ResultSet::hits).unwrap_or(&[])
    }

    pub fn bars(&self, q: QueryId) -> &[BarRow] {
        self.get(q).and_then(ResultSet::bars).unwrap_or(&[])
    }
}

/// Q1, then Q2-Q5 over its hits.
pub fn run_workload(engine: &dyn Engine, params: &QueryParams) -> Result<WorkloadResults, WorkloadError> {
    let mut results = BTreeMap::new();
    let spec = |query_id| QuerySpec { query_id, params: params.clone() };
    let q1 = run_query(engine, &spec(QueryId::Q1), None)?;
    let hits = q1.hits().unwrap_or(&[]).to_vec();
    results.insert(QueryId::Q1, q1);
    for q in &QueryId::ALL[1..] {
        results.insert(*q, run_query(engine, &spec(*q), Some(&hits))?);
    }
    Ok(WorkloadResults { engine: engine.kind(), scorer: engine.scorer(), results })
}

/// The first point where two engines disagree on one query.
#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub query: QueryId,
    pub index: usize,
    pub left: Option<String>,
    pub right: Option<String>,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |r: &Option<String>| r.clone().unwrap_or_else(|| "<missing>".into());
        write!(f, "{} row {}: {} vs {}", self.query, self.index, show(&self.left), show(&self.right))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub left: EngineKind,
    pub right: EngineKind,
    /// Whether Q1 was compared in order (shared scorer) or as a set.
    pub q1_ordered: bool,
    pub divergences: Vec<Divergence>,
}

impl EquivalenceReport {
    pub fn is_equivalent(&self) -> bool {
        self.divergences.is_empty()
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_equivalent() {
            return write!(f, "{} vs {}: equivalent", self.left, self.right);
        }
        write!(f, "{} vs {}: {} divergent queries", self.left, self.right, self.divergences.len())?;
        for d in &self.divergences {
            write!(f, "\n  {d}")?;
        }
        Ok(())
    }
}

fn hit_key(h: &SearchHit) -> String {
    format!("{} {} {}", h.symbol, h.date, h.media)
}

fn bar_key(r: &BarRow) -> String {
    let via = r.via.as_ref().map(|v| format!(" via {v}")).unwrap_or_default();
    format!(
        "{} {} {} anchor {}{} o={} h={} l={} c={} v={}",
        r.tag.as_str(),
        r.bar.symbol,
        r.bar.timestamp,
        r.anchor,
        via,
        r.bar.open,
        r.bar.high,
        r.bar.low,
        r.bar.close,
        r.bar.volume
    )
}

fn first_difference(query: QueryId, a: &[String], b: &[String]) -> Option<Divergence> {
    let n = a.len().max(b.len());
    (0..n).find(|&i| a.get(i) != b.get(i)).map(|index| Divergence {
        query,
        index,
        left: a.get(index).cloned(),
        right: b.get(index).cloned(),
    })
}

/// Q1 as ordered (stock, date, media) triples when both engines share a
/// scorer, as sorted sets otherwise; Q2-Q5 as exact ordered row lists.
pub fn assert_equivalent(a: &WorkloadResults, b: &WorkloadResults) -> EquivalenceReport {
    let q1_ordered = a.scorer == b.scorer;
    let mut divergences = Vec::new();
    let mut ka: Vec<String> = a.hits().iter().map(hit_key).collect();
    let mut kb: Vec<String> = b.hits().iter().map(hit_key).collect();
    if !q1_ordered {
        for keys in [&mut ka, &mut kb] {
            keys.sort();
            keys.dedup();
        }
    }
    divergences.extend(first_difference(QueryId::Q1, &ka, &kb));
    for q in &QueryId::ALL[1..] {
        let ra: Vec<String> = a.bars(*q).iter().map(bar_key).collect();
        let rb: Vec<String> = b.bars(*q).iter().map(bar_key).collect();
        divergences.extend(first_difference(*q, &ra, &rb));
    }
    EquivalenceReport { left: a.engine, right: b.engine, q1_ordered, divergences }
}
