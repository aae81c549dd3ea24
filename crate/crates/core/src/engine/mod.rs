//! The common engine interface and its three implementations.
//!
//! Every engine answers the same four primitive questions; the workload
//! module composes them into Q1-Q5. Engines are built from a validated
//! [`Dataset`](crate::model::Dataset) and are immutable afterwards, so
//! concurrent readers need no locking.

pub mod document;
pub mod graph;
pub mod relational;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{BarRow, Day, DocId, EngineKind, SearchHit, Symbol};
use crate::text::{QueryTerms, TextError};

pub use document::DocumentEngine;
pub use graph::GraphEngine;
pub use relational::RelationalEngine;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("duplicate primary key {key} in table {table}")]
    DuplicateKey { table: &'static str, key: String },
    #[error("shard count must be at least 1")]
    InvalidShardCount,
    #[error("relationship endpoint {0} does not exist")]
    DanglingEndpoint(u32),
    #[error("relationship {rel} cannot connect {from} to {to}")]
    LabelMismatch { rel: &'static str, from: &'static str, to: &'static str },
    #[error("unknown node {0}")]
    UnknownNode(u32),
    #[error("corrupt stored document {0}: {1}")]
    CorruptDocument(DocId, String),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error("{0}")]
    Other(String),
}

/// How an engine ranks full-text matches. Engines sharing a scorer must
/// produce identical Q1 orderings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScorerFamily {
    Bm25,
    FrequencyRank,
}

pub trait Engine: Send + Sync {
    fn kind(&self) -> EngineKind;

    fn scorer(&self) -> ScorerFamily;

    /// Engines are only constructible by loading a dataset; wrappers that
    /// defer loading override this.
    fn is_loaded(&self) -> bool {
        true
    }

    /// Articles containing any of `terms`, top `k` articles (all when
    /// `None`), one hit per mentioned stock.
    fn fulltext(&self, terms: &QueryTerms, k: Option<usize>) -> Result<Vec<SearchHit>, EngineError>;

    /// Bars of each hit stock on `hit day + offset` for every offset.
    fn affected_bars(&self, hits: &[SearchHit], offsets: &[i32]) -> Result<Vec<BarRow>, EngineError>;

    /// Bars, on `anchor + offset`, of every stock not hit on the anchor day.
    /// Anchor days are the distinct days of `hits`.
    fn unaffected_bars(&self, hits: &[SearchHit], offsets: &[i32]) -> Result<Vec<BarRow>, EngineError>;

    /// Bars of the sector peers (excluding the stock itself) of each hit
    /// stock on the hit day.
    fn sector_peer_bars(&self, hits: &[SearchHit]) -> Result<Vec<BarRow>, EngineError>;
}

/// Stocks hit on each anchor day.
pub(crate) fn hit_stocks_by_day(hits: &[SearchHit]) -> BTreeMap<Day, BTreeSet<Symbol>> {
    let mut by_day: BTreeMap<Day, BTreeSet<Symbol>> = BTreeMap::new();
    for hit in hits {
        by_day.entry(hit.day()).or_default().insert(hit.symbol.clone());
    }
    by_day
}

/// Splitmix64 finalizer; stable across platforms and runs.
pub(crate) fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
