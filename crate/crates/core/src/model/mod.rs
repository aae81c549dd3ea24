//! Engine-independent domain types shared by the engines, the workload and
//! the benchmark harness.

mod order;
mod price;
mod time;
mod validate;

use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use order::{canonical_order, CanonicalOrder};
pub use price::Price;
pub use time::{Day, Timestamp};
pub use validate::{
    validate_dataset, Dataset, RawDataset, RecordKind, RejectReason, Rejection, Validated,
    ValidationReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid timestamp {0:?}")]
    InvalidTimestamp(String),
    #[error("invalid price {0:?}")]
    InvalidPrice(String),
    #[error("invalid symbol {0:?}")]
    InvalidSymbol(String),
    #[error("lexicon term {0:?} is not a single lowercase token")]
    InvalidLexiconTerm(String),
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("empty universe")]
    EmptyUniverse,
    #[error("unknown query id {0:?}")]
    UnknownQuery(String),
    #[error("unknown engine {0:?}")]
    UnknownEngine(String),
    #[error("bench sample violates invariants: {0}")]
    InvalidSample(&'static str),
}

/// Uppercase ticker. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    /// Wraps `s` without checking the ticker rules; see [`Symbol::parse`].
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn parse(s: &str) -> Result<Self, ModelError> {
        let sym = Symbol::new(s);
        if sym.is_well_formed() {
            Ok(sym)
        } else {
            Err(ModelError::InvalidSymbol(s.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Non-empty, uppercase ASCII letters and digits only.
    pub fn is_well_formed(&self) -> bool {
        !self.0.is_empty() && self.0.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
    }
}

impl Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(Symbol::new(&s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DocId(pub u32);

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sector {
    pub id: SectorId,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stock {
    pub symbol: Symbol,
    pub name: String,
    pub sector: SectorId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewsDoc {
    pub doc_id: DocId,
    pub media: String,
    pub timestamp: Timestamp,
    pub content: String,
    /// Sorted, no duplicates.
    pub mentions: Vec<Symbol>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OhlcBar {
    pub symbol: Symbol,
    pub timestamp: Timestamp,
    pub open: Price,
    pub high: Price,
    pub low: Price,
    pub close: Price,
    pub volume: u64,
}

impl OhlcBar {
    pub fn day(&self) -> Day {
        self.timestamp.day()
    }
}

/// Terms that make a news article ESG-relevant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EsgLexicon {
    terms: BTreeSet<String>,
}

impl EsgLexicon {
    pub const DEFAULT_TERMS: [&'static str; 9] = [
        "esg",
        "environmental",
        "social",
        "governance",
        "sustainability",
        "emission",
        "carbon",
        "biodiesel",
        "renewable",
    ];

    pub fn new<I, S>(terms: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for term in terms {
            let term = term.as_ref();
            let analyzed = crate::text::tokenize(term);
            if analyzed.len() != 1 || analyzed.tokens[0].text != term {
                return Err(ModelError::InvalidLexiconTerm(term.to_string()));
            }
            set.insert(term.to_string());
        }
        if set.is_empty() {
            return Err(ModelError::EmptyLexicon);
        }
        Ok(EsgLexicon { terms: set })
    }

    /// Comma or whitespace separated list.
    pub fn parse_list(s: &str) -> Result<Self, ModelError> {
        EsgLexicon::new(s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()))
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains(term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Default for EsgLexicon {
    fn default() -> Self {
        EsgLexicon::new(Self::DEFAULT_TERMS).expect("default lexicon is valid")
    }
}

/// One (news article, mentioned stock) match of the full-text query.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchHit {
    pub doc_id: DocId,
    pub symbol: Symbol,
    #[serde(serialize_with = "serialize_display")]
    pub date: Timestamp,
    pub media: String,
    pub score: f64,
}

impl SearchHit {
    pub fn day(&self) -> Day {
        self.date.day()
    }
}

fn serialize_display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Why a bar appears in a join result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RowTag {
    /// Stock mentioned by a hit.
    Affected,
    /// Stock not mentioned by any hit of the anchor day.
    Unaffected,
    /// Sector peer of a hit stock.
    Peer,
}

impl RowTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RowTag::Affected => "affected",
            RowTag::Unaffected => "unaffected",
            RowTag::Peer => "peer",
        }
    }
}

/// A bar row produced by Q2-Q5.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BarRow {
    pub tag: RowTag,
    /// Day of the news article the row hangs off.
    pub anchor: Day,
    /// Seed stock for sector-peer rows.
    pub via: Option<Symbol>,
    pub bar: OhlcBar,
}

impl BarRow {
    pub fn symbol(&self) -> &Symbol {
        &self.bar.symbol
    }

    /// Calendar days between the anchor day and the bar's day.
    pub fn offset(&self) -> i32 {
        self.bar.day().as_days() - self.anchor.as_days()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum QueryId {
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
}

impl QueryId {
    pub const ALL: [QueryId; 5] = [QueryId::Q1, QueryId::Q2, QueryId::Q3, QueryId::Q4, QueryId::Q5];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryId::Q1 => "Q1",
            QueryId::Q2 => "Q2",
            QueryId::Q3 => "Q3",
            QueryId::Q4 => "Q4",
            QueryId::Q5 => "Q5",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            QueryId::Q1 => "news articles matching the ESG lexicon, per mentioned stock",
            QueryId::Q2 => "bars of the hit stocks on the article day",
            QueryId::Q3 => "bars of the stocks not hit on the article day",
            QueryId::Q4 => "Q2 and Q3 over the following days",
            QueryId::Q5 => "bars of sector peers of the hit stocks on the article day",
        }
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Q1" => Ok(QueryId::Q1),
            "Q2" => Ok(QueryId::Q2),
            "Q3" => Ok(QueryId::Q3),
            "Q4" => Ok(QueryId::Q4),
            "Q5" => Ok(QueryId::Q5),
            _ => Err(ModelError::UnknownQuery(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rows {
    Hits(Vec<SearchHit>),
    Bars(Vec<BarRow>),
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Rows::Hits(h) => h.len(),
            Rows::Bars(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultSet {
    pub query: QueryId,
    pub rows: Rows,
}

impl ResultSet {
    pub fn hits(&self) -> Option<&[SearchHit]> {
        match &self.rows {
            Rows::Hits(h) => Some(h),
            Rows::Bars(_) => None,
        }
    }

    pub fn bars(&self) -> Option<&[BarRow]> {
        match &self.rows {
            Rows::Bars(b) => Some(b),
            Rows::Hits(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EngineKind {
    Relational,
    Document,
    Graph,
}

impl EngineKind {
    pub const ALL: [EngineKind; 3] = [EngineKind::Relational, EngineKind::Document, EngineKind::Graph];

    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Relational => "relational",
            EngineKind::Document => "document",
            EngineKind::Graph => "graph",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relational" | "rel" => Ok(EngineKind::Relational),
            "document" | "doc" => Ok(EngineKind::Document),
            "graph" => Ok(EngineKind::Graph),
            _ => Err(ModelError::UnknownEngine(s.to_string())),
        }
    }
}

/// One measured execution of one query on one engine.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchSample {
    pub engine: EngineKind,
    pub query: QueryId,
    pub wall_ms: f64,
    pub cpu_max_pct: f64,
    pub cpu_avg_pct: f64,
    pub peak_mem_mb: f64,
}

impl BenchSample {
    pub fn new(
        engine: EngineKind,
        query: QueryId,
        wall_ms: f64,
        cpu_max_pct: f64,
        cpu_avg_pct: f64,
        peak_mem_mb: f64,
    ) -> Result<Self, ModelError> {
        if wall_ms.is_nan() || wall_ms <= 0.0 {
            return Err(ModelError::InvalidSample("wall_ms must be positive"));
        }
        let pct = 0.0..=100.0;
        if !pct.contains(&cpu_max_pct) || !pct.contains(&cpu_avg_pct) {
            return Err(ModelError::InvalidSample("cpu percentage outside [0, 100]"));
        }
        if cpu_avg_pct > cpu_max_pct {
            return Err(ModelError::InvalidSample("cpu average exceeds maximum"));
        }
        if peak_mem_mb.is_nan() || peak_mem_mb < 0.0 {
            return Err(ModelError::InvalidSample("negative memory"));
        }
        Ok(BenchSample { engine, query, wall_ms, cpu_max_pct, cpu_avg_pct, peak_mem_mb })
    }
}
