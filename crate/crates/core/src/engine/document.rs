//! Document-store engine.
//!
//! News, bars and stocks live in separate collections of JSON source
//! documents, hash-partitioned over shards. Full-text search runs in two
//! phases: every shard scores its own documents with collection-wide
//! statistics (scatter), then the per-shard lists are merged and truncated
//! (gather) before the winning sources are fetched and decoded. There is no
//! server-side join: relating news to bars is a client loop that issues one
//! bar filter query per hit.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use serde_json::{Map, Value};

use super::{hit_stocks_by_day, mix64, Engine, EngineError, ScorerFamily};
use crate::model::{
    canonical_order, BarRow, Dataset, Day, DocId, EngineKind, OhlcBar, Price, RowTag, SearchHit,
    Symbol, Timestamp,
};
use crate::text::{rank_cmp, search_with, Bm25Params, GlobalStats, InvertedIndex, QueryTerms};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldType {
    /// Analyzed full text.
    Text,
    /// Exact-match string.
    Keyword,
    /// Array of exact-match strings.
    Keywords,
    Integer,
    /// Fixed-point decimal, stored as a string to stay exact.
    Decimal,
    Date,
}

pub type Schema = &'static [(&'static str, FieldType)];

pub const NEWS_SCHEMA: Schema = &[
    ("media", FieldType::Keyword),
    ("date", FieldType::Date),
    ("content", FieldType::Text),
    ("mentions", FieldType::Keywords),
];

pub const BAR_SCHEMA: Schema = &[
    ("symbol", FieldType::Keyword),
    ("timestamp", FieldType::Date),
    ("open", FieldType::Decimal),
    ("high", FieldType::Decimal),
    ("low", FieldType::Decimal),
    ("close", FieldType::Decimal),
    ("volume", FieldType::Integer),
];

pub const STOCK_SCHEMA: Schema = &[
    ("symbol", FieldType::Keyword),
    ("name", FieldType::Text),
    ("sector", FieldType::Keyword),
];

#[derive(Clone, Debug, PartialEq)]
pub enum FieldValue {
    Str(String),
    List(Vec<String>),
    Integer(i64),
    Decimal(Price),
    Date(Timestamp),
}

/// The dictionary form of one record.
#[derive(Clone, Debug, PartialEq)]
pub struct DocRecord {
    pub doc_id: DocId,
    pub fields: BTreeMap<&'static str, FieldValue>,
}

impl DocRecord {
    pub fn new(doc_id: DocId) -> Self {
        DocRecord { doc_id, fields: BTreeMap::new() }
    }

    /// Fails unless `name` belongs to `schema` with a matching type.
    pub fn set(&mut self, schema: Schema, name: &str, value: FieldValue) -> Result<(), EngineError> {
        let (field, ty) = schema
            .iter()
            .find(|(f, _)| *f == name)
            .ok_or_else(|| EngineError::Other(format!("field {name:?} not in schema")))?;
        let ok = matches!(
            (ty, &value),
            (FieldType::Text | FieldType::Keyword, FieldValue::Str(_))
                | (FieldType::Keywords, FieldValue::List(_))
                | (FieldType::Integer, FieldValue::Integer(_))
                | (FieldType::Decimal, FieldValue::Decimal(_))
                | (FieldType::Date, FieldValue::Date(_))
        );
        if !ok {
            return Err(EngineError::Other(format!("field {name:?} has the wrong type")));
        }
        self.fields.insert(field, value);
        Ok(())
    }

    pub fn str(&self, name: &str) -> Option<&str> {
        match self.fields.get(name) {
            Some(FieldValue::Str(s)) => Some(s),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut map = Map::new();
        for (name, value) in &self.fields {
            let v = match value {
                FieldValue::Str(s) => Value::String(s.clone()),
                FieldValue::List(l) => Value::Array(l.iter().cloned().map(Value::String).collect()),
                FieldValue::Integer(i) => Value::from(*i),
                FieldValue::Decimal(p) => Value::String(p.to_string()),
                FieldValue::Date(t) => Value::String(t.to_string()),
            };
            map.insert((*name).to_string(), v);
        }
        Value::Object(map).to_string()
    }

    pub fn from_json(doc_id: DocId, json: &str, schema: Schema) -> Result<Self, EngineError> {
        let corrupt = |msg: String| EngineError::CorruptDocument(doc_id, msg);
        let map: Map<String, Value> = serde_json::from_str(json).map_err(|e| corrupt(e.to_string()))?;
        let mut record = DocRecord::new(doc_id);
        for (name, value) in map {
            let (field, ty) = schema
                .iter()
                .find(|(f, _)| *f == name)
                .ok_or_else(|| corrupt(format!("unknown field {name:?}")))?;
            let bad = || corrupt(format!("field {name:?} has the wrong type"));
            let parsed = match (ty, value) {
                (FieldType::Text | FieldType::Keyword, Value::String(s)) => FieldValue::Str(s),
                (FieldType::Keywords, Value::Array(items)) => FieldValue::List(
                    items
                        .into_iter()
                        .map(|v| match v {
                            Value::String(s) => Ok(s),
                            _ => Err(bad()),
                        })
                        .collect::<Result<_, _>>()?,
                ),
                (FieldType::Integer, Value::Number(n)) => FieldValue::Integer(n.as_i64().ok_or_else(bad)?),
                (FieldType::Decimal, Value::String(s)) => {
                    FieldValue::Decimal(Price::parse(&s).map_err(|e| corrupt(e.to_string()))?)
                }
                (FieldType::Date, Value::String(s)) => {
                    FieldValue::Date(Timestamp::parse(&s).map_err(|e| corrupt(e.to_string()))?)
                }
                _ => return Err(bad()),
            };
            record.fields.insert(field, parsed);
        }
        Ok(record)
    }

    fn require(&self, name: &str) -> Result<&FieldValue, EngineError> {
        self.fields
            .get(name)
            .ok_or_else(|| EngineError::CorruptDocument(self.doc_id, format!("missing field {name:?}")))
    }

    fn require_str(&self, name: &str) -> Result<&str, EngineError> {
        match self.require(name)? {
            FieldValue::Str(s) => Ok(s),
            _ => Err(EngineError::CorruptDocument(self.doc_id, format!("field {name:?} is not a string"))),
        }
    }

    fn require_date(&self, name: &str) -> Result<Timestamp, EngineError> {
        match self.require(name)? {
            FieldValue::Date(t) => Ok(*t),
            _ => Err(EngineError::CorruptDocument(self.doc_id, format!("field {name:?} is not a date"))),
        }
    }

    fn require_price(&self, name: &str) -> Result<Price, EngineError> {
        match self.require(name)? {
            FieldValue::Decimal(p) => Ok(*p),
            _ => Err(EngineError::CorruptDocument(self.doc_id, format!("field {name:?} is not a decimal"))),
        }
    }
}

/// One partition of a collection.
#[derive(Debug, Default)]
pub struct Shard {
    pub shard_id: usize,
    ids: Vec<DocId>,
    sources: Vec<String>,
    ordinals: HashMap<DocId, u32>,
    /// Full-text index over the collection's text field, if it has one.
    text: InvertedIndex,
    /// keyword field -> value -> ordinals
    keywords: HashMap<&'static str, HashMap<String, Vec<u32>>>,
    /// Doc values of the collection's date field, by ordinal.
    dates: Vec<i64>,
}

impl Shard {
    fn add(&mut self, record: &DocRecord, schema: Schema) -> Result<(), EngineError> {
        let ord = self.ids.len() as u32;
        for (name, ty) in schema {
            match (ty, record.fields.get(name)) {
                (FieldType::Text, Some(FieldValue::Str(s))) if *name == "content" => {
                    self.text.insert(record.doc_id, s)?;
                }
                (FieldType::Keyword, Some(FieldValue::Str(s))) => {
                    self.keywords.entry(name).or_default().entry(s.clone()).or_default().push(ord);
                }
                (FieldType::Keywords, Some(FieldValue::List(items))) => {
                    for s in items {
                        self.keywords.entry(name).or_default().entry(s.clone()).or_default().push(ord);
                    }
                }
                (FieldType::Date, Some(FieldValue::Date(t))) => self.dates.push(t.as_micros()),
                _ => {}
            }
        }
        self.ordinals.insert(record.doc_id, ord);
        self.ids.push(record.doc_id);
        self.sources.push(record.to_json());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn fetch(&self, ord: u32, schema: Schema) -> Result<DocRecord, EngineError> {
        let doc_id = self.ids[ord as usize];
        DocRecord::from_json(doc_id, &self.sources[ord as usize], schema)
    }

    fn fetch_id(&self, doc_id: DocId, schema: Schema) -> Result<DocRecord, EngineError> {
        let ord = *self
            .ordinals
            .get(&doc_id)
            .ok_or_else(|| EngineError::CorruptDocument(doc_id, "not in shard".into()))?;
        self.fetch(ord, schema)
    }

    fn keyword(&self, field: &str, value: &str) -> &[u32] {
        self.keywords
            .get(field)
            .and_then(|m| m.get(value))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

#[derive(Debug)]
pub struct Collection {
    pub name: &'static str,
    schema: Schema,
    shards: Vec<Shard>,
}

impl Collection {
    fn new(name: &'static str, schema: Schema, shard_count: usize) -> Self {
        let shards = (0..shard_count).map(|shard_id| Shard { shard_id, ..Shard::default() }).collect();
        Collection { name, schema, shards }
    }

    fn shard_of(&self, doc_id: DocId) -> usize {
        (mix64(u64::from(doc_id.0)) % self.shards.len() as u64) as usize
    }

    fn index(&mut self, record: DocRecord) -> Result<(), EngineError> {
        let s = self.shard_of(record.doc_id);
        self.shards[s].add(&record, self.schema)
    }

    pub fn shards(&self) -> &[Shard] {
        &self.shards
    }

    pub fn shard_sizes(&self) -> Vec<usize> {
        self.shards.iter().map(Shard::len).collect()
    }

    pub fn len(&self) -> usize {
        self.shards.iter().map(Shard::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every document of the collection (a `match_all` query).
    fn match_all(&self) -> Result<Vec<DocRecord>, EngineError> {
        let mut out = Vec::with_capacity(self.len());
        for shard in &self.shards {
            for ord in 0..shard.len() as u32 {
                out.push(shard.fetch(ord, self.schema)?);
            }
        }
        out.sort_by_key(|r| r.doc_id);
        Ok(out)
    }
}

/// A `symbol` term filter combined with an inclusive day range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarFilter {
    pub symbol: Symbol,
    pub from: Day,
    pub to: Day,
}

/// Physical queries issued while answering one logical query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SubQueryStats {
    pub bar_queries: usize,
    pub stock_scans: usize,
}

#[derive(Debug)]
pub struct DocumentEngine {
    news: Collection,
    bars: Collection,
    stocks: Collection,
    news_stats: GlobalStats,
    params: Bm25Params,
}

impl DocumentEngine {
    pub const DEFAULT_SHARDS: usize = 1;

    pub fn load(dataset: &Dataset, shard_count: usize) -> Result<Self, EngineError> {
        Self::load_with(dataset, shard_count, Bm25Params::default())
    }

    pub fn load_with(dataset: &Dataset, shard_count: usize, params: Bm25Params) -> Result<Self, EngineError> {
        if shard_count < 1 {
            return Err(EngineError::InvalidShardCount);
        }
        let mut news = Collection::new("news", NEWS_SCHEMA, shard_count);
        for doc in dataset.news() {
            let mut r = DocRecord::new(doc.doc_id);
            r.set(NEWS_SCHEMA, "media", FieldValue::Str(doc.media.clone()))?;
            r.set(NEWS_SCHEMA, "date", FieldValue::Date(doc.timestamp))?;
            r.set(NEWS_SCHEMA, "content", FieldValue::Str(doc.content.clone()))?;
            let mentions = doc.mentions.iter().map(|s| s.to_string()).collect();
            r.set(NEWS_SCHEMA, "mentions", FieldValue::List(mentions))?;
            news.index(r)?;
        }
        let mut bars = Collection::new("bars", BAR_SCHEMA, shard_count);
        for (i, bar) in dataset.bars().iter().enumerate() {
            bars.index(bar_record(DocId(i as u32), bar)?)?;
        }
        let mut stocks = Collection::new("stocks", STOCK_SCHEMA, shard_count);
        for (i, stock) in dataset.stocks().iter().enumerate() {
            let sector = dataset.sector(stock.sector).map(|s| s.name.clone()).unwrap_or_default();
            let mut r = DocRecord::new(DocId(i as u32));
            r.set(STOCK_SCHEMA, "symbol", FieldValue::Str(stock.symbol.to_string()))?;
            r.set(STOCK_SCHEMA, "name", FieldValue::Str(stock.name.clone()))?;
            r.set(STOCK_SCHEMA, "sector", FieldValue::Str(sector))?;
            stocks.index(r)?;
        }
        let news_stats = GlobalStats::aggregate(news.shards.iter().map(|s| &s.text));
        Ok(DocumentEngine { news, bars, stocks, news_stats, params })
    }

    pub fn shard_count(&self) -> usize {
        self.news.shards.len()
    }

    pub fn news(&self) -> &Collection {
        &self.news
    }

    pub fn bars(&self) -> &Collection {
        &self.bars
    }

    pub fn global_stats(&self) -> &GlobalStats {
        &self.news_stats
    }

    /// Scatter/gather full-text search followed by the fetch phase.
    pub fn doc_search(&self, terms: &QueryTerms, k: Option<usize>) -> Result<Vec<SearchHit>, EngineError> {
        let per_shard: Vec<Vec<(DocId, f64)>> = self
            .news
            .shards
            .iter()
            .map(|shard| search_with(&shard.text, &self.news_stats, terms, k, self.params))
            .collect();
        let top = gather(&per_shard, k);

        let mut hits = Vec::new();
        for (doc_id, score) in top {
            let shard = &self.news.shards[self.news.shard_of(doc_id)];
            let source = shard.fetch_id(doc_id, NEWS_SCHEMA)?;
            let media = source.require_str("media")?;
            let date = source.require_date("date")?;
            if let FieldValue::List(mentions) = source.require("mentions")? {
                for symbol in mentions {
                    hits.push(SearchHit {
                        doc_id,
                        symbol: Symbol::new(symbol),
                        date,
                        media: media.to_string(),
                        score,
                    });
                }
            }
        }
        Ok(canonical_order(hits))
    }

    /// One bar filter query, scattered over every shard of `bars`.
    pub fn bar_query(&self, filter: &BarFilter) -> Result<Vec<OhlcBar>, EngineError> {
        let from = filter.from.start().as_micros();
        let to = filter.to.offset(1).start().as_micros();
        let mut out = Vec::new();
        for shard in &self.bars.shards {
            for &ord in shard.keyword("symbol", filter.symbol.as_str()) {
                let ts = shard.dates[ord as usize];
                if ts >= from && ts < to {
                    out.push(decode_bar(&shard.fetch(ord, BAR_SCHEMA)?)?);
                }
            }
        }
        Ok(out)
    }

    /// Client-side join: one bar query per hit covering the offset window.
    pub fn doc_app_join(&self, hits: &[SearchHit], offsets: &[i32]) -> Result<(Vec<BarRow>, SubQueryStats), EngineError> {
        let mut stats = SubQueryStats::default();
        let mut rows = Vec::new();
        let Some((lo, hi)) = offset_window(offsets) else { return Ok((rows, stats)) };
        for hit in hits {
            let anchor = hit.day();
            let filter = BarFilter { symbol: hit.symbol.clone(), from: anchor.offset(lo), to: anchor.offset(hi) };
            stats.bar_queries += 1;
            for bar in self.bar_query(&filter)? {
                if offsets.contains(&(bar.day().as_days() - anchor.as_days())) {
                    rows.push(BarRow { tag: RowTag::Affected, anchor, via: None, bar });
                }
            }
        }
        Ok((rows, stats))
    }

    /// Universe scan minus each anchor day's hit stocks, then one bar query
    /// per remaining stock and anchor day.
    pub fn doc_complement(&self, hits: &[SearchHit], offsets: &[i32]) -> Result<(Vec<BarRow>, SubQueryStats), EngineError> {
        let mut stats = SubQueryStats::default();
        let mut rows = Vec::new();
        let by_day = hit_stocks_by_day(hits);
        let Some((lo, hi)) = offset_window(offsets) else { return Ok((rows, stats)) };
        if by_day.is_empty() {
            return Ok((rows, stats));
        }
        stats.stock_scans += 1;
        let universe = self.stocks.match_all()?;
        for (&anchor, hit_stocks) in &by_day {
            for stock in &universe {
                let symbol = stock.require_str("symbol")?;
                if hit_stocks.contains(symbol) {
                    continue;
                }
                let filter = BarFilter { symbol: Symbol::new(symbol), from: anchor.offset(lo), to: anchor.offset(hi) };
                stats.bar_queries += 1;
                for bar in self.bar_query(&filter)? {
                    if offsets.contains(&(bar.day().as_days() - anchor.as_days())) {
                        rows.push(BarRow { tag: RowTag::Unaffected, anchor, via: None, bar });
                    }
                }
            }
        }
        Ok((rows, stats))
    }

    /// Sector lookup table built from the stocks collection, then one bar
    /// query per (hit, peer).
    pub fn doc_sector_peers(&self, hits: &[SearchHit]) -> Result<(Vec<BarRow>, SubQueryStats), EngineError> {
        let mut stats = SubQueryStats::default();
        let mut rows = Vec::new();
        if hits.is_empty() {
            return Ok((rows, stats));
        }
        stats.stock_scans += 1;
        let mut sector_of: HashMap<String, String> = HashMap::new();
        let mut members: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for stock in self.stocks.match_all()? {
            let symbol = stock.require_str("symbol")?.to_string();
            let sector = stock.require_str("sector")?.to_string();
            members.entry(sector.clone()).or_default().push(symbol.clone());
            sector_of.insert(symbol, sector);
        }
        for hit in hits {
            let Some(sector) = sector_of.get(hit.symbol.as_str()) else { continue };
            let anchor = hit.day();
            for peer in &members[sector] {
                if peer == hit.symbol.as_str() {
                    continue;
                }
                let filter = BarFilter { symbol: Symbol::new(peer), from: anchor, to: anchor };
                stats.bar_queries += 1;
                for bar in self.bar_query(&filter)? {
                    rows.push(BarRow { tag: RowTag::Peer, anchor, via: Some(hit.symbol.clone()), bar });
                }
            }
        }
        Ok((rows, stats))
    }
}

fn bar_record(doc_id: DocId, bar: &OhlcBar) -> Result<DocRecord, EngineError> {
    let mut r = DocRecord::new(doc_id);
    r.set(BAR_SCHEMA, "symbol", FieldValue::Str(bar.symbol.to_string()))?;
    r.set(BAR_SCHEMA, "timestamp", FieldValue::Date(bar.timestamp))?;
    r.set(BAR_SCHEMA, "open", FieldValue::Decimal(bar.open))?;
    r.set(BAR_SCHEMA, "high", FieldValue::Decimal(bar.high))?;
    r.set(BAR_SCHEMA, "low", FieldValue::Decimal(bar.low))?;
    r.set(BAR_SCHEMA, "close", FieldValue::Decimal(bar.close))?;
    r.set(BAR_SCHEMA, "volume", FieldValue::Integer(bar.volume as i64))?;
    Ok(r)
}

fn decode_bar(r: &DocRecord) -> Result<OhlcBar, EngineError> {
    let volume = match r.require("volume")? {
        FieldValue::Integer(v) if *v >= 0 => *v as u64,
        _ => return Err(EngineError::CorruptDocument(r.doc_id, "bad volume".into())),
    };
    Ok(OhlcBar {
        symbol: Symbol::new(r.require_str("symbol")?),
        timestamp: r.require_date("timestamp")?,
        open: r.require_price("open")?,
        high: r.require_price("high")?,
        low: r.require_price("low")?,
        close: r.require_price("close")?,
        volume,
    })
}

fn offset_window(offsets: &[i32]) -> Option<(i32, i32)> {
    Some((*offsets.iter().min()?, *offsets.iter().max()?))
}

struct Head {
    item: (DocId, f64),
    shard: usize,
    next: usize,
}

impl PartialEq for Head {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Head {}

impl PartialOrd for Head {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Head {
    // BinaryHeap is a max-heap; the best-ranked item must compare greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        rank_cmp(&other.item, &self.item)
    }
}

/// K-way merge of per-shard ranked lists, truncated to `k`.
fn gather(per_shard: &[Vec<(DocId, f64)>], k: Option<usize>) -> Vec<(DocId, f64)> {
    let limit = k.unwrap_or(usize::MAX);
    let mut heap = BinaryHeap::new();
    for (shard, list) in per_shard.iter().enumerate() {
        if let Some(&item) = list.first() {
            heap.push(Head { item, shard, next: 1 });
        }
    }
    let mut out = Vec::new();
    while out.len() < limit {
        let Some(head) = heap.pop() else { break };
        out.push(head.item);
        if let Some(&item) = per_shard[head.shard].get(head.next) {
            heap.push(Head { item, shard: head.shard, next: head.next + 1 });
        }
    }
    out
}

impl Engine for DocumentEngine {
    fn kind(&self) -> EngineKind {
        EngineKind::Document
    }

    fn scorer(&self) -> ScorerFamily {
        ScorerFamily::Bm25
    }

    fn fulltext(&self, terms: &QueryTerms, k: Option<usize>) -> Result<Vec<SearchHit>, EngineError> {
        self.doc_search(terms, k)
    }

    fn affected_bars(&self, hits: &[SearchHit], offsets: &[i32]) -> Result<Vec<BarRow>, EngineError> {
        Ok(self.doc_app_join(hits, offsets)?.0)
    }

    fn unaffected_bars(&self, hits: &[SearchHit], offsets: &[i32]) -> Result<Vec<BarRow>, EngineError> {
        Ok(self.doc_complement(hits, offsets)?.0)
    }

    fn sector_peer_bars(&self, hits: &[SearchHit]) -> Result<Vec<BarRow>, EngineError> {
        Ok(self.doc_sector_peers(hits)?.0)
    }
}
