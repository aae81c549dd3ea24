//! Row-store engine: heap tables, a token-vector column on `news`, full
//! scans and hash joins.

use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;

use super::{hit_stocks_by_day, Engine, EngineError, ScorerFamily};
use crate::model::{
    canonical_order, BarRow, Dataset, Day, DocId, EngineKind, OhlcBar, RowTag, SearchHit, SectorId,
    Symbol, Timestamp,
};
use crate::text::{top_k, tsrank_score, QueryTerms, TokenVector};

/// Append-only heap table with an optional unique hash index on its key.
#[derive(Debug)]
pub struct Table<R, K> {
    name: &'static str,
    rows: Vec<R>,
    pk: HashMap<K, usize>,
}

impl<R, K: Hash + Eq + ToString> Table<R, K> {
    fn new(name: &'static str) -> Self {
        Table { name, rows: Vec::new(), pk: HashMap::new() }
    }

    fn insert(&mut self, key: K, row: R) -> Result<(), EngineError> {
        if self.pk.contains_key(&key) {
            return Err(EngineError::DuplicateKey { table: self.name, key: key.to_string() });
        }
        self.pk.insert(key, self.rows.len());
        self.rows.push(row);
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[R] {
        &self.rows
    }

    pub fn get<Q>(&self, key: &Q) -> Option<&R>
    where
        K: std::borrow::Borrow<Q>,
        Q: Hash + Eq + ?Sized,
    {
        self.pk.get(key).map(|&i| &self.rows[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorRow {
    pub sector_id: SectorId,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StockRow {
    pub symbol: Symbol,
    pub name: String,
    pub sector_id: SectorId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewsRow {
    pub doc_id: DocId,
    pub media: String,
    pub date: Timestamp,
    pub content: String,
    pub tsv: TokenVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MentionRow {
    pub doc_id: DocId,
    pub symbol: Symbol,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct MentionKey(DocId, usize);

impl std::fmt::Display for MentionKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}#{}", self.0, self.1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct BarKey(Symbol, Timestamp);

impl std::fmt::Display for BarKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct SectorKey(SectorId);

impl std::fmt::Display for SectorKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0 .0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowCounts {
    pub sectors: usize,
    pub stocks: usize,
    pub news: usize,
    pub news_mentions: usize,
    pub bars: usize,
}

#[derive(Debug)]
pub struct RelationalEngine {
    sectors: Table<SectorRow, SectorKey>,
    stocks: Table<StockRow, Symbol>,
    news: Table<NewsRow, DocId>,
    news_mentions: Table<MentionRow, MentionKey>,
    /// Secondary (non-unique) index `news_mentions(doc_id)`.
    mentions_by_doc: HashMap<DocId, Vec<usize>>,
    bars: Table<OhlcBar, BarKey>,
}

impl RelationalEngine {
    /// Inserts every record; the token-vector column is computed on insert.
    pub fn load(dataset: &Dataset) -> Result<Self, EngineError> {
        let mut engine = RelationalEngine {
            sectors: Table::new("sectors"),
            stocks: Table::new("stocks"),
            news: Table::new("news"),
            news_mentions: Table::new("news_mentions"),
            mentions_by_doc: HashMap::new(),
            bars: Table::new("bars"),
        };
        for s in dataset.sectors() {
            engine
                .sectors
                .insert(SectorKey(s.id), SectorRow { sector_id: s.id, name: s.name.clone() })?;
        }
        for s in dataset.stocks() {
            let row = StockRow { symbol: s.symbol.clone(), name: s.name.clone(), sector_id: s.sector };
            engine.stocks.insert(s.symbol.clone(), row)?;
        }
        for doc in dataset.news() {
            let row = NewsRow {
                doc_id: doc.doc_id,
                media: doc.media.clone(),
                date: doc.timestamp,
                content: doc.content.clone(),
                tsv: TokenVector::from_text(&doc.content),
            };
            engine.news.insert(doc.doc_id, row)?;
            for (i, symbol) in doc.mentions.iter().enumerate() {
                let at = engine.news_mentions.len();
                engine
                    .news_mentions
                    .insert(MentionKey(doc.doc_id, i), MentionRow { doc_id: doc.doc_id, symbol: symbol.clone() })?;
                engine.mentions_by_doc.entry(doc.doc_id).or_default().push(at);
            }
        }
        for bar in dataset.bars() {
            engine.bars.insert(BarKey(bar.symbol.clone(), bar.timestamp), bar.clone())?;
        }
        Ok(engine)
    }

    pub fn row_counts(&self) -> RowCounts {
        RowCounts {
            sectors: self.sectors.len(),
            stocks: self.stocks.len(),
            news: self.news.len(),
            news_mentions: self.news_mentions.len(),
            bars: self.bars.len(),
        }
    }

    pub fn news_table(&self) -> &Table<NewsRow, DocId> {
        &self.news
    }

    pub fn stocks_table(&self) -> &Table<StockRow, Symbol> {
        &self.stocks
    }

    pub fn bars_table(&self) -> &[OhlcBar] {
        self.bars.rows()
    }

    /// Sequential scan of `news` ranking every row by its token vector.
    pub fn rel_fulltext(&self, terms: &QueryTerms, k: Option<usize>) -> Vec<SearchHit> {
        let mut scored = Vec::new();
        for row in self.news.rows() {
            let score = tsrank_score(&row.tsv, terms);
            if score > 0.0 {
                scored.push((row.doc_id, score));
            }
        }
        let mut hits = Vec::new();
        for (doc_id, score) in top_k(scored, k) {
            let Some(news) = self.news.get(&doc_id) else { continue };
            for &m in self.mentions_by_doc.get(&doc_id).map(Vec::as_slice).unwrap_or(&[]) {
                hits.push(SearchHit {
                    doc_id,
                    symbol: self.news_mentions.rows()[m].symbol.clone(),
                    date: news.date,
                    media: news.media.clone(),
                    score,
                });
            }
        }
        canonical_order(hits)
    }

    /// Hash join of hits (build side) with a scan of `bars` (probe side) on
    /// `(symbol, hit day + offset)`.
    pub fn rel_join_bars(&self, hits: &[SearchHit], offsets: &[i32]) -> Vec<BarRow> {
        let mut build: HashMap<(&str, Day), BTreeSet<Day>> = HashMap::new();
        for hit in hits {
            let day = hit.day();
            for &o in offsets {
                build.entry((hit.symbol.as_str(), day.offset(o))).or_default().insert(day);
            }
        }
        self.probe_bars(&build, |bar, &anchor| BarRow { tag: RowTag::Affected, anchor, via: None, bar: bar.clone() })
    }

    /// Anti-join: bars of the stocks absent from each anchor day's hits.
    pub fn rel_complement_bars(&self, hits: &[SearchHit], offsets: &[i32]) -> Vec<BarRow> {
        let by_day = hit_stocks_by_day(hits);
        let mut build: HashMap<(&str, Day), BTreeSet<Day>> = HashMap::new();
        for (&anchor, hit_stocks) in &by_day {
            for stock in self.stocks.rows() {
                if hit_stocks.contains(&stock.symbol) {
                    continue;
                }
                for &o in offsets {
                    build.entry((stock.symbol.as_str(), anchor.offset(o))).or_default().insert(anchor);
                }
            }
        }
        self.probe_bars(&build, |bar, &anchor| BarRow { tag: RowTag::Unaffected, anchor, via: None, bar: bar.clone() })
    }

    /// hits ⋈ stocks ⋈ stocks (same sector, different symbol) ⋈ bars.
    pub fn rel_sector_peers(&self, hits: &[SearchHit]) -> Vec<BarRow> {
        let mut by_sector: HashMap<SectorId, Vec<&Symbol>> = HashMap::new();
        for stock in self.stocks.rows() {
            by_sector.entry(stock.sector_id).or_default().push(&stock.symbol);
        }
        let mut build: HashMap<(&str, Day), BTreeSet<(Day, Symbol)>> = HashMap::new();
        for hit in hits {
            let Some(seed) = self.stocks.get(hit.symbol.as_str()) else { continue };
            let day = hit.day();
            for peer in by_sector.get(&seed.sector_id).into_iter().flatten() {
                if **peer != seed.symbol {
                    build.entry((peer.as_str(), day)).or_default().insert((day, seed.symbol.clone()));
                }
            }
        }
        self.probe_bars(&build, |bar, (anchor, seed)| BarRow {
            tag: RowTag::Peer,
            anchor: *anchor,
            via: Some(seed.clone()),
            bar: bar.clone(),
        })
    }

    fn probe_bars<V>(
        &self,
        build: &HashMap<(&str, Day), BTreeSet<V>>,
        emit: impl Fn(&OhlcBar, &V) -> BarRow,
    ) -> Vec<BarRow> {
        let mut out = Vec::new();
        if build.is_empty() {
            return out;
        }
        for bar in self.bars.rows() {
            if let Some(matches) = build.get(&(bar.symbol.as_str(), bar.day())) {
                out.extend(matches.iter().map(|v| emit(bar, v)));
            }
        }
        out
    }
}

impl Engine for RelationalEngine {
    fn kind(&self) -> EngineKind {
        EngineKind::Relational
    }

    fn scorer(&self) -> ScorerFamily {
        ScorerFamily::FrequencyRank
    }

    fn fulltext(&self, terms: &QueryTerms, k: Option<usize>) -> Result<Vec<SearchHit>, EngineError> {
        Ok(self.rel_fulltext(terms, k))
    }

    fn affected_bars(&self, hits: &[SearchHit], offsets: &[i32]) -> Result<Vec<BarRow>, EngineError> {
        Ok(self.rel_join_bars(hits, offsets))
    }

    fn unaffected_bars(&self, hits: &[SearchHit], offsets: &[i32]) -> Result<Vec<BarRow>, EngineError> {
        Ok(self.rel_complement_bars(hits, offsets))
    }

    fn sector_peer_bars(&self, hits: &[SearchHit]) -> Result<Vec<BarRow>, EngineError> {
        Ok(self.rel_sector_peers(hits))
    }
}
