//! Browser explorer over a generated dataset. The [`Explorer`] does the
//! work and is plain Rust; [`Demo`] is its wasm-bindgen face and speaks JSON.

use std::collections::HashMap;

use esgbench_core::engine::{DocumentEngine, Engine, GraphEngine, RelationalEngine};
use esgbench_core::ingest::{generate, GeneratorConfig};
use esgbench_core::model::{Dataset, DocId, QueryId, RowTag, SearchHit};
use esgbench_core::text::{search, Bm25Params, QueryTerms};
use esgbench_core::workload::{run_query, QueryParams, QuerySpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize, PartialEq)]
pub struct Article {
    pub doc_id: u32,
    pub date: String,
    pub media: String,
    pub stocks: Vec<String>,
    pub score: f64,
}

/// Top articles under both scorers. `moved` lists the BM25 articles absent
/// from the frequency-rank top k.
#[derive(Debug, Serialize)]
pub struct Ranking {
    pub bm25: Vec<Article>,
    pub tsrank: Vec<Article>,
    pub moved: Vec<u32>,
}

#[derive(Debug, Serialize)]
pub struct Fanout {
    pub shard_sizes: Vec<usize>,
    pub hits: usize,
    /// Bar lookups the document engine issues for Q2.
    pub sub_queries: usize,
    /// Stock and bar nodes the graph engine touches for Q2.
    pub graph_visited: usize,
    pub top: Vec<Article>,
}

#[derive(Debug, Serialize)]
pub struct Candle {
    pub time: String,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    /// Whether the chosen query returns this bar.
    pub marked: bool,
}

#[derive(Debug, Serialize)]
pub struct PricePanel {
    pub symbol: String,
    pub query: String,
    pub marked: usize,
    pub candles: Vec<Candle>,
}

pub struct Explorer {
    ds: Dataset,
    rel: RelationalEngine,
    graph: GraphEngine,
    hits: Vec<SearchHit>,
    by_id: HashMap<DocId, usize>,
}

impl Explorer {
    pub fn new(config: &GeneratorConfig) -> Result<Self, String> {
        let ds = generate(config).map_err(|e| e.to_string())?;
        let rel = RelationalEngine::load(&ds).map_err(|e| e.to_string())?;
        let graph = GraphEngine::load(&ds).map_err(|e| e.to_string())?;
        let q1 = QuerySpec { query_id: QueryId::Q1, params: QueryParams::default().with_k(None) };
        let hits = run_query(&graph, &q1, None).map_err(|e| e.to_string())?.hits().unwrap_or_default().to_vec();
        let by_id = ds.news().iter().enumerate().map(|(i, d)| (d.doc_id, i)).collect();
        Ok(Explorer { ds, rel, graph, hits, by_id })
    }

    pub fn symbols(&self) -> Vec<String> {
        self.ds.stocks().iter().map(|s| s.symbol.to_string()).collect()
    }

    fn article(&self, id: DocId, score: f64) -> Option<Article> {
        let d = &self.ds.news()[*self.by_id.get(&id)?];
        Some(Article {
            doc_id: id.0,
            date: d.timestamp.to_string(),
            media: d.media.clone(),
            stocks: d.mentions.iter().map(|s| s.to_string()).collect(),
            score,
        })
    }

    fn terms() -> QueryTerms {
        QueryParams::default().terms()
    }

    pub fn ranking(&self, k1: f64, b: f64, k: usize) -> Result<Ranking, String> {
        if !(k1.is_finite() && k1 >= 0.0) || !(0.0..=1.0).contains(&b) || k == 0 {
            return Err(format!("need k1 >= 0, 0 <= b <= 1 and k >= 1 (got k1={k1}, b={b}, k={k})"));
        }
        let bm25: Vec<Article> = search(self.graph.content_index(), &Self::terms(), Some(k), Bm25Params { k1, b })
            .into_iter()
            .filter_map(|(id, s)| self.article(id, s))
            .collect();
        let mut tsrank: Vec<Article> = Vec::new();
        for h in self.rel.fulltext(&Self::terms(), Some(k)).map_err(|e| e.to_string())? {
            if !tsrank.iter().any(|a| a.doc_id == h.doc_id.0) {
                tsrank.extend(self.article(h.doc_id, h.score));
            }
        }
        tsrank.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.doc_id.cmp(&b.doc_id)));
        let moved = bm25.iter().map(|a| a.doc_id).filter(|id| !tsrank.iter().any(|t| t.doc_id == *id)).collect();
        Ok(Ranking { bm25, tsrank, moved })
    }

    pub fn fanout(&self, shards: usize, k: usize) -> Result<Fanout, String> {
        if !(1..=64).contains(&shards) {
            return Err(format!("shard count must be 1..=64, got {shards}"));
        }
        let doc = DocumentEngine::load(&self.ds, shards).map_err(|e| e.to_string())?;
        let (_, stats) = doc.doc_app_join(&self.hits, &[0]).map_err(|e| e.to_string())?;
        let (_, trace) = self.graph.graph_affected_traced(&self.hits, &[0]);
        let mut top = Vec::new();
        for h in doc.fulltext(&Self::terms(), Some(k.max(1))).map_err(|e| e.to_string())? {
            if !top.iter().any(|a: &Article| a.doc_id == h.doc_id.0) {
                top.extend(self.article(h.doc_id, h.score));
            }
        }
        Ok(Fanout {
            shard_sizes: doc.news().shard_sizes(),
            hits: self.hits.len(),
            sub_queries: stats.bar_queries,
            graph_visited: trace.visited_nodes(),
            top,
        })
    }

    /// Every bar of `symbol`, marking those the query returns for it.
    pub fn prices(&self, symbol: &str, query: QueryId) -> Result<PricePanel, String> {
        if self.ds.stock(symbol).is_none() {
            return Err(format!("unknown stock {symbol:?}"));
        }
        if query == QueryId::Q1 {
            return Err("Q1 returns articles, not bars".into());
        }
        let spec = QuerySpec { query_id: query, params: QueryParams::default() };
        let rows = run_query(&self.graph, &spec, Some(&self.hits)).map_err(|e| e.to_string())?;
        let marked: std::collections::HashSet<_> = rows
            .bars()
            .unwrap_or_default()
            .iter()
            .filter(|r| r.symbol().as_str() == symbol && r.tag != RowTag::Unaffected)
            .map(|r| r.bar.timestamp)
            .collect();
        let candles: Vec<Candle> = self
            .ds
            .bars()
            .iter()
            .filter(|b| b.symbol.as_str() == symbol)
            .map(|b| Candle {
                time: b.timestamp.to_string(),
                open: b.open.to_f64(),
                high: b.high.to_f64(),
                low: b.low.to_f64(),
                close: b.close.to_f64(),
                marked: marked.contains(&b.timestamp),
            })
            .collect();
        Ok(PricePanel { symbol: symbol.to_string(), query: query.to_string(), marked: marked.len(), candles })
    }
}

fn json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub struct Demo(Explorer);

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, stocks: u32, sectors: u32, news: u32, days: u32, esg_fraction: f64) -> Result<Demo, JsError> {
        let config = GeneratorConfig {
            seed: u64::from(seed),
            n_stocks: stocks as usize,
            n_sectors: sectors as usize,
            n_news: news as usize,
            days: days as usize,
            bars_per_day: 8,
            esg_fraction,
        };
        Explorer::new(&config).map(Demo).map_err(|e| JsError::new(&e))
    }

    pub fn symbols(&self) -> Result<String, JsError> {
        json(Ok(self.0.symbols()))
    }

    pub fn ranking(&self, k1: f64, b: f64, k: u32) -> Result<String, JsError> {
        json(self.0.ranking(k1, b, k as usize))
    }

    pub fn fanout(&self, shards: u32, k: u32) -> Result<String, JsError> {
        json(self.0.fanout(shards as usize, k as usize))
    }

    pub fn prices(&self, symbol: &str, query: &str) -> Result<String, JsError> {
        json(query.parse::<QueryId>().map_err(|e| e.to_string()).and_then(|q| self.0.prices(symbol, q)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explorer() -> Explorer {
        let config = GeneratorConfig { n_stocks: 10, n_sectors: 3, n_news: 400, days: 10, esg_fraction: 0.2, ..GeneratorConfig::default() };
        Explorer::new(&config).unwrap()
    }

    #[test]
    fn ranking_respects_k_and_parameters() {
        let e = explorer();
        let r = e.ranking(1.2, 0.75, 5).unwrap();
        assert_eq!(r.bm25.len(), 5);
        assert_eq!(r.tsrank.len(), 5);
        assert!(r.bm25.windows(2).all(|w| w[0].score >= w[1].score));
        let flat = e.ranking(0.0, 0.0, 5).unwrap();
        assert_ne!(r.bm25, flat.bm25);
        assert!(e.ranking(1.2, 1.5, 5).is_err());
        assert!(e.ranking(1.2, 0.5, 0).is_err());
    }

    #[test]
    fn fanout_counts() {
        let e = explorer();
        let one = e.fanout(1, 3).unwrap();
        let four = e.fanout(4, 3).unwrap();
        assert_eq!(four.shard_sizes.len(), 4);
        assert_eq!(four.shard_sizes.iter().sum::<usize>(), 400);
        assert_eq!(one.top, four.top);
        assert_eq!(one.sub_queries, e.hits.len());
        assert!(e.fanout(0, 3).is_err());
    }

    #[test]
    fn price_panel_marks_query_rows() {
        let e = explorer();
        let sym = e.hits[0].symbol.to_string();
        let p = e.prices(&sym, QueryId::Q2).unwrap();
        assert_eq!(p.candles.len(), 10 * 8);
        assert!(p.marked > 0);
        assert_eq!(p.candles.iter().filter(|c| c.marked).count(), p.marked);
        assert!(e.prices("NOPE", QueryId::Q2).is_err());
        assert!(e.prices(&sym, QueryId::Q1).is_err());
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"marked\":true"));
    }
}
