//! Hand-built fixtures and brute-force oracles shared by the integration
//! tests. Nothing here calls into the engines.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use esgbench_core::ingest::RowReason;
use esgbench_core::workload::WorkloadResults;
use esgbench_core::model::{
    validate_dataset, BarRow, Dataset, Day, DocId, EsgLexicon, NewsDoc, OhlcBar, Price, RawDataset,
    QueryId, RowTag, SearchHit, Sector, SectorId, Stock, Symbol, Timestamp,
};

pub fn ts(s: &str) -> Timestamp {
    Timestamp::parse(s).unwrap()
}

/// Ten stocks in four sectors (ONGC alone in its sector), two weeks of
/// three bars a day, and a dozen articles.
pub fn ten_stock_raw() -> RawDataset {
    let sectors = ["Metals and Mining", "Financial Services", "Information Technology", "Oil and Gas"]
        .iter()
        .enumerate()
        .map(|(i, n)| Sector { id: SectorId(i as u32), name: n.to_string() })
        .collect();
    let stocks: Vec<Stock> = [
        ("TATASTEEL", "Tata Steel", 0),
        ("HINDALCO", "Hindalco Industries", 0),
        ("JSWSTEEL", "JSW Steel", 0),
        ("VEDL", "Vedanta", 0),
        ("SBIN", "State Bank of India", 1),
        ("HDFCBANK", "HDFC Bank", 1),
        ("ICICIBANK", "ICICI Bank", 1),
        ("INFY", "Infosys", 2),
        ("TCS", "Tata Consultancy Services", 2),
        ("ONGC", "Oil and Natural Gas Corporation", 3),
    ]
    .iter()
    .map(|(s, n, sec)| Stock { symbol: Symbol::new(s), name: n.to_string(), sector: SectorId(*sec) })
    .collect();

    let mut bars = Vec::new();
    let first = Day::from_ymd(2023, 7, 3).unwrap();
    for (si, stock) in stocks.iter().enumerate() {
        for d in 0..14 {
            let day = first.offset(d);
            if day.is_weekend() {
                continue;
            }
            for (j, (h, m)) in [(9, 15), (11, 20), (14, 45)].iter().enumerate() {
                let base = 1_000_000 + (si as i64) * 50_000 + (d as i64) * 700 + (j as i64) * 90;
                bars.push(OhlcBar {
                    symbol: stock.symbol.clone(),
                    timestamp: Timestamp::from_day_and_time(day, *h, *m, 0, 0),
                    open: Price::from_ticks(base),
                    high: Price::from_ticks(base + 400),
                    low: Price::from_ticks(base - 300),
                    close: Price::from_ticks(base + 150),
                    volume: 1000 + (si * 31 + d as usize * 7 + j) as u64,
                });
            }
        }
    }

    let doc = |id: u32, media: &str, date: &str, content: &str, mentions: &[&str]| NewsDoc {
        doc_id: DocId(id),
        media: media.to_string(),
        timestamp: ts(date),
        content: content.to_string(),
        mentions: mentions.iter().map(|s| Symbol::new(s)).collect(),
    };
    let news = vec![
        doc(0, "Biodiesel Magazine", "2023-07-03 08:01:00", "Tata Steel cuts carbon emission at Jamshedpur", &["TATASTEEL"]),
        doc(1, "Equitypandit", "2023-07-03 12:30:00.5", "SBIN and HDFC Bank raise green bonds for renewable energy", &["HDFCBANK", "SBIN"]),
        doc(2, "Mint", "2023-07-04 09:00:00", "Infosys wins a large deal", &["INFY"]),
        doc(3, "Reuters", "2023-07-05 16:45:10", "ESG governance review at Vedanta and Hindalco", &["HINDALCO", "VEDL"]),
        doc(4, "Economic Times", "2023-07-08 10:00:00", "Weekend note: ONGC sustainability report due", &["ONGC"]),
        doc(5, "Moneycontrol", "2023-07-06 11:11:11", "Banks rally as markets climb", &[]),
        doc(6, "Business Standard", "2023-07-06 14:00:00", "Social impact bonds: ICICI Bank, SBIN lead", &["ICICIBANK", "SBIN"]),
        doc(7, "Mint", "2023-07-07 09:30:00", "carbon carbon carbon credits for JSW Steel", &["JSWSTEEL"]),
        doc(8, "Reuters", "2023-07-10 13:00:00", "TCS quarterly results beat estimates", &["TCS"]),
        doc(9, "Equitypandit", "2023-07-11 15:20:00", "Environmental clearance for Tata Steel plant", &["TATASTEEL"]),
        doc(10, "Biodiesel Magazine", "2023-07-12 07:00:00", "biodiesel blending mandate widens", &[]),
        doc(11, "Mint", "2023-07-03 18:00:00", "Tata Steel emission targets under governance lens", &["TATASTEEL"]),
    ];
    RawDataset { sectors, stocks, news, bars }
}

pub fn ten_stock() -> Dataset {
    let v = validate_dataset(ten_stock_raw()).unwrap();
    assert!(v.report.is_clean(), "{:?}", v.report.rejected);
    v.dataset
}

/// Lowercase alphanumeric runs; written independently of the analyzer.
pub fn oracle_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Every (doc, mention) pair of a document containing any lexicon term.
pub fn oracle_q1_keys(ds: &Dataset, lexicon: &EsgLexicon) -> BTreeSet<(String, Timestamp, String)> {
    let mut out = BTreeSet::new();
    for doc in ds.news() {
        if oracle_tokens(&doc.content).iter().any(|t| lexicon.contains(t)) {
            for m in &doc.mentions {
                out.insert((m.to_string(), doc.timestamp, doc.media.clone()));
            }
        }
    }
    out
}

pub fn oracle_hits(ds: &Dataset, lexicon: &EsgLexicon) -> Vec<SearchHit> {
    let mut out = Vec::new();
    for doc in ds.news() {
        if oracle_tokens(&doc.content).iter().any(|t| lexicon.contains(t)) {
            for m in &doc.mentions {
                out.push(SearchHit { doc_id: doc.doc_id, symbol: m.clone(), date: doc.timestamp, media: doc.media.clone(), score: 1.0 });
            }
        }
    }
    out
}

pub type RowKey = (RowTag, String, Timestamp, Day, Option<String>);

pub fn row_key(r: &BarRow) -> RowKey {
    (r.tag, r.bar.symbol.to_string(), r.bar.timestamp, r.anchor, r.via.as_ref().map(|s| s.to_string()))
}

pub fn keys(rows: &[BarRow]) -> BTreeSet<RowKey> {
    rows.iter().map(row_key).collect()
}

pub fn oracle_affected(ds: &Dataset, hits: &[SearchHit], offsets: &[i32]) -> BTreeSet<RowKey> {
    let mut out = BTreeSet::new();
    for h in hits {
        for b in ds.bars() {
            for &o in offsets {
                if b.symbol == h.symbol && b.timestamp.day() == h.date.day().offset(o) {
                    out.insert((RowTag::Affected, b.symbol.to_string(), b.timestamp, h.date.day(), None));
                }
            }
        }
    }
    out
}

pub fn oracle_unaffected(ds: &Dataset, hits: &[SearchHit], offsets: &[i32]) -> BTreeSet<RowKey> {
    let days: BTreeSet<Day> = hits.iter().map(|h| h.date.day()).collect();
    let mut out = BTreeSet::new();
    for &anchor in &days {
        for s in ds.stocks() {
            if hits.iter().any(|h| h.symbol == s.symbol && h.date.day() == anchor) {
                continue;
            }
            for b in ds.bars() {
                for &o in offsets {
                    if b.symbol == s.symbol && b.timestamp.day() == anchor.offset(o) {
                        out.insert((RowTag::Unaffected, b.symbol.to_string(), b.timestamp, anchor, None));
                    }
                }
            }
        }
    }
    out
}

pub fn oracle_peers(ds: &Dataset, hits: &[SearchHit]) -> BTreeSet<RowKey> {
    let sector: HashMap<&Symbol, SectorId> = ds.stocks().iter().map(|s| (&s.symbol, s.sector)).collect();
    let mut out = BTreeSet::new();
    for h in hits {
        for peer in ds.stocks() {
            if peer.symbol == h.symbol || Some(&peer.sector) != sector.get(&h.symbol) {
                continue;
            }
            for b in ds.bars() {
                if b.symbol == peer.symbol && b.timestamp.day() == h.date.day() {
                    out.insert((RowTag::Peer, b.symbol.to_string(), b.timestamp, h.date.day(), Some(h.symbol.to_string())));
                }
            }
        }
    }
    out
}

/// Twenty short articles for the scoring oracles.
pub const SCORING_DOCS: [&str; 20] = [
    "ESG funds see record inflows as carbon prices rise",
    "Tata Steel reports quarterly results",
    "carbon carbon carbon: the emission debate",
    "Governance concerns weigh on the board",
    "Renewable energy capacity doubles; renewable targets raised",
    "Markets close flat",
    "Social bonds and sustainability-linked loans gain ground",
    "biodiesel biodiesel plant commissioned",
    "Environmental clearance delayed for mine",
    "Analysts upgrade the stock",
    "ESG ESG ESG ESG ESG",
    "Emission norms tightened for steel makers, emission cuts expected",
    "Nothing relevant here at all",
    "Carbon credits, renewable power, and governance reform in one long sentence about many unrelated things",
    "sustainability",
    "The social sector fund and the environmental fund merged",
    "Quarterly earnings beat estimates",
    "governance governance",
    "Carbon-neutral by 2040 pledge",
    "esg",
];

pub fn scoring_fixture() -> Dataset {
    let stocks: Vec<Stock> = ["AAA", "BBB", "CCC"]
        .iter()
        .map(|s| Stock { symbol: Symbol::new(s), name: s.to_string(), sector: SectorId(0) })
        .collect();
    let news = SCORING_DOCS
        .iter()
        .enumerate()
        .map(|(i, text)| NewsDoc {
            doc_id: DocId(i as u32),
            media: "Mint".into(),
            timestamp: Timestamp::parse("2023-07-03 10:00:00").unwrap(),
            content: text.to_string(),
            mentions: vec![stocks[i % 3].symbol.clone()],
        })
        .collect();
    let raw = RawDataset { sectors: vec![Sector { id: SectorId(0), name: "X".into() }], stocks, news, bars: vec![] };
    validate_dataset(raw).unwrap().dataset
}

/// Scores every document containing a query term; written from the
/// textbook definitions without touching the library's index.
pub fn bm25_oracle(docs: &[Vec<String>], query: &[&str], k1: f64, b: f64) -> BTreeMap<usize, f64> {
    let n = docs.len() as f64;
    let avg = docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let mut query: Vec<&str> = query.to_vec();
    query.sort();
    query.dedup();
    let mut out = BTreeMap::new();
    for (i, doc) in docs.iter().enumerate() {
        let mut score = 0.0;
        let mut matched = false;
        for term in &query {
            let tf = doc.iter().filter(|t| t == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            matched = true;
            let df = docs.iter().filter(|d| d.iter().any(|t| t == term)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc.len() as f64 / avg));
        }
        if matched {
            out.insert(i, score);
        }
    }
    out
}

pub fn tsrank_oracle(docs: &[Vec<String>], query: &[&str]) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for (i, doc) in docs.iter().enumerate() {
        let mut sum = 0.0;
        for term in query.iter().collect::<BTreeSet<_>>() {
            let tf = doc.iter().filter(|t| t == term).count() as f64;
            if tf > 0.0 {
                sum += tf / (tf + 1.0);
            }
        }
        if sum > 0.0 {
            out.insert(i, sum / (1.0 + (doc.len() as f64).ln()));
        }
    }
    out
}

pub fn scoring_tokens() -> Vec<Vec<String>> {
    SCORING_DOCS.iter().map(|d| oracle_tokens(d)).collect()
}

pub fn scoring_query() -> Vec<&'static str> {
    vec!["esg", "environmental", "social", "governance", "sustainability", "emission", "carbon", "biodiesel", "renewable"]
}


pub const MALFORMED_BARS: &str = "symbol,timestamp,open,high,low,close,volume
SBIN,2023-07-03 09:15:00,571.25,575,570,574.10,100
SBIN,2023-07-03 10:00:00,571.25,575,570,abc,100
sbin,2023-07-03 11:00:00,1,2,1,2,100
SBIN,2023-07-32 11:00:00,1,2,1,2,100
SBIN,2023-07-03 12:00:00,1,2,1,2
SBIN,2023-07-03 13:00:00,1,2,1,2,-5
SBIN,2023-07-03 14:00:00,1.00001,2,1,2,5
";

/// (line, reason) for every bad row of [`MALFORMED_BARS`].
pub fn malformed_bar_reasons() -> Vec<(u64, RowReason)> {
    vec![
        (3, RowReason::InvalidField("close")),
        (4, RowReason::InvalidField("symbol")),
        (5, RowReason::InvalidField("timestamp")),
        (6, RowReason::FieldCount { expected: 7, found: 6 }),
        (7, RowReason::InvalidField("volume")),
        (8, RowReason::InvalidField("open")),
    ]
}

pub const MALFORMED_NEWS: &str = r#"{"media":"Mint","date":"2023-07-03 10:00:00","content":"ok"}
not json
{"media":"Mint","content":"no date"}
{"media":7,"date":"2023-07-03 10:00:00","content":"x"}
{"media":"Mint","date":"yesterday","content":"x"}
{"date":"2023-07-03 10:00:00","content":"x"}
"#;

pub fn malformed_news_reasons() -> Vec<(u64, RowReason)> {
    vec![
        (2, RowReason::NotAnObject),
        (3, RowReason::MissingField("date")),
        (4, RowReason::InvalidField("media")),
        (5, RowReason::InvalidField("date")),
        (6, RowReason::MissingField("media")),
    ]
}

/// Partition of each trading hit day into affected and unaffected stocks,
/// Q4 strictly after the article day, Q5 never returning its seed stock.
pub fn workload_law_violations(ds: &Dataset, r: &WorkloadResults, horizon: i32) -> Vec<String> {
    let mut bad = Vec::new();
    let universe: BTreeSet<String> = ds.stocks().iter().map(|s| s.symbol.to_string()).collect();
    let trading: BTreeSet<Day> = ds.bars().iter().map(|b| b.timestamp.day()).collect();
    let hit_days: BTreeSet<Day> = r.hits().iter().map(|h| h.day()).collect();
    for day in hit_days.iter().filter(|d| trading.contains(d)) {
        let on = |q: QueryId| -> BTreeSet<String> {
            r.bars(q).iter().filter(|row| row.anchor == *day).map(|row| row.symbol().to_string()).collect()
        };
        let (a, u) = (on(QueryId::Q2), on(QueryId::Q3));
        if !a.is_disjoint(&u) {
            bad.push(format!("{}: {day}: affected and unaffected overlap", r.engine));
        }
        if a.union(&u).cloned().collect::<BTreeSet<_>>() != universe {
            bad.push(format!("{}: {day}: affected and unaffected miss stocks", r.engine));
        }
    }
    for row in r.bars(QueryId::Q4) {
        if !(1..=horizon).contains(&row.offset()) || !matches!(row.tag, RowTag::Affected | RowTag::Unaffected) {
            bad.push(format!("{}: Q4 row at offset {} tagged {:?}", r.engine, row.offset(), row.tag));
        }
    }
    for row in r.bars(QueryId::Q5) {
        if row.via.as_ref() == Some(row.symbol()) || row.offset() != 0 {
            bad.push(format!("{}: Q5 row {} via {:?}", r.engine, row.symbol(), row.via));
        }
    }
    bad
}
