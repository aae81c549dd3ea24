use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{DocId, ModelError, NewsDoc, OhlcBar, Sector, SectorId, Stock, Symbol};

/// Loaded collections before any invariant has been checked.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawDataset {
    pub sectors: Vec<Sector>,
    pub stocks: Vec<Stock>,
    pub news: Vec<NewsDoc>,
    pub bars: Vec<OhlcBar>,
}

/// A dataset whose every record satisfies the type invariants. Only
/// [`validate_dataset`] constructs one, so engines never see a rejected
/// record.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    sectors: Vec<Sector>,
    stocks: Vec<Stock>,
    news: Vec<NewsDoc>,
    bars: Vec<OhlcBar>,
    stock_index: HashMap<Symbol, usize>,
}

impl Dataset {
    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn stocks(&self) -> &[Stock] {
        &self.stocks
    }

    /// Sorted by document id.
    pub fn news(&self) -> &[NewsDoc] {
        &self.news
    }

    /// Sorted by (symbol, timestamp).
    pub fn bars(&self) -> &[OhlcBar] {
        &self.bars
    }

    pub fn stock(&self, symbol: &str) -> Option<&Stock> {
        self.stock_index.get(symbol).map(|&i| &self.stocks[i])
    }

    pub fn sector(&self, id: SectorId) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.id == id)
    }

    pub fn to_raw(&self) -> RawDataset {
        RawDataset {
            sectors: self.sectors.clone(),
            stocks: self.stocks.clone(),
            news: self.news.clone(),
            bars: self.bars.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RecordKind {
    Sector,
    Stock,
    News,
    Bar,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RejectReason {
    DuplicateSectorId,
    DuplicateSectorName,
    InvalidSymbol,
    DuplicateSymbol,
    UnknownSector,
    DuplicateDocId,
    UnknownSymbol(String),
    NonPositivePrice,
    LowExceedsHigh,
    OpenOutsideRange,
    CloseOutsideRange,
    DuplicateBarKey,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::DuplicateSectorId => f.write_str("duplicate sector id"),
            RejectReason::DuplicateSectorName => f.write_str("duplicate sector name"),
            RejectReason::InvalidSymbol => f.write_str("invalid symbol"),
            RejectReason::DuplicateSymbol => f.write_str("duplicate symbol"),
            RejectReason::UnknownSector => f.write_str("unknown sector"),
            RejectReason::DuplicateDocId => f.write_str("duplicate doc id"),
            RejectReason::UnknownSymbol(s) => write!(f, "unknown symbol {s}"),
            RejectReason::NonPositivePrice => f.write_str("non-positive price"),
            RejectReason::LowExceedsHigh => f.write_str("low exceeds high"),
            RejectReason::OpenOutsideRange => f.write_str("open outside low-high range"),
            RejectReason::CloseOutsideRange => f.write_str("close outside low-high range"),
            RejectReason::DuplicateBarKey => f.write_str("duplicate bar key"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rejection {
    pub kind: RecordKind,
    /// Human-readable record key (symbol, doc id, ...).
    pub key: String,
    pub reason: RejectReason,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub accepted_sectors: usize,
    pub accepted_stocks: usize,
    pub accepted_news: usize,
    pub accepted_bars: usize,
    pub rejected: Vec<Rejection>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.rejected.is_empty()
    }

    fn reject(&mut self, kind: RecordKind, key: impl Into<String>, reason: RejectReason) {
        self.rejected.push(Rejection { kind, key: key.into(), reason });
    }
}

#[derive(Clone, Debug)]
pub struct Validated {
    pub dataset: Dataset,
    pub report: ValidationReport,
}

/// Splits `raw` into accepted records and a rejection list. Rejections are
/// data; the only hard failure is a stock universe that ends up empty.
pub fn validate_dataset(raw: RawDataset) -> Result<Validated, ModelError> {
    if raw.stocks.is_empty() {
        return Err(ModelError::EmptyUniverse);
    }
    let mut report = ValidationReport::default();

    let mut sectors = Vec::with_capacity(raw.sectors.len());
    let mut sector_ids = HashSet::new();
    let mut sector_names = HashSet::new();
    for sector in raw.sectors {
        if sector_ids.contains(&sector.id) {
            report.reject(RecordKind::Sector, sector.name, RejectReason::DuplicateSectorId);
        } else if sector_names.contains(&sector.name) {
            report.reject(RecordKind::Sector, sector.name, RejectReason::DuplicateSectorName);
        } else {
            sector_ids.insert(sector.id);
            sector_names.insert(sector.name.clone());
            sectors.push(sector);
        }
    }

    let mut stocks = Vec::with_capacity(raw.stocks.len());
    let mut stock_index = HashMap::new();
    for stock in raw.stocks {
        let key = stock.symbol.to_string();
        if !stock.symbol.is_well_formed() {
            report.reject(RecordKind::Stock, key, RejectReason::InvalidSymbol);
        } else if stock_index.contains_key(&stock.symbol) {
            report.reject(RecordKind::Stock, key, RejectReason::DuplicateSymbol);
        } else if !sector_ids.contains(&stock.sector) {
            report.reject(RecordKind::Stock, key, RejectReason::UnknownSector);
        } else {
            stock_index.insert(stock.symbol.clone(), stocks.len());
            stocks.push(stock);
        }
    }
    if stocks.is_empty() {
        return Err(ModelError::EmptyUniverse);
    }

    let mut news = Vec::with_capacity(raw.news.len());
    let mut doc_ids: HashSet<DocId> = HashSet::new();
    for mut doc in raw.news {
        let key = doc.doc_id.to_string();
        if doc_ids.contains(&doc.doc_id) {
            report.reject(RecordKind::News, key, RejectReason::DuplicateDocId);
            continue;
        }
        if let Some(unknown) = doc.mentions.iter().find(|s| !stock_index.contains_key(*s)) {
            let reason = RejectReason::UnknownSymbol(unknown.to_string());
            report.reject(RecordKind::News, key, reason);
            continue;
        }
        doc.mentions.sort();
        doc.mentions.dedup();
        doc_ids.insert(doc.doc_id);
        news.push(doc);
    }
    news.sort_by_key(|d| d.doc_id);

    let mut bars = Vec::with_capacity(raw.bars.len());
    let mut bar_keys = HashSet::new();
    for bar in raw.bars {
        let key = format!("{}@{}", bar.symbol, bar.timestamp);
        let reason = if !stock_index.contains_key(&bar.symbol) {
            Some(RejectReason::UnknownSymbol(bar.symbol.to_string()))
        } else if ![bar.open, bar.high, bar.low, bar.close].iter().all(|p| p.is_positive()) {
            Some(RejectReason::NonPositivePrice)
        } else if bar.low > bar.high {
            Some(RejectReason::LowExceedsHigh)
        } else if bar.open < bar.low || bar.open > bar.high {
            Some(RejectReason::OpenOutsideRange)
        } else if bar.close < bar.low || bar.close > bar.high {
            Some(RejectReason::CloseOutsideRange)
        } else if !bar_keys.insert((bar.symbol.clone(), bar.timestamp)) {
            Some(RejectReason::DuplicateBarKey)
        } else {
            None
        };
        match reason {
            Some(reason) => report.reject(RecordKind::Bar, key, reason),
            None => bars.push(bar),
        }
    }
    bars.sort_by(|a, b| a.symbol.cmp(&b.symbol).then(a.timestamp.cmp(&b.timestamp)));

    report.accepted_sectors = sectors.len();
    report.accepted_stocks = stocks.len();
    report.accepted_news = news.len();
    report.accepted_bars = bars.len();

    Ok(Validated {
        dataset: Dataset { sectors, stocks, news, bars, stock_index },
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Price, Timestamp};

    fn fixture() -> RawDataset {
        let sectors = vec![
            Sector { id: SectorId(0), name: "Metals and Mining".into() },
            Sector { id: SectorId(1), name: "Financial Services".into() },
        ];
        let stock = |sym: &str, name: &str, sector| Stock {
            symbol: Symbol::new(sym),
            name: name.into(),
            sector: SectorId(sector),
        };
        let stocks = vec![
            stock("TATASTEEL", "Tata Steel", 0),
            stock("HINDALCO", "Hindalco Industries", 0),
            stock("SBIN", "State Bank of India", 1),
        ];
        let news = vec![
            NewsDoc {
                doc_id: DocId(1),
                media: "Tata Steel".into(),
                timestamp: Timestamp::parse("2023-07-28 21:17:13.284140").unwrap(),
                content: "Tata Steel publishes ESG report".into(),
                mentions: vec![Symbol::new("TATASTEEL")],
            },
            NewsDoc {
                doc_id: DocId(0),
                media: "Biodiesel Magazine".into(),
                timestamp: Timestamp::parse("2023-07-02 21:27:20.801828").unwrap(),
                content: "SBIN finances biodiesel plant".into(),
                mentions: vec![Symbol::new("SBIN")],
            },
        ];
        RawDataset { sectors, stocks, news, bars: vec![bar("SBIN", 100, 105, 99, 101)] }
    }

    fn bar(sym: &str, open: i64, high: i64, low: i64, close: i64) -> OhlcBar {
        OhlcBar {
            symbol: Symbol::new(sym),
            timestamp: Timestamp::parse("2023-07-03 09:15:00").unwrap(),
            open: Price::from_ticks(open * Price::SCALE),
            high: Price::from_ticks(high * Price::SCALE),
            low: Price::from_ticks(low * Price::SCALE),
            close: Price::from_ticks(close * Price::SCALE),
            volume: 10,
        }
    }

    #[test]
    fn clean_fixture_has_no_rejections() {
        let v = validate_dataset(fixture()).unwrap();
        assert!(v.report.is_clean());
        assert_eq!(v.report.accepted_stocks, 3);
        assert_eq!(v.report.accepted_news, 2);
        assert_eq!(v.dataset.news()[0].doc_id, DocId(0));
    }

    #[test]
    fn inverted_bar_is_rejected() {
        let mut raw = fixture();
        raw.bars.push(OhlcBar {
            timestamp: Timestamp::parse("2023-07-03 10:15:00").unwrap(),
            ..bar("SBIN", 102, 100, 105, 101)
        });
        let v = validate_dataset(raw).unwrap();
        assert_eq!(v.report.rejected.len(), 1);
        assert_eq!(v.report.rejected[0].reason.to_string(), "low exceeds high");
        assert_eq!(v.dataset.bars().len(), 1);
    }

    #[test]
    fn unknown_mention_is_rejected() {
        let mut raw = fixture();
        raw.news[0].mentions.push(Symbol::new("ZZZZ"));
        let v = validate_dataset(raw).unwrap();
        assert_eq!(v.report.rejected.len(), 1);
        assert_eq!(v.report.rejected[0].reason, RejectReason::UnknownSymbol("ZZZZ".into()));
        assert!(v.report.rejected[0].reason.to_string().starts_with("unknown symbol"));
        assert_eq!(v.dataset.news().len(), 1);
    }

    #[test]
    fn empty_universe_is_an_error() {
        let mut raw = fixture();
        raw.stocks.clear();
        assert_eq!(validate_dataset(raw).unwrap_err(), ModelError::EmptyUniverse);

        let mut raw = fixture();
        for s in &mut raw.stocks {
            s.sector = SectorId(9);
        }
        assert_eq!(validate_dataset(raw).unwrap_err(), ModelError::EmptyUniverse);
    }

    #[test]
    fn duplicates_and_bad_symbols() {
        let mut raw = fixture();
        raw.stocks.push(raw.stocks[0].clone());
        raw.stocks.push(Stock { symbol: Symbol::new("bad"), name: "x".into(), sector: SectorId(0) });
        raw.sectors.push(Sector { id: SectorId(5), name: "Metals and Mining".into() });
        raw.news.push(raw.news[0].clone());
        raw.bars.push(raw.bars[0].clone());
        let v = validate_dataset(raw).unwrap();
        let reasons: Vec<String> = v.report.rejected.iter().map(|r| r.reason.to_string()).collect();
        assert_eq!(
            reasons,
            [
                "duplicate sector name",
                "duplicate symbol",
                "invalid symbol",
                "duplicate doc id",
                "duplicate bar key"
            ]
        );
    }
}
