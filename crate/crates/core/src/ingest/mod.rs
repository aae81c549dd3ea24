//! File loaders, mention extraction and the synthetic data generator.
//!
//! A dataset directory holds:
//!
//! * `stocks.csv`, the sector map, header `symbol,name,sector`;
//! * `bars/<SYMBOL>.csv`, header `symbol,timestamp,open,high,low,close,volume`;
//! * `news.jsonl`, one JSON object per line with `media`, `date`, `content`
//!   and an optional integer `doc_id` (the zero-based line number otherwise).
//!
//! Malformed rows never abort a load. They are returned as [`RowRejection`]s
//! carrying the file and line, and the rest of the file is kept.

mod generate;
mod mentions;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{
    validate_dataset, Dataset, DocId, ModelError, NewsDoc, OhlcBar, Price, RawDataset, Sector,
    SectorId, Stock, Symbol, Timestamp, Validated,
};

pub use generate::{generate, generate_raw, GeneratorConfig, FILLER_WORDS, MEDIA};
pub use mentions::MentionDictionary;

pub const OHLC_HEADER: [&str; 7] = ["symbol", "timestamp", "open", "high", "low", "close", "volume"];
pub const SECTOR_MAP_HEADER: [&str; 3] = ["symbol", "name", "sector"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: expected header {expected}, found {found}")]
    Header { path: PathBuf, expected: String, found: String },
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn io_err(path: &Path, e: impl fmt::Display) -> IngestError {
    IngestError::Io { path: path.to_path_buf(), message: e.to_string() }
}

/// Why one input row was dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowReason {
    FieldCount { expected: usize, found: usize },
    /// The named field is present but does not parse.
    InvalidField(&'static str),
    MissingField(&'static str),
    /// The line is not a JSON object.
    NotAnObject,
}

impl fmt::Display for RowReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowReason::FieldCount { expected, found } => write!(f, "expected {expected} fields, found {found}"),
            RowReason::InvalidField(name) => write!(f, "invalid {name}"),
            RowReason::MissingField(name) => write!(f, "missing {name}"),
            RowReason::NotAnObject => f.write_str("not a JSON object"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowRejection {
    pub path: PathBuf,
    /// One-based physical line number.
    pub line: u64,
    pub reason: RowReason,
}

impl fmt::Display for RowRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.path.display(), self.line, self.reason)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoadedBars {
    pub bars: Vec<OhlcBar>,
    /// Rows dropped because an earlier row had the same (symbol, timestamp).
    pub duplicates: usize,
    pub rejects: Vec<RowRejection>,
}

fn check_header(path: &Path, found: &csv::StringRecord, expected: &[&str]) -> Result<(), IngestError> {
    if found.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(IngestError::Header {
            path: path.to_path_buf(),
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>, IngestError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    Ok(csv::ReaderBuilder::new().flexible(true).from_reader(file))
}

fn parse_bar(rec: &csv::StringRecord) -> Result<OhlcBar, RowReason> {
    if rec.len() != OHLC_HEADER.len() {
        return Err(RowReason::FieldCount { expected: OHLC_HEADER.len(), found: rec.len() });
    }
    let field = |i: usize| rec[i].trim();
    let price = |i: usize| Price::parse(field(i)).map_err(|_| RowReason::InvalidField(OHLC_HEADER[i]));
    Ok(OhlcBar {
        symbol: Symbol::parse(field(0)).map_err(|_| RowReason::InvalidField("symbol"))?,
        timestamp: Timestamp::parse(field(1)).map_err(|_| RowReason::InvalidField("timestamp"))?,
        open: price(2)?,
        high: price(3)?,
        low: price(4)?,
        close: price(5)?,
        volume: field(6).parse().map_err(|_| RowReason::InvalidField("volume"))?,
    })
}

/// Concatenates the files in order, keeping the first bar of every
/// (symbol, timestamp).
pub fn load_ohlc_csvs<P: AsRef<Path>>(paths: &[P]) -> Result<LoadedBars, IngestError> {
    let mut out = LoadedBars::default();
    let mut seen = HashSet::new();
    for path in paths {
        let path = path.as_ref();
        let mut reader = csv_reader(path)?;
        check_header(path, reader.headers().map_err(|e| io_err(path, e))?, &OHLC_HEADER)?;
        for rec in reader.records() {
            let rec = rec.map_err(|e| io_err(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            match parse_bar(&rec) {
                Ok(bar) => {
                    if seen.insert((bar.symbol.clone(), bar.timestamp)) {
                        out.bars.push(bar);
                    } else {
                        out.duplicates += 1;
                    }
                }
                Err(reason) => out.rejects.push(RowRejection { path: path.to_path_buf(), line, reason }),
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SectorMap {
    pub sectors: Vec<Sector>,
    pub stocks: Vec<Stock>,
    pub rejects: Vec<RowRejection>,
}

/// Sector ids are assigned in order of first appearance.
pub fn load_sector_map(path: &Path) -> Result<SectorMap, IngestError> {
    let mut reader = csv_reader(path)?;
    check_header(path, reader.headers().map_err(|e| io_err(path, e))?, &SECTOR_MAP_HEADER)?;
    let mut map = SectorMap::default();
    let mut ids: HashMap<String, SectorId> = HashMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let reject = |reason| RowRejection { path: path.to_path_buf(), line, reason };
        if rec.len() != 3 {
            map.rejects.push(reject(RowReason::FieldCount { expected: 3, found: rec.len() }));
            continue;
        }
        let Ok(symbol) = Symbol::parse(rec[0].trim()) else {
            map.rejects.push(reject(RowReason::InvalidField("symbol")));
            continue;
        };
        let sector_name = rec[2].trim();
        if sector_name.is_empty() {
            map.rejects.push(reject(RowReason::MissingField("sector")));
            continue;
        }
        let next = SectorId(ids.len() as u32);
        let sector = *ids.entry(sector_name.to_string()).or_insert_with(|| {
            map.sectors.push(Sector { id: next, name: sector_name.to_string() });
            next
        });
        map.stocks.push(Stock { symbol, name: rec[1].trim().to_string(), sector });
    }
    Ok(map)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoadedNews {
    pub news: Vec<NewsDoc>,
    pub rejects: Vec<RowRejection>,
}

fn parse_news_line(text: &str, line_index: u64, dict: &MentionDictionary) -> Result<NewsDoc, RowReason> {
    let Ok(Value::Object(obj)) = serde_json::from_str::<Value>(text) else {
        return Err(RowReason::NotAnObject);
    };
    let string = |obj: &Map<String, Value>, name: &'static str| match obj.get(name) {
        None | Some(Value::Null) => Err(RowReason::MissingField(name)),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(RowReason::InvalidField(name)),
    };
    let media = string(&obj, "media")?;
    let date = string(&obj, "date")?;
    let content = string(&obj, "content")?;
    let timestamp = Timestamp::parse(&date).map_err(|_| RowReason::InvalidField("date"))?;
    let doc_id = match obj.get("doc_id") {
        None => u32::try_from(line_index).map_err(|_| RowReason::InvalidField("doc_id"))?,
        Some(v) => v.as_u64().and_then(|n| u32::try_from(n).ok()).ok_or(RowReason::InvalidField("doc_id"))?,
    };
    let mentions = dict.extract(&content);
    Ok(NewsDoc { doc_id: DocId(doc_id), media, timestamp, content, mentions })
}

/// Newline-delimited JSON records; mentions come from `dict`. Blank lines
/// are skipped.
pub fn load_news(path: &Path, dict: &MentionDictionary) -> Result<LoadedNews, IngestError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = LoadedNews::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_news_line(&line, i as u64, dict) {
            Ok(doc) => out.news.push(doc),
            Err(reason) => out.rejects.push(RowRejection { path: path.to_path_buf(), line: i as u64 + 1, reason }),
        }
    }
    Ok(out)
}

/// Everything read from a dataset directory, before validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoadedDataset {
    pub raw: RawDataset,
    pub duplicate_bars: usize,
    pub rejects: Vec<RowRejection>,
}

pub fn read_dataset_dir(dir: &Path) -> Result<LoadedDataset, IngestError> {
    let map = load_sector_map(&dir.join("stocks.csv"))?;
    let bars_dir = dir.join("bars");
    let mut bar_files: Vec<PathBuf> = Vec::new();
    if bars_dir.is_dir() {
        for entry in fs::read_dir(&bars_dir).map_err(|e| io_err(&bars_dir, e))? {
            let path = entry.map_err(|e| io_err(&bars_dir, e))?.path();
            if path.extension().is_some_and(|x| x == "csv") {
                bar_files.push(path);
            }
        }
    }
    bar_files.sort();
    let bars = load_ohlc_csvs(&bar_files)?;
    let dict = MentionDictionary::new(&map.stocks);
    let news = load_news(&dir.join("news.jsonl"), &dict)?;

    let mut rejects = map.rejects;
    rejects.extend(bars.rejects);
    rejects.extend(news.rejects);
    Ok(LoadedDataset {
        raw: RawDataset { sectors: map.sectors, stocks: map.stocks, news: news.news, bars: bars.bars },
        duplicate_bars: bars.duplicates,
        rejects,
    })
}

/// Reads and validates a dataset directory.
pub fn load_dataset_dir(dir: &Path) -> Result<(Validated, LoadedDataset), IngestError> {
    let loaded = read_dataset_dir(dir)?;
    let validated = validate_dataset(loaded.raw.clone())?;
    Ok((validated, loaded))
}

/// Writes the directory layout read by [`load_dataset_dir`]. Sectors
/// without stocks are not representable in the sector map and are dropped.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<(), IngestError> {
    let bars_dir = dir.join("bars");
    fs::create_dir_all(&bars_dir).map_err(|e| io_err(&bars_dir, e))?;

    let stocks_path = dir.join("stocks.csv");
    let mut w = csv::Writer::from_path(&stocks_path).map_err(|e| io_err(&stocks_path, e))?;
    w.write_record(SECTOR_MAP_HEADER).map_err(|e| io_err(&stocks_path, e))?;
    for stock in dataset.stocks() {
        let sector = dataset.sector(stock.sector).map(|s| s.name.as_str()).unwrap_or_default();
        w.write_record([stock.symbol.as_str(), &stock.name, sector]).map_err(|e| io_err(&stocks_path, e))?;
    }
    w.flush().map_err(|e| io_err(&stocks_path, e))?;

    let mut by_symbol: BTreeMap<&str, Vec<&OhlcBar>> = BTreeMap::new();
    for bar in dataset.bars() {
        by_symbol.entry(bar.symbol.as_str()).or_default().push(bar);
    }
    for (symbol, bars) in by_symbol {
        let path = bars_dir.join(format!("{symbol}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(OHLC_HEADER).map_err(|e| io_err(&path, e))?;
        for b in bars {
            w.write_record([
                b.symbol.to_string(),
                b.timestamp.to_string(),
                b.open.to_string(),
                b.high.to_string(),
                b.low.to_string(),
                b.close.to_string(),
                b.volume.to_string(),
            ])
            .map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
    }

    let news_path = dir.join("news.jsonl");
    let file = File::create(&news_path).map_err(|e| io_err(&news_path, e))?;
    let mut w = BufWriter::new(file);
    for doc in dataset.news() {
        let mut obj = Map::new();
        obj.insert("doc_id".into(), Value::from(doc.doc_id.0));
        obj.insert("media".into(), Value::String(doc.media.clone()));
        obj.insert("date".into(), Value::String(doc.timestamp.to_string()));
        obj.insert("content".into(), Value::String(doc.content.clone()));
        writeln!(w, "{}", Value::Object(obj)).map_err(|e| io_err(&news_path, e))?;
    }
    w.flush().map_err(|e| io_err(&news_path, e))?;
    Ok(())
}
