//! Directory round trip and malformed-row handling.

mod common;

use std::fs;
use std::path::PathBuf;

use esgbench_core::ingest::{
    generate, load_dataset_dir, load_news, load_ohlc_csvs, load_sector_map, write_dataset, GeneratorConfig,
    IngestError, MentionDictionary, RowReason,
};
use esgbench_core::model::{validate_dataset, RejectReason};
use proptest::prelude::*;

fn config() -> GeneratorConfig {
    GeneratorConfig { seed: 42, n_stocks: 9, n_sectors: 3, n_news: 400, days: 7, bars_per_day: 5, esg_fraction: 0.2 }
}

#[test]
fn generate_write_load_is_identity() {
    let ds = generate(&config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&ds, dir.path()).unwrap();
    let (validated, loaded) = load_dataset_dir(dir.path()).unwrap();
    assert!(loaded.rejects.is_empty(), "{:?}", loaded.rejects);
    assert_eq!(loaded.duplicate_bars, 0);
    assert!(validated.report.is_clean());
    assert_eq!(validated.dataset, ds);
}

#[test]
fn hand_fixture_round_trips() {
    let ds = common::ten_stock();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&ds, dir.path()).unwrap();
    let (validated, _) = load_dataset_dir(dir.path()).unwrap();
    // mentions are re-extracted from text, so compare everything else
    let back = validated.dataset;
    assert_eq!(back.stocks(), ds.stocks());
    assert_eq!(back.sectors(), ds.sectors());
    assert_eq!(back.bars(), ds.bars());
    for (a, b) in back.news().iter().zip(ds.news()) {
        assert_eq!((a.doc_id, &a.media, a.timestamp, &a.content), (b.doc_id, &b.media, b.timestamp, &b.content));
    }
    let tata = &back.news()[0];
    assert_eq!(tata.mentions.iter().map(|s| s.as_str()).collect::<Vec<_>>(), ["TATASTEEL"]);
}

fn write(dir: &std::path::Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn malformed_rows_get_exact_reasons() {
    let dir = tempfile::tempdir().unwrap();
    let bars = write(dir.path(), "bars.csv", common::MALFORMED_BARS);
    let loaded = load_ohlc_csvs(&[bars]).unwrap();
    assert_eq!(loaded.bars.len(), 1);
    let got: Vec<(u64, RowReason)> = loaded.rejects.iter().map(|r| (r.line, r.reason.clone())).collect();
    assert_eq!(got, common::malformed_bar_reasons());
    assert!(loaded.rejects[0].to_string().ends_with("bars.csv:3: invalid close"));

    let news = write(dir.path(), "news.jsonl", common::MALFORMED_NEWS);
    let loaded = load_news(&news, &MentionDictionary::default()).unwrap();
    assert_eq!(loaded.news.len(), 1);
    let got: Vec<(u64, RowReason)> = loaded.rejects.iter().map(|r| (r.line, r.reason.clone())).collect();
    assert_eq!(got, common::malformed_news_reasons());

    let map = write(dir.path(), "stocks.csv", "symbol,name,sector\nSBIN,State Bank,Financial Services\nbad!,X,Y\nTCS,Tata Consultancy,\n");
    let loaded = load_sector_map(&map).unwrap();
    assert_eq!(loaded.stocks.len(), 1);
    let got: Vec<RowReason> = loaded.rejects.iter().map(|r| r.reason.clone()).collect();
    assert_eq!(got, [RowReason::InvalidField("symbol"), RowReason::MissingField("sector")]);
}

#[test]
fn semantic_violations_reach_the_validation_report() {
    let dir = tempfile::tempdir().unwrap();
    let bars = write(
        dir.path(),
        "bars.csv",
        "symbol,timestamp,open,high,low,close,volume\n\
         SBIN,2023-07-03 09:15:00,5,4,3,4,1\n\
         SBIN,2023-07-03 09:16:00,3,4,5,4,1\n\
         SBIN,2023-07-03 09:17:00,0,4,3,4,1\n\
         NOPE,2023-07-03 09:18:00,3,4,3,4,1\n",
    );
    let map = write(dir.path(), "stocks.csv", "symbol,name,sector\nSBIN,State Bank,Financial Services\n");
    let sectors = load_sector_map(&map).unwrap();
    let raw = esgbench_core::model::RawDataset {
        sectors: sectors.sectors,
        stocks: sectors.stocks,
        bars: load_ohlc_csvs(&[bars]).unwrap().bars,
        ..Default::default()
    };
    let report = validate_dataset(raw).unwrap().report;
    let reasons: Vec<RejectReason> = report.rejected.iter().map(|r| r.reason.clone()).collect();
    assert_eq!(
        reasons,
        [
            RejectReason::OpenOutsideRange,
            RejectReason::LowExceedsHigh,
            RejectReason::NonPositivePrice,
            RejectReason::UnknownSymbol("NOPE".into()),
        ]
    );
}

#[test]
fn missing_directory_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_dataset_dir(&dir.path().join("absent")).unwrap_err();
    assert!(matches!(err, IngestError::Io { .. }));
    assert!(err.to_string().contains("absent"));
}

proptest! {
    #[test]
    fn mention_extraction_ignores_sentence_order(perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let ds = common::ten_stock();
        let dict = MentionDictionary::new(ds.stocks());
        let sentences = [
            "Tata Steel cuts carbon",
            "ICICI Bank raises funds",
            "Weather is mild",
            "SBIN steady",
            "Tata Consultancy Services expands",
            "Oil and Natural Gas Corporation drills",
        ];
        let base = dict.extract(&sentences.join(". "));
        let shuffled: Vec<&str> = perm.iter().map(|&i| sentences[i]).collect();
        prop_assert_eq!(dict.extract(&shuffled.join(". ")), base.clone());
        prop_assert_eq!(base.len(), 5);
    }
}
