use std::collections::HashSet;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::IngestError;
use crate::model::{
    validate_dataset, Dataset, Day, DocId, EsgLexicon, NewsDoc, OhlcBar, Price, RawDataset, Sector,
    SectorId, Stock, Symbol, Timestamp,
};

/// Shape of a synthetic dataset. Equal configs give identical datasets.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_stocks: usize,
    pub n_sectors: usize,
    pub n_news: usize,
    /// Trading days (weekdays) of bars, starting 2023-06-01.
    pub days: usize,
    /// Evenly spaced over the 375-minute session from 09:15.
    pub bars_per_day: usize,
    /// Share of articles that contain lexicon terms; rounded to a count.
    pub esg_fraction: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 42,
            n_stocks: 50,
            n_sectors: 5,
            n_news: 10_000,
            days: 42,
            bars_per_day: 8,
            esg_fraction: 0.1,
        }
    }
}

const SESSION_MINUTES: usize = 375;

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        let bad = |m: &str| Err(IngestError::Config(m.to_string()));
        if self.n_stocks == 0 {
            return bad("n_stocks must be at least 1");
        }
        if self.n_sectors == 0 || self.n_sectors > self.n_stocks {
            return bad("n_sectors must be between 1 and n_stocks");
        }
        if self.days == 0 {
            return bad("days must be at least 1");
        }
        if self.bars_per_day == 0 || self.bars_per_day > SESSION_MINUTES {
            return bad("bars_per_day must be between 1 and 375");
        }
        if !(0.0..=1.0).contains(&self.esg_fraction) {
            return bad("esg_fraction must lie in [0, 1]");
        }
        Ok(())
    }

    /// Number of articles that carry lexicon terms.
    pub fn esg_count(&self) -> usize {
        ((self.esg_fraction * self.n_news as f64).round() as usize).min(self.n_news)
    }

    pub fn trading_days(&self) -> Vec<Day> {
        let mut out = Vec::with_capacity(self.days);
        let mut d = Day::from_ymd(2023, 6, 1).expect("valid start date");
        while out.len() < self.days {
            if !d.is_weekend() {
                out.push(d);
            }
            d = d.offset(1);
        }
        out
    }
}

pub const MEDIA: [&str; 8] = [
    "Biodiesel Magazine",
    "Equitypandit",
    "Business Standard",
    "Moneycontrol",
    "Economic Times",
    "Mint",
    "Financial Express",
    "Reuters",
];

/// Article body vocabulary. Disjoint from the default lexicon, the sector
/// words and every generated company token.
pub const FILLER_WORDS: [&str; 48] = [
    "market", "shares", "investors", "quarter", "report", "growth", "price", "trading", "analysts",
    "expect", "board", "said", "today", "week", "plans", "strong", "results", "stake", "revenue",
    "profit", "outlook", "demand", "index", "gains", "losses", "session", "rally", "update",
    "guidance", "margin", "capital", "orders", "exports", "capacity", "deal", "approval", "target",
    "brokerage", "earnings", "dividend", "volume", "futures", "midcap", "benchmark", "rupee",
    "outflows", "inflows", "steady",
];

const SECTORS: [(&str, &str, &str); 12] = [
    ("Metals and Mining", "Metals", "MET"),
    ("Financial Services", "Finance", "FIN"),
    ("Information Technology", "Systems", "TEC"),
    ("Oil and Gas", "Petro", "OIL"),
    ("Consumer Goods", "Consumer", "CON"),
    ("Healthcare", "Pharma", "PHA"),
    ("Automobile", "Motors", "MOT"),
    ("Telecom", "Telecom", "TEL"),
    ("Construction", "Infra", "INF"),
    ("Chemicals", "Chemicals", "CHE"),
    ("Power", "Power", "PWR"),
    ("Media", "Media", "MED"),
];

const SYLLABLES: [&str; 16] = ["ka", "ro", "vin", "ta", "mel", "zu", "dor", "pra", "ni", "sha", "lek", "bo", "ra", "tem", "qui", "van"];

fn sector_spec(i: usize) -> (String, String, String) {
    match SECTORS.get(i) {
        Some((name, word, abbr)) => (name.to_string(), word.to_string(), abbr.to_string()),
        None => (format!("Sector {}", i + 1), "Holdings".into(), format!("S{}", i + 1)),
    }
}

fn company_token(rng: &mut ChaCha8Rng, taken: &mut HashSet<String>) -> String {
    let reserved: HashSet<String> = FILLER_WORDS
        .iter()
        .chain(EsgLexicon::DEFAULT_TERMS.iter())
        .map(|s| s.to_string())
        .chain(SECTORS.iter().map(|s| s.1.to_lowercase()))
        .collect();
    let mut parts = 3;
    loop {
        let token: String = (0..parts).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
        if !reserved.contains(&token) && taken.insert(token.clone()) {
            return token;
        }
        // widen the space if collisions pile up
        if taken.len() > 2000 {
            parts = 4;
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Generates the records without validating them.
pub fn generate_raw(config: &GeneratorConfig) -> Result<RawDataset, IngestError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let specs: Vec<_> = (0..config.n_sectors).map(sector_spec).collect();
    let sectors: Vec<Sector> = specs
        .iter()
        .enumerate()
        .map(|(i, (name, _, _))| Sector { id: SectorId(i as u32), name: name.clone() })
        .collect();

    let mut taken = HashSet::new();
    let mut stocks = Vec::with_capacity(config.n_stocks);
    for i in 0..config.n_stocks {
        let s = i % config.n_sectors;
        let (_, word, abbr) = &specs[s];
        let token = company_token(&mut rng, &mut taken);
        stocks.push(Stock {
            symbol: Symbol::new(&format!("{}{}", token.to_uppercase(), abbr)),
            name: format!("{} {}", capitalize(&token), word),
            sector: SectorId(s as u32),
        });
    }

    let days = config.trading_days();
    let step = (SESSION_MINUTES / config.bars_per_day) as u32;
    let mut bars = Vec::with_capacity(config.n_stocks * days.len() * config.bars_per_day);
    // 0.05 rupee tick
    const TICK: i64 = 500;
    for stock in &stocks {
        let mut close = rng.gen_range(100..=3000) * Price::SCALE;
        for &day in &days {
            for j in 0..config.bars_per_day as u32 {
                let minutes = 9 * 60 + 15 + j * step;
                let open = close;
                close = (open + rng.gen_range(-20..=20) * TICK).max(Price::SCALE);
                let high = open.max(close) + rng.gen_range(1..=10) * TICK;
                let low = open.min(close) - rng.gen_range(1..=10) * TICK;
                bars.push(OhlcBar {
                    symbol: stock.symbol.clone(),
                    timestamp: Timestamp::from_day_and_time(day, minutes / 60, minutes % 60, 0, 0),
                    open: Price::from_ticks(open),
                    high: Price::from_ticks(high),
                    low: Price::from_ticks(low),
                    close: Price::from_ticks(close),
                    volume: rng.gen_range(1_000..=100_000),
                });
            }
        }
    }

    let lexicon: Vec<&str> = EsgLexicon::DEFAULT_TERMS.to_vec();
    let esg: HashSet<usize> = sample(&mut rng, config.n_news, config.esg_count()).into_iter().collect();
    let first = days[0];
    let span = days[days.len() - 1].as_days() - first.as_days() + 1;
    let mut news = Vec::with_capacity(config.n_news);
    for i in 0..config.n_news {
        let day = first.offset(rng.gen_range(0..span));
        let timestamp = Timestamp::from_day_and_time(
            day,
            rng.gen_range(0..24),
            rng.gen_range(0..60),
            rng.gen_range(0..60),
            rng.gen_range(0..1_000_000),
        );
        let n_mentions = rng.gen_range(1..=3).min(stocks.len());
        let mut mentioned: Vec<&Stock> = sample(&mut rng, stocks.len(), n_mentions).into_iter().map(|k| &stocks[k]).collect();
        mentioned.sort_by(|a, b| a.symbol.cmp(&b.symbol));

        let n_sentences = rng.gen_range(3..=6);
        let mut sentences: Vec<Vec<String>> = (0..n_sentences)
            .map(|_| {
                let len = rng.gen_range(5..=10);
                (0..len).map(|_| FILLER_WORDS.choose(&mut rng).expect("non-empty").to_string()).collect()
            })
            .collect();
        let mut insert = |rng: &mut ChaCha8Rng, phrase: String| {
            let s = rng.gen_range(0..sentences.len());
            let at = rng.gen_range(0..=sentences[s].len());
            sentences[s].insert(at, phrase);
        };
        for stock in &mentioned {
            let phrase = if rng.gen_bool(0.5) { stock.name.clone() } else { stock.symbol.to_string() };
            insert(&mut rng, phrase);
        }
        if esg.contains(&i) {
            for _ in 0..rng.gen_range(1..=2) {
                let term = lexicon.choose(&mut rng).expect("non-empty").to_string();
                insert(&mut rng, term);
            }
        }
        let content = sentences
            .iter()
            .map(|words| capitalize(&words.join(" ")) + ".")
            .collect::<Vec<_>>()
            .join(" ");

        news.push(NewsDoc {
            doc_id: DocId(i as u32),
            media: MEDIA.choose(&mut rng).expect("non-empty").to_string(),
            timestamp,
            content,
            mentions: mentioned.iter().map(|s| s.symbol.clone()).collect(),
        });
    }

    Ok(RawDataset { sectors, stocks, news, bars })
}

/// Generates and validates; generated records always validate cleanly.
pub fn generate(config: &GeneratorConfig) -> Result<Dataset, IngestError> {
    let validated = validate_dataset(generate_raw(config)?)?;
    if let Some(r) = validated.report.rejected.first() {
        return Err(IngestError::Config(format!("generator produced an invalid record {}: {}", r.key, r.reason)));
    }
    Ok(validated.dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::MentionDictionary;

    fn small() -> GeneratorConfig {
        GeneratorConfig { n_stocks: 7, n_sectors: 3, n_news: 200, days: 6, bars_per_day: 4, esg_fraction: 0.25, ..Default::default() }
    }

    #[test]
    fn deterministic_for_a_seed() {
        assert_eq!(generate_raw(&small()).unwrap(), generate_raw(&small()).unwrap());
        let other = GeneratorConfig { seed: 7, ..small() };
        assert_ne!(generate_raw(&small()).unwrap(), generate_raw(&other).unwrap());
    }

    #[test]
    fn shape_follows_config() {
        let c = small();
        let raw = generate_raw(&c).unwrap();
        assert_eq!(raw.sectors.len(), 3);
        assert_eq!(raw.stocks[4].sector, SectorId(1));
        assert_eq!(raw.bars.len(), 7 * 6 * 4);
        assert_eq!(raw.news.len(), 200);
        assert!(raw.bars.iter().all(|b| !b.timestamp.day().is_weekend()));
        let lex = EsgLexicon::default();
        let esg = raw
            .news
            .iter()
            .filter(|d| crate::text::tokenize(&d.content).texts().any(|t| lex.contains(t)))
            .count();
        assert_eq!(esg, 50);
    }

    #[test]
    fn mentions_are_recoverable_from_text() {
        let raw = generate_raw(&small()).unwrap();
        let dict = MentionDictionary::new(&raw.stocks);
        for doc in &raw.news {
            assert_eq!(dict.extract(&doc.content), doc.mentions, "{}", doc.content);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        for c in [
            GeneratorConfig { n_sectors: 8, ..small() },
            GeneratorConfig { n_stocks: 0, ..small() },
            GeneratorConfig { esg_fraction: 1.5, ..small() },
            GeneratorConfig { bars_per_day: 0, ..small() },
        ] {
            assert!(matches!(generate(&c), Err(IngestError::Config(_))));
        }
    }

    #[test]
    fn filler_avoids_lexicon() {
        let lex = EsgLexicon::default();
        assert!(FILLER_WORDS.iter().all(|w| !lex.contains(w)));
    }
}
