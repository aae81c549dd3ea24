use std::collections::{BTreeSet, HashMap};

use crate::model::{Stock, Symbol};
use crate::text::for_each_token;

/// Phrase dictionary linking article text to stocks by ticker or company
/// name.
#[derive(Clone, Debug, Default)]
pub struct MentionDictionary {
    /// Space-joined lowercase tokens -> stock.
    phrases: HashMap<String, Symbol>,
    /// Every token that starts some phrase.
    heads: HashMap<String, usize>,
    max_len: usize,
}

impl MentionDictionary {
    /// When two stocks share a phrase, the one listed first keeps it.
    pub fn new(stocks: &[Stock]) -> Self {
        let mut dict = MentionDictionary::default();
        for stock in stocks {
            dict.add(stock.symbol.as_str(), &stock.symbol);
            dict.add(&stock.name, &stock.symbol);
        }
        dict
    }

    fn add(&mut self, phrase: &str, symbol: &Symbol) {
        let mut tokens = Vec::new();
        for_each_token(phrase, |_, t| tokens.push(t.to_string()));
        if tokens.is_empty() {
            return;
        }
        let key = tokens.join(" ");
        if self.phrases.contains_key(&key) {
            return;
        }
        self.phrases.insert(key, symbol.clone());
        let longest = self.heads.entry(tokens[0].clone()).or_insert(0);
        *longest = (*longest).max(tokens.len());
        self.max_len = self.max_len.max(tokens.len());
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Case-insensitive, longest match first, never across a sentence
    /// boundary. Sorted and de-duplicated.
    pub fn extract(&self, content: &str) -> Vec<Symbol> {
        let mut found = BTreeSet::new();
        let mut tokens = Vec::new();
        for sentence in content.split(['.', '!', '?']) {
            tokens.clear();
            for_each_token(sentence, |_, t| tokens.push(t.to_string()));
            let mut i = 0;
            while i < tokens.len() {
                let Some(&longest) = self.heads.get(&tokens[i]) else {
                    i += 1;
                    continue;
                };
                let mut step = 1;
                for len in (1..=longest.min(tokens.len() - i)).rev() {
                    if let Some(symbol) = self.phrases.get(&tokens[i..i + len].join(" ")) {
                        found.insert(symbol.clone());
                        step = len;
                        break;
                    }
                }
                i += step;
            }
        }
        found.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SectorId;

    fn stocks() -> Vec<Stock> {
        let s = |sym: &str, name: &str| Stock { symbol: Symbol::new(sym), name: name.into(), sector: SectorId(0) };
        vec![s("TATASTEEL", "Tata Steel"), s("TATAPOWER", "Tata Power"), s("TATA", "Tata Group"), s("SBIN", "State Bank of India")]
    }

    fn syms(v: &[Symbol]) -> Vec<&str> {
        v.iter().map(Symbol::as_str).collect()
    }

    #[test]
    fn names_and_tickers_match_case_insensitively() {
        let d = MentionDictionary::new(&stocks());
        assert_eq!(syms(&d.extract("Tata Steel cuts emissions")), ["TATASTEEL"]);
        assert_eq!(syms(&d.extract("sbin and STATE BANK OF INDIA rally")), ["SBIN"]);
        assert!(d.extract("Nothing to see here").is_empty());
    }

    #[test]
    fn longest_match_wins() {
        let d = MentionDictionary::new(&stocks());
        // "tata" alone is the TATA ticker, "tata power" the longer name
        assert_eq!(syms(&d.extract("Tata Power expands")), ["TATAPOWER"]);
        assert_eq!(syms(&d.extract("Tata expands")), ["TATA"]);
    }

    #[test]
    fn names_do_not_span_sentences() {
        let d = MentionDictionary::new(&stocks());
        assert_eq!(syms(&d.extract("Buy Tata. Steel prices fell")), ["TATA"]);
    }
}
