//! The two scoring families: BM25 over an inverted index, and a
//! frequency rank over per-row token vectors.

use super::analyzer::{for_each_token, QueryTerms};
use super::index::{CollectionStats, InvertedIndex};
use super::TextError;
use crate::model::DocId;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

/// `ln(1 + (N - df + 0.5) / (df + 0.5))`; never negative.
pub fn bm25_idf(doc_count: u64, df: u64) -> f64 {
    let n = doc_count as f64;
    let df = df as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// Contribution of one query term to one document.
pub fn bm25_term_weight(tf: u32, df: u64, doc_count: u64, doc_len: u32, avg_doc_len: f64, params: Bm25Params) -> f64 {
    if tf == 0 {
        return 0.0;
    }
    let tf = f64::from(tf);
    let norm = if avg_doc_len > 0.0 {
        1.0 - params.b + params.b * f64::from(doc_len) / avg_doc_len
    } else {
        1.0
    };
    bm25_idf(doc_count, df) * tf * (params.k1 + 1.0) / (tf + params.k1 * norm)
}

/// BM25 of one document using the index's own statistics.
pub fn bm25_score(index: &InvertedIndex, terms: &QueryTerms, doc_id: DocId, params: Bm25Params) -> Result<f64, TextError> {
    bm25_score_with(index, index, terms, doc_id, params)
}

/// BM25 of one document of `index` using externally supplied statistics,
/// e.g. the global statistics of a sharded collection.
pub fn bm25_score_with<S: CollectionStats + ?Sized>(
    index: &InvertedIndex,
    stats: &S,
    terms: &QueryTerms,
    doc_id: DocId,
    params: Bm25Params,
) -> Result<f64, TextError> {
    let doc_len = index.doc_len(doc_id).ok_or(TextError::UnknownDoc(doc_id))?;
    let corpus = stats.corpus();
    let avg = corpus.avg_doc_len();
    let mut score = 0.0;
    for term in terms.iter() {
        let postings = index.postings(term);
        if let Ok(i) = postings.binary_search_by_key(&doc_id, |p| p.doc_id) {
            let df = stats.doc_freq(term);
            score += bm25_term_weight(postings[i].tf, df, corpus.doc_count, doc_len, avg, params);
        }
    }
    Ok(score)
}

/// Per-row token frequencies, sorted by term: the relational engine's
/// precomputed full-text column.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenVector {
    entries: Vec<(Box<str>, u32)>,
    doc_len: u32,
}

impl TokenVector {
    pub fn from_text(text: &str) -> Self {
        let mut tokens: Vec<Box<str>> = Vec::new();
        for_each_token(text, |_, t| tokens.push(t.into()));
        let doc_len = tokens.len() as u32;
        tokens.sort_unstable();
        let mut entries: Vec<(Box<str>, u32)> = Vec::new();
        for tok in tokens {
            match entries.last_mut() {
                Some((last, n)) if *last == tok => *n += 1,
                _ => entries.push((tok, 1)),
            }
        }
        TokenVector { entries, doc_len }
    }

    pub fn frequency(&self, term: &str) -> u32 {
        self.entries
            .binary_search_by(|(t, _)| (**t).cmp(term))
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Number of tokens in the source document.
    pub fn doc_len(&self) -> u32 {
        self.doc_len
    }

    /// Number of distinct terms.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.entries.iter().map(|(t, n)| (&**t, *n))
    }
}

/// Sum over matched terms of `tf / (tf + 1)`, divided by `1 + ln(doc_len)`.
pub fn tsrank_score(vector: &TokenVector, terms: &QueryTerms) -> f64 {
    let mut sum = 0.0;
    for term in terms.iter() {
        let tf = vector.frequency(term);
        if tf > 0 {
            let tf = f64::from(tf);
            sum += tf / (tf + 1.0);
        }
    }
    if sum == 0.0 {
        return 0.0;
    }
    sum / (1.0 + f64::from(vector.doc_len()).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_term_scores_zero() {
        let index = InvertedIndex::build([(DocId(0), "tata steel"), (DocId(1), "infosys")]).unwrap();
        let q = QueryTerms::parse("carbon");
        assert_eq!(bm25_score(&index, &q, DocId(0), Bm25Params::default()).unwrap(), 0.0);
    }

    #[test]
    fn single_doc_matches_hand_evaluation() {
        // N = 1, df = 1, tf = 1, dl = avgdl = 1:
        // idf = ln(1 + 0.5 / 1.5), tf part = 2.2 / (1 + 1.2) = 1.
        let index = InvertedIndex::build([(DocId(0), "esg")]).unwrap();
        let q = QueryTerms::parse("esg");
        let got = bm25_score(&index, &q, DocId(0), Bm25Params::default()).unwrap();
        let expected = (1.0f64 + 0.5 / 1.5).ln();
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
        assert!((got - 0.287_682_072_451_780_9).abs() < 1e-15);
    }

    #[test]
    fn unknown_doc_is_an_error() {
        let index = InvertedIndex::build([(DocId(0), "esg")]).unwrap();
        let err = bm25_score(&index, &QueryTerms::parse("esg"), DocId(7), Bm25Params::default());
        assert_eq!(err, Err(TextError::UnknownDoc(DocId(7))));
    }

    #[test]
    fn tsrank_hand_values() {
        let q = QueryTerms::parse("esg");
        assert_eq!(tsrank_score(&TokenVector::from_text("esg"), &q), 0.5);
        assert_eq!(tsrank_score(&TokenVector::from_text("tata steel"), &q), 0.0);
        assert_eq!(tsrank_score(&TokenVector::from_text(""), &q), 0.0);
        // tf = 2, len = 3: (2/3) / (1 + ln 3)
        let v = TokenVector::from_text("esg ESG report");
        let expected = (2.0 / 3.0) / (1.0 + 3f64.ln());
        assert!((tsrank_score(&v, &q) - expected).abs() < 1e-15);
    }

    #[test]
    fn token_vector_counts() {
        let v = TokenVector::from_text("b a b c b");
        assert_eq!(v.iter().collect::<Vec<_>>(), [("a", 1), ("b", 3), ("c", 1)]);
        assert_eq!(v.doc_len(), 5);
        assert_eq!(v.frequency("z"), 0);
    }
}
