use std::cmp::Ordering;
use std::collections::HashMap;

use super::analyzer::QueryTerms;
use super::index::{CollectionStats, InvertedIndex};
use super::scoring::{bm25_term_weight, Bm25Params};
use crate::model::DocId;

/// Score descending, doc id ascending.
pub fn rank_cmp(a: &(DocId, f64), b: &(DocId, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Top `k` documents containing at least one query term (all of them when
/// `k` is `None`).
pub fn search(index: &InvertedIndex, terms: &QueryTerms, k: Option<usize>, params: Bm25Params) -> Vec<(DocId, f64)> {
    search_with(index, index, terms, k, params)
}

/// Like [`search`] but scores with the supplied collection statistics.
pub fn search_with<S: CollectionStats + ?Sized>(
    index: &InvertedIndex,
    stats: &S,
    terms: &QueryTerms,
    k: Option<usize>,
    params: Bm25Params,
) -> Vec<(DocId, f64)> {
    let corpus = stats.corpus();
    let avg = corpus.avg_doc_len();
    // Term-at-a-time; terms arrive sorted so every document accumulates its
    // contributions in the same order as `bm25_score_with`.
    let mut acc: HashMap<DocId, f64> = HashMap::new();
    for term in terms.iter() {
        let postings = index.postings(term);
        if postings.is_empty() {
            continue;
        }
        let df = stats.doc_freq(term);
        for p in postings {
            let doc_len = index.doc_len(p.doc_id).unwrap_or(0);
            let w = bm25_term_weight(p.tf, df, corpus.doc_count, doc_len, avg, params);
            *acc.entry(p.doc_id).or_insert(0.0) += w;
        }
    }
    top_k(acc.into_iter().collect(), k)
}

pub(crate) fn top_k(mut ranked: Vec<(DocId, f64)>, k: Option<usize>) -> Vec<(DocId, f64)> {
    if let Some(k) = k {
        if k == 0 {
            return Vec::new();
        }
        if ranked.len() > k {
            ranked.select_nth_unstable_by(k - 1, rank_cmp);
            ranked.truncate(k);
        }
    }
    ranked.sort_unstable_by(rank_cmp);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn returns_only_matches() {
        let index = InvertedIndex::build([
            (DocId(0), "esg report"),
            (DocId(1), "quarterly results"),
            (DocId(2), "carbon esg"),
            (DocId(3), "carbon"),
        ])
        .unwrap();
        let hits = search(&index, &QueryTerms::parse("esg carbon"), Some(10), Bm25Params::default());
        assert_eq!(hits.len(), 3);
        assert_eq!(hits[0].0, DocId(2));
    }

    #[test]
    fn ties_break_on_lower_doc_id() {
        let index = InvertedIndex::build([(DocId(7), "esg x"), (DocId(3), "esg y")]).unwrap();
        let hits = search(&index, &QueryTerms::parse("esg"), Some(10), Bm25Params::default());
        assert_eq!(hits[0].1, hits[1].1);
        assert_eq!(hits.iter().map(|h| h.0).collect::<Vec<_>>(), [DocId(3), DocId(7)]);
    }

    #[test]
    fn k_truncates() {
        let index = InvertedIndex::build((0..20).map(|i| (DocId(i), "esg"))).unwrap();
        let q = QueryTerms::parse("esg");
        assert_eq!(search(&index, &q, Some(5), Bm25Params::default()).len(), 5);
        assert_eq!(search(&index, &q, None, Bm25Params::default()).len(), 20);
        assert!(search(&index, &q, Some(0), Bm25Params::default()).is_empty());
        let empty = InvertedIndex::new();
        assert!(search(&empty, &q, Some(5), Bm25Params::default()).is_empty());
    }
}
