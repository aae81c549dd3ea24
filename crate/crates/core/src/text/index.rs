use std::collections::HashMap;

use super::analyzer::for_each_token;
use super::TextError;
use crate::model::DocId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Posting {
    pub doc_id: DocId,
    pub tf: u32,
    /// Token ordinals; kept for phrase queries, unused by the scorers.
    pub positions: Vec<u32>,
}

/// Document count and total token count of a collection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub doc_count: u64,
    pub total_len: u64,
}

impl CorpusStats {
    pub fn avg_doc_len(&self) -> f64 {
        if self.doc_count == 0 {
            0.0
        } else {
            self.total_len as f64 / self.doc_count as f64
        }
    }
}

/// Statistics BM25 needs beyond a single posting: N, average length and df.
pub trait CollectionStats {
    fn corpus(&self) -> CorpusStats;
    fn doc_freq(&self, term: &str) -> u64;
}

/// Term to postings map. Built single-threaded, then only read.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvertedIndex {
    postings: HashMap<String, Vec<Posting>>,
    doc_lengths: HashMap<DocId, u32>,
    total_len: u64,
}

impl InvertedIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn build<'a, I>(docs: I) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = (DocId, &'a str)>,
    {
        let mut index = InvertedIndex::new();
        for (doc_id, text) in docs {
            index.insert(doc_id, text)?;
        }
        Ok(index)
    }

    pub fn insert(&mut self, doc_id: DocId, text: &str) -> Result<(), TextError> {
        if self.doc_lengths.contains_key(&doc_id) {
            return Err(TextError::DuplicateDoc(doc_id));
        }
        let mut local: HashMap<String, Vec<u32>> = HashMap::new();
        let mut len = 0u32;
        for_each_token(text, |_, tok| {
            match local.get_mut(tok) {
                Some(positions) => positions.push(len),
                None => {
                    local.insert(tok.to_string(), vec![len]);
                }
            }
            len += 1;
        });
        for (term, positions) in local {
            let list = self.postings.entry(term).or_default();
            let posting = Posting { doc_id, tf: positions.len() as u32, positions };
            match list.last() {
                Some(last) if last.doc_id > doc_id => {
                    let at = list.partition_point(|p| p.doc_id < doc_id);
                    list.insert(at, posting);
                }
                _ => list.push(posting),
            }
        }
        self.doc_lengths.insert(doc_id, len);
        self.total_len += u64::from(len);
        Ok(())
    }

    pub(crate) fn from_parts(
        postings: HashMap<String, Vec<Posting>>,
        doc_lengths: HashMap<DocId, u32>,
    ) -> Self {
        let total_len = doc_lengths.values().map(|&l| u64::from(l)).sum();
        InvertedIndex { postings, doc_lengths, total_len }
    }

    /// Sorted by document id.
    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn df(&self, term: &str) -> u64 {
        self.postings(term).len() as u64
    }

    pub fn doc_count(&self) -> u64 {
        self.doc_lengths.len() as u64
    }

    pub fn doc_len(&self, doc_id: DocId) -> Option<u32> {
        self.doc_lengths.get(&doc_id).copied()
    }

    pub fn contains(&self, doc_id: DocId) -> bool {
        self.doc_lengths.contains_key(&doc_id)
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.corpus().avg_doc_len()
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    /// Terms in ascending order.
    pub fn sorted_terms(&self) -> Vec<&str> {
        let mut terms: Vec<&str> = self.postings.keys().map(String::as_str).collect();
        terms.sort_unstable();
        terms
    }

    /// Document ids in ascending order.
    pub fn sorted_docs(&self) -> Vec<(DocId, u32)> {
        let mut docs: Vec<(DocId, u32)> = self.doc_lengths.iter().map(|(&d, &l)| (d, l)).collect();
        docs.sort_unstable();
        docs
    }
}

impl CollectionStats for InvertedIndex {
    fn corpus(&self) -> CorpusStats {
        CorpusStats { doc_count: self.doc_count(), total_len: self.total_len }
    }

    fn doc_freq(&self, term: &str) -> u64 {
        self.df(term)
    }
}

/// Corpus statistics aggregated over several indexes (shards).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GlobalStats {
    corpus: CorpusStats,
    df: HashMap<String, u64>,
}

impl GlobalStats {
    pub fn aggregate<'a, I: IntoIterator<Item = &'a InvertedIndex>>(indexes: I) -> Self {
        let mut stats = GlobalStats::default();
        for index in indexes {
            let c = index.corpus();
            stats.corpus.doc_count += c.doc_count;
            stats.corpus.total_len += c.total_len;
            for (term, list) in &index.postings {
                *stats.df.entry(term.clone()).or_insert(0) += list.len() as u64;
            }
        }
        stats
    }
}

impl CollectionStats for GlobalStats {
    fn corpus(&self) -> CorpusStats {
        self.corpus
    }

    fn doc_freq(&self, term: &str) -> u64 {
        self.df.get(term).copied().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_postings() {
        let index = InvertedIndex::build([(DocId(1), "esg now"), (DocId(2), "esg esg later")]).unwrap();
        let esg: Vec<(DocId, u32)> = index.postings("esg").iter().map(|p| (p.doc_id, p.tf)).collect();
        assert_eq!(esg, [(DocId(1), 1), (DocId(2), 2)]);
        assert_eq!(index.postings("esg")[1].positions, [0, 1]);
        assert_eq!(index.avg_doc_len(), 2.5);
        assert_eq!(index.doc_count(), 2);
    }

    #[test]
    fn empty_index() {
        let index = InvertedIndex::build(std::iter::empty()).unwrap();
        assert_eq!(index.doc_count(), 0);
        assert_eq!(index.avg_doc_len(), 0.0);
        assert!(index.postings("esg").is_empty());
    }

    #[test]
    fn duplicate_doc_is_an_error() {
        let err = InvertedIndex::build([(DocId(3), "a"), (DocId(3), "b")]).unwrap_err();
        assert_eq!(err, TextError::DuplicateDoc(DocId(3)));
    }

    #[test]
    fn out_of_order_inserts_keep_postings_sorted() {
        let index =
            InvertedIndex::build([(DocId(9), "x"), (DocId(2), "x y"), (DocId(5), "x")]).unwrap();
        let ids: Vec<u32> = index.postings("x").iter().map(|p| p.doc_id.0).collect();
        assert_eq!(ids, [2, 5, 9]);
    }

    #[test]
    fn global_stats_sum_shards() {
        let a = InvertedIndex::build([(DocId(0), "esg a"), (DocId(2), "b")]).unwrap();
        let b = InvertedIndex::build([(DocId(1), "esg esg c")]).unwrap();
        let whole =
            InvertedIndex::build([(DocId(0), "esg a"), (DocId(1), "esg esg c"), (DocId(2), "b")])
                .unwrap();
        let g = GlobalStats::aggregate([&a, &b]);
        assert_eq!(g.corpus(), whole.corpus());
        assert_eq!(g.doc_freq("esg"), whole.df("esg"));
        assert_eq!(g.doc_freq("zzz"), 0);
    }
}
