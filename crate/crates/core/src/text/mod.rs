//! Text analysis, the inverted index and the scoring functions.

mod analyzer;
pub mod codec;
mod index;
mod scoring;
mod search;

use thiserror::Error;

use crate::model::DocId;

pub use analyzer::{for_each_token, tokenize, QueryTerms, Token, TokenStream};
pub use index::{CollectionStats, CorpusStats, GlobalStats, InvertedIndex, Posting};
pub use scoring::{
    bm25_idf, bm25_score, bm25_score_with, bm25_term_weight, tsrank_score, Bm25Params, TokenVector,
};
pub use search::{rank_cmp, search, search_with};
pub(crate) use search::top_k;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TextError {
    #[error("document {0} already indexed")]
    DuplicateDoc(DocId),
    #[error("document {0} is not in the index")]
    UnknownDoc(DocId),
    #[error("corrupt index file: {0}")]
    Codec(String),
    #[error("{0}: {1}")]
    Io(String, String),
}
