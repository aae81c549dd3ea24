//! Versioned binary layout of an [`InvertedIndex`].
//!
//! All integers are little-endian `u32`:
//!
//! ```text
//! magic        5 bytes  "ESGX1"
//! doc_count    u32
//! docs         doc_count x { doc_id u32, doc_len u32 }        ascending doc_id
//! term_count   u32
//! terms        term_count x {                                  ascending term bytes
//!                term_len u32, term utf-8 bytes,
//!                posting_count u32,
//!                posting_count x { doc_id u32, tf u32, positions tf x u32 }
//!              }
//! ```
//!
//! The encoding is canonical: equal indexes encode to identical bytes.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::index::{InvertedIndex, Posting};
use super::TextError;
use crate::model::DocId;

pub const MAGIC: &[u8; 5] = b"ESGX1";

pub fn encode(index: &InvertedIndex) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    let docs = index.sorted_docs();
    put(&mut out, docs.len() as u32);
    for (doc_id, len) in docs {
        put(&mut out, doc_id.0);
        put(&mut out, len);
    }
    let terms = index.sorted_terms();
    put(&mut out, terms.len() as u32);
    for term in terms {
        put(&mut out, term.len() as u32);
        out.extend_from_slice(term.as_bytes());
        let postings = index.postings(term);
        put(&mut out, postings.len() as u32);
        for p in postings {
            put(&mut out, p.doc_id.0);
            put(&mut out, p.tf);
            for &pos in &p.positions {
                put(&mut out, pos);
            }
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<InvertedIndex, TextError> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(TextError::Codec("bad magic".into()));
    }
    let doc_count = r.u32()? as usize;
    let mut doc_lengths = HashMap::with_capacity(doc_count);
    let mut prev = None;
    for _ in 0..doc_count {
        let doc_id = DocId(r.u32()?);
        if prev.is_some_and(|p| p >= doc_id) {
            return Err(TextError::Codec("document table not strictly ascending".into()));
        }
        prev = Some(doc_id);
        doc_lengths.insert(doc_id, r.u32()?);
    }
    let term_count = r.u32()? as usize;
    let mut postings = HashMap::with_capacity(term_count);
    for _ in 0..term_count {
        let len = r.u32()? as usize;
        let term = std::str::from_utf8(r.take(len)?)
            .map_err(|_| TextError::Codec("term is not utf-8".into()))?
            .to_string();
        let n = r.u32()? as usize;
        let mut list: Vec<Posting> = Vec::with_capacity(n.min(bytes.len()));
        for _ in 0..n {
            let doc_id = DocId(r.u32()?);
            if !doc_lengths.contains_key(&doc_id) {
                return Err(TextError::Codec(format!("posting references unknown doc {doc_id}")));
            }
            if list.last().is_some_and(|p| p.doc_id >= doc_id) {
                return Err(TextError::Codec(format!("postings of {term:?} not ascending")));
            }
            let tf = r.u32()?;
            let positions = (0..tf).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            list.push(Posting { doc_id, tf, positions });
        }
        if postings.insert(term, list).is_some() {
            return Err(TextError::Codec("duplicate term".into()));
        }
    }
    if r.at != bytes.len() {
        return Err(TextError::Codec("trailing bytes".into()));
    }
    Ok(InvertedIndex::from_parts(postings, doc_lengths))
}

pub fn write_index(index: &InvertedIndex, path: &Path) -> Result<(), TextError> {
    fs::write(path, encode(index)).map_err(|e| TextError::Io(path.display().to_string(), e.to_string()))
}

pub fn read_index(path: &Path) -> Result<InvertedIndex, TextError> {
    let bytes = fs::read(path).map_err(|e| TextError::Io(path.display().to_string(), e.to_string()))?;
    decode(&bytes)
}

fn put(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], TextError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| TextError::Codec("truncated input".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, TextError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> InvertedIndex {
        InvertedIndex::build([(DocId(4), "esg esg now"), (DocId(1), "carbon now")]).unwrap()
    }

    #[test]
    fn layout_prefix() {
        let bytes = encode(&sample());
        assert_eq!(&bytes[..5], b"ESGX1");
        assert_eq!(&bytes[5..9], &2u32.to_le_bytes());
        // first document row is doc 1 (ascending), length 2
        assert_eq!(&bytes[9..17], &[1, 0, 0, 0, 2, 0, 0, 0]);
    }

    #[test]
    fn round_trip_and_rebuild_identity() {
        let a = sample();
        let decoded = decode(&encode(&a)).unwrap();
        assert_eq!(decoded, a);
        assert_eq!(encode(&sample()), encode(&a));
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode(&sample());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut trailing = bytes;
        trailing.push(0);
        assert!(decode(&trailing).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("news.esgx");
        write_index(&sample(), &path).unwrap();
        assert_eq!(read_index(&path).unwrap(), sample());
        assert!(read_index(&dir.path().join("missing")).is_err());
    }
}
