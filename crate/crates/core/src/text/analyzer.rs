use std::collections::BTreeSet;

use crate::model::EsgLexicon;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Ordinal of the token within the stream.
    pub position: u32,
    /// Byte offset of the token in the lowercased source text.
    pub offset: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }
}

/// Standard analyzer: lowercase, split on every non-alphanumeric character,
/// drop empty pieces. No stemming and no stop words.
pub fn tokenize(text: &str) -> TokenStream {
    let mut tokens = Vec::new();
    for_each_token(text, |offset, tok| {
        let position = tokens.len() as u32;
        tokens.push(Token { text: tok.to_string(), position, offset });
    });
    TokenStream { tokens }
}

/// Calls `f(offset, token)` for every token of `text` without allocating a
/// `Token` per hit.
pub fn for_each_token<F: FnMut(usize, &str)>(text: &str, mut f: F) {
    let lowered;
    let text = if text.bytes().any(|b| b.is_ascii_uppercase() || b >= 0x80) {
        lowered = text.to_lowercase();
        lowered.as_str()
    } else {
        text
    };
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            f(s, &text[s..i]);
        }
    }
    if let Some(s) = start {
        f(s, &text[s..]);
    }
}

/// Analyzed, de-duplicated query terms in ascending order. Scorers iterate
/// the terms in this order, which keeps floating-point sums reproducible.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryTerms(Vec<String>);

impl QueryTerms {
    pub fn parse(text: &str) -> Self {
        let mut set = BTreeSet::new();
        for_each_token(text, |_, t| {
            set.insert(t.to_string());
        });
        QueryTerms(set.into_iter().collect())
    }

    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for term in terms {
            for_each_token(term.as_ref(), |_, t| {
                set.insert(t.to_string());
            });
        }
        QueryTerms(set.into_iter().collect())
    }

    pub fn from_lexicon(lexicon: &EsgLexicon) -> Self {
        QueryTerms(lexicon.terms().map(str::to_string).collect())
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
