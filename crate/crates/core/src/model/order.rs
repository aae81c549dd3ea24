use std::cmp::Ordering;

use super::{BarRow, SearchHit};

/// Fixed total order that makes result sets comparable across engines.
pub trait CanonicalOrder {
    fn canonical_cmp(&self, other: &Self) -> Ordering;
}

/// Score descending, then article timestamp descending, then symbol
/// ascending. The document id breaks any remaining tie.
impl CanonicalOrder for SearchHit {
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| other.date.cmp(&self.date))
            .then_with(|| self.symbol.cmp(&other.symbol))
            .then_with(|| self.doc_id.cmp(&other.doc_id))
            .then_with(|| self.media.cmp(&other.media))
    }
}

/// Symbol ascending, then bar timestamp ascending.
impl CanonicalOrder for BarRow {
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.bar
            .symbol
            .cmp(&other.bar.symbol)
            .then_with(|| self.bar.timestamp.cmp(&other.bar.timestamp))
            .then_with(|| self.tag.cmp(&other.tag))
            .then_with(|| self.anchor.cmp(&other.anchor))
            .then_with(|| self.via.cmp(&other.via))
    }
}

/// Stable sort into canonical order.
pub fn canonical_order<T: CanonicalOrder>(mut rows: Vec<T>) -> Vec<T> {
    rows.sort_by(T::canonical_cmp);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DocId, Symbol, Timestamp};

    fn hit(symbol: &str, date: &str, media: &str, score: f64) -> SearchHit {
        SearchHit {
            doc_id: DocId(0),
            symbol: Symbol::new(symbol),
            date: Timestamp::parse(date).unwrap(),
            media: media.to_string(),
            score,
        }
    }

    #[test]
    fn later_date_wins_a_score_tie() {
        let rows = vec![
            hit("TATASTEEL", "2023-07-02 21:17:12.654880", "Tata Steel", 1.0),
            hit("TATASTEEL", "2023-07-12 21:17:12.688923", "Tata Steel", 1.0),
        ];
        let sorted = canonical_order(rows);
        assert_eq!(sorted[0].date.to_string(), "2023-07-12 21:17:12.688923");
    }

    #[test]
    fn empty_stays_empty() {
        assert!(canonical_order(Vec::<SearchHit>::new()).is_empty());
    }

    #[test]
    fn published_search_table_is_already_canonical() {
        let table = vec![
            hit("TATASTEEL", "2023-07-28 21:17:13.284140", "Tata Steel", 16.650661),
            hit("SBIN", "2023-07-02 21:27:20.801828", "Biodiesel Magazine", 8.998884),
            hit("TATASTEEL", "2023-07-02 21:17:12.654880", "Tata Steel", 6.438373),
            hit("TATASTEEL", "2023-07-12 21:17:12.688923", "Tata Steel", 5.392860),
            hit("INFY", "2023-07-03 06:45:11.856426", "Infosys", 4.232280),
        ];
        assert_eq!(canonical_order(table.clone()), table);
    }
}
