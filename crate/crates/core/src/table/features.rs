use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::document::Table;
use crate::lexicon::{default_asset_lexicon, default_cashflow_lexicon, default_projection_lexicon, PhraseLexicon};
use crate::quantity::{count_signed_numbers_in_rows, extract_money, extract_year_series};
use crate::text::tokenize;

/// Lexicon hit counts for one piece of a table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconHits {
    pub asset: usize,
    pub cashflow: usize,
    pub projection: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableFeatureVector {
    pub monetary_count: usize,
    pub year_series_count: usize,
    pub longest_year_series_len: usize,
    pub positive_count: usize,
    pub negative_count: usize,
    pub row_count: usize,
    pub column_count: usize,
    pub header_bigram_hits: LexiconHits,
    /// Hits in the first cell of each body row.
    pub row_label_hits: LexiconHits,
    pub caption_bigram_hits: LexiconHits,
}

pub const FEATURE_NAMES: [&str; 16] = [
    "monetary_count",
    "year_series_count",
    "longest_year_series_len",
    "positive_count",
    "negative_count",
    "row_count",
    "column_count",
    "header_asset",
    "header_cashflow",
    "header_projection",
    "row_label_asset",
    "row_label_cashflow",
    "row_label_projection",
    "caption_asset",
    "caption_cashflow",
    "caption_projection",
];

impl TableFeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_NAMES.len()] {
        let h = |x: LexiconHits| [x.asset as f64, x.cashflow as f64, x.projection as f64];
        let [ha, hc, hp] = h(self.header_bigram_hits);
        let [ra, rc, rp] = h(self.row_label_hits);
        let [ca, cc, cp] = h(self.caption_bigram_hits);
        [
            self.monetary_count as f64,
            self.year_series_count as f64,
            self.longest_year_series_len as f64,
            self.positive_count as f64,
            self.negative_count as f64,
            self.row_count as f64,
            self.column_count as f64,
            ha,
            hc,
            hp,
            ra,
            rc,
            rp,
            ca,
            cc,
            cp,
        ]
    }
}

/// Lexicons used for the per-table bigram hit counts.
#[derive(Debug, Clone)]
pub struct TableLexicons {
    pub asset: PhraseLexicon,
    pub cashflow: PhraseLexicon,
    pub projection: PhraseLexicon,
}

impl Default for TableLexicons {
    fn default() -> Self {
        TableLexicons {
            asset: default_asset_lexicon(),
            cashflow: default_cashflow_lexicon(),
            projection: default_projection_lexicon(),
        }
    }
}

impl TableLexicons {
    fn hits<'a>(&self, texts: impl Iterator<Item = &'a str>) -> LexiconHits {
        let mut out = LexiconHits::default();
        for text in texts {
            let tokens = tokenize(text).tokens;
            out.asset += self.asset.hits(&tokens);
            out.cashflow += self.cashflow.hits(&tokens);
            out.projection += self.projection.hits(&tokens);
        }
        out
    }

    pub fn features(&self, table: &Table) -> TableFeatureVector {
        let monetary_count = table.cells().map(|c| extract_money(c).len()).sum();
        let mut series = extract_year_series(&table.header);
        for row in &table.rows {
            series.extend(extract_year_series(row));
        }
        let signs = count_signed_numbers_in_rows(&table.rows);
        TableFeatureVector {
            monetary_count,
            year_series_count: series.len(),
            longest_year_series_len: series.iter().map(|s| s.years.len()).max().unwrap_or(0),
            positive_count: signs.positives,
            negative_count: signs.negatives,
            row_count: table.rows.len(),
            column_count: table.column_count(),
            header_bigram_hits: self.hits(table.header.iter().map(String::as_str)),
            row_label_hits: self.hits(table.rows.iter().filter_map(|r| r.first()).map(String::as_str)),
            caption_bigram_hits: self.hits(table.caption.iter().map(String::as_str)),
        }
    }
}

fn shared_lexicons() -> &'static TableLexicons {
    static LEXICONS: OnceLock<TableLexicons> = OnceLock::new();
    LEXICONS.get_or_init(TableLexicons::default)
}

/// Features with the shipped lexicons.
pub fn table_features(table: &Table) -> TableFeatureVector {
    shared_lexicons().features(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(header: &[&str], rows: &[&[&str]]) -> Table {
        Table {
            caption: None,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        }
    }

    #[test]
    fn asset_header_hits() {
        let f = table_features(&table(&["Asset class", "Allocation %"], &[&["Cash", "40%"], &["Property", "60%"]]));
        assert!(f.header_bigram_hits.asset >= 1);
        assert_eq!(f.year_series_count, 0);
        assert_eq!(f.positive_count, 2);
    }

    #[test]
    fn projection_header_series() {
        let mut header = vec!["Item".to_string()];
        header.extend((2024..=2034).map(|y| y.to_string()));
        let t = Table { caption: None, header, rows: vec![] };
        let f = table_features(&t);
        assert_eq!(f.longest_year_series_len, 11);
        assert_eq!(f.year_series_count, 1);
    }

    #[test]
    fn empty_cells_only_count_shape() {
        let f = table_features(&table(&["", ""], &[&["", ""], &["", ""], &["", ""]]));
        let expected = TableFeatureVector { row_count: 3, column_count: 2, ..Default::default() };
        assert_eq!(f, expected);
    }

    #[test]
    fn money_and_signs() {
        let f = table_features(&table(&["Item", "Amount"], &[&["Salary", "$80,000"], &["Expenses", "-$50,000"]]));
        assert_eq!(f.monetary_count, 2);
        assert_eq!((f.positive_count, f.negative_count), (1, 1));
        assert!(f.row_label_hits.cashflow >= 2);
    }
}
