//! Rules applied to classified tables: diversification of an asset-class
//! table, the net outcome of a cash-flow table, and the year horizon of a
//! projections table.

use std::collections::BTreeSet;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::document::Table;
use crate::lexicon::{AssetTaxonomy, PhraseLexicon};
use crate::quantity::{cell_number, extract_numbers, extract_year_series, NumberToken};

pub const MAX_SHARE_CAP: Decimal = Decimal::from_parts(9, 0, 0, false, 1);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversificationFinding {
    pub classes_found: BTreeSet<String>,
    pub nonzero_classes: usize,
    /// Largest class share in `[0, 1]`, present only when the allocation
    /// column sums to 1 ± 0.05 or 100 ± 5.
    pub max_share: Option<f64>,
    /// The same share as an exact decimal.
    #[serde(skip)]
    pub max_share_exact: Option<Decimal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversificationLevel {
    Diversified,
    Borderline,
    NotDiversified,
}

impl DiversificationFinding {
    /// Two or more nonzero classes with no class above 90% is diversified;
    /// two or more with one class above 90% is borderline.
    pub fn level(&self) -> DiversificationLevel {
        if self.nonzero_classes < 2 {
            return DiversificationLevel::NotDiversified;
        }
        let over_cap = match (self.max_share_exact, self.max_share) {
            (Some(exact), _) => exact > MAX_SHARE_CAP,
            (None, Some(share)) => share > 0.9,
            (None, None) => false,
        };
        if over_cap {
            DiversificationLevel::Borderline
        } else {
            DiversificationLevel::Diversified
        }
    }
}

fn is_allocation_header(cell: &str) -> bool {
    let lower = cell.to_lowercase();
    lower.contains('%') || ["allocation", "weight", "proportion", "share of"].iter().any(|k| lower.contains(k))
}

/// Column holding allocation figures: the first non-label column whose
/// header looks like an allocation, else the last column numeric in every
/// matched row.
fn allocation_column(table: &Table, matched_rows: &[usize]) -> Option<usize> {
    if let Some(c) = table.header.iter().enumerate().skip(1).find(|(_, h)| is_allocation_header(h)).map(|(i, _)| i) {
        return Some(c);
    }
    (1..table.column_count())
        .rev()
        .find(|&c| !matched_rows.is_empty() && matched_rows.iter().all(|&r| cell_number(&table.rows[r][c]).is_some()))
}

fn within_total(sum: Decimal) -> bool {
    let one = Decimal::ONE;
    let hundred = Decimal::ONE_HUNDRED;
    let tol_one = Decimal::new(5, 2);
    let tol_hundred = Decimal::new(5, 0);
    (sum - one).abs() <= tol_one || (sum - hundred).abs() <= tol_hundred
}

/// Matches first-column labels to the taxonomy and folds synonyms into
/// their class before counting.
pub fn check_diversification(table: &Table, taxonomy: &AssetTaxonomy) -> DiversificationFinding {
    let matches: Vec<(usize, usize)> = table
        .rows
        .iter()
        .enumerate()
        .filter_map(|(ri, row)| row.first().and_then(|label| taxonomy.classify_label(label)).map(|ci| (ri, ci)))
        .collect();
    let matched_rows: Vec<usize> = matches.iter().map(|(r, _)| *r).collect();
    let column = allocation_column(table, &matched_rows);

    let n = taxonomy.classes.len();
    let mut class_sum = vec![Decimal::ZERO; n];
    let mut class_unknown = vec![false; n];
    let mut class_seen = vec![false; n];
    let mut all_numeric = column.is_some();
    for &(ri, ci) in &matches {
        class_seen[ci] = true;
        match column.and_then(|c| cell_number(&table.rows[ri][c])) {
            Some(tok) => class_sum[ci] += tok.signed_value(),
            None => {
                class_unknown[ci] = true;
                all_numeric = false;
            }
        }
    }
    let classes_found: BTreeSet<String> =
        (0..n).filter(|&c| class_seen[c]).map(|c| taxonomy.classes[c].name.clone()).collect();
    let nonzero_classes =
        (0..n).filter(|&c| class_seen[c] && (class_unknown[c] || class_sum[c] > Decimal::ZERO)).count();
    let total: Decimal = class_sum.iter().copied().sum();
    let max_share_exact = (all_numeric && !matches.is_empty() && total > Decimal::ZERO && within_total(total))
        .then(|| class_sum.iter().copied().max().unwrap_or(Decimal::ZERO) / total);
    DiversificationFinding {
        classes_found,
        nonzero_classes,
        max_share: max_share_exact.map(decimal_to_f64),
        max_share_exact,
    }
}

pub(crate) fn decimal_to_f64(d: Decimal) -> f64 {
    d.to_string().parse().unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetSign {
    Positive,
    Negative,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CashflowOutcome {
    pub net_sign: NetSign,
    /// Signed net amount.
    pub net_value: Option<Decimal>,
    /// Body row the figure came from, when a net row was found.
    pub net_row: Option<usize>,
}

impl CashflowOutcome {
    fn from_value(value: Option<Decimal>, net_row: Option<usize>) -> Self {
        let net_sign = match value {
            None => NetSign::Unknown,
            Some(v) if v < Decimal::ZERO => NetSign::Negative,
            Some(_) => NetSign::Positive,
        };
        CashflowOutcome { net_sign, net_value: value, net_row }
    }
}

fn cell_numbers(cell: &str) -> Vec<NumberToken> {
    extract_numbers(cell)
}

/// Net row (label matches the net lexicon; the last such row wins) read at
/// its last numeric cell; otherwise the signed sum of the last column that
/// has any numeric cell. Zero counts as positive.
pub fn cashflow_outcome(table: &Table, net_lexicon: &PhraseLexicon) -> CashflowOutcome {
    let net_row = table
        .rows
        .iter()
        .enumerate()
        .rev()
        .find(|(_, row)| row.first().is_some_and(|label| net_lexicon.matches(label)));
    if let Some((ri, row)) = net_row {
        let last = row.iter().skip(1).rev().find_map(|cell| cell_numbers(cell).last().cloned());
        if let Some(tok) = last {
            return CashflowOutcome::from_value(Some(tok.signed_value()), Some(ri));
        }
    }
    let column = (0..table.column_count()).rev().find(|&c| table.rows.iter().any(|r| !cell_numbers(&r[c]).is_empty()));
    let value =
        column.map(|c| table.rows.iter().flat_map(|r| cell_numbers(&r[c])).map(|t| t.signed_value()).sum::<Decimal>());
    CashflowOutcome::from_value(value, None)
}

/// Span in years of the longest year series found in the header or any row.
pub fn projection_horizon(table: &Table) -> u32 {
    let mut series = extract_year_series(&table.header);
    for row in &table.rows {
        series.extend(extract_year_series(row));
    }
    let mut best: Option<&crate::quantity::YearSeries> = None;
    for s in &series {
        if best.is_none_or(|b| s.years.len() > b.years.len()) {
            best = Some(s);
        }
    }
    best.map_or(0, |s| s.span())
}
