//! Monetary amounts, bare numbers, year series and balance statistics.
//!
//! The grammar is hand-scanned rather than regex driven so that sign
//! conventions (leading `-`, unicode minus, accounting parentheses) and
//! thousands grouping can be checked with exact byte spans.

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

pub const YEAR_MIN: u16 = 1900;
pub const YEAR_MAX: u16 = 2100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumberKind {
    Money,
    Bare,
}

/// A number found in text. `value` is the magnitude; the sign is separate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumberToken {
    pub value: Decimal,
    pub sign: Sign,
    pub kind: NumberKind,
    pub percent: bool,
    /// Byte range in the source, including sign and parentheses.
    pub start: usize,
    pub end: usize,
}

impl NumberToken {
    pub fn signed_value(&self) -> Decimal {
        match self.sign {
            Sign::Positive => self.value,
            Sign::Negative => -self.value,
        }
    }
}

/// Dollar amount with exactly two fraction digits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonetaryAmount {
    pub value: Decimal,
    pub sign: Sign,
    pub start: usize,
    pub end: usize,
}

impl MonetaryAmount {
    pub fn new(value: Decimal, sign: Sign) -> Self {
        let mut value = value.abs();
        value.rescale(2);
        MonetaryAmount { value, sign, start: 0, end: 0 }
    }

    pub fn signed_value(&self) -> Decimal {
        match self.sign {
            Sign::Positive => self.value,
            Sign::Negative => -self.value,
        }
    }
}

impl std::fmt::Display for MonetaryAmount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = if self.sign == Sign::Negative { "-" } else { "" };
        write!(f, "{sign}${}", group_thousands(self.value))
    }
}

/// Renders `1234567.5` as `1,234,567.50`.
pub fn group_thousands(value: Decimal) -> String {
    let mut v = value.abs();
    v.rescale(2);
    let s = v.to_string();
    let (int, frac) = s.split_once('.').unwrap_or((&s, "00"));
    let mut grouped = String::new();
    for (i, c) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(c);
    }
    format!("{grouped}.{frac}")
}

fn is_minus(c: char) -> bool {
    c == '-' || c == '\u{2212}'
}

struct Scanner<'a> {
    text: &'a str,
    bytes: &'a [u8],
}

impl<'a> Scanner<'a> {
    fn char_before(&self, pos: usize) -> Option<char> {
        self.text[..pos].chars().next_back()
    }

    fn char_at(&self, pos: usize) -> Option<char> {
        self.text[pos..].chars().next()
    }

    fn digit_run(&self, pos: usize) -> usize {
        let mut end = pos;
        while end < self.bytes.len() && self.bytes[end].is_ascii_digit() {
            end += 1;
        }
        end
    }

    /// Scans `\d{1,3}(,\d{3})+ | \d+` followed by an optional fraction of at
    /// most `max_frac` digits. Returns the end offset and the digits with
    /// separators removed.
    fn number_body(&self, pos: usize, max_frac: usize) -> Option<(usize, String)> {
        let first_end = self.digit_run(pos);
        if first_end == pos {
            return None;
        }
        let mut end = first_end;
        let mut digits: String = self.text[pos..first_end].to_string();
        if first_end - pos <= 3 {
            while end + 4 <= self.bytes.len()
                && self.bytes[end] == b','
                && self.bytes[end + 1..end + 4].iter().all(u8::is_ascii_digit)
                && self.bytes.get(end + 4).is_none_or(|b| !b.is_ascii_digit())
            {
                digits.push_str(&self.text[end + 1..end + 4]);
                end += 4;
            }
        }
        if end + 1 < self.bytes.len() && self.bytes[end] == b'.' && self.bytes[end + 1].is_ascii_digit() {
            let frac_end = self.digit_run(end + 1);
            if frac_end - (end + 1) <= max_frac {
                digits.push('.');
                digits.push_str(&self.text[end + 1..frac_end]);
                end = frac_end;
            }
        }
        Some((end, digits))
    }
}

/// Digits at `pos` with thousands separators removed, plus the end offset.
pub(crate) fn number_at(text: &str, pos: usize) -> Option<(usize, String)> {
    Scanner { text, bytes: text.as_bytes() }.number_body(pos, usize::MAX)
}

/// Every monetary and bare number in `text`, in order of appearance.
pub fn extract_numbers(text: &str) -> Vec<NumberToken> {
    let scanner = Scanner { text, bytes: text.as_bytes() };
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < text.len() {
        let c = scanner.char_at(pos).expect("pos on char boundary");
        if c == '$' {
            if let Some(tok) = scan_money(&scanner, pos) {
                pos = tok.end;
                out.push(tok);
                continue;
            }
        } else if c.is_ascii_digit() {
            let glued = scanner.char_before(pos).is_some_and(|p| p.is_alphanumeric() || p == '.' || p == ',');
            if glued {
                pos = skip_word(&scanner, pos);
                continue;
            }
            if let Some(tok) = scan_bare(&scanner, pos) {
                pos = tok.end;
                out.push(tok);
                continue;
            }
            pos = skip_word(&scanner, pos);
            continue;
        }
        pos += c.len_utf8();
    }
    out
}

fn skip_word(scanner: &Scanner<'_>, mut pos: usize) -> usize {
    while let Some(c) = scanner.char_at(pos) {
        if !c.is_alphanumeric() {
            break;
        }
        pos += c.len_utf8();
    }
    pos
}

/// Sign prefix immediately before `pos`: `(start, negative)`.
fn sign_prefix(scanner: &Scanner<'_>, pos: usize) -> (usize, bool) {
    match scanner.char_before(pos) {
        Some(c) if is_minus(c) => {
            let start = pos - c.len_utf8();
            if scanner.char_before(start).is_some_and(char::is_alphanumeric) {
                (pos, false)
            } else {
                (start, true)
            }
        }
        Some('+') => {
            let start = pos - 1;
            if scanner.char_before(start).is_some_and(char::is_alphanumeric) {
                (pos, false)
            } else {
                (start, false)
            }
        }
        _ => (pos, false),
    }
}

fn wrap_parentheses(scanner: &Scanner<'_>, start: usize, end: usize) -> Option<(usize, usize)> {
    if scanner.char_before(start) == Some('(') && scanner.char_at(end) == Some(')') {
        Some((start - 1, end + 1))
    } else {
        None
    }
}

fn scan_money(scanner: &Scanner<'_>, dollar: usize) -> Option<NumberToken> {
    let mut body_start = dollar + 1;
    let mut inner_negative = false;
    if let Some(c) = scanner.char_at(body_start) {
        if is_minus(c) {
            inner_negative = true;
            body_start += c.len_utf8();
        }
    }
    let (end, digits) = scanner.number_body(body_start, 2)?;
    if scanner.char_at(end).is_some_and(|c| c.is_alphanumeric()) {
        return None;
    }
    let (mut start, prefix_negative) = sign_prefix(scanner, dollar);
    let mut end = end;
    let mut negative = inner_negative || prefix_negative;
    if !negative {
        if let Some((s, e)) = wrap_parentheses(scanner, dollar, end) {
            start = s;
            end = e;
            negative = true;
        }
    }
    let mut value = Decimal::from_str(&digits).ok()?;
    value.rescale(2);
    Some(NumberToken {
        value,
        sign: if negative { Sign::Negative } else { Sign::Positive },
        kind: NumberKind::Money,
        percent: false,
        start,
        end,
    })
}

fn scan_bare(scanner: &Scanner<'_>, pos: usize) -> Option<NumberToken> {
    let (mut end, digits) = scanner.number_body(pos, usize::MAX)?;
    let mut percent = false;
    if scanner.char_at(end) == Some('%') {
        percent = true;
        end += 1;
    } else if scanner.char_at(end).is_some_and(|c| c.is_alphanumeric()) {
        return None;
    }
    let (mut start, mut negative) = sign_prefix(scanner, pos);
    if !negative {
        if let Some((s, e)) = wrap_parentheses(scanner, pos, end) {
            start = s;
            end = e;
            negative = true;
        }
    }
    let value = Decimal::from_str(&digits).ok()?;
    Some(NumberToken {
        value,
        sign: if negative { Sign::Negative } else { Sign::Positive },
        kind: NumberKind::Bare,
        percent,
        start,
        end,
    })
}

/// Dollar amounts in order of appearance.
pub fn extract_money(text: &str) -> Vec<MonetaryAmount> {
    extract_numbers(text)
        .into_iter()
        .filter(|t| t.kind == NumberKind::Money)
        .map(|t| MonetaryAmount { value: t.value, sign: t.sign, start: t.start, end: t.end })
        .collect()
}

/// True when the trimmed cell is exactly one number (money, bare, or percent).
pub fn is_numeric_cell(cell: &str) -> bool {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return false;
    }
    let numbers = extract_numbers(trimmed);
    numbers.len() == 1 && numbers[0].start == 0 && numbers[0].end == trimmed.len()
}

/// Parses a cell that holds exactly one number; `None` otherwise.
pub fn cell_number(cell: &str) -> Option<NumberToken> {
    let trimmed = cell.trim();
    let mut numbers = extract_numbers(trimmed);
    if numbers.len() == 1 && numbers[0].start == 0 && numbers[0].end == trimmed.len() {
        numbers.pop()
    } else {
        None
    }
}

/// A cell that is exactly a four-digit year in range.
pub fn cell_year(cell: &str) -> Option<u16> {
    let t = cell.trim();
    if t.len() != 4 || !t.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let year: u16 = t.parse().ok()?;
    (YEAR_MIN..=YEAR_MAX).contains(&year).then_some(year)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearSeries {
    pub years: Vec<u16>,
    pub consecutive: bool,
}

impl YearSeries {
    fn from_years(years: Vec<u16>) -> Self {
        let consecutive = years.windows(2).all(|w| w[1] == w[0] + 1);
        YearSeries { years, consecutive }
    }

    /// `last - first + 1`.
    pub fn span(&self) -> u32 {
        match (self.years.first(), self.years.last()) {
            (Some(&a), Some(&b)) => u32::from(b - a) + 1,
            _ => 0,
        }
    }
}

/// Maximal runs of two or more strictly increasing year cells.
pub fn extract_year_series<S: AsRef<str>>(cells: &[S]) -> Vec<YearSeries> {
    let mut out = Vec::new();
    let mut run: Vec<u16> = Vec::new();
    let flush = |run: &mut Vec<u16>, out: &mut Vec<YearSeries>| {
        if run.len() >= 2 {
            out.push(YearSeries::from_years(std::mem::take(run)));
        } else {
            run.clear();
        }
    };
    for cell in cells {
        match cell_year(cell.as_ref()) {
            Some(y) if run.last().is_none_or(|&last| y > last) => run.push(y),
            Some(y) => {
                flush(&mut run, &mut out);
                run.push(y);
            }
            None => flush(&mut run, &mut out),
        }
    }
    flush(&mut run, &mut out);
    out
}

/// Distinct in-range four-digit years mentioned in free text, ascending.
pub fn years_in_text(text: &str) -> Option<YearSeries> {
    let mut years: Vec<u16> = extract_numbers(text)
        .into_iter()
        .filter(|t| t.kind == NumberKind::Bare && !t.percent && t.sign == Sign::Positive)
        .filter_map(|t| cell_year(&text[t.start..t.end]))
        .collect();
    years.sort_unstable();
    years.dedup();
    (!years.is_empty()).then(|| YearSeries::from_years(years))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCounts {
    pub positives: usize,
    pub negatives: usize,
}

impl SignCounts {
    fn add(&mut self, tokens: &[NumberToken]) {
        for t in tokens {
            match t.sign {
                Sign::Positive => self.positives += 1,
                Sign::Negative => self.negatives += 1,
            }
        }
    }
}

/// Counts numbers by sign. Zero counts as positive.
pub fn count_signed_numbers(text: &str) -> SignCounts {
    let mut counts = SignCounts::default();
    counts.add(&extract_numbers(text));
    counts
}

/// Same as [`count_signed_numbers`] over every body cell of a table. Header
/// cells are labels (year headers resolve to years, not numbers).
pub fn count_signed_numbers_in_rows<S: AsRef<str>>(rows: &[Vec<S>]) -> SignCounts {
    let mut counts = SignCounts::default();
    for cell in rows.iter().flatten() {
        counts.add(&extract_numbers(cell.as_ref()));
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceStatistics {
    pub count: usize,
    /// Rounded to cents (midpoint away from zero).
    pub mean: Decimal,
    /// Average of the two middle values for even counts.
    pub median: Decimal,
    pub min: Decimal,
    pub max: Decimal,
}

/// Statistics over signed amounts; `None` for an empty list.
pub fn balance_statistics(amounts: &[MonetaryAmount]) -> Option<BalanceStatistics> {
    let values: Vec<Decimal> = amounts.iter().map(MonetaryAmount::signed_value).collect();
    statistics_of(&values)
}

pub fn statistics_of(values: &[Decimal]) -> Option<BalanceStatistics> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let sum: Decimal = sorted.iter().copied().sum();
    let mean = (sum / Decimal::from(n)).round_dp_with_strategy(2, rust_decimal::RoundingStrategy::MidpointAwayFromZero);
    let median = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / Decimal::TWO };
    Some(BalanceStatistics { count: n, mean, median, min: sorted[0], max: sorted[n - 1] })
}
