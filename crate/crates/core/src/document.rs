//! Canonical Statement of Advice representation.
//!
//! Documents arrive as a single JSON object (see [`parse_document`]) and are
//! immutable once parsed. Ratable data units (sentences and tables) are
//! enumerated with [`enumerate_units`]; their ids are a pure function of the
//! document id and block position, so re-parsing the same bytes yields the
//! same ids.

use serde::{Deserialize, Serialize};

use crate::error::DocumentError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoaDocument {
    pub id: String,
    pub title: String,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub heading: String,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Block {
    Paragraph { text: String },
    Table(Table),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub caption: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column_count(&self) -> usize {
        self.header.len()
    }

    /// Header followed by every body cell, row-major.
    pub fn cells(&self) -> impl Iterator<Item = &str> {
        self.header.iter().chain(self.rows.iter().flatten()).map(String::as_str)
    }

    pub fn body_cells(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().flatten().map(String::as_str)
    }

    /// Caption, header and first-column labels joined with spaces: the text a
    /// sentence classifier sees when rating a table as a data unit.
    pub fn summary_text(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if let Some(caption) = &self.caption {
            parts.push(caption);
        }
        parts.extend(self.header.iter().map(String::as_str));
        parts.extend(self.rows.iter().filter_map(|r| r.first()).map(String::as_str));
        parts.join(" ")
    }
}

/// Abbreviations that never end a sentence. Compared case-insensitively
/// against the whitespace-delimited word carrying the terminal period.
pub const DEFAULT_ABBREVIATIONS: &[&str] =
    &["e.g.", "i.e.", "mr.", "mrs.", "ms.", "dr.", "no.", "etc.", "vs.", "approx.", "inc.", "ltd.", "pty.", "st."];

/// Parses the canonical JSON format.
///
/// Empty paragraphs are dropped and header-less tables get a header (the first
/// row when it holds no numeric cell, otherwise `col1..colN`).
pub fn parse_document(raw: &[u8]) -> Result<SoaDocument, DocumentError> {
    let text = std::str::from_utf8(raw).map_err(|e| DocumentError::Syntax {
        line: line_of_offset(raw, e.valid_up_to()),
        column: 0,
        message: "input is not valid UTF-8".into(),
    })?;
    let mut doc: SoaDocument = serde_json::from_str(text).map_err(|e| DocumentError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    normalize(&mut doc)?;
    Ok(doc)
}

fn line_of_offset(raw: &[u8], offset: usize) -> usize {
    raw[..offset].iter().filter(|&&b| b == b'\n').count() + 1
}

fn normalize(doc: &mut SoaDocument) -> Result<(), DocumentError> {
    if doc.id.trim().is_empty() {
        return Err(DocumentError::Validation("document id is empty".into()));
    }
    if doc.sections.is_empty() {
        return Err(DocumentError::Validation(format!("document {} has no sections", doc.id)));
    }
    for (si, section) in doc.sections.iter_mut().enumerate() {
        section.blocks.retain(|b| match b {
            Block::Paragraph { text } => !text.trim().is_empty(),
            Block::Table(_) => true,
        });
        for (bi, block) in section.blocks.iter_mut().enumerate() {
            if let Block::Table(table) = block {
                normalize_table(table)
                    .map_err(|reason| DocumentError::Structure { table: table_name(table, si, bi), reason })?;
            }
        }
    }
    Ok(())
}

fn table_name(table: &Table, section: usize, block: usize) -> String {
    match &table.caption {
        Some(c) if !c.trim().is_empty() => format!("\"{c}\" (section {section}, block {block})"),
        _ => format!("section {section}, block {block}"),
    }
}

fn normalize_table(table: &mut Table) -> Result<(), String> {
    if table.header.is_empty() && !table.rows.is_empty() {
        let first = &table.rows[0];
        if first.iter().all(|c| !crate::quantity::is_numeric_cell(c)) {
            table.header = table.rows.remove(0);
        } else {
            table.header = (1..=first.len()).map(|i| format!("col{i}")).collect();
        }
    }
    let arity = table.header.len();
    for (ri, row) in table.rows.iter().enumerate() {
        if row.len() != arity {
            return Err(format!("row {ri} has {} cells but the header has {arity}", row.len()));
        }
    }
    Ok(())
}

/// Canonical serialization: two-space indented JSON with a trailing newline.
pub fn serialize_document(doc: &SoaDocument) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("document serializes");
    out.push('\n');
    out
}

/// Byte range of one sentence inside its paragraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub start: usize,
    pub end: usize,
}

/// Splits a paragraph into sentences using [`DEFAULT_ABBREVIATIONS`].
pub fn split_sentences(paragraph: &str) -> Vec<&str> {
    sentence_spans(paragraph, DEFAULT_ABBREVIATIONS).into_iter().map(|s| &paragraph[s.start..s.end]).collect()
}

/// Sentence boundaries: a run of `.`, `!` or `?` (plus closing quotes or
/// brackets) followed by whitespace and then an uppercase letter, a digit, an
/// opening quote/bracket, a currency sign, or end of text. Spans are trimmed;
/// the text between consecutive spans is whitespace only.
pub fn sentence_spans(paragraph: &str, abbreviations: &[&str]) -> Vec<SentenceSpan> {
    let chars: Vec<(usize, char)> = paragraph.char_indices().collect();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() && !c.is_whitespace() {
            start = Some(pos);
        }
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len()
                && matches!(chars[j].1, '.' | '!' | '?' | '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
            {
                j += 1;
            }
            let end = chars.get(j).map_or(paragraph.len(), |&(p, _)| p);
            let at_end = j == chars.len();
            let boundary = if at_end {
                true
            } else if chars[j].1.is_whitespace() {
                let mut k = j;
                while k < chars.len() && chars[k].1.is_whitespace() {
                    k += 1;
                }
                k == chars.len() || opens_sentence(chars[k].1)
            } else {
                false
            };
            if boundary && !(c == '.' && ends_with_abbreviation(&paragraph[..end], abbreviations)) {
                if let Some(s) = start.take() {
                    spans.push(SentenceSpan { start: s, end });
                }
            }
            i = j;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        let end = paragraph.trim_end().len();
        if end > s {
            spans.push(SentenceSpan { start: s, end });
        }
    }
    spans
}

fn opens_sentence(c: char) -> bool {
    c.is_uppercase() || c.is_ascii_digit() || matches!(c, '"' | '\'' | '(' | '[' | '$' | '\u{201c}' | '\u{2018}')
}

fn ends_with_abbreviation(prefix: &str, abbreviations: &[&str]) -> bool {
    let word = prefix.rsplit(char::is_whitespace).next().unwrap_or("").trim_start_matches(['(', '"', '\'', '[']);
    let lower = word.to_lowercase();
    abbreviations.iter().any(|a| lower == *a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Sentence,
    Table,
}

/// Position of a unit inside its document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnitLocation {
    pub section: usize,
    pub block: usize,
    /// Sentence index within the paragraph; `None` for tables.
    pub sentence: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataUnit {
    pub unit_id: String,
    pub kind: UnitKind,
    pub location: UnitLocation,
    /// Sentence text, or the table's summary text.
    pub text: String,
    /// Byte span of the sentence inside its paragraph.
    pub span: Option<SentenceSpan>,
}

pub fn sentence_unit_id(doc_id: &str, section: usize, block: usize, sentence: usize) -> String {
    format!("{doc_id}:s{section}:b{block}:u{sentence}")
}

pub fn table_unit_id(doc_id: &str, section: usize, block: usize) -> String {
    format!("{doc_id}:s{section}:b{block}:t")
}

/// Every sentence of every paragraph and every table, in document order.
pub fn enumerate_units(doc: &SoaDocument) -> Vec<DataUnit> {
    let mut units = Vec::new();
    for (si, section) in doc.sections.iter().enumerate() {
        for (bi, block) in section.blocks.iter().enumerate() {
            match block {
                Block::Paragraph { text } => {
                    for (ui, span) in sentence_spans(text, DEFAULT_ABBREVIATIONS).into_iter().enumerate() {
                        units.push(DataUnit {
                            unit_id: sentence_unit_id(&doc.id, si, bi, ui),
                            kind: UnitKind::Sentence,
                            location: UnitLocation { section: si, block: bi, sentence: Some(ui) },
                            text: text[span.start..span.end].to_string(),
                            span: Some(span),
                        });
                    }
                }
                Block::Table(table) => units.push(DataUnit {
                    unit_id: table_unit_id(&doc.id, si, bi),
                    kind: UnitKind::Table,
                    location: UnitLocation { section: si, block: bi, sentence: None },
                    text: table.summary_text(),
                    span: None,
                }),
            }
        }
    }
    units
}

impl SoaDocument {
    pub fn block(&self, section: usize, block: usize) -> Option<&Block> {
        self.sections.get(section)?.blocks.get(block)
    }

    pub fn table_at(&self, location: UnitLocation) -> Option<&Table> {
        match self.block(location.section, location.block)? {
            Block::Table(t) => Some(t),
            Block::Paragraph { .. } => None,
        }
    }

    pub fn paragraph_at(&self, section: usize, block: usize) -> Option<&str> {
        match self.block(section, block)? {
            Block::Paragraph { text } => Some(text),
            Block::Table(_) => None,
        }
    }

    pub fn tables(&self) -> impl Iterator<Item = (usize, usize, &Table)> {
        self.sections.iter().enumerate().flat_map(|(si, s)| {
            s.blocks.iter().enumerate().filter_map(move |(bi, b)| match b {
                Block::Table(t) => Some((si, bi, t)),
                Block::Paragraph { .. } => None,
            })
        })
    }
}
