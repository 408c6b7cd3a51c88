//! Statement of Advice analysis: document model, quantity grammar, text and
//! table classifiers, the six key risk indicators and their aggregation.

pub mod aggregate;
pub mod context;
pub mod document;
pub mod error;
pub mod eval;
pub mod goals;
pub mod kri;
pub mod lexicon;
pub mod par;
pub mod pipeline;
pub mod quantity;
pub mod suite;
pub mod synth;
pub mod table;
pub mod text;
