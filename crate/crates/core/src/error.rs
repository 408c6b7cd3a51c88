use thiserror::Error;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("malformed table {table}: {reason}")]
    Structure { table: String, reason: String },
    #[error("invalid document: {0}")]
    Validation(String),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("label {label:?} is not part of the {task} label set")]
    UnknownLabel { task: String, label: String },
    #[error("insufficient training data: {0}")]
    InsufficientData(String),
    #[error("model checksum mismatch: stored {stored}, computed {computed}")]
    ChecksumMismatch { stored: String, computed: String },
    #[error("unsupported model format version {0}")]
    FormatVersion(u32),
    #[error("model task mismatch: expected {expected}, found {found}")]
    TaskMismatch { expected: String, found: String },
    #[error("model file is malformed: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("invalid policy: {0}")]
    Invalid(String),
    #[error("policy file is malformed: {0}")]
    Malformed(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("no result for KRI {0}")]
    Missing(String),
    #[error("duplicate result for KRI {0}")]
    Duplicate(String),
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("degenerate corpus mix: {0}")]
    DegenerateMix(String),
    #[error("invalid profile {name}: {reason}")]
    InvalidProfile { name: String, reason: String },
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon file is malformed: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("invalid taxonomy: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum CorpusIoError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Document { path: String, source: DocumentError },
    #[error("{path}: malformed ground truth: {source}")]
    Truth { path: String, source: serde_json::Error },
    #[error("{path}: ground truth does not match the document units")]
    Mismatch { path: String },
}
