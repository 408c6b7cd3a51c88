//! Review service: ingestion, analysis, the reviewer workflow with its audit
//! log, and CSV export, over a directory-per-document store.

pub mod error;
pub mod events;
pub mod http;
pub mod report;
pub mod review;
pub mod store;

pub use error::{ActionError, ServiceError};
pub use events::{replay, AuditEvent};
pub use review::{ReviewAction, ReviewState, Role, TextSpan};
pub use store::{ActionRequest, Store};

/// Environment variable naming the store root.
pub const DATA_DIR_ENV: &str = "SOAGUARD_DATA_DIR";
