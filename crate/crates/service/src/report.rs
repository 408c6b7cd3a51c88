//! Spreadsheet export of machine assessments.

use soaguard_core::aggregate::{rank_documents, DocumentAssessment};
use soaguard_core::kri::KriId;

pub const CSV_HEADER: [&str; 8] = [
    "document_id",
    "overall",
    "goal_advice",
    "diversification",
    "client_position",
    "cashflow",
    "starting_balance",
    "insurance",
];

/// One row per assessment in triage order, `\n` line endings.
pub fn batch_csv(assessments: &[DocumentAssessment]) -> String {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("write to memory");
    for a in rank_documents(assessments.to_vec()) {
        let mut row = vec![a.document_id.clone(), a.overall.to_string()];
        row.extend(KriId::ALL.iter().map(|&k| a.rating(k).to_string()));
        writer.write_record(&row).expect("write to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("csv is utf-8")
}
