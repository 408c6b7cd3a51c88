//! Classifier and indicator accuracy against synthetic ground truth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::context::{UnitAnnotation, UnitLabels};
use crate::kri::{KriId, RiskRating};
use crate::pipeline::Analysis;
use crate::synth::GroundTruth;
use crate::table::TableType;
use crate::text::TextTask;

/// Rows are true labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Self {
        let n = labels.len();
        ConfusionMatrix { labels: labels.iter().map(|l| l.as_ref().to_string()).collect(), counts: vec![vec![0; n]; n] }
    }

    fn index(&self, label: &str) -> usize {
        self.labels.iter().position(|l| l == label).unwrap_or_else(|| panic!("unknown label {label:?}"))
    }

    pub fn record(&mut self, truth: &str, predicted: &str) {
        let (t, p) = (self.index(truth), self.index(predicted));
        self.counts[t][p] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum::<usize>() as f64 / total as f64
    }

    /// F1 per label; `None` for labels that occur neither in truth nor in
    /// predictions.
    pub fn f1_scores(&self) -> Vec<Option<f64>> {
        let n = self.labels.len();
        (0..n)
            .map(|i| {
                let tp = self.counts[i][i] as f64;
                let actual: usize = self.counts[i].iter().sum();
                let predicted: usize = (0..n).map(|r| self.counts[r][i]).sum();
                if actual == 0 && predicted == 0 {
                    return None;
                }
                Some(2.0 * tp / (actual + predicted) as f64)
            })
            .collect()
    }

    /// Mean F1 over labels that occur.
    pub fn macro_f1(&self) -> f64 {
        let present: Vec<f64> = self.f1_scores().into_iter().flatten().collect();
        if present.is_empty() {
            0.0
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        }
    }
}

fn text_label(task: TextTask, labels: &UnitLabels) -> Option<&'static str> {
    match (task, labels) {
        (TextTask::GoalRec, UnitLabels::Sentence(l)) => Some(l.goal_rec.as_str()),
        (TextTask::Position, UnitLabels::Sentence(l)) => Some(if l.position { "position" } else { "other" }),
        (TextTask::BalanceMention, UnitLabels::Sentence(l)) => Some(if l.balance { "balance" } else { "other" }),
        (TextTask::BalanceMention, UnitLabels::Table(l)) => Some(if l.balance { "balance" } else { "other" }),
        (TextTask::Insurance, UnitLabels::Sentence(l)) => Some(l.insurance.as_str()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KriAgreement {
    pub matched: usize,
    pub total: usize,
    /// Rows are true ratings, columns predicted ratings.
    pub confusion: ConfusionMatrix,
}

impl KriAgreement {
    fn new() -> Self {
        let labels: Vec<&str> = RiskRating::ALL.iter().map(|r| r.as_str()).collect();
        KriAgreement { matched: 0, total: 0, confusion: ConfusionMatrix::new(&labels) }
    }

    fn record(&mut self, truth: RiskRating, predicted: RiskRating) {
        self.total += 1;
        self.matched += usize::from(truth == predicted);
        self.confusion.record(truth.as_str(), predicted.as_str());
    }

    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub documents: usize,
    pub text: BTreeMap<TextTask, ConfusionMatrix>,
    pub table: ConfusionMatrix,
    pub kri: BTreeMap<KriId, KriAgreement>,
    pub overall: KriAgreement,
}

impl EvaluationReport {
    pub fn macro_f1(&self, task: TextTask) -> f64 {
        self.text[&task].macro_f1()
    }

    pub fn kri_match_rate(&self, kri: KriId) -> f64 {
        self.kri[&kri].rate()
    }
}

/// Compares predicted annotations and assessments with ground truth.
/// `analyses` and `truths` must describe the same documents in the same
/// order.
pub fn evaluate(analyses: &[Analysis], truths: &[GroundTruth]) -> EvaluationReport {
    assert_eq!(analyses.len(), truths.len(), "one analysis per ground truth");
    let mut text: BTreeMap<TextTask, ConfusionMatrix> =
        TextTask::ALL.iter().map(|&t| (t, ConfusionMatrix::new(t.labels()))).collect();
    let table_labels: Vec<&str> = TableType::ALL.iter().map(|t| t.name()).collect();
    let mut table = ConfusionMatrix::new(&table_labels);
    let mut kri: BTreeMap<KriId, KriAgreement> = KriId::ALL.iter().map(|&k| (k, KriAgreement::new())).collect();
    let mut overall = KriAgreement::new();

    for (analysis, truth) in analyses.iter().zip(truths) {
        assert_eq!(analysis.assessment.document_id, truth.document_id, "documents in the same order");
        record_units(&analysis.annotations, &truth.annotations, &mut text, &mut table);
        for k in KriId::ALL {
            kri.get_mut(&k).expect("all KRIs").record(truth.rating(k), analysis.assessment.rating(k));
        }
        overall.record(truth.overall, analysis.assessment.overall);
    }
    EvaluationReport { documents: truths.len(), text, table, kri, overall }
}

fn record_units(
    predicted: &[UnitAnnotation],
    truth: &[UnitAnnotation],
    text: &mut BTreeMap<TextTask, ConfusionMatrix>,
    table: &mut ConfusionMatrix,
) {
    assert_eq!(predicted.len(), truth.len(), "annotations cover the same units");
    for (p, t) in predicted.iter().zip(truth) {
        for task in TextTask::ALL {
            if let (Some(tl), Some(pl)) = (text_label(task, &t.labels), text_label(task, &p.labels)) {
                text.get_mut(&task).expect("all tasks").record(tl, pl);
            }
        }
        if let (UnitLabels::Table(tl), UnitLabels::Table(pl)) = (&t.labels, &p.labels) {
            table.record(tl.table_type.name(), pl.table_type.name());
        }
    }
}
