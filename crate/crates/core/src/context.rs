//! Per-unit labels of one document, whether predicted by the models or
//! taken from ground truth. The KRI evaluators only read this view.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::document::{enumerate_units, DataUnit, SoaDocument, Table, UnitKind};
use crate::table::TableType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalRecLabel {
    Goal,
    Recommendation,
    Neither,
}

impl GoalRecLabel {
    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "goal" => Some(GoalRecLabel::Goal),
            "recommendation" => Some(GoalRecLabel::Recommendation),
            "neither" => Some(GoalRecLabel::Neither),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GoalRecLabel::Goal => "goal",
            GoalRecLabel::Recommendation => "recommendation",
            GoalRecLabel::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsuranceLabel {
    Recommend,
    Defer,
    ScopeOut,
    Other,
}

impl InsuranceLabel {
    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "recommend" => Some(InsuranceLabel::Recommend),
            "defer" => Some(InsuranceLabel::Defer),
            "scope_out" => Some(InsuranceLabel::ScopeOut),
            "other" => Some(InsuranceLabel::Other),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InsuranceLabel::Recommend => "recommend",
            InsuranceLabel::Defer => "defer",
            InsuranceLabel::ScopeOut => "scope_out",
            InsuranceLabel::Other => "other",
        }
    }
}

/// Labels of a sentence unit for the four text tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceLabels {
    pub goal_rec: GoalRecLabel,
    pub position: bool,
    pub balance: bool,
    pub insurance: InsuranceLabel,
}

impl Default for SentenceLabels {
    fn default() -> Self {
        SentenceLabels {
            goal_rec: GoalRecLabel::Neither,
            position: false,
            balance: false,
            insurance: InsuranceLabel::Other,
        }
    }
}

/// Labels of a table unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableLabels {
    pub table_type: TableType,
    pub balance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitLabels {
    Sentence(SentenceLabels),
    Table(TableLabels),
}

/// Labels plus, keyed by task name, the classifier confidence of each
/// predicted label. Empty for ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitAnnotation {
    pub unit_id: String,
    pub labels: UnitLabels,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub confidences: BTreeMap<String, f64>,
}

pub struct AnalysisContext<'a> {
    pub document: &'a SoaDocument,
    pub units: Vec<DataUnit>,
    /// Parallel to `units`.
    pub annotations: Vec<UnitAnnotation>,
}

pub struct LabeledSentence<'c> {
    pub unit: &'c DataUnit,
    pub labels: &'c SentenceLabels,
}

pub struct LabeledTable<'c> {
    pub unit: &'c DataUnit,
    pub table: &'c Table,
    pub labels: &'c TableLabels,
}

impl<'a> AnalysisContext<'a> {
    /// Pairs the document's units with annotations; panics if they do not
    /// line up unit by unit, which would be a programming error.
    pub fn new(document: &'a SoaDocument, annotations: Vec<UnitAnnotation>) -> Self {
        let units = enumerate_units(document);
        assert_eq!(units.len(), annotations.len(), "one annotation per unit");
        for (u, a) in units.iter().zip(&annotations) {
            assert_eq!(u.unit_id, a.unit_id, "annotations follow unit order");
            let kind_matches = matches!(
                (&u.kind, &a.labels),
                (UnitKind::Sentence, UnitLabels::Sentence(_)) | (UnitKind::Table, UnitLabels::Table(_))
            );
            assert!(kind_matches, "annotation kind differs for {}", u.unit_id);
        }
        AnalysisContext { document, units, annotations }
    }

    pub fn sentences(&self) -> impl Iterator<Item = LabeledSentence<'_>> {
        self.units.iter().zip(&self.annotations).filter_map(|(unit, a)| match &a.labels {
            UnitLabels::Sentence(labels) => Some(LabeledSentence { unit, labels }),
            UnitLabels::Table(_) => None,
        })
    }

    pub fn tables(&self) -> impl Iterator<Item = LabeledTable<'_>> {
        self.units.iter().zip(&self.annotations).filter_map(|(unit, a)| match &a.labels {
            UnitLabels::Table(labels) => {
                let table = self.document.table_at(unit.location).expect("table unit resolves");
                Some(LabeledTable { unit, table, labels })
            }
            UnitLabels::Sentence(_) => None,
        })
    }

    pub fn tables_of(&self, table_type: TableType) -> impl Iterator<Item = LabeledTable<'_>> {
        self.tables().filter(move |t| t.labels.table_type == table_type)
    }

    pub fn confidence_of(&self, unit_id: &str, task: &str) -> Option<f64> {
        self.annotations.iter().find(|a| a.unit_id == unit_id).and_then(|a| a.confidences.get(task).copied())
    }
}
