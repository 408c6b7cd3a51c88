//! Model bundle, document annotation and end-to-end assessment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate, DocumentAssessment};
use crate::context::{
    AnalysisContext, GoalRecLabel, InsuranceLabel, SentenceLabels, TableLabels, UnitAnnotation, UnitLabels,
};
use crate::document::{enumerate_units, SoaDocument, Table, UnitKind};
use crate::error::ModelError;
use crate::goals::{evaluate_goal_advice, GoalAdviceMap};
use crate::kri::KriPolicy;
use crate::lexicon::{default_net_lexicon, AssetTaxonomy, PhraseLexicon, TopicLexicon};
use crate::par::{self, Execution};
use crate::suite::{rate_cashflow, rate_client_position, rate_diversification, rate_insurance, rate_starting_balance};
use crate::table::{classify_table, train_table_classifier, ForestConfig, ForestReport, TableType, TrainedTableModel};
use crate::text::{train_classifier, SentimentLexicon, TextTask, TrainConfig, TrainedTextModel, TrainingReport};

pub const TABLE_MODEL_FILE: &str = "table.json";

pub fn text_model_file(task: TextTask) -> String {
    format!("{}.json", task.name())
}

/// The four sentence classifiers and the table classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    pub goal_rec: TrainedTextModel,
    pub position: TrainedTextModel,
    pub balance_mention: TrainedTextModel,
    pub insurance: TrainedTextModel,
    pub table: TrainedTableModel,
}

fn read(path: &Path) -> Result<Vec<u8>, ModelError> {
    fs::read(path).map_err(|source| ModelError::Io { path: path.display().to_string(), source })
}

impl ModelSet {
    pub fn text(&self, task: TextTask) -> &TrainedTextModel {
        match task {
            TextTask::GoalRec => &self.goal_rec,
            TextTask::Position => &self.position,
            TextTask::BalanceMention => &self.balance_mention,
            TextTask::Insurance => &self.insurance,
        }
    }

    pub fn load(dir: &Path) -> Result<Self, ModelError> {
        let text = |task: TextTask| -> Result<TrainedTextModel, ModelError> {
            let model = TrainedTextModel::from_json(&read(&dir.join(text_model_file(task)))?)?;
            model.expect_task(task)?;
            Ok(model)
        };
        Ok(ModelSet {
            goal_rec: text(TextTask::GoalRec)?,
            position: text(TextTask::Position)?,
            balance_mention: text(TextTask::BalanceMention)?,
            insurance: text(TextTask::Insurance)?,
            table: TrainedTableModel::from_json(&read(&dir.join(TABLE_MODEL_FILE))?)?,
        })
    }

    pub fn save(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for task in TextTask::ALL {
            fs::write(dir.join(text_model_file(task)), self.text(task).to_json())?;
        }
        fs::write(dir.join(TABLE_MODEL_FILE), self.table.to_json())
    }

    /// Model file name to checksum.
    pub fn checksums(&self) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> =
            TextTask::ALL.iter().map(|&t| (text_model_file(t), self.text(t).checksum.clone())).collect();
        out.insert(TABLE_MODEL_FILE.to_string(), self.table.checksum.clone());
        out
    }
}

/// Lexicons and taxonomy used by the rules.
#[derive(Debug, Clone)]
pub struct Resources {
    pub taxonomy: AssetTaxonomy,
    pub topics: TopicLexicon,
    pub net: PhraseLexicon,
    pub sentiment: SentimentLexicon,
}

impl Default for Resources {
    fn default() -> Self {
        Resources {
            taxonomy: AssetTaxonomy::default(),
            topics: TopicLexicon::default(),
            net: default_net_lexicon(),
            sentiment: SentimentLexicon::default(),
        }
    }
}

/// Assessment plus the goal map behind KRI 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub assessment: DocumentAssessment,
    pub goal_map: GoalAdviceMap,
    pub annotations: Vec<UnitAnnotation>,
}

/// Runs all six evaluators on a labelled document and aggregates them.
pub fn assess(
    ctx: &AnalysisContext<'_>,
    policy: &KriPolicy,
    resources: &Resources,
) -> (DocumentAssessment, GoalAdviceMap) {
    let (goal_map, goal_result) = evaluate_goal_advice(ctx, &resources.topics, &policy.thresholds);
    let results = vec![
        goal_result,
        rate_diversification(ctx, &resources.taxonomy),
        rate_client_position(ctx, &resources.sentiment, policy),
        rate_cashflow(ctx, &resources.net, &resources.sentiment),
        rate_starting_balance(ctx, policy),
        rate_insurance(ctx, policy),
    ];
    let assessment = aggregate(&ctx.document.id, results, policy).expect("one result per KRI");
    (assessment, goal_map)
}

pub struct Analyzer {
    pub models: ModelSet,
    pub policy: KriPolicy,
    pub resources: Resources,
}

impl Analyzer {
    pub fn new(models: ModelSet, policy: KriPolicy) -> Self {
        Analyzer { models, policy, resources: Resources::default() }
    }

    /// Predicted labels for every unit of the document.
    pub fn annotate(&self, doc: &SoaDocument) -> Vec<UnitAnnotation> {
        enumerate_units(doc)
            .into_iter()
            .map(|unit| match unit.kind {
                UnitKind::Sentence => {
                    let mut confidences = BTreeMap::new();
                    let mut predict = |task: TextTask| -> String {
                        let dist = self.models.text(task).classify(&unit.text);
                        confidences.insert(task.name().to_string(), dist.confidence());
                        dist.label().to_string()
                    };
                    let labels = SentenceLabels {
                        goal_rec: GoalRecLabel::from_label(&predict(TextTask::GoalRec)).expect("goal_rec label"),
                        position: predict(TextTask::Position) == "position",
                        balance: predict(TextTask::BalanceMention) == "balance",
                        insurance: InsuranceLabel::from_label(&predict(TextTask::Insurance)).expect("insurance label"),
                    };
                    UnitAnnotation { unit_id: unit.unit_id, labels: UnitLabels::Sentence(labels), confidences }
                }
                UnitKind::Table => {
                    let table = doc.table_at(unit.location).expect("table unit resolves");
                    let prediction = classify_table(&self.models.table, table);
                    let balance = self.models.balance_mention.classify(&unit.text);
                    let confidences = BTreeMap::from([
                        ("table".to_string(), prediction.confidence),
                        (TextTask::BalanceMention.name().to_string(), balance.confidence()),
                    ]);
                    let labels =
                        TableLabels { table_type: prediction.table_type, balance: balance.label() == "balance" };
                    UnitAnnotation { unit_id: unit.unit_id, labels: UnitLabels::Table(labels), confidences }
                }
            })
            .collect()
    }

    pub fn analyze(&self, doc: &SoaDocument) -> Analysis {
        let annotations = self.annotate(doc);
        let ctx = AnalysisContext::new(doc, annotations);
        let (assessment, goal_map) = assess(&ctx, &self.policy, &self.resources);
        Analysis { assessment, goal_map, annotations: ctx.annotations }
    }

    /// Analyses documents in input order, in parallel when `exec` allows.
    pub fn analyze_batch(&self, docs: &[SoaDocument], exec: Execution) -> Vec<Analysis> {
        par::map(exec, docs, |d| self.analyze(d))
    }
}

/// Labelled examples for every classifier, taken from annotated documents.
#[derive(Debug, Clone, Default)]
pub struct TrainingExamples {
    pub text: BTreeMap<TextTask, Vec<(String, String)>>,
    pub tables: Vec<(Table, TableType)>,
}

impl TrainingExamples {
    pub fn from_documents<'a>(docs: impl IntoIterator<Item = (&'a SoaDocument, &'a [UnitAnnotation])>) -> Self {
        let mut out = TrainingExamples::default();
        let mut push = |task: TextTask, text: &str, label: &str| {
            out.text.entry(task).or_default().push((text.to_string(), label.to_string()));
        };
        let mut tables = Vec::new();
        for (doc, annotations) in docs {
            for (unit, a) in enumerate_units(doc).into_iter().zip(annotations) {
                match &a.labels {
                    UnitLabels::Sentence(l) => {
                        push(TextTask::GoalRec, &unit.text, l.goal_rec.as_str());
                        push(TextTask::Position, &unit.text, if l.position { "position" } else { "other" });
                        push(TextTask::BalanceMention, &unit.text, if l.balance { "balance" } else { "other" });
                        push(TextTask::Insurance, &unit.text, l.insurance.as_str());
                    }
                    UnitLabels::Table(l) => {
                        push(TextTask::BalanceMention, &unit.text, if l.balance { "balance" } else { "other" });
                        tables.push((doc.table_at(unit.location).expect("table unit").clone(), l.table_type));
                    }
                }
            }
        }
        out.tables = tables;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub text: TrainConfig,
    pub forest: ForestConfig,
}

impl TrainingConfig {
    pub fn seeded(seed: u64) -> Self {
        TrainingConfig {
            text: TrainConfig { seed, ..TrainConfig::default() },
            forest: ForestConfig { seed, ..ForestConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub text: BTreeMap<TextTask, TrainingReport>,
    pub table: ForestReport,
}

/// Trains the five models. The text models train concurrently when `exec`
/// allows; each one is single-threaded and seeded, so results do not depend
/// on `exec`.
pub fn train_models(
    examples: &TrainingExamples,
    config: &TrainingConfig,
    exec: Execution,
) -> Result<(ModelSet, TrainingSummary), ModelError> {
    let empty = Vec::new();
    let trained = par::map(exec, &TextTask::ALL, |&task| {
        train_classifier(examples.text.get(&task).unwrap_or(&empty), task, &config.text)
    });
    let mut text = BTreeMap::new();
    let mut models = Vec::new();
    for (task, result) in TextTask::ALL.iter().zip(trained) {
        let (model, report) = result?;
        text.insert(*task, report);
        models.push(model);
    }
    let (table, table_report) = train_table_classifier(&examples.tables, &config.forest, exec)?;
    let mut models = models.into_iter();
    let mut next = || models.next().expect("four text models");
    let set = ModelSet { goal_rec: next(), position: next(), balance_mention: next(), insurance: next(), table };
    Ok((set, TrainingSummary { text, table: table_report }))
}
