//! Reviewer actions and the goal/recommendation overlay they fold into.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use soaguard_core::document::{DataUnit, UnitKind};
use soaguard_core::goals::{map_goals, rate_goal_advice, GoalAdviceMap, GoalLink, PairScorer, Statement};
use soaguard_core::kri::{KriId, MatchThresholds, RiskRating};

use crate::error::ActionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Auditor,
    Advisor,
}

/// Byte range inside the text of one sentence unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextSpan {
    pub unit_id: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReviewAction {
    MergeGoals {
        goal_ids: Vec<String>,
    },
    DeleteGoal {
        goal_id: String,
    },
    AddGoal {
        span: TextSpan,
    },
    AddRecommendation {
        span: TextSpan,
    },
    /// `None` removes the goal's link.
    Relink {
        goal_id: String,
        recommendation_id: Option<String>,
    },
    AddComment {
        #[serde(default)]
        kri: Option<KriId>,
        #[serde(default)]
        target: Option<String>,
        text: String,
    },
}

impl ReviewAction {
    pub fn kind(&self) -> &'static str {
        match self {
            ReviewAction::MergeGoals { .. } => "merge_goals",
            ReviewAction::DeleteGoal { .. } => "delete_goal",
            ReviewAction::AddGoal { .. } => "add_goal",
            ReviewAction::AddRecommendation { .. } => "add_recommendation",
            ReviewAction::Relink { .. } => "relink",
            ReviewAction::AddComment { .. } => "add_comment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Machine,
    Added,
    Merged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewStatement {
    pub id: String,
    pub text: String,
    pub sources: Vec<TextSpan>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub sequence: u64,
    pub actor: Role,
    pub target: Option<String>,
    pub text: String,
}

/// Thread key for comments not tied to a KRI.
pub const DOCUMENT_THREAD: &str = "document";

/// Machine goal map with reviewer changes applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewState {
    pub goals: Vec<ReviewStatement>,
    pub recommendations: Vec<ReviewStatement>,
    /// Links set by hand; `None` means explicitly unlinked.
    pub manual_links: BTreeMap<String, Option<String>>,
    /// Current best link per goal.
    pub links: Vec<GoalLink>,
    /// KRI 1 rating of the reviewed map.
    pub goal_advice: RiskRating,
    /// Keyed by KRI name or [`DOCUMENT_THREAD`].
    pub comments: BTreeMap<String, Vec<Comment>>,
}

/// What the fold needs besides the state: the document's units and the
/// scorer and thresholds used for the machine map.
pub struct ReviewContext<'a> {
    pub units: &'a [DataUnit],
    pub scorer: &'a PairScorer,
    pub thresholds: &'a MatchThresholds,
}

impl ReviewContext<'_> {
    fn unit(&self, id: &str) -> Option<&DataUnit> {
        self.units.iter().find(|u| u.unit_id == id)
    }

    fn span_text(&self, span: &TextSpan) -> Result<String, ActionError> {
        let unit = self
            .unit(&span.unit_id)
            .filter(|u| u.kind == UnitKind::Sentence)
            .ok_or_else(|| ActionError::InvalidSpan(format!("{} is not a sentence of the document", span.unit_id)))?;
        let text = &unit.text;
        let ok = span.start < span.end
            && span.end <= text.len()
            && text.is_char_boundary(span.start)
            && text.is_char_boundary(span.end);
        if !ok {
            return Err(ActionError::InvalidSpan(format!(
                "{}..{} is outside the {} bytes of {}",
                span.start,
                span.end,
                text.len(),
                span.unit_id
            )));
        }
        let selected = text[span.start..span.end].trim();
        if selected.is_empty() {
            return Err(ActionError::InvalidSpan("highlighted text is blank".into()));
        }
        Ok(selected.to_string())
    }
}

fn whole_unit(ctx: &ReviewContext<'_>, s: &Statement) -> Vec<TextSpan> {
    let len = ctx.unit(&s.unit_id).map_or(s.text.len(), |u| u.text.len());
    vec![TextSpan { unit_id: s.unit_id.clone(), start: 0, end: len }]
}

fn span_id(span: &TextSpan) -> String {
    format!("{}@{}-{}", span.unit_id, span.start, span.end)
}

impl ReviewState {
    /// State before any action: the machine map as is.
    pub fn baseline(map: &GoalAdviceMap, ctx: &ReviewContext<'_>) -> Self {
        let statement = |s: &Statement| ReviewStatement {
            id: s.unit_id.clone(),
            text: s.text.clone(),
            sources: whole_unit(ctx, s),
            origin: Origin::Machine,
        };
        let mut state = ReviewState {
            goals: map.goals.iter().map(statement).collect(),
            recommendations: map.recommendations.iter().map(statement).collect(),
            manual_links: BTreeMap::new(),
            links: Vec::new(),
            goal_advice: RiskRating::Red,
            comments: BTreeMap::new(),
        };
        state.relink(ctx);
        state
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("state serializes")))
    }

    fn goal_index(&self, id: &str) -> Result<usize, ActionError> {
        self.goals.iter().position(|g| g.id == id).ok_or_else(|| ActionError::UnknownTarget(id.to_string()))
    }

    fn has_statement(&self, id: &str) -> bool {
        self.goals.iter().chain(&self.recommendations).any(|s| s.id == id)
    }

    /// Recomputes links and the KRI 1 rating: manual links where set,
    /// otherwise the best-scoring recommendation as in the machine map.
    fn relink(&mut self, ctx: &ReviewContext<'_>) {
        let to_statement = |s: &ReviewStatement| Statement::new(&s.id, &s.text);
        let recs: Vec<Statement> = self.recommendations.iter().map(to_statement).collect();
        let auto: Vec<Statement> =
            self.goals.iter().filter(|g| !self.manual_links.contains_key(&g.id)).map(to_statement).collect();
        let auto_map = map_goals(&auto, &recs, ctx.scorer, ctx.thresholds);
        let mut links = Vec::new();
        for g in &self.goals {
            match self.manual_links.get(&g.id) {
                Some(Some(rec_id)) => {
                    let rec = self.recommendations.iter().find(|r| &r.id == rec_id).expect("manual link target exists");
                    links.push(GoalLink {
                        goal_id: g.id.clone(),
                        recommendation_id: rec_id.clone(),
                        confidence: ctx.scorer.score(&g.text, &rec.text).confidence,
                    });
                }
                Some(None) => {}
                None => links.extend(auto_map.best_link(&g.id).cloned()),
            }
        }
        let map = GoalAdviceMap {
            goals: self.goals.iter().map(to_statement).collect(),
            recommendations: recs,
            links: links.clone(),
            candidates: Vec::new(),
        };
        self.goal_advice = rate_goal_advice(&map, ctx.thresholds).rating;
        self.links = links;
    }

    /// The state after `action`, or why it cannot be applied. `self` is left
    /// untouched either way.
    pub fn apply(
        &self,
        action: &ReviewAction,
        actor: Role,
        sequence: u64,
        ctx: &ReviewContext<'_>,
    ) -> Result<ReviewState, ActionError> {
        let mut next = self.clone();
        match action {
            ReviewAction::MergeGoals { goal_ids } => {
                let mut ids: Vec<&String> = goal_ids.iter().collect();
                ids.sort();
                ids.dedup();
                if ids.len() < 2 {
                    return Err(ActionError::Invalid("merge needs at least two distinct goals".into()));
                }
                for id in &ids {
                    next.goal_index(id)?;
                }
                let merged: Vec<ReviewStatement> =
                    ids.iter().map(|id| next.goals[next.goal_index(id).expect("checked")].clone()).collect();
                let survivor = next.goal_index(ids[0]).expect("checked");
                next.goals[survivor] = ReviewStatement {
                    id: ids[0].clone(),
                    text: merged.iter().map(|g| g.text.as_str()).collect::<Vec<_>>().join(" "),
                    sources: merged.iter().flat_map(|g| g.sources.iter().cloned()).collect(),
                    origin: Origin::Merged,
                };
                next.goals.retain(|g| g.id == *ids[0] || !ids.contains(&&g.id));
                for id in &ids {
                    next.manual_links.remove(*id);
                }
            }
            ReviewAction::DeleteGoal { goal_id } => {
                let i = next.goal_index(goal_id)?;
                next.goals.remove(i);
                next.manual_links.remove(goal_id);
            }
            ReviewAction::AddGoal { span } | ReviewAction::AddRecommendation { span } => {
                let text = ctx.span_text(span)?;
                let id = span_id(span);
                if next.has_statement(&id) {
                    return Err(ActionError::Invalid(format!("{id} already exists")));
                }
                let statement = ReviewStatement { id, text, sources: vec![span.clone()], origin: Origin::Added };
                if matches!(action, ReviewAction::AddGoal { .. }) {
                    next.goals.push(statement);
                } else {
                    next.recommendations.push(statement);
                }
            }
            ReviewAction::Relink { goal_id, recommendation_id } => {
                next.goal_index(goal_id)?;
                if let Some(rec) = recommendation_id {
                    if !next.recommendations.iter().any(|r| &r.id == rec) {
                        return Err(ActionError::UnknownTarget(rec.clone()));
                    }
                }
                next.manual_links.insert(goal_id.clone(), recommendation_id.clone());
            }
            ReviewAction::AddComment { kri, target, text } => {
                if text.trim().is_empty() {
                    return Err(ActionError::Invalid("comment text is blank".into()));
                }
                if let Some(t) = target {
                    if ctx.unit(t).is_none() && !next.has_statement(t) {
                        return Err(ActionError::UnknownTarget(t.clone()));
                    }
                }
                let thread = kri.map_or(DOCUMENT_THREAD.to_string(), |k| k.to_string());
                next.comments.entry(thread).or_default().push(Comment {
                    sequence,
                    actor,
                    target: target.clone(),
                    text: text.clone(),
                });
            }
        }
        next.relink(ctx);
        Ok(next)
    }
}
