//! Goal and recommendation sentences, the pair scorer that links them, and
//! the completeness-of-advice rating.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::context::{AnalysisContext, GoalRecLabel};
use crate::document::{enumerate_units, SoaDocument, UnitKind};
use crate::error::ModelError;
use crate::kri::{Evidence, GoalRating, KriFinding, KriResult, MatchThresholds};
use crate::lexicon::TopicLexicon;
use crate::quantity::extract_numbers;
use crate::text::{tokenize, TextTask, TrainedTextModel};

pub const COSINE_WEIGHT: f64 = 0.5;
pub const TOPIC_WEIGHT: f64 = 0.3;
pub const NUMBER_WEIGHT: f64 = 0.2;

/// Words ignored by the pair scorer, including the verbs that only say
/// whether a sentence is a goal or a recommendation.
const STOPWORDS: &[&str] = &[
    "a",
    "about",
    "after",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "been",
    "before",
    "being",
    "both",
    "but",
    "by",
    "can",
    "could",
    "do",
    "does",
    "for",
    "from",
    "had",
    "has",
    "have",
    "he",
    "her",
    "his",
    "how",
    "i",
    "i'd",
    "i'm",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "me",
    "more",
    "most",
    "my",
    "no",
    "not",
    "of",
    "on",
    "or",
    "our",
    "out",
    "over",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "them",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "up",
    "us",
    "very",
    "was",
    "we",
    "we'd",
    "were",
    "what",
    "when",
    "which",
    "while",
    "who",
    "will",
    "with",
    "would",
    "you",
    "you'd",
    "your",
    "yours",
    "yourself",
    "like",
    "want",
    "wants",
    "wish",
    "hope",
    "goal",
    "goals",
    "aim",
    "objective",
    "priority",
    "recommend",
    "recommended",
    "recommends",
    "recommendation",
    "suggest",
    "advise",
    "advice",
    "propose",
    "important",
    "age",
];

/// Conservative suffix stripping so that "retire"/"retirement"/"retiring"
/// share a stem.
pub fn stem(word: &str) -> String {
    let mut current = word.to_string();
    while let Some(next) = strip_one(&current) {
        current = next;
    }
    current
}

fn strip_one(word: &str) -> Option<String> {
    const SUFFIXES: &[(&str, &str)] =
        &[("ments", ""), ("ment", ""), ("ing", ""), ("ies", "y"), ("ed", ""), ("es", ""), ("s", ""), ("e", "")];
    for (suffix, replacement) in SUFFIXES {
        if let Some(base) = word.strip_suffix(suffix) {
            if base.chars().count() >= 3 && !(*suffix == "s" && base.ends_with('s')) {
                return Some(format!("{base}{replacement}"));
            }
        }
    }
    None
}

fn content_terms(tokens: &[String]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| t.chars().next().is_some_and(char::is_alphabetic))
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .map(|t| stem(t))
        .collect()
}

/// What the scorer needs from one sentence.
#[derive(Debug, Clone)]
pub struct StatementProfile {
    terms: BTreeMap<String, f64>,
    topics: BTreeSet<String>,
    numbers: BTreeSet<Decimal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub confidence: f64,
    pub cosine: f64,
    /// Absent when neither sentence names a topic.
    pub topic: Option<f64>,
    /// Absent unless both sentences carry numbers.
    pub number: Option<f64>,
}

/// Weighted blend of tf-idf cosine, topic agreement and number agreement.
/// Components that are undefined for a pair are left out and the remaining
/// weights renormalized.
#[derive(Debug, Clone, Default)]
pub struct PairScorer {
    topics: TopicLexicon,
    idf: Option<HashMap<String, f64>>,
}

impl PairScorer {
    pub fn new(topics: TopicLexicon) -> Self {
        PairScorer { topics, idf: None }
    }

    /// Fits inverse document frequencies over `sentences`, each sentence
    /// being one document: `ln((1 + n) / (1 + df)) + 1`.
    pub fn with_idf<S: AsRef<str>>(mut self, sentences: &[S]) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        for s in sentences {
            let terms: BTreeSet<String> = content_terms(&tokenize(s.as_ref()).tokens).into_iter().collect();
            for t in terms {
                *df.entry(t).or_default() += 1;
            }
        }
        let n = sentences.len() as f64;
        self.idf = Some(df.into_iter().map(|(t, d)| (t, ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)).collect());
        self
    }

    fn idf(&self, term: &str) -> f64 {
        match &self.idf {
            None => 1.0,
            Some(map) => map.get(term).copied().unwrap_or(1.0),
        }
    }

    pub fn profile(&self, text: &str) -> StatementProfile {
        let tokens = tokenize(text).tokens;
        let mut terms: BTreeMap<String, f64> = BTreeMap::new();
        for t in content_terms(&tokens) {
            *terms.entry(t).or_default() += 1.0;
        }
        for (t, w) in terms.iter_mut() {
            *w *= self.idf(t);
        }
        StatementProfile {
            terms,
            topics: self.topics.topics(&tokens).into_iter().map(str::to_string).collect(),
            numbers: extract_numbers(text).iter().map(|n| n.signed_value().normalize()).collect(),
        }
    }

    pub fn score_profiles(&self, goal: &StatementProfile, rec: &StatementProfile) -> PairScore {
        let dot: f64 = goal.terms.iter().filter_map(|(t, w)| rec.terms.get(t).map(|v| w * v)).sum();
        let norm = |m: &BTreeMap<String, f64>| m.values().map(|w| w * w).sum::<f64>().sqrt();
        let denom = norm(&goal.terms) * norm(&rec.terms);
        let cosine = if denom > 0.0 { (dot / denom).clamp(0.0, 1.0) } else { 0.0 };
        let topic = jaccard(&goal.topics, &rec.topics);
        let number =
            if goal.numbers.is_empty() || rec.numbers.is_empty() { None } else { jaccard(&goal.numbers, &rec.numbers) };
        let mut total = COSINE_WEIGHT * cosine;
        let mut weight = COSINE_WEIGHT;
        if let Some(t) = topic {
            total += TOPIC_WEIGHT * t;
            weight += TOPIC_WEIGHT;
        }
        if let Some(n) = number {
            total += NUMBER_WEIGHT * n;
            weight += NUMBER_WEIGHT;
        }
        PairScore { confidence: (total / weight).clamp(0.0, 1.0), cosine, topic, number }
    }

    pub fn score(&self, goal: &str, recommendation: &str) -> PairScore {
        self.score_profiles(&self.profile(goal), &self.profile(recommendation))
    }
}

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Option<f64> {
    let union = a.union(b).count();
    (union > 0).then(|| a.intersection(b).count() as f64 / union as f64)
}

/// Confidence that `recommendation` addresses `goal`, with the default
/// topic lexicon and unit idf.
pub fn score_pair(goal: &str, recommendation: &str) -> f64 {
    PairScorer::default().score(goal, recommendation).confidence
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub unit_id: String,
    pub text: String,
}

impl Statement {
    pub fn new(unit_id: impl Into<String>, text: impl Into<String>) -> Self {
        Statement { unit_id: unit_id.into(), text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalLink {
    pub goal_id: String,
    pub recommendation_id: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalAdviceMap {
    pub goals: Vec<Statement>,
    pub recommendations: Vec<Statement>,
    /// Best link per goal, for goals whose best confidence reaches
    /// `amber_min`.
    pub links: Vec<GoalLink>,
    /// Other pairs at or above `amber_min`, kept for reviewers.
    #[serde(default)]
    pub candidates: Vec<GoalLink>,
}

impl GoalAdviceMap {
    pub fn best_link(&self, goal_id: &str) -> Option<&GoalLink> {
        self.links.iter().find(|l| l.goal_id == goal_id)
    }
}

/// Links each goal to its highest-scoring recommendation (the earliest one
/// on ties) when that score reaches `amber_min`.
pub fn map_goals(
    goals: &[Statement],
    recommendations: &[Statement],
    scorer: &PairScorer,
    thresholds: &MatchThresholds,
) -> GoalAdviceMap {
    let rec_profiles: Vec<StatementProfile> = recommendations.iter().map(|r| scorer.profile(&r.text)).collect();
    let mut links = Vec::new();
    let mut candidates = Vec::new();
    for goal in goals {
        let gp = scorer.profile(&goal.text);
        let scores: Vec<f64> = rec_profiles.iter().map(|rp| scorer.score_profiles(&gp, rp).confidence).collect();
        let mut best: Option<usize> = None;
        for (i, &s) in scores.iter().enumerate() {
            if best.is_none_or(|b| s > scores[b]) {
                best = Some(i);
            }
        }
        let Some(b) = best.filter(|&b| scores[b] >= thresholds.amber_min) else { continue };
        let link = |i: usize| GoalLink {
            goal_id: goal.unit_id.clone(),
            recommendation_id: recommendations[i].unit_id.clone(),
            confidence: scores[i],
        };
        links.push(link(b));
        candidates.extend((0..scores.len()).filter(|&i| i != b && scores[i] >= thresholds.amber_min).map(link));
    }
    GoalAdviceMap { goals: goals.to_vec(), recommendations: recommendations.to_vec(), links, candidates }
}

/// Unlinked goals are red, weakly linked goals amber, the rest green; the
/// KRI takes the worst goal, and a document without goals is red.
pub fn rate_goal_advice(map: &GoalAdviceMap, thresholds: &MatchThresholds) -> KriResult {
    let mut goals = Vec::with_capacity(map.goals.len());
    let mut evidence = Vec::new();
    for goal in &map.goals {
        let link = map.best_link(&goal.unit_id);
        let best_confidence = link.map(|l| l.confidence);
        let rating = thresholds.rate(best_confidence);
        goals.push(GoalRating { goal_id: goal.unit_id.clone(), best_confidence, rating });
        let ev = match link {
            Some(l) => Evidence::new(&goal.unit_id, format!("goal linked to {} ({rating})", l.recommendation_id))
                .with_values(vec![l.recommendation_id.clone()])
                .with_confidence(l.confidence),
            None => Evidence::new(&goal.unit_id, format!("goal has no linked recommendation ({rating})")),
        };
        evidence.push(ev);
    }
    if goals.is_empty() {
        evidence.push(Evidence::document("no goals identified"));
    }
    KriResult::from_finding(KriFinding::GoalAdvice { goals, thresholds: *thresholds }, evidence)
}

/// Sentence unit id, text, label and confidence for every sentence.
pub fn label_goal_rec(
    model: &TrainedTextModel,
    doc: &SoaDocument,
) -> Result<Vec<(Statement, GoalRecLabel, f64)>, ModelError> {
    model.expect_task(TextTask::GoalRec)?;
    Ok(enumerate_units(doc)
        .into_iter()
        .filter(|u| u.kind == UnitKind::Sentence)
        .map(|u| {
            let dist = model.classify(&u.text);
            let label = GoalRecLabel::from_label(dist.label()).expect("goal_rec label set");
            (Statement::new(u.unit_id, u.text), label, dist.confidence())
        })
        .collect())
}

/// Scorer with idf fitted over every sentence of the document.
pub fn document_scorer(ctx: &AnalysisContext<'_>, topics: &TopicLexicon) -> PairScorer {
    let sentences: Vec<&str> = ctx.sentences().map(|s| s.unit.text.as_str()).collect();
    PairScorer::new(topics.clone()).with_idf(&sentences)
}

/// Goal/recommendation map over the labelled sentences of a document.
pub fn goal_advice_map(ctx: &AnalysisContext<'_>, scorer: &PairScorer, thresholds: &MatchThresholds) -> GoalAdviceMap {
    let pick = |label: GoalRecLabel| -> Vec<Statement> {
        ctx.sentences()
            .filter(|s| s.labels.goal_rec == label)
            .map(|s| Statement::new(&s.unit.unit_id, &s.unit.text))
            .collect()
    };
    map_goals(&pick(GoalRecLabel::Goal), &pick(GoalRecLabel::Recommendation), scorer, thresholds)
}

/// KRI 1 for a labelled document: the map plus its rating.
pub fn evaluate_goal_advice(
    ctx: &AnalysisContext<'_>,
    topics: &TopicLexicon,
    thresholds: &MatchThresholds,
) -> (GoalAdviceMap, KriResult) {
    let scorer = document_scorer(ctx, topics);
    let map = goal_advice_map(ctx, &scorer, thresholds);
    let result = rate_goal_advice(&map, thresholds);
    (map, result)
}
