//! Document-level rating from the six KRI results, and triage ranking.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::AggregateError;
use crate::kri::{KriId, KriPolicy, KriResult, RiskRating};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentAssessment {
    pub document_id: String,
    /// One per KRI, in [`KriId::ALL`] order.
    pub kri_results: Vec<KriResult>,
    pub overall: RiskRating,
    pub score: f64,
    /// Whether a high-significance red forced the overall rating.
    pub override_applied: bool,
    pub policy_hash: String,
}

impl DocumentAssessment {
    pub fn rating(&self, kri: KriId) -> RiskRating {
        self.kri_results[kri.index()].rating
    }

    pub fn ratings(&self) -> [RiskRating; 6] {
        KriId::ALL.map(|k| self.rating(k))
    }

    pub fn red_count(&self) -> usize {
        self.kri_results.iter().filter(|r| r.rating == RiskRating::Red).count()
    }
}

/// Overall rating and score for six ratings in [`KriId::ALL`] order.
pub fn aggregate_ratings(ratings: &[RiskRating; 6], policy: &KriPolicy) -> (RiskRating, f64, bool) {
    let mut weighted = 0.0;
    let mut total = 0.0;
    for (kri, rating) in KriId::ALL.iter().zip(ratings) {
        let w = policy.weight(*kri);
        weighted += w * rating.value();
        total += w;
    }
    let score = if total > 0.0 { weighted / total } else { 0.0 };
    let forced =
        KriId::ALL.iter().zip(ratings).any(|(k, r)| *r == RiskRating::Red && policy.high_significance.contains(k));
    let overall = if forced {
        RiskRating::Red
    } else if score < policy.cutoffs.amber_from {
        RiskRating::Green
    } else if score < policy.cutoffs.red_from {
        RiskRating::Amber
    } else {
        RiskRating::Red
    };
    (overall, score, forced)
}

pub fn aggregate(
    document_id: &str,
    results: Vec<KriResult>,
    policy: &KriPolicy,
) -> Result<DocumentAssessment, AggregateError> {
    let mut slots: [Option<KriResult>; 6] = Default::default();
    for r in results {
        let slot = &mut slots[r.kri.index()];
        if slot.is_some() {
            return Err(AggregateError::Duplicate(r.kri.to_string()));
        }
        *slot = Some(r);
    }
    let mut kri_results = Vec::with_capacity(6);
    for (kri, slot) in KriId::ALL.iter().zip(slots) {
        kri_results.push(slot.ok_or_else(|| AggregateError::Missing(kri.to_string()))?);
    }
    let ratings = KriId::ALL.map(|k| kri_results[k.index()].rating);
    let (overall, score, override_applied) = aggregate_ratings(&ratings, policy);
    Ok(DocumentAssessment {
        document_id: document_id.to_string(),
        kri_results,
        overall,
        score,
        override_applied,
        policy_hash: policy.hash(),
    })
}

/// Triage order: overall severity, score and red count descending, then id.
pub fn triage_order(a: &DocumentAssessment, b: &DocumentAssessment) -> Ordering {
    b.overall
        .cmp(&a.overall)
        .then_with(|| b.score.total_cmp(&a.score))
        .then_with(|| b.red_count().cmp(&a.red_count()))
        .then_with(|| a.document_id.cmp(&b.document_id))
}

pub fn rank_documents(mut assessments: Vec<DocumentAssessment>) -> Vec<DocumentAssessment> {
    assessments.sort_by(triage_order);
    assessments
}
