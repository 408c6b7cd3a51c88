//! Random reviewer sessions against a [`Store`], checked step by step
//! against a set-based model of which ids exist.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use soaguard_core::document::{enumerate_units, DataUnit, UnitKind};
use soaguard_core::kri::KriId;
use soaguard_service::error::ServiceError;
use soaguard_service::store::{ActionRequest, Store};
use soaguard_service::{ReviewAction, ReviewState, Role, TextSpan};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub attempts: usize,
    /// Actions that appended an event.
    pub applied: usize,
    /// Re-sent requests answered from the log.
    pub duplicates: usize,
    /// Actions refused as invalid.
    pub rejected: usize,
    /// Key reuse or stale sequence numbers.
    pub conflicts: usize,
    pub events: usize,
    pub live_hash: String,
    pub replay_hash: String,
}

/// What the model expects the service to hold.
struct Model {
    goals: BTreeSet<String>,
    recommendations: BTreeSet<String>,
    comments: usize,
}

impl Model {
    fn of(state: &ReviewState) -> Self {
        Model {
            goals: state.goals.iter().map(|g| g.id.clone()).collect(),
            recommendations: state.recommendations.iter().map(|r| r.id.clone()).collect(),
            comments: state.comments.values().map(Vec::len).sum(),
        }
    }

    fn span_ok(&self, units: &[DataUnit], span: &TextSpan) -> bool {
        let Some(unit) = units.iter().find(|u| u.unit_id == span.unit_id && u.kind == UnitKind::Sentence) else {
            return false;
        };
        let t = &unit.text;
        span.start < span.end
            && span.end <= t.len()
            && t.is_char_boundary(span.start)
            && t.is_char_boundary(span.end)
            && !t[span.start..span.end].trim().is_empty()
            && !self.has(&span_key(span))
    }

    fn has(&self, id: &str) -> bool {
        self.goals.contains(id) || self.recommendations.contains(id)
    }

    /// Whether `action` should succeed, and if so the model after it.
    fn step(&self, units: &[DataUnit], action: &ReviewAction) -> Option<Model> {
        let mut next =
            Model { goals: self.goals.clone(), recommendations: self.recommendations.clone(), comments: self.comments };
        match action {
            ReviewAction::MergeGoals { goal_ids } => {
                let ids: BTreeSet<&String> = goal_ids.iter().collect();
                if ids.len() < 2 || !ids.iter().all(|id| self.goals.contains(*id)) {
                    return None;
                }
                for id in ids.iter().skip(1) {
                    next.goals.remove(*id);
                }
            }
            ReviewAction::DeleteGoal { goal_id } => {
                if !next.goals.remove(goal_id) {
                    return None;
                }
            }
            ReviewAction::AddGoal { span } => {
                if !self.span_ok(units, span) {
                    return None;
                }
                next.goals.insert(span_key(span));
            }
            ReviewAction::AddRecommendation { span } => {
                if !self.span_ok(units, span) {
                    return None;
                }
                next.recommendations.insert(span_key(span));
            }
            ReviewAction::Relink { goal_id, recommendation_id } => {
                let rec_ok = recommendation_id.as_ref().is_none_or(|r| self.recommendations.contains(r));
                if !self.goals.contains(goal_id) || !rec_ok {
                    return None;
                }
            }
            ReviewAction::AddComment { target, text, .. } => {
                let target_ok = target.as_ref().is_none_or(|t| units.iter().any(|u| &u.unit_id == t) || self.has(t));
                if text.trim().is_empty() || !target_ok {
                    return None;
                }
                next.comments += 1;
            }
        }
        Some(next)
    }

    fn matches(&self, state: &ReviewState) -> Result<(), String> {
        let actual = Model::of(state);
        if actual.goals != self.goals {
            return Err(format!("goals {:?}, model expects {:?}", actual.goals, self.goals));
        }
        if actual.recommendations != self.recommendations {
            return Err(format!(
                "recommendations {:?}, model expects {:?}",
                actual.recommendations, self.recommendations
            ));
        }
        if actual.comments != self.comments {
            return Err(format!("{} comments, model expects {}", actual.comments, self.comments));
        }
        Ok(())
    }
}

fn span_key(span: &TextSpan) -> String {
    format!("{}@{}-{}", span.unit_id, span.start, span.end)
}

fn pick<'a>(rng: &mut impl Rng, ids: impl Iterator<Item = &'a String>, unknown_rate: f64) -> String {
    let ids: Vec<&String> = ids.collect();
    if ids.is_empty() || rng.gen_bool(unknown_rate) {
        return format!("missing-{}", rng.gen_range(0..5));
    }
    ids.choose(rng).expect("non-empty").to_string()
}

fn random_span(rng: &mut impl Rng, units: &[DataUnit]) -> TextSpan {
    let sentences: Vec<&DataUnit> = units.iter().filter(|u| u.kind == UnitKind::Sentence).collect();
    let unit = if rng.gen_bool(0.05) || sentences.is_empty() {
        units.choose(rng).expect("document has units")
    } else {
        sentences.choose(rng).expect("non-empty")
    };
    let len = unit.text.len();
    let (start, end) = match rng.gen_range(0..10) {
        0 => (0, len + rng.gen_range(1..5)),
        1 => {
            let s = rng.gen_range(0..=len);
            (s, s)
        }
        2..=5 => (0, len),
        _ => {
            let a = rng.gen_range(0..=len);
            let b = rng.gen_range(0..=len);
            (a.min(b), a.max(b))
        }
    };
    TextSpan { unit_id: unit.unit_id.clone(), start, end }
}

fn random_action(rng: &mut impl Rng, state: &ReviewState, units: &[DataUnit]) -> ReviewAction {
    let goals = || state.goals.iter().map(|g| &g.id);
    match rng.gen_range(0..100) {
        0..=14 => {
            let n = rng.gen_range(1..=3);
            ReviewAction::MergeGoals { goal_ids: (0..n).map(|_| pick(rng, goals(), 0.05)).collect() }
        }
        15..=26 => ReviewAction::DeleteGoal { goal_id: pick(rng, goals(), 0.1) },
        27..=46 => ReviewAction::AddGoal { span: random_span(rng, units) },
        47..=56 => ReviewAction::AddRecommendation { span: random_span(rng, units) },
        57..=74 => ReviewAction::Relink {
            goal_id: pick(rng, goals(), 0.05),
            recommendation_id: if rng.gen_bool(0.2) {
                None
            } else {
                Some(pick(rng, state.recommendations.iter().map(|r| &r.id), 0.05))
            },
        },
        _ => {
            let target = match rng.gen_range(0..4) {
                0 => None,
                1 => Some(units.choose(rng).expect("document has units").unit_id.clone()),
                2 => Some(pick(rng, goals().chain(state.recommendations.iter().map(|r| &r.id)), 0.0)),
                _ => Some(format!("missing-{}", rng.gen_range(0..5))),
            };
            let text = if rng.gen_bool(0.1) { "  ".to_string() } else { format!("note {}", rng.gen::<u32>()) };
            let kri = if rng.gen_bool(0.3) { None } else { Some(*KriId::ALL.choose(rng).expect("six")) };
            ReviewAction::AddComment { kri, target, text }
        }
    }
}

/// Sends `attempts` random requests for an analysed document and checks
/// every answer and the final log.
pub fn run_action_fuzz(store: &Store, id: &str, attempts: usize, rng: &mut impl Rng) -> Result<FuzzReport, String> {
    let err = |e: ServiceError| e.to_string();
    let units = enumerate_units(&store.document(id).map_err(err)?);
    let mut model = Model::of(&store.review_state(id).map_err(err)?);
    let start_events = store.audit_log(id).map_err(err)?.len();
    let mut sent: Vec<(ActionRequest, soaguard_service::AuditEvent)> = Vec::new();
    let mut keys = HashSet::new();
    let mut report = FuzzReport { attempts, ..FuzzReport::default() };

    for step in 0..attempts {
        let roll = rng.gen_range(0..100);
        if roll < 12 && !sent.is_empty() {
            let (request, original) = sent.choose(rng).expect("non-empty").clone();
            let outcome = store.apply(id, request).map_err(|e| format!("step {step}: duplicate failed: {e}"))?;
            if !outcome.duplicate || outcome.event != original {
                return Err(format!("step {step}: duplicate key did not return the original event"));
            }
            report.duplicates += 1;
            continue;
        }
        if roll < 15 && !sent.is_empty() {
            let (mut request, _) = sent.choose(rng).expect("non-empty").clone();
            request.action = ReviewAction::AddComment { kri: None, target: None, text: format!("reuse {step}") };
            match store.apply(id, request) {
                Err(ServiceError::Conflict(_)) => report.conflicts += 1,
                other => return Err(format!("step {step}: reused key gave {other:?}")),
            }
            continue;
        }
        let sequence = (start_events + report.applied) as u64;
        if roll < 18 {
            let request = ActionRequest {
                action: ReviewAction::AddComment { kri: None, target: None, text: "stale".into() },
                actor: Some(Role::Auditor),
                idempotency_key: format!("stale-{step}"),
                expected_sequence: Some(sequence + rng.gen_range(1..3)),
            };
            match store.apply(id, request) {
                Err(ServiceError::Conflict(_)) => report.conflicts += 1,
                other => return Err(format!("step {step}: stale sequence gave {other:?}")),
            }
            continue;
        }

        let state = store.review_state(id).map_err(err)?;
        let action = random_action(rng, &state, &units);
        let key = format!("k{step}-{}", rng.gen::<u32>());
        assert!(keys.insert(key.clone()), "fresh key");
        let request = ActionRequest {
            action: action.clone(),
            actor: Some(if rng.gen_bool(0.5) { Role::Auditor } else { Role::Advisor }),
            idempotency_key: key,
            expected_sequence: if rng.gen_bool(0.5) { Some(sequence) } else { None },
        };
        let expected = model.step(&units, &action);
        match (store.apply(id, request.clone()), expected) {
            (Ok(outcome), Some(next)) => {
                if outcome.duplicate || outcome.event.sequence != sequence + 1 {
                    return Err(format!("step {step}: event {} after sequence {sequence}", outcome.event.sequence));
                }
                if outcome.event.state_hash != outcome.state.hash() {
                    return Err(format!("step {step}: event hash does not describe the returned state"));
                }
                next.matches(&outcome.state).map_err(|e| format!("step {step} ({}): {e}", action.kind()))?;
                model = next;
                report.applied += 1;
                sent.push((request, outcome.event));
            }
            (Err(ServiceError::Action(_)), None) => report.rejected += 1,
            (Ok(_), None) => return Err(format!("step {step}: {action:?} was accepted but should fail")),
            (Err(e), Some(_)) => return Err(format!("step {step}: {action:?} failed: {e}")),
            (Err(e), None) => return Err(format!("step {step}: {action:?} failed with the wrong error: {e}")),
        }
    }

    let log = store.audit_log(id).map_err(err)?;
    report.events = log.len() - start_events;
    if report.events != report.applied {
        return Err(format!("{} events for {} applied actions", report.events, report.applied));
    }
    if log.iter().enumerate().any(|(i, e)| e.sequence != i as u64 + 1) {
        return Err("sequence numbers have gaps".into());
    }
    let unique: HashSet<&str> = log.iter().map(|e| e.idempotency_key.as_str()).collect();
    if unique.len() != log.len() {
        return Err("an idempotency key appears twice in the log".into());
    }
    report.live_hash = store.assessment(id).map_err(err)?.state_hash;
    report.replay_hash = store.replay(id).map_err(err)?.hash();
    if report.live_hash != report.replay_hash {
        return Err("replayed state differs from the live state".into());
    }
    if let Some(last) = log.last() {
        if last.state_hash != report.live_hash {
            return Err("last event does not carry the live state hash".into());
        }
    }
    Ok(report)
}
