//! Append-only audit events and their hash chain.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::review::{ReviewAction, ReviewContext, ReviewState, Role};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEvent {
    /// 1-based and gap-free per document.
    pub sequence: u64,
    pub timestamp: DateTime<Utc>,
    pub actor: Role,
    pub idempotency_key: String,
    pub action: ReviewAction,
    /// Hash of the review state after this event.
    pub state_hash: String,
    /// `hash` of the previous event, or the baseline state hash for the first.
    pub prev_hash: String,
    pub hash: String,
}

#[derive(Serialize)]
struct Hashed<'a> {
    sequence: u64,
    timestamp: &'a DateTime<Utc>,
    actor: Role,
    idempotency_key: &'a str,
    action: &'a ReviewAction,
    state_hash: &'a str,
    prev_hash: &'a str,
}

impl AuditEvent {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sequence: u64,
        timestamp: DateTime<Utc>,
        actor: Role,
        idempotency_key: String,
        action: ReviewAction,
        state_hash: String,
        prev_hash: String,
    ) -> Self {
        let mut event = AuditEvent {
            sequence,
            timestamp,
            actor,
            idempotency_key,
            action,
            state_hash,
            prev_hash,
            hash: String::new(),
        };
        event.hash = event.compute_hash();
        event
    }

    pub fn compute_hash(&self) -> String {
        let body = Hashed {
            sequence: self.sequence,
            timestamp: &self.timestamp,
            actor: self.actor,
            idempotency_key: &self.idempotency_key,
            action: &self.action,
            state_hash: &self.state_hash,
            prev_hash: &self.prev_hash,
        };
        hex::encode(Sha256::digest(serde_json::to_vec(&body).expect("event serializes")))
    }
}

/// Hash the next event must chain from.
pub fn chain_head(baseline: &ReviewState, events: &[AuditEvent]) -> String {
    events.last().map_or_else(|| baseline.hash(), |e| e.hash.clone())
}

/// Folds `events` over `baseline`, checking sequence numbers, the hash chain
/// and every recorded state hash.
pub fn replay(baseline: &ReviewState, events: &[AuditEvent], ctx: &ReviewContext<'_>) -> Result<ReviewState, String> {
    let mut state = baseline.clone();
    let mut prev = baseline.hash();
    for (i, event) in events.iter().enumerate() {
        let expected = i as u64 + 1;
        if event.sequence != expected {
            return Err(format!("event {} found where {expected} was expected", event.sequence));
        }
        if event.prev_hash != prev {
            return Err(format!("event {expected} does not chain from its predecessor"));
        }
        if event.compute_hash() != event.hash {
            return Err(format!("event {expected} was altered"));
        }
        state = state
            .apply(&event.action, event.actor, event.sequence, ctx)
            .map_err(|e| format!("event {expected} no longer applies: {e}"))?;
        if state.hash() != event.state_hash {
            return Err(format!("event {expected} replays to a different state"));
        }
        prev = event.hash.clone();
    }
    Ok(state)
}
