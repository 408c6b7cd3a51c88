//! Directory-per-document persistence and the per-document write path.
//!
//! ```text
//! {root}/documents/{id}/document.json
//!                      /assessment.json
//!                      /events.ndjson
//!                      /state.json
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use chrono::{DateTime, Utc};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use soaguard_core::aggregate::{rank_documents, DocumentAssessment};
use soaguard_core::context::AnalysisContext;
use soaguard_core::document::{enumerate_units, parse_document, serialize_document, DataUnit, SoaDocument};
use soaguard_core::goals::{document_scorer, PairScorer};
use soaguard_core::kri::{KriId, MatchThresholds, RiskRating};
use soaguard_core::pipeline::{Analysis, Analyzer, Resources};

use crate::error::ServiceError;
use crate::events::{chain_head, replay, AuditEvent};
use crate::report::batch_csv;
use crate::review::{ReviewAction, ReviewContext, ReviewState, Role};

const DOCUMENT_FILE: &str = "document.json";
const ASSESSMENT_FILE: &str = "assessment.json";
const EVENTS_FILE: &str = "events.ndjson";
const STATE_FILE: &str = "state.json";
const MAX_KEY_LEN: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredAssessment {
    pub analysis: Analysis,
    pub thresholds: MatchThresholds,
    pub analyzed_at: DateTime<Utc>,
    pub elapsed_ms: f64,
}

/// Written after every append so a shortened log can be told apart from an
/// empty one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogHead {
    pub sequence: u64,
    pub head_hash: String,
    pub state_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRequest {
    pub action: ReviewAction,
    #[serde(default)]
    pub actor: Option<Role>,
    pub idempotency_key: String,
    /// Sequence the client last saw; a mismatch is a conflict.
    #[serde(default)]
    pub expected_sequence: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionOutcome {
    pub event: AuditEvent,
    /// True when the key had been seen and nothing was appended.
    pub duplicate: bool,
    pub sequence: u64,
    pub state: ReviewState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessmentView {
    pub document_id: String,
    pub assessment: DocumentAssessment,
    pub analyzed_at: DateTime<Utc>,
    pub elapsed_ms: f64,
    pub goal_map: soaguard_core::goals::GoalAdviceMap,
    pub review: ReviewState,
    pub sequence: u64,
    pub state_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentSummary {
    pub document_id: String,
    pub title: String,
    pub analyzed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overall: Option<RiskRating>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratings: Option<BTreeMap<KriId, RiskRating>>,
    /// KRI 1 after review, when it differs from the machine rating.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reviewed_goal_advice: Option<RiskRating>,
    pub events: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ingested {
    Created,
    Unchanged,
}

struct Reviewed {
    stored: StoredAssessment,
    scorer: PairScorer,
    baseline: ReviewState,
    state: ReviewState,
    events: Vec<AuditEvent>,
    keys: HashMap<String, usize>,
}

struct DocEntry {
    document: SoaDocument,
    canonical: String,
    units: Vec<DataUnit>,
    review: Option<Reviewed>,
}

impl DocEntry {
    fn context<'a>(&'a self, r: &'a Reviewed) -> ReviewContext<'a> {
        ReviewContext { units: &self.units, scorer: &r.scorer, thresholds: &r.stored.thresholds }
    }
}

/// Ids become directory names, so only a conservative character set is
/// accepted.
pub fn validate_document_id(id: &str) -> Result<(), ServiceError> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(ServiceError::BadRequest(format!("document id {id:?} must be 1-128 characters of [A-Za-z0-9._-]")))
    }
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ServiceError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| ServiceError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| ServiceError::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(id: &str, path: &Path) -> Result<T, ServiceError> {
    let raw = fs::read(path).map_err(|e| ServiceError::io(path, e))?;
    serde_json::from_slice(&raw).map_err(|e| ServiceError::integrity(id, format!("{}: {e}", path.display())))
}

fn build_review(
    id: &str,
    doc: &SoaDocument,
    stored: StoredAssessment,
    units: &[DataUnit],
    resources: &Resources,
) -> Result<Reviewed, ServiceError> {
    if stored.analysis.annotations.len() != units.len()
        || stored.analysis.annotations.iter().zip(units).any(|(a, u)| a.unit_id != u.unit_id)
    {
        return Err(ServiceError::integrity(id, "assessment does not match the document's units"));
    }
    let ctx = AnalysisContext::new(doc, stored.analysis.annotations.clone());
    let scorer = document_scorer(&ctx, &resources.topics);
    let review_ctx = ReviewContext { units, scorer: &scorer, thresholds: &stored.thresholds };
    let baseline = ReviewState::baseline(&stored.analysis.goal_map, &review_ctx);
    Ok(Reviewed { state: baseline.clone(), baseline, scorer, stored, events: Vec::new(), keys: HashMap::new() })
}

pub struct Store {
    root: PathBuf,
    analyzer: Option<Arc<Analyzer>>,
    resources: Resources,
    docs: RwLock<BTreeMap<String, Arc<Mutex<DocEntry>>>>,
}

impl Store {
    /// Opens or creates a store under `root`, verifying every audit log.
    /// Without an analyzer the store serves existing data but cannot
    /// analyse.
    pub fn open(root: impl Into<PathBuf>, analyzer: Option<Arc<Analyzer>>) -> Result<Self, ServiceError> {
        let root = root.into();
        let dir = root.join("documents");
        fs::create_dir_all(&dir).map_err(|e| ServiceError::io(&dir, e))?;
        let resources = analyzer.as_ref().map_or_else(Resources::default, |a| a.resources.clone());
        let store = Store { root, analyzer, resources, docs: RwLock::new(BTreeMap::new()) };
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| ServiceError::io(&dir, e))? {
            let entry = entry.map_err(|e| ServiceError::io(&dir, e))?;
            if entry.path().is_dir() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        let mut docs = BTreeMap::new();
        for id in ids {
            let loaded = store.load(&id)?;
            docs.insert(id, Arc::new(Mutex::new(loaded)));
        }
        *store.docs.write() = docs;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn has_models(&self) -> bool {
        self.analyzer.is_some()
    }

    fn doc_dir(&self, id: &str) -> PathBuf {
        self.root.join("documents").join(id)
    }

    fn load(&self, id: &str) -> Result<DocEntry, ServiceError> {
        validate_document_id(id).map_err(|_| ServiceError::integrity(id, "directory name is not a valid id"))?;
        let dir = self.doc_dir(id);
        let path = dir.join(DOCUMENT_FILE);
        let raw = fs::read(&path).map_err(|e| ServiceError::io(&path, e))?;
        let document = parse_document(&raw).map_err(|e| ServiceError::integrity(id, e.to_string()))?;
        if document.id != id {
            return Err(ServiceError::integrity(id, format!("document.json holds {}", document.id)));
        }
        let units = enumerate_units(&document);
        let mut entry = DocEntry { canonical: serialize_document(&document), document, units, review: None };
        let assessment_path = dir.join(ASSESSMENT_FILE);
        if assessment_path.exists() {
            let stored: StoredAssessment = read_json(id, &assessment_path)?;
            let mut review = build_review(id, &entry.document, stored, &entry.units, &self.resources)?;
            let events = read_events(id, &dir.join(EVENTS_FILE))?;
            let head_path = dir.join(STATE_FILE);
            let head: LogHead = if head_path.exists() {
                read_json(id, &head_path)?
            } else {
                LogHead { sequence: 0, head_hash: review.baseline.hash(), state_hash: review.baseline.hash() }
            };
            let state = replay(&review.baseline, &events, &entry.context(&review))
                .map_err(|reason| ServiceError::integrity(id, reason))?;
            if head.sequence != events.len() as u64 {
                return Err(ServiceError::integrity(
                    id,
                    format!("log holds {} events but {} were recorded", events.len(), head.sequence),
                ));
            }
            if head.head_hash != chain_head(&review.baseline, &events) || head.state_hash != state.hash() {
                return Err(ServiceError::integrity(id, "log head does not match the recorded head"));
            }
            review.keys = events.iter().enumerate().map(|(i, e)| (e.idempotency_key.clone(), i)).collect();
            review.state = state;
            review.events = events;
            entry.review = Some(review);
        }
        Ok(entry)
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<DocEntry>>, ServiceError> {
        self.docs.read().get(id).cloned().ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    pub fn document_ids(&self) -> Vec<String> {
        self.docs.read().keys().cloned().collect()
    }

    pub fn ingest_bytes(&self, raw: &[u8]) -> Result<(String, Ingested), ServiceError> {
        let doc = parse_document(raw).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        self.ingest(doc)
    }

    /// Stores a document. Re-sending identical content is a no-op; different
    /// content under an existing id is a conflict.
    pub fn ingest(&self, document: SoaDocument) -> Result<(String, Ingested), ServiceError> {
        validate_document_id(&document.id)?;
        let id = document.id.clone();
        let canonical = serialize_document(&document);
        let mut docs = self.docs.write();
        if let Some(existing) = docs.get(&id) {
            return if existing.lock().canonical == canonical {
                Ok((id, Ingested::Unchanged))
            } else {
                Err(ServiceError::Conflict(format!("document {id} already exists with different content")))
            };
        }
        let dir = self.doc_dir(&id);
        fs::create_dir_all(&dir).map_err(|e| ServiceError::io(&dir, e))?;
        write_atomic(&dir.join(DOCUMENT_FILE), canonical.as_bytes())?;
        let units = enumerate_units(&document);
        docs.insert(id.clone(), Arc::new(Mutex::new(DocEntry { document, canonical, units, review: None })));
        Ok((id, Ingested::Created))
    }

    /// Runs the pipeline and persists the result. Re-analysis of a reviewed
    /// document must reproduce the stored analysis.
    pub fn analyze(&self, id: &str) -> Result<AssessmentView, ServiceError> {
        let analyzer = self.analyzer.as_ref().ok_or(ServiceError::ModelUnavailable)?;
        let slot = self.entry(id)?;
        let document = slot.lock().document.clone();
        let start = Instant::now();
        let analysis = analyzer.analyze(&document);
        let elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;

        let mut entry = slot.lock();
        if let Some(review) = &entry.review {
            if review.stored.analysis == analysis && review.stored.thresholds == analyzer.policy.thresholds {
                drop(entry);
                return self.assessment(id);
            }
            if !review.events.is_empty() {
                return Err(ServiceError::Conflict(format!(
                    "document {id} has {} review events and re-analysis changed the result",
                    review.events.len()
                )));
            }
        }
        let stored =
            StoredAssessment { analysis, thresholds: analyzer.policy.thresholds, analyzed_at: Utc::now(), elapsed_ms };
        let review = build_review(id, &entry.document, stored, &entry.units, &self.resources)?;
        let dir = self.doc_dir(id);
        let json = serde_json::to_vec_pretty(&review.stored).expect("assessment serializes");
        write_atomic(&dir.join(ASSESSMENT_FILE), &json)?;
        let head = LogHead { sequence: 0, head_hash: review.baseline.hash(), state_hash: review.baseline.hash() };
        write_atomic(&dir.join(STATE_FILE), &serde_json::to_vec(&head).expect("head serializes"))?;
        let events = dir.join(EVENTS_FILE);
        fs::write(&events, b"").map_err(|e| ServiceError::io(&events, e))?;
        entry.review = Some(review);
        drop(entry);
        self.assessment(id)
    }

    pub fn assessment(&self, id: &str) -> Result<AssessmentView, ServiceError> {
        let slot = self.entry(id)?;
        let entry = slot.lock();
        let r = entry.review.as_ref().ok_or_else(|| ServiceError::NotAnalyzed(id.to_string()))?;
        Ok(AssessmentView {
            document_id: id.to_string(),
            assessment: r.stored.analysis.assessment.clone(),
            analyzed_at: r.stored.analyzed_at,
            elapsed_ms: r.stored.elapsed_ms,
            goal_map: r.stored.analysis.goal_map.clone(),
            review: r.state.clone(),
            sequence: r.events.len() as u64,
            state_hash: r.state.hash(),
        })
    }

    pub fn document(&self, id: &str) -> Result<SoaDocument, ServiceError> {
        Ok(self.entry(id)?.lock().document.clone())
    }

    pub fn review_state(&self, id: &str) -> Result<ReviewState, ServiceError> {
        let slot = self.entry(id)?;
        let entry = slot.lock();
        Ok(entry.review.as_ref().ok_or_else(|| ServiceError::NotAnalyzed(id.to_string()))?.state.clone())
    }

    /// Applies one reviewer action under the document's lock.
    pub fn apply(&self, id: &str, request: ActionRequest) -> Result<ActionOutcome, ServiceError> {
        let key = request.idempotency_key.trim();
        if key.is_empty() || key.len() > MAX_KEY_LEN {
            return Err(ServiceError::BadRequest(format!("idempotency_key must be 1-{MAX_KEY_LEN} characters")));
        }
        let actor = request.actor.ok_or_else(|| ServiceError::BadRequest("actor is required".into()))?;
        let slot = self.entry(id)?;
        let mut guard = slot.lock();
        let entry = &mut *guard;
        let review = entry.review.as_mut().ok_or_else(|| ServiceError::NotAnalyzed(id.to_string()))?;
        let sequence = review.events.len() as u64;

        if let Some(&i) = review.keys.get(key) {
            let original = &review.events[i];
            if original.action != request.action || original.actor != actor {
                return Err(ServiceError::Conflict(format!("idempotency key {key:?} was used for a different action")));
            }
            return Ok(ActionOutcome {
                event: original.clone(),
                duplicate: true,
                sequence,
                state: review.state.clone(),
            });
        }
        if let Some(expected) = request.expected_sequence {
            if expected != sequence {
                return Err(ServiceError::Conflict(format!("expected sequence {expected}, document is at {sequence}")));
            }
        }

        let next_sequence = sequence + 1;
        let ctx = ReviewContext { units: &entry.units, scorer: &review.scorer, thresholds: &review.stored.thresholds };
        let state = review.state.apply(&request.action, actor, next_sequence, &ctx)?;
        let event = AuditEvent::new(
            next_sequence,
            Utc::now(),
            actor,
            key.to_string(),
            request.action,
            state.hash(),
            chain_head(&review.baseline, &review.events),
        );

        let dir = self.doc_dir(id);
        let log = dir.join(EVENTS_FILE);
        let mut line = serde_json::to_vec(&event).expect("event serializes");
        line.push(b'\n');
        let mut file =
            OpenOptions::new().create(true).append(true).open(&log).map_err(|e| ServiceError::io(&log, e))?;
        file.write_all(&line).and_then(|_| file.sync_data()).map_err(|e| ServiceError::io(&log, e))?;
        let head =
            LogHead { sequence: next_sequence, head_hash: event.hash.clone(), state_hash: event.state_hash.clone() };
        write_atomic(&dir.join(STATE_FILE), &serde_json::to_vec(&head).expect("head serializes"))?;

        review.keys.insert(event.idempotency_key.clone(), review.events.len());
        review.events.push(event.clone());
        review.state = state.clone();
        Ok(ActionOutcome { event, duplicate: false, sequence: next_sequence, state })
    }

    pub fn audit_log(&self, id: &str) -> Result<Vec<AuditEvent>, ServiceError> {
        let slot = self.entry(id)?;
        let entry = slot.lock();
        Ok(entry.review.as_ref().map(|r| r.events.clone()).unwrap_or_default())
    }

    /// Rebuilds the review state from the files on disk, independently of
    /// the in-memory state.
    pub fn replay(&self, id: &str) -> Result<ReviewState, ServiceError> {
        self.entry(id)?;
        let entry = self.load(id)?;
        match entry.review {
            Some(r) => Ok(r.state),
            None => Err(ServiceError::NotAnalyzed(id.to_string())),
        }
    }

    /// Summaries of all documents; `by_risk` puts analysed documents first in
    /// triage order, otherwise ids ascend.
    pub fn list(&self, by_risk: bool) -> Vec<DocumentSummary> {
        let slots: Vec<(String, Arc<Mutex<DocEntry>>)> =
            self.docs.read().iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let mut summaries = Vec::with_capacity(slots.len());
        let mut assessments = Vec::new();
        for (id, slot) in slots {
            let entry = slot.lock();
            let mut s = DocumentSummary {
                document_id: id,
                title: entry.document.title.clone(),
                analyzed: false,
                overall: None,
                score: None,
                ratings: None,
                reviewed_goal_advice: None,
                events: 0,
            };
            if let Some(r) = &entry.review {
                let a = &r.stored.analysis.assessment;
                s.analyzed = true;
                s.overall = Some(a.overall);
                s.score = Some(a.score);
                s.ratings = Some(KriId::ALL.iter().map(|&k| (k, a.rating(k))).collect());
                s.events = r.events.len() as u64;
                if r.state.goal_advice != a.rating(KriId::GoalAdvice) {
                    s.reviewed_goal_advice = Some(r.state.goal_advice);
                }
                assessments.push(a.clone());
            }
            summaries.push(s);
        }
        if by_risk {
            let order: HashMap<String, usize> =
                rank_documents(assessments).into_iter().enumerate().map(|(i, a)| (a.document_id, i)).collect();
            summaries
                .sort_by_key(|s| (order.get(&s.document_id).copied().unwrap_or(usize::MAX), s.document_id.clone()));
        }
        summaries
    }

    /// Machine assessments of every analysed document.
    pub fn assessments(&self) -> Vec<DocumentAssessment> {
        let slots: Vec<Arc<Mutex<DocEntry>>> = self.docs.read().values().cloned().collect();
        slots.iter().filter_map(|s| s.lock().review.as_ref().map(|r| r.stored.analysis.assessment.clone())).collect()
    }

    pub fn batch_csv(&self) -> String {
        batch_csv(&self.assessments())
    }
}

fn read_events(id: &str, path: &Path) -> Result<Vec<AuditEvent>, ServiceError> {
    let raw = match fs::read_to_string(path) {
        Ok(raw) => raw,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(ServiceError::io(path, e)),
    };
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| ServiceError::integrity(id, format!("events.ndjson line {}: {e}", i + 1)))
        })
        .collect()
}
