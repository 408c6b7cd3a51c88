mod common;

use std::fs;

use rand::rngs::StdRng;
use rand::SeedableRng;

use soaguard_core::document::{enumerate_units, UnitKind};
use soaguard_core::kri::{KriId, KriPolicy, MatchThresholds, RiskRating};
use soaguard_core::pipeline::Analyzer;
use soaguard_oracles::audit::run_action_fuzz;
use soaguard_service::review::{Origin, DOCUMENT_THREAD};
use soaguard_service::store::{ActionRequest, Ingested};
use soaguard_service::{ActionError, ReviewAction, Role, ServiceError, Store, TextSpan};

fn request(key: &str, action: ReviewAction) -> ActionRequest {
    ActionRequest { action, actor: Some(Role::Auditor), idempotency_key: key.into(), expected_sequence: None }
}

fn comment(text: &str) -> ReviewAction {
    ReviewAction::AddComment { kri: None, target: None, text: text.into() }
}

/// First generated document with at least `goals` machine goals.
fn doc_with_goals(goals: usize) -> soaguard_core::document::SoaDocument {
    let store_dir = tempfile::tempdir().unwrap();
    let store = Store::open(store_dir.path(), Some(common::analyzer())).unwrap();
    for d in common::documents(40, 21) {
        store.ingest(d.clone()).unwrap();
        if store.analyze(&d.id).unwrap().review.goals.len() >= goals {
            return d;
        }
    }
    panic!("no document with {goals} goals");
}

#[test]
fn baseline_matches_machine_output() {
    let dir = tempfile::tempdir().unwrap();
    let docs = common::documents(12, 3);
    let store = common::analysed_store(dir.path(), &docs);
    for d in &docs {
        let view = store.assessment(&d.id).unwrap();
        assert_eq!(view.sequence, 0);
        assert_eq!(view.review.goal_advice, view.assessment.rating(KriId::GoalAdvice), "{}", d.id);
        assert_eq!(view.review.links, view.goal_map.links);
        assert_eq!(store.replay(&d.id).unwrap().hash(), view.state_hash);
        assert!(view.review.goals.iter().all(|g| g.origin == Origin::Machine && g.sources.len() == 1));
    }
}

#[test]
fn merge_keeps_smaller_id_and_both_spans() {
    let doc = doc_with_goals(2);
    let dir = tempfile::tempdir().unwrap();
    let store = common::analysed_store(dir.path(), std::slice::from_ref(&doc));
    let state = store.review_state(&doc.id).unwrap();
    let (a, b) = (state.goals[0].clone(), state.goals[1].clone());
    let out = store
        .apply(&doc.id, request("m1", ReviewAction::MergeGoals { goal_ids: vec![b.id.clone(), a.id.clone()] }))
        .unwrap();
    assert_eq!(out.event.sequence, 1);
    assert_eq!(out.state.goals.len(), state.goals.len() - 1);
    let merged = out.state.goals.iter().find(|g| g.origin == Origin::Merged).unwrap();
    let (low, high) = if a.id < b.id { (&a, &b) } else { (&b, &a) };
    assert_eq!(merged.id, low.id);
    assert_eq!(merged.text, format!("{} {}", low.text, high.text));
    assert_eq!(merged.sources.len(), 2);
    assert!(!out.state.goals.iter().any(|g| g.id == high.id));
    assert_eq!(store.audit_log(&doc.id).unwrap().len(), 1);
}

#[test]
fn delete_twice_is_an_invalid_target() {
    let doc = doc_with_goals(1);
    let dir = tempfile::tempdir().unwrap();
    let store = common::analysed_store(dir.path(), std::slice::from_ref(&doc));
    let goal = store.review_state(&doc.id).unwrap().goals[0].id.clone();
    store.apply(&doc.id, request("d1", ReviewAction::DeleteGoal { goal_id: goal.clone() })).unwrap();
    let err = store.apply(&doc.id, request("d2", ReviewAction::DeleteGoal { goal_id: goal.clone() })).unwrap_err();
    assert!(matches!(err, ServiceError::Action(ActionError::UnknownTarget(ref t)) if *t == goal));
    assert_eq!(err.status().as_u16(), 422);
    assert_eq!(store.audit_log(&doc.id).unwrap().len(), 1);
}

#[test]
fn comments_land_in_their_thread() {
    let doc = doc_with_goals(1);
    let dir = tempfile::tempdir().unwrap();
    let store = common::analysed_store(dir.path(), std::slice::from_ref(&doc));
    let action =
        ReviewAction::AddComment { kri: Some(KriId::Insurance), target: None, text: "Cover was discussed.".into() };
    let out = store.apply(&doc.id, request("c1", action)).unwrap();
    assert_eq!(out.state.comments["insurance"].len(), 1);
    assert_eq!(out.state.comments["insurance"][0].sequence, 1);
    let out = store.apply(&doc.id, request("c2", comment("General note"))).unwrap();
    assert_eq!(out.state.comments[DOCUMENT_THREAD].len(), 1);
    let blank = store.apply(&doc.id, request("c3", comment("   "))).unwrap_err();
    assert_eq!(blank.status().as_u16(), 400);
    assert_eq!(store.audit_log(&doc.id).unwrap().len(), 2);
}

#[test]
fn added_spans_must_resolve() {
    let doc = doc_with_goals(1);
    let dir = tempfile::tempdir().unwrap();
    let store = common::analysed_store(dir.path(), std::slice::from_ref(&doc));
    let units = enumerate_units(&doc);
    let sentence = units.iter().find(|u| u.kind == UnitKind::Sentence).unwrap();
    let add = |key: &str, start: usize, end: usize, unit: &str| {
        store
            .apply(&doc.id, request(key, ReviewAction::AddGoal { span: TextSpan { unit_id: unit.into(), start, end } }))
    };
    let len = sentence.text.len();
    for (start, end) in [(0, len + 1), (3, 3), (5, 2)] {
        let err = add("bad", start, end, &sentence.unit_id).unwrap_err();
        assert!(matches!(err, ServiceError::Action(ActionError::InvalidSpan(_))), "{start}..{end}");
    }
    assert!(add("bad", 0, 1, "nowhere").is_err());
    if let Some(table) = units.iter().find(|u| u.kind == UnitKind::Table) {
        assert!(add("bad", 0, 1, &table.unit_id).is_err());
    }
    let out = add("ok", 0, len, &sentence.unit_id).unwrap();
    let added = out.state.goals.last().unwrap();
    assert_eq!(added.origin, Origin::Added);
    assert_eq!(added.text, sentence.text.trim());
    assert!(matches!(add("again", 0, len, &sentence.unit_id), Err(ServiceError::Action(ActionError::Invalid(_)))));
    assert_eq!(store.audit_log(&doc.id).unwrap().len(), 1);
}

#[test]
fn relink_overrides_and_clears_links() {
    let doc = doc_with_goals(1);
    let dir = tempfile::tempdir().unwrap();
    let store = common::analysed_store(dir.path(), std::slice::from_ref(&doc));
    let state = store.review_state(&doc.id).unwrap();
    let goal = state.goals[0].id.clone();
    let out = store
        .apply(&doc.id, request("r0", ReviewAction::Relink { goal_id: goal.clone(), recommendation_id: None }))
        .unwrap();
    assert!(out.state.links.iter().all(|l| l.goal_id != goal));
    assert_eq!(out.state.goal_advice, RiskRating::Red);
    if let Some(rec) = state.recommendations.first() {
        let action = ReviewAction::Relink { goal_id: goal.clone(), recommendation_id: Some(rec.id.clone()) };
        let out = store.apply(&doc.id, request("r1", action)).unwrap();
        let link = out.state.links.iter().find(|l| l.goal_id == goal).unwrap();
        assert_eq!(link.recommendation_id, rec.id);
    }
    let missing = ReviewAction::Relink { goal_id: goal, recommendation_id: Some("nope".into()) };
    assert!(matches!(
        store.apply(&doc.id, request("r2", missing)),
        Err(ServiceError::Action(ActionError::UnknownTarget(_)))
    ));
}

#[test]
fn idempotency_and_sequence_conflicts() {
    let doc = doc_with_goals(1);
    let dir = tempfile::tempdir().unwrap();
    let store = common::analysed_store(dir.path(), std::slice::from_ref(&doc));
    let first = store.apply(&doc.id, request("k", comment("one"))).unwrap();
    let again = store.apply(&doc.id, request("k", comment("one"))).unwrap();
    assert!(again.duplicate && !first.duplicate);
    assert_eq!(again.event, first.event);
    assert!(matches!(store.apply(&doc.id, request("k", comment("two"))), Err(ServiceError::Conflict(_))));
    let stale = ActionRequest { expected_sequence: Some(0), ..request("k2", comment("two")) };
    assert!(matches!(store.apply(&doc.id, stale), Err(ServiceError::Conflict(_))));
    let current = ActionRequest { expected_sequence: Some(1), ..request("k2", comment("two")) };
    assert_eq!(store.apply(&doc.id, current).unwrap().sequence, 2);
    assert!(matches!(store.apply(&doc.id, request(" ", comment("x"))), Err(ServiceError::BadRequest(_))));
    let anonymous = ActionRequest { actor: None, ..request("k3", comment("x")) };
    assert!(matches!(store.apply(&doc.id, anonymous), Err(ServiceError::BadRequest(_))));
    assert_eq!(store.audit_log(&doc.id).unwrap().len(), 2);
}

#[test]
fn log_survives_reopen_and_detects_tampering() {
    let doc = doc_with_goals(1);
    let dir = tempfile::tempdir().unwrap();
    let live = {
        let store = common::analysed_store(dir.path(), std::slice::from_ref(&doc));
        for i in 0..3 {
            store.apply(&doc.id, request(&format!("k{i}"), comment(&format!("note {i}")))).unwrap();
        }
        store.assessment(&doc.id).unwrap().state_hash
    };
    let store = Store::open(dir.path(), None).unwrap();
    assert_eq!(store.assessment(&doc.id).unwrap().state_hash, live);
    assert_eq!(store.apply(&doc.id, request("k3", comment("more"))).unwrap().sequence, 4);
    drop(store);

    let log = dir.path().join("documents").join(&doc.id).join("events.ndjson");
    let original = fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = original.lines().collect();

    fs::write(&log, format!("{}\n{}\n", lines[0], lines[1])).unwrap();
    assert!(matches!(Store::open(dir.path(), None), Err(ServiceError::Integrity { .. })));

    fs::write(&log, format!("{}\n{}\n{}\n", lines[0], lines[2], lines[3])).unwrap();
    assert!(matches!(Store::open(dir.path(), None), Err(ServiceError::Integrity { .. })));

    fs::write(&log, original.replace("note 1", "note X")).unwrap();
    let err = Store::open(dir.path(), None).err().unwrap();
    assert!(matches!(err, ServiceError::Integrity { .. }));
    assert_eq!(err.status().as_u16(), 500);

    fs::write(&log, &original).unwrap();
    let store = Store::open(dir.path(), None).unwrap();
    fs::write(&log, format!("{}\n", lines[0])).unwrap();
    assert!(matches!(store.replay(&doc.id), Err(ServiceError::Integrity { .. })));
}

#[test]
fn analysis_rules() {
    let dir = tempfile::tempdir().unwrap();
    let docs = common::documents(2, 9);
    let no_models = Store::open(dir.path(), None).unwrap();
    no_models.ingest(docs[0].clone()).unwrap();
    assert!(matches!(no_models.analyze(&docs[0].id), Err(ServiceError::ModelUnavailable)));
    assert!(matches!(no_models.assessment(&docs[0].id), Err(ServiceError::NotAnalyzed(_))));
    assert!(matches!(no_models.apply(&docs[0].id, request("k", comment("x"))), Err(ServiceError::NotAnalyzed(_))));
    drop(no_models);

    let store = Store::open(dir.path(), Some(common::analyzer())).unwrap();
    assert!(matches!(store.analyze("unknown"), Err(ServiceError::NotFound(_))));
    let first = store.analyze(&docs[0].id).unwrap();
    let second = store.analyze(&docs[0].id).unwrap();
    assert_eq!(first, second);
    store.apply(&docs[0].id, request("k", comment("x"))).unwrap();
    assert_eq!(store.analyze(&docs[0].id).unwrap().sequence, 1);
    drop(store);

    let strict = KriPolicy { thresholds: MatchThresholds { green_min: 0.99, amber_min: 0.98 }, ..KriPolicy::default() };
    let other = std::sync::Arc::new(Analyzer::new(common::models().clone(), strict));
    let store = Store::open(dir.path(), Some(other)).unwrap();
    assert!(matches!(store.analyze(&docs[0].id), Err(ServiceError::Conflict(_))));
}

#[test]
fn ingest_rules() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path(), None).unwrap();
    let mut doc = common::documents(1, 4).remove(0);
    assert_eq!(store.ingest(doc.clone()).unwrap().1, Ingested::Created);
    assert_eq!(store.ingest(doc.clone()).unwrap().1, Ingested::Unchanged);
    let mut changed = doc.clone();
    changed.title.push_str(" v2");
    assert!(matches!(store.ingest(changed), Err(ServiceError::Conflict(_))));
    for bad in ["../escape", ".hidden", "a/b", "", "spaces here"] {
        doc.id = bad.into();
        assert!(matches!(store.ingest(doc.clone()), Err(ServiceError::BadRequest(_))), "{bad:?}");
    }
    assert!(matches!(store.ingest_bytes(b"{not json"), Err(ServiceError::BadRequest(_))));
    assert_eq!(store.document_ids().len(), 1);
}

#[test]
fn thousand_action_fuzz() {
    let dir = tempfile::tempdir().unwrap();
    let docs = common::documents(2, 17);
    let store = common::analysed_store(dir.path(), &docs);
    for (i, d) in docs.iter().enumerate() {
        let report = run_action_fuzz(&store, &d.id, 1000, &mut StdRng::seed_from_u64(i as u64)).unwrap();
        assert!(report.applied > 300 && report.rejected > 50 && report.duplicates > 50, "{report:?}");
        assert_eq!(report.events, report.applied);
    }
    drop(store);
    let reopened = Store::open(dir.path(), None).unwrap();
    for d in &docs {
        assert_eq!(reopened.replay(&d.id).unwrap(), reopened.review_state(&d.id).unwrap());
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

    #[test]
    fn replay_equals_live_state(seed in proptest::prelude::any::<u64>(), doc in 0usize..6) {
        let docs = common::documents(6, 23);
        let dir = tempfile::tempdir().unwrap();
        let store = common::analysed_store(dir.path(), &docs[doc..=doc]);
        let report = run_action_fuzz(&store, &docs[doc].id, 60, &mut StdRng::seed_from_u64(seed));
        proptest::prop_assert!(report.is_ok(), "{:?}", report);
    }
}
