use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soaguard_core::aggregate::{aggregate, aggregate_ratings, rank_documents, DocumentAssessment};
use soaguard_core::error::{AggregateError, PolicyError};
use soaguard_core::kri::{InsuranceCategory, KriFinding, KriId, KriPolicy, KriResult, RiskRating};
use soaguard_oracles::{self as oracles, random_policy, random_ratings};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #[test]
    fn override_and_monotonicity(seed in any::<u64>()) {
        oracles::check_aggregation_instance(&mut rng(seed)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn weight_scale_invariance(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let mut r = rng(seed);
        let ratings = random_ratings(&mut r);
        let policy = random_policy(&mut r);
        let mut scaled = policy.clone();
        for k in KriId::ALL {
            scaled.weights.insert(k, policy.weight(k) * scale);
        }
        let (o1, s1, f1) = aggregate_ratings(&ratings, &policy);
        let (o2, s2, f2) = aggregate_ratings(&ratings, &scaled);
        prop_assert!((s1 - s2).abs() < 1e-9);
        prop_assert_eq!(f1, f2);
        // a score sitting on a cutoff may round either way after scaling
        let near_cutoff = [policy.cutoffs.amber_from, policy.cutoffs.red_from].iter().any(|c| (s1 - c).abs() < 1e-9);
        if !near_cutoff {
            prop_assert_eq!(o1, o2);
        }
    }

    #[test]
    fn policy_json_round_trip(seed in any::<u64>()) {
        let policy = random_policy(&mut rng(seed));
        let back = KriPolicy::from_json(policy.to_json().as_bytes()).unwrap();
        prop_assert_eq!(&back, &policy);
        prop_assert_eq!(back.hash(), policy.hash());
    }

    #[test]
    fn ranking_is_sorted_permutation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let policy = KriPolicy::default();
        let docs: Vec<DocumentAssessment> = (0..8).map(|i| assessment(&format!("d{i}"), random_ratings(&mut r), &policy)).collect();
        let ranked = rank_documents(docs.clone());
        prop_assert_eq!(ranked.len(), docs.len());
        for w in ranked.windows(2) {
            prop_assert!(w[0].overall >= w[1].overall);
            if w[0].overall == w[1].overall {
                prop_assert!(w[0].score >= w[1].score);
            }
        }
        let mut reversed = docs.clone();
        reversed.reverse();
        prop_assert_eq!(rank_documents(reversed), ranked);
    }
}

fn result_with(kri: KriId, rating: RiskRating) -> KriResult {
    // any finding whose rule yields `rating`; consistency is not required here
    let finding = KriFinding::Insurance { category: InsuranceCategory::None, scope_out_rating: RiskRating::Amber };
    KriResult { kri, rating, finding, evidence: vec![], statistics: None }
}

fn assessment(id: &str, ratings: [RiskRating; 6], policy: &KriPolicy) -> DocumentAssessment {
    let results = KriId::ALL.iter().zip(ratings).map(|(&k, r)| result_with(k, r)).collect();
    aggregate(id, results, policy).unwrap()
}

#[test]
fn default_policy_examples() {
    use RiskRating::*;
    let p = KriPolicy::default();
    assert_eq!(aggregate_ratings(&[Green, Green, Green, Green, Red, Green], &p).0, Red);
    assert_eq!(aggregate_ratings(&[Green, Red, Green, Green, Green, Green], &p).0, Green);
    assert_eq!(aggregate_ratings(&[Green, Red, Red, Green, Green, Green], &p).0, Amber);
    assert_eq!(aggregate_ratings(&[Amber, Red, Red, Red, Amber, Green], &p).0, Red);
}

#[test]
fn aggregate_rejects_bad_inputs() {
    let p = KriPolicy::default();
    let mut results: Vec<KriResult> = KriId::ALL.iter().map(|&k| result_with(k, RiskRating::Green)).collect();
    results.pop();
    assert!(matches!(aggregate("x", results.clone(), &p), Err(AggregateError::Missing(_))));
    results.push(result_with(KriId::GoalAdvice, RiskRating::Green));
    assert!(matches!(aggregate("x", results, &p), Err(AggregateError::Duplicate(_))));
}

#[test]
fn invalid_policies() {
    let bad = [
        r#"{"balance_red_below": "300000"}"#,
        r#"{"thresholds": {"green_min": 0.3, "amber_min": 0.5}}"#,
        r#"{"weights": {"goal_advice": -1}}"#,
        r#"{"cutoffs": {"amber_from": 0.7, "red_from": 0.2}}"#,
        r#"{"unknown_field": 1}"#,
    ];
    for raw in bad {
        assert!(KriPolicy::from_json(raw.as_bytes()).is_err(), "{raw}");
    }
    assert!(matches!(KriPolicy::from_json(b"{"), Err(PolicyError::Malformed(_))));
    assert_eq!(KriPolicy::from_json(b"{}").unwrap(), KriPolicy::default());
}
