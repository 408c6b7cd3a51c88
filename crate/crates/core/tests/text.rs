use proptest::prelude::*;
use soaguard_core::text::{
    sentiment, tokenize, train_classifier, TextTask, TrainConfig, NEGATIVE_TERMS, POSITIVE_TERMS,
};

#[test]
fn tokenizer_examples() {
    assert_eq!(tokenize("Retire at 60, with $1,200.50!").tokens, ["retire", "at", "60", "with", "$", "1200.50"]);
    assert_eq!(tokenize("improve by -$3,500").tokens, ["improve", "by", "-", "$", "3500"]);
    assert!(tokenize("  ...  ").tokens.is_empty());
}

#[test]
fn sentiment_examples() {
    assert!(sentiment("Your cash flow will improve.").polarity > 0.0);
    assert!(sentiment("You will have a reduced cash flow.").polarity < 0.0);
    assert!(sentiment("This will not improve your position.").polarity < 0.0);
    assert!(sentiment("No change, but your savings improve.").polarity > 0.0);
    assert_eq!(sentiment("Plain statement.").polarity, 0.0);
}

fn small_task() -> Vec<(String, String)> {
    let goals =
        ["I want to retire early", "My goal is to buy a home", "I would like to travel", "We want to save more"];
    let recs = [
        "We recommend you retire later",
        "We recommend a home loan",
        "We suggest you travel less",
        "We advise you to save",
    ];
    let other = ["Fees are payable monthly", "This document is confidential", "Call us anytime", "Keep this safe"];
    let mut out = Vec::new();
    for i in 0..15 {
        for (bank, label) in [(&goals, "goal"), (&recs, "recommendation"), (&other, "neither")] {
            out.push((format!("{} {i}", bank[i % 4]), label.to_string()));
        }
    }
    out
}

#[test]
fn classifier_learns_and_validates() {
    let (model, report) = train_classifier(&small_task(), TextTask::GoalRec, &TrainConfig::default()).unwrap();
    assert_eq!(report.examples, 45);
    assert_eq!(report.validation_examples, 9);
    assert!(report.train_accuracy > 0.95);
    assert_eq!(model.classify("I want to retire").label(), "goal");
    assert_eq!(model.classify("We recommend you save").label(), "recommendation");
    let (again, _) = train_classifier(&small_task(), TextTask::GoalRec, &TrainConfig::default()).unwrap();
    assert_eq!(again.to_json(), model.to_json());
}

#[test]
fn classifier_rejects_bad_data() {
    let mut data = small_task();
    data.push(("text".into(), "bogus".into()));
    assert!(train_classifier(&data, TextTask::GoalRec, &TrainConfig::default()).is_err());
    let one_label: Vec<_> = small_task().into_iter().filter(|(_, l)| l == "goal").collect();
    assert!(train_classifier(&one_label, TextTask::GoalRec, &TrainConfig::default()).is_err());
}

#[test]
fn tampered_model_is_rejected() {
    let (model, _) = train_classifier(&small_task(), TextTask::GoalRec, &TrainConfig::default()).unwrap();
    let json = model.to_json();
    let back = soaguard_core::text::TrainedTextModel::from_json(json.as_bytes()).unwrap();
    assert_eq!(back, model);
    let mut tampered = model.clone();
    tampered.parameters.biases[0] += 1.0;
    let raw = serde_json::to_string(&tampered).unwrap();
    assert!(soaguard_core::text::TrainedTextModel::from_json(raw.as_bytes()).is_err());
}

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec!["your", "cash", "flow", "will", "the", "fund", "year", "not"]),
        0..10,
    )
    .prop_map(|w| w.into_iter().map(String::from).collect())
}

proptest! {
    #[test]
    fn probabilities_sum_to_one(text in "\\PC{0,80}") {
        static MODEL: std::sync::OnceLock<soaguard_core::text::TrainedTextModel> = std::sync::OnceLock::new();
        let model = MODEL.get_or_init(|| train_classifier(&small_task(), TextTask::GoalRec, &TrainConfig::default()).unwrap().0);
        let d = model.classify(&text);
        prop_assert_eq!(d.probabilities.len(), 3);
        prop_assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(d.probabilities.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn positive_clause_never_lowers_polarity(base in words(), term in prop::sample::select(POSITIVE_TERMS.to_vec())) {
        let text = base.join(" ");
        let more = format!("{text}. It will {term}.");
        prop_assert!(sentiment(&more).polarity >= sentiment(&text).polarity);
    }

    #[test]
    fn negative_clause_never_raises_polarity(base in words(), term in prop::sample::select(NEGATIVE_TERMS.to_vec())) {
        let text = base.join(" ");
        let more = format!("{text}. It will {term}.");
        prop_assert!(sentiment(&more).polarity <= sentiment(&text).polarity);
    }

    #[test]
    fn polarity_in_range(text in "\\PC{0,80}") {
        let p = sentiment(&text).polarity;
        prop_assert!((-1.0..=1.0).contains(&p));
    }
}
