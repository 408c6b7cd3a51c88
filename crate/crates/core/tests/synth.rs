use soaguard_core::document::serialize_document;
use soaguard_core::kri::{KriId, RiskRating};
use soaguard_core::par::Execution;
use soaguard_core::synth::*;

fn intended(s: &Scenario) -> [RiskRating; 6] {
    use RiskRating::*;
    let goal = s
        .goals
        .iter()
        .map(|(_, o)| match o {
            GoalOutcome::Matched => Green,
            GoalOutcome::Weak => Amber,
            GoalOutcome::Unmatched => Red,
        })
        .max()
        .unwrap_or(Red);
    let diversification = match s.asset_table {
        AssetScenario::Diversified => Green,
        AssetScenario::Concentrated | AssetScenario::None => Amber,
        AssetScenario::SingleClass => Red,
    };
    let disclosed = s.position == PositionScenario::Disclosed || s.cashflow == CashflowScenario::NegativeAcknowledged;
    let has_position = s.position != PositionScenario::None || disclosed;
    let client = if s.position == PositionScenario::Misstated {
        Red
    } else if disclosed {
        Green
    } else {
        match (has_position, s.projection) {
            (false, ProjectionScenario::None) => Red,
            (_, ProjectionScenario::Short) => Amber,
            _ => Green,
        }
    };
    let cashflow = match s.cashflow {
        CashflowScenario::Positive => Green,
        CashflowScenario::NegativeAcknowledged | CashflowScenario::Unreadable => Amber,
        CashflowScenario::NegativeUnacknowledged if disclosed => Amber,
        CashflowScenario::NegativeUnacknowledged | CashflowScenario::None => Red,
    };
    let balance = match s.balance {
        None => Red,
        Some(b) if b < 200_000 => Red,
        Some(b) if b < 250_000 => Amber,
        Some(_) => Green,
    };
    let insurance = match s.insurance {
        InsuranceScenario::Recommend => Green,
        InsuranceScenario::Defer | InsuranceScenario::ScopeOut => Amber,
        InsuranceScenario::None => Red,
    };
    [goal, diversification, client, cashflow, balance, insurance]
}

#[test]
fn noiseless_documents_land_in_their_scenario_bands() {
    let corpus = generate_corpus(600, &CorpusMix::default().with_noise(0.0), 3).unwrap();
    for (doc, truth) in &corpus {
        let got: Vec<RiskRating> = KriId::ALL.iter().map(|&k| truth.rating(k)).collect();
        assert_eq!(got, intended(&truth.scenario), "{}: {:?}\n{}", doc.id, truth.scenario, serialize_document(doc));
    }
}

#[test]
fn noise_rarely_moves_the_truth() {
    let corpus = generate_corpus(400, &CorpusMix::default().with_noise(0.05), 4).unwrap();
    let agree = corpus.iter().filter(|(_, t)| KriId::ALL.map(|k| t.rating(k)) == intended(&t.scenario)).count();
    assert!(agree as f64 >= 0.95 * corpus.len() as f64, "{agree} of {}", corpus.len());
}

#[test]
fn all_green_profile_is_green() {
    let corpus = generate_corpus(100, &CorpusMix::single(CorpusProfile::all_green()), 9).unwrap();
    for (doc, truth) in &corpus {
        assert_eq!(truth.overall, RiskRating::Green, "{}", doc.id);
        assert!(truth.kri_ratings.values().all(|&r| r == RiskRating::Green), "{}", doc.id);
    }
}

#[test]
fn every_rating_occurs_in_the_default_mix() {
    let corpus = generate_corpus(300, &CorpusMix::default(), 5).unwrap();
    for k in KriId::ALL {
        for r in RiskRating::ALL {
            assert!(corpus.iter().any(|(_, t)| t.rating(k) == r), "{k} never {r}");
        }
    }
}

#[test]
fn seeded_and_execution_independent() {
    let mix = CorpusMix::default();
    let a = generate_corpus_with(40, &mix, 11, Execution::Sequential).unwrap();
    let b = generate_corpus_with(40, &mix, 11, Execution::Threads(3)).unwrap();
    assert_eq!(a, b);
    let c = generate_corpus(40, &mix, 12).unwrap();
    assert_ne!(a, c);
    assert_eq!(a[0].0.id, "soa-s11-0001");
}

#[test]
fn corpus_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate_corpus(15, &CorpusMix::default(), 2).unwrap();
    write_corpus(dir.path(), &corpus).unwrap();
    assert_eq!(read_corpus(dir.path()).unwrap(), corpus);
    let docs = read_documents(dir.path()).unwrap();
    assert_eq!(docs.len(), 15);

    let victim = dir.path().join(format!("{}.truth.json", corpus[0].0.id));
    std::fs::write(&victim, "{").unwrap();
    assert!(matches!(read_corpus(dir.path()), Err(soaguard_core::error::CorpusIoError::Truth { .. })));
}

#[test]
fn invalid_profiles() {
    let mut p = CorpusProfile::mixed();
    p.goals = CountRange::new(3, 1);
    assert!(generate_document(&p, 0).is_err());
    let mut p = CorpusProfile::mixed();
    p.noise_rate = 1.5;
    assert!(generate_document(&p, 0).is_err());
    let mut p = CorpusProfile::mixed();
    p.insurance.clear();
    assert!(generate_document(&p, 0).is_err());
}
