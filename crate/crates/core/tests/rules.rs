use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soaguard_core::goals::{map_goals, rate_goal_advice, PairScorer, Statement};
use soaguard_core::kri::MatchThresholds;
use soaguard_core::lexicon::{default_net_lexicon, AssetTaxonomy};
use soaguard_core::table::{
    cashflow_outcome, check_diversification, projection_horizon, table_features, DiversificationLevel, NetSign,
};
use soaguard_oracles::{self as oracles, table};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rows(cells: &[&[&str]]) -> Vec<Vec<String>> {
    cells.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect()
}

#[test]
fn diversification_examples() {
    let tax = AssetTaxonomy::default();
    let t = table(
        &["Asset class", "Allocation"],
        rows(&[&["Cash", "10%"], &["Australian shares", "50%"], &["Bonds", "40%"]]),
    );
    let f = check_diversification(&t, &tax);
    assert_eq!((f.nonzero_classes, f.level()), (3, DiversificationLevel::Diversified));
    let t = table(&["Asset", "Weight"], rows(&[&["Cash", "0.95"], &["Property", "0.05"]]));
    assert_eq!(check_diversification(&t, &tax).level(), DiversificationLevel::Borderline);
    let t = table(&["Asset", "Allocation"], rows(&[&["Term deposits", "60%"], &["Cash management account", "40%"]]));
    let f = check_diversification(&t, &tax);
    assert_eq!((f.nonzero_classes, f.level()), (1, DiversificationLevel::NotDiversified));
    let t = table(&["Asset", "Allocation"], rows(&[&["Cash", "90%"], &["Bonds", "10%"]]));
    assert_eq!(check_diversification(&t, &tax).level(), DiversificationLevel::Diversified);
}

#[test]
fn cashflow_examples() {
    let net = default_net_lexicon();
    let t = table(&["Item", "Amount"], rows(&[&["Income", "$80,000"], &["Expenses", "-$85,000"], &["Net", "-$5,000"]]));
    assert_eq!(cashflow_outcome(&t, &net).net_sign, NetSign::Negative);
    let t = table(&["Item", "Amount"], rows(&[&["Income", "$80,000"], &["Expenses", "($70,000)"]]));
    let o = cashflow_outcome(&t, &net);
    assert_eq!((o.net_sign, o.net_row), (NetSign::Positive, None));
    let t = table(&["Item", "Status"], rows(&[&["Income", "steady"]]));
    assert_eq!(cashflow_outcome(&t, &net).net_sign, NetSign::Unknown);
}

#[test]
fn horizon_examples() {
    let years: Vec<String> = (2024..2036).map(|y| y.to_string()).collect();
    let mut header = vec!["Year".to_string()];
    header.extend(years.clone());
    let t = soaguard_core::document::Table { caption: None, header, rows: vec![] };
    assert_eq!(projection_horizon(&t), 12);
    let t = table(&["Item", "Value"], rows(&[&["2024", "$1"], &["2025", "$2"]]));
    assert_eq!(projection_horizon(&t), 0);
    assert_eq!(projection_horizon(&table(&["a"], vec![])), 0);
}

proptest! {
    #[test]
    fn diversification_matches_oracle(seed in any::<u64>()) {
        oracles::check_diversification_instance(&mut rng(seed), &AssetTaxonomy::default()).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn cashflow_matches_oracle(seed in any::<u64>()) {
        oracles::check_cashflow_instance(&mut rng(seed)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn insurance_matches_oracle(seed in any::<u64>()) {
        oracles::check_insurance_instance(&mut rng(seed)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn map_goals_matches_oracle(seed in any::<u64>()) {
        oracles::check_map_goals_instance(&mut rng(seed)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn features_ignore_row_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = oracles::cashflow_instance(&mut r);
        let mut shuffled = inst.table.clone();
        rand::seq::SliceRandom::shuffle(shuffled.rows.as_mut_slice(), &mut r);
        prop_assert_eq!(table_features(&inst.table), table_features(&shuffled));
        let inst = oracles::asset_instance(&mut r, &AssetTaxonomy::default());
        let mut reversed = inst.table.clone();
        reversed.rows.reverse();
        prop_assert_eq!(table_features(&inst.table), table_features(&reversed));
    }

    #[test]
    fn stricter_thresholds_never_improve(
        goals in prop::collection::vec("[a-z ]{3,30}", 1..4),
        recs in prop::collection::vec("[a-z ]{3,30}", 0..4),
        amber in 0.05f64..0.5,
        green_gap in 0.05f64..0.4,
        raise in 0.0f64..0.2,
    ) {
        let goals: Vec<Statement> = goals.iter().enumerate().map(|(i, t)| Statement::new(format!("g{i}"), t)).collect();
        let recs: Vec<Statement> = recs.iter().enumerate().map(|(i, t)| Statement::new(format!("r{i}"), t)).collect();
        let loose = MatchThresholds { amber_min: amber, green_min: (amber + green_gap).min(1.0) };
        let strict = MatchThresholds {
            amber_min: (loose.amber_min + raise).min(0.99),
            green_min: (loose.green_min + raise).min(1.0),
        };
        prop_assume!(strict.validate().is_ok());
        let scorer = PairScorer::default();
        let a = rate_goal_advice(&map_goals(&goals, &recs, &scorer, &loose), &loose).rating;
        let b = rate_goal_advice(&map_goals(&goals, &recs, &scorer, &strict), &strict).rating;
        prop_assert!(b >= a, "loose {} strict {}", a, b);
    }
}
