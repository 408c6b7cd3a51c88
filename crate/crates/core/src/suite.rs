//! Evaluators for the diversification, client position, cash flow, starting
//! balance and insurance indicators.

use crate::context::{AnalysisContext, InsuranceLabel};
use crate::kri::{Evidence, InsuranceCategory, KriFinding, KriPolicy, KriResult};
use crate::lexicon::{AssetTaxonomy, PhraseLexicon};
use crate::quantity::{balance_statistics, extract_money, extract_numbers, MonetaryAmount, Sign};
use crate::table::{cashflow_outcome, check_diversification, projection_horizon, NetSign, TableType};
use crate::text::SentimentLexicon;

pub const INSURANCE_TYPES: &[&str] = &["life", "trauma", "tpd", "total and permanent disability", "income protection"];

pub fn rate_diversification(ctx: &AnalysisContext<'_>, taxonomy: &AssetTaxonomy) -> KriResult {
    let mut levels = Vec::new();
    let mut evidence = Vec::new();
    for t in ctx.tables_of(TableType::AssetClass) {
        let finding = check_diversification(t.table, taxonomy);
        let level = finding.level();
        let mut values: Vec<String> = finding.classes_found.iter().cloned().collect();
        if let Some(share) = finding.max_share_exact {
            values.push(format!("max_share={}", share.round_dp(4).normalize()));
        }
        evidence.push(
            Evidence::new(
                &t.unit.unit_id,
                format!("{} nonzero asset classes, {level:?}", finding.nonzero_classes).to_lowercase(),
            )
            .with_values(values),
        );
        levels.push(level);
    }
    if levels.is_empty() {
        evidence.push(Evidence::document("no asset class table found"));
    }
    KriResult::from_finding(KriFinding::Diversification { levels }, evidence)
}

fn has_negative_number(text: &str) -> bool {
    extract_numbers(text).iter().any(|n| n.sign == Sign::Negative)
}

/// Position sentences with their polarity.
fn position_polarities<'c>(ctx: &'c AnalysisContext<'_>, sentiment: &SentimentLexicon) -> Vec<(&'c str, &'c str, f64)> {
    ctx.sentences()
        .filter(|s| s.labels.position)
        .map(|s| (s.unit.unit_id.as_str(), s.unit.text.as_str(), sentiment.score(&s.unit.text).polarity))
        .collect()
}

pub fn rate_client_position(ctx: &AnalysisContext<'_>, sentiment: &SentimentLexicon, policy: &KriPolicy) -> KriResult {
    let mut evidence = Vec::new();
    let mut misstatements = 0;
    let mut disclosed_downsides = 0;
    let positions = position_polarities(ctx, sentiment);
    for &(unit_id, text, polarity) in &positions {
        let negative = has_negative_number(text);
        let note = if polarity > 0.0 && negative {
            misstatements += 1;
            "positive outlook stated with a negative amount"
        } else if polarity < 0.0 {
            disclosed_downsides += 1;
            "downside disclosed"
        } else {
            "position statement"
        };
        let values = extract_numbers(text).iter().map(|n| n.signed_value().to_string()).collect();
        evidence.push(Evidence::new(unit_id, note).with_values(values).with_confidence(polarity));
    }
    let mut projection_horizons = Vec::new();
    for t in ctx.tables_of(TableType::Projections) {
        let horizon = projection_horizon(t.table);
        evidence.push(Evidence::new(&t.unit.unit_id, format!("projection covers {horizon} years")));
        projection_horizons.push(horizon);
    }
    if positions.is_empty() && projection_horizons.is_empty() {
        evidence.push(Evidence::document("no position statements or projections table found"));
    }
    let finding = KriFinding::ClientPosition {
        position_sentences: positions.len(),
        projection_horizons,
        misstatements,
        disclosed_downsides,
        horizon_years_min: policy.horizon_years_min,
    };
    KriResult::from_finding(finding, evidence)
}

pub fn rate_cashflow(ctx: &AnalysisContext<'_>, net: &PhraseLexicon, sentiment: &SentimentLexicon) -> KriResult {
    let mut evidence = Vec::new();
    let mut outcomes = Vec::new();
    for t in ctx.tables_of(TableType::Cashflow) {
        let outcome = cashflow_outcome(t.table, net);
        let note = match outcome.net_sign {
            NetSign::Positive => "net cash flow positive",
            NetSign::Negative => "net cash flow negative",
            NetSign::Unknown => "net cash flow could not be read",
        };
        let values = outcome.net_value.iter().map(|v| v.to_string()).collect();
        evidence.push(Evidence::new(&t.unit.unit_id, note).with_values(values));
        outcomes.push(outcome.net_sign);
    }
    let acknowledgement =
        position_polarities(ctx, sentiment).into_iter().find(|&(_, _, polarity)| polarity < 0.0).map(|(id, _, _)| id);
    if outcomes.is_empty() {
        evidence.push(Evidence::document("no cash flow table found"));
    } else if let Some(id) = acknowledgement {
        if outcomes.contains(&NetSign::Negative) {
            evidence.push(Evidence::new(id, "negative outcome acknowledged"));
        }
    }
    KriResult::from_finding(KriFinding::Cashflow { outcomes, acknowledged: acknowledgement.is_some() }, evidence)
}

pub fn rate_starting_balance(ctx: &AnalysisContext<'_>, policy: &KriPolicy) -> KriResult {
    let mut evidence = Vec::new();
    let mut all: Vec<MonetaryAmount> = Vec::new();
    for s in ctx.sentences().filter(|s| s.labels.balance) {
        let amounts = extract_money(&s.unit.text);
        let mut ev = Evidence::new(&s.unit.unit_id, "balance mentioned")
            .with_values(amounts.iter().map(|a| a.to_string()).collect());
        ev.statistics = balance_statistics(&amounts);
        evidence.push(ev);
        all.extend(amounts);
    }
    for t in ctx.tables().filter(|t| t.labels.balance) {
        let amounts: Vec<MonetaryAmount> = t.table.body_cells().flat_map(extract_money).collect();
        let mut ev = Evidence::new(&t.unit.unit_id, "balance table")
            .with_values(amounts.iter().map(|a| a.to_string()).collect());
        ev.statistics = balance_statistics(&amounts);
        evidence.push(ev);
        all.extend(amounts);
    }
    let statistics = balance_statistics(&all);
    if statistics.is_none() {
        evidence.push(Evidence::document("starting balance could not be determined"));
    }
    let finding = KriFinding::StartingBalance {
        median: statistics.as_ref().map(|s| s.median),
        red_below: policy.balance_red_below,
        amber_below: policy.balance_amber_below,
    };
    let mut result = KriResult::from_finding(finding, evidence);
    result.statistics = statistics;
    result
}

/// Category by precedence: recommended over deferred over scoped out.
pub fn insurance_category(labels: impl IntoIterator<Item = InsuranceLabel>) -> InsuranceCategory {
    let mut category = InsuranceCategory::None;
    for label in labels {
        let c = match label {
            InsuranceLabel::Recommend => InsuranceCategory::Recommended,
            InsuranceLabel::Defer => InsuranceCategory::Deferred,
            InsuranceLabel::ScopeOut => InsuranceCategory::ScopedOut,
            InsuranceLabel::Other => continue,
        };
        category = category.min(c);
    }
    category
}

pub fn rate_insurance(ctx: &AnalysisContext<'_>, policy: &KriPolicy) -> KriResult {
    let types = PhraseLexicon::new(INSURANCE_TYPES);
    let mut evidence = Vec::new();
    for s in ctx.sentences().filter(|s| s.labels.insurance != InsuranceLabel::Other) {
        evidence.push(
            Evidence::new(&s.unit.unit_id, format!("insurance {}", s.labels.insurance.as_str()))
                .with_values(types.found_in(&s.unit.text)),
        );
    }
    let category = insurance_category(ctx.sentences().map(|s| s.labels.insurance));
    if category == InsuranceCategory::None {
        evidence.push(Evidence::document("insurance not considered"));
    }
    KriResult::from_finding(KriFinding::Insurance { category, scope_out_rating: policy.scope_out_rating }, evidence)
}
