//! Reference implementations used to cross-check the production rules, and
//! generators of small random instances for them. Every oracle works from
//! the generation parameters in integer arithmetic rather than re-parsing
//! the rendered text.

pub mod audit;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rust_decimal::Decimal;

use soaguard_core::aggregate::aggregate_ratings;
use soaguard_core::context::{
    AnalysisContext, InsuranceLabel, SentenceLabels, TableLabels, UnitAnnotation, UnitLabels,
};
use soaguard_core::document::{enumerate_units, Block, Section, SoaDocument, Table};
use soaguard_core::goals::{map_goals, PairScorer, Statement};
use soaguard_core::kri::{AggregateCutoffs, InsuranceCategory, KriId, KriPolicy, MatchThresholds, RiskRating};
use soaguard_core::lexicon::{default_net_lexicon, AssetTaxonomy};
use soaguard_core::quantity::{extract_money, extract_numbers, statistics_of, MonetaryAmount, Sign};
use soaguard_core::suite::rate_insurance;
use soaguard_core::table::{cashflow_outcome, check_diversification, DiversificationLevel, NetSign};

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- documents

/// Builds a document one unit at a time together with its annotations.
pub struct FixtureBuilder {
    id: String,
    blocks: Vec<Block>,
    labels: Vec<UnitLabels>,
}

impl FixtureBuilder {
    pub fn new(id: &str) -> Self {
        FixtureBuilder { id: id.to_string(), blocks: Vec::new(), labels: Vec::new() }
    }

    /// `text` must be a single sentence.
    pub fn sentence(mut self, text: &str, labels: SentenceLabels) -> Self {
        self.blocks.push(Block::Paragraph { text: text.to_string() });
        self.labels.push(UnitLabels::Sentence(labels));
        self
    }

    pub fn table(mut self, table: Table, labels: TableLabels) -> Self {
        self.blocks.push(Block::Table(table));
        self.labels.push(UnitLabels::Table(labels));
        self
    }

    pub fn build(self) -> (SoaDocument, Vec<UnitAnnotation>) {
        let doc = SoaDocument {
            id: self.id,
            title: "Fixture".into(),
            sections: vec![Section { heading: "Body".into(), blocks: self.blocks }],
        };
        let units = enumerate_units(&doc);
        assert_eq!(units.len(), self.labels.len(), "each fixture block is one unit");
        let annotations = units
            .into_iter()
            .zip(self.labels)
            .map(|(u, labels)| UnitAnnotation { unit_id: u.unit_id, labels, confidences: BTreeMap::new() })
            .collect();
        (doc, annotations)
    }
}

pub fn table(header: &[&str], rows: Vec<Vec<String>>) -> Table {
    Table { caption: None, header: header.iter().map(|s| s.to_string()).collect(), rows }
}

// ------------------------------------------------------------------ money

/// Renders whole cents as a dollar string in one of several conventions.
pub fn render_money(cents: i64, rng: &mut impl Rng) -> String {
    let abs = cents.unsigned_abs();
    let dollars = abs / 100;
    let frac = abs % 100;
    let grouped = if rng.gen_bool(0.6) { group(dollars) } else { dollars.to_string() };
    let body = if frac != 0 || rng.gen_bool(0.3) { format!("{grouped}.{frac:02}") } else { grouped };
    if cents >= 0 {
        return format!("${body}");
    }
    match rng.gen_range(0..4) {
        0 => format!("-${body}"),
        1 => format!("$-{body}"),
        2 => format!("(${body})"),
        _ => format!("\u{2212}${body}"),
    }
}

fn group(mut n: u64) -> String {
    let mut parts = Vec::new();
    loop {
        if n < 1000 {
            parts.push(n.to_string());
            break;
        }
        parts.push(format!("{:03}", n % 1000));
        n /= 1000;
    }
    parts.reverse();
    parts.join(",")
}

const FILLER: &[&str] = &[
    "the", "balance", "is", "about", "per", "year", "and", "your", "fund", "we", "estimate", "of", "at", "least",
    "cash", "flow", "would", "be", "so", "then",
];

fn filler(rng: &mut impl Rng, n: usize) -> String {
    (0..n).map(|_| *FILLER.choose(rng).expect("filler")).collect::<Vec<_>>().join(" ")
}

pub fn cents_to_decimal(cents: i64) -> Decimal {
    Decimal::new(cents, 2)
}

/// A random amount embedded in filler text is recovered exactly, and its
/// span re-parses to the same value and sign.
pub fn check_money_roundtrip(rng: &mut impl Rng) -> Check {
    let magnitude: i64 = match rng.gen_range(0..3) {
        0 => rng.gen_range(0..1_000),
        1 => rng.gen_range(0..10_000_000),
        _ => rng.gen_range(0..100_000_000_000),
    };
    let cents = if rng.gen_bool(0.4) && magnitude > 0 { -magnitude } else { magnitude };
    let rendered = render_money(cents, rng);
    let (n_before, n_after) = (rng.gen_range(0..6), rng.gen_range(0..6));
    let text = format!("{} {rendered} {}", filler(rng, n_before), filler(rng, n_after));
    let found = extract_money(&text);
    ensure(found.len() == 1, || format!("{text:?}: expected one amount, found {found:?}"))?;
    let a = &found[0];
    ensure(a.signed_value() == cents_to_decimal(cents), || format!("{text:?}: {} != {cents} cents", a.signed_value()))?;
    let again = extract_money(&text[a.start..a.end]);
    ensure(again.len() == 1 && again[0].value == a.value && again[0].sign == a.sign, || {
        format!("span {:?} of {text:?} re-parses to {again:?}", &text[a.start..a.end])
    })
}

/// A run of year cells between label cells yields exactly the maximal
/// increasing runs of length two or more.
pub fn check_year_series(rng: &mut impl Rng) -> Check {
    let mut cells: Vec<String> = Vec::new();
    let mut expected: Vec<Vec<u16>> = Vec::new();
    for _ in 0..rng.gen_range(1..4) {
        cells.push(["Year", "Balance", "", "n/a"].choose(rng).expect("label").to_string());
        let len = rng.gen_range(1..8);
        let step = rng.gen_range(1..3);
        let start: u16 = rng.gen_range(1900..=2100 - (len as u16) * step);
        let years: Vec<u16> = (0..len as u16).map(|i| start + i * step).collect();
        cells.extend(years.iter().map(|y| y.to_string()));
        if years.len() >= 2 {
            expected.push(years);
        }
    }
    let found: Vec<Vec<u16>> =
        soaguard_core::quantity::extract_year_series(&cells).into_iter().map(|s| s.years).collect();
    ensure(found == expected, || format!("{cells:?}: {found:?} != {expected:?}"))?;
    let consecutive: Vec<bool> =
        soaguard_core::quantity::extract_year_series(&cells).iter().map(|s| s.consecutive).collect();
    let want: Vec<bool> = expected.iter().map(|y| y.windows(2).all(|w| w[1] == w[0] + 1)).collect();
    ensure(consecutive == want, || format!("{cells:?}: consecutive {consecutive:?} != {want:?}"))
}

/// Statistics in integer cents: median of an even count is carried in
/// half-cents.
pub fn check_statistics(rng: &mut impl Rng) -> Check {
    let n = rng.gen_range(1..40);
    let cents: Vec<i64> = (0..n).map(|_| rng.gen_range(-50_000_000i64..500_000_000)).collect();
    let amounts: Vec<MonetaryAmount> = cents
        .iter()
        .map(|&c| MonetaryAmount::new(cents_to_decimal(c), if c < 0 { Sign::Negative } else { Sign::Positive }))
        .collect();
    let stats = soaguard_core::quantity::balance_statistics(&amounts).ok_or("statistics absent")?;

    let mut sorted = cents.clone();
    for i in 1..sorted.len() {
        let mut j = i;
        while j > 0 && sorted[j - 1] > sorted[j] {
            sorted.swap(j - 1, j);
            j -= 1;
        }
    }
    let sum: i128 = cents.iter().map(|&c| c as i128).sum();
    let count = n as i128;
    // mean rounded to whole cents, halves away from zero
    let mean_cents = {
        let q = sum / count;
        let r = sum % count;
        if 2 * r.abs() >= count {
            q + sum.signum()
        } else {
            q
        }
    };
    let median_half_cents: i128 =
        if n % 2 == 1 { 2 * sorted[n / 2] as i128 } else { sorted[n / 2 - 1] as i128 + sorted[n / 2] as i128 };
    let median = Decimal::from_i128_with_scale(median_half_cents * 5, 3);
    ensure(stats.count == n, || format!("count {} != {n}", stats.count))?;
    ensure(stats.min == cents_to_decimal(sorted[0]), || format!("min {} for {cents:?}", stats.min))?;
    ensure(stats.max == cents_to_decimal(sorted[n - 1]), || format!("max {} for {cents:?}", stats.max))?;
    ensure(stats.median == median, || format!("median {} != {median} for {cents:?}", stats.median))?;
    ensure(stats.mean == Decimal::from_i128_with_scale(mean_cents, 2), || {
        format!("mean {} != {mean_cents} cents for {cents:?}", stats.mean)
    })?;
    ensure(statistics_of(&[]).is_none(), || "empty statistics present".into())
}

// -------------------------------------------------------- diversification

/// A row of an asset table: taxonomy class (or `None` for a label outside
/// the taxonomy) and its share in hundredths of a percent, or `None` for a
/// non-numeric cell.
#[derive(Debug, Clone)]
pub struct AssetRow {
    pub class: Option<usize>,
    pub share: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct AssetInstance {
    pub rows: Vec<AssetRow>,
    /// Allocation rendered as fractions of one rather than percent.
    pub fractional: bool,
    pub table: Table,
}

const UNMATCHED_LABELS: &[&str] = &["Total", "Other assets", "Unallocated", "Collectibles"];

pub fn asset_instance(rng: &mut impl Rng, taxonomy: &AssetTaxonomy) -> AssetInstance {
    let n = rng.gen_range(1..7);
    let fractional = rng.gen_bool(0.3);
    let mut rows = Vec::new();
    let mut remaining: i64 = 10_000;
    for i in 0..n {
        let class = if rng.gen_bool(0.85) { Some(rng.gen_range(0..taxonomy.classes.len())) } else { None };
        let share = if rng.gen_bool(0.05) {
            None
        } else if i + 1 == n && rng.gen_bool(0.7) {
            Some(remaining.max(0) as u32 + [0, 0, 100, 300, 700][rng.gen_range(0..5)])
        } else {
            let s = rng.gen_range(0..=remaining.max(0)) as u32 / 100 * 100;
            Some(s)
        };
        if let Some(s) = share {
            remaining -= s as i64;
        }
        rows.push(AssetRow { class, share });
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let label = match r.class {
                Some(c) => {
                    let class = &taxonomy.classes[c];
                    let options: Vec<&String> = std::iter::once(&class.name).chain(&class.synonyms).collect();
                    title_case(options.choose(rng).expect("synonym"))
                }
                None => UNMATCHED_LABELS.choose(rng).expect("label").to_string(),
            };
            let value = match r.share {
                None => "n/a".to_string(),
                Some(s) if fractional => Decimal::new(s as i64, 4).normalize().to_string(),
                Some(s) => format!("{}%", Decimal::new(s as i64, 2).normalize()),
            };
            vec![label, value]
        })
        .collect();
    let header = if fractional { ["Asset class", "Weight"] } else { ["Asset class", "Allocation"] };
    AssetInstance { table: table(&header, cells), rows, fractional }
}

fn title_case(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

pub struct DiversificationOracle {
    pub classes: BTreeSet<usize>,
    pub nonzero: usize,
    /// Largest class share as a ratio of class sum to total, when defined.
    pub max_share: Option<(u64, u64)>,
    pub level: DiversificationLevel,
}

pub fn diversification_oracle(inst: &AssetInstance) -> DiversificationOracle {
    let mut sums: BTreeMap<usize, u64> = BTreeMap::new();
    let mut unknown: BTreeSet<usize> = BTreeSet::new();
    for r in &inst.rows {
        let Some(c) = r.class else { continue };
        let sum = sums.entry(c).or_insert(0);
        match r.share {
            Some(s) => *sum += s as u64,
            None => {
                unknown.insert(c);
            }
        }
    }
    let classes: BTreeSet<usize> = sums.keys().copied().collect();
    let nonzero = classes.iter().filter(|c| unknown.contains(c) || sums[c] > 0).count();
    let total: u64 = sums.values().sum();
    // total is in hundredths of a percent; the rendered column sums to
    // total/100 (percent) or total/10000 (fractions) and is accepted near 1
    // or near 100 in its own units
    let rendered_scale = if inst.fractional { 10_000 } else { 100 };
    let near = |target: u64, tol: u64| total.abs_diff(target * rendered_scale) * 100 <= tol * rendered_scale;
    let in_range = near(1, 5) || near(100, 500);
    let max_share = (unknown.is_empty() && !classes.is_empty() && total > 0 && in_range)
        .then(|| (*sums.values().max().expect("classes"), total));
    let level = if nonzero < 2 {
        DiversificationLevel::NotDiversified
    } else if max_share.is_some_and(|(m, t)| 10 * m > 9 * t) {
        DiversificationLevel::Borderline
    } else {
        DiversificationLevel::Diversified
    };
    DiversificationOracle { classes, nonzero, max_share, level }
}

pub fn check_diversification_instance(rng: &mut impl Rng, taxonomy: &AssetTaxonomy) -> Check {
    let inst = asset_instance(rng, taxonomy);
    let want = diversification_oracle(&inst);
    let got = check_diversification(&inst.table, taxonomy);
    let names: BTreeSet<String> = want.classes.iter().map(|&c| taxonomy.classes[c].name.clone()).collect();
    let ctx = || format!("{:?}", inst.table.rows);
    ensure(got.classes_found == names, || format!("{}: classes {:?} != {names:?}", ctx(), got.classes_found))?;
    ensure(got.nonzero_classes == want.nonzero, || {
        format!("{}: nonzero {} != {}", ctx(), got.nonzero_classes, want.nonzero)
    })?;
    ensure(got.level() == want.level, || format!("{}: level {:?} != {:?}", ctx(), got.level(), want.level))?;
    match (got.max_share_exact, want.max_share) {
        (None, None) => Ok(()),
        (Some(share), Some((m, t))) => {
            // share * t == m up to the 28-digit precision of the division
            let err = (share * Decimal::from(t) - Decimal::from(m)).abs();
            ensure(err < Decimal::new(1, 18), || format!("{}: share {share} != {m}/{t}", ctx()))
        }
        (g, w) => Err(format!("{}: max share {g:?} vs oracle {w:?}", ctx())),
    }
}

// --------------------------------------------------------------- cash flow

#[derive(Debug, Clone)]
pub struct CashflowRow {
    pub net: bool,
    /// Cents per value column; `None` is an empty cell.
    pub values: Vec<Option<i64>>,
}

#[derive(Debug, Clone)]
pub struct CashflowInstance {
    pub rows: Vec<CashflowRow>,
    pub table: Table,
}

const NET_LABELS: &[&str] = &["Net", "Net cash flow", "Surplus", "Deficit", "Net position", "Surplus (deficit)"];
const ITEM_LABELS: &[&str] =
    &["Salary", "Rent", "Living expenses", "Car loan", "Dividends", "School fees", "Insurance premiums"];

pub fn cashflow_instance(rng: &mut impl Rng) -> CashflowInstance {
    let columns = rng.gen_range(1..=3);
    let n = rng.gen_range(1..7);
    let rows: Vec<CashflowRow> = (0..n)
        .map(|_| CashflowRow {
            net: rng.gen_bool(0.25),
            values: (0..columns)
                .map(|_| rng.gen_bool(0.8).then(|| rng.gen_range(-2_000_000i64..2_000_000) / 100 * 100))
                .collect(),
        })
        .collect();
    let cells = rows
        .iter()
        .map(|r| {
            let label = if r.net { NET_LABELS } else { ITEM_LABELS };
            let mut row = vec![label.choose(rng).expect("label").to_string()];
            row.extend(r.values.iter().map(|v| match v {
                Some(c) => render_money(*c, rng),
                None => String::new(),
            }));
            row
        })
        .collect();
    let header: Vec<&str> =
        std::iter::once("Item").chain(["Current", "Recommended", "Year 2"].into_iter().take(columns)).collect();
    CashflowInstance { rows, table: table(&header, cells) }
}

/// Net row value if the last net row has a figure, else the column total.
pub fn cashflow_oracle(inst: &CashflowInstance) -> Option<i64> {
    if let Some(row) = inst.rows.iter().rev().find(|r| r.net) {
        if let Some(v) = row.values.iter().rev().flatten().next() {
            return Some(*v);
        }
    }
    let columns = inst.rows.first().map_or(0, |r| r.values.len());
    let column = (0..columns).rev().find(|&c| inst.rows.iter().any(|r| r.values[c].is_some()))?;
    Some(inst.rows.iter().filter_map(|r| r.values[column]).sum())
}

pub fn check_cashflow_instance(rng: &mut impl Rng) -> Check {
    let inst = cashflow_instance(rng);
    let want = cashflow_oracle(&inst);
    let got = cashflow_outcome(&inst.table, &default_net_lexicon());
    let want_sign = match want {
        None => NetSign::Unknown,
        Some(v) if v < 0 => NetSign::Negative,
        Some(_) => NetSign::Positive,
    };
    let ctx = || format!("{:?}", inst.table.rows);
    ensure(got.net_value == want.map(cents_to_decimal), || {
        format!("{}: value {:?} != {want:?} cents", ctx(), got.net_value)
    })?;
    ensure(got.net_sign == want_sign, || format!("{}: sign {:?} != {want_sign:?}", ctx(), got.net_sign))
}

// --------------------------------------------------------------- insurance

const INSURANCE_TEXTS: [(&str, InsuranceLabel); 4] = [
    ("We recommend life insurance cover.", InsuranceLabel::Recommend),
    ("We will review your trauma cover later.", InsuranceLabel::Defer),
    ("Insurance is outside the scope of this advice.", InsuranceLabel::ScopeOut),
    ("Your fund has a balanced option.", InsuranceLabel::Other),
];

pub fn insurance_oracle(labels: &[InsuranceLabel]) -> InsuranceCategory {
    if labels.contains(&InsuranceLabel::Recommend) {
        InsuranceCategory::Recommended
    } else if labels.contains(&InsuranceLabel::Defer) {
        InsuranceCategory::Deferred
    } else if labels.contains(&InsuranceLabel::ScopeOut) {
        InsuranceCategory::ScopedOut
    } else {
        InsuranceCategory::None
    }
}

pub fn check_insurance_instance(rng: &mut impl Rng) -> Check {
    let n = rng.gen_range(0..8);
    let mut builder = FixtureBuilder::new("ins").sentence("This is a fixture.", SentenceLabels::default());
    let mut labels = Vec::new();
    for _ in 0..n {
        let (text, label) = INSURANCE_TEXTS[rng.gen_range(0..4)];
        builder = builder.sentence(text, SentenceLabels { insurance: label, ..SentenceLabels::default() });
        labels.push(label);
    }
    let (doc, annotations) = builder.build();
    let ctx = AnalysisContext::new(&doc, annotations);
    let scope_out_rating = *RiskRating::ALL.choose(rng).expect("rating");
    let policy = KriPolicy { scope_out_rating, ..KriPolicy::default() };
    let want = match insurance_oracle(&labels) {
        InsuranceCategory::Recommended => RiskRating::Green,
        InsuranceCategory::Deferred => RiskRating::Amber,
        InsuranceCategory::ScopedOut => scope_out_rating,
        InsuranceCategory::None => RiskRating::Red,
    };
    let got = rate_insurance(&ctx, &policy).rating;
    ensure(got == want, || format!("{labels:?} with scope-out {scope_out_rating}: {got} != {want}"))
}

// ------------------------------------------------------------------- goals

const GOAL_WORDS: &[&str] = &[
    "retire", "super", "home", "mortgage", "invest", "shares", "children", "savings", "debt", "income", "travel",
    "holiday", "business", "pension", "growth", "protect",
];

fn goal_text(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..5);
    let mut words: Vec<String> = (0..n).map(|_| GOAL_WORDS.choose(rng).expect("word").to_string()).collect();
    if rng.gen_bool(0.3) {
        words.push(format!("${}", rng.gen_range(1..4) * 1000));
    }
    if rng.gen_bool(0.2) {
        words.push(rng.gen_range(60..63).to_string());
    }
    format!("I want {}.", words.join(" "))
}

/// Every pair is scored; each goal keeps its strictly best pair (the
/// earliest on ties) when it reaches `amber_min`, and every other pair at or
/// above `amber_min` is a candidate.
pub fn check_map_goals_instance(rng: &mut impl Rng) -> Check {
    let goals: Vec<Statement> =
        (0..rng.gen_range(0..4)).map(|i| Statement::new(format!("g{i}"), goal_text(rng))).collect();
    let recs: Vec<Statement> =
        (0..rng.gen_range(0..5)).map(|i| Statement::new(format!("r{i}"), goal_text(rng))).collect();
    let amber_min = rng.gen_range(0.05..0.6);
    let thresholds = MatchThresholds { amber_min, green_min: (amber_min + 0.3).min(1.0) };
    let scorer = PairScorer::default();
    let map = map_goals(&goals, &recs, &scorer, &thresholds);

    let mut links = Vec::new();
    let mut candidates = Vec::new();
    for g in &goals {
        let scores: Vec<f64> = recs.iter().map(|r| scorer.score(&g.text, &r.text).confidence).collect();
        let mut best = None;
        for (i, &s) in scores.iter().enumerate() {
            let better = match best {
                None => true,
                Some(b) => s > scores[b],
            };
            if better {
                best = Some(i);
            }
        }
        for (i, &s) in scores.iter().enumerate() {
            if s < amber_min {
                continue;
            }
            let entry = (g.unit_id.clone(), recs[i].unit_id.clone(), s);
            if Some(i) == best {
                links.push(entry);
            } else {
                candidates.push(entry);
            }
        }
    }
    let got_links: Vec<_> =
        map.links.iter().map(|l| (l.goal_id.clone(), l.recommendation_id.clone(), l.confidence)).collect();
    let got_candidates: Vec<_> =
        map.candidates.iter().map(|l| (l.goal_id.clone(), l.recommendation_id.clone(), l.confidence)).collect();
    let ctx = || format!("goals {goals:?} recs {recs:?} amber_min {amber_min}");
    ensure(got_links == links, || format!("{}: links {got_links:?} != {links:?}", ctx()))?;
    ensure(got_candidates == candidates, || format!("{}: candidates {got_candidates:?} != {candidates:?}", ctx()))
}

// -------------------------------------------------------------- aggregation

pub fn random_ratings(rng: &mut impl Rng) -> [RiskRating; 6] {
    std::array::from_fn(|_| RiskRating::ALL[rng.gen_range(0..3)])
}

/// A valid policy with random weights, cutoffs and high-significance set.
pub fn random_policy(rng: &mut impl Rng) -> KriPolicy {
    let mut weights: BTreeMap<KriId, f64> =
        KriId::ALL.iter().map(|&k| (k, if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..5.0) })).collect();
    if weights.values().all(|&w| w == 0.0) {
        weights.insert(KriId::ALL[rng.gen_range(0..6)], 1.0);
    }
    let a: f64 = rng.gen_range(0.0..1.0);
    let b: f64 = rng.gen_range(0.0..1.0);
    let high_significance = KriId::ALL.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
    let policy = KriPolicy {
        weights,
        high_significance,
        cutoffs: AggregateCutoffs { amber_from: a.min(b), red_from: a.max(b) },
        ..KriPolicy::default()
    };
    policy.validate().expect("generated policy is valid");
    policy
}

/// Override dominance and monotonicity for one rating vector and policy:
/// a high-significance red forces red; worsening any single rating never
/// improves the overall rating or lowers the score.
pub fn check_aggregation_instance(rng: &mut impl Rng) -> Check {
    let ratings = random_ratings(rng);
    let policy = random_policy(rng);
    let (overall, score, forced) = aggregate_ratings(&ratings, &policy);
    let want_forced =
        KriId::ALL.iter().zip(&ratings).any(|(k, &r)| r == RiskRating::Red && policy.high_significance.contains(k));
    let ctx = || format!("{ratings:?} under {policy:?}");
    ensure(forced == want_forced, || format!("{}: override {forced} != {want_forced}", ctx()))?;
    if want_forced {
        ensure(overall == RiskRating::Red, || format!("{}: high-significance red gave {overall}", ctx()))?;
    }
    ensure((0.0..=1.0).contains(&score), || format!("{}: score {score} out of range", ctx()))?;
    for i in 0..6 {
        for &worse in RiskRating::ALL.iter().filter(|&&r| r > ratings[i]) {
            let mut w = ratings;
            w[i] = worse;
            let (o2, s2, _) = aggregate_ratings(&w, &policy);
            ensure(o2 >= overall && s2 >= score, || {
                format!("{}: worsening {} to {worse} gave {o2} ({s2}) from {overall} ({score})", ctx(), KriId::ALL[i])
            })?;
        }
    }
    Ok(())
}

/// Bare numbers and money both count towards signed-number totals.
pub fn signed_counts_oracle(cents: &[i64]) -> (usize, usize) {
    let neg = cents.iter().filter(|&&c| c < 0).count();
    (cents.len() - neg, neg)
}

pub fn check_signed_counts(rng: &mut impl Rng) -> Check {
    let cents: Vec<i64> = (0..rng.gen_range(0..6)).map(|_| rng.gen_range(-1_000_000i64..1_000_000)).collect();
    let text =
        cents.iter().map(|&c| format!("{} {}", filler(rng, 2), render_money(c, rng))).collect::<Vec<_>>().join(" ");
    let counts = soaguard_core::quantity::count_signed_numbers(&text);
    let want = signed_counts_oracle(&cents);
    ensure((counts.positives, counts.negatives) == want, || format!("{text:?}: {counts:?} != {want:?}"))?;
    ensure(extract_numbers(&text).len() == cents.len(), || format!("{text:?}: wrong number count"))
}
