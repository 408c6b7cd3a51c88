//! Seeded generator of labelled synthetic documents.
//!
//! Each document is assembled from template banks whose trigger vocabulary
//! is disjoint per label, then optionally perturbed with cross-label words
//! at the profile's noise rate. Ground truth holds the label of every unit
//! and the per-KRI ratings obtained by running the evaluators on those true
//! labels under the default policy.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::context::{
    AnalysisContext, GoalRecLabel, InsuranceLabel, SentenceLabels, TableLabels, UnitAnnotation, UnitLabels,
};
use crate::document::{enumerate_units, parse_document, serialize_document, Block, Section, SoaDocument, Table};
use crate::error::{CorpusError, CorpusIoError};
use crate::kri::{KriId, KriPolicy, RiskRating};
use crate::par::{self, Execution};
use crate::pipeline::{assess, Resources};
use crate::quantity::group_thousands;
use crate::table::TableType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalOutcome {
    Matched,
    Weak,
    Unmatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsuranceScenario {
    Recommend,
    Defer,
    ScopeOut,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetScenario {
    Diversified,
    Concentrated,
    SingleClass,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionScenario {
    Long,
    Short,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CashflowScenario {
    Positive,
    NegativeAcknowledged,
    NegativeUnacknowledged,
    Unreadable,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionScenario {
    Positive,
    Misstated,
    Disclosed,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

impl CountRange {
    pub const fn new(min: usize, max: usize) -> Self {
        CountRange { min, max }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(self.min..=self.max)
    }
}

pub type Weights<T> = BTreeMap<T, f64>;

fn weights<T: Ord, const N: usize>(pairs: [(T, f64); N]) -> Weights<T> {
    pairs.into_iter().collect()
}

/// Scenario distributions for one family of documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusProfile {
    pub name: String,
    pub goals: CountRange,
    pub goal_outcomes: Weights<GoalOutcome>,
    /// Recommendations on topics no goal mentions.
    pub extra_recommendations: CountRange,
    pub insurance: Weights<InsuranceScenario>,
    pub asset_table: Weights<AssetScenario>,
    pub projection: Weights<ProjectionScenario>,
    pub cashflow: Weights<CashflowScenario>,
    pub position: Weights<PositionScenario>,
    /// Whole dollars.
    pub balance_min: u64,
    pub balance_max: u64,
    /// Probability that the document never states a balance.
    pub balance_missing_rate: f64,
    /// Probability of an extra before/after-fees balance table.
    pub balance_table_rate: f64,
    pub distractors: CountRange,
    pub other_tables: CountRange,
    /// Per-sentence probability of inserting a word from another label's
    /// vocabulary.
    pub noise_rate: f64,
}

impl CorpusProfile {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |reason: &str| CorpusError::InvalidProfile { name: self.name.clone(), reason: reason.into() };
        for range in [self.goals, self.extra_recommendations, self.distractors, self.other_tables] {
            if range.min > range.max {
                return Err(invalid("count range has min above max"));
            }
        }
        if self.goals.max + self.extra_recommendations.max > TOPICS.len() {
            return Err(invalid("more goals and extra recommendations than topics"));
        }
        for rate in [self.noise_rate, self.balance_missing_rate, self.balance_table_rate] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(invalid("rates must lie in [0, 1]"));
            }
        }
        if self.balance_min > self.balance_max {
            return Err(invalid("balance_min above balance_max"));
        }
        let ok = |w: &[f64]| w.iter().all(|x| x.is_finite() && *x >= 0.0) && w.iter().sum::<f64>() > 0.0;
        let all_ok = ok(&self.goal_outcomes.values().copied().collect::<Vec<_>>())
            && ok(&self.insurance.values().copied().collect::<Vec<_>>())
            && ok(&self.asset_table.values().copied().collect::<Vec<_>>())
            && ok(&self.projection.values().copied().collect::<Vec<_>>())
            && ok(&self.cashflow.values().copied().collect::<Vec<_>>())
            && ok(&self.position.values().copied().collect::<Vec<_>>());
        if !all_ok {
            return Err(invalid("scenario weights must be non-negative with a positive sum"));
        }
        Ok(())
    }

    /// Every scenario chosen so that all six indicators come out green.
    pub fn all_green() -> Self {
        CorpusProfile {
            name: "all_green".into(),
            goals: CountRange::new(1, 3),
            goal_outcomes: weights([(GoalOutcome::Matched, 1.0)]),
            extra_recommendations: CountRange::new(0, 1),
            insurance: weights([(InsuranceScenario::Recommend, 1.0)]),
            asset_table: weights([(AssetScenario::Diversified, 1.0)]),
            projection: weights([(ProjectionScenario::Long, 1.0)]),
            cashflow: weights([(CashflowScenario::Positive, 1.0)]),
            position: weights([(PositionScenario::Positive, 1.0)]),
            balance_min: 260_000,
            balance_max: 900_000,
            balance_missing_rate: 0.0,
            balance_table_rate: 0.3,
            distractors: CountRange::new(3, 6),
            other_tables: CountRange::new(0, 2),
            noise_rate: 0.0,
        }
    }

    pub fn compliant() -> Self {
        CorpusProfile {
            name: "compliant".into(),
            goal_outcomes: weights([(GoalOutcome::Matched, 0.9), (GoalOutcome::Weak, 0.1)]),
            insurance: weights([
                (InsuranceScenario::Recommend, 0.8),
                (InsuranceScenario::Defer, 0.1),
                (InsuranceScenario::ScopeOut, 0.1),
            ]),
            asset_table: weights([
                (AssetScenario::Diversified, 0.9),
                (AssetScenario::Concentrated, 0.05),
                (AssetScenario::None, 0.05),
            ]),
            projection: weights([
                (ProjectionScenario::Long, 0.85),
                (ProjectionScenario::Short, 0.1),
                (ProjectionScenario::None, 0.05),
            ]),
            cashflow: weights([
                (CashflowScenario::Positive, 0.85),
                (CashflowScenario::NegativeAcknowledged, 0.1),
                (CashflowScenario::Unreadable, 0.05),
            ]),
            position: weights([(PositionScenario::Positive, 0.7), (PositionScenario::Disclosed, 0.3)]),
            balance_min: 230_000,
            balance_max: 900_000,
            noise_rate: 0.05,
            ..Self::all_green()
        }
    }

    pub fn mixed() -> Self {
        CorpusProfile {
            name: "mixed".into(),
            goals: CountRange::new(0, 3),
            goal_outcomes: weights([
                (GoalOutcome::Matched, 0.6),
                (GoalOutcome::Weak, 0.25),
                (GoalOutcome::Unmatched, 0.15),
            ]),
            insurance: weights([
                (InsuranceScenario::Recommend, 0.4),
                (InsuranceScenario::Defer, 0.25),
                (InsuranceScenario::ScopeOut, 0.2),
                (InsuranceScenario::None, 0.15),
            ]),
            asset_table: weights([
                (AssetScenario::Diversified, 0.55),
                (AssetScenario::Concentrated, 0.15),
                (AssetScenario::SingleClass, 0.15),
                (AssetScenario::None, 0.15),
            ]),
            projection: weights([
                (ProjectionScenario::Long, 0.5),
                (ProjectionScenario::Short, 0.3),
                (ProjectionScenario::None, 0.2),
            ]),
            cashflow: weights([
                (CashflowScenario::Positive, 0.45),
                (CashflowScenario::NegativeAcknowledged, 0.15),
                (CashflowScenario::NegativeUnacknowledged, 0.15),
                (CashflowScenario::Unreadable, 0.1),
                (CashflowScenario::None, 0.15),
            ]),
            position: weights([
                (PositionScenario::Positive, 0.45),
                (PositionScenario::Misstated, 0.15),
                (PositionScenario::Disclosed, 0.2),
                (PositionScenario::None, 0.2),
            ]),
            balance_min: 120_000,
            balance_max: 450_000,
            balance_missing_rate: 0.1,
            noise_rate: 0.05,
            ..Self::all_green()
        }
    }

    pub fn deficient() -> Self {
        CorpusProfile {
            name: "deficient".into(),
            goals: CountRange::new(0, 3),
            goal_outcomes: weights([
                (GoalOutcome::Matched, 0.3),
                (GoalOutcome::Weak, 0.3),
                (GoalOutcome::Unmatched, 0.4),
            ]),
            extra_recommendations: CountRange::new(0, 2),
            insurance: weights([
                (InsuranceScenario::Recommend, 0.15),
                (InsuranceScenario::Defer, 0.3),
                (InsuranceScenario::ScopeOut, 0.2),
                (InsuranceScenario::None, 0.35),
            ]),
            asset_table: weights([
                (AssetScenario::Diversified, 0.25),
                (AssetScenario::Concentrated, 0.25),
                (AssetScenario::SingleClass, 0.3),
                (AssetScenario::None, 0.2),
            ]),
            projection: weights([
                (ProjectionScenario::Long, 0.25),
                (ProjectionScenario::Short, 0.4),
                (ProjectionScenario::None, 0.35),
            ]),
            cashflow: weights([
                (CashflowScenario::Positive, 0.2),
                (CashflowScenario::NegativeAcknowledged, 0.2),
                (CashflowScenario::NegativeUnacknowledged, 0.3),
                (CashflowScenario::Unreadable, 0.1),
                (CashflowScenario::None, 0.2),
            ]),
            position: weights([
                (PositionScenario::Positive, 0.2),
                (PositionScenario::Misstated, 0.35),
                (PositionScenario::Disclosed, 0.15),
                (PositionScenario::None, 0.3),
            ]),
            balance_min: 60_000,
            balance_max: 320_000,
            balance_missing_rate: 0.2,
            noise_rate: 0.05,
            ..Self::all_green()
        }
    }

    pub fn with_noise(mut self, noise_rate: f64) -> Self {
        self.noise_rate = noise_rate;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixEntry {
    pub profile: CorpusProfile,
    pub weight: f64,
}

/// Distribution over profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMix {
    pub entries: Vec<MixEntry>,
}

impl Default for CorpusMix {
    fn default() -> Self {
        CorpusMix {
            entries: vec![
                MixEntry { profile: CorpusProfile::compliant(), weight: 0.35 },
                MixEntry { profile: CorpusProfile::mixed(), weight: 0.45 },
                MixEntry { profile: CorpusProfile::deficient(), weight: 0.20 },
            ],
        }
    }
}

impl CorpusMix {
    pub fn single(profile: CorpusProfile) -> Self {
        CorpusMix { entries: vec![MixEntry { profile, weight: 1.0 }] }
    }

    pub fn with_noise(mut self, noise_rate: f64) -> Self {
        for e in &mut self.entries {
            e.profile.noise_rate = noise_rate;
        }
        self
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.entries.is_empty() {
            return Err(CorpusError::DegenerateMix("no profiles".into()));
        }
        if self.entries.iter().any(|e| !e.weight.is_finite() || e.weight < 0.0) {
            return Err(CorpusError::DegenerateMix("weights must be finite and non-negative".into()));
        }
        if self.entries.iter().map(|e| e.weight).sum::<f64>() <= 0.0 {
            return Err(CorpusError::DegenerateMix("weights sum to zero".into()));
        }
        self.entries.iter().try_for_each(|e| e.profile.validate())
    }
}

/// Scenario actually drawn for a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub profile: String,
    pub goals: Vec<(String, GoalOutcome)>,
    pub insurance: InsuranceScenario,
    pub asset_table: AssetScenario,
    pub projection: ProjectionScenario,
    pub cashflow: CashflowScenario,
    pub position: PositionScenario,
    pub balance: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub document_id: String,
    pub scenario: Scenario,
    /// True labels, one per unit in document order.
    pub annotations: Vec<UnitAnnotation>,
    /// Ratings under the default policy, in report column order.
    pub kri_ratings: BTreeMap<KriId, RiskRating>,
    pub overall: RiskRating,
}

impl GroundTruth {
    pub fn rating(&self, kri: KriId) -> RiskRating {
        self.kri_ratings[&kri]
    }
}

struct Topic {
    name: &'static str,
    variants: &'static [TopicVariant],
}

/// `{age}`, `{amount}`, `{year}` and `{n}` are filled per document; the
/// matched recommendation reuses the goal's values.
struct TopicVariant {
    goal: &'static str,
    matched: &'static str,
    weak: &'static str,
}

const TOPICS: &[Topic] = &[
    Topic {
        name: "retirement",
        variants: &[
            TopicVariant {
                goal: "retire at age {age} with a comfortable lifestyle and regular pension income",
                matched: "retire at age {age} with a comfortable lifestyle supported by regular pension income",
                weak: "review your retirement lifestyle options each year",
            },
            TopicVariant {
                goal: "stop full time work at {age} and draw a steady retirement income",
                matched: "stop full time work at {age} and draw a steady retirement income from your fund",
                weak: "consider a part time work arrangement before you retire",
            },
        ],
    },
    Topic {
        name: "superannuation",
        variants: &[
            TopicVariant {
                goal: "consolidate my super accounts into one low cost fund",
                matched: "consolidate your super accounts into one low cost industry fund",
                weak: "compare the fees charged by your super fund",
            },
            TopicVariant {
                goal: "make extra salary sacrifice contributions of {amount} each year",
                matched: "make extra salary sacrifice contributions of {amount} each year to your super",
                weak: "check your contributions cap before adding extra money",
            },
        ],
    },
    Topic {
        name: "property",
        variants: &[
            TopicVariant {
                goal: "buy a family home in {year} with a mortgage I can afford",
                matched: "buy a family home in {year} with a mortgage you can afford on your salary",
                weak: "speak with a mortgage broker about home loan options",
            },
            TopicVariant {
                goal: "pay off the mortgage on my house within {n} years",
                matched: "pay off the mortgage on your house within {n} years using extra repayments",
                weak: "refinance the mortgage on your house at a lower rate",
            },
        ],
    },
    Topic {
        name: "investment",
        variants: &[
            TopicVariant {
                goal: "build a diversified share portfolio for long term growth",
                matched: "build a diversified share portfolio for long term growth through a managed fund",
                weak: "hold some growth assets in your investment portfolio",
            },
            TopicVariant {
                goal: "invest {amount} of spare cash for capital growth",
                matched: "invest {amount} of spare cash for capital growth in a balanced option",
                weak: "review the growth of your investments each year",
            },
        ],
    },
    Topic {
        name: "cashflow",
        variants: &[
            TopicVariant {
                goal: "reduce my household expenses and build an emergency savings buffer",
                matched: "reduce your household expenses and build an emergency savings buffer of three months",
                weak: "track household expenses with a monthly budget",
            },
            TopicVariant {
                goal: "pay down {amount} of credit card debt",
                matched: "pay down the {amount} of credit card debt as a first priority",
                weak: "set up a debt repayment schedule with your card provider",
            },
        ],
    },
    Topic {
        name: "estate",
        variants: &[
            TopicVariant {
                goal: "make sure my children receive an inheritance",
                matched: "make sure your children receive an inheritance through updated wills",
                weak: "ensure your children receive assets through binding nominations",
            },
            TopicVariant {
                goal: "set up an estate plan that looks after my grandchildren",
                matched: "set up an estate plan that looks after your grandchildren with a testamentary trust",
                weak: "review your estate plan every few years",
            },
        ],
    },
];

const GOAL_OPENERS: &[&str] =
    &["I want to", "I would like to", "My goal is to", "We want to", "It is important to me to", "Our aim is to"];
const REC_OPENERS: &[&str] = &[
    "We recommend that you",
    "We recommend you",
    "Our recommendation is that you",
    "We suggest that you",
    "We advise you to",
];

const DISTRACTORS: &[&str] = &[
    "This Statement of Advice is confidential and intended for you only.",
    "Please read this document carefully before acting on it.",
    "You can contact our office during business hours with any questions.",
    "We met with you on {day} March {year} to discuss your circumstances.",
    "This document is based on the information you provided to us.",
    "Past performance is not a reliable indicator of future performance.",
    "The product disclosure statement explains the features of each product.",
    "You have a cooling off period of {n} days for most products.",
    "Your adviser is authorised under our licence.",
    "Keep this document with your important records.",
    "Our advice fee of {amount} is payable on implementation.",
    "Fees are deducted from your account each month.",
    "We have relied on the information in your fact finder.",
    "Tell us promptly if your circumstances change.",
    "General information about our services is in the financial services guide.",
    "The details are set out in the table below.",
];

const BALANCE_SENTENCES: &[&str] = &[
    "Your current superannuation balance is {balance}.",
    "You have a starting super balance of {balance}.",
    "Your combined super balance at the start of this advice is {balance}.",
    "Your existing fund holds a balance of {balance}.",
];

const POSITION_POSITIVE: &[&str] = &[
    "Your cash flow will improve by {amount} per year after implementing our advice.",
    "Your net position is expected to increase by {amount} over the next {n} years.",
    "These changes will improve your overall financial position.",
    "Your retirement savings will grow to {big} by age {age}.",
];

const POSITION_MISSTATED: &[&str] = &[
    "Your cash flow will improve by -{amount} per year.",
    "Your financial position will improve by -{amount} after these changes.",
    "Your annual surplus will increase by -{amount}.",
];

const POSITION_DISCLOSED: &[&str] = &[
    "You will have a reduced cash flow but you will be able to achieve your investment goals.",
    "Your disposable income will decrease by {amount} per year while you build your retirement savings.",
    "Your cash flow will reduce by -{amount} per year, which remains affordable for you.",
];

const INSURANCE_TYPES: &[&str] = &["life", "TPD", "trauma", "income protection"];

const INSURANCE_RECOMMEND: &[&str] = &[
    "We recommend you take out {itype} insurance with a sum insured of {big}.",
    "We recommend income protection insurance covering {pct}% of your salary.",
    "We recommend that you hold {itype} cover through your existing fund.",
];

const INSURANCE_DEFER: &[&str] = &[
    "We will discuss your insurance needs at our next review.",
    "A review of your personal insurance has been deferred until next year.",
    "We will look at {itype} insurance in a later meeting.",
];

const INSURANCE_SCOPE_OUT: &[&str] = &[
    "Insurance is outside the scope of this advice.",
    "You asked us not to consider personal insurance in this advice.",
    "Your {itype} insurance has been excluded from the scope of this advice at your request.",
];

/// Words injected by the noise process.
const NOISE_WORDS: &[&str] =
    &["recommend", "goal", "insurance", "balance", "cash flow", "position", "review", "cover", "want", "super"];

const CLIENT_NAMES: &[&str] = &[
    "Alex Morgan",
    "Sam Taylor",
    "Jordan Lee",
    "Chris Nguyen",
    "Pat Kelly",
    "Robin Shah",
    "Casey Brown",
    "Jamie Walsh",
];

/// Display labels per taxonomy class.
const ASSET_LABELS: &[&[&str]] = &[
    &["Cash", "Term deposits", "Cash management account"],
    &["Fixed interest", "Bonds", "Government bonds"],
    &["Australian equities", "Australian shares", "Domestic shares"],
    &["International equities", "International shares", "Global shares"],
    &["Property", "Listed property", "Real estate"],
    &["Alternatives", "Infrastructure", "Private equity"],
];

fn dollars(value: u64) -> String {
    let s = group_thousands(Decimal::from(value));
    format!("${}", s.trim_end_matches(".00"))
}

struct Slots {
    age: u32,
    amount: u64,
    big: u64,
    year: u32,
    n: u32,
    day: u32,
    pct: u32,
    itype: &'static str,
    balance: u64,
}

impl Slots {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        Slots {
            age: rng.gen_range(55..=67),
            amount: rng.gen_range(2..=30) * 1000,
            big: rng.gen_range(40..=160) * 10_000,
            year: rng.gen_range(2026..=2031),
            n: rng.gen_range(5..=15),
            day: rng.gen_range(2..=27),
            pct: [50, 60, 70, 75][rng.gen_range(0..4)],
            itype: INSURANCE_TYPES[rng.gen_range(0..INSURANCE_TYPES.len())],
            balance: 0,
        }
    }

    fn fill(&self, template: &str) -> String {
        template
            .replace("{age}", &self.age.to_string())
            .replace("{amount}", &dollars(self.amount))
            .replace("{big}", &dollars(self.big))
            .replace("{year}", &self.year.to_string())
            .replace("{n}", &self.n.to_string())
            .replace("{day}", &self.day.to_string())
            .replace("{pct}", &self.pct.to_string())
            .replace("{itype}", self.itype)
            .replace("{balance}", &dollars(self.balance))
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &'a [&'a str]) -> &'a str {
    xs[rng.gen_range(0..xs.len())]
}

fn draw<T: Copy + Ord>(rng: &mut ChaCha8Rng, w: &Weights<T>) -> T {
    let keys: Vec<T> = w.keys().copied().collect();
    let dist = WeightedIndex::new(w.values().copied()).expect("validated weights");
    keys[dist.sample(rng)]
}

struct Sentence {
    text: String,
    labels: SentenceLabels,
}

fn sentence(text: String, labels: SentenceLabels) -> Sentence {
    Sentence { text, labels }
}

fn plain(text: String) -> Sentence {
    sentence(text, SentenceLabels::default())
}

fn goal_rec(text: String, label: GoalRecLabel) -> Sentence {
    sentence(text, SentenceLabels { goal_rec: label, ..SentenceLabels::default() })
}

fn position(text: String) -> Sentence {
    sentence(text, SentenceLabels { position: true, ..SentenceLabels::default() })
}

fn balance(text: String) -> Sentence {
    sentence(text, SentenceLabels { balance: true, ..SentenceLabels::default() })
}

fn insurance(text: String, label: InsuranceLabel) -> Sentence {
    let goal_rec =
        if label == InsuranceLabel::Recommend { GoalRecLabel::Recommendation } else { GoalRecLabel::Neither };
    sentence(text, SentenceLabels { goal_rec, insurance: label, ..SentenceLabels::default() })
}

fn with_opener(opener: &str, body: &str) -> String {
    format!("{opener} {body}.")
}

/// Inserts one cross-label word between two interior words.
fn add_noise(rng: &mut ChaCha8Rng, text: &str) -> String {
    let words: Vec<&str> = text.split(' ').collect();
    if words.len() < 3 {
        return text.to_string();
    }
    let at = rng.gen_range(1..words.len() - 1);
    let word = pick(rng, NOISE_WORDS);
    let mut out: Vec<&str> = words[..at].to_vec();
    out.push(word);
    out.extend_from_slice(&words[at..]);
    out.join(" ")
}

enum Content {
    Paragraph(Vec<Sentence>),
    Table(Table, TableLabels),
}

fn table(caption: Option<&str>, header: Vec<String>, rows: Vec<Vec<String>>) -> Table {
    Table { caption: caption.map(str::to_string), header, rows }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Shares in percent, multiples of 5, summing to 100.
fn partition(rng: &mut ChaCha8Rng, parts: usize, max: u32) -> Vec<u32> {
    loop {
        let mut units = vec![1u32; parts];
        for _ in parts..20 {
            units[rng.gen_range(0..parts)] += 1;
        }
        let shares: Vec<u32> = units.iter().map(|u| u * 5).collect();
        if shares.iter().all(|&s| s <= max) {
            return shares;
        }
    }
}

fn asset_table(rng: &mut ChaCha8Rng, scenario: AssetScenario) -> Option<Table> {
    let classes: Vec<usize> = {
        let mut all: Vec<usize> = (0..ASSET_LABELS.len()).collect();
        all.shuffle(rng);
        all
    };
    let (labels, shares): (Vec<&str>, Vec<u32>) = match scenario {
        AssetScenario::None => return None,
        AssetScenario::Diversified => {
            let k = rng.gen_range(3..=5);
            let shares = partition(rng, k, 85);
            (classes[..k].iter().map(|&c| pick(rng, ASSET_LABELS[c])).collect(), shares)
        }
        AssetScenario::Concentrated => {
            let major = rng.gen_range(92..=97);
            (classes[..2].iter().map(|&c| pick(rng, ASSET_LABELS[c])).collect(), vec![major, 100 - major])
        }
        AssetScenario::SingleClass => {
            let c = classes[0];
            if rng.gen_bool(0.5) {
                (vec![ASSET_LABELS[c][0]], vec![100])
            } else {
                let first = rng.gen_range(4..=16) * 5;
                (vec![ASSET_LABELS[c][0], ASSET_LABELS[c][1]], vec![first, 100 - first])
            }
        }
    };
    let caption = [Some("Recommended asset allocation"), Some("Proposed investment mix"), None][rng.gen_range(0..3)];
    let style = rng.gen_range(0..3);
    let total: u64 = rng.gen_range(20..=120) * 10_000;
    let mut rows: Vec<Vec<String>> = labels
        .iter()
        .zip(&shares)
        .map(|(label, &share)| match style {
            0 => vec![label.to_string(), format!("{share}%")],
            1 => vec![label.to_string(), share.to_string()],
            _ => vec![label.to_string(), dollars(total * share as u64 / 100), format!("{share}%")],
        })
        .collect();
    let header = match style {
        0 => strings(&[pick(rng, &["Asset class", "Asset"]), "Allocation"]),
        1 => strings(&["Asset class", "Allocation %"]),
        _ => strings(&["Investment", "Amount", "Weighting %"]),
    };
    if rng.gen_bool(0.4) {
        let mut total_row = vec!["Total".to_string(), if style == 1 { "100".into() } else { "100%".into() }];
        if style == 2 {
            total_row = vec!["Total".into(), dollars(total), "100%".into()];
        }
        rows.push(total_row);
    }
    Some(table(caption, header, rows))
}

fn projection_table(rng: &mut ChaCha8Rng, scenario: ProjectionScenario) -> Option<Table> {
    let years = match scenario {
        ProjectionScenario::None => return None,
        ProjectionScenario::Long => rng.gen_range(10..=15),
        ProjectionScenario::Short => rng.gen_range(3..=7),
    };
    let start: u32 = rng.gen_range(2024..=2027);
    let mut header = vec![pick(rng, &["Year", "Projection year", ""]).to_string()];
    header.extend((0..years).map(|i| (start + i).to_string()));
    let mut balance: u64 = rng.gen_range(10..=80) * 10_000;
    let contribution: u64 = rng.gen_range(5..=25) * 1000;
    let fee: u64 = rng.gen_range(5..=30) * 100;
    let mut balances = vec![pick(rng, &["Projected balance", "Estimated balance", "Super balance"]).to_string()];
    let mut contributions = vec!["Contributions".to_string()];
    let mut fees = vec!["Fees".to_string()];
    for _ in 0..years {
        balance = balance + contribution + balance * rng.gen_range(3..=7) / 100 - fee;
        balances.push(dollars(balance));
        contributions.push(dollars(contribution));
        fees.push(format!("-{}", dollars(fee)));
    }
    let mut rows = vec![balances, contributions];
    if rng.gen_bool(0.5) {
        rows.push(fees);
    }
    let caption = [Some("Projected superannuation balance"), Some("Retirement projections"), None][rng.gen_range(0..3)];
    Some(table(caption, header, rows))
}

fn cashflow_table(rng: &mut ChaCha8Rng, scenario: CashflowScenario) -> Option<Table> {
    let negative = match scenario {
        CashflowScenario::None => return None,
        CashflowScenario::Unreadable => {
            let rows = vec![
                strings(&["Income", "Unchanged"]),
                strings(&["Living expenses", "To be confirmed"]),
                strings(&["Net cash flow", "Not yet assessed"]),
            ];
            return Some(table(Some("Cash flow analysis"), strings(&["Item", "Status"]), rows));
        }
        CashflowScenario::Positive => false,
        CashflowScenario::NegativeAcknowledged | CashflowScenario::NegativeUnacknowledged => true,
    };
    let salary: i64 = rng.gen_range(60..=160) * 1000;
    let other_income: i64 = rng.gen_range(0..=20) * 500;
    let surplus: i64 = rng.gen_range(2..=20) * 500;
    let net = if negative { -surplus } else { surplus };
    let expenses_total = salary + other_income - net;
    let mortgage = expenses_total * rng.gen_range(20..=45) / 100;
    let living = expenses_total - mortgage;
    let money = |v: i64| {
        if v < 0 {
            if rng_parens(v) {
                format!("({})", dollars(v.unsigned_abs()))
            } else {
                format!("-{}", dollars(v.unsigned_abs()))
            }
        } else {
            dollars(v as u64)
        }
    };
    let mut rows = vec![
        vec!["Salary income".to_string(), money(salary)],
        vec!["Investment income".to_string(), money(other_income)],
        vec!["Living expenses".to_string(), money(-living)],
        vec!["Mortgage repayments".to_string(), money(-mortgage)],
    ];
    if rng.gen_bool(0.85) {
        rows.push(vec![pick(rng, &["Net cash flow", "Net position", "Net"]).to_string(), money(net)]);
    }
    let caption = [Some("Annual cash flow"), Some("Cash flow analysis"), None][rng.gen_range(0..3)];
    Some(table(caption, strings(&["Item", pick(rng, &["Amount", "Annual amount", "Recommended"])]), rows))
}

/// Accounting parentheses on some negative values, chosen by the value so
/// that the choice needs no extra random draws.
fn rng_parens(v: i64) -> bool {
    v.unsigned_abs().is_multiple_of(3000)
}

fn balance_table(slots: &Slots, rng: &mut ChaCha8Rng) -> Table {
    let fee: u64 = rng.gen_range(1..=9) * 100;
    table(
        Some("Starting superannuation balance"),
        strings(&["Account", "Balance"]),
        vec![
            vec!["Starting balance (before fees)".into(), dollars(slots.balance)],
            vec!["Starting balance (after fees)".into(), dollars(slots.balance - fee)],
            vec!["Starting balance (reported)".into(), dollars(slots.balance)],
        ],
    )
}

fn other_table(rng: &mut ChaCha8Rng) -> Table {
    match rng.gen_range(0..3) {
        0 => table(
            Some("Our fees"),
            strings(&["Fee", "Amount"]),
            vec![
                vec!["Advice preparation fee".into(), dollars(rng.gen_range(15..=40) * 100)],
                vec!["Implementation fee".into(), dollars(rng.gen_range(5..=20) * 100)],
                vec!["Ongoing service fee".into(), dollars(rng.gen_range(20..=50) * 100)],
            ],
        ),
        1 => table(
            Some("Contact details"),
            strings(&["Contact", "Details"]),
            vec![
                strings(&["Adviser", pick(rng, CLIENT_NAMES)]),
                strings(&["Office", "Level 2, 100 Collins Street Melbourne"]),
                strings(&["Email", "advice@example.com"]),
            ],
        ),
        _ => table(
            Some("Product comparison"),
            strings(&["Product", "Provider", "Rating"]),
            vec![
                strings(&["Balanced option", "Example Super", "Recommended"]),
                strings(&["Growth option", "Sample Wealth", "Suitable"]),
            ],
        ),
    }
}

/// Builds one document with id `id`. Deterministic in `rng`'s state.
fn build(profile: &CorpusProfile, id: &str, rng: &mut ChaCha8Rng) -> (SoaDocument, GroundTruth) {
    let mut slots = Slots::draw(rng);
    let noise = profile.noise_rate;

    // goals and recommendations
    let mut topic_order: Vec<usize> = (0..TOPICS.len()).collect();
    topic_order.shuffle(rng);
    let n_goals = profile.goals.sample(rng);
    let n_extra = profile.extra_recommendations.sample(rng);
    let mut goals = Vec::new();
    let mut recs = Vec::new();
    let mut goal_scenarios = Vec::new();
    for &t in &topic_order[..n_goals] {
        let topic = &TOPICS[t];
        let variant = &topic.variants[rng.gen_range(0..topic.variants.len())];
        let outcome = draw(rng, &profile.goal_outcomes);
        let goal_slots = Slots::draw(rng);
        goals.push(goal_rec(goal_slots.fill(&with_opener(pick(rng, GOAL_OPENERS), variant.goal)), GoalRecLabel::Goal));
        match outcome {
            GoalOutcome::Matched => recs.push(goal_rec(
                goal_slots.fill(&with_opener(pick(rng, REC_OPENERS), variant.matched)),
                GoalRecLabel::Recommendation,
            )),
            GoalOutcome::Weak => recs.push(goal_rec(
                goal_slots.fill(&with_opener(pick(rng, REC_OPENERS), variant.weak)),
                GoalRecLabel::Recommendation,
            )),
            GoalOutcome::Unmatched => {}
        }
        goal_scenarios.push((topic.name.to_string(), outcome));
    }
    for &t in &topic_order[n_goals..n_goals + n_extra] {
        let topic = &TOPICS[t];
        let variant = &topic.variants[rng.gen_range(0..topic.variants.len())];
        let s = Slots::draw(rng);
        recs.push(goal_rec(
            s.fill(&with_opener(pick(rng, REC_OPENERS), variant.matched)),
            GoalRecLabel::Recommendation,
        ));
    }
    recs.shuffle(rng);

    // balance
    let balance_amount = (!rng.gen_bool(profile.balance_missing_rate)).then(|| {
        let lo = profile.balance_min / 1000;
        let hi = profile.balance_max / 1000;
        rng.gen_range(lo..=hi) * 1000
    });
    let mut situation = Vec::new();
    let mut balance_tbl = None;
    if let Some(b) = balance_amount {
        slots.balance = b;
        situation.push(balance(slots.fill(pick(rng, BALANCE_SENTENCES))));
        if rng.gen_bool(0.3) {
            situation.push(balance(slots.fill(pick(rng, BALANCE_SENTENCES))));
        }
        if rng.gen_bool(profile.balance_table_rate) {
            balance_tbl = Some(balance_table(&slots, rng));
        }
    }

    // position and projections
    let position_scenario = draw(rng, &profile.position);
    let mut position_sentences = Vec::new();
    let bank = match position_scenario {
        PositionScenario::Positive => Some(POSITION_POSITIVE),
        PositionScenario::Misstated => Some(POSITION_MISSTATED),
        PositionScenario::Disclosed => Some(POSITION_DISCLOSED),
        PositionScenario::None => None,
    };
    if let Some(bank) = bank {
        for _ in 0..rng.gen_range(1..=2) {
            position_sentences.push(position(slots.fill(pick(rng, bank))));
        }
    }
    let projection_scenario = draw(rng, &profile.projection);
    let projection = projection_table(rng, projection_scenario);

    // cash flow
    let cashflow_scenario = draw(rng, &profile.cashflow);
    let cashflow = cashflow_table(rng, cashflow_scenario);
    let mut cashflow_sentences = Vec::new();
    if cashflow_scenario == CashflowScenario::NegativeAcknowledged {
        cashflow_sentences.push(position(slots.fill(pick(rng, POSITION_DISCLOSED))));
    }

    // insurance
    let insurance_scenario = draw(rng, &profile.insurance);
    let mut insurance_sentences = Vec::new();
    let mut add_insurance = |rng: &mut ChaCha8Rng, bank: &[&str], label| {
        let s = Slots::draw(rng);
        insurance_sentences.push(insurance(s.fill(pick(rng, bank)), label));
    };
    match insurance_scenario {
        InsuranceScenario::Recommend => {
            add_insurance(rng, INSURANCE_RECOMMEND, InsuranceLabel::Recommend);
            if rng.gen_bool(0.3) {
                add_insurance(rng, INSURANCE_DEFER, InsuranceLabel::Defer);
            }
        }
        InsuranceScenario::Defer => {
            add_insurance(rng, INSURANCE_DEFER, InsuranceLabel::Defer);
            if rng.gen_bool(0.3) {
                add_insurance(rng, INSURANCE_SCOPE_OUT, InsuranceLabel::ScopeOut);
            }
        }
        InsuranceScenario::ScopeOut => add_insurance(rng, INSURANCE_SCOPE_OUT, InsuranceLabel::ScopeOut),
        InsuranceScenario::None => {}
    }

    let asset_scenario = draw(rng, &profile.asset_table);
    let asset = asset_table(rng, asset_scenario);
    let n_other = profile.other_tables.sample(rng);
    let others: Vec<Table> = (0..n_other).map(|_| other_table(rng)).collect();

    let n_distractors = profile.distractors.sample(rng);
    // one slot per paragraph that takes distractors below
    let mut distractors: Vec<Vec<Sentence>> = (0..4).map(|_| Vec::new()).collect();
    for _ in 0..n_distractors {
        let s = Slots::draw(rng);
        let slot = rng.gen_range(0..distractors.len());
        distractors[slot].push(plain(s.fill(pick(rng, DISTRACTORS))));
    }
    let mut distractors = distractors.into_iter();
    let mut next_distractors = || distractors.next().unwrap_or_default();

    let split_at = rng.gen_range(0..=position_sentences.len());
    let later_positions = position_sentences.split_off(split_at);

    let mut sections: Vec<(&str, Vec<Content>)> = Vec::new();
    let mut intro = next_distractors();
    intro.insert(0, plain(format!("This Statement of Advice was prepared for {}.", pick(rng, CLIENT_NAMES))));
    sections.push(("Introduction", vec![Content::Paragraph(intro)]));
    sections.push(("Your goals", vec![Content::Paragraph(goals)]));
    let mut current = vec![Content::Paragraph(situation.into_iter().chain(position_sentences).collect())];
    if let Some(t) = balance_tbl {
        current.push(Content::Table(t, TableLabels { table_type: TableType::Other, balance: true }));
    }
    current.push(Content::Paragraph(next_distractors()));
    sections.push(("Your current situation", current));
    sections.push(("Our recommendations", vec![Content::Paragraph(recs)]));
    let mut strategy = vec![Content::Paragraph(next_distractors())];
    if let Some(t) = asset {
        strategy.push(Content::Table(t, TableLabels { table_type: TableType::AssetClass, balance: false }));
    }
    sections.push(("Investment strategy", strategy));
    let mut projections = vec![Content::Paragraph(later_positions)];
    if let Some(t) = projection {
        projections.push(Content::Table(t, TableLabels { table_type: TableType::Projections, balance: false }));
    }
    sections.push(("Projections", projections));
    let mut cash = Vec::new();
    if let Some(t) = cashflow {
        cash.push(Content::Table(t, TableLabels { table_type: TableType::Cashflow, balance: false }));
    }
    cash.push(Content::Paragraph(cashflow_sentences));
    sections.push(("Cash flow", cash));
    sections.push(("Personal insurance", vec![Content::Paragraph(insurance_sentences)]));
    let mut fees: Vec<Content> = others
        .into_iter()
        .map(|t| Content::Table(t, TableLabels { table_type: TableType::Other, balance: false }))
        .collect();
    fees.push(Content::Paragraph(next_distractors()));
    sections.push(("Fees and other information", fees));

    // assemble, dropping empty paragraphs and sections
    let mut doc_sections = Vec::new();
    let mut expected: Vec<(Option<String>, UnitLabels)> = Vec::new();
    for (heading, contents) in sections {
        let mut blocks = Vec::new();
        for content in contents {
            match content {
                Content::Paragraph(sentences) if sentences.is_empty() => {}
                Content::Paragraph(sentences) => {
                    let mut texts = Vec::new();
                    for s in sentences {
                        let text = if rng.gen_bool(noise) { add_noise(rng, &s.text) } else { s.text };
                        expected.push((Some(text.clone()), UnitLabels::Sentence(s.labels)));
                        texts.push(text);
                    }
                    blocks.push(Block::Paragraph { text: texts.join(" ") });
                }
                Content::Table(t, labels) => {
                    expected.push((None, UnitLabels::Table(labels)));
                    blocks.push(Block::Table(t));
                }
            }
        }
        if !blocks.is_empty() {
            doc_sections.push(Section { heading: heading.to_string(), blocks });
        }
    }
    let client = pick(rng, CLIENT_NAMES);
    let doc =
        SoaDocument { id: id.to_string(), title: format!("Statement of Advice for {client}"), sections: doc_sections };

    let units = enumerate_units(&doc);
    assert_eq!(units.len(), expected.len(), "generated sentences split back into the same units");
    let annotations: Vec<UnitAnnotation> = units
        .iter()
        .zip(expected)
        .map(|(unit, (text, labels))| {
            if let Some(text) = text {
                assert_eq!(unit.text, text, "generated sentence splits back unchanged");
            }
            UnitAnnotation { unit_id: unit.unit_id.clone(), labels, confidences: BTreeMap::new() }
        })
        .collect();

    let policy = KriPolicy::default();
    let ctx = AnalysisContext::new(&doc, annotations);
    let (assessment, _) = assess(&ctx, &policy, &Resources::default());
    let truth = GroundTruth {
        document_id: id.to_string(),
        scenario: Scenario {
            profile: profile.name.clone(),
            goals: goal_scenarios,
            insurance: insurance_scenario,
            asset_table: asset_scenario,
            projection: projection_scenario,
            cashflow: cashflow_scenario,
            position: position_scenario,
            balance: balance_amount,
        },
        annotations: ctx.annotations,
        kri_ratings: KriId::ALL.iter().map(|&k| (k, assessment.rating(k))).collect(),
        overall: assessment.overall,
    };
    (doc, truth)
}

fn document_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_mul(0xD134_2543_DE82_EF95) ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One document from `profile`; the id is derived from profile name and seed.
pub fn generate_document(profile: &CorpusProfile, seed: u64) -> Result<(SoaDocument, GroundTruth), CorpusError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(build(profile, &format!("soa-{}-{seed}", profile.name), &mut rng))
}

pub fn document_id(seed: u64, index: usize) -> String {
    format!("soa-s{seed}-{:04}", index + 1)
}

pub fn generate_corpus(n: usize, mix: &CorpusMix, seed: u64) -> Result<Vec<(SoaDocument, GroundTruth)>, CorpusError> {
    generate_corpus_with(n, mix, seed, Execution::default())
}

/// As [`generate_corpus`]; documents are generated independently per index,
/// so the result does not depend on `exec`.
pub fn generate_corpus_with(
    n: usize,
    mix: &CorpusMix,
    seed: u64,
    exec: Execution,
) -> Result<Vec<(SoaDocument, GroundTruth)>, CorpusError> {
    if n == 0 {
        return Err(CorpusError::DegenerateMix("corpus size must be at least 1".into()));
    }
    mix.validate()?;
    let dist = WeightedIndex::new(mix.entries.iter().map(|e| e.weight))
        .map_err(|e| CorpusError::DegenerateMix(e.to_string()))?;
    Ok(par::map_range(exec, n, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(document_seed(seed, i as u64));
        let profile = &mix.entries[dist.sample(&mut rng)].profile;
        build(profile, &document_id(seed, i), &mut rng)
    }))
}

pub fn truth_to_json(truth: &GroundTruth) -> String {
    let mut out = serde_json::to_string_pretty(truth).expect("ground truth serializes");
    out.push('\n');
    out
}

/// Writes `<id>.json` and `<id>.truth.json` per document.
pub fn write_corpus(dir: &Path, corpus: &[(SoaDocument, GroundTruth)]) -> Result<(), CorpusIoError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CorpusIoError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    for (doc, truth) in corpus {
        let doc_path = dir.join(format!("{}.json", doc.id));
        fs::write(&doc_path, serialize_document(doc)).map_err(io(&doc_path))?;
        let truth_path = dir.join(format!("{}.truth.json", doc.id));
        fs::write(&truth_path, truth_to_json(truth)).map_err(io(&truth_path))?;
    }
    Ok(())
}

/// Documents in a directory, sorted by file name; truth sidecars are
/// skipped.
pub fn read_documents(dir: &Path) -> Result<Vec<SoaDocument>, CorpusIoError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CorpusIoError::Io { path, source }
    };
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".json") && !name.ends_with(".truth.json")
        })
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let raw = fs::read(p).map_err(io(p))?;
            parse_document(&raw).map_err(|source| CorpusIoError::Document { path: p.display().to_string(), source })
        })
        .collect()
}

/// Documents with their truth sidecars.
pub fn read_corpus(dir: &Path) -> Result<Vec<(SoaDocument, GroundTruth)>, CorpusIoError> {
    read_documents(dir)?
        .into_iter()
        .map(|doc| {
            let path = dir.join(format!("{}.truth.json", doc.id));
            let raw =
                fs::read(&path).map_err(|source| CorpusIoError::Io { path: path.display().to_string(), source })?;
            let truth: GroundTruth = serde_json::from_slice(&raw)
                .map_err(|source| CorpusIoError::Truth { path: path.display().to_string(), source })?;
            let units = enumerate_units(&doc);
            let aligned = units.len() == truth.annotations.len()
                && units.iter().zip(&truth.annotations).all(|(u, a)| u.unit_id == a.unit_id);
            if !aligned {
                return Err(CorpusIoError::Mismatch { path: path.display().to_string() });
            }
            Ok((doc, truth))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goals::PairScorer;

    #[test]
    fn topic_templates_name_only_their_topic() {
        let topics = crate::lexicon::TopicLexicon::default();
        let slots = Slots::draw(&mut ChaCha8Rng::seed_from_u64(1));
        for topic in TOPICS {
            for v in topic.variants {
                for body in [v.goal, v.matched, v.weak] {
                    let tokens = crate::text::tokenize(&slots.fill(body)).tokens;
                    assert_eq!(topics.topics(&tokens), vec![topic.name], "{body}");
                }
            }
        }
    }

    #[test]
    fn template_scores_fall_in_their_bands() {
        let scorer = PairScorer::default();
        let slots = Slots::draw(&mut ChaCha8Rng::seed_from_u64(2));
        for topic in TOPICS {
            for v in topic.variants {
                let goal = slots.fill(v.goal);
                let matched = scorer.score(&goal, &slots.fill(v.matched)).confidence;
                let weak = scorer.score(&goal, &slots.fill(v.weak)).confidence;
                assert!(matched >= 0.82, "{goal}: matched {matched}");
                assert!((0.48..=0.68).contains(&weak), "{goal}: weak {weak}");
                for other in TOPICS.iter().filter(|o| o.name != topic.name) {
                    for ov in other.variants {
                        let s = scorer.score(&goal, &slots.fill(ov.matched)).confidence;
                        assert!(s < 0.25, "{goal} vs {}: {s}", ov.matched);
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let (a, ta) = generate_document(&CorpusProfile::mixed(), 11).unwrap();
        let (b, tb) = generate_document(&CorpusProfile::mixed(), 11).unwrap();
        assert_eq!(serialize_document(&a), serialize_document(&b));
        assert_eq!(truth_to_json(&ta), truth_to_json(&tb));
    }

    #[test]
    fn corpus_independent_of_execution() {
        let mix = CorpusMix::default();
        let seq = generate_corpus_with(12, &mix, 5, Execution::Sequential).unwrap();
        let par = generate_corpus_with(12, &mix, 5, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn degenerate_mixes() {
        assert!(generate_corpus(1, &CorpusMix { entries: vec![] }, 0).is_err());
        let zero = CorpusMix { entries: vec![MixEntry { profile: CorpusProfile::mixed(), weight: 0.0 }] };
        assert!(generate_corpus(1, &zero, 0).is_err());
        assert!(generate_corpus(0, &CorpusMix::default(), 0).is_err());
    }
}
