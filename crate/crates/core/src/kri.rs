//! Ratings, policy and the per-KRI results with the findings each rating is
//! derived from.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::PolicyError;
use crate::quantity::BalanceStatistics;
use crate::table::{DiversificationLevel, NetSign};

/// Traffic light. Ordered by severity: `Green < Amber < Red`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RiskRating {
    Green,
    Amber,
    Red,
}

impl RiskRating {
    pub const ALL: [RiskRating; 3] = [RiskRating::Green, RiskRating::Amber, RiskRating::Red];

    pub fn as_str(self) -> &'static str {
        match self {
            RiskRating::Green => "GREEN",
            RiskRating::Amber => "AMBER",
            RiskRating::Red => "RED",
        }
    }

    /// Numeric value used by the weighted score.
    pub fn value(self) -> f64 {
        match self {
            RiskRating::Green => 0.0,
            RiskRating::Amber => 0.5,
            RiskRating::Red => 1.0,
        }
    }

    /// One step less severe; green stays green.
    pub fn improved(self) -> RiskRating {
        match self {
            RiskRating::Red => RiskRating::Amber,
            _ => RiskRating::Green,
        }
    }
}

impl fmt::Display for RiskRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RiskRating {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "GREEN" => Ok(RiskRating::Green),
            "AMBER" => Ok(RiskRating::Amber),
            "RED" => Ok(RiskRating::Red),
            other => Err(format!("unknown rating {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KriId {
    GoalAdvice,
    Diversification,
    ClientPosition,
    Cashflow,
    StartingBalance,
    Insurance,
}

impl KriId {
    /// Also the column order of the batch report.
    pub const ALL: [KriId; 6] = [
        KriId::GoalAdvice,
        KriId::Diversification,
        KriId::ClientPosition,
        KriId::Cashflow,
        KriId::StartingBalance,
        KriId::Insurance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KriId::GoalAdvice => "goal_advice",
            KriId::Diversification => "diversification",
            KriId::ClientPosition => "client_position",
            KriId::Cashflow => "cashflow",
            KriId::StartingBalance => "starting_balance",
            KriId::Insurance => "insurance",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for KriId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for KriId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KriId::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown KRI {s:?}"))
    }
}

/// Goal/recommendation confidence bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchThresholds {
    pub green_min: f64,
    pub amber_min: f64,
}

impl Default for MatchThresholds {
    fn default() -> Self {
        MatchThresholds { green_min: 0.75, amber_min: 0.40 }
    }
}

impl MatchThresholds {
    pub fn validate(&self) -> Result<(), PolicyError> {
        if 0.0 < self.amber_min && self.amber_min < self.green_min && self.green_min <= 1.0 {
            Ok(())
        } else {
            Err(PolicyError::Invalid(format!(
                "thresholds need 0 < amber_min < green_min <= 1, got amber_min {} green_min {}",
                self.amber_min, self.green_min
            )))
        }
    }

    /// Rating of one goal given its best link confidence, if linked.
    pub fn rate(&self, best_link: Option<f64>) -> RiskRating {
        match best_link {
            None => RiskRating::Red,
            Some(c) if c < self.amber_min => RiskRating::Red,
            Some(c) if c < self.green_min => RiskRating::Amber,
            Some(_) => RiskRating::Green,
        }
    }
}

/// Score cutoffs of the overall rating: below `amber_from` is green, below
/// `red_from` amber, otherwise red.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateCutoffs {
    pub amber_from: f64,
    pub red_from: f64,
}

impl Default for AggregateCutoffs {
    fn default() -> Self {
        AggregateCutoffs { amber_from: 0.25, red_from: 0.60 }
    }
}

fn default_weights() -> BTreeMap<KriId, f64> {
    KriId::ALL.iter().map(|&k| (k, 1.0)).collect()
}

fn default_high_significance() -> BTreeSet<KriId> {
    [KriId::GoalAdvice, KriId::StartingBalance].into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KriPolicy {
    pub balance_red_below: Decimal,
    pub balance_amber_below: Decimal,
    pub horizon_years_min: u32,
    pub thresholds: MatchThresholds,
    pub scope_out_rating: RiskRating,
    /// Missing entries weigh 1.0.
    pub weights: BTreeMap<KriId, f64>,
    pub high_significance: BTreeSet<KriId>,
    pub cutoffs: AggregateCutoffs,
}

impl Default for KriPolicy {
    fn default() -> Self {
        KriPolicy {
            balance_red_below: Decimal::from(200_000),
            balance_amber_below: Decimal::from(250_000),
            horizon_years_min: 10,
            thresholds: MatchThresholds::default(),
            scope_out_rating: RiskRating::Amber,
            weights: default_weights(),
            high_significance: default_high_significance(),
            cutoffs: AggregateCutoffs::default(),
        }
    }
}

impl KriPolicy {
    pub fn weight(&self, kri: KriId) -> f64 {
        self.weights.get(&kri).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.balance_red_below >= self.balance_amber_below {
            return Err(PolicyError::Invalid("balance_red_below must be below balance_amber_below".into()));
        }
        self.thresholds.validate()?;
        if self.weights.values().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(PolicyError::Invalid("weights must be finite and non-negative".into()));
        }
        if KriId::ALL.iter().all(|&k| self.weight(k) == 0.0) {
            return Err(PolicyError::Invalid("weights must not all be zero".into()));
        }
        let c = self.cutoffs;
        if !(0.0 <= c.amber_from && c.amber_from <= c.red_from && c.red_from <= 1.0) {
            return Err(PolicyError::Invalid("cutoffs need 0 <= amber_from <= red_from <= 1".into()));
        }
        Ok(())
    }

    pub fn from_json(raw: &[u8]) -> Result<Self, PolicyError> {
        let policy: KriPolicy = serde_json::from_slice(raw)?;
        policy.validate()?;
        Ok(policy)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("policy serializes");
        out.push('\n');
        out
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("policy serializes")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsuranceCategory {
    Recommended,
    Deferred,
    ScopedOut,
    None,
}

/// A unit supporting a KRI result, or a document-level note when `unit_id`
/// is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_id: Option<String>,
    pub note: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistics: Option<BalanceStatistics>,
}

impl Evidence {
    pub fn new(unit_id: impl Into<String>, note: impl Into<String>) -> Self {
        Evidence {
            unit_id: Some(unit_id.into()),
            note: note.into(),
            values: Vec::new(),
            confidence: None,
            statistics: None,
        }
    }

    pub fn document(note: impl Into<String>) -> Self {
        Evidence { unit_id: None, note: note.into(), values: Vec::new(), confidence: None, statistics: None }
    }

    pub fn with_values(mut self, values: Vec<String>) -> Self {
        self.values = values;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = Some(confidence);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalRating {
    pub goal_id: String,
    pub best_confidence: Option<f64>,
    pub rating: RiskRating,
}

/// The facts a KRI rating is computed from. [`KriFinding::rating`] is the
/// rule; evaluators build the finding and call it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum KriFinding {
    GoalAdvice {
        goals: Vec<GoalRating>,
        thresholds: MatchThresholds,
    },
    /// One level per asset-class table.
    Diversification {
        levels: Vec<DiversificationLevel>,
    },
    ClientPosition {
        position_sentences: usize,
        /// Horizon in years of each projections table.
        projection_horizons: Vec<u32>,
        misstatements: usize,
        disclosed_downsides: usize,
        horizon_years_min: u32,
    },
    /// One outcome per cash-flow table.
    Cashflow {
        outcomes: Vec<NetSign>,
        acknowledged: bool,
    },
    StartingBalance {
        median: Option<Decimal>,
        red_below: Decimal,
        amber_below: Decimal,
    },
    Insurance {
        category: InsuranceCategory,
        scope_out_rating: RiskRating,
    },
}

impl KriFinding {
    pub fn kri(&self) -> KriId {
        match self {
            KriFinding::GoalAdvice { .. } => KriId::GoalAdvice,
            KriFinding::Diversification { .. } => KriId::Diversification,
            KriFinding::ClientPosition { .. } => KriId::ClientPosition,
            KriFinding::Cashflow { .. } => KriId::Cashflow,
            KriFinding::StartingBalance { .. } => KriId::StartingBalance,
            KriFinding::Insurance { .. } => KriId::Insurance,
        }
    }

    pub fn rating(&self) -> RiskRating {
        match self {
            KriFinding::GoalAdvice { goals, thresholds } => {
                if goals.is_empty() {
                    RiskRating::Red
                } else {
                    goals.iter().map(|g| thresholds.rate(g.best_confidence)).max().unwrap_or(RiskRating::Red)
                }
            }
            KriFinding::Diversification { levels } => levels
                .iter()
                .map(|l| match l {
                    DiversificationLevel::Diversified => RiskRating::Green,
                    DiversificationLevel::Borderline => RiskRating::Amber,
                    DiversificationLevel::NotDiversified => RiskRating::Red,
                })
                .max()
                .unwrap_or(RiskRating::Amber),
            KriFinding::ClientPosition {
                position_sentences,
                projection_horizons,
                misstatements,
                disclosed_downsides,
                horizon_years_min,
            } => {
                if (*position_sentences == 0 && projection_horizons.is_empty()) || *misstatements > 0 {
                    RiskRating::Red
                } else if *disclosed_downsides > 0 {
                    RiskRating::Green
                } else if projection_horizons.iter().max().is_some_and(|&h| h < *horizon_years_min) {
                    RiskRating::Amber
                } else {
                    RiskRating::Green
                }
            }
            KriFinding::Cashflow { outcomes, acknowledged } => outcomes
                .iter()
                .map(|o| match o {
                    NetSign::Positive => RiskRating::Green,
                    NetSign::Negative if *acknowledged => RiskRating::Amber,
                    NetSign::Negative => RiskRating::Red,
                    NetSign::Unknown => RiskRating::Amber,
                })
                .max()
                .unwrap_or(RiskRating::Red),
            KriFinding::StartingBalance { median, red_below, amber_below } => match median {
                None => RiskRating::Red,
                Some(m) if m < red_below => RiskRating::Red,
                Some(m) if m < amber_below => RiskRating::Amber,
                Some(_) => RiskRating::Green,
            },
            KriFinding::Insurance { category, scope_out_rating } => match category {
                InsuranceCategory::Recommended => RiskRating::Green,
                InsuranceCategory::Deferred => RiskRating::Amber,
                InsuranceCategory::ScopedOut => *scope_out_rating,
                InsuranceCategory::None => RiskRating::Red,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KriResult {
    pub kri: KriId,
    pub rating: RiskRating,
    pub finding: KriFinding,
    pub evidence: Vec<Evidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistics: Option<BalanceStatistics>,
}

impl KriResult {
    pub fn from_finding(finding: KriFinding, evidence: Vec<Evidence>) -> Self {
        KriResult { kri: finding.kri(), rating: finding.rating(), finding, evidence, statistics: None }
    }

    /// Whether the stored rating is what the rule gives for the stored finding.
    pub fn is_consistent(&self) -> bool {
        self.kri == self.finding.kri() && self.rating == self.finding.rating()
    }
}
