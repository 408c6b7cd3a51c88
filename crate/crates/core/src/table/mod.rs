//! Table features, table-type classification and the table rules.

pub mod features;
pub mod forest;
pub mod rules;

use serde::{Deserialize, Serialize};

pub use features::{table_features, LexiconHits, TableFeatureVector, TableLexicons, FEATURE_NAMES};
pub use forest::{
    classify_table, train_forest, train_table_classifier, ForestConfig, ForestReport, TablePrediction,
    TrainedTableModel,
};
pub use rules::{
    cashflow_outcome, check_diversification, projection_horizon, CashflowOutcome, DiversificationFinding,
    DiversificationLevel, NetSign,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableType {
    AssetClass,
    Projections,
    Cashflow,
    Other,
}

impl TableType {
    pub const ALL: [TableType; 4] =
        [TableType::AssetClass, TableType::Projections, TableType::Cashflow, TableType::Other];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            TableType::AssetClass => "asset_class",
            TableType::Projections => "projections",
            TableType::Cashflow => "cashflow",
            TableType::Other => "other",
        }
    }
}

impl std::fmt::Display for TableType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
