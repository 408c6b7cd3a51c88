//! Random forest of Gini decision trees over [`TableFeatureVector`]s.
//!
//! Each tree draws a bootstrap sample and considers `max_features` randomly
//! chosen features per node. Tree `i` is seeded from the forest seed and
//! `i` alone, so trees can be grown in any order (or in parallel) with
//! identical results.

use rand::seq::{index::sample, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::{table_features, FEATURE_NAMES};
use super::TableType;
use crate::document::Table;
use crate::error::ModelError;
use crate::par::{self, Execution};

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub min_samples_split: usize,
    /// Features tried per split; `None` means `ceil(sqrt(n_features))`.
    pub max_features: Option<usize>,
    pub validation_fraction: f64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 100,
            max_depth: 8,
            seed: 0,
            min_samples_split: 2,
            max_features: None,
            validation_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { class } => return *class,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParameters {
    pub trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub forest: Vec<DecisionTree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedTableModel {
    pub format_version: u32,
    pub labels: Vec<TableType>,
    pub parameters: ForestParameters,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestReport {
    pub examples: usize,
    pub train_examples: usize,
    pub validation_examples: usize,
    pub validation_accuracy: Option<f64>,
}

/// Ensemble vote result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablePrediction {
    pub table_type: TableType,
    /// Fraction of trees voting for `table_type`.
    pub confidence: f64,
    pub votes: Vec<usize>,
}

impl TrainedTableModel {
    pub fn compute_checksum(&self) -> String {
        let bytes =
            serde_json::to_vec(&(&self.format_version, &self.labels, &self.parameters)).expect("forest serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }

    pub fn from_json(raw: &[u8]) -> Result<Self, ModelError> {
        let model: TrainedTableModel = serde_json::from_slice(raw)?;
        if model.format_version != FOREST_FORMAT_VERSION {
            return Err(ModelError::FormatVersion(model.format_version));
        }
        let computed = model.compute_checksum();
        if computed != model.checksum {
            return Err(ModelError::ChecksumMismatch { stored: model.checksum, computed });
        }
        if model.labels != TableType::ALL || model.parameters.forest.len() != model.parameters.trees {
            return Err(ModelError::InsufficientData("table model has inconsistent shapes".into()));
        }
        Ok(model)
    }

    pub fn predict_features(&self, x: &[f64]) -> TablePrediction {
        let mut votes = vec![0usize; self.labels.len()];
        for tree in &self.parameters.forest {
            votes[tree.predict(x)] += 1;
        }
        let mut best = 0;
        for (i, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = i;
            }
        }
        let total = self.parameters.forest.len().max(1);
        TablePrediction { table_type: self.labels[best], confidence: votes[best] as f64 / total as f64, votes }
    }
}

/// Classifies one table: majority vote, ties broken by label order.
pub fn classify_table(model: &TrainedTableModel, table: &Table) -> TablePrediction {
    model.predict_features(&table_features(table).to_array())
}

fn tree_seed(seed: u64, tree: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (tree as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    max_depth: usize,
    min_samples_split: usize,
    max_features: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, samples: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let mut counts = vec![0usize; self.n_classes];
        for &s in samples.iter() {
            counts[self.y[s]] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class: majority(&counts) });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if depth >= self.max_depth || pure || samples.len() < self.min_samples_split {
            return id;
        }
        let n_features = self.x[0].len();
        let candidates = sample(rng, n_features, self.max_features.min(n_features)).into_vec();
        let parent = gini(&counts, samples.len());
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in &candidates {
            samples.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left = vec![0usize; self.n_classes];
            let mut right = counts.clone();
            for i in 0..samples.len() - 1 {
                let s = samples[i];
                left[self.y[s]] += 1;
                right[self.y[s]] -= 1;
                let (v, next) = (self.x[s][f], self.x[samples[i + 1]][f]);
                if v == next {
                    continue;
                }
                let nl = i + 1;
                let nr = samples.len() - nl;
                let impurity = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / samples.len() as f64;
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    best = Some((impurity, f, (v + next) / 2.0));
                }
            }
        }
        let Some((impurity, feature, threshold)) = best else { return id };
        if impurity >= parent {
            return id;
        }
        samples.sort_unstable();
        let (mut l, mut r): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&s| self.x[s][feature] <= threshold);
        let left = self.build(&mut l, depth + 1, rng);
        let right = self.build(&mut r, depth + 1, rng);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }
}

fn grow_tree(x: &[Vec<f64>], y: &[usize], rows: &[usize], config: &ForestConfig, index: usize) -> DecisionTree {
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(config.seed, index));
    let mut bootstrap: Vec<usize> = (0..rows.len()).map(|_| rows[rng.gen_range(0..rows.len())]).collect();
    let n_features = x[0].len();
    let max_features = config.max_features.unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize).max(1);
    let mut builder = TreeBuilder {
        x,
        y,
        n_classes: TableType::ALL.len(),
        max_depth: config.max_depth,
        min_samples_split: config.min_samples_split.max(2),
        max_features,
        nodes: Vec::new(),
    };
    builder.build(&mut bootstrap, 0, &mut rng);
    DecisionTree { nodes: builder.nodes }
}

/// Trains on feature rows directly. Every one of the four table types must
/// appear in `labels`.
pub fn train_forest(
    features: &[Vec<f64>],
    labels: &[TableType],
    config: &ForestConfig,
    exec: Execution,
) -> Result<(TrainedTableModel, ForestReport), ModelError> {
    if let Some(missing) = TableType::ALL.iter().find(|t| !labels.contains(t)) {
        return Err(ModelError::InsufficientData(format!("no training tables labelled {missing}")));
    }
    if config.trees == 0 {
        return Err(ModelError::InsufficientData("forest needs at least one tree".into()));
    }
    let y: Vec<usize> = labels.iter().map(|t| t.index()).collect();
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let n_val = ((features.len() as f64) * config.validation_fraction).floor() as usize;
    let (train, val) = order.split_at(features.len() - n_val);
    let mut train = train.to_vec();
    train.sort_unstable();

    let forest = par::map_range(exec, config.trees, |i| grow_tree(features, &y, &train, config, i));
    let mut model = TrainedTableModel {
        format_version: FOREST_FORMAT_VERSION,
        labels: TableType::ALL.to_vec(),
        parameters: ForestParameters {
            trees: config.trees,
            max_depth: config.max_depth,
            seed: config.seed,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            forest,
        },
        checksum: String::new(),
    };
    model.checksum = model.compute_checksum();
    let validation_accuracy = (!val.is_empty()).then(|| {
        let correct = val.iter().filter(|&&i| model.predict_features(&features[i]).table_type == labels[i]).count();
        correct as f64 / val.len() as f64
    });
    let report = ForestReport {
        examples: features.len(),
        train_examples: train.len(),
        validation_examples: val.len(),
        validation_accuracy,
    };
    Ok((model, report))
}

/// Featurizes the tables and trains the forest.
pub fn train_table_classifier(
    examples: &[(Table, TableType)],
    config: &ForestConfig,
    exec: Execution,
) -> Result<(TrainedTableModel, ForestReport), ModelError> {
    let features: Vec<Vec<f64>> = par::map(exec, examples, |(t, _)| table_features(t).to_array().to_vec());
    let labels: Vec<TableType> = examples.iter().map(|(_, l)| *l).collect();
    train_forest(&features, &labels, config, exec)
}

impl TrainedTableModel {
    pub fn max_tree_depth(&self) -> usize {
        self.parameters.forest.iter().map(DecisionTree::depth).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<Vec<f64>>, Vec<TableType>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let t = TableType::ALL[i % 4];
            let mut row = vec![0.0; 4];
            row[t.index()] = 1.0 + (i % 3) as f64;
            x.push(row);
            y.push(t);
        }
        (x, y)
    }

    #[test]
    fn learns_separable_toy_data() {
        let (x, y) = toy();
        let cfg = ForestConfig { trees: 15, seed: 5, ..Default::default() };
        let (model, report) = train_forest(&x, &y, &cfg, Execution::Sequential).unwrap();
        assert_eq!(report.validation_examples, 8);
        assert_eq!(report.validation_accuracy, Some(1.0));
        assert!(model.max_tree_depth() <= cfg.max_depth);
        let p = model.predict_features(&[0.0, 0.0, 2.0, 0.0]);
        assert_eq!(p.table_type, TableType::Cashflow);
        assert_eq!(p.votes.iter().sum::<usize>(), 15);
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let (x, y) = toy();
        let cfg = ForestConfig { trees: 12, seed: 9, ..Default::default() };
        let (a, _) = train_forest(&x, &y, &cfg, Execution::Sequential).unwrap();
        let (b, _) = train_forest(&x, &y, &cfg, Execution::Parallel).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn single_label_rejected() {
        let x = vec![vec![1.0]; 20];
        let y = vec![TableType::Other; 20];
        assert!(matches!(
            train_forest(&x, &y, &ForestConfig::default(), Execution::Sequential),
            Err(ModelError::InsufficientData(_))
        ));
    }

    #[test]
    fn checksum_round_trip() {
        let (x, y) = toy();
        let (model, _) =
            train_forest(&x, &y, &ForestConfig { trees: 3, ..Default::default() }, Execution::Sequential).unwrap();
        let back = TrainedTableModel::from_json(model.to_json().as_bytes()).unwrap();
        assert_eq!(back, model);
        let mut bad = model.clone();
        bad.parameters.seed += 1;
        assert!(matches!(
            TrainedTableModel::from_json(bad.to_json().as_bytes()),
            Err(ModelError::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn depth_limit_respected() {
        let (x, y) = toy();
        let cfg = ForestConfig { trees: 4, max_depth: 1, ..Default::default() };
        let (model, _) = train_forest(&x, &y, &cfg, Execution::Sequential).unwrap();
        assert!(model.max_tree_depth() <= 1);
    }
}
