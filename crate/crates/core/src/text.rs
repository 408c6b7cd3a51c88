//! Tokenization, n-gram features, the trainable sentence classifier and
//! lexicon sentiment.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ModelError;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    /// Byte range of each token in the source text.
    pub spans: Vec<(usize, usize)>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn is_sign(c: char) -> bool {
    matches!(c, '-' | '\u{2212}' | '+')
}

/// Lowercased words and numbers. Thousands separators are dropped from
/// numbers; `$`, `%` and signs that prefix a number or `$` are kept as
/// tokens. Everything else is a separator.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut seq = TokenSequence::default();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_ascii_digit() {
            let (end, digits) = crate::quantity::number_at(text, pos).expect("digit starts a number");
            let word_end = word_end(text, end);
            if word_end > end {
                // "3rd", "60s": keep as a word
                seq.tokens.push(text[pos..word_end].to_lowercase());
                seq.spans.push((pos, word_end));
                i = advance_to(&chars, i, word_end);
            } else {
                seq.tokens.push(digits);
                seq.spans.push((pos, end));
                i = advance_to(&chars, i, end);
            }
        } else if c.is_alphabetic() {
            let end = word_end(text, pos);
            seq.tokens.push(text[pos..end].to_lowercase());
            seq.spans.push((pos, end));
            i = advance_to(&chars, i, end);
        } else if c == '$' || c == '%' {
            seq.tokens.push(c.to_string());
            seq.spans.push((pos, pos + 1));
            i += 1;
        } else if is_sign(c) {
            let next = chars.get(i + 1).map(|&(_, n)| n);
            let prev = i.checked_sub(1).map(|j| chars[j].1);
            let prefixes_number = next.is_some_and(|n| n.is_ascii_digit() || n == '$');
            if prefixes_number && !prev.is_some_and(char::is_alphanumeric) {
                let sign = if c == '+' { "+" } else { "-" };
                seq.tokens.push(sign.to_string());
                seq.spans.push((pos, pos + c.len_utf8()));
            }
            i += 1;
        } else {
            i += 1;
        }
    }
    seq
}

/// End of a word starting at `pos`: alphanumerics plus apostrophes that sit
/// between letters ("client's").
fn word_end(text: &str, pos: usize) -> usize {
    let mut end = pos;
    let mut iter = text[pos..].char_indices().peekable();
    while let Some((off, c)) = iter.next() {
        if c.is_alphanumeric() {
            end = pos + off + c.len_utf8();
        } else if (c == '\'' || c == '\u{2019}') && end == pos + off {
            match iter.peek() {
                Some(&(_, n)) if n.is_alphabetic() => continue,
                _ => break,
            }
        } else {
            break;
        }
    }
    end
}

fn advance_to(chars: &[(usize, char)], mut i: usize, byte: usize) -> usize {
    while i < chars.len() && chars[i].0 < byte {
        i += 1;
    }
    i
}

/// Unigram and bigram feature names for a token list. Bigrams are joined
/// with `_`.
pub fn ngrams(tokens: &[String]) -> Vec<String> {
    let mut out: Vec<String> = tokens.to_vec();
    out.extend(tokens.windows(2).map(|w| format!("{}_{}", w[0], w[1])));
    out
}

/// Feature name to column index. Terms are kept sorted so the index is a
/// pure function of the term set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn from_terms(mut terms: Vec<String>) -> Self {
        terms.sort();
        terms.dedup();
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary { terms, index }
    }

    /// Every n-gram seen at least `min_count` times.
    pub fn build<'a>(token_lists: impl IntoIterator<Item = &'a [String]>, min_count: usize) -> Self {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for tokens in token_lists {
            for g in ngrams(tokens) {
                *counts.entry(g).or_default() += 1;
            }
        }
        Self::from_terms(counts.into_iter().filter(|(_, c)| *c >= min_count).map(|(t, _)| t).collect())
    }

    pub fn get(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms = Vec::<String>::deserialize(d)?;
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(serde::de::Error::custom("vocabulary must be sorted and unique"));
        }
        Ok(Vocabulary::from_terms(terms))
    }
}

/// Sparse, L2-normalized n-gram counts sorted by feature id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn featurize(tokens: &[String], vocabulary: &Vocabulary) -> FeatureVector {
    let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
    for g in ngrams(tokens) {
        if let Some(id) = vocabulary.get(&g) {
            *counts.entry(id).or_default() += 1.0;
        }
    }
    let norm = counts.values().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return FeatureVector::default();
    }
    FeatureVector { entries: counts.into_iter().map(|(id, c)| (id, c / norm)).collect() }
}

/// The four sentence-level classification tasks and their fixed label sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextTask {
    GoalRec,
    Position,
    BalanceMention,
    Insurance,
}

impl TextTask {
    pub const ALL: [TextTask; 4] =
        [TextTask::GoalRec, TextTask::Position, TextTask::BalanceMention, TextTask::Insurance];

    pub fn labels(self) -> &'static [&'static str] {
        match self {
            TextTask::GoalRec => &["goal", "recommendation", "neither"],
            TextTask::Position => &["position", "other"],
            TextTask::BalanceMention => &["balance", "other"],
            TextTask::Insurance => &["recommend", "defer", "scope_out", "other"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TextTask::GoalRec => "goal_rec",
            TextTask::Position => "position",
            TextTask::BalanceMention => "balance_mention",
            TextTask::Insurance => "insurance",
        }
    }

    pub fn label_index(self, label: &str) -> Option<usize> {
        self.labels().iter().position(|l| *l == label)
    }
}

impl std::fmt::Display for TextTask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub validation_fraction: f64,
    pub min_count: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { seed: 0, epochs: 12, learning_rate: 0.5, l2: 1e-5, validation_fraction: 0.2, min_count: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub examples: usize,
    pub train_examples: usize,
    pub validation_examples: usize,
    pub train_accuracy: f64,
    /// `None` when the validation split is empty.
    pub validation_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextParameters {
    /// One row per label, one column per vocabulary term.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

/// Multinomial logistic regression over unigram+bigram features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedTextModel {
    pub format_version: u32,
    pub task: TextTask,
    pub labels: Vec<String>,
    pub vocabulary: Vocabulary,
    pub parameters: TextParameters,
    pub checksum: String,
}

#[derive(Serialize)]
struct ChecksumView<'a> {
    format_version: u32,
    task: TextTask,
    labels: &'a [String],
    vocabulary: &'a Vocabulary,
    parameters: &'a TextParameters,
}

impl TrainedTextModel {
    fn new(task: TextTask, vocabulary: Vocabulary, parameters: TextParameters) -> Self {
        let mut model = TrainedTextModel {
            format_version: MODEL_FORMAT_VERSION,
            task,
            labels: task.labels().iter().map(|s| s.to_string()).collect(),
            vocabulary,
            parameters,
            checksum: String::new(),
        };
        model.checksum = model.compute_checksum();
        model
    }

    /// SHA-256 over everything but the checksum field itself.
    pub fn compute_checksum(&self) -> String {
        let view = ChecksumView {
            format_version: self.format_version,
            task: self.task,
            labels: &self.labels,
            vocabulary: &self.vocabulary,
            parameters: &self.parameters,
        };
        hex::encode(Sha256::digest(serde_json::to_vec(&view).expect("parameters serialize")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(raw: &[u8]) -> Result<Self, ModelError> {
        let model: TrainedTextModel = serde_json::from_slice(raw)?;
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelError::FormatVersion(self.format_version));
        }
        let computed = self.compute_checksum();
        if computed != self.checksum {
            return Err(ModelError::ChecksumMismatch { stored: self.checksum.clone(), computed });
        }
        let expected: Vec<&str> = self.task.labels().to_vec();
        if self.labels != expected
            || self.parameters.weights.len() != self.labels.len()
            || self.parameters.biases.len() != self.labels.len()
            || self.parameters.weights.iter().any(|w| w.len() != self.vocabulary.len())
        {
            return Err(ModelError::InsufficientData(format!("{} model has inconsistent shapes", self.task)));
        }
        Ok(())
    }

    pub fn expect_task(&self, task: TextTask) -> Result<(), ModelError> {
        if self.task == task {
            Ok(())
        } else {
            Err(ModelError::TaskMismatch { expected: task.to_string(), found: self.task.to_string() })
        }
    }

    fn scores(&self, features: &FeatureVector) -> Vec<f64> {
        self.parameters
            .weights
            .iter()
            .zip(&self.parameters.biases)
            .map(|(w, b)| b + features.entries.iter().map(|&(j, v)| w[j as usize] * v).sum::<f64>())
            .collect()
    }

    pub fn classify(&self, text: &str) -> Distribution {
        let features = featurize(&tokenize(text).tokens, &self.vocabulary);
        self.classify_features(&features)
    }

    pub fn classify_features(&self, features: &FeatureVector) -> Distribution {
        Distribution { labels: self.labels.clone(), probabilities: softmax(&self.scores(features)) }
    }
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Probability per label, in the model's label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl Distribution {
    /// Index of the most probable label; the earliest label wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = i;
            }
        }
        best
    }

    pub fn label(&self) -> &str {
        &self.labels[self.argmax()]
    }

    pub fn confidence(&self) -> f64 {
        self.probabilities[self.argmax()]
    }
}

/// Trains a classifier for `task`.
///
/// The examples are shuffled with `config.seed`; the last
/// `validation_fraction` of the shuffled order is held out and only the rest
/// is used for the vocabulary and the weights.
pub fn train_classifier(
    examples: &[(String, String)],
    task: TextTask,
    config: &TrainConfig,
) -> Result<(TrainedTextModel, TrainingReport), ModelError> {
    let mut labelled: Vec<(Vec<String>, usize)> = Vec::with_capacity(examples.len());
    let mut per_label = vec![0usize; task.labels().len()];
    for (text, label) in examples {
        let idx = task
            .label_index(label)
            .ok_or_else(|| ModelError::UnknownLabel { task: task.to_string(), label: label.clone() })?;
        per_label[idx] += 1;
        labelled.push((tokenize(text).tokens, idx));
    }
    let present: Vec<usize> = per_label.iter().copied().filter(|&c| c > 0).collect();
    if present.len() < 2 {
        return Err(ModelError::InsufficientData(format!("{task} needs at least two labels, found {}", present.len())));
    }
    if let Some((i, &c)) = per_label.iter().enumerate().find(|(_, &c)| c > 0 && c < 10) {
        return Err(ModelError::InsufficientData(format!(
            "{task} label {:?} has {c} examples, at least 10 required",
            task.labels()[i]
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..labelled.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((labelled.len() as f64) * config.validation_fraction).floor() as usize;
    let n_train = labelled.len() - n_val;
    let (train_idx, val_idx) = order.split_at(n_train);

    let vocabulary = Vocabulary::build(train_idx.iter().map(|&i| labelled[i].0.as_slice()), config.min_count);
    let features: Vec<FeatureVector> = labelled.iter().map(|(t, _)| featurize(t, &vocabulary)).collect();

    let n_labels = task.labels().len();
    let mut weights = vec![vec![0.0f64; vocabulary.len()]; n_labels];
    let mut biases = vec![0.0f64; n_labels];
    let mut epoch_order: Vec<usize> = train_idx.to_vec();
    for epoch in 0..config.epochs {
        epoch_order.shuffle(&mut rng);
        let lr = config.learning_rate / (1.0 + 0.2 * epoch as f64);
        for &i in &epoch_order {
            let x = &features[i];
            let y = labelled[i].1;
            let scores: Vec<f64> = weights
                .iter()
                .zip(&biases)
                .map(|(w, b)| b + x.entries.iter().map(|&(j, v)| w[j as usize] * v).sum::<f64>())
                .collect();
            let probs = softmax(&scores);
            for k in 0..n_labels {
                let g = probs[k] - if k == y { 1.0 } else { 0.0 };
                biases[k] -= lr * g;
                let row = &mut weights[k];
                for &(j, v) in &x.entries {
                    let w = &mut row[j as usize];
                    *w -= lr * (g * v + config.l2 * *w);
                }
            }
        }
    }

    let model = TrainedTextModel::new(task, vocabulary, TextParameters { weights, biases });
    let accuracy = |idx: &[usize]| -> Option<f64> {
        if idx.is_empty() {
            return None;
        }
        let correct = idx.iter().filter(|&&i| model.classify_features(&features[i]).argmax() == labelled[i].1).count();
        Some(correct as f64 / idx.len() as f64)
    };
    let report = TrainingReport {
        examples: labelled.len(),
        train_examples: n_train,
        validation_examples: n_val,
        train_accuracy: accuracy(train_idx).unwrap_or(0.0),
        validation_accuracy: accuracy(val_idx),
    };
    Ok((model, report))
}

pub const POSITIVE_TERMS: &[&str] = &[
    "improve",
    "improves",
    "improved",
    "improvement",
    "improving",
    "increase",
    "increases",
    "increased",
    "grow",
    "grows",
    "growth",
    "benefit",
    "benefits",
    "beneficial",
    "surplus",
    "positive",
    "gain",
    "gains",
    "better",
    "stronger",
    "strengthen",
    "boost",
    "boosted",
];

pub const NEGATIVE_TERMS: &[&str] = &[
    "reduce",
    "reduces",
    "reduced",
    "reduction",
    "decrease",
    "decreases",
    "decreased",
    "shortfall",
    "deficit",
    "worse",
    "negative",
    "loss",
    "losses",
    "decline",
    "declines",
    "declined",
    "deteriorate",
    "weaker",
    "drop",
    "drops",
];

pub const NEGATORS: &[&str] = &["not", "no", "never", "without", "cannot", "neither", "nor"];

/// Tokens preceding a lexicon term that can invert it.
pub const NEGATION_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    /// `(positive - negative) / max(1, positive + negative)`.
    pub polarity: f64,
    /// Matched terms; negated matches are prefixed with `not `.
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SentimentLexicon {
    positive: Vec<String>,
    negative: Vec<String>,
    negators: Vec<String>,
}

impl Default for SentimentLexicon {
    fn default() -> Self {
        let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        SentimentLexicon { positive: own(POSITIVE_TERMS), negative: own(NEGATIVE_TERMS), negators: own(NEGATORS) }
    }
}

impl SentimentLexicon {
    pub fn new(positive: Vec<String>, negative: Vec<String>, negators: Vec<String>) -> Self {
        SentimentLexicon { positive, negative, negators }
    }

    fn is_negator(&self, token: &str) -> bool {
        self.negators.iter().any(|n| n == token) || token.ends_with("n't")
    }

    /// Polarity with single-token negation. A negator inverts any lexicon
    /// term within the next [`NEGATION_WINDOW`] tokens of the same clause;
    /// `. ! ? ; ,` end a clause.
    pub fn score(&self, text: &str) -> SentimentScore {
        let seq = tokenize(text);
        let (mut pos, mut neg) = (0usize, 0usize);
        let mut evidence = Vec::new();
        let mut last_negator: Option<usize> = None;
        let mut prev_end = 0;
        for (i, (tok, &(start, end))) in seq.tokens.iter().zip(&seq.spans).enumerate() {
            if text[prev_end..start].contains(['.', '!', '?', ';', ',']) {
                last_negator = None;
            }
            prev_end = end;
            if self.is_negator(tok) {
                last_negator = Some(i);
                continue;
            }
            let polarity = if self.positive.iter().any(|t| t == tok) {
                1
            } else if self.negative.iter().any(|t| t == tok) {
                -1
            } else {
                continue;
            };
            let negated = last_negator.is_some_and(|n| i - n <= NEGATION_WINDOW);
            let effective = if negated { -polarity } else { polarity };
            if effective > 0 {
                pos += 1;
            } else {
                neg += 1;
            }
            evidence.push(if negated { format!("not {tok}") } else { tok.clone() });
        }
        let total = pos + neg;
        SentimentScore { polarity: (pos as f64 - neg as f64) / total.max(1) as f64, evidence }
    }
}

/// [`SentimentLexicon::score`] with the shipped financial lexicon.
pub fn sentiment(text: &str) -> SentimentScore {
    SentimentLexicon::default().score(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s).tokens
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(toks("We recommend an SMSF"), vec!["we", "recommend", "an", "smsf"]);
        assert_eq!(toks("-$5,000"), vec!["-", "$", "5000"]);
        assert!(toks("").is_empty());
        assert_eq!(toks("client's 40% self-managed"), vec!["client's", "40", "%", "self", "managed"]);
        assert_eq!(toks("the 3rd year"), vec!["the", "3rd", "year"]);
    }

    #[test]
    fn spans_map_to_source() {
        let text = "Pay -$5,000 to the client's fund.";
        let seq = tokenize(text);
        let mut last = 0;
        for (tok, &(s, e)) in seq.tokens.iter().zip(&seq.spans) {
            assert!(s >= last && e > s);
            last = e;
            let src = text[s..e].to_lowercase().replace(',', "").replace('\u{2212}', "-");
            assert_eq!(&src, tok);
        }
    }

    #[test]
    fn featurize_examples() {
        let vocab = Vocabulary::from_terms(vec!["a".into(), "b".into(), "a_b".into()]);
        let fv = featurize(&toks("a b"), &vocab);
        assert_eq!(fv.entries.len(), 3);
        assert!((fv.norm() - 1.0).abs() < 1e-12);

        assert!(featurize(&toks("x y z"), &vocab).is_zero());

        let fv = featurize(&toks("a a"), &vocab);
        assert_eq!(fv.entries.len(), 1);
        let fv = featurize(&toks("a b a"), &vocab);
        let a = fv.entries.iter().find(|(id, _)| *id == vocab.get("a").unwrap()).unwrap().1;
        let b = fv.entries.iter().find(|(id, _)| *id == vocab.get("b").unwrap()).unwrap().1;
        assert!((a - 2.0 * b).abs() < 1e-12);
    }

    fn toy_examples() -> Vec<(String, String)> {
        let mut ex = Vec::new();
        for i in 0..15 {
            ex.push((format!("I want to retire early number {i}"), "goal".to_string()));
            ex.push((format!("We recommend a balanced fund option {i}"), "recommendation".to_string()));
            ex.push((format!("This document is confidential page {i}"), "neither".to_string()));
        }
        ex
    }

    #[test]
    fn unknown_label_rejected() {
        let mut ex = toy_examples();
        ex.push(("something".into(), "misc".into()));
        assert!(matches!(
            train_classifier(&ex, TextTask::GoalRec, &TrainConfig::default()),
            Err(ModelError::UnknownLabel { .. })
        ));
    }

    #[test]
    fn insufficient_examples_rejected() {
        let ex: Vec<_> = toy_examples().into_iter().filter(|(_, l)| l == "goal").collect();
        assert!(matches!(
            train_classifier(&ex, TextTask::GoalRec, &TrainConfig::default()),
            Err(ModelError::InsufficientData(_))
        ));
        let mut ex = toy_examples();
        ex.retain(|(t, l)| l != "neither" || t.ends_with(" 1") || t.ends_with(" 2"));
        assert!(matches!(
            train_classifier(&ex, TextTask::GoalRec, &TrainConfig::default()),
            Err(ModelError::InsufficientData(_))
        ));
    }

    #[test]
    fn training_is_deterministic_and_learns_toy_data() {
        let ex = toy_examples();
        let cfg = TrainConfig { seed: 3, ..TrainConfig::default() };
        let (m1, r1) = train_classifier(&ex, TextTask::GoalRec, &cfg).unwrap();
        let (m2, _) = train_classifier(&ex, TextTask::GoalRec, &cfg).unwrap();
        assert_eq!(m1.to_json(), m2.to_json());
        assert_eq!(r1.validation_examples, 9);
        assert_eq!(r1.validation_accuracy, Some(1.0));
        assert_eq!(m1.classify("I want to retire").label(), "goal");
        assert_eq!(m1.classify("We recommend a fund").label(), "recommendation");
    }

    #[test]
    fn checksum_detects_tampering() {
        let (model, _) = train_classifier(&toy_examples(), TextTask::GoalRec, &TrainConfig::default()).unwrap();
        let json = model.to_json();
        assert!(TrainedTextModel::from_json(json.as_bytes()).is_ok());
        let mut tampered = model.clone();
        tampered.parameters.biases[0] += 1.0;
        assert!(matches!(
            TrainedTextModel::from_json(tampered.to_json().as_bytes()),
            Err(ModelError::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn empty_text_with_zero_biases_is_uniform() {
        let vocabulary = Vocabulary::from_terms(vec!["a".into()]);
        let params = TextParameters { weights: vec![vec![1.0], vec![-1.0], vec![0.5]], biases: vec![0.0; 3] };
        let model = TrainedTextModel::new(TextTask::GoalRec, vocabulary, params);
        let d = model.classify("");
        for p in &d.probabilities {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(d.label(), "goal");
    }

    #[test]
    fn task_mismatch() {
        let (model, _) = train_classifier(&toy_examples(), TextTask::GoalRec, &TrainConfig::default()).unwrap();
        assert!(model.expect_task(TextTask::GoalRec).is_ok());
        assert!(matches!(model.expect_task(TextTask::Insurance), Err(ModelError::TaskMismatch { .. })));
    }

    #[test]
    fn sentiment_examples() {
        assert_eq!(sentiment("your cash flow will improve").polarity, 1.0);
        assert_eq!(sentiment("you will have a reduced cash flow").polarity, -1.0);
        assert_eq!(sentiment("the sky is blue").polarity, 0.0);
        assert_eq!(sentiment("this will not improve your position").polarity, -1.0);
        assert_eq!(sentiment("not today. Cash flow will improve").polarity, 1.0);
        let s = sentiment("income will increase but costs increase and savings are reduced");
        assert!((s.polarity - 1.0 / 3.0).abs() < 1e-12);
    }
}
