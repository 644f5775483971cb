//! Classifiers for the extracted feature sets: k-nearest-neighbour with
//! normalized Euclidean distance, logistic regression, OneR, and a
//! gain-ratio decision tree.
//!
//! All training is deterministic: identical datasets and options produce
//! identical models, and ties resolve by fixed rules (smallest training-row
//! index for k-NN, the non-seizure class for majority ties, first scan
//! position for equal split scores).

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::ConfusionMatrix;
use crate::feature_extraction::FeatureVector;
use crate::label::ClassLabel;

/// Feature rows with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<ClassLabel>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<ClassLabel>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("dataset rows"));
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                context: "dataset labels",
                expected: rows.len(),
                got: labels.len(),
            });
        }
        let width = feature_names.len();
        for row in &rows {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    context: "dataset row",
                    expected: width,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("dataset row"));
            }
        }
        Ok(Dataset {
            feature_names,
            rows,
            labels,
        })
    }

    pub fn from_features(features: &[FeatureVector]) -> Result<Self> {
        let first = features
            .first()
            .ok_or(Error::EmptyInput("feature vectors"))?;
        let names = FeatureVector::feature_names(first.amplitude_params.len());
        let rows = features.iter().map(FeatureVector::as_row).collect();
        let labels = features.iter().map(|f| f.label).collect();
        Dataset::new(names, rows, labels)
    }

    /// Parse any `segment_id,label,<numeric columns…>` CSV, yielding the
    /// dataset plus the segment ids in row order.
    pub fn from_labelled_csv<R: BufRead>(reader: R) -> Result<(Self, Vec<String>)> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or(Error::EmptyInput("labelled CSV"))?;
        let columns: Vec<&str> = header.split(',').collect();
        if columns.len() < 3 || columns[0] != "segment_id" || columns[1] != "label" {
            return Err(Error::CsvSchema(format!(
                "expected segment_id,label,… header, got {header:?}"
            )));
        }
        let names: Vec<String> = columns[2..].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(Error::CsvSchema(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 2,
                    columns.len(),
                    fields.len()
                )));
            }
            ids.push(fields[0].to_owned());
            labels.push(fields[1].parse()?);
            let row: Vec<f64> = fields[2..]
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::CsvSchema(format!("cannot parse value {s:?}")))
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        Ok((Dataset::new(names, rows, labels)?, ids))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Row subset in the given index order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::new(self.feature_names.clone(), rows, labels)
    }
}

/// Which classifier to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    Knn(usize),
    Logistic,
    OneR,
    Tree,
}

impl ClassifierKind {
    pub fn name(self) -> String {
        match self {
            ClassifierKind::Knn(k) => format!("knn{k}"),
            ClassifierKind::Logistic => "logistic".into(),
            ClassifierKind::OneR => "oner".into(),
            ClassifierKind::Tree => "tree".into(),
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(ClassifierKind::Logistic),
            "oner" => Ok(ClassifierKind::OneR),
            "tree" => Ok(ClassifierKind::Tree),
            _ => {
                if let Some(k) = s.strip_prefix("knn") {
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::InvalidSpec(format!("bad classifier {s:?}")))?;
                    if k == 0 {
                        return Err(Error::InvalidSpec("knn requires k >= 1".into()));
                    }
                    return Ok(ClassifierKind::Knn(k));
                }
                Err(Error::InvalidSpec(format!("unknown classifier {s:?}")))
            }
        }
    }
}

/// Training hyperparameters; the defaults mirror the usual tool settings
/// (OneR bucket minimum 6, tree leaf minimum 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub oner_min_bucket: usize,
    pub tree_min_leaf: usize,
    pub logistic_ridge: f64,
    pub logistic_grad_tol: f64,
    pub logistic_max_iter: usize,
    /// Refuse logistic training when the standardized copy of the data
    /// would exceed this many bytes.
    pub logistic_memory_cap_bytes: Option<u64>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            oner_min_bucket: 6,
            tree_min_leaf: 2,
            logistic_ridge: 1e-8,
            logistic_grad_tol: 1e-8,
            logistic_max_iter: 10_000,
            logistic_memory_cap_bytes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub feature_min: Vec<f64>,
    pub feature_max: Vec<f64>,
    /// Training rows already normalized to [0, 1] per feature.
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<ClassLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneRModel {
    pub n_features: usize,
    pub feature: usize,
    /// Bucket boundaries; bucket i covers values ≤ thresholds[i].
    pub thresholds: Vec<f64>,
    pub classes: Vec<ClassLabel>,
    pub training_errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        label: ClassLabel,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub n_features: usize,
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    Knn(KnnModel),
    Logistic(LogisticModel),
    OneR(OneRModel),
    Tree(TreeModel),
}

impl TrainedModel {
    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Knn(m) => m.feature_min.len(),
            TrainedModel::Logistic(m) => m.weights.len(),
            TrainedModel::OneR(m) => m.n_features,
            TrainedModel::Tree(m) => m.n_features,
        }
    }
}

fn require_both_classes(labels: &[ClassLabel]) -> Result<()> {
    let seizure = labels.iter().filter(|&&l| l == ClassLabel::Seizure).count();
    if seizure == 0 || seizure == labels.len() {
        return Err(Error::SingleClassTraining);
    }
    Ok(())
}

/// Train one classifier on the given dataset.
pub fn train(kind: ClassifierKind, data: &Dataset, options: &TrainOptions) -> Result<TrainedModel> {
    if data.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    require_both_classes(&data.labels)?;
    match kind {
        ClassifierKind::Knn(k) => train_knn(k, data),
        ClassifierKind::Logistic => train_logistic(data, options),
        ClassifierKind::OneR => train_oner(data, options),
        ClassifierKind::Tree => train_tree(data, options),
    }
}

/// Predict the class of one feature row.
pub fn predict(model: &TrainedModel, row: &[f64]) -> Result<ClassLabel> {
    if row.len() != model.n_features() {
        return Err(Error::DimensionMismatch {
            context: "prediction row",
            expected: model.n_features(),
            got: row.len(),
        });
    }
    Ok(match model {
        TrainedModel::Knn(m) => predict_knn(m, row),
        TrainedModel::Logistic(m) => predict_logistic(m, row),
        TrainedModel::OneR(m) => predict_oner(m, row),
        TrainedModel::Tree(m) => predict_tree(m, row),
    })
}

/// Evaluate on a test set, tallying the non-seizure/seizure confusion matrix.
pub fn evaluate(model: &TrainedModel, test: &Dataset) -> Result<ConfusionMatrix> {
    if test.is_empty() {
        return Err(Error::EmptyInput("test set"));
    }
    let mut cm = ConfusionMatrix::zero();
    for (row, &actual) in test.rows.iter().zip(&test.labels) {
        cm.record(actual, predict(model, row)?);
    }
    Ok(cm)
}

// --- k-nearest neighbour -------------------------------------------------

fn train_knn(k: usize, data: &Dataset) -> Result<TrainedModel> {
    if k == 0 {
        return Err(Error::InvalidSpec("knn requires k >= 1".into()));
    }
    let d = data.n_features();
    let mut feature_min = vec![f64::INFINITY; d];
    let mut feature_max = vec![f64::NEG_INFINITY; d];
    for row in &data.rows {
        for j in 0..d {
            feature_min[j] = feature_min[j].min(row[j]);
            feature_max[j] = feature_max[j].max(row[j]);
        }
    }
    let rows = data
        .rows
        .iter()
        .map(|row| normalize_row(row, &feature_min, &feature_max, false))
        .collect();
    Ok(TrainedModel::Knn(KnnModel {
        k,
        feature_min,
        feature_max,
        rows,
        labels: data.labels.clone(),
    }))
}

/// Per-feature (v − min)/(max − min); constant features map to 0 and so
/// contribute nothing to any distance. Test rows are clipped to [0, 1].
fn normalize_row(row: &[f64], min: &[f64], max: &[f64], clip: bool) -> Vec<f64> {
    row.iter()
        .enumerate()
        .map(|(j, &v)| {
            let range = max[j] - min[j];
            if range <= 0.0 {
                0.0
            } else {
                let scaled = (v - min[j]) / range;
                if clip {
                    scaled.clamp(0.0, 1.0)
                } else {
                    scaled
                }
            }
        })
        .collect()
}

fn predict_knn(model: &KnnModel, row: &[f64]) -> ClassLabel {
    let query = normalize_row(row, &model.feature_min, &model.feature_max, true);
    let mut distances: Vec<(f64, usize)> = model
        .rows
        .iter()
        .enumerate()
        .map(|(i, train_row)| {
            let d2: f64 = train_row
                .iter()
                .zip(&query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d2, i)
        })
        .collect();
    // Distance ties resolve to the smallest training-row index.
    distances.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let k = model.k.min(distances.len());
    let mut votes = [0usize; 2];
    for &(_, idx) in &distances[..k] {
        votes[model.labels[idx].index()] += 1;
    }
    if votes[0] == votes[1] {
        // Vote tie: the class of the single nearest neighbour.
        model.labels[distances[0].1]
    } else if votes[0] > votes[1] {
        ClassLabel::NonSeizure
    } else {
        ClassLabel::Seizure
    }
}

// --- logistic regression --------------------------------------------------

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Binary cross-entropy with an L2 ridge on the non-intercept weights,
/// minimized by full-batch gradient descent with backtracking line search.
/// Features are standardized internally on training statistics, which is a
/// reparameterization of the same linear model.
fn train_logistic(data: &Dataset, options: &TrainOptions) -> Result<TrainedModel> {
    let n = data.len();
    let d = data.n_features();
    if let Some(cap) = options.logistic_memory_cap_bytes {
        let needed = (2 * n * d + 4 * d) as u64 * 8;
        if needed > cap {
            return Err(Error::ResourceLimit {
                needed_bytes: needed,
                cap_bytes: cap,
            });
        }
    }

    let mut means = vec![0.0; d];
    for row in &data.rows {
        for j in 0..d {
            means[j] += row[j];
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut stds = vec![0.0; d];
    for row in &data.rows {
        for j in 0..d {
            let c = row[j] - means[j];
            stds[j] += c * c;
        }
    }
    for s in &mut stds {
        *s = (*s / n as f64).sqrt();
        if *s <= 0.0 {
            *s = 1.0;
        }
    }

    let x: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| (v - means[j]) / stds[j])
                .collect()
        })
        .collect();
    let y: Vec<f64> = data
        .labels
        .iter()
        .map(|&l| if l == ClassLabel::Seizure { 1.0 } else { 0.0 })
        .collect();

    let ridge = options.logistic_ridge;
    let objective = |w: &[f64], b: f64| -> f64 {
        let mut loss = 0.0;
        for (xi, &yi) in x.iter().zip(&y) {
            let z: f64 = xi.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b;
            loss += log1p_exp(z) - yi * z;
        }
        loss + 0.5 * ridge * w.iter().map(|v| v * v).sum::<f64>()
    };

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut step = 1.0_f64;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    let mut grad_w = vec![0.0; d];
    while iterations < options.logistic_max_iter {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (xi, &yi) in x.iter().zip(&y) {
            let z: f64 = xi.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b;
            let err = sigmoid(z) - yi;
            for (g, &v) in grad_w.iter_mut().zip(xi) {
                *g += err * v;
            }
            grad_b += err;
        }
        for (g, &wi) in grad_w.iter_mut().zip(&w) {
            *g += ridge * wi;
        }
        grad_norm = (grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b).sqrt();
        if grad_norm <= options.logistic_grad_tol {
            break;
        }

        let current = objective(&w, b);
        let g2 = grad_norm * grad_norm;
        let mut s = (step * 2.0).min(1e6);
        let mut accepted = false;
        for _ in 0..60 {
            let trial_w: Vec<f64> = w.iter().zip(&grad_w).map(|(wi, g)| wi - s * g).collect();
            let trial_b = b - s * grad_b;
            if objective(&trial_w, trial_b) <= current - 1e-4 * s * g2 {
                w = trial_w;
                b = trial_b;
                step = s;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            break; // no descent step representable; treat as converged
        }
        iterations += 1;
    }

    if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
        return Err(Error::NonFinite("logistic weights"));
    }
    Ok(TrainedModel::Logistic(LogisticModel {
        means,
        stds,
        weights: w,
        bias: b,
        iterations,
        final_grad_norm: grad_norm,
    }))
}

fn predict_logistic(model: &LogisticModel, row: &[f64]) -> ClassLabel {
    let z: f64 = row
        .iter()
        .enumerate()
        .map(|(j, &v)| (v - model.means[j]) / model.stds[j] * model.weights[j])
        .sum::<f64>()
        + model.bias;
    if sigmoid(z) >= 0.5 {
        ClassLabel::Seizure
    } else {
        ClassLabel::NonSeizure
    }
}

// --- OneR -------------------------------------------------------------

fn majority(counts: [usize; 2]) -> (ClassLabel, usize) {
    // Count ties resolve to the non-seizure class.
    if counts[1] > counts[0] {
        (ClassLabel::Seizure, counts[1])
    } else {
        (ClassLabel::NonSeizure, counts[0])
    }
}

/// Holte-style single-attribute discretization: grow a bucket until its
/// majority class holds at least `min_bucket` instances, close it where the
/// value changes and the incoming class differs, then merge adjacent buckets
/// that predict the same class.
fn oner_discretize(
    sorted: &[(f64, ClassLabel)],
    min_bucket: usize,
) -> (Vec<f64>, Vec<ClassLabel>, usize) {
    let mut thresholds = Vec::new();
    let mut classes = Vec::new();
    let mut errors = 0usize;
    let mut counts = [0usize; 2];
    for (i, &(value, label)) in sorted.iter().enumerate() {
        counts[label.index()] += 1;
        let (bucket_class, bucket_count) = majority(counts);
        let close = match sorted.get(i + 1) {
            None => true,
            Some(&(next_value, next_label)) => {
                bucket_count >= min_bucket && next_value != value && next_label != bucket_class
            }
        };
        if close {
            errors += counts[0] + counts[1] - bucket_count;
            classes.push(bucket_class);
            if let Some(&(next_value, _)) = sorted.get(i + 1) {
                thresholds.push((value + next_value) / 2.0);
            }
            counts = [0, 0];
        }
    }
    // Merge neighbouring buckets with identical predictions.
    let mut merged_thresholds = Vec::new();
    let mut merged_classes: Vec<ClassLabel> = Vec::new();
    for (i, &class) in classes.iter().enumerate() {
        if merged_classes.last() == Some(&class) {
            if i < classes.len() {
                merged_thresholds.pop();
                if i < thresholds.len() {
                    merged_thresholds.push(thresholds[i]);
                }
            }
        } else {
            merged_classes.push(class);
            if i < thresholds.len() {
                merged_thresholds.push(thresholds[i]);
            }
        }
    }
    (merged_thresholds, merged_classes, errors)
}

fn train_oner(data: &Dataset, options: &TrainOptions) -> Result<TrainedModel> {
    let d = data.n_features();
    let mut best: Option<OneRModel> = None;
    for feature in 0..d {
        let mut sorted: Vec<(f64, ClassLabel)> = data
            .rows
            .iter()
            .zip(&data.labels)
            .map(|(row, &label)| (row[feature], label))
            .collect();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (thresholds, classes, errors) = oner_discretize(&sorted, options.oner_min_bucket);
        let candidate = OneRModel {
            n_features: d,
            feature,
            thresholds,
            classes,
            training_errors: errors,
        };
        let better = match &best {
            None => true,
            Some(incumbent) => candidate.training_errors < incumbent.training_errors,
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(TrainedModel::OneR(best.expect("at least one feature")))
}

fn predict_oner(model: &OneRModel, row: &[f64]) -> ClassLabel {
    let value = row[model.feature];
    let bucket = model.thresholds.partition_point(|&t| value > t);
    model.classes[bucket.min(model.classes.len() - 1)]
}

// --- decision tree ----------------------------------------------------

fn entropy(counts: [usize; 2]) -> f64 {
    let total = (counts[0] + counts[1]) as f64;
    let mut h = 0.0;
    for c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

struct SplitCandidate {
    gain_ratio: f64,
    feature: usize,
    threshold: f64,
}

fn best_split(data: &Dataset, indices: &[usize], min_leaf: usize) -> Option<SplitCandidate> {
    let n = indices.len();
    let mut parent = [0usize; 2];
    for &i in indices {
        parent[data.labels[i].index()] += 1;
    }
    let parent_entropy = entropy(parent);
    let mut best: Option<SplitCandidate> = None;
    for feature in 0..data.n_features() {
        let mut order: Vec<usize> = indices.to_vec();
        order.sort_by(|&a, &b| {
            data.rows[a][feature]
                .partial_cmp(&data.rows[b][feature])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut left = [0usize; 2];
        for s in 1..n {
            let prev = order[s - 1];
            left[data.labels[prev].index()] += 1;
            let value_prev = data.rows[prev][feature];
            let value_next = data.rows[order[s]][feature];
            if value_prev == value_next || s < min_leaf || n - s < min_leaf {
                continue;
            }
            let right = [parent[0] - left[0], parent[1] - left[1]];
            let frac_left = s as f64 / n as f64;
            let gain =
                parent_entropy - frac_left * entropy(left) - (1.0 - frac_left) * entropy(right);
            if gain <= 1e-12 {
                continue;
            }
            let split_info =
                -frac_left * frac_left.log2() - (1.0 - frac_left) * (1.0 - frac_left).log2();
            let gain_ratio = gain / split_info;
            let better = match &best {
                None => true,
                Some(incumbent) => gain_ratio > incumbent.gain_ratio,
            };
            if better {
                best = Some(SplitCandidate {
                    gain_ratio,
                    feature,
                    threshold: (value_prev + value_next) / 2.0,
                });
            }
        }
    }
    best
}

fn grow_tree(
    data: &Dataset,
    indices: &[usize],
    min_leaf: usize,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let mut counts = [0usize; 2];
    for &i in indices {
        counts[data.labels[i].index()] += 1;
    }
    let (majority_label, majority_count) = majority(counts);
    let pure = majority_count == indices.len();
    let splittable = indices.len() >= 2 * min_leaf;
    if !pure && splittable {
        if let Some(split) = best_split(data, indices, min_leaf) {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                .iter()
                .partition(|&&i| data.rows[i][split.feature] <= split.threshold);
            let placeholder = nodes.len();
            nodes.push(TreeNode::Leaf {
                label: majority_label,
            });
            let left = grow_tree(data, &left_idx, min_leaf, nodes);
            let right = grow_tree(data, &right_idx, min_leaf, nodes);
            nodes[placeholder] = TreeNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            return placeholder;
        }
    }
    nodes.push(TreeNode::Leaf {
        label: majority_label,
    });
    nodes.len() - 1
}

fn train_tree(data: &Dataset, options: &TrainOptions) -> Result<TrainedModel> {
    let indices: Vec<usize> = (0..data.len()).collect();
    let mut nodes = Vec::new();
    let root = grow_tree(data, &indices, options.tree_min_leaf.max(1), &mut nodes);
    debug_assert_eq!(root, 0);
    Ok(TrainedModel::Tree(TreeModel {
        n_features: data.n_features(),
        nodes,
    }))
}

fn predict_tree(model: &TreeModel, row: &[f64]) -> ClassLabel {
    let mut node = 0usize;
    loop {
        match &model.nodes[node] {
            TreeNode::Leaf { label } => return *label,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                node = if row[*feature] <= *threshold {
                    *left
                } else {
                    *right
                };
            }
        }
    }
}

// --- persistence --------------------------------------------------------

const MODEL_FORMAT: &str = "llsp-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PersistedModel {
    format: String,
    version: u32,
    model: TrainedModel,
}

/// Write the versioned JSON form of a trained model. Floats use the
/// shortest round-trip representation, so loading restores them exactly.
pub fn save_model<W: Write>(writer: W, model: &TrainedModel) -> Result<()> {
    let persisted = PersistedModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        model: model.clone(),
    };
    serde_json::to_writer_pretty(writer, &persisted).map_err(|e| Error::Persistence(e.to_string()))
}

pub fn load_model<R: Read>(reader: R) -> Result<TrainedModel> {
    let persisted: PersistedModel =
        serde_json::from_reader(reader).map_err(|e| Error::Persistence(e.to_string()))?;
    if persisted.format != MODEL_FORMAT {
        return Err(Error::Persistence(format!(
            "unknown format {:?}",
            persisted.format
        )));
    }
    if persisted.version != MODEL_VERSION {
        return Err(Error::Persistence(format!(
            "unsupported version {}",
            persisted.version
        )));
    }
    Ok(persisted.model)
}
