//! Epoch aggregation and drowsiness classification: per-feature mean/std
//! over an epoch's blinks, standardization, PCA to five components and a
//! k-nearest-neighbors vote with k = 10.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::BlinkFeatures;

/// Number of neighbors in the kNN vote.
pub const KNN_K: usize = 10;
/// Number of principal components kept.
pub const PCA_COMPONENTS: usize = 5;
/// Model file format version.
pub const MODEL_VERSION: u32 = 1;

/// Scalar features aggregated per epoch, in a fixed order.
pub const FEATURE_NAMES: [&str; 9] = [
    "closing_d1",
    "closed_d2",
    "reopening_d3",
    "previous_time",
    "amplitude",
    "av_ratio",
    "normal_area",
    "perclos",
    "peropening",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrowsinessLabel {
    Alert,
    LowVigilant,
    Drowsy,
}

impl DrowsinessLabel {
    /// Binary task mapping: low-vigilant folds into drowsy.
    pub fn to_binary(self) -> Self {
        match self {
            Self::Alert => Self::Alert,
            Self::LowVigilant | Self::Drowsy => Self::Drowsy,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alert" => Ok(Self::Alert),
            "low_vigilant" | "low-vigilant" | "lowvigilant" => Ok(Self::LowVigilant),
            "drowsy" => Ok(Self::Drowsy),
            other => Err(Error::InvalidConfig(format!(
                "unknown label `{other}` (expected alert, low_vigilant or drowsy)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Alert => "alert",
            Self::LowVigilant => "low_vigilant",
            Self::Drowsy => "drowsy",
        }
    }
}

/// Aggregated feature vector of one analysis epoch: mean and sample standard
/// deviation of each scalar feature across the epoch's blinks, interleaved
/// as `[mean_0, std_0, mean_1, std_1, ...]` in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochFeatureVector {
    pub epoch_end_time: f64,
    pub values: Vec<f64>,
    pub blink_count: usize,
    pub label: Option<DrowsinessLabel>,
}

fn scalar_features(f: &BlinkFeatures) -> [Option<f64>; 9] {
    [
        Some(f.closing_d1),
        Some(f.closed_d2),
        Some(f.reopening_d3),
        f.previous_time,
        Some(f.amplitude),
        Some(f.av_ratio),
        Some(f.normal_area),
        Some(f.perclos),
        Some(f.peropening),
    ]
}

fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregates one epoch's blink features into an [`EpochFeatureVector`].
/// A feature absent on some blinks (`previous_time` on the first blink) is
/// aggregated over the blinks that carry it; a single blink yields std 0.
pub fn aggregate_epoch(
    epoch_end_time: f64,
    features: &[BlinkFeatures],
) -> Result<EpochFeatureVector> {
    if features.is_empty() {
        return Err(Error::InsufficientData(
            "epoch holds no blinks to aggregate".into(),
        ));
    }
    let mut values = Vec::with_capacity(2 * FEATURE_NAMES.len());
    for dim in 0..FEATURE_NAMES.len() {
        let column: Vec<f64> = features
            .iter()
            .filter_map(|f| scalar_features(f)[dim])
            .collect();
        let (mean, std) = mean_and_sample_std(&column);
        values.push(mean);
        values.push(std);
    }
    Ok(EpochFeatureVector {
        epoch_end_time,
        values,
        blink_count: features.len(),
        label: None,
    })
}

/// Fitted standardize -> PCA -> kNN classifier. Serialized as a versioned
/// JSON document; floating-point fields round-trip bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrowsinessModel {
    pub format: String,
    pub version: u32,
    pub feature_names: Vec<String>,
    /// Per-dimension standardization parameters over the raw 2F dims.
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Raw dimensions kept (zero-variance dimensions are dropped).
    pub kept_dims: Vec<usize>,
    /// Principal components, row-major `n_components x kept_dims`.
    pub components: Vec<Vec<f64>>,
    /// Training vectors projected into PCA space.
    pub train_points: Vec<Vec<f64>>,
    pub train_labels: Vec<DrowsinessLabel>,
    pub k: usize,
}

fn standardize_into(model: &DrowsinessModel, values: &[f64]) -> Result<Vec<f64>> {
    if values.len() != model.mean.len() {
        return Err(Error::InvalidConfig(format!(
            "feature vector has {} dims, model was fitted on {}",
            values.len(),
            model.mean.len()
        )));
    }
    Ok(model
        .kept_dims
        .iter()
        .map(|&d| (values[d] - model.mean[d]) / model.std[d])
        .collect())
}

fn project(model: &DrowsinessModel, standardized: &[f64]) -> Vec<f64> {
    model
        .components
        .iter()
        .map(|row| row.iter().zip(standardized).map(|(a, b)| a * b).sum())
        .collect()
}

/// Fits the classifier on labeled epoch vectors: standardization and PCA are
/// derived from the training data only, and the projected training set is
/// stored for the kNN vote.
pub fn fit(train: &[EpochFeatureVector]) -> Result<DrowsinessModel> {
    if train.len() <= KNN_K {
        return Err(Error::InsufficientData(format!(
            "{} training vectors, need more than k = {KNN_K}",
            train.len()
        )));
    }
    let mut labels = Vec::with_capacity(train.len());
    for v in train {
        labels.push(v.label.ok_or_else(|| {
            Error::InvalidConfig("unlabeled vector in training data".into())
        })?);
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::SingleClass);
    }
    let dims = train[0].values.len();
    if train.iter().any(|v| v.values.len() != dims) {
        return Err(Error::InvalidConfig(
            "training vectors have mixed dimensionality".into(),
        ));
    }
    let n = train.len() as f64;
    let mut mean = vec![0.0; dims];
    for v in train {
        for (m, x) in mean.iter_mut().zip(&v.values) {
            *m += x / n;
        }
    }
    let mut std = vec![0.0; dims];
    for v in train {
        for (s, (x, m)) in std.iter_mut().zip(v.values.iter().zip(&mean)) {
            *s += (x - m).powi(2) / (n - 1.0);
        }
    }
    for s in &mut std {
        *s = s.sqrt();
    }
    // Constant dimensions carry no information and break standardization.
    let kept_dims: Vec<usize> = (0..dims).filter(|&d| std[d] > 1e-12).collect();
    if kept_dims.is_empty() {
        return Err(Error::InsufficientData(
            "all feature dimensions are constant".into(),
        ));
    }

    let mut model = DrowsinessModel {
        format: "lidkit-drowsiness-model".into(),
        version: MODEL_VERSION,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        mean,
        std,
        kept_dims,
        components: Vec::new(),
        train_points: Vec::new(),
        train_labels: labels,
        k: KNN_K,
    };

    let standardized: Vec<Vec<f64>> = train
        .iter()
        .map(|v| standardize_into(&model, &v.values))
        .collect::<Result<_>>()?;

    // PCA by SVD of the standardized matrix. Standardization already
    // centers each dimension on the training set, so the rows go in as-is.
    let kept = model.kept_dims.len();
    let matrix = nalgebra::DMatrix::from_fn(train.len(), kept, |r, c| standardized[r][c]);
    let svd = matrix.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let n_components = PCA_COMPONENTS.min(order.len());
    for &idx in order.iter().take(n_components) {
        let mut row: Vec<f64> = v_t.row(idx).iter().copied().collect();
        // Deterministic sign: the entry with the largest magnitude is positive.
        let lead = row
            .iter()
            .cloned()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            for x in &mut row {
                *x = -*x;
            }
        }
        model.components.push(row);
    }
    model.train_points = standardized.iter().map(|s| project(&model, s)).collect();
    Ok(model)
}

/// Predicts the label of one epoch vector: majority among the `k` nearest
/// training vectors in PCA space, ties broken by the smaller summed
/// distance, then by the fixed label order alert < low_vigilant < drowsy.
pub fn predict(model: &DrowsinessModel, vector: &EpochFeatureVector) -> Result<DrowsinessLabel> {
    if model.train_points.is_empty() || model.components.is_empty() {
        return Err(Error::InsufficientData("model is not fitted".into()));
    }
    let query = project(model, &standardize_into(model, &vector.values)?);
    let mut neighbors: Vec<(f64, DrowsinessLabel)> = model
        .train_points
        .iter()
        .zip(&model.train_labels)
        .map(|(p, &l)| {
            let d2: f64 = p.iter().zip(&query).map(|(a, b)| (a - b).powi(2)).sum();
            (d2, l)
        })
        .collect();
    neighbors.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    neighbors.truncate(model.k.min(neighbors.len()));

    let mut tally: Vec<(DrowsinessLabel, usize, f64)> = Vec::new();
    for (d2, label) in &neighbors {
        match tally.iter_mut().find(|(l, _, _)| l == label) {
            Some(entry) => {
                entry.1 += 1;
                entry.2 += d2.sqrt();
            }
            None => tally.push((*label, 1, d2.sqrt())),
        }
    }
    tally.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(a.2.partial_cmp(&b.2).unwrap())
            .then(a.0.cmp(&b.0))
    });
    Ok(tally[0].0)
}

/// Per-fold and mean accuracy of a subject-grouped cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
}

/// Subject-grouped k-fold cross-validation: subjects are assigned to folds
/// round-robin in input order, so no subject's epochs appear in both the
/// train and test split of a fold.
pub fn cross_validate(
    groups: &[(String, Vec<EpochFeatureVector>)],
    folds: usize,
) -> Result<CvReport> {
    if folds == 0 || groups.len() < folds {
        return Err(Error::InsufficientData(format!(
            "{} subject groups for {folds} folds",
            groups.len()
        )));
    }
    let mut fold_accuracy = Vec::with_capacity(folds);
    for fold in 0..folds {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, (_, vectors)) in groups.iter().enumerate() {
            if i % folds == fold {
                test.extend(vectors.iter().cloned());
            } else {
                train.extend(vectors.iter().cloned());
            }
        }
        let model = fit(&train)?;
        let mut correct = 0usize;
        for v in &test {
            let truth = v.label.ok_or_else(|| {
                Error::InvalidConfig("unlabeled vector in test data".into())
            })?;
            if predict(&model, v)? == truth {
                correct += 1;
            }
        }
        if test.is_empty() {
            return Err(Error::InsufficientData("empty test fold".into()));
        }
        fold_accuracy.push(correct as f64 / test.len() as f64);
    }
    let mean_accuracy = fold_accuracy.iter().sum::<f64>() / folds as f64;
    Ok(CvReport {
        fold_accuracy,
        mean_accuracy,
    })
}

impl DrowsinessModel {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let model: DrowsinessModel = serde_json::from_str(&text)?;
        if model.version != MODEL_VERSION {
            return Err(Error::ModelVersion {
                found: model.version,
                expected: MODEL_VERSION,
            });
        }
        Ok(model)
    }
}
