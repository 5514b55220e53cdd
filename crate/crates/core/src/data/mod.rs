//! Dataset ingestion, deterministic 80/20 splitting, standardization and
//! mini-batching.

mod csv;
mod idx;

use std::path::PathBuf;

use ndarray::{Array2, Axis};
use thiserror::Error;

use crate::numcore::SeededRng;

pub use self::csv::{load_csv, write_csv};
pub use self::idx::{
    load_idx, parse_idx_images, parse_idx_labels, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC,
};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] ::csv::Error),

    #[error("line {line}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        line: u64,
        column: usize,
        value: String,
    },

    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("target column {column} out of range for {width} columns")]
    TargetColumn { column: usize, width: usize },

    #[error("no data rows")]
    Empty,

    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("IDX {what}: expected {expected} bytes, found {found}")]
    Truncated {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("IDX {what} has an invalid header field")]
    BadHeader { what: &'static str },

    #[error("IDX count mismatch: {images} images, {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("invalid dataset: {0}")]
    Invalid(&'static str),
}

/// Feature matrix (rows are samples) with one target per row.
///
/// Regression targets are real values; classification targets are class
/// indices stored as `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    features: Array2<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        targets: Vec<f64>,
    ) -> Result<Self, DataError> {
        let (n, d) = features.dim();
        if n == 0 {
            return Err(DataError::Empty);
        }
        if d == 0 {
            return Err(DataError::Invalid(
                "at least one feature column is required",
            ));
        }
        if targets.len() != n {
            return Err(DataError::Invalid(
                "targets and feature rows differ in length",
            ));
        }
        if !features.iter().chain(&targets).all(|v| v.is_finite()) {
            return Err(DataError::Invalid("non-finite value"));
        }
        Ok(Self {
            name: name.into(),
            features,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Rows in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset, DataError> {
        if indices.iter().any(|&i| i >= self.len()) {
            return Err(DataError::Invalid("row index out of range"));
        }
        let features = self.features.select(Axis(0), indices);
        let targets = indices.iter().map(|&i| self.targets[i]).collect();
        Dataset::new(self.name.clone(), features, targets)
    }

    /// The first `n` rows after a seeded shuffle (all rows if `n >= len`).
    pub fn shuffled_subset(&self, n: usize, rng: &mut SeededRng) -> Result<Dataset, DataError> {
        let mut order = rng.permutation(self.len());
        order.truncate(n.min(self.len()));
        self.select(&order)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// `round(0.8·n)`, kept below `n` so the test side is never empty.
pub fn train_size(n: usize) -> usize {
    ((4 * n + 2) / 5).min(n.saturating_sub(1))
}

/// Random 80/20 partition: a seeded permutation, the first `round(0.8·N)`
/// rows go to training.
pub fn split_80_20(ds: &Dataset, seed: u64) -> Result<SplitDataset, DataError> {
    let n = ds.len();
    if n < 2 {
        return Err(DataError::Invalid("splitting needs at least two rows"));
    }
    let perm = SeededRng::new(seed).permutation(n);
    let cut = train_size(n);
    let train_indices = perm[..cut].to_vec();
    let test_indices = perm[cut..].to_vec();
    Ok(SplitDataset {
        train: ds.select(&train_indices)?,
        test: ds.select(&test_indices)?,
        seed,
        train_indices,
        test_indices,
    })
}

/// Per-column mean and (population) standard deviation of a training split.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Zero-variance columns get scale 1.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(ds: &Dataset) -> Self {
        let n = ds.len() as f64;
        let x = ds.features();
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let sd = var.sqrt();
            mean.push(m);
            scale.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Self { mean, scale }
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset, DataError> {
        if ds.num_features() != self.mean.len() {
            return Err(DataError::Invalid(
                "feature count differs from fitted statistics",
            ));
        }
        let mut features = ds.features().clone();
        for (j, mut col) in features.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.mean[j], self.scale[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Dataset::new(ds.name.clone(), features, ds.targets().to_vec())
    }
}

/// Z-scores both splits with training statistics; targets are untouched.
pub fn standardize(split: &SplitDataset) -> Result<SplitDataset, DataError> {
    let st = Standardizer::fit(&split.train);
    Ok(SplitDataset {
        train: st.apply(&split.train)?,
        test: st.apply(&split.test)?,
        seed: split.seed,
        train_indices: split.train_indices.clone(),
        test_indices: split.test_indices.clone(),
    })
}

/// One epoch of mini-batches over `ds`.
pub fn batches(ds: &Dataset, batch_size: usize, rng: &mut SeededRng) -> Vec<Vec<usize>> {
    batch_indices(ds.len(), batch_size, rng)
}

/// A fresh permutation of `0..n` cut into chunks of `batch_size`; the final
/// partial chunk is kept.
///
/// # Panics
/// If `batch_size` is zero.
pub fn batch_indices(n: usize, batch_size: usize, rng: &mut SeededRng) -> Vec<Vec<usize>> {
    assert!(batch_size >= 1, "batch size must be >= 1");
    rng.permutation(n)
        .chunks(batch_size)
        .map(<[usize]>::to_vec)
        .collect()
}
