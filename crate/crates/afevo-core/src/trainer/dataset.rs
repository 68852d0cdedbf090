//! Classification datasets: synthetic 2-D generators and CSV loading.
//!
//! Every dataset carries a deterministic 80/20 train/test split produced
//! by a seeded shuffle, so a (generator, seed) pair fully determines the
//! bytes of the data and the split.

use std::path::Path;

use crate::rng::RngStream;

/// A labelled dataset with a fixed train/test split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>, // row-major, len = n · dim
    labels: Vec<usize>,
    pub dim: usize,
    pub num_classes: usize,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Assemble a dataset, infer the class count, and apply the seeded
    /// 80/20 split. Rejects non-finite features, gap classes, and splits
    /// that would leave a class out of the train set.
    pub fn from_parts(
        features: Vec<f64>,
        labels: Vec<usize>,
        dim: usize,
        split_seed: u64,
    ) -> Result<Dataset, DataError> {
        assert_eq!(features.len(), labels.len() * dim);
        if labels.len() < 2 {
            return Err(DataError::Invalid("dataset needs at least 2 samples".into()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(DataError::Invalid("non-finite feature value".into()));
        }
        let num_classes = labels.iter().max().unwrap() + 1;
        for c in 0..num_classes {
            if !labels.contains(&c) {
                return Err(DataError::Invalid(format!(
                    "class {c} has no samples (labels must cover 0..{num_classes})"
                )));
            }
        }

        let n = labels.len();
        let mut order: Vec<usize> = (0..n).collect();
        RngStream::new(split_seed).shuffle(&mut order);
        let train_count = ((n * 8) / 10).clamp(1, n - 1);
        let (train, test) = order.split_at(train_count);
        let train_idx = train.to_vec();
        let test_idx = test.to_vec();

        for c in 0..num_classes {
            if !train_idx.iter().any(|&i| labels[i] == c) {
                return Err(DataError::Invalid(format!(
                    "class {c} is absent from the train split; use more samples or another seed"
                )));
            }
        }

        Ok(Dataset {
            features,
            labels,
            dim,
            num_classes,
            train_idx,
            test_idx,
        })
    }
}

/// Errors from dataset construction and CSV parsing.
#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error at line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// The built-in 2-D generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    TwoMoons,
    Circles,
    Spirals,
}

impl SyntheticKind {
    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::TwoMoons => "two-moons",
            SyntheticKind::Circles => "circles",
            SyntheticKind::Spirals => "spirals",
        }
    }
}

impl std::str::FromStr for SyntheticKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "two-moons" => Ok(SyntheticKind::TwoMoons),
            "circles" => Ok(SyntheticKind::Circles),
            "spirals" => Ok(SyntheticKind::Spirals),
            _ => Err(()),
        }
    }
}

/// Generate a two-class 2-D dataset with Gaussian noise of standard
/// deviation `noise`. The same seed drives the noise and the split.
///
/// * two-moons — two interleaved half circles (radius 1, the second arc
///   centred at (1, 0.5));
/// * circles — class 0 on radius 0.5, class 1 on radius 1;
/// * spirals — two interleaved Archimedean spirals of 1.5 turns.
pub fn make_synthetic(kind: SyntheticKind, n: usize, noise: f64, seed: u64) -> Dataset {
    assert!(n >= 8, "synthetic datasets need at least 8 samples");
    let mut rng = RngStream::new(seed);
    let m0 = n / 2;
    let m1 = n - m0;
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);

    let mut push = |x: f64, y: f64, label: usize, rng: &mut RngStream| {
        features.push(x + noise * rng.next_normal());
        features.push(y + noise * rng.next_normal());
        labels.push(label);
    };

    match kind {
        SyntheticKind::TwoMoons => {
            for i in 0..m0 {
                let t = std::f64::consts::PI * i as f64 / (m0 - 1).max(1) as f64;
                push(t.cos(), t.sin(), 0, &mut rng);
            }
            for i in 0..m1 {
                let t = std::f64::consts::PI * i as f64 / (m1 - 1).max(1) as f64;
                push(1.0 - t.cos(), 0.5 - t.sin(), 1, &mut rng);
            }
        }
        SyntheticKind::Circles => {
            for i in 0..m0 {
                let t = std::f64::consts::TAU * i as f64 / m0 as f64;
                push(0.5 * t.cos(), 0.5 * t.sin(), 0, &mut rng);
            }
            for i in 0..m1 {
                let t = std::f64::consts::TAU * i as f64 / m1 as f64;
                push(t.cos(), t.sin(), 1, &mut rng);
            }
        }
        SyntheticKind::Spirals => {
            let turns = 3.0 * std::f64::consts::PI;
            for class in 0..2usize {
                let m = if class == 0 { m0 } else { m1 };
                let phase = class as f64 * std::f64::consts::PI;
                for i in 0..m {
                    let t = turns * i as f64 / m as f64;
                    let r = 2.0 * t / turns;
                    push(r * (t + phase).cos(), r * (t + phase).sin(), class, &mut rng);
                }
            }
        }
    }

    Dataset::from_parts(features, labels, 2, seed)
        .expect("synthetic generators always produce valid datasets")
}

/// Load a CSV dataset with header `x1,...,xd,label`. The split is the
/// deterministic 80/20 shuffle driven by `split_seed`.
pub fn load_csv(path: &Path, split_seed: u64) -> Result<Dataset, DataError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or(DataError::Format {
        line: 1,
        reason: "missing header".into(),
    })?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 2 || columns[columns.len() - 1] != "label" {
        return Err(DataError::Format {
            line: 1,
            reason: "header must be x1,...,xd,label".into(),
        });
    }
    let dim = columns.len() - 1;
    for (i, name) in columns[..dim].iter().enumerate() {
        if *name != format!("x{}", i + 1) {
            return Err(DataError::Format {
                line: 1,
                reason: format!("expected column x{}, found '{name}'", i + 1),
            });
        }
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (idx, row) in lines {
        let line = idx + 1;
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(DataError::Format {
                line,
                reason: format!("expected {} fields, found {}", dim + 1, fields.len()),
            });
        }
        for field in &fields[..dim] {
            let v: f64 = field.parse().map_err(|_| DataError::Format {
                line,
                reason: format!("feature '{field}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(DataError::Format {
                    line,
                    reason: format!("feature '{field}' is not finite"),
                });
            }
            features.push(v);
        }
        let label_field = fields[dim];
        let label: i64 = label_field.parse().map_err(|_| DataError::Format {
            line,
            reason: format!("label '{label_field}' is not an integer"),
        })?;
        if label < 0 {
            return Err(DataError::Format {
                line,
                reason: format!("label {label} is negative"),
            });
        }
        labels.push(label as usize);
    }

    Dataset::from_parts(features, labels, dim, split_seed)
}
