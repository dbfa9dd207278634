//! MNIST IDX ingestion, balanced experiment splits and synthetic fixtures.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::labelcodes::{LabelError, LabelingCode};
use crate::seed::RandomSeed;

pub const IDX_IMAGES_MAGIC: u32 = 2051;
pub const IDX_LABELS_MAGIC: u32 = 2049;
pub const MNIST_CLASSES: usize = 10;
/// Upper bound of the uniform noise added by [`make_synthetic`].
pub const SYNTHETIC_NOISE: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("bad IDX magic: expected {expected}, found {found}")]
    BadMagic { expected: u32, found: u32 },
    #[error("truncated IDX stream: needed {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("IDX label {label} at index {index} is outside [0, 9]")]
    BadLabel { index: usize, label: u8 },
    #[error("feature value {value} at ({row}, {col}) is outside [0, 1]")]
    ValueOutOfRange { row: usize, col: usize, value: f64 },
    #[error("expected {expected} feature values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("{features} feature rows but {labels} labels")]
    RowCountMismatch { features: usize, labels: usize },
    #[error("class {class} has {available} instances, {needed} required")]
    InsufficientClass {
        class: usize,
        needed: usize,
        available: usize,
    },
    #[error("train size {train_size} is not divisible by {num_classes} classes")]
    UnbalancedTrainSize { train_size: usize, num_classes: usize },
    #[error("invalid synthetic problem: {0}")]
    InvalidSynthetic(String),
    #[error("missing MNIST files: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingFiles(Vec<PathBuf>),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// Row-major matrix of features, every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, DatasetError> {
        if values.len() != rows * cols {
            return Err(DatasetError::ShapeMismatch {
                expected: rows * cols,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(DatasetError::ValueOutOfRange {
                row: i / cols.max(1),
                col: i % cols.max(1),
                value: values[i],
            });
        }
        Ok(FeatureMatrix { rows, cols, values })
    }

    pub fn empty(cols: usize) -> Self {
        FeatureMatrix {
            rows: 0,
            cols,
            values: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// New matrix made of the given rows, in order. Repeats are allowed.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            cols: self.cols,
            values,
        }
    }
}

/// Features with their ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub features: FeatureMatrix,
    pub labels: LabelingCode,
}

impl LabeledSet {
    pub fn new(features: FeatureMatrix, labels: LabelingCode) -> Result<Self, DatasetError> {
        if features.rows() != labels.len() {
            return Err(DatasetError::RowCountMismatch {
                features: features.rows(),
                labels: labels.len(),
            });
        }
        Ok(LabeledSet { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.num_classes()
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledSet {
        LabeledSet {
            features: self.features.select_rows(indices),
            labels: self.labels.permuted(indices),
        }
    }
}

/// Training rows whose labels are searched for, plus the ground-truth
/// validation rows that score each candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSplit {
    pub train: LabeledSet,
    pub validation: LabeledSet,
    /// Source row indices, when the split was sampled from a larger set.
    pub train_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
}

impl ExperimentSplit {
    /// Pair two independently built sets.
    pub fn from_sets(train: LabeledSet, validation: LabeledSet) -> Result<Self, DatasetError> {
        if train.features.cols() != validation.features.cols() {
            return Err(DatasetError::ShapeMismatch {
                expected: train.features.cols(),
                got: validation.features.cols(),
            });
        }
        Ok(ExperimentSplit {
            train,
            validation,
            train_indices: Vec::new(),
            validation_indices: Vec::new(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.train.num_classes()
    }
}

/// Parsed IDX image tensor, keeping the image shape for re-serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub height: usize,
    pub width: usize,
    pub features: FeatureMatrix,
}

fn read_be_u32(bytes: &[u8], offset: usize) -> Result<u32, DatasetError> {
    let chunk = bytes
        .get(offset..offset + 4)
        .ok_or(DatasetError::Truncated {
            needed: offset + 4,
            available: bytes.len(),
        })?;
    Ok(u32::from_be_bytes(chunk.try_into().expect("4-byte slice")))
}

/// Parse an IDX3 image file (magic 2051). Pixel byte `v` becomes `v / 255`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages, DatasetError> {
    let magic = read_be_u32(bytes, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(DatasetError::BadMagic {
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = read_be_u32(bytes, 4)? as usize;
    let height = read_be_u32(bytes, 8)? as usize;
    let width = read_be_u32(bytes, 12)? as usize;
    let pixels = count * height * width;
    let needed = 16 + pixels;
    if bytes.len() < needed {
        return Err(DatasetError::Truncated {
            needed,
            available: bytes.len(),
        });
    }
    let values = bytes[16..needed].iter().map(|&b| b as f64 / 255.0).collect();
    Ok(IdxImages {
        height,
        width,
        features: FeatureMatrix {
            rows: count,
            cols: height * width,
            values,
        },
    })
}

/// Parse an IDX1 label file (magic 2049) into a 10-class code.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<LabelingCode, DatasetError> {
    let magic = read_be_u32(bytes, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(DatasetError::BadMagic {
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let count = read_be_u32(bytes, 4)? as usize;
    let needed = 8 + count;
    if bytes.len() < needed {
        return Err(DatasetError::Truncated {
            needed,
            available: bytes.len(),
        });
    }
    let raw = &bytes[8..needed];
    if let Some(index) = raw.iter().position(|&b| b as usize >= MNIST_CLASSES) {
        return Err(DatasetError::BadLabel {
            index,
            label: raw[index],
        });
    }
    Ok(LabelingCode::new(
        raw.iter().map(|&b| b as usize).collect(),
        MNIST_CLASSES,
    )?)
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.features.values.len());
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.features.rows as u32).to_be_bytes());
    out.extend_from_slice(&(images.height as u32).to_be_bytes());
    out.extend_from_slice(&(images.width as u32).to_be_bytes());
    out.extend(
        images
            .features
            .values
            .iter()
            .map(|&v| (v * 255.0).round() as u8),
    );
    out
}

pub fn encode_idx_labels(labels: &LabelingCode) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend(labels.labels().iter().map(|&l| l as u8));
    out
}

/// Read a file, transparently inflating gzip content.
pub fn read_maybe_gz(path: &Path) -> Result<Vec<u8>, DatasetError> {
    let io_err = |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(io_err)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut inflated = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut inflated)
            .map_err(io_err)?;
        Ok(inflated)
    } else {
        Ok(raw)
    }
}

/// Locations of the four standard MNIST files inside a data directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MnistFiles {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl MnistFiles {
    pub const STEMS: [&'static str; 4] = [
        "train-images-idx3-ubyte",
        "train-labels-idx1-ubyte",
        "t10k-images-idx3-ubyte",
        "t10k-labels-idx1-ubyte",
    ];

    /// Find each file as `<stem>` or `<stem>.gz`; all four must exist.
    pub fn locate(dir: &Path) -> Result<Self, DatasetError> {
        let mut found = Vec::new();
        let mut missing = Vec::new();
        for stem in Self::STEMS {
            let plain = dir.join(stem);
            let gz = dir.join(format!("{stem}.gz"));
            if plain.is_file() {
                found.push(plain);
            } else if gz.is_file() {
                found.push(gz);
            } else {
                missing.push(plain);
            }
        }
        if !missing.is_empty() {
            return Err(DatasetError::MissingFiles(missing));
        }
        let mut it = found.into_iter();
        Ok(MnistFiles {
            train_images: it.next().unwrap(),
            train_labels: it.next().unwrap(),
            test_images: it.next().unwrap(),
            test_labels: it.next().unwrap(),
        })
    }

    pub fn load_train(&self) -> Result<LabeledSet, DatasetError> {
        load_pair(&self.train_images, &self.train_labels)
    }

    pub fn load_test(&self) -> Result<LabeledSet, DatasetError> {
        load_pair(&self.test_images, &self.test_labels)
    }
}

fn load_pair(images: &Path, labels: &Path) -> Result<LabeledSet, DatasetError> {
    let images = parse_idx_images(&read_maybe_gz(images)?)?;
    let labels = parse_idx_labels(&read_maybe_gz(labels)?)?;
    LabeledSet::new(images.features, labels)
}

/// Draw a class-balanced training set and a near-balanced, disjoint
/// validation set. The validation seats left over after an even share go to
/// classes chosen by the seed, so per-class counts differ by at most one.
pub fn sample_split(
    source: &LabeledSet,
    train_size: usize,
    val_size: usize,
    seed: RandomSeed,
) -> Result<ExperimentSplit, DatasetError> {
    let num_classes = source.num_classes();
    if !train_size.is_multiple_of(num_classes) {
        return Err(DatasetError::UnbalancedTrainSize {
            train_size,
            num_classes,
        });
    }
    let mut rng = seed.rng();
    let per_class_train = train_size / num_classes;
    let mut val_quota = vec![val_size / num_classes; num_classes];
    let mut classes: Vec<usize> = (0..num_classes).collect();
    classes.shuffle(&mut rng);
    for &class in classes.iter().take(val_size % num_classes) {
        val_quota[class] += 1;
    }

    let mut by_class = vec![Vec::new(); num_classes];
    for (i, &label) in source.labels.labels().iter().enumerate() {
        by_class[label].push(i);
    }

    let mut train_idx = Vec::with_capacity(train_size);
    let mut val_idx = Vec::with_capacity(val_size);
    for (class, members) in by_class.iter_mut().enumerate() {
        let needed = per_class_train + val_quota[class];
        if members.len() < needed {
            return Err(DatasetError::InsufficientClass {
                class,
                needed,
                available: members.len(),
            });
        }
        let (picked, _) = members.partial_shuffle(&mut rng, needed);
        train_idx.extend_from_slice(&picked[..per_class_train]);
        val_idx.extend_from_slice(&picked[per_class_train..]);
    }
    train_idx.shuffle(&mut rng);
    val_idx.shuffle(&mut rng);

    Ok(ExperimentSplit {
        train: source.subset(&train_idx),
        validation: source.subset(&val_idx),
        train_indices: train_idx,
        validation_indices: val_idx,
    })
}

/// Synthetic clusters: class `c` sits at `separation * e_c` and each
/// instance adds uniform noise in `[0, SYNTHETIC_NOISE)` per feature.
/// Classes are balanced (counts differ by at most one).
pub fn make_synthetic(
    num_instances: usize,
    num_classes: usize,
    dims: usize,
    separation: f64,
    seed: RandomSeed,
) -> Result<LabeledSet, DatasetError> {
    if num_classes < 2 || num_instances < num_classes {
        return Err(DatasetError::InvalidSynthetic(format!(
            "need L >= C >= 2, got L = {num_instances}, C = {num_classes}"
        )));
    }
    if dims < num_classes {
        return Err(DatasetError::InvalidSynthetic(format!(
            "need D >= C for one axis per class, got D = {dims}, C = {num_classes}"
        )));
    }
    if !(separation > 0.0 && separation <= 1.0 - SYNTHETIC_NOISE) {
        return Err(DatasetError::InvalidSynthetic(format!(
            "separation must lie in (0, {}], got {separation}",
            1.0 - SYNTHETIC_NOISE
        )));
    }
    let mut rng = seed.rng();
    let mut labels: Vec<usize> = (0..num_instances).map(|i| i % num_classes).collect();
    labels.shuffle(&mut rng);
    let mut values = Vec::with_capacity(num_instances * dims);
    for &label in &labels {
        for d in 0..dims {
            let centre = if d == label { separation } else { 0.0 };
            values.push(centre + rng.random_range(0.0..SYNTHETIC_NOISE));
        }
    }
    LabeledSet::new(
        FeatureMatrix::new(num_instances, dims, values)?,
        LabelingCode::new(labels, num_classes)?,
    )
}

/// Synthetic training and validation draws from the same cluster layout.
pub fn synthetic_split(
    train_size: usize,
    val_size: usize,
    num_classes: usize,
    dims: usize,
    separation: f64,
    seed: RandomSeed,
) -> Result<ExperimentSplit, DatasetError> {
    let train = make_synthetic(train_size, num_classes, dims, separation, seed.derive(&[0]))?;
    let validation = make_synthetic(val_size, num_classes, dims, separation, seed.derive(&[1]))?;
    ExperimentSplit::from_sets(train, validation)
}
