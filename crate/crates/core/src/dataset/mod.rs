//! Labelled image sets, IDX files and synthetic fixtures.

mod idx;
mod synthetic;

pub use idx::{load_idx, read_bytes, read_idx_images, read_idx_labels, split_paths, write_idx, IMAGE_MAGIC, LABEL_MAGIC};
pub use synthetic::{make_synthetic, Pose, SyntheticShape};

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hv::seeded_rng;
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Mnist,
    EmnistLetters,
}

impl DatasetKind {
    pub fn classes(self) -> usize {
        match self {
            DatasetKind::Mnist => 10,
            DatasetKind::EmnistLetters => 26,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::EmnistLetters => "emnist-letters",
        }
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mnist" => Ok(DatasetKind::Mnist),
            "emnist" | "emnist-letters" => Ok(DatasetKind::EmnistLetters),
            other => Err(Error::InvalidParameter(format!("unknown dataset {other:?}"))),
        }
    }
}

/// Immutable set of same-sized images with labels in `0..classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    name: String,
    images: Vec<GrayImage>,
    labels: Vec<usize>,
    classes: usize,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, images: Vec<GrayImage>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: images.len(),
                actual: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::ClassOutOfRange { class: bad, classes });
        }
        if let Some(first) = images.first() {
            let shape = (first.height(), first.width());
            if let Some(img) = images.iter().find(|i| (i.height(), i.width()) != shape) {
                return Err(Error::DimensionMismatch {
                    expected: shape.0 * shape.1,
                    actual: img.height() * img.width(),
                });
            }
        }
        Ok(LabeledDataset {
            name: name.into(),
            images,
            labels,
            classes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// `(height, width)` of every image; `(0, 0)` when empty.
    pub fn shape(&self) -> (usize, usize) {
        self.images.first().map_or((0, 0), |i| (i.height(), i.width()))
    }

    pub fn images(&self) -> &[GrayImage] {
        &self.images
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            name: self.name.clone(),
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    /// A seeded random subset of `n` samples (all of them if `n >= len`),
    /// kept in original order.
    pub fn subset(&self, n: usize, seed: u64) -> LabeledDataset {
        if n >= self.len() {
            return self.clone();
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut seeded_rng(seed, 0));
        idx.truncate(n);
        idx.sort_unstable();
        self.select(&idx)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Loads the train or test split of a dataset directory.
pub fn load_split(dir: &Path, kind: DatasetKind, train: bool) -> Result<LabeledDataset> {
    let (images, labels) = split_paths(dir, kind, train)?;
    load_idx(&images, &labels, kind)
}
