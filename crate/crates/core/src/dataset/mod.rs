//! MNIST loading, balanced class subsets, and the feature-file format.

mod features;
mod idx;
mod split;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use features::{
    decode_features, encode_features, read_features, write_features, FEATURE_MAGIC,
    FEATURE_VERSION,
};
pub use idx::{
    encode_idx_images, encode_idx_labels, load_idx_images, load_idx_labels, parse_idx_images,
    parse_idx_labels, RawImages, RawLabels, IMAGE_MAGIC, IMAGE_PIXELS, IMAGE_SIDE, LABEL_MAGIC,
};
pub(crate) use idx::sha256_hex;
pub use split::{select_indices, subset_and_split, Selection, SplitIndices, SplitSpec, CLASS_COUNT};

use crate::error::{check_dim, Error, Result};
use crate::math::Vector;

/// Samples with integer class labels and a record of where they came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabeledSet {
    pub samples: Vec<Vector>,
    pub labels: Vec<usize>,
    pub provenance: BTreeMap<String, String>,
}

impl LabeledSet {
    /// Checks that lengths agree and all samples share one dimension.
    pub fn new(
        samples: Vec<Vector>,
        labels: Vec<usize>,
        provenance: BTreeMap<String, String>,
    ) -> Result<Self> {
        check_dim("labeled set labels", samples.len(), labels.len())?;
        if let Some(first) = samples.first() {
            for x in &samples {
                check_dim("labeled set sample", first.dim(), x.dim())?;
            }
        }
        Ok(LabeledSet {
            samples,
            labels,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, Vector::dim)
    }

    /// Fails unless every value lies in `[0, 1]`.
    pub fn check_unit_range(&self) -> Result<()> {
        for (i, x) in self.samples.iter().enumerate() {
            if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Data(format!("sample {i} has value {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn class_counts(&self, classes: usize) -> Vec<usize> {
        let mut counts = vec![0; classes];
        for &l in &self.labels {
            if l < classes {
                counts[l] += 1;
            }
        }
        counts
    }

    /// SHA-256 over the feature-file encoding.
    pub fn checksum(&self) -> Result<String> {
        Ok(sha256_hex(&encode_features(self)?))
    }
}

/// Reads an image and label file pair and splits it.
pub fn load_split(
    images: impl AsRef<std::path::Path>,
    labels: impl AsRef<std::path::Path>,
    spec: &SplitSpec,
) -> Result<(LabeledSet, LabeledSet)> {
    let images = load_idx_images(images)?;
    let labels = load_idx_labels(labels)?;
    subset_and_split(&images, &labels, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(per_class: usize) -> (RawImages, RawLabels) {
        let labels: Vec<u8> = (0..per_class * 10).map(|i| (i % 10) as u8).collect();
        let images: Vec<Vec<u8>> = labels
            .iter()
            .enumerate()
            .map(|(i, _)| (0..IMAGE_PIXELS).map(|p| ((i + p) % 256) as u8).collect())
            .collect();
        (
            parse_idx_images(&encode_idx_images(&images).unwrap()).unwrap(),
            parse_idx_labels(&encode_idx_labels(&labels)).unwrap(),
        )
    }

    #[test]
    fn split_sets_are_balanced_and_normalized() {
        let (im, lb) = synthetic(5);
        let (train, test) = subset_and_split(&im, &lb, &SplitSpec::new(2, 4)).unwrap();
        assert_eq!(train.len(), 20);
        assert_eq!(test.len(), 20);
        assert_eq!(train.class_counts(10), vec![2; 10]);
        assert_eq!(test.class_counts(10), vec![2; 10]);
        train.check_unit_range().unwrap();
        assert_eq!(train.dim(), 784);
        assert_eq!(train.provenance["split"], "train");
        assert_eq!(train.provenance["images_sha256"], im.sha256);
    }

    #[test]
    fn count_mismatch() {
        let (im, _) = synthetic(2);
        let lb = parse_idx_labels(&encode_idx_labels(&[0, 1])).unwrap();
        assert!(subset_and_split(&im, &lb, &SplitSpec::new(1, 0)).is_err());
    }

    #[test]
    fn ragged_set_rejected() {
        let r = LabeledSet::new(
            vec![Vector::zeros(2), Vector::zeros(3)],
            vec![0, 1],
            BTreeMap::new(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn unit_range() {
        let s = LabeledSet::new(vec![Vector::from(vec![1.5])], vec![0], BTreeMap::new()).unwrap();
        assert!(s.check_unit_range().is_err());
    }
}
