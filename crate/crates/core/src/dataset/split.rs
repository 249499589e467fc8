use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::idx::{RawImages, RawLabels};
use super::LabeledSet;
use crate::error::{check_dim, Error, Result};
use crate::math::{SeededRng, Vector};

pub const CLASS_COUNT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Lowest source indices of each class.
    FirstN,
    /// Uniform sample per class from a generator keyed by the split seed.
    #[default]
    SeededRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Samples per class in each of train and test.
    pub per_class: usize,
    pub seed: u64,
    #[serde(default)]
    pub selection: Selection,
}

impl SplitSpec {
    pub fn new(per_class: usize, seed: u64) -> Self {
        SplitSpec {
            per_class,
            seed,
            selection: Selection::SeededRandom,
        }
    }
}

/// Source indices chosen for the train and test halves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Picks `2·per_class` samples of every class; the first `per_class`
/// picked go to train and the rest to test. Each half is returned in
/// ascending source order.
pub fn select_indices(labels: &[u8], spec: &SplitSpec) -> Result<SplitIndices> {
    if spec.per_class == 0 {
        return Err(Error::Config("per_class must be >= 1".into()));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); CLASS_COUNT];
    for (i, &l) in labels.iter().enumerate() {
        let l = l as usize;
        if l >= CLASS_COUNT {
            return Err(Error::Data(format!("label {l} at index {i} is not a digit")));
        }
        by_class[l].push(i);
    }
    let need = 2 * spec.per_class;
    let mut rng = SeededRng::new(spec.seed);
    let mut train = Vec::with_capacity(spec.per_class * CLASS_COUNT);
    let mut test = Vec::with_capacity(spec.per_class * CLASS_COUNT);
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < need {
            return Err(Error::Data(format!(
                "class {class} has {} samples, need {need}",
                members.len()
            )));
        }
        let picked: Vec<usize> = match spec.selection {
            Selection::FirstN => members[..need].to_vec(),
            Selection::SeededRandom => rng
                .sample_indices(members.len(), need)
                .into_iter()
                .map(|k| members[k])
                .collect(),
        };
        train.extend_from_slice(&picked[..spec.per_class]);
        test.extend_from_slice(&picked[spec.per_class..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

/// Balanced subset of the raw data, split into train and test halves.
pub fn subset_and_split(
    images: &RawImages,
    labels: &RawLabels,
    spec: &SplitSpec,
) -> Result<(LabeledSet, LabeledSet)> {
    check_dim("idx label count", images.count, labels.labels.len())?;
    let idx = select_indices(&labels.labels, spec)?;
    let mut provenance = BTreeMap::new();
    provenance.insert("images_sha256".to_string(), images.sha256.clone());
    provenance.insert("labels_sha256".to_string(), labels.sha256.clone());
    provenance.insert("per_class".to_string(), spec.per_class.to_string());
    provenance.insert("split_seed".to_string(), spec.seed.to_string());
    provenance.insert(
        "selection".to_string(),
        match spec.selection {
            Selection::FirstN => "first_n",
            Selection::SeededRandom => "seeded_random",
        }
        .to_string(),
    );
    let build = |ids: &[usize], half: &str| {
        let mut p = provenance.clone();
        p.insert("split".to_string(), half.to_string());
        LabeledSet::new(
            ids.iter().map(|&i| Vector::from(images.normalized(i))).collect(),
            ids.iter().map(|&i| labels.labels[i] as usize).collect(),
            p,
        )
    };
    Ok((build(&idx.train, "train")?, build(&idx.test, "test")?))
}
