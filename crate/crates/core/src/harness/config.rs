use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autoencoder::{TrainConfig, Variant, VariantKind, DEFAULT_LAMBDA};
use crate::corruption::CorruptionSpec;
use crate::dataset::{Selection, SplitSpec, IMAGE_PIXELS};
use crate::error::{Error, Result};
use crate::math::Activation;
use crate::stack::{HiddenMask, LayerOverride, StackSpec};
use crate::svm::{KernelSpec, SmoParams};

pub const SCHEMA_VERSION: u32 = 1;

pub const ENV_IMAGES: &str = "CDAE_MNIST_IMAGES";
pub const ENV_LABELS: &str = "CDAE_MNIST_LABELS";
pub const ENV_OUT: &str = "CDAE_OUT";
pub const ENV_THREADS: &str = "CDAE_THREADS";

/// Workspace root at build time; relative data paths that do not resolve
/// from the working directory are retried against it.
const WORKSPACE_ROOT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Desk,
    Full,
}

impl std::str::FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            other => Err(Error::Config(format!("unknown scale {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataPaths {
    pub images: PathBuf,
    pub labels: PathBuf,
}

impl DataPaths {
    fn resolve_one(p: &Path) -> PathBuf {
        if p.is_absolute() || p.exists() {
            return p.to_path_buf();
        }
        let alt = Path::new(WORKSPACE_ROOT).join(p);
        if alt.exists() {
            alt
        } else {
            p.to_path_buf()
        }
    }

    /// Paths as they should be opened from the current directory.
    pub fn resolved(&self) -> DataPaths {
        DataPaths {
            images: Self::resolve_one(&self.images),
            labels: Self::resolve_one(&self.labels),
        }
    }

    /// Picks the first existing of `name` and `name.gz` under `dir`.
    fn in_dir(dir: &str, images: &str, labels: &str) -> DataPaths {
        let pick = |name: &str| {
            let plain = PathBuf::from(dir).join(name);
            let gz = PathBuf::from(dir).join(format!("{name}.gz"));
            if DataPaths::resolve_one(&plain).exists() {
                plain
            } else {
                gz
            }
        };
        DataPaths {
            images: pick(images),
            labels: pick(labels),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmSettings {
    pub c: f64,
    /// RBF width; `None` means `√(feature_dim / 2)`.
    #[serde(default)]
    pub sigma: Option<f64>,
    pub tol: f64,
    pub max_passes: usize,
    /// Choose `(C, σ)` on a validation fifth of the training features.
    #[serde(default)]
    pub grid_search: bool,
}

impl Default for SvmSettings {
    fn default() -> Self {
        SvmSettings {
            c: 10.0,
            sigma: None,
            tol: 1e-3,
            max_passes: 50,
            grid_search: false,
        }
    }
}

impl SvmSettings {
    pub fn params(&self, feature_dim: usize) -> SmoParams {
        let kernel = match self.sigma {
            Some(sigma) => KernelSpec::Rbf { sigma },
            None => KernelSpec::default_rbf(feature_dim),
        };
        SmoParams {
            c: self.c,
            kernel,
            tol: self.tol,
            max_passes: self.max_passes,
        }
    }
}

/// Step size of the MNIST presets. The summed squared loss over 784 pixels
/// saturates tanh units at the library default of 0.1, and contractive
/// layers never recover from that.
pub const EXPERIMENT_LEARNING_RATE: f64 = 0.01;

pub const GRID_C: [f64; 3] = [1.0, 10.0, 100.0];
pub const GRID_SIGMA_FACTORS: [f64; 3] = [0.5, 1.0, 2.0];

/// Everything that determines a run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub data: DataPaths,
    /// Its `seed` is replaced by the top-level `seed`.
    pub split: SplitSpec,
    /// Encoder widths per architecture, e.g. `[784, 200, 50]`.
    pub architectures: Vec<Vec<usize>>,
    pub activation: Activation,
    pub variants: Vec<VariantKind>,
    /// Contraction weight for CAE and CDAE.
    pub lambda: f64,
    /// Input corruption for DAE and CDAE.
    pub corruption: CorruptionSpec,
    /// Its `seed` is replaced by the top-level `seed`.
    pub train: TrainConfig,
    #[serde(default)]
    pub hidden_mask: HiddenMask,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<usize, LayerOverride>,
    #[serde(default)]
    pub svm: SvmSettings,
    pub seed: u64,
    /// Where a run writes; not part of the echoed configuration.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(scale: Scale) -> Self {
        let (data, per_class, architectures) = match scale {
            Scale::Desk => (
                DataPaths::in_dir("data/mnist-5k", "images-idx3-ubyte", "labels-idx1-ubyte"),
                200,
                vec![vec![784, 200, 50]],
            ),
            Scale::Full => (
                DataPaths::in_dir("data/mnist", "train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
                900,
                vec![vec![784, 200, 100], vec![784, 200, 50]],
            ),
        };
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            data,
            split: SplitSpec {
                per_class,
                seed: 1,
                selection: Selection::SeededRandom,
            },
            architectures,
            activation: Activation::Tanh,
            variants: VariantKind::ALL.to_vec(),
            lambda: DEFAULT_LAMBDA,
            corruption: CorruptionSpec::mnist_stride_mask(),
            train: TrainConfig {
                learning_rate: EXPERIMENT_LEARNING_RATE,
                ..TrainConfig::default()
            },
            hidden_mask: HiddenMask::default(),
            overrides: BTreeMap::new(),
            svm: SvmSettings::default(),
            seed: 1,
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg.resolved())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.resolved())?)
    }

    /// Copies the top-level seed into the split and training settings.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.split.seed = c.seed;
        c.train.seed = c.seed;
        c
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.resolved()
    }

    /// Applies `CDAE_MNIST_IMAGES`, `CDAE_MNIST_LABELS` and `CDAE_OUT`.
    pub fn apply_env(&mut self) {
        if let Ok(p) = std::env::var(ENV_IMAGES) {
            self.data.images = p.into();
        }
        if let Ok(p) = std::env::var(ENV_LABELS) {
            self.data.labels = p.into();
        }
        if let Ok(p) = std::env::var(ENV_OUT) {
            self.output_dir = Some(p.into());
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.architectures.is_empty() {
            return Err(Error::Config("no architectures configured".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("no variants configured".into()));
        }
        for arch in &self.architectures {
            if arch.first() != Some(&IMAGE_PIXELS) {
                return Err(Error::Shape(format!(
                    "architecture {} must start at {IMAGE_PIXELS} inputs",
                    arch_name(arch)
                )));
            }
            for kind in &self.variants {
                self.stack_spec(arch, *kind).validate()?;
            }
        }
        self.train.validate(self.split.per_class * crate::dataset::CLASS_COUNT)?;
        self.svm.params(1).validate()?;
        Ok(())
    }

    pub fn variant(&self, kind: VariantKind) -> Variant {
        Variant {
            kind,
            lambda: if kind.uses_penalty() { self.lambda } else { 0.0 },
            corruption: if kind.uses_corruption() {
                self.corruption
            } else {
                CorruptionSpec::None
            },
        }
    }

    pub fn stack_spec(&self, arch: &[usize], kind: VariantKind) -> StackSpec {
        let r = self.resolved();
        StackSpec {
            layer_dims: arch.to_vec(),
            activation: r.activation,
            variant: r.variant(kind),
            train: r.train.clone(),
            hidden_mask: r.hidden_mask,
            overrides: r.overrides.clone(),
        }
    }
}

/// `[784, 200, 50]` → `"784-200-50"`.
pub fn arch_name(dims: &[usize]) -> String {
    dims.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

/// Full autoencoder shape, `784-200-50-200-784`.
pub fn arch_label(dims: &[usize]) -> String {
    let mut all = dims.to_vec();
    all.extend(dims.iter().rev().skip(1));
    arch_name(&all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        ExperimentConfig::preset(Scale::Desk).validate().unwrap();
        ExperimentConfig::preset(Scale::Full).validate().unwrap();
    }

    #[test]
    fn json_round_trip_drops_output_dir() {
        let mut c = ExperimentConfig::preset(Scale::Desk);
        c.output_dir = Some("/tmp/x".into());
        let text = c.to_json().unwrap();
        assert!(!text.contains("output_dir"));
        let back = ExperimentConfig::from_json(&text).unwrap();
        c.output_dir = None;
        assert_eq!(back, c.resolved());
    }

    #[test]
    fn wrong_input_width_is_shape_error() {
        let mut c = ExperimentConfig::preset(Scale::Desk);
        c.architectures = vec![vec![100, 20]];
        assert!(matches!(c.validate(), Err(Error::Shape(_))));
    }

    #[test]
    fn schema_version_checked() {
        let c = ExperimentConfig::preset(Scale::Desk);
        let text = c.to_json().unwrap().replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn seed_propagates() {
        let c = ExperimentConfig::preset(Scale::Desk).with_seed(42);
        assert_eq!(c.split.seed, 42);
        assert_eq!(c.train.seed, 42);
        assert_eq!(c.stack_spec(&[784, 20], VariantKind::Ae).train.seed, 42);
    }

    #[test]
    fn variants_follow_kind() {
        let c = ExperimentConfig::preset(Scale::Desk);
        assert_eq!(c.variant(VariantKind::Ae), Variant::ae());
        assert_eq!(c.variant(VariantKind::Cae).corruption, CorruptionSpec::None);
        assert_eq!(c.variant(VariantKind::Dae).lambda, 0.0);
        assert_eq!(c.variant(VariantKind::Cdae).lambda, DEFAULT_LAMBDA);
    }

    #[test]
    fn labels() {
        assert_eq!(arch_name(&[784, 200, 50]), "784-200-50");
        assert_eq!(arch_label(&[784, 200, 50]), "784-200-50-200-784");
    }
}
