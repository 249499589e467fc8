use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corruption::CorruptionSpec;
use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Ae,
    Dae,
    Cae,
    Cdae,
}

impl VariantKind {
    pub const ALL: [VariantKind; 4] = [
        VariantKind::Ae,
        VariantKind::Dae,
        VariantKind::Cae,
        VariantKind::Cdae,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            VariantKind::Ae => "ae",
            VariantKind::Dae => "dae",
            VariantKind::Cae => "cae",
            VariantKind::Cdae => "cdae",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            VariantKind::Ae => "AE",
            VariantKind::Dae => "DAE",
            VariantKind::Cae => "CAE",
            VariantKind::Cdae => "CDAE",
        }
    }

    pub fn uses_penalty(self) -> bool {
        matches!(self, VariantKind::Cae | VariantKind::Cdae)
    }

    pub fn uses_corruption(self) -> bool {
        matches!(self, VariantKind::Dae | VariantKind::Cdae)
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for VariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ae" => Ok(VariantKind::Ae),
            "dae" => Ok(VariantKind::Dae),
            "cae" => Ok(VariantKind::Cae),
            "cdae" => Ok(VariantKind::Cdae),
            other => Err(Error::Config(format!("unknown variant `{other}`"))),
        }
    }
}

/// Which objective a layer is trained on.
///
/// `lambda` weights the contractive penalty (CAE/CDAE); `corruption`
/// produces the encoder input (DAE/CDAE). The other variants must leave
/// these at zero and `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub kind: VariantKind,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub corruption: CorruptionSpec,
}

impl Variant {
    pub fn ae() -> Self {
        Variant {
            kind: VariantKind::Ae,
            lambda: 0.0,
            corruption: CorruptionSpec::None,
        }
    }

    pub fn dae(corruption: CorruptionSpec) -> Self {
        Variant {
            kind: VariantKind::Dae,
            lambda: 0.0,
            corruption,
        }
    }

    pub fn cae(lambda: f64) -> Self {
        Variant {
            kind: VariantKind::Cae,
            lambda,
            corruption: CorruptionSpec::None,
        }
    }

    pub fn cdae(lambda: f64, corruption: CorruptionSpec) -> Self {
        Variant {
            kind: VariantKind::Cdae,
            lambda,
            corruption,
        }
    }

    /// Variant with the MNIST experiment settings: λ = 0.1 and the stride mask.
    pub fn with_defaults(kind: VariantKind) -> Self {
        let mask = CorruptionSpec::mnist_stride_mask();
        match kind {
            VariantKind::Ae => Variant::ae(),
            VariantKind::Dae => Variant::dae(mask),
            VariantKind::Cae => Variant::cae(DEFAULT_LAMBDA),
            VariantKind::Cdae => Variant::cdae(DEFAULT_LAMBDA, mask),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.corruption.validate()?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !self.kind.uses_penalty() && self.lambda != 0.0 {
            return Err(Error::Config(format!("{} takes no lambda", self.kind)));
        }
        if !self.kind.uses_corruption() && !self.corruption.is_none() {
            return Err(Error::Config(format!("{} takes no corruption", self.kind)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    Squared,
    CrossEntropy,
}

/// Range the raw `[0, 1]` inputs are mapped to before the first layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InputRange {
    #[default]
    Unit,
    /// `x ↦ 2x − 1`
    Symmetric,
}

impl InputRange {
    pub fn apply(self, x: &[f64]) -> Vec<f64> {
        match self {
            InputRange::Unit => x.to_vec(),
            InputRange::Symmetric => x.iter().map(|v| 2.0 * v - 1.0).collect(),
        }
    }
}

/// Minibatch SGD settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub loss: LossKind,
    pub seed: u64,
    /// Draw fresh corruption on every presentation; otherwise each sample is
    /// corrupted once before the first epoch.
    pub resample_noise: bool,
    pub input_range: InputRange,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 50,
            batch_size: 100,
            loss: LossKind::Squared,
            seed: 1,
            resample_noise: true,
            input_range: InputRange::Unit,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, dataset_size: usize) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.batch_size > dataset_size {
            return Err(Error::Config(format!(
                "batch size {} must lie in 1..={dataset_size}",
                self.batch_size
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_invariants() {
        assert!(Variant::ae().validate().is_ok());
        for kind in VariantKind::ALL {
            assert!(Variant::with_defaults(kind).validate().is_ok());
        }
        let mut bad = Variant::ae();
        bad.lambda = 0.1;
        assert!(bad.validate().is_err());
        let mut bad = Variant::cae(0.1);
        bad.corruption = CorruptionSpec::mnist_stride_mask();
        assert!(bad.validate().is_err());
        assert!(Variant::cae(-1.0).validate().is_err());
    }

    #[test]
    fn variant_json_shape() {
        let v: Variant = serde_json::from_str(
            r#"{"kind":"cdae","lambda":0.1,"corruption":{"kind":"mask_indices","start":0,"stride":80}}"#,
        )
        .unwrap();
        assert_eq!(v, Variant::with_defaults(VariantKind::Cdae));
        let ae: Variant = serde_json::from_str(r#"{"kind":"ae"}"#).unwrap();
        assert_eq!(ae, Variant::ae());
    }

    #[test]
    fn train_config_validation() {
        let cfg = TrainConfig::default();
        assert!(cfg.validate(100).is_ok());
        assert!(cfg.validate(99).is_err());
        let cfg = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(cfg.validate(10).is_err());
    }

    #[test]
    fn parse_variant_tags() {
        assert_eq!("CDAE".parse::<VariantKind>().unwrap(), VariantKind::Cdae);
        assert!("vae".parse::<VariantKind>().is_err());
    }
}
