use std::path::{Path, PathBuf};

use super::config::arch_name;
use crate::autoencoder::VariantKind;

/// File layout of a run directory.
///
/// ```text
/// <root>/config.json
/// <root>/<arch>/<variant>/layer-<k>.json
/// <root>/<arch>/<variant>/model.json
/// <root>/<arch>/<variant>/{train,test}.features
/// <root>/<arch>/<variant>/{svm.json,predictions.csv,classify.json}
/// <root>/report.json, report.txt, timings.json, error.json
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPaths {
    root: PathBuf,
}

impl RunPaths {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunPaths { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.json")
    }

    pub fn report_json(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn report_txt(&self) -> PathBuf {
        self.root.join("report.txt")
    }

    pub fn timings(&self) -> PathBuf {
        self.root.join("timings.json")
    }

    pub fn error(&self) -> PathBuf {
        self.root.join("error.json")
    }

    pub fn variant_dir(&self, arch: &[usize], kind: VariantKind) -> PathBuf {
        self.root.join(arch_name(arch)).join(kind.tag())
    }

    pub fn layer(&self, arch: &[usize], kind: VariantKind, k: usize) -> PathBuf {
        self.variant_dir(arch, kind).join(format!("layer-{k}.json"))
    }

    pub fn model(&self, arch: &[usize], kind: VariantKind) -> PathBuf {
        self.variant_dir(arch, kind).join("model.json")
    }

    pub fn train_features(&self, arch: &[usize], kind: VariantKind) -> PathBuf {
        self.variant_dir(arch, kind).join("train.features")
    }

    pub fn test_features(&self, arch: &[usize], kind: VariantKind) -> PathBuf {
        self.variant_dir(arch, kind).join("test.features")
    }

    pub fn svm(&self, arch: &[usize], kind: VariantKind) -> PathBuf {
        self.variant_dir(arch, kind).join("svm.json")
    }

    pub fn predictions(&self, arch: &[usize], kind: VariantKind) -> PathBuf {
        self.variant_dir(arch, kind).join("predictions.csv")
    }

    pub fn classify(&self, arch: &[usize], kind: VariantKind) -> PathBuf {
        self.variant_dir(arch, kind).join("classify.json")
    }
}
