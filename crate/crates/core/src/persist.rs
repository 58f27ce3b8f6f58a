//! Versioned JSON model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::NormStats;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::pipeline::OneClassModel;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted model together with the standardization of its raw inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub norm: NormStats,
    pub model: OneClassModel,
}

impl ModelFile {
    pub fn new(feature_names: Vec<String>, norm: NormStats, model: OneClassModel) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            feature_names,
            norm,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let header: Header = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if header.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                header.format_version
            )));
        }
        let file: Self = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if file.norm.dim() != file.model.input_dim() {
            return Err(Error::ModelFormat("normalization and model dimensions disagree".into()));
        }
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Standardizes raw samples (D×n) and scores them.
    pub fn decide_raw(&self, raw: &DenseMatrix) -> Result<Vec<(f64, bool)>> {
        self.model.decide(&self.norm.apply(raw)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::standardize;
    use crate::pipeline::{EvalPath, Hyperparams, KernelChoice, Method, ModelSpec};
    use crate::selfcheck::gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fitted() -> (ModelFile, DenseMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let raw = gaussian(3, 12, &mut rng);
        let (x, _, norm) = standardize(&raw, &[]).unwrap();
        let spec = ModelSpec {
            method: Method::Ocsvm,
            path: EvalPath::Kernel,
            choice: KernelChoice::Reference(crate::reference::ReferenceCase::RandomFull),
            hyper: Hyperparams { scale: 1.0, trade_off: 0.2 },
            eigen_tol: 1e-6,
        };
        let model = OneClassModel::fit(spec, &x, None, &mut rng).unwrap();
        (ModelFile::new(vec!["a".into(), "b".into(), "c".into()], norm, model), raw)
    }

    #[test]
    fn round_trip_preserves_decisions() {
        let (file, raw) = fitted();
        let back = ModelFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.decide_raw(&raw).unwrap(), file.decide_raw(&raw).unwrap());
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let (file, _) = fitted();
        let text = file.to_json().unwrap().replacen("\"format_version\": 1", "\"format_version\": 99", 1);
        assert!(matches!(ModelFile::from_json(&text), Err(Error::ModelFormat(_))));
        assert!(matches!(ModelFile::from_json("{}"), Err(Error::ModelFormat(_))));
    }
}
