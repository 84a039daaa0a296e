use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Per-potential weights `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    pub seg: f64,
    pub bdy1: f64,
    pub bdy2: f64,
    pub jct3: f64,
    pub crs4: f64,
    pub col: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            seg: 1.0,
            bdy1: 1.0,
            bdy2: 1.0,
            jct3: 1.0,
            crs4: 1.0,
            col: 1.0,
        }
    }
}

/// Energy parameters. Read from TOML; omitted keys keep their defaults.
///
/// ```toml
/// k = 5.0
/// lambda_occ = 15.0
/// lambda_hinge = 3.0
/// lambda_imp = 30.0
/// lambda_col = 30.0
/// kappa = 60.0
///
/// [weights]
/// seg = 1.0
/// bdy1 = 1.0
/// bdy2 = 1.0
/// jct3 = 1.0
/// crs4 = 1.0
/// col = 1.0
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Truncation of the data cost, pixels.
    pub k: f64,
    pub lambda_occ: f64,
    pub lambda_hinge: f64,
    pub lambda_imp: f64,
    pub lambda_col: f64,
    /// Scale of the χ² color distance.
    pub kappa: f64,
    pub weights: Weights,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            k: 5.0,
            lambda_occ: 15.0,
            lambda_hinge: 3.0,
            lambda_imp: 30.0,
            lambda_col: 30.0,
            kappa: 60.0,
            weights: Weights::default(),
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let w = &self.weights;
        let all = [
            self.k,
            self.lambda_occ,
            self.lambda_hinge,
            self.lambda_imp,
            self.lambda_col,
            self.kappa,
            w.seg,
            w.bdy1,
            w.bdy2,
            w.jct3,
            w.crs4,
            w.col,
        ];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(ModelError::InvalidParams(
                "all parameters must be finite and >= 0".into(),
            ));
        }
        if self.k <= 0.0 {
            return Err(ModelError::InvalidParams("k must be > 0".into()));
        }
        if !(self.lambda_occ > self.lambda_hinge && self.lambda_hinge > 0.0) {
            return Err(ModelError::InvalidParams(
                "need lambda_occ > lambda_hinge > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ModelError> {
        let p: ModelParams = toml::from_str(text).map_err(|e| ModelError::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("plain numeric struct serializes")
    }
}
