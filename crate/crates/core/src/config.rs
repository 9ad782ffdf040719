//! JSON model configuration.
//!
//! ```text
//! {"mode": "physical", "M_kg": 1e-12, "omega_m_rad_s": 3e3, "omega_c_rad_s": 3e15,
//!  "L_m": 0.05, "T_K": 2e-3, "gamma_per_s": 3e-2, "lambda_qq": 0, "Lambda_nonenv": 0}
//! {"mode": "dimensionless", "kappa": 1, "Lambda": 0.5, "chi": 0, "inv_Q": 1e-5, "n_bar": 1e5}
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{derive_dimensionless, DimensionlessParams, PhysConstants, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    #[serde(rename = "M_kg")]
    pub mass: f64,
    #[serde(rename = "omega_m_rad_s")]
    pub omega_m: f64,
    #[serde(rename = "omega_c_rad_s")]
    pub omega_c: f64,
    #[serde(rename = "L_m")]
    pub cavity_length: f64,
    #[serde(rename = "T_K")]
    pub temperature: f64,
    #[serde(rename = "gamma_per_s")]
    pub gamma: f64,
    #[serde(default)]
    pub lambda_qq: f64,
    #[serde(rename = "Lambda_nonenv", default)]
    pub lambda_nonenv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionlessConfig {
    pub kappa: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub chi: f64,
    #[serde(rename = "inv_Q")]
    pub inv_q: f64,
    pub n_bar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ModelConfig {
    Physical(PhysicalConfig),
    Dimensionless(DimensionlessConfig),
}

impl From<PhysicalConfig> for PhysicalParams {
    fn from(c: PhysicalConfig) -> Self {
        PhysicalParams {
            mass: c.mass,
            omega_m: c.omega_m,
            omega_c: c.omega_c,
            cavity_length: c.cavity_length,
            temperature: c.temperature,
            gamma: c.gamma,
            lambda_qq: c.lambda_qq,
            lambda_nonenv: c.lambda_nonenv,
        }
    }
}

impl From<PhysicalParams> for PhysicalConfig {
    fn from(p: PhysicalParams) -> Self {
        PhysicalConfig {
            mass: p.mass,
            omega_m: p.omega_m,
            omega_c: p.omega_c,
            cavity_length: p.cavity_length,
            temperature: p.temperature,
            gamma: p.gamma,
            lambda_qq: p.lambda_qq,
            lambda_nonenv: p.lambda_nonenv,
        }
    }
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn physical(&self) -> Option<PhysicalParams> {
        match self {
            ModelConfig::Physical(p) => Some((*p).into()),
            ModelConfig::Dimensionless(_) => None,
        }
    }

    pub fn resolve(&self, c: &PhysConstants) -> Result<DimensionlessParams> {
        match self {
            ModelConfig::Physical(p) => derive_dimensionless(&(*p).into(), c),
            ModelConfig::Dimensionless(d) => {
                DimensionlessParams::new(d.kappa, d.lambda, d.chi, d.inv_q, d.n_bar)
            }
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
