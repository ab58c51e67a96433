//! Instance files: a TOML document listing enterprises, prices, the horizon
//! and the contract coefficient.
//!
//! ```toml
//! alpha = 0.95
//! horizon_a_h = 1.0
//!
//! [prices]
//! c = 0.13      # freshwater ($/T)
//! beta = 0.22   # discharge tax ($/T)
//! gamma = 0.01  # shared connection ($/T)
//!
//! [[enterprise]]
//! id = 1
//! c_in_ppm = 30.0
//! c_out_ppm = 100.0
//! m_g_per_h = 7500.0
//! ```

use eip_core::model::{Enterprise, EipInstance, Prices};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub alpha: f64,
    pub horizon_a_h: f64,
    pub prices: PricesSection,
    #[serde(rename = "enterprise")]
    pub enterprises: Vec<EnterpriseRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PricesSection {
    /// Freshwater marginal cost ($/T).
    pub c: f64,
    /// Discharge tax ($/T).
    pub beta: f64,
    /// Shared-connection unit cost ($/T).
    pub gamma: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EnterpriseRow {
    pub id: usize,
    pub c_in_ppm: f64,
    pub c_out_ppm: f64,
    pub m_g_per_h: f64,
}

#[derive(Debug)]
pub enum InstanceError {
    Io(std::io::Error),
    /// TOML syntax or schema problem, with line/column diagnostics.
    Parse(toml::de::Error),
    Invalid(eip_core::model::ValidationError),
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::Io(e) => write!(f, "cannot read instance file: {e}"),
            InstanceError::Parse(e) => write!(f, "instance file is malformed: {e}"),
            InstanceError::Invalid(e) => write!(f, "instance is invalid: {e}"),
        }
    }
}

impl std::error::Error for InstanceError {}

impl InstanceFile {
    pub fn from_instance(inst: &EipInstance) -> Self {
        InstanceFile {
            alpha: inst.alpha,
            horizon_a_h: inst.prices.horizon,
            prices: PricesSection {
                c: inst.prices.freshwater,
                beta: inst.prices.discharge_tax,
                gamma: inst.prices.connection,
            },
            enterprises: inst
                .enterprises
                .iter()
                .map(|e| EnterpriseRow {
                    id: e.id,
                    c_in_ppm: e.c_in,
                    c_out_ppm: e.c_out,
                    m_g_per_h: e.pollutant_load,
                })
                .collect(),
        }
    }

    pub fn into_instance(self) -> Result<EipInstance, InstanceError> {
        let enterprises = self
            .enterprises
            .into_iter()
            .map(|row| Enterprise {
                id: row.id,
                c_in: row.c_in_ppm,
                c_out: row.c_out_ppm,
                pollutant_load: row.m_g_per_h,
            })
            .collect();
        let prices = Prices {
            freshwater: self.prices.c,
            discharge_tax: self.prices.beta,
            connection: self.prices.gamma,
            horizon: self.horizon_a_h,
        };
        EipInstance::new(enterprises, prices, self.alpha)
            .validate()
            .map_err(InstanceError::Invalid)
    }
}

/// Reads and validates an instance file.
pub fn load_instance(path: &Path) -> Result<EipInstance, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(InstanceError::Io)?;
    let file: InstanceFile = toml::from_str(&text).map_err(InstanceError::Parse)?;
    file.into_instance()
}

/// Serializes an instance in the file format.
pub fn to_toml(inst: &EipInstance) -> String {
    toml::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_toml() {
        let inst = eip_core::fixtures::park15();
        let text = to_toml(&inst);
        let back: InstanceFile = toml::from_str(&text).unwrap();
        let rebuilt = back.into_instance().unwrap();
        assert_eq!(rebuilt, inst);
    }

    #[test]
    fn diagnostics_carry_position() {
        let bad = "alpha = 0.95\nhorizon_a_h = 1.0\n[prices]\nc = \"not a number\"\nbeta = 0.22\ngamma = 0.01\n";
        let err = toml::from_str::<InstanceFile>(bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 4"), "diagnostic should name the line: {msg}");
    }

    #[test]
    fn invalid_instance_is_reported_with_enterprise_id() {
        let text = "alpha = 0.95\nhorizon_a_h = 1.0\n[prices]\nc = 0.13\nbeta = 0.22\ngamma = 0.01\n\n[[enterprise]]\nid = 1\nc_in_ppm = 100.0\nc_out_ppm = 100.0\nm_g_per_h = 5.0\n";
        let file: InstanceFile = toml::from_str(text).unwrap();
        let err = file.into_instance().unwrap_err();
        assert!(err.to_string().contains("enterprise 1"), "{err}");
    }
}
