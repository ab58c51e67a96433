//! Solution files: full-precision JSON storing the operation (z, F, y)
//! plus a hash of the instance it solves, so `verify` can refuse
//! mismatched instance/solution pairs.

use eip_core::model::{DerivedConstants, EipInstance, FluxMatrix, ParkOperation};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionFile {
    /// FNV-1a hash of the effective instance (hex).
    pub instance_hash: String,
    pub alpha: f64,
    pub epsilon: Option<f64>,
    pub objective: f64,
    /// Fresh-water intake per enterprise (T/h).
    pub z: Vec<f64>,
    /// Row-major flux matrix; entry `[k][i]` flows from k+1 to i+1 (T/h).
    pub flux: Vec<Vec<f64>>,
    pub y_null: Vec<bool>,
    pub y_act: Vec<bool>,
    pub y_pos: Vec<bool>,
}

#[derive(Debug)]
pub enum SolutionError {
    Io(std::io::Error),
    Parse(serde_json::Error),
    HashMismatch { expected: String, found: String },
    Shape(String),
}

impl fmt::Display for SolutionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionError::Io(e) => write!(f, "cannot read solution file: {e}"),
            SolutionError::Parse(e) => write!(f, "solution file is malformed: {e}"),
            SolutionError::HashMismatch { expected, found } => write!(
                f,
                "solution was produced for a different instance (instance hash {expected}, solution carries {found})"
            ),
            SolutionError::Shape(msg) => write!(f, "solution file is inconsistent: {msg}"),
        }
    }
}

impl std::error::Error for SolutionError {}

/// FNV-1a over the exact bit patterns of every instance parameter, so any
/// numeric change produces a different hash.
pub fn instance_hash(inst: &EipInstance) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(&(inst.n() as u64).to_le_bytes());
    for e in &inst.enterprises {
        eat(&(e.id as u64).to_le_bytes());
        eat(&e.c_in.to_bits().to_le_bytes());
        eat(&e.c_out.to_bits().to_le_bytes());
        eat(&e.pollutant_load.to_bits().to_le_bytes());
    }
    for v in [
        inst.prices.freshwater,
        inst.prices.discharge_tax,
        inst.prices.connection,
        inst.prices.horizon,
        inst.alpha,
    ] {
        eat(&v.to_bits().to_le_bytes());
    }
    format!("{h:016x}")
}

impl SolutionFile {
    pub fn from_operation(
        op: &ParkOperation,
        inst: &EipInstance,
        epsilon: Option<f64>,
        objective: f64,
    ) -> Self {
        let n = op.n();
        let flux =
            (0..n).map(|k| (0..n).map(|i| if k == i { 0.0 } else { op.flux.get(k, i) }).collect()).collect();
        SolutionFile {
            instance_hash: instance_hash(inst),
            alpha: inst.alpha,
            epsilon,
            objective,
            z: op.fresh.clone(),
            flux,
            y_null: op.excluded.clone(),
            y_act: op.active.clone(),
            y_pos: op.semi_feasible.clone(),
        }
    }

    /// Rebuilds the operation, deriving discharges from the stored fluxes
    /// and activity flags. Refuses solutions hashed for another instance.
    pub fn into_operation(
        self,
        inst: &EipInstance,
        derived: &DerivedConstants,
    ) -> Result<ParkOperation, SolutionError> {
        let expected = instance_hash(inst);
        if self.instance_hash != expected {
            return Err(SolutionError::HashMismatch { expected, found: self.instance_hash });
        }
        let n = inst.n();
        if self.z.len() != n || self.flux.len() != n || self.flux.iter().any(|r| r.len() != n) {
            return Err(SolutionError::Shape(format!("expected {n} enterprises")));
        }
        for flags in [&self.y_null, &self.y_act, &self.y_pos] {
            if flags.len() != n {
                return Err(SolutionError::Shape(format!("expected {n} boolean flags")));
            }
        }
        let flux = FluxMatrix::from_rows(self.flux);
        Ok(ParkOperation::new(self.z, flux, self.y_null, self.y_act, self.y_pos, derived))
    }
}

pub fn load_solution(path: &Path) -> Result<SolutionFile, SolutionError> {
    let text = std::fs::read_to_string(path).map_err(SolutionError::Io)?;
    serde_json::from_str(&text).map_err(SolutionError::Parse)
}

pub fn write_solution(path: &Path, solution: &SolutionFile) -> Result<(), SolutionError> {
    let text = serde_json::to_string_pretty(solution).map_err(SolutionError::Parse)?;
    std::fs::write(path, text).map_err(SolutionError::Io)
}
