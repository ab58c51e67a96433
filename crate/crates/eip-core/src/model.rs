//! EIP instance data, validation and closed-form derived quantities.
//!
//! Units are fixed throughout: concentrations in ppm, pollutant loads in
//! g/h, water fluxes in T/h, prices in $/T and the horizon in h. One tonne
//! of water at 1 ppm carries 1 g of pollutant, so the raw arithmetic is
//! consistent without conversion factors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute feasibility tolerance used for comparisons against bounds.
pub const FEAS_TOL: f64 = 1e-7;

/// A single enterprise (one process, one contaminant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enterprise {
    /// 1-based enterprise id; instances number their enterprises 1..=n.
    pub id: usize,
    /// Maximum inlet pollutant concentration (ppm).
    pub c_in: f64,
    /// Maximum outlet pollutant concentration (ppm).
    pub c_out: f64,
    /// Pollutant generation rate (g/h).
    pub pollutant_load: f64,
}

/// Park-wide prices and the lifetime horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prices {
    /// Marginal cost of fresh water ($/T).
    pub freshwater: f64,
    /// Tax per tonne of water discharged to the sink ($/T).
    pub discharge_tax: f64,
    /// Unit cost for the use of a shared connection ($/T).
    pub connection: f64,
    /// Lifetime constant of the park (h).
    pub horizon: f64,
}

/// A full problem input: enterprises, prices and the contract coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EipInstance {
    pub enterprises: Vec<Enterprise>,
    pub prices: Prices,
    /// Minimal relative gain coefficient in (0, 1): participants are
    /// guaranteed cost <= alpha * stand-alone cost.
    pub alpha: f64,
}

/// First violated instance invariant, with the offending enterprise id.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("instance has no enterprises")]
    EmptyPark,
    #[error("enterprise ids must be 1..=n in order; position {position} has id {found}")]
    BadId { position: usize, found: usize },
    #[error("c_in < c_out violated for enterprise {id} (c_in={c_in}, c_out={c_out})")]
    ConcentrationOrder { id: usize, c_in: f64, c_out: f64 },
    #[error("c_in must be >= 0 for enterprise {id} (c_in={c_in})")]
    NegativeInlet { id: usize, c_in: f64 },
    #[error("pollutant load must be > 0 for enterprise {id} (got {load})")]
    NonPositiveLoad { id: usize, load: f64 },
    #[error("price `{name}` must be strictly positive (got {value})")]
    NonPositivePrice { name: &'static str, value: f64 },
    #[error("freshwater price must exceed the connection price (c={freshwater}, gamma={connection})")]
    FreshwaterNotAboveConnection { freshwater: f64, connection: f64 },
    #[error("alpha must lie strictly between 0 and 1 (got {alpha})")]
    AlphaOutOfRange { alpha: f64 },
    #[error("non-finite parameter `{name}` for enterprise {id}")]
    NonFinite { id: usize, name: &'static str },
}

impl EipInstance {
    pub fn new(enterprises: Vec<Enterprise>, prices: Prices, alpha: f64) -> Self {
        EipInstance { enterprises, prices, alpha }
    }

    /// Number of enterprises in the park.
    pub fn n(&self) -> usize {
        self.enterprises.len()
    }

    /// Same park and prices with a different contract coefficient.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        EipInstance { enterprises: self.enterprises.clone(), prices: self.prices.clone(), alpha }
    }

    /// Checks every instance invariant and returns the instance unchanged.
    ///
    /// Reports the first violation found, identified by enterprise id.
    pub fn validate(self) -> Result<Self, ValidationError> {
        if self.enterprises.is_empty() {
            return Err(ValidationError::EmptyPark);
        }
        for (pos, e) in self.enterprises.iter().enumerate() {
            if e.id != pos + 1 {
                return Err(ValidationError::BadId { position: pos, found: e.id });
            }
            for (name, v) in [("c_in", e.c_in), ("c_out", e.c_out), ("pollutant_load", e.pollutant_load)] {
                if !v.is_finite() {
                    return Err(ValidationError::NonFinite { id: e.id, name });
                }
            }
            if e.c_in < 0.0 {
                return Err(ValidationError::NegativeInlet { id: e.id, c_in: e.c_in });
            }
            if !(e.c_in < e.c_out) {
                return Err(ValidationError::ConcentrationOrder { id: e.id, c_in: e.c_in, c_out: e.c_out });
            }
            if !(e.pollutant_load > 0.0) {
                return Err(ValidationError::NonPositiveLoad { id: e.id, load: e.pollutant_load });
            }
        }
        let p = &self.prices;
        for (name, v) in [
            ("freshwater", p.freshwater),
            ("discharge_tax", p.discharge_tax),
            ("connection", p.connection),
            ("horizon", p.horizon),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ValidationError::NonPositivePrice { name, value: v });
            }
        }
        if p.freshwater <= p.connection {
            return Err(ValidationError::FreshwaterNotAboveConnection {
                freshwater: p.freshwater,
                connection: p.connection,
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ValidationError::AlphaOutOfRange { alpha: self.alpha });
        }
        Ok(self)
    }
}

/// Closed-form quantities derived from a validated instance.
///
/// All per-enterprise vectors are indexed by position (id - 1). Immutable
/// after construction and safe to share across solver workers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// Water a stand-alone enterprise consumes and discharges: load / c_out (T/h).
    pub stand_alone_water: Vec<f64>,
    /// Total inlet water of an active enterprise: load / (c_out - c_in) (T/h).
    pub active_water: Vec<f64>,
    /// Stand-alone operating cost: horizon * (c + beta) * stand_alone_water ($/h).
    pub stand_alone_cost: Vec<f64>,
    /// Jump in discharged water when switching from active to
    /// semi-stand-alone operation: active_water - stand_alone_water (T/h).
    pub discharge_jump: Vec<f64>,
    /// Inflow level at which active operation becomes no worse than
    /// semi-stand-alone: (c + beta)/(c - gamma) * discharge_jump (T/h).
    pub inflow_threshold: Vec<f64>,
    /// Big-M constant: (n - 1) * sum of stand-alone waters (T/h).
    pub big_m: f64,
}

impl DerivedConstants {
    /// Computes every derived quantity for a validated instance.
    ///
    /// Pure: repeated calls give bit-identical results.
    pub fn for_instance(inst: &EipInstance) -> Self {
        let n = inst.n();
        let p = &inst.prices;
        let ratio = (p.freshwater + p.discharge_tax) / (p.freshwater - p.connection);
        let mut stand_alone_water = Vec::with_capacity(n);
        let mut active_water = Vec::with_capacity(n);
        let mut stand_alone_cost = Vec::with_capacity(n);
        let mut discharge_jump = Vec::with_capacity(n);
        let mut inflow_threshold = Vec::with_capacity(n);
        for e in &inst.enterprises {
            let sa = e.pollutant_load / e.c_out;
            let act = e.pollutant_load / (e.c_out - e.c_in);
            stand_alone_water.push(sa);
            active_water.push(act);
            stand_alone_cost.push(p.horizon * (p.freshwater + p.discharge_tax) * sa);
            discharge_jump.push(act - sa);
            inflow_threshold.push(ratio * (act - sa));
        }
        let big_m = (n as f64 - 1.0) * stand_alone_water.iter().sum::<f64>();
        DerivedConstants {
            stand_alone_water,
            active_water,
            stand_alone_cost,
            discharge_jump,
            inflow_threshold,
            big_m,
        }
    }

    /// The price ratio (c + beta) / (c - gamma) scaling the discharge jump.
    pub fn price_ratio(prices: &Prices) -> f64 {
        (prices.freshwater + prices.discharge_tax) / (prices.freshwater - prices.connection)
    }
}

/// Square matrix of enterprise-to-enterprise fluxes with a zero diagonal.
///
/// `get(k, i)` is the flux sent by enterprise `k` to enterprise `i`, both
/// 0-based. Sink fluxes are never stored; they are always derived from the
/// water balance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxMatrix {
    n: usize,
    values: Vec<f64>,
}

impl FluxMatrix {
    pub fn zero(n: usize) -> Self {
        FluxMatrix { n, values: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let mut m = FluxMatrix::zero(n);
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "flux matrix must be square");
            for (i, &v) in row.iter().enumerate() {
                if k != i {
                    m.set(k, i, v);
                }
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.values[from * self.n + to]
    }

    pub fn set(&mut self, from: usize, to: usize, value: f64) {
        assert_ne!(from, to, "the flux diagonal is identically zero");
        self.values[from * self.n + to] = value;
    }

    /// Aggregated outlet flux of `i` sent to other enterprises (T/h).
    pub fn outflow(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.get(i, j)).sum()
    }

    /// Aggregated inlet flux of `i` received from other enterprises (T/h).
    pub fn inflow(&self, i: usize) -> f64 {
        (0..self.n).map(|k| self.values[k * self.n + i]).sum()
    }

    pub fn iter_positive(&self, tol: f64) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |k| {
            (0..self.n).filter_map(move |i| {
                let v = self.get(k, i);
                (k != i && v > tol).then_some((k, i, v))
            })
        })
    }
}

/// A candidate park operation: fresh-water intake, exchange fluxes and the
/// boolean profile, with the derived sink discharges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParkOperation {
    /// Fresh-water intake per enterprise (T/h).
    pub fresh: Vec<f64>,
    /// Enterprise-to-enterprise fluxes (T/h).
    pub flux: FluxMatrix,
    /// Enterprise left outside the park, operating stand-alone.
    pub excluded: Vec<bool>,
    /// Enterprise receives positive inflow (selects the diluted discharge form).
    pub active: Vec<bool>,
    /// Semi-stand-alone discharge of the enterprise would be nonnegative, so
    /// the profitability condition on its inflow applies.
    pub semi_feasible: Vec<bool>,
    /// Derived sink discharge per enterprise (T/h).
    pub discharge: Vec<f64>,
}

impl ParkOperation {
    /// Assembles an operation, deriving the discharge vector from the flux
    /// matrix and activity flags.
    pub fn new(
        fresh: Vec<f64>,
        flux: FluxMatrix,
        excluded: Vec<bool>,
        active: Vec<bool>,
        semi_feasible: Vec<bool>,
        derived: &DerivedConstants,
    ) -> Self {
        let discharge = discharge_vector(&flux, &active, derived);
        ParkOperation { fresh, flux, excluded, active, semi_feasible, discharge }
    }

    /// The fully stand-alone operation: everyone excluded, no exchanges.
    pub fn stand_alone(derived: &DerivedConstants) -> Self {
        let n = derived.stand_alone_water.len();
        ParkOperation::new(
            derived.stand_alone_water.clone(),
            FluxMatrix::zero(n),
            vec![true; n],
            vec![false; n],
            vec![true; n],
            derived,
        )
    }

    pub fn n(&self) -> usize {
        self.fresh.len()
    }

    /// Count of enterprises operating stand-alone outside the park.
    pub fn excluded_count(&self) -> usize {
        self.excluded.iter().filter(|&&b| b).count()
    }
}

/// Sink discharge of every enterprise given fluxes and activity flags:
/// the activity flag selects between the stand-alone and diluted water
/// requirement, minus the enterprise's outlet flux. May be negative;
/// callers treat negative values as infeasibility.
pub fn discharge_vector(flux: &FluxMatrix, active: &[bool], derived: &DerivedConstants) -> Vec<f64> {
    (0..flux.n())
        .map(|i| {
            let total = if active[i] { derived.active_water[i] } else { derived.stand_alone_water[i] };
            total - flux.outflow(i)
        })
        .collect()
}

/// Hourly operating cost of enterprise `i` under the given operation:
/// horizon * [c * fresh + gamma * (inflow + outflow) + beta * discharge].
pub fn enterprise_cost(i: usize, op: &ParkOperation, inst: &EipInstance) -> f64 {
    let p = &inst.prices;
    p.horizon
        * (p.freshwater * op.fresh[i]
            + p.connection * (op.flux.inflow(i) + op.flux.outflow(i))
            + p.discharge_tax * op.discharge[i])
}

/// Cost bound the contract imposes on enterprise `i`: alpha * stand-alone
/// cost for participants, the plain stand-alone cost for excluded ones.
pub fn contract_bound(i: usize, excluded: bool, inst: &EipInstance, derived: &DerivedConstants) -> f64 {
    if excluded {
        derived.stand_alone_cost[i]
    } else {
        inst.alpha * derived.stand_alone_cost[i]
    }
}
