//! Generic mixed-integer linear programming engine.
//!
//! A [`MipModel`] holds continuous and binary variables with bounds, linear
//! constraints and a minimization objective. LP relaxations are solved by a
//! two-phase primal simplex over bounded variables ([`solve_lp`]); integer
//! solutions by best-first branch-and-bound over the binary variables
//! ([`solve_mip`]). [`external_adapter`] is the seam for plugging in an
//! external MILP back-end behind the same contract.

mod branch;
mod lp_format;
mod simplex;

pub use branch::{
    check_feasible, solve_mip, solve_mip_from, solve_mip_with_observer, BnbEvent, MipLimits,
    MipSolution, SolveStatus,
};
pub use lp_format::write_lp;
pub use simplex::{solve_lp, solve_lp_with_bounds, LpSolution, LpStatus};

use serde::Serialize;
use thiserror::Error;

/// Handle to a variable of a [`MipModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

/// Relation between a constraint's left-hand side and its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear-constraint model with continuous and binary variables and a
/// minimization objective. Immutable while being solved.
#[derive(Debug, Clone, Default)]
pub struct MipModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
    objective_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("binary variable `{name}` has bounds [{lower}, {upper}] outside [0, 1]")]
    BinaryBounds { name: String, lower: f64, upper: f64 },
    #[error("variable bounds crossed for `{name}`: [{lower}, {upper}]")]
    CrossedBounds { name: String, lower: f64, upper: f64 },
    #[error("constraint `{constraint}` references unknown variable index {index}")]
    UnknownVariable { constraint: String, index: usize },
    #[error("non-finite coefficient in `{place}`")]
    NonFiniteCoefficient { place: String },
    #[error("no external MILP backend is configured")]
    NoBackend,
    #[error("external backend `{backend}` failed: {message}")]
    BackendFailure { backend: String, message: String },
}

impl MipModel {
    pub fn new(name: impl Into<String>) -> Self {
        MipModel { name: name.into(), ..Default::default() }
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_variable(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_variable(name, VarKind::Binary, 0.0, 1.0)
    }

    fn add_variable(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable { name: name.into(), kind, lower, upper });
        id
    }

    /// Fixes a variable by collapsing its bounds.
    pub fn fix_variable(&mut self, var: VarId, value: f64) {
        let v = &mut self.variables[var.0];
        v.lower = value;
        v.upper = value;
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        self.constraints.push(Constraint { name: name.into(), terms, relation, rhs });
    }

    /// Replaces the objective (sense is always minimize).
    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>, offset: f64) {
        self.objective = terms;
        self.objective_offset = offset;
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    /// Indices of binary variables, in declaration order.
    pub fn binary_indices(&self) -> Vec<usize> {
        self.variables
            .iter()
            .enumerate()
            .filter_map(|(i, v)| (v.kind == VarKind::Binary).then_some(i))
            .collect()
    }

    /// Objective value of a full assignment, including the offset.
    pub fn objective_value(&self, assignment: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().map(|&(v, c)| c * assignment[v.0]).sum::<f64>()
    }

    /// Checks structural well-formedness: every coefficient references an
    /// existing variable, binaries stay within [0, 1], bounds do not cross
    /// and everything is finite.
    pub fn validate(&self) -> Result<(), EngineError> {
        for v in &self.variables {
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(EngineError::BinaryBounds {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if v.lower > v.upper {
                return Err(EngineError::CrossedBounds {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(EngineError::NonFiniteCoefficient { place: c.name.clone() });
            }
            for &(var, coeff) in &c.terms {
                if var.0 >= self.variables.len() {
                    return Err(EngineError::UnknownVariable { constraint: c.name.clone(), index: var.0 });
                }
                if !coeff.is_finite() {
                    return Err(EngineError::NonFiniteCoefficient { place: c.name.clone() });
                }
            }
        }
        for &(var, coeff) in &self.objective {
            if var.0 >= self.variables.len() {
                return Err(EngineError::UnknownVariable { constraint: "objective".into(), index: var.0 });
            }
            if !coeff.is_finite() {
                return Err(EngineError::NonFiniteCoefficient { place: "objective".into() });
            }
        }
        Ok(())
    }
}

/// External MILP back-end interface. Implementations receive the model
/// as-is, so variable order and names are preserved bit-exactly.
pub trait MilpBackend: Sync {
    fn name(&self) -> &str;
    fn solve(&self, model: &MipModel, limits: &MipLimits) -> Result<MipSolution, EngineError>;
}

/// Solves through a configured external back-end. Without one this is an
/// explicit error, never a silent fallback to the internal engine.
pub fn external_adapter(
    model: &MipModel,
    limits: &MipLimits,
    backend: Option<&dyn MilpBackend>,
) -> Result<MipSolution, EngineError> {
    let backend = backend.ok_or(EngineError::NoBackend)?;
    model.validate()?;
    backend.solve(model, limits)
}

/// Solver seam used by the reduction layer: internal engine or an external
/// adapter behind the same contract.
pub enum SolveEngine<'a> {
    Internal,
    External(Option<&'a dyn MilpBackend>),
}

impl SolveEngine<'_> {
    pub fn solve(&self, model: &MipModel, limits: &MipLimits) -> Result<MipSolution, EngineError> {
        self.solve_with_start(model, limits, None)
    }

    /// Solve with an optional known-feasible assignment used as the initial
    /// incumbent. External back-ends receive the model only; the hint is
    /// internal-engine specific.
    pub fn solve_with_start(
        &self,
        model: &MipModel,
        limits: &MipLimits,
        warm_start: Option<&[f64]>,
    ) -> Result<MipSolution, EngineError> {
        match self {
            SolveEngine::Internal => {
                model.validate()?;
                Ok(solve_mip_from(model, limits, warm_start, &mut |_| {}))
            }
            SolveEngine::External(backend) => external_adapter(model, limits, *backend),
        }
    }
}
