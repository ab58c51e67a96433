//! Translation of an EIP instance into the designer's auxiliary
//! mixed-integer programs, and mapping of solutions back into park
//! operations and explicit exchange networks.
//!
//! Two variants exist. The `Gap` variant closes the feasible region and
//! yields the reference value used for the optimality gap; the
//! `Epsilon` variant tightens the semi-stand-alone feasibility case by a
//! margin `epsilon > 0` so that its solutions are valid park designs. The
//! solve methodology runs the gap problem first, accepts its solution when
//! it already satisfies the strict-limit semantics, and otherwise solves
//! the epsilon problem and reports both values plus their gap.

use crate::milp::{
    write_lp, MipLimits, MipModel, MipSolution, Relation, SolveEngine, SolveStatus, VarId,
};
use crate::model::{
    discharge_vector, DerivedConstants, EipInstance, FluxMatrix, ParkOperation,
};
use serde::Serialize;
use std::collections::BTreeSet;
use std::io;
use thiserror::Error;

/// Fluxes below this are clamped to zero when extracting operations and
/// networks (T/h).
pub const FLUX_CLAMP: f64 = 1e-7;
/// Allowed difference between the model's discharge variable and the value
/// recomputed from the extracted operation.
pub const DISCHARGE_CHECK_TOL: f64 = 1e-6;
/// Default tightening margin of the epsilon variant.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Variant {
    /// Strictness replaced by a margin `epsilon > 0`; solutions are valid
    /// park designs.
    Epsilon(f64),
    /// Closed relaxation used as the optimality-gap reference.
    Gap,
}

/// Index maps from instance entities to model variables.
#[derive(Debug, Clone)]
pub struct VarMap {
    pub fresh: Vec<VarId>,
    pub discharge: Vec<VarId>,
    /// `flux[k][i]` is the variable for the flux from k to i; the diagonal
    /// holds no variable.
    pub flux: Vec<Vec<Option<VarId>>>,
    pub excluded: Vec<VarId>,
    pub active: Vec<VarId>,
    pub semi_feasible: Vec<VarId>,
}

/// An EIP instance reduced to a mixed-integer linear program.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    pub variant: Variant,
    pub model: MipModel,
    pub vars: VarMap,
    n: usize,
}

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("epsilon must be strictly positive (got {0})")]
    NonPositiveEpsilon(f64),
    #[error(
        "inflow threshold {threshold} of enterprise {id} exceeds the big-M constant {big_m}; \
         the activity case split would be unsound on this instance"
    )]
    ThresholdExceedsBigM { id: usize, threshold: f64, big_m: f64 },
    #[error("solver returned no assignment (status {status:?})")]
    NoAssignment { status: SolveStatus },
    #[error(
        "model discharge {model_value} of enterprise {id} disagrees with the recomputed value \
         {recomputed} beyond {tol}"
    )]
    DischargeMismatch { id: usize, model_value: f64, recomputed: f64, tol: f64 },
    #[error(
        "solver reported the problem infeasible, but the all-stand-alone operation is always \
         feasible; this indicates an engine defect"
    )]
    UnexpectedInfeasible,
    #[error("engine failure: {0}")]
    Engine(#[from] crate::milp::EngineError),
}

/// Builds the auxiliary MIP for a validated instance.
///
/// For every enterprise the model contains exactly: the water balance, the
/// discharge definition selected by the activity flag, the inlet
/// concentration constraint, the two exclusion big-M constraints, the
/// activity big-M constraint, the positivity-case pair, the cost contract
/// and nonnegativity. The objective minimizes total discharge.
pub fn build(
    inst: &EipInstance,
    derived: &DerivedConstants,
    variant: Variant,
) -> Result<ReducedProblem, ReductionError> {
    if let Variant::Epsilon(eps) = variant {
        if !(eps > 0.0) {
            return Err(ReductionError::NonPositiveEpsilon(eps));
        }
    }
    let n = inst.n();
    let k_big = derived.big_m;
    // Soundness of the activity case split under the park-wide constant:
    // the inflow threshold must not exceed it. The constant degenerates to
    // zero for a single enterprise, where no exchange variables exist at
    // all, so the check is moot there.
    if n > 1 {
        for (i, &th) in derived.inflow_threshold.iter().enumerate() {
            if th > k_big {
                return Err(ReductionError::ThresholdExceedsBigM {
                    id: i + 1,
                    threshold: th,
                    big_m: k_big,
                });
            }
        }
    }

    let mut model = MipModel::new(match variant {
        Variant::Epsilon(_) => "eip-epsilon",
        Variant::Gap => "eip-gap",
    });

    let fresh: Vec<VarId> = (0..n)
        .map(|i| model.add_continuous(format!("z_{}", i + 1), 0.0, derived.active_water[i]))
        .collect();
    let discharge: Vec<VarId> = (0..n)
        .map(|i| model.add_continuous(format!("d_{}", i + 1), 0.0, derived.active_water[i]))
        .collect();
    // Achievable inflow of each receiver: the total inlet water is capped
    // by the active requirement, and the concentration budget
    // c_in * active_water caps what even the cleanest potential supplier
    // could deliver.
    let inflow_cap: Vec<f64> = (0..n)
        .map(|i| {
            let cleanest = (0..n)
                .filter(|&k| k != i)
                .map(|k| inst.enterprises[k].c_out)
                .fold(f64::INFINITY, f64::min);
            let budget_cap = inst.enterprises[i].c_in * derived.active_water[i] / cleanest;
            derived.active_water[i].min(budget_cap)
        })
        .collect();

    let mut flux: Vec<Vec<Option<VarId>>> = vec![vec![None; n]; n];
    for k in 0..n {
        for i in 0..n {
            if k != i {
                // A single flux never exceeds the sender's total outlet
                // water nor the share of the receiver's concentration
                // budget this supplier's outlet quality allows.
                let budget_cap =
                    inst.enterprises[i].c_in * derived.active_water[i] / inst.enterprises[k].c_out;
                let cap = derived.active_water[k].min(derived.active_water[i]).min(budget_cap);
                let v = model.add_continuous(format!("f_{}_{}", k + 1, i + 1), 0.0, cap);
                flux[k][i] = Some(v);
            }
        }
    }
    let excluded: Vec<VarId> = (0..n).map(|i| model.add_binary(format!("y_null_{}", i + 1))).collect();
    let active: Vec<VarId> = (0..n).map(|i| model.add_binary(format!("y_act_{}", i + 1))).collect();
    let semi_feasible: Vec<VarId> =
        (0..n).map(|i| model.add_binary(format!("y_pos_{}", i + 1))).collect();

    // Enterprises that cannot accept polluted water are never active: the
    // inlet constraint forces their inflow to zero, so the binaries and
    // inlet fluxes can be fixed up front.
    for i in 0..n {
        if inst.enterprises[i].c_in == 0.0 {
            model.fix_variable(active[i], 0.0);
            for k in 0..n {
                if let Some(v) = flux[k][i] {
                    model.fix_variable(v, 0.0);
                }
            }
        }
    }

    let p = &inst.prices;
    for i in 0..n {
        let e = &inst.enterprises[i];
        let inflow: Vec<VarId> = (0..n).filter_map(|k| flux[k][i]).collect();
        let outflow: Vec<VarId> = (0..n).filter_map(|j| flux[i][j]).collect();

        // (a) water balance: z + inflow = outflow + discharge
        let mut terms = vec![(fresh[i], 1.0), (discharge[i], -1.0)];
        terms.extend(inflow.iter().map(|&v| (v, 1.0)));
        terms.extend(outflow.iter().map(|&v| (v, -1.0)));
        model.add_constraint(format!("balance_{}", i + 1), terms, Relation::Eq, 0.0);

        // (b) discharge definition: d + outflow - jump * y_act = stand-alone water
        let mut terms = vec![(discharge[i], 1.0), (active[i], -derived.discharge_jump[i])];
        terms.extend(outflow.iter().map(|&v| (v, 1.0)));
        model.add_constraint(
            format!("discharge_{}", i + 1),
            terms,
            Relation::Eq,
            derived.stand_alone_water[i],
        );

        // (c) inlet concentration: sum_k (c_out_k - c_in_i) f_ki <= c_in_i z_i
        let mut terms = vec![(fresh[i], -e.c_in)];
        for k in 0..n {
            if let Some(v) = flux[k][i] {
                let coeff = inst.enterprises[k].c_out - e.c_in;
                if coeff != 0.0 {
                    terms.push((v, coeff));
                }
            }
        }
        model.add_constraint(format!("inlet_{}", i + 1), terms, Relation::Le, 0.0);

        // Deactivation constants: the aggregated outlet never exceeds the
        // active-water requirement and the aggregated inlet never exceeds
        // the achievable inflow, so those values already switch each
        // constraint off. Any constant at least this large (such as the
        // park-wide K above, kept for validation) gives the same 0-1
        // feasible set; the tight ones keep the LP relaxation strong.
        let out_cap = derived.active_water[i];
        let in_cap = inflow_cap[i];

        // (d) exclusion big-M on both directions
        let mut terms = vec![(excluded[i], out_cap)];
        terms.extend(outflow.iter().map(|&v| (v, 1.0)));
        model.add_constraint(format!("excl_out_{}", i + 1), terms, Relation::Le, out_cap);
        let mut terms = vec![(excluded[i], in_cap)];
        terms.extend(inflow.iter().map(|&v| (v, 1.0)));
        model.add_constraint(format!("excl_in_{}", i + 1), terms, Relation::Le, in_cap);

        // (e) activity big-M: inflow <= cap * y_act
        let mut terms = vec![(active[i], -in_cap)];
        terms.extend(inflow.iter().map(|&v| (v, 1.0)));
        model.add_constraint(format!("activity_{}", i + 1), terms, Relation::Le, 0.0);

        // (f) positivity-case pair: y_pos picks which disjunct holds for an
        // active enterprise. First: stand-alone water - outflow - M y_pos
        // bounded by -eps (epsilon variant) or 0 (gap variant); with y_pos
        // set, the row must hold for any outflow >= 0.
        let (eps, rhs) = match variant {
            Variant::Epsilon(eps) => (eps, -derived.stand_alone_water[i] - eps),
            Variant::Gap => (0.0, -derived.stand_alone_water[i]),
        };
        let mut terms = vec![(semi_feasible[i], -(derived.stand_alone_water[i] + eps))];
        terms.extend(outflow.iter().map(|&v| (v, -1.0)));
        model.add_constraint(format!("semi_feas_{}", i + 1), terms, Relation::Le, rhs);
        // Second: inflow - threshold y_pos + threshold (1 - y_act) >= 0.
        let th = derived.inflow_threshold[i];
        let mut terms = vec![(semi_feasible[i], -th), (active[i], -th)];
        terms.extend(inflow.iter().map(|&v| (v, 1.0)));
        model.add_constraint(format!("profit_{}", i + 1), terms, Relation::Ge, -th);

        // (g) cost contract: horizon [c z + gamma (in + out) + beta d]
        //     <= alpha STC + (1 - alpha) STC y_null
        let stc = derived.stand_alone_cost[i];
        let mut terms = vec![
            (fresh[i], p.horizon * p.freshwater),
            (discharge[i], p.horizon * p.discharge_tax),
            (excluded[i], -(1.0 - inst.alpha) * stc),
        ];
        terms.extend(inflow.iter().map(|&v| (v, p.horizon * p.connection)));
        terms.extend(outflow.iter().map(|&v| (v, p.horizon * p.connection)));
        model.add_constraint(format!("contract_{}", i + 1), terms, Relation::Le, inst.alpha * stc);
    }

    let objective: Vec<(VarId, f64)> = discharge.iter().map(|&v| (v, 1.0)).collect();
    model.set_objective(objective, 0.0);

    Ok(ReducedProblem {
        variant,
        model,
        vars: VarMap { fresh, discharge, flux, excluded, active, semi_feasible },
        n,
    })
}

impl ReducedProblem {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Writes the underlying model in LP text format.
    pub fn write_lp<W: io::Write>(&self, out: &mut W) -> io::Result<()> {
        write_lp(&self.model, out)
    }

    /// Assignment of the all-stand-alone operation, which is feasible for
    /// every variant and serves as the solver's starting incumbent.
    pub fn stand_alone_assignment(&self, derived: &DerivedConstants) -> Vec<f64> {
        let mut x = vec![0.0; self.model.num_variables()];
        for i in 0..self.n {
            x[self.vars.fresh[i].index()] = derived.stand_alone_water[i];
            x[self.vars.discharge[i].index()] = derived.stand_alone_water[i];
            x[self.vars.excluded[i].index()] = 1.0;
            x[self.vars.semi_feasible[i].index()] = 1.0;
        }
        x
    }
}

/// Maps a solver assignment back into a park operation: binaries snapped to
/// {0, 1}, fluxes below [`FLUX_CLAMP`] clamped to zero, discharges
/// recomputed from the closed form and cross-checked against the model's
/// discharge variables.
pub fn extract_operation(
    rp: &ReducedProblem,
    sol: &MipSolution,
    derived: &DerivedConstants,
) -> Result<ParkOperation, ReductionError> {
    let x = sol
        .assignment
        .as_ref()
        .ok_or(ReductionError::NoAssignment { status: sol.status })?;
    let n = rp.n;
    let fresh: Vec<f64> = rp.vars.fresh.iter().map(|&v| x[v.index()].max(0.0)).collect();
    let mut flux = FluxMatrix::zero(n);
    for k in 0..n {
        for i in 0..n {
            if let Some(v) = rp.vars.flux[k][i] {
                let value = x[v.index()];
                if value > FLUX_CLAMP {
                    flux.set(k, i, value);
                }
            }
        }
    }
    let excluded: Vec<bool> = rp.vars.excluded.iter().map(|&v| x[v.index()] > 0.5).collect();
    let active: Vec<bool> = rp.vars.active.iter().map(|&v| x[v.index()] > 0.5).collect();
    let semi_feasible: Vec<bool> =
        rp.vars.semi_feasible.iter().map(|&v| x[v.index()] > 0.5).collect();

    let recomputed = discharge_vector(&flux, &active, derived);
    for i in 0..n {
        let model_value = x[rp.vars.discharge[i].index()];
        if (model_value - recomputed[i]).abs() > DISCHARGE_CHECK_TOL {
            return Err(ReductionError::DischargeMismatch {
                id: i + 1,
                model_value,
                recomputed: recomputed[i],
                tol: DISCHARGE_CHECK_TOL,
            });
        }
    }

    Ok(ParkOperation {
        fresh,
        flux,
        excluded,
        active,
        semi_feasible,
        discharge: recomputed,
    })
}

/// The explicit exchange network of an operation: every enterprise pair
/// with flux above `tol`, minus all connections of excluded enterprises and
/// the inlet connections of enterprises receiving nothing. Sink connections
/// always exist and are not stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Network {
    n: usize,
    /// 0-based (from, to) pairs, ordered.
    pub edges: BTreeSet<(usize, usize)>,
}

impl Network {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Enterprises with an edge into `i`, ascending.
    pub fn inlet_sources(&self, i: usize) -> Vec<usize> {
        self.edges.iter().filter(|&&(_, to)| to == i).map(|&(from, _)| from).collect()
    }
}

pub fn extract_network(op: &ParkOperation, tol: f64) -> Network {
    let n = op.n();
    let mut edges: BTreeSet<(usize, usize)> = op.flux.iter_positive(tol).map(|(k, i, _)| (k, i)).collect();
    for i in 0..n {
        if op.excluded[i] {
            edges.retain(|&(from, to)| from != i && to != i);
        } else if op.flux.inflow(i) <= tol {
            // Semi-stand-alone: no inlet connections are retained.
            edges.retain(|&(_, to)| to != i);
        }
    }
    Network { n, edges }
}

/// One solved auxiliary problem with its extracted operation.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub variant: Variant,
    pub solution: MipSolution,
    pub operation: ParkOperation,
}

/// Outcome of the two-step solve methodology.
#[derive(Debug, Clone)]
pub struct MethodologyResult {
    /// Solution of the gap (closed-relaxation) problem.
    pub gap_run: SolveRun,
    /// Solution of the epsilon problem; `None` when the gap solution
    /// already satisfies the strict-limit semantics.
    pub eps_run: Option<SolveRun>,
    pub z_bar: f64,
    pub z_eps: f64,
    pub gap: f64,
    /// True when the returned design solves the strict-limit problem
    /// exactly (zero gap by construction).
    pub exact: bool,
    pub epsilon: f64,
}

impl MethodologyResult {
    /// The run whose operation is the returned park design.
    pub fn final_run(&self) -> &SolveRun {
        self.eps_run.as_ref().unwrap_or(&self.gap_run)
    }
}

/// Checks whether an operation satisfies the strict-limit semantics: for
/// every enterprise, the stand-alone water minus outflow minus K y_pos is
/// strictly negative (strict floating comparison, no tolerance).
pub fn satisfies_strict_limit(op: &ParkOperation, derived: &DerivedConstants) -> bool {
    (0..op.n()).all(|i| {
        let lhs = derived.stand_alone_water[i] - op.flux.outflow(i)
            - if op.semi_feasible[i] { derived.big_m } else { 0.0 };
        lhs < 0.0
    })
}

/// Runs the solve methodology: solve the gap problem, accept its solution
/// if it is strictly feasible, otherwise solve the epsilon problem. The
/// reported values always satisfy `z_bar <= z_eps`.
pub fn solve_methodology(
    inst: &EipInstance,
    derived: &DerivedConstants,
    epsilon: f64,
    limits: &MipLimits,
    engine: &SolveEngine,
) -> Result<MethodologyResult, ReductionError> {
    if !(epsilon > 0.0) {
        return Err(ReductionError::NonPositiveEpsilon(epsilon));
    }

    let gap_rp = build(inst, derived, Variant::Gap)?;
    let stand_alone = gap_rp.stand_alone_assignment(derived);
    let gap_sol = engine.solve_with_start(&gap_rp.model, limits, Some(&stand_alone))?;
    if gap_sol.status == SolveStatus::Infeasible {
        return Err(ReductionError::UnexpectedInfeasible);
    }
    let gap_op = extract_operation(&gap_rp, &gap_sol, derived)?;
    let z_bar = gap_sol.objective.ok_or(ReductionError::NoAssignment { status: gap_sol.status })?;

    if satisfies_strict_limit(&gap_op, derived) {
        return Ok(MethodologyResult {
            gap_run: SolveRun { variant: Variant::Gap, solution: gap_sol, operation: gap_op },
            eps_run: None,
            z_bar,
            z_eps: z_bar,
            gap: 0.0,
            exact: true,
            epsilon,
        });
    }

    let eps_rp = build(inst, derived, Variant::Epsilon(epsilon))?;
    // The gap argmin is occasionally feasible for the epsilon problem even
    // when it misses the strict-limit semantics; it is then a better start
    // than the stand-alone profile.
    let gap_start = gap_sol
        .assignment
        .as_deref()
        .filter(|x| crate::milp::check_feasible(&eps_rp.model, x, limits.int_tol).is_some());
    let eps_sol =
        engine.solve_with_start(&eps_rp.model, limits, gap_start.or(Some(&stand_alone)))?;
    if eps_sol.status == SolveStatus::Infeasible {
        return Err(ReductionError::UnexpectedInfeasible);
    }
    let eps_op = extract_operation(&eps_rp, &eps_sol, derived)?;
    let z_eps = eps_sol.objective.ok_or(ReductionError::NoAssignment { status: eps_sol.status })?;

    Ok(MethodologyResult {
        gap_run: SolveRun { variant: Variant::Gap, solution: gap_sol, operation: gap_op },
        eps_run: Some(SolveRun {
            variant: Variant::Epsilon(epsilon),
            solution: eps_sol,
            operation: eps_op,
        }),
        z_bar,
        z_eps,
        gap: z_eps - z_bar,
        exact: false,
        epsilon,
    })
}
