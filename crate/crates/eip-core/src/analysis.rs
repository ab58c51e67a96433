//! Parameter sweeps and report assembly.

use crate::equilibrium::EquilibriumReport;
use crate::milp::{MipLimits, SolveEngine, SolveStatus};
use crate::model::{enterprise_cost, DerivedConstants, EipInstance};
use crate::reduction::{extract_network, solve_methodology, MethodologyResult, ReductionError, FLUX_CLAMP};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParameter {
    Alpha,
    Epsilon,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    /// Objective of the returned design (total discharge, T/h).
    pub objective: f64,
    pub z_bar: f64,
    pub gap: f64,
    pub stand_alone_count: usize,
    /// Sum of all enterprise operating costs ($/h).
    pub total_cost: f64,
    pub status: SolveStatus,
    pub solve_time_s: f64,
    pub nodes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("sweep grid must be non-empty and sorted ascending")]
    BadGrid,
    #[error("alpha grid values must lie strictly between 0 and 1 (got {0})")]
    AlphaOutOfRange(f64),
    #[error("epsilon grid values must be strictly positive (got {0})")]
    EpsilonOutOfRange(f64),
    #[error(
        "objective decreased from {previous} to {current} while epsilon grew to {epsilon}; \
         the epsilon objective must be non-decreasing"
    )]
    MonotonicityViolated { previous: f64, current: f64, epsilon: f64 },
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

fn check_grid(grid: &[f64]) -> Result<(), AnalysisError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(AnalysisError::BadGrid);
    }
    Ok(())
}

fn sweep_point(
    value: f64,
    inst: &EipInstance,
    outcome: &MethodologyResult,
) -> SweepPoint {
    let run = outcome.final_run();
    let total_cost: f64 =
        (0..inst.n()).map(|i| enterprise_cost(i, &run.operation, inst)).sum();
    SweepPoint {
        value,
        objective: outcome.z_eps,
        z_bar: outcome.z_bar,
        gap: outcome.gap,
        stand_alone_count: run.operation.excluded_count(),
        total_cost,
        status: run.solution.status,
        solve_time_s: run.solution.wall.as_secs_f64(),
        nodes: run.solution.nodes,
    }
}

/// Solves the design problem for every contract coefficient in `alphas`
/// (ascending) at the given epsilon. Grid points are independent solves
/// with no state reuse, so the sweep is trivially deterministic; carrying
/// the previous point's design over as a warm start is a possible future
/// accelerator.
pub fn alpha_sweep(
    inst: &EipInstance,
    alphas: &[f64],
    epsilon: f64,
    limits: &MipLimits,
    engine: &SolveEngine,
) -> Result<SweepResult, AnalysisError> {
    check_grid(alphas)?;
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(AnalysisError::AlphaOutOfRange(alpha));
        }
        let scenario = inst.with_alpha(alpha);
        let derived = DerivedConstants::for_instance(&scenario);
        let outcome = solve_methodology(&scenario, &derived, epsilon, limits, engine)?;
        points.push(sweep_point(alpha, &scenario, &outcome));
    }
    Ok(SweepResult { parameter: SweepParameter::Alpha, points })
}

/// Solves the design problem for every tightening margin in `epsilons`
/// (ascending) at the instance's contract coefficient, and checks that the
/// objective is non-decreasing in epsilon whenever all solves are proven
/// optimal.
pub fn epsilon_sweep(
    inst: &EipInstance,
    epsilons: &[f64],
    limits: &MipLimits,
    engine: &SolveEngine,
) -> Result<SweepResult, AnalysisError> {
    check_grid(epsilons)?;
    let derived = DerivedConstants::for_instance(inst);
    let mut points: Vec<SweepPoint> = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        if !(epsilon > 0.0) {
            return Err(AnalysisError::EpsilonOutOfRange(epsilon));
        }
        let outcome = solve_methodology(inst, &derived, epsilon, limits, engine)?;
        let point = sweep_point(epsilon, inst, &outcome);
        if let Some(prev) = points.last() {
            let proven = prev.status == SolveStatus::Optimal && point.status == SolveStatus::Optimal;
            if proven && point.objective < prev.objective - 1e-6 {
                return Err(AnalysisError::MonotonicityViolated {
                    previous: prev.objective,
                    current: point.objective,
                    epsilon,
                });
            }
        }
        points.push(point);
    }
    Ok(SweepResult { parameter: SweepParameter::Epsilon, points })
}

/// Builds an evenly spaced grid from `min` to `max` (inclusive within
/// rounding) with the given step.
pub fn grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "grid step must be positive");
    let mut values = Vec::new();
    let mut k = 0u32;
    loop {
        let v = min + f64::from(k) * step;
        if v > max + step * 1e-9 {
            break;
        }
        values.push(v);
        k += 1;
    }
    values
}

/// Row of the per-enterprise summary.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    /// 1-based enterprise id.
    pub id: usize,
    pub stand_alone_water: f64,
    /// Fresh water consumed inside the park (T/h).
    pub park_water: f64,
    pub stand_alone_cost: f64,
    pub park_cost: f64,
    /// 100 * (1 - park_cost / stand_alone_cost); 0 for excluded enterprises.
    pub reduction_pct: f64,
    pub excluded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportTotals {
    pub stand_alone_water: f64,
    pub park_water: f64,
    pub stand_alone_cost: f64,
    pub park_cost: f64,
    pub reduction_pct: f64,
}

/// Full design summary: per-enterprise rows, totals, objective values, the
/// extracted network and the equilibrium verdict.
#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub rows: Vec<ReportRow>,
    pub totals: ReportTotals,
    pub z_bar: f64,
    pub z_eps: f64,
    pub gap: f64,
    pub exact: bool,
    pub epsilon: f64,
    /// 1-based (from, to) exchange connections.
    pub edges: Vec<(usize, usize)>,
    pub equilibrium: Option<bool>,
    pub solver_status: SolveStatus,
    pub nodes: u64,
    pub solve_time_s: f64,
}

/// Assembles the summary report for a solved instance.
pub fn build_report(
    inst: &EipInstance,
    derived: &DerivedConstants,
    outcome: &MethodologyResult,
    equilibrium: Option<&EquilibriumReport>,
) -> DesignReport {
    let run = outcome.final_run();
    let op = &run.operation;
    let mut rows = Vec::with_capacity(inst.n());
    for i in 0..inst.n() {
        let park_cost = enterprise_cost(i, op, inst);
        let stc = derived.stand_alone_cost[i];
        let reduction_pct =
            if op.excluded[i] { 0.0 } else { 100.0 * (1.0 - park_cost / stc) };
        rows.push(ReportRow {
            id: i + 1,
            stand_alone_water: derived.stand_alone_water[i],
            park_water: op.fresh[i],
            stand_alone_cost: stc,
            park_cost,
            reduction_pct,
            excluded: op.excluded[i],
        });
    }
    let sa_water: f64 = rows.iter().map(|r| r.stand_alone_water).sum();
    let park_water: f64 = rows.iter().map(|r| r.park_water).sum();
    let sa_cost: f64 = rows.iter().map(|r| r.stand_alone_cost).sum();
    let park_cost: f64 = rows.iter().map(|r| r.park_cost).sum();
    let totals = ReportTotals {
        stand_alone_water: sa_water,
        park_water,
        stand_alone_cost: sa_cost,
        park_cost,
        reduction_pct: 100.0 * (1.0 - park_cost / sa_cost),
    };
    let network = extract_network(op, FLUX_CLAMP);
    DesignReport {
        rows,
        totals,
        z_bar: outcome.z_bar,
        z_eps: outcome.z_eps,
        gap: outcome.gap,
        exact: outcome.exact,
        epsilon: outcome.epsilon,
        edges: network.edges.iter().map(|&(a, b)| (a + 1, b + 1)).collect(),
        equilibrium: equilibrium.map(|r| r.equilibrium),
        solver_status: run.solution.status,
        nodes: run.solution.nodes,
        solve_time_s: run.solution.wall.as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::milp::{MipSolution, SolveStatus};
    use crate::reduction::{MethodologyResult, SolveRun, Variant};
    use std::time::Duration;

    #[test]
    fn report_rows_match_the_reference_summary() {
        let inst = fixtures::park15().validate().unwrap();
        let derived = DerivedConstants::for_instance(&inst);
        let op = fixtures::park15_reference_operation(&derived);
        let objective: f64 = op.fresh.iter().sum();
        let outcome = MethodologyResult {
            gap_run: SolveRun {
                variant: Variant::Gap,
                solution: MipSolution {
                    status: SolveStatus::Optimal,
                    assignment: None,
                    objective: Some(objective),
                    bound: objective,
                    nodes: 0,
                    wall: Duration::ZERO,
                },
                operation: op,
            },
            eps_run: None,
            z_bar: objective,
            z_eps: objective,
            gap: 0.0,
            exact: true,
            epsilon: 1e-6,
        };
        let report = build_report(&inst, &derived, &outcome, None);

        // Enterprise 13: full reuse of its stand-alone water at 60% less cost.
        let r13 = &report.rows[12];
        assert!((r13.stand_alone_water - 66.67).abs() < 5e-3);
        assert!((r13.park_water - 66.67).abs() < 5e-3);
        assert!((r13.stand_alone_cost - 23.33).abs() < 5e-3);
        assert!((r13.park_cost - 9.33).abs() < 5e-3);
        assert!((r13.reduction_pct - 60.00).abs() < 5e-2);

        // Enterprise 4: fully supplied by others.
        let r4 = &report.rows[3];
        assert!(r4.park_water.abs() < 5e-3);
        assert!((r4.reduction_pct - 26.98).abs() < 5e-2);

        // Excluded enterprises report a zero reduction.
        assert_eq!(report.rows[1].reduction_pct, 0.0);

        // Totals are the column sums.
        assert!((report.totals.stand_alone_water - 490.44).abs() < 5e-3);
        assert!((report.totals.park_water - 332.46).abs() < 5e-3);
        assert!((report.totals.stand_alone_cost - 171.66).abs() < 5e-3);
        assert!((report.totals.park_cost - 122.10).abs() < 5e-2);
    }

    #[test]
    fn grid_covers_endpoints() {
        let g = grid(0.60, 0.99, 0.01);
        assert_eq!(g.len(), 40);
        assert!((g[0] - 0.60).abs() < 1e-12);
        assert!((g[39] - 0.99).abs() < 1e-9);
    }

    #[test]
    fn degenerate_single_point_grid() {
        let g = grid(0.95, 0.95, 0.05);
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(check_grid(&[]).is_err());
        assert!(check_grid(&[0.9, 0.8]).is_err());
        assert!(check_grid(&[0.8, 0.8, 0.9]).is_ok());
    }
}
