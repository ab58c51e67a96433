//! Human and machine output formats: the summary table, the flux matrix
//! CSV, the network DOT graph and sweep CSV series.
//!
//! Human-readable tables print at two decimals; machine-readable files
//! (CSV, JSON) keep full precision.

use eip_core::analysis::{DesignReport, SweepParameter, SweepResult};
use eip_core::model::ParkOperation;
use std::fmt::Write as _;

/// Per-enterprise summary in the published table layout, two decimals.
pub fn summary_text(report: &DesignReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4}  {:>12}  {:>12}  {:>12}  {:>12}  {:>11}",
        "id", "sa water", "park water", "sa cost", "park cost", "% reduction"
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:>3}{}  {:>12.2}  {:>12.2}  {:>12.2}  {:>12.2}  {:>11.2}",
            r.id,
            if r.excluded { "*" } else { " " },
            r.stand_alone_water,
            r.park_water,
            r.stand_alone_cost,
            r.park_cost,
            r.reduction_pct,
        );
    }
    let t = &report.totals;
    let _ = writeln!(
        out,
        "{:>4}  {:>12.2}  {:>12.2}  {:>12.2}  {:>12.2}  {:>11.2}",
        "sum", t.stand_alone_water, t.park_water, t.stand_alone_cost, t.park_cost, t.reduction_pct
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "objective: Z_bar = {:.2}, Z_eps = {:.2}, gap = {:.2}{}",
        report.z_bar,
        report.z_eps,
        report.gap,
        if report.exact { " (exact)" } else { "" }
    );
    let _ = writeln!(
        out,
        "solver: {:?}, {} nodes, {:.2} s",
        report.solver_status, report.nodes, report.solve_time_s
    );
    if let Some(eq) = report.equilibrium {
        let _ = writeln!(out, "equilibrium: {}", if eq { "verified" } else { "FAILED" });
    }
    let _ = writeln!(out, "* operating stand-alone outside the park");
    out
}

/// Flux matrix CSV: one row per enterprise, columns for every receiver plus
/// the sink, full precision. Column order is fixed: from,1..n,Sink.
pub fn flux_csv(op: &ParkOperation) -> String {
    let n = op.n();
    let mut out = String::from("from");
    for i in 1..=n {
        let _ = write!(out, ",{i}");
    }
    out.push_str(",Sink\n");
    for k in 0..n {
        let _ = write!(out, "{}", k + 1);
        for i in 0..n {
            let v = if k == i { 0.0 } else { op.flux.get(k, i) };
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", op.discharge[k]);
    }
    out
}

/// Network graph in DOT format. Gray fill marks enterprises consuming
/// strictly positive fresh water, dashed borders mark stand-alone
/// enterprises and the square node 0 is the sink. Sink edges are drawn for
/// positive discharges.
pub fn network_dot(op: &ParkOperation, flux_tol: f64) -> String {
    let n = op.n();
    let mut out = String::from("digraph park {\n  rankdir=LR;\n  node [shape=circle];\n");
    let _ = writeln!(out, "  sink [label=\"0\", shape=square];");
    for i in 0..n {
        let mut styles: Vec<&str> = Vec::new();
        let mut attrs = String::new();
        if op.fresh[i] > flux_tol {
            styles.push("filled");
            attrs.push_str(", fillcolor=gray");
        }
        if op.excluded[i] {
            styles.push("dashed");
        }
        if styles.is_empty() {
            let _ = writeln!(out, "  e{} [label=\"{}\"];", i + 1, i + 1);
        } else {
            let _ = writeln!(
                out,
                "  e{} [label=\"{}\", style=\"{}\"{}];",
                i + 1,
                i + 1,
                styles.join(","),
                attrs
            );
        }
    }
    for (k, i, v) in op.flux.iter_positive(flux_tol) {
        let _ = writeln!(out, "  e{} -> e{} [label=\"{:.2}\"];", k + 1, i + 1, v);
    }
    for i in 0..n {
        if op.discharge[i] > flux_tol {
            let _ = writeln!(out, "  e{} -> sink [label=\"{:.2}\"];", i + 1, op.discharge[i]);
        }
    }
    out.push_str("}\n");
    out
}

/// Sweep CSV with the plotted series first (parameter, discharge,
/// stand-alone count, total cost) and solver bookkeeping after, full
/// precision.
pub fn sweep_csv(result: &SweepResult) -> String {
    let name = match result.parameter {
        SweepParameter::Alpha => "alpha",
        SweepParameter::Epsilon => "epsilon",
    };
    let mut out = format!("{name},discharge,stand_alone,total_cost,gap,z_bar,time_s,nodes\n");
    for p in &result.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.value, p.objective, p.stand_alone_count, p.total_cost, p.gap, p.z_bar, p.solve_time_s, p.nodes
        );
    }
    out
}
