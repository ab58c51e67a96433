//! Implementations of the `solve`, `sweep`, `verify` and `export-model`
//! commands. Each returns a process exit code.

use crate::exit_codes;
use crate::instance_file::load_instance;
use crate::outputs::{flux_csv, network_dot, summary_text, sweep_csv};
use crate::solution_file::{load_solution, SolutionFile};
use eip_core::analysis::{alpha_sweep, build_report, epsilon_sweep, grid};
use eip_core::equilibrium::{verify_equilibrium, Verdict, VerifyOptions};
use eip_core::milp::{MipLimits, SolveEngine, SolveStatus};
use eip_core::model::{DerivedConstants, EipInstance};
use eip_core::reduction::{build, extract_network, solve_methodology, Variant, FLUX_CLAMP};
use std::path::Path;
use std::time::Duration;

/// Options shared by solver-backed commands.
pub struct EngineOptions {
    pub external: bool,
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    pub gap_tol: f64,
    pub int_tol: f64,
    pub threads: usize,
}

impl EngineOptions {
    pub fn limits(&self) -> MipLimits {
        MipLimits {
            max_nodes: self.node_limit.unwrap_or(u64::MAX),
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            rel_gap: self.gap_tol,
            int_tol: self.int_tol,
            threads: self.threads,
        }
    }

    pub fn engine(&self) -> SolveEngine<'static> {
        if self.external {
            // No external back-end is bundled; selecting one is an explicit
            // error rather than a silent fallback to the internal engine.
            SolveEngine::External(None)
        } else {
            SolveEngine::Internal
        }
    }
}

fn fail(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    exit_codes::USAGE
}

fn load(instance: &Path, alpha: Option<f64>) -> Result<(EipInstance, DerivedConstants), i32> {
    let inst = load_instance(instance).map_err(|e| fail(e))?;
    let inst = match alpha {
        Some(a) => inst.with_alpha(a).validate().map_err(|e| fail(e))?,
        None => inst,
    };
    let derived = DerivedConstants::for_instance(&inst);
    Ok((inst, derived))
}

pub fn cmd_solve(
    instance: &Path,
    alpha: Option<f64>,
    epsilon: f64,
    out_dir: &Path,
    engine_opts: &EngineOptions,
    verify_tol: f64,
) -> i32 {
    let (inst, derived) = match load(instance, alpha) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail(format!("cannot create output directory: {e}"));
    }
    let outcome = match solve_methodology(&inst, &derived, epsilon, &engine_opts.limits(), &engine_opts.engine())
    {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let run = outcome.final_run();
    let network = extract_network(&run.operation, FLUX_CLAMP);
    let opts = VerifyOptions { rel_tol: verify_tol, ..Default::default() };
    let equilibrium = match verify_equilibrium(&run.operation, &network, &inst, &derived, &opts) {
        Ok(rep) => Some(rep),
        Err(e) => {
            eprintln!("warning: equilibrium verification unavailable: {e}");
            None
        }
    };
    let report = build_report(&inst, &derived, &outcome, equilibrium.as_ref());

    let write = |name: &str, content: String| -> Result<(), i32> {
        std::fs::write(out_dir.join(name), content)
            .map_err(|e| fail(format!("cannot write {name}: {e}")))
    };
    let report_json = match serde_json::to_string_pretty(&report) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let solution = SolutionFile::from_operation(&run.operation, &inst, Some(epsilon), outcome.z_eps);
    let solution_json = match serde_json::to_string_pretty(&solution) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let text = summary_text(&report);
    let outputs = [
        ("report.json", report_json),
        ("summary.txt", text.clone()),
        ("fluxes.csv", flux_csv(&run.operation)),
        ("network.dot", network_dot(&run.operation, FLUX_CLAMP)),
        ("solution.json", solution_json),
    ];
    for (name, content) in outputs {
        if let Err(code) = write(name, content) {
            return code;
        }
    }
    if let Some(eq) = &equilibrium {
        match serde_json::to_string_pretty(eq) {
            Ok(s) => {
                if let Err(code) = write("equilibrium.json", s) {
                    return code;
                }
            }
            Err(e) => return fail(e),
        }
    }
    print!("{text}");

    match run.solution.status {
        SolveStatus::Optimal => exit_codes::OK,
        SolveStatus::LimitReached => {
            println!(
                "limit reached: best bound {:.6}, incumbent {:.6}",
                run.solution.bound, outcome.z_eps
            );
            exit_codes::LIMIT
        }
        other => fail(format!("solver finished with status {other:?}")),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    instance: &Path,
    parameter: &str,
    min: f64,
    max: f64,
    step: f64,
    epsilon: f64,
    alpha: Option<f64>,
    out: Option<&Path>,
    engine_opts: &EngineOptions,
) -> i32 {
    let (inst, _) = match load(instance, alpha) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if step <= 0.0 || max < min {
        return fail("sweep range must satisfy min <= max with a positive step");
    }
    let values = grid(min, max, step);
    let limits = engine_opts.limits();
    let engine = engine_opts.engine();
    let result = match parameter {
        "alpha" => alpha_sweep(&inst, &values, epsilon, &limits, &engine),
        "epsilon" => epsilon_sweep(&inst, &values, &limits, &engine),
        other => return fail(format!("unknown sweep parameter `{other}` (use alpha or epsilon)")),
    };
    let result = match result {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let csv = sweep_csv(&result);
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &csv) {
                return fail(format!("cannot write sweep CSV: {e}"));
            }
        }
        None => print!("{csv}"),
    }
    if result.points.iter().all(|p| p.status == SolveStatus::Optimal) {
        exit_codes::OK
    } else {
        exit_codes::LIMIT
    }
}

pub fn cmd_verify(
    instance: &Path,
    solution: &Path,
    alpha: Option<f64>,
    rel_tol: f64,
    abs_tol: f64,
    phys_tol: Option<f64>,
) -> i32 {
    let (inst, derived) = match load(instance, alpha) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let file = match load_solution(solution) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let op = match file.into_operation(&inst, &derived) {
        Ok(op) => op,
        Err(e) => return fail(e),
    };
    let network = extract_network(&op, FLUX_CLAMP);
    let opts = VerifyOptions {
        rel_tol,
        cost_abs_tol: abs_tol,
        phys_tol: phys_tol.unwrap_or(1e-6),
        feas_tol: phys_tol.unwrap_or(VerifyOptions::default().feas_tol),
        ..Default::default()
    };
    let report = match verify_equilibrium(&op, &network, &inst, &derived, &opts) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    println!(
        "{:>4}  {:>14}  {:>14}  {:>8}  verdict",
        "id", "current cost", "best response", "mode"
    );
    for c in &report.certificates {
        println!(
            "{:>4}  {:>14.6}  {:>14.6}  {:>8}  {}",
            c.id,
            c.current_cost,
            c.best_response_cost,
            match c.mode {
                eip_core::equilibrium::ResponseMode::SemiStandAlone => "semi",
                eip_core::equilibrium::ResponseMode::Active => "active",
            },
            match c.verdict {
                Verdict::NoProfitableDeviation => "no profitable deviation",
                Verdict::DeviationFound => "DEVIATION FOUND",
                Verdict::BoundaryInfimum => "boundary infimum",
            }
        );
    }
    if !report.excluded.is_empty() {
        println!("stand-alone (verified exact): {:?}", report.excluded);
    }
    if !report.idle_active.is_empty() {
        println!("warning: active flag without inflow: {:?}", report.idle_active);
    }
    if report.equilibrium {
        println!("equilibrium: verified");
        exit_codes::OK
    } else {
        println!("equilibrium: FAILED");
        exit_codes::NOT_EQUILIBRIUM
    }
}

pub fn cmd_export_model(
    instance: &Path,
    variant: &str,
    epsilon: f64,
    alpha: Option<f64>,
    out: &Path,
) -> i32 {
    let (inst, derived) = match load(instance, alpha) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let variant = match variant {
        "gap" => Variant::Gap,
        "epsilon" => Variant::Epsilon(epsilon),
        other => return fail(format!("unknown variant `{other}` (use gap or epsilon)")),
    };
    let rp = match build(&inst, &derived, variant) {
        Ok(rp) => rp,
        Err(e) => return fail(e),
    };
    let mut buf = Vec::new();
    if let Err(e) = rp.write_lp(&mut buf) {
        return fail(e);
    }
    if let Err(e) = std::fs::write(out, buf) {
        return fail(format!("cannot write model: {e}"));
    }
    exit_codes::OK
}

