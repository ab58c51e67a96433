//! `eip` — design and audit water-exchange networks for eco-industrial
//! parks.

use clap::{Parser, Subcommand};
use eip_cli::commands::{cmd_export_model, cmd_solve, cmd_sweep, cmd_verify, EngineOptions};
use eip_cli::exit_codes;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "eip",
    about = "Water-exchange network design for eco-industrial parks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct EngineArgs {
    /// Solver engine: the internal branch-and-bound or an external adapter.
    #[arg(long, default_value = "internal", value_parser = ["internal", "external"])]
    engine: String,
    /// Wall-clock limit per solve, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Node limit per solve.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Relative MIP gap tolerance.
    #[arg(long, default_value_t = 1e-6)]
    gap_tol: f64,
    /// Integrality tolerance for binary variables.
    #[arg(long, default_value_t = 1e-6)]
    int_tol: f64,
    /// Worker threads for node evaluation (1 keeps runs bit-reproducible by
    /// construction; higher counts evaluate the same deterministic batches).
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl EngineArgs {
    fn options(&self) -> EngineOptions {
        EngineOptions {
            external: self.engine == "external",
            time_limit: self.time_limit,
            node_limit: self.node_limit,
            gap_tol: self.gap_tol,
            int_tol: self.int_tol,
            threads: self.threads,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the design problem and write the report, flux matrix, network
    /// graph and solution files.
    Solve {
        /// Instance file (TOML).
        #[arg(long)]
        instance: PathBuf,
        /// Override the instance's contract coefficient.
        #[arg(long)]
        alpha: Option<f64>,
        /// Tightening margin for the epsilon problem.
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Relative cost tolerance for the equilibrium audit.
        #[arg(long, default_value_t = 1e-5)]
        verify_tol: f64,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Sensitivity sweep over alpha or epsilon; writes a CSV series.
    Sweep {
        #[arg(long)]
        instance: PathBuf,
        /// Parameter to sweep.
        #[arg(long, value_parser = ["alpha", "epsilon"])]
        param: String,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        step: f64,
        /// Epsilon used for alpha sweeps.
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Alpha used for epsilon sweeps (defaults to the instance's).
        #[arg(long)]
        alpha: Option<f64>,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Check that a solution file is a generalized Nash equilibrium for the
    /// instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Override the instance's contract coefficient.
        #[arg(long)]
        alpha: Option<f64>,
        /// Relative cost tolerance.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        /// Absolute cost tolerance, for solutions transcribed from rounded
        /// tables.
        #[arg(long, default_value_t = 0.0)]
        abs_tol: f64,
        /// Physical feasibility tolerance override.
        #[arg(long)]
        phys_tol: Option<f64>,
    },
    /// Dump the constructed mixed-integer program in LP text format.
    ExportModel {
        #[arg(long)]
        instance: PathBuf,
        /// Which auxiliary problem to export.
        #[arg(long, value_parser = ["gap", "epsilon"], default_value = "epsilon")]
        variant: String,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Override the instance's contract coefficient.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit with 2, which is reserved for solver limits;
            // usage problems are exit code 1 here.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit_codes::USAGE as u8 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Solve { instance, alpha, epsilon, out, verify_tol, engine } => {
            cmd_solve(&instance, alpha, epsilon, &out, &engine.options(), verify_tol)
        }
        Command::Sweep { instance, param, min, max, step, epsilon, alpha, out, engine } => cmd_sweep(
            &instance,
            &param,
            min,
            max,
            step,
            epsilon,
            alpha,
            out.as_deref(),
            &engine.options(),
        ),
        Command::Verify { instance, solution, alpha, tol, abs_tol, phys_tol } => {
            cmd_verify(&instance, &solution, alpha, tol, abs_tol, phys_tol)
        }
        Command::ExportModel { instance, variant, epsilon, alpha, out } => {
            cmd_export_model(&instance, &variant, epsilon, alpha, &out)
        }
    };
    ExitCode::from(code as u8)
}
