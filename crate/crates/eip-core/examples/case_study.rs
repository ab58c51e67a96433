//! Solves a bundled case-study park with the internal engine and prints the
//! headline numbers.
//!
//! ```sh
//! cargo run --release -p eip-core --example case_study -- 15 0.95
//! ```

use eip_core::fixtures;
use eip_core::milp::{MipLimits, SolveEngine};
use eip_core::model::DerivedConstants;
use eip_core::reduction::solve_methodology;
use std::time::Duration;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "15".into());
    let alpha: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.95);
    let inst = match which.as_str() {
        "10" => fixtures::park10(),
        _ => fixtures::park15(),
    }
    .with_alpha(alpha)
    .validate()
    .unwrap();
    let derived = DerivedConstants::for_instance(&inst);
    let limits = MipLimits { time_limit: Some(Duration::from_secs(1800)), ..Default::default() };

    match solve_methodology(&inst, &derived, 1e-6, &limits, &SolveEngine::Internal) {
        Ok(outcome) => {
            let run = outcome.final_run();
            println!(
                "alpha {alpha}: Z_bar {:.4}, Z_eps {:.4}, gap {:.4}{}",
                outcome.z_bar,
                outcome.z_eps,
                outcome.gap,
                if outcome.exact { " (exact)" } else { "" }
            );
            println!(
                "status {:?}, {} nodes, {:.1} s, {} stand-alone",
                run.solution.status,
                run.solution.nodes,
                run.solution.wall.as_secs_f64(),
                run.operation.excluded_count()
            );
        }
        Err(e) => eprintln!("solve failed: {e}"),
    }
}
