//! Acceptance suite: runs every published-case-study criterion at its
//! stated tolerance and prints one pass/fail line per criterion.
//!
//! Run with `cargo test -p eip-core --test acceptance -- --nocapture` to see
//! the per-criterion lines; the suite takes several minutes because it
//! solves the full 15-enterprise design problem across a contract sweep
//! with the internal engine.

mod common;

use common::{
    assert_operation_invariants, assert_weak_duality, brute_force_optimum,
    random_feasible_operation, random_instance, SplitMix64,
};
use eip_core::analysis::epsilon_sweep;
use eip_core::equilibrium::{lemma1_predicate, verify_equilibrium, VerifyOptions};
use eip_core::fixtures;
use eip_core::milp::{solve_mip, MipLimits, SolveEngine, SolveStatus};
use eip_core::model::{enterprise_cost, DerivedConstants, EipInstance};
use eip_core::reduction::{
    build, extract_network, solve_methodology, MethodologyResult, Variant, FLUX_CLAMP,
};
use std::time::{Duration, Instant};

struct Criteria {
    failures: Vec<String>,
}

impl Criteria {
    fn new() -> Self {
        Criteria { failures: Vec::new() }
    }

    fn record(&mut self, id: u32, ok: bool, detail: String) {
        println!("criterion {id}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures.push(format!("criterion {id}: {detail}"));
        }
    }

    fn warn(&mut self, id: u32, detail: String) {
        println!("criterion {id}: PASS (warning) — {detail}");
    }
}

fn limits() -> MipLimits {
    MipLimits { time_limit: Some(Duration::from_secs(1500)), ..Default::default() }
}

fn solve(inst: &EipInstance, derived: &DerivedConstants) -> MethodologyResult {
    solve_methodology(inst, derived, 1e-6, &limits(), &SolveEngine::Internal)
        .expect("methodology solve succeeds")
}

#[test]
fn acceptance_criteria() {
    let mut c = Criteria::new();
    let park15 = fixtures::park15().validate().unwrap();
    let derived15 = DerivedConstants::for_instance(&park15);
    let park10 = fixtures::park10().validate().unwrap();
    let derived10 = DerivedConstants::for_instance(&park10);

    // ── Criterion 2: stand-alone totals (instantaneous) ────────────────
    let total_water: f64 = derived15.stand_alone_water.iter().sum();
    let total_cost: f64 = derived15.stand_alone_cost.iter().sum();
    c.record(
        2,
        (total_water - 490.44).abs() <= 0.01 && (total_cost - 171.66).abs() <= 0.01,
        format!("stand-alone totals {total_water:.4} T/h, {total_cost:.4} $/h"),
    );

    // ── Criterion 1: case-study objective ──────────────────────────────
    // Weak-duality spot check on the case-study LP relaxations first.
    for variant in [Variant::Gap, Variant::Epsilon(1e-6)] {
        assert_weak_duality(&build(&park15, &derived15, variant).unwrap().model);
        assert_weak_duality(&build(&park10, &derived10, variant).unwrap().model);
    }
    let t0 = Instant::now();
    let main15 = solve(&park15, &derived15);
    let t_main = t0.elapsed();
    let ok1 = (main15.z_bar - 332.46).abs() <= 0.05 && (main15.z_eps - 332.46).abs() <= 0.05;
    c.record(
        1,
        ok1 && t_main <= Duration::from_secs(1800),
        format!(
            "z_bar {:.4}, z_eps {:.4}, status {:?}, {:.1} s",
            main15.z_bar,
            main15.z_eps,
            main15.final_run().solution.status,
            t_main.as_secs_f64()
        ),
    );
    assert_operation_invariants(&main15.final_run().operation, &park15, &derived15);

    // ── Criterion 3: null set and fully supplied enterprises ───────────
    {
        let op = &main15.final_run().operation;
        let excluded: Vec<usize> =
            (0..park15.n()).filter(|&i| op.excluded[i]).map(|i| i + 1).collect();
        let zero_fresh_ok =
            [4, 7, 9, 15].iter().all(|&id| op.fresh[id - 1].abs() <= 0.01);
        let published = excluded == vec![2, 5, 10] && zero_fresh_ok;
        if published {
            c.record(3, true, format!("excluded {excluded:?}"));
        } else {
            let proven = main15.final_run().solution.status == SolveStatus::Optimal && ok1;
            if proven {
                c.warn(
                    3,
                    format!(
                        "alternative optimum with equal objective proven: excluded {excluded:?}"
                    ),
                );
            } else {
                c.record(3, false, format!("excluded {excluded:?} without proven optimality"));
            }
        }
    }

    // ── Criterion 4: total park cost band ───────────────────────────────
    {
        let op = &main15.final_run().operation;
        let total: f64 = (0..park15.n()).map(|i| enterprise_cost(i, op, &park15)).sum();
        c.record(
            4,
            (121.5..=123.0).contains(&total),
            format!("total park cost {total:.4} $/h"),
        );
    }

    // ── Criterion 5: epsilon-gap case on the 10-enterprise park ────────
    let main10 = solve(&park10, &derived10);
    {
        let ok = (main10.z_bar - 201.46).abs() <= 0.05
            && (main10.z_eps - 201.48).abs() <= 0.05
            && (main10.gap - 0.02).abs() <= 0.02;
        c.record(
            5,
            ok,
            format!(
                "z_bar {:.4}, z_eps {:.4}, gap {:.4}, exact {}",
                main10.z_bar, main10.z_eps, main10.gap, main10.exact
            ),
        );
        assert_operation_invariants(&main10.final_run().operation, &park10, &derived10);

        // Report assembly cross-check: totals equal their column sums and
        // park costs come from an independent pass through the cost
        // function.
        let report = eip_core::analysis::build_report(&park10, &derived10, &main10, None);
        let park_cost_sum: f64 = report.rows.iter().map(|r| r.park_cost).sum();
        assert!((report.totals.park_cost - park_cost_sum).abs() <= 0.01);
        let park_water_sum: f64 = report.rows.iter().map(|r| r.park_water).sum();
        assert!((report.totals.park_water - park_water_sum).abs() <= 0.01);
        for row in &report.rows {
            let recomputed =
                enterprise_cost(row.id - 1, &main10.final_run().operation, &park10);
            assert!((row.park_cost - recomputed).abs() <= 1e-9);
        }
    }

    // ── Criterion 6: alpha threshold forces full stand-alone ───────────
    let mut threshold_runs = Vec::new();
    for alpha in [0.60, 0.68] {
        let scenario = park15.with_alpha(alpha);
        let derived = DerivedConstants::for_instance(&scenario);
        let run = solve(&scenario, &derived);
        let op = &run.final_run().operation;
        let all_stand_alone = op.excluded_count() == park15.n();
        c.record(
            6,
            all_stand_alone && (run.z_eps - 490.44).abs() <= 0.01,
            format!("alpha {alpha}: z {:.4}, {} stand-alone", run.z_eps, op.excluded_count()),
        );
        threshold_runs.push((scenario, derived, run));
    }

    // ── Criterion 7: equilibrium soundness across all solver outputs ───
    {
        let mut verified = 0usize;
        let mut failures = Vec::new();
        let mut slowest = Duration::ZERO;
        let opts = VerifyOptions { rel_tol: 1e-5, ..Default::default() };
        let mut check = |label: String,
                         inst: &EipInstance,
                         derived: &DerivedConstants,
                         run: &MethodologyResult| {
            let op = &run.final_run().operation;
            let network = extract_network(op, FLUX_CLAMP);
            let t = Instant::now();
            match verify_equilibrium(op, &network, inst, derived, &opts) {
                Ok(report) if report.equilibrium => verified += 1,
                Ok(report) => {
                    let bad: Vec<usize> = report
                        .certificates
                        .iter()
                        .filter(|cert| {
                            cert.verdict
                                != eip_core::equilibrium::Verdict::NoProfitableDeviation
                        })
                        .map(|cert| cert.id)
                        .collect();
                    failures.push(format!("{label}: deviations at {bad:?}"));
                }
                Err(e) => failures.push(format!("{label}: {e}")),
            }
            slowest = slowest.max(t.elapsed());
        };

        check("park15 alpha 0.95".into(), &park15, &derived15, &main15);
        check("park10 alpha 0.95".into(), &park10, &derived10, &main10);
        for (scenario, derived, run) in &threshold_runs {
            check(format!("park15 alpha {}", scenario.alpha), scenario, derived, run);
        }
        let stand_alone_total: f64 = derived15.stand_alone_water.iter().sum();
        for alpha in [0.65, 0.70, 0.75, 0.80, 0.85, 0.90] {
            let scenario = park15.with_alpha(alpha);
            let derived = DerivedConstants::for_instance(&scenario);
            let run = solve(&scenario, &derived);
            let op = &run.final_run().operation;
            assert_operation_invariants(op, &scenario, &derived);
            // Sweep-level sanity: the park never discharges more than the
            // fully stand-alone configuration, and exactly that much when
            // everyone is excluded.
            assert!(run.z_eps <= stand_alone_total + 1e-6);
            if op.excluded_count() == scenario.n() {
                assert!((run.z_eps - stand_alone_total).abs() <= 1e-6);
            }
            check(format!("park15 alpha {alpha}"), &scenario, &derived, &run);
        }
        c.record(
            7,
            failures.is_empty() && slowest <= Duration::from_secs(1),
            format!(
                "{verified} solver outputs verified, slowest verification {:.3} s{}",
                slowest.as_secs_f64(),
                if failures.is_empty() {
                    String::new()
                } else {
                    format!("; failures: {failures:?}")
                }
            ),
        );
    }

    // ── Criterion 8: epsilon monotonicity on the 10-enterprise park ────
    {
        let eps_grid = [1e-6, 1e-4, 1e-2, 1.0];
        match epsilon_sweep(&park10, &eps_grid, &limits(), &SolveEngine::Internal) {
            Ok(sweep) => {
                let non_decreasing = sweep
                    .points
                    .windows(2)
                    .all(|w| w[1].objective >= w[0].objective - 1e-6);
                let above_bar = sweep.points.iter().all(|p| p.objective >= p.z_bar - 1e-6);
                let values: Vec<String> =
                    sweep.points.iter().map(|p| format!("{:.4}", p.objective)).collect();
                c.record(
                    8,
                    non_decreasing && above_bar,
                    format!("z_eps over the grid: {values:?}"),
                );
            }
            Err(e) => c.record(8, false, format!("sweep failed: {e}")),
        }
    }

    // ── Criterion 9: engine equivalence against brute-force enumeration ─
    {
        let t0 = Instant::now();
        let mut rng = SplitMix64(0x00c0_ffee);
        let mut worst: f64 = 0.0;
        let mut solved = 0usize;
        for trial in 0..50 {
            let n = 2 + trial % 3;
            let inst = random_instance(&mut rng, n);
            let derived = DerivedConstants::for_instance(&inst);
            let rp = build(&inst, &derived, Variant::Epsilon(1e-6)).unwrap();
            let oracle = brute_force_optimum(&rp.model).expect("stand-alone point is feasible");
            let sol = solve_mip(&rp.model, &MipLimits::default());
            assert_eq!(sol.status, SolveStatus::Optimal, "trial {trial}");
            let diff = (sol.objective.unwrap() - oracle).abs();
            worst = worst.max(diff);
            solved += 1;
        }
        let elapsed = t0.elapsed();
        c.record(
            9,
            worst <= 1e-6 && elapsed <= Duration::from_secs(120),
            format!("{solved} instances, worst gap {worst:.3e}, {:.1} s", elapsed.as_secs_f64()),
        );
    }

    // ── Criterion 10: first active-agent equivalence ────────────────────
    {
        let mut rng = SplitMix64(0xfeed_5eed);
        let mut checked = 0usize;
        let mut disagreements = Vec::new();
        while checked < 200 {
            let n = 3 + rng.below(3);
            let inst = random_instance(&mut rng, n);
            let derived = DerivedConstants::for_instance(&inst);
            let Some((op, i)) = random_feasible_operation(&mut rng, &inst, &derived) else {
                continue;
            };
            checked += 1;

            // Direct route: cost of the sampled active operation versus the
            // semi-stand-alone operation of the same enterprise.
            let active_cost = enterprise_cost(i, &op, &inst);
            let mut semi = op.clone();
            for k in 0..inst.n() {
                if k != i {
                    semi.flux.set(k, i, 0.0);
                }
            }
            semi.active[i] = false;
            let semi_op = eip_core::model::ParkOperation::new(
                {
                    let mut fresh = semi.fresh.clone();
                    fresh[i] = derived.stand_alone_water[i];
                    fresh
                },
                semi.flux.clone(),
                semi.excluded.clone(),
                semi.active.clone(),
                semi.semi_feasible.clone(),
                &derived,
            );
            let semi_cost = enterprise_cost(i, &semi_op, &inst);

            let diff = semi_cost - active_cost;
            let predicted = lemma1_predicate(i, op.flux.inflow(i), &derived);
            if diff.abs() >= 1e-9 && (diff > 0.0) != predicted {
                disagreements.push(format!(
                    "n={n} i={} inflow {:.4} threshold {:.4} diff {diff:.3e}",
                    i + 1,
                    op.flux.inflow(i),
                    derived.inflow_threshold[i]
                ));
            }
        }
        c.record(
            10,
            disagreements.is_empty(),
            format!("{checked} sampled operations agree{}", if disagreements.is_empty() {
                String::new()
            } else {
                format!("; first disagreements: {:?}", &disagreements[..disagreements.len().min(3)])
            }),
        );
    }

    assert!(c.failures.is_empty(), "acceptance failures: {:#?}", c.failures);
}
