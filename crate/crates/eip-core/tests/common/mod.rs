//! Shared helpers for the integration suites: a deterministic RNG, random
//! instance and operation samplers within the case-study parameter ranges,
//! and the brute-force MIP oracle.
//!
//! Each integration target compiles its own copy, so not every helper is
//! used by every suite.
#![allow(dead_code)]

use eip_core::milp::{solve_lp, LpStatus, MipModel};
use eip_core::model::{
    enterprise_cost, DerivedConstants, Enterprise, EipInstance, FluxMatrix, ParkOperation, Prices,
};

/// SplitMix64: tiny, deterministic, good enough for test sampling.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Samples an instance with parameters inside the case-study ranges:
/// inlet concentrations in [0, 400] ppm (occasionally exactly zero), outlet
/// concentrations up to 1000 ppm and pollutant loads in [2, 30] kg/h.
/// Resamples until every inflow threshold stays below the big-M constant,
/// the soundness condition the reduction validates.
pub fn random_instance(rng: &mut SplitMix64, n: usize) -> EipInstance {
    loop {
        let enterprises = (0..n)
            .map(|i| {
                let c_in = if rng.below(8) == 0 { 0.0 } else { rng.uniform(0.0, 400.0) };
                let c_out = rng.uniform(c_in + 25.0, 1000.0);
                Enterprise { id: i + 1, c_in, c_out, pollutant_load: rng.uniform(2000.0, 30000.0) }
            })
            .collect();
        let prices =
            Prices { freshwater: 0.13, discharge_tax: 0.22, connection: 0.01, horizon: 1.0 };
        let inst =
            EipInstance::new(enterprises, prices, 0.95).validate().expect("sampled instance is valid");
        let derived = DerivedConstants::for_instance(&inst);
        if derived.inflow_threshold.iter().all(|&th| th < derived.big_m) {
            return inst;
        }
    }
}

/// Enumerates every assignment of the model's free binaries, solving one LP
/// relaxation per profile; returns the least objective over feasible
/// profiles. Independent of the branch-and-bound path it audits.
pub fn brute_force_optimum(model: &MipModel) -> Option<f64> {
    let free: Vec<usize> = model
        .binary_indices()
        .into_iter()
        .filter(|&j| {
            let v = &model.variables()[j];
            v.upper - v.lower > 0.5
        })
        .collect();
    assert!(free.len() <= 20, "brute force limited to small models");
    let lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1u32 << free.len()) {
        let mut lo = lower.clone();
        let mut hi = upper.clone();
        for (bit, &j) in free.iter().enumerate() {
            let value = f64::from((mask >> bit) & 1);
            lo[j] = value;
            hi[j] = value;
        }
        let lp = eip_core::milp::solve_lp_with_bounds(model, &lo, &hi);
        if lp.status == LpStatus::Optimal && best.map_or(true, |b| lp.objective < b) {
            best = Some(lp.objective);
        }
    }
    best
}

/// Samples a physically feasible park operation: one receiver takes a
/// random admissible inflow from random suppliers (each capped by its own
/// stand-alone water so every discharge stays nonnegative).
///
/// Returns the operation and the receiving enterprise.
pub fn random_feasible_operation(
    rng: &mut SplitMix64,
    inst: &EipInstance,
    derived: &DerivedConstants,
) -> Option<(ParkOperation, usize)> {
    let n = inst.n();
    let receivers: Vec<usize> = (0..n).filter(|&i| inst.enterprises[i].c_in > 0.0).collect();
    if receivers.is_empty() {
        return None;
    }
    let i = receivers[rng.below(receivers.len())];
    let budget = inst.enterprises[i].c_in * derived.active_water[i];
    let mut flux = FluxMatrix::zero(n);
    let target = rng.uniform(0.0, derived.active_water[i]);
    let mut taken = 0.0;
    let mut spent = 0.0;
    let mut suppliers: Vec<usize> = (0..n).filter(|&k| k != i).collect();
    // deterministic shuffle
    for idx in (1..suppliers.len()).rev() {
        suppliers.swap(idx, rng.below(idx + 1));
    }
    for k in suppliers {
        let room = (target - taken)
            .min((budget - spent) / inst.enterprises[k].c_out)
            .min(derived.stand_alone_water[k]);
        let amount = rng.uniform(0.0, room.max(0.0));
        if amount > 1e-9 {
            flux.set(k, i, amount);
            taken += amount;
            spent += amount * inst.enterprises[k].c_out;
        }
    }
    if taken <= 1e-9 {
        return None;
    }
    let active: Vec<bool> = (0..n).map(|j| flux.inflow(j) > 0.0).collect();
    let semi_feasible: Vec<bool> = (0..n)
        .map(|j| !active[j] || flux.inflow(j) >= derived.inflow_threshold[j])
        .collect();
    let fresh: Vec<f64> = (0..n)
        .map(|j| {
            let total =
                if active[j] { derived.active_water[j] } else { derived.stand_alone_water[j] };
            total - flux.inflow(j)
        })
        .collect();
    let op = ParkOperation::new(fresh, flux, vec![false; n], active, semi_feasible, derived);
    Some((op, i))
}

/// Spec-level sanity of an extracted solver operation: aggregated balance,
/// contract satisfaction, exclusion semantics and activity consistency.
pub fn assert_operation_invariants(op: &ParkOperation, inst: &EipInstance, derived: &DerivedConstants) {
    let n = inst.n();
    let fresh: f64 = op.fresh.iter().sum();
    let discharge: f64 = op.discharge.iter().sum();
    assert!(
        (fresh - discharge).abs() <= 1e-6 * (1.0 + fresh.abs()),
        "aggregated balance violated: fresh {fresh} vs discharge {discharge}"
    );
    for i in 0..n {
        let cost = enterprise_cost(i, op, inst);
        if op.excluded[i] {
            assert!(
                (op.fresh[i] - derived.stand_alone_water[i]).abs() <= 1e-6,
                "excluded enterprise {} not stand-alone",
                i + 1
            );
            assert!(op.flux.inflow(i) <= 1e-7 && op.flux.outflow(i) <= 1e-7);
        } else {
            assert!(
                cost <= inst.alpha * derived.stand_alone_cost[i] + 1e-6,
                "contract violated for enterprise {}: cost {} vs bound {}",
                i + 1,
                cost,
                inst.alpha * derived.stand_alone_cost[i]
            );
        }
        if op.flux.inflow(i) > 1e-7 {
            assert!(op.active[i], "enterprise {} has inflow but no activity flag", i + 1);
        }
    }
}

/// Direct LP check that the reported objective matches the dual bound.
pub fn assert_weak_duality(model: &MipModel) {
    let lp = solve_lp(model);
    if lp.status == LpStatus::Optimal {
        assert!(
            (lp.objective - lp.dual_objective).abs() <= 1e-6 * (1.0 + lp.objective.abs()),
            "weak duality violated: primal {} dual {}",
            lp.objective,
            lp.dual_objective
        );
    }
}
