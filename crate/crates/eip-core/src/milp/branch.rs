//! Best-first branch-and-bound over binary variables.
//!
//! Node selection takes the smallest LP bound (ties by node creation
//! index); branching picks the most fractional binary (ties by lowest
//! variable index). A rounding heuristic at every fractional node fixes all
//! binaries to the nearest integer and re-solves the LP to produce early
//! incumbents; it never affects optimality claims. Nodes are evaluated in
//! fixed-size batches so that multi-threaded runs process exactly the same
//! tree as single-threaded ones.

use super::simplex::{solve_lp_with_bounds, LpSolution, LpStatus};
use super::MipModel;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

/// Nodes evaluated per batch; fixed so results do not depend on the thread
/// count.
const BATCH: usize = 8;
/// Absolute slack when pruning against the incumbent.
const PRUNE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    LimitReached,
    /// Numerical trouble in an LP relaxation; never reported as optimal.
    Numerical,
}

/// Search limits and tolerances for [`solve_mip`].
#[derive(Debug, Clone)]
pub struct MipLimits {
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
    /// Terminate once (incumbent - bound) <= rel_gap * max(1, |incumbent|).
    pub rel_gap: f64,
    /// Distance from an integer within which a binary counts as integral.
    pub int_tol: f64,
    pub threads: usize,
}

impl Default for MipLimits {
    fn default() -> Self {
        MipLimits {
            max_nodes: u64::MAX,
            time_limit: None,
            rel_gap: 1e-6,
            int_tol: 1e-6,
            threads: 1,
        }
    }
}

/// Result of a branch-and-bound run.
#[derive(Debug, Clone)]
pub struct MipSolution {
    pub status: SolveStatus,
    /// Best assignment found, in model variable order.
    pub assignment: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Best proven lower bound on the optimum.
    pub bound: f64,
    /// Number of node LP relaxations solved.
    pub nodes: u64,
    pub wall: Duration,
}

/// Search progress events for tests and observers.
#[derive(Debug, Clone, Copy)]
pub enum BnbEvent {
    /// Global lower bound after a batch of nodes; non-decreasing.
    BoundUpdated(f64),
    /// A new incumbent objective.
    Incumbent(f64),
}

struct Node {
    fixings: Vec<(u32, u8)>,
    bound: f64,
}

struct HeapEntry {
    bound: f64,
    id: u64,
    node: Node,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want smallest bound first.
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct NodeEval {
    lp: LpSolution,
    heuristic: Option<(f64, Vec<f64>)>,
}

pub fn solve_mip(model: &MipModel, limits: &MipLimits) -> MipSolution {
    solve_mip_with_observer(model, limits, &mut |_| {})
}

pub fn solve_mip_with_observer(
    model: &MipModel,
    limits: &MipLimits,
    observer: &mut dyn FnMut(BnbEvent),
) -> MipSolution {
    solve_mip_from(model, limits, None, observer)
}

/// Evaluates an assignment against the model; returns its objective when it
/// satisfies every constraint, bound and integrality requirement. The
/// tolerance is deliberately tight (1e-9 scaled): a warm start must not
/// blur small formulation margins into feasibility.
pub fn check_feasible(model: &MipModel, x: &[f64], int_tol: f64) -> Option<f64> {
    if x.len() != model.num_variables() {
        return None;
    }
    for (j, v) in model.variables().iter().enumerate() {
        let tol = 1e-9 * (1.0 + x[j].abs());
        if x[j] < v.lower - tol || x[j] > v.upper + tol {
            return None;
        }
        if v.kind == super::VarKind::Binary && x[j].min(1.0 - x[j]).abs() > int_tol {
            return None;
        }
    }
    for c in model.constraints() {
        let lhs: f64 = c.terms.iter().map(|&(v, coeff)| coeff * x[v.index()]).sum();
        let scale = 1e-9 * (1.0 + lhs.abs().max(c.rhs.abs()));
        let ok = match c.relation {
            super::Relation::Le => lhs <= c.rhs + scale,
            super::Relation::Ge => lhs >= c.rhs - scale,
            super::Relation::Eq => (lhs - c.rhs).abs() <= scale,
        };
        if !ok {
            return None;
        }
    }
    Some(model.objective_value(x))
}

/// Branch-and-bound with an optional known-feasible starting assignment,
/// used as the initial incumbent.
pub fn solve_mip_from(
    model: &MipModel,
    limits: &MipLimits,
    warm_start: Option<&[f64]>,
    observer: &mut dyn FnMut(BnbEvent),
) -> MipSolution {
    let start = Instant::now();
    let base_lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
    let base_upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
    let binaries = model.binary_indices();

    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut last_improvement: u64 = 0;
    if let Some(x) = warm_start {
        if let Some(obj) = check_feasible(model, x, limits.int_tol) {
            observer(BnbEvent::Incumbent(obj));
            incumbent = Some((obj, x.to_vec()));
        }
    }
    let mut nodes_done: u64 = 0;
    let mut next_id: u64 = 1;
    let mut global_lb = f64::NEG_INFINITY;

    heap.push(HeapEntry {
        bound: f64::NEG_INFINITY,
        id: 0,
        node: Node { fixings: Vec::new(), bound: f64::NEG_INFINITY },
    });

    let finish = |status: SolveStatus,
                  incumbent: Option<(f64, Vec<f64>)>,
                  bound: f64,
                  nodes: u64| MipSolution {
        status,
        objective: incumbent.as_ref().map(|(obj, _)| *obj),
        assignment: incumbent.map(|(_, x)| x),
        bound,
        nodes,
        wall: start.elapsed(),
    };

    loop {
        let cutoff = incumbent.as_ref().map_or(f64::INFINITY, |(obj, _)| obj - PRUNE_EPS);

        // Remaining lower bound; prune exhausted or dominated frontier.
        while let Some(top) = heap.peek() {
            if top.bound >= cutoff {
                heap.pop();
            } else {
                break;
            }
        }
        if heap.is_empty() {
            let (status, bound) = match &incumbent {
                Some((obj, _)) => (SolveStatus::Optimal, *obj),
                None => (SolveStatus::Infeasible, f64::INFINITY),
            };
            return finish(status, incumbent, bound, nodes_done);
        }
        let lb_remaining = heap.peek().map(|e| e.bound).unwrap_or(f64::INFINITY);
        if let Some((obj, _)) = &incumbent {
            if obj - lb_remaining <= limits.rel_gap * obj.abs().max(1.0) {
                let bound = lb_remaining.max(global_lb);
                return finish(SolveStatus::Optimal, incumbent, bound, nodes_done);
            }
        }

        if nodes_done >= limits.max_nodes {
            let bound = lb_remaining.max(global_lb);
            return finish(SolveStatus::LimitReached, incumbent, bound, nodes_done);
        }
        if let Some(cap) = limits.time_limit {
            if start.elapsed() >= cap {
                let bound = lb_remaining.max(global_lb);
                return finish(SolveStatus::LimitReached, incumbent, bound, nodes_done);
            }
        }

        // Pop a deterministic batch of open nodes.
        let budget = (limits.max_nodes - nodes_done).min(BATCH as u64) as usize;
        let mut batch: Vec<Node> = Vec::with_capacity(budget);
        while batch.len() < budget {
            match heap.pop() {
                Some(entry) if entry.bound < cutoff => batch.push(entry.node),
                Some(_) => {}
                None => break,
            }
        }
        if batch.is_empty() {
            continue;
        }

        // The rounding heuristic earns its keep while incumbents are still
        // improving; afterwards it runs on a sparse schedule.
        let heuristic_hot = incumbent.is_none() || nodes_done < last_improvement + 300;
        let heuristic_mask: Vec<bool> = (0..batch.len() as u64)
            .map(|k| heuristic_hot || (nodes_done + k) % 16 == 0)
            .collect();
        let evals =
            evaluate_batch(model, &base_lower, &base_upper, &binaries, &batch, &heuristic_mask, limits);

        for (node, eval) in batch.into_iter().zip(evals.into_iter()) {
            nodes_done += 1;
            global_lb = global_lb.max(node.bound);
            let cutoff = incumbent.as_ref().map_or(f64::INFINITY, |(obj, _)| obj - PRUNE_EPS);
            match eval.lp.status {
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => {
                    return finish(SolveStatus::Unbounded, None, f64::NEG_INFINITY, nodes_done)
                }
                LpStatus::Numerical => {
                    let bound = global_lb;
                    return finish(SolveStatus::Numerical, incumbent, bound, nodes_done);
                }
                LpStatus::Optimal => {}
            }
            let obj = eval.lp.objective;
            if obj >= cutoff {
                continue;
            }

            match most_fractional(&eval.lp.x, &binaries, limits.int_tol) {
                None => {
                    // Integer feasible.
                    if incumbent.as_ref().map_or(true, |(best, _)| obj < *best) {
                        observer(BnbEvent::Incumbent(obj));
                        incumbent = Some((obj, eval.lp.x.clone()));
                        last_improvement = nodes_done;
                    }
                }
                Some(branch_var) => {
                    if let Some((hobj, hx)) = &eval.heuristic {
                        if incumbent.as_ref().map_or(true, |(best, _)| *hobj < *best) {
                            observer(BnbEvent::Incumbent(*hobj));
                            incumbent = Some((*hobj, hx.clone()));
                            last_improvement = nodes_done;
                        }
                    }
                    let cutoff =
                        incumbent.as_ref().map_or(f64::INFINITY, |(best, _)| best - PRUNE_EPS);

                    // Reduced-cost fixing: binaries whose move to the other
                    // bound provably exceeds the cutoff stay fixed below
                    // this node.
                    let mut inherited = node.fixings.clone();
                    if cutoff.is_finite() {
                        for &j in &binaries {
                            if j == branch_var || is_fixed(&inherited, j) {
                                continue;
                            }
                            let xj = eval.lp.x[j];
                            let dj = eval.lp.reduced_costs[j];
                            if xj <= limits.int_tol && dj > 0.0 && obj + dj >= cutoff {
                                inherited.push((j as u32, 0));
                            } else if xj >= 1.0 - limits.int_tol && dj < 0.0 && obj - dj >= cutoff {
                                inherited.push((j as u32, 1));
                            }
                        }
                    }

                    for value in [0u8, 1u8] {
                        let mut fixings = inherited.clone();
                        fixings.push((branch_var as u32, value));
                        let id = next_id;
                        next_id += 1;
                        heap.push(HeapEntry {
                            bound: obj,
                            id,
                            node: Node { fixings, bound: obj },
                        });
                    }
                }
            }
        }

        let lb_after = heap.peek().map(|e| e.bound).unwrap_or(f64::INFINITY);
        let reported = match &incumbent {
            Some((obj, _)) => lb_after.min(*obj).max(global_lb),
            None => {
                if lb_after.is_finite() {
                    lb_after.max(global_lb)
                } else {
                    global_lb
                }
            }
        };
        if reported.is_finite() {
            global_lb = global_lb.max(reported);
            observer(BnbEvent::BoundUpdated(global_lb));
        }
    }
}

fn is_fixed(fixings: &[(u32, u8)], var: usize) -> bool {
    fixings.iter().any(|&(v, _)| v as usize == var)
}

fn most_fractional(x: &[f64], binaries: &[usize], int_tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binaries {
        let dist = x[j].min(1.0 - x[j]).max(0.0);
        if dist > int_tol && best.map_or(true, |(_, d)| dist > d) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

fn evaluate_batch(
    model: &MipModel,
    base_lower: &[f64],
    base_upper: &[f64],
    binaries: &[usize],
    batch: &[Node],
    heuristic_mask: &[bool],
    limits: &MipLimits,
) -> Vec<NodeEval> {
    let threads = limits.threads.max(1).min(batch.len());
    if threads <= 1 {
        return batch
            .iter()
            .zip(heuristic_mask)
            .map(|(n, &h)| evaluate_node(model, base_lower, base_upper, binaries, n, h, limits.int_tol))
            .collect();
    }
    let mut slots: Vec<Option<NodeEval>> = (0..batch.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(threads);
        for w in 0..threads {
            let batch = &batch;
            let handle = scope.spawn(move || {
                let mut out = Vec::new();
                let mut idx = w;
                while idx < batch.len() {
                    out.push((
                        idx,
                        evaluate_node(
                            model,
                            base_lower,
                            base_upper,
                            binaries,
                            &batch[idx],
                            heuristic_mask[idx],
                            limits.int_tol,
                        ),
                    ));
                    idx += threads;
                }
                out
            });
            handles.push(handle);
        }
        for handle in handles {
            for (idx, eval) in handle.join().expect("solver worker panicked") {
                slots[idx] = Some(eval);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("missing node evaluation")).collect()
}

fn evaluate_node(
    model: &MipModel,
    base_lower: &[f64],
    base_upper: &[f64],
    binaries: &[usize],
    node: &Node,
    run_heuristic: bool,
    int_tol: f64,
) -> NodeEval {
    let mut lower = base_lower.to_vec();
    let mut upper = base_upper.to_vec();
    for &(var, value) in &node.fixings {
        let v = var as usize;
        lower[v] = lower[v].max(value as f64);
        upper[v] = upper[v].min(value as f64);
    }
    let lp = solve_lp_with_bounds(model, &lower, &upper);

    // Rounding heuristic: fix all binaries and re-solve. Rounding to the
    // nearest integer follows the relaxation; rounding fractional binaries
    // up instead tends to keep big-M implications satisfiable. Both are
    // accelerators only.
    let mut heuristic: Option<(f64, Vec<f64>)> = None;
    if run_heuristic
        && lp.status == LpStatus::Optimal
        && most_fractional(&lp.x, binaries, int_tol).is_some()
    {
        let nearest: Vec<f64> =
            binaries.iter().map(|&j| if lp.x[j] >= 0.5 { 1.0 } else { 0.0 }).collect();
        let upward: Vec<f64> =
            binaries.iter().map(|&j| if lp.x[j] > int_tol { 1.0 } else { 0.0 }).collect();
        let mut profiles = vec![nearest.clone()];
        if upward != nearest {
            profiles.push(upward);
        }
        for profile in profiles {
            let mut hl = lower.clone();
            let mut hu = upper.clone();
            let mut consistent = true;
            for (&j, &value) in binaries.iter().zip(profile.iter()) {
                if value < hl[j] - 0.5 || value > hu[j] + 0.5 {
                    consistent = false;
                    break;
                }
                hl[j] = value;
                hu[j] = value;
            }
            if !consistent {
                continue;
            }
            let hlp = solve_lp_with_bounds(model, &hl, &hu);
            if hlp.status == LpStatus::Optimal
                && heuristic.as_ref().map_or(true, |(best, _)| hlp.objective < *best)
            {
                heuristic = Some((hlp.objective, hlp.x));
            }
        }
    }
    NodeEval { lp, heuristic }
}
