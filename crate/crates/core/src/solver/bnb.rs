//! Branch-and-bound over the binary variables: depth-first plunges from the
//! best-bound open node, seeded by a rounding heuristic at the root.
//! Branching uses pseudo-costs, initialized by strong branching until each
//! direction has a few observations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;

use log::debug;

use crate::formulation::MilpModel;

use super::simplex::{Basis, Outcome, Simplex};
use super::{solve_lp_with, LpStatus, MilpSolution, SolveStatus, SolverError, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MilpOptions {
    pub tol: Tolerances,
    pub node_limit: usize,
    /// Re-optimize child nodes with the dual simplex from the parent basis
    /// instead of solving each node from scratch.
    pub warm_start: bool,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            tol: Tolerances::default(),
            node_limit: 20_000,
            warm_start: true,
        }
    }
}

/// Most-fractional branching: index of the value farthest from an integer,
/// lowest index on ties. `None` when every value is integral within `int_tol`.
pub fn branch_select(values: &[f64], int_tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        let dist = (v - v.floor()).min(v.ceil() - v);
        if dist > int_tol && best.map_or(true, |(_, b)| dist > b) {
            best = Some((i, dist));
        }
    }
    best.map(|(i, _)| i)
}

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    /// (variable id, fixed value)
    fixings: Vec<(usize, f64)>,
    basis: Rc<Basis>,
    /// (binary index, branched up, distance moved, parent objective)
    origin: Option<(usize, bool, f64, f64)>,
}

/// Strong-branch until a direction has this many observations.
const RELIABLE: u32 = 4;
/// Strong-branch candidates per node.
const LOOKAHEAD: usize = 8;

/// Per-unit objective gains observed when branching down and up.
struct PseudoCosts {
    sum: Vec<[f64; 2]>,
    count: Vec<[u32; 2]>,
}

impl PseudoCosts {
    fn new(n: usize) -> Self {
        PseudoCosts {
            sum: vec![[0.0; 2]; n],
            count: vec![[0; 2]; n],
        }
    }

    fn record(&mut self, k: usize, up: bool, dist: f64, gain: f64) {
        if dist > 1e-9 && gain.is_finite() {
            let d = up as usize;
            self.sum[k][d] += gain.max(0.0) / dist;
            self.count[k][d] += 1;
        }
    }

    fn estimate(&self, k: usize, up: bool) -> f64 {
        let d = up as usize;
        if self.count[k][d] > 0 {
            return self.sum[k][d] / self.count[k][d] as f64;
        }
        let (s, c) = self
            .sum
            .iter()
            .zip(&self.count)
            .fold((0.0, 0u32), |(s, c), (x, n)| (s + x[d], c + n[d]));
        if c > 0 {
            s / c as f64
        } else {
            1.0
        }
    }

    fn reliable(&self, k: usize) -> bool {
        self.count[k][0] >= RELIABLE && self.count[k][1] >= RELIABLE
    }
}

fn score(down: f64, up: f64) -> f64 {
    down.max(1e-6) * up.max(1e-6)
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: lowest bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    values: Vec<f64>,
    objective: f64,
}

/// Branch-and-bound with the given relative gap tolerance and node limit.
pub fn solve_milp(m: &MilpModel, gap_tol: f64, node_limit: usize) -> Result<MilpSolution, SolverError> {
    let mut opts = MilpOptions::default();
    opts.tol.relative_gap = gap_tol;
    opts.node_limit = node_limit;
    solve_milp_with(m, &opts)
}

pub fn solve_milp_with(m: &MilpModel, opts: &MilpOptions) -> Result<MilpSolution, SolverError> {
    let binaries: Vec<usize> = m.binaries().collect();
    if binaries.is_empty() {
        let lp = solve_lp_with(m, opts.tol)?;
        let status = match lp.status {
            LpStatus::Optimal => SolveStatus::Optimal,
            LpStatus::Infeasible => SolveStatus::Infeasible,
            LpStatus::Unbounded => SolveStatus::Unbounded,
        };
        return Ok(MilpSolution {
            status,
            bound: lp.objective,
            objective: lp.objective,
            values: lp.values,
            nodes: 1,
            lp_iterations: lp.iterations,
        });
    }

    let tol = opts.tol;
    let root_bounds: Vec<(f64, f64)> = binaries.iter().map(|&j| (m.variables[j].lower, m.variables[j].upper)).collect();
    let mut sx = Simplex::new(m, tol);
    let mut incumbent: Option<Incumbent> = None;
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut seq = 0usize;
    let mut nodes = 0usize;
    let mut pc = PseudoCosts::new(binaries.len());

    let prune_threshold = |inc: &Option<Incumbent>| -> f64 {
        match inc {
            Some(i) => i.objective - tol.relative_gap * i.objective.abs().max(1.0),
            None => f64::INFINITY,
        }
    };

    // Root.
    nodes += 1;
    match sx.solve_cold()? {
        Outcome::Optimal => {}
        Outcome::Infeasible => return Ok(finish(SolveStatus::Infeasible, None, f64::INFINITY, nodes, sx.iterations)),
        Outcome::Unbounded => {
            return Ok(finish(SolveStatus::Unbounded, None, f64::NEG_INFINITY, nodes, sx.iterations));
        }
    }
    let root_obj = sx.objective();
    let root_values = sx.values();
    let mut open_bound: Option<f64> = None;
    let mut dive = evaluate(
        &mut sx,
        &binaries,
        &root_bounds,
        Vec::new(),
        0,
        root_obj,
        &tol,
        &mut incumbent,
        &mut heap,
        &mut seq,
        &mut pc,
        opts.warm_start,
    )?;
    if dive.is_some() {
        let rounded: Vec<f64> = binaries.iter().map(|&j| root_values[j].round()).collect();
        let zeros = vec![0.0; binaries.len()];
        for guess in [rounded, zeros] {
            try_assignment(&mut sx, &binaries, &root_bounds, &guess, opts.warm_start, &mut incumbent)?;
        }
    }

    let mut status = SolveStatus::Optimal;
    loop {
        let node = match dive.take() {
            Some(n) if n.bound < prune_threshold(&incumbent) => n,
            // A pruned plunge child is dropped; its bound cannot beat the
            // incumbent.
            _ => {
                let Some(top) = heap.peek() else { break };
                if top.bound >= prune_threshold(&incumbent) {
                    // Best-bound order: every open node is dominated.
                    open_bound = Some(top.bound);
                    break;
                }
                heap.pop().expect("peeked")
            }
        };
        if nodes >= opts.node_limit {
            let best_open = heap.peek().map_or(node.bound, |t| t.bound.min(node.bound));
            open_bound = Some(best_open);
            status = SolveStatus::GapLimit;
            break;
        }
        nodes += 1;
        if nodes % 1000 == 0 {
            let best_open = heap.peek().map_or(node.bound, |t| t.bound.min(node.bound));
            debug!(
                "{nodes} nodes, {} open, bound {best_open:.6}, incumbent {:.6}",
                heap.len(),
                incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective)
            );
        }

        apply_fixings(&mut sx, &binaries, &root_bounds, &node.fixings);
        let outcome = if opts.warm_start {
            sx.solve_warm(&node.basis)?
        } else {
            sx.solve_cold()?
        };
        if let Some((k, up, dist, parent)) = node.origin {
            let gain = if outcome == Outcome::Optimal { sx.objective() - parent } else { f64::INFINITY };
            pc.record(k, up, dist, gain);
        }
        if outcome != Outcome::Optimal {
            continue;
        }
        let obj = sx.objective().max(node.bound);
        if obj >= prune_threshold(&incumbent) {
            continue;
        }
        dive = evaluate(
            &mut sx,
            &binaries,
            &root_bounds,
            node.fixings,
            node.depth,
            obj,
            &tol,
            &mut incumbent,
            &mut heap,
            &mut seq,
            &mut pc,
            opts.warm_start,
        )?;
    }

    let bound = match (&incumbent, open_bound) {
        (Some(inc), Some(b)) => b.min(inc.objective),
        (Some(inc), None) => inc.objective,
        (None, Some(b)) => b,
        (None, None) => f64::INFINITY,
    };
    let status = match (&incumbent, status) {
        (None, SolveStatus::Optimal) => SolveStatus::Infeasible,
        (_, s) => s,
    };
    debug!("branch-and-bound: {nodes} nodes, {} LP iterations, status {status}", sx.iterations);
    Ok(finish(status, incumbent, bound, nodes, sx.iterations))
}

fn finish(status: SolveStatus, inc: Option<Incumbent>, bound: f64, nodes: usize, iterations: usize) -> MilpSolution {
    let (values, objective) = match inc {
        Some(i) => (i.values, i.objective),
        None => (Vec::new(), f64::INFINITY),
    };
    MilpSolution {
        status,
        values,
        objective,
        bound: if objective.is_finite() { bound.min(objective) } else { bound },
        nodes,
        lp_iterations: iterations,
    }
}

fn apply_fixings(sx: &mut Simplex, binaries: &[usize], root: &[(f64, f64)], fixings: &[(usize, f64)]) {
    for (&j, &(lo, up)) in binaries.iter().zip(root) {
        sx.set_bounds(j, lo, up);
    }
    for &(j, v) in fixings {
        sx.set_bounds(j, v, v);
    }
}

/// Handles a node whose relaxation was just solved: records an incumbent when
/// the binaries are integral, otherwise queues the child on the far side of
/// the rounding and returns the near one for immediate processing.
#[allow(clippy::too_many_arguments)]
fn evaluate(
    sx: &mut Simplex,
    binaries: &[usize],
    root: &[(f64, f64)],
    fixings: Vec<(usize, f64)>,
    depth: usize,
    obj: f64,
    tol: &Tolerances,
    incumbent: &mut Option<Incumbent>,
    heap: &mut BinaryHeap<Node>,
    seq: &mut usize,
    pc: &mut PseudoCosts,
    warm: bool,
) -> Result<Option<Node>, SolverError> {
    let values = sx.values();
    let bin_vals: Vec<f64> = binaries.iter().map(|&j| values[j]).collect();
    let selected = match branch_select(&bin_vals, tol.integrality) {
        None => None,
        Some(_) => select(sx, binaries, root, &fixings, &bin_vals, obj, tol, pc, warm)?,
    };
    if matches!(selected, Some(None)) {
        // Both strong-branch children infeasible.
        return Ok(None);
    }
    match selected.flatten() {
        None => {
            // Fix the rounded binaries and re-solve so the recorded solution
            // satisfies the indicator rows exactly.
            let basis = sx.basis();
            let rounded: Vec<(usize, f64)> = binaries.iter().zip(&bin_vals).map(|(&j, &v)| (j, v.round())).collect();
            apply_fixings(sx, binaries, root, &rounded);
            let outcome = if warm { sx.solve_warm(&basis)? } else { sx.solve_cold()? };
            let (vals, obj) = if outcome == Outcome::Optimal {
                let mut v = sx.values();
                for &(j, r) in &rounded {
                    v[j] = r;
                }
                let o = sx.objective();
                (v, o)
            } else {
                (values, obj)
            };
            if incumbent.as_ref().map_or(true, |i| obj < i.objective) {
                debug!("new incumbent {obj:.6} at depth {depth}");
                *incumbent = Some(Incumbent { values: vals, objective: obj });
            }
        }
        Some((k, basis, child_bounds)) => {
            let basis = Rc::new(basis);
            let var = binaries[k];
            let v = bin_vals[k];
            let mut child = |value: f64| {
                let mut f = fixings.clone();
                f.push((var, value));
                *seq += 1;
                let up = value > 0.5;
                Node {
                    bound: obj.max(child_bounds[up as usize]),
                    depth: depth + 1,
                    seq: *seq,
                    fixings: f,
                    basis: Rc::clone(&basis),
                    origin: Some((k, up, (value - v).abs(), obj)),
                }
            };
            let near = v.round();
            let (mut a, mut b) = (child(near), child(1.0 - near));
            if b.bound < a.bound {
                std::mem::swap(&mut a, &mut b);
            }
            if b.bound.is_finite() {
                heap.push(b);
            }
            return Ok(Some(a));
        }
    }
    Ok(None)
}

type Choice = (usize, Basis, [f64; 2]);

/// Picks the branching binary at a node whose relaxation is loaded in `sx`.
/// Returns `Some(None)` when strong branching proves the node infeasible.
/// Leaves `sx` with arbitrary bounds; callers restore them from fixings.
#[allow(clippy::too_many_arguments)]
fn select(
    sx: &mut Simplex,
    binaries: &[usize],
    root: &[(f64, f64)],
    fixings: &[(usize, f64)],
    bin_vals: &[f64],
    obj: f64,
    tol: &Tolerances,
    pc: &mut PseudoCosts,
    warm: bool,
) -> Result<Option<Option<Choice>>, SolverError> {
    let basis = sx.basis();
    let mut frac: Vec<usize> = (0..bin_vals.len())
        .filter(|&k| {
            let v = bin_vals[k];
            (v - v.floor()).min(v.ceil() - v) > tol.integrality
        })
        .collect();
    frac.sort_by(|&a, &b| {
        let da = (bin_vals[a] - 0.5).abs();
        let db = (bin_vals[b] - 0.5).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    let mut best: Option<(usize, f64, [f64; 2])> = None;
    let mut probed = 0;
    for &k in &frac {
        let v = bin_vals[k];
        let mut bounds = [f64::NEG_INFINITY; 2];
        let s = if !pc.reliable(k) && probed < LOOKAHEAD {
            probed += 1;
            for (d, value) in [0.0, 1.0].into_iter().enumerate() {
                let mut f = fixings.to_vec();
                f.push((binaries[k], value));
                apply_fixings(sx, binaries, root, &f);
                let outcome = if warm { sx.solve_warm(&basis)? } else { sx.solve_cold()? };
                let o = if outcome == Outcome::Optimal { sx.objective() } else { f64::INFINITY };
                pc.record(k, d == 1, (value - v).abs(), o - obj);
                bounds[d] = o;
            }
            if bounds[0].is_infinite() && bounds[1].is_infinite() {
                return Ok(Some(None));
            }
            score((bounds[0] - obj).min(1e12), (bounds[1] - obj).min(1e12))
        } else {
            score(pc.estimate(k, false) * v, pc.estimate(k, true) * (1.0 - v))
        };
        if best.as_ref().map_or(true, |b| s > b.1) {
            best = Some((k, s, bounds));
        }
    }
    Ok(Some(best.map(|(k, _, b)| (k, basis, b))))
}

/// Fixes every binary to `assignment`, solves the remaining LP and keeps the
/// result if it improves the incumbent.
fn try_assignment(
    sx: &mut Simplex,
    binaries: &[usize],
    root: &[(f64, f64)],
    assignment: &[f64],
    warm: bool,
    incumbent: &mut Option<Incumbent>,
) -> Result<(), SolverError> {
    let basis = sx.basis();
    let fixings: Vec<(usize, f64)> = binaries.iter().copied().zip(assignment.iter().copied()).collect();
    apply_fixings(sx, binaries, root, &fixings);
    let outcome = if warm { sx.solve_warm(&basis)? } else { sx.solve_cold()? };
    if outcome != Outcome::Optimal {
        return Ok(());
    }
    let obj = sx.objective();
    if incumbent.as_ref().map_or(true, |i| obj < i.objective) {
        debug!("heuristic incumbent {obj:.6}");
        let mut values = sx.values();
        for &(j, v) in &fixings {
            values[j] = v;
        }
        *incumbent = Some(Incumbent { values, objective: obj });
    }
    Ok(())
}
