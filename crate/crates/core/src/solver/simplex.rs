//! Bounded-variable revised simplex.
//!
//! Every row `i` gets a logical variable `r_i` equal to its activity, so the
//! working system is `A x - r = 0` with bounds on both `x` and `r`. A cold
//! start uses the all-logical basis and adds one artificial per row whose
//! logical starts out of bounds; phase 1 minimizes the artificials. The dual
//! simplex re-optimizes from a stored basis after bound changes.

use log::{debug, warn};

use crate::formulation::{Comparator, MilpModel};

use super::lu::{BasisFactor, SparseCol};
use super::{SolverError, Tolerances};

const REFACTOR_INTERVAL: usize = 64;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarStatus {
    Basic,
    Lower,
    Upper,
    /// Nonbasic with no finite bound, held at zero.
    Free,
}

/// Snapshot of a basis, sufficient to restart the simplex.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Basis {
    head: Vec<usize>,
    status: Vec<VarStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

enum DualOutcome {
    Optimal,
    Infeasible,
    /// The basis lost dual feasibility in a way bound flips cannot fix.
    NotDualFeasible,
}

pub(crate) struct Simplex {
    n: usize,
    m: usize,
    cols: Vec<SparseCol>,
    rows: Vec<Vec<(usize, f64)>>,
    art_row: Vec<usize>,
    art_sign: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    head: Vec<usize>,
    status: Vec<VarStatus>,
    pos: Vec<usize>,
    x: Vec<f64>,
    factor: Option<BasisFactor>,
    tol: Tolerances,
    pub iterations: usize,
    /// Per-solve cap, counted from `solve_start`.
    max_iterations: usize,
    solve_start: usize,
    refactors: usize,
}

const NOT_BASIC: usize = usize::MAX;

impl Simplex {
    /// Builds the working problem; binaries are relaxed to their bounds.
    pub fn new(model: &MilpModel, tol: Tolerances) -> Self {
        let n = model.variables.len();
        let m = model.constraints.len();
        let mut cols: Vec<SparseCol> = vec![Vec::new(); n];
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut lo = Vec::with_capacity(n + m);
        let mut up = Vec::with_capacity(n + m);
        let mut cost = Vec::with_capacity(n + m);
        for v in &model.variables {
            lo.push(v.lower);
            up.push(v.upper);
            cost.push(v.cost);
        }
        for (i, c) in model.constraints.iter().enumerate() {
            for &(j, a) in &c.coeffs {
                cols[j].push((i, a));
            }
            rows.push(c.coeffs.clone());
            let (l, u) = match c.cmp {
                Comparator::Le => (f64::NEG_INFINITY, c.rhs),
                Comparator::Ge => (c.rhs, f64::INFINITY),
                Comparator::Eq => (c.rhs, c.rhs),
            };
            lo.push(l);
            up.push(u);
            cost.push(0.0);
        }
        let total = n + m;
        Simplex {
            n,
            m,
            cols,
            rows,
            art_row: Vec::new(),
            art_sign: Vec::new(),
            cost,
            lo,
            up,
            head: Vec::new(),
            status: vec![VarStatus::Lower; total],
            pos: vec![NOT_BASIC; total],
            x: vec![0.0; total],
            factor: None,
            tol,
            iterations: 0,
            max_iterations: 50 * (m + n).max(1),
            solve_start: 0,
            refactors: 0,
        }
    }

    fn total(&self) -> usize {
        self.cost.len()
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, up: f64) {
        self.lo[j] = lo;
        self.up[j] = up;
    }

    /// Structural variable values.
    pub fn values(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub fn basis(&self) -> Basis {
        Basis {
            head: self.head.clone(),
            status: self.status.clone(),
        }
    }

    fn for_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for &(r, a) in &self.cols[j] {
                f(r, a);
            }
        } else if j < self.n + self.m {
            f(j - self.n, -1.0);
        } else {
            let k = j - self.n - self.m;
            f(self.art_row[k], self.art_sign[k]);
        }
    }

    fn dot_col(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(r, a)| a * y[r]).sum()
        } else if j < self.n + self.m {
            -y[j - self.n]
        } else {
            let k = j - self.n - self.m;
            self.art_sign[k] * y[self.art_row[k]]
        }
    }

    fn column(&self, j: usize) -> SparseCol {
        let mut c = Vec::new();
        self.for_col(j, |r, a| c.push((r, a)));
        c
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lo[j] == self.up[j]
    }

    /// Value a nonbasic variable takes for its status under current bounds.
    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::Lower => self.lo[j],
            VarStatus::Upper => self.up[j],
            VarStatus::Free => 0.0,
            VarStatus::Basic => self.x[j],
        }
    }

    /// Status for a nonbasic variable that should sit at its lower bound if
    /// possible.
    fn default_status(&self, j: usize) -> VarStatus {
        if self.lo[j].is_finite() {
            VarStatus::Lower
        } else if self.up[j].is_finite() {
            VarStatus::Upper
        } else {
            VarStatus::Free
        }
    }

    fn refactor(&mut self) {
        let cols: Vec<SparseCol> = self.head.iter().map(|&j| self.column(j)).collect();
        let (factor, replacements) = BasisFactor::factorize(self.m, &cols);
        for rep in replacements {
            let old = self.head[rep.pos];
            let logical = self.n + rep.row;
            warn!("singular basis: replacing variable {old} by logical of row {}", rep.row);
            self.status[old] = if self.up[old].is_finite() && (self.x[old] - self.up[old]).abs() < (self.x[old] - self.lo[old]).abs() {
                VarStatus::Upper
            } else {
                self.default_status(old)
            };
            self.pos[old] = NOT_BASIC;
            self.head[rep.pos] = logical;
            self.status[logical] = VarStatus::Basic;
            self.pos[logical] = rep.pos;
        }
        self.factor = Some(factor);
        self.refactors += 1;
        self.compute_basic_values();
    }

    fn factor(&self) -> &BasisFactor {
        self.factor.as_ref().expect("basis factorized")
    }

    /// Places nonbasic variables at their bounds and solves for the basics.
    fn compute_basic_values(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.total() {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v != 0.0 {
                self.for_col(j, |r, a| rhs[r] -= a * v);
            }
        }
        self.factor().ftran(&mut rhs);
        for (p, &j) in self.head.iter().enumerate() {
            self.x[j] = rhs[p];
        }
    }

    fn duals(&self, c: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.head.iter().map(|&j| c[j]).collect();
        self.factor().btran(&mut y);
        y
    }

    fn ftran_col(&self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        self.for_col(j, |r, v| a[r] += v);
        self.factor().ftran(&mut a);
        a
    }

    fn primal_infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lo[j] {
            self.lo[j] - v
        } else if v > self.up[j] {
            v - self.up[j]
        } else {
            0.0
        }
    }

    fn max_basic_infeasibility(&self) -> f64 {
        self.head.iter().map(|&j| self.primal_infeasibility(j)).fold(0.0, f64::max)
    }

    fn check_iterations(&self) -> Result<(), SolverError> {
        if self.iterations - self.solve_start >= self.max_iterations {
            Err(SolverError::IterationLimit {
                iterations: self.iterations - self.solve_start,
            })
        } else {
            Ok(())
        }
    }

    fn pivot(&mut self, r: usize, q: usize, leaving_status: VarStatus, alpha: &[f64]) {
        let leaving = self.head[r];
        self.status[leaving] = leaving_status;
        self.pos[leaving] = NOT_BASIC;
        self.x[leaving] = match leaving_status {
            VarStatus::Lower => self.lo[leaving],
            VarStatus::Upper => self.up[leaving],
            _ => self.x[leaving],
        };
        self.head[r] = q;
        self.status[q] = VarStatus::Basic;
        self.pos[q] = r;
        self.factor.as_mut().expect("basis factorized").update(r, alpha);
        if self.factor().should_refactor(REFACTOR_INTERVAL) {
            self.refactor();
        }
    }

    /// Primal simplex on cost vector `c` from a primal feasible basis.
    fn primal(&mut self, c: &[f64]) -> Result<Outcome, SolverError> {
        let tol_d = self.tol.optimality;
        let tol_p = self.tol.feasibility;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let bland_after = 5 * self.m.max(1);

        loop {
            self.check_iterations()?;
            let y = self.duals(c);

            // Pricing: Dantzig's rule, or the lowest eligible index under Bland.
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.total() {
                let st = self.status[j];
                if st == VarStatus::Basic || self.is_fixed(j) {
                    continue;
                }
                let d = c[j] - self.dot_col(j, &y);
                let eligible = match st {
                    VarStatus::Lower => d < -tol_d,
                    VarStatus::Upper => d > tol_d,
                    VarStatus::Free => d.abs() > tol_d,
                    VarStatus::Basic => false,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.map_or(true, |(_, bd)| d.abs() > bd.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((q, dq)) = entering else {
                return Ok(Outcome::Optimal);
            };
            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.ftran_col(q);

            // Ratio test. Basic i moves at rate -dir * alpha[i].
            let flip = self.up[q] - self.lo[q];
            let mut leave: Option<(usize, f64, VarStatus)> = None;
            if bland {
                let mut best = f64::INFINITY;
                for (i, &a) in alpha.iter().enumerate() {
                    if a.abs() <= PIVOT_TOL {
                        continue;
                    }
                    let j = self.head[i];
                    let rate = -dir * a;
                    let (ratio, st) = if rate < 0.0 {
                        ((self.x[j] - self.lo[j]) / -rate, VarStatus::Lower)
                    } else {
                        ((self.up[j] - self.x[j]) / rate, VarStatus::Upper)
                    };
                    if !ratio.is_finite() {
                        continue;
                    }
                    let ratio = ratio.max(0.0);
                    let better = match leave {
                        None => true,
                        Some((li, _, _)) => ratio < best - 1e-12 || (ratio <= best + 1e-12 && j < self.head[li]),
                    };
                    if better {
                        best = ratio;
                        leave = Some((i, ratio, st));
                    }
                }
            } else {
                let mut theta_max = f64::INFINITY;
                for (i, &a) in alpha.iter().enumerate() {
                    if a.abs() <= PIVOT_TOL {
                        continue;
                    }
                    let j = self.head[i];
                    let rate = -dir * a;
                    let relaxed = if rate < 0.0 {
                        (self.x[j] - self.lo[j] + tol_p) / -rate
                    } else {
                        (self.up[j] + tol_p - self.x[j]) / rate
                    };
                    if relaxed < theta_max {
                        theta_max = relaxed;
                    }
                }
                if theta_max.is_finite() {
                    let mut best_abs = 0.0;
                    for (i, &a) in alpha.iter().enumerate() {
                        if a.abs() <= PIVOT_TOL {
                            continue;
                        }
                        let j = self.head[i];
                        let rate = -dir * a;
                        let (ratio, st) = if rate < 0.0 {
                            ((self.x[j] - self.lo[j]) / -rate, VarStatus::Lower)
                        } else {
                            ((self.up[j] - self.x[j]) / rate, VarStatus::Upper)
                        };
                        if ratio <= theta_max && a.abs() > best_abs {
                            best_abs = a.abs();
                            leave = Some((i, ratio.max(0.0), st));
                        }
                    }
                }
            }

            self.iterations += 1;
            let step_limit = leave.map_or(f64::INFINITY, |(_, t, _)| t);
            if flip.is_finite() && flip <= step_limit {
                // Bound flip, no basis change.
                self.apply_step(q, dir * flip, &alpha);
                self.status[q] = if dir > 0.0 { VarStatus::Upper } else { VarStatus::Lower };
                self.x[q] = if dir > 0.0 { self.up[q] } else { self.lo[q] };
                degenerate_run = 0;
                continue;
            }
            let Some((r, theta, st)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            self.apply_step(q, dir * theta, &alpha);
            if theta <= 1e-12 {
                degenerate_run += 1;
                if !bland && degenerate_run > bland_after {
                    debug!("switching to Bland's rule after {degenerate_run} degenerate pivots");
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, q, st, &alpha);
        }
    }

    fn apply_step(&mut self, q: usize, delta: f64, alpha: &[f64]) {
        if delta == 0.0 {
            return;
        }
        self.x[q] += delta;
        for (i, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let j = self.head[i];
                self.x[j] -= delta * a;
            }
        }
    }

    /// Makes the current basis dual feasible by flipping boxed nonbasics to
    /// the bound their reduced cost prefers.
    fn restore_dual_feasibility(&mut self, c: &[f64]) -> bool {
        let y = self.duals(c);
        let tol_d = self.tol.optimality;
        let mut flipped = false;
        for j in 0..self.total() {
            let st = self.status[j];
            if st == VarStatus::Basic || self.is_fixed(j) {
                continue;
            }
            let d = c[j] - self.dot_col(j, &y);
            match st {
                VarStatus::Lower if d < -tol_d => {
                    if !self.up[j].is_finite() {
                        return false;
                    }
                    self.status[j] = VarStatus::Upper;
                    flipped = true;
                }
                VarStatus::Upper if d > tol_d => {
                    if !self.lo[j].is_finite() {
                        return false;
                    }
                    self.status[j] = VarStatus::Lower;
                    flipped = true;
                }
                VarStatus::Free if d.abs() > tol_d => return false,
                _ => {}
            }
        }
        if flipped {
            self.compute_basic_values();
        }
        true
    }

    /// Dual simplex on cost vector `c` from a dual feasible basis.
    fn dual(&mut self, c: &[f64]) -> Result<DualOutcome, SolverError> {
        let tol_p = self.tol.feasibility;
        let tol_d = self.tol.optimality;
        if !self.restore_dual_feasibility(c) {
            return Ok(DualOutcome::NotDualFeasible);
        }
        let total = self.total();
        let mut d = vec![0.0; total];
        let mut row_alpha = vec![0.0; total];
        let mut rho = vec![0.0; self.m];
        // Reduced costs are updated per pivot and recomputed after each
        // refactorization.
        let mut priced_at = usize::MAX;
        loop {
            self.check_iterations()?;
            if priced_at != self.refactors {
                let y = self.duals(c);
                for j in 0..total {
                    d[j] = if self.status[j] == VarStatus::Basic { 0.0 } else { c[j] - self.dot_col(j, &y) };
                }
                priced_at = self.refactors;
            }

            // Leaving row: largest bound violation, lowest position on ties.
            let mut leave: Option<(usize, f64)> = None;
            for (i, &j) in self.head.iter().enumerate() {
                let inf = self.primal_infeasibility(j);
                if inf > tol_p && leave.map_or(true, |(_, b)| inf > b) {
                    leave = Some((i, inf));
                }
            }
            let Some((r, _)) = leave else {
                return Ok(DualOutcome::Optimal);
            };
            let jr = self.head[r];
            let to_lower = self.x[jr] < self.lo[jr];
            let target = if to_lower { self.lo[jr] } else { self.up[jr] };

            rho.fill(0.0);
            rho[r] = 1.0;
            self.factor().btran(&mut rho);

            // Pivot row entries for nonbasic columns.
            row_alpha.fill(0.0);
            for (i, &ri) in rho.iter().enumerate() {
                if ri == 0.0 {
                    continue;
                }
                for &(j, a) in &self.rows[i] {
                    row_alpha[j] += ri * a;
                }
                row_alpha[self.n + i] = -ri;
            }
            for k in 0..self.art_row.len() {
                let j = self.n + self.m + k;
                row_alpha[j] = self.art_sign[k] * rho[self.art_row[k]];
            }

            // x_r changes by -alpha_rj * dx_j; it must move toward `target`.
            let want = if to_lower { 1.0 } else { -1.0 };
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..self.total() {
                let st = self.status[j];
                if st == VarStatus::Basic || self.is_fixed(j) {
                    continue;
                }
                let a = row_alpha[j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                // Direction j may move: +1 from lower, -1 from upper.
                let ok = match st {
                    VarStatus::Lower => -a * want > 0.0,
                    VarStatus::Upper => a * want > 0.0,
                    VarStatus::Free => true,
                    VarStatus::Basic => false,
                };
                if ok {
                    cands.push((j, d[j], a));
                }
            }
            if cands.is_empty() {
                return Ok(DualOutcome::Infeasible);
            }
            // Harris two-pass on |d_j| / |alpha_rj|.
            let theta_max = cands
                .iter()
                .map(|&(_, d, a)| (d.abs() + tol_d) / a.abs())
                .fold(f64::INFINITY, f64::min);
            let mut best: Option<(usize, f64)> = None;
            for &(j, d, a) in &cands {
                if d.abs() / a.abs() <= theta_max && best.map_or(true, |(_, ba)| a.abs() > ba) {
                    best = Some((j, a.abs()));
                }
            }
            let q = best.expect("candidate within Harris bound").0;
            let theta = d[q] / row_alpha[q];

            let alpha = self.ftran_col(q);
            if alpha[r].abs() <= PIVOT_TOL {
                // Inconsistent with the row computation; rebuild and retry.
                self.refactor();
                self.iterations += 1;
                continue;
            }
            let delta = (self.x[jr] - target) / alpha[r];
            self.iterations += 1;
            self.apply_step(q, delta, &alpha);
            let st = if to_lower { VarStatus::Lower } else { VarStatus::Upper };
            for j in 0..total {
                if self.status[j] != VarStatus::Basic {
                    d[j] -= theta * row_alpha[j];
                }
            }
            d[q] = 0.0;
            d[jr] = -theta;
            self.pivot(r, q, st, &alpha);
        }
    }

    /// Solves from the all-logical basis with an artificial phase 1.
    pub fn solve_cold(&mut self) -> Result<Outcome, SolverError> {
        self.solve_start = self.iterations;
        let base = self.n + self.m;
        self.art_row.clear();
        self.art_sign.clear();
        self.cost.truncate(base);
        self.lo.truncate(base);
        self.up.truncate(base);
        self.status.truncate(base);
        self.pos.truncate(base);
        self.x.truncate(base);

        for j in 0..self.n {
            self.status[j] = self.default_status(j);
            self.pos[j] = NOT_BASIC;
            self.x[j] = self.nonbasic_value(j);
        }
        let mut activity = vec![0.0; self.m];
        for j in 0..self.n {
            let v = self.x[j];
            if v != 0.0 {
                for &(r, a) in &self.cols[j] {
                    activity[r] += a * v;
                }
            }
        }

        self.head = Vec::with_capacity(self.m);
        for i in 0..self.m {
            let l = base - self.m + i;
            let act = activity[i];
            let tol = self.tol.feasibility;
            if act >= self.lo[l] - tol && act <= self.up[l] + tol {
                self.status[l] = VarStatus::Basic;
                self.pos[l] = i;
                self.head.push(l);
            } else {
                let bound = if act < self.lo[l] { self.lo[l] } else { self.up[l] };
                self.status[l] = if act < self.lo[l] { VarStatus::Lower } else { VarStatus::Upper };
                self.pos[l] = NOT_BASIC;
                // act - bound + sign * a = 0 with a >= 0.
                let sign = if bound > act { 1.0 } else { -1.0 };
                let k = self.art_row.len();
                self.art_row.push(i);
                self.art_sign.push(sign);
                let j = base + k;
                self.cost.push(0.0);
                self.lo.push(0.0);
                self.up.push(f64::INFINITY);
                self.status.push(VarStatus::Basic);
                self.pos.push(i);
                self.x.push((bound - act).abs());
                self.head.push(j);
            }
        }
        self.refactor();

        if !self.art_row.is_empty() {
            let mut c1 = vec![0.0; self.total()];
            for c in c1.iter_mut().skip(base) {
                *c = 1.0;
            }
            match self.primal(&c1)? {
                Outcome::Optimal => {}
                // Phase 1 is bounded below by zero.
                other => return Ok(other),
            }
            let worst = (base..self.total()).map(|j| self.x[j]).fold(0.0, f64::max);
            if worst > self.tol.feasibility {
                debug!("phase 1 ended with artificial value {worst:.3e}");
                return Ok(Outcome::Infeasible);
            }
            for j in base..self.total() {
                self.lo[j] = 0.0;
                self.up[j] = 0.0;
                if self.status[j] != VarStatus::Basic {
                    self.status[j] = VarStatus::Lower;
                    self.x[j] = 0.0;
                }
            }
        }

        let c = self.cost.clone();
        match self.primal(&c)? {
            Outcome::Optimal => self.polish(&c),
            other => Ok(other),
        }
    }

    /// Re-optimizes from `basis` after bound changes.
    pub fn solve_warm(&mut self, basis: &Basis) -> Result<Outcome, SolverError> {
        self.solve_start = self.iterations;
        if basis.status.len() != self.total() {
            return self.solve_cold();
        }
        // The factor already matches when re-solving from the basis it was
        // left in, as when diving.
        let reuse = self.factor.is_some() && self.head == basis.head;
        self.head.clone_from(&basis.head);
        self.status.clone_from(&basis.status);
        for p in self.pos.iter_mut() {
            *p = NOT_BASIC;
        }
        for (i, &j) in self.head.iter().enumerate() {
            self.pos[j] = i;
        }
        for j in 0..self.total() {
            match self.status[j] {
                VarStatus::Lower if !self.lo[j].is_finite() => self.status[j] = self.default_status(j),
                VarStatus::Upper if !self.up[j].is_finite() => self.status[j] = self.default_status(j),
                _ => {}
            }
        }
        if reuse {
            self.compute_basic_values();
        } else {
            self.refactor();
        }
        let c = self.cost.clone();
        match self.dual(&c)? {
            DualOutcome::Optimal => self.polish(&c),
            DualOutcome::Infeasible => Ok(Outcome::Infeasible),
            DualOutcome::NotDualFeasible => {
                debug!("warm start not dual feasible; solving cold");
                self.solve_cold()
            }
        }
    }

    /// Refactorizes at the optimum, recomputes values and repairs any drift
    /// beyond the feasibility tolerance.
    fn polish(&mut self, c: &[f64]) -> Result<Outcome, SolverError> {
        for _ in 0..3 {
            self.refactor();
            if self.max_basic_infeasibility() <= self.tol.feasibility {
                // The primal pass may still find improving columns after the
                // fresh factorization.
                match self.primal(c)? {
                    Outcome::Optimal => {}
                    other => return Ok(other),
                }
                if self.max_basic_infeasibility() <= self.tol.feasibility {
                    return Ok(Outcome::Optimal);
                }
            }
            match self.dual(c)? {
                DualOutcome::Optimal => {}
                DualOutcome::Infeasible => return Ok(Outcome::Infeasible),
                DualOutcome::NotDualFeasible => {
                    self.primal(c)?;
                }
            }
        }
        self.refactor();
        if self.max_basic_infeasibility() <= self.tol.feasibility {
            Ok(Outcome::Optimal)
        } else {
            Err(SolverError::Numerical(format!(
                "basic infeasibility {:.3e} after repair",
                self.max_basic_infeasibility()
            )))
        }
    }
}
