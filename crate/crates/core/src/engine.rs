//! End-to-end scenario solves with one optimization per billing month.
//!
//! Demand charges are assessed monthly, so each calendar month is solved as
//! an independent horizon: battery state of charge starts from `soc_init`
//! and must return to it by the month's end. Export prices are built over
//! the full horizon first, which keeps NEM 3.0 averaging independent of the
//! decomposition.

use std::ops::Range;
use std::time::Instant;

use log::{debug, info};

use crate::error::{Error, Result};
use crate::formulation::{
    audit_feasibility, build_milp, compute_bill, extract_dispatch, infer_auxiliaries, AuditReport, BillBreakdown,
    BuildOptions, Dispatch,
};
use crate::policy::{build_export_rules, ExportRules};
use crate::solver::{solve_milp_with, MilpOptions, SolveStatus, Tolerances};
use crate::types::{validate_scenario, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub node_limit: usize,
    pub strict_bes: bool,
    /// Tolerance for the post-solve feasibility audit.
    pub audit_tol: f64,
    pub warm_start: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap_tol: Tolerances::default().relative_gap,
            node_limit: MilpOptions::default().node_limit,
            strict_bes: false,
            audit_tol: 1e-6,
            warm_start: true,
        }
    }
}

impl SolveOptions {
    fn milp(&self) -> MilpOptions {
        let mut o = MilpOptions::default();
        o.tol.relative_gap = self.gap_tol;
        o.node_limit = self.node_limit;
        o.warm_start = self.warm_start;
        o
    }

    fn build(&self) -> BuildOptions {
        BuildOptions {
            strict_bes: self.strict_bes,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MonthResult {
    /// Steps of the full horizon covered by this solve.
    pub range: Range<usize>,
    pub status: SolveStatus,
    /// Solver objective, $.
    pub objective: f64,
    pub bound: f64,
    /// Recomputed from the dispatch; zero when there is none.
    pub bill: BillBreakdown,
    pub audit: AuditReport,
    /// Peak net demand per demand period.
    pub d_max: Vec<f64>,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub binaries: usize,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    /// Optimal only if every month is; otherwise the first other status.
    pub status: SolveStatus,
    /// Sum of monthly solver objectives.
    pub objective: f64,
    /// Sum of monthly recomputed bills.
    pub bill: BillBreakdown,
    /// Full-horizon dispatch when every month produced values.
    pub dispatch: Option<Dispatch>,
    pub rules: ExportRules,
    pub months: Vec<MonthResult>,
    pub wall_ms: f64,
}

impl ScenarioResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Every monthly audit passed.
    pub fn audit_passed(&self) -> bool {
        self.months.iter().all(|m| m.audit.is_feasible())
    }
}

fn check(s: &Scenario) -> Result<()> {
    let v = validate_scenario(s);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(v))
    }
}

/// Billing-month ranges of the scenario horizon; the whole horizon when the
/// calendar is empty.
pub fn billing_ranges(s: &Scenario) -> Vec<Range<usize>> {
    if s.calendar.is_empty() {
        vec![0..s.horizon()]
    } else {
        s.calendar.billing_months()
    }
}

/// Validates `s` and solves each billing month.
pub fn solve_scenario(s: &Scenario, opts: &SolveOptions) -> Result<ScenarioResult> {
    check(s)?;
    let started = Instant::now();
    let rules = build_export_rules(s)?;
    let milp_opts = opts.milp();
    let mut months = Vec::new();
    let mut dispatch: Option<Dispatch> = Some(Dispatch::zeros(0, 0));
    let mut status = SolveStatus::Optimal;
    let mut objective = 0.0;
    let mut bill = BillBreakdown::default();

    for range in billing_ranges(s) {
        let sub = s.slice(range.clone());
        let sub_rules = rules.slice(range.clone());
        let model = build_milp(&sub, &sub_rules, &opts.build());
        let raw = solve_milp_with(&model, &milp_opts)?;
        let sol = extract_dispatch(&model, &raw)?;
        debug!(
            "month {:?}: {} after {} nodes, objective {:.6}, {} binaries",
            range,
            raw.status,
            raw.nodes,
            raw.objective,
            model.num_binaries()
        );
        let (month_bill, audit, d_max) = match &sol.values {
            Some(d) => (
                compute_bill(d, &sub, &sub_rules),
                audit_feasibility(d, &model, opts.audit_tol),
                d.d_max.clone(),
            ),
            None => (BillBreakdown::default(), AuditReport::default(), Vec::new()),
        };
        if status == SolveStatus::Optimal && raw.status != SolveStatus::Optimal {
            status = raw.status;
        }
        match (&mut dispatch, &sol.values) {
            (Some(acc), Some(d)) => acc.extend(d),
            _ => dispatch = None,
        }
        objective += raw.objective;
        bill += month_bill;
        months.push(MonthResult {
            range,
            status: raw.status,
            objective: raw.objective,
            bound: raw.bound,
            bill: month_bill,
            audit,
            d_max,
            nodes: raw.nodes,
            lp_iterations: raw.lp_iterations,
            binaries: model.num_binaries(),
        });
    }
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    info!("scenario solved: {status}, net bill {:.4} in {wall_ms:.1} ms", bill.net_bill);
    Ok(ScenarioResult {
        status,
        objective,
        bill,
        dispatch,
        rules,
        months,
        wall_ms,
    })
}

/// Re-checks an externally supplied full-horizon dispatch month by month.
/// Period maxima and export indicators are inferred from the dispatch.
/// Returns the bill and one audit report per billing month.
pub fn audit_dispatch(
    s: &Scenario,
    d: &Dispatch,
    opts: &SolveOptions,
) -> Result<(BillBreakdown, Vec<(Range<usize>, AuditReport)>)> {
    check(s)?;
    if d.horizon() != s.horizon() {
        return Err(Error::Alignment {
            what: "dispatch".into(),
            expected: s.horizon(),
            found: d.horizon(),
        });
    }
    let rules = build_export_rules(s)?;
    let mut bill = BillBreakdown::default();
    let mut reports = Vec::new();
    for range in billing_ranges(s) {
        let sub = s.slice(range.clone());
        let sub_rules = rules.slice(range.clone());
        let model = build_milp(&sub, &sub_rules, &opts.build());
        let mut part = d.slice(range.clone());
        infer_auxiliaries(&mut part, &model, &sub, opts.audit_tol);
        bill += compute_bill(&part, &sub, &sub_rules);
        reports.push((range, audit_feasibility(&part, &model, opts.audit_tol)));
    }
    Ok((bill, reports))
}
