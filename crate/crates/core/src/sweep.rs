//! Scenario grids: cross products of PV size, battery, flexibility and policy
//! axes, solved in parallel and reported relative to a no-NEM baseline.

use std::fmt;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{solve_scenario, ScenarioResult, SolveOptions};
use crate::error::{Error, Result};
use crate::formulation::BillBreakdown;
use crate::solver::SolveStatus;
use crate::types::{
    validate_scenario, BesScheme, BesSpec, FlexSpec, NemPolicy, PolicyKind, PvSpec, Scenario, TimeSeries,
    NEM2_NON_BYPASSABLE_CHARGE,
};

/// Which bill each row is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineRule {
    /// Same PV size, no battery or flexibility, no NEM.
    #[default]
    SamePvNoNem,
    /// PV sized at the maximum demand alone, no NEM.
    PvOnlyNoNem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BesAxes {
    /// Rated power as a fraction of maximum demand.
    pub power_ratio: Vec<f64>,
    pub duration_hours: Vec<f64>,
    pub scheme: Vec<BesScheme>,
    pub round_trip_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlexAxes {
    pub fraction: Vec<f64>,
    pub recovery_hours: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Supplies demand, PV capacity factor, tariff, calendar and inverter
    /// efficiency. Its own assets and policy are replaced per point.
    pub base: Scenario,
    /// Avoided costs, required when `policy` lists NEM 3.0.
    pub acc: Option<TimeSeries>,
    pub nbc: f64,
    /// PV rating as a fraction of maximum demand.
    pub pv_ratio: Vec<f64>,
    /// `None` sweeps without a battery.
    pub bes: Option<BesAxes>,
    /// `None` sweeps without flexible demand.
    pub flex: Option<FlexAxes>,
    pub policy: Vec<PolicyKind>,
    pub baseline: BaselineRule,
}

impl SweepConfig {
    pub fn new(base: Scenario, pv_ratio: Vec<f64>, policy: Vec<PolicyKind>) -> Self {
        let acc = match &base.policy {
            NemPolicy::Nem3 { acc_hourly } => Some(acc_hourly.clone()),
            _ => None,
        };
        SweepConfig {
            base,
            acc,
            nbc: NEM2_NON_BYPASSABLE_CHARGE,
            pv_ratio,
            bes: None,
            flex: None,
            policy,
            baseline: BaselineRule::SamePvNoNem,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesPoint {
    pub power_ratio: f64,
    pub duration_hours: f64,
    pub scheme: BesScheme,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlexPoint {
    pub fraction: f64,
    pub recovery_hours: usize,
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub pv_ratio: f64,
    pub bes: Option<BesPoint>,
    pub flex: Option<FlexPoint>,
    pub policy: PolicyKind,
}

impl fmt::Display for SweepPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pv_ratio={}", self.pv_ratio)?;
        if let Some(b) = self.bes {
            write!(f, " bes_power_ratio={} duration={}h scheme={}", b.power_ratio, b.duration_hours, b.scheme)?;
        }
        if let Some(x) = self.flex {
            write!(f, " flex_fraction={} recovery={}h", x.fraction, x.recovery_hours)?;
        }
        write!(f, " policy={}", self.policy)
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(Error::Config(format!("sweep axis `{name}` is empty")))
    } else {
        Ok(())
    }
}

fn nonneg(name: &str, v: &[f64]) -> Result<()> {
    nonempty(name, v)?;
    match v.iter().find(|x| !x.is_finite() || **x < 0.0) {
        Some(x) => Err(Error::Config(format!("sweep axis `{name}` has invalid value {x}"))),
        None => Ok(()),
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let v = validate_scenario(&self.base);
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        nonneg("pv_ratio", &self.pv_ratio)?;
        nonempty("policy", &self.policy)?;
        if let Some(b) = &self.bes {
            nonneg("bes_power_ratio", &b.power_ratio)?;
            nonneg("bes_duration_hours", &b.duration_hours)?;
            nonempty("scheme", &b.scheme)?;
        }
        if let Some(x) = &self.flex {
            nonneg("flex_fraction", &x.fraction)?;
            nonempty("recovery_hours", &x.recovery_hours)?;
        }
        if self.policy.contains(&PolicyKind::Nem3) && self.acc.is_none() {
            return Err(Error::Config("policy nem3 requires an avoided-cost series".into()));
        }
        Ok(())
    }

    /// Grid points in lexicographic axis order: PV ratio, battery power,
    /// duration, scheme, flex fraction, recovery period, policy.
    pub fn points(&self) -> Vec<SweepPoint> {
        let bes: Vec<Option<BesPoint>> = match &self.bes {
            None => vec![None],
            Some(b) => {
                let mut v = Vec::new();
                for &power_ratio in &b.power_ratio {
                    for &duration_hours in &b.duration_hours {
                        for &scheme in &b.scheme {
                            v.push(Some(BesPoint {
                                power_ratio,
                                duration_hours,
                                scheme,
                            }));
                        }
                    }
                }
                v
            }
        };
        let flex: Vec<Option<FlexPoint>> = match &self.flex {
            None => vec![None],
            Some(x) => x
                .fraction
                .iter()
                .flat_map(|&fraction| {
                    x.recovery_hours.iter().map(move |&recovery_hours| {
                        Some(FlexPoint {
                            fraction,
                            recovery_hours,
                        })
                    })
                })
                .collect(),
        };
        let mut out = Vec::new();
        for &pv_ratio in &self.pv_ratio {
            for b in &bes {
                for x in &flex {
                    for &policy in &self.policy {
                        out.push(SweepPoint {
                            pv_ratio,
                            bes: *b,
                            flex: *x,
                            policy,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn policy(&self, kind: PolicyKind) -> Result<NemPolicy> {
        Ok(match kind {
            PolicyKind::NoNem => NemPolicy::NoNem,
            PolicyKind::Nem1 => NemPolicy::Nem1,
            PolicyKind::Nem2 => NemPolicy::Nem2 { nbc: self.nbc },
            PolicyKind::Nem3 => NemPolicy::Nem3 {
                acc_hourly: self
                    .acc
                    .clone()
                    .ok_or_else(|| Error::Config("policy nem3 requires an avoided-cost series".into()))?,
            },
        })
    }

    /// The scenario solved at `p`. PV and battery ratings scale with the base
    /// profile's maximum demand.
    pub fn scenario_for(&self, p: &SweepPoint) -> Result<Scenario> {
        let peak = self.base.max_demand();
        let rte = self.bes.as_ref().map_or(1.0, |b| b.round_trip_efficiency);
        let mut s = self.base.clone();
        s.pv = PvSpec::new(p.pv_ratio * peak, self.base.pv.inverter_efficiency);
        s.bes = p
            .bes
            .map(|b| BesSpec::new(b.power_ratio * peak, b.duration_hours, rte, b.scheme));
        s.flex = p.flex.map(|x| FlexSpec::new(x.fraction, x.recovery_hours));
        s.policy = self.policy(p.policy)?;
        Ok(s)
    }

    /// Baseline point for `p` under the configured rule.
    pub fn baseline_point(&self, p: &SweepPoint) -> SweepPoint {
        SweepPoint {
            pv_ratio: match self.baseline {
                BaselineRule::SamePvNoNem => p.pv_ratio,
                BaselineRule::PvOnlyNoNem => 1.0,
            },
            bes: None,
            flex: None,
            policy: PolicyKind::NoNem,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Solved(SolveStatus),
    /// Validation or solver error; the message is in [`ResultRow::error`].
    Error,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Solved(s) => s.as_str(),
            RowStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResultRow {
    pub point: SweepPoint,
    /// Recomputed bill; `None` without a dispatch.
    pub bill: Option<BillBreakdown>,
    /// Net bill over the baseline net bill; `None` when undefined (zero or
    /// missing baseline).
    pub relative_bill: Option<f64>,
    pub status: RowStatus,
    pub wall_ms: f64,
    pub error: Option<String>,
    /// Added only to serve as a baseline; not part of the configured grid.
    pub baseline_only: bool,
    pub result: Option<ScenarioResult>,
}

impl ResultRow {
    pub fn net_bill(&self) -> Option<f64> {
        self.bill.map(|b| b.net_bill)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub solve: SolveOptions,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    /// Keep each point's full result (dispatch, audits) in its row.
    pub keep_results: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solve: SolveOptions::default(),
            jobs: 0,
            keep_results: false,
        }
    }
}

fn solve_point(cfg: &SweepConfig, p: &SweepPoint, opts: &SweepOptions, baseline_only: bool) -> ResultRow {
    let outcome = cfg.scenario_for(p).and_then(|s| solve_scenario(&s, &opts.solve));
    match outcome {
        Ok(r) => {
            let bill = r.dispatch.as_ref().map(|_| r.bill);
            if !r.is_optimal() {
                warn!("{p}: {}", r.status);
            }
            ResultRow {
                point: *p,
                bill,
                relative_bill: None,
                status: RowStatus::Solved(r.status),
                wall_ms: r.wall_ms,
                error: None,
                baseline_only,
                result: opts.keep_results.then_some(r),
            }
        }
        Err(e) => {
            warn!("{p}: {e}");
            ResultRow {
                point: *p,
                bill: None,
                relative_bill: None,
                status: RowStatus::Error,
                wall_ms: 0.0,
                error: Some(e.to_string()),
                baseline_only,
                result: None,
            }
        }
    }
}

/// Solves every grid point, plus any baseline point the grid lacks (appended
/// after the grid rows, flagged `baseline_only`). Point failures are recorded
/// in their rows. Row order and contents do not depend on `jobs`.
pub fn run_sweep(cfg: &SweepConfig, opts: &SweepOptions) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let grid = cfg.points();
    let mut extra: Vec<SweepPoint> = Vec::new();
    for p in &grid {
        let b = cfg.baseline_point(p);
        if !grid.contains(&b) && !extra.contains(&b) {
            extra.push(b);
        }
    }
    let work: Vec<(SweepPoint, bool)> = grid
        .into_iter()
        .map(|p| (p, false))
        .chain(extra.into_iter().map(|p| (p, true)))
        .collect();
    info!("sweep: {} points", work.len());

    let mut builder = rayon::ThreadPoolBuilder::new();
    if opts.jobs > 0 {
        builder = builder.num_threads(opts.jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut rows: Vec<ResultRow> = pool.install(|| {
        work.par_iter()
            .map(|(p, extra)| solve_point(cfg, p, opts, *extra))
            .collect()
    });

    let baselines = compute_baseline(cfg, &rows)?;
    for (row, base) in rows.iter_mut().zip(baselines) {
        row.relative_bill = match (row.net_bill(), base) {
            (Some(b), Some(base)) if base != 0.0 => Some(b / base),
            _ => None,
        };
    }
    Ok(rows)
}

/// Baseline net bill for each row (`None` when the baseline point failed to
/// solve). Errors name the first baseline point absent from `rows`.
pub fn compute_baseline(cfg: &SweepConfig, rows: &[ResultRow]) -> Result<Vec<Option<f64>>> {
    rows.iter()
        .map(|r| {
            let b = cfg.baseline_point(&r.point);
            rows.iter()
                .find(|x| x.point == b)
                .map(|x| x.net_bill())
                .ok_or_else(|| Error::MissingBaseline(b.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::tests::day_scenario;

    fn solar_cfg() -> SweepConfig {
        SweepConfig::new(
            day_scenario(),
            vec![0.0, 0.5, 1.0, 1.5],
            vec![PolicyKind::Nem1, PolicyKind::Nem2, PolicyKind::NoNem],
        )
    }

    #[test]
    fn grid_is_lexicographic() {
        let mut cfg = solar_cfg();
        cfg.bes = Some(BesAxes {
            power_ratio: vec![0.0, 0.5],
            duration_hours: vec![2.0],
            scheme: vec![BesScheme::GridChargeNoBesExport, BesScheme::GridChargeWithExport],
            round_trip_efficiency: 0.85,
        });
        let pts = cfg.points();
        assert_eq!(pts.len(), 4 * 2 * 2 * 3);
        assert_eq!(pts[0].policy, PolicyKind::Nem1);
        assert_eq!(pts[1].policy, PolicyKind::Nem2);
        assert_eq!(pts[3].bes.unwrap().scheme, BesScheme::GridChargeWithExport);
        assert_eq!(pts[6].bes.unwrap().power_ratio, 0.5);
        assert_eq!(pts[12].pv_ratio, 0.5);
    }

    #[test]
    fn ratings_scale_with_peak() {
        let cfg = solar_cfg();
        let p = cfg.points()[8];
        let s = cfg.scenario_for(&p).unwrap();
        assert_eq!(p.pv_ratio, 1.0);
        assert_eq!(s.pv.rated_power, cfg.base.max_demand());
    }

    #[test]
    fn solar_sweep_relative_bills() {
        let cfg = solar_cfg();
        let rows = run_sweep(&cfg, &SweepOptions::default()).unwrap();
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| !r.baseline_only));
        for r in &rows {
            assert_eq!(r.status, RowStatus::Solved(SolveStatus::Optimal), "{}", r.point);
            if r.point.policy == PolicyKind::NoNem {
                assert_eq!(r.relative_bill, Some(1.0));
            }
        }
        // Row 4 is (0.5, nem2); its baseline is (0.5, no_nem).
        let base = compute_baseline(&cfg, &rows).unwrap();
        assert_eq!(base[4], rows[5].net_bill());
    }

    #[test]
    fn missing_baseline_is_named() {
        let cfg = solar_cfg();
        let mut rows = run_sweep(&cfg, &SweepOptions::default()).unwrap();
        rows.retain(|r| r.point.policy != PolicyKind::NoNem);
        let err = compute_baseline(&cfg, &rows).unwrap_err();
        assert!(err.to_string().contains("pv_ratio=0 policy=no_nem"), "{err}");
    }

    #[test]
    fn pv_only_baseline_is_appended() {
        let mut cfg = solar_cfg();
        cfg.pv_ratio = vec![1.0];
        cfg.policy = vec![PolicyKind::Nem2];
        cfg.baseline = BaselineRule::PvOnlyNoNem;
        cfg.bes = Some(BesAxes {
            power_ratio: vec![0.5],
            duration_hours: vec![2.0],
            scheme: vec![BesScheme::GridChargeWithExport],
            round_trip_efficiency: 0.85,
        });
        let rows = run_sweep(&cfg, &SweepOptions::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].baseline_only);
        assert_eq!(rows[1].relative_bill, Some(1.0));
        let rel = rows[0].net_bill().unwrap() / rows[1].net_bill().unwrap();
        assert_eq!(rows[0].relative_bill, Some(rel));
    }

    #[test]
    fn failures_stay_in_row() {
        let mut cfg = solar_cfg();
        cfg.policy = vec![PolicyKind::Nem1, PolicyKind::NoNem];
        cfg.flex = Some(FlexAxes {
            fraction: vec![0.1],
            recovery_hours: vec![1000],
        });
        let rows = run_sweep(&cfg, &SweepOptions::default()).unwrap();
        let errs = rows.iter().filter(|r| r.status == RowStatus::Error).count();
        assert_eq!(errs, 8);
        assert!(rows[0].error.as_ref().unwrap().contains("recovery_period"));
    }

    #[test]
    fn jobs_do_not_change_rows() {
        let cfg = solar_cfg();
        let one = run_sweep(&cfg, &SweepOptions { jobs: 1, ..Default::default() }).unwrap();
        let four = run_sweep(&cfg, &SweepOptions { jobs: 4, ..Default::default() }).unwrap();
        for (a, b) in one.iter().zip(&four) {
            assert_eq!(a.point, b.point);
            assert_eq!(a.bill, b.bill);
        }
    }
}
