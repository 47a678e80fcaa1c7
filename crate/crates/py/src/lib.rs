//! Python bindings: load a scenario file, solve or sweep it, export prices,
//! audit a dispatch and write synthetic fixtures.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use nemdv_core::calendar::parse_timestamp;
use nemdv_core::engine::audit_dispatch;
use nemdv_core::fixtures::{Consumer, FixtureSet, DEFAULT_SEED};
use nemdv_core::io::{load_scenario_file, read_dispatch, write_dispatch, write_results_with, LoadedScenario};
use nemdv_core::types::NEM2_NON_BYPASSABLE_CHARGE;
use nemdv_core::{
    build_export_prices, run_sweep, solve_scenario, Error, NemPolicy, PolicyKind, ScenarioResult, SolveOptions,
    SweepOptions,
};

fn err(e: Error) -> PyErr {
    match e {
        Error::Solver(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_policy(name: &str) -> PyResult<PolicyKind> {
    [PolicyKind::NoNem, PolicyKind::Nem1, PolicyKind::Nem2, PolicyKind::Nem3]
        .into_iter()
        .find(|k| k.as_str() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown policy `{name}`")))
}

fn options(gap_tol: Option<f64>, strict_bes: bool) -> SolveOptions {
    let mut o = SolveOptions::default();
    if let Some(g) = gap_tol {
        o.gap_tol = g;
    }
    o.strict_bes = strict_bes;
    o
}

/// A scenario file with its referenced profiles and optional sweep block.
#[pyclass(name = "Scenario", module = "nemdv")]
struct PyScenario {
    inner: LoadedScenario,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyScenario {
            inner: load_scenario_file(&path).map_err(err)?,
        })
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.scenario.horizon()
    }

    #[getter]
    fn policy(&self) -> &'static str {
        self.inner.scenario.policy.kind().as_str()
    }

    #[getter]
    fn has_sweep(&self) -> bool {
        self.inner.sweep.is_some()
    }

    /// Hourly export prices for `policy` (default: the scenario's own).
    #[pyo3(signature = (policy=None))]
    fn export_prices(&self, policy: Option<&str>) -> PyResult<Vec<f64>> {
        let s = &self.inner.scenario;
        let p = match policy {
            None => s.policy.clone(),
            Some(name) => {
                let kind: PolicyKind = parse_policy(name)?;
                match kind {
                    PolicyKind::NoNem => NemPolicy::NoNem,
                    PolicyKind::Nem1 => NemPolicy::Nem1,
                    PolicyKind::Nem2 => NemPolicy::Nem2 {
                        nbc: match s.policy {
                            NemPolicy::Nem2 { nbc } => nbc,
                            _ => NEM2_NON_BYPASSABLE_CHARGE,
                        },
                    },
                    PolicyKind::Nem3 => NemPolicy::Nem3 {
                        acc_hourly: self
                            .inner
                            .acc
                            .clone()
                            .ok_or_else(|| PyValueError::new_err("scenario file has no avoided costs"))?,
                    },
                }
            }
        };
        let prices = build_export_prices(&p, &s.tariff, &s.calendar).map_err(err)?;
        Ok((0..prices.len()).map(|t| prices.get(t)).collect())
    }

    #[pyo3(signature = (gap_tol=None, strict_bes=false))]
    fn solve(&self, gap_tol: Option<f64>, strict_bes: bool) -> PyResult<PyResult_> {
        let r = solve_scenario(&self.inner.scenario, &options(gap_tol, strict_bes)).map_err(err)?;
        Ok(PyResult_ { inner: r })
    }

    /// Runs the sweep block; writes the results CSV when `out` is given and
    /// returns one dict per row.
    #[pyo3(signature = (out=None, jobs=1, gap_tol=None, timing=false))]
    fn sweep(
        &self,
        py: Python<'_>,
        out: Option<PathBuf>,
        jobs: usize,
        gap_tol: Option<f64>,
        timing: bool,
    ) -> PyResult<Vec<HashMap<String, Py<PyAny>>>> {
        let cfg = self
            .inner
            .sweep
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("scenario file has no sweep block"))?;
        let opts = SweepOptions {
            solve: options(gap_tol, false),
            jobs,
            keep_results: false,
        };
        let rows = run_sweep(cfg, &opts).map_err(err)?;
        if let Some(p) = &out {
            write_results_with(&rows, p, timing).map_err(err)?;
        }
        rows.iter()
                .map(|r| {
                    let mut d: HashMap<String, Py<PyAny>> = HashMap::new();
                    d.insert("point".into(), r.point.to_string().into_pyobject(py)?.into_any().unbind());
                    d.insert("policy".into(), r.point.policy.as_str().into_pyobject(py)?.into_any().unbind());
                    d.insert("pv_ratio".into(), r.point.pv_ratio.into_pyobject(py)?.into_any().unbind());
                    d.insert("status".into(), r.status.as_str().into_pyobject(py)?.into_any().unbind());
                    d.insert("net_bill".into(), r.net_bill().into_pyobject(py)?.into_any().unbind());
                    d.insert("relative_bill".into(), r.relative_bill.into_pyobject(py)?.into_any().unbind());
                    d.insert(
                        "baseline_only".into(),
                        r.baseline_only.into_pyobject(py)?.to_owned().into_any().unbind(),
                    );
                    Ok(d)
                })
                .collect()
    }

    /// Checks a dispatch CSV; returns the net bill and the violations found.
    fn audit(&self, dispatch: PathBuf) -> PyResult<(f64, Vec<String>)> {
        let d = read_dispatch(&dispatch).map_err(err)?;
        let (bill, reports) = audit_dispatch(&self.inner.scenario, &d, &SolveOptions::default()).map_err(err)?;
        let violations = reports
            .iter()
            .flat_map(|(range, rep)| rep.violations.iter().map(move |v| format!("steps {}..{}: {v}", range.start, range.end)))
            .collect();
        Ok((bill.net_bill, violations))
    }
}

#[pyclass(name = "Result", module = "nemdv")]
struct PyResult_ {
    inner: ScenarioResult,
}

#[pymethods]
impl PyResult_ {
    #[getter]
    fn status(&self) -> String {
        self.inner.status.to_string()
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn net_bill(&self) -> f64 {
        self.inner.bill.net_bill
    }

    #[getter]
    fn demand_charge(&self) -> f64 {
        self.inner.bill.demand_charge_total
    }

    #[getter]
    fn energy_charge(&self) -> f64 {
        self.inner.bill.energy_charge_total
    }

    #[getter]
    fn export_revenue(&self) -> f64 {
        self.inner.bill.export_revenue
    }

    #[getter]
    fn audit_passed(&self) -> bool {
        self.inner.audit_passed()
    }

    /// Hourly dispatch columns, or None without a solution.
    fn dispatch(&self) -> Option<HashMap<&'static str, Vec<f64>>> {
        let d = self.inner.dispatch.as_ref()?;
        Some(HashMap::from([
            ("p_pv_btm", d.p_pv_btm.clone()),
            ("p_pv_exp", d.p_pv_exp.clone()),
            ("p_cha", d.p_cha.clone()),
            ("p_dis_btm", d.p_dis_btm.clone()),
            ("p_dis_exp", d.p_dis_exp.clone()),
            ("d_dev_up", d.d_dev_up.clone()),
            ("d_dev_dn", d.d_dev_dn.clone()),
            ("soc", d.soc.clone()),
            ("d_net", d.d_net.clone()),
        ]))
    }

    fn write_dispatch(&self, path: PathBuf) -> PyResult<()> {
        let d = self
            .inner
            .dispatch
            .as_ref()
            .ok_or_else(|| PyRuntimeError::new_err("no dispatch to write"))?;
        write_dispatch(d, None, &path).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Result(status={}, net_bill={:.2})", self.inner.status, self.inner.bill.net_bill)
    }
}

/// Writes a synthetic scenario directory and returns the scenario file path.
#[pyfunction]
#[pyo3(signature = (consumer, dir, start="2023-07-01T00:00", hours=744, policy="nem3", seed=DEFAULT_SEED))]
fn write_fixtures(consumer: &str, dir: PathBuf, start: &str, hours: usize, policy: &str, seed: u64) -> PyResult<PathBuf> {
    let kind = match consumer {
        "mep" => Consumer::Mep,
        "mdp" => Consumer::Mdp,
        other => return Err(PyValueError::new_err(format!("unknown consumer `{other}`"))),
    };
    let start = parse_timestamp(start).ok_or_else(|| PyValueError::new_err(format!("bad timestamp `{start}`")))?;
    let policy: PolicyKind = parse_policy(policy)?;
    FixtureSet::new(kind, start, hours, seed).write(&dir, policy).map_err(err)?;
    Ok(dir.join("scenario.json"))
}

/// Formats a number to the significant digits used in result files.
#[pyfunction]
fn fmt_sig(v: f64) -> String {
    nemdv_core::io::fmt_sig(v)
}

#[pymodule]
fn nemdv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyResult_>()?;
    m.add_function(wrap_pyfunction!(write_fixtures, m)?)?;
    m.add_function(wrap_pyfunction!(fmt_sig, m)?)?;
    Ok(())
}
