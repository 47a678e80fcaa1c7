use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::ResultRow;

use super::fmt_sig;

pub const RESULT_COLUMNS: [&str; 14] = [
    "pv_ratio",
    "bes_power_ratio",
    "bes_duration_hours",
    "scheme",
    "flex_fraction",
    "recovery_hours",
    "policy",
    "demand_charge",
    "energy_charge",
    "export_revenue",
    "net_bill",
    "relative_bill",
    "status",
    "wall_ms",
];

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

fn record(r: &ResultRow, timing: bool) -> Vec<String> {
    let b = r.point.bes;
    let x = r.point.flex;
    vec![
        fmt_sig(r.point.pv_ratio),
        opt(b.map(|b| b.power_ratio)),
        opt(b.map(|b| b.duration_hours)),
        b.map(|b| b.scheme.as_str().to_string()).unwrap_or_default(),
        opt(x.map(|x| x.fraction)),
        x.map(|x| x.recovery_hours.to_string()).unwrap_or_default(),
        r.point.policy.as_str().to_string(),
        opt(r.bill.map(|b| b.demand_charge_total)),
        opt(r.bill.map(|b| b.energy_charge_total)),
        opt(r.bill.map(|b| b.export_revenue)),
        opt(r.bill.map(|b| b.net_bill)),
        match r.relative_bill {
            Some(v) => fmt_sig(v),
            None => "undefined".into(),
        },
        r.status.as_str().to_string(),
        if timing { format!("{:.1}", r.wall_ms) } else { String::new() },
    ]
}

/// Writes sweep rows without wall times, so identical sweeps give
/// byte-identical files.
pub fn write_results(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    write_results_with(rows, path, false)
}

/// Like [`write_results`], filling the `wall_ms` column when `timing` is set.
pub fn write_results_with(rows: &[ResultRow], path: impl AsRef<Path>, timing: bool) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    w.write_record(RESULT_COLUMNS)?;
    for r in rows {
        w.write_record(record(r, timing))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::BillBreakdown;
    use crate::solver::SolveStatus;
    use crate::sweep::{RowStatus, SweepPoint};
    use crate::types::PolicyKind;

    fn row(pv: f64, policy: PolicyKind) -> ResultRow {
        ResultRow {
            point: SweepPoint {
                pv_ratio: pv,
                bes: None,
                flex: None,
                policy,
            },
            bill: Some(BillBreakdown::new(100.0, 50.123456789, 10.0)),
            relative_bill: Some(0.5),
            status: RowStatus::Solved(SolveStatus::Optimal),
            wall_ms: 12.34,
            error: None,
            baseline_only: false,
            result: None,
        }
    }

    #[test]
    fn empty_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_results(&[], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), RESULT_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn line_count_and_format() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let mut rows: Vec<ResultRow> = (0..16).map(|k| row(k as f64 * 0.5, PolicyKind::Nem2)).collect();
        rows[1].relative_bill = None;
        write_results(&rows, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[1], "0,,,,,,nem2,100,50.1235,10,140.123,0.5,optimal,");
        assert!(lines[2].contains(",undefined,"));

        let q = dir.path().join("r2.csv");
        write_results(&rows, &q).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
        write_results_with(&rows, &q, true).unwrap();
        assert!(std::fs::read_to_string(&q).unwrap().lines().nth(1).unwrap().ends_with(",12.3"));
    }
}
