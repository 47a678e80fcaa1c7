use std::path::Path;

use crate::calendar::Calendar;
use crate::error::{Error, Result};
use crate::formulation::{Dispatch, Role};

fn columns() -> impl Iterator<Item = Role> {
    Role::PER_STEP.into_iter()
}

/// Writes the per-step dispatch at full precision, so re-reading and
/// auditing reproduces the solver's values exactly.
pub fn write_dispatch(d: &Dispatch, calendar: Option<&Calendar>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut header = vec!["hour".to_string(), "timestamp".to_string()];
    header.extend(columns().map(|r| r.as_str().to_string()));
    w.write_record(&header)?;
    for t in 0..d.horizon() {
        let mut rec = vec![t.to_string()];
        rec.push(match calendar {
            Some(c) if t < c.len() => c.get(t).timestamp.format("%Y-%m-%dT%H:%M").to_string(),
            _ => String::new(),
        });
        rec.extend(columns().map(|r| format!("{:?}", d.step(r)[t])));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a dispatch written by [`write_dispatch`]. Columns are matched by
/// name; the `timestamp` column is optional and ignored.
pub fn read_dispatch(path: impl AsRef<Path>) -> Result<Dispatch> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let header = rdr.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(path, 1, format!("missing column `{name}`")))
    };
    let hour_col = find("hour")?;
    let cols: Vec<(Role, usize)> = columns().map(|r| find(r.as_str()).map(|c| (r, c))).collect::<Result<_>>()?;
    let mut d = Dispatch::zeros(0, 0);
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); cols.len()];
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let hour: usize = rec
            .get(hour_col)
            .and_then(|h| h.parse().ok())
            .ok_or_else(|| Error::parse(path, line, "unparseable hour"))?;
        if hour != k {
            return Err(Error::parse(path, line, format!("expected hour {k}, found {hour}")));
        }
        for (i, &(role, c)) in cols.iter().enumerate() {
            let v: f64 = rec
                .get(c)
                .and_then(|x| x.parse().ok())
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::parse(path, line, format!("bad {} value", role.as_str())))?;
            series[i].push(v);
        }
    }
    for ((role, _), values) in cols.into_iter().zip(series) {
        d.set_step(role, values);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut d = Dispatch::zeros(3, 1);
        d.soc = vec![0.1 + 0.2, 1.0 / 3.0, 50.0];
        d.d_net = vec![1e-17, 2.5, 7.0];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        write_dispatch(&d, None, &p).unwrap();
        let back = read_dispatch(&p).unwrap();
        assert_eq!(back.soc, d.soc);
        assert_eq!(back.d_net, d.d_net);
        assert_eq!(back.p_cha, d.p_cha);
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, "hour,soc\n0,1\n").unwrap();
        let err = read_dispatch(&p).unwrap_err();
        assert!(err.to_string().contains("p_pv_btm"), "{err}");
    }
}
