use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::{Duration, NaiveDateTime};

use crate::calendar::parse_timestamp;
use crate::error::{Error, Result};
use crate::types::TimeSeries;

use super::fmt_sig;

/// A profile together with the timestamps it was keyed by, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProfile {
    pub series: TimeSeries,
    /// Set when the `hour` column held timestamps rather than indices.
    pub timestamps: Option<Vec<NaiveDateTime>>,
}

enum Key {
    Index(i64),
    Stamp(NaiveDateTime),
}

/// Reads a `hour,value` CSV. Hours are 0-based indices or ISO-8601
/// timestamps, strictly consecutive.
pub fn load_profile(path: impl AsRef<Path>) -> Result<TimeSeries> {
    load_profile_labeled(path).map(|p| p.series)
}

pub fn load_profile_labeled(path: impl AsRef<Path>) -> Result<LoadedProfile> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);

    let mut values = Vec::new();
    let mut keys: Vec<Key> = Vec::new();
    let mut header_seen = false;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if !header_seen {
            if rec.len() != 2 || &rec[0] != "hour" || &rec[1] != "value" {
                return Err(Error::parse(path, line, "expected header `hour,value`"));
            }
            header_seen = true;
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::parse(path, line, format!("expected 2 fields, found {}", rec.len())));
        }
        let value: f64 = rec[1]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("unparseable value `{}`", &rec[1])))?;
        if !value.is_finite() {
            return Err(Error::parse(path, line, format!("non-finite value `{}`", &rec[1])));
        }
        let key = if let Ok(i) = rec[0].parse::<i64>() {
            Key::Index(i)
        } else if let Some(ts) = parse_timestamp(&rec[0]) {
            Key::Stamp(ts)
        } else {
            return Err(Error::parse(path, line, format!("unparseable hour `{}`", &rec[0])));
        };
        if let Some(prev) = keys.last() {
            let step = match (prev, &key) {
                (Key::Index(a), Key::Index(b)) => b - a,
                (Key::Stamp(a), Key::Stamp(b)) => {
                    let d = *b - *a;
                    if d.num_seconds() % 3600 != 0 {
                        return Err(Error::parse(path, line, "timestamps are not on whole hours apart"));
                    }
                    d.num_hours()
                }
                _ => return Err(Error::parse(path, line, "mixed index and timestamp hours")),
            };
            match step {
                1 => {}
                0 => return Err(Error::parse(path, line, format!("duplicate hour `{}`", &rec[0]))),
                s if s < 0 => return Err(Error::parse(path, line, format!("hour `{}` is out of order", &rec[0]))),
                s => {
                    return Err(Error::parse(
                        path,
                        line,
                        format!("gap: {} missing hour(s) before `{}`", s - 1, &rec[0]),
                    ))
                }
            }
        }
        keys.push(key);
        values.push(value);
    }
    if !header_seen {
        return Err(Error::parse(path, 1, "expected header `hour,value`"));
    }
    if values.is_empty() {
        return Err(Error::parse(path, 2, "profile has no rows"));
    }
    let (start, timestamps) = match &keys[0] {
        Key::Index(i) => (*i, None),
        Key::Stamp(_) => (
            0,
            Some(
                keys.iter()
                    .map(|k| match k {
                        Key::Stamp(t) => *t,
                        Key::Index(_) => unreachable!("mixed keys rejected above"),
                    })
                    .collect(),
            ),
        ),
    };
    Ok(LoadedProfile {
        series: TimeSeries::with_start(start, values)?,
        timestamps,
    })
}

/// Writes `series` as a `hour,value` CSV at six significant digits, keyed by
/// timestamp when `start` is given and by index otherwise.
pub fn write_profile(series: &TimeSeries, start: Option<NaiveDateTime>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("hour,value\n");
    for (k, v) in series.values().iter().enumerate() {
        match start {
            Some(t0) => out.push_str(&format!(
                "{},{}\n",
                (t0 + Duration::hours(k as i64)).format("%Y-%m-%dT%H:%M"),
                fmt_sig(*v)
            )),
            None => out.push_str(&format!("{},{}\n", series.start_hour + k as i64, fmt_sig(*v))),
        }
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
        let p = dir.path().join("p.csv");
        std::fs::write(&p, body).unwrap();
        p
    }

    fn rows(n: usize, skip: Option<usize>) -> String {
        let mut s = String::from("hour,value\n");
        for h in 0..n {
            if Some(h) != skip {
                s.push_str(&format!("{h},1.0\n"));
            }
        }
        s
    }

    #[test]
    fn day_of_ones() {
        let dir = tempfile::tempdir().unwrap();
        let ts = load_profile(write(&dir, &rows(24, None))).unwrap();
        assert_eq!(ts.len(), 24);
        assert!(ts.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn missing_hour_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_profile(write(&dir, &rows(24, Some(13)))).unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 15);
                assert!(message.contains("gap"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn nan_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_profile(write(&dir, "hour,value\n0,1\n1,NaN\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn duplicate_and_header_errors() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_profile(write(&dir, "hour,value\n0,1\n0,2\n")).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let err = load_profile(write(&dir, "h,v\n0,1\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn timestamps_are_kept() {
        let dir = tempfile::tempdir().unwrap();
        let p = load_profile_labeled(write(&dir, "hour,value\n2023-07-01T00:00,1\n2023-07-01T01:00,2\n")).unwrap();
        let ts = p.timestamps.unwrap();
        assert_eq!(ts[1], parse_timestamp("2023-07-01T01:00").unwrap());
        let err = load_profile(write(&dir, "hour,value\n2023-07-01T00:00,1\n2023-07-01T02:00,2\n")).unwrap_err();
        assert!(err.to_string().contains("gap"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_at_six_digits(values in prop::collection::vec(0.0f64..1000.0, 1..50), stamped: bool) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("r.csv");
            let ts = TimeSeries::new(values.clone()).unwrap();
            let start = stamped.then(|| parse_timestamp("2023-03-12T00:00").unwrap());
            write_profile(&ts, start, &p).unwrap();
            let back = load_profile(&p).unwrap();
            prop_assert_eq!(back.len(), values.len());
            for (a, b) in back.values().iter().zip(&values) {
                prop_assert_eq!(fmt_sig(*a), fmt_sig(*b));
            }
        }
    }
}
