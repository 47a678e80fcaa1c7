use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calendar::{Calendar, DayType, HourLabel};
use crate::error::{Error, Result};
use crate::types::{DemandPeriod, Tariff, TimeSeries};

/// Day-type selector; `weekend` does not include holidays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayTypeSel {
    Weekday,
    Weekend,
    Holiday,
    /// Weekends and holidays.
    NonWeekday,
}

impl DayTypeSel {
    fn matches(self, d: DayType) -> bool {
        match self {
            DayTypeSel::Weekday => d == DayType::Weekday,
            DayTypeSel::Weekend => d == DayType::Weekend,
            DayTypeSel::Holiday => d == DayType::Holiday,
            DayTypeSel::NonWeekday => d != DayType::Weekday,
        }
    }
}

/// A single hour of day, or a half-open `[start, end)` range that wraps past
/// midnight when `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HourSel {
    Hour(u32),
    Range([u32; 2]),
}

impl HourSel {
    fn matches(self, h: u32) -> bool {
        match self {
            HourSel::Hour(x) => h == x,
            HourSel::Range([a, b]) if a <= b => (a..b).contains(&h),
            HourSel::Range([a, b]) => h >= a || h < b,
        }
    }

    fn valid(self) -> bool {
        match self {
            HourSel::Hour(x) => x < 24,
            HourSel::Range([a, b]) => a < 24 && b <= 24 && a != b,
        }
    }
}

/// One rate period. Empty (or omitted) selector lists match everything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub months: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub day_types: Vec<DayTypeSel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hours: Vec<HourSel>,
    /// $/kWh for energy periods, $/kW for demand charges.
    pub price: f64,
}

impl PeriodSpec {
    pub fn matches(&self, l: &HourLabel) -> bool {
        (self.months.is_empty() || self.months.contains(&l.month))
            && (self.day_types.is_empty() || self.day_types.iter().any(|d| d.matches(l.day_type)))
            && (self.hours.is_empty() || self.hours.iter().any(|h| h.matches(l.hour)))
    }

    fn check(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Config(format!("tariff period `{}`: {what}", self.name)));
        if !self.price.is_finite() || self.price < 0.0 {
            return bad(format!("price {} must be finite and >= 0", self.price));
        }
        if let Some(m) = self.months.iter().find(|m| !(1..=12).contains(*m)) {
            return bad(format!("month {m} outside 1..=12"));
        }
        if let Some(h) = self.hours.iter().find(|h| !h.valid()) {
            return bad(format!("invalid hour selector {h:?}"));
        }
        Ok(())
    }
}

/// Tariff file contents. Every horizon hour must fall in exactly one energy
/// period; demand-charge periods may overlap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffFile {
    pub energy_periods: Vec<PeriodSpec>,
    #[serde(default)]
    pub demand_charges: Vec<PeriodSpec>,
}

impl TariffFile {
    /// Per-step prices and masks over `calendar`.
    pub fn materialize(&self, calendar: &Calendar) -> Result<Tariff> {
        for p in self.energy_periods.iter().chain(&self.demand_charges) {
            p.check()?;
        }
        let mut prices = Vec::with_capacity(calendar.len());
        for (t, l) in calendar.labels().iter().enumerate() {
            let hits: Vec<&PeriodSpec> = self.energy_periods.iter().filter(|p| p.matches(l)).collect();
            if hits.len() != 1 {
                return Err(Error::Coverage {
                    hour: t,
                    timestamp: l.timestamp.format("%Y-%m-%dT%H:%M").to_string(),
                    count: hits.len(),
                    names: hits.iter().map(|p| p.name.clone()).collect(),
                });
            }
            prices.push(hits[0].price);
        }
        let demand_periods = self
            .demand_charges
            .iter()
            .map(|p| DemandPeriod {
                name: p.name.clone(),
                price: p.price,
                mask: calendar.labels().iter().map(|l| p.matches(l)).collect(),
            })
            .collect();
        Ok(Tariff {
            energy_price: TimeSeries::new(prices)?,
            demand_periods,
        })
    }
}

/// Reads a JSON tariff file and materializes it against `calendar`.
pub fn load_tariff(path: impl AsRef<Path>, calendar: &Calendar) -> Result<Tariff> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: TariffFile = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    file.materialize(calendar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::parse_timestamp;

    fn cal(days: usize) -> Calendar {
        Calendar::hourly(parse_timestamp("2023-07-03T00:00").unwrap(), 24 * days, &[])
    }

    fn load(json: &str, c: &Calendar) -> Result<Tariff> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        std::fs::write(&p, json).unwrap();
        load_tariff(&p, c)
    }

    #[test]
    fn flat_tariff() {
        let t = load(r#"{"energy_periods":[{"name":"all","price":0.2}]}"#, &cal(1)).unwrap();
        assert!(t.energy_price.values().iter().all(|&p| p == 0.2));
        assert!(t.demand_periods.is_empty());
    }

    #[test]
    fn evening_peak_mask() {
        let json = r#"{
            "energy_periods": [
                {"name": "peak", "hours": [[16, 21]], "price": 0.30},
                {"name": "off", "hours": [[21, 16]], "price": 0.15}
            ],
            "demand_charges": [{"name": "peak", "hours": [[16, 21]], "price": 10}]
        }"#;
        let c = cal(2);
        let t = load(json, &c).unwrap();
        for day in 0..2 {
            let peak: Vec<usize> = (0..24).filter(|h| t.energy_price.get(24 * day + h) == 0.30).collect();
            assert_eq!(peak, vec![16, 17, 18, 19, 20]);
        }
        assert_eq!(t.demand_periods[0].mask.iter().filter(|&&m| m).count(), 10);
    }

    #[test]
    fn overlap_is_a_coverage_error() {
        let json = r#"{"energy_periods":[
            {"name":"a","price":0.1},
            {"name":"b","hours":[5],"price":0.2}]}"#;
        match load(json, &cal(1)).unwrap_err() {
            Error::Coverage { hour, count, names, .. } => {
                assert_eq!(hour, 5);
                assert_eq!(count, 2);
                assert_eq!(names, vec!["a", "b"]);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn uncovered_hour_is_a_coverage_error() {
        let json = r#"{"energy_periods":[{"name":"wk","day_types":["weekday"],"price":0.1}]}"#;
        // 2023-07-08 is a Saturday.
        let err = load(json, &cal(6)).unwrap_err();
        assert!(matches!(err, Error::Coverage { hour: 120, count: 0, .. }), "{err}");
    }

    #[test]
    fn holidays_and_months() {
        let start = parse_timestamp("2023-07-03T00:00").unwrap();
        let c = Calendar::hourly(start, 48, &[start.date().succ_opt().unwrap()]);
        let json = r#"{"energy_periods":[
            {"name":"hol","day_types":["non_weekday"],"price":0.05},
            {"name":"wk","months":[7],"day_types":["weekday"],"price":0.1}]}"#;
        let t = load(json, &c).unwrap();
        assert_eq!(t.energy_price.get(0), 0.1);
        assert_eq!(t.energy_price.get(30), 0.05);
    }
}
