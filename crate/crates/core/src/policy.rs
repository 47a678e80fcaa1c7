//! Export prices and export eligibility under each net-metering policy.

use std::collections::BTreeMap;

use crate::calendar::Calendar;
use crate::error::{Error, Result};
use crate::types::{BesScheme, ExportProhibition, NemPolicy, Scenario, Tariff, TimeSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct ExportRules {
    /// $/kWh per step; may be negative under NEM 2.0.
    pub export_price: TimeSeries,
    pub pv_export_allowed: bool,
    pub bes_export_allowed: bool,
    /// Steps where the export price strictly exceeds the energy price,
    /// ascending.
    pub s_set: Vec<usize>,
}

impl ExportRules {
    pub fn slice(&self, range: std::ops::Range<usize>) -> ExportRules {
        ExportRules {
            export_price: self.export_price.slice(range.clone()),
            pv_export_allowed: self.pv_export_allowed,
            bes_export_allowed: self.bes_export_allowed,
            s_set: self
                .s_set
                .iter()
                .filter(|&&s| range.contains(&s))
                .map(|&s| s - range.start)
                .collect(),
        }
    }
}

fn aligned(what: &str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Alignment {
            what: what.to_string(),
            expected,
            found,
        })
    }
}

/// Export price per step for `policy`.
///
/// NEM 1.0 credits exports at the energy price, NEM 2.0 at the energy price
/// less the non-bypassable charge, NEM 3.0 at avoided costs averaged over all
/// horizon steps sharing month, weekday-vs-weekend/holiday and hour of day.
pub fn build_export_prices(policy: &NemPolicy, tariff: &Tariff, calendar: &Calendar) -> Result<TimeSeries> {
    let energy = &tariff.energy_price;
    aligned("calendar", energy.len(), calendar.len())?;
    let out = match policy {
        NemPolicy::NoNem => energy.map(|_| 0.0),
        NemPolicy::Nem1 => energy.clone(),
        NemPolicy::Nem2 { nbc } => energy.map(|p| p - nbc),
        NemPolicy::Nem3 { acc_hourly } => {
            aligned("avoided-cost series", energy.len(), acc_hourly.len())?;
            let mut averaged = bucket_average(acc_hourly.values(), calendar);
            averaged.start_hour = energy.start_hour;
            averaged
        }
    };
    Ok(out)
}

/// Mean of `values` over each (month, weekday flag, hour) bucket, written back
/// to every member of the bucket.
///
/// The mean is accumulated as offsets from the bucket's first value, so a
/// bucket of identical values maps to exactly that value.
pub fn bucket_average(values: &[f64], calendar: &Calendar) -> TimeSeries {
    let mut buckets: BTreeMap<(u32, bool, u32), (f64, f64, usize)> = BTreeMap::new();
    for (label, &v) in calendar.labels().iter().zip(values) {
        let e = buckets.entry(label.acc_bucket()).or_insert((v, 0.0, 0));
        e.1 += v - e.0;
        e.2 += 1;
    }
    let out = calendar
        .labels()
        .iter()
        .map(|label| {
            let (first, offset_sum, count) = buckets[&label.acc_bucket()];
            first + offset_sum / count as f64
        })
        .collect();
    TimeSeries::from_raw(out)
}

/// Indices where `export_price` strictly exceeds `energy_price`.
pub fn compute_export_window(export_price: &TimeSeries, energy_price: &TimeSeries) -> Result<Vec<usize>> {
    aligned("export price", energy_price.len(), export_price.len())?;
    Ok(export_price
        .values()
        .iter()
        .zip(energy_price.values())
        .enumerate()
        .filter(|(_, (x, e))| x > e)
        .map(|(t, _)| t)
        .collect())
}

/// `(pv_export_allowed, bes_export_allowed)` with the battery-only reading of
/// the no-export scheme.
pub fn resolve_export_flags(policy: &NemPolicy, scheme: Option<BesScheme>) -> (bool, bool) {
    resolve_export_flags_with(policy, scheme, ExportProhibition::BesOnly)
}

pub fn resolve_export_flags_with(
    policy: &NemPolicy,
    scheme: Option<BesScheme>,
    prohibition: ExportProhibition,
) -> (bool, bool) {
    if matches!(policy, NemPolicy::NoNem) {
        return (false, false);
    }
    match scheme {
        None => (true, false),
        Some(BesScheme::GridChargeNoBesExport) => (prohibition == ExportProhibition::BesOnly, false),
        Some(BesScheme::PvChargeWithExport | BesScheme::GridChargeWithExport) => (true, true),
    }
}

/// Export rules for a whole scenario horizon.
pub fn build_export_rules(s: &Scenario) -> Result<ExportRules> {
    let export_price = build_export_prices(&s.policy, &s.tariff, &s.calendar)?;
    let s_set = compute_export_window(&export_price, &s.tariff.energy_price)?;
    let (pv_export_allowed, bes_export_allowed) =
        resolve_export_flags_with(&s.policy, s.bes.map(|b| b.scheme), s.export_prohibition);
    Ok(ExportRules {
        export_price,
        pv_export_allowed,
        bes_export_allowed,
        s_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::parse_timestamp;
    use crate::types::NEM2_NON_BYPASSABLE_CHARGE;
    use proptest::prelude::*;

    fn tariff(prices: &[f64]) -> Tariff {
        Tariff {
            energy_price: TimeSeries::new(prices.to_vec()).unwrap(),
            demand_periods: vec![],
        }
    }

    fn calendar(start: &str, len: usize) -> Calendar {
        Calendar::hourly(parse_timestamp(start).unwrap(), len, &[])
    }

    #[test]
    fn nem1_equals_energy_price() {
        let t = tariff(&[0.20, 0.30]);
        let x = build_export_prices(&NemPolicy::Nem1, &t, &calendar("2023-07-03T00:00", 2)).unwrap();
        assert_eq!(x.values(), &[0.20, 0.30]);
    }

    #[test]
    fn nem2_subtracts_non_bypassable_charge() {
        let t = tariff(&[0.21585]);
        let x = build_export_prices(&NemPolicy::nem2(), &t, &calendar("2023-07-03T00:00", 1)).unwrap();
        assert!((x.get(0) - 0.18608).abs() < 1e-12);
        assert_eq!(x.get(0), 0.21585 - NEM2_NON_BYPASSABLE_CHARGE);
    }

    #[test]
    fn nem2_keeps_negative_prices() {
        let t = tariff(&[0.01]);
        let x = build_export_prices(&NemPolicy::nem2(), &t, &calendar("2023-07-03T00:00", 1)).unwrap();
        assert!(x.get(0) < 0.0);
    }

    #[test]
    fn nem3_averages_same_bucket() {
        // Monday and Tuesday 2023-07-03/04, both weekdays, hour 18.
        let cal = calendar("2023-07-03T00:00", 48);
        let mut acc = vec![0.05; 48];
        acc[18] = 0.10;
        acc[24 + 18] = 0.30;
        let policy = NemPolicy::Nem3 {
            acc_hourly: TimeSeries::new(acc).unwrap(),
        };
        let x = build_export_prices(&policy, &tariff(&[0.1; 48]), &cal).unwrap();
        assert!((x.get(18) - 0.20).abs() < 1e-12);
        assert!((x.get(42) - 0.20).abs() < 1e-12);
        assert_eq!(x.get(17), 0.05);
    }

    #[test]
    fn nem3_separates_weekends() {
        // 2023-07-07 Friday, 2023-07-08 Saturday.
        let cal = calendar("2023-07-07T00:00", 48);
        let acc: Vec<f64> = (0..48).map(|t| if t < 24 { 1.0 } else { 3.0 }).collect();
        let policy = NemPolicy::Nem3 {
            acc_hourly: TimeSeries::new(acc).unwrap(),
        };
        let x = build_export_prices(&policy, &tariff(&[0.1; 48]), &cal).unwrap();
        assert_eq!(x.get(5), 1.0);
        assert_eq!(x.get(29), 3.0);
    }

    #[test]
    fn nem3_misaligned_acc_is_an_error() {
        let policy = NemPolicy::Nem3 {
            acc_hourly: TimeSeries::new(vec![0.1; 3]).unwrap(),
        };
        let err = build_export_prices(&policy, &tariff(&[0.1; 4]), &calendar("2023-07-03T00:00", 4)).unwrap_err();
        assert!(matches!(err, Error::Alignment { expected: 4, found: 3, .. }));
    }

    #[test]
    fn no_nem_is_zero() {
        let x = build_export_prices(&NemPolicy::NoNem, &tariff(&[0.2, 0.4]), &calendar("2023-07-03T00:00", 2)).unwrap();
        assert_eq!(x.values(), &[0.0, 0.0]);
    }

    #[test]
    fn export_window_is_strict() {
        let e = TimeSeries::new(vec![0.30]).unwrap();
        assert_eq!(compute_export_window(&TimeSeries::new(vec![0.50]).unwrap(), &e).unwrap(), vec![0]);
        assert!(compute_export_window(&e, &e).unwrap().is_empty());
        let bad = TimeSeries::new(vec![0.1, 0.2]).unwrap();
        assert!(compute_export_window(&bad, &e).is_err());
    }

    #[test]
    fn export_flags() {
        for scheme in [None, Some(BesScheme::GridChargeNoBesExport), Some(BesScheme::PvChargeWithExport)] {
            assert_eq!(resolve_export_flags(&NemPolicy::NoNem, scheme), (false, false));
        }
        let nem3 = NemPolicy::Nem3 {
            acc_hourly: TimeSeries::constant(0.1, 1),
        };
        assert_eq!(resolve_export_flags(&nem3, Some(BesScheme::PvChargeWithExport)), (true, true));
        assert_eq!(resolve_export_flags(&nem3, Some(BesScheme::GridChargeWithExport)), (true, true));
        assert_eq!(
            resolve_export_flags(&NemPolicy::nem2(), Some(BesScheme::GridChargeNoBesExport)),
            (true, false)
        );
        assert_eq!(
            resolve_export_flags_with(&NemPolicy::nem2(), Some(BesScheme::GridChargeNoBesExport), ExportProhibition::All),
            (false, false)
        );
        assert_eq!(resolve_export_flags(&NemPolicy::Nem1, None), (true, false));
    }

    proptest! {
        #[test]
        fn nem2_is_nem1_minus_nbc(prices in proptest::collection::vec(0.0f64..3.0, 1..48), nbc in 0.0f64..0.1) {
            let n = prices.len();
            let t = tariff(&prices);
            let cal = calendar("2023-03-01T00:00", n);
            let n1 = build_export_prices(&NemPolicy::Nem1, &t, &cal).unwrap();
            let n2 = build_export_prices(&NemPolicy::Nem2 { nbc }, &t, &cal).unwrap();
            for k in 0..n {
                prop_assert_eq!(n2.get(k), n1.get(k) - nbc);
            }
            if nbc > 0.0 {
                prop_assert!(compute_export_window(&n2, &t.energy_price).unwrap().is_empty());
            }
            prop_assert!(compute_export_window(&n1, &t.energy_price).unwrap().is_empty());
        }

        #[test]
        fn nem3_averaging_is_idempotent(acc in proptest::collection::vec(0.0f64..3.0, 24..24 * 16)) {
            let cal = calendar("2023-06-25T07:00", acc.len());
            let once = bucket_average(&acc, &cal);
            let twice = bucket_average(once.values(), &cal);
            prop_assert_eq!(once.values(), twice.values());
        }
    }
}
