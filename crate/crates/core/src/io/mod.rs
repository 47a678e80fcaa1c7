//! File formats: hourly profiles and dispatches as CSV, tariffs and scenarios
//! as JSON, sweep results as CSV.

mod dispatch_csv;
mod profile;
mod results;
mod scenario_file;
mod tariff;

pub use dispatch_csv::{read_dispatch, write_dispatch};
pub use profile::{load_profile, load_profile_labeled, write_profile, LoadedProfile};
pub use results::{write_results, write_results_with, RESULT_COLUMNS};
pub use scenario_file::{
    load_scenario_file, BesEntry, FlexEntry, LoadedScenario, PvEntry, ScenarioFile, SweepEntry,
};
pub use tariff::{load_tariff, DayTypeSel, HourSel, PeriodSpec, TariffFile};

/// Formats `v` with six significant digits, trimming trailing zeros.
/// Scientific notation is used outside [1e-5, 1e6).
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.5e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, v);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_sig;
    use proptest::prelude::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.18608), "0.18608");
        assert_eq!(fmt_sig(1234.5678), "1234.57");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(123456789.0), "1.23457e8");
        assert_eq!(fmt_sig(0.0000012345678), "1.23457e-6");
        assert_eq!(fmt_sig(999999.7), "1e6");
        assert_eq!(fmt_sig(-1e-12), "-1e-12");
    }

    proptest! {
        #[test]
        fn fixed_point_of_rounding(v in -1e9f64..1e9) {
            let once = fmt_sig(v);
            let back: f64 = once.parse().unwrap();
            prop_assert_eq!(fmt_sig(back), once.clone());
            prop_assert!((back - v).abs() <= 5e-6 * v.abs());
        }
    }
}
