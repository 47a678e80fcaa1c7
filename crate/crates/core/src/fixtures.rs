//! Synthetic test fixtures. None of this is measured data.
//!
//! Two consumer shapes stand in for the prototype building loads: a
//! morning-and-evening-peaking (hotel-like) profile scaled to 444 kW and a
//! midday-peaking (supermarket-like) profile scaled to 358 kW. A clear-sky
//! PV capacity factor with random cloud cover, a B-19-like TOU tariff and an
//! avoided-cost series with a 2.96644 $/kWh maximum complete the set.
//! Everything is generated from a fixed seed.

use std::f64::consts::PI;
use std::path::Path;

use chrono::{Datelike, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calendar::{Calendar, DayType, HourLabel};
use crate::error::{Error, Result};
use crate::io::{write_profile, DayTypeSel, HourSel, PeriodSpec, PvEntry, ScenarioFile, TariffFile};
use crate::types::{ExportProhibition, NemPolicy, PolicyKind, PvSpec, Scenario, TimeSeries};

pub const MEP_MAX_DEMAND: f64 = 444.0;
pub const MDP_MAX_DEMAND: f64 = 358.0;
pub const ACC_MAX: f64 = 2.96644;
pub const INVERTER_EFFICIENCY: f64 = 0.96;
pub const ROUND_TRIP_EFFICIENCY: f64 = 0.85;
pub const DEFAULT_SEED: u64 = 0x5EED_2023;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consumer {
    /// Morning and evening peaks.
    Mep,
    /// Midday peak.
    Mdp,
}

impl Consumer {
    pub fn max_demand(self) -> f64 {
        match self {
            Consumer::Mep => MEP_MAX_DEMAND,
            Consumer::Mdp => MDP_MAX_DEMAND,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Consumer::Mep => "mep",
            Consumer::Mdp => "mdp",
        }
    }

    fn seed_offset(self) -> u64 {
        match self {
            Consumer::Mep => 1,
            Consumer::Mdp => 2,
        }
    }
}

fn bump(h: f64, center: f64, width: f64) -> f64 {
    (-0.5 * ((h - center) / width).powi(2)).exp()
}

fn is_summer(month: u32) -> bool {
    (5..=10).contains(&month)
}

/// Normalized daily shape at hour `h` (0..24).
fn shape(kind: Consumer, l: &HourLabel) -> f64 {
    let h = l.hour as f64 + 0.5;
    let weekday = l.day_type.is_weekday();
    // Seasonal cooling load, largest in late summer.
    let season = 1.0 + 0.15 * (2.0 * PI * (l.timestamp.ordinal() as f64 - 200.0) / 365.0).cos();
    match kind {
        Consumer::Mep => {
            let base = 0.45;
            let morning = 0.35 * bump(h, 8.0, 1.5);
            let evening = 0.55 * bump(h, 19.5, 2.0);
            let w = if weekday { 1.0 } else { 1.08 };
            (base + morning + evening) * w * season
        }
        Consumer::Mdp => {
            let base = 0.35;
            let open = if (7.0..22.0).contains(&h) { 0.25 } else { 0.0 };
            let midday = 0.45 * bump(h, 13.5, 3.0);
            let w = if weekday { 1.0 } else { 0.92 };
            (base + open + midday) * w * season
        }
    }
}

/// Synthetic consumer demand over `calendar`, scaled so its maximum is the
/// consumer's nominal peak.
pub fn demand_profile(kind: Consumer, calendar: &Calendar, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(kind.seed_offset()));
    let raw: Vec<f64> = calendar
        .labels()
        .iter()
        .map(|l| shape(kind, l) * (1.0 + 0.05 * (rng.gen::<f64>() - 0.5)))
        .collect();
    let peak = raw.iter().copied().fold(0.0, f64::max);
    let scale = kind.max_demand() / peak;
    TimeSeries::from_raw(raw.into_iter().map(|v| v * scale).collect())
}

/// Clear-sky bell between a seasonal sunrise and sunset, thinned by daily
/// random cloud cover. Values lie in [0, 0.9].
pub fn pv_capacity_factor(calendar: &Calendar, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(10));
    let mut cloud = 1.0;
    let mut day = None;
    let values = calendar
        .labels()
        .iter()
        .map(|l| {
            let date = l.timestamp.date();
            if day != Some(date) {
                day = Some(date);
                cloud = 1.0 - 0.5 * rng.gen::<f64>().powi(3);
            }
            let doy = l.timestamp.ordinal() as f64;
            let half_day = 6.0 + 1.5 * (2.0 * PI * (doy - 172.0) / 365.0).cos();
            let h = l.hour as f64 + 0.5;
            let x = (h - 12.5) / half_day;
            if x.abs() >= 1.0 {
                0.0
            } else {
                let summer = 0.8 + 0.1 * (2.0 * PI * (doy - 172.0) / 365.0).cos();
                summer * (PI * x / 2.0).cos().powi(2) * cloud
            }
        })
        .collect();
    TimeSeries::from_raw(values)
}

/// Avoided costs: low daytime values, a steep weekday evening spike in
/// summer and a milder one otherwise. Scaled so the maximum is
/// [`ACC_MAX`]. After bucket averaging, only a couple of evening hours per
/// day exceed the tariff's energy price.
pub fn avoided_costs(calendar: &Calendar, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(20));
    let raw: Vec<f64> = calendar
        .labels()
        .iter()
        .map(|l| {
            let h = l.hour;
            let weekday = l.day_type.is_weekday();
            let noise = 1.0 + 0.2 * (rng.gen::<f64>() - 0.5);
            let base = if (9..16).contains(&h) { 0.02 } else { 0.05 };
            let spike = match (h, is_summer(l.month), weekday) {
                (19 | 20, true, true) => 0.9 + 0.6 * (l.month as f64 - 5.0) / 5.0,
                (19, true, false) => 0.25,
                (19, false, true) => 0.18,
                _ => 0.0,
            };
            (base + spike) * noise
        })
        .collect();
    let peak = raw.iter().copied().fold(0.0, f64::max);
    let scale = ACC_MAX / peak;
    TimeSeries::from_raw(raw.into_iter().map(|v| v * scale).collect())
}

fn period(name: &str, months: &[u32], days: &[DayTypeSel], hours: &[HourSel], price: f64) -> PeriodSpec {
    PeriodSpec {
        name: name.into(),
        months: months.to_vec(),
        day_types: days.to_vec(),
        hours: hours.to_vec(),
        price,
    }
}

/// A tariff with the structure of a commercial TOU rate with demand charges.
/// Only the summer peak energy price (0.21585 $/kWh) is a published figure;
/// the other prices are made up.
pub fn b19_like_tariff() -> TariffFile {
    use DayTypeSel::{NonWeekday, Weekday};
    use HourSel::Range;
    let summer = [5, 6, 7, 8, 9, 10];
    let winter = [1, 2, 3, 4, 11, 12];
    TariffFile {
        energy_periods: vec![
            period("summer_peak", &summer, &[Weekday], &[Range([16, 21])], 0.21585),
            period("summer_part_peak", &summer, &[Weekday], &[Range([14, 16]), Range([21, 23])], 0.16),
            period("summer_off_peak", &summer, &[Weekday], &[Range([23, 14])], 0.12),
            period("summer_non_weekday", &summer, &[NonWeekday], &[], 0.12),
            period("winter_peak", &winter, &[], &[Range([16, 21])], 0.17),
            period("winter_super_off_peak", &winter, &[], &[Range([9, 14])], 0.09),
            period("winter_off_peak", &winter, &[], &[Range([21, 9]), Range([14, 16])], 0.12),
        ],
        demand_charges: vec![
            period("max", &[], &[], &[], 22.0),
            period("summer_peak", &summer, &[Weekday], &[Range([16, 21])], 18.0),
            period("summer_part_peak", &summer, &[Weekday], &[Range([14, 16]), Range([21, 23])], 5.0),
            period("winter_peak", &winter, &[], &[Range([16, 21])], 2.0),
        ],
    }
}

/// Profiles of one synthetic consumer over a horizon.
#[derive(Debug, Clone)]
pub struct FixtureSet {
    pub kind: Consumer,
    pub calendar: Calendar,
    pub demand: TimeSeries,
    pub pv_cf: TimeSeries,
    pub acc: TimeSeries,
    pub tariff: TariffFile,
}

impl FixtureSet {
    pub fn new(kind: Consumer, start: NaiveDateTime, hours: usize, seed: u64) -> Self {
        let calendar = Calendar::hourly(start, hours, &[]);
        FixtureSet {
            kind,
            demand: demand_profile(kind, &calendar, seed),
            pv_cf: pv_capacity_factor(&calendar, seed),
            acc: avoided_costs(&calendar, seed),
            tariff: b19_like_tariff(),
            calendar,
        }
    }

    /// PV-only scenario with PV rated at the maximum demand.
    pub fn scenario(&self, policy: PolicyKind) -> Result<Scenario> {
        let tariff = self.tariff.materialize(&self.calendar)?;
        let policy = match policy {
            PolicyKind::NoNem => NemPolicy::NoNem,
            PolicyKind::Nem1 => NemPolicy::Nem1,
            PolicyKind::Nem2 => NemPolicy::nem2(),
            PolicyKind::Nem3 => NemPolicy::Nem3 {
                acc_hourly: self.acc.clone(),
            },
        };
        Ok(Scenario {
            demand: self.demand.clone(),
            pv_cf: self.pv_cf.clone(),
            pv: PvSpec::new(self.demand.max(), INVERTER_EFFICIENCY),
            bes: None,
            flex: None,
            policy,
            tariff,
            calendar: self.calendar.clone(),
            export_prohibition: ExportProhibition::BesOnly,
        })
    }

    /// Writes `demand.csv`, `pv_cf.csv`, `acc.csv`, `tariff.json` and a
    /// PV-only `scenario.json` into `dir`.
    pub fn write(&self, dir: &Path, policy: PolicyKind) -> Result<ScenarioFile> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let start = self.calendar.start();
        write_profile(&self.demand, start, dir.join("demand.csv"))?;
        write_profile(&self.pv_cf, start, dir.join("pv_cf.csv"))?;
        write_profile(&self.acc, start, dir.join("acc.csv"))?;
        let tariff = serde_json::to_string_pretty(&self.tariff).expect("tariff serializes");
        let tp = dir.join("tariff.json");
        std::fs::write(&tp, tariff).map_err(|e| Error::io(&tp, e))?;
        let file = ScenarioFile {
            demand: "demand.csv".into(),
            pv_cf: "pv_cf.csv".into(),
            tariff: "tariff.json".into(),
            acc: Some("acc.csv".into()),
            start: None,
            holidays: Vec::new(),
            pv: PvEntry {
                rated_power: None,
                ratio: Some(1.0),
                inverter_efficiency: INVERTER_EFFICIENCY,
            },
            bes: None,
            flex: None,
            policy,
            nbc: None,
            export_prohibition: ExportProhibition::BesOnly,
            sweep: None,
        };
        write_scenario_file(&file, &dir.join("scenario.json"))?;
        Ok(file)
    }
}

pub fn write_scenario_file(file: &ScenarioFile, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(file).expect("scenario serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Steps of the export window per day type, for fixture sanity checks.
pub fn count_by_day_type(calendar: &Calendar, steps: &[usize]) -> [usize; 3] {
    let mut out = [0; 3];
    for &t in steps {
        let k = match calendar.get(t).day_type {
            DayType::Weekday => 0,
            DayType::Weekend => 1,
            DayType::Holiday => 2,
        };
        out[k] += 1;
    }
    out
}
