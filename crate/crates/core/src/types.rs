//! Domain types shared by the policy, formulation, solver and sweep layers.
//!
//! The time step is fixed at one hour, so a power value in kW is also the
//! energy in kWh delivered during that step.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::calendar::Calendar;
use crate::error::{Error, Result};

/// Fixed-step hourly series. Units are carried by context (kW, kWh, $/kWh).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub start_hour: i64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_start(0, values)
    }

    pub fn with_start(start_hour: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("time series must have at least one value".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("time series value at index {k} is not finite")));
        }
        Ok(TimeSeries { start_hour, values })
    }

    /// Skips the finiteness check; [`validate_scenario`] reports bad entries.
    pub fn from_raw(values: Vec<f64>) -> Self {
        TimeSeries { start_hour: 0, values }
    }

    pub fn constant(value: f64, len: usize) -> Self {
        TimeSeries::from_raw(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, t: usize) -> f64 {
        self.values[t]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn slice(&self, range: Range<usize>) -> TimeSeries {
        TimeSeries {
            start_hour: self.start_hour + range.start as i64,
            values: self.values[range].to_vec(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TimeSeries {
        TimeSeries {
            start_hour: self.start_hour,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// A demand-charge period: `price` in $/kW applied to the maximum net demand
/// over the steps where `mask` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandPeriod {
    pub name: String,
    pub price: f64,
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tariff {
    /// $/kWh per step.
    pub energy_price: TimeSeries,
    pub demand_periods: Vec<DemandPeriod>,
}

impl Tariff {
    pub fn slice(&self, range: Range<usize>) -> Tariff {
        Tariff {
            energy_price: self.energy_price.slice(range.clone()),
            demand_periods: self
                .demand_periods
                .iter()
                .map(|p| DemandPeriod {
                    name: p.name.clone(),
                    price: p.price,
                    mask: p.mask[range.clone()].to_vec(),
                })
                .collect(),
        }
    }
}

/// Non-bypassable charge applied to NEM 2.0 export credits, $/kWh.
pub const NEM2_NON_BYPASSABLE_CHARGE: f64 = 0.02977;

#[derive(Debug, Clone, PartialEq)]
pub enum NemPolicy {
    NoNem,
    Nem1,
    Nem2 { nbc: f64 },
    Nem3 { acc_hourly: TimeSeries },
}

impl NemPolicy {
    pub fn nem2() -> Self {
        NemPolicy::Nem2 {
            nbc: NEM2_NON_BYPASSABLE_CHARGE,
        }
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            NemPolicy::NoNem => PolicyKind::NoNem,
            NemPolicy::Nem1 => PolicyKind::Nem1,
            NemPolicy::Nem2 { .. } => PolicyKind::Nem2,
            NemPolicy::Nem3 { .. } => PolicyKind::Nem3,
        }
    }
}

/// Payload-free policy tag, used for sweep axes and file vocabularies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Nem1,
    Nem2,
    Nem3,
    NoNem,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Nem1 => "nem1",
            PolicyKind::Nem2 => "nem2",
            PolicyKind::Nem3 => "nem3",
            PolicyKind::NoNem => "no_nem",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvSpec {
    /// kW
    pub rated_power: f64,
    pub inverter_efficiency: f64,
}

impl PvSpec {
    pub fn new(rated_power: f64, inverter_efficiency: f64) -> Self {
        PvSpec {
            rated_power,
            inverter_efficiency,
        }
    }

    /// Maximum AC output at step `t` for capacity factor `cf`.
    pub fn available(&self, cf: f64) -> f64 {
        self.inverter_efficiency * self.rated_power * cf
    }
}

/// How a solar-plus-storage system may interact with the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BesScheme {
    /// Battery may charge from the grid; battery exports prohibited.
    GridChargeNoBesExport,
    /// Battery charges only from paired PV; exports allowed.
    PvChargeWithExport,
    /// Battery may charge from and export to the grid.
    GridChargeWithExport,
}

impl BesScheme {
    pub const ALL: [BesScheme; 3] = [
        BesScheme::GridChargeNoBesExport,
        BesScheme::PvChargeWithExport,
        BesScheme::GridChargeWithExport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BesScheme::GridChargeNoBesExport => "grid_charge_no_bes_export",
            BesScheme::PvChargeWithExport => "pv_charge_with_export",
            BesScheme::GridChargeWithExport => "grid_charge_with_export",
        }
    }
}

impl fmt::Display for BesScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesSpec {
    /// kW
    pub rated_power: f64,
    /// hours
    pub duration: f64,
    /// kWh
    pub soc_min: f64,
    /// kWh
    pub soc_init: f64,
    pub round_trip_efficiency: f64,
    pub scheme: BesScheme,
}

impl BesSpec {
    /// Battery with the default state-of-charge window: empty floor and a
    /// half-full start.
    pub fn new(rated_power: f64, duration: f64, round_trip_efficiency: f64, scheme: BesScheme) -> Self {
        BesSpec {
            rated_power,
            duration,
            soc_min: 0.0,
            soc_init: 0.5 * rated_power * duration,
            round_trip_efficiency,
            scheme,
        }
    }

    /// Energy capacity in kWh.
    pub fn soc_max(&self) -> f64 {
        self.rated_power * self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlexSpec {
    /// Share of the base demand that may be curtailed or added in a step.
    pub fraction: f64,
    /// Rolling-window length, hours.
    pub recovery_period: usize,
}

impl FlexSpec {
    pub fn new(fraction: f64, recovery_period: usize) -> Self {
        FlexSpec {
            fraction,
            recovery_period,
        }
    }

    /// Symmetric deviation bound for base demand `d`.
    pub fn max_deviation(&self, d: f64) -> f64 {
        self.fraction * d
    }
}

/// Alternative readings of "prohibits grid exports" for the grid-charging,
/// no-export battery scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportProhibition {
    /// Only battery exports are forbidden; PV may still export.
    #[default]
    BesOnly,
    /// Neither PV nor battery may export.
    All,
}

/// The unit of one optimization: a consumer profile, its assets, a policy and
/// a tariff over a shared horizon.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// kW
    pub demand: TimeSeries,
    /// fractions in [0, 1]
    pub pv_cf: TimeSeries,
    pub pv: PvSpec,
    pub bes: Option<BesSpec>,
    pub flex: Option<FlexSpec>,
    pub policy: NemPolicy,
    pub tariff: Tariff,
    pub calendar: Calendar,
    pub export_prohibition: ExportProhibition,
}

impl Scenario {
    pub fn horizon(&self) -> usize {
        self.demand.len()
    }

    pub fn bes_power(&self) -> f64 {
        self.bes.map_or(0.0, |b| b.rated_power)
    }

    pub fn max_demand(&self) -> f64 {
        self.demand.max()
    }

    /// Restricts every series to `range`. The Nem3 avoided-cost series is
    /// sliced too, so export prices must be built before slicing when
    /// averaging should span the full horizon.
    pub fn slice(&self, range: Range<usize>) -> Scenario {
        let policy = match &self.policy {
            NemPolicy::Nem3 { acc_hourly } => NemPolicy::Nem3 {
                acc_hourly: acc_hourly.slice(range.clone()),
            },
            p => p.clone(),
        };
        Scenario {
            demand: self.demand.slice(range.clone()),
            pv_cf: self.pv_cf.slice(range.clone()),
            pv: self.pv,
            bes: self.bes,
            flex: self.flex.map(|f| FlexSpec {
                recovery_period: f.recovery_period.min(range.len()).max(1),
                ..f
            }),
            policy,
            tariff: self.tariff.slice(range.clone()),
            calendar: self.calendar.slice(range),
            export_prohibition: self.export_prohibition,
        }
    }
}

/// One failed invariant: the offending field and the rule it breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.field, self.rule)
    }
}

fn check_series(out: &mut Vec<Violation>, name: &str, s: &TimeSeries, lo: Option<f64>, hi: Option<f64>) {
    if s.is_empty() {
        out.push(Violation::new(name, "is empty"));
    }
    for (k, &v) in s.values().iter().enumerate() {
        if !v.is_finite() {
            out.push(Violation::new(format!("{name}[{k}]"), "is not finite"));
        } else if lo.is_some_and(|lo| v < lo) {
            out.push(Violation::new(format!("{name}[{k}]"), format!("< {}", lo.unwrap())));
        } else if hi.is_some_and(|hi| v > hi) {
            out.push(Violation::new(format!("{name}[{k}]"), format!("> {}", hi.unwrap())));
        }
    }
}

fn check_len(out: &mut Vec<Violation>, name: &str, len: usize, expected: usize) {
    if len != expected {
        out.push(Violation::new(
            name,
            format!("length mismatch ({len} vs demand length {expected})"),
        ));
    }
}

/// Checks every type invariant of a scenario. An empty result means the
/// scenario can be formulated.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = s.demand.len();

    check_series(&mut out, "demand", &s.demand, Some(0.0), None);
    check_series(&mut out, "pv_cf", &s.pv_cf, Some(0.0), Some(1.0));
    check_series(&mut out, "energy_price", &s.tariff.energy_price, Some(0.0), None);
    check_len(&mut out, "pv_cf", s.pv_cf.len(), n);
    check_len(&mut out, "energy_price", s.tariff.energy_price.len(), n);
    check_len(&mut out, "calendar", s.calendar.len(), n);

    for (i, p) in s.tariff.demand_periods.iter().enumerate() {
        let name = format!("demand_periods[{i}]({})", p.name);
        if !(p.price.is_finite() && p.price >= 0.0) {
            out.push(Violation::new(format!("{name}.price"), "< 0 or not finite"));
        }
        check_len(&mut out, &format!("{name}.mask"), p.mask.len(), n);
    }

    match &s.policy {
        NemPolicy::Nem2 { nbc } if !(nbc.is_finite() && *nbc >= 0.0) => {
            out.push(Violation::new("policy.nbc", "< 0 or not finite"));
        }
        NemPolicy::Nem3 { acc_hourly } => {
            check_series(&mut out, "policy.acc_hourly", acc_hourly, None, None);
            check_len(&mut out, "policy.acc_hourly", acc_hourly.len(), n);
        }
        _ => {}
    }

    if !(s.pv.rated_power.is_finite() && s.pv.rated_power >= 0.0) {
        out.push(Violation::new("pv.rated_power", "< 0 or not finite"));
    }
    let eta = s.pv.inverter_efficiency;
    if !(eta > 0.0 && eta <= 1.0) {
        out.push(Violation::new("pv.inverter_efficiency", "not in (0, 1]"));
    }

    if let Some(b) = &s.bes {
        if !(b.rated_power.is_finite() && b.rated_power >= 0.0) {
            out.push(Violation::new("bes.rated_power", "< 0 or not finite"));
        }
        if !(b.duration.is_finite() && b.duration >= 0.0) {
            out.push(Violation::new("bes.duration", "< 0 or not finite"));
        }
        let soc_max = b.soc_max();
        if !(b.soc_min >= 0.0 && b.soc_min <= b.soc_init && b.soc_init <= soc_max) {
            out.push(Violation::new(
                "bes.soc",
                format!(
                    "requires 0 <= soc_min ({}) <= soc_init ({}) <= soc_max ({})",
                    b.soc_min, b.soc_init, soc_max
                ),
            ));
        }
        let rte = b.round_trip_efficiency;
        if !(rte > 0.0 && rte <= 1.0) {
            out.push(Violation::new("bes.round_trip_efficiency", "not in (0, 1]"));
        }
    }

    if let Some(f) = &s.flex {
        if !(f.fraction >= 0.0 && f.fraction <= 1.0) {
            out.push(Violation::new("flex.fraction", "not in [0, 1]"));
        }
        if f.recovery_period < 1 || f.recovery_period > n {
            out.push(Violation::new(
                "flex.recovery_period",
                format!("not in [1, {n}]"),
            ));
        }
    }

    out
}
