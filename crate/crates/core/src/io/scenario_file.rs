use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calendar::{parse_date, parse_timestamp, Calendar};
use crate::error::{Error, Result};
use crate::sweep::{BaselineRule, BesAxes, FlexAxes, SweepConfig};
use crate::types::{
    BesScheme, BesSpec, ExportProhibition, FlexSpec, NemPolicy, PolicyKind, PvSpec, Scenario, TimeSeries,
    NEM2_NON_BYPASSABLE_CHARGE,
};

use super::profile::load_profile_labeled;
use super::tariff::load_tariff;

/// PV rating given directly in kW or as a fraction of maximum demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rated_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub inverter_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rated_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_ratio: Option<f64>,
    /// hours
    pub duration: f64,
    pub round_trip_efficiency: f64,
    pub scheme: BesScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soc_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soc_init: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlexEntry {
    pub fraction: f64,
    pub recovery_period: usize,
}

/// Sweep axes. Battery axes are swept when `bes_power_ratio` is given and
/// flexibility axes when `flex_fraction` is; missing companions fall back to
/// the scenario's own `bes` / `flex` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub pv_ratio: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bes_power_ratio: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bes_duration_hours: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Vec<BesScheme>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_trip_efficiency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flex_fraction: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery_hours: Option<Vec<usize>>,
    pub policy: Vec<PolicyKind>,
    #[serde(default)]
    pub baseline: BaselineRule,
}

/// Scenario file contents. Relative paths resolve against the file's
/// directory. `start` is required unless the demand profile is keyed by
/// timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub demand: PathBuf,
    pub pv_cf: PathBuf,
    pub tariff: PathBuf,
    /// Hourly avoided costs; required for NEM 3.0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acc: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holidays: Vec<String>,
    pub pv: PvEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bes: Option<BesEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flex: Option<FlexEntry>,
    pub policy: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbc: Option<f64>,
    #[serde(default)]
    pub export_prohibition: ExportProhibition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepEntry>,
}

#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    /// Avoided costs when the file references them, whatever the policy.
    pub acc: Option<TimeSeries>,
    pub sweep: Option<SweepConfig>,
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn one_of(what: &str, direct: Option<f64>, ratio: Option<f64>, peak: f64) -> Result<f64> {
    match (direct, ratio) {
        (Some(p), None) => Ok(p),
        (None, Some(r)) => Ok(r * peak),
        _ => Err(config(format!("{what}: give exactly one of rated_power and a ratio"))),
    }
}

/// Loads a scenario file and every file it references.
pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<LoadedScenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let dir = path.parent().unwrap_or(Path::new("."));
    file.resolve(dir)
}

impl ScenarioFile {
    /// Builds the scenario, resolving relative paths against `dir`.
    pub fn resolve(&self, dir: &Path) -> Result<LoadedScenario> {
        let at = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { dir.join(p) };
        let demand = load_profile_labeled(at(&self.demand))?;
        let pv_cf = load_profile_labeled(at(&self.pv_cf))?.series;
        let acc = match &self.acc {
            Some(p) => Some(load_profile_labeled(at(p))?.series),
            None => None,
        };

        let holidays = self
            .holidays
            .iter()
            .map(|h| parse_date(h).ok_or_else(|| config(format!("bad holiday date `{h}`"))))
            .collect::<Result<Vec<_>>>()?;
        let start = match (&self.start, &demand.timestamps) {
            (Some(s), _) => parse_timestamp(s).ok_or_else(|| config(format!("bad start timestamp `{s}`")))?,
            (None, Some(ts)) => ts[0],
            (None, None) => return Err(config("`start` is required when profiles are keyed by index")),
        };
        let calendar = Calendar::hourly(start, demand.series.len(), &holidays);
        let tariff = load_tariff(at(&self.tariff), &calendar)?;

        let peak = demand.series.max();
        let pv = PvSpec::new(
            one_of("pv", self.pv.rated_power, self.pv.ratio, peak)?,
            self.pv.inverter_efficiency,
        );
        let bes = match &self.bes {
            Some(b) => {
                let power = one_of("bes", b.rated_power, b.power_ratio, peak)?;
                let mut spec = BesSpec::new(power, b.duration, b.round_trip_efficiency, b.scheme);
                if let Some(v) = b.soc_min {
                    spec.soc_min = v;
                }
                if let Some(v) = b.soc_init {
                    spec.soc_init = v;
                }
                Some(spec)
            }
            None => None,
        };
        let flex = self.flex.as_ref().map(|f| FlexSpec::new(f.fraction, f.recovery_period));
        let nbc = self.nbc.unwrap_or(NEM2_NON_BYPASSABLE_CHARGE);
        let policy = match self.policy {
            PolicyKind::NoNem => NemPolicy::NoNem,
            PolicyKind::Nem1 => NemPolicy::Nem1,
            PolicyKind::Nem2 => NemPolicy::Nem2 { nbc },
            PolicyKind::Nem3 => NemPolicy::Nem3 {
                acc_hourly: acc.clone().ok_or_else(|| config("policy nem3 requires `acc`"))?,
            },
        };
        let scenario = Scenario {
            demand: demand.series,
            pv_cf,
            pv,
            bes,
            flex,
            policy,
            tariff,
            calendar,
            export_prohibition: self.export_prohibition,
        };

        let sweep = match &self.sweep {
            None => None,
            Some(sw) => {
                let bes_axes = match &sw.bes_power_ratio {
                    None => None,
                    Some(ratios) => {
                        let base = self.bes.as_ref();
                        Some(BesAxes {
                            power_ratio: ratios.clone(),
                            duration_hours: sw
                                .bes_duration_hours
                                .clone()
                                .or_else(|| base.map(|b| vec![b.duration]))
                                .ok_or_else(|| config("sweep: bes_duration_hours required"))?,
                            scheme: sw
                                .scheme
                                .clone()
                                .or_else(|| base.map(|b| vec![b.scheme]))
                                .ok_or_else(|| config("sweep: scheme required"))?,
                            round_trip_efficiency: sw
                                .round_trip_efficiency
                                .or_else(|| base.map(|b| b.round_trip_efficiency))
                                .ok_or_else(|| config("sweep: round_trip_efficiency required"))?,
                        })
                    }
                };
                let flex_axes = match &sw.flex_fraction {
                    None => None,
                    Some(fr) => Some(FlexAxes {
                        fraction: fr.clone(),
                        recovery_hours: sw
                            .recovery_hours
                            .clone()
                            .or_else(|| self.flex.as_ref().map(|f| vec![f.recovery_period]))
                            .ok_or_else(|| config("sweep: recovery_hours required"))?,
                    }),
                };
                let mut cfg = SweepConfig::new(scenario.clone(), sw.pv_ratio.clone(), sw.policy.clone());
                cfg.acc = acc.clone();
                cfg.nbc = nbc;
                cfg.bes = bes_axes;
                cfg.flex = flex_axes;
                cfg.baseline = sw.baseline;
                Some(cfg)
            }
        };
        Ok(LoadedScenario { scenario, acc, sweep })
    }
}
