use std::fmt;

use crate::types::Scenario;

use super::dispatch::Dispatch;
use super::model::{MilpModel, Role};

#[derive(Debug, Clone, PartialEq)]
pub struct AuditViolation {
    /// Row name such as `soc_balance[4]`, or a bound such as
    /// `soc[4] lower bound`.
    pub name: String,
    pub residual: f64,
}

impl fmt::Display for AuditViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated by {:.3e}", self.name, self.residual)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub violations: Vec<AuditViolation>,
    /// Steps where the battery charges and discharges at once. Reported, not
    /// treated as infeasible.
    pub simultaneous_charge_discharge: Vec<usize>,
}

impl AuditReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates every bound, row and integrality requirement of `m` at the
/// dispatch and lists those violated by more than `tol`.
pub fn audit_feasibility(d: &Dispatch, m: &MilpModel, tol: f64) -> AuditReport {
    let x = d.to_assignment(m);
    let mut report = AuditReport::default();

    for (v, &xj) in m.variables.iter().zip(&x) {
        if !xj.is_finite() {
            report.violations.push(AuditViolation {
                name: format!("{} is not finite", v.name),
                residual: f64::INFINITY,
            });
            continue;
        }
        if xj < v.lower - tol {
            report.violations.push(AuditViolation {
                name: format!("{} lower bound", v.name),
                residual: v.lower - xj,
            });
        }
        if xj > v.upper + tol {
            report.violations.push(AuditViolation {
                name: format!("{} upper bound", v.name),
                residual: xj - v.upper,
            });
        }
        if v.is_binary {
            let frac = (xj - xj.round()).abs();
            if frac > tol {
                report.violations.push(AuditViolation {
                    name: format!("{} integrality", v.name),
                    residual: frac,
                });
            }
        }
    }

    for row in &m.constraints {
        let r = row.violation(&x);
        if r > tol {
            report.violations.push(AuditViolation {
                name: row.kind.to_string(),
                residual: r,
            });
        }
    }

    for t in 0..d.horizon() {
        if d.p_cha[t] > tol && d.p_dis_btm[t] + d.p_dis_exp[t] > tol {
            report.simultaneous_charge_discharge.push(t);
        }
    }
    report
}

/// Fills the auxiliary values a dispatch file does not carry: each period
/// maximum becomes the largest net demand in the period, and each export
/// indicator is set exactly where exports exceed `tol`.
pub fn infer_auxiliaries(d: &mut Dispatch, m: &MilpModel, s: &Scenario, tol: f64) {
    d.d_max = s
        .tariff
        .demand_periods
        .iter()
        .map(|p| {
            (0..d.horizon())
                .filter(|&t| p.mask[t])
                .map(|t| d.d_net[t])
                .fold(0.0, f64::max)
        })
        .collect();
    d.zeta = m
        .var_index
        .keys()
        .filter(|(r, _)| *r == Role::Zeta)
        .map(|&(_, t)| (t, if d.exports(t) > tol { 1.0 } else { 0.0 }))
        .collect();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::build::{build_milp, BuildOptions};
    use crate::policy::build_export_rules;
    use crate::types::tests::day_scenario;
    use crate::types::{NemPolicy, TimeSeries};

    /// Idle assets: PV covers nothing, the battery holds its initial charge and
    /// the grid serves the whole demand.
    fn idle_dispatch(s: &Scenario) -> Dispatch {
        let n = s.horizon();
        let mut d = Dispatch::zeros(n, s.tariff.demand_periods.len());
        d.soc = vec![s.bes.unwrap().soc_init; n];
        d.d_net = s.demand.values().to_vec();
        d.d_max = vec![s.max_demand()];
        d
    }

    #[test]
    fn idle_dispatch_is_feasible() {
        let s = day_scenario();
        let rules = build_export_rules(&s).unwrap();
        let m = build_milp(&s, &rules, &BuildOptions::default());
        let report = audit_feasibility(&idle_dispatch(&s), &m, 1e-6);
        assert!(report.is_feasible(), "{:?}", report.violations);
    }

    #[test]
    fn soc_below_minimum_is_named() {
        let s = day_scenario();
        let rules = build_export_rules(&s).unwrap();
        let m = build_milp(&s, &rules, &BuildOptions::default());
        let mut d = idle_dispatch(&s);
        // Drain the battery to -5 kWh by step 3 and recharge it by step 5 so
        // that only the state-of-charge bound breaks.
        let init = s.bes.unwrap().soc_init;
        let rte = s.bes.unwrap().round_trip_efficiency;
        d.p_dis_btm[2] = 30.0;
        d.p_dis_btm[3] = init - 25.0;
        d.p_cha[4] = (init + 5.0) / (2.0 * rte);
        d.p_cha[5] = (init + 5.0) / (2.0 * rte);
        d.soc[2] = init - 30.0;
        d.soc[3] = -5.0;
        d.soc[4] = -5.0 + (init + 5.0) / 2.0;
        d.d_net = crate::formulation::bill::net_demand(&d, &s);
        infer_auxiliaries(&mut d, &m, &s, 1e-9);
        let report = audit_feasibility(&d, &m, 1e-6);
        let names: Vec<&str> = report.violations.iter().map(|v| v.name.as_str()).collect();
        assert!(names.contains(&"soc[3] lower bound"), "{names:?}");
        assert_eq!(
            names.iter().filter(|n| n.starts_with("soc[")).count(),
            1,
            "{names:?}"
        );
    }

    #[test]
    fn export_with_positive_net_demand_breaks_gate() {
        let mut s = day_scenario();
        let acc: Vec<f64> = (0..24).map(|t| if t == 12 { 1.0 } else { 0.0 }).collect();
        s.policy = NemPolicy::Nem3 {
            acc_hourly: TimeSeries::new(acc).unwrap(),
        };
        let rules = build_export_rules(&s).unwrap();
        assert_eq!(rules.s_set, vec![12]);
        let m = build_milp(&s, &rules, &BuildOptions::default());
        let mut d = idle_dispatch(&s);
        d.p_pv_exp[12] = 10.0;
        infer_auxiliaries(&mut d, &m, &s, 1e-9);
        assert_eq!(d.zeta, vec![(12, 1.0)]);
        let report = audit_feasibility(&d, &m, 1e-6);
        let names: Vec<&str> = report.violations.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["export_gate_net[12]"]);
    }

    #[test]
    fn simultaneous_operation_is_reported_not_failed() {
        let s = day_scenario();
        let rules = build_export_rules(&s).unwrap();
        let m = build_milp(&s, &rules, &BuildOptions::default());
        let mut d = idle_dispatch(&s);
        let rte = s.bes.unwrap().round_trip_efficiency;
        d.p_cha[2] = 10.0;
        d.p_dis_btm[2] = 10.0 * rte;
        d.d_net[2] += 10.0 - 10.0 * rte;
        d.d_max[0] = d.d_max[0].max(d.d_net[2]);
        let report = audit_feasibility(&d, &m, 1e-6);
        assert!(report.is_feasible(), "{:?}", report.violations);
        assert_eq!(report.simultaneous_charge_discharge, vec![2]);
    }
}
