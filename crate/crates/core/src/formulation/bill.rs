use std::ops::{Add, AddAssign};

use crate::policy::ExportRules;
use crate::types::Scenario;

use super::dispatch::Dispatch;

/// Bill components, all in $.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BillBreakdown {
    pub demand_charge_total: f64,
    pub energy_charge_total: f64,
    pub export_revenue: f64,
    pub net_bill: f64,
}

impl BillBreakdown {
    pub fn new(demand_charge_total: f64, energy_charge_total: f64, export_revenue: f64) -> Self {
        BillBreakdown {
            demand_charge_total,
            energy_charge_total,
            export_revenue,
            net_bill: demand_charge_total + energy_charge_total - export_revenue,
        }
    }
}

impl Add for BillBreakdown {
    type Output = BillBreakdown;

    fn add(self, o: BillBreakdown) -> BillBreakdown {
        BillBreakdown::new(
            self.demand_charge_total + o.demand_charge_total,
            self.energy_charge_total + o.energy_charge_total,
            self.export_revenue + o.export_revenue,
        )
    }
}

impl AddAssign for BillBreakdown {
    fn add_assign(&mut self, o: BillBreakdown) {
        *self = *self + o;
    }
}

/// Net demand at each step, rebuilt from the asset dispatch.
pub fn net_demand(d: &Dispatch, s: &Scenario) -> Vec<f64> {
    (0..d.horizon())
        .map(|t| {
            s.demand.get(t) - d.p_pv_btm[t] + d.p_cha[t] - d.p_dis_btm[t] + d.d_dev_up[t] - d.d_dev_dn[t]
        })
        .collect()
}

/// Re-prices a dispatch from its asset schedule alone.
///
/// Net demand is rebuilt from the asset powers and each demand charge applies
/// to the largest net demand inside its period, so neither the solver's
/// objective nor its `d_net`/`d_max` values are trusted.
pub fn compute_bill(d: &Dispatch, s: &Scenario, rules: &ExportRules) -> BillBreakdown {
    let net = net_demand(d, s);
    let energy: f64 = net
        .iter()
        .enumerate()
        .map(|(t, &x)| s.tariff.energy_price.get(t) * x)
        .sum();
    let demand: f64 = s
        .tariff
        .demand_periods
        .iter()
        .map(|p| {
            let peak = net
                .iter()
                .enumerate()
                .filter(|&(t, _)| p.mask[t])
                .map(|(_, &x)| x)
                .fold(0.0, f64::max);
            p.price * peak
        })
        .sum();
    let export: f64 = (0..d.horizon())
        .map(|t| rules.export_price.get(t) * d.exports(t))
        .sum();
    BillBreakdown::new(demand, energy, export)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::{parse_timestamp, Calendar};
    use crate::policy::build_export_rules;
    use crate::types::{DemandPeriod, ExportProhibition, NemPolicy, PvSpec, Tariff, TimeSeries};

    fn one_step(demand: f64, price: f64, periods: Vec<DemandPeriod>) -> Scenario {
        Scenario {
            demand: TimeSeries::new(vec![demand]).unwrap(),
            pv_cf: TimeSeries::new(vec![0.0]).unwrap(),
            pv: PvSpec::new(0.0, 1.0),
            bes: None,
            flex: None,
            policy: NemPolicy::NoNem,
            tariff: Tariff {
                energy_price: TimeSeries::new(vec![price]).unwrap(),
                demand_periods: periods,
            },
            calendar: Calendar::hourly(parse_timestamp("2023-07-03T12:00").unwrap(), 1, &[]),
            export_prohibition: ExportProhibition::BesOnly,
        }
    }

    #[test]
    fn zero_dispatch_zero_demand() {
        let s = one_step(0.0, 0.2, vec![]);
        let rules = build_export_rules(&s).unwrap();
        assert_eq!(compute_bill(&Dispatch::zeros(1, 0), &s, &rules).net_bill, 0.0);
    }

    #[test]
    fn energy_charge_only() {
        let s = one_step(10.0, 0.2, vec![]);
        let rules = build_export_rules(&s).unwrap();
        let mut d = Dispatch::zeros(1, 0);
        d.d_net[0] = 10.0;
        let bill = compute_bill(&d, &s, &rules);
        assert!((bill.net_bill - 2.0).abs() < 1e-12);
        assert_eq!(bill.demand_charge_total, 0.0);
        assert_eq!(bill.export_revenue, 0.0);
    }

    #[test]
    fn demand_charge_on_peak() {
        let s = one_step(
            5.0,
            0.0,
            vec![DemandPeriod {
                name: "max".into(),
                price: 20.0,
                mask: vec![true],
            }],
        );
        let rules = build_export_rules(&s).unwrap();
        let mut d = Dispatch::zeros(1, 1);
        d.d_net[0] = 5.0;
        d.d_max[0] = 5.0;
        let bill = compute_bill(&d, &s, &rules);
        assert_eq!(bill.demand_charge_total, 100.0);
        assert_eq!(bill.net_bill, 100.0);
    }

    #[test]
    fn breakdown_identity_survives_addition() {
        let a = BillBreakdown::new(1.0, 2.0, 0.5);
        let b = BillBreakdown::new(3.0, 4.0, 1.5);
        let c = a + b;
        assert_eq!(c.net_bill, c.demand_charge_total + c.energy_charge_total - c.export_revenue);
        assert_eq!(c.net_bill, 8.0);
    }
}
