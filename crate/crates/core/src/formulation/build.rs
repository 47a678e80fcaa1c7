use crate::policy::ExportRules;
use crate::types::{BesScheme, Scenario};

use super::model::{Comparator, MilpModel, Role, RowKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Forbid simultaneous charging and discharging with one binary per step.
    pub strict_bes: bool,
}

/// Upper bound on net demand at step `t`.
///
/// Net demand adds at most the battery's charging power and the upward flex
/// deviation to the base demand; every other term subtracts.
pub fn big_m(t: usize, s: &Scenario) -> f64 {
    let d = s.demand.get(t);
    let up = s.flex.map_or(0.0, |f| f.max_deviation(d));
    d + s.bes_power() + up
}

/// Builds the bill-minimization program for a validated scenario.
///
/// Absent assets keep their variables, fixed to zero, so every model has the
/// same per-step layout. Export variables are fixed to zero when `rules`
/// forbids the corresponding export.
pub fn build_milp(s: &Scenario, rules: &ExportRules, opts: &BuildOptions) -> MilpModel {
    let n_steps = s.horizon();
    let mut m = MilpModel::new();
    m.horizon = n_steps;

    let p_bes = s.bes_power();
    let (soc_lo, soc_hi, soc_init, rte) = match &s.bes {
        Some(b) => (b.soc_min, b.soc_max(), b.soc_init, b.round_trip_efficiency),
        None => (0.0, 0.0, 0.0, 1.0),
    };
    let big_ms: Vec<f64> = (0..n_steps).map(|t| big_m(t, s)).collect();

    for role in Role::PER_STEP {
        for t in 0..n_steps {
            let d = s.demand.get(t);
            let pv_avail = s.pv.available(s.pv_cf.get(t));
            let flex_max = s.flex.map_or(0.0, |f| f.max_deviation(d));
            let (lo, hi, cost) = match role {
                Role::PvBtm => (0.0, pv_avail, 0.0),
                Role::PvExp => {
                    let hi = if rules.pv_export_allowed { pv_avail } else { 0.0 };
                    (0.0, hi, -rules.export_price.get(t))
                }
                Role::Cha | Role::DisBtm => (0.0, p_bes, 0.0),
                Role::DisExp => {
                    let hi = if rules.bes_export_allowed { p_bes } else { 0.0 };
                    (0.0, hi, -rules.export_price.get(t))
                }
                Role::DevUp | Role::DevDn => (0.0, flex_max, 0.0),
                Role::Soc => (soc_lo, soc_hi, 0.0),
                Role::DNet => (0.0, big_ms[t], s.tariff.energy_price.get(t)),
                _ => unreachable!(),
            };
            m.add_role_var(role, t, lo, hi, cost);
        }
    }

    for (n, period) in s.tariff.demand_periods.iter().enumerate() {
        let hi = (0..n_steps)
            .filter(|&t| period.mask[t])
            .map(|t| big_ms[t])
            .fold(0.0, f64::max);
        m.add_role_var(Role::DMax, n, 0.0, hi, period.price);
    }

    for &t in &rules.s_set {
        m.add_role_var(Role::Zeta, t, 0.0, 1.0, 0.0);
    }

    if opts.strict_bes && s.bes.is_some() {
        for t in 0..n_steps {
            m.add_role_var(Role::BesMode, t, 0.0, 1.0, 0.0);
        }
    }

    let v = |m: &MilpModel, role: Role, i: usize| m.var(role, i).expect("variable registered above");

    for t in 0..n_steps {
        // d_net = d - p_pv_btm + p_cha - p_dis_btm + d_up - d_dn
        let row = [
            (v(&m, Role::DNet, t), 1.0),
            (v(&m, Role::PvBtm, t), 1.0),
            (v(&m, Role::Cha, t), -1.0),
            (v(&m, Role::DisBtm, t), 1.0),
            (v(&m, Role::DevUp, t), -1.0),
            (v(&m, Role::DevDn, t), 1.0),
        ];
        m.add_row(RowKind::NetDemand(t), row, Comparator::Eq, s.demand.get(t));
    }

    let export_cap = s.pv.rated_power + p_bes;
    for &t in &rules.s_set {
        let zeta = v(&m, Role::Zeta, t);
        let big = big_ms[t];
        m.add_row(
            RowKind::ExportGateNet(t),
            [(v(&m, Role::DNet, t), 1.0), (zeta, big)],
            Comparator::Le,
            big,
        );
        m.add_row(
            RowKind::ExportGateLink(t),
            [(v(&m, Role::PvExp, t), 1.0), (v(&m, Role::DisExp, t), 1.0), (zeta, -export_cap)],
            Comparator::Le,
            0.0,
        );
        let pv_exp = v(&m, Role::PvExp, t);
        let pv_cap = m.variables[pv_exp].upper;
        if pv_cap > 0.0 {
            m.add_row(RowKind::ExportGatePv(t), [(pv_exp, 1.0), (zeta, -pv_cap)], Comparator::Le, 0.0);
        }
        let dis_exp = v(&m, Role::DisExp, t);
        let dis_cap = m.variables[dis_exp].upper;
        if dis_cap > 0.0 {
            m.add_row(RowKind::ExportGateBes(t), [(dis_exp, 1.0), (zeta, -dis_cap)], Comparator::Le, 0.0);
        }
        // With d_net = 0 the assets first serve d - d_dn >= (1 - alpha) d.
        let d = s.demand.get(t);
        let floor = d - s.flex.map_or(0.0, |f| f.max_deviation(d));
        let supply = (m.variables[v(&m, Role::PvBtm, t)].upper + p_bes - floor).max(0.0);
        if supply < pv_cap + dis_cap {
            m.add_row(
                RowKind::ExportGateSupply(t),
                [(pv_exp, 1.0), (dis_exp, 1.0), (zeta, -supply)],
                Comparator::Le,
                0.0,
            );
        }
    }

    for t in 0..n_steps {
        for (n, period) in s.tariff.demand_periods.iter().enumerate() {
            if period.mask[t] {
                m.add_row(
                    RowKind::PeakDemand(t, n),
                    [(v(&m, Role::DNet, t), 1.0), (v(&m, Role::DMax, n), -1.0)],
                    Comparator::Le,
                    0.0,
                );
            }
        }
    }

    for t in 0..n_steps {
        let avail = s.pv.available(s.pv_cf.get(t));
        m.add_row(
            RowKind::PvSplit(t),
            [(v(&m, Role::PvBtm, t), 1.0), (v(&m, Role::PvExp, t), 1.0)],
            Comparator::Le,
            avail,
        );
    }

    if let Some(bes) = &s.bes {
        for t in 0..n_steps {
            m.add_row(
                RowKind::DischargeSplit(t),
                [(v(&m, Role::DisBtm, t), 1.0), (v(&m, Role::DisExp, t), 1.0)],
                Comparator::Le,
                p_bes,
            );
        }
        for t in 0..n_steps {
            // J(t) - J(t-1) - rte * p_cha + p_dis_btm + p_dis_exp = 0, J(-1) = J_init
            let mut row = vec![
                (v(&m, Role::Soc, t), 1.0),
                (v(&m, Role::Cha, t), -rte),
                (v(&m, Role::DisBtm, t), 1.0),
                (v(&m, Role::DisExp, t), 1.0),
            ];
            let rhs = if t == 0 {
                soc_init
            } else {
                row.push((v(&m, Role::Soc, t - 1), -1.0));
                0.0
            };
            m.add_row(RowKind::SocBalance(t), row, Comparator::Eq, rhs);
        }
        m.add_row(
            RowKind::TerminalSoc,
            [(v(&m, Role::Soc, n_steps - 1), 1.0)],
            Comparator::Ge,
            soc_init,
        );
        if bes.scheme == BesScheme::PvChargeWithExport {
            for t in 0..n_steps {
                m.add_row(
                    RowKind::PvOnlyCharge(t),
                    [(v(&m, Role::Cha, t), 1.0), (v(&m, Role::PvBtm, t), -1.0)],
                    Comparator::Le,
                    0.0,
                );
            }
        }
        if opts.strict_bes {
            for t in 0..n_steps {
                let mode = v(&m, Role::BesMode, t);
                m.add_row(
                    RowKind::StrictCharge(t),
                    [(v(&m, Role::Cha, t), 1.0), (mode, -p_bes)],
                    Comparator::Le,
                    0.0,
                );
                m.add_row(
                    RowKind::StrictDischarge(t),
                    [(v(&m, Role::DisBtm, t), 1.0), (v(&m, Role::DisExp, t), 1.0), (mode, p_bes)],
                    Comparator::Le,
                    p_bes,
                );
            }
        }
    }

    if let Some(flex) = &s.flex {
        let dev = |m: &MilpModel, t: usize| [(v(m, Role::DevUp, t), 1.0), (v(m, Role::DevDn, t), -1.0)];
        let all: Vec<(usize, f64)> = (0..n_steps).flat_map(|t| dev(&m, t)).collect();
        m.add_row(RowKind::FlexBalance, all, Comparator::Eq, 0.0);
        let window = flex.recovery_period.clamp(1, n_steps);
        for k in 0..=(n_steps - window) {
            let row: Vec<(usize, f64)> = (k..k + window).flat_map(|t| dev(&m, t)).collect();
            m.add_row(RowKind::FlexWindow(k), row, Comparator::Ge, 0.0);
        }
    }

    m
}
