//! PV-only bills against a closed form. Without storage or flexibility the
//! optimal dispatch self-supplies first and exports any surplus, as long as
//! the export price never exceeds the energy price.

use nemdv_core::calendar::parse_timestamp;
use nemdv_core::fixtures::{Consumer, FixtureSet, DEFAULT_SEED};
use nemdv_core::{build_export_prices, solve_scenario, NemPolicy, PolicyKind, Scenario, SolveOptions, TimeSeries};

fn fixture(kind: Consumer, hours: usize) -> FixtureSet {
    FixtureSet::new(kind, parse_timestamp("2023-07-01T00:00").unwrap(), hours, DEFAULT_SEED)
}

fn closed_form(s: &Scenario) -> f64 {
    let export = build_export_prices(&s.policy, &s.tariff, &s.calendar).unwrap();
    let mut bill = 0.0;
    let mut net = Vec::with_capacity(s.horizon());
    for t in 0..s.horizon() {
        let d = s.demand.get(t);
        let pv = s.pv.available(s.pv_cf.get(t));
        let price = s.tariff.energy_price.get(t);
        let x = export.get(t);
        assert!(x <= price, "closed form needs export price <= energy price at {t}");
        bill += price * (d - pv).max(0.0) - x * (pv - d).max(0.0);
        net.push((d - pv).max(0.0));
    }
    for p in &s.tariff.demand_periods {
        let peak = (0..s.horizon()).filter(|&t| p.mask[t]).map(|t| net[t]).fold(0.0, f64::max);
        bill += p.price * peak;
    }
    bill
}

fn check(kind: Consumer, policy: PolicyKind, pv_ratio: f64) {
    let fx = fixture(kind, 168);
    let mut s = fx.scenario(policy).unwrap();
    s.pv.rated_power *= pv_ratio;
    if let NemPolicy::Nem3 { acc_hourly } = &mut s.policy {
        // Keep avoided costs at or below the energy price.
        let capped = (0..acc_hourly.len()).map(|t| acc_hourly.get(t).min(s.tariff.energy_price.get(t)));
        *acc_hourly = TimeSeries::new(capped.collect()).unwrap();
    }
    let expect = closed_form(&s);
    let r = solve_scenario(&s, &SolveOptions::default()).unwrap();
    assert!(r.is_optimal());
    assert!(r.audit_passed());
    let tol = 1e-7 * expect.abs().max(1.0);
    assert!(
        (r.bill.net_bill - expect).abs() <= tol,
        "{kind:?} {policy:?} pv {pv_ratio}: solved {} vs closed form {expect}",
        r.bill.net_bill
    );
}

#[test]
fn no_nem_matches_closed_form() {
    for pv in [0.0, 0.5, 1.5] {
        check(Consumer::Mep, PolicyKind::NoNem, pv);
        check(Consumer::Mdp, PolicyKind::NoNem, pv);
    }
}

#[test]
fn nem1_matches_closed_form() {
    for pv in [0.5, 1.5] {
        check(Consumer::Mep, PolicyKind::Nem1, pv);
        check(Consumer::Mdp, PolicyKind::Nem1, pv);
    }
}

#[test]
fn nem2_matches_closed_form() {
    for pv in [0.5, 1.5] {
        check(Consumer::Mep, PolicyKind::Nem2, pv);
        check(Consumer::Mdp, PolicyKind::Nem2, pv);
    }
}

#[test]
fn nem3_pv_only_matches_closed_form() {
    check(Consumer::Mdp, PolicyKind::Nem3, 1.0);
    check(Consumer::Mep, PolicyKind::Nem3, 1.5);
}
