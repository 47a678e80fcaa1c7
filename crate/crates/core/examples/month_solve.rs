//! Solves one synthetic month with every asset and prints solver statistics.
//!
//! cargo run --release -p nemdv-core --example month_solve [mep|mdp] [nem1|nem2|nem3|no_nem] [hours]
//!     [bes power ratio] [bes hours] [gap tol]

use std::time::Instant;

use nemdv_core::calendar::parse_timestamp;
use nemdv_core::fixtures::{Consumer, FixtureSet, DEFAULT_SEED, ROUND_TRIP_EFFICIENCY};
use nemdv_core::{solve_scenario, BesScheme, BesSpec, FlexSpec, PolicyKind, SolveOptions};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("NEMDV_LOG")).init();
    let args: Vec<String> = std::env::args().collect();
    let kind = match args.get(1).map(String::as_str) {
        Some("mdp") => Consumer::Mdp,
        _ => Consumer::Mep,
    };
    let policy: PolicyKind = args
        .get(2)
        .map(|p| serde_json::from_str(&format!("\"{p}\"")).expect("policy"))
        .unwrap_or(PolicyKind::Nem3);
    let hours: usize = args.get(3).map_or(744, |h| h.parse().expect("hours"));
    let num = |k: usize, default: f64| args.get(k).map_or(default, |v| v.parse().expect("number"));
    let (ratio, duration, gap) = (num(4, 0.5), num(5, 2.0), num(6, SolveOptions::default().gap_tol));
    let set = FixtureSet::new(kind, parse_timestamp("2023-07-01T00:00").unwrap(), hours, DEFAULT_SEED);
    let mut s = set.scenario(policy).unwrap();
    let peak = s.max_demand();
    s.bes = Some(BesSpec::new(ratio * peak, duration, ROUND_TRIP_EFFICIENCY, BesScheme::GridChargeWithExport));
    s.flex = Some(FlexSpec::new(0.1, 6));
    let started = Instant::now();
    let r = solve_scenario(&s, &SolveOptions { gap_tol: gap, ..SolveOptions::default() }).unwrap();
    for m in &r.months {
        println!(
            "{:?}: {} binaries={} nodes={} lp_iter={} obj={:.4} bound={:.4} audit_ok={}",
            m.range,
            m.status,
            m.binaries,
            m.nodes,
            m.lp_iterations,
            m.objective,
            m.bound,
            m.audit.is_feasible()
        );
    }
    println!("net bill {:.4} in {:.2?}", r.bill.net_bill, started.elapsed());
}
