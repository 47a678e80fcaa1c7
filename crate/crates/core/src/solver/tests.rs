use proptest::prelude::*;

use super::*;
use crate::formulation::{Comparator, MilpModel, RowKind};

fn single_var(lo: f64, up: f64, cost: f64) -> MilpModel {
    let mut m = MilpModel::new();
    m.add_var("x", lo, up, cost, false);
    m
}

#[test]
fn lp_upper_bound_is_hit() {
    let mut m = single_var(0.0, f64::INFINITY, -1.0);
    m.add_row(RowKind::Custom(0), [(0, 1.0)], Comparator::Le, 1.0);
    let s = solve_lp(&m).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.values[0] - 1.0).abs() < 1e-9);
    assert!((s.objective + 1.0).abs() < 1e-9);
}

#[test]
fn lp_contradictory_rows_are_infeasible() {
    let mut m = single_var(0.0, f64::INFINITY, 1.0);
    m.add_row(RowKind::Custom(0), [(0, 1.0)], Comparator::Ge, 2.0);
    m.add_row(RowKind::Custom(1), [(0, 1.0)], Comparator::Le, 1.0);
    assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn lp_unbounded_is_detected() {
    let m = single_var(0.0, f64::INFINITY, -1.0);
    assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Unbounded);
}

/// Battery arbitrage over `prices` with unit demand profile `demand`,
/// P = J̄ = 1, lossless, empty at the start. Returns (model, cha ids, dis ids).
fn battery_lp(prices: &[f64], demand: &[f64]) -> MilpModel {
    let n = prices.len();
    let mut m = MilpModel::new();
    let cha: Vec<usize> = (0..n).map(|t| m.add_var(format!("cha[{t}]"), 0.0, 1.0, 0.0, false)).collect();
    let dis: Vec<usize> = (0..n).map(|t| m.add_var(format!("dis[{t}]"), 0.0, 1.0, 0.0, false)).collect();
    let soc: Vec<usize> = (0..n).map(|t| m.add_var(format!("soc[{t}]"), 0.0, 1.0, 0.0, false)).collect();
    let net: Vec<usize> = (0..n).map(|t| m.add_var(format!("net[{t}]"), 0.0, f64::INFINITY, prices[t], false)).collect();
    let mut row = 0;
    for t in 0..n {
        // net = d + cha - dis
        m.add_row(RowKind::Custom(row), [(net[t], 1.0), (cha[t], -1.0), (dis[t], 1.0)], Comparator::Eq, demand[t]);
        row += 1;
        let mut c = vec![(soc[t], 1.0), (cha[t], -1.0), (dis[t], 1.0)];
        if t > 0 {
            c.push((soc[t - 1], -1.0));
        }
        m.add_row(RowKind::Custom(row), c, Comparator::Eq, 0.0);
        row += 1;
    }
    m
}

/// Exhaustive search over charge/discharge on the lattice {0, 0.5, 1}.
fn battery_oracle(prices: &[f64], demand: &[f64]) -> f64 {
    let n = prices.len();
    let lattice = [0.0, 0.5, 1.0];
    let mut best = f64::INFINITY;
    let total = 9usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut soc = 0.0;
        let mut bill = 0.0;
        let mut ok = true;
        for t in 0..n {
            let cha = lattice[c % 3];
            let dis = lattice[(c / 3) % 3];
            c /= 9;
            soc += cha - dis;
            let net = demand[t] + cha - dis;
            if !(-1e-12..=1.0 + 1e-12).contains(&soc) || net < -1e-12 {
                ok = false;
                break;
            }
            bill += prices[t] * net;
        }
        if ok {
            best = best.min(bill);
        }
    }
    best
}

#[test]
fn battery_arbitrage_matches_enumeration() {
    let prices = [0.1, 0.1, 0.5];
    let demand = [0.0, 0.0, 1.0];
    let m = battery_lp(&prices, &demand);
    let s = solve_milp(&m, 1e-6, 1000).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    let oracle = battery_oracle(&prices, &demand);
    assert!((oracle - 0.1).abs() < 1e-12);
    assert!((s.objective - oracle).abs() < 1e-7, "{} vs {oracle}", s.objective);
    // Charge 1 kWh early, discharge it in step 3.
    assert!((s.values[3 + 2] - 1.0).abs() < 1e-7);
}

#[test]
fn longer_arbitrage_matches_enumeration() {
    let prices = [0.2, 0.1, 0.4, 0.1, 0.3, 0.5];
    let demand = [0.5, 0.0, 1.0, 0.5, 1.0, 1.0];
    let m = battery_lp(&prices, &demand);
    let s = solve_milp(&m, 1e-6, 1000).unwrap();
    assert!((s.objective - battery_oracle(&prices, &demand)).abs() < 1e-7);
}

/// Two-hour export toy: energy 0.3, export [0.5, 0.4], d = 1, PV 2 kW
/// available at t = 0 only, both hours in the export window.
fn export_toy() -> MilpModel {
    let export = [0.5, 0.4];
    let avail = [2.0, 0.0];
    let mut m = MilpModel::new();
    let mut row = 0;
    for t in 0..2 {
        let btm = m.add_var(format!("btm[{t}]"), 0.0, avail[t], 0.0, false);
        let exp = m.add_var(format!("exp[{t}]"), 0.0, avail[t], -export[t], false);
        let net = m.add_var(format!("net[{t}]"), 0.0, f64::INFINITY, 0.3, false);
        let z = m.add_var(format!("zeta[{t}]"), 0.0, 1.0, 0.0, true);
        m.add_row(RowKind::Custom(row), [(net, 1.0), (btm, 1.0)], Comparator::Eq, 1.0);
        m.add_row(RowKind::Custom(row + 1), [(btm, 1.0), (exp, 1.0)], Comparator::Le, avail[t]);
        m.add_row(RowKind::Custom(row + 2), [(net, 1.0), (z, 1.0)], Comparator::Le, 1.0);
        m.add_row(RowKind::Custom(row + 3), [(exp, 1.0), (z, -2.0)], Comparator::Le, 0.0);
        row += 4;
    }
    m
}

/// Enumerates every binary assignment and solves the remaining LP.
fn enumerate_binaries(m: &MilpModel) -> f64 {
    let bins: Vec<usize> = m.binaries().collect();
    let mut best = f64::INFINITY;
    for code in 0..(1usize << bins.len()) {
        let mut fixed = m.clone();
        for (k, &j) in bins.iter().enumerate() {
            let v = ((code >> k) & 1) as f64;
            fixed.variables[j].lower = v;
            fixed.variables[j].upper = v;
        }
        let s = solve_lp(&fixed).unwrap();
        if s.status == LpStatus::Optimal {
            best = best.min(s.objective);
        }
    }
    best
}

#[test]
fn export_toy_matches_enumeration() {
    let m = export_toy();
    let oracle = enumerate_binaries(&m);
    assert!((oracle + 0.2).abs() < 1e-12, "{oracle}");
    for warm_start in [true, false] {
        let opts = MilpOptions { warm_start, ..MilpOptions::default() };
        let s = solve_milp_with(&m, &opts).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective - oracle).abs() < 1e-7);
        assert!(s.bound <= s.objective + 1e-12);
        assert!(s.gap() <= 1e-6);
    }
}

#[test]
fn relaxation_without_gating_is_weaker() {
    let mut m = export_toy();
    for v in &mut m.variables {
        v.is_binary = false;
    }
    let lp = solve_lp(&m).unwrap();
    assert!(lp.objective < -0.2 - 1e-9);
}

#[test]
fn branch_select_examples() {
    assert_eq!(branch_select(&[0.5, 0.9], 1e-6), Some(0));
    assert_eq!(branch_select(&[0.5, 0.5], 1e-6), Some(0));
    assert_eq!(branch_select(&[0.2, 0.6], 1e-6), Some(1));
    assert_eq!(branch_select(&[1.0 - 1e-9], 1e-6), None);
    assert_eq!(branch_select(&[0.0, 1.0], 1e-6), None);
}

#[test]
fn no_binaries_reduces_to_lp() {
    let m = battery_lp(&[0.3, 0.1, 0.2, 0.6], &[1.0, 0.5, 0.0, 1.0]);
    let lp = solve_lp(&m).unwrap();
    let milp = solve_milp(&m, 1e-6, 10).unwrap();
    assert_eq!(milp.values, lp.values);
    assert_eq!(milp.objective, lp.objective);
    assert_eq!(milp.lp_iterations, lp.iterations);
}

#[test]
fn infeasible_root_is_reported() {
    let mut m = export_toy();
    m.add_row(RowKind::Custom(99), [(2, 1.0)], Comparator::Ge, 5.0);
    assert_eq!(solve_milp(&m, 1e-6, 100).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn node_limit_gives_gap_limit() {
    let m = export_toy();
    let s = solve_milp(&m, 0.0, 1).unwrap();
    assert!(matches!(s.status, SolveStatus::GapLimit | SolveStatus::Optimal));
    if s.status == SolveStatus::GapLimit {
        assert!(s.bound <= s.objective);
    }
}

#[test]
fn repeated_solves_are_identical() {
    let m = export_toy();
    let a = solve_milp(&m, 1e-6, 100).unwrap();
    let b = solve_milp(&m, 1e-6, 100).unwrap();
    assert_eq!(a, b);
}

/// Random knapsack-like MILPs: x_i ≤ u_i z_i, Σ x_i ≥ need, fixed cost on z.
fn random_fixed_charge(costs: &[(f64, f64, f64)], need: f64) -> MilpModel {
    let mut m = MilpModel::new();
    let mut sum = Vec::new();
    for (i, &(var_cost, fixed_cost, cap)) in costs.iter().enumerate() {
        let x = m.add_var(format!("x{i}"), 0.0, cap, var_cost, false);
        let z = m.add_var(format!("z{i}"), 0.0, 1.0, fixed_cost, true);
        m.add_row(RowKind::Custom(i), [(x, 1.0), (z, -cap)], Comparator::Le, 0.0);
        sum.push((x, 1.0));
    }
    m.add_row(RowKind::Custom(costs.len()), sum, Comparator::Ge, need);
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bnb_matches_enumeration(
        costs in prop::collection::vec((0.1f64..2.0, 0.0f64..3.0, 0.5f64..3.0), 1..6),
        need in 0.5f64..6.0,
    ) {
        let m = random_fixed_charge(&costs, need);
        let oracle = enumerate_binaries(&m);
        for warm_start in [true, false] {
            let opts = MilpOptions { warm_start, ..MilpOptions::default() };
            let s = solve_milp_with(&m, &opts).unwrap();
            if oracle.is_finite() {
                prop_assert_eq!(s.status, SolveStatus::Optimal);
                prop_assert!((s.objective - oracle).abs() <= 1e-6 * oracle.abs().max(1.0) + 1e-9,
                    "{} vs {}", s.objective, oracle);
                for c in &m.constraints {
                    prop_assert!(c.violation(&s.values) <= 1e-7);
                }
            } else {
                prop_assert_eq!(s.status, SolveStatus::Infeasible);
            }
        }
    }

    #[test]
    fn lp_solution_is_feasible(
        prices in prop::collection::vec(0.0f64..1.0, 2..10),
        dseed in prop::collection::vec(0.0f64..2.0, 10),
    ) {
        let demand = &dseed[..prices.len()];
        let m = battery_lp(&prices, demand);
        let s = solve_lp(&m).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        for c in &m.constraints {
            prop_assert!(c.violation(&s.values) <= 1e-7);
        }
        for (v, x) in m.variables.iter().zip(&s.values) {
            prop_assert!(*x >= v.lower - 1e-7 && *x <= v.upper + 1e-7);
        }
        // Idle battery is always feasible, so the optimum cannot be worse.
        let idle: f64 = prices.iter().zip(demand).map(|(p, d)| p * d).sum();
        prop_assert!(s.objective <= idle + 1e-9);
    }
}

/// The iteration cap applies to each LP solve, not to the running total a
/// long branch-and-bound accumulates.
#[test]
fn iteration_cap_is_per_solve() {
    let m = battery_lp(&[0.2, 0.1, 0.4, 0.1, 0.3, 0.5], &[0.5, 0.0, 1.0, 0.5, 1.0, 1.0]);
    let mut sx = simplex::Simplex::new(&m, Tolerances::default());
    assert_eq!(sx.solve_cold().unwrap(), simplex::Outcome::Optimal);
    let basis = sx.basis();
    sx.iterations = 1_000_000;
    sx.set_bounds(0, 0.0, 0.5);
    assert_eq!(sx.solve_warm(&basis).unwrap(), simplex::Outcome::Optimal);
    assert_eq!(sx.solve_cold().unwrap(), simplex::Outcome::Optimal);
}
