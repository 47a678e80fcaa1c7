//! Behind-the-meter bill minimization for consumers with PV, battery storage
//! and flexible demand under net energy metering policies.
//!
//! A [`Scenario`] is validated, turned into [`ExportRules`] by the policy
//! layer, formulated as a [`MilpModel`], solved by the built-in simplex and
//! branch-and-bound, and re-priced with [`compute_bill`].

pub mod calendar;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod formulation;
pub mod io;
pub mod policy;
pub mod solver;
pub mod sweep;
pub mod types;

pub use calendar::{Calendar, DayType, HourLabel};
pub use error::{Error, Result};
pub use engine::{solve_scenario, ScenarioResult, SolveOptions};
pub use formulation::{
    audit_feasibility, big_m, build_milp, compute_bill, extract_dispatch, AuditReport, BillBreakdown, BuildOptions,
    Dispatch, DispatchSolution, MilpModel,
};
pub use policy::{build_export_prices, build_export_rules, compute_export_window, resolve_export_flags, ExportRules};
pub use solver::{solve_lp, solve_milp, SolveStatus, Tolerances};
pub use sweep::{run_sweep, ResultRow, SweepConfig, SweepOptions};
pub use types::{
    validate_scenario, BesScheme, BesSpec, DemandPeriod, ExportProhibition, FlexSpec, NemPolicy, PolicyKind, PvSpec,
    Scenario, Tariff, TimeSeries, Violation,
};
