//! Bill-minimization model construction, dispatch extraction, re-pricing and
//! feasibility auditing.

mod audit;
mod bill;
mod build;
mod dispatch;
mod model;

pub use audit::{audit_feasibility, infer_auxiliaries, AuditReport, AuditViolation};
pub use bill::{compute_bill, net_demand, BillBreakdown};
pub use build::{big_m, build_milp, BuildOptions};
pub use dispatch::{extract_dispatch, Dispatch, DispatchSolution};
pub use model::{Comparator, Constraint, MilpModel, Role, RowKind, Variable};
