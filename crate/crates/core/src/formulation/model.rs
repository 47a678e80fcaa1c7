use std::collections::BTreeMap;
use std::fmt;

/// Decision-variable roles. Per-step roles are indexed by `t`, `DMax` by
/// demand period `n`, `Zeta` by the step `s` of the export window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    PvBtm,
    PvExp,
    Cha,
    DisBtm,
    DisExp,
    DevUp,
    DevDn,
    Soc,
    DNet,
    DMax,
    Zeta,
    /// Charge-mode binary, present only with the strict battery option.
    BesMode,
}

impl Role {
    /// Roles with one variable per step, in variable-id order.
    pub const PER_STEP: [Role; 9] = [
        Role::PvBtm,
        Role::PvExp,
        Role::Cha,
        Role::DisBtm,
        Role::DisExp,
        Role::DevUp,
        Role::DevDn,
        Role::Soc,
        Role::DNet,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::PvBtm => "p_pv_btm",
            Role::PvExp => "p_pv_exp",
            Role::Cha => "p_cha",
            Role::DisBtm => "p_dis_btm",
            Role::DisExp => "p_dis_exp",
            Role::DevUp => "d_dev_up",
            Role::DevDn => "d_dev_dn",
            Role::Soc => "soc",
            Role::DNet => "d_net",
            Role::DMax => "d_max",
            Role::Zeta => "zeta_net",
            Role::BesMode => "bes_mode",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub is_binary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Le,
    Eq,
    Ge,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
        }
    }
}

/// What a constraint row encodes; used to name rows in audits and dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowKind {
    /// Net demand definition at step t.
    NetDemand(usize),
    /// Zero net demand when the export indicator is set.
    ExportGateNet(usize),
    /// Exports only when the export indicator is set.
    ExportGateLink(usize),
    /// PV exports within their own availability times the indicator; implied
    /// by the two gate rows at integral indicators, tighter in relaxations.
    ExportGatePv(usize),
    /// Battery exports within rated power times the indicator.
    ExportGateBes(usize),
    /// Total exports within the supply left after serving the
    /// non-deferrable demand, times the indicator.
    ExportGateSupply(usize),
    /// Net demand at t bounded by the period maximum n.
    PeakDemand(usize, usize),
    PvSplit(usize),
    DischargeSplit(usize),
    SocBalance(usize),
    TerminalSoc,
    PvOnlyCharge(usize),
    FlexBalance,
    /// Rolling window starting at step k.
    FlexWindow(usize),
    StrictCharge(usize),
    StrictDischarge(usize),
    /// Rows built by hand outside the scenario formulation.
    Custom(usize),
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RowKind::NetDemand(t) => write!(f, "net_demand[{t}]"),
            RowKind::ExportGateNet(s) => write!(f, "export_gate_net[{s}]"),
            RowKind::ExportGateLink(s) => write!(f, "export_gate_link[{s}]"),
            RowKind::ExportGatePv(s) => write!(f, "export_gate_pv[{s}]"),
            RowKind::ExportGateBes(s) => write!(f, "export_gate_bes[{s}]"),
            RowKind::ExportGateSupply(s) => write!(f, "export_gate_supply[{s}]"),
            RowKind::PeakDemand(t, n) => write!(f, "peak_demand[{t},{n}]"),
            RowKind::PvSplit(t) => write!(f, "pv_split[{t}]"),
            RowKind::DischargeSplit(t) => write!(f, "discharge_split[{t}]"),
            RowKind::SocBalance(t) => write!(f, "soc_balance[{t}]"),
            RowKind::TerminalSoc => write!(f, "terminal_soc"),
            RowKind::PvOnlyCharge(t) => write!(f, "pv_only_charge[{t}]"),
            RowKind::FlexBalance => write!(f, "flex_balance"),
            RowKind::FlexWindow(k) => write!(f, "flex_window[{k}]"),
            RowKind::StrictCharge(t) => write!(f, "strict_charge[{t}]"),
            RowKind::StrictDischarge(t) => write!(f, "strict_discharge[{t}]"),
            RowKind::Custom(i) => write!(f, "row[{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub kind: RowKind,
    /// (variable id, coefficient), ids strictly increasing.
    pub coeffs: Vec<(usize, f64)>,
    pub cmp: Comparator,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row; zero when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.cmp {
            Comparator::Le => (lhs - self.rhs).max(0.0),
            Comparator::Ge => (self.rhs - lhs).max(0.0),
            Comparator::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Solver-facing mixed-integer linear program (minimization).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub var_index: BTreeMap<(Role, usize), usize>,
    /// Number of steps for per-step roles; zero for hand-built models.
    pub horizon: usize,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64, is_binary: bool) -> usize {
        debug_assert!(lower <= upper, "bad bounds [{lower}, {upper}]");
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            cost,
            is_binary,
        });
        self.variables.len() - 1
    }

    pub fn add_role_var(&mut self, role: Role, index: usize, lower: f64, upper: f64, cost: f64) -> usize {
        let is_binary = matches!(role, Role::Zeta | Role::BesMode);
        let id = self.add_var(format!("{}[{index}]", role.as_str()), lower, upper, cost, is_binary);
        self.var_index.insert((role, index), id);
        id
    }

    /// Adds a row; duplicate ids are merged and zero coefficients dropped.
    pub fn add_row(&mut self, kind: RowKind, coeffs: impl IntoIterator<Item = (usize, f64)>, cmp: Comparator, rhs: f64) {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (j, a) in coeffs {
            *merged.entry(j).or_insert(0.0) += a;
        }
        let coeffs = merged.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.constraints.push(Constraint { kind, coeffs, cmp, rhs });
    }

    pub fn var(&self, role: Role, index: usize) -> Option<usize> {
        self.var_index.get(&(role, index)).copied()
    }

    pub fn binaries(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables.iter().enumerate().filter(|(_, v)| v.is_binary).map(|(j, _)| j)
    }

    pub fn num_binaries(&self) -> usize {
        self.binaries().count()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, &xj)| v.cost * xj).sum()
    }

    /// Number of rows of the given kind predicate.
    pub fn count_rows(&self, pred: impl Fn(&RowKind) -> bool) -> usize {
        self.constraints.iter().filter(|c| pred(&c.kind)).count()
    }

    /// Checks the structural invariants: ordered bounds, binary bounds within
    /// [0, 1] and row references to existing variables.
    pub fn check_structure(&self) -> Result<(), String> {
        for (j, v) in self.variables.iter().enumerate() {
            if !(v.lower <= v.upper) {
                return Err(format!("variable {j} ({}) has bounds [{}, {}]", v.name, v.lower, v.upper));
            }
            if v.is_binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(format!("binary variable {j} ({}) has bounds [{}, {}]", v.name, v.lower, v.upper));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if let Some(&(j, _)) = c.coeffs.iter().find(|&&(j, _)| j >= self.variables.len()) {
                return Err(format!("row {i} ({}) references missing variable {j}", c.kind));
            }
        }
        Ok(())
    }
}
