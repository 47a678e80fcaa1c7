use crate::error::{Error, Result};
use crate::solver::{MilpSolution, SolveStatus};

use super::model::{MilpModel, Role};

/// Values of every decision variable of one solved horizon.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dispatch {
    pub p_pv_btm: Vec<f64>,
    pub p_pv_exp: Vec<f64>,
    pub p_cha: Vec<f64>,
    pub p_dis_btm: Vec<f64>,
    pub p_dis_exp: Vec<f64>,
    pub d_dev_up: Vec<f64>,
    pub d_dev_dn: Vec<f64>,
    pub soc: Vec<f64>,
    pub d_net: Vec<f64>,
    /// One per demand period.
    pub d_max: Vec<f64>,
    /// (step, indicator value) for each step of the export window.
    pub zeta: Vec<(usize, f64)>,
    /// Charge-mode indicators, strict battery option only.
    pub bes_mode: Vec<f64>,
}

impl Dispatch {
    pub fn zeros(horizon: usize, periods: usize) -> Self {
        let z = vec![0.0; horizon];
        Dispatch {
            p_pv_btm: z.clone(),
            p_pv_exp: z.clone(),
            p_cha: z.clone(),
            p_dis_btm: z.clone(),
            p_dis_exp: z.clone(),
            d_dev_up: z.clone(),
            d_dev_dn: z.clone(),
            soc: z.clone(),
            d_net: z,
            d_max: vec![0.0; periods],
            zeta: Vec::new(),
            bes_mode: Vec::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.d_net.len()
    }

    pub fn step(&self, role: Role) -> &[f64] {
        match role {
            Role::PvBtm => &self.p_pv_btm,
            Role::PvExp => &self.p_pv_exp,
            Role::Cha => &self.p_cha,
            Role::DisBtm => &self.p_dis_btm,
            Role::DisExp => &self.p_dis_exp,
            Role::DevUp => &self.d_dev_up,
            Role::DevDn => &self.d_dev_dn,
            Role::Soc => &self.soc,
            Role::DNet => &self.d_net,
            Role::DMax => &self.d_max,
            Role::BesMode => &self.bes_mode,
            Role::Zeta => panic!("zeta is indexed by export-window step"),
        }
    }

    fn step_mut(&mut self, role: Role) -> &mut Vec<f64> {
        match role {
            Role::PvBtm => &mut self.p_pv_btm,
            Role::PvExp => &mut self.p_pv_exp,
            Role::Cha => &mut self.p_cha,
            Role::DisBtm => &mut self.p_dis_btm,
            Role::DisExp => &mut self.p_dis_exp,
            Role::DevUp => &mut self.d_dev_up,
            Role::DevDn => &mut self.d_dev_dn,
            Role::Soc => &mut self.soc,
            Role::DNet => &mut self.d_net,
            Role::DMax => &mut self.d_max,
            Role::BesMode => &mut self.bes_mode,
            Role::Zeta => panic!("zeta is indexed by export-window step"),
        }
    }

    /// Replaces the per-step series of `role`.
    pub fn set_step(&mut self, role: Role, values: Vec<f64>) {
        *self.step_mut(role) = values;
    }

    /// Total exports at step `t`.
    pub fn exports(&self, t: usize) -> f64 {
        self.p_pv_exp[t] + self.p_dis_exp[t]
    }

    /// Demultiplexes a solver assignment through the model's variable index.
    pub fn from_assignment(m: &MilpModel, x: &[f64]) -> Result<Self> {
        if x.len() < m.variables.len() {
            return Err(Error::MissingVariable(x.len()));
        }
        let periods = m.var_index.keys().filter(|(r, _)| *r == Role::DMax).count();
        let mut d = Dispatch::zeros(m.horizon, periods);
        for (&(role, i), &id) in &m.var_index {
            match role {
                Role::Zeta => d.zeta.push((i, x[id])),
                Role::BesMode => {
                    if d.bes_mode.len() <= i {
                        d.bes_mode.resize(i + 1, 0.0);
                    }
                    d.bes_mode[i] = x[id];
                }
                _ => d.step_mut(role)[i] = x[id],
            }
        }
        Ok(d)
    }

    /// Inverse of [`Dispatch::from_assignment`]. Variables the dispatch does not
    /// carry (an indicator for a step it does not list) are left at zero.
    pub fn to_assignment(&self, m: &MilpModel) -> Vec<f64> {
        let mut x = vec![0.0; m.variables.len()];
        for (&(role, i), &id) in &m.var_index {
            x[id] = match role {
                Role::Zeta => self.zeta.iter().find(|(s, _)| *s == i).map_or(0.0, |&(_, z)| z),
                Role::BesMode => self.bes_mode.get(i).copied().unwrap_or(0.0),
                _ => self.step(role).get(i).copied().unwrap_or(0.0),
            };
        }
        x
    }

    /// Appends a later horizon's values.
    pub fn extend(&mut self, other: &Dispatch) {
        let offset = self.horizon();
        for role in Role::PER_STEP {
            let src = other.step(role).to_vec();
            self.step_mut(role).extend(src);
        }
        self.zeta.extend(other.zeta.iter().map(|&(s, z)| (s + offset, z)));
        self.bes_mode.extend_from_slice(&other.bes_mode);
    }

    /// Per-step values restricted to `range`, re-based to start at zero.
    /// Period maxima are dropped; see [`super::infer_auxiliaries`].
    pub fn slice(&self, range: std::ops::Range<usize>) -> Dispatch {
        let mut out = Dispatch::zeros(0, 0);
        for role in Role::PER_STEP {
            *out.step_mut(role) = self.step(role)[range.clone()].to_vec();
        }
        out.zeta = self
            .zeta
            .iter()
            .filter(|(s, _)| range.contains(s))
            .map(|&(s, z)| (s - range.start, z))
            .collect();
        if !self.bes_mode.is_empty() {
            out.bes_mode = self.bes_mode[range].to_vec();
        }
        out
    }
}

/// Outcome of one horizon solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSolution {
    pub status: SolveStatus,
    /// $, as reported by the solver.
    pub objective: f64,
    pub values: Option<Dispatch>,
}

impl DispatchSolution {
    pub fn has_values(&self) -> bool {
        self.values.is_some()
    }
}

/// Maps a solver result back onto named roles.
pub fn extract_dispatch(m: &MilpModel, raw: &MilpSolution) -> Result<DispatchSolution> {
    let values = match raw.status {
        SolveStatus::Optimal | SolveStatus::GapLimit if !raw.values.is_empty() => {
            Some(Dispatch::from_assignment(m, &raw.values)?)
        }
        SolveStatus::Optimal => return Err(Error::MissingVariable(0)),
        _ => None,
    };
    Ok(DispatchSolution {
        status: raw.status,
        objective: raw.objective,
        values,
    })
}
