//! Numerical evolution of an [`EffectiveSystem`]: a compiled right-hand side,
//! fixed-step RK4, Dormand–Prince 5(4) with PI step control and dense output,
//! per-sample diagnostics, and validity/uncertainty monitors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::eom::{system_variables, EffectiveSystem, Source, Variable};
use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol};
use crate::moment::{MomentIndex, SystemState};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    #[default]
    Dopri5,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "dopri5" => Ok(Method::Dopri5),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4 => "rk4",
            Method::Dopri5 => "dopri5",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub atol: f64,
    pub rtol: f64,
    /// Fixed step for RK4; first trial step for DOPRI5 (0 picks one automatically).
    pub initial_step: f64,
    pub max_step: f64,
    pub t_end: f64,
    pub r_min: f64,
    pub validity_threshold: f64,
    /// Lower bound on |p| in the momentum validity ratio.
    pub p_floor: f64,
    /// Uniform output spacing; `None` stores every accepted step.
    pub sample_interval: Option<f64>,
    pub max_steps: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Dopri5,
            atol: 1e-10,
            rtol: 1e-10,
            initial_step: 0.0,
            max_step: 0.1,
            t_end: 10.0,
            r_min: 1e-6,
            validity_threshold: 0.5,
            p_floor: 1e-3,
            sample_interval: None,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.atol > 0.0 && self.rtol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive and finite");
        }
        if !(self.r_min > 0.0) {
            return bad("r_min must be positive");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step must be positive");
        }
        if !(self.initial_step >= 0.0) {
            return bad("initial_step must be nonnegative");
        }
        if self.method == Method::Rk4 && self.initial_step <= 0.0 {
            return bad("rk4 needs a positive initial_step");
        }
        if let Some(dt) = self.sample_interval {
            if !(dt > 0.0) {
                return bad("sample_interval must be positive");
            }
        }
        if !(self.validity_threshold > 0.0 && self.p_floor > 0.0) {
            return bad("validity threshold and p_floor must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Term {
    coeff: f64,
    powers: Vec<(usize, i32)>,
    moments: Vec<usize>,
}

impl Term {
    #[inline]
    fn eval(&self, y: &[f64]) -> f64 {
        let mut v = self.coeff;
        for &(s, e) in &self.powers {
            v *= y[s].powi(e);
        }
        for &m in &self.moments {
            v *= y[m];
        }
        v
    }
}

fn eval_terms(terms: &[Term], y: &[f64]) -> f64 {
    terms.iter().map(|t| t.eval(y)).sum()
}

enum Fault {
    Radius(f64),
    NonFinite(usize),
}

/// Flat evaluation plan: parameters and hbar folded into coefficients.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    pub variables: Vec<String>,
    pub dofs: usize,
    pub order: u32,
    /// Indices with a nonzero rhs; every other slot is never written.
    live: Vec<usize>,
    rows: Vec<Vec<Term>>,
    energy: Vec<Term>,
    singular: Option<usize>,
    r_min: f64,
    /// Per dof: slots of `G^{2,0}`, `G^{1,1}`, `G^{0,2}` in that pair.
    pair_slots: Vec<(usize, usize, usize)>,
    hbar: f64,
    pub notices: Vec<String>,
}

fn compile_expr(
    e: &Expr,
    slot_of: &dyn Fn(&MomentIndex) -> Option<usize>,
    params: &[f64],
    hbar: f64,
) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    'terms: for (mono, c) in e.terms() {
        let mut coeff = *c.numer() as f64 / *c.denom() as f64;
        coeff *= hbar.powi(mono.hbar as i32);
        let mut powers = Vec::new();
        for &(s, p) in &mono.powers {
            match s {
                Symbol::Var(i) => powers.push((i as usize, p)),
                Symbol::Param(j) => {
                    let v = params.get(j as usize).ok_or_else(|| {
                        Error::IncompleteState(format!("missing parameter {j}"))
                    })?;
                    coeff *= v.powi(p);
                }
            }
        }
        let mut moments = Vec::new();
        for g in &mono.moments {
            match slot_of(g) {
                Some(s) => moments.push(s),
                // above the truncation order: zero
                None => continue 'terms,
            }
        }
        out.push(Term {
            coeff,
            powers,
            moments,
        });
    }
    Ok(out)
}

impl CompiledSystem {
    pub fn new(system: &EffectiveSystem, params: &[f64], hbar: f64, r_min: f64) -> Result<Self> {
        let model = &system.model;
        if params.len() != model.parameters.len() {
            return Err(Error::IncompleteState(format!(
                "expected {} parameters ({}), got {}",
                model.parameters.len(),
                model.parameters.join(", "),
                params.len()
            )));
        }
        let vars = system.variables();
        let nc = 2 * model.dofs;
        let index: std::collections::HashMap<MomentIndex, usize> = vars
            .iter()
            .enumerate()
            .filter_map(|(i, v)| match v {
                Variable::Moment(g) => Some((g.clone(), i)),
                _ => None,
            })
            .collect();
        let slot_of = |g: &MomentIndex| index.get(g).copied();
        let mut notices = Vec::new();
        let mut rows = Vec::with_capacity(vars.len());
        let mut live = Vec::new();
        for (i, eq) in system.equations.iter().enumerate() {
            let name = eq.var.name(model);
            if eq.source == Source::NotPrinted {
                return Err(Error::InvalidConfig(format!(
                    "no equation of motion for {name}; this system cannot be integrated"
                )));
            }
            if !eq.imaginary.is_zero() {
                notices.push(format!("{name}: imaginary-flagged terms excluded from integration"));
            }
            let terms = compile_expr(&eq.rhs, &slot_of, params, hbar)?;
            if !terms.is_empty() {
                live.push(i);
            }
            rows.push(terms);
        }
        let energy = compile_expr(&system.hamiltonian, &slot_of, params, hbar)?;
        let mut pair_slots = Vec::new();
        for dof in 0..model.dofs {
            let g = |a: u32, b: u32| {
                let mut flat = vec![0; nc];
                flat[2 * dof] = a;
                flat[2 * dof + 1] = b;
                index[&MomentIndex::new(&flat)]
            };
            pair_slots.push((g(2, 0), g(1, 1), g(0, 2)));
        }
        Ok(CompiledSystem {
            variables: vars.iter().map(|v| v.name(model)).collect(),
            dofs: model.dofs,
            order: system.order,
            live,
            rows,
            energy,
            singular: model.singular_slot,
            r_min,
            pair_slots,
            hbar,
            notices,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Names of slots whose rhs compiled to nothing.
    pub fn frozen(&self) -> Vec<&str> {
        (0..self.len())
            .filter(|i| !self.live.contains(i))
            .map(|i| self.variables[i].as_str())
            .collect()
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) -> std::result::Result<(), Fault> {
        if let Some(s) = self.singular {
            if !(y[s] > self.r_min) {
                return Err(Fault::Radius(y[s]));
            }
        }
        for &i in &self.live {
            let v = eval_terms(&self.rows[i], y);
            if !v.is_finite() {
                return Err(Fault::NonFinite(i));
            }
            dy[i] = v;
        }
        Ok(())
    }

    /// Evaluates the rhs into `dy`; frozen slots are set to zero.
    pub fn evaluate(&self, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy.iter_mut().for_each(|d| *d = 0.0);
        self.rhs(y, dy).map_err(|f| match f {
            Fault::Radius(r) => Error::Singularity { r, r_min: self.r_min },
            Fault::NonFinite(i) => {
                Error::InvalidConfig(format!("non-finite rhs for {}", self.variables[i]))
            }
        })
    }

    pub fn energy(&self, y: &[f64]) -> f64 {
        eval_terms(&self.energy, y)
    }

    pub fn diagnostics(&self, y: &[f64], p_floor: f64) -> Diagnostics {
        let margins = self
            .pair_slots
            .iter()
            .map(|&(a, c, b)| y[a] * y[b] - y[c] * y[c] - self.hbar * self.hbar / 4.0)
            .collect();
        let (g20, _, g02) = self.pair_slots[0];
        let spread = |g: f64| if g < 0.0 { f64::INFINITY } else { g.sqrt() };
        let dq = spread(y[g20]);
        let dp = spread(y[g02]);
        Diagnostics {
            energy: self.energy(y),
            margins,
            validity_position: dq / y[0].abs(),
            validity_momentum: dp / y[1].abs().max(p_floor),
            dispersion_ratio: dq / dp,
        }
    }

    pub fn state_vector(&self, system: &EffectiveSystem, state: &SystemState) -> Result<Vec<f64>> {
        let vars = system_variables(&system.model, system.order)?;
        if state.dofs() != system.model.dofs || state.order != system.order {
            return Err(Error::IncompleteState(format!(
                "state has {} dofs at order {}, system has {} at order {}",
                state.dofs(),
                state.order,
                system.model.dofs,
                system.order
            )));
        }
        vars.iter()
            .map(|v| match v {
                Variable::Classical(s) => Ok(state.classical[*s as usize]),
                Variable::Moment(g) => state.moment(g),
            })
            .collect()
    }
}

/// Values derived from one stored state.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// `H_Q` on the state.
    pub energy: f64,
    /// `G^{2,0} G^{0,2} - (G^{1,1})^2 - hbar^2/4` per canonical pair.
    pub margins: Vec<f64>,
    /// `sqrt(G^{2,0,..}) / |q_1|`.
    pub validity_position: f64,
    /// `sqrt(G^{0,2,..}) / max(|p_1|, p_floor)`.
    pub validity_momentum: f64,
    /// `sqrt(G^{2,0,..}) / sqrt(G^{0,2,..})`.
    pub dispersion_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    RadiusBelowMin { t: f64, r: f64 },
    StepUnderflow { t: f64, h: f64 },
    NonFinite { t: f64, variable: String },
    StepLimit { t: f64 },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Completed => write!(f, "completed"),
            Termination::RadiusBelowMin { t, r } => write!(f, "radius below r_min at t={t} (r={r})"),
            Termination::StepUnderflow { t, h } => write!(f, "step underflow at t={t} (h={h})"),
            Termination::NonFinite { t, variable } => {
                write!(f, "non-finite value in {variable} at t={t}")
            }
            Termination::StepLimit { t } => write!(f, "step limit reached at t={t}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub variables: Vec<String>,
    pub dofs: usize,
    pub order: u32,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub diagnostics: Vec<Diagnostics>,
    pub termination: Termination,
    pub stats: StepStats,
    pub notices: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.index_of(name)?;
        Some(self.states.iter().map(|s| s[i]).collect())
    }

    pub fn energies(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.energy).collect()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn state(&self, i: usize) -> SystemState {
        let nc = 2 * self.dofs;
        let mut st = SystemState::new(self.times[i], self.states[i][..nc].to_vec(), self.order);
        for (name, v) in self.variables[nc..].iter().zip(&self.states[i][nc..]) {
            if let Some(g) = MomentIndex::parse_column_name(name) {
                st.set(g, *v);
            }
        }
        st
    }

    /// Samples with `t <= t_max`.
    pub fn prefix_until(&self, t_max: f64) -> usize {
        self.times.partition_point(|&t| t <= t_max)
    }
}

struct Recorder<'a> {
    plan: &'a CompiledSystem,
    p_floor: f64,
    interval: Option<f64>,
    t0: f64,
    next_k: u64,
    traj: Trajectory,
}

impl Recorder<'_> {
    fn push(&mut self, t: f64, y: &[f64]) {
        if let Some(&last) = self.traj.times.last() {
            if t <= last {
                return;
            }
        }
        self.traj.diagnostics.push(self.plan.diagnostics(y, self.p_floor));
        self.traj.times.push(t);
        self.traj.states.push(y.to_vec());
    }

    fn next_grid(&self) -> Option<f64> {
        self.interval.map(|dt| self.t0 + self.next_k as f64 * dt)
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates `system` from `initial` to `config.t_end`.
///
/// Numerical breakdowns end the run early and are reported through
/// [`Trajectory::termination`]; only bad inputs return `Err`.
pub fn integrate(
    system: &EffectiveSystem,
    initial: &SystemState,
    params: &[f64],
    hbar: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let plan = CompiledSystem::new(system, params, hbar, config.r_min)?;
    let y0 = plan.state_vector(system, initial)?;
    if let Some(s) = plan.singular {
        if !(y0[s] > config.r_min) {
            return Err(Error::Singularity {
                r: y0[s],
                r_min: config.r_min,
            });
        }
    }
    integrate_compiled(&plan, initial.t, y0, config)
}

pub fn integrate_compiled(
    plan: &CompiledSystem,
    t0: f64,
    y0: Vec<f64>,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if y0.len() != plan.len() {
        return Err(Error::IncompleteState(format!(
            "state vector has {} entries, system has {}",
            y0.len(),
            plan.len()
        )));
    }
    let mut rec = Recorder {
        plan,
        p_floor: config.p_floor,
        interval: config.sample_interval,
        t0,
        next_k: 1,
        traj: Trajectory {
            variables: plan.variables.clone(),
            dofs: plan.dofs,
            order: plan.order,
            times: Vec::new(),
            states: Vec::new(),
            diagnostics: Vec::new(),
            termination: Termination::Completed,
            stats: StepStats::default(),
            notices: plan.notices.clone(),
        },
    };
    rec.push(t0, &y0);
    let t_end = t0 + config.t_end;
    let termination = match config.method {
        Method::Rk4 => run_rk4(plan, t0, y0, t_end, config, &mut rec),
        Method::Dopri5 => run_dopri5(plan, t0, y0, t_end, config, &mut rec),
    };
    rec.traj.termination = termination;
    Ok(rec.traj)
}

fn fault_to_termination(plan: &CompiledSystem, f: Fault, t: f64) -> Termination {
    match f {
        Fault::Radius(r) => Termination::RadiusBelowMin { t, r },
        Fault::NonFinite(i) => Termination::NonFinite {
            t,
            variable: plan.variables[i].clone(),
        },
    }
}

fn nonfinite_slot(plan: &CompiledSystem, y: &[f64]) -> Option<usize> {
    plan.live.iter().copied().find(|&i| !y[i].is_finite())
}

fn run_rk4(
    plan: &CompiledSystem,
    t0: f64,
    mut y: Vec<f64>,
    t_end: f64,
    config: &IntegratorConfig,
    rec: &mut Recorder<'_>,
) -> Termination {
    let n = y.len();
    let h0 = config.initial_step;
    let mut k = vec![vec![0.0; n]; 4];
    let mut tmp = y.clone();
    let mut step: u64 = 0;
    let mut t = t0;
    loop {
        if t >= t_end {
            rec.push(t, &y);
            return Termination::Completed;
        }
        if step >= config.max_steps {
            rec.push(t, &y);
            return Termination::StepLimit { t };
        }
        let last = t0 + (step + 1) as f64 * h0 >= t_end * (1.0 - 4.0 * f64::EPSILON);
        let h = if last { t_end - t } else { t0 + (step + 1) as f64 * h0 - t };
        let stages: [(f64, usize); 3] = [(0.5, 0), (0.5, 1), (1.0, 2)];
        if let Err(f) = plan.rhs(&y, &mut k[0]) {
            rec.push(t, &y);
            return fault_to_termination(plan, f, t);
        }
        for (si, &(c, from)) in stages.iter().enumerate() {
            for &i in &plan.live {
                tmp[i] = y[i] + c * h * k[from][i];
            }
            if let Err(f) = plan.rhs(&tmp, &mut k[si + 1]) {
                rec.push(t, &y);
                return fault_to_termination(plan, f, t);
            }
        }
        rec.traj.stats.evaluations += 4;
        for &i in &plan.live {
            y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        step += 1;
        rec.traj.stats.accepted += 1;
        t = if last { t_end } else { t0 + step as f64 * h0 };
        if let Some(i) = nonfinite_slot(plan, &y) {
            return Termination::NonFinite {
                t,
                variable: plan.variables[i].clone(),
            };
        }
        match rec.next_grid() {
            None => rec.push(t, &y),
            Some(_) => {
                let mut hit = false;
                while let Some(g) = rec.next_grid() {
                    if g <= t + 1e-9 * h0 {
                        rec.next_k += 1;
                        hit = true;
                    } else {
                        break;
                    }
                }
                if hit {
                    rec.push(t, &y);
                }
            }
        }
    }
}

fn run_dopri5(
    plan: &CompiledSystem,
    t0: f64,
    mut y: Vec<f64>,
    t_end: f64,
    config: &IntegratorConfig,
    rec: &mut Recorder<'_>,
) -> Termination {
    let n = y.len();
    let live = &plan.live;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut ys = y.clone();
    let mut y1 = y.clone();
    let mut t = t0;
    let hmax = config.max_step.min(t_end - t0);

    if let Err(f) = plan.rhs(&y, &mut k[0]) {
        return fault_to_termination(plan, f, t);
    }
    rec.traj.stats.evaluations += 1;

    let sk = |yi: f64, zi: f64| config.atol + config.rtol * yi.abs().max(zi.abs());
    let mut h = if config.initial_step > 0.0 {
        config.initial_step.min(hmax)
    } else {
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..n {
            let s = sk(y[i], y[i]);
            dnf += (k[0][i] / s).powi(2);
            dny += (y[i] / s).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(hmax);
        for &i in live {
            ys[i] = y[i] + h * k[0][i];
        }
        let mut f1 = vec![0.0; n];
        if plan.rhs(&ys, &mut f1).is_ok() {
            rec.traj.stats.evaluations += 1;
            let mut der2 = 0.0;
            for i in 0..n {
                der2 += ((f1[i] - k[0][i]) / sk(y[i], y[i])).powi(2);
            }
            let der2 = der2.sqrt() / h;
            let der12 = der2.abs().max(dnf.sqrt());
            let h1 = if der12 <= 1e-15 {
                (h * 1e-3).max(1e-6)
            } else {
                (0.01 / der12).powf(0.2)
            };
            h = (100.0 * h).min(h1).min(hmax);
        }
        ys.copy_from_slice(&y);
        h
    };

    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const FACC1: f64 = 5.0;
    const FACC2: f64 = 0.1;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut rcont: Vec<Vec<f64>> = vec![vec![0.0; n]; 5];

    loop {
        if t >= t_end {
            rec.push(t, &y);
            return Termination::Completed;
        }
        let stats = rec.traj.stats;
        if stats.accepted + stats.rejected >= config.max_steps {
            rec.push(t, &y);
            return Termination::StepLimit { t };
        }
        let mut last = false;
        if t + 1.01 * h >= t_end {
            h = t_end - t;
            last = true;
        }
        let hmin = 1e-14 * t.abs().max(1.0);
        if h < hmin {
            rec.push(t, &y);
            return Termination::StepUnderflow { t, h };
        }

        let stage = |ys: &mut Vec<f64>, coeffs: &[(usize, f64)], k: &Vec<Vec<f64>>| {
            for &i in live {
                let mut acc = 0.0;
                for &(j, a) in coeffs {
                    acc += a * k[j][i];
                }
                ys[i] = y[i] + h * acc;
            }
        };
        let plan_stages: [&[(usize, f64)]; 5] = [
            &[(0, A21)],
            &[(0, A31), (1, A32)],
            &[(0, A41), (1, A42), (2, A43)],
            &[(0, A51), (1, A52), (2, A53), (3, A54)],
            &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)],
        ];
        let mut fault = None;
        for (s, coeffs) in plan_stages.iter().enumerate() {
            stage(&mut ys, coeffs, &k);
            let (head, tail) = k.split_at_mut(s + 1);
            let _ = head;
            if let Err(f) = plan.rhs(&ys, &mut tail[0]) {
                fault = Some(f);
                break;
            }
            rec.traj.stats.evaluations += 1;
        }
        if fault.is_none() {
            stage(&mut y1, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)], &k);
            let (head, tail) = k.split_at_mut(6);
            let _ = head;
            if let Err(f) = plan.rhs(&y1, &mut tail[0]) {
                fault = Some(f);
            } else {
                rec.traj.stats.evaluations += 1;
            }
        }
        match fault {
            Some(Fault::Radius(r)) => {
                // a trial stage left the domain: shrink and retry
                rec.traj.stats.rejected += 1;
                last_rejected = true;
                h *= 0.25;
                if h < hmin {
                    rec.push(t, &y);
                    return Termination::RadiusBelowMin { t, r };
                }
                continue;
            }
            Some(f @ Fault::NonFinite(_)) => {
                rec.push(t, &y);
                return fault_to_termination(plan, f, t);
            }
            None => {}
        }

        let mut err = 0.0;
        for &i in live {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            err += (e / sk(y[i], y1[i])).powi(2);
        }
        let err = (err / n as f64).sqrt();
        let fac11 = err.powf(EXPO1);
        let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
        let mut hnew = h / fac;

        if err <= 1.0 {
            facold = err.max(1e-4);
            rec.traj.stats.accepted += 1;
            let t_new = if last { t_end } else { t + h };
            if let Some(i) = nonfinite_slot(plan, &y1) {
                rec.push(t, &y);
                return Termination::NonFinite {
                    t: t_new,
                    variable: plan.variables[i].clone(),
                };
            }
            if let Some(g) = rec.next_grid() {
                if g <= t_new {
                    for &i in live {
                        let dy = y1[i] - y[i];
                        let bspl = h * k[0][i] - dy;
                        rcont[0][i] = y[i];
                        rcont[1][i] = dy;
                        rcont[2][i] = bspl;
                        rcont[3][i] = dy - h * k[6][i] - bspl;
                        rcont[4][i] = h
                            * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
                    }
                    let mut yi = y.clone();
                    while let Some(g) = rec.next_grid() {
                        if g > t_new * (1.0 + 4.0 * f64::EPSILON) && g > t_new + 1e-300 {
                            break;
                        }
                        rec.next_k += 1;
                        if (g - t_new).abs() <= 1e-12 * t_new.abs().max(1.0) {
                            rec.push(t_new, &y1);
                            continue;
                        }
                        let th = (g - t) / h;
                        let th1 = 1.0 - th;
                        for &i in live {
                            yi[i] = rcont[0][i]
                                + th * (rcont[1][i] + th1 * (rcont[2][i] + th * (rcont[3][i] + th1 * rcont[4][i])));
                        }
                        rec.push(g, &yi);
                    }
                }
            }
            std::mem::swap(&mut y, &mut y1);
            y1.copy_from_slice(&y);
            ys.copy_from_slice(&y);
            k.swap(0, 6);
            t = t_new;
            if rec.interval.is_none() {
                rec.push(t, &y);
            }
            hnew = hnew.min(hmax);
            if last_rejected {
                hnew = hnew.min(h);
            }
            last_rejected = false;
            h = hnew;
        } else {
            hnew = h / FACC1.min(fac11 / SAFE);
            rec.traj.stats.rejected += 1;
            last_rejected = true;
            h = hnew;
        }
    }
}

/// Leading interval `[start, end)` on which both validity ratios stay below the threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityWindow {
    pub start: f64,
    /// Time of the first violating sample, or the final time if none.
    pub end: f64,
    /// Number of leading samples inside the window.
    pub samples: usize,
    pub whole: bool,
}

impl ValidityWindow {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }
}

pub fn monitor_validity(traj: &Trajectory, threshold: f64) -> ValidityWindow {
    let start = traj.times.first().copied().unwrap_or(0.0);
    let bad = traj.diagnostics.iter().position(|d| {
        !(d.validity_position < threshold && d.validity_momentum < threshold)
    });
    match bad {
        Some(i) => ValidityWindow {
            start,
            end: traj.times[i],
            samples: i,
            whole: false,
        },
        None => ValidityWindow {
            start,
            end: traj.final_time(),
            samples: traj.len(),
            whole: true,
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyMonitor {
    /// Margins of the first canonical pair per sample.
    pub margins: Vec<f64>,
    pub first_violation: Option<f64>,
}

pub fn monitor_uncertainty(traj: &Trajectory) -> UncertaintyMonitor {
    let margins: Vec<f64> = traj.diagnostics.iter().map(|d| d.margins[0]).collect();
    let first_violation = margins.iter().position(|&m| m < 0.0).map(|i| traj.times[i]);
    UncertaintyMonitor {
        margins,
        first_violation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::BracketRule;
    use crate::eom::generate;
    use crate::hamiltonian::ClassicalModel;

    fn kepler(order: u32) -> EffectiveSystem {
        generate(&ClassicalModel::hydrogen(), order, BracketRule::Exact).unwrap()
    }

    fn classical_state(r: f64, pr: f64, l: f64, order: u32) -> SystemState {
        SystemState::with_zero_moments(0.0, vec![r, pr, 0.0, l], order).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        let c = IntegratorConfig {
            atol: 0.0,
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let c = IntegratorConfig {
            method: Method::Rk4,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn circular_orbit_stays_put() {
        let sys = kepler(2);
        let cfg = IntegratorConfig {
            t_end: 20.0,
            ..Default::default()
        };
        let tr = integrate(&sys, &classical_state(1.0, 0.0, 1.0, 2), &[1.0, 1.0], 0.0, &cfg).unwrap();
        assert!(tr.termination.is_completed());
        assert!(tr.column("r").unwrap().iter().all(|&r| (r - 1.0).abs() < 1e-12));
        let th = tr.column("theta").unwrap();
        assert!((th.last().unwrap() - 20.0).abs() < 1e-8);
    }

    #[test]
    fn uniform_sampling() {
        let sys = kepler(2);
        let cfg = IntegratorConfig {
            t_end: 5.0,
            sample_interval: Some(0.5),
            ..Default::default()
        };
        let tr = integrate(&sys, &classical_state(1.0, 0.3, 1.0, 2), &[1.0, 1.0], 0.0, &cfg).unwrap();
        assert_eq!(tr.len(), 11);
        for (i, t) in tr.times.iter().enumerate() {
            assert!((t - 0.5 * i as f64).abs() < 1e-12, "{t}");
        }
    }

    #[test]
    fn dense_output_matches_steps() {
        let sys = kepler(2);
        let st = classical_state(1.0, 0.3, 1.0, 2);
        let fine = IntegratorConfig {
            t_end: 3.0,
            atol: 1e-12,
            rtol: 1e-12,
            ..Default::default()
        };
        let sampled = IntegratorConfig {
            sample_interval: Some(0.25),
            ..fine.clone()
        };
        let a = integrate(&sys, &st, &[1.0, 1.0], 0.0, &fine).unwrap();
        let b = integrate(&sys, &st, &[1.0, 1.0], 0.0, &sampled).unwrap();
        assert_eq!(a.states.last(), b.states.last());
        let ra = a.column("r").unwrap();
        // compare against nearest accepted step by rerunning to the grid time
        for (t, r) in b.times.iter().zip(b.column("r").unwrap()) {
            let c = IntegratorConfig {
                t_end: *t,
                ..fine.clone()
            };
            if *t == 0.0 {
                assert_eq!(r, ra[0]);
                continue;
            }
            let x = integrate(&sys, &st, &[1.0, 1.0], 0.0, &c).unwrap();
            assert!((x.column("r").unwrap().last().unwrap() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn frozen_slots_are_bit_identical() {
        let sys = kepler(3);
        let mut st = classical_state(1.0, 1.0, 1.0, 3);
        for g in crate::moment::enumerate_moments(2, 3).unwrap() {
            let even = g.as_slice().iter().all(|x| x % 2 == 0);
            st.set(g, if even { 0.01 } else { 0.0 });
        }
        st.set(MomentIndex::new(&[0, 0, 0, 3]), 1e-3);
        let cfg = IntegratorConfig {
            t_end: 5.0,
            ..Default::default()
        };
        let tr = integrate(&sys, &st, &[1.0, 2.0], 0.1, &cfg).unwrap();
        for name in ["p_theta", "G_0_0_0_2", "G_0_0_0_3"] {
            let col = tr.column(name).unwrap();
            assert!(col.iter().all(|v| v.to_bits() == col[0].to_bits()), "{name}");
        }
    }

    #[test]
    fn radial_fall_terminates_at_r_min() {
        let sys = kepler(2);
        let cfg = IntegratorConfig {
            t_end: 50.0,
            r_min: 1e-3,
            ..Default::default()
        };
        let tr = integrate(&sys, &classical_state(1.0, 0.0, 0.0, 2), &[1.0, 1.0], 0.0, &cfg).unwrap();
        assert!(matches!(tr.termination, Termination::RadiusBelowMin { .. }), "{}", tr.termination);
        assert!(tr.final_time() < 2.0);
        let below = integrate(&sys, &classical_state(1e-4, 0.0, 0.0, 2), &[1.0, 1.0], 0.0, &cfg);
        assert!(matches!(below, Err(Error::Singularity { .. })));
    }

    #[test]
    fn monitors_on_classical_run() {
        let sys = kepler(2);
        let cfg = IntegratorConfig {
            t_end: 3.0,
            ..Default::default()
        };
        let tr = integrate(&sys, &classical_state(1.0, 0.3, 1.0, 2), &[1.0, 1.0], 0.5, &cfg).unwrap();
        let w = monitor_validity(&tr, 0.5);
        assert!(w.whole);
        assert_eq!(w.samples, tr.len());
        let u = monitor_uncertainty(&tr);
        assert_eq!(u.first_violation, Some(0.0));
        assert_eq!(u.margins[0], -0.0625);
    }

    #[test]
    fn immediate_violation_gives_empty_window() {
        let sys = kepler(2);
        let mut st = classical_state(1.0, 0.3, 1.0, 2);
        st.set(MomentIndex::new(&[2, 0, 0, 0]), 1.0);
        let cfg = IntegratorConfig {
            t_end: 0.5,
            ..Default::default()
        };
        let tr = integrate(&sys, &st, &[1.0, 1.0], 0.0, &cfg).unwrap();
        let w = monitor_validity(&tr, 0.5);
        assert!(w.is_empty());
        assert_eq!(w.length(), 0.0);
    }

    #[test]
    fn not_printed_equations_refuse_to_compile() {
        let sys = crate::eom::reference_system(3).unwrap();
        assert!(matches!(
            CompiledSystem::new(&sys, &[1.0, 1.0], 0.1, 1e-6),
            Err(Error::InvalidConfig(_))
        ));
        let two = crate::eom::reference_system(2).unwrap();
        assert!(CompiledSystem::new(&two, &[1.0, 1.0], 0.1, 1e-6).is_ok());
    }
}
