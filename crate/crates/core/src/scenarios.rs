//! Hydrogen experiments: initial-condition builder, the `l = 0` and planar
//! runs with their derived observables, energy traces and dispersion sweeps.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bracket::BracketRule;
use crate::eom::{generate, EffectiveSystem, Variable};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::hamiltonian::{ClassicalModel, P_THETA};
use crate::integrator::{
    integrate, monitor_uncertainty, monitor_validity, CompiledSystem, IntegratorConfig, Termination,
    Trajectory, UncertaintyMonitor, ValidityWindow,
};
use crate::moment::{enumerate_moments, uncertainty_ok, MomentIndex, SystemState};

pub const DETECTION_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalInitial {
    pub r: f64,
    pub p_r: f64,
    #[serde(default)]
    pub theta: f64,
    /// Angular momentum `l`.
    pub p_theta: f64,
}

/// Second-order moments and optional extras at `t = 0`.
///
/// Position dispersions are `G^{2,0,0,0}` and `G^{0,0,2,0}`. Momentum
/// dispersions default to the same values unless `saturate` is set, which
/// replaces them by `hbar^2 / (4 G^{2,0})`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentPrescription {
    pub position_r: f64,
    pub position_theta: f64,
    pub momentum_r: Option<f64>,
    pub momentum_theta: Option<f64>,
    pub saturate: bool,
    /// Reject states violating the uncertainty relation.
    pub physical: bool,
    /// Any further moment by column name, e.g. `G_1_0_0_1 = 0.01`.
    pub extra: BTreeMap<String, f64>,
}

impl MomentPrescription {
    /// All diagonal second-order moments equal to `eps`, mixed ones zero.
    pub fn dispersion(eps: f64) -> Self {
        MomentPrescription {
            position_r: eps,
            position_theta: eps,
            ..Default::default()
        }
    }

    pub fn zero() -> Self {
        MomentPrescription::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "yes")]
    pub plots: bool,
    #[serde(default = "yes")]
    pub classical_companion: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            plots: true,
            classical_companion: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub mass: f64,
    pub coupling: f64,
    pub order: u32,
    pub hbar: f64,
    #[serde(default)]
    pub rule: BracketRule,
    pub initial: ClassicalInitial,
    #[serde(default)]
    pub moments: MomentPrescription,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Scenario {
    pub fn params(&self) -> Vec<f64> {
        vec![self.mass, self.coupling]
    }

    pub fn classical_vector(&self) -> Vec<f64> {
        let c = &self.initial;
        vec![c.r, c.p_r, c.theta, c.p_theta]
    }

    pub fn with_moments(&self, moments: MomentPrescription) -> Scenario {
        Scenario {
            moments,
            ..self.clone()
        }
    }

    /// Same setup with every moment zero and `hbar = 0`.
    pub fn classical_companion(&self) -> Scenario {
        Scenario {
            name: format!("{}-classical", self.name),
            hbar: 0.0,
            moments: MomentPrescription::zero(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidTruncation(self.order));
        }
        if !(self.mass > 0.0) {
            return Err(Error::InvalidConfig("mass must be positive".into()));
        }
        if !(self.hbar >= 0.0) {
            return Err(Error::InvalidConfig("hbar must be nonnegative".into()));
        }
        self.integrator.validate()
    }

    pub fn system(&self) -> Result<EffectiveSystem> {
        generate(&ClassicalModel::hydrogen(), self.order, self.rule)
    }

    pub fn initial_state(&self) -> Result<InitialConditions> {
        build_initial_conditions(&self.moments, &self.classical_vector(), self.order, self.hbar)
    }

    /// `m = 1, k = 2, l = 1, r = 1, p_r = 1, theta = pi` with all
    /// second-order dispersions `eps` at order 2.
    pub fn perturbed_orbit(eps: f64) -> Scenario {
        Scenario {
            name: format!("orbit-{eps:e}"),
            mass: 1.0,
            coupling: 2.0,
            order: 2,
            hbar: 2.0 * eps,
            rule: BracketRule::Exact,
            initial: ClassicalInitial {
                r: 1.0,
                p_r: 1.0,
                theta: std::f64::consts::PI,
                p_theta: 1.0,
            },
            moments: MomentPrescription::dispersion(eps),
            integrator: IntegratorConfig {
                t_end: 12.0,
                sample_interval: Some(0.01),
                ..Default::default()
            },
            output: OutputSpec::default(),
        }
    }

    /// [`Scenario::perturbed_orbit`] with saturated momentum dispersions.
    pub fn saturated_orbit(eps: f64) -> Scenario {
        let mut s = Scenario::perturbed_orbit(eps);
        s.name = format!("saturated-{eps:e}");
        s.moments.saturate = true;
        s.moments.physical = true;
        s
    }

    /// Radial motion at `l = 0` with `m = k = 1` and a cross moment
    /// `G^{1,0,0,1}` coupling the radial and angular sectors.
    pub fn radial(cross: f64) -> Scenario {
        let mut moments = MomentPrescription::dispersion(0.01);
        moments.extra.insert("G_1_0_0_1".into(), cross);
        Scenario {
            name: "radial-l0".into(),
            mass: 1.0,
            coupling: 1.0,
            order: 2,
            hbar: 0.02,
            rule: BracketRule::Exact,
            initial: ClassicalInitial {
                r: 1.0,
                p_r: 0.5,
                theta: 0.0,
                p_theta: 0.0,
            },
            moments,
            integrator: IntegratorConfig {
                t_end: 3.0,
                r_min: 1e-3,
                sample_interval: Some(0.001),
                ..Default::default()
            },
            output: OutputSpec::default(),
        }
    }

    pub fn by_name(name: &str) -> Option<Scenario> {
        match name {
            "orbit" => Some(Scenario::perturbed_orbit(0.01)),
            "saturated" => Some(Scenario::saturated_orbit(1e-5)),
            "radial" => Some(Scenario::radial(0.01)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InitialConditions {
    pub state: SystemState,
    /// Uncertainty margins of the `(r, p_r)` and `(theta, p_theta)` pairs.
    pub margins: [f64; 2],
}

/// `hbar^2 / (4 x)`, nudged by at most a few ulps so that `x * p - hbar^2/4`
/// is nonnegative and as close to zero as floating point allows.
fn saturating_momentum(x: f64, hbar: f64) -> f64 {
    let target = hbar * hbar / 4.0;
    let mut p = target / x;
    let mut best = p;
    for _ in 0..4 {
        let m = x * p - target;
        if m == 0.0 {
            return p;
        }
        if m > 0.0 {
            best = p;
            p = p.next_down();
        } else {
            p = p.next_up();
            best = p;
        }
    }
    best
}

pub fn build_initial_conditions(
    spec: &MomentPrescription,
    classical: &[f64],
    order: u32,
    hbar: f64,
) -> Result<InitialConditions> {
    if classical.len() != 4 {
        return Err(Error::IncompleteState(format!(
            "expected r, p_r, theta, p_theta; got {} values",
            classical.len()
        )));
    }
    let mut st = SystemState::with_zero_moments(0.0, classical.to_vec(), order)?;
    let (xr, xt) = (spec.position_r, spec.position_theta);
    if spec.saturate && !(xr > 0.0 && xt > 0.0) {
        return Err(Error::RejectedInitialState(format!(
            "saturation needs positive position dispersions, got {xr} and {xt}"
        )));
    }
    if xr < 0.0 || xt < 0.0 {
        return Err(Error::RejectedInitialState("negative dispersion".into()));
    }
    let (pr, pt) = if spec.saturate {
        (saturating_momentum(xr, hbar), saturating_momentum(xt, hbar))
    } else {
        (spec.momentum_r.unwrap_or(xr), spec.momentum_theta.unwrap_or(xt))
    };
    st.set(MomentIndex::new(&[2, 0, 0, 0]), xr);
    st.set(MomentIndex::new(&[0, 2, 0, 0]), pr);
    st.set(MomentIndex::new(&[0, 0, 2, 0]), xt);
    st.set(MomentIndex::new(&[0, 0, 0, 2]), pt);
    for (name, &v) in &spec.extra {
        let g = MomentIndex::parse_column_name(name)
            .filter(|g| g.dofs() == 2)
            .ok_or_else(|| Error::InvalidConfig(format!("'{name}' is not a moment column")))?;
        if g.order() < 2 || g.order() > order {
            return Err(Error::InvalidConfig(format!(
                "moment {name} is outside orders 2..={order}"
            )));
        }
        st.set(g, v);
    }
    let m0 = uncertainty_ok(&st, 0, hbar)?;
    let m1 = uncertainty_ok(&st, 1, hbar)?;
    if spec.physical && !(m0.satisfied && m1.satisfied) {
        return Err(Error::RejectedInitialState(format!(
            "uncertainty relation violated: margins {:e} (r, p_r) and {:e} (theta, p_theta)",
            m0.margin, m1.margin
        )));
    }
    Ok(InitialConditions {
        state: st,
        margins: [m0.margin, m1.margin],
    })
}

/// Runs a scenario as configured.
pub fn run(scenario: &Scenario) -> Result<(EffectiveSystem, InitialConditions, Trajectory)> {
    scenario.validate()?;
    let system = scenario.system()?;
    let ic = scenario.initial_state()?;
    let traj = integrate(&system, &ic.state, &scenario.params(), scenario.hbar, &scenario.integrator)?;
    Ok((system, ic, traj))
}

fn is_angular(g: &MomentIndex) -> bool {
    g.a(1) + g.b(1) > 0
}

/// Restriction of `e` to `p_theta = 0` and all angular-sector moments zero.
fn restrict_strict_1d(e: &Expr) -> Result<Expr> {
    Ok(e.substitute_symbol(P_THETA, &Expr::zero())?
        .filter(|m| !m.moments.iter().any(is_angular)))
}

/// Angular variables (`theta` and moments with an angular index) whose rhs
/// survives once `p_theta` and every angular moment are set to zero.
pub fn strict_1d_sources(system: &EffectiveSystem) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for eq in &system.equations {
        let angular = match &eq.var {
            Variable::Classical(s) => *s == 2,
            Variable::Moment(g) => is_angular(g),
        };
        if angular && !restrict_strict_1d(&eq.rhs)?.is_zero() {
            out.push(eq.var.name(&system.model));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct L0Report {
    pub trajectory: Trajectory,
    pub window: ValidityWindow,
    /// `max |theta(t) - theta(0)|` over the validity window.
    pub theta_excursion: f64,
    pub induced_2d: bool,
    pub strict: Trajectory,
    /// Angular variables with a surviving source; empty when the sector is closed.
    pub strict_sources: Vec<String>,
    /// Theta and every angular moment stayed exactly at their initial values.
    pub strict_exact: bool,
}

pub fn run_l0(scenario: &Scenario) -> Result<L0Report> {
    if scenario.initial.p_theta != 0.0 {
        return Err(Error::WrongScenario(format!(
            "l = 0 run needs p_theta = 0, got {}",
            scenario.initial.p_theta
        )));
    }
    let (system, _, traj) = run(scenario)?;
    let window = monitor_validity(&traj, scenario.integrator.validity_threshold);
    let th = traj.column("theta").expect("theta column");
    let theta_excursion = th[..window.samples.max(1)]
        .iter()
        .map(|t| (t - th[0]).abs())
        .fold(0.0, f64::max);

    let strict_sources = strict_1d_sources(&system)?;
    let mut ic = scenario.initial_state()?.state;
    for g in enumerate_moments(2, scenario.order)? {
        if is_angular(&g) {
            ic.set(g, 0.0);
        }
    }
    let strict = integrate(&system, &ic, &scenario.params(), scenario.hbar, &scenario.integrator)?;
    let watched: Vec<usize> = strict
        .variables
        .iter()
        .enumerate()
        .filter(|(_, n)| {
            *n == "theta" || MomentIndex::parse_column_name(n).is_some_and(|g| is_angular(&g))
        })
        .map(|(i, _)| i)
        .collect();
    let strict_exact = strict
        .states
        .iter()
        .all(|s| watched.iter().all(|&i| s[i] == strict.states[0][i]));
    Ok(L0Report {
        trajectory: traj,
        window,
        theta_excursion,
        induced_2d: theta_excursion > DETECTION_THRESHOLD,
        strict,
        strict_sources,
        strict_exact,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub max_drift: f64,
}

impl EnergyTrace {
    pub fn relative_drift(&self) -> f64 {
        self.max_drift / self.values[0].abs()
    }
}

/// `H_Q` evaluated on every stored sample.
pub fn energy_trace(
    traj: &Trajectory,
    system: &EffectiveSystem,
    params: &[f64],
    hbar: f64,
) -> Result<EnergyTrace> {
    let plan = CompiledSystem::new(system, params, hbar, f64::MIN_POSITIVE)?;
    if plan.variables != traj.variables {
        return Err(Error::VariableMismatch(
            "trajectory and system have different variables".into(),
        ));
    }
    let values: Vec<f64> = traj.states.iter().map(|y| plan.energy(y)).collect();
    let e0 = values.first().copied().unwrap_or(0.0);
    let max_drift = values.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    Ok(EnergyTrace {
        times: traj.times.clone(),
        values,
        max_drift,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitPoint {
    pub t: f64,
    pub theta: f64,
    pub r: f64,
    /// `sqrt(G^{2,0,0,0})`, `NaN` if negative.
    pub spread: f64,
}

impl OrbitPoint {
    pub fn cartesian(&self, radius: f64) -> (f64, f64) {
        (radius * self.theta.cos(), radius * self.theta.sin())
    }
}

pub fn orbit_band(traj: &Trajectory) -> Vec<OrbitPoint> {
    let r = traj.index_of("r").expect("r");
    let th = traj.index_of("theta").expect("theta");
    let g = traj.index_of("G_2_0_0_0").expect("G_2_0_0_0");
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| OrbitPoint {
            t,
            theta: s[th],
            r: s[r],
            spread: s[g].sqrt(),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct PlanarReport {
    pub trajectory: Trajectory,
    pub classical: Trajectory,
    pub window: ValidityWindow,
    pub uncertainty: UncertaintyMonitor,
    pub energy: EnergyTrace,
    pub classical_energy: EnergyTrace,
}

impl PlanarReport {
    pub fn orbit(&self) -> Vec<OrbitPoint> {
        orbit_band(&self.trajectory)
    }

    pub fn phase_space(&self) -> Vec<(f64, f64)> {
        let r = self.trajectory.column("r").expect("r");
        let p = self.trajectory.column("p_r").expect("p_r");
        r.into_iter().zip(p).collect()
    }
}

pub fn run_2d(scenario: &Scenario) -> Result<PlanarReport> {
    if scenario.initial.p_theta == 0.0 {
        return Err(Error::WrongScenario("planar run needs p_theta != 0".into()));
    }
    let (system, _, traj) = run(scenario)?;
    let companion = scenario.classical_companion();
    let (csys, _, ctraj) = run(&companion)?;
    let window = monitor_validity(&traj, scenario.integrator.validity_threshold);
    let uncertainty = monitor_uncertainty(&traj);
    let energy = energy_trace(&traj, &system, &scenario.params(), scenario.hbar)?;
    let classical_energy = energy_trace(&ctraj, &csys, &companion.params(), 0.0)?;
    Ok(PlanarReport {
        trajectory: traj,
        classical: ctraj,
        window,
        uncertainty,
        energy,
        classical_energy,
    })
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub dispersion: f64,
    pub window: ValidityWindow,
    pub first_violation: Option<f64>,
    pub energy_drift: f64,
    pub termination: Termination,
    pub scenario: Scenario,
    pub trajectory: Trajectory,
}

/// Runs `base` once per dispersion, replacing its diagonal second moments.
pub fn dispersion_sweep(base: &Scenario, dispersions: &[f64]) -> Result<Vec<SweepRow>> {
    dispersions
        .par_iter()
        .map(|&eps| {
            let mut moments = base.moments.clone();
            moments.position_r = eps;
            moments.position_theta = eps;
            moments.momentum_r = None;
            moments.momentum_theta = None;
            let s = Scenario {
                name: format!("{}-{eps:e}", base.name),
                moments,
                ..base.clone()
            };
            let (system, _, traj) = run(&s)?;
            let window = monitor_validity(&traj, s.integrator.validity_threshold);
            let energy = energy_trace(&traj, &system, &s.params(), s.hbar)?;
            Ok(SweepRow {
                dispersion: eps,
                window,
                first_violation: monitor_uncertainty(&traj).first_violation,
                energy_drift: energy.max_drift,
                termination: traj.termination.clone(),
                scenario: s,
                trajectory: traj,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturation_arithmetic() {
        let spec = MomentPrescription {
            position_r: 1e-4,
            position_theta: 1e-4,
            saturate: true,
            physical: true,
            ..Default::default()
        };
        let ic = build_initial_conditions(&spec, &[1.0, 1.0, 0.0, 1.0], 2, 1.0).unwrap();
        assert_eq!(ic.state.moment(&MomentIndex::new(&[2, 0, 0, 0])).unwrap(), 1e-4);
        assert_eq!(ic.state.moment(&MomentIndex::new(&[0, 2, 0, 0])).unwrap(), 2500.0);
        assert_eq!(ic.state.moment(&MomentIndex::new(&[1, 1, 0, 0])).unwrap(), 0.0);
        assert_eq!(ic.margins, [0.0, 0.0]);
    }

    #[test]
    fn non_physical_dispersion_is_reported() {
        let ic = build_initial_conditions(&MomentPrescription::dispersion(0.01), &[1.0, 1.0, 3.0, 1.0], 2, 1.0)
            .unwrap();
        assert!((ic.margins[0] - (1e-4 - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn rejected_states() {
        let spec = MomentPrescription {
            physical: true,
            ..Default::default()
        };
        assert!(matches!(
            build_initial_conditions(&spec, &[1.0, 1.0, 0.0, 1.0], 2, 0.1),
            Err(Error::RejectedInitialState(_))
        ));
        let sat = MomentPrescription {
            saturate: true,
            ..Default::default()
        };
        assert!(matches!(
            build_initial_conditions(&sat, &[1.0, 1.0, 0.0, 1.0], 2, 0.1),
            Err(Error::RejectedInitialState(_))
        ));
        let mut extra = MomentPrescription::dispersion(0.01);
        extra.extra.insert("G_3_0_0_0".into(), 0.1);
        assert!(build_initial_conditions(&extra, &[1.0, 1.0, 0.0, 1.0], 2, 0.1).is_err());
    }

    #[test]
    fn wrong_scenarios() {
        assert!(matches!(run_l0(&Scenario::perturbed_orbit(0.01)), Err(Error::WrongScenario(_))));
        assert!(matches!(run_2d(&Scenario::radial(0.01)), Err(Error::WrongScenario(_))));
    }

    #[test]
    fn strict_radial_sector() {
        let h = ClassicalModel::hydrogen();
        let two = generate(&h, 2, BracketRule::Exact).unwrap();
        assert!(strict_1d_sources(&two).unwrap().is_empty());
        let printed = generate(&h, 3, BracketRule::Printed).unwrap();
        assert!(strict_1d_sources(&printed).unwrap().is_empty());
        // the exact rule leaves an hbar^2 / (2 m r^3) source
        let exact = generate(&h, 3, BracketRule::Exact).unwrap();
        assert_eq!(strict_1d_sources(&exact).unwrap(), vec!["G_0_1_2_0".to_string()]);
    }

    #[test]
    fn initial_energy_spot_value() {
        let mut s = Scenario::perturbed_orbit(0.0);
        s.moments = MomentPrescription {
            momentum_r: Some(0.01),
            momentum_theta: Some(0.01),
            ..Default::default()
        };
        let (sys, _, traj) = run(&Scenario {
            integrator: IntegratorConfig {
                t_end: 0.1,
                ..Default::default()
            },
            ..s.clone()
        })
        .unwrap();
        let e = energy_trace(&traj, &sys, &s.params(), s.hbar).unwrap();
        assert!((e.values[0] + 0.99).abs() < 1e-14);
    }
}
