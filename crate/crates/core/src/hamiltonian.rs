//! Classical models and their quantum-corrected Hamiltonians.

use crate::combinatorics::factorial;
use crate::error::{Error, Result};
use crate::expr::{int, rat, Expr, Rational, Symbol, SymbolNames, Valuation};
use crate::moment::{enumerate_moments, MomentIndex, SystemState};

pub const R: Symbol = Symbol::Var(0);
pub const P_R: Symbol = Symbol::Var(1);
pub const THETA: Symbol = Symbol::Var(2);
pub const P_THETA: Symbol = Symbol::Var(3);
pub const MASS: Symbol = Symbol::Param(0);
pub const COUPLING: Symbol = Symbol::Param(1);

/// A classical Hamiltonian system over `dofs` canonical pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalModel {
    pub name: String,
    pub dofs: usize,
    /// Names of `q_1, p_1, ..., q_k, p_k`.
    pub variables: Vec<String>,
    pub parameters: Vec<String>,
    pub hamiltonian: Expr,
    /// Slot of a variable that must stay above `r_min` during evaluation.
    pub singular_slot: Option<usize>,
}

impl ClassicalModel {
    /// `p_r^2/2m + p_theta^2/(2 m r^2) - k/r`.
    pub fn hydrogen() -> Self {
        let minv = Expr::symbol_pow(MASS, -1);
        let h = (&Expr::symbol_pow(P_R, 2) * &minv).scale(rat(1, 2))
            + (&(&Expr::symbol_pow(P_THETA, 2) * &minv) * &Expr::symbol_pow(R, -2)).scale(rat(1, 2))
            - &Expr::symbol(COUPLING) * &Expr::symbol_pow(R, -1);
        ClassicalModel {
            name: "hydrogen".into(),
            dofs: 2,
            variables: vec!["r".into(), "p_r".into(), "theta".into(), "p_theta".into()],
            parameters: vec!["m".into(), "k".into()],
            hamiltonian: h,
            singular_slot: Some(0),
        }
    }

    /// `p^2/2m + m w^2 x^2 / 2` with parameters `m`, `w`.
    pub fn harmonic_oscillator() -> Self {
        let x = Symbol::Var(0);
        let p = Symbol::Var(1);
        let m = Symbol::Param(0);
        let w = Symbol::Param(1);
        let h = (&Expr::symbol_pow(p, 2) * &Expr::symbol_pow(m, -1)).scale(rat(1, 2))
            + (&(&Expr::symbol(m) * &Expr::symbol_pow(w, 2)) * &Expr::symbol_pow(x, 2))
                .scale(rat(1, 2));
        ClassicalModel {
            name: "oscillator".into(),
            dofs: 1,
            variables: vec!["x".into(), "p".into()],
            parameters: vec!["m".into(), "w".into()],
            hamiltonian: h,
            singular_slot: None,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "hydrogen" => Ok(ClassicalModel::hydrogen()),
            "oscillator" => Ok(ClassicalModel::harmonic_oscillator()),
            other => Err(Error::UnsupportedHamiltonian(format!("unknown model '{other}'"))),
        }
    }

    pub fn names(&self) -> ModelNames<'_> {
        ModelNames { model: self }
    }
}

pub struct ModelNames<'a> {
    model: &'a ClassicalModel,
}

impl SymbolNames for ModelNames<'_> {
    fn symbol_name(&self, s: Symbol) -> String {
        match s {
            Symbol::Var(i) => self.model.variables[i as usize].clone(),
            Symbol::Param(j) => self.model.parameters[j as usize].clone(),
        }
    }
}

/// Taylor expansion of the classical Hamiltonian in moments of order `2..=order`:
/// `H + sum_G (prod_i 1/(a_i! b_i!)) d^{a_1} d^{b_1} ... H * G`.
pub fn build_hq_taylor(model: &ClassicalModel, order: u32) -> Result<Expr> {
    let h = &model.hamiltonian;
    if !h.moments().is_empty() {
        return Err(Error::UnsupportedHamiltonian(
            "classical Hamiltonian must not contain moments".into(),
        ));
    }
    let mut out = h.clone();
    for g in enumerate_moments(model.dofs, order)? {
        let mut d = h.clone();
        let mut denom: i128 = 1;
        for (slot, &e) in g.as_slice().iter().enumerate() {
            for _ in 0..e {
                d = d.diff_symbol(Symbol::Var(slot as u8));
            }
            denom *= factorial(e);
            if d.is_zero() {
                break;
            }
        }
        if d.is_zero() {
            continue;
        }
        out += &(&d * &Expr::moment(g)).scale(Rational::new(1, denom));
    }
    Ok(out)
}

/// Closed-form hydrogen `H_Q` with the `a` sum bounded by `max_a` and the
/// `b` sum by `max_b`, truncated to moments of order `<= order`.
pub fn build_hq_hydrogen(max_a: u32, max_b: u32, order: u32) -> Result<Expr> {
    if order < 2 {
        return Err(Error::InvalidTruncation(order));
    }
    let m = |e: i32| Expr::symbol_pow(MASS, e);
    let r = |e: i32| Expr::symbol_pow(R, e);
    let l = |e: i32| Expr::symbol_pow(P_THETA, e);
    let k = Expr::symbol(COUPLING);
    let g = |a: u32, b: u32, c: u32, d: u32| Expr::moment(MomentIndex::new(&[a, b, c, d]));

    let mut out = ClassicalModel::hydrogen().hamiltonian;
    out += &(&g(0, 2, 0, 0) * &m(-1)).scale(rat(1, 2));
    out += &(&(&g(0, 0, 0, 2) * &m(-1)) * &r(-2)).scale(rat(1, 2));
    for a in 2..=max_a {
        let sign = if a % 2 == 0 { 1 } else { -1 };
        let bracket = (&(&l(2) * &m(-1)) * &r(-1)).scale(rat((a + 1) as i128, 2)) - k.clone();
        let term = &(&bracket * &r(-(a as i32) - 1)) * &g(a, 0, 0, 0);
        out += &term.scale(int(sign));
    }
    for b in 1..=max_b {
        let sign = if b % 2 == 0 { 1 } else { -1 };
        let pref = (&m(-1) * &r(-(b as i32) - 2)).scale(int(sign * (b as i128 + 1)));
        let inner = &l(1) * &g(b, 0, 0, 1) + g(b, 0, 0, 2).scale(rat(1, 2));
        out += &(&pref * &inner);
    }
    Ok(out.truncate(order))
}

/// Numeric values for a model: state, parameter values and hbar.
pub struct StateValuation<'a> {
    pub state: &'a SystemState,
    pub params: &'a [f64],
    pub hbar: f64,
}

impl Valuation for StateValuation<'_> {
    fn symbol(&self, s: Symbol) -> Result<f64> {
        match s {
            Symbol::Var(i) => self.state.classical.get(i as usize).copied().ok_or_else(|| {
                Error::IncompleteState(format!("state has no classical slot {i}"))
            }),
            Symbol::Param(j) => self
                .params
                .get(j as usize)
                .copied()
                .ok_or_else(|| Error::IncompleteState(format!("missing parameter {j}"))),
        }
    }

    fn moment(&self, g: &MomentIndex) -> Result<f64> {
        self.state.moment(g)
    }

    fn hbar(&self) -> f64 {
        self.hbar
    }
}

/// Evaluates an expression on a state, refusing states with the model's
/// singular variable at or below `r_min`.
pub fn evaluate(
    model: &ClassicalModel,
    expr: &Expr,
    state: &SystemState,
    params: &[f64],
    hbar: f64,
    r_min: f64,
) -> Result<f64> {
    if let Some(slot) = model.singular_slot {
        let r = state.classical[slot];
        if !(r > r_min) {
            return Err(Error::Singularity { r, r_min });
        }
    }
    expr.evaluate(&StateValuation {
        state,
        params,
        hbar,
    })
}

/// Classical part of an expression: every moment set to zero.
pub fn classical_part(expr: &Expr) -> Expr {
    expr.filter(|m| m.moments.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hydrogen_state(r: f64, pr: f64, l: f64, order: u32) -> SystemState {
        SystemState::with_zero_moments(0.0, vec![r, pr, 0.0, l], order).unwrap()
    }

    #[test]
    fn oscillator_moments_decouple() {
        let hq = build_hq_taylor(&ClassicalModel::harmonic_oscillator(), 2).unwrap();
        let model = ClassicalModel::harmonic_oscillator();
        let m = Expr::symbol(Symbol::Param(0));
        let w2 = Expr::symbol_pow(Symbol::Param(1), 2);
        let expected = model.hamiltonian.clone()
            + (&Expr::moment(MomentIndex::new(&[0, 2])) * &m.inverse_monomial().unwrap())
                .scale(rat(1, 2))
            + (&(&m * &w2) * &Expr::moment(MomentIndex::new(&[2, 0]))).scale(rat(1, 2));
        assert_eq!(hq, expected);
    }

    #[test]
    fn taylor_matches_closed_form() {
        let model = ClassicalModel::hydrogen();
        for n in 2..=4 {
            assert_eq!(
                build_hq_taylor(&model, n).unwrap(),
                build_hq_hydrogen(n, n - 1, n).unwrap(),
                "order {n}"
            );
        }
    }

    #[test]
    fn classical_part_is_kepler() {
        let model = ClassicalModel::hydrogen();
        let hq = build_hq_taylor(&model, 3).unwrap();
        assert_eq!(classical_part(&hq), model.hamiltonian);
    }

    #[test]
    fn spot_values() {
        let model = ClassicalModel::hydrogen();
        let hq = build_hq_hydrogen(2, 1, 2).unwrap();
        let mut s = hydrogen_state(1.0, 1.0, 1.0, 2);
        s.set(MomentIndex::new(&[0, 2, 0, 0]), 0.01);
        s.set(MomentIndex::new(&[0, 0, 0, 2]), 0.01);
        let v = evaluate(&model, &hq, &s, &[1.0, 2.0], 1.0, 1e-6).unwrap();
        assert!((v + 0.99).abs() < 1e-15, "{v}");

        let circ = hydrogen_state(1.0, 0.0, 1.0, 2);
        let v = evaluate(&model, &model.hamiltonian, &circ, &[1.0, 1.0], 1.0, 1e-6).unwrap();
        assert_eq!(v, -0.5);
    }

    #[test]
    fn evaluation_errors() {
        let model = ClassicalModel::hydrogen();
        let hq = build_hq_hydrogen(2, 1, 2).unwrap();
        let s = SystemState::new(0.0, vec![1.0, 1.0, 0.0, 1.0], 2);
        assert!(matches!(
            evaluate(&model, &hq, &s, &[1.0, 2.0], 1.0, 1e-6),
            Err(Error::IncompleteState(_))
        ));
        let z = hydrogen_state(0.0, 1.0, 1.0, 2);
        assert!(matches!(
            evaluate(&model, &hq, &z, &[1.0, 2.0], 1.0, 1e-6),
            Err(Error::Singularity { .. })
        ));
    }
}
