//! Poisson brackets between moments, classical variables and polynomial
//! expressions, with exact rational coefficients and hbar kept symbolic.
//!
//! A moment bracket has two parts:
//!
//! * product terms `sum_i a_i d_i G^{..a_i-1..} G^{..d_i-1..} - b_i c_i G^{..b_i-1..} G^{..c_i-1..}`;
//! * quantum terms `sum_{n odd} sum_s sum_e (-1)^s (i hbar / 2)^(n-1) K(n, s, e) G^{a+c-e, b+d-e}`.
//!
//! Two summation rules are available. [`BracketRule::Printed`] is the
//! literal multi-degree-of-freedom form: `n` stops at `N~` and the
//! coefficient divides by `s!(n-s)!` and by the per-dof binomials
//! `C(n-s, g_i) C(s, e_i - g_i)`. [`BracketRule::Exact`] keeps every odd `n`
//! for which a configuration exists and weights each configuration by
//! `prod_i alpha_i! beta_i!` (with `alpha_i = e_i - g_i`, `beta_i = g_i`). The
//! two agree term by term at `n = 1`; only the exact rule matches the Weyl
//! operator oracle at `n >= 3`, so it is the default.

use std::collections::HashMap;
use std::sync::RwLock;

use num_traits::{One, Zero};

use crate::combinatorics::{binomial, bounded_compositions, factorial};
use crate::error::{Error, Result};
use crate::expr::{int, Expr, Rational, Symbol};
use crate::moment::MomentIndex;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketRule {
    #[default]
    Exact,
    Printed,
}

impl std::str::FromStr for BracketRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(BracketRule::Exact),
            "printed" => Ok(BracketRule::Printed),
            other => Err(format!("unknown bracket rule '{other}' (expected exact or printed)")),
        }
    }
}

impl std::fmt::Display for BracketRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BracketRule::Exact => "exact",
            BracketRule::Printed => "printed",
        })
    }
}

fn check_odd(n: u32) -> Result<()> {
    if n == 0 || n % 2 == 0 {
        Err(Error::InvalidOrder(n))
    } else {
        Ok(())
    }
}

/// One-dof coefficient
/// `K^n_{abcd} = sum_s (-1)^s s!(n-s)! C(a,s) C(b,n-s) C(c,n-s) C(d,s)`.
pub fn k_coefficient_1dof(n: u32, a: u32, b: u32, c: u32, d: u32) -> Result<Rational> {
    check_odd(n)?;
    let (n, a, b, c, d) = (n as i64, a as i64, b as i64, c as i64, d as i64);
    let mut total: i128 = 0;
    for s in 0..=n {
        let sign = if s % 2 == 0 { 1 } else { -1 };
        total += sign
            * factorial(s as u32)
            * factorial((n - s) as u32)
            * binomial(a, s)
            * binomial(b, n - s)
            * binomial(c, n - s)
            * binomial(d, s);
    }
    Ok(int(total))
}

struct Config<'a> {
    n: u32,
    s: u32,
    e: &'a [u32],
    a: &'a [u32],
    b: &'a [u32],
    c: &'a [u32],
    d: &'a [u32],
}

impl Config<'_> {
    fn validate(&self) -> Result<()> {
        check_odd(self.n)?;
        let k = self.e.len();
        if [self.a.len(), self.b.len(), self.c.len(), self.d.len()] != [k, k, k, k] || k == 0 {
            return Err(Error::InvalidConfiguration(
                "per-dof lists must be nonempty and of equal length".into(),
            ));
        }
        if self.s > self.n {
            return Err(Error::InvalidConfiguration(format!(
                "s = {} exceeds n = {}",
                self.s, self.n
            )));
        }
        if self.e.iter().sum::<u32>() != self.n {
            return Err(Error::InvalidConfiguration(format!(
                "sum of e = {:?} differs from n = {}",
                self.e, self.n
            )));
        }
        for i in 0..k {
            let bound = self.a[i].min(self.d[i]).min(self.s)
                + self.b[i].min(self.c[i]).min(self.n - self.s);
            if self.e[i] > bound {
                return Err(Error::InvalidConfiguration(format!(
                    "e_{} = {} exceeds its bound {}",
                    i + 1,
                    self.e[i],
                    bound
                )));
            }
        }
        Ok(())
    }

    /// Admissible `g` vectors:
    /// `max(e_i - s, e_i - a_i, e_i - d_i, 0) <= g_i <= min(b_i, c_i, n - s, e_i)`, `sum g = n - s`.
    fn g_configurations(&self) -> Vec<Vec<u32>> {
        let k = self.e.len();
        let (n, s) = (self.n as i64, self.s as i64);
        let mut lo = Vec::with_capacity(k);
        let mut hi = Vec::with_capacity(k);
        for i in 0..k {
            let e = self.e[i] as i64;
            let l = (e - s).max(e - self.a[i] as i64).max(e - self.d[i] as i64).max(0);
            let h = (self.b[i] as i64)
                .min(self.c[i] as i64)
                .min(n - s)
                .min(e);
            if h < l {
                return Vec::new();
            }
            lo.push(l as u32);
            hi.push(h as u32);
        }
        bounded_compositions(self.n - self.s, &lo, &hi)
    }
}

/// Multi-dof coefficient in its literal normalization: for each admissible
/// `g`, `prod_i C(a_i,e_i-g_i) C(b_i,g_i) C(c_i,g_i) C(d_i,e_i-g_i) / (C(n-s,g_i) C(s,e_i-g_i))`,
/// summed and divided by `s!(n-s)!`.
pub fn kcal_coefficient(
    n: u32,
    s: u32,
    e: &[u32],
    a: &[u32],
    b: &[u32],
    c: &[u32],
    d: &[u32],
) -> Result<Rational> {
    let cfg = Config { n, s, e, a, b, c, d };
    cfg.validate()?;
    let mut total = Rational::zero();
    for g in cfg.g_configurations() {
        let mut term = Rational::one();
        for i in 0..e.len() {
            let (ei, gi) = (e[i] as i64, g[i] as i64);
            let num = binomial(a[i] as i64, ei - gi)
                * binomial(b[i] as i64, gi)
                * binomial(c[i] as i64, gi)
                * binomial(d[i] as i64, ei - gi);
            let den = binomial((n - s) as i64, gi) * binomial(s as i64, ei - gi);
            if den == 0 {
                if num != 0 {
                    return Err(Error::MalformedConfiguration(format!(
                        "zero denominator binomial at g = {g:?}, e = {e:?}"
                    )));
                }
                term = Rational::zero();
                break;
            }
            term *= Rational::new(num, den);
        }
        total += term;
    }
    Ok(total / int(factorial(s) * factorial(n - s)))
}

/// Multi-dof coefficient with Weyl-consistent weights
/// `sum_g prod_i alpha_i! beta_i! C(a_i,alpha_i) C(b_i,beta_i) C(c_i,beta_i) C(d_i,alpha_i)`,
/// `alpha_i = e_i - g_i`, `beta_i = g_i`. For one degree of freedom it reduces
/// to the `s`-th summand of [`k_coefficient_1dof`] without its sign.
pub fn kcal_coefficient_exact(
    n: u32,
    s: u32,
    e: &[u32],
    a: &[u32],
    b: &[u32],
    c: &[u32],
    d: &[u32],
) -> Result<Rational> {
    let cfg = Config { n, s, e, a, b, c, d };
    cfg.validate()?;
    let mut total: i128 = 0;
    for g in cfg.g_configurations() {
        let mut term: i128 = 1;
        for i in 0..e.len() {
            let alpha = (e[i] - g[i]) as i64;
            let beta = g[i] as i64;
            term *= factorial(alpha as u32)
                * factorial(beta as u32)
                * binomial(a[i] as i64, alpha)
                * binomial(b[i] as i64, beta)
                * binomial(c[i] as i64, beta)
                * binomial(d[i] as i64, alpha);
            if term == 0 {
                break;
            }
        }
        total += term;
    }
    Ok(int(total))
}

/// `sum_i (min(a_i, d_i) + min(b_i, c_i))`.
pub fn overlap(a: &MomentIndex, b: &MomentIndex) -> u32 {
    (0..a.dofs())
        .map(|i| a.a(i).min(b.b(i)) + a.b(i).min(b.a(i)))
        .sum()
}

/// Upper limit `N~` of the literal `n` sum.
pub fn printed_n_max(a: &MomentIndex, b: &MomentIndex) -> u32 {
    let s = overlap(a, b);
    if s <= 1 {
        1
    } else {
        s - 1
    }
}

/// `(i hbar / 2)^(n-1)` for odd `n` as a real signed rational times `hbar^(n-1)`.
fn hbar_factor(n: u32) -> Expr {
    let p = n - 1;
    let sign = if (p / 2) % 2 == 0 { 1 } else { -1 };
    Expr::hbar_pow(p).scale(Rational::new(sign, 1i128 << p))
}

fn check_same_dofs(a: &MomentIndex, b: &MomentIndex) -> Result<()> {
    if a.dofs() != b.dofs() {
        return Err(Error::DofMismatch {
            index: b.clone(),
            dofs: a.dofs(),
        });
    }
    Ok(())
}

/// Bracket of two moments under the given summation rule.
pub fn bracket_moments_with(a: &MomentIndex, b: &MomentIndex, rule: BracketRule) -> Result<Expr> {
    check_same_dofs(a, b)?;
    let k = a.dofs();
    let mut out = Expr::zero();

    for i in 0..k {
        let (ai, bi) = a.pair(i);
        let (ci, di) = b.pair(i);
        if ai * di > 0 {
            let left = Expr::moment(a.lowered(2 * i).unwrap());
            let right = Expr::moment(b.lowered(2 * i + 1).unwrap());
            out += &(&left * &right).scale(int((ai * di) as i128));
        }
        if bi * ci > 0 {
            let left = Expr::moment(a.lowered(2 * i + 1).unwrap());
            let right = Expr::moment(b.lowered(2 * i).unwrap());
            out -= &(&left * &right).scale(int((bi * ci) as i128));
        }
    }

    let av: Vec<u32> = (0..k).map(|i| a.a(i)).collect();
    let bv: Vec<u32> = (0..k).map(|i| a.b(i)).collect();
    let cv: Vec<u32> = (0..k).map(|i| b.a(i)).collect();
    let dv: Vec<u32> = (0..k).map(|i| b.b(i)).collect();
    let n_max = match rule {
        BracketRule::Printed => printed_n_max(a, b),
        BracketRule::Exact => overlap(a, b),
    };

    let mut n = 1;
    while n <= n_max {
        let hf = hbar_factor(n);
        for s in 0..=n {
            let hi: Vec<u32> = (0..k)
                .map(|i| av[i].min(dv[i]).min(s) + bv[i].min(cv[i]).min(n - s))
                .collect();
            let lo = vec![0; k];
            for e in bounded_compositions(n, &lo, &hi) {
                let coeff = match rule {
                    BracketRule::Printed => kcal_coefficient(n, s, &e, &av, &bv, &cv, &dv)?,
                    BracketRule::Exact => kcal_coefficient_exact(n, s, &e, &av, &bv, &cv, &dv)?,
                };
                if coeff.is_zero() {
                    continue;
                }
                let signed = if s % 2 == 0 { coeff } else { -coeff };
                let flat: Vec<u32> = (0..k)
                    .flat_map(|i| [av[i] + cv[i] - e[i], bv[i] + dv[i] - e[i]])
                    .collect();
                out += &(&hf * &Expr::moment(MomentIndex::new(&flat))).scale(signed);
            }
        }
        n += 2;
    }
    Ok(out)
}

/// Bracket of two moments under the default (exact) rule.
pub fn bracket_moments(a: &MomentIndex, b: &MomentIndex) -> Result<Expr> {
    bracket_moments_with(a, b, BracketRule::Exact)
}

/// Operand of a bracket with a classical variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Variable(u8),
    Moment(MomentIndex),
}

/// `{q_i, p_j} = delta_ij`, `{q_i, q_j} = {p_i, p_j} = 0`, `{v, G} = 0`.
pub fn bracket_with_classical(var_slot: u8, other: &Operand) -> Expr {
    match other {
        Operand::Moment(_) => Expr::zero(),
        Operand::Variable(slot) => {
            let same_dof = var_slot / 2 == slot / 2;
            match (same_dof, var_slot % 2, slot % 2) {
                (true, 0, 1) => Expr::one(),
                (true, 1, 0) => -Expr::one(),
                _ => Expr::zero(),
            }
        }
    }
}

/// Bracket engine over a fixed number of degrees of freedom, with a memo of
/// moment brackets. The memo is read-consistent and never changes results.
pub struct BracketEngine {
    dofs: usize,
    rule: BracketRule,
    cache: RwLock<HashMap<(MomentIndex, MomentIndex), Expr>>,
}

impl BracketEngine {
    pub fn new(dofs: usize, rule: BracketRule) -> Self {
        BracketEngine {
            dofs,
            rule,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn dofs(&self) -> usize {
        self.dofs
    }

    pub fn rule(&self) -> BracketRule {
        self.rule
    }

    pub fn moments(&self, a: &MomentIndex, b: &MomentIndex) -> Result<Expr> {
        for g in [a, b] {
            if g.dofs() != self.dofs {
                return Err(Error::DofMismatch {
                    index: g.clone(),
                    dofs: self.dofs,
                });
            }
        }
        let key = (a.clone(), b.clone());
        if let Some(hit) = self.cache.read().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let value = bracket_moments_with(a, b, self.rule)?;
        self.cache.write().unwrap().insert(key, value.clone());
        Ok(value)
    }

    /// Bilinear, antisymmetric, Leibniz extension to polynomial expressions.
    /// Classical variables and moments are mutually commuting sectors, so
    /// `{F, H} = sum_i (dF/dq_i dH/dp_i - dF/dp_i dH/dq_i) + sum_{A,B} dF/dG_A dH/dG_B {G_A, G_B}`.
    pub fn functions(&self, f: &Expr, h: &Expr) -> Result<Expr> {
        let mut out = Expr::zero();
        for i in 0..self.dofs {
            let q = Symbol::Var((2 * i) as u8);
            let p = Symbol::Var((2 * i + 1) as u8);
            let fq = f.diff_symbol(q);
            let fp = f.diff_symbol(p);
            if !fq.is_zero() {
                out += &(&fq * &h.diff_symbol(p));
            }
            if !fp.is_zero() {
                out -= &(&fp * &h.diff_symbol(q));
            }
        }
        let f_moments = f.moments();
        if f_moments.is_empty() {
            return Ok(out);
        }
        let h_moments = h.moments();
        let h_partials: Vec<(MomentIndex, Expr)> = h_moments
            .iter()
            .map(|g| (g.clone(), h.diff_moment(g)))
            .collect();
        for ga in &f_moments {
            let fa = f.diff_moment(ga);
            for (gb, hb) in &h_partials {
                let br = self.moments(ga, gb)?;
                if br.is_zero() {
                    continue;
                }
                out += &(&(&fa * hb) * &br);
            }
        }
        Ok(out)
    }
}

/// `{F, H}` for expressions over `dofs` degrees of freedom using the exact rule.
pub fn bracket_functions(dofs: usize, f: &Expr, h: &Expr) -> Result<Expr> {
    BracketEngine::new(dofs, BracketRule::Exact).functions(f, h)
}

/// One Jacobi check: `{A,{B,C}} + {B,{C,A}} + {C,{A,B}}`.
pub fn jacobi_residual(
    engine: &BracketEngine,
    a: &MomentIndex,
    b: &MomentIndex,
    c: &MomentIndex,
) -> Result<Expr> {
    let (ea, eb, ec) = (
        Expr::moment(a.clone()),
        Expr::moment(b.clone()),
        Expr::moment(c.clone()),
    );
    let bc = engine.functions(&eb, &ec)?;
    let ca = engine.functions(&ec, &ea)?;
    let ab = engine.functions(&ea, &eb)?;
    let mut total = engine.functions(&ea, &bc)?;
    total += &engine.functions(&eb, &ca)?;
    total += &engine.functions(&ec, &ab)?;
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct JacobiReport {
    pub checked: usize,
    pub failures: Vec<(MomentIndex, MomentIndex, MomentIndex, Expr)>,
}

/// Cyclic-sum check over all unordered triples (with repetition) of the given moments.
pub fn jacobi_report(engine: &BracketEngine, moments: &[MomentIndex]) -> Result<JacobiReport> {
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..moments.len() {
        for j in i..moments.len() {
            for l in j..moments.len() {
                let r = jacobi_residual(engine, &moments[i], &moments[j], &moments[l])?;
                checked += 1;
                if !r.is_zero() {
                    failures.push((moments[i].clone(), moments[j].clone(), moments[l].clone(), r));
                }
            }
        }
    }
    Ok(JacobiReport { checked, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    fn g(flat: &[u32]) -> MomentIndex {
        MomentIndex::new(flat)
    }

    fn gm(flat: &[u32]) -> Expr {
        Expr::moment(g(flat))
    }

    #[test]
    fn k_coefficient_examples() {
        assert_eq!(k_coefficient_1dof(1, 2, 0, 0, 2).unwrap(), int(-4));
        assert_eq!(k_coefficient_1dof(1, 1, 1, 1, 1).unwrap(), int(0));
        for c in 0..4 {
            for d in 0..4 {
                assert_eq!(k_coefficient_1dof(1, 0, 0, c, d).unwrap(), int(0));
            }
        }
        assert_eq!(k_coefficient_1dof(2, 1, 1, 1, 1), Err(Error::InvalidOrder(2)));
        assert_eq!(k_coefficient_1dof(0, 1, 1, 1, 1), Err(Error::InvalidOrder(0)));
    }

    #[test]
    fn kcal_examples() {
        assert_eq!(
            kcal_coefficient(1, 1, &[1], &[2], &[0], &[0], &[2]).unwrap(),
            int(4)
        );
        assert_eq!(
            kcal_coefficient(1, 1, &[1], &[2], &[0], &[1], &[1]).unwrap(),
            int(2)
        );
        // an inactive second dof contributes unit factors
        assert_eq!(
            kcal_coefficient(1, 1, &[1, 0], &[2, 0], &[0, 0], &[0, 0], &[2, 0]).unwrap(),
            int(4)
        );
    }

    #[test]
    fn kcal_rejects_out_of_bounds() {
        assert!(matches!(
            kcal_coefficient(1, 1, &[2], &[2], &[0], &[0], &[2]),
            Err(Error::InvalidConfiguration(_))
        ));
        assert!(matches!(
            kcal_coefficient(1, 0, &[1], &[2], &[0], &[0], &[2]),
            Err(Error::InvalidConfiguration(_))
        ));
        assert_eq!(
            kcal_coefficient(2, 1, &[2], &[2], &[2], &[2], &[2]),
            Err(Error::InvalidOrder(2))
        );
    }

    #[test]
    fn normalizations_differ_only_beyond_first_order() {
        // n = 3, s = 3, one dof, (a,b,c,d) = (4,0,0,4): printed 16/6, exact 6 * 16
        assert_eq!(
            kcal_coefficient(3, 3, &[3], &[4], &[0], &[0], &[4]).unwrap(),
            rat(8, 3)
        );
        assert_eq!(
            kcal_coefficient_exact(3, 3, &[3], &[4], &[0], &[0], &[4]).unwrap(),
            int(96)
        );
    }

    #[test]
    fn second_order_brackets() {
        assert_eq!(
            bracket_moments(&g(&[2, 0]), &g(&[0, 2])).unwrap(),
            gm(&[1, 1]).scale(int(-4))
        );
        assert!(bracket_moments(&g(&[1, 1]), &g(&[1, 1])).unwrap().is_zero());
        assert!(bracket_moments(&g(&[2, 0, 0, 0]), &g(&[0, 0, 0, 2]))
            .unwrap()
            .is_zero());
        assert_eq!(
            bracket_moments(&g(&[2, 0]), &g(&[1, 1])).unwrap(),
            gm(&[2, 0]).scale(int(-2))
        );
    }

    #[test]
    fn exact_rule_keeps_constant_term() {
        // {G^{3,0}, G^{0,3}}: product term and an hbar^2 constant from n = 3
        let exact = bracket_moments_with(&g(&[3, 0]), &g(&[0, 3]), BracketRule::Exact).unwrap();
        let printed = bracket_moments_with(&g(&[3, 0]), &g(&[0, 3]), BracketRule::Printed).unwrap();
        let diff = &exact - &printed;
        assert_eq!(diff, Expr::hbar_pow(2).scale(rat(3, 2)));
    }

    #[test]
    fn rules_agree_when_overlap_is_small() {
        let ms = crate::moment::enumerate_moments(2, 3).unwrap();
        for a in &ms {
            for b in &ms {
                if overlap(a, b) <= 2 {
                    assert_eq!(
                        bracket_moments_with(a, b, BracketRule::Exact).unwrap(),
                        bracket_moments_with(a, b, BracketRule::Printed).unwrap(),
                        "{a} {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn dof_mismatch_is_rejected() {
        assert!(matches!(
            bracket_moments(&g(&[2, 0]), &g(&[2, 0, 0, 0])),
            Err(Error::DofMismatch { .. })
        ));
    }

    #[test]
    fn classical_brackets() {
        assert_eq!(bracket_with_classical(0, &Operand::Variable(1)), Expr::one());
        assert_eq!(bracket_with_classical(1, &Operand::Variable(0)), -Expr::one());
        assert!(bracket_with_classical(1, &Operand::Moment(g(&[2, 0, 0, 0]))).is_zero());
        assert!(bracket_with_classical(2, &Operand::Variable(1)).is_zero());
        assert!(bracket_with_classical(0, &Operand::Variable(2)).is_zero());
    }

    #[test]
    fn function_brackets() {
        let r = Expr::symbol(Symbol::Var(0));
        let pr = Expr::symbol(Symbol::Var(1));
        let m = Expr::symbol(Symbol::Param(0));
        let minv = m.inverse_monomial().unwrap();
        // {p^2/2m, r} = -p/m
        let kinetic = (&pr.pow(2) * &minv).scale(rat(1, 2));
        assert_eq!(bracket_functions(2, &kinetic, &r).unwrap(), -(&pr * &minv));
        // {G^{0,2,0,0}/2m, G^{2,0,0,0}} = 2 G^{1,1,0,0} / m
        let hq = (&gm(&[0, 2, 0, 0]) * &minv).scale(rat(1, 2));
        assert_eq!(
            bracket_functions(2, &hq, &gm(&[2, 0, 0, 0])).unwrap(),
            (&gm(&[1, 1, 0, 0]) * &minv).scale(int(2))
        );
        // {r^-1 G^{2,0,0,0}, p_r} = -r^-2 G^{2,0,0,0}
        let f = &Expr::symbol_pow(Symbol::Var(0), -1) * &gm(&[2, 0, 0, 0]);
        assert_eq!(
            bracket_functions(2, &f, &pr).unwrap(),
            -(&Expr::symbol_pow(Symbol::Var(0), -2) * &gm(&[2, 0, 0, 0]))
        );
    }
}
