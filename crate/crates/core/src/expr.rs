//! Exact-coefficient polynomial expressions over classical variables (integer
//! powers, negative allowed), model parameters, moment symbols and powers of hbar.
//!
//! Expressions are always normalized: terms with an identical monomial are
//! merged and zero coefficients are dropped.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::moment::MomentIndex;

pub type Rational = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

/// A classical symbol: canonical variable `Var(slot)` (slot `2i` is `q_i`,
/// slot `2i + 1` is `p_i`) or a model parameter `Param(j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Var(u8),
    Param(u8),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub hbar: u32,
    /// Sorted by symbol, exponents nonzero.
    pub powers: Vec<(Symbol, i32)>,
    /// Sorted multiset of moment factors, each of order >= 2.
    pub moments: Vec<MomentIndex>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial {
            hbar: 0,
            powers: Vec::new(),
            moments: Vec::new(),
        }
    }

    pub fn power_of(&self, s: Symbol) -> i32 {
        self.powers
            .iter()
            .find(|(x, _)| *x == s)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn moment_order(&self) -> u32 {
        self.moments.iter().map(MomentIndex::order).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut powers: BTreeMap<Symbol, i32> = self.powers.iter().copied().collect();
        for &(s, e) in &other.powers {
            *powers.entry(s).or_insert(0) += e;
        }
        let mut moments = self.moments.clone();
        moments.extend(other.moments.iter().cloned());
        moments.sort();
        Monomial {
            hbar: self.hbar + other.hbar,
            powers: powers.into_iter().filter(|&(_, e)| e != 0).collect(),
            moments,
        }
    }

    fn with_power(mut self, s: Symbol, delta: i32) -> Monomial {
        match self.powers.iter_mut().find(|(x, _)| *x == s) {
            Some(entry) => entry.1 += delta,
            None => self.powers.push((s, delta)),
        }
        self.powers.retain(|&(_, e)| e != 0);
        self.powers.sort();
        self
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Expr {
    terms: BTreeMap<Monomial, Rational>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut e = Expr::zero();
        e.add_term(Monomial::one(), c);
        e
    }

    pub fn one() -> Self {
        Expr::constant(Rational::one())
    }

    pub fn symbol(s: Symbol) -> Self {
        Expr::symbol_pow(s, 1)
    }

    pub fn symbol_pow(s: Symbol, e: i32) -> Self {
        let mono = Monomial::one().with_power(s, e);
        let mut out = Expr::zero();
        out.add_term(mono, Rational::one());
        out
    }

    pub fn hbar_pow(p: u32) -> Self {
        let mut out = Expr::zero();
        out.add_term(
            Monomial {
                hbar: p,
                ..Monomial::one()
            },
            Rational::one(),
        );
        out
    }

    /// A moment factor; order 0 becomes the constant 1 and order 1 vanishes.
    pub fn moment(m: MomentIndex) -> Self {
        match m.order() {
            0 => Expr::one(),
            1 => Expr::zero(),
            _ => {
                let mut out = Expr::zero();
                out.add_term(
                    Monomial {
                        moments: vec![m],
                        ..Monomial::one()
                    },
                    Rational::one(),
                );
                out
            }
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut out = Expr::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn add_term(&mut self, mono: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &Monomial) -> Rational {
        self.terms.get(mono).copied().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), *v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Expr {
        let mut out = Expr::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Partial derivative with respect to a classical symbol.
    pub fn diff_symbol(&self, s: Symbol) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let e = m.power_of(s);
            if e != 0 {
                out.add_term(m.clone().with_power(s, -1), *c * int(e as i128));
            }
        }
        out
    }

    /// Partial derivative with respect to a moment symbol (treated as an independent variable).
    pub fn diff_moment(&self, g: &MomentIndex) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let count = m.moments.iter().filter(|x| *x == g).count();
            if count == 0 {
                continue;
            }
            let mut mono = m.clone();
            let pos = mono.moments.iter().position(|x| x == g).unwrap();
            mono.moments.remove(pos);
            out.add_term(mono, *c * int(count as i128));
        }
        out
    }

    /// Drops every term that carries a moment factor of order above `max_order`.
    pub fn truncate(&self, max_order: u32) -> Expr {
        self.filter(|m| m.moments.iter().all(|g| g.order() <= max_order))
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    /// Distinct moment symbols appearing anywhere in the expression.
    pub fn moments(&self) -> BTreeSet<MomentIndex> {
        self.terms
            .keys()
            .flat_map(|m| m.moments.iter().cloned())
            .collect()
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms
            .keys()
            .flat_map(|m| m.powers.iter().map(|(s, _)| *s))
            .collect()
    }

    pub fn max_hbar_power(&self) -> u32 {
        self.terms.keys().map(|m| m.hbar).max().unwrap_or(0)
    }

    /// Replaces a classical symbol by an expression (exponent must be nonnegative
    /// unless the replacement is a single monomial).
    pub fn substitute_symbol(&self, s: Symbol, with: &Expr) -> Result<Expr> {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let e = m.power_of(s);
            let rest = Expr::from_terms([(m.clone().with_power(s, -e), *c)]);
            let factor = if e >= 0 {
                with.pow(e as u32)
            } else {
                with.inverse_monomial()?.pow((-e) as u32)
            };
            out += &(&rest * &factor);
        }
        Ok(out)
    }

    /// Replaces a moment symbol by an expression.
    pub fn substitute_moment(&self, g: &MomentIndex, with: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let count = m.moments.iter().filter(|x| *x == g).count() as u32;
            if count == 0 {
                out.add_term(m.clone(), *c);
                continue;
            }
            let mut mono = m.clone();
            mono.moments.retain(|x| x != g);
            let rest = Expr::from_terms([(mono, *c)]);
            out += &(&rest * &with.pow(count));
        }
        out
    }

    /// Multiplicative inverse of a single classical monomial with no moments or hbar.
    pub fn inverse_monomial(&self) -> Result<Expr> {
        if self.terms.len() != 1 {
            return Err(Error::UnsupportedHamiltonian(format!(
                "cannot invert non-monomial expression with {} terms",
                self.terms.len()
            )));
        }
        let (m, c) = self.terms.iter().next().unwrap();
        if !m.moments.is_empty() || m.hbar != 0 {
            return Err(Error::UnsupportedHamiltonian(
                "cannot invert an expression containing moments or hbar".into(),
            ));
        }
        let inv = Monomial {
            hbar: 0,
            powers: m.powers.iter().map(|&(s, e)| (s, -e)).collect(),
            moments: Vec::new(),
        };
        Ok(Expr::from_terms([(inv, c.recip())]))
    }

    /// Numeric value under a valuation of symbols, moments and hbar.
    pub fn evaluate(&self, v: &dyn Valuation) -> Result<f64> {
        let hbar = v.hbar();
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut x = c.numer().to_f64().unwrap() / c.denom().to_f64().unwrap();
            if m.hbar > 0 {
                x *= hbar.powi(m.hbar as i32);
            }
            for &(s, e) in &m.powers {
                x *= v.symbol(s)?.powi(e);
            }
            for g in &m.moments {
                x *= v.moment(g)?;
            }
            total += x;
        }
        Ok(total)
    }

    pub fn display<'a>(&'a self, names: &'a dyn SymbolNames) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

pub trait Valuation {
    fn symbol(&self, s: Symbol) -> Result<f64>;
    fn moment(&self, g: &MomentIndex) -> Result<f64>;
    fn hbar(&self) -> f64;
}

pub trait SymbolNames {
    fn symbol_name(&self, s: Symbol) -> String;
}

/// Generic names: `q1, p1, ...` for variables and `c0, c1, ...` for parameters.
pub struct GenericNames;

impl SymbolNames for GenericNames {
    fn symbol_name(&self, s: Symbol) -> String {
        match s {
            Symbol::Var(slot) if slot % 2 == 0 => format!("q{}", slot / 2 + 1),
            Symbol::Var(slot) => format!("p{}", slot / 2 + 1),
            Symbol::Param(j) => format!("c{j}"),
        }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a dyn SymbolNames,
}

fn write_rational(out: &mut String, c: &Rational) {
    if c.is_integer() {
        write!(out, "{}", c.numer()).unwrap();
    } else {
        write!(out, "{}/{}", c.numer(), c.denom()).unwrap();
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.expr.is_zero() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, (m, c)) in self.expr.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            match (i, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let mut factors: Vec<String> = Vec::new();
            if m.hbar > 0 {
                factors.push(if m.hbar == 1 {
                    "hbar".into()
                } else {
                    format!("hbar^{}", m.hbar)
                });
            }
            for &(s, e) in &m.powers {
                let name = self.names.symbol_name(s);
                factors.push(if e == 1 { name } else { format!("{name}^{e}") });
            }
            for g in &m.moments {
                factors.push(g.to_string());
            }
            if factors.is_empty() || !mag.is_one() {
                write_rational(&mut out, &mag);
                if !factors.is_empty() {
                    out.push('*');
                }
            }
            out.push_str(&factors.join("*"));
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(&GenericNames))
    }
}

impl AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), *c);
        }
    }
}

impl SubAssign<&Expr> for Expr {
    fn sub_assign(&mut self, rhs: &Expr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -*c);
        }
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(mut self, rhs: Expr) -> Expr {
        self += &rhs;
        self
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(mut self, rhs: Expr) -> Expr {
        self -= &rhs;
        self
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(-Rational::one())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(-Rational::one())
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), *ca * *cb);
            }
        }
        out
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        &self * &rhs
    }
}

impl Mul<Rational> for &Expr {
    type Output = Expr;
    fn mul(self, rhs: Rational) -> Expr {
        self.scale(rhs)
    }
}

impl Mul<Rational> for Expr {
    type Output = Expr;
    fn mul(self, rhs: Rational) -> Expr {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const X: Symbol = Symbol::Var(0);
    const P: Symbol = Symbol::Var(1);

    #[test]
    fn merging_and_cancellation() {
        let a = Expr::symbol(X) + Expr::symbol(P);
        let b = Expr::symbol(X) - Expr::symbol(P);
        let sum = &a + &b;
        assert_eq!(sum, Expr::symbol(X).scale(int(2)));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn derivative_of_negative_power() {
        let e = Expr::symbol_pow(X, -1);
        assert_eq!(e.diff_symbol(X), -Expr::symbol_pow(X, -2));
    }

    #[test]
    fn moment_constants() {
        assert_eq!(Expr::moment(MomentIndex::new(&[0, 0])), Expr::one());
        assert!(Expr::moment(MomentIndex::new(&[1, 0])).is_zero());
    }

    #[test]
    fn moment_derivative_counts_multiplicity() {
        let g = MomentIndex::new(&[2, 0]);
        let sq = Expr::moment(g.clone()).pow(2);
        assert_eq!(sq.diff_moment(&g), Expr::moment(g).scale(int(2)));
    }

    #[test]
    fn truncation_drops_high_moments() {
        let e = Expr::moment(MomentIndex::new(&[2, 0])) + Expr::moment(MomentIndex::new(&[3, 0]));
        assert_eq!(e.truncate(2), Expr::moment(MomentIndex::new(&[2, 0])));
    }

    #[test]
    fn display_is_stable() {
        let e = Expr::symbol_pow(X, -3).scale(rat(3, 2)) - Expr::moment(MomentIndex::new(&[1, 1]));
        assert_eq!(format!("{:?}", e), "-G[1,1] + 3/2*q1^-3");
    }
}
