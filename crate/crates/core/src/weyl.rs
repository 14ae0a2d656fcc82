//! Operator-algebra oracle for moment brackets.
//!
//! Centered operators `X_i = x^_i - x_i`, `P_i = p^_i - p_i` obey
//! `[X_i, P_j] = i hbar delta_ij`. Polynomials are kept normal ordered (all
//! `X_i` left of `P_i`, dofs in index order), so a term is an exponent vector
//! plus a power of hbar and a complex rational coefficient.
//!
//! The oracle bracket of two moments is `sigma * (<[W_A, W_B]> / (i hbar) + chain)`
//! where `W` is the Weyl-symmetrized word, the expectation of a normal-ordered
//! word is re-expanded into Weyl moments by triangular inversion, and `chain`
//! collects the terms from the dependence of central moments on `x, p`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::bracket::{bracket_moments_with, BracketRule};
use crate::combinatorics::{binomial, factorial};
use crate::error::{Error, Result};
use crate::expr::{int, Expr, GenericNames, Rational};
use crate::moment::{enumerate_moments, MomentIndex};

pub type CRational = Complex<Rational>;

pub const DEFAULT_CAP: u32 = 6;

fn c_real(r: Rational) -> CRational {
    Complex::new(r, Rational::zero())
}

/// `(-i)^j`.
fn minus_i_pow(j: u32) -> CRational {
    let (o, z) = (Rational::one(), Rational::zero());
    match j % 4 {
        0 => Complex::new(o, z),
        1 => Complex::new(z, -o),
        2 => Complex::new(-o, z),
        _ => Complex::new(z, o),
    }
}

/// Normal-ordered noncommutative polynomial over `X_i, P_i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NcPolynomial {
    dofs: usize,
    /// `(hbar power, [a_1, b_1, ...])` for the word `X_1^{a_1} P_1^{b_1} ...`.
    terms: BTreeMap<(u32, Vec<u32>), CRational>,
}

impl NcPolynomial {
    pub fn zero(dofs: usize) -> Self {
        NcPolynomial {
            dofs,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dofs: usize) -> Self {
        let mut p = NcPolynomial::zero(dofs);
        p.add_term(0, vec![0; 2 * dofs], c_real(Rational::one()));
        p
    }

    pub fn word(exps: &[u32]) -> Self {
        let mut p = NcPolynomial::zero(exps.len() / 2);
        p.add_term(0, exps.to_vec(), c_real(Rational::one()));
        p
    }

    pub fn dofs(&self) -> usize {
        self.dofs
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, Vec<u32>), &CRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, hbar: u32, exps: &[u32]) -> CRational {
        self.terms
            .get(&(hbar, exps.to_vec()))
            .cloned()
            .unwrap_or_else(Complex::zero)
    }

    fn add_term(&mut self, hbar: u32, exps: Vec<u32>, c: CRational) {
        if c.is_zero() {
            return;
        }
        let key = (hbar, exps);
        let entry = self.terms.entry(key.clone()).or_insert_with(Complex::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    fn add_assign(&mut self, other: &NcPolynomial) {
        for ((h, e), c) in &other.terms {
            self.add_term(*h, e.clone(), *c);
        }
    }

    fn scale(&self, c: CRational) -> NcPolynomial {
        let mut out = NcPolynomial::zero(self.dofs);
        for ((h, e), v) in &self.terms {
            out.add_term(*h, e.clone(), *v * c);
        }
        out
    }

    /// Product of two normal-ordered words, reordered with
    /// `P^b X^c = sum_j C(b,j) C(c,j) j! (-i hbar)^j X^{c-j} P^{b-j}` per dof.
    fn mul_words(dofs: usize, left: &[u32], right: &[u32]) -> Vec<(u32, Vec<u32>, CRational)> {
        let mut acc: Vec<(u32, Vec<u32>, CRational)> =
            vec![(0, Vec::with_capacity(2 * dofs), c_real(Rational::one()))];
        for i in 0..dofs {
            let (a, b) = (left[2 * i], left[2 * i + 1]);
            let (c, d) = (right[2 * i], right[2 * i + 1]);
            let mut next = Vec::new();
            for j in 0..=b.min(c) {
                let w = int(binomial(b as i64, j as i64)
                    * binomial(c as i64, j as i64)
                    * factorial(j));
                let coeff = minus_i_pow(j) * c_real(w);
                for (h, exps, cur) in &acc {
                    let mut e = exps.clone();
                    e.push(a + c - j);
                    e.push(b + d - j);
                    next.push((h + j, e, *cur * coeff));
                }
            }
            acc = next;
        }
        acc
    }

    pub fn mul(&self, other: &NcPolynomial) -> NcPolynomial {
        assert_eq!(self.dofs, other.dofs);
        let mut out = NcPolynomial::zero(self.dofs);
        for ((h1, e1), c1) in &self.terms {
            for ((h2, e2), c2) in &other.terms {
                for (h, e, c) in NcPolynomial::mul_words(self.dofs, e1, e2) {
                    out.add_term(h1 + h2 + h, e, *c1 * *c2 * c);
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &NcPolynomial) -> NcPolynomial {
        let mut out = self.mul(other);
        out.add_assign(&other.mul(self).scale(c_real(-Rational::one())));
        out
    }

    /// Text form with `X1, P1, ...` and an explicit `i` on imaginary parts.
    pub fn display(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for ((h, e), c) in &self.terms {
            let mut factors = Vec::new();
            if *h > 0 {
                factors.push(if *h == 1 { "hbar".to_string() } else { format!("hbar^{h}") });
            }
            for i in 0..self.dofs {
                for (letter, p) in [("X", e[2 * i]), ("P", e[2 * i + 1])] {
                    match p {
                        0 => {}
                        1 => factors.push(format!("{letter}{}", i + 1)),
                        _ => factors.push(format!("{letter}{}^{p}", i + 1)),
                    }
                }
            }
            let coeff = match (c.re.is_zero(), c.im.is_zero()) {
                (false, true) => format!("{}", c.re),
                (true, false) => format!("{}i", c.im),
                _ => format!("({} + {}i)", c.re, c.im),
            };
            let mut s = coeff;
            for f in factors {
                s.push('*');
                s.push_str(&f);
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

/// Weyl-symmetrized word for one dof, normal ordered: average over all
/// distinct arrangements of `a` letters `X` and `b` letters `P`.
fn symmetrize_pair(a: u32, b: u32) -> NcPolynomial {
    let n = (a + b) as usize;
    let mut total = NcPolynomial::zero(1);
    let mut count: i128 = 0;
    // arrangements as bitmasks with exactly `b` set bits marking P
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() != b {
            continue;
        }
        let mut word = NcPolynomial::one(1);
        for pos in 0..n {
            let letter = if mask & (1 << pos) != 0 { [0, 1] } else { [1, 0] };
            word = word.mul(&NcPolynomial::word(&letter));
        }
        total.add_assign(&word);
        count += 1;
    }
    total.scale(c_real(Rational::new(1, count)))
}

/// Embeds a one-dof polynomial into slot `dof` of a `dofs`-dof polynomial.
fn embed(p: &NcPolynomial, dof: usize, dofs: usize) -> NcPolynomial {
    let mut out = NcPolynomial::zero(dofs);
    for ((h, e), c) in &p.terms {
        let mut exps = vec![0; 2 * dofs];
        exps[2 * dof] = e[0];
        exps[2 * dof + 1] = e[1];
        out.add_term(*h, exps, *c);
    }
    out
}

/// Weyl-symmetrized operator of a moment index, normal ordered.
pub fn weyl_symmetrize(index: &MomentIndex, cap: u32) -> Result<NcPolynomial> {
    if index.order() > cap {
        return Err(Error::OracleCapacity {
            order: index.order(),
            cap,
        });
    }
    let dofs = index.dofs();
    let mut out = NcPolynomial::one(dofs);
    for i in 0..dofs {
        let (a, b) = index.pair(i);
        if a + b == 0 {
            continue;
        }
        out = out.mul(&embed(&symmetrize_pair(a, b), i, dofs));
    }
    Ok(out)
}

/// Operator oracle with a frozen global sign convention.
pub struct WeylOracle {
    cap: u32,
    sigma: i32,
    // normal-ordered (a, b) of one dof -> sum of c * hbar^h * W(a', b')
    inverse: std::sync::Mutex<HashMap<(u32, u32), Vec<(u32, u32, u32, CRational)>>>,
}

impl WeylOracle {
    /// Builds the oracle and fits the sign constant on `{G^{2,0}, G^{0,2}}`
    /// against the bracket engine's `-4 G^{1,1}`.
    pub fn fitted(cap: u32) -> Result<Self> {
        let mut o = WeylOracle {
            cap,
            sigma: 1,
            inverse: std::sync::Mutex::new(HashMap::new()),
        };
        let a = MomentIndex::new(&[2, 0]);
        let b = MomentIndex::new(&[0, 2]);
        let raw = o.physical_bracket(&a, &b)?;
        let target = bracket_moments_with(&a, &b, BracketRule::Exact)?;
        o.sigma = if raw == target {
            1
        } else if -&raw == target {
            -1
        } else {
            return Err(Error::OracleImaginary(format!(
                "cannot fit sign: oracle gives {raw:?}, engine gives {target:?}"
            )));
        };
        Ok(o)
    }

    pub fn sigma(&self) -> i32 {
        self.sigma
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Normal-ordered one-dof word `X^a P^b` as a combination of Weyl words.
    fn normal_to_weyl(&self, a: u32, b: u32) -> Vec<(u32, u32, u32, CRational)> {
        if let Some(hit) = self.inverse.lock().unwrap().get(&(a, b)) {
            return hit.clone();
        }
        // W(a,b) = X^a P^b + lower, so X^a P^b = W(a,b) - sum lower_t N(t)
        let w = symmetrize_pair(a, b);
        let mut acc: BTreeMap<(u32, u32, u32), CRational> = BTreeMap::new();
        acc.insert((0, a, b), c_real(Rational::one()));
        for ((h, e), c) in &w.terms {
            if *h == 0 && e[0] == a && e[1] == b {
                continue;
            }
            for (h2, a2, b2, c2) in self.normal_to_weyl(e[0], e[1]) {
                let entry = acc.entry((h + h2, a2, b2)).or_insert_with(Complex::zero);
                *entry -= *c * c2;
            }
        }
        let out: Vec<_> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((h, a, b), c)| (h, a, b, c))
            .collect();
        self.inverse.lock().unwrap().insert((a, b), out.clone());
        out
    }

    /// Expectation value of a normal-ordered polynomial in central moments:
    /// real part and imaginary part, as expressions with hbar powers.
    fn expectation(&self, p: &NcPolynomial) -> (Expr, Expr) {
        let dofs = p.dofs;
        let mut re = Expr::zero();
        let mut im = Expr::zero();
        for ((h, e), c) in &p.terms {
            // product over dofs of per-dof Weyl expansions
            let mut acc: Vec<(u32, Vec<u32>, CRational)> = vec![(0, Vec::new(), *c)];
            for i in 0..dofs {
                let expansion = self.normal_to_weyl(e[2 * i], e[2 * i + 1]);
                let mut next = Vec::new();
                for (h0, flat, c0) in &acc {
                    for (h1, a1, b1, c1) in &expansion {
                        let mut f = flat.clone();
                        f.push(*a1);
                        f.push(*b1);
                        next.push((h0 + h1, f, *c0 * *c1));
                    }
                }
                acc = next;
            }
            for (h1, flat, c1) in acc {
                let g = Expr::moment(MomentIndex::new(&flat));
                if g.is_zero() {
                    continue;
                }
                let base = &Expr::hbar_pow(h + h1) * &g;
                re += &base.scale(c1.re);
                im += &base.scale(c1.im);
            }
        }
        (re, im)
    }

    /// Commutator bracket in the physical convention, before the sign fit.
    fn physical_bracket(&self, a: &MomentIndex, b: &MomentIndex) -> Result<Expr> {
        if a.dofs() != b.dofs() {
            return Err(Error::DofMismatch {
                index: b.clone(),
                dofs: a.dofs(),
            });
        }
        let wa = weyl_symmetrize(a, self.cap)?;
        let wb = weyl_symmetrize(b, self.cap)?;
        let comm = wa.commutator(&wb);
        // divide by i hbar: every commutator term carries at least one hbar
        let mut divided = NcPolynomial::zero(comm.dofs);
        for ((h, e), c) in &comm.terms {
            if *h == 0 {
                return Err(Error::OracleImaginary(format!(
                    "commutator term without hbar in [{a}, {b}]"
                )));
            }
            divided.add_term(h - 1, e.clone(), *c * minus_i_pow(1));
        }
        let (re, im) = self.expectation(&divided);
        if !im.is_zero() {
            return Err(Error::OracleImaginary(format!(
                "bracket of {a} and {b} keeps imaginary part {im:?}"
            )));
        }
        if let Some((m, _)) = re.terms().find(|(m, _)| m.hbar % 2 == 1) {
            return Err(Error::OracleImaginary(format!(
                "bracket of {a} and {b} has odd hbar power {}",
                m.hbar
            )));
        }
        let mut out = re;
        for i in 0..a.dofs() {
            let (ai, bi) = a.pair(i);
            let (ci, di) = b.pair(i);
            if ai * di > 0 {
                let t = &Expr::moment(a.lowered(2 * i).unwrap())
                    * &Expr::moment(b.lowered(2 * i + 1).unwrap());
                out -= &t.scale(int((ai * di) as i128));
            }
            if bi * ci > 0 {
                let t = &Expr::moment(a.lowered(2 * i + 1).unwrap())
                    * &Expr::moment(b.lowered(2 * i).unwrap());
                out += &t.scale(int((bi * ci) as i128));
            }
        }
        Ok(out)
    }

    /// Oracle bracket in the fitted convention.
    pub fn bracket(&self, a: &MomentIndex, b: &MomentIndex) -> Result<Expr> {
        let raw = self.physical_bracket(a, b)?;
        Ok(if self.sigma == 1 { raw } else { -raw })
    }
}

/// `oracle_bracket` with the default cap and a freshly fitted sign.
pub fn oracle_bracket(a: &MomentIndex, b: &MomentIndex) -> Result<Expr> {
    WeylOracle::fitted(DEFAULT_CAP)?.bracket(a, b)
}

#[derive(Debug, Clone)]
pub struct PairCheck {
    pub a: MomentIndex,
    pub b: MomentIndex,
    pub engine: Expr,
    pub oracle: Expr,
}

impl PairCheck {
    pub fn matches(&self) -> bool {
        self.engine == self.oracle
    }
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub rule: BracketRule,
    pub sigma: i32,
    pub checks: Vec<PairCheck>,
}

impl OracleReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &PairCheck> {
        self.checks.iter().filter(|c| !c.matches())
    }

    pub fn all_match(&self) -> bool {
        self.checks.iter().all(PairCheck::matches)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let bad = self.mismatches().count();
        writeln!(
            s,
            "oracle check: rule={} sigma={} pairs={} mismatches={}",
            self.rule,
            self.sigma,
            self.checks.len(),
            bad
        )
        .unwrap();
        for c in &self.checks {
            if c.matches() {
                writeln!(s, "ok   {{{}, {}}} = {}", c.a, c.b, c.engine.display(&GenericNames)).unwrap();
            } else {
                writeln!(s, "FAIL {{{}, {}}}", c.a, c.b).unwrap();
                writeln!(s, "     engine: {}", c.engine.display(&GenericNames)).unwrap();
                writeln!(s, "     oracle: {}", c.oracle.display(&GenericNames)).unwrap();
                let diff = &c.engine - &c.oracle;
                writeln!(s, "     engine - oracle: {}", diff.display(&GenericNames)).unwrap();
            }
        }
        s
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Compares engine and oracle on every ordered pair of stored moments with
/// `2 <= order <= max_order` over `dofs` canonical pairs.
pub fn verify_pairs(
    oracle: &WeylOracle,
    dofs: usize,
    max_order: u32,
    rule: BracketRule,
) -> Result<OracleReport> {
    let moments = enumerate_moments(dofs, max_order)?;
    let mut checks = Vec::with_capacity(moments.len() * moments.len());
    for a in &moments {
        for b in &moments {
            checks.push(PairCheck {
                a: a.clone(),
                b: b.clone(),
                engine: bracket_moments_with(a, b, rule)?,
                oracle: oracle.bracket(a, b)?,
            });
        }
    }
    Ok(OracleReport {
        rule,
        sigma: oracle.sigma,
        checks,
    })
}
