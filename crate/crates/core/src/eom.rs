//! Truncated equations of motion `f' = {f, H_Q}`, the reference
//! systems, symbolic/numeric comparison, and the equation file format.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bracket::{BracketEngine, BracketRule};
use crate::error::{Error, Result};
use crate::expr::{Expr, Monomial, Rational, Symbol, SymbolNames};
use crate::hamiltonian::{build_hq_hydrogen, build_hq_taylor, ClassicalModel, StateValuation, P_THETA};
use crate::moment::{enumerate_moments, MomentIndex, SystemState};
use crate::parse::{parse_complex, parse_rational, Ident};
use crate::reference;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    /// Canonical slot: `2i` is `q_i`, `2i + 1` is `p_i`.
    Classical(u8),
    Moment(MomentIndex),
}

impl Variable {
    pub fn name(&self, model: &ClassicalModel) -> String {
        match self {
            Variable::Classical(s) => model.variables[*s as usize].clone(),
            Variable::Moment(g) => g.column_name(),
        }
    }

    pub fn parse(name: &str, model: &ClassicalModel) -> Option<Variable> {
        if let Some(pos) = model.variables.iter().position(|v| v == name) {
            return Some(Variable::Classical(pos as u8));
        }
        MomentIndex::parse_column_name(name)
            .filter(|g| g.dofs() == model.dofs)
            .map(Variable::Moment)
    }

    pub fn as_expr(&self) -> Expr {
        match self {
            Variable::Classical(s) => Expr::symbol(Symbol::Var(*s)),
            Variable::Moment(g) => Expr::moment(g.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Generated,
    Transcribed,
    /// Taken unchanged from the lower-order listing.
    CarriedOver,
    /// Not listed in the source; the rhs is empty and must not be used.
    NotPrinted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub var: Variable,
    pub rhs: Expr,
    /// Terms carrying an explicit imaginary unit in the source; never integrated.
    pub imaginary: Expr,
    pub source: Source,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveSystem {
    pub model: ClassicalModel,
    pub order: u32,
    pub rule: BracketRule,
    pub hamiltonian: Expr,
    pub equations: Vec<Equation>,
}

/// Classical variables then moments in canonical order.
pub fn system_variables(model: &ClassicalModel, order: u32) -> Result<Vec<Variable>> {
    let mut vars: Vec<Variable> = (0..2 * model.dofs).map(|s| Variable::Classical(s as u8)).collect();
    vars.extend(enumerate_moments(model.dofs, order)?.into_iter().map(Variable::Moment));
    Ok(vars)
}

/// How `H_Q` is cut before brackets are taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HamiltonianCut {
    /// Taylor expansion with every moment of order `> N` dropped.
    #[default]
    Order,
    /// Hydrogen only: closed-form sums over `a <= N`, `b <= N - 1`, not
    /// truncated, so `G^{N-1,0,0,2}` (order `N + 1`) survives.
    ClosedFormSums,
}

/// Generates every equation of motion at truncation `order`.
pub fn generate(model: &ClassicalModel, order: u32, rule: BracketRule) -> Result<EffectiveSystem> {
    generate_with_cut(model, order, rule, HamiltonianCut::Order)
}

pub fn generate_with_cut(
    model: &ClassicalModel,
    order: u32,
    rule: BracketRule,
    cut: HamiltonianCut,
) -> Result<EffectiveSystem> {
    let hq = match cut {
        HamiltonianCut::Order => build_hq_taylor(model, order)?,
        HamiltonianCut::ClosedFormSums => {
            if model.name != "hydrogen" {
                return Err(Error::UnsupportedHamiltonian(format!(
                    "closed-form sums exist only for hydrogen, not '{}'",
                    model.name
                )));
            }
            if order < 2 {
                return Err(Error::InvalidTruncation(order));
            }
            build_hq_hydrogen(order, order - 1, order + 1)?
        }
    };
    let engine = BracketEngine::new(model.dofs, rule);
    let vars = system_variables(model, order)?;
    let rhs: Result<Vec<Expr>> = vars
        .par_iter()
        .map(|v| Ok(engine.functions(&v.as_expr(), &hq)?.truncate(order)))
        .collect();
    let equations = vars
        .into_iter()
        .zip(rhs?)
        .map(|(var, rhs)| Equation {
            var,
            rhs,
            imaginary: Expr::zero(),
            source: Source::Generated,
        })
        .collect();
    Ok(EffectiveSystem {
        model: model.clone(),
        order,
        rule,
        hamiltonian: hq,
        equations,
    })
}

fn hydrogen_resolver(name: &str) -> Option<Ident> {
    let v = |s: Symbol| Some(Ident::Value(Expr::symbol(s)));
    match name {
        "r" => v(Symbol::Var(0)),
        "p_r" => v(Symbol::Var(1)),
        "theta" => v(Symbol::Var(2)),
        "p_theta" | "l" => v(P_THETA),
        "m" => v(Symbol::Param(0)),
        "k" => v(Symbol::Param(1)),
        "hbar" => Some(Ident::Value(Expr::hbar_pow(1))),
        "dl2" => Some(Ident::Value(Expr::moment(MomentIndex::new(&[0, 0, 0, 2])))),
        "i" => Some(Ident::ImaginaryUnit),
        _ => None,
    }
}

/// The reference hydrogen system at order 2 or 3, transcribed term for term.
pub fn reference_system(order: u32) -> Result<EffectiveSystem> {
    let (table, carried): (&[(&str, Option<&str>)], &[&str]) = match order {
        2 => (reference::ORDER2, &[]),
        3 => (reference::ORDER3, reference::ORDER3_CARRIED),
        other => return Err(Error::InvalidTruncation(other)),
    };
    let model = ClassicalModel::hydrogen();
    let mut equations = Vec::new();
    for var in system_variables(&model, order)? {
        let name = var.name(&model);
        let entry = table
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::VariableMismatch(format!("no transcription entry for {name}")))?;
        let eq = match entry.1 {
            None => Equation {
                var,
                rhs: Expr::zero(),
                imaginary: Expr::zero(),
                source: Source::NotPrinted,
            },
            Some(src) => {
                let c = parse_complex(src, 2, &hydrogen_resolver)?;
                let source = if carried.contains(&name.as_str()) {
                    Source::CarriedOver
                } else {
                    Source::Transcribed
                };
                Equation {
                    var,
                    rhs: c.re,
                    imaginary: c.im,
                    source,
                }
            }
        };
        equations.push(eq);
    }
    Ok(EffectiveSystem {
        model,
        order,
        rule: BracketRule::Printed,
        hamiltonian: build_hq_hydrogen(order, order - 1, order + 1)?,
        equations,
    })
}

impl EffectiveSystem {
    pub fn variables(&self) -> Vec<Variable> {
        self.equations.iter().map(|e| e.var.clone()).collect()
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.equations.iter().map(|e| e.var.name(&self.model)).collect()
    }

    pub fn equation(&self, var: &Variable) -> Option<&Equation> {
        self.equations.iter().find(|e| &e.var == var)
    }

    pub fn rhs_of(&self, name: &str) -> Option<&Expr> {
        let var = Variable::parse(name, &self.model)?;
        self.equation(&var).map(|e| &e.rhs)
    }

    /// Number of equations with a nonzero right-hand side.
    /// Number of equations carrying imaginary-flagged terms.
    pub fn imaginary_count(&self) -> usize {
        self.equations.iter().filter(|e| !e.imaginary.is_zero()).count()
    }

    pub fn live_count(&self) -> usize {
        self.equations.iter().filter(|e| !e.rhs.is_zero()).count()
    }

    pub fn names(&self) -> impl SymbolNames + '_ {
        self.model.names()
    }

    /// `sum_v dH_Q/dv * rhs(v)`; zero when the truncated flow conserves `H_Q`.
    pub fn energy_closure(&self) -> Expr {
        let mut out = Expr::zero();
        for eq in &self.equations {
            let d = match &eq.var {
                Variable::Classical(s) => self.hamiltonian.diff_symbol(Symbol::Var(*s)),
                Variable::Moment(g) => self.hamiltonian.diff_moment(g),
            };
            if !d.is_zero() && !eq.rhs.is_zero() {
                out += &(&d * &eq.rhs);
            }
        }
        out
    }

    /// The system with every moment set to zero.
    pub fn classical_limit(&self) -> Vec<(Variable, Expr)> {
        self.equations
            .iter()
            .map(|e| (e.var.clone(), e.rhs.filter(|m| m.moments.is_empty())))
            .collect()
    }

    /// Human-readable listing, one equation per line.
    pub fn listing(&self) -> String {
        let names = self.model.names();
        let mut s = String::new();
        writeln!(
            s,
            "# model={} order={} rule={} equations={} live={}",
            self.model.name,
            self.order,
            self.rule,
            self.equations.len(),
            self.live_count()
        )
        .unwrap();
        writeln!(s, "H_Q = {}", self.hamiltonian.display(&names)).unwrap();
        for eq in &self.equations {
            let name = eq.var.name(&self.model);
            match eq.source {
                Source::NotPrinted => writeln!(s, "d/dt {name} = (not listed)").unwrap(),
                _ => {
                    write!(s, "d/dt {name} = {}", eq.rhs.display(&names)).unwrap();
                    if !eq.imaginary.is_zero() {
                        write!(s, "   [imaginary-flagged: i*({})]", eq.imaginary.display(&names))
                            .unwrap();
                    }
                    s.push('\n');
                }
            }
        }
        s
    }

    /// Machine-readable form: header lines starting with `#`, then one line
    /// per variable: the name followed by tab-separated terms
    /// `coefficient hbar_power powers moments`, where `powers` is
    /// `name^e,...` or `-` and `moments` is `G_..*G_..` or `-`.
    pub fn to_equation_file(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# model {}", self.model.name).unwrap();
        writeln!(s, "# order {}", self.order).unwrap();
        writeln!(s, "# rule {}", self.rule).unwrap();
        writeln!(s, "# variables {}", self.variable_names().join(" ")).unwrap();
        writeln!(s, "# hamiltonian\t{}", encode_terms(&self.hamiltonian, &self.model)).unwrap();
        for eq in &self.equations {
            let name = eq.var.name(&self.model);
            if eq.source == Source::NotPrinted {
                writeln!(s, "{name}\t!not-listed").unwrap();
                continue;
            }
            let body = encode_terms(&eq.rhs, &self.model);
            if body.is_empty() {
                writeln!(s, "{name}").unwrap();
            } else {
                writeln!(s, "{name}\t{body}").unwrap();
            }
        }
        s
    }

    pub fn from_equation_file(text: &str) -> Result<EffectiveSystem> {
        let bad = |line: usize, msg: &str| Error::Parse {
            pos: line,
            msg: msg.to_string(),
        };
        let mut model: Option<ClassicalModel> = None;
        let mut order = None;
        let mut rule = BracketRule::Exact;
        let mut hamiltonian = Expr::zero();
        let mut equations = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let ln = ln + 1;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# ") {
                let (key, value) = rest.split_once([' ', '\t']).unwrap_or((rest, ""));
                match key {
                    "model" => model = Some(ClassicalModel::by_name(value.trim())?),
                    "order" => {
                        order = Some(value.trim().parse().map_err(|_| bad(ln, "bad order"))?)
                    }
                    "rule" => rule = value.trim().parse().map_err(|e: String| bad(ln, &e))?,
                    "hamiltonian" => {
                        let m = model.as_ref().ok_or_else(|| bad(ln, "model must come first"))?;
                        hamiltonian = decode_terms(value, m).map_err(|e| bad(ln, &e))?;
                    }
                    _ => {}
                }
                continue;
            }
            let m = model.as_ref().ok_or_else(|| bad(ln, "missing '# model' header"))?;
            let (name, body) = line.split_once('\t').unwrap_or((line, ""));
            let var = Variable::parse(name.trim(), m)
                .ok_or_else(|| bad(ln, &format!("unknown variable '{name}'")))?;
            if body.trim() == "!not-listed" {
                equations.push(Equation {
                    var,
                    rhs: Expr::zero(),
                    imaginary: Expr::zero(),
                    source: Source::NotPrinted,
                });
                continue;
            }
            let rhs = decode_terms(body, m).map_err(|e| bad(ln, &e))?;
            equations.push(Equation {
                var,
                rhs,
                imaginary: Expr::zero(),
                source: Source::Generated,
            });
        }
        Ok(EffectiveSystem {
            model: model.ok_or_else(|| bad(0, "missing '# model' header"))?,
            order: order.ok_or_else(|| bad(0, "missing '# order' header"))?,
            rule,
            hamiltonian,
            equations,
        })
    }
}

fn encode_terms(e: &Expr, model: &ClassicalModel) -> String {
    let names = model.names();
    e.terms()
        .map(|(m, c)| {
            let powers = if m.powers.is_empty() {
                "-".to_string()
            } else {
                m.powers
                    .iter()
                    .map(|&(s, p)| format!("{}^{}", names.symbol_name(s), p))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let moments = if m.moments.is_empty() {
                "-".to_string()
            } else {
                m.moments.iter().map(|g| g.column_name()).collect::<Vec<_>>().join("*")
            };
            format!("{} {} {} {}", c, m.hbar, powers, moments)
        })
        .collect::<Vec<_>>()
        .join("\t")
}

fn decode_terms(body: &str, model: &ClassicalModel) -> std::result::Result<Expr, String> {
    let mut terms: Vec<(Monomial, Rational)> = Vec::new();
    for t in body.split('\t').map(str::trim).filter(|t| !t.is_empty()) {
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 4 {
            return Err(format!("term '{t}' needs 4 fields"));
        }
        let c = parse_rational(f[0]).ok_or_else(|| format!("bad coefficient '{}'", f[0]))?;
        let hbar: u32 = f[1].parse().map_err(|_| format!("bad hbar power '{}'", f[1]))?;
        let mut powers = Vec::new();
        if f[2] != "-" {
            for p in f[2].split(',') {
                let (n, e) = p.split_once('^').ok_or_else(|| format!("bad power '{p}'"))?;
                let e: i32 = e.parse().map_err(|_| format!("bad exponent '{p}'"))?;
                let sym = if let Some(i) = model.variables.iter().position(|v| v == n) {
                    Symbol::Var(i as u8)
                } else if let Some(j) = model.parameters.iter().position(|v| v == n) {
                    Symbol::Param(j as u8)
                } else {
                    return Err(format!("unknown symbol '{n}'"));
                };
                powers.push((sym, e));
            }
        }
        powers.sort();
        let mut moments = Vec::new();
        if f[3] != "-" {
            for g in f[3].split('*') {
                let idx = MomentIndex::parse_column_name(g)
                    .filter(|i| i.dofs() == model.dofs && i.order() >= 2)
                    .ok_or_else(|| format!("bad moment '{g}'"))?;
                moments.push(idx);
            }
        }
        moments.sort();
        terms.push((Monomial { hbar, powers, moments }, c));
    }
    Ok(Expr::from_terms(terms))
}

/// Per-variable outcome of a comparison.
#[derive(Clone, Debug)]
pub struct VariableDiff {
    pub name: String,
    /// `rhs(A) - rhs(B)` on real parts.
    pub diff: Expr,
    /// Imaginary-flagged terms on either side, excluded from `diff`.
    pub imaginary_a: Expr,
    pub imaginary_b: Expr,
    pub not_listed: bool,
}

impl VariableDiff {
    pub fn hbar_part(&self) -> Expr {
        self.diff.filter(|m| m.hbar > 0)
    }

    pub fn classical_part(&self) -> Expr {
        self.diff.filter(|m| m.hbar == 0)
    }

    pub fn agrees(&self) -> bool {
        self.diff.is_zero() && !self.not_listed
    }
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub seed: u64,
    pub states: usize,
    pub diffs: Vec<VariableDiff>,
    pub max_relative_deviation: f64,
    pub worst_variable: Option<String>,
}

impl Comparison {
    pub fn symbolic_diff_empty(&self) -> bool {
        self.diffs.iter().all(VariableDiff::agrees)
            && self.diffs.iter().all(|d| d.imaginary_a.is_zero() && d.imaginary_b.is_zero())
    }

    /// True when the only disagreements are imaginary-flagged terms.
    pub fn confined_to_imaginary(&self) -> bool {
        self.diffs.iter().all(VariableDiff::agrees)
    }

    pub fn imaginary_items(&self) -> impl Iterator<Item = &VariableDiff> {
        self.diffs
            .iter()
            .filter(|d| !d.imaginary_a.is_zero() || !d.imaginary_b.is_zero())
    }

    pub fn report(&self, model: &ClassicalModel) -> String {
        let names = model.names();
        let mut s = String::new();
        let differing = self.diffs.iter().filter(|d| !d.agrees()).count();
        writeln!(
            s,
            "comparison: variables={} differing={} imaginary-flagged={} max-relative-deviation={:e} (seed {}, {} states{})",
            self.diffs.len(),
            differing,
            self.imaginary_items().count(),
            self.max_relative_deviation,
            self.seed,
            self.states,
            self.worst_variable
                .as_ref()
                .map(|w| format!(", worst {w}"))
                .unwrap_or_default()
        )
        .unwrap();
        for d in &self.diffs {
            if d.not_listed {
                writeln!(s, "{}: not listed in one system", d.name).unwrap();
                continue;
            }
            if !d.imaginary_a.is_zero() || !d.imaginary_b.is_zero() {
                let im = &d.imaginary_a - &d.imaginary_b;
                writeln!(s, "{}: imaginary-flagged i*({})", d.name, im.display(&names)).unwrap();
            }
            if d.diff.is_zero() {
                continue;
            }
            let h = d.hbar_part();
            if !h.is_zero() {
                writeln!(s, "{}: hbar terms A-B = {}", d.name, h.display(&names)).unwrap();
            }
            let c = d.classical_part();
            if !c.is_zero() {
                writeln!(s, "{}: other terms A-B = {}", d.name, c.display(&names)).unwrap();
            }
        }
        s
    }
}

/// Deterministic pseudo-random hydrogen-like states for numeric comparison:
/// `r in [0.5, 2]`, `p_r in [-1, 1]`, `theta in [0, 2 pi)`, `p_theta in [0.5, 1.5]`,
/// moments in `[-0.05, 0.05]` with all-even indices in `[0, 0.05]`,
/// and parameters `m, k in [0.5, 2]`, `hbar in [0.1, 1]`.
pub fn comparison_states(
    model: &ClassicalModel,
    order: u32,
    seed: u64,
    count: usize,
) -> Result<Vec<(SystemState, Vec<f64>, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moments = enumerate_moments(model.dofs, order)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut classical = Vec::with_capacity(2 * model.dofs);
        for slot in 0..2 * model.dofs {
            let v = match (model.singular_slot == Some(slot), slot) {
                (true, _) => rng.gen_range(0.5..2.0),
                (false, 1) => rng.gen_range(-1.0..1.0),
                (false, 2) => rng.gen_range(0.0..std::f64::consts::TAU),
                (false, 3) => rng.gen_range(0.5..1.5),
                _ => rng.gen_range(-1.0..1.0),
            };
            classical.push(v);
        }
        let mut st = SystemState::new(0.0, classical, order);
        for g in &moments {
            let even = g.as_slice().iter().all(|x| x % 2 == 0);
            let v = if even {
                rng.gen_range(0.0..0.05)
            } else {
                rng.gen_range(-0.05..0.05)
            };
            st.set(g.clone(), v);
        }
        let params: Vec<f64> = model.parameters.iter().map(|_| rng.gen_range(0.5..2.0)).collect();
        let hbar = rng.gen_range(0.1..1.0);
        out.push((st, params, hbar));
    }
    Ok(out)
}

/// Term-level diff plus numeric comparison on `count` seeded states.
pub fn compare_systems(
    a: &EffectiveSystem,
    b: &EffectiveSystem,
    seed: u64,
    count: usize,
) -> Result<Comparison> {
    let va = a.variables();
    let vb = b.variables();
    if va != vb || a.model.name != b.model.name {
        return Err(Error::VariableMismatch(format!(
            "systems differ in variables: [{}] vs [{}]",
            a.variable_names().join(", "),
            b.variable_names().join(", ")
        )));
    }
    let mut diffs = Vec::with_capacity(va.len());
    for (ea, eb) in a.equations.iter().zip(&b.equations) {
        diffs.push(VariableDiff {
            name: ea.var.name(&a.model),
            diff: &ea.rhs - &eb.rhs,
            imaginary_a: ea.imaginary.clone(),
            imaginary_b: eb.imaginary.clone(),
            not_listed: ea.source == Source::NotPrinted || eb.source == Source::NotPrinted,
        });
    }
    let mut worst = 0.0f64;
    let mut worst_variable = None;
    for (state, params, hbar) in comparison_states(&a.model, a.order, seed, count)? {
        let val = StateValuation {
            state: &state,
            params: &params,
            hbar,
        };
        for (ea, eb) in a.equations.iter().zip(&b.equations) {
            if ea.source == Source::NotPrinted || eb.source == Source::NotPrinted {
                continue;
            }
            let x = ea.rhs.evaluate(&val)?;
            let y = eb.rhs.evaluate(&val)?;
            let scale = x.abs().max(y.abs());
            let rel = if scale == 0.0 { 0.0 } else { (x - y).abs() / scale };
            if rel > worst || (rel.is_nan() && !worst.is_nan()) {
                worst = rel;
                worst_variable = Some(ea.var.name(&a.model));
            }
        }
    }
    Ok(Comparison {
        seed,
        states: count,
        diffs,
        max_relative_deviation: worst,
        worst_variable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::int;

    #[test]
    fn order_two_counts() {
        let sys = generate(&ClassicalModel::hydrogen(), 2, BracketRule::Exact).unwrap();
        assert_eq!(sys.equations.len(), 14);
        assert_eq!(sys.live_count(), 12);
        assert!(sys.rhs_of("p_theta").unwrap().is_zero());
        assert!(sys.rhs_of("G_0_0_0_2").unwrap().is_zero());
    }

    #[test]
    fn radial_velocity_is_exact() {
        for n in 2..=3 {
            let sys = generate(&ClassicalModel::hydrogen(), n, BracketRule::Exact).unwrap();
            let expected = &Expr::symbol(Symbol::Var(1)) * &Expr::symbol_pow(Symbol::Param(0), -1);
            assert_eq!(sys.rhs_of("r").unwrap(), &expected);
        }
    }

    #[test]
    fn third_order_examples() {
        let sys = generate(&ClassicalModel::hydrogen(), 3, BracketRule::Exact).unwrap();
        let expected = (&Expr::moment(MomentIndex::new(&[2, 1, 0, 0]))
            * &Expr::symbol_pow(Symbol::Param(0), -1))
            .scale(int(-3));
        assert_eq!(sys.rhs_of("G_3_0_0_0").unwrap(), &expected);
        assert!(sys.rhs_of("G_0_0_0_3").unwrap().is_zero());
    }

    #[test]
    fn reference_examples() {
        let r2 = reference_system(2).unwrap();
        let g0101 = Expr::moment(MomentIndex::new(&[0, 1, 0, 1]));
        assert_eq!(
            r2.rhs_of("G_1_0_0_1").unwrap(),
            &-(&g0101 * &Expr::symbol_pow(Symbol::Param(0), -1))
        );
        let r3 = reference_system(3).unwrap();
        assert!(r3.rhs_of("G_0_0_0_3").unwrap().is_zero());
        assert_eq!(r3.imaginary_count(), 3);
    }

    #[test]
    fn closed_form_cut_keeps_printed_products() {
        let model = ClassicalModel::hydrogen();
        let a = generate_with_cut(&model, 2, BracketRule::Exact, HamiltonianCut::ClosedFormSums).unwrap();
        let b = generate(&model, 2, BracketRule::Exact).unwrap();
        for (x, y) in a.equations.iter().zip(&b.equations) {
            assert_eq!(x.rhs, y.rhs);
        }
        let c = generate_with_cut(&model, 3, BracketRule::Exact, HamiltonianCut::ClosedFormSums).unwrap();
        let d = generate(&model, 3, BracketRule::Exact).unwrap();
        let diff = c.rhs_of("G_2_1_0_0").unwrap() - d.rhs_of("G_2_1_0_0").unwrap();
        assert!(diff.moments().contains(&MomentIndex::new(&[1, 0, 0, 2])));
        assert!(matches!(
            generate_with_cut(&ClassicalModel::harmonic_oscillator(), 2, BracketRule::Exact, HamiltonianCut::ClosedFormSums),
            Err(Error::UnsupportedHamiltonian(_))
        ));
    }

    #[test]
    fn reflexive_comparison() {
        let sys = generate(&ClassicalModel::hydrogen(), 2, BracketRule::Exact).unwrap();
        let c = compare_systems(&sys, &sys, 7, 10).unwrap();
        assert!(c.symbolic_diff_empty());
        assert_eq!(c.max_relative_deviation, 0.0);
    }

    #[test]
    fn mismatched_variables_are_rejected() {
        let a = generate(&ClassicalModel::hydrogen(), 2, BracketRule::Exact).unwrap();
        let b = generate(&ClassicalModel::hydrogen(), 3, BracketRule::Exact).unwrap();
        assert!(matches!(compare_systems(&a, &b, 1, 1), Err(Error::VariableMismatch(_))));
    }

    #[test]
    fn equation_file_round_trip() {
        for n in 2..=3 {
            let sys = generate(&ClassicalModel::hydrogen(), n, BracketRule::Exact).unwrap();
            let text = sys.to_equation_file();
            let back = EffectiveSystem::from_equation_file(&text).unwrap();
            assert_eq!(back.variables(), sys.variables());
            assert_eq!(back.hamiltonian, sys.hamiltonian);
            for (x, y) in back.equations.iter().zip(&sys.equations) {
                assert_eq!(x.rhs, y.rhs);
            }
        }
    }
}
