//! Small recursive-descent reader for the expression text form.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' ['-'] integer)?
//! atom    := number | ident | 'G' '[' int (',' int)* ']' | '(' sum ')'
//! ```
//!
//! Division is only allowed by a single classical monomial. Identifiers are
//! resolved by the caller; the resolver may map a name to the imaginary unit,
//! in which case the result carries a separate imaginary part.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::expr::{int, Expr, Rational};
use crate::moment::MomentIndex;

/// Real and imaginary parts of a parsed expression.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexExpr {
    pub re: Expr,
    pub im: Expr,
}

impl ComplexExpr {
    pub fn real(re: Expr) -> Self {
        ComplexExpr { re, im: Expr::zero() }
    }

    fn add(&self, o: &ComplexExpr) -> ComplexExpr {
        ComplexExpr {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    fn sub(&self, o: &ComplexExpr) -> ComplexExpr {
        ComplexExpr {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    fn mul(&self, o: &ComplexExpr) -> ComplexExpr {
        ComplexExpr {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    fn neg(&self) -> ComplexExpr {
        ComplexExpr {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

pub enum Ident {
    Value(Expr),
    ImaginaryUnit,
}

pub fn parse_complex(
    src: &str,
    dofs: usize,
    resolve: &dyn Fn(&str) -> Option<Ident>,
) -> Result<ComplexExpr> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        dofs,
        resolve,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses an expression that must be real.
pub fn parse_real(src: &str, dofs: usize, resolve: &dyn Fn(&str) -> Option<Ident>) -> Result<Expr> {
    let c = parse_complex(src, dofs, resolve)?;
    if !c.im.is_zero() {
        return Err(Error::Parse {
            pos: 0,
            msg: "expression has an imaginary part".into(),
        });
    }
    Ok(c.re)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dofs: usize,
    resolve: &'a dyn Fn(&str) -> Option<Ident>,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn sum(&mut self) -> Result<ComplexExpr> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.product()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<ComplexExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    if !d.im.is_zero() {
                        return Err(Error::Parse {
                            pos: at,
                            msg: "division by an imaginary quantity".into(),
                        });
                    }
                    let inv = d.re.inverse_monomial().map_err(|e| Error::Parse {
                        pos: at,
                        msg: e.to_string(),
                    })?;
                    acc = acc.mul(&ComplexExpr::real(inv));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<ComplexExpr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<ComplexExpr> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let e = self.integer()? as u32;
        if negative {
            if !base.im.is_zero() {
                return Err(self.err("negative power of an imaginary quantity"));
            }
            let inv = base.re.inverse_monomial().map_err(|e| self.err(&e.to_string()))?;
            return Ok(ComplexExpr::real(inv.pow(e)));
        }
        let mut out = ComplexExpr::real(Expr::one());
        for _ in 0..e {
            out = out.mul(&base);
        }
        Ok(out)
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("integer out of range"))
    }

    fn atom(&mut self) -> Result<ComplexExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(ComplexExpr::real(Expr::constant(int(n as i128))))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if name == "G" && self.peek() == Some(b'[') {
                    return self.moment();
                }
                match (self.resolve)(name) {
                    Some(Ident::Value(e)) => Ok(ComplexExpr::real(e)),
                    Some(Ident::ImaginaryUnit) => Ok(ComplexExpr {
                        re: Expr::zero(),
                        im: Expr::one(),
                    }),
                    None => Err(Error::Parse {
                        pos: start,
                        msg: format!("unknown identifier '{name}'"),
                    }),
                }
            }
            _ => Err(self.err("expected a number, identifier, moment or '('")),
        }
    }

    fn moment(&mut self) -> Result<ComplexExpr> {
        self.expect(b'[')?;
        let mut flat = vec![self.integer()? as u32];
        while self.peek() == Some(b',') {
            self.pos += 1;
            flat.push(self.integer()? as u32);
        }
        self.expect(b']')?;
        if flat.len() != 2 * self.dofs {
            return Err(self.err(&format!(
                "moment has {} indices, expected {}",
                flat.len(),
                2 * self.dofs
            )));
        }
        Ok(ComplexExpr::real(Expr::moment(MomentIndex::new(&flat))))
    }
}

/// Exact rational from text such as `-3/2` or `7`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().ok()?;
            let d: i128 = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<i128>().ok().map(Rational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{rat, Symbol};

    fn resolver(name: &str) -> Option<Ident> {
        match name {
            "x" => Some(Ident::Value(Expr::symbol(Symbol::Var(0)))),
            "p" => Some(Ident::Value(Expr::symbol(Symbol::Var(1)))),
            "hbar" => Some(Ident::Value(Expr::hbar_pow(1))),
            "i" => Some(Ident::ImaginaryUnit),
            _ => None,
        }
    }

    #[test]
    fn arithmetic_and_division() {
        let e = parse_real("3*x^2/(2*x) - 1/x^-1", 1, &resolver).unwrap();
        assert_eq!(e, Expr::symbol(Symbol::Var(0)).scale(rat(1, 2)));
    }

    #[test]
    fn moments_and_constants() {
        let e = parse_real("G[2,0] + G[1,0] + 2*G[0,0]", 1, &resolver).unwrap();
        assert_eq!(
            e,
            Expr::moment(MomentIndex::new(&[2, 0])) + Expr::constant(int(2))
        );
    }

    #[test]
    fn imaginary_part_is_separated() {
        let c = parse_complex("x + i*hbar/2*G[1,1]", 1, &resolver).unwrap();
        assert_eq!(c.re, Expr::symbol(Symbol::Var(0)));
        assert_eq!(
            c.im,
            (Expr::hbar_pow(1) * Expr::moment(MomentIndex::new(&[1, 1]))).scale(rat(1, 2))
        );
        let sq = parse_complex("(i*hbar)^2", 1, &resolver).unwrap();
        assert_eq!(sq.re, -Expr::hbar_pow(2));
    }

    #[test]
    fn rejects_division_by_sum() {
        assert!(parse_real("1/(x + p)", 1, &resolver).is_err());
        assert!(parse_real("y", 1, &resolver).is_err());
        assert!(parse_real("G[1,1,0]", 1, &resolver).is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-3/2"), Some(rat(-3, 2)));
        assert_eq!(parse_rational("4"), Some(int(4)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
