//! Infix text syntax: `3/2*x1^2*x2 - x3^4`, outcome symbols `s1..`,
//! momentum symbols `p1..` (accepted only by the operator parser).

use num_bigint::BigInt;

use super::poly::Poly;
use super::scalar::{Rational, ScalarExpr};
use crate::error::{Error, Result};

/// Parsed infix expression tree shared by the polynomial and operator parsers.
#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(Rational),
    /// Imaginary unit `i`.
    I,
    X(usize),
    P(usize),
    S(usize),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Pow(Box<Ast>, u32),
}

impl Ast {
    /// Largest zero-based x or p index, if any.
    pub fn max_mode(&self) -> Option<usize> {
        match self {
            Ast::X(i) | Ast::P(i) => Some(*i),
            Ast::Num(_) | Ast::I | Ast::S(_) => None,
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) => a.max_mode().max(b.max_mode()),
            Ast::Neg(a) | Ast::Pow(a, _) => a.max_mode(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = if self.peek() == Some(b'-') {
            self.pos += 1;
            Ast::Neg(Box::new(self.term()?))
        } else {
            if self.peek() == Some(b'+') {
                self.pos += 1;
            }
            self.term()?
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = Ast::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.peek();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("expected a nonnegative integer exponent"))?;
            return Ok(Ast::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<Rational> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let n: BigInt = std::str::from_utf8(&self.src[start..self.pos]).unwrap().parse().unwrap();
        // A fraction `a/b` binds tighter than `*`.
        if self.src.get(self.pos) == Some(&b'/') {
            self.pos += 1;
            let s2 = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let d: BigInt = std::str::from_utf8(&self.src[s2..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("expected a denominator"))?;
            if d == BigInt::from(0) {
                return Err(self.err("zero denominator"));
            }
            return Ok(Rational::new(n, d));
        }
        Ok(Rational::from_integer(n))
    }

    fn atom(&mut self) -> Result<Ast> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Ast::Num(self.number()?)),
            Some(c @ (b'x' | b'p' | b's')) => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let idx: usize = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| self.err("expected a variable index"))?;
                if idx == 0 {
                    return Err(self.err("variable indices start at 1"));
                }
                Ok(match c {
                    b'x' => Ast::X(idx - 1),
                    b'p' => Ast::P(idx - 1),
                    _ => Ast::S(idx - 1),
                })
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(Ast::I)
            }
            Some(c) => Err(self.err(&format!("unexpected character `{}`", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

pub fn parse_ast(src: &str) -> Result<Ast> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

fn to_poly(ast: &Ast, n: usize) -> Result<Poly> {
    Ok(match ast {
        Ast::Num(r) => Poly::constant(n, ScalarExpr::constant(r.clone())),
        Ast::S(i) => Poly::constant(n, ScalarExpr::var(*i)),
        Ast::X(i) => Poly::var(n, *i),
        Ast::P(_) => {
            return Err(Error::Parse("momentum variables are not allowed in a quadrature gate".into()))
        }
        Ast::I => return Err(Error::Parse("imaginary unit is not allowed here".into())),
        Ast::Add(a, b) => to_poly(a, n)?.add(&to_poly(b, n)?)?,
        Ast::Sub(a, b) => to_poly(a, n)?.sub(&to_poly(b, n)?)?,
        Ast::Mul(a, b) => to_poly(a, n)?.mul(&to_poly(b, n)?)?,
        Ast::Neg(a) => to_poly(a, n)?.neg(),
        Ast::Pow(a, e) => to_poly(a, n)?.powi(*e),
    })
}

/// Parse an x-polynomial. The mode count is `nmodes` if given, else the
/// largest x index present.
pub fn parse_poly(src: &str, nmodes: Option<usize>) -> Result<Poly> {
    let ast = parse_ast(src)?;
    let needed = ast.max_mode().map_or(0, |m| m + 1);
    let n = match nmodes {
        Some(n) if n < needed => {
            return Err(Error::Parse(format!("polynomial uses x{needed} but only {n} modes declared")))
        }
        Some(n) => n,
        None => needed,
    };
    to_poly(&ast, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::scalar::rat;

    #[test]
    fn parses_rational_terms() {
        let p = parse_poly("3/2*x1^2*x2 - x3^4", None).unwrap();
        assert_eq!(p.nvars(), 3);
        assert_eq!(p.coeff(&[2, 1, 0]), ScalarExpr::constant(rat(3, 2)));
        assert_eq!(p.coeff(&[0, 0, 4]), ScalarExpr::from_int(-1));
    }

    #[test]
    fn parses_outcome_coefficients() {
        let p = parse_poly("2*s1*x1*x2^2 + (x1 - x2)^2", None).unwrap();
        assert_eq!(p.coeff(&[1, 2]), ScalarExpr::var(0).scale(&rat(2, 1)));
        assert_eq!(p.coeff(&[1, 1]), ScalarExpr::from_int(-2));
    }

    #[test]
    fn rejects_momentum() {
        assert!(parse_poly("x1*p1", None).is_err());
        assert!(parse_poly("x1 +", None).is_err());
        assert!(parse_poly("x0", None).is_err());
    }

    #[test]
    fn zero_polynomial_has_no_modes() {
        let p = parse_poly("0", None).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.nvars(), 0);
    }
}
