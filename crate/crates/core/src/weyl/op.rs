use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::polyring::{Ast, Rational};

/// Exact Gaussian rational `re + i·im`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CRat {
    pub re: Rational,
    pub im: Rational,
}

impl CRat {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self { re, im: Rational::zero() }
    }

    pub fn imag(im: Rational) -> Self {
        Self { re: Rational::zero(), im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::real(Rational::one())
    }

    pub fn i() -> Self {
        Self::imag(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -&self.im }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self { re: &self.re * r, im: &self.im * r }
    }

    pub fn neg(&self) -> Self {
        Self { re: -&self.re, im: -&self.im }
    }

    /// `(-i)^k`.
    fn minus_i_pow(k: u32) -> Self {
        let one = Rational::one();
        match k % 4 {
            0 => Self::real(one),
            1 => Self::imag(-one),
            2 => Self::real(-one),
            _ => Self::imag(one),
        }
    }
}

fn rat_text(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Imaginary coefficient in compact form: `i`, `-i/2`, `2i/9`.
fn imag_text(r: &Rational) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let a = r.abs();
    let num = if a.numer().is_one() { "i".to_string() } else { format!("{}i", a.numer()) };
    if a.denom().is_one() {
        format!("{sign}{num}")
    } else {
        format!("{sign}{num}/{}", a.denom())
    }
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", rat_text(&self.re)),
            (true, false) => write!(f, "{}", imag_text(&self.im)),
            (false, false) => {
                let im = imag_text(&self.im);
                if im.starts_with('-') {
                    write!(f, "({} - {})", rat_text(&self.re), &im[1..])
                } else {
                    write!(f, "({} + {})", rat_text(&self.re), im)
                }
            }
        }
    }
}

pub type Exps = Vec<u32>;

/// Normal-ordered operator `Σ c_{MN} x^M p^N` (all x left of all p).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylOp {
    nmodes: usize,
    terms: BTreeMap<(Exps, Exps), CRat>,
}

fn binom(n: u32, k: u32) -> Rational {
    let mut r = Rational::one();
    for j in 0..k {
        r = r * Rational::from_integer((n - j).into()) / Rational::from_integer((j + 1).into());
    }
    r
}

fn factorial(n: u32) -> Rational {
    (1..=n).fold(Rational::one(), |a, k| a * Rational::from_integer(k.into()))
}

impl WeylOp {
    pub fn zero(nmodes: usize) -> Self {
        Self { nmodes, terms: BTreeMap::new() }
    }

    pub fn scalar(nmodes: usize, c: CRat) -> Self {
        let mut op = Self::zero(nmodes);
        op.add_term(vec![0; nmodes], vec![0; nmodes], c);
        op
    }

    pub fn identity(nmodes: usize) -> Self {
        Self::scalar(nmodes, CRat::one())
    }

    /// `x^M p^N` with unit coefficient.
    pub fn monomial(m: Exps, n: Exps) -> Self {
        assert_eq!(m.len(), n.len(), "exponent vector lengths");
        let mut op = Self::zero(m.len());
        op.add_term(m, n, CRat::one());
        op
    }

    pub fn x_mono(m: Exps) -> Self {
        let n = vec![0; m.len()];
        Self::monomial(m, n)
    }

    pub fn p_mono(n: Exps) -> Self {
        let m = vec![0; n.len()];
        Self::monomial(m, n)
    }

    pub fn x(nmodes: usize, i: usize) -> Self {
        let mut m = vec![0; nmodes];
        m[i] = 1;
        Self::x_mono(m)
    }

    pub fn p(nmodes: usize, i: usize) -> Self {
        let mut n = vec![0; nmodes];
        n[i] = 1;
        Self::p_mono(n)
    }

    pub fn nmodes(&self) -> usize {
        self.nmodes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Exps, Exps), &CRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &[u32], n: &[u32]) -> CRat {
        self.terms.get(&(m.to_vec(), n.to_vec())).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The scalar value if this operator is a multiple of the identity.
    pub fn as_scalar(&self) -> Option<CRat> {
        match self.terms.len() {
            0 => Some(CRat::zero()),
            1 => {
                let ((m, n), c) = self.terms.iter().next().unwrap();
                (m.iter().chain(n).all(|&e| e == 0)).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Exps, n: Exps, c: CRat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((m, n)) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.nmodes, o.nmodes, "mode count mismatch");
        let mut out = self.clone();
        for ((m, n), c) in &o.terms {
            out.add_term(m.clone(), n.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&CRat::real(-Rational::one())))
    }

    pub fn scale(&self, c: &CRat) -> Self {
        let mut out = Self::zero(self.nmodes);
        for ((m, n), v) in &self.terms {
            out.add_term(m.clone(), n.clone(), v.mul(c));
        }
        out
    }

    /// Exact normal-ordered product using
    /// `p^n x^m = Σ_k (-i)^k k! C(n,k) C(m,k) x^{m-k} p^{n-k}` per mode.
    pub fn product(&self, o: &Self) -> Self {
        assert_eq!(self.nmodes, o.nmodes, "mode count mismatch");
        let nm = self.nmodes;
        let mut out = Self::zero(nm);
        for ((m1, n1), c1) in &self.terms {
            for ((m2, n2), c2) in &o.terms {
                let mut partial: Vec<(Exps, Exps, CRat)> =
                    vec![(Vec::with_capacity(nm), Vec::with_capacity(nm), c1.mul(c2))];
                for j in 0..nm {
                    let (a, b) = (n1[j], m2[j]);
                    let mut next = Vec::new();
                    for (mx, nx, c) in &partial {
                        for k in 0..=a.min(b) {
                            let w = CRat::minus_i_pow(k)
                                .scale(&(factorial(k) * binom(a, k) * binom(b, k)));
                            let mut mx2 = mx.clone();
                            mx2.push(m1[j] + b - k);
                            let mut nx2 = nx.clone();
                            nx2.push(a - k + n2[j]);
                            next.push((mx2, nx2, c.mul(&w)));
                        }
                    }
                    partial = next;
                }
                for (m, n, c) in partial {
                    out.add_term(m, n, c);
                }
            }
        }
        out
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.product(o).sub(&o.product(self))
    }

    pub fn anticommutator(&self, o: &Self) -> Self {
        self.product(o).add(&o.product(self))
    }

    /// Hermitian adjoint, re-normal-ordered.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.nmodes);
        for ((m, n), c) in &self.terms {
            let t = Self::p_mono(n.clone())
                .product(&Self::x_mono(m.clone()))
                .scale(&c.conj());
            out = out.add(&t);
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    /// `(op + op†)/2`.
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).scale(&CRat::real(Rational::new(1.into(), 2.into())))
    }

    /// `(op - op†)/2`.
    pub fn antihermitian_part(&self) -> Self {
        self.sub(&self.adjoint()).scale(&CRat::real(Rational::new(1.into(), 2.into())))
    }

    /// Build from a parsed infix expression; products keep their written order.
    pub fn from_ast(ast: &Ast, nmodes: usize) -> Result<Self> {
        Ok(match ast {
            Ast::Num(r) => Self::scalar(nmodes, CRat::real(r.clone())),
            Ast::I => Self::scalar(nmodes, CRat::i()),
            Ast::X(i) if *i < nmodes => Self::x(nmodes, *i),
            Ast::P(i) if *i < nmodes => Self::p(nmodes, *i),
            Ast::X(_) | Ast::P(_) => return Err(Error::Parse("mode index out of range".into())),
            Ast::S(_) => return Err(Error::Parse("outcome symbols are not allowed in a Hamiltonian".into())),
            Ast::Add(a, b) => Self::from_ast(a, nmodes)?.add(&Self::from_ast(b, nmodes)?),
            Ast::Sub(a, b) => Self::from_ast(a, nmodes)?.sub(&Self::from_ast(b, nmodes)?),
            Ast::Mul(a, b) => Self::from_ast(a, nmodes)?.product(&Self::from_ast(b, nmodes)?),
            Ast::Neg(a) => Self::from_ast(a, nmodes)?.scale(&CRat::real(-Rational::one())),
            Ast::Pow(a, e) => {
                let base = Self::from_ast(a, nmodes)?;
                (0..*e).fold(Self::identity(nmodes), |acc, _| acc.product(&base))
            }
        })
    }

    /// Parse mixed x/p text such as `x1*p1 + p1*x1`.
    pub fn parse(src: &str) -> Result<Self> {
        let ast = crate::polyring::parse_ast(src)?;
        let n = ast.max_mode().map_or(1, |m| m + 1);
        Self::from_ast(&ast, n)
    }
}

pub(crate) fn mono_text(prefix: char, e: &[u32]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| if k == 1 { format!("{prefix}{}", i + 1) } else { format!("{prefix}{}^{k}", i + 1) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

impl fmt::Display for WeylOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|((m, n), c)| {
                let xs = mono_text('x', m);
                let ps = mono_text('p', n);
                let body = match (xs.as_str(), ps.as_str()) {
                    ("1", "1") => String::new(),
                    ("1", _) => ps,
                    (_, "1") => xs,
                    _ => format!("{xs}*{ps}"),
                };
                if body.is_empty() {
                    c.to_string()
                } else {
                    format!("{c}*{body}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::int;

    #[test]
    fn canonical_commutation() {
        let x = WeylOp::x(1, 0);
        let p = WeylOp::p(1, 0);
        assert_eq!(x.commutator(&p), WeylOp::scalar(1, CRat::i()));
        let px = p.product(&x);
        let expect = WeylOp::monomial(vec![1], vec![1]).sub(&WeylOp::scalar(1, CRat::i()));
        assert_eq!(px, expect);
    }

    #[test]
    fn commutator_of_squares() {
        let c = WeylOp::x_mono(vec![2]).commutator(&WeylOp::p_mono(vec![2]));
        let mut expect = WeylOp::zero(1);
        expect.add_term(vec![1], vec![1], CRat::imag(int(4)));
        expect.add_term(vec![0], vec![0], CRat::real(int(2)));
        assert_eq!(c, expect);
    }

    #[test]
    fn adjoint_and_parts() {
        let op = WeylOp::parse("x1*p1").unwrap();
        assert!(!op.is_hermitian());
        assert_eq!(op.hermitian_part().add(&op.antihermitian_part()), op);
        assert!(WeylOp::parse("x1*p1 + p1*x1").unwrap().is_hermitian());
    }

    #[test]
    fn parse_keeps_written_order() {
        let a = WeylOp::parse("i*(x1*p1 - p1*x1)").unwrap();
        assert_eq!(a, WeylOp::scalar(1, CRat::real(int(-1))));
    }
}
