//! Sparse multivariate polynomials in the mode variables `x1..xn`.
//!
//! The coefficient ring is generic: [`Poly`] carries symbolic [`ScalarExpr`]
//! coefficients, [`NumPoly`] carries `f64` and is used once outcomes are fixed.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, ToPrimitive};

use super::scalar::{Rational, ScalarExpr};
use crate::error::{Error, Result};

/// Coefficient ring operations needed by [`Polynomial`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_rational(r: &Rational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Coeff for ScalarExpr {
    fn zero() -> Self {
        ScalarExpr::zero()
    }
    fn one() -> Self {
        ScalarExpr::one()
    }
    fn is_zero(&self) -> bool {
        ScalarExpr::is_zero(self)
    }
    fn from_rational(r: &Rational) -> Self {
        ScalarExpr::constant(r.clone())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Exponent vector ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Monomial(v)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// Number of variables with a positive exponent.
    pub fn support(&self) -> usize {
        self.0.iter().filter(|&&e| e > 0).count()
    }

    pub fn is_square_free(&self) -> bool {
        self.0.iter().all(|&e| e <= 1)
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree()
            .cmp(&o.degree())
            .then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

pub type Poly = Polynomial<ScalarExpr>;
pub type NumPoly = Polynomial<f64>;

/// Dense matrix of coefficients, row-major.
pub type CoeffMatrix<C> = Vec<Vec<C>>;

fn factorial(n: u32) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * Rational::from_integer(k.into()))
}

impl<C: Coeff> Polynomial<C> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, i), C::one());
        p
    }

    pub fn monomial(exps: Vec<u32>, c: C) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(Monomial(exps), c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        self.terms.get(&Monomial(exps.to_vec())).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.degree();
        self.terms.keys().all(|m| m.degree() == d)
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
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

    fn check_same(&self, o: &Self) -> Result<()> {
        if self.nvars != o.nvars {
            return Err(Error::Dimension(format!(
                "polynomials on {} and {} modes",
                self.nvars, o.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let mut out = Self::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1.mul(c2));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.mul(c));
        }
        out
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(&C::from_rational(r))
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, C::one());
        for _ in 0..k {
            out = out.mul(self).expect("same arity");
        }
        out
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] -= 1;
            out.add_term(m2, c.mul(&C::from_rational(&Rational::from_integer(e.into()))));
        }
        out
    }

    pub fn grad(&self) -> Vec<Self> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    pub fn homogeneous_part(&self, k: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Part of degree strictly above `k`.
    pub fn above_degree(&self, k: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() > k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// `self(M y + b)` where `M` is `nvars × target` and `b` has length `nvars`.
    pub fn substitute_affine(&self, m: &CoeffMatrix<C>, b: &[C]) -> Result<Self> {
        if m.len() != self.nvars || b.len() != self.nvars {
            return Err(Error::Dimension(format!(
                "affine map with {} rows and offset {} for {} variables",
                m.len(),
                b.len(),
                self.nvars
            )));
        }
        let target = m.first().map_or(0, Vec::len);
        if m.iter().any(|r| r.len() != target) {
            return Err(Error::Dimension("ragged substitution matrix".into()));
        }
        // Powers of each affine form, computed lazily up to the needed degree.
        let mut forms: Vec<Vec<Self>> = Vec::with_capacity(self.nvars);
        for (row, bi) in m.iter().zip(b) {
            let mut lin = Self::constant(target, bi.clone());
            for (j, c) in row.iter().enumerate() {
                lin.add_term(Monomial::var(target, j), c.clone());
            }
            forms.push(vec![Self::constant(target, C::one()), lin]);
        }
        let mut out = Self::zero(target);
        for (mono, c) in &self.terms {
            let mut t = Self::constant(target, c.clone());
            for (i, &e) in mono.0.iter().enumerate() {
                while forms[i].len() <= e as usize {
                    let next = forms[i].last().unwrap().mul(&forms[i][1])?;
                    forms[i].push(next);
                }
                if e > 0 {
                    t = t.mul(&forms[i][e as usize])?;
                }
            }
            for (m2, c2) in t.terms {
                out.add_term(m2, c2);
            }
        }
        Ok(out)
    }

    /// `f(x_1..x_a) + g(x_{a+1}..x_{a+b})` on disjoint variable blocks.
    pub fn direct_sum(&self, g: &Self) -> Self {
        let n = self.nvars + g.nvars;
        let mut out = self.embed(n, 0);
        for (m, c) in g.embed(n, self.nvars).terms {
            out.add_term(m, c);
        }
        out
    }

    /// Re-index into `n` variables, placing variable `i` at `offset + i`.
    pub fn embed(&self, n: usize, offset: usize) -> Self {
        assert!(offset + self.nvars <= n, "embedding out of range");
        let mut out = Self::zero(n);
        for (m, c) in &self.terms {
            let mut e = vec![0; n];
            e[offset..offset + self.nvars].copy_from_slice(&m.0);
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Polynomial of the tensor `A v^{⊗j}` for homogeneous `self` of order `k`,
    /// computed as `((k-j)!/k!) (v·∇)^j self`.
    pub fn contract(&self, v: &[C], j: usize) -> Result<Self> {
        let k = self.degree() as usize;
        if !self.is_homogeneous() && !self.is_zero() {
            return Err(Error::Dimension("contraction needs a homogeneous polynomial".into()));
        }
        if j > k && !self.is_zero() {
            return Err(Error::Contraction { j, k });
        }
        if v.len() != self.nvars {
            return Err(Error::Dimension("contraction vector length".into()));
        }
        let mut cur = self.clone();
        for _ in 0..j {
            let mut next = Self::zero(self.nvars);
            for (i, vi) in v.iter().enumerate() {
                if vi.is_zero() {
                    continue;
                }
                for (m, c) in cur.partial(i).terms {
                    next.add_term(m, c.mul(vi));
                }
            }
            cur = next;
        }
        let w = factorial((k - j) as u32) / factorial(k as u32);
        Ok(cur.scale_rational(&w))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        let mut out = Polynomial::<D>::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn try_map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> Result<D>) -> Result<Polynomial<D>> {
        let mut out = Polynomial::<D>::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Evaluate at a point of the coefficient ring.
    pub fn eval(&self, x: &[C]) -> Result<C> {
        if x.len() != self.nvars {
            return Err(Error::Dimension("evaluation point length".into()));
        }
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                for _ in 0..e {
                    t = t.mul(xi);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }
}

impl NumPoly {
    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Drop coefficients with magnitude at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .zip(x)
                    .fold(*c, |acc, (&e, xi)| acc * xi.powi(e as i32))
            })
            .sum()
    }

    /// Gradient evaluated at `x`.
    pub fn grad_at(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nvars).map(|i| self.partial(i).eval_f64(x)).collect()
    }
}

impl Poly {
    /// True when no coefficient mentions an outcome variable.
    pub fn is_s_free(&self) -> bool {
        self.terms.values().all(ScalarExpr::is_s_free)
    }

    pub fn max_outcome(&self) -> Option<usize> {
        self.terms.values().filter_map(ScalarExpr::max_var).max()
    }

    pub fn has_fractional_powers(&self) -> bool {
        self.terms.values().any(ScalarExpr::has_fractional_powers)
    }

    /// Numeric specialization at the outcome point `s`.
    pub fn at_outcomes(&self, s: &[f64]) -> Result<NumPoly> {
        self.try_map_coeffs(|c| c.eval(s))
    }

    /// Rational specialization when every coefficient is a rational constant.
    pub fn rational_coeffs(&self) -> Option<BTreeMap<Monomial, Rational>> {
        self.terms
            .iter()
            .map(|(m, c)| c.as_rational().map(|r| (m.clone(), r)))
            .collect()
    }

    pub fn to_prefix_terms(&self) -> Vec<(Vec<u32>, String)> {
        self.terms.iter().rev().map(|(m, c)| (m.0.clone(), c.to_prefix())).collect()
    }

    pub fn from_prefix_terms(nvars: usize, terms: &[(Vec<u32>, String)]) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::Schema("exponent vector length".into()));
            }
            p.add_term(Monomial(e.clone()), ScalarExpr::from_prefix(c)?);
        }
        Ok(p)
    }

    /// Identity test: exact without radicals, sampled coefficientwise otherwise.
    pub fn sampled_eq(&self, o: &Self, samples: usize, seed: u64) -> bool {
        if self.nvars != o.nvars {
            return false;
        }
        let diff = self.sub(o).expect("same arity");
        diff.terms.values().all(|c| c.sampled_eq(&ScalarExpr::zero(), samples, seed))
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        if e == 1 {
            write!(f, "x{}", i + 1)?;
        } else {
            write!(f, "x{}^{}", i + 1, e)?;
        }
    }
    Ok(())
}

impl<C: Coeff> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mut cs = c.to_string();
            let simple = !cs.contains([' ', '+']) || cs.starts_with('(');
            if k > 0 {
                match cs.strip_prefix('-') {
                    Some(rest) if simple && !rest.contains([' ', '-']) => {
                        write!(f, " - ")?;
                        cs = rest.to_string();
                    }
                    _ => write!(f, " + ")?,
                }
            }
            let is_const = m.degree() == 0;
            match (cs.as_str(), is_const) {
                (_, true) => write!(f, "{cs}")?,
                ("1", false) => write_monomial(f, m)?,
                ("-1", false) => {
                    write!(f, "-")?;
                    write_monomial(f, m)?
                }
                _ if simple => {
                    write!(f, "{cs}*")?;
                    write_monomial(f, m)?
                }
                _ => {
                    write!(f, "({cs})*")?;
                    write_monomial(f, m)?
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::scalar::{int, Exp};

    fn x(n: usize, i: usize) -> Poly {
        Poly::var(n, i)
    }

    fn c(v: i64) -> ScalarExpr {
        ScalarExpr::from_int(v)
    }

    #[test]
    fn arith_examples() {
        let a = x(2, 0).mul(&x(2, 1).powi(2)).unwrap();
        let b = x(2, 0).powi(4);
        let s = a.add(&b).unwrap();
        assert_eq!(s.num_terms(), 2);
        assert!(a.mul(&Poly::zero(2)).unwrap().is_zero());
        let d = x(2, 0).add(&x(2, 1)).unwrap().mul(&x(2, 0).sub(&x(2, 1)).unwrap()).unwrap();
        assert_eq!(d, x(2, 0).powi(2).sub(&x(2, 1).powi(2)).unwrap());
        assert!(a.add(&Poly::zero(3)).is_err());
    }

    #[test]
    fn grad_examples() {
        let f = x(2, 0).mul(&x(2, 1).powi(2)).unwrap();
        let g = f.grad();
        assert_eq!(g[0], x(2, 1).powi(2));
        assert_eq!(g[1], x(2, 0).mul(&x(2, 1)).unwrap().scale(&c(2)));
        assert!(Poly::constant(3, c(5)).grad().iter().all(Poly::is_zero));
        let t = x(3, 0).mul(&x(3, 1)).unwrap().mul(&x(3, 2)).unwrap();
        assert_eq!(t.grad()[1], x(3, 0).mul(&x(3, 2)).unwrap());
    }

    #[test]
    fn substitution_examples() {
        let f = x(1, 0).powi(3);
        let g = f.substitute_affine(&vec![vec![c(2)]], &[c(0)]).unwrap();
        assert_eq!(g, x(1, 0).powi(3).scale(&c(8)));
        let p = x(2, 0).mul(&x(2, 1)).unwrap();
        let swap = vec![vec![c(0), c(1)], vec![c(1), c(0)]];
        assert_eq!(p.substitute_affine(&swap, &[c(0), c(0)]).unwrap(), p);
        let s1 = ScalarExpr::var(0);
        let h = x(1, 0).powi(5).substitute_affine(&vec![vec![c(1)]], &[-&s1]).unwrap();
        assert_eq!(h.coeff(&[4]), s1.scale(&int(-5)));
    }

    #[test]
    fn direct_sum_and_contract() {
        let cube = x(1, 0).powi(3);
        let ds = cube.direct_sum(&cube).direct_sum(&cube);
        assert_eq!(ds.nvars(), 3);
        assert_eq!(ds.num_terms(), 3);
        let v = x(4, 0).mul(&x(4, 1)).unwrap().mul(&x(4, 2)).unwrap().mul(&x(4, 3)).unwrap();
        let ones = vec![c(1); 4];
        let cv = v.contract(&ones, 1).unwrap();
        assert_eq!(cv.num_terms(), 4);
        assert_eq!(cv.coeff(&[0, 1, 1, 1]), ScalarExpr::constant(crate::polyring::scalar::rat(1, 4)));
        assert_eq!(x(1, 0).powi(2).contract(&[c(1)], 2).unwrap(), Poly::constant(1, c(1)));
        assert_eq!(v.contract(&ones, 0).unwrap(), v);
        assert!(x(1, 0).powi(2).contract(&[c(1)], 3).is_err());
    }

    #[test]
    fn homogeneous_and_eval() {
        let f = x(2, 0).mul(&x(2, 1).powi(2)).unwrap().add(&x(2, 0).powi(4)).unwrap();
        assert_eq!(f.homogeneous_part(3), x(2, 0).mul(&x(2, 1).powi(2)).unwrap());
        assert!(f.homogeneous_part(9).is_zero());
        let g = x(1, 0).powi(3).scale(&ScalarExpr::var(0).scale(&int(4)));
        let v = g.at_outcomes(&[2.0]).unwrap().eval_f64(&[1.0]);
        assert_eq!(v, 8.0);
        let e = g.eval(&[c(1)]).unwrap();
        assert_eq!(e.eval_rational(&[int(2)]), Some(int(8)));
        let q = g.scale(&ScalarExpr::var(0).pow(Exp::new(1, 2)).unwrap());
        assert!(q.at_outcomes(&[-1.0]).is_err());
    }

    #[test]
    fn grlex_order_is_graded() {
        let a = Monomial(vec![3, 0]);
        let b = Monomial(vec![1, 1]);
        let c3 = Monomial(vec![0, 3]);
        assert!(b < a);
        assert!(c3 < a);
    }
}
