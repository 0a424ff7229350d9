//! Symbolic scalars over the outcome variables `s1, s2, ...`.
//!
//! A [`ScalarExpr`] is a finite sum of rational multiples of power products.
//! Each power product raises atoms to rational exponents. An atom is one of
//! - an outcome variable,
//! - a positive integer (prime after factoring) carrying a fractional exponent,
//! - a non-monomial sum raised to a non-integer or negative power.
//!
//! The form is canonical whenever no fractional exponents occur. With radicals
//! present, equality is decided by sampling (see [`ScalarExpr::sampled_eq`]).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type Exp = Rational64;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// Outcome variable, zero-based (`Var(0)` prints as `s1`).
    Var(usize),
    /// Positive integer base, only ever with a fractional exponent in (0, 1).
    Int(BigUint),
    /// Sum with at least two terms, normalized so its first coefficient is ±1.
    Radical(Box<ScalarExpr>),
}

type Powers = BTreeMap<Atom, Exp>;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScalarExpr {
    terms: BTreeMap<Powers, Rational>,
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn small_primes() -> &'static [u32] {
    use std::sync::OnceLock;
    static P: OnceLock<Vec<u32>> = OnceLock::new();
    P.get_or_init(|| {
        let mut v = Vec::new();
        'outer: for c in 2u32..2000 {
            for p in &v {
                if p * p > c {
                    break;
                }
                if c % p == 0 {
                    continue 'outer;
                }
            }
            v.push(c);
        }
        v
    })
}

/// Trial-division factorization; an unfactored cofactor is kept whole.
fn factor(n: &BigUint) -> Vec<(BigUint, i64)> {
    let mut out = Vec::new();
    let mut n = n.clone();
    if n.is_zero() {
        return out;
    }
    for &p in small_primes() {
        let bp = BigUint::from(p);
        if &bp * &bp > n {
            break;
        }
        let mut e = 0;
        while (&n % &bp).is_zero() {
            n /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
    }
    if n > BigUint::one() {
        out.push((n, 1));
    }
    out
}

fn rat_powi(r: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(r.clone(), e as usize)
    } else {
        num_traits::pow(r.recip(), (-e) as usize)
    }
}

fn exp_to_f64(e: &Exp) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}

/// Real power with the odd-root convention for negative bases.
fn real_pow(v: f64, e: &Exp) -> Result<f64> {
    if e.is_integer() {
        let k = e.to_integer();
        if v == 0.0 && k < 0 {
            return Err(Error::Eval("division by zero".into()));
        }
        return Ok(v.powi(k as i32));
    }
    let ef = exp_to_f64(e);
    if v > 0.0 {
        Ok(v.powf(ef))
    } else if v == 0.0 {
        if ef > 0.0 {
            Ok(0.0)
        } else {
            Err(Error::Eval("division by zero".into()))
        }
    } else if e.denom() % 2 != 0 {
        let mag = (-v).powf(ef);
        Ok(if e.numer() % 2 != 0 { -mag } else { mag })
    } else {
        Err(Error::Eval(format!(
            "even root of negative value {v} (exponent {e})"
        )))
    }
}

impl ScalarExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Powers::new(), c);
        }
        Self { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(int(n))
    }

    /// Outcome variable `s_{i+1}`.
    pub fn var(i: usize) -> Self {
        let mut p = Powers::new();
        p.insert(Atom::Var(i), Exp::one());
        let mut terms = BTreeMap::new();
        terms.insert(p, Rational::one());
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map(|r| r.is_one()).unwrap_or(false)
    }

    /// The value if this is a rational constant.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (p, c) = self.terms.iter().next().unwrap();
                p.is_empty().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// True when no outcome variable occurs anywhere, radicals included.
    pub fn is_s_free(&self) -> bool {
        self.max_var().is_none()
    }

    /// Largest zero-based outcome index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for p in self.terms.keys() {
            for a in p.keys() {
                let m = match a {
                    Atom::Var(i) => Some(*i),
                    Atom::Int(_) => None,
                    Atom::Radical(b) => b.max_var(),
                };
                if let Some(m) = m {
                    best = Some(best.map_or(m, |b| b.max(m)));
                }
            }
        }
        best
    }

    /// True if any non-integer exponent appears (at any depth).
    pub fn has_fractional_powers(&self) -> bool {
        self.terms.keys().any(|p| {
            p.iter().any(|(a, e)| {
                !e.is_integer() || matches!(a, Atom::Radical(b) if b.has_fractional_powers())
            })
        })
    }

    /// Visit every (atom, exponent) pair, descending into radical bases.
    pub fn for_each_power(&self, f: &mut dyn FnMut(&Atom, &Exp)) {
        for p in self.terms.keys() {
            for (a, e) in p {
                f(a, e);
                if let Atom::Radical(b) = a {
                    b.for_each_power(f);
                }
            }
        }
    }

    fn from_term(coeff: Rational, powers: Powers) -> Self {
        if coeff.is_zero() {
            return Self::zero();
        }
        let mut coeff = coeff;
        let mut kept = Powers::new();
        let mut expand = Vec::new();
        for (atom, e) in powers {
            if e.is_zero() {
                continue;
            }
            match atom {
                Atom::Int(n) => {
                    let fl = e.floor();
                    let frac = e - fl;
                    coeff *= rat_powi(&Rational::from_integer(BigInt::from(n.clone())), fl.to_integer());
                    if !frac.is_zero() {
                        kept.insert(Atom::Int(n), frac);
                    }
                }
                Atom::Radical(b) if e.is_integer() && e > Exp::zero() => {
                    expand.push((*b, e.to_integer() as u32));
                }
                other => {
                    kept.insert(other, e);
                }
            }
        }
        let mut out = Self::zero();
        out.terms.insert(kept, coeff);
        for (b, k) in expand {
            out = &out * &b.powi(k);
        }
        out
    }

    fn add_term(&mut self, powers: Powers, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(powers) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add_assign_ref(&mut self, other: &ScalarExpr) {
        for (p, c) in &other.terms {
            self.add_term(p.clone(), c.clone());
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(p, c)| (p.clone(), c * r)).collect(),
        }
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = &out * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        out
    }

    /// `|c|^r` for a nonzero rational `c` as a power product with sign factor.
    fn rational_power(c: &Rational, r: &Exp) -> Result<Self> {
        let sign = if c.is_negative() {
            if r.denom() % 2 == 0 {
                return Err(Error::Eval(format!("even root of negative constant {c}")));
            }
            if r.numer() % 2 != 0 {
                -Rational::one()
            } else {
                Rational::one()
            }
        } else {
            Rational::one()
        };
        let abs = c.abs();
        let mut powers = Powers::new();
        for (p, a) in factor(abs.numer().magnitude()) {
            *powers.entry(Atom::Int(p)).or_insert_with(Exp::zero) += Exp::from(a) * r;
        }
        for (p, a) in factor(abs.denom().magnitude()) {
            *powers.entry(Atom::Int(p)).or_insert_with(Exp::zero) -= Exp::from(a) * r;
        }
        Ok(Self::from_term(sign, powers))
    }

    /// Rational power. Symbolic factors are treated as positive, so
    /// `(s1^2)^(1/2)` simplifies to `s1`.
    pub fn pow(&self, r: Exp) -> Result<Self> {
        if r.is_integer() && r >= Exp::zero() {
            return Ok(self.powi(r.to_integer() as u32));
        }
        if self.is_zero() {
            return if r > Exp::zero() {
                Ok(Self::zero())
            } else {
                Err(Error::Eval("division by zero".into()))
            };
        }
        if self.terms.len() == 1 {
            let (p, c) = self.terms.iter().next().unwrap();
            let mut out = Self::rational_power(c, &r)?;
            let scaled: Powers = p.iter().map(|(a, e)| (a.clone(), *e * r)).collect();
            out = &out * &Self::from_term(Rational::one(), scaled);
            return Ok(out);
        }
        let lead = self.terms.values().next().unwrap().abs();
        let base = self.scale(&lead.recip());
        let mut powers = Powers::new();
        powers.insert(Atom::Radical(Box::new(base)), r);
        let rad = Self::from_term(Rational::one(), powers);
        Ok(&Self::rational_power(&lead, &r)? * &rad)
    }

    pub fn recip(&self) -> Result<Self> {
        self.pow(-Exp::one())
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if let Some(r) = other.as_rational() {
            if r.is_zero() {
                return Err(Error::Eval("division by zero".into()));
            }
            return Ok(self.scale(&r.recip()));
        }
        Ok(self * &other.recip()?)
    }

    /// Floating-point value at the outcome point `s` (zero-based).
    pub fn eval(&self, s: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (p, c) in &self.terms {
            let mut v = c.to_f64().unwrap_or(f64::NAN);
            for (a, e) in p {
                let base = match a {
                    Atom::Var(i) => *s.get(*i).ok_or_else(|| {
                        Error::Eval(format!("outcome s{} is not bound", i + 1))
                    })?,
                    Atom::Int(n) => n.to_f64().unwrap_or(f64::INFINITY),
                    Atom::Radical(b) => b.eval(s)?,
                };
                v *= real_pow(base, e)?;
            }
            total += v;
        }
        Ok(total)
    }

    /// Exact value at a rational point; `None` when fractional powers occur.
    pub fn eval_rational(&self, s: &[Rational]) -> Option<Rational> {
        let mut total = Rational::zero();
        for (p, c) in &self.terms {
            let mut v = c.clone();
            for (a, e) in p {
                if !e.is_integer() {
                    return None;
                }
                let base = match a {
                    Atom::Var(i) => s.get(*i)?.clone(),
                    Atom::Int(n) => Rational::from_integer(BigInt::from(n.clone())),
                    Atom::Radical(b) => b.eval_rational(s)?,
                };
                if base.is_zero() && e.to_integer() < 0 {
                    return None;
                }
                v *= rat_powi(&base, e.to_integer());
            }
            total += v;
        }
        Some(total)
    }

    /// Identity test: exact when both sides are free of fractional powers,
    /// otherwise agreement at `samples` random positive points to 1e-12 relative.
    pub fn sampled_eq(&self, other: &Self, samples: usize, seed: u64) -> bool {
        let diff = self - other;
        if diff.is_zero() {
            return true;
        }
        if !diff.has_fractional_powers() {
            return false;
        }
        let nvars = self.max_var().max(other.max_var()).map_or(0, |m| m + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let s: Vec<f64> = (0..nvars)
                .map(|_| rng.gen_range(1..=40) as f64 / rng.gen_range(1..=8) as f64)
                .collect();
            let (a, b) = match (self.eval(&s), other.eval(&s)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return false,
            };
            let scale = a.abs().max(b.abs()).max(1.0);
            if (a - b).abs() > 1e-12 * scale {
                return false;
            }
        }
        true
    }

    /// Portable prefix notation, e.g. `(+ (* 2 s1) (^ 3 1/2))`.
    pub fn to_prefix(&self) -> String {
        let terms: Vec<String> = self.terms.iter().map(|(p, c)| term_prefix(p, c)).collect();
        match terms.len() {
            0 => "0".into(),
            1 => terms.into_iter().next().unwrap(),
            _ => format!("(+ {})", terms.join(" ")),
        }
    }

    pub fn from_prefix(src: &str) -> Result<Self> {
        let tokens = tokenize_prefix(src);
        let mut pos = 0;
        let e = parse_prefix(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!("trailing tokens in `{src}`")));
        }
        Ok(e)
    }
}

fn exp_str(e: &Exp) -> String {
    if e.is_integer() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

fn rat_str(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn atom_prefix(a: &Atom) -> String {
    match a {
        Atom::Var(i) => format!("s{}", i + 1),
        Atom::Int(n) => n.to_string(),
        Atom::Radical(b) => b.to_prefix(),
    }
}

fn term_prefix(p: &Powers, c: &Rational) -> String {
    let mut parts = Vec::new();
    if !c.is_one() || p.is_empty() {
        parts.push(rat_str(c));
    }
    for (a, e) in p {
        if e.is_one() {
            parts.push(atom_prefix(a));
        } else {
            parts.push(format!("(^ {} {})", atom_prefix(a), exp_str(e)));
        }
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(* {})", parts.join(" "))
    }
}

fn tokenize_prefix(src: &str) -> Vec<String> {
    src.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn parse_rational(tok: &str) -> Option<Rational> {
    if let Some((n, d)) = tok.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rational::new(n, d))
    } else {
        tok.parse::<BigInt>().ok().map(Rational::from_integer)
    }
}

fn parse_exp(tok: &str) -> Option<Exp> {
    if let Some((n, d)) = tok.split_once('/') {
        let d: i64 = d.parse().ok()?;
        (d != 0).then_some(())?;
        Some(Exp::new(n.parse().ok()?, d))
    } else {
        tok.parse::<i64>().ok().map(Exp::from_integer)
    }
}

fn parse_prefix(tokens: &[String], pos: &mut usize) -> Result<ScalarExpr> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
    *pos += 1;
    if tok == "(" {
        let op = tokens
            .get(*pos)
            .ok_or_else(|| Error::Parse("missing operator".into()))?
            .clone();
        *pos += 1;
        let out = match op.as_str() {
            "+" | "*" => {
                let mut acc = if op == "+" { ScalarExpr::zero() } else { ScalarExpr::one() };
                while tokens.get(*pos).map(String::as_str) != Some(")") {
                    let arg = parse_prefix(tokens, pos)?;
                    acc = if op == "+" { &acc + &arg } else { &acc * &arg };
                }
                acc
            }
            "^" => {
                let base = parse_prefix(tokens, pos)?;
                let etok = tokens
                    .get(*pos)
                    .ok_or_else(|| Error::Parse("missing exponent".into()))?;
                let e = parse_exp(etok).ok_or_else(|| Error::Parse(format!("bad exponent `{etok}`")))?;
                *pos += 1;
                base.pow(e)?
            }
            _ => return Err(Error::Parse(format!("unknown operator `{op}`"))),
        };
        if tokens.get(*pos).map(String::as_str) != Some(")") {
            return Err(Error::Parse("missing `)`".into()));
        }
        *pos += 1;
        Ok(out)
    } else if let Some(i) = tok.strip_prefix('s') {
        let i: usize = i
            .parse()
            .ok()
            .filter(|&i| i >= 1)
            .ok_or_else(|| Error::Parse(format!("bad outcome symbol `{tok}`")))?;
        Ok(ScalarExpr::var(i - 1))
    } else {
        parse_rational(tok)
            .map(ScalarExpr::constant)
            .ok_or_else(|| Error::Parse(format!("bad token `{tok}`")))
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (p, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut parts = Vec::new();
            if !mag.is_one() || p.is_empty() {
                parts.push(rat_str(&mag));
            }
            for (a, e) in p {
                let base = match a {
                    Atom::Var(i) => format!("s{}", i + 1),
                    Atom::Int(n) => n.to_string(),
                    Atom::Radical(b) => format!("({b})"),
                };
                if e.is_one() {
                    parts.push(base);
                } else if e.is_integer() {
                    parts.push(format!("{base}^{}", e.numer()));
                } else {
                    parts.push(format!("{base}^({})", exp_str(e)));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl std::ops::Add for &ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, o: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        out.add_assign_ref(o);
        out
    }
}

impl std::ops::Sub for &ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, o: &ScalarExpr) -> ScalarExpr {
        self + &(-o)
    }
}

impl std::ops::Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr {
            terms: self.terms.iter().map(|(p, c)| (p.clone(), -c)).collect(),
        }
    }
}

impl std::ops::Mul for &ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, o: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (p1, c1) in &self.terms {
            for (p2, c2) in &o.terms {
                let mut p = p1.clone();
                for (a, e) in p2 {
                    *p.entry(a.clone()).or_insert_with(Exp::zero) += *e;
                }
                let t = ScalarExpr::from_term(c1 * c2, p);
                out.add_assign_ref(&t);
            }
        }
        out
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, o: ScalarExpr) -> ScalarExpr {
                std::ops::$tr::$m(&self, &o)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl std::ops::Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        -&self
    }
}

impl From<Rational> for ScalarExpr {
    fn from(r: Rational) -> Self {
        Self::constant(r)
    }
}

impl From<i64> for ScalarExpr {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}
