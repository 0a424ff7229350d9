use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::LinearForm;
use crate::error::{Error, Result};
use crate::polyring::{rat, Exp, Poly, Rational, ScalarExpr};

/// `target = Σ_i c_i (ℓ_i · x)^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaringDecomp {
    pub nvars: usize,
    pub degree: u32,
    pub terms: Vec<(ScalarExpr, LinearForm)>,
    pub target: Poly,
}

impl WaringDecomp {
    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn expand(&self) -> Result<Poly> {
        let mut p = Poly::zero(self.nvars);
        for (c, l) in &self.terms {
            p = p.add(&l.to_poly().powi(self.degree).scale(c))?;
        }
        Ok(p)
    }

    /// Exact expansion check.
    pub fn verify(&self) -> bool {
        if let (Some(got), Some(want)) = (self.rational_expansion(), self.target.rational_coeffs()) {
            return want.into_iter().map(|(m, c)| (m.0, c)).collect::<BTreeMap<_, _>>() == got;
        }
        self.expand().is_ok_and(|e| e == self.target)
    }

    /// Expansion by the multinomial theorem when every weight is rational and
    /// every direction entry an integer; integer sums are grouped by weight.
    fn rational_expansion(&self) -> Option<BTreeMap<Vec<u32>, Rational>> {
        let n = self.degree;
        let mut fact: Vec<i128> = vec![1];
        for k in 1..=n as i128 {
            fact.push(fact.last()?.checked_mul(k)?);
        }
        let mut by_weight: Vec<(Rational, BTreeMap<Vec<u32>, i128>)> = Vec::new();
        for (c, l) in &self.terms {
            let c = c.as_rational()?;
            let a: Vec<i128> = l
                .0
                .iter()
                .map(|x| x.as_rational().filter(|r| r.is_integer()).and_then(|r| r.to_integer().try_into().ok()))
                .collect::<Option<_>>()?;
            let support: Vec<usize> = (0..a.len()).filter(|&i| a[i] != 0).collect();
            let slot = match by_weight.iter().position(|(w, _)| *w == c) {
                Some(i) => i,
                None => {
                    by_weight.push((c, BTreeMap::new()));
                    by_weight.len() - 1
                }
            };
            let mut alpha = vec![0u32; self.nvars];
            expand_power(&support, &a, &fact, n, fact[n as usize], &mut alpha, &mut by_weight[slot].1)?;
        }
        let mut out: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (w, sums) in by_weight {
            for (m, v) in sums {
                let slot = out.entry(m).or_insert_with(Rational::zero);
                *slot = &*slot + &w * Rational::from_integer(v.into());
            }
        }
        out.retain(|_, v| !v.is_zero());
        Some(out)
    }

    /// Direction matrix with one row per term.
    pub fn directions(&self) -> Vec<Vec<ScalarExpr>> {
        self.terms.iter().map(|(_, l)| l.0.clone()).collect()
    }

    fn checked(self) -> Result<Self> {
        if self.verify() {
            Ok(self)
        } else {
            Err(Error::Verification(format!("Waring expansion mismatch for {}", self.target)))
        }
    }
}

impl fmt::Display for WaringDecomp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, l)) in self.terms.iter().enumerate() {
            let mut cs = c.to_string();
            if i > 0 {
                match cs.strip_prefix('-') {
                    Some(rest) => {
                        write!(f, " - ")?;
                        cs = rest.to_string();
                    }
                    None => write!(f, " + ")?,
                }
            }
            let supp = l.support();
            let body = if supp.len() == 1 && l.0[supp[0]].is_one() {
                format!("x{}^{}", supp[0] + 1, self.degree)
            } else {
                format!("({l})^{}", self.degree)
            };
            match cs.as_str() {
                "1" => write!(f, "{body}")?,
                "-1" => write!(f, "-{body}")?,
                _ if cs.contains(' ') => write!(f, "({cs})*{body}")?,
                _ => write!(f, "{cs}*{body}")?,
            }
        }
        Ok(())
    }
}

/// Add `Σ_α N!/α! Π a_i^{α_i} x^α` over exponents on `support`; `scale`
/// carries the multinomial and powers accumulated so far. `None` on overflow.
fn expand_power(
    support: &[usize],
    a: &[i128],
    fact: &[i128],
    left: u32,
    scale: i128,
    alpha: &mut Vec<u32>,
    out: &mut BTreeMap<Vec<u32>, i128>,
) -> Option<()> {
    let Some((&v, rest)) = support.split_first() else {
        if left == 0 {
            let slot = out.entry(alpha.clone()).or_insert(0);
            *slot = slot.checked_add(scale)?;
        }
        return Some(());
    };
    let lo = if rest.is_empty() { left } else { 0 };
    for e in lo..=left {
        alpha[v] = e;
        let term = a[v].checked_pow(e)?.checked_mul(scale / fact[e as usize])?;
        expand_power(rest, a, fact, left - e, term, alpha, out)?;
    }
    alpha[v] = 0;
    Some(())
}

fn c(n: i64, d: i64) -> ScalarExpr {
    ScalarExpr::constant(rat(n, d))
}

fn form(coeffs: &[i64]) -> LinearForm {
    LinearForm(coeffs.iter().map(|&v| ScalarExpr::from_int(v)).collect())
}

fn factorial(n: u32) -> Rational {
    (1..=n).fold(Rational::one(), |a, k| a * Rational::from_integer(k.into()))
}

/// Solve `A w = b` exactly.
fn solve_rational(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for k in col..n {
                    let v = &f * &a[col][k];
                    a[r][k] -= v;
                }
                let v = &f * &b[col];
                b[r] -= v;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// `x_i x_j^{N−1} = Σ_t w_t (x_j + t x_i)^N` with nodes `1, …, N−1` and a last
/// node chosen so that the `x_i^N` moment also vanishes.
fn waring_cphase_pattern(n: usize, i: usize, j: usize, degree: u32) -> Result<Vec<(ScalarExpr, LinearForm)>> {
    let nn = degree as usize;
    let mut nodes: Vec<Rational> = (1..nn as i64).map(|t| Rational::from_integer(t.into())).collect();
    // e_{N−1}(nodes) must vanish: t_N = −Π / e_{N−2}.
    let prod = nodes.iter().fold(Rational::one(), |a, t| a * t);
    let e_sub = nodes
        .iter()
        .enumerate()
        .map(|(k, _)| nodes.iter().enumerate().filter(|(m, _)| *m != k).fold(Rational::one(), |a, (_, t)| a * t))
        .fold(Rational::zero(), |a, v| a + v);
    nodes.push(-prod / e_sub);
    let a: Vec<Vec<Rational>> = (0..nn)
        .map(|k| nodes.iter().map(|t| num_traits::pow::Pow::pow(t, k as u32)).collect())
        .collect();
    let b: Vec<Rational> = (0..nn)
        .map(|k| if k == 1 { Rational::new(1.into(), (nn as i64).into()) } else { Rational::zero() })
        .collect();
    let w = solve_rational(a, b).ok_or_else(|| Error::NoWaring("singular node system".into()))?;
    Ok(nodes
        .into_iter()
        .zip(w)
        .map(|(t, wt)| {
            let mut l = vec![ScalarExpr::zero(); n];
            l[j] = ScalarExpr::one();
            l[i] = ScalarExpr::constant(t);
            (ScalarExpr::constant(wt), LinearForm(l))
        })
        .collect())
}

/// Sign-sum polarization `Π y = (1/(2^{N−1} N!)) Σ_ε Π ε (y_1 + ε_2 y_2 + …)^N`
/// with slots mapped to the variables of `x^α`; coinciding forms are merged.
fn waring_polarization(exps: &[u32]) -> Vec<(ScalarExpr, LinearForm)> {
    let n = exps.len();
    let slots: Vec<usize> = exps.iter().enumerate().flat_map(|(v, &e)| std::iter::repeat(v).take(e as usize)).collect();
    let big = slots.len() as u32;
    let norm = Rational::one() / (factorial(big) * Rational::from_integer((1i64 << (big - 1)).into()));
    let mut acc: Vec<(Vec<i64>, Rational)> = Vec::new();
    for mask in 0..(1u64 << (big - 1)) {
        let mut coeffs = vec![0i64; n];
        let mut sign = 1i64;
        for (k, &v) in slots.iter().enumerate() {
            let e = if k > 0 && mask >> (k - 1) & 1 == 1 { -1 } else { 1 };
            sign *= e;
            coeffs[v] += e;
        }
        if coeffs.iter().all(|&v| v == 0) {
            continue;
        }
        let lead = *coeffs.iter().find(|&&v| v != 0).expect("nonzero form");
        if lead < 0 {
            coeffs.iter_mut().for_each(|v| *v = -*v);
            if big % 2 == 1 {
                sign = -sign;
            }
        }
        let w = &norm * Rational::from_integer(sign.into());
        match acc.iter_mut().find(|(f, _)| *f == coeffs) {
            Some(slot) => slot.1 += w,
            None => acc.push((coeffs, w)),
        }
    }
    acc.into_iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(f, w)| (ScalarExpr::constant(w), form(&f)))
        .collect()
}

/// Waring decomposition of the monomial `x^α`.
pub fn waring_monomial(exps: &[u32]) -> Result<WaringDecomp> {
    let n = exps.len();
    let degree: u32 = exps.iter().sum();
    let target = Poly::monomial(exps.to_vec(), ScalarExpr::one());
    let support: Vec<usize> = (0..n).filter(|&v| exps[v] > 0).collect();
    let terms = match support.as_slice() {
        [] => return Err(Error::NoWaring("constant monomial".into())),
        [v] => vec![(ScalarExpr::one(), LinearForm::unit(n, *v))],
        [a, b] if exps[*a] == 1 || exps[*b] == 1 => {
            let (i, j) = if exps[*a] == 1 { (*a, *b) } else { (*b, *a) };
            waring_cphase_pattern(n, i, j, degree)?
        }
        _ => waring_polarization(exps),
    };
    WaringDecomp { nvars: n, degree, terms, target }.checked()
}

/// Sum of monomial decompositions of a homogeneous polynomial with rational
/// coefficients; coinciding forms are merged.
pub fn waring_poly(p: &Poly) -> Result<WaringDecomp> {
    if !p.is_homogeneous() || p.is_zero() {
        return Err(Error::NoWaring(format!("{p} is not a nonzero homogeneous polynomial")));
    }
    let degree = p.degree();
    let mut terms: Vec<(ScalarExpr, LinearForm)> = Vec::new();
    for (m, coeff) in p.terms().rev() {
        if coeff.as_rational().is_none() {
            return Err(Error::NoWaring(format!("coefficient {coeff} is not rational")));
        }
        for (w, l) in waring_monomial(&m.0)?.terms {
            let w = &w * coeff;
            match terms.iter_mut().find(|(_, f)| *f == l) {
                Some(slot) => slot.0 = &slot.0 + &w,
                None => terms.push((w, l)),
            }
        }
    }
    terms.retain(|(w, _)| !w.is_zero());
    WaringDecomp { nvars: p.nvars(), degree, terms, target: p.clone() }.checked()
}

fn parse_arity(id: &str, name: &str) -> Option<usize> {
    let rest = id.strip_prefix(name)?;
    let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).or_else(|| rest.strip_prefix(':'))?;
    inner.trim().parse().ok()
}

/// Decompositions of the named gates: `cubic-qnd`, `toffoli`,
/// `small-example`, `cphase(N)`, `cnz(N)`.
pub fn waring_known(id: &str) -> Result<WaringDecomp> {
    let id = id.trim();
    let decomp = match id {
        "cubic-qnd" => WaringDecomp {
            nvars: 2,
            degree: 3,
            terms: vec![(c(1, 6), form(&[1, 1])), (c(1, 6), form(&[1, -1])), (c(-1, 3), form(&[1, 0]))],
            target: Poly::monomial(vec![1, 2], ScalarExpr::one()),
        },
        "toffoli" => WaringDecomp {
            nvars: 3,
            degree: 3,
            terms: [[1, 1, 1], [-1, -1, 1], [-1, 1, -1], [1, -1, -1]].iter().map(|f| (c(1, 24), form(f))).collect(),
            target: Poly::monomial(vec![1, 1, 1], ScalarExpr::one()),
        },
        "small-example" => {
            let inv_sqrt6 = ScalarExpr::from_int(6).pow(Exp::new(-1, 2))?;
            WaringDecomp {
                nvars: 2,
                degree: 4,
                terms: vec![
                    (c(1, 2), LinearForm(vec![ScalarExpr::one(), inv_sqrt6.clone()])),
                    (c(1, 2), LinearForm(vec![ScalarExpr::one(), -&inv_sqrt6])),
                    (c(-1, 36), form(&[0, 1])),
                ],
                target: Poly::from_terms(2, [(vec![2, 2], ScalarExpr::one()), (vec![4, 0], ScalarExpr::one())]),
            }
        }
        _ => {
            if let Some(n) = parse_arity(id, "cphase") {
                if n < 2 {
                    return Err(Error::InvalidGate(id.into()));
                }
                let mut e = vec![1, n as u32 - 1];
                e.truncate(2);
                return waring_monomial(&e);
            }
            if let Some(n) = parse_arity(id, "cnz") {
                if n < 1 {
                    return Err(Error::InvalidGate(id.into()));
                }
                return waring_monomial(&vec![1; n]);
            }
            return Err(Error::UnknownGate(id.into()));
        }
    };
    decomp.checked()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_gates_expand() {
        let q = waring_known("cubic-qnd").unwrap();
        assert_eq!(q.rank(), 3);
        assert_eq!(q.to_string(), "1/6*(x1 + x2)^3 + 1/6*(x1 - x2)^3 - 1/3*x1^3");
        assert_eq!(waring_known("toffoli").unwrap().rank(), 4);
        assert_eq!(waring_known("small-example").unwrap().rank(), 3);
        assert!(matches!(waring_known("swap"), Err(Error::UnknownGate(_))));
    }

    #[test]
    fn cnz_counts() {
        for n in 2..=6 {
            assert_eq!(waring_known(&format!("cnz({n})")).unwrap().rank(), 1 << (n - 1));
        }
    }

    #[test]
    fn cphase_uses_n_terms() {
        for n in 2..=8 {
            let d = waring_known(&format!("cphase({n})")).unwrap();
            assert_eq!(d.rank(), n);
        }
    }

    #[test]
    fn product_of_two() {
        let d = waring_monomial(&[1, 1]).unwrap();
        assert_eq!(d.to_string(), "1/4*(x1 + x2)^2 - 1/4*(-x1 + x2)^2");
    }

    #[test]
    fn general_monomial_and_poly() {
        assert!(waring_monomial(&[2, 2, 1]).unwrap().verify());
        let p = crate::polyring::parse_poly("x1^2*x2^2 + x1^4", None).unwrap();
        assert!(waring_poly(&p).unwrap().verify());
    }
}
