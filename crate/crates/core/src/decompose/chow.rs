use std::collections::BTreeMap;

use super::partition::{q_partitions, Partition};
use super::{ChowDecomp, ChowTerm, LinearForm};
use crate::error::{Error, Result};
use crate::polyring::{Monomial, Poly, Rational, ScalarExpr};

/// Coefficients `a_S` keyed by ascending zero-based index sets.
pub type CoefficientTable = BTreeMap<Vec<usize>, ScalarExpr>;

fn one() -> Rational {
    Rational::from_integer(1.into())
}

/// `V_{n,k} = Σ_{|S|=k} Π_{j∈S} x_j`.
pub fn elementary(n: usize, k: usize) -> Poly {
    let mut p = Poly::zero(n);
    for s in subsets(n, k) {
        let mut e = vec![0; n];
        for i in s {
            e[i] = 1;
        }
        p.add_term(Monomial(e), ScalarExpr::one());
    }
    p
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Partition terms of the construction together with the extra trailing
/// variable used for even orders.
fn skeleton(n: usize, k: usize) -> Vec<(Partition, Option<usize>)> {
    if k == 0 || k > n {
        return Vec::new();
    }
    let l = k / 2;
    if k % 2 == 1 {
        q_partitions(n, l).into_iter().map(|p| (p, None)).collect()
    } else {
        (k..=n)
            .flat_map(|m| q_partitions(m - 1, l - 1).into_iter().map(move |p| (p, Some(m - 1))))
            .collect()
    }
}

/// The partition construction of `V_{n,k}`.
pub fn chow_elementary(n: usize, k: usize) -> ChowDecomp {
    let target = elementary(n, k);
    let mut terms = Vec::new();
    if k == 0 {
        terms.push(ChowTerm { coeff: one(), factors: Vec::new() });
    }
    for (p, last) in skeleton(n, k) {
        let mut factors: Vec<(LinearForm, u32)> =
            p.ranges().into_iter().map(|(lo, hi)| (LinearForm::range(n, lo, hi), 1)).collect();
        if let Some(m) = last {
            factors.push((LinearForm::unit(n, m), 1));
        }
        terms.push(ChowTerm { coeff: one(), factors });
    }
    ChowDecomp { nvars: n, terms, target }
}

/// Fold a single-entry form with a rational coefficient into the term's
/// constant, merging it with a unit factor on the same variable if present.
fn simplify(mut term: ChowTerm) -> ChowTerm {
    let n = term.factors.first().map_or(0, |(l, _)| l.nvars());
    let mut i = 0;
    while i < term.factors.len() {
        let supp = term.factors[i].0.support();
        if supp.len() == 1 {
            let c = &term.factors[i].0 .0[supp[0]];
            if !c.is_one() {
                if let Some(r) = c.as_rational() {
                    let e = term.factors[i].1 as i32;
                    term.coeff *= num_traits::pow::Pow::pow(&r, e);
                    term.factors[i].0 = LinearForm::unit(n, supp[0]);
                }
            }
        }
        i += 1;
    }
    // Merge equal unit factors.
    let mut merged: Vec<(LinearForm, u32)> = Vec::new();
    for (l, e) in term.factors {
        if let Some(slot) = merged.iter_mut().find(|(m, _)| *m == l) {
            slot.1 += e;
        } else {
            merged.push((l, e));
        }
    }
    if merged.iter().all(|(l, _)| l.support().len() == 1 && l.0[l.support()[0]].is_one()) {
        merged.sort_by_key(|(l, _)| l.support()[0]);
    }
    term.factors = merged;
    term
}

/// Corollary construction for `Σ a_S Π_{j∈S} x_j`: every partition term is
/// expanded except its largest block (first on ties), which carries the
/// coefficients.  Zero coefficients are dropped.
pub fn chow_elementary_weighted(n: usize, k: usize, a: &CoefficientTable) -> Result<ChowDecomp> {
    let mut target = Poly::zero(n);
    for s in subsets(n, k) {
        let c = a.get(&s).ok_or_else(|| Error::MissingCoefficient(s.iter().map(|i| i + 1).collect()))?;
        let mut e = vec![0; n];
        for &i in &s {
            e[i] = 1;
        }
        target.add_term(Monomial(e), c.clone());
    }
    let mut terms = Vec::new();
    for (p, last) in skeleton(n, k) {
        let ranges = p.ranges();
        let wide = p.argmax();
        let others: Vec<(usize, usize)> =
            ranges.iter().enumerate().filter(|(j, _)| *j != wide).map(|(_, r)| *r).collect();
        let mut choice: Vec<usize> = others.iter().map(|r| r.0).collect();
        loop {
            let mut form = vec![ScalarExpr::zero(); n];
            let (lo, hi) = ranges[wide];
            for (m, slot) in form.iter_mut().enumerate().take(hi + 1).skip(lo) {
                let mut s: Vec<usize> = choice.clone();
                s.push(m);
                s.extend(last);
                s.sort_unstable();
                *slot = a[&s].clone();
            }
            if form.iter().any(|c| !c.is_zero()) {
                let mut factors = Vec::new();
                let mut it = choice.iter();
                for j in 0..ranges.len() {
                    if j == wide {
                        factors.push((LinearForm(form.clone()), 1));
                    } else {
                        factors.push((LinearForm::unit(n, *it.next().expect("choice per block")), 1));
                    }
                }
                if let Some(m) = last {
                    factors.push((LinearForm::unit(n, m), 1));
                }
                terms.push(simplify(ChowTerm { coeff: one(), factors }));
            }
            // Advance the odometer over the expanded blocks.
            let Some(pos) = (0..choice.len()).rev().find(|&q| choice[q] < others[q].1) else {
                break;
            };
            choice[pos] += 1;
            for q in pos + 1..choice.len() {
                choice[q] = others[q].0;
            }
        }
    }
    Ok(ChowDecomp { nvars: n, terms, target })
}

fn homogeneous_order(p: &Poly) -> Result<usize> {
    if !p.is_homogeneous() {
        return Err(Error::Dimension("Chow construction needs a homogeneous polynomial".into()));
    }
    Ok(p.degree() as usize)
}

/// Weighted construction for a homogeneous square-free polynomial.
pub fn chow_square_free(p: &Poly) -> Result<ChowDecomp> {
    let k = homogeneous_order(p)?;
    let n = p.nvars();
    let mut table = CoefficientTable::new();
    for s in subsets(n, k) {
        table.insert(s, ScalarExpr::zero());
    }
    for (m, c) in p.terms() {
        if !m.is_square_free() {
            return Err(Error::Dimension(format!("monomial {m:?} is not square-free")));
        }
        let s: Vec<usize> = (0..n).filter(|&i| m.0[i] == 1).collect();
        table.insert(s, c.clone());
    }
    let mut d = chow_elementary_weighted(n, k, &table)?;
    d.target = p.clone();
    Ok(d)
}

/// Greedy cofactor construction: repeatedly pick the order-`(k−1)` monomial `β`
/// dividing the most remaining terms (then fewest distinct variables, then
/// ascending graded-lex order) and emit `x^β · Σ_m c_{β+e_m} x_m`.
pub fn chow_greedy(p: &Poly) -> Result<ChowDecomp> {
    let k = homogeneous_order(p)?;
    let n = p.nvars();
    let mut remaining: BTreeMap<Monomial, ScalarExpr> =
        p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    let mut terms = Vec::new();
    if k == 0 {
        if let Some(c) = remaining.values().next() {
            let r = c.as_rational().ok_or_else(|| Error::Dimension("symbolic constant".into()))?;
            terms.push(ChowTerm { coeff: r, factors: Vec::new() });
        }
        return Ok(ChowDecomp { nvars: n, terms, target: p.clone() });
    }
    while !remaining.is_empty() {
        let mut best: Option<(usize, usize, Monomial)> = None;
        let mut seen = std::collections::BTreeSet::new();
        for mu in remaining.keys() {
            for m in 0..n {
                if mu.0[m] == 0 {
                    continue;
                }
                let mut beta = mu.clone();
                beta.0[m] -= 1;
                if !seen.insert(beta.clone()) {
                    continue;
                }
                let covered = (0..n)
                    .filter(|&v| {
                        let mut t = beta.clone();
                        t.0[v] += 1;
                        remaining.contains_key(&t)
                    })
                    .count();
                let distinct = beta.support();
                let better = match &best {
                    None => true,
                    Some((c, d, b)) => (covered, std::cmp::Reverse(distinct), std::cmp::Reverse(&beta))
                        > (*c, std::cmp::Reverse(*d), std::cmp::Reverse(b)),
                };
                if better {
                    best = Some((covered, distinct, beta));
                }
            }
        }
        let (_, _, beta) = best.expect("nonempty remainder has a cofactor");
        let mut form = vec![ScalarExpr::zero(); n];
        for (v, slot) in form.iter_mut().enumerate() {
            let mut t = beta.clone();
            t.0[v] += 1;
            if let Some(c) = remaining.remove(&t) {
                *slot = c;
            }
        }
        let mut factors: Vec<(LinearForm, u32)> =
            (0..n).filter(|&v| beta.0[v] > 0).map(|v| (LinearForm::unit(n, v), beta.0[v])).collect();
        factors.push((LinearForm(form), 1));
        terms.push(simplify(ChowTerm { coeff: one(), factors }));
    }
    Ok(ChowDecomp { nvars: n, terms, target: p.clone() })
}

/// `c · V_{n,k}` for a rational `c`, when `p` has that form.
fn scaled_elementary(p: &Poly) -> Option<ChowDecomp> {
    let k = p.degree() as usize;
    let n = p.nvars();
    let (_, first) = p.terms().next()?;
    let c = first.as_rational()?;
    let full = p.terms().all(|(m, x)| m.is_square_free() && m.degree() as usize == k && *x == *first);
    if !full || p.num_terms() as u64 != super::binom(n as i64, k as i64) {
        return None;
    }
    let mut d = chow_elementary(n, k);
    for t in &mut d.terms {
        t.coeff = &t.coeff * &c;
    }
    d.target = p.clone();
    Some(d)
}

/// The unweighted construction for multiples of `V_{n,k}`, the weighted one
/// when every monomial is square-free, greedy otherwise; the expansion is
/// verified before returning.
pub fn chow_auto(p: &Poly) -> Result<ChowDecomp> {
    let d = if let Some(d) = scaled_elementary(p) {
        d
    } else if p.terms().all(|(m, _)| m.is_square_free()) {
        chow_square_free(p)?
    } else {
        chow_greedy(p)?
    };
    if !d.verify() {
        return Err(Error::Verification(format!("Chow expansion mismatch for {p}")));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_poly;

    #[test]
    fn v63_matches_printed_form() {
        let d = chow_elementary(6, 3);
        assert_eq!(d.crank(), 4);
        assert!(d.verify());
        let text = d.to_string();
        assert!(text.starts_with("x1*x2*(x3 + x4 + x5 + x6)"), "{text}");
    }

    #[test]
    fn v64_and_trivial() {
        let d = chow_elementary(6, 4);
        assert_eq!(d.crank(), 6);
        assert!(d.verify());
        assert_eq!(chow_elementary(3, 3).crank(), 1);
    }

    #[test]
    fn weighted_all_ones_matches_elementary() {
        let mut a = CoefficientTable::new();
        for s in subsets(6, 3) {
            a.insert(s, ScalarExpr::one());
        }
        let d = chow_elementary_weighted(6, 3, &a).unwrap();
        assert!(d.verify());
        assert_eq!(d.target, elementary(6, 3));
        assert_eq!(d.crank(), 6);
        assert_eq!(d.brank(), 18);
        let first = d.terms[0].to_string();
        assert_eq!(first, "x1*x2*(x3 + x4 + x5 + x6)");
    }

    #[test]
    fn weighted_missing_coefficient() {
        let a = CoefficientTable::new();
        assert!(matches!(chow_elementary_weighted(3, 2, &a), Err(Error::MissingCoefficient(_))));
    }

    #[test]
    fn greedy_small_example() {
        let p = parse_poly("2*s1*x1*x2^2 + 2*s2*x1^2*x2 + 4*s1*x1^3", Some(2)).unwrap();
        let d = chow_auto(&p).unwrap();
        assert_eq!(d.crank(), 2);
        assert_eq!(d.brank(), 4);
        assert_eq!(d.to_string(), "x1^2*(4*s1*x1 + 2*s2*x2) + x2^2*(2*s1*x1)");
    }

    #[test]
    fn greedy_monomial_is_single_term() {
        let p = parse_poly("-3*x1*x2^2", None).unwrap();
        let d = chow_auto(&p).unwrap();
        assert_eq!(d.crank(), 1);
        assert_eq!(d.brank(), 2);
        assert_eq!(d.to_string(), "-3*x1*x2^2");
    }
}
