use super::chow::elementary;
use super::ChowDecomp;
use std::collections::{BTreeMap, HashSet};

use crate::polyring::Poly;

/// Binomial coefficient, zero outside the triangle.
pub fn binom(n: i64, k: i64) -> u64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Conjectured minimal Chow rank of `V_{n,k}`: `C(n−l, l)` for `k = 2l` and
/// `C(n−l−1, l)` for `k = 2l+1`.
pub fn closed_form_crank(n: usize, k: usize) -> u64 {
    let (n, l) = (n as i64, (k / 2) as i64);
    if k > n as usize {
        0
    } else if k % 2 == 0 {
        binom(n - l, l)
    } else {
        binom(n - l - 1, l)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub crank: usize,
    pub brank: usize,
    /// `order · crank`; differs from `brank` when a term repeats a factor.
    pub brank_shortcut: usize,
    /// Conjectured closed form, available for elementary symmetric targets.
    pub closed_form: Option<u64>,
}

/// Ranks of a constructed decomposition; the closed form is attached when the
/// target is `V_{n,k}`.
pub fn rank_functions(d: &ChowDecomp) -> RankReport {
    let n = d.nvars;
    let k = d.target.degree() as usize;
    let closed_form = (d.target.is_homogeneous() && d.target == elementary(n, k)).then(|| closed_form_crank(n, k));
    RankReport { crank: d.crank(), brank: d.brank(), brank_shortcut: d.brank_shortcut(), closed_form }
}

/// Sparse integer polynomial keyed by exponent vectors.
type IntPoly = BTreeMap<Vec<u32>, i64>;

fn int_mul(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let mut out = IntPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn int_neg(a: &IntPoly) -> IntPoly {
    a.iter().map(|(e, c)| (e.clone(), -c)).collect()
}

fn linear_forms(n: usize, grid: &[i64]) -> Vec<IntPoly> {
    let mut forms: Vec<IntPoly> = Vec::new();
    for code in 0..grid.len().pow(n as u32) {
        let mut c = code;
        let mut f = IntPoly::new();
        for v in 0..n {
            let r = grid[c % grid.len()];
            c /= grid.len();
            if r != 0 {
                let mut e = vec![0; n];
                e[v] = 1;
                f.insert(e, r);
            }
        }
        if !f.is_empty() && !forms.contains(&f) && !forms.contains(&int_neg(&f)) {
            forms.push(f);
        }
    }
    forms
}

fn multisets(len: usize, k: usize) -> u64 {
    binom((len + k) as i64 - 1, k as i64)
}

/// Smallest `r ≤ min(max_terms, 2)` for which a sum of `r` products of linear
/// forms with small integer coefficients equals `target`, by enumeration.
/// This spot-checks rank conjectures on tiny cases only; a miss on the grid
/// says nothing about real coefficients. `None` also for non-integer targets.
pub fn grid_search_min_crank(target: &Poly, max_terms: usize) -> Option<usize> {
    let n = target.nvars();
    let k = target.degree() as usize;
    let mut goal = IntPoly::new();
    for (m, c) in target.terms() {
        let r = c.as_rational()?;
        if !r.is_integer() {
            return None;
        }
        goal.insert(m.0.clone(), r.to_integer().try_into().ok()?);
    }
    let mut forms = linear_forms(n, &[0, 1, -1, 2, -2]);
    if multisets(forms.len(), k) > 200_000 {
        forms = linear_forms(n, &[0, 1, -1]);
    }
    let mut products: HashSet<IntPoly> = HashSet::new();
    let mut idx = vec![0usize; k];
    loop {
        let mut p: IntPoly = [(vec![0; n], 1)].into_iter().collect();
        for &i in &idx {
            p = int_mul(&p, &forms[i]);
        }
        products.insert(int_neg(&p));
        products.insert(p);
        let Some(pos) = (0..idx.len()).rev().find(|&q| idx[q] + 1 < forms.len()) else {
            break;
        };
        idx[pos] += 1;
        for q in pos + 1..idx.len() {
            idx[q] = idx[pos];
        }
    }
    if max_terms >= 1 && products.contains(&goal) {
        return Some(1);
    }
    if max_terms >= 2 {
        for p in &products {
            let mut rest = goal.clone();
            for (e, c) in p {
                *rest.entry(e.clone()).or_insert(0) -= c;
            }
            rest.retain(|_, c| *c != 0);
            if products.contains(&rest) {
                return Some(2);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::chow_elementary;

    #[test]
    fn closed_forms() {
        assert_eq!(closed_form_crank(4, 3), 2);
        assert_eq!(closed_form_crank(6, 4), 6);
        for n in 1..8 {
            assert_eq!(closed_form_crank(n, n), 1);
        }
    }

    #[test]
    fn grid_finds_rank_one_and_two() {
        assert_eq!(grid_search_min_crank(&elementary(2, 2), 2), Some(1));
        assert_eq!(grid_search_min_crank(&elementary(3, 2), 2), Some(2));
        assert_eq!(grid_search_min_crank(&elementary(4, 2), 2), None);
    }

    #[test]
    fn report_for_elementary() {
        let r = rank_functions(&chow_elementary(6, 4));
        assert_eq!(r.crank, 6);
        assert_eq!(r.brank, 24);
        assert_eq!(r.closed_form, Some(6));
    }
}
