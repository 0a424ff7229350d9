use super::{ChowDecomp, VERIFY_SAMPLES};
use crate::error::{Error, Result};
use crate::polyring::{Exp, Poly, SMatrix, ScalarExpr};

/// `A(s) = B(M(s) x)`: an outcome-free block-diagonal potential `B` on
/// `brank` variables and the stacked factor matrix `M(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bmd {
    pub b: Poly,
    pub m: SMatrix,
    /// `(offset, width)` of each term's block.
    pub blocks: Vec<(usize, usize)>,
    /// Per block, the outcome-free monomial `B_i` on its own variables.
    pub block_polys: Vec<Poly>,
}

/// Split a Chow decomposition into `B` and `M`; the result is checked by
/// substituting `M x` into `B`.
pub fn extract_bmd(d: &ChowDecomp) -> Result<Bmd> {
    let width: usize = d.brank();
    let mut b = Poly::zero(width);
    let mut m: SMatrix = Vec::with_capacity(width);
    let mut blocks = Vec::with_capacity(d.terms.len());
    let mut block_polys = Vec::with_capacity(d.terms.len());
    for t in &d.terms {
        let offset = m.len();
        let l = t.factor_count();
        let exps: Vec<u32> = t.factors.iter().map(|(_, e)| *e).collect();
        let local = Poly::monomial(exps, ScalarExpr::constant(t.coeff.clone()));
        for (lf, _) in &t.factors {
            m.push(lf.0.clone());
        }
        b = b.add(&local.embed(width, offset))?;
        blocks.push((offset, l));
        block_polys.push(local);
    }
    if !b.is_s_free() {
        return Err(Error::Verification("B depends on outcomes".into()));
    }
    let zero = vec![ScalarExpr::zero(); width];
    // With no factors `B` is a bare constant.
    let back = if width == 0 { Poly::constant(d.nvars, b.coeff(&[])) } else { b.substitute_affine(&m, &zero)? };
    let target_ok = if width == 0 { back == d.target } else { back.sampled_eq(&d.target, VERIFY_SAMPLES, 0) };
    if !target_ok {
        return Err(Error::Verification("B(Mx) differs from the target".into()));
    }
    Ok(Bmd { b, m, blocks, block_polys })
}

/// `D_j = diag(σ_l / q_j)` with `q_j = (Π_l σ_l^{n_l})^{1/(k−j)}` and
/// `k = Σ n_l`, for the monomial `Π_l x_l^{n_l}` evaluated at `σ`.
pub fn d_scaling(exps: &[u32], sigma: &[ScalarExpr], j: usize) -> Result<SMatrix> {
    let k: u32 = exps.iter().sum();
    if exps.len() != sigma.len() {
        return Err(Error::Dimension("one scale per monomial variable".into()));
    }
    if j as u32 >= k {
        return Err(Error::Contraction { j, k: k as usize });
    }
    let q = Poly::monomial(exps.to_vec(), ScalarExpr::one())
        .eval(sigma)?
        .pow(Exp::new(1, (k - j as u32) as i64))?;
    let l = sigma.len();
    (0..l)
        .map(|r| (0..l).map(|c| if r == c { sigma[r].div(&q) } else { Ok(ScalarExpr::zero()) }).collect())
        .collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{chow_auto, chow_elementary};
    use crate::polyring::{parse_poly, SymTensor};

    #[test]
    fn monomial_is_its_own_b() {
        let d = chow_elementary(4, 4);
        let r = extract_bmd(&d).unwrap();
        assert_eq!(r.b, parse_poly("x1*x2*x3*x4", None).unwrap());
        assert_eq!(r.m, crate::polyring::identity(4));
    }

    #[test]
    fn greedy_blocks() {
        let p = parse_poly("2*s1*x1*x2^2 + 2*s2*x1^2*x2 + 4*s1*x1^3", Some(2)).unwrap();
        let r = extract_bmd(&chow_auto(&p).unwrap()).unwrap();
        assert_eq!(r.blocks, vec![(0, 2), (2, 2)]);
        assert_eq!(r.b, parse_poly("x1^2*x2 + x3^2*x4", None).unwrap());
    }

    #[test]
    fn scaling_absorbs_outcomes() {
        // A s^{⊗1} for A = x1 x2 x3 x4 equals A'(D^{-1} x)^{⊗3} with A' = A 1.
        let s: Vec<ScalarExpr> = (0..4).map(ScalarExpr::var).collect();
        let d = d_scaling(&[1, 1, 1, 1], &s, 1).unwrap();
        let a = parse_poly("x1*x2*x3*x4", None).unwrap();
        let lhs = a.contract(&s, 1).unwrap();
        let ones = vec![ScalarExpr::one(); 4];
        let dinv: SMatrix = (0..4)
            .map(|r| (0..4).map(|c| if r == c { d[r][r].recip().unwrap() } else { ScalarExpr::zero() }).collect())
            .collect();
        let rhs = a.contract(&ones, 1).unwrap().substitute_affine(&dinv, &vec![ScalarExpr::zero(); 4]).unwrap();
        assert!(lhs.sampled_eq(&rhs, 20, 1));
        assert!(SymTensor::from_poly(&lhs).is_ok());
    }
}
