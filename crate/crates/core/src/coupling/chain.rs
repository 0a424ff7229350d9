use nalgebra::DVector;

use super::{diamond, star};
use crate::error::{Error, Result};
use crate::linalg::{p_of_k, to_rows, Mat};
use crate::polyring::{eval_matrix, NumPoly, Poly, SMatrix, ScalarExpr};

/// Samples used when a coefficient identity involves radicals.
const IDENTITY_SAMPLES: usize = 12;

/// One ancilla block: its s-free nullifier potential `f` on `d` modes and the
/// coupling `K` (`d × n`), which may depend on earlier outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainStep {
    pub f: Poly,
    pub k: SMatrix,
    /// Index of the first outcome symbol of this block (zero-based).
    pub offset: usize,
}

impl ChainStep {
    pub fn width(&self) -> usize {
        self.f.nvars()
    }
}

/// `V ⋆_{K1,s1} f1 ⋆_{K2,s2} f2 ⋯`, evaluated left to right.
#[derive(Clone, Debug, PartialEq)]
pub struct StarChain {
    pub v: Poly,
    pub steps: Vec<ChainStep>,
}

impl StarChain {
    pub fn new(v: Poly) -> Self {
        Self { v, steps: Vec::new() }
    }

    pub fn nmodes(&self) -> usize {
        self.v.nvars()
    }

    pub fn outcome_count(&self) -> usize {
        self.steps.last().map_or(0, |s| s.offset + s.width())
    }

    pub fn ancilla_count(&self) -> usize {
        self.outcome_count()
    }

    pub fn push(&mut self, f: Poly, k: SMatrix) {
        let offset = self.outcome_count();
        self.steps.push(ChainStep { f, k, offset });
    }

    pub fn outcome_symbols(step: &ChainStep) -> Vec<ScalarExpr> {
        (0..step.width()).map(|i| ScalarExpr::var(step.offset + i)).collect()
    }

    /// The chain with symbolic outcomes.
    pub fn symbolic(&self) -> Result<Poly> {
        let mut g = self.v.clone();
        for st in &self.steps {
            g = star(&g, &st.f, &st.k, &Self::outcome_symbols(st))?;
        }
        Ok(g)
    }

    /// The chain specialized at star outcomes `s`.
    pub fn at(&self, s: &[f64]) -> Result<NumPoly> {
        let mut g = self.v.at_outcomes(s)?;
        for st in &self.steps {
            let k = eval_matrix(&st.k, s)?;
            let f = st.f.at_outcomes(s)?;
            g = star(&g, &f, &k, &s[st.offset..st.offset + st.width()])?;
        }
        Ok(g)
    }
}

/// Apply `V_j ⋆_{K,s} f` with outcome symbols starting at `offset`, certify
/// that the order-`N_j` part cancels and return the reduced potential.
pub fn reduce_step(vj: &Poly, f: &Poly, k: &SMatrix, offset: usize) -> Result<Poly> {
    let top = vj.degree();
    let s: Vec<ScalarExpr> = (0..f.nvars()).map(|i| ScalarExpr::var(offset + i)).collect();
    let out = star(vj, f, k, &s)?;
    let mut reduced = Poly::zero(out.nvars());
    let mut residual = Poly::zero(out.nvars());
    for (m, c) in out.terms() {
        if m.degree() >= top && c.sampled_eq(&ScalarExpr::zero(), IDENTITY_SAMPLES, 0) {
            continue;
        }
        if m.degree() >= top {
            residual.add_term(m.clone(), c.clone());
        }
        reduced.add_term(m.clone(), c.clone());
    }
    if top > 0 && !residual.is_zero() {
        return Err(Error::Reduction { residual: residual.to_string() });
    }
    Ok(reduced)
}

/// The physical protocol behind a star chain: each block is coupled with the
/// diamond operator and the physical outcomes are remapped to star outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct DiamondChain {
    pub star: StarChain,
}

/// Numeric trace of a diamond chain for one outcome record.
#[derive(Clone, Debug)]
pub struct DiamondEvaluation {
    /// Physical couplings `K′_k = K_k A_{k−1}`.
    pub k_prime: Vec<Mat>,
    /// `P(K′_k)` per block.
    pub p: Vec<Mat>,
    pub s_physical: Vec<f64>,
    pub s_star: Vec<f64>,
    /// Final affine map `x ↦ A x + b` with `diamond chain = star chain ∘ (A, b)`.
    pub a: Mat,
    pub b: Vec<f64>,
    /// Diamond chain potential built step by step.
    pub poly: NumPoly,
}

enum Given<'a> {
    Physical(&'a [f64]),
    Star(&'a [f64]),
}

impl DiamondChain {
    pub fn new(star: StarChain) -> Self {
        Self { star }
    }

    /// Run the chain from the physical outcomes `s′`.
    pub fn evaluate(&self, s_physical: &[f64]) -> Result<DiamondEvaluation> {
        self.run(Given::Physical(s_physical))
    }

    /// Run the chain with the physical outcomes that reproduce star outcomes `ŝ`.
    pub fn evaluate_star(&self, s_star: &[f64]) -> Result<DiamondEvaluation> {
        self.run(Given::Star(s_star))
    }

    fn run(&self, given: Given<'_>) -> Result<DiamondEvaluation> {
        let total = self.star.outcome_count();
        let provided = match given {
            Given::Physical(s) | Given::Star(s) => s.len(),
        };
        if provided != total {
            return Err(Error::Dimension(format!("expected {total} outcomes, got {provided}")));
        }
        let n = self.star.nmodes();
        let mut a = Mat::identity(n, n);
        let mut b = DVector::zeros(n);
        let mut poly = self.star.v.at_outcomes(&[])?;
        let mut s_star = Vec::with_capacity(total);
        let mut s_phys = Vec::with_capacity(total);
        let (mut k_prime, mut ps) = (Vec::new(), Vec::new());
        for st in &self.star.steps {
            let d = st.width();
            let rows = eval_matrix(&st.k, &s_star)?;
            let k = Mat::from_fn(d, n, |i, j| rows[i][j]);
            let kp = &k * &a;
            let gram = Mat::identity(d, d) + &kp * kp.transpose();
            let shift = &k * &b;
            let sp = match given {
                Given::Physical(s) => DVector::from_column_slice(&s[st.offset..st.offset + d]),
                Given::Star(s) => {
                    let target = DVector::from_column_slice(&s[st.offset..st.offset + d]) - &shift;
                    gram.clone().lu().solve(&target).ok_or_else(|| Error::Eval("singular remap".into()))?
                }
            };
            let sh = shift + &gram * &sp;
            s_star.extend(sh.iter());
            s_phys.extend(sp.iter());
            let f = st.f.at_outcomes(&[])?;
            poly = diamond(&poly, &f, &kp, sp.as_slice())?;
            let p = p_of_k(&kp);
            b += &a * kp.transpose() * &sp;
            a = &a * &p;
            k_prime.push(kp);
            ps.push(p);
        }
        Ok(DiamondEvaluation {
            k_prime,
            p: ps,
            s_physical: s_phys,
            s_star,
            a,
            b: b.as_slice().to_vec(),
            poly,
        })
    }

    /// Relative coefficient gap between the diamond chain and the star chain
    /// composed with `(A, b)` at star outcomes `ŝ`.
    pub fn agreement(&self, s_star: &[f64]) -> Result<f64> {
        let ev = self.evaluate_star(s_star)?;
        let g = self.star.at(&ev.s_star)?;
        let composed = g.substitute_affine(&to_rows(&ev.a), &ev.b)?;
        let diff = composed.sub(&ev.poly)?.max_abs();
        Ok(diff / composed.max_abs().max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{identity, parse_poly};

    fn cubic_chain() -> StarChain {
        let v = parse_poly("x1^3", None).unwrap();
        let mut c = StarChain::new(v.clone());
        c.push(v.neg(), identity(1));
        c
    }

    #[test]
    fn cubic_reduces_to_quadratic() {
        let c = cubic_chain();
        let g = c.symbolic().unwrap();
        assert_eq!(g.degree(), 2);
        let r = reduce_step(&c.v, &c.steps[0].f, &c.steps[0].k, 0).unwrap();
        assert_eq!(r, g);
    }

    #[test]
    fn reduce_rejects_bad_coupling() {
        let v = parse_poly("x1^3", None).unwrap();
        let k = vec![vec![ScalarExpr::from_int(2)]];
        assert!(matches!(reduce_step(&v, &v.neg(), &k, 0), Err(Error::Reduction { .. })));
    }

    #[test]
    fn star_and_diamond_agree() {
        let d = DiamondChain::new(cubic_chain());
        assert!(d.agreement(&[0.7]).unwrap() < 1e-12);
        let ev = d.evaluate_star(&[0.7]).unwrap();
        let again = d.evaluate(&ev.s_physical).unwrap();
        assert!((again.s_star[0] - 0.7).abs() < 1e-14);
    }

    #[test]
    fn two_step_remap_uses_star_coupling() {
        // x^4, then -y^3 coupled with (4 s1)^{1/3}; the second remap sees b != 0.
        let v = parse_poly("x1^4", None).unwrap();
        let mut c = StarChain::new(v.clone());
        c.push(v.neg(), identity(1));
        let k2 = ScalarExpr::var(0).scale(&crate::polyring::int(4)).pow(crate::polyring::Exp::new(1, 3)).unwrap();
        c.push(parse_poly("-x1^3", None).unwrap(), vec![vec![k2]]);
        assert_eq!(c.symbolic().unwrap().degree(), 2);
        let d = DiamondChain::new(c);
        assert!(d.agreement(&[0.7, 1.3]).unwrap() < 1e-12);
    }
}
