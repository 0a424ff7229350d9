//! Star and diamond calculus for ancilla coupling, nullifier sets, coupling
//! blocks and reduction chains.
//!
//! Coupling matrices are stored `n′ × n`: they map the `n` chain variables to
//! the `n′` ancilla variables.

mod chain;
mod quadratic;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use chain::{reduce_step, ChainStep, DiamondChain, DiamondEvaluation, StarChain};
pub use quadratic::{extract_quadratic, extract_quadratic_num, QuadResidual};

use crate::error::{Error, Result};
use crate::linalg::{p_of_k, svd, to_rows, Mat, Svd};
use crate::polyring::{eval_matrix, Coeff, CoeffMatrix, NumPoly, Poly, Polynomial, SMatrix};

/// `f(x) + g(Kx − s)`.
pub fn star<C: Coeff>(f: &Polynomial<C>, g: &Polynomial<C>, k: &CoeffMatrix<C>, s: &[C]) -> Result<Polynomial<C>> {
    check_dims(f.nvars(), g.nvars(), k.len(), k.first().map_or(f.nvars(), Vec::len), s.len())?;
    let neg: Vec<C> = s.iter().map(Coeff::neg).collect();
    f.add(&g.substitute_affine(k, &neg)?)
}

fn check_dims(n: usize, n_anc: usize, rows: usize, cols: usize, slen: usize) -> Result<()> {
    if rows != n_anc || cols != n || slen != n_anc {
        return Err(Error::Dimension(format!(
            "coupling {rows}x{cols} with {slen} outcomes between {n} and {n_anc} variables"
        )));
    }
    Ok(())
}

/// `f(P(K)x + Kᵀs) + g(K P(K) x − s)`.
pub fn diamond(f: &NumPoly, g: &NumPoly, k: &Mat, s: &[f64]) -> Result<NumPoly> {
    let n = f.nvars();
    check_dims(n, g.nvars(), k.nrows(), if k.nrows() == 0 { n } else { k.ncols() }, s.len())?;
    let p = p_of_k(&Mat::from_fn(k.nrows(), n, |i, j| k[(i, j)]));
    let sv = DVector::from_column_slice(s);
    let kts = k.transpose() * &sv;
    let fa = f.substitute_affine(&to_rows(&p), kts.as_slice())?;
    let kp = k * &p;
    let neg: Vec<f64> = s.iter().map(|v| -v).collect();
    let ga = g.substitute_affine(&to_rows(&kp), &neg)?;
    fa.add(&ga)
}

/// Operators `m_i = p_i − ∂V/∂x_i`; only the x-part `∂V` is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct NullifierSet {
    pub v: Poly,
}

impl NullifierSet {
    pub fn new(v: Poly) -> Self {
        Self { v }
    }

    pub fn nmodes(&self) -> usize {
        self.v.nvars()
    }

    /// `∂V/∂x_i` for each mode.
    pub fn gradients(&self) -> Vec<Poly> {
        self.v.grad()
    }

    /// Mutual commutation reduces to symmetry of the Hessian.
    pub fn commutes(&self) -> bool {
        let g = self.gradients();
        (0..g.len()).all(|i| (0..g.len()).all(|j| g[i].partial(j) == g[j].partial(i)))
    }

    /// Text form `p_i - (∂V/∂x_i)` per mode.
    pub fn display(&self) -> Vec<String> {
        self.gradients()
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let t = g.neg().to_string();
                if t == "0" {
                    format!("p{}", i + 1)
                } else if let Some(rest) = t.strip_prefix('-') {
                    format!("p{} - {}", i + 1, rest)
                } else {
                    format!("p{} + {}", i + 1, t)
                }
            })
            .collect()
    }
}

/// Generalized linear coupling characterized by a symbolic `K(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingBlock {
    pub k: SMatrix,
    pub n_in: usize,
    pub n_anc: usize,
}

/// Numeric beamsplitter settings for one block.
#[derive(Clone, Debug)]
pub struct BlockRealization {
    pub k: Mat,
    pub svd: Svd,
    /// Transmittances and reflectances with `r_i/t_i = λ_i`, `t² + r² = 1`.
    pub t: Vec<f64>,
    pub r: Vec<f64>,
}

impl CouplingBlock {
    pub fn new(k: SMatrix, n_in: usize) -> Self {
        let n_anc = k.len();
        Self { k, n_in, n_anc }
    }

    pub fn numeric(&self, s: &[f64]) -> Result<Mat> {
        let rows = eval_matrix(&self.k, s)?;
        Ok(Mat::from_fn(self.n_anc, self.n_in, |i, j| rows[i][j]))
    }

    pub fn realize(&self, s: &[f64]) -> Result<BlockRealization> {
        Ok(realize_numeric(self.numeric(s)?))
    }
}

pub fn realize_numeric(k: Mat) -> BlockRealization {
    let svd = svd(&k);
    let t: Vec<f64> = svd.sigma.iter().map(|l| 1.0 / (1.0 + l * l).sqrt()).collect();
    let r: Vec<f64> = svd.sigma.iter().zip(&t).map(|(l, t)| l * t).collect();
    BlockRealization { k, svd, t, r }
}

/// Maximum componentwise violation of
/// `P(K) m(x,p;f) + P(K)Kᵀ m(x′,p′;g) = m(x₊,p₊; f◇g)` over random classical
/// points, with `x₊, p₊, s` produced by the explicit beamsplitter relations.
pub fn theorem1_residual(f: &NumPoly, g: &NumPoly, k: &Mat, trials: usize, seed: u64) -> Result<f64> {
    let n = f.nvars();
    let n2 = g.nvars();
    if k.shape() != (n2, n) {
        return Err(Error::Dimension("K must be n′×n".into()));
    }
    let real = realize_numeric(k.clone());
    let (o2, o) = (&real.svd.o_prime, &real.svd.o);
    let m = n.min(n2);
    let tm = Mat::from_fn(n, n, |i, j| if i == j { if i < m { real.t[i] } else { 1.0 } } else { 0.0 });
    let tpm = Mat::from_fn(n2, n2, |i, j| if i == j { if i < m { real.t[i] } else { 1.0 } } else { 0.0 });
    let rm = Mat::from_fn(n2, n, |i, j| if i == j && i < m { real.r[i] } else { 0.0 });
    let p = p_of_k(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let grad_f: Vec<NumPoly> = f.grad();
    let grad_g: Vec<NumPoly> = g.grad();
    for _ in 0..trials {
        let mut vec = |len: usize| DVector::from_fn(len, |_, _| rng.gen_range(-1.5..1.5));
        let (x, pp, x2, p2) = (vec(n), vec(n), vec(n2), vec(n2));
        let x_minus = &rm * o * &x - &tpm * o2 * &x2;
        let x_plus = o.transpose() * (&tm * o * &x + rm.transpose() * o2 * &x2);
        let p_plus = o.transpose() * (&tm * o * &pp + rm.transpose() * o2 * &p2);
        let s = o2.transpose() * &tpm * &x_minus;
        let mf = DVector::from_fn(n, |i, _| pp[i] - grad_f[i].eval_f64(x.as_slice()));
        let mg = DVector::from_fn(n2, |i, _| p2[i] - grad_g[i].eval_f64(x2.as_slice()));
        let lhs = &p * mf + &p * k.transpose() * mg;
        let h = diamond(f, g, k, s.as_slice())?;
        let rhs = DVector::from_fn(n, |i, _| p_plus[i] - h.partial(i).eval_f64(x_plus.as_slice()));
        worst = worst.max((lhs - rhs).amax());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{parse_poly, ScalarExpr};

    #[test]
    fn star_examples() {
        let s1 = ScalarExpr::var(0);
        let f = parse_poly("x1^4", None).unwrap();
        let r = star(&f, &f.neg(), &vec![vec![ScalarExpr::one()]], &[s1.clone()]).unwrap();
        assert_eq!(r.degree(), 3);
        assert_eq!(r.coeff(&[3]), s1.scale(&crate::polyring::int(4)));
        let zero = Poly::zero(1);
        assert_eq!(star(&f, &zero, &vec![vec![ScalarExpr::from_int(3)]], &[s1]).unwrap(), f);
    }

    #[test]
    fn small_example_star_top_part() {
        let v = parse_poly("x1^2*x2^2 + x1^4", None).unwrap();
        let s = [ScalarExpr::var(0), ScalarExpr::var(1)];
        let r = star(&v, &v.neg(), &crate::polyring::identity(2), &s).unwrap();
        let expect = parse_poly("2*s1*x1*x2^2 + 2*s2*x1^2*x2 + 4*s1*x1^3", None).unwrap();
        assert_eq!(r.homogeneous_part(3), expect);
    }

    #[test]
    fn diamond_with_zero_coupling() {
        let f = parse_poly("x1^3 + x1*x2", None).unwrap().at_outcomes(&[]).unwrap();
        let g = parse_poly("x1^2 + 3*x1", None).unwrap().at_outcomes(&[]).unwrap();
        let d = diamond(&f, &g, &Mat::zeros(1, 2), &[0.5]).unwrap();
        let expect = f.add(&NumPoly::constant(2, 0.25 - 1.5)).unwrap();
        assert!(d.sub(&expect).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn theorem1_identity_coupling_trivial() {
        let z = NumPoly::zero(1);
        let r = theorem1_residual(&z, &z, &Mat::identity(1, 1), 5, 0).unwrap();
        assert!(r < 1e-14);
    }

    #[test]
    fn theorem1_rectangular_cubic() {
        let f = parse_poly("x1^3 - 2*x1*x2^2 + x2", None).unwrap().at_outcomes(&[]).unwrap();
        let g = parse_poly("x1^2*x2 + x3^3 - x1*x3", None).unwrap().at_outcomes(&[]).unwrap();
        let k = crate::linalg::from_rows(&[vec![0.3, -1.2], vec![0.8, 0.5], vec![-0.4, 0.9]]);
        assert!(theorem1_residual(&f, &g, &k, 10, 1).unwrap() < 1e-9);
        let kt = k.transpose();
        assert!(theorem1_residual(&g, &f, &kt, 10, 2).unwrap() < 1e-9);
    }

    #[test]
    fn nullifiers_commute() {
        let n = NullifierSet::new(parse_poly("x1*x2^2", None).unwrap());
        assert!(n.commutes());
        assert_eq!(n.display(), vec!["p1 - x2^2".to_string(), "p2 - 2*x1*x2".to_string()]);
    }
}
