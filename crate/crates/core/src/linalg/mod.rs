//! Dense real/complex kernels and measurement synthesis for commuting sets of
//! linear quadrature combinations.
//!
//! Decompositions are backed by `nalgebra`; this module fixes the ordering and
//! sign conventions so results are reproducible bit for bit.

mod givens;
mod measure;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use givens::{givens_factor, GivensFactorization, Rotation};
pub use measure::{measure_general, measure_symmetric, unitary_ofo, MeasurePlan, UnitaryFactors};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Tolerance for claimed orthogonality and reconstructions.
pub const RECON_TOL: f64 = 1e-10;
/// Tolerance on asymmetry before symmetrizing.
pub const SYM_TOL: f64 = 1e-12;

pub fn from_rows(rows: &[Vec<f64>]) -> Mat {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    Mat::from_fn(r, c, |i, j| rows[i][j])
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// `‖QᵀQ − I‖∞` (entrywise max).
pub fn orthogonality_error(q: &Mat) -> f64 {
    let n = q.ncols();
    max_abs(&(q.transpose() * q - Mat::identity(n, n)))
}

/// Flip `v` so that its largest-magnitude component (first on ties) is positive.
fn sign_fix(v: &mut DVector<f64>) -> bool {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() + 1e-14 {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
        true
    } else {
        false
    }
}

/// Extend orthonormal vectors to a basis of R^n by Gram-Schmidt on e_1..e_n.
fn complete_basis(mut vecs: Vec<DVector<f64>>, n: usize) -> Vec<DVector<f64>> {
    let mut k = 0;
    while vecs.len() < n && k < n {
        let mut v = DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for u in &vecs {
                let d = u.dot(&v);
                v -= u * d;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            v /= nv;
            sign_fix(&mut v);
            vecs.push(v);
        }
        k += 1;
    }
    vecs
}

/// `K = O′ᵀ Σ O` with orthogonal `O′` (n′×n′) and `O` (n×n).
#[derive(Clone, Debug)]
pub struct Svd {
    pub o_prime: Mat,
    /// Singular values in descending order, length `min(n′, n)`.
    pub sigma: Vec<f64>,
    pub o: Mat,
}

impl Svd {
    /// The n′×n matrix Σ.
    pub fn sigma_matrix(&self) -> Mat {
        let (r, c) = (self.o_prime.nrows(), self.o.nrows());
        Mat::from_fn(r, c, |i, j| if i == j { self.sigma[i] } else { 0.0 })
    }

    pub fn reconstruct(&self) -> Mat {
        self.o_prime.transpose() * self.sigma_matrix() * &self.o
    }
}

pub fn svd(k: &Mat) -> Svd {
    let (r, c) = k.shape();
    let m = r.min(c);
    if m == 0 {
        return Svd { o_prime: Mat::identity(r, r), sigma: vec![], o: Mat::identity(c, c) };
    }
    let dec = k.clone().svd(true, true);
    let u = dec.u.expect("left vectors requested");
    let vt = dec.v_t.expect("right vectors requested");
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| {
        dec.singular_values[b]
            .partial_cmp(&dec.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut left = Vec::with_capacity(r);
    let mut right = Vec::with_capacity(c);
    let mut sigma = Vec::with_capacity(m);
    for &i in &idx {
        let mut v: DVector<f64> = vt.row(i).transpose().into_owned();
        let mut w: DVector<f64> = u.column(i).into_owned();
        if sign_fix(&mut v) {
            w.neg_mut();
        }
        sigma.push(dec.singular_values[i]);
        right.push(v);
        left.push(w);
    }
    let left = complete_basis(left, r);
    let right = complete_basis(right, c);
    let o_prime = Mat::from_fn(r, r, |i, j| left[i][j]);
    let o = Mat::from_fn(c, c, |i, j| right[i][j]);
    Svd { o_prime, sigma, o }
}

/// Eigen-decomposition `A = Oᵀ diag(λ) O` of a symmetric matrix, eigenvalues
/// descending, each row of `O` sign-fixed.
pub fn sym_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.nrows();
    if n == 0 {
        return (vec![], Mat::zeros(0, 0));
    }
    let sym = (a + a.transpose()) * 0.5;
    let e = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| {
        e.eigenvalues[y]
            .partial_cmp(&e.eigenvalues[x])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.cmp(&y))
    });
    let mut o = Mat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (row, &i) in idx.iter().enumerate() {
        let mut v: DVector<f64> = e.eigenvectors.column(i).into_owned();
        sign_fix(&mut v);
        o.set_row(row, &v.transpose());
        vals.push(e.eigenvalues[i]);
    }
    (vals, o)
}

/// `P(K) = (I + KᵀK)^{-1/2}`.
pub fn p_of_k(k: &Mat) -> Mat {
    let n = k.ncols();
    let g = Mat::identity(n, n) + k.transpose() * k;
    let (vals, o) = sym_eigen(&g);
    let d = Mat::from_diagonal(&DVector::from_iterator(n, vals.iter().map(|l| 1.0 / l.sqrt())));
    o.transpose() * d * o
}
