use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use nalgebra::DVector;
use num_complex::Complex64;

use super::{max_abs, orthogonality_error, sym_eigen, CMat, Mat, RECON_TOL, SYM_TOL};
use crate::error::{Error, Result};

/// Eigenvalues beyond this magnitude flag a near-singular homodyne setting.
const NEAR_SINGULAR: f64 = 1e12;

/// Passive network, homodyne angles and classical postprocessing.
///
/// Mode `i` after the network is measured in the quadrature
/// `p cos θ_i + x sin θ_i`; the requested operators are `q = P y`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurePlan {
    pub network: Mat,
    pub theta: Vec<f64>,
    pub phi: Option<Vec<f64>>,
    pub postprocess: Mat,
    pub diagnostics: Vec<String>,
}

impl MeasurePlan {
    /// Coefficient matrices `(B, C)` of `q = B p + C x` realized by the plan.
    pub fn implied(&self) -> (Mat, Mat) {
        let n = self.theta.len();
        let cos = Mat::from_diagonal(&DVector::from_iterator(n, self.theta.iter().map(|t| t.cos())));
        let sin = Mat::from_diagonal(&DVector::from_iterator(n, self.theta.iter().map(|t| t.sin())));
        (&self.postprocess * cos * &self.network, &self.postprocess * sin * &self.network)
    }
}

/// Plan measuring `p + A x` for symmetric `A = Oᵀ diag(tan θ) O`.
pub fn measure_symmetric(a: &Mat) -> Result<MeasurePlan> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension("measure_symmetric needs a square matrix".into()));
    }
    let asym = max_abs(&(a - a.transpose()));
    if asym > SYM_TOL * max_abs(a).max(1.0) {
        return Err(Error::Dimension(format!("matrix is not symmetric (deviation {asym:e})")));
    }
    let (vals, o) = sym_eigen(a);
    let mut diagnostics = Vec::new();
    for (i, l) in vals.iter().enumerate() {
        if l.abs() > NEAR_SINGULAR {
            diagnostics.push(format!("eigenvalue {i} = {l:e}: homodyne angle near ±π/2"));
        }
    }
    let theta: Vec<f64> = vals.iter().map(|l| l.atan()).collect();
    let inv_cos = Mat::from_diagonal(&DVector::from_iterator(n, theta.iter().map(|t| 1.0 / t.cos())));
    let postprocess = o.transpose() * inv_cos;
    Ok(MeasurePlan { network: o, theta, phi: None, postprocess, diagnostics })
}

/// `U = O″ Φ O` with real orthogonal `O″`, `O` and diagonal unit-modulus `Φ`.
#[derive(Clone, Debug)]
pub struct UnitaryFactors {
    pub o2: Mat,
    pub phi: Vec<f64>,
    pub o: Mat,
}

impl UnitaryFactors {
    pub fn reconstruct(&self) -> CMat {
        let n = self.phi.len();
        let o2 = self.o2.map(|v| Complex64::new(v, 0.0));
        let o = self.o.map(|v| Complex64::new(v, 0.0));
        let ph = CMat::from_diagonal(&DVector::from_iterator(n, self.phi.iter().map(|p| Complex64::from_polar(1.0, *p))));
        o2 * ph * o
    }
}

fn cmax_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

pub fn unitary_ofo(u: &CMat) -> Result<UnitaryFactors> {
    let n = u.nrows();
    let dev = cmax_abs(&(u.adjoint() * u - CMat::identity(n, n)));
    if u.ncols() != n || dev > RECON_TOL {
        return Err(Error::NonUnitary(dev));
    }
    let s = u * u.transpose();
    let x = s.map(|v| v.re);
    let y = s.map(|v| v.im);
    // X and Y commute because S is symmetric and unitary; a generic
    // combination separates their joint eigenspaces.
    let mut best: Option<(f64, UnitaryFactors)> = None;
    for mu in [0.618_033_988_749_894_9, 1.324_717_957_244_746, -0.754_877_666_246_692_7, 2.718_281_828_459_045] {
        let (_, rows) = sym_eigen(&(&x + &y * mu));
        let o2 = rows.transpose();
        let d = o2.map(|v| Complex64::new(v, 0.0)).transpose() * &s * o2.map(|v| Complex64::new(v, 0.0));
        let phi: Vec<f64> = (0..n)
            .map(|i| {
                let mut p = d[(i, i)].arg() / 2.0;
                if p <= -FRAC_PI_2 {
                    p += PI;
                }
                p
            })
            .collect();
        let inv_phase = CMat::from_diagonal(&DVector::from_iterator(n, phi.iter().map(|p| Complex64::from_polar(1.0, -p))));
        let oc = inv_phase * o2.map(|v| Complex64::new(v, 0.0)).transpose() * u;
        let o = oc.map(|v| v.re);
        let f = UnitaryFactors { o2, phi, o };
        let err = cmax_abs(&(f.reconstruct() - u));
        if err < 1e-11 {
            return Ok(f);
        }
        if best.as_ref().map_or(true, |(e, _)| err < *e) {
            best = Some((err, f));
        }
    }
    Ok(best.expect("at least one attempt").1)
}

/// Plan measuring `q = B p + C x` for a commuting set, i.e. `B Cᵀ` symmetric.
pub fn measure_general(b: &Mat, c: &Mat) -> Result<MeasurePlan> {
    let n = b.nrows();
    if b.shape() != (n, n) || c.shape() != (n, n) {
        return Err(Error::Dimension("measure_general needs square B and C of equal size".into()));
    }
    let comm = max_abs(&(b * c.transpose() - c * b.transpose()));
    let scale = max_abs(b).max(max_abs(c)).max(1.0);
    if comm > RECON_TOL * scale * scale {
        return Err(Error::NonCommuting(comm));
    }
    // A = (C − iB)/√2 so that q = A a + Ā a† with a = (x + ip)/√2.
    let a = CMat::from_fn(n, n, |i, j| Complex64::new(c[(i, j)], -b[(i, j)]) / SQRT_2);
    let aad = (&a * a.adjoint()).map(|v| v.re);
    let (vals, rows) = sym_eigen(&aad);
    let o1 = rows.transpose();
    let d1: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
    let tol = 1e-12 * d1.first().copied().unwrap_or(0.0).max(1.0);
    // W = D1⁻¹ O1ᵀ A on the nonzero singular directions, completed to a unitary.
    let proj = o1.map(|v| Complex64::new(v, 0.0)).transpose() * &a;
    let mut w_rows: Vec<DVector<Complex64>> = Vec::new();
    for i in 0..n {
        if d1[i] > tol {
            w_rows.push(proj.row(i).transpose() / Complex64::new(d1[i], 0.0));
        }
    }
    let rank = w_rows.len();
    let mut k = 0;
    while w_rows.len() < n {
        let mut v = DVector::from_fn(n, |i, _| if i == k { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        for _ in 0..2 {
            for u in &w_rows {
                let d = u.conjugate().dot(&v);
                v -= u * d;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            w_rows.push(v / Complex64::new(nv, 0.0));
        }
        k += 1;
    }
    let mut w = CMat::zeros(n, n);
    // Rows for zero singular values sit where D1 is zero; order follows sym_eigen.
    let mut nz = w_rows[..rank].iter();
    let mut z = w_rows[rank..].iter();
    for i in 0..n {
        let row = if d1[i] > tol { nz.next() } else { z.next() }.expect("row count");
        w.set_row(i, &row.transpose());
    }
    let f = unitary_ofo(&w)?;
    let mut theta = Vec::with_capacity(n);
    let mut flip = Vec::with_capacity(n);
    for p in &f.phi {
        let mut t = p + FRAC_PI_2;
        let mut s = 1.0;
        if t > FRAC_PI_2 {
            t -= PI;
            s = -1.0;
        }
        theta.push(t);
        flip.push(s);
    }
    let d1m = Mat::from_diagonal(&DVector::from_vec(d1));
    let flipm = Mat::from_diagonal(&DVector::from_vec(flip));
    let postprocess = o1 * d1m * &f.o2 * flipm * SQRT_2;
    let mut diagnostics = Vec::new();
    if rank < n {
        diagnostics.push(format!("operator set has rank {rank} < {n}; completed with free directions"));
    }
    if orthogonality_error(&f.o) > RECON_TOL {
        diagnostics.push("network orthogonality above tolerance".into());
    }
    Ok(MeasurePlan { network: f.o, theta, phi: Some(f.phi), postprocess, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_rows;

    #[test]
    fn zero_and_identity() {
        let p = measure_symmetric(&Mat::zeros(2, 2)).unwrap();
        assert!(p.theta.iter().all(|t| *t == 0.0));
        let p = measure_symmetric(&Mat::identity(3, 3)).unwrap();
        assert!(p.theta.iter().all(|t| (t - PI / 4.0).abs() < 1e-14));
    }

    #[test]
    fn symmetric_reconstruction() {
        let a = from_rows(&[vec![0.0, SQRT_2], vec![SQRT_2, SQRT_2]]);
        let p = measure_symmetric(&a).unwrap();
        let tan = Mat::from_diagonal(&DVector::from_iterator(2, p.theta.iter().map(|t| t.tan())));
        assert!(max_abs(&(p.network.transpose() * tan * &p.network - &a)) < 1e-12);
        let (bq, cq) = p.implied();
        assert!(max_abs(&(bq - Mat::identity(2, 2))) < 1e-12);
        assert!(max_abs(&(cq - &a)) < 1e-12);
    }

    #[test]
    fn general_measures_momenta() {
        let p = measure_general(&Mat::identity(2, 2), &Mat::zeros(2, 2)).unwrap();
        let (bq, cq) = p.implied();
        assert!(max_abs(&(bq - Mat::identity(2, 2))) < 1e-12);
        assert!(max_abs(&cq) < 1e-12);
    }

    #[test]
    fn rejects_noncommuting() {
        let b = Mat::identity(2, 2);
        let c = from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(measure_general(&b, &c), Err(Error::NonCommuting(_))));
    }

    #[test]
    fn diagonal_phases() {
        let u = CMat::from_diagonal(&DVector::from_vec(vec![Complex64::from_polar(1.0, 0.3), Complex64::from_polar(1.0, -1.1)]));
        let f = unitary_ofo(&u).unwrap();
        assert!(cmax_abs(&(f.reconstruct() - &u)) < 1e-12);
    }
}
