use super::{orthogonality_error, Mat, RECON_TOL};
use crate::error::{Error, Result};

/// Two-mode rotation acting on modes `i < j`: identity except
/// `[[cos, -sin], [sin, cos]]` in rows/columns `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    pub i: usize,
    pub j: usize,
    pub theta: f64,
}

impl Rotation {
    pub fn matrix(&self, n: usize) -> Mat {
        let mut m = Mat::identity(n, n);
        let (c, s) = (self.theta.cos(), self.theta.sin());
        m[(self.i, self.i)] = c;
        m[(self.i, self.j)] = -s;
        m[(self.j, self.i)] = s;
        m[(self.j, self.j)] = c;
        m
    }
}

/// `O = R_1 R_2 ⋯ R_m diag(signs)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GivensFactorization {
    pub n: usize,
    pub rotations: Vec<Rotation>,
    /// ±1 per mode; a −1 is a π phase shift.
    pub signs: Vec<f64>,
}

impl GivensFactorization {
    pub fn compose(&self) -> Mat {
        let mut m = Mat::identity(self.n, self.n);
        for r in &self.rotations {
            m *= r.matrix(self.n);
        }
        for (k, s) in self.signs.iter().enumerate() {
            for i in 0..self.n {
                m[(i, k)] *= s;
            }
        }
        m
    }
}

/// Factor an orthogonal matrix into at most n(n−1)/2 two-mode rotations.
pub fn givens_factor(o: &Mat) -> Result<GivensFactorization> {
    let n = o.nrows();
    if o.ncols() != n {
        return Err(Error::Dimension("givens_factor needs a square matrix".into()));
    }
    let dev = orthogonality_error(o);
    if dev > RECON_TOL {
        return Err(Error::NonOrthogonal(dev));
    }
    let mut a = o.clone();
    // G_m ⋯ G_1 O = D, so O = G_1ᵀ ⋯ G_mᵀ D.
    let mut rotations = Vec::new();
    for col in 0..n {
        for row in (col + 1)..n {
            let (x, y) = (a[(col, col)], a[(row, col)]);
            if y.abs() < 1e-15 {
                continue;
            }
            let theta = y.atan2(x);
            let g = Rotation { i: col, j: row, theta };
            a = g.matrix(n).transpose() * a;
            rotations.push(g);
        }
    }
    let signs = (0..n).map(|k| if a[(k, k)] < 0.0 { -1.0 } else { 1.0 }).collect();
    Ok(GivensFactorization { n, rotations, signs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn identity_needs_no_rotations() {
        let f = givens_factor(&Mat::identity(4, 4)).unwrap();
        assert!(f.rotations.is_empty());
    }

    #[test]
    fn reflection_keeps_a_sign() {
        let mut o = Mat::identity(3, 3);
        o[(1, 1)] = -1.0;
        let f = givens_factor(&o).unwrap();
        assert!(max_abs(&(f.compose() - o)) < 1e-15);
    }

    #[test]
    fn rejects_non_orthogonal() {
        assert!(givens_factor(&(Mat::identity(2, 2) * 2.0)).is_err());
    }
}
