use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::polyring::{NumPoly, Poly, ScalarExpr, SMatrix};

/// `G(x) = xᵀ A x + bᵀ x + c` with symmetric `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadResidual {
    pub a: SMatrix,
    pub b: Vec<ScalarExpr>,
    pub c: ScalarExpr,
}

impl QuadResidual {
    pub fn at(&self, s: &[f64]) -> Result<(Mat, Vec<f64>, f64)> {
        let n = self.b.len();
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = self.a[i][j].eval(s)?;
            }
        }
        let b = self.b.iter().map(|v| v.eval(s)).collect::<Result<Vec<_>>>()?;
        Ok((a, b, self.c.eval(s)?))
    }
}

fn unit(n: usize, i: usize, j: usize) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] += 1;
    e[j] += 1;
    e
}

/// Split a potential of degree at most two; higher terms must vanish identically.
pub fn extract_quadratic(p: &Poly) -> Result<QuadResidual> {
    let high = p.above_degree(2);
    if high.terms().any(|(_, c)| !c.sampled_eq(&ScalarExpr::zero(), 12, 0)) {
        return Err(Error::DegreeTooHigh(high.degree()));
    }
    let n = p.nvars();
    let half = crate::polyring::rat(1, 2);
    let a = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = p.coeff(&unit(n, i, j));
                    if i == j { c } else { c.scale(&half) }
                })
                .collect()
        })
        .collect();
    let b = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            p.coeff(&e)
        })
        .collect();
    Ok(QuadResidual { a, b, c: p.coeff(&vec![0; n]) })
}

/// Numeric counterpart; terms above degree two must be below `tol` relative.
pub fn extract_quadratic_num(p: &NumPoly, tol: f64) -> Result<(Mat, Vec<f64>, f64)> {
    let scale = p.max_abs().max(1.0);
    let high = p.above_degree(2);
    if high.max_abs() > tol * scale {
        return Err(Error::DegreeTooHigh(high.degree()));
    }
    let n = p.nvars();
    let a = Mat::from_fn(n, n, |i, j| {
        let c = p.coeff(&unit(n, i, j));
        if i == j { c } else { c / 2.0 }
    });
    let b = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            p.coeff(&e)
        })
        .collect();
    Ok((a, b, p.coeff(&vec![0; n])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_poly;

    #[test]
    fn splits_quadratic() {
        let p = parse_poly("3*x1^2 + 4*x1*x2 - x2 + 5", None).unwrap();
        let q = extract_quadratic(&p).unwrap();
        let (a, b, c) = q.at(&[]).unwrap();
        assert_eq!(a[(0, 1)], 2.0);
        assert_eq!(a[(0, 0)], 3.0);
        assert_eq!(b, vec![0.0, -1.0]);
        assert_eq!(c, 5.0);
        assert!(matches!(extract_quadratic(&parse_poly("x1^3", None).unwrap()), Err(Error::DegreeTooHigh(3))));
    }
}
