//! Exact polynomial arithmetic over mode variables `x` with coefficients that
//! are symbolic expressions in measurement outcomes `s`.

mod parse;
mod poly;
mod scalar;
mod tensor;

pub use parse::{parse_ast, parse_poly, Ast};
pub use poly::{Coeff, CoeffMatrix, Monomial, NumPoly, Poly, Polynomial};
pub use scalar::{int, rat, Atom, Exp, Rational, ScalarExpr};
pub use tensor::{multinomial, SymTensor};

/// Symbolic matrix with [`ScalarExpr`] entries, row-major.
pub type SMatrix = CoeffMatrix<ScalarExpr>;

/// Identity matrix as symbolic entries.
pub fn identity(n: usize) -> SMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { ScalarExpr::one() } else { ScalarExpr::zero() })
                .collect()
        })
        .collect()
}

/// Symbolic matrix product.
pub fn matmul(a: &SMatrix, b: &SMatrix) -> SMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(ScalarExpr::zero(), |acc, k| {
                        if row[k].is_zero() || b[k][j].is_zero() {
                            acc
                        } else {
                            &acc + &(&row[k] * &b[k][j])
                        }
                    })
                })
                .collect()
        })
        .collect()
}

/// Numeric value of a symbolic matrix at outcome point `s`.
pub fn eval_matrix(m: &SMatrix, s: &[f64]) -> crate::error::Result<Vec<Vec<f64>>> {
    m.iter()
        .map(|row| row.iter().map(|e| e.eval(s)).collect())
        .collect()
}
