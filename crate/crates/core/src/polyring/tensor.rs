//! Symmetric tensor view of homogeneous polynomials.
//!
//! The coefficient of `x^α` in the polynomial equals `multinomial(k; α)` times
//! the tensor entry at any index tuple with multiplicities `α`.

use std::collections::BTreeMap;

use num_traits::One;

use super::poly::{Monomial, Poly};
use super::scalar::{Rational, ScalarExpr};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor {
    order: usize,
    dim: usize,
    entries: BTreeMap<Vec<usize>, ScalarExpr>,
}

/// `k! / Π α_i!`.
pub fn multinomial(alpha: &[u32]) -> Rational {
    let fact = |n: u32| (1..=n).fold(Rational::one(), |a, k| a * Rational::from_integer(k.into()));
    let k: u32 = alpha.iter().sum();
    alpha.iter().fold(fact(k), |acc, &a| acc / fact(a))
}

fn sorted_indices(alpha: &[u32]) -> Vec<usize> {
    alpha
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| std::iter::repeat(i).take(a as usize))
        .collect()
}

impl SymTensor {
    pub fn from_poly(p: &Poly) -> Result<Self> {
        if !p.is_homogeneous() {
            return Err(Error::Dimension("tensor view needs a homogeneous polynomial".into()));
        }
        let order = p.degree() as usize;
        let mut entries = BTreeMap::new();
        for (m, c) in p.terms() {
            entries.insert(sorted_indices(&m.0), c.scale(&multinomial(&m.0).recip()));
        }
        Ok(Self { order, dim: p.nvars(), entries })
    }

    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::zero(self.dim);
        for (idx, c) in &self.entries {
            let mut alpha = vec![0u32; self.dim];
            for &i in idx {
                alpha[i] += 1;
            }
            let w = multinomial(&alpha);
            p.add_term(Monomial(alpha), c.scale(&w));
        }
        p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry at an arbitrary index tuple (symmetrized by sorting).
    pub fn get(&self, idx: &[usize]) -> ScalarExpr {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.entries.get(&key).cloned().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::scalar::rat;

    #[test]
    fn entries_carry_multinomial_weights() {
        // x1 x2^2: tensor entry (0,1,1) = 1/3
        let p = Poly::monomial(vec![1, 2], ScalarExpr::one());
        let t = SymTensor::from_poly(&p).unwrap();
        assert_eq!(t.get(&[1, 0, 1]), ScalarExpr::constant(rat(1, 3)));
        assert_eq!(t.to_poly(), p);
    }
}
