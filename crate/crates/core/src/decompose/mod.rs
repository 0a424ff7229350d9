//! Chow and Waring decompositions: partition constructions for elementary
//! symmetric polynomials, a weighted variant, a greedy cofactor construction
//! for general coefficients, rank bookkeeping and the `B`/`M`/`D` extraction
//! used by the planners.

mod bmd;
mod chow;
mod partition;
mod ranks;
mod waring;

use std::fmt;

pub use bmd::{d_scaling, extract_bmd, Bmd};
pub use chow::{
    chow_auto, chow_elementary, chow_elementary_weighted, chow_greedy, chow_square_free, elementary,
    CoefficientTable,
};
pub use partition::{p_partitions, q_partitions, Partition};
pub use ranks::{binom, closed_form_crank, grid_search_min_crank, rank_functions, RankReport};
pub use waring::{waring_known, waring_monomial, waring_poly, WaringDecomp};

use crate::error::Result;
use crate::polyring::{Monomial, Poly, Rational, ScalarExpr};

/// Samples used when verifying identities with radical coefficients.
pub const VERIFY_SAMPLES: usize = 20;

/// `Σ_k c_k x_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm(pub Vec<ScalarExpr>);

impl LinearForm {
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![ScalarExpr::zero(); n];
        v[i] = ScalarExpr::one();
        Self(v)
    }

    /// `x_lo + … + x_hi` (zero-based, inclusive).
    pub fn range(n: usize, lo: usize, hi: usize) -> Self {
        let mut v = vec![ScalarExpr::zero(); n];
        for c in v.iter_mut().take(hi + 1).skip(lo) {
            *c = ScalarExpr::one();
        }
        Self(v)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| !self.0[i].is_zero()).collect()
    }

    pub fn to_poly(&self) -> Poly {
        let n = self.0.len();
        let mut p = Poly::zero(n);
        for (i, c) in self.0.iter().enumerate() {
            p.add_term(Monomial::var(n, i), c.clone());
        }
        p
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}

/// `coeff · Π_j (ℓ_j · x)^{n_j}` with a rational, outcome-free `coeff`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChowTerm {
    pub coeff: Rational,
    pub factors: Vec<(LinearForm, u32)>,
}

impl ChowTerm {
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    /// Number of listed factors, the term's contribution to the b-rank.
    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn expand(&self, n: usize) -> Result<Poly> {
        let mut p = Poly::constant(n, ScalarExpr::constant(self.coeff.clone()));
        for (l, e) in &self.factors {
            p = p.mul(&l.to_poly().powi(*e))?;
        }
        Ok(p)
    }
}

/// `A(x) = Σ_i Π_j (m^{(i)}_j · x)^{n^{(i)}_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChowDecomp {
    pub nvars: usize,
    pub terms: Vec<ChowTerm>,
    pub target: Poly,
}

impl ChowDecomp {
    pub fn crank(&self) -> usize {
        self.terms.len()
    }

    pub fn brank(&self) -> usize {
        self.terms.iter().map(ChowTerm::factor_count).sum()
    }

    /// `order · crank`, which equals the b-rank only when every factor is linear.
    pub fn brank_shortcut(&self) -> usize {
        self.target.degree() as usize * self.crank()
    }

    pub fn expand(&self) -> Result<Poly> {
        let mut p = Poly::zero(self.nvars);
        for t in &self.terms {
            p = p.add(&t.expand(self.nvars)?)?;
        }
        Ok(p)
    }

    /// Expansion equals the target, exactly or at sampled positive outcomes.
    pub fn verify(&self) -> bool {
        self.expand().is_ok_and(|e| e.sampled_eq(&self.target, VERIFY_SAMPLES, 0))
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, l: &LinearForm, e: u32) -> fmt::Result {
    let supp = l.support();
    let bare = supp.len() == 1 && l.0[supp[0]].is_one();
    if bare {
        write!(f, "x{}", supp[0] + 1)?;
    } else {
        write!(f, "({l})")?;
    }
    if e > 1 {
        write!(f, "^{e}")?;
    }
    Ok(())
}

impl fmt::Display for ChowTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = Rational::from_integer(1.into());
        if self.coeff != one {
            if self.coeff == -one.clone() {
                write!(f, "-")?;
            } else {
                write!(f, "{}*", ScalarExpr::constant(self.coeff.clone()))?;
            }
        }
        for (i, (l, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write_factor(f, l, *e)?;
        }
        Ok(())
    }
}

impl fmt::Display for ChowDecomp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let s = t.to_string();
            match (i, s.strip_prefix('-')) {
                (0, _) => write!(f, "{s}")?,
                (_, Some(rest)) => write!(f, " - {rest}")?,
                _ => write!(f, " + {s}")?,
            }
        }
        Ok(())
    }
}
