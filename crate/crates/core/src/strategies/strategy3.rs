//! Strategy III: Waring-decompose the potential and reduce every power
//! `c (ℓ·x)^e` along its own direction with single-mode ancillas `±y^k`.

use super::{check_order, GateSpec, KProvenance, Plan, PlanStep, SignMode, Strategy};
use crate::decompose::binom;
use crate::error::{Error, Result};
use crate::polyring::{int, Exp, Monomial, Poly, ScalarExpr};

/// `T(u) = Σ_i t_i u^i` tracked along direction `ℓ`.
struct Track {
    direction: Vec<ScalarExpr>,
    coeffs: Vec<ScalarExpr>,
}

impl Track {
    fn coeff(&self, k: u32) -> ScalarExpr {
        self.coeffs.get(k as usize).cloned().unwrap_or_else(ScalarExpr::zero)
    }

    /// `T += ε (d u − s)^k`.
    fn absorb(&mut self, eps: i64, d: &ScalarExpr, s: &ScalarExpr, k: u32) {
        if self.coeffs.len() <= k as usize {
            self.coeffs.resize(k as usize + 1, ScalarExpr::zero());
        }
        for i in 0..=k {
            let c = binom(k as i64, i as i64) as i64 * eps * if (k - i) % 2 == 0 { 1 } else { -1 };
            let term = (&d.powi(i) * &s.powi(k - i)).scale(&int(c));
            self.coeffs[i as usize] = &self.coeffs[i as usize] + &term;
        }
    }
}

/// Sign of an outcome-dependent coefficient at the all-ones outcome record.
fn sample_sign(c: &ScalarExpr) -> Result<i64> {
    let vars = c.max_var().map_or(0, |v| v + 1);
    let v = c.eval(&vec![1.0; vars])?;
    if v == 0.0 {
        return Err(Error::Verification(format!("coefficient {c} vanishes at the sample point")));
    }
    Ok(if v > 0.0 { 1 } else { -1 })
}

/// `f_j = Σ_τ ε_τ y_τ^k` and `K_j = D_j M` with `D_j = diag(d_τ)` chosen so
/// that `ε_τ d_τ^k` cancels the order-`k` coefficient of every tracked power.
pub fn plan_strategy3(gate: &GateSpec) -> Result<Plan> {
    let order = check_order(gate)?;
    let mut tracks = Vec::new();
    let mut formula_count = 0;
    for k in 3..=order {
        if gate.v.homogeneous_part(k).is_zero() {
            continue;
        }
        let w = gate.waring_part(k)?;
        formula_count += (k as usize - 2) * w.rank();
        for (c, l) in w.terms {
            let mut coeffs = vec![ScalarExpr::zero(); k as usize + 1];
            coeffs[k as usize] = c;
            tracks.push(Track { direction: l.0, coeffs });
        }
    }
    let mut steps = Vec::new();
    let mut offset = 0;
    for k in (3..=order).rev() {
        let active: Vec<usize> = (0..tracks.len()).filter(|&t| !tracks[t].coeff(k).is_zero()).collect();
        if active.is_empty() {
            continue;
        }
        let r = active.len();
        let mut f = Poly::zero(r);
        let mut kmat = Vec::with_capacity(r);
        let mut scale = Vec::with_capacity(r);
        let mut dirs = Vec::with_capacity(r);
        let mut sign_sensitive = false;
        for (slot, &t) in active.iter().enumerate() {
            let c = tracks[t].coeff(k);
            let (eps, d) = if k % 2 == 1 {
                (-1, c.pow(Exp::new(1, k as i64))?)
            } else {
                let eps = -match c.as_rational() {
                    Some(q) => if q > int(0) { 1 } else { -1 },
                    None => sample_sign(&c)?,
                };
                sign_sensitive |= !c.is_s_free();
                (eps, c.scale(&int(-eps)).pow(Exp::new(1, k as i64))?)
            };
            let mut mono = vec![0; r];
            mono[slot] = k;
            f.add_term(Monomial(mono), ScalarExpr::from_int(eps));
            kmat.push(tracks[t].direction.iter().map(|x| &d * x).collect());
            let s = ScalarExpr::var(offset + slot);
            tracks[t].absorb(eps, &d, &s, k);
            scale.push(d);
            dirs.push(tracks[t].direction.clone());
        }
        offset += r;
        steps.push(PlanStep {
            f,
            k: kmat,
            provenance: KProvenance::WaringDM,
            sign_sensitive,
            scaling: Some((scale, dirs)),
        });
    }
    Ok(Plan { strategy: Strategy::III, gate: gate.clone(), steps, sign_mode: SignMode::AssumePositive, formula_count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{matmul, SMatrix};

    #[test]
    fn worked_examples() {
        let cases = [(GateSpec::cubic_qnd(), 3), (GateSpec::toffoli(), 4), (GateSpec::small_example(), 6)];
        for (g, want) in cases {
            let p = plan_strategy3(&g).unwrap();
            assert_eq!(p.non_gaussian(), want, "{}", g.name);
            assert!(p.verify(20, 0, 1e-8).unwrap().passed, "{}", g.name);
        }
    }

    #[test]
    fn cnz_counts() {
        for order in 3..=6 {
            let p = plan_strategy3(&GateSpec::cnz(order).unwrap()).unwrap();
            assert_eq!(p.non_gaussian(), (order - 2) << (order - 1));
            assert_eq!(p.formula_count, p.non_gaussian());
        }
    }

    #[test]
    fn coupling_is_diagonal_times_fixed_directions() {
        let p = plan_strategy3(&GateSpec::cnz(4).unwrap()).unwrap();
        let first = p.steps[0].scaling.as_ref().unwrap().1.clone();
        for st in &p.steps {
            let (d, m) = st.scaling.as_ref().unwrap();
            assert_eq!(m, &first);
            let dm: SMatrix = matmul(
                &(0..d.len())
                    .map(|r| (0..d.len()).map(|c| if r == c { d[r].clone() } else { ScalarExpr::zero() }).collect())
                    .collect(),
                m,
            );
            assert_eq!(dm, st.k);
        }
    }

    #[test]
    fn quintic_single_mode() {
        let g = GateSpec::from_text("x1^5", None).unwrap();
        let p = plan_strategy3(&g).unwrap();
        assert_eq!(p.non_gaussian(), 3);
        assert!(p.verify(20, 1, 1e-8).unwrap().passed);
        let dup = p.with_sign_mode(SignMode::Duplicate);
        assert_eq!(dup.non_gaussian(), 4);
        assert_eq!(dup.duplicate_reference(), Some(4));
    }
}
