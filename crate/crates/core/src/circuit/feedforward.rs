use super::CircuitIR;
use crate::coupling::{extract_quadratic_num, realize_numeric, DiamondChain, DiamondEvaluation};
use crate::error::{Error, Result};
use crate::linalg::{givens_factor, measure_symmetric, GivensFactorization, Mat, MeasurePlan};
use crate::strategies::SignMode;

/// Optical settings of one coupling block.
#[derive(Clone, Debug)]
pub struct ResolvedBlock {
    pub k_prime: Mat,
    pub sigma: Vec<f64>,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    /// Rotations of `O` (input side) and `O′` (ancilla side).
    pub o: GivensFactorization,
    pub o_prime: GivensFactorization,
}

/// Settings of the last measurement.
#[derive(Clone, Debug)]
pub struct ResolvedFinal {
    /// Measured operators are `p + A x`.
    pub a: Mat,
    pub offset: Vec<f64>,
    pub plan: MeasurePlan,
    pub network: GivensFactorization,
    /// `A_m^{-T}`, mapping the final nullifiers back to `m(V)`.
    pub back: Mat,
}

#[derive(Clone, Debug)]
pub struct ResolvedSettings {
    pub s_physical: Vec<f64>,
    pub s_star: Vec<f64>,
    pub blocks: Vec<ResolvedBlock>,
    pub last: ResolvedFinal,
    pub trace: DiamondEvaluation,
}

fn sign_check(ir: &CircuitIR, ev: &DiamondEvaluation) -> Result<()> {
    for b in &ir.blocks {
        if b.sign_sensitive && ir.metadata.sign_mode == SignMode::AssumePositive {
            if let Some(&i) = b.depends_on.iter().find(|&&i| ev.s_star[i] <= 0.0) {
                return Err(Error::Eval(format!(
                    "outcome s{} = {} is not positive but block {} takes an even root of it",
                    i + 1,
                    ev.s_star[i],
                    b.step
                )));
            }
        }
        if ev.k_prime.get(b.step - 1).is_some_and(|k| k.iter().any(|v| !v.is_finite())) {
            return Err(Error::Eval(format!("coupling of block {} is not real at these outcomes", b.step)));
        }
    }
    Ok(())
}

/// Turn a physical outcome record into beamsplitter, phase and homodyne settings.
pub fn resolve_feedforward(ir: &CircuitIR, s_physical: &[f64]) -> Result<ResolvedSettings> {
    let chain = DiamondChain::new(ir.star_chain());
    let ev = chain.evaluate(s_physical)?;
    sign_check(ir, &ev)?;
    let mut blocks = Vec::with_capacity(ev.k_prime.len());
    for kp in &ev.k_prime {
        let real = realize_numeric(kp.clone());
        blocks.push(ResolvedBlock {
            o: givens_factor(&real.svd.o)?,
            o_prime: givens_factor(&real.svd.o_prime)?,
            k_prime: real.k,
            sigma: real.svd.sigma,
            t: real.t,
            r: real.r,
        });
    }
    let (q, c, _) = extract_quadratic_num(&ev.poly, ir.metadata.tolerance)?;
    let a = q * -2.0;
    let plan = measure_symmetric(&a)?;
    let network = givens_factor(&plan.network)?;
    let back = ev
        .a
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Eval("accumulated input squeezing is singular".into()))?;
    Ok(ResolvedSettings {
        s_physical: ev.s_physical.clone(),
        s_star: ev.s_star.clone(),
        blocks,
        last: ResolvedFinal { a, offset: c, plan, network, back },
        trace: ev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_circuit;
    use crate::linalg::max_abs;
    use crate::strategies::{plan, GateSpec, Strategy};

    fn ir(g: GateSpec, s: Strategy) -> CircuitIR {
        build_circuit(&plan(&g, s).unwrap().verified(20, 0, 1e-8).unwrap()).unwrap()
    }

    #[test]
    fn cubic_qnd_matrix() {
        // With K = I the measured matrix is -√2 [[0, σ2], [σ2, σ1]] for σ = √2 s.
        let c = ir(GateSpec::cubic_qnd(), Strategy::I);
        let s = [0.8, -1.3];
        let r = resolve_feedforward(&c, &s).unwrap();
        let sig: Vec<f64> = s.iter().map(|v| v * 2f64.sqrt()).collect();
        let want = Mat::from_row_slice(2, 2, &[0.0, sig[1], sig[1], sig[0]]) * -(2f64.sqrt());
        assert!(max_abs(&(&r.last.a - want)) < 1e-12, "{}", r.last.a);
        for b in &r.blocks {
            assert!(b.t.iter().chain(&b.r).all(|v| (v - 0.5f64.sqrt()).abs() < 1e-12));
        }
    }

    #[test]
    fn zero_matrix_gives_trivial_angles() {
        let c = ir(GateSpec::from_text("0", Some(2)).unwrap(), Strategy::I);
        let r = resolve_feedforward(&c, &[]).unwrap();
        assert!(r.last.plan.theta.iter().all(|t| *t == 0.0));
        assert!(max_abs(&(r.last.plan.network.clone() - Mat::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn deterministic_settings() {
        let c = ir(GateSpec::toffoli(), Strategy::III);
        let s = [0.9, 1.1, 1.4, 0.7];
        let a = resolve_feedforward(&c, &s).unwrap();
        let b = resolve_feedforward(&c, &s).unwrap();
        assert_eq!(a.last.plan.theta, b.last.plan.theta);
        assert_eq!(a.last.a, b.last.a);
    }

    #[test]
    fn negative_outcome_rejected_for_even_root() {
        let c = ir(GateSpec::from_text("x1^5", None).unwrap(), Strategy::III);
        assert!(c.blocks[1].sign_sensitive);
        assert!(resolve_feedforward(&c, &[-0.5, 0.3, 0.2]).is_err());
    }
}
