use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::value::RawValue;

use super::{float17, resolve_feedforward, CircuitIR};
use crate::coupling::{diamond, theorem1_residual};
use crate::error::Result;
use crate::linalg::{max_abs, Mat};
use crate::polyring::{Exp, Poly, ScalarExpr};
use crate::strategies::positive_outcomes;

/// Residuals of an end-to-end circuit check.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Largest relative coefficient above degree two over the sampled records.
    pub chain_residual: f64,
    /// Largest relative star/diamond disagreement.
    pub diamond_gap: f64,
    /// Largest nullifier-identity violation per block.
    pub theorem1: Vec<f64>,
    /// Largest `‖implied − requested‖` of the final measurement.
    pub final_stage: f64,
    /// Symbolic push-through of the squeezed-ancilla wrapper.
    pub wrapper: bool,
    pub failures: Vec<String>,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    passed: bool,
    trials: usize,
    seed: u64,
    tolerance: Box<RawValue>,
    chain_residual: Box<RawValue>,
    diamond_gap: Box<RawValue>,
    theorem1: Vec<Box<RawValue>>,
    final_stage: Box<RawValue>,
    wrapper: bool,
    failures: &'a [String],
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// JSON report; floats carry 17 significant digits.
    pub fn to_json(&self) -> String {
        let file = ReportFile {
            passed: self.passed(),
            trials: self.trials,
            seed: self.seed,
            tolerance: float17(self.tolerance),
            chain_residual: float17(self.chain_residual),
            diamond_gap: float17(self.diamond_gap),
            theorem1: self.theorem1.iter().map(|v| float17(*v)).collect(),
            final_stage: float17(self.final_stage),
            wrapper: self.wrapper,
            failures: &self.failures,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("plain data");
        s.push('\n');
        s
    }
}

/// Push the wrapper through symbolically with ideal ancillas and compare with
/// `x_out = x/√2`, `p_out = √2 p − √2 ∂_x V(x/√2)`.
pub fn wrapper_check(v: &Poly) -> Result<bool> {
    let n = v.nvars();
    let w = 4 * n;
    let (xin, pin, xs, ps) = (0, n, 2 * n, 3 * n);
    let half = ScalarExpr::from_int(2).pow(Exp::new(-1, 2))?;
    let root2 = ScalarExpr::from_int(2).pow(Exp::new(1, 2))?;
    let lin = |terms: &[(usize, ScalarExpr)]| {
        let mut p = Poly::zero(w);
        for (i, c) in terms {
            p = p.add(&Poly::var(w, *i).scale(c)).expect("same arity");
        }
        p
    };
    let neg_half = -&half;
    // Half beamsplitter between input i and ancilla i.
    let x_m: Vec<Poly> = (0..n).map(|i| lin(&[(xin + i, half.clone()), (xs + i, neg_half.clone())])).collect();
    let p_m: Vec<Poly> = (0..n).map(|i| lin(&[(pin + i, half.clone()), (ps + i, neg_half.clone())])).collect();
    let x_out: Vec<Poly> = (0..n).map(|i| lin(&[(xin + i, half.clone()), (xs + i, half.clone())])).collect();
    let p_out_pre: Vec<Poly> = (0..n).map(|i| lin(&[(pin + i, half.clone()), (ps + i, half.clone())])).collect();
    let rows = |polys: &[Poly]| -> Vec<Vec<ScalarExpr>> {
        polys.iter().map(|p| (0..w).map(|j| p.coeff(&unit(w, j))).collect()).collect()
    };
    let zero_b = vec![ScalarExpr::zero(); w];
    let zero_n = vec![ScalarExpr::zero(); n];
    // Ideal x-eigenstate ancillas: x_s = 0.
    let kill_xs: Vec<Vec<ScalarExpr>> = (0..w)
        .map(|i| (0..w).map(|j| if i == j && !(xs..xs + n).contains(&i) { ScalarExpr::one() } else { ScalarExpr::zero() }).collect())
        .collect();
    let scaled_in: Vec<Poly> = (0..n).map(|i| lin(&[(xin + i, half.clone())])).collect();
    let v_scaled = v.substitute_affine(&rows(&scaled_in), &zero_n)?;
    for i in 0..n {
        let m = p_m[i].sub(&v.partial(i).substitute_affine(&rows(&x_m), &zero_n)?)?;
        let p_out = p_out_pre[i].add(&m)?.substitute_affine(&kill_xs, &zero_b)?;
        let want = lin(&[(pin + i, root2.clone())]).sub(&v_scaled.partial(xin + i).scale(&root2))?;
        let x_ok = x_out[i].substitute_affine(&kill_xs, &zero_b)? == scaled_in[i];
        if !x_ok || !(p_out == want || p_out.sampled_eq(&want, 8, 0)) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

/// Chain, per-block nullifier identity, final measurement and wrapper checks
/// at `trials` seeded positive outcome records.
pub fn verify_circuit(ir: &CircuitIR, trials: usize, seed: u64, tolerance: f64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = ir.star_chain();
    let diamond_chain = crate::coupling::DiamondChain::new(chain.clone());
    let mut report = VerifyReport {
        trials,
        seed,
        tolerance,
        chain_residual: 0.0,
        diamond_gap: 0.0,
        theorem1: vec![0.0; ir.blocks.len()],
        final_stage: 0.0,
        wrapper: wrapper_check(&ir.gate.v)?,
        failures: Vec::new(),
    };
    for trial in 0..trials {
        let s = positive_outcomes(&mut rng, ir.outcome_count());
        let g = chain.at(&s)?;
        report.chain_residual = report.chain_residual.max(g.above_degree(2).max_abs() / g.max_abs().max(1.0));
        report.diamond_gap = report.diamond_gap.max(diamond_chain.agreement(&s)?);
        let settings = match diamond_chain.evaluate_star(&s).and_then(|ev| resolve_feedforward(ir, &ev.s_physical)) {
            Ok(r) => r,
            Err(e) => {
                report.failures.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        let mut running = ir.gate.v.at_outcomes(&[])?;
        for (i, (a, kp)) in ir.ancillas.iter().zip(&settings.trace.k_prime).enumerate() {
            let f = a.f.at_outcomes(&[])?;
            let res = theorem1_residual(&running, &f, kp, 4, seed.wrapping_add(trial as u64))?;
            report.theorem1[i] = report.theorem1[i].max(res);
            let b = &ir.blocks[i];
            running = diamond(&running, &f, kp, &settings.s_physical[b.outcome_offset..b.outcome_offset + b.n_anc])?;
        }
        let (bm, cm) = settings.last.plan.implied();
        let n = ir.gate.n;
        let dev = max_abs(&(bm - Mat::identity(n, n))).max(max_abs(&(cm - &settings.last.a)));
        report.final_stage = report.final_stage.max(dev / max_abs(&settings.last.a).max(1.0));
    }
    if report.chain_residual >= tolerance {
        report.failures.push(format!("chain residual {:e}", report.chain_residual));
    }
    if report.diamond_gap >= tolerance {
        report.failures.push(format!("star/diamond gap {:e}", report.diamond_gap));
    }
    for (i, r) in report.theorem1.iter().enumerate() {
        if *r >= tolerance {
            report.failures.push(format!("block {} nullifier identity residual {r:e}", i + 1));
        }
    }
    if report.final_stage >= tolerance {
        report.failures.push(format!("final measurement residual {:e}", report.final_stage));
    }
    if !report.wrapper {
        report.failures.push("wrapper push-through differs from the squeezed gate".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_circuit;
    use crate::polyring::parse_poly;
    use crate::strategies::{plan, GateSpec, Strategy};

    #[test]
    fn wrapper_matches_squeezed_gate() {
        assert!(wrapper_check(&parse_poly("x1*x2^2 + x1^3", None).unwrap()).unwrap());
        assert!(wrapper_check(&Poly::zero(2)).unwrap());
    }

    #[test]
    fn toffoli_circuit_residuals() {
        for s in [Strategy::I, Strategy::III] {
            let ir = build_circuit(&plan(&GateSpec::toffoli(), s).unwrap().verified(20, 0, 1e-8).unwrap()).unwrap();
            let r = verify_circuit(&ir, 10, 3, 1e-9).unwrap();
            assert!(r.passed(), "{:?}", r);
        }
    }

    #[test]
    fn small_example_strategy2_circuit() {
        let g = GateSpec::small_example();
        let ir = build_circuit(&plan(&g, Strategy::II).unwrap().verified(20, 0, 1e-8).unwrap()).unwrap();
        let r = verify_circuit(&ir, 20, 0, 1e-8).unwrap();
        assert!(r.passed(), "{:?}", r);
        assert!(r.chain_residual < 1e-8);
    }
}
