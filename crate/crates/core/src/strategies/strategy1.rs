//! Strategy I: Chow-decompose the current top-order part at every step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_order, require_s_free, GateSpec, KProvenance, Plan, PlanStep, SignMode, Strategy};
use crate::coupling::{reduce_step, star};
use crate::decompose::{chow_auto, extract_bmd};
use crate::error::{Error, Result};
use crate::polyring::{identity, int, Poly, SMatrix, ScalarExpr};

/// Per-step ancilla dimensions of a Strategy I chain.
struct Construction {
    steps: Vec<PlanStep>,
    dims: Vec<usize>,
}

/// Outcomes used while building: symbols, or fixed generic integers when only
/// the support of each top part matters.
enum Outcomes {
    Symbolic,
    Generic(ChaCha8Rng),
}

impl Outcomes {
    fn step(&mut self, vj: &Poly, f: &Poly, k: &SMatrix, offset: usize) -> Result<Poly> {
        match self {
            Outcomes::Symbolic => reduce_step(vj, f, k, offset),
            Outcomes::Generic(rng) => {
                let s: Vec<ScalarExpr> = (0..f.nvars()).map(|_| ScalarExpr::constant(int(rng.gen_range(2..=97)))).collect();
                let out = star(vj, f, k, &s)?;
                let top = out.above_degree(vj.degree().saturating_sub(1));
                if !top.is_zero() {
                    return Err(Error::Reduction { residual: top.to_string() });
                }
                Ok(out)
            }
        }
    }
}

fn construct(gate: &GateSpec, mut outcomes: Outcomes) -> Result<Construction> {
    let order = check_order(gate)?;
    let n = gate.n;
    let f1 = gate.v.homogeneous_part(order).neg();
    let k1 = identity(n);
    let mut vj = outcomes.step(&gate.v, &f1, &k1, 0)?;
    let mut offset = n;
    let mut dims = vec![n];
    let mut steps = vec![PlanStep {
        f: f1,
        k: k1,
        provenance: KProvenance::Identity,
        sign_sensitive: false,
        scaling: None,
    }];
    for deg in (3..order).rev() {
        let top = vj.homogeneous_part(deg);
        if top.is_zero() {
            continue;
        }
        let bmd = extract_bmd(&chow_auto(&top.neg())?)?;
        require_s_free(&bmd.b)?;
        vj = outcomes.step(&vj, &bmd.b, &bmd.m, offset)?;
        offset += bmd.b.nvars();
        dims.push(bmd.b.nvars());
        steps.push(PlanStep {
            f: bmd.b,
            k: bmd.m,
            provenance: KProvenance::ChowBM,
            sign_sensitive: false,
            scaling: None,
        });
    }
    if vj.degree() > 2 {
        return Err(Error::Reduction { residual: vj.above_degree(2).to_string() });
    }
    Ok(Construction { steps, dims })
}

/// `f_1 = −V^{(N)}` with `K_1 = I`, then `f_k = B`, `K_k = M` from the Chow
/// decomposition of the negated top-order part of the running potential.
pub fn plan_strategy1(gate: &GateSpec) -> Result<Plan> {
    let c = construct(gate, Outcomes::Symbolic)?;
    Ok(Plan {
        strategy: Strategy::I,
        gate: gate.clone(),
        formula_count: c.dims.iter().sum(),
        steps: c.steps,
        sign_mode: SignMode::AssumePositive,
    })
}

/// Per-step dimensions of Strategy I with the outcomes fixed to generic
/// integers, which leaves the support of every top part unchanged for
/// square-free targets and keeps the arithmetic rational.
pub fn strategy1_counts(gate: &GateSpec, seed: u64) -> Result<Vec<usize>> {
    Ok(construct(gate, Outcomes::Generic(ChaCha8Rng::seed_from_u64(seed)))?.dims)
}
