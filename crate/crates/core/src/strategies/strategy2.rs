//! Strategy II: Chow-decompose each ancilla potential once and build every
//! later potential from contractions of those decompositions.

use super::{check_order, require_s_free, GateSpec, KProvenance, Plan, PlanStep, SignMode, Strategy, has_even_root};
use crate::decompose::{binom, chow_auto, d_scaling, extract_bmd, Bmd};
use crate::error::Result;
use crate::polyring::{identity, matmul, rat, Poly, SMatrix, ScalarExpr};

/// One direct summand of an ancilla potential.
struct Block {
    poly: Poly,
    bmd: Bmd,
    /// Rows of `K` for this block; empty when only counting.
    k: SMatrix,
    /// Offset of the block's outcome symbols among all outcomes.
    outcome_offset: usize,
}

struct Step {
    order: u32,
    blocks: Vec<Block>,
    sign_sensitive: bool,
}

impl Step {
    fn brank(&self) -> usize {
        self.blocks.iter().map(|b| b.bmd.b.nvars()).sum()
    }

    fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.poly.nvars()).sum()
    }
}

fn block(poly: Poly, k: SMatrix, outcome_offset: usize) -> Result<Block> {
    let bmd = extract_bmd(&chow_auto(&poly)?)?;
    Ok(Block { poly, bmd, k, outcome_offset })
}

fn diag(entries: &[ScalarExpr]) -> SMatrix {
    let n = entries.len();
    (0..n)
        .map(|r| (0..n).map(|c| if r == c { entries[r].clone() } else { ScalarExpr::zero() }).collect())
        .collect()
}

fn construct(gate: &GateSpec, with_k: bool) -> Result<Vec<Step>> {
    let order = check_order(gate)?;
    let n = gate.n;
    let first = block(gate.v.homogeneous_part(order).neg(), if with_k { identity(n) } else { Vec::new() }, 0)?;
    let mut steps = vec![Step { order, blocks: vec![first], sign_sensitive: false }];
    let mut outcomes = n;
    for j in 1..=(order as usize).saturating_sub(3) {
        let target = order - j as u32;
        let mut blocks = Vec::new();
        let mut sign_sensitive = false;
        for prev in &steps[..j] {
            let m = (prev.order - target) as usize;
            // −C(d, m)(−1)^m from expanding f_i(K_i x − s_i).
            let sign = if m % 2 == 0 { -1 } else { 1 };
            let weight = rat(sign * binom(prev.order as i64, m as i64) as i64, 1);
            for b in &prev.blocks {
                for (t, (off, width)) in b.bmd.blocks.iter().enumerate() {
                    let bt = &b.bmd.block_polys[t];
                    let ones = vec![ScalarExpr::one(); *width];
                    let poly = bt.contract(&ones, m)?.scale_rational(&weight);
                    if poly.is_zero() {
                        continue;
                    }
                    let k = if with_k {
                        let mt: SMatrix = b.bmd.m[*off..off + width].to_vec();
                        let s: Vec<ScalarExpr> =
                            (0..b.poly.nvars()).map(|i| ScalarExpr::var(b.outcome_offset + i)).collect();
                        let sigma: Vec<ScalarExpr> = matmul(&mt, &s.iter().map(|x| vec![x.clone()]).collect::<Vec<_>>())
                            .into_iter()
                            .map(|mut r| r.remove(0))
                            .collect();
                        let exps: Vec<u32> = bt.terms().next().map(|(mono, _)| mono.0.clone()).unwrap_or_default();
                        let d = d_scaling(&exps, &sigma, m)?;
                        let dinv: Vec<ScalarExpr> = (0..*width).map(|l| d[l][l].recip()).collect::<Result<_>>()?;
                        sign_sensitive |= dinv.iter().any(has_even_root);
                        matmul(&diag(&dinv), &matmul(&mt, &b.k))
                    } else {
                        Vec::new()
                    };
                    blocks.push((poly, k));
                }
            }
        }
        let own = gate.v.homogeneous_part(target);
        if !own.is_zero() {
            blocks.push((own.neg(), if with_k { identity(n) } else { Vec::new() }));
        }
        let mut built = Vec::with_capacity(blocks.len());
        for (poly, k) in blocks {
            let w = poly.nvars();
            built.push(block(poly, k, outcomes)?);
            outcomes += w;
        }
        steps.push(Step { order: target, blocks: built, sign_sensitive });
    }
    Ok(steps)
}

fn formula(steps: &[Step]) -> usize {
    let head = steps.first().map_or(0, Step::dim);
    let tail: usize = (1..steps.len()).map(|k| steps[..k].iter().map(Step::brank).sum::<usize>()).sum();
    head + tail
}

/// `f_1 = −V^{(N)}` and `f_{j+1} = −⊕_{i≤j} C(d_i, m)(−1)^m B(f_i) 1^{m}` with
/// couplings `D^{-1} M K_i`, plus `−V^{(N−j)}` with `K = I` when that part exists.
pub fn plan_strategy2(gate: &GateSpec) -> Result<Plan> {
    let steps = construct(gate, true)?;
    let formula_count = formula(&steps);
    let mut out = Vec::with_capacity(steps.len());
    for (i, st) in steps.into_iter().enumerate() {
        let dim = st.dim();
        let mut f = Poly::zero(dim);
        let mut k = Vec::with_capacity(dim);
        let mut at = 0;
        for b in st.blocks {
            f = f.add(&b.poly.embed(dim, at))?;
            at += b.poly.nvars();
            k.extend(b.k);
        }
        require_s_free(&f)?;
        out.push(PlanStep {
            f,
            k,
            provenance: if i == 0 { KProvenance::Identity } else { KProvenance::DScaling },
            sign_sensitive: st.sign_sensitive,
            scaling: None,
        });
    }
    Ok(Plan { strategy: Strategy::II, gate: gate.clone(), steps: out, sign_mode: SignMode::AssumePositive, formula_count })
}

/// Per-step dimensions and the closed-form count, without building couplings.
pub fn strategy2_counts(gate: &GateSpec) -> Result<(Vec<usize>, usize)> {
    let steps = construct(gate, false)?;
    Ok((steps.iter().map(Step::dim).collect(), formula(&steps)))
}
