//! Full measurement-based circuits: squeezed-ancilla wrapper, non-Gaussian
//! ancillas, coupling blocks with their feedforward, the final adaptive
//! homodyne stage, serialization and a text rendering.

mod feedforward;
mod io;
mod verify;

use std::collections::BTreeSet;

pub use feedforward::{resolve_feedforward, ResolvedBlock, ResolvedFinal, ResolvedSettings};
pub use io::{deserialize, float17, render_text, serialize, SCHEMA_VERSION};
pub use verify::{verify_circuit, wrapper_check, VerifyReport};

use crate::coupling::{NullifierSet, StarChain};
use crate::error::{Error, Result};
use crate::polyring::{Atom, Poly, SMatrix};
use crate::strategies::{SignMode, Strategy, VerifiedPlan};

/// Statement recorded with every circuit about the residual squeezing.
pub const SQUEEZING_STATEMENT: &str = "the circuit implements the operation U up to constant squeezing S";

#[derive(Clone, Debug, PartialEq)]
pub struct GateRecord {
    pub name: String,
    pub n: usize,
    pub v: Poly,
}

/// Squeezed (`x`-eigenstate) ancilla of the wrapper, one per input mode.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianAncilla {
    pub mode: usize,
    pub state: String,
}

/// Ancilla block prepared offline as the zero eigenstate of `m(x′, p′; f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonGaussianAncilla {
    pub step: usize,
    pub f: Poly,
    pub modes: usize,
    /// Two sign-flipped copies are kept in duplicate sign mode.
    pub copies: usize,
    pub nullifiers: Vec<String>,
    pub description: String,
}

/// One generalized linear coupling with its outcome-dependent matrix `K(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockRecord {
    pub step: usize,
    pub k: SMatrix,
    pub n_in: usize,
    pub n_anc: usize,
    /// Index of this block's first outcome.
    pub outcome_offset: usize,
    /// Earlier outcomes that `K` reads.
    pub depends_on: Vec<usize>,
    pub provenance: String,
    pub sign_sensitive: bool,
}

/// Instructions executed after the last block.
#[derive(Clone, Debug, PartialEq)]
pub struct FinalStage {
    pub program: Vec<String>,
    pub displacement: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metadata {
    pub strategy: Strategy,
    pub sign_mode: SignMode,
    pub non_gaussian: usize,
    pub gaussian: usize,
    pub formula_count: usize,
    pub squeezing_factor: String,
    pub statement: String,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitIR {
    pub gate: GateRecord,
    pub gaussian: Vec<GaussianAncilla>,
    pub ancillas: Vec<NonGaussianAncilla>,
    pub blocks: Vec<BlockRecord>,
    pub final_stage: FinalStage,
    pub metadata: Metadata,
}

fn outcome_vars(k: &SMatrix) -> Vec<usize> {
    let mut vars = BTreeSet::new();
    for e in k.iter().flatten() {
        e.for_each_power(&mut |a, _| {
            if let Atom::Var(i) = a {
                vars.insert(*i);
            }
        });
    }
    vars.into_iter().collect()
}

fn final_program() -> Vec<String> {
    [
        "evaluate the diamond chain at the physical outcomes: couplings K'_k = K_k A_{k-1}, A_k = A_{k-1} P(K'_k)",
        "split the reduced potential as x^T Q x + c^T x + const",
        "measure p + A x with A = -2 Q: network O and homodyne angles theta from A = O^T diag(tan theta) O",
        "postprocess m = A_m^{-T} (O^T diag(1/cos theta) y - c)",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Assemble a verified plan into a circuit.
pub fn build_circuit(vp: &VerifiedPlan) -> Result<CircuitIR> {
    let plan = &vp.plan;
    let n = plan.gate.n;
    let chain = plan.chain();
    let mut ancillas = Vec::with_capacity(plan.steps.len());
    let mut blocks = Vec::with_capacity(plan.steps.len());
    for (i, (st, cs)) in plan.steps.iter().zip(&chain.steps).enumerate() {
        let duplicate = plan.sign_mode == SignMode::Duplicate && st.sign_sensitive;
        ancillas.push(NonGaussianAncilla {
            step: i + 1,
            f: st.f.clone(),
            modes: st.dim(),
            copies: if duplicate { 2 } else { 1 },
            nullifiers: NullifierSet::new(st.f.clone()).display(),
            description: format!("eigenstate of m(x', p'; f_{}) with eigenvalue 0", i + 1),
        });
        blocks.push(BlockRecord {
            step: i + 1,
            k: st.k.clone(),
            n_in: n,
            n_anc: st.dim(),
            outcome_offset: cs.offset,
            depends_on: outcome_vars(&st.k),
            provenance: st.provenance.name().into(),
            sign_sensitive: st.sign_sensitive,
        });
    }
    let ir = CircuitIR {
        gate: GateRecord { name: plan.gate.name.clone(), n, v: plan.gate.v.clone() },
        gaussian: (0..n).map(|mode| GaussianAncilla { mode, state: "x-eigenstate".into() }).collect(),
        ancillas,
        blocks,
        final_stage: FinalStage {
            program: final_program(),
            displacement: "p_out += m (displacement D_p(m) on the wrapper output)".into(),
        },
        metadata: Metadata {
            strategy: plan.strategy,
            sign_mode: plan.sign_mode,
            non_gaussian: plan.non_gaussian(),
            gaussian: plan.gaussian(),
            formula_count: plan.formula_count,
            squeezing_factor: "sqrt(2)".into(),
            statement: SQUEEZING_STATEMENT.into(),
            samples: vp.check.samples,
            seed: vp.check.seed,
            tolerance: vp.tolerance,
        },
    };
    ir.check_structure()?;
    Ok(ir)
}

impl CircuitIR {
    pub fn non_gaussian(&self) -> usize {
        self.ancillas.iter().map(|a| a.modes * a.copies).sum()
    }

    pub fn outcome_count(&self) -> usize {
        self.blocks.iter().map(|b| b.n_anc).sum()
    }

    /// The star chain the circuit executes.
    pub fn star_chain(&self) -> StarChain {
        let mut c = StarChain::new(self.gate.v.clone());
        for (a, b) in self.ancillas.iter().zip(&self.blocks) {
            c.push(a.f.clone(), b.k.clone());
        }
        c
    }

    /// Feedforward order, mode conservation and mode accounting.
    pub fn check_structure(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Schema(m));
        if self.ancillas.len() != self.blocks.len() {
            return bad("one ancilla record per block".into());
        }
        if self.gaussian.len() != self.gate.n {
            return bad(format!("{} squeezed ancillas for {} modes", self.gaussian.len(), self.gate.n));
        }
        let mut seen = 0;
        for (a, b) in self.ancillas.iter().zip(&self.blocks) {
            if b.outcome_offset != seen {
                return bad(format!("block {} starts at outcome {}, expected {seen}", b.step, b.outcome_offset));
            }
            if b.depends_on.iter().any(|&d| d >= seen) {
                return bad(format!("block {} reads an outcome not yet measured", b.step));
            }
            if b.n_in != self.gate.n || b.n_anc != a.modes || a.f.nvars() != a.modes || b.k.len() != b.n_anc {
                return bad(format!("block {} does not conserve modes", b.step));
            }
            if b.k.iter().any(|r| r.len() != b.n_in) {
                return bad(format!("block {} coupling has the wrong width", b.step));
            }
            seen += b.n_anc;
        }
        if self.non_gaussian() != self.metadata.non_gaussian || self.gate.n != self.metadata.gaussian {
            return bad("mode counts disagree with metadata".into());
        }
        Ok(())
    }
}
