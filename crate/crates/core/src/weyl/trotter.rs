use std::fmt;

use super::op::{mono_text, CRat, Exps, WeylOp};
use super::tree::{anticomm_decompose, split_hamiltonian, Node, TermKind};
use crate::error::Result;
use crate::polyring::Rational;

/// One element of a first-order Trotter sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum GateToken {
    /// Fourier rotation on the listed modes, mapping x to p.
    Fourier { modes: Vec<usize> },
    InverseFourier { modes: Vec<usize> },
    /// `exp(i·w·x^M)`.
    XPhase { m: Exps, weight: Rational },
    /// `exp(i·c·G)` for a bracket generator `G`. Realizing it through
    /// group-commutator sequences is left to the caller.
    Bracket { coeff: CRat, node: Node },
    /// `exp(i·w)`.
    GlobalPhase { weight: CRat },
}

impl fmt::Display for GateToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let modes = |m: &[usize]| m.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
        match self {
            GateToken::Fourier { modes: m } => write!(f, "F[{}]", modes(m)),
            GateToken::InverseFourier { modes: m } => write!(f, "F^-1[{}]", modes(m)),
            GateToken::XPhase { m, weight } => write!(f, "exp(i*{weight}*{})", mono_text('x', m)),
            GateToken::Bracket { coeff, node } => write!(f, "exp(i*{coeff}*{node})"),
            GateToken::GlobalPhase { weight } => write!(f, "exp(i*{weight})"),
        }
    }
}

fn support(e: &[u32]) -> Vec<usize> {
    e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, _)| i).collect()
}

fn push_leaf(tokens: &mut Vec<GateToken>, coeff: &CRat, node: &Node) {
    match node {
        Node::X(m) => tokens.push(GateToken::XPhase { m: m.clone(), weight: coeff.re.clone() }),
        Node::P(n) => {
            let modes = support(n);
            tokens.push(GateToken::Fourier { modes: modes.clone() });
            tokens.push(GateToken::XPhase { m: n.clone(), weight: coeff.re.clone() });
            tokens.push(GateToken::InverseFourier { modes });
        }
        other => tokens.push(GateToken::Bracket { coeff: coeff.clone(), node: other.clone() }),
    }
}

/// First-order splitting of `exp(-i t H)` style evolution into `steps`
/// repetitions of quadrature-gate tokens, one block per split term.
pub fn trotter_sequence(h: &WeylOp, t: &Rational, steps: usize) -> Result<Vec<GateToken>> {
    let split = split_hamiltonian(h)?;
    let dt = t / Rational::from_integer(steps.max(1).into());
    let mut step_tokens = Vec::new();
    for term in &split {
        match term.kind {
            TermKind::Anticomm => {
                let tree = anticomm_decompose(&term.m, &term.n);
                let w = &dt * &term.weight;
                for (c, node) in &tree.terms {
                    push_leaf(&mut step_tokens, &c.scale(&w), node);
                }
                if !tree.constant.is_zero() {
                    step_tokens.push(GateToken::GlobalPhase { weight: tree.constant.scale(&w) });
                }
            }
            TermKind::Comm => {
                let node = Node::comm(Node::X(term.m.clone()), Node::P(term.n.clone()));
                step_tokens.push(GateToken::Bracket { coeff: CRat::imag(&dt * &term.weight), node });
            }
        }
    }
    let mut out = Vec::with_capacity(step_tokens.len() * steps);
    for _ in 0..steps {
        out.extend(step_tokens.iter().cloned());
    }
    Ok(out)
}

/// Formal sum of token generators; a Fourier-wrapped x-phase counts as `p^M`.
pub fn generator_sum(tokens: &[GateToken], nmodes: usize) -> WeylOp {
    let mut out = WeylOp::zero(nmodes);
    let mut in_fourier = false;
    for tok in tokens {
        match tok {
            GateToken::Fourier { .. } => in_fourier = true,
            GateToken::InverseFourier { .. } => in_fourier = false,
            GateToken::XPhase { m, weight } => {
                let g = if in_fourier { WeylOp::p_mono(m.clone()) } else { WeylOp::x_mono(m.clone()) };
                out = out.add(&g.scale(&CRat::real(weight.clone())));
            }
            GateToken::Bracket { coeff, node } => out = out.add(&node.expand(nmodes).scale(coeff)),
            GateToken::GlobalPhase { weight } => out = out.add(&WeylOp::scalar(nmodes, weight.clone())),
        }
    }
    out
}
