//! Normal-ordered Weyl algebra on `(x_i, p_i)` with `[x, p] = i`, and the
//! rewriting of Hamiltonians into brackets of pure quadrature monomials.

mod op;
mod tree;
mod trotter;

pub use op::{CRat, Exps, WeylOp};
pub use tree::{
    anticomm_decompose, reassemble, split_hamiltonian, split_terms, verify_decomposition, ExprTree,
    Node, SplitTerm, TermKind,
};
pub use trotter::{generator_sum, trotter_sequence, GateToken};
