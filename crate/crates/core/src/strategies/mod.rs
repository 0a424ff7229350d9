//! Planners that choose the fixed ancilla potentials `f_k` and the coupling
//! recipes `K_k(s)` reducing a gate's potential to a quadratic one, plus the
//! ancilla counts they imply.

mod gates;
mod strategy1;
mod strategy2;
mod strategy3;
mod table;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use gates::GateSpec;
pub use strategy1::{plan_strategy1, strategy1_counts};
pub use strategy2::{plan_strategy2, strategy2_counts};
pub use strategy3::plan_strategy3;
pub use table::{count_table, crank_recursion_total, CountRow, CountTable, PAPER_TABLE};

use crate::coupling::{StarChain, DiamondChain};
use crate::error::{Error, Result};
use crate::polyring::{Atom, Poly, SMatrix, ScalarExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    I,
    II,
    III,
}

impl Strategy {
    pub fn number(self) -> u8 {
        match self {
            Strategy::I => 1,
            Strategy::II => 2,
            Strategy::III => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Strategy::I),
            2 => Ok(Strategy::II),
            3 => Ok(Strategy::III),
            _ => Err(Error::InvalidGate(format!("unknown strategy {n}"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::I => "I",
            Strategy::II => "II",
            Strategy::III => "III",
        };
        write!(f, "{s}")
    }
}

/// Handling of outcomes whose sign decides whether a coupling is real.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SignMode {
    /// Assume every outcome is positive; the gate then succeeds with
    /// probability below one.
    #[default]
    AssumePositive,
    /// Keep two ancillas of opposite sign for every step whose coupling takes
    /// an even root of an outcome-dependent quantity.
    Duplicate,
}

impl SignMode {
    pub fn name(self) -> &'static str {
        match self {
            SignMode::AssumePositive => "assume-positive",
            SignMode::Duplicate => "duplicate",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "assume-positive" => Ok(SignMode::AssumePositive),
            "duplicate" => Ok(SignMode::Duplicate),
            _ => Err(Error::InvalidGate(format!("unknown sign mode `{s}`"))),
        }
    }
}

/// How a step's coupling matrix was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KProvenance {
    Identity,
    ChowBM,
    DScaling,
    WaringDM,
}

impl KProvenance {
    pub fn name(self) -> &'static str {
        match self {
            KProvenance::Identity => "identity",
            KProvenance::ChowBM => "chow-bm",
            KProvenance::DScaling => "d-scaling",
            KProvenance::WaringDM => "waring-dm",
        }
    }
}

/// One reduction step: ancilla potential `f` on `dim` modes and coupling `K(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanStep {
    pub f: Poly,
    pub k: SMatrix,
    pub provenance: KProvenance,
    /// Whether `K` takes an even root of an outcome-dependent quantity.
    pub sign_sensitive: bool,
    /// Diagonal of `D` and fixed directions `M` when `K = D M`.
    pub scaling: Option<(Vec<ScalarExpr>, SMatrix)>,
}

impl PlanStep {
    pub fn dim(&self) -> usize {
        self.f.nvars()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub strategy: Strategy,
    pub gate: GateSpec,
    pub steps: Vec<PlanStep>,
    pub sign_mode: SignMode,
    /// The closed-form count equation evaluated on the constructed objects.
    pub formula_count: usize,
}

/// Sampled degree-reduction check of a plan.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainCheck {
    pub samples: usize,
    pub seed: u64,
    /// Largest relative magnitude of a coefficient above degree two.
    pub max_residual: f64,
    /// Largest relative star/diamond disagreement.
    pub max_diamond_gap: f64,
    pub passed: bool,
}

/// A plan whose chain passed [`Plan::verify`].
#[derive(Clone, Debug, PartialEq)]
pub struct VerifiedPlan {
    pub plan: Plan,
    pub check: ChainCheck,
    pub tolerance: f64,
}

impl Plan {
    pub fn order(&self) -> u32 {
        self.gate.v.degree()
    }

    /// Non-Gaussian ancilla modes, doubled on sign-sensitive steps in duplicate mode.
    pub fn non_gaussian(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match self.sign_mode {
                SignMode::Duplicate if s.sign_sensitive => 2 * s.dim(),
                _ => s.dim(),
            })
            .sum()
    }

    /// Squeezed ancillas of the measurement wrapper, one per input mode.
    pub fn gaussian(&self) -> usize {
        self.gate.n
    }

    /// Reference count `N−2+⌊(N−2)/2⌋` for a single-mode `x^N` chain with
    /// duplicated ancillas.
    pub fn duplicate_reference(&self) -> Option<usize> {
        let n = self.order() as usize;
        (self.gate.n == 1 && self.gate.v.num_terms() == 1 && n >= 3).then(|| n - 2 + (n - 2) / 2)
    }

    /// Verify and wrap; fails when the chain does not reduce to quadratic order.
    pub fn verified(self, samples: usize, seed: u64, tolerance: f64) -> Result<VerifiedPlan> {
        let check = self.verify(samples, seed, tolerance)?;
        if !check.passed {
            return Err(Error::Verification(format!(
                "residual {:e} and star/diamond gap {:e} against tolerance {tolerance:e}",
                check.max_residual, check.max_diamond_gap
            )));
        }
        Ok(VerifiedPlan { plan: self, check, tolerance })
    }

    pub fn with_sign_mode(mut self, mode: SignMode) -> Self {
        self.sign_mode = mode;
        self
    }

    pub fn chain(&self) -> StarChain {
        let mut c = StarChain::new(self.gate.v.clone());
        for st in &self.steps {
            c.push(st.f.clone(), st.k.clone());
        }
        c
    }

    pub fn outcome_count(&self) -> usize {
        self.steps.iter().map(PlanStep::dim).sum()
    }

    /// Evaluate the chain at `samples` seeded positive outcome vectors and
    /// measure what remains above degree two, relative to the largest coefficient.
    pub fn verify(&self, samples: usize, seed: u64, tolerance: f64) -> Result<ChainCheck> {
        let chain = self.chain();
        let diamond = DiamondChain::new(chain.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut gap: f64 = 0.0;
        for _ in 0..samples {
            let s = positive_outcomes(&mut rng, self.outcome_count());
            let g = chain.at(&s)?;
            if g.terms().any(|(_, c)| !c.is_finite()) {
                return Err(Error::Eval(format!("chain is not finite at outcomes {s:?}")));
            }
            let scale = g.max_abs().max(1.0);
            worst = worst.max(g.above_degree(2).max_abs() / scale);
            gap = gap.max(diamond.agreement(&s)?);
        }
        let passed = worst < tolerance && gap < tolerance;
        Ok(ChainCheck { samples, seed, max_residual: worst, max_diamond_gap: gap, passed })
    }
}

/// Outcomes drawn uniformly from `[0.5, 2]`.
pub fn positive_outcomes(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.5..2.0)).collect()
}

/// Build the plan for `strategy`. Gates of order at most two need no
/// ancillas and get an empty plan.
pub fn plan(gate: &GateSpec, strategy: Strategy) -> Result<Plan> {
    if gate.v.degree() <= 2 {
        return Ok(Plan {
            strategy,
            gate: gate.clone(),
            steps: Vec::new(),
            sign_mode: SignMode::AssumePositive,
            formula_count: 0,
        });
    }
    match strategy {
        Strategy::I => plan_strategy1(gate),
        Strategy::II => plan_strategy2(gate),
        Strategy::III => plan_strategy3(gate),
    }
}

/// Whether `e` contains an even root of an outcome-dependent base.
pub fn has_even_root(e: &ScalarExpr) -> bool {
    let mut found = false;
    e.for_each_power(&mut |a, x| {
        let indefinite = match a {
            Atom::Var(_) => true,
            Atom::Radical(b) => !b.is_s_free(),
            Atom::Int(_) => false,
        };
        if indefinite && x.denom() % 2 == 0 {
            found = true;
        }
    });
    found
}

/// Reject outcome symbols in a fixed ancilla potential.
fn require_s_free(f: &Poly) -> Result<()> {
    if f.is_s_free() {
        Ok(())
    } else {
        Err(Error::Verification(format!("ancilla potential depends on outcomes: {f}")))
    }
}

fn check_order(gate: &GateSpec) -> Result<u32> {
    let n = gate.v.degree();
    if n < 3 {
        return Err(Error::InvalidGate(format!("{} has order {n}; nothing to reduce", gate.name)));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_root_detection() {
        let s = ScalarExpr::var(0);
        assert!(has_even_root(&s.pow(crate::polyring::Exp::new(1, 4)).unwrap()));
        assert!(!has_even_root(&s.pow(crate::polyring::Exp::new(1, 3)).unwrap()));
        assert!(!has_even_root(&ScalarExpr::from_int(6).pow(crate::polyring::Exp::new(1, 2)).unwrap()));
    }
}
