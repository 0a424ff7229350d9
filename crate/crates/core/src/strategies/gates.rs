use crate::decompose::{waring_known, waring_poly, WaringDecomp};
use crate::error::{Error, Result};
use crate::polyring::{parse_poly, Poly, ScalarExpr};

/// A quadrature gate `exp(i V(x))` on `n` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    /// Preset identifier such as `toffoli` or `cnz(4)`, or `custom`.
    pub name: String,
    pub n: usize,
    pub v: Poly,
    /// Whether `name` identifies a preset with a hand-written Waring decomposition.
    pub preset: bool,
}

impl GateSpec {
    pub fn custom(v: Poly) -> Self {
        Self { name: "custom".into(), n: v.nvars(), v, preset: false }
    }

    /// Parse polynomial text; the mode count is the largest index used unless given.
    pub fn from_text(src: &str, nmodes: Option<usize>) -> Result<Self> {
        let v = parse_poly(src, nmodes)?;
        if !v.is_s_free() {
            return Err(Error::InvalidGate("gate potential must not contain outcome symbols".into()));
        }
        Ok(Self::custom(v))
    }

    fn monomial(name: String, exps: Vec<u32>) -> Self {
        let n = exps.len();
        Self { name, n, v: Poly::monomial(exps, ScalarExpr::one()), preset: true }
    }

    pub fn cubic_qnd() -> Self {
        Self::monomial("cubic-qnd".into(), vec![1, 2])
    }

    pub fn toffoli() -> Self {
        Self::monomial("toffoli".into(), vec![1, 1, 1])
    }

    /// `x1 x2^{N−1}`.
    pub fn cphase(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidGate(format!("cphase needs N >= 2, got {order}")));
        }
        Ok(Self::monomial(format!("cphase({order})"), vec![1, order as u32 - 1]))
    }

    /// `x1 x2 ⋯ xN`.
    pub fn cnz(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidGate("cnz needs N >= 1".into()));
        }
        Ok(Self::monomial(format!("cnz({order})"), vec![1; order]))
    }

    /// `x1^2 x2^2 + x1^4`.
    pub fn small_example() -> Self {
        let v = Poly::from_terms(2, [(vec![2, 2], ScalarExpr::one()), (vec![4, 0], ScalarExpr::one())]);
        Self { name: "small-example".into(), n: 2, v, preset: true }
    }

    /// Resolve a preset by name. `cphase` and `cnz` take their order either
    /// inline (`cnz(4)`, `cnz:4`) or from `order`.
    pub fn preset(name: &str, order: Option<usize>) -> Result<Self> {
        let name = name.trim();
        let (base, inline) = split_order(name)?;
        let order = inline.or(order);
        match base {
            "cubic-qnd" => Ok(Self::cubic_qnd()),
            "toffoli" => Ok(Self::toffoli()),
            "small-example" => Ok(Self::small_example()),
            "cphase" => Self::cphase(order.ok_or_else(|| Error::InvalidGate("cphase needs an order N".into()))?),
            "cnz" => Self::cnz(order.ok_or_else(|| Error::InvalidGate("cnz needs an order N".into()))?),
            _ => Err(Error::UnknownGate(name.into())),
        }
    }

    pub fn order(&self) -> u32 {
        self.v.degree()
    }

    /// Waring decomposition of the order-`k` part: the preset's printed one for
    /// the top part, otherwise the sum of monomial decompositions.
    pub fn waring_part(&self, k: u32) -> Result<WaringDecomp> {
        let part = self.v.homogeneous_part(k);
        if self.preset && k == self.order() {
            return waring_known(&self.name);
        }
        waring_poly(&part)
    }
}

fn split_order(name: &str) -> Result<(&str, Option<usize>)> {
    let bad = || Error::InvalidGate(format!("malformed gate name `{name}`"));
    if let Some((base, rest)) = name.split_once('(') {
        let inner = rest.strip_suffix(')').ok_or_else(bad)?;
        return Ok((base, Some(inner.trim().parse().map_err(|_| bad())?)));
    }
    if let Some((base, rest)) = name.split_once(':') {
        return Ok((base, Some(rest.trim().parse().map_err(|_| bad())?)));
    }
    Ok((name, None))
}
