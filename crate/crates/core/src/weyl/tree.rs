use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};

use super::op::{mono_text, CRat, Exps, WeylOp};
use crate::error::{Error, Result};
use crate::polyring::Rational;

/// Bracket expression over pure quadrature monomials.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    X(Exps),
    P(Exps),
    Comm(Box<Node>, Box<Node>),
    Anti(Box<Node>, Box<Node>),
}

impl Node {
    pub fn comm(a: Node, b: Node) -> Node {
        Node::Comm(Box::new(a), Box::new(b))
    }

    pub fn anti(a: Node, b: Node) -> Node {
        Node::Anti(Box::new(a), Box::new(b))
    }

    pub fn expand(&self, nmodes: usize) -> WeylOp {
        match self {
            Node::X(m) => WeylOp::x_mono(m.clone()),
            Node::P(n) => WeylOp::p_mono(n.clone()),
            Node::Comm(a, b) => a.expand(nmodes).commutator(&b.expand(nmodes)),
            Node::Anti(a, b) => a.expand(nmodes).anticommutator(&b.expand(nmodes)),
        }
    }

    /// True when every leaf is a pure-x or pure-p monomial.
    pub fn is_quadrature_only(&self) -> bool {
        match self {
            Node::X(_) | Node::P(_) => true,
            Node::Comm(a, b) | Node::Anti(a, b) => a.is_quadrature_only() && b.is_quadrature_only(),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::X(m) => write!(f, "{}", mono_text('x', m)),
            Node::P(n) => write!(f, "{}", mono_text('p', n)),
            Node::Comm(a, b) => write!(f, "[{a},{b}]"),
            Node::Anti(a, b) => write!(f, "{{{a},{b}}}"),
        }
    }
}

/// Weighted sum of bracket expressions plus a constant.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprTree {
    pub nmodes: usize,
    pub terms: Vec<(CRat, Node)>,
    pub constant: CRat,
}

impl ExprTree {
    pub fn expand(&self) -> WeylOp {
        let mut out = WeylOp::scalar(self.nmodes, self.constant.clone());
        for (c, node) in &self.terms {
            out = out.add(&node.expand(self.nmodes).scale(c));
        }
        out
    }

    /// Combine identical nodes, fold scalar-valued brackets into the constant
    /// and drop brackets that vanish. First-appearance order is kept.
    fn merged(nmodes: usize, raw: Vec<(CRat, Node)>, constant: CRat) -> Self {
        let mut order: Vec<(Node, CRat)> = Vec::new();
        let mut index: HashMap<Node, usize> = HashMap::new();
        for (c, node) in raw {
            match index.get(&node) {
                Some(&k) => order[k].1 = order[k].1.add(&c),
                None => {
                    index.insert(node.clone(), order.len());
                    order.push((node, c));
                }
            }
        }
        let mut constant = constant;
        let mut terms = Vec::new();
        for (node, c) in order {
            if c.is_zero() {
                continue;
            }
            let val = node.expand(nmodes);
            match val.as_scalar() {
                Some(s) => constant = constant.add(&s.mul(&c)),
                None => terms.push((c, node)),
            }
        }
        Self { nmodes, terms, constant }
    }
}

impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (c, node) in &self.terms {
            let ct = c.to_string();
            let body = node.to_string();
            let t = match ct.as_str() {
                "1" => body,
                "-1" => format!("-{body}"),
                _ => format!("{ct}{body}"),
            };
            parts.push(t);
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        let mut out = String::new();
        for (k, p) in parts.iter().enumerate() {
            if k == 0 {
                out.push_str(p);
            } else if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        write!(f, "{out}")
    }
}

fn unit(n: usize, j: usize) -> Exps {
    let mut e = vec![0; n];
    e[j] = 1;
    e
}

fn add_exps(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// One level of the anticommutator identity, recursing on the third term.
fn raw_decompose(m: &[u32], n: &[u32], coef: CRat, out: &mut Vec<(CRat, Node)>, constant: &mut CRat) {
    let nm = m.len();
    let sm: u32 = m.iter().sum();
    let sn: u32 = n.iter().sum();
    if sm == 0 || sn == 0 {
        let w = coef.scale(&r(2, 1));
        match (sm, sn) {
            (0, 0) => *constant = constant.add(&w),
            (_, 0) => out.push((w, Node::X(m.to_vec()))),
            _ => out.push((w, Node::P(n.to_vec()))),
        }
        return;
    }
    let e0 = unit(nm, 0);
    let (m0, n0) = (m[0] as i64, n[0] as i64);
    let pref = coef.mul(&CRat::imag(r(-2, (m0 + 1) * (n0 + 1))));
    out.push((pref.clone(), Node::comm(Node::X(add_exps(m, &e0)), Node::P(add_exps(n, &e0)))));

    let c2 = pref.mul(&CRat::imag(r(-(m0 + 1), 2)));
    for k in 1..=n[0] {
        let mut pa = n.to_vec();
        pa[0] -= k;
        let mut pc = vec![0; nm];
        pc[0] = k;
        out.push((c2.clone(), Node::comm(Node::P(pa), Node::comm(Node::X(m.to_vec()), Node::P(pc)))));
    }

    for j in 1..nm {
        let mut shifted_m = add_exps(m, &e0);
        if m[j] > 0 {
            shifted_m[j] -= 1;
        }
        if m[j] * n[j] > 0 {
            let c3 = pref.mul(&CRat::imag(r(-((m[j] * n[j]) as i64), 2)));
            let mut shifted_n = add_exps(n, &e0);
            shifted_n[j] -= 1;
            raw_decompose(&shifted_m, &shifted_n, c3, out, constant);
        }
        if m[j] > 0 {
            let c4 = pref.mul(&CRat::imag(r(-(m[j] as i64), 2)));
            for k in 0..n[j] {
                let mut pa = vec![0; nm];
                pa[(j + 1)..].copy_from_slice(&n[(j + 1)..]);
                pa[j] = n[j] - k - 1;
                let mut pc = vec![0; nm];
                pc[..j].copy_from_slice(&n[..j]);
                pc[0] += 1;
                pc[j] = k;
                out.push((
                    c4.clone(),
                    Node::comm(Node::P(pa), Node::comm(Node::X(shifted_m.clone()), Node::P(pc))),
                ));
            }
        }
    }
}

/// Rewrite `{x^M, p^N}` as commutators of quadrature monomials plus a constant.
pub fn anticomm_decompose(m: &[u32], n: &[u32]) -> ExprTree {
    assert_eq!(m.len(), n.len(), "exponent vector lengths");
    let mut raw = Vec::new();
    let mut constant = CRat::zero();
    raw_decompose(m, n, CRat::one(), &mut raw, &mut constant);
    ExprTree::merged(m.len(), raw, constant)
}

/// Checks `expand(anticomm_decompose(M, N)) = {x^M, p^N}` exactly.
pub fn verify_decomposition(m: &[u32], n: &[u32]) -> bool {
    let lhs = WeylOp::x_mono(m.to_vec()).anticommutator(&WeylOp::p_mono(n.to_vec()));
    anticomm_decompose(m, n).expand() == lhs
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermKind {
    Anticomm,
    Comm,
}

/// `weight·{x^M,p^N}` or `i·weight·[x^M,p^N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitTerm {
    pub weight: Rational,
    pub kind: TermKind,
    pub m: Exps,
    pub n: Exps,
}

impl SplitTerm {
    pub fn operator(&self) -> WeylOp {
        let x = WeylOp::x_mono(self.m.clone());
        let p = WeylOp::p_mono(self.n.clone());
        match self.kind {
            TermKind::Anticomm => x.anticommutator(&p).scale(&CRat::real(self.weight.clone())),
            TermKind::Comm => x.commutator(&p).scale(&CRat::imag(self.weight.clone())),
        }
    }
}

/// Split `Σ (c x^M p^N + c̄ p^N x^M)` given as explicit `(c, M, N)` triples.
pub fn split_terms(pairs: &[(CRat, Exps, Exps)]) -> Vec<SplitTerm> {
    let mut out = Vec::new();
    for (c, m, n) in pairs {
        if !c.re.is_zero() {
            out.push(SplitTerm { weight: c.re.clone(), kind: TermKind::Anticomm, m: m.clone(), n: n.clone() });
        }
        if !c.im.is_zero() {
            out.push(SplitTerm { weight: c.im.clone(), kind: TermKind::Comm, m: m.clone(), n: n.clone() });
        }
    }
    out
}

/// Split a Hermitian operator using `c_{MN} = h_{MN}/2` from its normal form,
/// so that `H = Σ (c x^M p^N + c̄ p^N x^M)`. Vanishing commutators are omitted.
pub fn split_hamiltonian(h: &WeylOp) -> Result<Vec<SplitTerm>> {
    if !h.is_hermitian() {
        return Err(Error::NonHermitian);
    }
    let half = r(1, 2);
    let mut pairs = Vec::new();
    for ((m, n), c) in h.terms() {
        pairs.push((c.scale(&half), m.clone(), n.clone()));
    }
    pairs.reverse();
    let terms = split_terms(&pairs)
        .into_iter()
        .filter(|t| t.kind == TermKind::Anticomm || !t.operator().is_zero())
        .collect();
    Ok(terms)
}

pub fn reassemble(terms: &[SplitTerm], nmodes: usize) -> WeylOp {
    terms.iter().fold(WeylOp::zero(nmodes), |acc, t| acc.add(&t.operator()))
}

impl fmt::Display for SplitTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = mono_text('x', &self.m);
        let p = mono_text('p', &self.n);
        let w = if self.weight.is_integer() {
            self.weight.numer().to_string()
        } else {
            format!("{}/{}", self.weight.numer(), self.weight.denom())
        };
        match self.kind {
            TermKind::Anticomm if self.weight.is_one() => write!(f, "{{{x},{p}}}"),
            TermKind::Anticomm => write!(f, "{w}{{{x},{p}}}"),
            TermKind::Comm => write!(f, "{w}i[{x},{p}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::int;

    #[test]
    fn single_mode_base_identity() {
        let t = anticomm_decompose(&[1], &[1]);
        assert_eq!(t.terms.len(), 1);
        assert_eq!(t.terms[0].0, CRat::imag(r(-1, 2)));
        assert_eq!(t.terms[0].1, Node::comm(Node::X(vec![2]), Node::P(vec![2])));
        assert!(t.constant.is_zero());
        assert!(verify_decomposition(&[1], &[1]));
    }

    #[test]
    fn pure_monomials_are_leaves() {
        let t = anticomm_decompose(&[2, 1], &[0, 0]);
        assert_eq!(t.terms, vec![(CRat::real(int(2)), Node::X(vec![2, 1]))]);
        assert_eq!(t.expand(), WeylOp::x_mono(vec![2, 1]).scale(&CRat::real(int(2))));
    }

    #[test]
    fn split_examples() {
        let h = WeylOp::parse("x1*p1 + p1*x1").unwrap();
        let s = split_hamiltonian(&h).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].kind, s[0].weight.clone()), (TermKind::Anticomm, int(1)));
        assert_eq!(reassemble(&s, 1), h);

        let s = split_terms(&[(CRat::i(), vec![1], vec![1])]);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].kind, s[0].weight.clone()), (TermKind::Comm, int(1)));
        assert_eq!(reassemble(&s, 1), WeylOp::parse("i*(x1*p1 - p1*x1)").unwrap());

        let c = CRat::new(r(1, 2), r(1, 2));
        let s = split_terms(&[(c.clone(), vec![1, 0], vec![0, 1])]);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].kind, s[0].weight.clone()), (TermKind::Anticomm, r(1, 2)));
        assert_eq!((s[1].kind, s[1].weight.clone()), (TermKind::Comm, r(1, 2)));
        let direct = WeylOp::monomial(vec![1, 0], vec![0, 1]).scale(&c).add(
            &WeylOp::p_mono(vec![0, 1]).product(&WeylOp::x_mono(vec![1, 0])).scale(&c.conj()),
        );
        assert_eq!(reassemble(&s, 2), direct);

        assert!(split_hamiltonian(&WeylOp::parse("x1*p1").unwrap()).is_err());
    }
}
