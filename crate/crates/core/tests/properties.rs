use cvgate::circuit::{build_circuit, deserialize, resolve_feedforward, serialize};
use cvgate::coupling::{star, theorem1_residual};
use cvgate::decompose::{chow_elementary, elementary, extract_bmd, chow_auto, waring_monomial};
use cvgate::linalg::{givens_factor, max_abs, measure_symmetric, svd, Mat};
use cvgate::polyring::{int, parse_poly, NumPoly, Poly, ScalarExpr};
use cvgate::strategies::{plan, GateSpec, Strategy as Plan};
use cvgate::weyl::{verify_decomposition, WeylOp};
use proptest::prelude::*;

fn small_poly(nvars: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0u32..=3, nvars), -5i64..=5), 0..6).prop_map(move |terms| {
        Poly::from_terms(nvars, terms.into_iter().map(|(e, c)| (e, ScalarExpr::from_int(c))))
    })
}

fn num_poly(nvars: usize, max_deg: u32) -> impl Strategy<Value = NumPoly> {
    prop::collection::vec((prop::collection::vec(0u32..=max_deg, nvars), -1.0f64..1.0), 1..6)
        .prop_map(move |terms| NumPoly::from_terms(nvars, terms))
}

fn matrix(r: usize, c: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-1.5f64..1.5, r * c).prop_map(move |v| Mat::from_row_slice(r, c, &v))
}

fn symmetric(n: usize) -> impl Strategy<Value = Mat> {
    matrix(n, n).prop_map(|a| (&a + a.transpose()) * 0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn display_parses_back(p in small_poly(3)) {
        let back = parse_poly(&p.to_string(), Some(3)).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn product_rule(a in small_poly(2), b in small_poly(2)) {
        let lhs = a.mul(&b).unwrap().partial(0);
        let rhs = a.partial(0).mul(&b).unwrap().add(&a.mul(&b.partial(0)).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn prefix_round_trip(p in small_poly(2)) {
        prop_assert_eq!(Poly::from_prefix_terms(2, &p.to_prefix_terms()).unwrap(), p);
    }

    #[test]
    fn star_with_zero_ancilla_is_identity(p in small_poly(2)) {
        let zero = Poly::zero(1);
        let k = vec![vec![ScalarExpr::one(), ScalarExpr::from_int(2)]];
        prop_assert_eq!(star(&p, &zero, &k, &[ScalarExpr::var(0)]).unwrap(), p);
    }

    #[test]
    fn coupling_identity(f in num_poly(2, 3), g in num_poly(3, 3), k in matrix(3, 2), seed in 0u64..1000) {
        prop_assert!(theorem1_residual(&f, &g, &k, 3, seed).unwrap() < 1e-9);
    }

    #[test]
    fn givens_recomposes(a in symmetric(5)) {
        let (_, o) = cvgate::linalg::sym_eigen(&a);
        let g = givens_factor(&o).unwrap();
        prop_assert!(g.rotations.len() <= 10);
        prop_assert!(max_abs(&(g.compose() - &o)) < 1e-10);
    }

    #[test]
    fn symmetric_measurement_reconstructs(a in symmetric(4)) {
        let plan = measure_symmetric(&a).unwrap();
        let (b, c) = plan.implied();
        prop_assert!(max_abs(&(b - Mat::identity(4, 4))) < 1e-9);
        prop_assert!(max_abs(&(c - &a)) < 1e-9 * max_abs(&a).max(1.0));
    }

    #[test]
    fn svd_reconstructs(k in matrix(3, 2)) {
        let s = svd(&k);
        prop_assert!(max_abs(&(s.reconstruct() - &k)) < 1e-12);
        prop_assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn elementary_construction_is_exact(n in 1usize..=7, k in 1usize..=7) {
        prop_assume!(k <= n);
        prop_assert_eq!(chow_elementary(n, k).expand().unwrap(), elementary(n, k));
    }

    #[test]
    fn monomial_waring_is_exact(e in prop::collection::vec(0u32..=2, 1..=3)) {
        prop_assume!(e.iter().sum::<u32>() >= 1);
        prop_assert!(waring_monomial(&e).unwrap().verify());
    }

    #[test]
    fn bmd_substitutes_back(p in small_poly(2)) {
        let top = p.homogeneous_part(p.degree());
        prop_assume!(!top.is_zero());
        let d = chow_auto(&top).unwrap();
        prop_assert!(d.verify());
        let bmd = extract_bmd(&d).unwrap();
        if bmd.m.is_empty() {
            prop_assert_eq!(Poly::constant(2, bmd.b.coeff(&[])), top);
        } else {
            let zero = vec![ScalarExpr::zero(); bmd.b.nvars()];
            prop_assert_eq!(bmd.b.substitute_affine(&bmd.m, &zero).unwrap(), top);
        }
    }

    #[test]
    fn bracket_recursion_is_exact(m in prop::collection::vec(0u32..=2, 2), n in prop::collection::vec(0u32..=2, 2)) {
        prop_assert!(verify_decomposition(&m, &n));
    }

    #[test]
    fn jacobi_identity(a in 0u32..=2, b in 0u32..=2, c in 1u32..=2) {
        let x = WeylOp::x_mono(vec![a, 1]);
        let p = WeylOp::p_mono(vec![b, 1]);
        let q = WeylOp::x_mono(vec![c, 0]).add(&WeylOp::p_mono(vec![0, c]));
        let j = x.commutator(&p.commutator(&q))
            .add(&p.commutator(&q.commutator(&x)))
            .add(&q.commutator(&x.commutator(&p)));
        prop_assert!(j.is_zero());
    }

    #[test]
    fn single_monomial_circuits_round_trip(e in prop::collection::vec(0u32..=2, 2), c in 1i64..=3) {
        prop_assume!(e.iter().sum::<u32>() >= 3);
        let v = Poly::monomial(e, ScalarExpr::constant(int(c)));
        let vp = plan(&GateSpec::custom(v), Plan::III).unwrap().verified(6, 1, 1e-8).unwrap();
        let ir = build_circuit(&vp).unwrap();
        let text = serialize(&ir).unwrap();
        prop_assert_eq!(&deserialize(&text).unwrap(), &ir);
        prop_assert_eq!(serialize(&deserialize(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn feedforward_is_deterministic(s in prop::collection::vec(0.5f64..2.0, 4)) {
        let ir = build_circuit(&plan(&GateSpec::toffoli(), Plan::III).unwrap().verified(4, 0, 1e-8).unwrap()).unwrap();
        let a = resolve_feedforward(&ir, &s).unwrap();
        let b = resolve_feedforward(&ir, &s).unwrap();
        prop_assert_eq!(a.last.plan, b.last.plan);
        prop_assert_eq!(a.blocks[0].k_prime.clone(), b.blocks[0].k_prime.clone());
    }
}
