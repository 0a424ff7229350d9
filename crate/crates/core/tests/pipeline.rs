use cvgate::circuit::{build_circuit, deserialize, render_text, resolve_feedforward, serialize, verify_circuit, CircuitIR};
use cvgate::linalg::{max_abs, Mat};
use cvgate::polyring::Poly;
use cvgate::strategies::{plan, GateSpec, Strategy};

fn compile(g: &GateSpec, s: Strategy) -> CircuitIR {
    build_circuit(&plan(g, s).unwrap().verified(20, 0, 1e-8).unwrap()).unwrap()
}

#[test]
fn cubic_qnd_mode_wise_ancillas() {
    let ir = compile(&GateSpec::cubic_qnd(), Strategy::I);
    assert_eq!(ir.ancillas.len(), 1);
    assert_eq!(ir.ancillas[0].nullifiers, vec!["p1 + x2^2", "p2 + 2*x1*x2"]);
    assert_eq!((ir.metadata.non_gaussian, ir.gaussian.len()), (2, 2));
}

#[test]
fn cubic_qnd_waring_uses_cubic_phase_states() {
    let ir = compile(&GateSpec::cubic_qnd(), Strategy::III);
    assert_eq!(ir.metadata.non_gaussian, 3);
    assert!(ir.ancillas[0].nullifiers.iter().all(|s| s.contains("+ 3*x")));
    assert_eq!(ir.gaussian.len(), 2);
}

#[test]
fn toffoli_homodyne_reconstruction() {
    let ir = compile(&GateSpec::toffoli(), Strategy::I);
    assert_eq!(ir.metadata.non_gaussian, 3);
    for s in [[0.7, 1.3, 0.4], [2.0, 0.9, 1.1], [0.2, 0.5, 1.9]] {
        let r = resolve_feedforward(&ir, &s).unwrap();
        let o = &r.last.plan.network;
        let tan = Mat::from_diagonal(&nalgebra::DVector::from_iterator(3, r.last.plan.theta.iter().map(|t| t.tan())));
        let recon = o.transpose() * tan * o;
        assert!(max_abs(&(recon - &r.last.a)) < 1e-10);
    }
    let report = verify_circuit(&ir, 10, 5, 1e-9).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
}

#[test]
fn empty_gate_is_wrapper_only() {
    let ir = compile(&GateSpec::custom(Poly::zero(2)), Strategy::I);
    assert!(ir.ancillas.is_empty() && ir.blocks.is_empty());
    assert_eq!(ir.gaussian.len(), 2);
    let report = verify_circuit(&ir, 3, 0, 1e-9).unwrap();
    assert!(report.wrapper && report.passed());
}

#[test]
fn presets_round_trip_and_render() {
    for g in [GateSpec::cubic_qnd(), GateSpec::toffoli(), GateSpec::small_example(), GateSpec::cnz(4).unwrap()] {
        for s in [Strategy::I, Strategy::II, Strategy::III] {
            let ir = compile(&g, s);
            let text = serialize(&ir).unwrap();
            assert_eq!(deserialize(&text).unwrap(), ir);
            let picture = render_text(&ir);
            let anc_lines = picture.lines().filter(|l| l.starts_with("anc ")).count();
            assert_eq!(anc_lines, ir.metadata.non_gaussian, "{}", picture);
        }
    }
}
