//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cvgate::coupling::theorem1_residual;
use cvgate::decompose::{chow_elementary, elementary, q_partitions, waring_known};
use cvgate::linalg::{max_abs, measure_general, measure_symmetric, unitary_ofo, CMat, Mat};
use cvgate::polyring::{rat, NumPoly, Poly, ScalarExpr};
use cvgate::strategies::{count_table, plan, strategy1_counts, GateSpec, Strategy};
use cvgate::weyl::{verify_decomposition, CRat, Node, WeylOp};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn x(e: &[u32]) -> Node {
    Node::X(e.to_vec())
}

fn p(e: &[u32]) -> Node {
    Node::P(e.to_vec())
}

fn c(re: (i64, i64), im: (i64, i64)) -> CRat {
    CRat::new(rat(re.0, re.1), rat(im.0, im.1))
}

fn im(n: i64, d: i64) -> CRat {
    c((0, 1), (n, d))
}

fn re(n: i64, d: i64) -> CRat {
    c((n, d), (0, 1))
}

/// The printed identities, term by term.
fn printed_identities() -> Vec<(Vec<u32>, Vec<u32>, Vec<(CRat, Node)>, CRat)> {
    let comm = Node::comm;
    vec![
        (
            vec![1, 1],
            vec![1, 1],
            vec![(im(-1, 2), comm(x(&[2, 1]), p(&[2, 1]))), (im(-2, 9), comm(x(&[3, 0]), p(&[3, 0])))],
            re(7, 6),
        ),
        (
            vec![3, 1],
            vec![2, 2],
            vec![
                (im(-1, 6), comm(x(&[4, 1]), p(&[3, 2]))),
                (im(-1, 10), comm(x(&[5, 0]), p(&[4, 1]))),
                (re(1, 3), comm(p(&[1, 2]), comm(x(&[3, 1]), p(&[1, 0])))),
                (re(1, 3), comm(p(&[0, 2]), comm(x(&[3, 1]), p(&[2, 0])))),
                (re(1, 3), comm(p(&[0, 1]), comm(x(&[4, 0]), p(&[3, 0])))),
                (re(1, 4), comm(p(&[2, 1]), comm(x(&[4, 0]), p(&[1, 0])))),
                (re(1, 4), comm(p(&[1, 1]), comm(x(&[4, 0]), p(&[2, 0])))),
            ],
            CRat::zero(),
        ),
        (
            vec![1, 1, 1],
            vec![1, 1, 1],
            vec![
                (im(-1, 2), comm(x(&[2, 1, 1]), p(&[2, 1, 1]))),
                (im(-1, 18), comm(x(&[3, 0, 1]), p(&[3, 0, 1]))),
                (im(-1, 16), comm(x(&[4, 0, 0]), p(&[4, 0, 0]))),
                (im(-1, 18), comm(x(&[3, 1, 0]), p(&[3, 1, 0]))),
                (re(1, 2), comm(p(&[0, 1, 1]), comm(x(&[1, 1, 1]), p(&[1, 0, 0])))),
                (re(1, 3), comm(p(&[0, 0, 1]), comm(x(&[2, 0, 1]), p(&[2, 0, 0])))),
                (re(1, 12), comm(p(&[1, 0, 1]), comm(x(&[2, 0, 1]), p(&[1, 0, 0])))),
                (re(1, 4), comm(p(&[2, 0, 0]), comm(x(&[3, 0, 0]), p(&[1, 0, 0])))),
                (re(1, 12), comm(p(&[1, 1, 0]), comm(x(&[2, 1, 0]), p(&[1, 0, 0])))),
                (re(1, 12), comm(p(&[0, 1, 0]), comm(x(&[2, 1, 0]), p(&[2, 0, 0])))),
            ],
            CRat::zero(),
        ),
    ]
}

fn exponent_vectors(modes: usize, max_total: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..modes {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                let used: u32 = v.iter().sum();
                (0..=max_total - used).map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    out
}

fn criterion_1() -> Outcome {
    let mut printed = Vec::new();
    for (m, n, terms, constant) in printed_identities() {
        let k = m.len();
        let lhs = WeylOp::x_mono(m.clone()).anticommutator(&WeylOp::p_mono(n.clone()));
        let rhs = terms.iter().fold(WeylOp::scalar(k, constant), |acc, (c, node)| acc.add(&node.expand(k).scale(c)));
        printed.push(lhs == rhs);
    }
    let mut cases = 0;
    let mut bad = 0;
    for modes in 1..=3 {
        let vecs = exponent_vectors(modes, 6);
        for m in &vecs {
            for n in &vecs {
                if m.iter().sum::<u32>() + n.iter().sum::<u32>() > 6 {
                    continue;
                }
                cases += 1;
                bad += usize::from(!verify_decomposition(m, n));
            }
        }
    }
    let detail = format!("printed identities hold: {printed:?}; exhaustive recursion {}/{cases} exact", cases - bad);
    outcome(printed.iter().all(|b| *b) && bad == 0, detail)
}

fn random_cubic(rng: &mut ChaCha8Rng, n: usize) -> NumPoly {
    let mut p = NumPoly::zero(n);
    for e in exponent_vectors(n, 3) {
        if e.iter().sum::<u32>() >= 1 {
            p = p.add(&NumPoly::monomial(e, rng.gen_range(-1.0..1.0))).unwrap();
        }
    }
    p
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = rng.gen_range(1..=3);
        let n2 = rng.gen_range(1..=4);
        let f = random_cubic(&mut rng, n);
        let g = random_cubic(&mut rng, n2);
        let k = Mat::from_fn(n2, n, |_, _| rng.gen_range(-1.5..1.5));
        worst = worst.max(theorem1_residual(&f, &g, &k, 4, i).unwrap_or(f64::INFINITY));
    }
    outcome(worst < 1e-10, format!("max residual {worst:.3e} over 100 instances (bound 1e-10)"))
}

fn criterion_3() -> Outcome {
    let gates = [
        GateSpec::cubic_qnd(),
        GateSpec::toffoli(),
        GateSpec::small_example(),
        GateSpec::cphase(4).unwrap(),
        GateSpec::cphase(5).unwrap(),
        GateSpec::cnz(4).unwrap(),
        GateSpec::cnz(5).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut runs = 0;
    for g in &gates {
        for s in [Strategy::I, Strategy::II, Strategy::III] {
            runs += 1;
            match plan(g, s).and_then(|p| p.verify(20, 0, 1e-8)) {
                Ok(c) => {
                    worst = worst.max(c.max_residual);
                    if c.max_residual >= 1e-8 {
                        failures.push(format!("{} {s}", g.name));
                    }
                }
                Err(e) => failures.push(format!("{} {s}: {e}", g.name)),
            }
        }
    }
    outcome(failures.is_empty(), format!("{runs} plans, max residual {worst:.3e} (bound 1e-8); failures {failures:?}"))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
    (&a + a.transpose()) * 0.5
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let z = CMat::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    z.qr().q()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut sym, mut gen, mut uni): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let n = rng.gen_range(1..=8);
        let a = random_symmetric(&mut rng, n);
        sym = sym.max(match measure_symmetric(&a) {
            Ok(plan) => {
                let o = &plan.network;
                let tan = Mat::from_diagonal(&nalgebra::DVector::from_iterator(n, plan.theta.iter().map(|t| t.tan())));
                max_abs(&(o.transpose() * tan * o - &a))
            }
            Err(_) => f64::INFINITY,
        });
    }
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        // B Cᵀ = S is symmetric when C = S B^{-T}.
        let b = Mat::from_fn(n, n, |i, j| rng.gen_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 });
        let s = random_symmetric(&mut rng, n);
        let cm = &s * b.transpose().try_inverse().unwrap();
        gen = gen.max(match measure_general(&b, &cm) {
            Ok(plan) => {
                let (bi, ci) = plan.implied();
                max_abs(&(bi - &b)).max(max_abs(&(ci - &cm)))
            }
            Err(_) => f64::INFINITY,
        });
    }
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let u = random_unitary(&mut rng, n);
        uni = uni.max(match unitary_ofo(&u) {
            Ok(f) => (f.reconstruct() - &u).iter().fold(0.0, |m: f64, z| m.max(z.norm())),
            Err(_) => f64::INFINITY,
        });
    }
    outcome(
        sym < 1e-10 && gen < 1e-10 && uni < 1e-9,
        format!("symmetric {sym:.3e}, general {gen:.3e} (bound 1e-10); unitary {uni:.3e} (bound 1e-9)"),
    )
}

fn binom(n: i64, k: i64) -> u64 {
    if k < 0 || n < k {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Term count of the partition construction for `V_{n,k}`.
fn expected_terms(n: usize, k: usize) -> u64 {
    let (n, l) = (n as i64, (k / 2) as i64);
    if k % 2 == 1 {
        binom(n - l - 1, l)
    } else {
        binom(n - l, l)
    }
}

fn criterion_5() -> Outcome {
    let mut inexact = Vec::new();
    let mut miscount = Vec::new();
    for n in 1..=10 {
        for k in 1..=n {
            let d = chow_elementary(n, k);
            if n <= 8 && d.expand().map_or(true, |e| e != elementary(n, k)) {
                inexact.push((n, k));
            }
            if d.crank() as u64 != expected_terms(n, k) {
                miscount.push((n, k, d.crank()));
            }
        }
    }
    let paper: Vec<Vec<usize>> =
        vec![vec![3, 1, 1, 1, 1], vec![1, 1, 3, 1, 1], vec![1, 1, 1, 1, 3], vec![2, 1, 2, 1, 1], vec![2, 1, 1, 1, 2], vec![1, 1, 2, 1, 2]];
    let mut got: Vec<Vec<usize>> = q_partitions(7, 2).into_iter().map(|p| p.0).collect();
    let mut want = paper.clone();
    got.sort();
    want.sort();
    outcome(
        inexact.is_empty() && miscount.is_empty() && got == want,
        format!("inexact {inexact:?}; term-count mismatches {miscount:?}; Q(7,2) = {} tuples matching: {}", got.len(), got == want),
    )
}

fn monomial(exps: Vec<u32>) -> Poly {
    Poly::monomial(exps, ScalarExpr::one())
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |id: &str, target: Poly, rank: usize, coeff: Option<ScalarExpr>| {
        let Ok(w) = waring_known(id) else {
            ok = false;
            notes.push(format!("{id}: missing"));
            return;
        };
        let exact = w.expand().is_ok_and(|e| e == target);
        let coeff_ok = coeff.map_or(true, |c| w.terms.iter().all(|(t, _)| t == &c || t == &(-&c)));
        ok &= exact && w.rank() == rank && coeff_ok;
        notes.push(format!("{id}: {} terms, exact {exact}", w.rank()));
    };
    check("cubic-qnd", monomial(vec![1, 2]), 3, None);
    check("toffoli", monomial(vec![1, 1, 1]), 4, Some(ScalarExpr::constant(rat(1, 24))));
    for n in 3..=6 {
        check(&format!("cnz({n})"), monomial(vec![1; n]), 1 << (n - 1), None);
    }
    outcome(ok, notes.join("; "))
}

/// Independent crank recursion with term counts taken from the constructed
/// decompositions rather than the closed form.
fn recursion_oracle(n: usize) -> usize {
    let mut crank: Vec<usize> = vec![1];
    for i in 1..n.saturating_sub(2) {
        let next = (1..=i).map(|k| chow_elementary(n - k + 1, n - i).crank() * crank[k - 1]).sum();
        crank.push(next);
    }
    let brank = |i: usize| (n - i + 1) * crank[i - 1];
    n + (1..=n.saturating_sub(3)).map(|k| (1..=k).map(brank).sum::<usize>()).sum::<usize>()
}

fn criterion_7() -> Outcome {
    let orders: Vec<usize> = (3..=8).collect();
    let Ok(t) = count_table(&orders) else {
        return outcome(false, "table construction failed");
    };
    let s1 = &t.rows[0];
    let s2 = &t.rows[1];
    let s3 = &t.rows[2];
    let oracle: Vec<usize> = orders.iter().map(|&n| recursion_oracle(n)).collect();
    let s1_ok = s1.computed == vec![3, 8, 27, 114, 639, 3936] && s1.computed == oracle;
    let s3_ok = s3.computed == vec![4, 16, 48, 128, 320, 768];
    let flagged: Vec<String> = s2
        .computed
        .iter()
        .zip(&s2.paper)
        .map(|(c, p)| match p {
            Some(p) if p == c => format!("{c}"),
            Some(p) => format!("{c}≠{p}"),
            None => format!("{c}"),
        })
        .collect();
    let s1_constructed: Vec<usize> = orders.iter().map(|&n| strategy1_counts(&GateSpec::cnz(n).unwrap(), 0).unwrap().iter().sum()).collect();
    outcome(
        s1_ok && s3_ok,
        format!(
            "Strategy I {:?} (oracle {:?}); Strategy III {:?}; Strategy II constructed vs published [{}] (informational); constructed Strategy I chain {:?}",
            s1.computed,
            oracle,
            s3.computed,
            flagged.join(", "),
            s1_constructed
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rows = Vec::new();
    let mut ok = true;
    let mut expect = |g: GateSpec, s: Strategy, ng: usize, gauss: Option<usize>| {
        let got = plan(&g, s).map(|p| (p.non_gaussian(), p.gaussian()));
        let pass = match &got {
            Ok((a, b)) => *a == ng && gauss.map_or(true, |w| *b == w),
            Err(_) => false,
        };
        ok &= pass;
        rows.push(format!("{} {s} {:?}", g.name, got.map_err(|e| e.to_string())));
    };
    expect(GateSpec::cubic_qnd(), Strategy::I, 2, Some(2));
    expect(GateSpec::toffoli(), Strategy::I, 3, Some(3));
    expect(GateSpec::toffoli(), Strategy::III, 4, Some(3));
    expect(GateSpec::cubic_qnd(), Strategy::III, 3, Some(2));
    expect(GateSpec::small_example(), Strategy::I, 6, None);
    expect(GateSpec::small_example(), Strategy::II, 5, None);
    expect(GateSpec::small_example(), Strategy::III, 6, None);
    for n in 3..=8 {
        expect(GateSpec::cphase(n).unwrap(), Strategy::I, 2 * (n - 2), None);
    }
    outcome(ok, rows.join("; "))
}

const CASES: [&[&str]; 4] = [
    &["--gate", "cubic-qnd", "--strategy", "1"],
    &["--gate", "toffoli", "--strategy", "3"],
    &["--gate", "small-example", "--strategy", "2"],
    &["--gate", "cnz", "--N", "4", "--strategy", "1"],
];

/// Hash of every file and stdout produced by compiling and verifying the cases.
fn digest_run(run: usize) -> Result<Vec<u8>, String> {
    let dir = std::env::temp_dir().join(format!("cvgate-acceptance-{}-{run}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let mut h = Sha256::new();
    for (i, case) in CASES.iter().enumerate() {
        let circuit = dir.join(format!("c{i}.json"));
        for cmd in ["compile", "verify"] {
            let mut args: Vec<String> = vec![cmd.into()];
            args.extend(case.iter().map(|s| s.to_string()));
            args.extend(["--seed".into(), "7".into(), "--out".into(), circuit.display().to_string()]);
            let out = Command::new(env!("CARGO_BIN_EXE_cvgate")).args(&args).output().map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Err(format!("{args:?} exited with {}", out.status));
            }
            // Paths differ between runs; hash the output with them removed.
            h.update(String::from_utf8_lossy(&out.stdout).replace(&dir.display().to_string(), "").as_bytes());
        }
        for suffix in ["", ".report", ".verify"] {
            let path = dir.join(format!("c{i}{suffix}.json"));
            h.update(std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(h.finalize().to_vec())
}

fn criterion_9() -> Outcome {
    let runs: Result<Vec<Vec<u8>>, String> = (0..3).map(digest_run).collect();
    match runs {
        Ok(runs) => {
            let same = runs.windows(2).all(|w| w[0] == w[1]);
            let hex: String = runs[0].iter().take(8).map(|b| format!("{b:02x}")).collect();
            outcome(same, format!("3 CLI runs over {} gates, sha256 prefix {hex}, identical: {same}", CASES.len()))
        }
        Err(e) => outcome(false, e),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("1 bracket identities", criterion_1, Duration::from_secs(60)),
        ("2 coupling identity", criterion_2, Duration::from_secs(10)),
        ("3 degree reduction", criterion_3, Duration::from_secs(120)),
        ("4 measurement synthesis", criterion_4, Duration::from_secs(30)),
        ("5 Chow constructions", criterion_5, Duration::from_secs(60)),
        ("6 Waring expansions", criterion_6, Duration::from_secs(10)),
        ("7 count table", criterion_7, Duration::from_secs(10)),
        ("8 worked-example counts", criterion_8, Duration::from_secs(10)),
        ("9 determinism", criterion_9, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let pass = o.passed && took <= limit;
        failed += usize::from(!pass);
        println!(
            "criterion {name}: {} ({:.2}s, limit {}s) {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            o.detail
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
