//! `cvgate`: compile quadrature gates into measurement-based circuits, verify
//! them, and reproduce the published counts and examples.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvgate::circuit::{build_circuit, deserialize, float17, render_text, serialize, verify_circuit, CircuitIR};
use cvgate::decompose::{chow_auto, q_partitions, rank_functions};
use cvgate::error::Error;
use cvgate::polyring::Rational;
use cvgate::strategies::{count_table, plan, GateSpec, Plan, SignMode, Strategy, VerifiedPlan};
use cvgate::weyl::{anticomm_decompose, split_hamiltonian, trotter_sequence, verify_decomposition, WeylOp};
use serde::Serialize;
use serde_json::value::RawValue;

#[derive(Parser)]
#[command(name = "cvgate", version, about = "Measurement-based compiler for continuous-variable quadrature gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan, verify and write a circuit file with a JSON report beside it.
    Compile(GateArgs),
    /// Check a circuit end to end: chain, couplings, final measurement, wrapper.
    Verify(VerifyArgs),
    /// Ancilla counts for one gate under each strategy.
    Count(GateArgs),
    /// Counts for C^N Z gates beside the published table.
    Table(TableArgs),
    /// Chow, b-matrix and Waring decompositions of a polynomial.
    Decompose(GateArgs),
    /// Split a Hermitian operator into quadrature-gate generators.
    DecomposeHamiltonian(HamiltonianArgs),
    /// Reproduce the worked examples.
    Examples,
}

#[derive(Args, Clone)]
struct GateArgs {
    /// Preset (cubic-qnd, toffoli, small-example, cphase, cnz) or `custom`.
    #[arg(long)]
    gate: Option<String>,
    /// Gate potential V(x), e.g. "x1*x2^2".
    #[arg(long)]
    poly: Option<String>,
    /// Order of cphase / cnz presets.
    #[arg(long = "N")]
    order: Option<usize>,
    /// Number of modes for a custom potential (defaults to the largest index used).
    #[arg(long)]
    modes: Option<usize>,
    /// Ancilla strategy; compile and verify default to 1, count shows all three.
    #[arg(long, value_parser = ["1", "2", "3"])]
    strategy: Option<String>,
    /// How even roots of outcomes are handled (assume-positive or duplicate).
    #[arg(long = "sign-mode", default_value = "assume-positive")]
    sign_mode: String,
    /// Circuit file to write (default `<gate>-s<strategy>.circuit.json`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Circuit file to check; otherwise the gate is compiled first.
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[command(flatten)]
    gate: GateArgs,
}

#[derive(Args)]
struct TableArgs {
    /// Largest order; the table covers 3..=N.
    #[arg(long = "N", default_value_t = 8)]
    order: usize,
}

#[derive(Args)]
struct HamiltonianArgs {
    /// Operator text in x and p, e.g. "x1^2*p1 + p1*x1^2".
    #[arg(long)]
    poly: String,
    /// Evolution time as a rational, e.g. "1/2".
    #[arg(long, default_value = "1")]
    time: String,
    #[arg(long, default_value_t = 1)]
    steps: usize,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::UnknownGate(_) | Error::InvalidGate(_) | Error::Schema(_) | Error::NonHermitian => 2,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 4, message: format!("{}: {e}", path.display()) }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn beside(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.json"))
}

impl GateArgs {
    fn gate(&self) -> Result<GateSpec, Failure> {
        match (self.gate.as_deref(), self.poly.as_deref()) {
            (Some("custom") | None, Some(p)) => Ok(GateSpec::from_text(p, self.modes)?),
            (Some("custom"), None) => Err(input("--gate custom needs --poly")),
            (Some(name), None) => Ok(GateSpec::preset(name, self.order)?),
            (Some(_), Some(_)) => Err(input("--poly is only used with --gate custom")),
            (None, None) => Err(input("give --gate or --poly")),
        }
    }

    fn strategy(&self) -> Result<Option<Strategy>, Failure> {
        self.strategy.as_deref().map(|s| Ok(Strategy::from_number(s.parse().map_err(|_| input("bad strategy"))?)?)).transpose()
    }

    fn sign_mode(&self) -> Result<SignMode, Failure> {
        Ok(SignMode::parse(&self.sign_mode)?)
    }

    fn plan(&self, gate: &GateSpec) -> Result<Plan, Failure> {
        let s = self.strategy()?.unwrap_or(Strategy::I);
        Ok(plan(gate, s)?.with_sign_mode(self.sign_mode()?))
    }

    fn verified(&self) -> Result<VerifiedPlan, Failure> {
        let gate = self.gate()?;
        Ok(self.plan(&gate)?.verified(self.trials, self.seed, self.tolerance)?)
    }

    fn out_path(&self, gate: &GateSpec, strategy: Strategy) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let name: String = gate.name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
            PathBuf::from(format!("{name}-s{}.circuit.json", strategy.number()))
        })
    }
}

fn print_header(trials: usize, seed: u64, tolerance: f64) {
    println!("sampling: {trials} points, seed {seed}, tolerance {tolerance:e}");
}

fn print_plan(p: &Plan) {
    println!("gate {} on {} mode(s): V = {}", p.gate.name, p.gate.n, p.gate.v);
    println!("strategy {}, sign mode {}", p.strategy, p.sign_mode.name());
    for (i, st) in p.steps.iter().enumerate() {
        let flag = if st.sign_sensitive { ", even root of outcomes" } else { "" };
        println!("  f{} on {} mode(s) [{}{flag}]: {}", i + 1, st.dim(), st.provenance.name(), st.f);
    }
    println!("non-Gaussian ancilla modes: {}", p.non_gaussian());
    println!("Gaussian (squeezed) ancilla modes: {}", p.gaussian());
}

#[derive(Serialize)]
struct CompileReport<'a> {
    gate: &'a str,
    strategy: u8,
    sign_mode: &'a str,
    non_gaussian: usize,
    gaussian: usize,
    formula_count: usize,
    step_modes: Vec<usize>,
    samples: usize,
    seed: u64,
    tolerance: Box<RawValue>,
    max_residual: Box<RawValue>,
    max_diamond_gap: Box<RawValue>,
    passed: bool,
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

fn compile(args: &GateArgs) -> Result<(), Failure> {
    let vp = args.verified()?;
    print_header(args.trials, args.seed, args.tolerance);
    print_plan(&vp.plan);
    let ir = build_circuit(&vp)?;
    print!("{}", render_text(&ir));
    let path = args.out_path(&vp.plan.gate, vp.plan.strategy);
    write_file(&path, &serialize(&ir)?)?;
    let report = CompileReport {
        gate: &vp.plan.gate.name,
        strategy: vp.plan.strategy.number(),
        sign_mode: vp.plan.sign_mode.name(),
        non_gaussian: vp.plan.non_gaussian(),
        gaussian: vp.plan.gaussian(),
        formula_count: vp.plan.formula_count,
        step_modes: vp.plan.steps.iter().map(|s| s.dim()).collect(),
        samples: vp.check.samples,
        seed: vp.check.seed,
        tolerance: float17(vp.tolerance),
        max_residual: float17(vp.check.max_residual),
        max_diamond_gap: float17(vp.check.max_diamond_gap),
        passed: vp.check.passed,
    };
    let rpath = beside(&path, "report");
    write_file(&rpath, &to_json(&report))?;
    println!("chain residual {:e}, star/diamond gap {:e}", vp.check.max_residual, vp.check.max_diamond_gap);
    println!("wrote {} and {}", path.display(), rpath.display());
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let g = &args.gate;
    let (ir, path): (CircuitIR, Option<PathBuf>) = match &args.circuit {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_error(p, e))?;
            (deserialize(&text)?, Some(p.clone()))
        }
        None => {
            let vp = g.verified()?;
            let ir = build_circuit(&vp)?;
            let path = g.out.clone();
            if let Some(p) = &path {
                write_file(p, &serialize(&ir)?)?;
            }
            (ir, path)
        }
    };
    print_header(g.trials, g.seed, g.tolerance);
    let report = verify_circuit(&ir, g.trials, g.seed, g.tolerance)?;
    println!("gate {} on {} mode(s), strategy {}", ir.gate.name, ir.gate.n, ir.metadata.strategy);
    println!("chain residual above degree 2: {:e}", report.chain_residual);
    println!("star/diamond gap: {:e}", report.diamond_gap);
    for (i, r) in report.theorem1.iter().enumerate() {
        println!("block K{}: coupling identity residual {r:e}", i + 1);
    }
    println!("final measurement reconstruction: {:e}", report.final_stage);
    println!("wrapper push-through: {}", if report.wrapper { "exact" } else { "FAILED" });
    if let Some(p) = &path {
        let rpath = beside(p, "verify");
        write_file(&rpath, &report.to_json())?;
        println!("wrote {}", rpath.display());
    }
    if report.passed() {
        println!("PASS");
        Ok(())
    } else {
        Err(Failure { code: 3, message: format!("verification failed: {}", report.failures.join("; ")) })
    }
}

fn count(args: &GateArgs) -> Result<(), Failure> {
    let gate = args.gate()?;
    let mode = args.sign_mode()?;
    let strategies = match args.strategy()? {
        Some(s) => vec![s],
        None => vec![Strategy::I, Strategy::II, Strategy::III],
    };
    println!("gate {} on {} mode(s): V = {}", gate.name, gate.n, gate.v);
    for s in strategies {
        match plan(&gate, s) {
            Ok(p) => {
                let p = p.with_sign_mode(mode);
                let dims: Vec<String> = p.steps.iter().map(|st| st.dim().to_string()).collect();
                let dims = if dims.is_empty() { "none".to_string() } else { dims.join(" + ") };
                println!(
                    "strategy {s}: {} non-Gaussian ({dims}), {} Gaussian, formula {}",
                    p.non_gaussian(),
                    p.gaussian(),
                    p.formula_count
                );
            }
            Err(e) => println!("strategy {s}: not available ({e})"),
        }
    }
    Ok(())
}

fn table(args: &TableArgs) -> Result<(), Failure> {
    if args.order < 3 {
        return Err(input("--N must be at least 3"));
    }
    let orders: Vec<usize> = (3..=args.order).collect();
    let t = count_table(&orders)?;
    print!("{t}");
    println!("Values after `≠` are the published ones. The published Strategy I and II rows");
    println!("correspond to the crank recursion and to the constructed Strategy I chain.");
    Ok(())
}

fn decompose(args: &GateArgs) -> Result<(), Failure> {
    let gate = args.gate()?;
    println!("V = {}", gate.v);
    for k in (3..=gate.order()).rev() {
        let part = gate.v.homogeneous_part(k);
        if part.is_zero() {
            continue;
        }
        println!("order {k}: {part}");
        let chow = chow_auto(&part)?;
        let r = rank_functions(&chow);
        println!("  Chow: {chow}");
        let closed = r.closed_form.map_or(String::new(), |c| format!(", closed form {c}"));
        println!("  crank {}, brank {} (order*crank {}){closed}, exact: {}", r.crank, r.brank, r.brank_shortcut, chow.verify());
        let bmd = cvgate::decompose::extract_bmd(&chow)?;
        println!("  B = {}", bmd.b);
        match gate.waring_part(k) {
            Ok(w) => {
                println!("  Waring rank {} (exact: {})", w.rank(), w.verify());
                for (c, l) in &w.terms {
                    println!("    {c} * ({l})^{k}");
                }
            }
            Err(e) => println!("  Waring: {e}"),
        }
    }
    Ok(())
}

fn decompose_hamiltonian(args: &HamiltonianArgs) -> Result<(), Failure> {
    let h = WeylOp::parse(&args.poly)?;
    let t: Rational = args.time.parse().map_err(|_| input(format!("bad time `{}`", args.time)))?;
    println!("H = {h}");
    for term in split_hamiltonian(&h)? {
        print!("  {term}");
        if term.kind == cvgate::weyl::TermKind::Anticomm {
            print!(" = {}", anticomm_decompose(&term.m, &term.n));
        }
        println!();
    }
    println!("Trotter sequence ({} step(s), t = {t}):", args.steps);
    for tok in trotter_sequence(&h, &t, args.steps)? {
        println!("  {tok}");
    }
    Ok(())
}

fn examples() -> Result<(), Failure> {
    let mut ok = true;
    let mut check = |label: String, pass: bool| {
        println!("{} {label}", if pass { "ok  " } else { "FAIL" });
        ok &= pass;
    };
    println!("Bracket decompositions");
    for (m, n) in [(vec![1, 1], vec![1, 1]), (vec![3, 1], vec![2, 2]), (vec![1, 1, 1], vec![1, 1, 1])] {
        let tree = anticomm_decompose(&m, &n);
        check(format!("{} = {tree}", cvgate::weyl::SplitTerm { weight: cvgate::polyring::int(1), kind: cvgate::weyl::TermKind::Anticomm, m: m.clone(), n: n.clone() }), verify_decomposition(&m, &n));
    }
    println!("Worked examples (non-Gaussian + Gaussian modes)");
    let cases: Vec<(GateSpec, Strategy, usize)> = vec![
        (GateSpec::cubic_qnd(), Strategy::I, 2),
        (GateSpec::cubic_qnd(), Strategy::III, 3),
        (GateSpec::toffoli(), Strategy::I, 3),
        (GateSpec::toffoli(), Strategy::III, 4),
        (GateSpec::small_example(), Strategy::I, 6),
        (GateSpec::small_example(), Strategy::II, 5),
        (GateSpec::small_example(), Strategy::III, 6),
    ];
    for (g, s, want) in cases {
        let p = plan(&g, s)?;
        let passed = p.verify(20, 0, 1e-8)?.passed;
        check(format!("{} strategy {s}: {} + {} (expected {want})", g.name, p.non_gaussian(), p.gaussian()), passed && p.non_gaussian() == want);
    }
    for n in 3..=8 {
        let p = plan(&GateSpec::cphase(n)?, Strategy::I)?;
        check(format!("cphase({n}) strategy I: {} (expected {})", p.non_gaussian(), 2 * (n - 2)), p.non_gaussian() == 2 * (n - 2));
    }
    println!("Partitions");
    let q = q_partitions(7, 2);
    check(format!("Q(7,2) has {} tuples", q.len()), q.len() == 6);
    println!("Counts for C^N Z");
    let t = count_table(&[3, 4, 5, 6])?;
    print!("{t}");
    check("Strategy I and III rows match".into(), t.rows[0].all_match() && t.rows[2].all_match());
    if ok {
        Ok(())
    } else {
        Err(Failure { code: 3, message: "some examples failed".into() })
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile(a) => compile(&a),
        Command::Verify(a) => verify(&a),
        Command::Count(a) => count(&a),
        Command::Table(a) => table(&a),
        Command::Decompose(a) => decompose(&a),
        Command::DecomposeHamiltonian(a) => decompose_hamiltonian(&a),
        Command::Examples => examples(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
