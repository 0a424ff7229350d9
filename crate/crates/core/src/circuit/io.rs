//! Versioned JSON circuit files and a box-drawing text rendering.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{BlockRecord, CircuitIR, FinalStage, GateRecord, GaussianAncilla, Metadata, NonGaussianAncilla};
use crate::error::{Error, Result};
use crate::polyring::{Poly, SMatrix, ScalarExpr};
use crate::strategies::{SignMode, Strategy};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyFile {
    nvars: usize,
    /// `(exponents, coefficient in prefix notation)`.
    terms: Vec<(Vec<u32>, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateFile {
    name: String,
    n: usize,
    v: PolyFile,
    gaussian_ancillas: Vec<GaussianFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianFile {
    mode: usize,
    state: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AncillaFile {
    step: usize,
    f: PolyFile,
    modes: usize,
    copies: usize,
    nullifiers: Vec<String>,
    description: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockFile {
    step: usize,
    k: Vec<Vec<String>>,
    n_in: usize,
    n_anc: usize,
    outcome_offset: usize,
    depends_on: Vec<usize>,
    provenance: String,
    sign_sensitive: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetadataFile {
    strategy: u8,
    sign_mode: String,
    non_gaussian: usize,
    gaussian: usize,
    formula_count: usize,
    squeezing_factor: String,
    statement: String,
    samples: usize,
    seed: u64,
    tolerance: Box<RawValue>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    schema_version: u32,
    gate: GateFile,
    ancillas: Vec<AncillaFile>,
    blocks: Vec<BlockFile>,
    final_stage: FinalFile,
    metadata: MetadataFile,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FinalFile {
    program: Vec<String>,
    displacement: String,
}

/// Decimal with 17 significant digits, enough to round-trip any `f64`.
pub fn float17(v: f64) -> Box<RawValue> {
    let text = if v.is_finite() { format!("{v:.16e}") } else { "null".into() };
    RawValue::from_string(text).expect("valid JSON number")
}

fn parse_float(raw: &RawValue) -> Result<f64> {
    raw.get().parse().map_err(|_| Error::Schema(format!("expected a number, got {}", raw.get())))
}

fn poly_out(p: &Poly) -> PolyFile {
    PolyFile { nvars: p.nvars(), terms: p.to_prefix_terms() }
}

fn poly_in(p: &PolyFile) -> Result<Poly> {
    Poly::from_prefix_terms(p.nvars, &p.terms)
}

fn matrix_out(k: &SMatrix) -> Vec<Vec<String>> {
    k.iter().map(|r| r.iter().map(ScalarExpr::to_prefix).collect()).collect()
}

fn matrix_in(k: &[Vec<String>]) -> Result<SMatrix> {
    k.iter().map(|r| r.iter().map(|e| ScalarExpr::from_prefix(e)).collect()).collect()
}

/// Circuit file text; identical circuits give identical bytes.
pub fn serialize(ir: &CircuitIR) -> Result<String> {
    let m = &ir.metadata;
    let file = CircuitFile {
        schema_version: SCHEMA_VERSION,
        gate: GateFile {
            name: ir.gate.name.clone(),
            n: ir.gate.n,
            v: poly_out(&ir.gate.v),
            gaussian_ancillas: ir.gaussian.iter().map(|g| GaussianFile { mode: g.mode, state: g.state.clone() }).collect(),
        },
        ancillas: ir
            .ancillas
            .iter()
            .map(|a| AncillaFile {
                step: a.step,
                f: poly_out(&a.f),
                modes: a.modes,
                copies: a.copies,
                nullifiers: a.nullifiers.clone(),
                description: a.description.clone(),
            })
            .collect(),
        blocks: ir
            .blocks
            .iter()
            .map(|b| BlockFile {
                step: b.step,
                k: matrix_out(&b.k),
                n_in: b.n_in,
                n_anc: b.n_anc,
                outcome_offset: b.outcome_offset,
                depends_on: b.depends_on.clone(),
                provenance: b.provenance.clone(),
                sign_sensitive: b.sign_sensitive,
            })
            .collect(),
        final_stage: FinalFile { program: ir.final_stage.program.clone(), displacement: ir.final_stage.displacement.clone() },
        metadata: MetadataFile {
            strategy: m.strategy.number(),
            sign_mode: m.sign_mode.name().into(),
            non_gaussian: m.non_gaussian,
            gaussian: m.gaussian,
            formula_count: m.formula_count,
            squeezing_factor: m.squeezing_factor.clone(),
            statement: m.statement.clone(),
            samples: m.samples,
            seed: m.seed,
            tolerance: float17(m.tolerance),
        },
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| Error::Schema(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Parse a circuit file, rejecting other schema versions and inconsistent structure.
pub fn deserialize(text: &str) -> Result<CircuitIR> {
    let version: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Schema(format!("malformed circuit file: {e}")))?;
    match version.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => return Err(Error::Schema(format!("schema version {v}, expected {SCHEMA_VERSION}"))),
        None => return Err(Error::Schema("missing schema_version".into())),
    }
    let f: CircuitFile = serde_json::from_str(text).map_err(|e| Error::Schema(format!("malformed circuit file: {e}")))?;
    let ir = CircuitIR {
        gate: GateRecord { name: f.gate.name, n: f.gate.n, v: poly_in(&f.gate.v)? },
        gaussian: f.gate.gaussian_ancillas.into_iter().map(|g| GaussianAncilla { mode: g.mode, state: g.state }).collect(),
        ancillas: f
            .ancillas
            .into_iter()
            .map(|a| {
                Ok(NonGaussianAncilla {
                    step: a.step,
                    f: poly_in(&a.f)?,
                    modes: a.modes,
                    copies: a.copies,
                    nullifiers: a.nullifiers,
                    description: a.description,
                })
            })
            .collect::<Result<_>>()?,
        blocks: f
            .blocks
            .into_iter()
            .map(|b| {
                Ok(BlockRecord {
                    step: b.step,
                    k: matrix_in(&b.k)?,
                    n_in: b.n_in,
                    n_anc: b.n_anc,
                    outcome_offset: b.outcome_offset,
                    depends_on: b.depends_on,
                    provenance: b.provenance,
                    sign_sensitive: b.sign_sensitive,
                })
            })
            .collect::<Result<_>>()?,
        final_stage: FinalStage { program: f.final_stage.program, displacement: f.final_stage.displacement },
        metadata: Metadata {
            strategy: Strategy::from_number(f.metadata.strategy)?,
            sign_mode: SignMode::parse(&f.metadata.sign_mode)?,
            non_gaussian: f.metadata.non_gaussian,
            gaussian: f.metadata.gaussian,
            formula_count: f.metadata.formula_count,
            squeezing_factor: f.metadata.squeezing_factor,
            statement: f.metadata.statement,
            samples: f.metadata.samples,
            seed: f.metadata.seed,
            tolerance: parse_float(&f.metadata.tolerance)?,
        },
    };
    if ir.gate.v.nvars() != ir.gate.n {
        return Err(Error::Schema("gate potential arity differs from n".into()));
    }
    ir.check_structure()?;
    Ok(ir)
}

/// Left-to-right diagram: inputs, ancilla lines, coupling blocks, final
/// variable-beamsplitter and homodyne stage, then the squeezed-ancilla wrapper.
pub fn render_text(ir: &CircuitIR) -> String {
    let mut out = String::new();
    let n = ir.gate.n;
    let _ = writeln!(out, "gate {} on {n} mode(s), strategy {}", ir.gate.name, ir.metadata.strategy);
    let _ = writeln!(out, "V = {}", ir.gate.v);
    let stages: Vec<String> = ir
        .blocks
        .iter()
        .map(|b| format!("K{}", b.step))
        .chain(std::iter::once("VBS+HD".to_string()))
        .collect();
    let cell = |label: &str, hit: bool| {
        if hit {
            format!("─┤{label:^6}├─")
        } else {
            "─".repeat(10)
        }
    };
    for i in 0..n {
        let mut line = format!("{:<10}──", format!("in x{}", i + 1));
        for st in &stages {
            line.push_str(&cell(st, true));
        }
        let _ = writeln!(out, "{line}── to wrapper");
    }
    for (a, b) in ir.ancillas.iter().zip(&ir.blocks) {
        for j in 0..a.modes {
            let mut line = format!("{:<10}", format!("anc {}.{}", a.step, j + 1));
            line.push_str(&" ".repeat(10 * (b.step - 1)));
            line.push_str("──");
            line.push_str(&cell(&stages[b.step - 1], true));
            let _ = writeln!(out, "{line}──▷ s{}", b.outcome_offset + j + 1);
        }
    }
    let _ = writeln!(out);
    for (a, b) in ir.ancillas.iter().zip(&ir.blocks) {
        let copies = if a.copies > 1 { format!(" ×{}", a.copies) } else { String::new() };
        let _ = writeln!(out, "ancilla {}: {} mode(s){copies}, f = {}", a.step, a.modes, a.f);
        for m in &a.nullifiers {
            let _ = writeln!(out, "    nullifier {m} = 0");
        }
        let deps: Vec<String> = b.depends_on.iter().map(|d| format!("s{}", d + 1)).collect();
        let deps = if deps.is_empty() { "none".to_string() } else { deps.join(", ") };
        let _ = writeln!(out, "block K{}: {}×{} coupling, feedforward from {deps}", b.step, b.n_anc, b.n_in);
    }
    let _ = writeln!(out, "final: variable beamsplitter network and homodyne on {n} mode(s) → m");
    let _ = writeln!(out, "wrapper: {n} x-squeezed ancilla(s), half beamsplitters, {}", ir.final_stage.displacement);
    let _ = writeln!(
        out,
        "modes: {} non-Gaussian, {} Gaussian; {} (S = {} per mode)",
        ir.non_gaussian(),
        ir.gaussian.len(),
        ir.metadata.statement,
        ir.metadata.squeezing_factor
    );
    out
}
