use crate::args::*;
use crate::error::CliError;
use crate::output::{sha256_hex, Inputs, Output};
use qcs_arch::decoder::{build_layout_table, single_fault_failures};
use qcs_arch::layout::{build_layout, QubitLayout, Scheme};
use qcs_arch::placement::{build_multilayout, CalibrationEntry, Connectivity, CouplingGraph, EdgeCosts};
use qcs_arch::protocol::{steane_cx, steane_memory, CxConfig};
use qcs_arch::synthesis::{synth_code_switch, synth_full_ec, synth_logical_gate};
use qcs_compiler::bench::{comparator, grover, ripple_adder};
use qcs_compiler::cost::{evaluate, CostModel, Report};
use qcs_compiler::program::{LogicalProgram, Op};
use qcs_compiler::{compile, qasm, CsPass};
use qcs_core::codes::{CodeKind, LogicalGate, SwitchDirection};
use qcs_core::sim::estimate::{logical_error_rate, pseudo_threshold, sweep_csv, AdaptivePolicy, Protocol, SweepRow};
use qcs_core::sim::noise::NoiseModel;
use serde_json::{json, Value};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

fn code_kind(mode: ModeArg) -> CodeKind {
    match mode {
        ModeArg::Steane => CodeKind::Steane,
        ModeArg::Rm => CodeKind::ReedMuller,
    }
}

fn require_seed(seed: Option<u64>, command: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Usage(format!("`{command}` is stochastic; pass --seed")))
}

fn layout_of(scheme: Scheme) -> Result<QubitLayout, CliError> {
    Ok(build_layout(scheme).map_err(CliError::domain)?.0)
}

pub fn layout(a: &LayoutArgs) -> Result<Output, CliError> {
    let (layout, metrics) = build_layout(a.scheme).map_err(CliError::domain)?;
    let mut text = format!("scheme {}\n", a.scheme);
    let m = serde_json::to_value(&metrics).expect("metrics");
    for (k, v) in m.as_object().expect("struct") {
        let _ = writeln!(text, "{k:<24} {v}");
    }
    text.push_str(&layout.to_ascii());
    let result = json!({
        "scheme": a.scheme,
        "metrics": metrics,
        "layout": layout.to_json().map_err(CliError::domain)?,
    });
    let mut row = serde_json::Map::new();
    row.insert("scheme".into(), json!(a.scheme));
    row.extend(m.as_object().cloned().expect("struct"));
    Ok(Output::new(result, text).with_rows(vec![Value::Object(row)]))
}

pub fn synth(a: &SynthArgs) -> Result<Output, CliError> {
    let mode = code_kind(a.mode);
    let gate = match (a.gadget, a.gate) {
        (Gadget::Gate, None) => return Err(CliError::Usage("`--gadget gate` needs --gate".into())),
        (Gadget::Gate, Some(g)) => Some(match g {
            GateArg::H => LogicalGate::H,
            GateArg::S => LogicalGate::S,
            GateArg::T => LogicalGate::T,
            GateArg::X => LogicalGate::X,
            GateArg::Z => LogicalGate::Z,
        }),
        (_, Some(_)) => return Err(CliError::Usage("--gate only applies to `--gadget gate`".into())),
        (_, None) => None,
    };
    let layout = layout_of(a.scheme)?;
    let out = match a.gadget {
        Gadget::Ec => synth_full_ec(&layout, mode),
        Gadget::Gate => synth_logical_gate(&layout, gate.expect("checked"), mode),
        Gadget::CsToRm => synth_code_switch(&layout, SwitchDirection::SteaneToRm),
        Gadget::CsToSteane => synth_code_switch(&layout, SwitchDirection::RmToSteane),
    }
    .map_err(CliError::domain)?;
    let c = &out.circuit;
    let result = json!({
        "qubits": c.n_qubits,
        "time_steps": c.num_steps(),
        "cx_layers": c.latency(),
        "cx_count": c.cx_count(),
        "measurements": c.num_records(),
        "ec_rounds": out.rounds.len(),
        "locations": c.location_count(),
        "circuit": c.to_text(),
    });
    Ok(Output::new(result, c.to_text()))
}

fn protocol(sel: &ProtocolSelect) -> Result<Box<dyn Protocol>, CliError> {
    Ok(match sel.protocol {
        ProtocolArg::Memory => Box::new(steane_memory(&layout_of(sel.scheme)?).map_err(CliError::domain)?),
        ProtocolArg::Cx => Box::new(steane_cx(CxConfig { flags: sel.flags, ghz_len: sel.ghz_len }).map_err(CliError::domain)?),
    })
}

fn noise(p: f64) -> Result<NoiseModel, CliError> {
    NoiseModel::new(p).map_err(|e| CliError::Usage(e.to_string()))
}

fn sweep_text(rows: &[SweepRow]) -> String {
    let mut s = format!("{:>10} {:>12} {:>12} {:>12} {:>10}\n", "p_e", "rate", "ci_low", "ci_high", "trials");
    for r in rows {
        let e = &r.estimate;
        let _ = writeln!(s, "{:>10.3e} {:>12.4e} {:>12.4e} {:>12.4e} {:>10}", r.p, e.rate, e.ci_low, e.ci_high, e.trials);
    }
    s
}

pub fn simulate(a: &SimulateArgs, seed: Option<u64>) -> Result<Output, CliError> {
    let seed = require_seed(seed, "simulate")?;
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let noises = a.p_e.iter().map(|&p| noise(p)).collect::<Result<Vec<_>, _>>()?;
    let proto = protocol(&a.protocol)?;
    let rows: Vec<SweepRow> = a.p_e.iter().zip(noises).map(|(&p, n)| SweepRow { p, estimate: logical_error_rate(proto.as_ref(), n, a.trials, seed) }).collect();
    let text = sweep_text(&rows);
    Ok(Output::new(json!({ "rows": rows }), text).with_csv(sweep_csv(&rows)))
}

pub fn threshold(a: &ThresholdArgs, seed: Option<u64>) -> Result<Output, CliError> {
    let seed = require_seed(seed, "threshold")?;
    noise(a.lo)?;
    noise(a.hi)?;
    if !(a.lo < a.hi && a.factor > 1.0 && a.start_trials > 0 && a.max_trials >= a.start_trials) {
        return Err(CliError::Usage("need --lo < --hi, --factor > 1 and 0 < --start-trials <= --max-trials".into()));
    }
    let proto = protocol(&a.protocol)?;
    let policy = AdaptivePolicy { start: a.start_trials, growth: 4, cap: a.max_trials, ..AdaptivePolicy::default() };
    let r = pseudo_threshold(proto.as_ref(), seed, (a.lo, a.hi), a.factor, policy).map_err(|e| CliError::NonConvergence(e.to_string()))?;
    let mut text = sweep_text(&r.evaluations);
    let _ = writeln!(text, "p* = {:.4e} (bracket {:.4e} .. {:.4e})", r.p_star, r.bracket.0, r.bracket.1);
    eprintln!("p* = {:.4e}", r.p_star);
    let csv = sweep_csv(&r.evaluations);
    Ok(Output::new(&r, text).with_csv(csv))
}

pub fn decode_table(a: &DecodeTableArgs) -> Result<Output, CliError> {
    let layout = layout_of(a.scheme)?;
    let (table, out, block) = build_layout_table(&layout, code_kind(a.mode)).map_err(CliError::domain)?;
    let (bad, total) = single_fault_failures(&out.circuit, &block, &table);
    let blob = table.to_blob();
    if let Some(path) = &a.table {
        std::fs::write(path, &blob).map_err(|source| CliError::Write { path: path.clone(), source })?;
    }
    let header = table.header();
    let result = json!({
        "header": header,
        "single_faults": total,
        "single_fault_failures": bad,
        "blob_bytes": blob.len(),
        "blob_sha256": sha256_hex(&blob),
    });
    let text = format!(
        "{:?} table: {} entries, key width {}, {} of {} single faults fail\n",
        header.mode, header.entry_count, header.key_width, bad, total
    );
    Ok(Output::new(&result, text).with_rows(vec![json!({
        "mode": header.mode,
        "entries": header.entry_count,
        "key_width": header.key_width,
        "single_faults": total,
        "single_fault_failures": bad,
    })]))
}

/// Smallest near-square grid with at least `n` nodes, honouring explicit dimensions.
fn grid_dims(n: usize, rows: Option<usize>, cols: Option<usize>) -> Result<(usize, usize), CliError> {
    let n = n.max(2);
    let (r, c) = match (rows, cols) {
        (Some(r), Some(c)) => (r, c),
        (Some(r), None) => (r, n.div_ceil(r.max(1))),
        (None, Some(c)) => (n.div_ceil(c.max(1)), c),
        (None, None) => {
            let r = (1..=n).find(|r| r * r >= n).expect("n >= 1");
            (r, n.div_ceil(r))
        }
    };
    if r * c < n || r == 0 || c == 0 {
        return Err(CliError::Usage(format!("a {r}x{c} grid cannot hold {n} logical qubits")));
    }
    Ok((r, c))
}

/// Resolved placement: coupling graph (none for all-to-all), physical qubits per
/// logical qubit, and a summary for the report.
struct Placement {
    graph: Option<CouplingGraph>,
    physical_per_logical: usize,
    summary: Value,
}

struct PlacementCtx<'a> {
    sel: &'a PlacementSelect,
    seed: Option<u64>,
    calibration: Option<Vec<CalibrationEntry>>,
    cost: CostModel,
}

impl<'a> PlacementCtx<'a> {
    /// Reads every file the placement needs before any heavy work.
    fn load(sel: &'a PlacementSelect, seed: Option<u64>, inputs: &mut Inputs) -> Result<Self, CliError> {
        if sel.placement.is_none() && (sel.rows.is_some() || sel.cols.is_some() || sel.calibration.is_some() || sel.edge_samples.is_some()) {
            return Err(CliError::Usage("--rows, --cols, --calibration and --edge-samples need --placement".into()));
        }
        if sel.edge_samples.is_some() {
            require_seed(seed, "--edge-samples")?;
        }
        let calibration = match &sel.calibration {
            Some(path) => {
                let v: Value = serde_json::from_str(&inputs.read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                let list = v.get("edges").cloned().unwrap_or(v);
                Some(serde_json::from_value(list).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?)
            }
            None => None,
        };
        let cost = match &sel.cost {
            Some(path) => serde_json::from_str(&inputs.read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
            None => CostModel::default(),
        };
        cost.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(PlacementCtx { sel, seed, calibration, cost })
    }

    fn resolve(&self, n_qubits: usize, base: &QubitLayout) -> Result<Placement, CliError> {
        let physical_per_logical = base.phys_qubits();
        let Some(scheme) = self.sel.placement else {
            return Ok(Placement { graph: None, physical_per_logical, summary: json!({ "placement": "all-to-all" }) });
        };
        let (rows, cols) = grid_dims(n_qubits, self.sel.rows, self.sel.cols)?;
        let costs = match (&self.calibration, self.sel.edge_samples) {
            (Some(table), _) => EdgeCosts::Calibrated(table.clone()),
            (None, Some(samples)) => EdgeCosts::Simulated { samples, seed: self.seed.expect("checked in load") },
            (None, None) => EdgeCosts::LatencyOnly,
        };
        let ml = build_multilayout(scheme, rows, cols, base, CodeKind::Steane, &costs).map_err(CliError::domain)?;
        let summary = json!({ "placement": scheme, "rows": rows, "cols": cols, "edges": ml.calibration() });
        Ok(Placement { graph: Some(ml.coupling_graph()), physical_per_logical, summary })
    }
}

fn report_text(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "cs_count           {}", r.cs_count);
    let _ = writeln!(s, "swap_count         {}", r.swap_count);
    let _ = writeln!(s, "infidelity_norm    {:.2}", r.infidelity_norm);
    let _ = writeln!(s, "latency_norm       {:.2}", r.latency_norm);
    let _ = writeln!(s, "critical_path_norm {:.2}", r.critical_path_norm);
    let _ = writeln!(s, "space_time         {:.1}", r.space_time);
    for (op, n) in &r.per_op_histogram {
        let _ = writeln!(s, "  {op:<16} {n}");
    }
    s
}

fn report_row(r: &Report) -> serde_json::Map<String, Value> {
    let mut m = serde_json::to_value(r).expect("report").as_object().cloned().expect("struct");
    m.remove("per_op_histogram");
    m
}

pub fn compile_cmd(a: &CompileArgs, seed: Option<u64>, inputs: &mut Inputs) -> Result<Output, CliError> {
    let source = inputs.read(&a.input)?;
    let ctx = PlacementCtx::load(&a.placement, seed, inputs)?;
    let parsed = qasm::parse_program(&source).map_err(|e| CliError::Domain(format!("{}: {e}", a.input.display())))?;
    for w in &parsed.warnings {
        eprintln!("{}: warning: {w}", a.input.display());
    }
    let base = layout_of(Scheme::Oecf)?;
    let placement = ctx.resolve(parsed.program.n_qubits, &base)?;
    let compiled = compile(&parsed.program, placement.graph.as_ref(), a.pass, &ctx.cost, placement.physical_per_logical).map_err(|e| CliError::Domain(format!("{}: {e}", a.input.display())))?;
    let program_text = qasm::emit(&compiled.program);
    if let Some(path) = &a.emit {
        std::fs::write(path, &program_text).map_err(|source| CliError::Write { path: path.clone(), source })?;
    }
    let mut text = String::new();
    if a.emit.is_none() {
        text.push_str(&program_text);
    }
    text.push_str(&report_text(&compiled.report));
    let result = json!({
        "pass": a.pass,
        "placement": placement.summary,
        "cost_model": ctx.cost,
        "warnings": parsed.warnings,
        "report": compiled.report,
        "program": if a.emit.is_none() { Value::String(program_text) } else { Value::Null },
    });
    Ok(Output::new(result, text).with_rows(vec![Value::Object(report_row(&compiled.report))]))
}

pub fn evaluate_cmd(a: &EvaluateArgs, seed: Option<u64>, inputs: &mut Inputs) -> Result<Output, CliError> {
    let source = inputs.read(&a.input)?;
    let ctx = PlacementCtx::load(&a.placement, seed, inputs)?;
    let parsed = qasm::parse_isa(&source).map_err(|e| CliError::Domain(format!("{}: {e}", a.input.display())))?;
    let base = layout_of(Scheme::Oecf)?;
    let placement = ctx.resolve(parsed.program.n_qubits, &base)?;
    let mut cost = ctx.cost.clone();
    if let Some(g) = &placement.graph {
        check_coupled(&parsed.program, g).map_err(|e| CliError::Domain(format!("{}: {e}", a.input.display())))?;
        cost = cost.with_graph(g);
    }
    let n_nodes = placement.graph.as_ref().map_or(parsed.program.n_qubits, |g| g.num_qubits());
    let report = evaluate(&parsed.program, &cost, n_nodes * placement.physical_per_logical).map_err(|e| CliError::Domain(format!("{}: {e}", a.input.display())))?;
    let result = json!({ "placement": placement.summary, "cost_model": cost, "report": report });
    Ok(Output::new(result, report_text(&report)).with_rows(vec![Value::Object(report_row(&report))]))
}

fn check_coupled(p: &LogicalProgram, g: &CouplingGraph) -> Result<(), String> {
    if p.n_qubits > g.num_qubits() {
        return Err(format!("program needs {} qubits but the placement has {}", p.n_qubits, g.num_qubits()));
    }
    for (index, instr) in p.instrs.iter().enumerate() {
        if matches!(instr.op, Op::Cx | Op::Swap) && !g.are_adjacent(instr.qubits[0], instr.qubits[1]) {
            return Err(format!("instruction {index}: `{instr}` acts on uncoupled logical qubits"));
        }
    }
    Ok(())
}

pub fn bench(a: &BenchArgs) -> Result<Output, CliError> {
    if a.bits == 0 || a.grover_qubits < 3 {
        return Err(CliError::Usage("need --bits >= 1 and --grover-qubits >= 3".into()));
    }
    let programs = [
        (format!("adder{}", a.bits), ripple_adder(a.bits)),
        (format!("comparator{}", a.bits), comparator(a.bits)),
        (format!("grover{}x{}", a.grover_qubits, a.grover_iterations), grover(a.grover_qubits, a.grover_iterations)),
    ];
    let base = layout_of(Scheme::Oecf)?;
    let cost = CostModel::default();
    let mut graphs: HashMap<(Connectivity, usize, usize), CouplingGraph> = HashMap::new();
    let mut rows = Vec::new();
    let mut text = format!(
        "{:<14} {:<5} {:>6} {:>6} {:>6} {:>9} {:>9} {:>10} {:>10} {:>7} {:>7}\n",
        "program", "conn", "swaps", "cs_ag", "cs_aw", "inf_ag", "inf_aw", "lat_ag", "lat_aw", "cs_red", "lat_red"
    );
    for (name, program) in &programs {
        let (r, c) = grid_dims(program.n_qubits, None, None)?;
        for &scheme in &a.placements {
            if !graphs.contains_key(&(scheme, r, c)) {
                let ml = build_multilayout(scheme, r, c, &base, CodeKind::Steane, &EdgeCosts::LatencyOnly).map_err(CliError::domain)?;
                graphs.insert((scheme, r, c), ml.coupling_graph());
            }
            let g = &graphs[&(scheme, r, c)];
            let run = |pass| compile(program, Some(g), pass, &cost, base.phys_qubits()).map(|c| c.report).map_err(CliError::domain);
            let (ag, aw) = (run(CsPass::Agnostic)?, run(CsPass::Aware)?);
            for (pass, rep) in [(CsPass::Agnostic, &ag), (CsPass::Aware, &aw)] {
                let mut row = serde_json::Map::new();
                row.insert("program".into(), json!(name));
                row.insert("qubits".into(), json!(program.n_qubits));
                row.insert("placement".into(), json!(scheme));
                row.insert("grid".into(), json!(format!("{r}x{c}")));
                row.insert("pass".into(), json!(pass));
                row.extend(report_row(rep));
                rows.push(Value::Object(row));
            }
            let reduction = |x: f64, y: f64| if x > 0.0 { 100.0 * (1.0 - y / x) } else { 0.0 };
            let _ = writeln!(
                text,
                "{:<14} {:<5} {:>6} {:>6} {:>6} {:>9.1} {:>9.1} {:>10.1} {:>10.1} {:>6.1}% {:>6.1}%",
                name,
                scheme.to_string(),
                ag.swap_count,
                ag.cs_count,
                aw.cs_count,
                ag.infidelity_norm,
                aw.infidelity_norm,
                ag.latency_norm,
                aw.latency_norm,
                reduction(ag.cs_count as f64, aw.cs_count as f64),
                reduction(ag.latency_norm, aw.latency_norm)
            );
        }
    }
    Ok(Output::new(json!({ "rows": rows }), text).with_rows(rows))
}

/// Validates every path argument before any work starts.
pub fn check_paths(cli: &Cli) -> Result<(), CliError> {
    let exists = |p: &Path| if p.is_file() { Ok(()) } else { Err(CliError::Usage(format!("input file {} does not exist", p.display()))) };
    let writable = |p: &Path| match p.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::Usage(format!("output directory {} does not exist", dir.display()))),
        _ => Ok(()),
    };
    let placement = |s: &PlacementSelect| -> Result<(), CliError> {
        s.calibration.as_deref().map_or(Ok(()), exists)?;
        s.cost.as_deref().map_or(Ok(()), exists)
    };
    if let Some(out) = &cli.out {
        writable(out)?;
    }
    match &cli.command {
        Command::Compile(a) => {
            exists(&a.input)?;
            placement(&a.placement)?;
            a.emit.as_deref().map_or(Ok(()), writable)
        }
        Command::Evaluate(a) => {
            exists(&a.input)?;
            placement(&a.placement)
        }
        Command::DecodeTable(a) => a.table.as_deref().map_or(Ok(()), writable),
        _ => Ok(()),
    }
}
