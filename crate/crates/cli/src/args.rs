use clap::{Args, Parser, Subcommand, ValueEnum};
use qcs_arch::layout::Scheme;
use qcs_arch::placement::Connectivity;
use qcs_compiler::CsPass;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser, Serialize)]
#[command(name = "qcs", version, about = "Layout search, simulation, decoding and compilation for code-switching logical qubits")]
pub struct Cli {
    /// Seed for every stochastic step; required by `simulate` and `threshold`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo trials (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Search the data-qubit placement of one logical qubit.
    Layout(LayoutArgs),
    /// Synthesize the physical circuit of one gadget on a layout.
    Synth(SynthArgs),
    /// Estimate logical error rates at fixed physical error rates.
    Simulate(SimulateArgs),
    /// Locate the pseudo-threshold where the logical rate equals the physical rate.
    Threshold(ThresholdArgs),
    /// Build the lookup decoder of one EC round.
    DecodeTable(DecodeTableArgs),
    /// Route a Clifford+T program and place code switches.
    Compile(CompileArgs),
    /// Cost a program that already carries EC and code-switch instructions.
    Evaluate(EvaluateArgs),
    /// Compare both code-switch passes on the benchmark programs and placements.
    Bench(BenchArgs),
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: qcs_arch::layout::LayoutError| e.to_string())
}

fn parse_pass(s: &str) -> Result<CsPass, String> {
    s.parse()
}

#[derive(Debug, Args, Serialize)]
pub struct LayoutArgs {
    /// oecf, ocsf, olcf or oel.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gadget {
    /// All stabilizer rounds of the chosen mode.
    Ec,
    /// Transversal logical gate in the chosen mode.
    Gate,
    /// Switch from the Steane to the RM encoding.
    CsToRm,
    /// Switch from the RM to the Steane encoding.
    CsToSteane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Steane,
    Rm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateArg {
    H,
    S,
    T,
    X,
    Z,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_parser = parse_scheme, default_value = "oecf")]
    pub scheme: Scheme,
    #[arg(long, value_enum)]
    pub gadget: Gadget,
    #[arg(long, value_enum, default_value_t = ModeArg::Steane)]
    pub mode: ModeArg,
    /// Logical gate for `--gadget gate`.
    #[arg(long, value_enum)]
    pub gate: Option<GateArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolArg {
    /// One Steane EC round of the layout on an idle logical qubit.
    Memory,
    /// Steane logical CX with flag-bridge EC on both blocks.
    Cx,
}

#[derive(Debug, Args, Serialize)]
pub struct ProtocolSelect {
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    /// Layout for the memory protocol.
    #[arg(long, value_parser = parse_scheme, default_value = "oecf")]
    pub scheme: Scheme,
    /// Flag qubits per check of the CX protocol.
    #[arg(long, default_value_t = 1)]
    pub flags: usize,
    /// GHZ chain length per physical CX of the CX protocol.
    #[arg(long, default_value_t = 0)]
    pub ghz_len: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub protocol: ProtocolSelect,
    /// Physical error rates, comma separated.
    #[arg(long = "p", value_delimiter = ',', required = true)]
    pub p_e: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub protocol: ProtocolSelect,
    #[arg(long, default_value_t = 1e-6)]
    pub lo: f64,
    #[arg(long, default_value_t = 1e-1)]
    pub hi: f64,
    /// Stop once the bracket ratio is below this factor.
    #[arg(long, default_value_t = 1.2)]
    pub factor: f64,
    /// Trials of the first estimate at each point; later estimates grow 4x.
    #[arg(long, default_value_t = 10_000)]
    pub start_trials: u64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_trials: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct DecodeTableArgs {
    #[arg(long, value_parser = parse_scheme, default_value = "oecf")]
    pub scheme: Scheme,
    #[arg(long, value_enum, default_value_t = ModeArg::Steane)]
    pub mode: ModeArg,
    /// Write the binary table here.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PlacementSelect {
    /// Logical-qubit connectivity (c4, c4r, c6, c8); omit for all-to-all.
    #[arg(long, value_parser = parse_connectivity)]
    pub placement: Option<Connectivity>,
    /// Grid rows; default is the smallest near-square grid that fits.
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Per-edge latency and infidelity table (JSON list of edges) used instead of synthesis.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Estimate each edge's infidelity from this many sampled fault pairs (needs --seed).
    #[arg(long, conflicts_with = "calibration")]
    pub edge_samples: Option<u64>,
    /// Cost model JSON; defaults to the built-in table.
    #[arg(long)]
    pub cost: Option<PathBuf>,
}

fn parse_connectivity(s: &str) -> Result<Connectivity, String> {
    s.parse()
}

#[derive(Debug, Args, Serialize)]
pub struct CompileArgs {
    /// Clifford+T program in the OPENQASM 2.0 subset.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "cs-pass", value_parser = parse_pass, default_value = "aware")]
    pub pass: CsPass,
    #[command(flatten)]
    pub placement: PlacementSelect,
    /// Write the compiled program here; otherwise it is embedded in the report.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Program with `ec`, `swap`, `cs_to_rm` and `cs_to_steane` instructions.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub placement: PlacementSelect,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Operand width of the adder and comparator.
    #[arg(long, default_value_t = 3)]
    pub bits: usize,
    /// Data qubits of the Grover search.
    #[arg(long, default_value_t = 4)]
    pub grover_qubits: usize,
    #[arg(long, default_value_t = 3)]
    pub grover_iterations: usize,
    #[arg(long, value_parser = parse_connectivity, value_delimiter = ',', default_value = "c4,c4r,c6,c8")]
    pub placements: Vec<Connectivity>,
}
