//! Clifford+T compiler targeting logical qubits that switch between the Steane and
//! the 15-qubit Reed-Muller encodings.
//!
//! Pipeline: [`qasm::parse_program`], [`route::route`], then [`passes::agnostic_cs`]
//! or [`passes::block_pass`], and [`cost::evaluate`].

pub mod bench;
pub mod cost;
pub mod oracle;
pub mod passes;
pub mod program;
pub mod qasm;
pub mod route;

use cost::{evaluate, CostModel, Report};
use program::{LogicalProgram, ModeError};
use qcs_arch::placement::CouplingGraph;
use route::RouteError;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

/// Code-switch placement strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsPass {
    Agnostic,
    Aware,
}

impl FromStr for CsPass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "agnostic" => Ok(CsPass::Agnostic),
            "aware" => Ok(CsPass::Aware),
            other => Err(format!("unknown cs pass `{other}` (expected agnostic or aware)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Cost(#[from] cost::CostError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compiled {
    pub program: LogicalProgram,
    pub report: Report,
}

/// Routes `program` onto `graph` (when given), places code switches and evaluates
/// the result on `physical_per_logical` physical qubits per graph node.
pub fn compile(program: &LogicalProgram, graph: Option<&CouplingGraph>, pass: CsPass, cost: &CostModel, physical_per_logical: usize) -> Result<Compiled, CompileError> {
    cost.validate()?;
    let (routed, cost) = match graph {
        Some(g) => (route::route(program, g)?.program, cost.clone().with_graph(g)),
        None => (program.without_annotations(), cost.clone()),
    };
    let out = match pass {
        CsPass::Agnostic => passes::agnostic_cs(&routed),
        CsPass::Aware => passes::block_pass(&routed, &cost),
    };
    let report = evaluate(&out, &cost, out.n_qubits * physical_per_logical)?;
    Ok(Compiled { program: out, report })
}
