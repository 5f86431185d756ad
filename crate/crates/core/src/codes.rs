//! The Steane [[7,1,3]] and Reed-Muller [[15,1,3]] codes and the code-switching template.
//!
//! Qubits of both codes are labelled by nonzero 4-bit integers `j`. The Steane code uses
//! labels 1..=7 (data index `j - 1`). The RM code embeds two Steane blocks and one
//! connector:
//!
//! | data index | label j | role             |
//! |------------|---------|------------------|
//! | 0..=6      | 1..=7   | Steane block A   |
//! | 7..=13     | 9..=15  | Steane block B   |
//! | 14         | 8       | connector q15    |
//!
//! Block A is the Steane mode of the logical qubit. Data index `i + 7` is the mirror
//! partner of data index `i` for `i < 7`.

use crate::bits::Bits;
use crate::gf2::Gf2Basis;
use crate::pauli::PauliString;
use serde::{Deserialize, Serialize};

/// Steane plaquettes as label sets (Hamming [7,4] parity checks).
pub const STEANE_PLAQUETTES: [[u8; 4]; 3] = [[1, 3, 5, 7], [2, 3, 6, 7], [4, 5, 6, 7]];

/// Joint RM faces `Z_a Z_b Z_a' Z_b'` given by the block-A label pair `(a, b)`.
pub const RM_JOINT_PAIRS: [(u8, u8); 3] = [(4, 5), (4, 6), (3, 5)];

/// Block-B labels (low bits) that together with the connector form the RM face `K`.
pub const RM_CONNECTOR_LINE: [u8; 3] = [1, 2, 3];

/// Block-B labels (low bits) touched by the three connector CX gates during switching.
pub const SWITCH_LINE: [u8; 3] = RM_CONNECTOR_LINE;

pub const CONNECTOR: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CodeKind {
    Steane,
    ReedMuller,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckType {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LogicalGate {
    H,
    S,
    T,
    X,
    Z,
    CX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhysicalGate {
    H,
    Sdg,
    Tdg,
    X,
    Z,
    CX,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilizer {
    pub kind: CheckType,
    /// Sorted data indices.
    pub support: Vec<usize>,
}

impl Stabilizer {
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn pauli(&self, n: usize) -> PauliString {
        match self.kind {
            CheckType::X => PauliString::x_on(n, &self.support),
            CheckType::Z => PauliString::z_on(n, &self.support),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizerCode {
    pub name: String,
    pub kind: CodeKind,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub stabilizers: Vec<Stabilizer>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    pub transversal_gates: Vec<(LogicalGate, PhysicalGate)>,
}

/// Data index → 4-bit label.
pub fn rm_label(index: usize) -> u8 {
    match index {
        0..=6 => index as u8 + 1,
        7..=13 => index as u8 + 2,
        CONNECTOR => 8,
        _ => panic!("RM data index out of range: {index}"),
    }
}

/// 4-bit label → data index.
pub fn rm_index(label: u8) -> usize {
    match label {
        1..=7 => label as usize - 1,
        8 => CONNECTOR,
        9..=15 => label as usize - 2,
        _ => panic!("RM label out of range: {label}"),
    }
}

fn block_a(labels: &[u8]) -> Vec<usize> {
    labels.iter().map(|&l| l as usize - 1).collect()
}

fn block_b(labels: &[u8]) -> Vec<usize> {
    labels.iter().map(|&l| l as usize + 6).collect()
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

pub fn steane_code() -> StabilizerCode {
    let mut stabilizers = Vec::new();
    for kind in [CheckType::X, CheckType::Z] {
        for p in STEANE_PLAQUETTES {
            stabilizers.push(Stabilizer { kind, support: block_a(&p) });
        }
    }
    let all: Vec<usize> = (0..7).collect();
    StabilizerCode {
        name: "steane".into(),
        kind: CodeKind::Steane,
        n: 7,
        k: 1,
        d: 3,
        stabilizers,
        logical_x: PauliString::x_on(7, &all),
        logical_z: PauliString::z_on(7, &all),
        transversal_gates: vec![
            (LogicalGate::H, PhysicalGate::H),
            (LogicalGate::S, PhysicalGate::Sdg),
            (LogicalGate::X, PhysicalGate::X),
            (LogicalGate::Z, PhysicalGate::Z),
            (LogicalGate::CX, PhysicalGate::CX),
        ],
    }
}

pub fn rm_code() -> StabilizerCode {
    let mut stabilizers = Vec::new();
    // X-type: three A∪B plaquette pairs and block B plus the connector (all weight 8).
    for p in STEANE_PLAQUETTES {
        let mut s = block_a(&p);
        s.extend(block_b(&p));
        stabilizers.push(Stabilizer { kind: CheckType::X, support: sorted(s) });
    }
    let mut b_all = block_b(&[1, 2, 3, 4, 5, 6, 7]);
    b_all.push(CONNECTOR);
    stabilizers.push(Stabilizer { kind: CheckType::X, support: sorted(b_all) });
    // Z-type: plaquettes of A and B, joint pair faces, and the connector face.
    for p in STEANE_PLAQUETTES {
        stabilizers.push(Stabilizer { kind: CheckType::Z, support: block_a(&p) });
    }
    for p in STEANE_PLAQUETTES {
        stabilizers.push(Stabilizer { kind: CheckType::Z, support: block_b(&p) });
    }
    for (a, b) in RM_JOINT_PAIRS {
        let mut s = block_a(&[a, b]);
        s.extend(block_b(&[a, b]));
        stabilizers.push(Stabilizer { kind: CheckType::Z, support: sorted(s) });
    }
    let mut k = block_b(&RM_CONNECTOR_LINE);
    k.push(CONNECTOR);
    stabilizers.push(Stabilizer { kind: CheckType::Z, support: sorted(k) });
    let all: Vec<usize> = (0..15).collect();
    StabilizerCode {
        name: "reed-muller".into(),
        kind: CodeKind::ReedMuller,
        n: 15,
        k: 1,
        d: 3,
        stabilizers,
        logical_x: PauliString::x_on(15, &all),
        logical_z: PauliString::z_on(15, &all),
        transversal_gates: vec![
            (LogicalGate::T, PhysicalGate::Tdg),
            (LogicalGate::S, PhysicalGate::Sdg),
            (LogicalGate::X, PhysicalGate::X),
            (LogicalGate::Z, PhysicalGate::Z),
            (LogicalGate::CX, PhysicalGate::CX),
        ],
    }
}

pub fn code(kind: CodeKind) -> StabilizerCode {
    match kind {
        CodeKind::Steane => steane_code(),
        CodeKind::ReedMuller => rm_code(),
    }
}

impl StabilizerCode {
    pub fn stabilizer_paulis(&self) -> Vec<PauliString> {
        self.stabilizers.iter().map(|s| s.pauli(self.n)).collect()
    }

    pub fn is_transversal(&self, gate: LogicalGate) -> bool {
        self.transversal_gates.iter().any(|(g, _)| *g == gate)
    }

    pub fn physical_gate(&self, gate: LogicalGate) -> Option<PhysicalGate> {
        self.transversal_gates.iter().find(|(g, _)| *g == gate).map(|(_, p)| *p)
    }

    /// Indices of stabilizers of the given type.
    pub fn checks_of(&self, kind: CheckType) -> Vec<usize> {
        (0..self.stabilizers.len()).filter(|&i| self.stabilizers[i].kind == kind).collect()
    }

    /// Syndrome of `e`: bit `i` set iff `e` anticommutes with stabilizer `i`.
    pub fn syndrome(&self, e: &PauliString) -> Bits {
        let mut s = Bits::zeros(self.stabilizers.len());
        for (i, st) in self.stabilizers.iter().enumerate() {
            let hit = match st.kind {
                CheckType::X => st.support.iter().filter(|&&q| e.z_bits().get(q)).count(),
                CheckType::Z => st.support.iter().filter(|&&q| e.x_bits().get(q)).count(),
            };
            s.set(i, hit % 2 == 1);
        }
        s
    }

    pub fn stabilizer_basis(&self) -> Gf2Basis {
        let rows: Vec<Bits> = self.stabilizer_paulis().iter().map(|p| p.symplectic()).collect();
        Gf2Basis::from_rows(&rows)
    }

    /// Whether `e` (ignoring sign) lies in the stabilizer group.
    pub fn in_stabilizer_group(&self, e: &PauliString) -> bool {
        self.stabilizer_basis().contains(&e.symplectic())
    }

    /// Logical action of an undetectable error: (flips logical Z, flips logical X).
    pub fn logical_flips(&self, e: &PauliString) -> (bool, bool) {
        (!e.commutes_with(&self.logical_z), !e.commutes_with(&self.logical_x))
    }

    /// JSON document with Pauli-string literals.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "stabilizers": self.stabilizer_paulis().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "logical_x": self.logical_x.to_string(),
            "logical_z": self.logical_z.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwitchDirection {
    SteaneToRm,
    RmToSteane,
}

impl SwitchDirection {
    pub fn reverse(self) -> Self {
        match self {
            SwitchDirection::SteaneToRm => SwitchDirection::RmToSteane,
            SwitchDirection::RmToSteane => SwitchDirection::SteaneToRm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwitchStep {
    /// Steane EC on block A (the Steane mode).
    SteaneEcA,
    /// Steane→RM: reset block B to `|+>` on every qubit and fix it into the Steane `|+>_L`
    /// state with one Steane round. RM→Steane: measure block B out.
    PrepareB,
    /// Steane EC round on block B.
    SteaneEcB,
    /// Transversal CX from block A onto block B.
    LogicalCxAB,
    /// Reset the connector to `|0>`.
    PrepareConnector,
    /// Measure the connector in the Z basis.
    MeasureConnector,
    /// One physical CX from a block-B line qubit onto the connector.
    ConnectorCx(u8),
    RmEc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSwitchTemplate {
    pub direction: SwitchDirection,
    pub steps: Vec<SwitchStep>,
}

impl CodeSwitchTemplate {
    pub fn count(&self, pred: impl Fn(&SwitchStep) -> bool) -> usize {
        self.steps.iter().filter(|s| pred(s)).count()
    }

    pub fn physical_cx_count(&self) -> usize {
        self.count(|s| matches!(s, SwitchStep::ConnectorCx(_)))
    }

    pub fn steane_ec_rounds(&self) -> usize {
        let prepare = if self.direction == SwitchDirection::SteaneToRm { self.count(|s| *s == SwitchStep::PrepareB) } else { 0 };
        self.count(|s| matches!(s, SwitchStep::SteaneEcA | SwitchStep::SteaneEcB)) + prepare
    }

    pub fn rm_ec_rounds(&self) -> usize {
        self.count(|s| matches!(s, SwitchStep::RmEc))
    }

    pub fn reversed(&self) -> CodeSwitchTemplate {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| match s {
                SwitchStep::PrepareConnector => SwitchStep::MeasureConnector,
                SwitchStep::MeasureConnector => SwitchStep::PrepareConnector,
                other => *other,
            })
            .collect();
        CodeSwitchTemplate { direction: self.direction.reverse(), steps }
    }
}

/// Abstract Steane↔RM conversion.
///
/// Steane→RM: EC on A, block B prepared as Steane `|+>_L` and checked by a second round,
/// transversal CX A→B, three CX gates from the block-B line onto the connector in `|0>`,
/// and one RM round whose random joint-face outcomes are fixed by X on block-B
/// plaquettes. RM→Steane runs the steps backwards: the connector returns to `|0>` and
/// block B to a cat state, and both are measured out.
pub fn switching_template(direction: SwitchDirection) -> CodeSwitchTemplate {
    let mut steps = vec![SwitchStep::SteaneEcA, SwitchStep::PrepareB, SwitchStep::SteaneEcB, SwitchStep::LogicalCxAB];
    steps.push(SwitchStep::PrepareConnector);
    steps.extend(SWITCH_LINE.iter().map(|&l| SwitchStep::ConnectorCx(l)));
    steps.push(SwitchStep::RmEc);
    let forward = CodeSwitchTemplate { direction: SwitchDirection::SteaneToRm, steps };
    match direction {
        SwitchDirection::SteaneToRm => forward,
        SwitchDirection::RmToSteane => forward.reversed(),
    }
}
