//! Lookup-table decoding of flag-bridge EC rounds.
//!
//! A table key is the syndrome of the residual data error followed by the flag outcomes
//! of the round. Keys and corrections are enumerated from every single fault of the
//! round's circuit; distinct faults with the same key must leave stabilizer-equivalent
//! residuals, otherwise the circuit is not fault tolerant and construction fails.

use crate::layout::{mode_data, QubitLayout};
use crate::synthesis::{synth_full_ec, SynthError, SynthOutput};
use qcs_core::circuit::PhysicalCircuit;
use qcs_core::codes::{code, CheckType, CodeKind, StabilizerCode};
use qcs_core::sim::frame::{BatchResult, FrameSimulator, LaneFault};
use qcs_core::{Bits, Pauli, PauliString};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

/// Keys at most this wide are stored densely.
pub const DENSE_KEY_BITS: usize = 20;

#[derive(Debug, Error)]
pub enum DecoderError {
    #[error("faults at op {op_a} and op {op_b} share key {key:#x} but leave logically inequivalent residuals")]
    Conflict { key: u64, op_a: usize, op_b: usize },
    #[error("key has {got} bits, table expects {expected}")]
    KeyLength { got: usize, expected: usize },
    #[error("key width {0} exceeds 64 bits")]
    KeyTooWide(usize),
    #[error("malformed table blob: {0}")]
    Blob(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

/// Pauli on at most 32 qubits as X and Z masks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SmallPauli {
    pub x: u32,
    pub z: u32,
}

impl SmallPauli {
    pub fn weight(self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn mul(self, o: SmallPauli) -> SmallPauli {
        SmallPauli { x: self.x ^ o.x, z: self.z ^ o.z }
    }

    pub fn commutes(self, o: SmallPauli) -> bool {
        ((self.x & o.z).count_ones() + (self.z & o.x).count_ones()) % 2 == 0
    }

    pub fn from_pauli(p: &PauliString) -> SmallPauli {
        assert!(p.n() <= 32, "SmallPauli holds at most 32 qubits");
        let mut s = SmallPauli::default();
        for q in 0..p.n() {
            let (x, z) = p.get(q).bits();
            s.x |= (x as u32) << q;
            s.z |= (z as u32) << q;
        }
        s
    }

    pub fn to_pauli(self, n: usize) -> PauliString {
        let mut p = PauliString::identity(n);
        for q in 0..n {
            p.set(q, Pauli::from_bits((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1));
        }
        p
    }

    /// Lane `lane` of a frame batch restricted to `qubits`.
    pub fn from_batch(batch: &BatchResult, lane: u32, qubits: &[usize]) -> SmallPauli {
        let mut s = SmallPauli::default();
        for (i, &q) in qubits.iter().enumerate() {
            s.x |= (((batch.x[q] >> lane) & 1) as u32) << i;
            s.z |= (((batch.z[q] >> lane) & 1) as u32) << i;
        }
        s
    }
}

fn span(gens: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32];
    for &g in gens {
        let ext: Vec<u32> = out.iter().map(|&v| v ^ g).collect();
        for v in ext {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Code structure on masks: syndromes, stabilizer group, perfect-round decoding.
#[derive(Debug, Clone)]
pub struct CodeMasks {
    pub kind: CodeKind,
    pub n: usize,
    /// Support mask and type of each stabilizer, in code order.
    checks: Vec<(CheckType, u32)>,
    x_group: Vec<u32>,
    z_group: Vec<u32>,
    x_group_set: HashSet<u32>,
    z_group_set: HashSet<u32>,
    /// Minimum-weight X error per Z-check syndrome (over Z checks in code order).
    x_leader: Vec<u32>,
    /// Minimum-weight Z error per X-check syndrome.
    z_leader: Vec<u32>,
    pub logical_x: SmallPauli,
    pub logical_z: SmallPauli,
}

impl CodeMasks {
    pub fn new(code: &StabilizerCode) -> Self {
        let mask = |s: &[usize]| s.iter().fold(0u32, |m, &q| m | 1 << q);
        let checks: Vec<(CheckType, u32)> = code.stabilizers.iter().map(|s| (s.kind, mask(&s.support))).collect();
        let of = |k: CheckType| checks.iter().filter(|c| c.0 == k).map(|c| c.1).collect::<Vec<_>>();
        let (xs, zs) = (of(CheckType::X), of(CheckType::Z));
        let x_group = span(&xs);
        let z_group = span(&zs);
        let leaders = |gens: &[u32]| {
            let mut best = vec![u32::MAX; 1 << gens.len()];
            for e in 0u32..(1 << code.n) {
                let s = gens.iter().enumerate().fold(0usize, |a, (i, &g)| a | ((((e & g).count_ones() & 1) as usize) << i));
                let cur = best[s];
                if cur == u32::MAX || (e.count_ones(), e) < (cur.count_ones(), cur) {
                    best[s] = e;
                }
            }
            best
        };
        CodeMasks {
            kind: code.kind,
            n: code.n,
            x_leader: leaders(&zs),
            z_leader: leaders(&xs),
            x_group_set: x_group.iter().copied().collect(),
            z_group_set: z_group.iter().copied().collect(),
            x_group,
            z_group,
            checks,
            logical_x: SmallPauli::from_pauli(&code.logical_x),
            logical_z: SmallPauli::from_pauli(&code.logical_z),
        }
    }

    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    /// Syndrome bits in stabilizer order, packed LSB first.
    pub fn syndrome(&self, e: SmallPauli) -> u64 {
        self.checks.iter().enumerate().fold(0u64, |acc, (i, &(k, m))| {
            let hit = match k {
                CheckType::X => e.z & m,
                CheckType::Z => e.x & m,
            };
            acc | (((hit.count_ones() & 1) as u64) << i)
        })
    }

    pub fn in_stabilizer_group(&self, e: SmallPauli) -> bool {
        self.x_group_set.contains(&e.x) && self.z_group_set.contains(&e.z)
    }

    /// Minimum-weight element of `e`'s stabilizer coset; ties go to the smallest masks.
    pub fn canonical(&self, e: SmallPauli) -> SmallPauli {
        let mut best = e;
        for &gx in &self.x_group {
            for &gz in &self.z_group {
                let c = SmallPauli { x: e.x ^ gx, z: e.z ^ gz };
                if (c.weight(), c) < (best.weight(), best) {
                    best = c;
                }
            }
        }
        best
    }

    /// Minimum-weight Pauli with the given syndrome (stabilizer order, LSB first).
    pub fn syndrome_leader(&self, syndrome: u64) -> SmallPauli {
        let (mut zs, mut xs, mut zi, mut xi) = (0usize, 0usize, 0, 0);
        for (i, c) in self.checks.iter().enumerate() {
            let bit = ((syndrome >> i) & 1) as usize;
            match c.0 {
                CheckType::Z => {
                    zs |= bit << zi;
                    zi += 1;
                }
                CheckType::X => {
                    xs |= bit << xi;
                    xi += 1;
                }
            }
        }
        SmallPauli { x: self.x_leader[zs], z: self.z_leader[xs] }
    }

    /// Correction an ideal syndrome round would apply to `e`.
    pub fn perfect_correction(&self, e: SmallPauli) -> SmallPauli {
        self.syndrome_leader(self.syndrome(e))
    }

    /// Whether `e`, after an ideal correction round, acts as a nontrivial logical.
    pub fn logical_failure(&self, e: SmallPauli) -> bool {
        let r = e.mul(self.perfect_correction(e));
        !r.commutes(self.logical_x) || !r.commutes(self.logical_z)
    }
}

/// One code block of a circuit: its data qubits and the flag records that key its table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedBlock {
    pub mode: CodeKind,
    pub data: Vec<usize>,
    pub flag_records: Vec<usize>,
}

impl DecodedBlock {
    /// Block `tile` of a synthesis output: its data qubits and the flags of its EC rounds.
    pub fn from_synth(out: &SynthOutput, tile: usize, mode: CodeKind) -> Self {
        let data = mode_data(mode).map(|q| tile * crate::layout::NUM_DATA + q).collect();
        let flag_records = out.rounds.iter().filter(|r| r.tile == tile).flat_map(|r| r.flags.iter().flat_map(|f| f.1.iter().copied())).collect();
        DecodedBlock { mode, data, flag_records }
    }

    pub fn key(&self, masks: &CodeMasks, residual: SmallPauli, flag_bit: impl Fn(usize) -> bool) -> u64 {
        let mut k = masks.syndrome(residual);
        for (i, &r) in self.flag_records.iter().enumerate() {
            if flag_bit(r) {
                k |= 1 << (masks.num_checks() + i);
            }
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Storage {
    Dense(Vec<Option<SmallPauli>>),
    Hashed(HashMap<u64, SmallPauli>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableHeader {
    pub mode: CodeKind,
    pub key_width: usize,
    pub syndrome_bits: usize,
    pub flag_bits: usize,
    pub entry_count: usize,
    pub miss_policy: MissPolicy,
}

/// Correction for keys no single fault produces.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissPolicy {
    /// Apply nothing.
    #[default]
    Identity,
    /// Ignore the flag bits and apply the minimum-weight Pauli with the key's syndrome.
    SyndromeOnly,
}

/// Key → correction map with an identity default for unknown keys.
#[derive(Debug)]
pub struct LookupTable {
    pub mode: CodeKind,
    pub syndrome_bits: usize,
    pub flag_bits: usize,
    pub miss_policy: MissPolicy,
    storage: Storage,
    masks: CodeMasks,
    misses: AtomicU64,
}

impl Clone for LookupTable {
    fn clone(&self) -> Self {
        LookupTable {
            mode: self.mode,
            syndrome_bits: self.syndrome_bits,
            flag_bits: self.flag_bits,
            miss_policy: self.miss_policy,
            storage: self.storage.clone(),
            masks: self.masks.clone(),
            misses: AtomicU64::new(self.misses()),
        }
    }
}

impl LookupTable {
    fn from_entries(mode: CodeKind, syndrome_bits: usize, flag_bits: usize, entries: impl IntoIterator<Item = (u64, SmallPauli)>) -> Result<Self, DecoderError> {
        let width = syndrome_bits + flag_bits;
        if width > 64 {
            return Err(DecoderError::KeyTooWide(width));
        }
        let storage = if width <= DENSE_KEY_BITS {
            let mut v = vec![None; 1 << width];
            for (k, c) in entries {
                v[k as usize] = Some(c);
            }
            Storage::Dense(v)
        } else {
            Storage::Hashed(entries.into_iter().collect())
        };
        let masks = CodeMasks::new(&code(mode));
        Ok(LookupTable { mode, syndrome_bits, flag_bits, miss_policy: MissPolicy::Identity, storage, masks, misses: AtomicU64::new(0) })
    }

    pub fn with_miss_policy(mut self, policy: MissPolicy) -> Self {
        self.miss_policy = policy;
        self
    }

    pub fn key_width(&self) -> usize {
        self.syndrome_bits + self.flag_bits
    }

    pub fn entry_count(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.iter().filter(|e| e.is_some()).count(),
            Storage::Hashed(m) => m.len(),
        }
    }

    /// Entries sorted by key.
    pub fn entries(&self) -> Vec<(u64, SmallPauli)> {
        let mut v: Vec<(u64, SmallPauli)> = match &self.storage {
            Storage::Dense(v) => v.iter().enumerate().filter_map(|(k, e)| e.map(|c| (k as u64, c))).collect(),
            Storage::Hashed(m) => m.iter().map(|(&k, &c)| (k, c)).collect(),
        };
        v.sort_unstable();
        v
    }

    pub fn get(&self, key: u64) -> Option<SmallPauli> {
        match &self.storage {
            Storage::Dense(v) => v.get(key as usize).copied().flatten(),
            Storage::Hashed(m) => m.get(&key).copied(),
        }
    }

    /// Correction for a packed key; unknown keys count a miss and follow the miss policy.
    pub fn decode_key(&self, key: u64) -> SmallPauli {
        self.get(key).unwrap_or_else(|| {
            self.misses.fetch_add(1, Ordering::Relaxed);
            match self.miss_policy {
                MissPolicy::Identity => SmallPauli::default(),
                MissPolicy::SyndromeOnly => self.masks.syndrome_leader(key & ((1 << self.syndrome_bits) - 1)),
            }
        })
    }

    /// Correction for key bits: syndrome bits in stabilizer order, then flag bits.
    pub fn decode(&self, bits: &Bits) -> Result<PauliString, DecoderError> {
        if bits.len() != self.key_width() {
            return Err(DecoderError::KeyLength { got: bits.len(), expected: self.key_width() });
        }
        let key = bits.iter_ones().fold(0u64, |k, i| k | 1 << i);
        Ok(self.decode_key(key).to_pauli(code(self.mode).n))
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn header(&self) -> TableHeader {
        TableHeader {
            mode: self.mode,
            key_width: self.key_width(),
            syndrome_bits: self.syndrome_bits,
            flag_bits: self.flag_bits,
            entry_count: self.entry_count(),
            miss_policy: self.miss_policy,
        }
    }

    /// `u32` header length, JSON header, then per entry the key (`u64`) and the X and Z
    /// masks (`u32` each), all little endian.
    pub fn to_blob(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header()).expect("header serializes");
        let mut out = Vec::with_capacity(4 + header.len() + 16 * self.entry_count());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for (k, c) in self.entries() {
            out.extend_from_slice(&k.to_le_bytes());
            out.extend_from_slice(&c.x.to_le_bytes());
            out.extend_from_slice(&c.z.to_le_bytes());
        }
        out
    }

    pub fn from_blob(blob: &[u8]) -> Result<Self, DecoderError> {
        let bad = |m: &str| DecoderError::Blob(m.to_string());
        let len = u32::from_le_bytes(blob.get(..4).ok_or_else(|| bad("truncated length"))?.try_into().unwrap()) as usize;
        let header: TableHeader = serde_json::from_slice(blob.get(4..4 + len).ok_or_else(|| bad("truncated header"))?).map_err(|e| DecoderError::Blob(e.to_string()))?;
        if header.key_width != header.syndrome_bits + header.flag_bits {
            return Err(bad("inconsistent header"));
        }
        let body = &blob[4 + len..];
        if body.len() != 16 * header.entry_count {
            return Err(bad("entry count mismatch"));
        }
        let entries = body.chunks_exact(16).map(|c| {
            let k = u64::from_le_bytes(c[..8].try_into().unwrap());
            (k, SmallPauli { x: u32::from_le_bytes(c[8..12].try_into().unwrap()), z: u32::from_le_bytes(c[12..].try_into().unwrap()) })
        });
        Ok(LookupTable::from_entries(header.mode, header.syndrome_bits, header.flag_bits, entries)?.with_miss_policy(header.miss_policy))
    }
}

/// Outcome of one single fault: its op index, residual data error and table key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultEffect {
    pub op: usize,
    pub residual: SmallPauli,
    pub key: u64,
}

/// Every nontrivial single fault of `circuit`, propagated to the end, as seen by `block`.
pub fn single_fault_effects(circuit: &PhysicalCircuit, block: &DecodedBlock, masks: &CodeMasks) -> Vec<FaultEffect> {
    let sim = FrameSimulator::new(circuit);
    let all: Vec<(usize, u16)> = sim.locations().iter().enumerate().flat_map(|(li, l)| (0..l.fault_count() as u16).map(move |k| (li, k))).collect();
    let mut out = Vec::with_capacity(all.len());
    for chunk in all.chunks(64) {
        let faults: Vec<LaneFault> = chunk.iter().enumerate().map(|(lane, &(loc, fault))| LaneFault { loc, lane: lane as u32, fault }).collect();
        let r = sim.run(&faults);
        for (lane, &(loc, _)) in chunk.iter().enumerate() {
            let lane = lane as u32;
            let residual = SmallPauli::from_batch(&r, lane, &block.data);
            let key = block.key(masks, residual, |rec| (r.records[rec] >> lane) & 1 == 1);
            out.push(FaultEffect { op: sim.locations()[loc].op, residual, key });
        }
    }
    out
}

/// Table from exhaustive single-fault enumeration over `circuit`.
///
/// Each key maps to the lightest canonical residual seen with it (ties to the smallest
/// masks). Residuals sharing a key must differ by a stabilizer.
pub fn build_table(circuit: &PhysicalCircuit, block: &DecodedBlock) -> Result<LookupTable, DecoderError> {
    let masks = CodeMasks::new(&code(block.mode));
    let width = masks.num_checks() + block.flag_records.len();
    if width > 64 {
        return Err(DecoderError::KeyTooWide(width));
    }
    let mut canon: HashMap<SmallPauli, SmallPauli> = HashMap::new();
    // key → (correction, representative residual, op of the first fault)
    let mut entries: HashMap<u64, (SmallPauli, SmallPauli, usize)> = HashMap::new();
    entries.insert(0, (SmallPauli::default(), SmallPauli::default(), usize::MAX));
    for f in single_fault_effects(circuit, block, &masks) {
        let c = *canon.entry(f.residual).or_insert_with(|| masks.canonical(f.residual));
        match entries.get_mut(&f.key) {
            None => {
                entries.insert(f.key, (c, f.residual, f.op));
            }
            Some((best, rep, op)) => {
                if !masks.in_stabilizer_group(rep.mul(f.residual)) {
                    return Err(DecoderError::Conflict { key: f.key, op_a: *op, op_b: f.op });
                }
                if (c.weight(), c) < (best.weight(), *best) {
                    *best = c;
                }
            }
        }
    }
    LookupTable::from_entries(block.mode, masks.num_checks(), block.flag_records.len(), entries.into_iter().map(|(k, v)| (k, v.0)))
}

/// Table for one full EC round of `mode` on `layout`, with the round it decodes.
pub fn build_layout_table(layout: &QubitLayout, mode: CodeKind) -> Result<(LookupTable, SynthOutput, DecodedBlock), DecoderError> {
    let out = synth_full_ec(layout, mode)?;
    let block = DecodedBlock::from_synth(&out, 0, mode);
    let table = build_table(&out.circuit, &block)?;
    Ok((table, out, block))
}

/// Count of single faults whose decoded residual is a logical error, over all faults.
pub fn single_fault_failures(circuit: &PhysicalCircuit, block: &DecodedBlock, table: &LookupTable) -> (usize, usize) {
    let masks = CodeMasks::new(&code(block.mode));
    let effects = single_fault_effects(circuit, block, &masks);
    let bad = effects.iter().filter(|f| masks.logical_failure(f.residual.mul(table.get(f.key).unwrap_or_default()))).count();
    (bad, effects.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{build_layout, Scheme};
    use qcs_core::codes::{rm_code, steane_code};
    use std::sync::OnceLock;

    fn oecf() -> &'static QubitLayout {
        static L: OnceLock<QubitLayout> = OnceLock::new();
        L.get_or_init(|| build_layout(Scheme::Oecf).unwrap().0)
    }

    #[test]
    fn masks_agree_with_code_algebra() {
        for c in [steane_code(), rm_code()] {
            let m = CodeMasks::new(&c);
            for q in 0..c.n {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let e = PauliString::single(c.n, q, p);
                    let s = SmallPauli::from_pauli(&e);
                    assert_eq!(s.to_pauli(c.n), e);
                    let bits = c.syndrome(&e);
                    assert_eq!(m.syndrome(s), bits.iter_ones().fold(0, |k, i| k | 1 << i));
                    assert!(!m.logical_failure(s), "single {p:?} on {q} is correctable");
                }
            }
            for st in c.stabilizer_paulis() {
                assert!(m.in_stabilizer_group(SmallPauli::from_pauli(&st)));
            }
            assert!(m.logical_failure(m.logical_x));
            assert!(m.logical_failure(m.logical_z));
            assert!(!m.in_stabilizer_group(m.logical_x));
        }
    }

    #[test]
    fn canonical_is_minimal_in_coset() {
        let c = steane_code();
        let m = CodeMasks::new(&c);
        let st = SmallPauli::from_pauli(&c.stabilizer_paulis()[0]);
        let e = SmallPauli { x: 0b1, z: 0 };
        assert_eq!(m.canonical(e.mul(st)), e);
        assert_eq!(m.canonical(st), SmallPauli::default());
    }

    #[test]
    fn tables_cover_single_faults_of_oecf_rounds() {
        for mode in [CodeKind::Steane, CodeKind::ReedMuller] {
            let (table, out, block) = build_layout_table(oecf(), mode).unwrap();
            assert_eq!(table.get(0), Some(SmallPauli::default()));
            let (bad, total) = single_fault_failures(&out.circuit, &block, &table);
            assert!(total > 1000);
            assert_eq!(bad, 0, "{mode:?}");
        }
    }

    #[test]
    fn data_fault_decodes_to_itself_up_to_stabilizers() {
        let (table, _, block) = build_layout_table(oecf(), CodeKind::Steane).unwrap();
        let m = CodeMasks::new(&steane_code());
        for q in 0..7 {
            let e = SmallPauli { x: 1 << q, z: 0 };
            let key = block.key(&m, e, |_| false);
            let c = table.decode_key(key);
            assert!(m.in_stabilizer_group(c.mul(e)));
            assert!(c.weight() <= 1);
        }
        assert_eq!(table.misses(), 0);
    }

    #[test]
    fn flagged_hook_decodes_to_correlated_pair() {
        let l = oecf();
        let (table, out, block) = build_layout_table(l, CodeKind::Steane).unwrap();
        let m = CodeMasks::new(&steane_code());
        let effects = single_fault_effects(&out.circuit, &block, &m);
        let flag_mask: u64 = !((1u64 << m.num_checks()) - 1);
        let hooks: Vec<&FaultEffect> = effects.iter().filter(|f| f.key & flag_mask != 0 && m.canonical(f.residual).weight() >= 2).collect();
        assert!(!hooks.is_empty(), "some flagged fault spreads to two data qubits");
        for h in hooks {
            let c = table.decode_key(h.key);
            assert!(m.in_stabilizer_group(c.mul(h.residual)));
        }
    }

    #[test]
    fn decode_checks_length_and_counts_misses() {
        let (table, _, _) = build_layout_table(oecf(), CodeKind::Steane).unwrap();
        let w = table.key_width();
        assert!(w <= DENSE_KEY_BITS);
        assert_eq!(table.decode(&Bits::zeros(w)).unwrap(), PauliString::identity(7));
        assert!(matches!(table.decode(&Bits::zeros(w + 1)), Err(DecoderError::KeyLength { .. })));
        let unknown = (0..1u64 << w).find(|&k| table.get(k).is_none()).unwrap();
        assert_eq!(table.decode_key(unknown), SmallPauli::default());
        assert_eq!(table.misses(), 1);
        let fallback = table.clone().with_miss_policy(MissPolicy::SyndromeOnly);
        let m = CodeMasks::new(&steane_code());
        let c = fallback.decode_key(unknown);
        assert_eq!(m.syndrome(c), unknown & ((1 << m.num_checks()) - 1));
        assert!(c.x.count_ones() <= 1 && c.z.count_ones() <= 1);
        assert_eq!(fallback.misses(), 2);
    }

    #[test]
    fn blob_round_trip() {
        for mode in [CodeKind::Steane, CodeKind::ReedMuller] {
            let (table, _, _) = build_layout_table(oecf(), mode).unwrap();
            let blob = table.to_blob();
            let back = LookupTable::from_blob(&blob).unwrap();
            let policy = LookupTable::from_blob(&table.clone().with_miss_policy(MissPolicy::SyndromeOnly).to_blob()).unwrap();
            assert_eq!(policy.miss_policy, MissPolicy::SyndromeOnly);
            assert_eq!(back.entries(), table.entries());
            assert_eq!(back.header(), table.header());
            assert!(LookupTable::from_blob(&blob[..blob.len() - 3]).is_err());
        }
    }

    #[test]
    fn unflagged_bare_round_conflicts() {
        // A weight-4 check read by one ancilla without flags lets a single fault leave a
        // weight-2 error indistinguishable from a weight-1 one.
        use qcs_core::circuit::{CircuitBuilder, MeasRole};
        let c = steane_code();
        let mut b = CircuitBuilder::new(8);
        b.set_persistent(&(0..7).collect::<Vec<_>>());
        for st in &c.stabilizers {
            b.reset(7);
            if st.kind == CheckType::X {
                b.h(7);
                for &q in &st.support {
                    b.cx(7, q);
                }
                b.h(7);
            } else {
                for &q in &st.support {
                    b.cx(q, 7);
                }
            }
            b.measure(7, MeasRole::Parity { check: 0 });
        }
        let circuit = b.finish();
        let block = DecodedBlock { mode: CodeKind::Steane, data: (0..7).collect(), flag_records: vec![] };
        assert!(matches!(build_table(&circuit, &block), Err(DecoderError::Conflict { .. })));
    }
}
