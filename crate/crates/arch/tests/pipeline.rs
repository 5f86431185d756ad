use qcs_arch::decoder::{build_layout_table, single_fault_failures, LookupTable};
use qcs_arch::layout::{build_layout, QubitLayout, Scheme};
use qcs_arch::placement::{build_multilayout, schedule_cx, Connectivity, EdgeCosts, MultiLayout};
use qcs_arch::protocol::steane_memory;
use qcs_core::sim::estimate::logical_error_rate;
use qcs_core::sim::noise::NoiseModel;
use qcs_core::CodeKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn oecf() -> &'static QubitLayout {
    static LAYOUT: OnceLock<QubitLayout> = OnceLock::new();
    LAYOUT.get_or_init(|| build_layout(Scheme::Oecf).expect("layout search succeeds").0)
}

fn grid(scheme: Connectivity) -> MultiLayout {
    build_multilayout(scheme, 2, 3, oecf(), CodeKind::Steane, &EdgeCosts::LatencyOnly).expect("multilayout builds")
}

#[test]
fn layout_json_round_trip_preserves_metrics() {
    let layout = oecf();
    let restored = QubitLayout::from_json(&layout.to_json().unwrap()).unwrap();
    restored.validate().unwrap();
    assert_eq!(restored.metrics().unwrap(), layout.metrics().unwrap());
}

#[test]
fn serialized_tables_still_correct_every_single_fault() {
    for mode in [CodeKind::Steane, CodeKind::ReedMuller] {
        let (table, synth, block) = build_layout_table(oecf(), mode).unwrap();
        let restored = LookupTable::from_blob(&table.to_blob()).unwrap();
        assert_eq!(restored.entries(), table.entries());
        let (failures, total) = single_fault_failures(&synth.circuit, &block, &restored);
        assert!(total > 0);
        assert_eq!(failures, 0, "{mode:?}");
    }
}

#[test]
fn memory_rate_is_seeded_and_grows_with_noise() {
    let protocol = steane_memory(oecf()).unwrap();
    assert_eq!(logical_error_rate(&protocol, NoiseModel::noiseless(), 2_000, 1).failures, 0);
    let high = logical_error_rate(&protocol, NoiseModel::new(1e-2).unwrap(), 4_000, 9);
    assert_eq!(high, logical_error_rate(&protocol, NoiseModel::new(1e-2).unwrap(), 4_000, 9));
    let low = logical_error_rate(&protocol, NoiseModel::new(1e-3).unwrap(), 4_000, 9);
    assert!(high.rate > low.rate, "{} vs {}", high.rate, low.rate);
}

#[test]
fn schedules_respect_qubit_order_on_every_scheme() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for scheme in [Connectivity::C4, Connectivity::C4R, Connectivity::C6, Connectivity::C8] {
        let layout = grid(scheme);
        let graph = layout.coupling_graph();
        for a in 0..layout.num_qubits() {
            for b in 0..layout.num_qubits() {
                assert_eq!(graph.are_adjacent(a, b), layout.edge(a, b).is_some());
            }
        }
        for _ in 0..20 {
            let gates: Vec<(usize, usize)> = (0..15)
                .map(|_| {
                    let e = &layout.edges[rng.gen_range(0..layout.edges.len())];
                    if rng.gen() { (e.a, e.b) } else { (e.b, e.a) }
                })
                .collect();
            let schedule = schedule_cx(&layout, &gates).unwrap();
            let end = |i: usize| schedule.start[i] + layout.edge(gates[i].0, gates[i].1).unwrap().latency;
            for j in 0..gates.len() {
                for i in 0..j {
                    let shares = [gates[i].0, gates[i].1].iter().any(|q| *q == gates[j].0 || *q == gates[j].1);
                    if shares {
                        assert!(schedule.start[j] >= end(i) - 1e-9, "{scheme:?}: gate {j} starts before gate {i} ends");
                    }
                }
            }
            let makespan = (0..gates.len()).map(end).fold(0.0, f64::max);
            assert!((schedule.makespan - makespan).abs() < 1e-9);
        }
    }
}
