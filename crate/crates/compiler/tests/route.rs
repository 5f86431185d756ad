use proptest::prelude::*;
use qcs_arch::layout::{build_layout, QubitLayout, Scheme};
use qcs_arch::placement::{build_multilayout, Connectivity, CouplingGraph, EdgeCosts};
use qcs_compiler::bench::random_circuit;
use qcs_compiler::oracle::equivalent;
use qcs_compiler::program::{LogicalProgram, Op};
use qcs_compiler::route::route;
use qcs_core::CodeKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn base() -> &'static QubitLayout {
    static LAYOUT: OnceLock<QubitLayout> = OnceLock::new();
    LAYOUT.get_or_init(|| build_layout(Scheme::Oecf).expect("layout search succeeds").0)
}

fn graph(scheme: Connectivity, rows: usize, cols: usize) -> CouplingGraph {
    build_multilayout(scheme, rows, cols, base(), CodeKind::Steane, &EdgeCosts::LatencyOnly).expect("multilayout builds").coupling_graph()
}

fn two_by_two() -> &'static [CouplingGraph] {
    static GRAPHS: OnceLock<Vec<CouplingGraph>> = OnceLock::new();
    GRAPHS.get_or_init(|| Connectivity::ALL.iter().map(|&s| graph(s, 2, 2)).collect())
}

/// Appends swaps that return every program qubit to the node of the same index.
fn undo_placement(mut program: LogicalProgram, final_placement: &[usize]) -> LogicalProgram {
    let mut node_of = final_placement.to_vec();
    let mut held_by: Vec<usize> = (0..program.n_qubits).collect();
    for (q, &node) in node_of.iter().enumerate() {
        held_by[node] = q;
    }
    for q in 0..node_of.len() {
        let here = node_of[q];
        if here != q {
            let other = held_by[q];
            program.push(Op::Swap, &[here, q]);
            node_of[other] = here;
            held_by[here] = other;
            node_of[q] = q;
            held_by[q] = q;
        }
    }
    program
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn routing_uses_coupled_edges_and_preserves_the_circuit(seed in any::<u64>(), gates in 1usize..30, scheme in 0usize..4) {
        let g = &two_by_two()[scheme];
        let program = random_circuit(4, gates, &mut ChaCha8Rng::seed_from_u64(seed));
        let routed = route(&program, g).unwrap();
        for instr in &routed.program.instrs {
            if instr.qubits.len() == 2 {
                prop_assert!(g.are_adjacent(instr.qubits[0], instr.qubits[1]), "{instr}");
            }
        }
        prop_assert_eq!(routed.program.without_annotations().count(|op| op != Op::Swap), program.instrs.len());
        prop_assert!(equivalent(&program, &undo_placement(routed.program, &routed.final_placement)));
    }
}

#[test]
fn more_connectivity_means_fewer_swaps_overall() {
    for (rows, cols) in [(2, 3), (3, 3)] {
        let graphs: Vec<CouplingGraph> = [Connectivity::C4, Connectivity::C6, Connectivity::C8].iter().map(|&s| graph(s, rows, cols)).collect();
        let mut totals = [0usize; 3];
        for seed in 0..300u64 {
            let program = random_circuit(rows * cols, 30, &mut ChaCha8Rng::seed_from_u64(seed));
            for (total, g) in totals.iter_mut().zip(&graphs) {
                *total += route(&program, g).unwrap().program.swap_count();
            }
        }
        assert!(totals[2] < totals[1] && totals[1] < totals[0], "{rows}x{cols}: {totals:?}");
    }
}

#[test]
fn coupled_programs_route_without_swaps() {
    let g = graph(Connectivity::C8, 2, 2);
    let mut program = LogicalProgram::new(4);
    for (a, b) in [(0, 3), (1, 2), (0, 1), (2, 3)] {
        program.push(Op::Cx, &[a, b]);
    }
    let routed = route(&program, &g).unwrap();
    assert_eq!(routed.program.swap_count(), 0);
    assert_eq!(routed.final_placement, vec![0, 1, 2, 3]);
}
