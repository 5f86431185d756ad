use proptest::prelude::*;
use qcs_core::codes::{LogicalGate, PhysicalGate};
use qcs_core::sim::estimate::{log_log_slope, wilson};
use qcs_core::sim::tableau::Tableau;
use qcs_core::{rm_code, steane_code, Bits, Pauli, PauliString, StabilizerCode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(0u8..4, n).prop_map(move |v| {
        let mut p = PauliString::identity(n);
        for (q, c) in v.into_iter().enumerate() {
            p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][c as usize]);
        }
        p
    })
}

fn xor(a: &Bits, b: &Bits) -> Bits {
    let mut out = a.clone();
    out.xor_assign(b);
    out
}

fn apply_physical(t: &mut Tableau, gate: PhysicalGate, qubits: &[usize]) {
    for &q in qubits {
        match gate {
            PhysicalGate::H => t.h(q),
            PhysicalGate::Sdg => t.sdg(q),
            PhysicalGate::X => t.x_gate(q),
            PhysicalGate::Z => t.z_gate(q),
            PhysicalGate::Tdg | PhysicalGate::CX => unreachable!("not a single-block Clifford"),
        }
    }
}

fn stabilizers_hold(t: &Tableau, code: &StabilizerCode) -> bool {
    code.stabilizer_paulis().iter().all(|s| t.expectation(s) == Some(false))
}

proptest! {
    #[test]
    fn wilson_interval_brackets_the_rate(trials in 1u64..1_000_000, frac in 0.0f64..=1.0) {
        let failures = ((trials as f64) * frac) as u64;
        let (lo, hi) = wilson(failures, trials);
        let rate = failures as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= rate && rate <= hi && hi <= 1.0);
    }

    #[test]
    fn power_law_slope_is_recovered(exponent in 0.5f64..4.0, coeff in 1e-2f64..1e3) {
        let points: Vec<(f64, f64)> = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3].iter().map(|&p: &f64| (p, coeff * p.powf(exponent))).collect();
        prop_assert!((log_log_slope(&points) - exponent).abs() < 1e-9);
    }

    #[test]
    fn syndromes_are_linear_in_errors(a in pauli_strategy(7), b in pauli_strategy(7), c in pauli_strategy(15), d in pauli_strategy(15)) {
        for (code, e, f) in [(steane_code(), &a, &b), (rm_code(), &c, &d)] {
            let product = e.mul(f).unwrap();
            prop_assert_eq!(code.syndrome(&product), xor(&code.syndrome(e), &code.syndrome(f)));
        }
    }

    #[test]
    fn stabilizer_products_are_invisible(picks in prop::collection::vec(any::<bool>(), 10)) {
        let code = rm_code();
        let mut e = PauliString::identity(code.n);
        for (s, &on) in code.stabilizer_paulis().iter().zip(&picks) {
            if on {
                e.mul_assign_unchecked(s);
            }
        }
        prop_assert!(code.syndrome(&e).is_zero());
        prop_assert!(code.in_stabilizer_group(&e));
        prop_assert_eq!(code.logical_flips(&e), (false, false));
    }

    #[test]
    fn transversal_gates_keep_the_code_space(gates in prop::collection::vec(0usize..4, 1..12), rm in any::<bool>(), seed in any::<u64>()) {
        let code = if rm { rm_code() } else { steane_code() };
        let qubits: Vec<usize> = (0..code.n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Tableau::new(code.n);
        t.prepare_code_state(&code, &qubits, false, &mut rng);
        prop_assert!(stabilizers_hold(&t, &code));
        let choices = [LogicalGate::H, LogicalGate::S, LogicalGate::X, LogicalGate::Z];
        for g in gates {
            if let Some(phys) = code.physical_gate(choices[g]) {
                if phys != PhysicalGate::CX && phys != PhysicalGate::Tdg {
                    apply_physical(&mut t, phys, &qubits);
                }
            }
            prop_assert!(stabilizers_hold(&t, &code));
        }
    }

    #[test]
    fn repeated_measurement_agrees(ops in prop::collection::vec((0u8..3, 0usize..5, 0usize..5), 0..40), target in 0usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Tableau::new(5);
        for (kind, a, b) in ops {
            match kind {
                0 => t.h(a),
                1 => t.s(a),
                _ if a != b => t.cx(a, b),
                _ => {}
            }
        }
        let first = t.measure(target, &mut rng);
        prop_assert!(t.is_deterministic(target));
        prop_assert_eq!(t.measure(target, &mut rng), first);
    }
}

#[test]
fn logical_operators_anticommute_and_commute_with_checks() {
    for code in [steane_code(), rm_code()] {
        assert!(!code.logical_x.commutes_with(&code.logical_z));
        assert!(code.syndrome(&code.logical_x).is_zero());
        assert!(code.syndrome(&code.logical_z).is_zero());
        assert_eq!(code.logical_flips(&code.logical_x), (true, false));
    }
}
