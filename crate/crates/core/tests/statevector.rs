mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use phonon_qsim::circuits::{phase_p2, Circuit, FourierDirection};
use phonon_qsim::statevector::{Gate, StateVector};
use phonon_qsim::Complex64;
use proptest::prelude::*;

const NQ: usize = 4;

fn gate_strategy() -> impl Strategy<Value = Gate> {
    let q = 0..NQ;
    let pair = (0..NQ, 0..NQ).prop_filter("distinct qubits", |(a, b)| a != b);
    let th = -4.0f64..4.0;
    prop_oneof![
        (q.clone(), th.clone()).prop_map(|(a, t)| Gate::PhaseShift(a, t)),
        (pair.clone(), th.clone()).prop_map(|((a, b), t)| Gate::ControlledPhase(a, b, t)),
        (q.clone(), th.clone()).prop_map(|(a, t)| Gate::Rx(a, t)),
        (q.clone(), th.clone()).prop_map(|(a, t)| Gate::Ry(a, t)),
        (q.clone(), th.clone()).prop_map(|(a, t)| Gate::Rz(a, t)),
        q.clone().prop_map(Gate::Hadamard),
        q.clone().prop_map(Gate::PauliX),
        q.clone().prop_map(Gate::PauliY),
        q.clone().prop_map(Gate::PauliZ),
        pair.clone().prop_map(|(a, b)| Gate::Cnot(a, b)),
        pair.prop_map(|(a, b)| Gate::Swap(a, b)),
        th.prop_map(Gate::GlobalPhase),
    ]
}

fn random_state(seed: &[f64]) -> StateVector {
    let amps: Vec<Complex64> = seed.chunks(2).map(|p| c(p[0], p[1])).collect();
    let mut s = StateVector::from_amplitudes(amps).unwrap();
    s.normalize();
    s
}

/// Dense matrix of one gate, built from its documented definition.
fn gate_matrix(g: &Gate, nq: usize) -> DMatrix<Complex64> {
    let dim = 1 << nq;
    let one = |k: usize, q: usize| (k >> q) & 1;
    let single = |q: usize, m: [[Complex64; 2]; 2]| {
        DMatrix::from_fn(dim, dim, |r, col| {
            if r & !(1 << q) == col & !(1 << q) {
                m[one(r, q)][one(col, q)]
            } else {
                c(0.0, 0.0)
            }
        })
    };
    let (h, z) = (std::f64::consts::FRAC_1_SQRT_2, c(0.0, 0.0));
    match *g {
        Gate::PhaseShift(q, t) => diagonal(nq, |k| t * one(k, q) as f64),
        Gate::ControlledPhase(a, b, t) => diagonal(nq, |k| t * (one(k, a) * one(k, b)) as f64),
        Gate::Rx(q, t) => single(
            q,
            [[c((t / 2.0).cos(), 0.0), c(0.0, -(t / 2.0).sin())], [c(0.0, -(t / 2.0).sin()), c((t / 2.0).cos(), 0.0)]],
        ),
        Gate::Ry(q, t) => single(
            q,
            [[c((t / 2.0).cos(), 0.0), c(-(t / 2.0).sin(), 0.0)], [c((t / 2.0).sin(), 0.0), c((t / 2.0).cos(), 0.0)]],
        ),
        Gate::Rz(q, t) => {
            single(q, [[Complex64::from_polar(1.0, -t / 2.0), z], [z, Complex64::from_polar(1.0, t / 2.0)]])
        }
        Gate::Hadamard(q) => single(q, [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]),
        Gate::PauliX(q) => single(q, [[z, c(1.0, 0.0)], [c(1.0, 0.0), z]]),
        Gate::PauliY(q) => single(q, [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]]),
        Gate::PauliZ(q) => diagonal(nq, |k| std::f64::consts::PI * one(k, q) as f64),
        Gate::Cnot(a, b) => DMatrix::from_fn(dim, dim, |r, col| {
            let target = if one(col, a) == 1 { col ^ (1 << b) } else { col };
            if r == target {
                c(1.0, 0.0)
            } else {
                z
            }
        }),
        Gate::Swap(a, b) => DMatrix::from_fn(dim, dim, |r, col| {
            let swapped = if one(col, a) != one(col, b) { col ^ (1 << a) ^ (1 << b) } else { col };
            if r == swapped {
                c(1.0, 0.0)
            } else {
                z
            }
        }),
        Gate::GlobalPhase(_) => DMatrix::identity(dim, dim),
    }
}

fn apply_dense(m: &DMatrix<Complex64>, s: &StateVector) -> Vec<Complex64> {
    (m * DVector::from_column_slice(s.amplitudes())).iter().copied().collect()
}

fn max_vec_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gates_preserve_norm(gates in prop::collection::vec(gate_strategy(), 1..40),
                           seed in prop::collection::vec(-1.0f64..1.0, 2 << NQ)) {
        let mut s = random_state(&seed);
        for g in &gates {
            s.apply_gate(g).unwrap();
        }
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gates_match_dense_definitions(g in gate_strategy(), seed in prop::collection::vec(-1.0f64..1.0, 2 << NQ)) {
        let s = random_state(&seed);
        let mut t = s.clone();
        t.apply_gate(&g).unwrap();
        prop_assert!(max_vec_diff(t.amplitudes(), &apply_dense(&gate_matrix(&g, NQ), &s)) < 1e-12);
    }

    #[test]
    fn controlled_gate_acts_only_when_control_set(g in gate_strategy(), seed in prop::collection::vec(-1.0f64..1.0, 2 << (NQ + 1))) {
        let s = random_state(&seed);
        let mut t = s.clone();
        t.apply_controlled(NQ, &g).unwrap();
        let inner = gate_matrix(&g, NQ);
        let dim = 1 << NQ;
        // Block diagonal: identity on control 0, the gate (with its scalar
        // phase, if any) on control 1.
        let scalar = match g { Gate::GlobalPhase(t) => Complex64::from_polar(1.0, t), _ => c(1.0, 0.0) };
        let full = DMatrix::from_fn(2 * dim, 2 * dim, |r, col| {
            match (r >= dim, col >= dim) {
                (false, false) => if r == col { c(1.0, 0.0) } else { c(0.0, 0.0) },
                (true, true) => inner[(r - dim, col - dim)] * scalar,
                _ => c(0.0, 0.0),
            }
        });
        prop_assert!(max_vec_diff(t.amplitudes(), &apply_dense(&full, &s)) < 1e-12);
    }

    #[test]
    fn compiled_circuit_matches_gate_by_gate(gates in prop::collection::vec(gate_strategy(), 1..40),
                                             seed in prop::collection::vec(-1.0f64..1.0, 2 << NQ)) {
        let mut circ = Circuit::new(NQ);
        for g in &gates {
            circ.push(*g).unwrap();
        }
        let s = random_state(&seed);
        let mut a = s.clone();
        a.apply_circuit(&circ).unwrap();
        let mut b = s.clone();
        b.apply_compiled(&circ.compile());
        prop_assert!(max_vec_diff(a.amplitudes(), b.amplitudes()) < 1e-12);
    }

    #[test]
    fn register_fourier_round_trip(seed in prop::collection::vec(-1.0f64..1.0, 2 << 5), lo in 0usize..3, width in 1usize..=3) {
        let s = random_state(&seed);
        let mut t = s.clone();
        t.qft_register(lo..lo + width, FourierDirection::Forward).unwrap();
        t.qft_register(lo..lo + width, FourierDirection::Inverse).unwrap();
        prop_assert!(max_vec_diff(t.amplitudes(), s.amplitudes()) < 1e-12);
    }
}

#[test]
fn register_fourier_matches_kernel() {
    let seed: Vec<f64> = (0..64).map(|k| ((k * 37 % 17) as f64 - 8.0) / 8.0).collect();
    let s = random_state(&seed);
    let reg = [1, 2, 3];
    let mut t = s.clone();
    t.qft_register(1..4, FourierDirection::Forward).unwrap();
    assert!(max_vec_diff(t.amplitudes(), &apply_dense(&fourier_on(5, &reg), &s)) < 1e-12);
}

#[test]
fn marginals_sum_to_one() {
    let seed: Vec<f64> = (0..64).map(|k| (k as f64 * 0.37).sin()).collect();
    let mut s = random_state(&seed);
    s.apply_circuit(&phase_p2(&[0, 1, 2], 0.4).unwrap()).unwrap();
    for reg in [0..2, 1..5, 0..5] {
        let p = s.probabilities(reg).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn tensor_places_second_factor_high() {
    let low = StateVector::basis(2, 1).unwrap();
    let high = StateVector::basis(1, 1).unwrap();
    let t = low.tensor(&high).unwrap();
    assert_eq!(t.n_qubits(), 3);
    assert!((t.amplitudes()[0b101].norm() - 1.0).abs() < 1e-15);
}

#[test]
fn qubit_cap_is_enforced() {
    assert!(StateVector::with_cap(10, 8).is_err());
    assert!(StateVector::with_cap(8, 8).is_ok());
}
