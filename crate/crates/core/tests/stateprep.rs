mod common;

use common::*;
use nalgebra::DVector;
use phonon_qsim::dense::model_hamiltonian;
use phonon_qsim::grid::{make_grid, sampled_hg};
use phonon_qsim::model::HolsteinModel;
use phonon_qsim::stateprep::*;
use phonon_qsim::statevector::StateVector;
use phonon_qsim::Complex64;
use proptest::prelude::*;

fn expectation(h: &nalgebra::DMatrix<Complex64>, s: &StateVector) -> f64 {
    let v = DVector::from_column_slice(s.amplitudes());
    (v.adjoint() * h * &v)[(0, 0)].re
}

#[test]
fn zero_parameters_leave_register_at_origin() {
    let s = ansatz_state(&VariationalParams::zeros(4, 3)).unwrap();
    assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn gates_per_step() {
    for n_x in 2..=6 {
        let mut p = VariationalParams::zeros(n_x, 2);
        let v: Vec<f64> = (0..p.n_params()).map(|k| 0.1 + 0.01 * k as f64).collect();
        p = VariationalParams::from_vec(n_x, 2, &v).unwrap();
        assert_eq!(p.n_params(), 2 * (2 + 3 * n_x));
        let reg: Vec<usize> = (0..n_x).collect();
        let rc = ansatz_circuit(&p, &reg).unwrap().resource_count();
        assert_eq!(rc.count("RX") + rc.count("RY") + rc.count("RZ"), 2 * 3 * n_x);
    }
}

#[test]
fn parameter_vector_layout() {
    let v: Vec<f64> = (0..16).map(|k| k as f64).collect();
    let p = VariationalParams::from_vec(2, 2, &v).unwrap();
    assert_eq!(p.steps[0].rho_p, 0.0);
    assert_eq!(p.steps[0].rho_x, 1.0);
    assert_eq!(p.steps[0].rotations[1], [5.0, 6.0, 7.0]);
    assert_eq!(p.to_vec(), v);
    assert!(VariationalParams::from_vec(2, 2, &v[..15]).is_err());
}

#[test]
fn text_round_trip() {
    let v: Vec<f64> = (0..16).map(|k| (k as f64 * 0.77).sin()).collect();
    let p = VariationalParams::from_vec(2, 2, &v).unwrap();
    let back = VariationalParams::parse(&p.to_text()).unwrap();
    assert_eq!(back, p);
    assert!(VariationalParams::parse("n_x = 2\n").is_err());
}

#[test]
fn small_register_beats_coarse_scan() {
    // n_x = 2, one step: 8 parameters. The quadratic phases have period 4
    // in ρ (Δ² = π/2 and integer squares), the rotations period 4π, and
    // 2π up to a global sign, which fidelity ignores.
    let k = 5;
    let rho: Vec<f64> = (0..k).map(|i| 4.0 * i as f64 / k as f64).collect();
    let rot: Vec<f64> = (0..k).map(|i| 2.0 * std::f64::consts::PI * i as f64 / k as f64).collect();
    let mut best: f64 = 0.0;
    let mut idx = [0usize; 8];
    loop {
        let v: Vec<f64> = (0..8).map(|d| if d < 2 { rho[idx[d]] } else { rot[idx[d]] }).collect();
        let p = VariationalParams::from_vec(2, 1, &v).unwrap();
        best = best.max(gaussian_fidelity(&p).unwrap());
        let mut d = 0;
        while d < 8 {
            idx[d] += 1;
            if idx[d] < k {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == 8 {
            break;
        }
    }
    let opts = OptimizeOptions { target: 1.0, restarts: 8, max_sweeps: 400 };
    let fit = optimize_gaussian(2, 1, 3, opts).unwrap();
    assert!(fit.fidelity >= best - 1e-9, "optimizer {} < scan {best}", fit.fidelity);
    assert!(fit.fidelity <= 1.0 + 1e-12);
}

#[test]
fn reported_fidelity_is_reproducible() {
    let opts = OptimizeOptions { target: 0.999, restarts: 4, max_sweeps: 300 };
    let fit = optimize_gaussian(4, 3, 7, opts).unwrap();
    assert!((gaussian_fidelity(&fit.params).unwrap() - fit.fidelity).abs() < 1e-12);
    let again = optimize_gaussian(4, 3, 7, opts).unwrap();
    assert_eq!(again.params, fit.params);
    let other = optimize_gaussian(4, 3, 8, opts).unwrap();
    assert!(other.fidelity > 0.9);
}

#[test]
fn six_qubit_register_reaches_target() {
    let fit = optimize_gaussian(6, 6, 1, OptimizeOptions::default()).unwrap();
    assert_eq!(fit.status, FitStatus::Reached);
    assert!(fit.fidelity >= 0.998);
}

#[test]
fn budget_exhaustion_is_flagged() {
    let opts = OptimizeOptions { target: 0.999999, restarts: 1, max_sweeps: 2 };
    let fit = optimize_gaussian(5, 1, 1, opts).unwrap();
    assert_eq!(fit.status, FitStatus::BudgetExhausted);
    assert!(fit.fidelity < 0.999999);
}

#[test]
fn electron_ground_state_energy() {
    for t in [1.0, -0.7, 2.0] {
        let s = {
            let mut s = StateVector::new(2).unwrap();
            s.apply_circuit(&electron_ground_2site(t, 0, 1).unwrap()).unwrap();
            s
        };
        let h = hopping_matrix(2, 0, 1) * c(t, 0.0);
        assert!((expectation(&h, &s) + t.abs()).abs() < 1e-12);
        let p = s.probabilities(0..1).unwrap();
        assert!((p[1] - 0.5).abs() < 1e-12);
        // One electron: no weight on |00⟩ or |11⟩.
        assert!(s.amplitudes()[0].norm() < 1e-12 && s.amplitudes()[3].norm() < 1e-12);
    }
}

#[test]
fn assembled_decoupled_input_energy() {
    let fit = optimize_gaussian(3, 3, 2, OptimizeOptions { target: 0.9999, restarts: 8, max_sweeps: 400 }).unwrap();
    let h = HolsteinModel::new(2, 1.0, 1.0, 0.0, 3).unwrap();
    let ep = h.to_ep();
    let s = assemble_input(&ep, &h.layout(), &fit.params).unwrap();
    assert_eq!(s.n_qubits(), 2 + 2 * 3);
    let e = expectation(&model_hamiltonian(&ep).unwrap(), &s);
    // E ≥ E₀ = −t + ω, and the excess is bounded by the infidelity times
    // the spread of the phonon spectrum on the grid.
    let scale = 2.0 * 3.0 * 8.0;
    assert!(e >= -1e-9);
    assert!(e <= 2.0 * (1.0 - fit.fidelity) * scale + 1e-9, "{e}");
}

#[test]
fn register_marginal_is_gaussian() {
    let fit = optimize_gaussian(5, 4, 1, OptimizeOptions { target: 0.999, restarts: 8, max_sweeps: 600 }).unwrap();
    let h = HolsteinModel::new(2, 1.0, 1.0, 0.0, 5).unwrap();
    let layout = h.layout();
    let s = assemble_input(&h.to_ep(), &layout, &fit.params).unwrap();
    let chi = sampled_hg(&make_grid(5).unwrap(), 0).unwrap();
    for mode in 0..2 {
        let p = s.probabilities(layout.phonon(mode)).unwrap();
        let tv = 0.5 * p.iter().zip(&chi.amplitudes).map(|(a, b)| (a - b * b).abs()).sum::<f64>();
        assert!(tv <= (1.0 - fit.fidelity).sqrt() + 1e-9, "tv {tv}");
    }
}

#[test]
fn layout_mismatch_is_rejected() {
    let h = HolsteinModel::new(2, 1.0, 1.0, 0.0, 3).unwrap();
    let p = VariationalParams::zeros(4, 1);
    assert!(assemble_input(&h.to_ep(), &h.layout(), &p).is_err());
    assert!(ansatz_circuit(&p, &[0, 1, 2]).is_err());
    assert!(electron_ground_2site(1.0, 3, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ansatz_preserves_norm(n_x in 1usize..=5, steps in 1usize..=3, seed in prop::collection::vec(-4.0f64..4.0, 54)) {
        let n = steps * (2 + 3 * n_x);
        let p = VariationalParams::from_vec(n_x, steps, &seed[..n]).unwrap();
        let s = ansatz_state(&p).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-10);
        let f = gaussian_fidelity(&p).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
    }
}
