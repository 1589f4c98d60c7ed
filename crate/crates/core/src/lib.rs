//! Statevector simulation of electron-phonon Hamiltonians.
//!
//! Phonons are harmonic oscillators truncated onto a Fourier grid of
//! `N_x = 2^n_x` points and stored in `n_x`-qubit registers. Electrons use a
//! Jordan-Wigner encoding with one qubit per orbital. The crate provides:
//!
//! * [`model`]: lattice Hamiltonian descriptions and the qubit layout.
//! * [`grid`]: the Fourier-grid oscillator and its truncation diagnostics.
//! * [`statevector`]: a dense statevector engine.
//! * [`circuits`]: gate-level builders for every Trotter term.
//! * [`stateprep`]: variational Gaussian preparation and input assembly.
//! * [`qpe`]: phase estimation of energies and phonon-number distributions.
//! * [`ed`]: exact-diagonalization references for the Holstein model.
//! * [`runner`]: the experiment drivers behind the `phonon-qsim` binary.

// Negated comparisons such as `!(x > 0.0)` are used on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuits;
pub mod dense;
pub mod ed;
mod error;
pub mod grid;
pub mod lanczos;
pub mod model;
pub mod qpe;
pub mod runner;
pub mod stateprep;
pub mod statevector;

pub use error::{Error, Result};

pub use num_complex::Complex64;
