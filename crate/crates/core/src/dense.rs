//! Dense reference matrices for brute-force checks on small layouts.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::grid::{p_squared_real, GridSpec};
use crate::model::EpModel;
use crate::{Error, Result};

/// Largest system the dense builders accept.
pub const MAX_DENSE_QUBITS: usize = 12;

fn register_value(index: usize, reg: &std::ops::Range<usize>) -> usize {
    (index >> reg.start) & ((1 << reg.len()) - 1)
}

fn with_register(index: usize, reg: &std::ops::Range<usize>, value: usize) -> usize {
    let mask = ((1 << reg.len()) - 1) << reg.start;
    (index & !mask) | (value << reg.start)
}

/// The model Hamiltonian on its system qubits (no ancillas), in the same
/// encoding the circuits use: Jordan-Wigner electrons, and for a mode of
/// frequency `ω` the grid operators `ω(P̃² + X̃²)/2` with `X = X̃/√ω`.
pub fn model_hamiltonian(model: &EpModel) -> Result<DMatrix<Complex64>> {
    let layout = model.layout();
    let nq = layout.n_system();
    if nq > MAX_DENSE_QUBITS {
        return Err(Error::ResourceCap { requested: nq, cap: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << nq;
    let grid = GridSpec::new(model.n_x())?;
    let p2 = p_squared_real(&grid);
    let xs = grid.x_values();
    let omega: Vec<f64> = model.modes().iter().map(|m| m.omega).collect();
    let regs: Vec<_> = (0..model.n_modes()).map(|m| layout.phonon(m)).collect();
    let occ = |b: usize, i: usize| (b >> layout.electron(i)) & 1 == 1;
    let x_phys = |b: usize, m: usize| xs[register_value(b, &regs[m])] / omega[m].sqrt();

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for b in 0..dim {
        let mut diag = 0.0;
        for m in 0..model.n_modes() {
            let x = xs[register_value(b, &regs[m])];
            diag += 0.5 * omega[m] * x * x;
            let v = register_value(b, &regs[m]);
            for w in 0..grid.n_points() {
                h[(with_register(b, &regs[m], w), b)] += 0.5 * omega[m] * p2[(w, v)];
            }
        }
        for c in model.phonon_couplings() {
            diag += c.k * x_phys(b, c.n) * x_phys(b, c.m);
        }
        for c in model.density_couplings().iter().filter(|c| c.i == c.j) {
            if occ(b, c.i) {
                diag += c.g * x_phys(b, c.mode);
            }
        }
        h[(b, b)] += diag;

        let mut hop = |i: usize, j: usize, amp: f64| {
            // c†_i c_j + c†_j c_i
            for (from, to) in [(j, i), (i, j)] {
                if occ(b, from) && !occ(b, to) {
                    let (lo, hi) = (from.min(to), from.max(to));
                    let string = (lo + 1..hi).filter(|&k| occ(b, k)).count();
                    let sign = if string % 2 == 0 { 1.0 } else { -1.0 };
                    let target = b ^ (1 << layout.electron(from)) ^ (1 << layout.electron(to));
                    h[(target, b)] += sign * amp;
                }
            }
        };
        for t in model.hoppings() {
            hop(t.i, t.j, t.t);
        }
        for c in model.density_couplings().iter().filter(|c| c.i != c.j) {
            hop(c.i, c.j, c.g * x_phys(b, c.mode));
        }
    }
    Ok(h.map(|v| Complex64::new(v, 0.0)))
}

/// `exp(−iHt)` for Hermitian `H`.
pub fn expm_hermitian(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let phases = eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&phases) * v.adjoint()
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn eigenvalues_hermitian(h: &DMatrix<Complex64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Largest entry magnitude.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |U†U − 1|` over entries.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - DMatrix::identity(n, n)))
}
