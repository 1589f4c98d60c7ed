//! Brute-force reference constructions shared by the integration tests.
//! Apart from `oracles`, nothing here calls into the circuit builders.

#![allow(dead_code)]

use nalgebra::DMatrix;
use phonon_qsim::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Value of the register `reg` (low bit first) inside basis index `k`.
pub fn reg_value(k: usize, reg: &[usize]) -> usize {
    reg.iter().enumerate().map(|(r, &q)| ((k >> q) & 1) << r).sum()
}

pub fn diagonal(n_qubits: usize, phase: impl Fn(usize) -> f64) -> DMatrix<Complex64> {
    let dim = 1 << n_qubits;
    DMatrix::from_fn(dim, dim, |r, col| if r == col { Complex64::from_polar(1.0, phase(r)) } else { c(0.0, 0.0) })
}

/// `exp(−i t A)` for Hermitian `A` by scaling and squaring of a Taylor series.
pub fn expm_i(a: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let m = a * c(0.0, -t);
    let norm: f64 = m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = &m / c(2f64.powi(squarings as i32), 0.0);
    let dim = a.nrows();
    let mut result = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for k in 1..30 {
        term = &term * &scaled / c(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `c†_i c_j + c†_j c_i` on `n_qubits` qubits under Jordan-Wigner with
/// orbital `k` on qubit `k`.
pub fn hopping_matrix(n_qubits: usize, i: usize, j: usize) -> DMatrix<Complex64> {
    let dim = 1 << n_qubits;
    let mut h = DMatrix::zeros(dim, dim);
    for (from, to) in [(j, i), (i, j)] {
        for b in 0..dim {
            if (b >> from) & 1 == 1 && (b >> to) & 1 == 0 {
                let (lo, hi) = (from.min(to), from.max(to));
                let between = (lo + 1..hi).filter(|&q| (b >> q) & 1 == 1).count();
                let sign = if between % 2 == 0 { 1.0 } else { -1.0 };
                let target = b ^ (1 << from) ^ (1 << to);
                h[(target, b)] += c(sign, 0.0);
            }
        }
    }
    h
}

/// `N^{-1/2} e^{−2πi x m/N}` placed on `reg` inside an `n_qubits` space.
pub fn fourier_on(n_qubits: usize, reg: &[usize]) -> DMatrix<Complex64> {
    let dim = 1 << n_qubits;
    let n = 1usize << reg.len();
    let mask: usize = reg.iter().map(|&q| 1 << q).sum();
    DMatrix::from_fn(dim, dim, |r, col| {
        if r & !mask != col & !mask {
            return c(0.0, 0.0);
        }
        let (m, x) = (reg_value(r, reg), reg_value(col, reg));
        Complex64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * std::f64::consts::PI * (x * m) as f64 / n as f64)
    })
}

pub fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_off_diagonal(a: &DMatrix<Complex64>) -> f64 {
    let mut m: f64 = 0.0;
    for r in 0..a.nrows() {
        for col in 0..a.ncols() {
            if r != col {
                m = m.max(a[(r, col)].norm());
            }
        }
    }
    m
}

/// Golden Fock-basis reference shipped with the tests.
pub fn golden() -> Vec<phonon_qsim::ed::GoldenRow> {
    let text = include_str!("../data/ed_reference.csv");
    phonon_qsim::ed::parse_golden(text).expect("golden file parses")
}

pub mod oracles;
