//! Lanczos iteration for the lowest eigenpair of a real symmetric operator.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Converged when the Ritz residual `|β_k s_k|` drops below this.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { max_iter: 400, tol: 1e-11 }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Deterministic start vector: all ones with a small index-dependent
/// tilt, normalized.
///
/// A flat vector is orthogonal to ground states that are odd under a
/// lattice symmetry (the 2-site Holstein ground state for `t > 0` is one),
/// so the tilt breaks every such symmetry without randomness.
pub fn default_start(dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|k| 1.0 + 0.5 * ((k as f64 + 1.0) * 0.7548776662).fract()).collect();
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= n);
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// Lowest eigenpair of the operator `apply(v, out)` (writes `A v` into `out`).
///
/// Full reorthogonalization keeps the Krylov basis orthonormal, so no
/// spurious copies of converged eigenvalues appear.
pub fn lowest_eigenpair(
    dim: usize,
    apply: impl Fn(&[f64], &mut [f64]),
    start: &[f64],
    opts: LanczosOptions,
) -> Result<Eigenpair> {
    if dim == 0 || start.len() != dim {
        return Err(Error::InvalidParameter(format!("start vector length {} for dimension {dim}", start.len())));
    }
    let n0 = dot(start, start).sqrt();
    if n0 == 0.0 {
        return Err(Error::InvalidParameter("zero start vector".into()));
    }
    let max_iter = opts.max_iter.min(dim);
    let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|a| a / n0).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];

    let ritz = |alpha: &[f64], beta: &[f64]| {
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (idx, &value) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        (value, eig.eigenvectors.column(idx).iter().copied().collect::<Vec<f64>>())
    };

    loop {
        let k = basis.len() - 1;
        apply(&basis[k], &mut w);
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                axpy(&mut w, -c, q);
            }
        }
        let b = dot(&w, &w).sqrt();
        let (value, s) = ritz(&alpha, &beta);
        let residual = (b * s[k]).abs();
        let exhausted = alpha.len() >= max_iter || b < 1e-14;
        if residual < opts.tol || exhausted {
            if residual >= opts.tol && alpha.len() < dim {
                return Err(Error::NotConverged(format!(
                    "Lanczos residual {residual:.3e} after {} iterations",
                    alpha.len()
                )));
            }
            let mut vector = vec![0.0; dim];
            for (c, q) in s.iter().zip(&basis) {
                axpy(&mut vector, *c, q);
            }
            let nv = dot(&vector, &vector).sqrt();
            vector.iter_mut().for_each(|a| *a /= nv);
            return Ok(Eigenpair { value, vector, iterations: alpha.len(), residual });
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}
