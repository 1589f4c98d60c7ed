//! Fourier-grid truncation of a unit harmonic oscillator.
//!
//! A register of `n_x` qubits holds `N_x = 2^n_x` position samples spaced by
//! `Δ = √(2π/N_x)`, so that `2L = N_xΔ = √(2πN_x)`. A register value `x`
//! stands for `x̃ = (x − N_x/2)Δ`; a momentum index `m` stands for
//! `p̃ = [((m + N_x/2) mod N_x) − N_x/2]Δ`.
//!
//! The momentum basis is reached with the unitary
//! `F_{m,x} = N_x^{-1/2} exp(−2πi·x·m/N_x)`, so `P̃ = F† diag(p̃) F`.
//! `F` differs from `⟨p_m|x⟩` only by the sign `(−1)^m`, which cancels in
//! every function of `P̃`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::model::MAX_NX;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    n_x: Option<usize>,
    n_points: usize,
    delta: f64,
}

impl GridSpec {
    /// Grid for an `n_x`-qubit register.
    pub fn new(n_x: usize) -> Result<Self> {
        if n_x == 0 || n_x > MAX_NX {
            return Err(Error::InvalidParameter(format!("n_x = {n_x} outside 1..={MAX_NX}")));
        }
        let mut g = Self::with_points(1 << n_x)?;
        g.n_x = Some(n_x);
        Ok(g)
    }

    /// Grid with an arbitrary even number of points. Only used by the
    /// truncation study, which scans sizes between powers of two.
    pub fn with_points(n_points: usize) -> Result<Self> {
        if n_points < 2 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("grid size {n_points} must be even and >= 2")));
        }
        Ok(GridSpec { n_x: None, n_points, delta: (2.0 * PI / n_points as f64).sqrt() })
    }

    /// Register width, if the grid size is a power of two.
    pub fn n_x(&self) -> Option<usize> {
        self.n_x
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Half-width `L = N_xΔ/2`.
    pub fn half_width(&self) -> f64 {
        self.n_points as f64 * self.delta / 2.0
    }

    /// `x − N_x/2` for register value `x`.
    pub fn x_integer(&self, i: usize) -> i64 {
        i as i64 - (self.n_points / 2) as i64
    }

    /// `((m + N_x/2) mod N_x) − N_x/2` for momentum index `m`.
    pub fn p_integer(&self, m: usize) -> i64 {
        let n = self.n_points;
        ((m + n / 2) % n) as i64 - (n / 2) as i64
    }

    pub fn x_eigenvalue(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.x_integer(i) as f64 * self.delta)
    }

    pub fn p_eigenvalue(&self, m: usize) -> Result<f64> {
        self.check_index(m)?;
        Ok(self.p_integer(m) as f64 * self.delta)
    }

    pub fn x_values(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x_integer(i) as f64 * self.delta).collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        (0..self.n_points).map(|m| self.p_integer(m) as f64 * self.delta).collect()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n_points {
            return Err(Error::InvalidParameter(format!("grid index {i} >= {}", self.n_points)));
        }
        Ok(())
    }
}

pub fn make_grid(n_x: usize) -> Result<GridSpec> {
    GridSpec::new(n_x)
}

/// Hermite-Gauss functions `φ_0(x) … φ_{n_max}(x)`.
///
/// Uses the three-term recursion seeded by `π^{-1/4} e^{-x²/2}`. The Gaussian
/// factor is carried as a separate log-scale so the recursion survives
/// arguments where `e^{-x²/2}` underflows.
pub fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    const RESCALE: f64 = 1e150;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    out.push(cur * log_scale.exp());
    for n in 0..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}

/// `√Δ φ_n(x̃_i)` on the grid.
#[derive(Clone, Debug)]
pub struct SampledHermiteGauss {
    pub level: usize,
    pub amplitudes: Vec<f64>,
}

impl SampledHermiteGauss {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect()
    }
}

pub fn sampled_hg(grid: &GridSpec, n: usize) -> Result<SampledHermiteGauss> {
    if n >= grid.n_points() {
        return Err(Error::InvalidParameter(format!("level {n} >= grid size {}", grid.n_points())));
    }
    let sd = grid.delta().sqrt();
    let amplitudes = grid.x_values().into_iter().map(|x| sd * hermite_functions(x, n)[n]).collect();
    Ok(SampledHermiteGauss { level: n, amplitudes })
}

/// All sampled levels `0..=n_max` at once; row `n` is `χ_n`.
pub fn sampled_hg_table(grid: &GridSpec, n_max: usize) -> Vec<Vec<f64>> {
    let sd = grid.delta().sqrt();
    let mut table = vec![vec![0.0; grid.n_points()]; n_max + 1];
    for (i, x) in grid.x_values().into_iter().enumerate() {
        for (n, v) in hermite_functions(x, n_max).into_iter().enumerate() {
            table[n][i] = sd * v;
        }
    }
    table
}

/// Dense grid operators.
#[derive(Clone, Debug)]
pub struct OperatorMatrices {
    /// `X̃`, diagonal in the position basis.
    pub x: DMatrix<Complex64>,
    /// `P̃ = F† diag(p̃) F`.
    pub p: DMatrix<Complex64>,
    /// `H̃_h = P̃²/2 + X̃²/2`.
    pub h: DMatrix<Complex64>,
    /// The position-to-momentum transform `F`.
    pub fourier: DMatrix<Complex64>,
}

pub fn fourier_matrix(n: usize) -> DMatrix<Complex64> {
    let norm = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |m, x| {
        let phase = -2.0 * PI * ((x * m) % n) as f64 / n as f64;
        Complex64::from_polar(norm, phase)
    })
}

pub fn operator_matrices(grid: &GridSpec) -> OperatorMatrices {
    let n = grid.n_points();
    let f = fourier_matrix(n);
    let p_diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        grid.p_values().into_iter().map(|p| Complex64::new(p, 0.0)),
    ));
    let x = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        grid.x_values().into_iter().map(|v| Complex64::new(v, 0.0)),
    ));
    let p = f.adjoint() * p_diag * &f;
    let mut h = (&p * &p + &x * &x) * Complex64::new(0.5, 0.0);
    // Remove rounding asymmetry so H is Hermitian to machine precision.
    let ht = h.adjoint();
    h = (h + ht) * Complex64::new(0.5, 0.0);
    OperatorMatrices { x, p, h, fourier: f }
}

/// Real symmetric `P̃²`; it is circulant with first column
/// `c(k) = (Δ²/N) Σ_m p_m² cos(2πkm/N)` over centred `m`.
pub fn p_squared_real(grid: &GridSpec) -> DMatrix<f64> {
    let n = grid.n_points();
    let d2 = grid.delta() * grid.delta();
    let col: Vec<f64> = (0..n)
        .map(|k| {
            (0..n)
                .map(|m| {
                    let pm = grid.p_integer(m) as f64;
                    pm * pm * (2.0 * PI * ((k * m) % n) as f64 / n as f64).cos()
                })
                .sum::<f64>()
                * d2
                / n as f64
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| col[(i + n - j) % n])
}

/// Real symmetric `H̃_h`.
pub fn hamiltonian_real(grid: &GridSpec) -> DMatrix<f64> {
    let mut h = p_squared_real(grid) * 0.5;
    for (i, x) in grid.x_values().into_iter().enumerate() {
        h[(i, i)] += 0.5 * x * x;
    }
    h
}

/// Applies `P̃` to a vector through FFTs.
pub struct MomentumOperator {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    p: Vec<f64>,
}

impl MomentumOperator {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n_points();
        MomentumOperator {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            p: grid.p_values(),
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len() as f64;
        let mut buf = v.to_vec();
        self.forward.process(&mut buf);
        for (b, p) in buf.iter_mut().zip(&self.p) {
            *b *= *p / n;
        }
        self.inverse.process(&mut buf);
        buf
    }
}

/// Per-level diagnostics of the truncated oscillator.
#[derive(Clone, Debug)]
pub struct TruncationReport {
    pub n_points: usize,
    /// Sorted eigenvalues `Ẽ_n` of `H̃_h`.
    pub energies: Vec<f64>,
    /// `|Ẽ_n − (n + ½)|`.
    pub energy_residual: Vec<f64>,
    /// `1 − |⟨φ̃_n|χ_n⟩|`.
    pub overlap_deficit: Vec<f64>,
    /// `‖([X̃, P̃] − i)|φ̃_n⟩‖`.
    pub commutator_residual: Vec<f64>,
}

impl TruncationReport {
    /// Worst of the three residuals at each level.
    pub fn max_residual(&self) -> Vec<f64> {
        (0..self.n_points)
            .map(|n| self.energy_residual[n].max(self.overlap_deficit[n]).max(self.commutator_residual[n]))
            .collect()
    }

    /// Number of leading levels whose residuals all stay within `eps`.
    pub fn faithful_levels(&self, eps: f64) -> usize {
        self.max_residual().iter().take_while(|&&r| r <= eps).count()
    }
}

/// Largest grid the dense diagonalization accepts.
pub const MAX_REPORT_POINTS: usize = 4096;

pub fn truncation_report(grid: &GridSpec) -> Result<TruncationReport> {
    let n = grid.n_points();
    if n > MAX_REPORT_POINTS {
        return Err(Error::InvalidParameter(format!("grid size {n} exceeds {MAX_REPORT_POINTS}")));
    }
    let eig = SymmetricEigen::try_new(hamiltonian_real(grid), f64::EPSILON, 0)
        .ok_or_else(|| Error::NotConverged(format!("dense eigensolver failed for N_x = {n}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let chis = sampled_hg_table(grid, n - 1);
    let xs = grid.x_values();
    let momentum = MomentumOperator::new(grid);

    let per_level: Vec<(f64, f64, f64, f64)> = order
        .par_iter()
        .enumerate()
        .map(|(level, &col)| {
            let energy = eig.eigenvalues[col];
            let mut v: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();
            let pivot = v.iter().copied().fold(0.0f64, |m, a| if a.abs() > m.abs() { a } else { m });
            if pivot < 0.0 {
                v.iter_mut().for_each(|a| *a = -*a);
            }
            let overlap: f64 = v.iter().zip(&chis[level]).map(|(a, b)| a * b).sum();
            let vc: Vec<Complex64> = v.iter().map(|&a| Complex64::new(a, 0.0)).collect();
            let xv: Vec<Complex64> = vc.iter().zip(&xs).map(|(a, x)| a * x).collect();
            let pv = momentum.apply(&vc);
            let pxv = momentum.apply(&xv);
            let comm = (0..n).map(|i| (xs[i] * pv[i] - pxv[i] - Complex64::i() * vc[i]).norm_sqr()).sum::<f64>().sqrt();
            (energy, (energy - (level as f64 + 0.5)).abs(), (1.0 - overlap.abs()).max(0.0), comm)
        })
        .collect();

    Ok(TruncationReport {
        n_points: n,
        energies: per_level.iter().map(|r| r.0).collect(),
        energy_residual: per_level.iter().map(|r| r.1).collect(),
        overlap_deficit: per_level.iter().map(|r| r.2).collect(),
        commutator_residual: per_level.iter().map(|r| r.3).collect(),
    })
}

/// Empirical truncation error envelope `10 exp[−(0.51 N_x − 0.765 N_ph)]`,
/// clamped to 1.
pub fn epsilon_bound(n_points: usize, n_ph: usize) -> f64 {
    (10.0 * (-(0.51 * n_points as f64 - 0.765 * n_ph as f64)).exp()).min(1.0)
}

/// Double-precision floor of the residuals in a [`TruncationReport`]:
/// roundoff of an `N_x`-term sum of products of size `L²`. Below a few
/// levels the envelope `epsilon_bound` drops under this floor for
/// `N_x ≥ 128`, so comparisons use `max(envelope, floor)`.
pub fn residual_floor(grid: &GridSpec) -> f64 {
    grid.n_points() as f64 * f64::EPSILON * grid.half_width().powi(2)
}

/// Largest `N_ph` whose error envelope stays within `eps`; 0 if none.
pub fn max_nph(n_points: usize, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("accuracy {eps} outside (0, 1)")));
    }
    let v = (0.51 * n_points as f64 - (10.0 / eps).ln()) / 0.765;
    Ok(if v > 0.0 { v.floor() as usize } else { 0 })
}

/// Measured faithful-level counts against grid size at a fixed accuracy.
#[derive(Clone, Debug)]
pub struct ErrorLawFit {
    pub eps: f64,
    /// `(N_x, N_ph)` pairs, `N_ph ≥ 1` being the number of leading levels
    /// whose three residuals all stay within `eps`.
    pub points: Vec<(usize, usize)>,
    /// Least-squares slope of `N_x` against `N_ph`.
    pub slope: f64,
    pub intercept: f64,
}

/// Fits the minimal grid size needed for `N_ph` faithful levels. The
/// envelope `10 exp[−(0.51 N_x − 0.765 N_ph)]` predicts a slope of 1.5.
pub fn error_law_fit(eps: f64, grid_sizes: &[usize]) -> Result<ErrorLawFit> {
    if grid_sizes.len() < 2 {
        return Err(Error::InvalidParameter("need at least two grid sizes".into()));
    }
    // Grids with no faithful level carry no information about the slope.
    let points: Vec<(usize, usize)> = grid_sizes
        .iter()
        .map(|&n| Ok((n, truncation_report(&GridSpec::with_points(n)?)?.faithful_levels(eps))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.1 > 0)
        .collect();
    if points.len() < 2 {
        return Err(Error::InvalidParameter(format!("fewer than two grids have a faithful level at {eps}")));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.1 as f64).sum::<f64>() / k;
    let my = points.iter().map(|p| p.0 as f64).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.1 as f64 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.1 as f64 - mx) * (p.0 as f64 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("faithful level count does not vary".into()));
    }
    let slope = sxy / sxx;
    Ok(ErrorLawFit { eps, points, slope, intercept: my - slope * mx })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = make_grid(6).unwrap();
        assert_eq!(g.n_points(), 64);
        assert!((g.delta() - 0.313329).abs() < 1e-6);
        assert!((g.half_width() - 10.0265).abs() < 1e-4);
        let g1 = make_grid(1).unwrap();
        assert!((g1.delta() - PI.sqrt()).abs() < 1e-12);
        assert!((make_grid(7).unwrap().delta() - 0.221557).abs() < 1e-6);
        assert!(make_grid(0).is_err());
        assert!(make_grid(17).is_err());
    }

    #[test]
    fn eigenvalue_maps() {
        let g = make_grid(6).unwrap();
        assert!((g.x_eigenvalue(0).unwrap() + 32.0 * g.delta()).abs() < 1e-12);
        assert_eq!(g.p_eigenvalue(0).unwrap(), 0.0);
        assert!((g.p_eigenvalue(48).unwrap() + 16.0 * g.delta()).abs() < 1e-12);
        assert!(g.x_eigenvalue(64).is_err());
        assert!(g.p_eigenvalue(64).is_err());
    }

    #[test]
    fn p_values_permute_x_values() {
        let g = make_grid(4).unwrap();
        let mut xs: Vec<i64> = (0..16).map(|i| g.x_integer(i)).collect();
        let mut ps: Vec<i64> = (0..16).map(|m| g.p_integer(m)).collect();
        xs.sort();
        ps.sort();
        assert_eq!(xs, ps);
    }

    #[test]
    fn ground_level_samples() {
        let g = make_grid(6).unwrap();
        let chi0 = sampled_hg(&g, 0).unwrap();
        assert!((chi0.amplitudes[32] - g.delta().sqrt() * PI.powf(-0.25)).abs() < 1e-12);
        assert!((chi0.amplitudes[32] - 0.420449).abs() < 1e-6);
        assert!((chi0.norm() - 1.0).abs() < 1e-7);
        let chi1 = sampled_hg(&g, 1).unwrap();
        assert_eq!(chi1.amplitudes[32], 0.0);
        assert!(sampled_hg(&g, 64).is_err());
    }

    #[test]
    fn recursion_survives_large_arguments() {
        // φ_n at x = 60 underflows as e^{-x²/2} but not for n near x²/2.
        let v = hermite_functions(60.0, 2000);
        assert!(v.iter().all(|a| a.is_finite()));
        assert!(v[1800].abs() > 1e-6);
        // Normalization check of a high level against quadrature.
        let dx = 0.01;
        let norm: f64 = (-8000..8000).map(|k| hermite_functions(k as f64 * dx, 40)[40].powi(2) * dx).sum();
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn small_operator_matrices() {
        let g = make_grid(2).unwrap();
        let ops = operator_matrices(&g);
        let d = (PI / 2.0).sqrt();
        let expect = [-2.0 * d, -d, 0.0, d];
        for (i, want) in expect.iter().enumerate() {
            assert!((ops.x[(i, i)].re - want).abs() < 1e-14);
        }
        for n_x in 1..=6 {
            let ops = operator_matrices(&make_grid(n_x).unwrap());
            let herm = (&ops.h - ops.h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(herm < 1e-12);
        }
    }

    #[test]
    fn real_hamiltonian_matches_complex() {
        let g = make_grid(4).unwrap();
        let ops = operator_matrices(&g);
        let hr = hamiltonian_real(&g);
        for i in 0..16 {
            for j in 0..16 {
                assert!((ops.h[(i, j)].re - hr[(i, j)]).abs() < 1e-12);
                assert!(ops.h[(i, j)].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn momentum_operator_matches_dense() {
        let g = make_grid(3).unwrap();
        let ops = operator_matrices(&g);
        let v: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64 * 0.3 - 1.0, 0.1 * k as f64)).collect();
        let fast = MomentumOperator::new(&g).apply(&v);
        let dense = &ops.p * nalgebra::DVector::from_vec(v);
        for i in 0..8 {
            assert!((fast[i] - dense[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn ground_energy_at_n6() {
        let report = truncation_report(&make_grid(6).unwrap()).unwrap();
        assert!(report.energy_residual[0] < 1e-7);
        assert!((report.energies[0] - 0.5).abs() < 1e-7);
        assert!(report.energy_residual.iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn epsilon_bound_values() {
        assert!((epsilon_bound(64, 18) / 6.4e-8 - 1.0).abs() < 0.02);
        assert!((epsilon_bound(128, 18) / 4.3e-22 - 1.0).abs() < 0.05);
        // The envelope exceeds 1 at (64, 45) and is clamped.
        assert_eq!(epsilon_bound(64, 45), 1.0);
    }

    #[test]
    fn max_nph_values() {
        assert_eq!(max_nph(64, 1e-7).unwrap(), 18);
        assert_eq!(max_nph(128, 1e-7).unwrap(), 61);
        assert_eq!(max_nph(8, 1e-7).unwrap(), 0);
        assert!(max_nph(64, 0.0).is_err());
        assert!(max_nph(64, 1.0).is_err());
        for n in [32, 64, 96, 128] {
            let k = max_nph(n, 1e-5).unwrap();
            assert!(epsilon_bound(n, k) <= 1e-5);
            assert!(epsilon_bound(n, k + 1) > 1e-5);
        }
    }
}
