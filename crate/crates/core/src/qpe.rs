//! Quantum phase estimation over Trotterized evolution.
//!
//! The controlled unitary is `U = e^{iE_off t₀} e^{−iHt₀}`. An eigenvalue
//! `E` produces the phase `(E − E_off)t₀`, read out on `n_ancilla` qubits;
//! ancilla value `j` maps to the energy `E_off + ((N − j) mod N)·w` with
//! `N = 2^n_ancilla` and bin width `w = 2π/(N t₀)`.
//!
//! Two engines produce the same ancilla marginals:
//!
//! * [`QpeEngine::Circuit`] simulates the full register: Hadamards,
//!   controlled powers built gate by gate, the inverse QFT, and readout.
//! * [`QpeEngine::Spectral`] never allocates ancillas. It records the
//!   autocorrelations `c(d) = ⟨ψ|U^d ψ⟩` for `d < N`, from which the
//!   marginal follows in closed form:
//!   `P(j) = N⁻² Σ_{|d|<N} (N − |d|) c(d) e^{−2πijd/N}`.
//!   The post-measurement system state for outcome `j` is
//!   `N⁻¹ Σ_k e^{−2πijk/N} U^k ψ`, accumulated in the same pass.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::circuits::{trotter_evolution, Circuit, CompiledCircuit, FourierDirection, TrotterOrder};
use crate::dense::{expm_hermitian, model_hamiltonian};
use crate::grid::GridSpec;
use crate::model::EpModel;
use crate::statevector::{Gate, StateVector, DEFAULT_MAX_QUBITS};
use crate::{Error, Result};

/// Ancilla counts accepted by the spectral engine.
pub const MAX_ANCILLA: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QpeEngine {
    Circuit,
    #[default]
    Spectral,
}

#[derive(Clone, Debug)]
pub struct QpeConfig {
    pub n_ancilla: usize,
    /// Evolution time of one application of `U`.
    pub t0: f64,
    pub e_off: f64,
    /// Largest Trotter step; `t₀` is split into `ceil(t₀/dt)` equal steps.
    pub dt: f64,
    pub order: TrotterOrder,
    pub engine: QpeEngine,
    /// Apply the circuit's tracked global phase under ancilla control.
    /// Turning this off is only useful to demonstrate the resulting shift.
    pub promote_global_phase: bool,
    /// Probability in the highest bin that counts as a window violation.
    pub window_threshold: f64,
}

impl QpeConfig {
    pub fn new(n_ancilla: usize, t0: f64, e_off: f64) -> Self {
        QpeConfig {
            n_ancilla,
            t0,
            e_off,
            dt: 0.05,
            order: TrotterOrder::Second,
            engine: QpeEngine::Spectral,
            promote_global_phase: true,
            window_threshold: 1e-2,
        }
    }

    /// Configuration whose bins cover `[e_min, e_max]` with one spare bin
    /// on each side, so the highest phase stays below `2π(1 − 1/N)`.
    pub fn for_window(n_ancilla: usize, e_min: f64, e_max: f64) -> Result<Self> {
        if !(e_max > e_min) || !e_min.is_finite() || !e_max.is_finite() {
            return Err(Error::InvalidParameter(format!("energy window [{e_min}, {e_max}]")));
        }
        if !(2..=MAX_ANCILLA).contains(&n_ancilla) {
            return Err(Error::InvalidParameter(format!("{n_ancilla} ancillas (expected 2..={MAX_ANCILLA})")));
        }
        let n = (1usize << n_ancilla) as f64;
        let w = (e_max - e_min) / (n - 3.0).max(1.0);
        let t0 = 2.0 * PI / (n * w);
        Ok(QpeConfig::new(n_ancilla, t0, e_min - w))
    }

    pub fn n_bins(&self) -> usize {
        1 << self.n_ancilla
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * PI / (self.t0 * self.n_bins() as f64)
    }

    /// Center of energy bin `e` (bins ordered by energy).
    pub fn bin_energy(&self, e: usize) -> f64 {
        self.e_off + e as f64 * self.bin_width()
    }

    /// Energy bin read from ancilla value `j`.
    pub fn bin_of_outcome(&self, j: usize) -> usize {
        let n = self.n_bins();
        (n - j % n) % n
    }

    pub fn trotter_steps(&self) -> usize {
        ((self.t0 / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    /// Whether `e_max` respects `(E_max − E_off)·t₀ < 2π(1 − 1/N)`.
    pub fn covers(&self, e_max: f64) -> bool {
        (e_max - self.e_off) * self.t0 < 2.0 * PI * (1.0 - 1.0 / self.n_bins() as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ancilla == 0 || self.n_ancilla > MAX_ANCILLA {
            return Err(Error::InvalidParameter(format!("{} ancillas (expected 1..={MAX_ANCILLA})", self.n_ancilla)));
        }
        if !(self.t0 > 0.0) || !self.t0.is_finite() {
            return Err(Error::InvalidParameter(format!("t0 = {}", self.t0)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt = {}", self.dt)));
        }
        if !self.e_off.is_finite() {
            return Err(Error::InvalidParameter("non-finite energy offset".into()));
        }
        if !(0.0..=1.0).contains(&self.window_threshold) {
            return Err(Error::InvalidParameter(format!("window threshold {}", self.window_threshold)));
        }
        Ok(())
    }
}

/// Probability per energy bin, bins ascending in energy.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyDistribution {
    bin_width: f64,
    bins: Vec<(f64, f64)>,
}

impl EnergyDistribution {
    pub fn new(bin_width: f64, bins: Vec<(f64, f64)>) -> Result<Self> {
        if bins.is_empty() || !(bin_width > 0.0) {
            return Err(Error::InvalidParameter("empty distribution".into()));
        }
        if bins.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter("bin energies must increase".into()));
        }
        Ok(EnergyDistribution { bin_width, bins })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn bins(&self) -> &[(f64, f64)] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn energy(&self, e: usize) -> f64 {
        self.bins[e].0
    }

    pub fn probability(&self, e: usize) -> f64 {
        self.bins[e].1
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().map(|b| b.1).sum()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (e, b) in self.bins.iter().enumerate() {
            if b.1 > self.bins[best].1 {
                best = e;
            }
        }
        best
    }

    /// Probability-weighted mean and standard deviation of the energy.
    pub fn moments(&self) -> (f64, f64) {
        let tot = self.total();
        let mean = self.bins.iter().map(|(e, p)| e * p).sum::<f64>() / tot;
        let var = self.bins.iter().map(|(e, p)| (e - mean).powi(2) * p).sum::<f64>() / tot;
        (mean, var.sqrt())
    }

    /// Smallest energy above which at most `mass` probability remains.
    pub fn upper_support(&self, mass: f64) -> f64 {
        let mut tail = 0.0;
        for &(e, p) in self.bins.iter().rev() {
            tail += p;
            if tail > mass {
                return e;
            }
        }
        self.bins[0].0
    }
}

/// `U = e^{iE_off t₀}·e^{−iHt₀}` in one of two representations.
pub enum Propagator {
    /// Trotter circuit; `phase` is the scalar applied alongside the gates.
    Circuit { circuit: Circuit, compiled: CompiledCircuit, phase: f64 },
    /// Exact dense unitary on the system qubits.
    Dense(DMatrix<Complex64>),
}

impl Propagator {
    /// Trotterized propagator for `model` on its own layout.
    pub fn trotter(model: &EpModel, cfg: &QpeConfig) -> Result<Self> {
        cfg.validate()?;
        let layout = model.layout();
        let circuit = trotter_evolution(model, &layout, cfg.t0, cfg.trotter_steps(), cfg.order)?;
        let tracked = if cfg.promote_global_phase { circuit.global_phase() } else { 0.0 };
        let phase = cfg.e_off * cfg.t0 + tracked;
        let compiled = circuit.compile();
        Ok(Propagator::Circuit { circuit, compiled, phase })
    }

    /// Exact propagator of a Hermitian matrix.
    pub fn exact(h: &DMatrix<Complex64>, cfg: &QpeConfig) -> Result<Self> {
        cfg.validate()?;
        if h.nrows() != h.ncols() || !h.nrows().is_power_of_two() {
            return Err(Error::InvalidParameter(format!("{}x{} Hamiltonian", h.nrows(), h.ncols())));
        }
        let u = expm_hermitian(h, cfg.t0) * Complex64::from_polar(1.0, cfg.e_off * cfg.t0);
        Ok(Propagator::Dense(u))
    }

    /// Exact propagator of `model` in the circuit encoding (small systems).
    pub fn exact_model(model: &EpModel, cfg: &QpeConfig) -> Result<Self> {
        Self::exact(&model_hamiltonian(model)?, cfg)
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Propagator::Circuit { circuit, .. } => circuit.n_qubits(),
            Propagator::Dense(u) => u.nrows().trailing_zeros() as usize,
        }
    }

    /// Applies `U` to the low qubits of `state`.
    pub fn apply(&self, state: &mut StateVector) {
        match self {
            Propagator::Circuit { compiled, phase, .. } => {
                compiled.apply(state);
                state.scale(Complex64::from_polar(1.0, *phase));
            }
            Propagator::Dense(u) => {
                let dim = u.nrows();
                let mut buf = vec![Complex64::new(0.0, 0.0); dim];
                for chunk in state.amplitudes_mut().chunks_mut(dim) {
                    for (r, slot) in buf.iter_mut().enumerate() {
                        *slot = (0..dim).map(|c| u[(r, c)] * chunk[c]).sum();
                    }
                    chunk.copy_from_slice(&buf);
                }
            }
        }
    }

    /// Applies `U` to the low qubits on the subspace where `control` is set.
    pub fn apply_controlled(&self, state: &mut StateVector, control: usize) -> Result<()> {
        match self {
            Propagator::Circuit { circuit, phase, .. } => {
                for g in circuit.gates() {
                    state.apply_controlled(control, g)?;
                }
                state.apply_gate(&Gate::PhaseShift(control, *phase))
            }
            Propagator::Dense(u) => {
                let dim = u.nrows();
                let bit = 1usize << control;
                if control < self.n_qubits() || control >= state.n_qubits() {
                    return Err(Error::QubitOutOfRange { index: control, n_qubits: state.n_qubits() });
                }
                let mut buf = vec![Complex64::new(0.0, 0.0); dim];
                for (k, chunk) in state.amplitudes_mut().chunks_mut(dim).enumerate() {
                    if (k * dim) & bit == 0 {
                        continue;
                    }
                    for (r, slot) in buf.iter_mut().enumerate() {
                        *slot = (0..dim).map(|c| u[(r, c)] * chunk[c]).sum();
                    }
                    chunk.copy_from_slice(&buf);
                }
                Ok(())
            }
        }
    }
}

/// The system part of a QPE input: either exactly `n_system` qubits, or a
/// wider state whose extra (ancilla) qubits are all zero.
fn system_input(input: &StateVector, n_system: usize) -> Result<StateVector> {
    if input.n_qubits() < n_system {
        return Err(Error::LayoutMismatch(format!(
            "input has {} qubits, the propagator acts on {n_system}",
            input.n_qubits()
        )));
    }
    let dim = 1usize << n_system;
    let stray: f64 = input.amplitudes()[dim..].iter().map(|a| a.norm_sqr()).sum();
    if stray > 1e-12 {
        return Err(Error::InvalidParameter(format!("ancillas not zeroed (weight {stray:.3e})")));
    }
    let s = StateVector::from_amplitudes(input.amplitudes()[..dim].to_vec())?;
    if (s.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!("input norm {}", s.norm())));
    }
    Ok(s)
}

/// Output of one phase-estimation run.
#[derive(Clone, Debug)]
pub struct QpeRun {
    pub distribution: EnergyDistribution,
    /// Post-measurement system states for the requested energy bins, in
    /// request order, unnormalized (squared norm = bin probability).
    pub projections: Vec<(usize, StateVector)>,
}

fn to_distribution(cfg: &QpeConfig, by_outcome: &[f64]) -> Result<EnergyDistribution> {
    let n = cfg.n_bins();
    let bins = (0..n).map(|e| (cfg.bin_energy(e), by_outcome[(n - e) % n].clamp(0.0, 1.0))).collect();
    let d = EnergyDistribution::new(cfg.bin_width(), bins)?;
    let top = d.probability(n - 1);
    if top >= cfg.window_threshold {
        return Err(Error::WindowViolation(top));
    }
    Ok(d)
}

/// Ancilla marginal of standard QPE on `input`.
pub fn qpe_distribution(input: &StateVector, model: &EpModel, cfg: &QpeConfig) -> Result<EnergyDistribution> {
    let u = Propagator::trotter(model, cfg)?;
    Ok(qpe_run(input, &u, cfg, &[])?.distribution)
}

/// QPE with an explicit propagator, optionally returning post-measurement
/// states for some energy bins (spectral engine only).
pub fn qpe_run(input: &StateVector, u: &Propagator, cfg: &QpeConfig, keep: &[usize]) -> Result<QpeRun> {
    cfg.validate()?;
    let psi = system_input(input, u.n_qubits())?;
    match cfg.engine {
        QpeEngine::Circuit => {
            if !keep.is_empty() {
                return Err(Error::InvalidParameter("projections need the spectral engine".into()));
            }
            let p = circuit_marginal(&psi, u, cfg.n_ancilla)?;
            Ok(QpeRun { distribution: to_distribution(cfg, &p)?, projections: Vec::new() })
        }
        QpeEngine::Spectral => {
            if let Some(&e) = keep.iter().find(|&&e| e >= cfg.n_bins()) {
                return Err(Error::InvalidParameter(format!("bin {e} of {}", cfg.n_bins())));
            }
            let (p, proj) = spectral_marginal(&psi, u, cfg.n_ancilla, keep)?;
            Ok(QpeRun {
                distribution: to_distribution(cfg, &p)?,
                projections: keep.iter().copied().zip(proj).collect(),
            })
        }
    }
}

/// Full-register simulation; returns probabilities indexed by ancilla value.
fn circuit_marginal(psi: &StateVector, u: &Propagator, n_ancilla: usize) -> Result<Vec<f64>> {
    let n_sys = psi.n_qubits();
    let width = n_sys + n_ancilla;
    if width > DEFAULT_MAX_QUBITS {
        return Err(Error::ResourceCap { requested: width, cap: DEFAULT_MAX_QUBITS });
    }
    let mut state = psi.tensor(&StateVector::new(n_ancilla)?)?;
    let anc = n_sys..width;
    for q in anc.clone() {
        state.apply_gate(&Gate::Hadamard(q))?;
    }
    for (k, q) in anc.clone().enumerate() {
        for _ in 0..1usize << k {
            u.apply_controlled(&mut state, q)?;
        }
    }
    state.qft_register(anc.clone(), FourierDirection::Forward)?;
    state.probabilities(anc)
}

/// Autocorrelation evaluation of the same marginal, plus projections.
fn spectral_marginal(
    psi: &StateVector,
    u: &Propagator,
    n_ancilla: usize,
    keep: &[usize],
) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let n = 1usize << n_ancilla;
    let dim = psi.amplitudes().len();
    let mut acc: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); dim]; keep.len()];
    // Outcome j = N − e; its kernel e^{−2πijk/N} equals e^{2πiek/N}.
    let step: Vec<Complex64> =
        keep.iter().map(|&e| Complex64::from_polar(1.0, 2.0 * PI * e as f64 / n as f64)).collect();
    let mut twiddle: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); keep.len()];
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut phi = psi.clone();
    for (d, cd) in c.iter_mut().enumerate() {
        if d > 0 {
            u.apply(&mut phi);
        }
        *cd = psi.inner(&phi);
        for ((a, tw), st) in acc.iter_mut().zip(twiddle.iter_mut()).zip(&step) {
            for (x, y) in a.iter_mut().zip(phi.amplitudes()) {
                *x += *tw * y;
            }
            *tw *= st;
        }
    }
    let mut b: Vec<Complex64> = c.iter().enumerate().map(|(d, cd)| cd * (n - d) as f64).collect();
    b[0] = Complex64::new(c[0].re * n as f64 / 2.0, 0.0);
    FftPlanner::new().plan_fft_forward(n).process(&mut b);
    let nn = (n * n) as f64;
    let p = b.iter().map(|z| 2.0 * z.re / nn).collect();
    let scale = 1.0 / n as f64;
    let proj = acc
        .into_iter()
        .map(|a| StateVector::from_amplitudes(a.into_iter().map(|x| x * scale).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok((p, proj))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyEstimate {
    pub energy: f64,
    /// Half the bin width.
    pub sigma: f64,
    pub cluster_probability: f64,
}

fn cluster(d: &EnergyDistribution, center: usize, radius: usize) -> std::ops::RangeInclusive<usize> {
    center.saturating_sub(radius)..=(center + radius).min(d.len() - 1)
}

/// Weighted mean over the bins within two of the most probable one.
pub fn estimate_energy(d: &EnergyDistribution) -> Result<EnergyEstimate> {
    let top = d.argmax();
    let range = cluster(d, top, 2);
    let p: f64 = range.clone().map(|e| d.probability(e)).sum();
    if p < 0.5 {
        return Err(Error::NoDominantPeak(p));
    }
    let energy = range.map(|e| d.energy(e) * d.probability(e)).sum::<f64>() / p;
    Ok(EnergyEstimate { energy, sigma: d.bin_width() / 2.0, cluster_probability: p })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub bin: usize,
    /// Interpolated eigenvalue position.
    pub energy: f64,
    /// Probability within two bins of the peak.
    pub cluster_probability: f64,
}

/// Lowest-energy local maximum carrying at least `min_probability` within
/// two bins, with its eigenvalue interpolated from the readout line shape.
///
/// An isolated eigenvalue a fraction `x` of a bin above bin `i` gives
/// `P(i+1)/P(i) = sin²(πx/N)/sin²(π(1−x)/N)`, which is inverted exactly.
pub fn lowest_peak(d: &EnergyDistribution, min_probability: f64) -> Result<Peak> {
    let n = d.len();
    let p = |e: usize| d.probability(e);
    for e in 0..n {
        let left = if e > 0 { p(e - 1) } else { 0.0 };
        let right = if e + 1 < n { p(e + 1) } else { 0.0 };
        if p(e) < left || p(e) < right || p(e) == 0.0 {
            continue;
        }
        let mass: f64 = cluster(d, e, 2).map(p).sum();
        if mass < min_probability {
            continue;
        }
        let (ratio, dir) = if right >= left { (right / p(e), 1.0) } else { (left / p(e), -1.0) };
        let a = PI / n as f64;
        let s = ratio.sqrt();
        let x = (s * a.sin()).atan2(1.0 + s * a.cos()) / a;
        let energy = d.energy(e) + dir * x * d.bin_width();
        return Ok(Peak { bin: e, energy, cluster_probability: mass });
    }
    Err(Error::NoDominantPeak(d.bins().iter().map(|b| b.1).fold(0.0, f64::max)))
}

/// Bounds on the one-electron spectrum of `model` from term norms.
pub fn spectral_bounds(model: &EpModel) -> Result<(f64, f64)> {
    let grid = GridSpec::new(model.n_x())?;
    let x_max = grid.half_width();
    let x2_max = x_max * x_max;
    let p2_max = (PI / grid.delta()).powi(2);
    let omega = |m: usize| model.modes()[m].omega;
    let (mut lo, mut hi) = (0.0, 0.0);
    for m in model.modes() {
        hi += 0.5 * m.omega * (x2_max + p2_max);
    }
    for c in model.phonon_couplings() {
        let b = c.k.abs() * x2_max / (omega(c.n) * omega(c.m)).sqrt();
        lo -= b;
        hi += b;
    }
    // One electron: the couplings and hoppings act as one bounded block
    // whose norm is at most the largest absolute row sum over orbitals.
    let mut row = vec![0.0; model.n_sites()];
    for h in model.hoppings() {
        row[h.i] += h.t.abs();
        row[h.j] += h.t.abs();
    }
    for c in model.density_couplings() {
        let b = c.g.abs() * x_max / omega(c.mode).sqrt();
        row[c.i] += b;
        if c.i != c.j {
            row[c.j] += b;
        }
    }
    let r = row.into_iter().fold(0.0, f64::max);
    Ok((lo - r, hi + r))
}

/// Two-pass schedule for the lowest eigenvalue of an input state.
#[derive(Clone, Debug)]
pub struct GroundSchedule {
    pub coarse_ancilla: usize,
    pub fine_ancilla: usize,
    /// Width of the fine window in energy units.
    pub fine_width: f64,
    /// How far below the coarse estimate the fine window starts.
    pub margin: f64,
    pub dt: f64,
    pub order: TrotterOrder,
    /// Smallest cluster probability accepted as a peak.
    pub min_peak: f64,
    /// Fine bins on each side of the predicted peak whose projections are
    /// accumulated during the fine pass.
    pub keep_radius: usize,
    /// Extra QPE rounds on the post-selected state, each post-selecting the
    /// same bin. One round leaves excited-state leakage falling as `1/Δ²`
    /// in the bin distance `Δ`; each extra round multiplies in another
    /// such factor.
    pub filter_rounds: usize,
}

impl Default for GroundSchedule {
    fn default() -> Self {
        GroundSchedule {
            coarse_ancilla: 10,
            fine_ancilla: 10,
            fine_width: 40.0,
            margin: 2.0,
            dt: 0.025,
            order: TrotterOrder::Second,
            min_peak: 1e-3,
            keep_radius: 12,
            filter_rounds: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundEstimate {
    /// Interpolated from the last filter round, or from the fine pass when
    /// there are no filter rounds.
    pub energy: f64,
    /// Interpolated from the fine pass on the input state.
    pub input_energy: f64,
    /// Fine bin holding the peak.
    pub peak_bin: usize,
    pub coarse_energy: f64,
    pub bin_width: f64,
    pub peak_probability: f64,
    pub coarse: EnergyDistribution,
    pub fine: EnergyDistribution,
    pub fine_config: QpeConfig,
    /// Normalized system state after reading the peak bin in every round.
    pub state: StateVector,
    /// Probability that the filter rounds all return the peak bin again.
    pub filter_survival: f64,
}

/// Coarse pass over the term-norm window, then a fine pass starting
/// `margin` below the coarse lowest peak.
pub fn ground_state_qpe(model: &EpModel, input: &StateVector, s: &GroundSchedule) -> Result<GroundEstimate> {
    let (lo, hi) = spectral_bounds(model)?;
    let mut coarse_cfg = QpeConfig::for_window(s.coarse_ancilla, lo, hi)?;
    coarse_cfg.dt = s.dt;
    coarse_cfg.order = s.order;
    let coarse = qpe_run(input, &Propagator::trotter(model, &coarse_cfg)?, &coarse_cfg, &[])?.distribution;
    let coarse_peak = lowest_peak(&coarse, s.min_peak)?;
    log::debug!("coarse peak {:.5} (bin width {:.4})", coarse_peak.energy, coarse.bin_width());

    let start = coarse_peak.energy - s.margin;
    let mut cfg = QpeConfig::for_window(s.fine_ancilla, start, start + s.fine_width)?;
    cfg.dt = s.dt;
    cfg.order = s.order;
    let u = Propagator::trotter(model, &cfg)?;
    let guess = ((coarse_peak.energy - cfg.e_off) / cfg.bin_width()).round() as i64;
    let keep: Vec<usize> = (guess - s.keep_radius as i64..=guess + s.keep_radius as i64)
        .filter(|&e| e >= 0 && (e as usize) < cfg.n_bins())
        .map(|e| e as usize)
        .collect();
    let run = qpe_run(input, &u, &cfg, &keep)?;
    let peak = lowest_peak(&run.distribution, s.min_peak)?;
    let mut state = match run.projections.iter().find(|(e, _)| *e == peak.bin) {
        Some((_, st)) => st.clone(),
        None => {
            log::debug!("fine peak bin {} outside the kept range, repeating the pass", peak.bin);
            qpe_run(input, &u, &cfg, &[peak.bin])?.projections.remove(0).1
        }
    };
    state.normalize();
    let mut survival = 1.0;
    let mut energy = peak.energy;
    for _ in 0..s.filter_rounds {
        let mut round = qpe_run(&state, &u, &cfg, &[peak.bin])?;
        // The post-selected state is dominated by the ground component, so
        // its line shape gives a cleaner interpolation than the raw input.
        if let Ok(p) = lowest_peak(&round.distribution, s.min_peak) {
            if p.bin.abs_diff(peak.bin) <= 1 {
                energy = p.energy;
            }
        }
        let mut next = round.projections.remove(0).1;
        survival *= next.norm().powi(2);
        next.normalize();
        state = next;
    }
    Ok(GroundEstimate {
        energy,
        input_energy: peak.energy,
        peak_bin: peak.bin,
        coarse_energy: coarse_peak.energy,
        bin_width: cfg.bin_width(),
        peak_probability: run.distribution.probability(peak.bin),
        coarse,
        fine: run.distribution,
        fine_config: cfg,
        state,
        filter_survival: survival,
    })
}

/// QPE configuration for reading total phonon number under `H_p` with
/// modes of frequency `omega`: bins of `ω/4`, the vacuum on a bin center.
pub fn phonon_qpe_config(n_ancilla: usize, omega: f64, n_modes: usize) -> Result<QpeConfig> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega = {omega}")));
    }
    let n = (1usize << n_ancilla.min(MAX_ANCILLA)) as f64;
    let w = omega / 4.0;
    let base = omega * n_modes as f64 / 2.0;
    Ok(QpeConfig::new(n_ancilla, 2.0 * PI / (n * w), base - 2.0 * w))
}

#[derive(Clone, Debug)]
pub struct PhononDistribution {
    /// `z[n]`: probability of `n` phonons in total.
    pub z: Vec<f64>,
    pub distribution: EnergyDistribution,
}

/// Phonon-number distribution of `polaron` by phase estimation under the
/// free phonon Hamiltonian of `model`'s modes, binned to `E = ω(n + N_modes/2)`.
pub fn phonon_distribution(
    polaron: &StateVector,
    model: &EpModel,
    cfg: &QpeConfig,
    cutoff: usize,
) -> Result<PhononDistribution> {
    let omega = model.modes().first().map(|m| m.omega).ok_or_else(|| Error::InvalidModel("no phonon modes".into()))?;
    if model.modes().iter().any(|m| (m.omega - omega).abs() > 1e-12) {
        return Err(Error::InvalidModel("phonon readout needs equal mode frequencies".into()));
    }
    if cfg.bin_width() > omega / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "bin width {:.4} exceeds ω/2 = {:.4}; phonon numbers would be ambiguous",
            cfg.bin_width(),
            omega / 2.0
        )));
    }
    let mut b = EpModel::builder(model.n_sites(), model.n_x());
    for m in model.modes() {
        b = b.mode(m.site, m.omega);
    }
    let free = b.build()?;
    let d = qpe_distribution(polaron, &free, cfg)?;
    let base = omega * model.n_modes() as f64 / 2.0;
    let mut z = vec![0.0; cutoff + 1];
    for &(e, p) in d.bins() {
        let n = ((e - base) / omega + 0.5 + 1e-9).floor().max(0.0) as usize;
        if n <= cutoff {
            z[n] += p;
        }
    }
    Ok(PhononDistribution { z, distribution: d })
}
