//! Dense statevector engine.
//!
//! Qubit `q` is bit `q` of the basis-state index. Gates update the amplitude
//! array in place with stride loops; no full unitary is ever formed.

use std::io::{Read, Write};
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuits::{qft_circuit, Circuit, CompiledCircuit, FourierDirection};
use crate::{Error, Result};

/// Default refusal threshold: 2^28 amplitudes are 4 GiB.
pub const DEFAULT_MAX_QUBITS: usize = 28;

/// Below this size gate loops stay on the calling thread.
const PARALLEL_QUBITS: usize = 18;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Elementary gates. Angles are in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    /// `diag(1, e^{iθ})`.
    PhaseShift(usize, f64),
    /// Phase `e^{iθ}` on `|11⟩` of (control, target).
    ControlledPhase(usize, usize, f64),
    /// `exp(−iθX/2)`.
    Rx(usize, f64),
    /// `exp(−iθY/2)`.
    Ry(usize, f64),
    /// `exp(−iθZ/2)`.
    Rz(usize, f64),
    Hadamard(usize),
    PauliX(usize),
    PauliY(usize),
    PauliZ(usize),
    /// (control, target).
    Cnot(usize, usize),
    Swap(usize, usize),
    /// Scalar `e^{iθ}`. Never touches amplitudes in an uncontrolled run.
    GlobalPhase(f64),
}

impl Gate {
    /// Qubits the gate acts on, in argument order.
    pub fn qubits(&self) -> Vec<usize> {
        use Gate::*;
        match *self {
            PhaseShift(q, _) | Rx(q, _) | Ry(q, _) | Rz(q, _) | Hadamard(q) | PauliX(q) | PauliY(q) | PauliZ(q) => {
                vec![q]
            }
            ControlledPhase(a, b, _) | Cnot(a, b) | Swap(a, b) => vec![a, b],
            GlobalPhase(_) => vec![],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits().len() == 2
    }

    pub fn is_diagonal(&self) -> bool {
        use Gate::*;
        matches!(self, PhaseShift(..) | ControlledPhase(..) | Rz(..) | PauliZ(_) | GlobalPhase(_))
    }

    pub fn angle(&self) -> Option<f64> {
        use Gate::*;
        match *self {
            PhaseShift(_, t) | ControlledPhase(_, _, t) | Rx(_, t) | Ry(_, t) | Rz(_, t) | GlobalPhase(t) => Some(t),
            _ => None,
        }
    }

    /// Mnemonic used by the text export format.
    pub fn name(&self) -> &'static str {
        use Gate::*;
        match self {
            PhaseShift(..) => "P",
            ControlledPhase(..) => "CP",
            Rx(..) => "RX",
            Ry(..) => "RY",
            Rz(..) => "RZ",
            Hadamard(_) => "H",
            PauliX(_) => "X",
            PauliY(_) => "Y",
            PauliZ(_) => "Z",
            Cnot(..) => "CNOT",
            Swap(..) => "SWAP",
            GlobalPhase(_) => "GPHASE",
        }
    }

    pub fn inverse(&self) -> Gate {
        use Gate::*;
        match *self {
            PhaseShift(q, t) => PhaseShift(q, -t),
            ControlledPhase(c, q, t) => ControlledPhase(c, q, -t),
            Rx(q, t) => Rx(q, -t),
            Ry(q, t) => Ry(q, -t),
            Rz(q, t) => Rz(q, -t),
            GlobalPhase(t) => GlobalPhase(-t),
            g => g,
        }
    }

    /// Same gate with qubit indices shifted by `offset`.
    pub fn shifted(&self, offset: usize) -> Gate {
        self.remapped(|q| q + offset)
    }

    pub fn remapped(&self, f: impl Fn(usize) -> usize) -> Gate {
        use Gate::*;
        match *self {
            PhaseShift(q, t) => PhaseShift(f(q), t),
            ControlledPhase(c, q, t) => ControlledPhase(f(c), f(q), t),
            Rx(q, t) => Rx(f(q), t),
            Ry(q, t) => Ry(f(q), t),
            Rz(q, t) => Rz(f(q), t),
            Hadamard(q) => Hadamard(f(q)),
            PauliX(q) => PauliX(f(q)),
            PauliY(q) => PauliY(f(q)),
            PauliZ(q) => PauliZ(f(q)),
            Cnot(c, q) => Cnot(f(c), f(q)),
            Swap(a, b) => Swap(f(a), f(b)),
            GlobalPhase(t) => GlobalPhase(t),
        }
    }

    /// The gate's local matrix, row-major over its own qubits with the first
    /// listed qubit as the low bit. 1×1 for `GlobalPhase`.
    pub fn local_matrix(&self) -> Vec<Vec<Complex64>> {
        use Gate::*;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match *self {
            PhaseShift(_, t) => vec![vec![ONE, ZERO], vec![ZERO, Complex64::from_polar(1.0, t)]],
            Rx(_, t) => {
                let (sn, cs) = (t / 2.0).sin_cos();
                vec![vec![c(cs, 0.0), c(0.0, -sn)], vec![c(0.0, -sn), c(cs, 0.0)]]
            }
            Ry(_, t) => {
                let (sn, cs) = (t / 2.0).sin_cos();
                vec![vec![c(cs, 0.0), c(-sn, 0.0)], vec![c(sn, 0.0), c(cs, 0.0)]]
            }
            Rz(_, t) => {
                vec![vec![Complex64::from_polar(1.0, -t / 2.0), ZERO], vec![ZERO, Complex64::from_polar(1.0, t / 2.0)]]
            }
            Hadamard(_) => vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]],
            PauliX(_) => vec![vec![ZERO, ONE], vec![ONE, ZERO]],
            PauliY(_) => vec![vec![ZERO, c(0.0, -1.0)], vec![c(0.0, 1.0), ZERO]],
            PauliZ(_) => vec![vec![ONE, ZERO], vec![ZERO, -ONE]],
            ControlledPhase(_, _, t) => {
                let mut m = identity(4);
                m[3][3] = Complex64::from_polar(1.0, t);
                m
            }
            Cnot(..) => {
                // low bit = control
                let mut m = identity(4);
                m[1] = vec![ZERO, ZERO, ZERO, ONE];
                m[3] = vec![ZERO, ONE, ZERO, ZERO];
                m
            }
            Swap(..) => {
                let mut m = identity(4);
                m[1] = vec![ZERO, ZERO, ONE, ZERO];
                m[2] = vec![ZERO, ONE, ZERO, ZERO];
                m
            }
            GlobalPhase(t) => vec![vec![Complex64::from_polar(1.0, t)]],
        }
    }

    /// Validates indices against a register width.
    pub fn check(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::DuplicateQubit(qs[0]));
        }
        Ok(())
    }
}

fn identity(n: usize) -> Vec<Vec<Complex64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { ONE } else { ZERO }).collect()).collect()
}

#[inline]
fn insert_zero(k: usize, bit: usize) -> usize {
    let low = k & ((1 << bit) - 1);
    ((k >> bit) << (bit + 1)) | low
}

#[inline]
fn insert_two_zeros(k: usize, a: usize, b: usize) -> usize {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    insert_zero(insert_zero(k, lo), hi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits, refusing more than [`DEFAULT_MAX_QUBITS`].
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::with_cap(n_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn with_cap(n_qubits: usize, cap: usize) -> Result<Self> {
        if n_qubits > cap {
            return Err(Error::ResourceCap { requested: n_qubits, cap });
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::new(n_qubits)?;
        if index >= s.amps.len() {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range")));
        }
        s.amps[0] = ZERO;
        s.amps[index] = ONE;
        Ok(s)
    }

    /// Wraps raw amplitudes; the length must be a power of two. No
    /// normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("amplitude count {len} is not a power of two")));
        }
        Ok(StateVector { n_qubits: len.trailing_zeros() as usize, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.n_qubits, other.n_qubits, "inner product of different widths");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `self ⊗ high`: `high` occupies the qubits above `self`.
    pub fn tensor(&self, high: &StateVector) -> Result<StateVector> {
        let n = self.n_qubits + high.n_qubits;
        if n > DEFAULT_MAX_QUBITS {
            return Err(Error::ResourceCap { requested: n, cap: DEFAULT_MAX_QUBITS });
        }
        let mut amps = Vec::with_capacity(1 << n);
        for h in &high.amps {
            amps.extend(self.amps.iter().map(|l| l * h));
        }
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Marginal distribution of a contiguous register; entry `k` is the
    /// probability that the register reads `k` (low qubit = low bit).
    pub fn probabilities(&self, register: Range<usize>) -> Result<Vec<f64>> {
        if register.end > self.n_qubits || register.start > register.end {
            return Err(Error::InvalidParameter(format!("register {register:?} outside {} qubits", self.n_qubits)));
        }
        let width = register.end - register.start;
        let mask = (1usize << width) - 1;
        let mut out = vec![0.0; 1 << width];
        for (i, a) in self.amps.iter().enumerate() {
            out[(i >> register.start) & mask] += a.norm_sqr();
        }
        Ok(out)
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.check(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        use Gate::*;
        let n = self.n_qubits;
        let amps = &mut self.amps;
        match *gate {
            GlobalPhase(_) => {}
            PhaseShift(q, t) => {
                let ph = Complex64::from_polar(1.0, t);
                for_upper(amps, n, q, |b| *b *= ph);
            }
            PauliZ(q) => for_upper(amps, n, q, |b| *b = -*b),
            Rz(q, t) => {
                let lo = Complex64::from_polar(1.0, -t / 2.0);
                let hi = lo.conj();
                for_pairs(amps, n, q, |a, b| {
                    *a *= lo;
                    *b *= hi;
                });
            }
            ControlledPhase(c, q, t) => {
                let ph = Complex64::from_polar(1.0, t);
                let set = (1 << c) | (1 << q);
                for k in 0..amps.len() >> 2 {
                    amps[insert_two_zeros(k, c, q) | set] *= ph;
                }
            }
            Hadamard(q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for_pairs(amps, n, q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * s;
                    *b = (x - y) * s;
                });
            }
            PauliX(q) => for_pairs(amps, n, q, std::mem::swap),
            PauliY(q) => for_pairs(amps, n, q, |a, b| {
                let (x, y) = (*a, *b);
                *a = Complex64::new(y.im, -y.re);
                *b = Complex64::new(-x.im, x.re);
            }),
            Rx(q, t) => {
                let (sn, cs) = (t / 2.0).sin_cos();
                let ms = Complex64::new(0.0, -sn);
                for_pairs(amps, n, q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * cs + y * ms;
                    *b = x * ms + y * cs;
                });
            }
            Ry(q, t) => {
                let (sn, cs) = (t / 2.0).sin_cos();
                for_pairs(amps, n, q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * cs - y * sn;
                    *b = x * sn + y * cs;
                });
            }
            Cnot(c, q) => {
                for k in 0..amps.len() >> 2 {
                    let base = insert_two_zeros(k, c, q) | (1 << c);
                    amps.swap(base, base | (1 << q));
                }
            }
            Swap(a, b) => {
                for k in 0..amps.len() >> 2 {
                    let base = insert_two_zeros(k, a, b);
                    amps.swap(base | (1 << a), base | (1 << b));
                }
            }
        }
    }

    /// Applies `gate` only on the subspace where `control` is `|1⟩`. A
    /// `GlobalPhase(θ)` becomes a phase shift on the control qubit.
    pub fn apply_controlled(&mut self, control: usize, gate: &Gate) -> Result<()> {
        gate.check(self.n_qubits)?;
        if control >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: control, n_qubits: self.n_qubits });
        }
        if gate.qubits().contains(&control) {
            return Err(Error::DuplicateQubit(control));
        }
        if let Gate::GlobalPhase(t) = *gate {
            self.apply_unchecked(&Gate::PhaseShift(control, t));
            return Ok(());
        }
        let qs = gate.qubits();
        let m = gate.local_matrix();
        let dim = m.len();
        let cbit = 1usize << control;
        let mut local = vec![ZERO; dim];
        let mut idx = vec![0usize; dim];
        let mut sorted = qs.clone();
        sorted.push(control);
        sorted.sort_unstable();
        let free = self.amps.len() >> sorted.len();
        for k in 0..free {
            let mut base = k;
            for &b in &sorted {
                base = insert_zero(base, b);
            }
            base |= cbit;
            for (s, slot) in idx.iter_mut().enumerate() {
                let mut i = base;
                for (bit, &q) in qs.iter().enumerate() {
                    if s >> bit & 1 == 1 {
                        i |= 1 << q;
                    }
                }
                *slot = i;
            }
            for (s, &i) in idx.iter().enumerate() {
                local[s] = self.amps[i];
            }
            for (r, &i) in idx.iter().enumerate() {
                self.amps[i] = (0..dim).map(|s| m[r][s] * local[s]).sum();
            }
        }
        Ok(())
    }

    /// Applies the circuit's gates. The tracked global phase is not applied.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() > self.n_qubits {
            return Err(Error::QubitOutOfRange { index: circuit.n_qubits() - 1, n_qubits: self.n_qubits });
        }
        for g in circuit.gates() {
            self.apply_unchecked(g);
        }
        Ok(())
    }

    /// Applies the circuit's gates and multiplies by its tracked phase.
    pub fn apply_circuit_with_phase(&mut self, circuit: &Circuit) -> Result<()> {
        self.apply_circuit(circuit)?;
        self.scale(Complex64::from_polar(1.0, circuit.global_phase()));
        Ok(())
    }

    pub fn apply_compiled(&mut self, compiled: &CompiledCircuit) {
        compiled.apply(self);
    }

    /// Fourier transform of a contiguous register. `Forward` maps position
    /// amplitudes to momentum amplitudes with kernel `e^{−2πi·x·m/N}`.
    pub fn qft_register(&mut self, register: Range<usize>, direction: FourierDirection) -> Result<()> {
        if register.end > self.n_qubits || register.is_empty() {
            return Err(Error::InvalidParameter(format!("register {register:?} invalid for {} qubits", self.n_qubits)));
        }
        let qubits: Vec<usize> = register.collect();
        let c = qft_circuit(&qubits, direction)?;
        self.apply_circuit(&c)
    }

    /// Raw little-endian dump: interleaved `f64` real and imaginary parts.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<StateVector> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() % 16 != 0 {
            return Err(Error::InvalidParameter("amplitude dump length is not a multiple of 16".into()));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        StateVector::from_amplitudes(amps)
    }
}

/// Calls `f(a, b)` on every amplitude pair differing only in bit `q`.
#[inline]
fn for_pairs<F>(amps: &mut [Complex64], n_qubits: usize, q: usize, f: F)
where
    F: Fn(&mut Complex64, &mut Complex64) + Sync + Send,
{
    let half = 1usize << q;
    let body = |chunk: &mut [Complex64]| {
        let (lo, hi) = chunk.split_at_mut(half);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a, b);
        }
    };
    if n_qubits >= PARALLEL_QUBITS && q + 4 < n_qubits {
        amps.par_chunks_mut(2 * half).for_each(body);
    } else {
        amps.chunks_mut(2 * half).for_each(body);
    }
}

/// Calls `f` on every amplitude with bit `q` set.
#[inline]
fn for_upper<F>(amps: &mut [Complex64], n_qubits: usize, q: usize, f: F)
where
    F: Fn(&mut Complex64) + Sync + Send,
{
    let half = 1usize << q;
    let body = |chunk: &mut [Complex64]| chunk[half..].iter_mut().for_each(&f);
    if n_qubits >= PARALLEL_QUBITS && q + 4 < n_qubits {
        amps.par_chunks_mut(2 * half).for_each(body);
    } else {
        amps.chunks_mut(2 * half).for_each(body);
    }
}
