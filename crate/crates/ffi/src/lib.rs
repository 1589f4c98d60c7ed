//! C interface to `phonon-qsim`.
//!
//! Objects cross the boundary as opaque pointers created by `pq_*_new` style
//! functions and released with the matching `pq_*_free`. Every fallible call
//! returns a [`PqStatus`]; on failure a message is available from
//! [`pq_last_error_message`] on the same thread. Panics are caught and
//! reported as [`PqStatus::Panic`].
//!
//! Complex amplitudes are exchanged as interleaved `(re, im)` pairs of
//! doubles. Basis index bit `q` is qubit `q`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use phonon_qsim::circuits::{trotter_evolution, Circuit, TrotterOrder};
use phonon_qsim::ed::holstein_ed;
use phonon_qsim::model::{Boundary, EpModel, HolsteinModel};
use phonon_qsim::qpe::{ground_state_qpe, phonon_distribution, phonon_qpe_config, GroundSchedule};
use phonon_qsim::stateprep::{assemble_input, optimize_gaussian, OptimizeOptions};
use phonon_qsim::statevector::StateVector;
use phonon_qsim::{Complex64, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotConverged = 3,
    ResourceCap = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

impl From<&Error> for PqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotConverged(_) | Error::NoDominantPeak(_) | Error::WindowViolation(_) => PqStatus::NotConverged,
            Error::ResourceCap { .. } => PqStatus::ResourceCap,
            Error::Io(_) => PqStatus::Io,
            _ => PqStatus::InvalidArgument,
        }
    }
}

/// A Holstein chain and its general electron-phonon form.
pub struct PqModel {
    holstein: HolsteinModel,
    ep: EpModel,
}

pub struct PqState(StateVector);

pub struct PqCircuit(Circuit);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PqResources {
    pub total: usize,
    pub two_qubit: usize,
    pub depth: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PqGroundEstimate {
    pub energy: f64,
    pub bin_width: f64,
    pub peak_probability: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(PqStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PqStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PqStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PqStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn too_small(need: usize, got: usize) -> Failure {
    Failure(PqStatus::BufferTooSmall, format!("buffer holds {got} values, {need} needed"))
}

/// Length of the last error message on this thread including the
/// terminating NUL, or 0 if the last call succeeded.
#[no_mangle]
pub extern "C" fn pq_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |s| s.as_bytes_with_nul().len()))
}

/// Copies the last error message into `buf`, truncating to `len - 1` bytes.
/// Returns the number of bytes written, excluding the NUL.
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pq_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |s| s.as_bytes());
        let n = bytes.len().min(len - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Holstein chain `t Σ (c†c + h.c.) + g Σ n_i X_i + Σ (P²/2 + ω²X²/2)`.
///
/// # Safety
/// `out` must be a valid pointer to a `PqModel*`.
#[no_mangle]
pub unsafe extern "C" fn pq_holstein_new(
    n_sites: usize,
    t: f64,
    omega: f64,
    g: f64,
    n_x: usize,
    periodic: bool,
    out: *mut *mut PqModel,
) -> PqStatus {
    guard(|| {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let holstein = HolsteinModel::new(n_sites, t, omega, g, n_x)?.with_boundary(boundary);
        put(out, PqModel { holstein, ep: holstein.to_ep() })
    })
}

/// As [`pq_holstein_new`] with `g` set from `α = g²/(2ω²t)`.
///
/// # Safety
/// `out` must be a valid pointer to a `PqModel*`.
#[no_mangle]
pub unsafe extern "C" fn pq_holstein_from_alpha(
    n_sites: usize,
    t: f64,
    omega: f64,
    alpha: f64,
    n_x: usize,
    periodic: bool,
    out: *mut *mut PqModel,
) -> PqStatus {
    guard(|| {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let holstein = HolsteinModel::from_alpha(n_sites, t, omega, alpha, n_x)?.with_boundary(boundary);
        put(out, PqModel { holstein, ep: holstein.to_ep() })
    })
}

/// # Safety
/// `model` must come from a `pq_holstein_*` constructor, or be null.
#[no_mangle]
pub unsafe extern "C" fn pq_model_free(model: *mut PqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Electron plus phonon qubits of the model's layout, or 0 for null.
///
/// # Safety
/// `model` must be a live model or null.
#[no_mangle]
pub unsafe extern "C" fn pq_model_n_qubits(model: *const PqModel) -> usize {
    model.as_ref().map_or(0, |m| m.ep.layout().n_system())
}

/// `|0…0⟩` on `n_qubits` qubits.
///
/// # Safety
/// `out` must be a valid pointer to a `PqState*`.
#[no_mangle]
pub unsafe extern "C" fn pq_state_new(n_qubits: usize, out: *mut *mut PqState) -> PqStatus {
    guard(|| put(out, PqState(StateVector::new(n_qubits)?)))
}

/// # Safety
/// `state` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn pq_state_free(state: *mut PqState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live state or null.
#[no_mangle]
pub unsafe extern "C" fn pq_state_n_qubits(state: *const PqState) -> usize {
    state.as_ref().map_or(0, |s| s.0.n_qubits())
}

/// Copies the `2^n` amplitudes into `re_im` (length `2·2^n`).
///
/// # Safety
/// `re_im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pq_state_amplitudes(state: *const PqState, re_im: *mut f64, len: usize) -> PqStatus {
    guard(|| {
        let s = get(state, "state")?;
        let amps = s.0.amplitudes();
        if len < 2 * amps.len() {
            return Err(too_small(2 * amps.len(), len));
        }
        let out = slice_mut(re_im, len, "re_im")?;
        for (k, a) in amps.iter().enumerate() {
            out[2 * k] = a.re;
            out[2 * k + 1] = a.im;
        }
        Ok(())
    })
}

/// Replaces the amplitudes with `re_im` (length exactly `2·2^n`).
///
/// # Safety
/// `re_im` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn pq_state_set_amplitudes(state: *mut PqState, re_im: *const f64, len: usize) -> PqStatus {
    guard(|| {
        let s = get_mut(state, "state")?;
        let dim = s.0.amplitudes().len();
        if len != 2 * dim {
            return Err(Failure(PqStatus::InvalidArgument, format!("expected {} values, got {len}", 2 * dim)));
        }
        let src = slice_mut(re_im as *mut f64, len, "re_im")?;
        for (k, a) in s.0.amplitudes_mut().iter_mut().enumerate() {
            *a = Complex64::new(src[2 * k], src[2 * k + 1]);
        }
        Ok(())
    })
}

/// Marginal distribution of qubits `first .. first + count` (length `2^count`).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pq_state_probabilities(
    state: *const PqState,
    first: usize,
    count: usize,
    out: *mut f64,
    len: usize,
) -> PqStatus {
    guard(|| {
        let s = get(state, "state")?;
        let p = s.0.probabilities(first..first + count)?;
        if len < p.len() {
            return Err(too_small(p.len(), len));
        }
        slice_mut(out, len, "out")?[..p.len()].copy_from_slice(&p);
        Ok(())
    })
}

/// Optimizes the Gaussian-state ansatz with `steps` layers and returns the
/// model's input state: two-site electron ground state (or lowest hopping
/// orbital) times the Gaussian on every phonon register.
///
/// # Safety
/// `fidelity` may be null; `out` must be a valid pointer to a `PqState*`.
#[no_mangle]
pub unsafe extern "C" fn pq_gaussian_input(
    model: *const PqModel,
    steps: usize,
    seed: u64,
    target: f64,
    restarts: usize,
    fidelity: *mut f64,
    out: *mut *mut PqState,
) -> PqStatus {
    guard(|| {
        let m = get(model, "model")?;
        let opts = OptimizeOptions { target, restarts, ..OptimizeOptions::default() };
        let fit = optimize_gaussian(m.ep.n_x(), steps, seed, opts)?;
        let s = assemble_input(&m.ep, &m.ep.layout(), &fit.params)?;
        if let Some(f) = fidelity.as_mut() {
            *f = fit.fidelity;
        }
        put(out, PqState(s))
    })
}

/// Trotter circuit for `exp(−iH·time)` in `steps` steps of order 1 or 2.
///
/// # Safety
/// `out` must be a valid pointer to a `PqCircuit*`.
#[no_mangle]
pub unsafe extern "C" fn pq_trotter_circuit(
    model: *const PqModel,
    time: f64,
    steps: usize,
    order: u8,
    out: *mut *mut PqCircuit,
) -> PqStatus {
    guard(|| {
        let m = get(model, "model")?;
        let order = TrotterOrder::try_from(order)?;
        put(out, PqCircuit(trotter_evolution(&m.ep, &m.ep.layout(), time, steps, order)?))
    })
}

/// # Safety
/// `circuit` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_free(circuit: *mut PqCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_resources(circuit: *const PqCircuit, out: *mut PqResources) -> PqStatus {
    guard(|| {
        let c = get(circuit, "circuit")?;
        let out = get_mut(out, "out")?;
        let rc = c.0.resource_count();
        *out = PqResources { total: rc.total, two_qubit: rc.two_qubit, depth: rc.depth };
        Ok(())
    })
}

/// Tracked global phase of the circuit in radians.
///
/// # Safety
/// `circuit` must be a live circuit or null.
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_global_phase(circuit: *const PqCircuit) -> f64 {
    circuit.as_ref().map_or(0.0, |c| c.0.global_phase())
}

/// Applies the gates and, if `with_phase`, the tracked global phase.
///
/// # Safety
/// `circuit` and `state` must be live objects.
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_apply(
    circuit: *const PqCircuit,
    state: *mut PqState,
    with_phase: bool,
) -> PqStatus {
    guard(|| {
        let c = get(circuit, "circuit")?;
        let s = get_mut(state, "state")?;
        if with_phase {
            s.0.apply_circuit_with_phase(&c.0)?;
        } else {
            s.0.apply_circuit(&c.0)?;
        }
        Ok(())
    })
}

/// Text form of the circuit; release with [`pq_string_free`].
///
/// # Safety
/// `out` must be a valid pointer to a `char*`.
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_to_text(circuit: *const PqCircuit, out: *mut *mut c_char) -> PqStatus {
    guard(|| {
        let c = get(circuit, "circuit")?;
        let out = get_mut(out, "out")?;
        let text = CString::new(c.0.to_text()).map_err(|e| Failure(PqStatus::InvalidArgument, e.to_string()))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn pq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fock-basis ground state: energy into `energy`, `Z(0..len)` into `z`.
///
/// # Safety
/// `energy` must be valid; `z` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pq_holstein_ed(
    model: *const PqModel,
    n_cut: usize,
    energy: *mut f64,
    z: *mut f64,
    len: usize,
) -> PqStatus {
    guard(|| {
        let m = get(model, "model")?;
        let energy = get_mut(energy, "energy")?;
        let r = holstein_ed(&m.holstein, n_cut)?;
        *energy = r.energy();
        let z = slice_mut(z, len, "z")?;
        for (k, v) in z.iter_mut().enumerate() {
            *v = r.z().get(k).copied().unwrap_or(0.0);
        }
        Ok(())
    })
}

/// Ground energy by coarse-then-fine phase estimation from `input`, with
/// the library's default schedule apart from the ancilla counts and `dt`.
///
/// # Safety
/// `model`, `input` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pq_ground_energy(
    model: *const PqModel,
    input: *const PqState,
    coarse_ancilla: usize,
    fine_ancilla: usize,
    dt: f64,
    out: *mut PqGroundEstimate,
) -> PqStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = get(input, "input")?;
        let out = get_mut(out, "out")?;
        let schedule = GroundSchedule { coarse_ancilla, fine_ancilla, dt, ..GroundSchedule::default() };
        let est = ground_state_qpe(&m.ep, &s.0, &schedule)?;
        *out =
            PqGroundEstimate { energy: est.energy, bin_width: est.bin_width, peak_probability: est.peak_probability };
        Ok(())
    })
}

/// Phonon-number distribution `Z(0..len)` of `state` read out by phase
/// estimation with `n_ancilla` ancillas.
///
/// # Safety
/// `z` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pq_phonon_distribution(
    model: *const PqModel,
    state: *const PqState,
    n_ancilla: usize,
    z: *mut f64,
    len: usize,
) -> PqStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = get(state, "state")?;
        if len == 0 {
            return Err(Failure(PqStatus::InvalidArgument, "empty output buffer".into()));
        }
        let cfg = phonon_qpe_config(n_ancilla, m.holstein.omega, m.ep.n_modes())?;
        let d = phonon_distribution(&s.0, &m.ep, &cfg, len - 1)?;
        slice_mut(z, len, "z")?.copy_from_slice(&d.z);
        Ok(())
    })
}
