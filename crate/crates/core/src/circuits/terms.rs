use crate::statevector::Gate;
use crate::{Error, Result};

use super::Circuit;

/// Direction of the register Fourier transform.
///
/// `Forward` is the position-to-momentum map `F` with kernel
/// `N^{-1/2} e^{−2πi·x·m/N}`, which is the textbook inverse QFT. `Inverse`
/// is `F†`, the textbook QFT.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FourierDirection {
    Forward,
    Inverse,
}

fn check_register(reg: &[usize]) -> Result<()> {
    if reg.is_empty() {
        return Err(Error::InvalidParameter("empty register".into()));
    }
    for (k, q) in reg.iter().enumerate() {
        if reg[..k].contains(q) {
            return Err(Error::DuplicateQubit(*q));
        }
    }
    Ok(())
}

fn width_for(qubits: impl IntoIterator<Item = usize>) -> usize {
    qubits.into_iter().max().map_or(0, |q| q + 1)
}

/// H + controlled-phase ladder + swap network on `reg` (low bit first).
pub fn qft_circuit(reg: &[usize], direction: FourierDirection) -> Result<Circuit> {
    check_register(reg)?;
    let n = reg.len();
    let mut c = Circuit::new(width_for(reg.iter().copied()));
    for j in (0..n).rev() {
        c.push(Gate::Hadamard(reg[j]))?;
        for k in (0..j).rev() {
            let angle = std::f64::consts::PI / (1u64 << (j - k)) as f64;
            c.push(Gate::ControlledPhase(reg[k], reg[j], angle))?;
        }
    }
    for k in 0..n / 2 {
        c.push(Gate::Swap(reg[k], reg[n - 1 - k]))?;
    }
    Ok(match direction {
        FourierDirection::Inverse => c,
        FourierDirection::Forward => c.inverse(),
    })
}

/// `exp(−iθ(x − 2^{n−1})²)` on register value `x`.
///
/// Expanding in the bits `x_r`:
/// `(x − 2^{n−1})² = Σ_r x_r(2^{2r} − 2^{n+r}) + Σ_{r<s} x_r x_s 2^{r+s+1} + 2^{2n−2}`,
/// giving `n` phase shifts, `n(n−1)/2` controlled phases and a tracked phase.
pub fn phase_x2(reg: &[usize], theta: f64) -> Result<Circuit> {
    check_register(reg)?;
    let n = reg.len() as i32;
    let mut c = Circuit::new(width_for(reg.iter().copied()));
    for r in 0..n {
        let w = 2f64.powi(2 * r) - 2f64.powi(n + r);
        c.push(Gate::PhaseShift(reg[r as usize], -theta * w))?;
    }
    for r in 0..n {
        for s in r + 1..n {
            c.push(Gate::ControlledPhase(reg[r as usize], reg[s as usize], -theta * 2f64.powi(r + s + 1)))?;
        }
    }
    c.add_phase(-theta * 2f64.powi(2 * n - 2));
    Ok(c)
}

/// `exp(−iθ m̃²)` in the momentum basis, conjugated back to position:
/// `F† diag(e^{−iθ m̃²}) F`.
///
/// The centred momentum `m̃ = ((m + N/2) mod N) − N/2` is the two's-complement
/// reading of the register, so `m̃ = Σ_r c_r m_r` with `c_r = 2^r` below the
/// top bit and `c_{n−1} = −2^{n−1}`. Squaring needs no constant term.
pub fn phase_p2(reg: &[usize], theta: f64) -> Result<Circuit> {
    check_register(reg)?;
    let n = reg.len();
    let weight = |r: usize| if r + 1 == n { -2f64.powi(r as i32) } else { 2f64.powi(r as i32) };
    let mut c = qft_circuit(reg, FourierDirection::Forward)?;
    for (r, &q) in reg.iter().enumerate() {
        c.push(Gate::PhaseShift(q, -theta * weight(r) * weight(r)))?;
    }
    for r in 0..n {
        for s in r + 1..n {
            c.push(Gate::ControlledPhase(reg[r], reg[s], -2.0 * theta * weight(r) * weight(s)))?;
        }
    }
    c.append(&qft_circuit(reg, FourierDirection::Inverse)?);
    Ok(c)
}

fn check_disjoint(a: &[usize], b: &[usize]) -> Result<()> {
    if let Some(q) = a.iter().find(|q| b.contains(q)) {
        return Err(Error::OverlappingRegisters(*q));
    }
    Ok(())
}

/// `exp(−iθ(x_n − h)(x_m − h))` with `h = 2^{n_x−1}`: `n_x²` cross-register
/// controlled phases, `2n_x` linear corrections and a tracked phase.
pub fn phase_xx(reg_n: &[usize], reg_m: &[usize], theta: f64) -> Result<Circuit> {
    check_register(reg_n)?;
    check_register(reg_m)?;
    check_disjoint(reg_n, reg_m)?;
    if reg_n.len() != reg_m.len() {
        return Err(Error::InvalidParameter("registers of different widths".into()));
    }
    let n = reg_n.len() as i32;
    let h = 2f64.powi(n - 1);
    let mut c = Circuit::new(width_for(reg_n.iter().chain(reg_m).copied()));
    for r in 0..n {
        for s in 0..n {
            c.push(Gate::ControlledPhase(reg_n[r as usize], reg_m[s as usize], -theta * 2f64.powi(r + s)))?;
        }
    }
    for r in 0..n {
        c.push(Gate::PhaseShift(reg_n[r as usize], theta * h * 2f64.powi(r)))?;
    }
    for s in 0..n {
        c.push(Gate::PhaseShift(reg_m[s as usize], theta * h * 2f64.powi(s)))?;
    }
    c.add_phase(-theta * h * h);
    Ok(c)
}

/// `exp(−iθ n_e (x − 2^{n_x−1}))`: the electron qubit picks up the phase
/// `−θ(x − N_x/2)` when occupied.
pub fn ep_density_coupling(e_qubit: usize, reg: &[usize], theta: f64) -> Result<Circuit> {
    check_register(reg)?;
    if reg.contains(&e_qubit) {
        return Err(Error::OverlappingRegisters(e_qubit));
    }
    let n = reg.len() as i32;
    let mut c = Circuit::new(width_for(reg.iter().copied().chain([e_qubit])));
    for r in 0..n {
        c.push(Gate::ControlledPhase(e_qubit, reg[r as usize], -theta * 2f64.powi(r)))?;
    }
    c.push(Gate::PhaseShift(e_qubit, theta * 2f64.powi(n - 1)))?;
    Ok(c)
}

/// `exp(−iθ(c†_i c_j + c†_j c_i))` under Jordan-Wigner.
///
/// The hopping equals `(X_i Z⋯Z X_j + Y_i Z⋯Z Y_j)/2`; each half is a basis
/// change, a CNOT parity ladder from `i` to `j`, `Rz(θ)` on `j`, and the
/// mirror image.
pub fn jw_hopping(i: usize, j: usize, theta: f64) -> Result<Circuit> {
    hopping_with_phonons(i, j, theta, &[])
}

/// `exp[−i(c†_i c_j + c†_j c_i)(θ₀ + Σ_n θ_n (x_n − 2^{n_x−1}))]`.
///
/// The phonon terms only change the central rotation: `Rz(θ₀)` becomes
/// `Rz(θ₀ − Σ_n θ_n 2^{n_x−1})` followed by controlled-`Rz(θ_n 2^r)` from
/// each register bit, so the Jordan-Wigner string is shared.
pub fn hopping_with_phonons(i: usize, j: usize, theta0: f64, phonons: &[(&[usize], f64)]) -> Result<Circuit> {
    if i == j {
        return Err(Error::InvalidParameter(format!("hopping ({i}, {j}) must join distinct orbitals")));
    }
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    let mut width = j + 1;
    for (k, (reg, _)) in phonons.iter().enumerate() {
        check_register(reg)?;
        if let Some(q) = reg.iter().find(|&&q| q >= i && q <= j) {
            return Err(Error::OverlappingRegisters(*q));
        }
        for (other, _) in &phonons[..k] {
            check_disjoint(reg, other)?;
        }
        width = width.max(width_for(reg.iter().copied()));
    }
    let offset: f64 = phonons.iter().map(|(reg, th)| th * 2f64.powi(reg.len() as i32 - 1)).sum();

    let mut c = Circuit::new(width);
    let half_pi = std::f64::consts::FRAC_PI_2;
    for basis in [Basis::X, Basis::Y] {
        let enter = |q| match basis {
            Basis::X => Gate::Hadamard(q),
            Basis::Y => Gate::Rx(q, half_pi),
        };
        let leave = |q| match basis {
            Basis::X => Gate::Hadamard(q),
            Basis::Y => Gate::Rx(q, -half_pi),
        };
        c.push(enter(i))?;
        c.push(enter(j))?;
        for k in i..j {
            c.push(Gate::Cnot(k, k + 1))?;
        }
        c.push(Gate::Rz(j, theta0 - offset))?;
        for (reg, th) in phonons {
            for (r, &q) in reg.iter().enumerate() {
                let phi = th * 2f64.powi(r as i32);
                c.push(Gate::Cnot(q, j))?;
                c.push(Gate::Rz(j, -phi / 2.0))?;
                c.push(Gate::Cnot(q, j))?;
                c.push(Gate::Rz(j, phi / 2.0))?;
            }
        }
        for k in (i..j).rev() {
            c.push(Gate::Cnot(k, k + 1))?;
        }
        c.push(leave(i))?;
        c.push(leave(j))?;
    }
    Ok(c)
}

#[derive(Clone, Copy)]
enum Basis {
    X,
    Y,
}
