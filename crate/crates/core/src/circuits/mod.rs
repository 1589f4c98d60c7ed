//! Gate-level circuit IR, builders for every Trotter term, and resource
//! counting.
//!
//! A [`Circuit`] is an ordered gate list plus a classically tracked global
//! phase `φ`: the unitary it stands for is `e^{iφ}` times the product of its
//! gates. Builders take dimensionless angles in register-integer units;
//! callers fold in `Δ`, `Δ²`, coefficients and the time step.

mod terms;
mod trotter;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::statevector::{Gate, StateVector};
use crate::{Error, Result};

pub use terms::{
    ep_density_coupling, hopping_with_phonons, jw_hopping, phase_p2, phase_x2, phase_xx, qft_circuit, FourierDirection,
};
pub use trotter::{trotter_evolution, trotter_step, TermAngles, TrotterOrder};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    global_phase: f64,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new(), global_phase: 0.0 }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    /// Appends a gate. `GlobalPhase` gates fold into the tracked phase.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.n_qubits)?;
        if let Gate::GlobalPhase(t) = gate {
            self.add_phase(t);
        } else {
            self.gates.push(gate);
        }
        Ok(())
    }

    pub fn add_phase(&mut self, theta: f64) {
        self.global_phase += theta;
    }

    /// Appends another circuit, widening this one if needed.
    pub fn append(&mut self, other: &Circuit) {
        self.n_qubits = self.n_qubits.max(other.n_qubits);
        self.gates.extend_from_slice(&other.gates);
        self.global_phase += other.global_phase;
    }

    pub fn widened(mut self, n_qubits: usize) -> Self {
        self.n_qubits = self.n_qubits.max(n_qubits);
        self
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            global_phase: -self.global_phase,
        }
    }

    pub fn repeated(&self, times: usize) -> Circuit {
        let mut c = Circuit::new(self.n_qubits);
        for _ in 0..times {
            c.append(self);
        }
        c
    }

    /// Dense matrix of the gate product, without the tracked phase.
    /// Intended for brute-force checks on at most 12 qubits.
    pub fn unitary(&self) -> DMatrix<Complex64> {
        assert!(self.n_qubits <= 12, "dense unitary of {} qubits", self.n_qubits);
        let dim = 1 << self.n_qubits;
        let mut u = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = StateVector::basis(self.n_qubits, col).expect("small register");
            s.apply_circuit(self).expect("width checked");
            for (row, a) in s.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        u
    }

    /// Dense matrix including `e^{iφ}`.
    pub fn unitary_with_phase(&self) -> DMatrix<Complex64> {
        self.unitary() * Complex64::from_polar(1.0, self.global_phase)
    }

    pub fn resource_count(&self) -> ResourceCount {
        resource_count(self)
    }

    pub fn compile(&self) -> CompiledCircuit {
        CompiledCircuit::new(self)
    }

    /// Text export: a header, then one `GATE q[,q2] [angle]` line per gate.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "qubits {}", self.n_qubits);
        let _ = writeln!(s, "phase {}", self.global_phase);
        for g in &self.gates {
            let qs: Vec<String> = g.qubits().iter().map(|q| q.to_string()).collect();
            match g.angle() {
                Some(a) => {
                    let _ = writeln!(s, "{} {} {}", g.name(), qs.join(","), a);
                }
                None => {
                    let _ = writeln!(s, "{} {}", g.name(), qs.join(","));
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        let mut phase = 0.0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or_default();
            let args: Vec<&str> = parts.collect();
            match head {
                "qubits" => {
                    let n = args.first().and_then(|a| a.parse().ok()).ok_or_else(|| err("bad qubit count".into()))?;
                    circuit = Some(Circuit::new(n));
                    continue;
                }
                "phase" => {
                    phase = args.first().and_then(|a| a.parse().ok()).ok_or_else(|| err("bad phase".into()))?;
                    continue;
                }
                _ => {}
            }
            let c = circuit.as_mut().ok_or_else(|| err("gate before 'qubits' header".into()))?;
            let qs: Vec<usize> = match args.first() {
                Some(q) => q
                    .split(',')
                    .map(|v| v.parse::<usize>().map_err(|_| err(format!("bad qubit '{v}'"))))
                    .collect::<Result<_>>()?,
                None => Vec::new(),
            };
            let angle = || -> Result<f64> {
                args.get(1).and_then(|a| a.parse().ok()).ok_or_else(|| err(format!("{head} needs an angle")))
            };
            let q = |k: usize| -> Result<usize> {
                qs.get(k).copied().ok_or_else(|| err(format!("{head} needs {} qubit(s)", k + 1)))
            };
            let gate = match head {
                "P" => Gate::PhaseShift(q(0)?, angle()?),
                "CP" => Gate::ControlledPhase(q(0)?, q(1)?, angle()?),
                "RX" => Gate::Rx(q(0)?, angle()?),
                "RY" => Gate::Ry(q(0)?, angle()?),
                "RZ" => Gate::Rz(q(0)?, angle()?),
                "H" => Gate::Hadamard(q(0)?),
                "X" => Gate::PauliX(q(0)?),
                "Y" => Gate::PauliY(q(0)?),
                "Z" => Gate::PauliZ(q(0)?),
                "CNOT" => Gate::Cnot(q(0)?, q(1)?),
                "SWAP" => Gate::Swap(q(0)?, q(1)?),
                other => return Err(err(format!("unknown gate '{other}'"))),
            };
            c.push(gate).map_err(|e| err(e.to_string()))?;
        }
        let mut c = circuit.ok_or(Error::Parse { line: 0, msg: "missing 'qubits' header".into() })?;
        c.global_phase = phase;
        Ok(c)
    }
}

/// Gate statistics with greedy layering: each gate starts as soon as all
/// of its qubits are free.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResourceCount {
    pub counts: BTreeMap<&'static str, usize>,
    pub total: usize,
    pub two_qubit: usize,
    pub depth: usize,
}

impl ResourceCount {
    pub fn count(&self, name: &str) -> usize {
        self.counts.get(name).copied().unwrap_or(0)
    }
}

pub fn resource_count(circuit: &Circuit) -> ResourceCount {
    let mut rc = ResourceCount::default();
    let mut level = vec![0usize; circuit.n_qubits()];
    for g in circuit.gates() {
        *rc.counts.entry(g.name()).or_insert(0) += 1;
        rc.total += 1;
        let qs = g.qubits();
        if qs.len() == 2 {
            rc.two_qubit += 1;
        }
        let start = qs.iter().map(|&q| level[q]).max().unwrap_or(0);
        for &q in &qs {
            level[q] = start + 1;
        }
        rc.depth = rc.depth.max(start + 1);
    }
    rc
}

enum Op {
    Gate(Gate),
    Diagonal(Vec<Complex64>),
}

/// Execution plan for repeated application: runs of diagonal gates are
/// fused into a single phase table over the full register.
pub struct CompiledCircuit {
    n_qubits: usize,
    ops: Vec<Op>,
    global_phase: f64,
}

/// Shortest diagonal run worth a full-register table.
const MIN_FUSED_RUN: usize = 3;

impl CompiledCircuit {
    pub fn new(circuit: &Circuit) -> Self {
        let n = circuit.n_qubits();
        let gates = circuit.gates();
        let mut ops = Vec::new();
        let mut k = 0;
        while k < gates.len() {
            let mut end = k;
            while end < gates.len() && gates[end].is_diagonal() {
                end += 1;
            }
            if end - k >= MIN_FUSED_RUN {
                ops.push(Op::Diagonal(diagonal_table(n, &gates[k..end])));
                k = end;
            } else {
                ops.push(Op::Gate(gates[k]));
                k += 1;
            }
        }
        CompiledCircuit { n_qubits: n, ops, global_phase: circuit.global_phase() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    /// Applies the gates (not the tracked phase) to a state whose low
    /// qubits carry the circuit.
    pub fn apply(&self, state: &mut StateVector) {
        assert!(state.n_qubits() >= self.n_qubits, "state narrower than circuit");
        for op in &self.ops {
            match op {
                Op::Gate(g) => state.apply_unchecked(g),
                Op::Diagonal(table) => {
                    let len = table.len();
                    for chunk in state.amplitudes_mut().chunks_mut(len) {
                        for (a, p) in chunk.iter_mut().zip(table) {
                            *a *= p;
                        }
                    }
                }
            }
        }
    }
}

fn diagonal_table(n_qubits: usize, gates: &[Gate]) -> Vec<Complex64> {
    let dim = 1usize << n_qubits;
    let mut phase = vec![0.0f64; dim];
    for g in gates {
        match *g {
            Gate::PhaseShift(q, t) => add_where(&mut phase, 1 << q, t),
            Gate::PauliZ(q) => add_where(&mut phase, 1 << q, std::f64::consts::PI),
            Gate::ControlledPhase(c, q, t) => add_where(&mut phase, (1 << c) | (1 << q), t),
            Gate::Rz(q, t) => {
                for (i, p) in phase.iter_mut().enumerate() {
                    *p += if i >> q & 1 == 1 { t / 2.0 } else { -t / 2.0 };
                }
            }
            Gate::GlobalPhase(_) => {}
            _ => unreachable!("non-diagonal gate in a diagonal run"),
        }
    }
    phase.into_iter().map(|p| Complex64::from_polar(1.0, p)).collect()
}

fn add_where(phase: &mut [f64], mask: usize, t: f64) {
    for (i, p) in phase.iter_mut().enumerate() {
        if i & mask == mask {
            *p += t;
        }
    }
}
