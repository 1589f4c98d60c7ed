use crate::grid::GridSpec;
use crate::model::{EpModel, QubitLayout};
use crate::{Error, Result};

use super::{ep_density_coupling, hopping_with_phonons, phase_p2, phase_x2, phase_xx, Circuit};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TrotterOrder {
    First,
    #[default]
    Second,
}

impl TryFrom<u8> for TrotterOrder {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(TrotterOrder::First),
            2 => Ok(TrotterOrder::Second),
            _ => Err(Error::InvalidParameter(format!("Trotter order {v} (expected 1 or 2)"))),
        }
    }
}

impl From<TrotterOrder> for u8 {
    fn from(o: TrotterOrder) -> u8 {
        match o {
            TrotterOrder::First => 1,
            TrotterOrder::Second => 2,
        }
    }
}

/// One exponentiable piece of the Hamiltonian.
#[derive(Clone, Debug)]
enum Term {
    Kinetic { mode: usize },
    Potential { mode: usize },
    PhononPair { n: usize, m: usize, k: f64 },
    Density { orbital: usize, mode: usize, g: f64 },
    Hopping { i: usize, j: usize, t: f64, phonons: Vec<(usize, f64)> },
}

/// Integer-unit angles per unit time for the grid terms of a model.
///
/// With `Δ` the grid spacing, a mode of frequency `ω` stores `X = X̃/√ω`,
/// `P = √ω P̃`, and `X̃ = Δ(x − N_x/2)`.
#[derive(Clone, Copy, Debug)]
pub struct TermAngles {
    pub delta: f64,
}

impl TermAngles {
    pub fn new(n_x: usize) -> Result<Self> {
        Ok(TermAngles { delta: GridSpec::new(n_x)?.delta() })
    }

    /// `ω P̃²/2` and `ω X̃²/2` share this coefficient.
    pub fn quadratic(&self, omega: f64) -> f64 {
        0.5 * omega * self.delta * self.delta
    }

    pub fn linear(&self, g: f64, omega: f64) -> f64 {
        g * self.delta / omega.sqrt()
    }

    pub fn bilinear(&self, k: f64, omega_n: f64, omega_m: f64) -> f64 {
        k * self.delta * self.delta / (omega_n * omega_m).sqrt()
    }
}

/// Bond `(i < j)`, hopping amplitude, and `(mode, g)` couplings on the bond.
type Hop = ((usize, usize), f64, Vec<(usize, f64)>);

/// Terms in the fixed order: kinetic, potential, phonon-phonon, density
/// couplings, hoppings (with any off-diagonal couplings folded in, grouped
/// into layers of disjoint Jordan-Wigner spans). Also returns the size of
/// the last hopping layer, whose terms commute with each other.
fn model_terms(model: &EpModel) -> (Vec<Term>, usize) {
    let mut terms = Vec::new();
    for mode in 0..model.n_modes() {
        terms.push(Term::Kinetic { mode });
    }
    for mode in 0..model.n_modes() {
        terms.push(Term::Potential { mode });
    }
    for c in model.phonon_couplings() {
        terms.push(Term::PhononPair { n: c.n, m: c.m, k: c.k });
    }
    for c in model.density_couplings().iter().filter(|c| c.i == c.j) {
        terms.push(Term::Density { orbital: c.i, mode: c.mode, g: c.g });
    }
    let key = |i: usize, j: usize| (i.min(j), i.max(j));
    let mut hops: Vec<Hop> = Vec::new();
    for h in model.hoppings() {
        let k = key(h.i, h.j);
        match hops.iter_mut().find(|e| e.0 == k) {
            Some(e) => e.1 += h.t,
            None => hops.push((k, h.t, Vec::new())),
        }
    }
    for c in model.density_couplings().iter().filter(|c| c.i != c.j) {
        let k = key(c.i, c.j);
        let entry = match hops.iter().position(|e| e.0 == k) {
            Some(p) => &mut hops[p],
            None => {
                hops.push((k, 0.0, Vec::new()));
                hops.last_mut().unwrap()
            }
        };
        entry.2.push((c.mode, c.g));
    }
    // Greedy layering: a hop joins the first layer where its Jordan-Wigner
    // span [i, j] is disjoint from every hop already there, so nearest-
    // neighbour chains split into even and odd bonds.
    let mut layers: Vec<Vec<Hop>> = Vec::new();
    for hop in hops {
        let (lo, hi) = hop.0;
        match layers.iter_mut().find(|l| l.iter().all(|h| h.0 .1 < lo || hi < h.0 .0)) {
            Some(l) => l.push(hop),
            None => layers.push(vec![hop]),
        }
    }
    let last = layers.last().map_or(1, Vec::len);
    for ((i, j), t, phonons) in layers.into_iter().flatten() {
        terms.push(Term::Hopping { i, j, t, phonons });
    }
    (terms, last)
}

fn term_circuit(term: &Term, model: &EpModel, layout: &QubitLayout, angles: &TermAngles, tau: f64) -> Result<Circuit> {
    let reg = |mode: usize| -> Vec<usize> { layout.phonon(mode).collect() };
    let omega = |mode: usize| model.modes()[mode].omega;
    match term {
        Term::Kinetic { mode } => phase_p2(&reg(*mode), tau * angles.quadratic(omega(*mode))),
        Term::Potential { mode } => phase_x2(&reg(*mode), tau * angles.quadratic(omega(*mode))),
        Term::PhononPair { n, m, k } => phase_xx(&reg(*n), &reg(*m), tau * angles.bilinear(*k, omega(*n), omega(*m))),
        Term::Density { orbital, mode, g } => {
            ep_density_coupling(layout.electron(*orbital), &reg(*mode), tau * angles.linear(*g, omega(*mode)))
        }
        Term::Hopping { i, j, t, phonons } => {
            let regs: Vec<(Vec<usize>, f64)> =
                phonons.iter().map(|&(mode, g)| (reg(mode), tau * angles.linear(g, omega(mode)))).collect();
            let refs: Vec<(&[usize], f64)> = regs.iter().map(|(r, th)| (r.as_slice(), *th)).collect();
            hopping_with_phonons(layout.electron(*i), layout.electron(*j), tau * t, &refs)
        }
    }
}

struct Plan<'a> {
    model: &'a EpModel,
    layout: &'a QubitLayout,
    angles: TermAngles,
    terms: Vec<Term>,
    centre: usize,
}

impl<'a> Plan<'a> {
    fn new(model: &'a EpModel, layout: &'a QubitLayout) -> Result<Self> {
        layout.check_model(model)?;
        let (terms, centre) = model_terms(model);
        Ok(Plan { model, layout, angles: TermAngles::new(model.n_x())?, terms, centre })
    }

    fn emit(&self, out: &mut Circuit, terms: &[Term], tau: f64) -> Result<()> {
        for t in terms {
            out.append(&term_circuit(t, self.model, self.layout, &self.angles, tau)?);
        }
        Ok(())
    }

    fn emit_rev(&self, out: &mut Circuit, terms: &[Term], tau: f64) -> Result<()> {
        for t in terms.iter().rev() {
            out.append(&term_circuit(t, self.model, self.layout, &self.angles, tau)?);
        }
        Ok(())
    }

    /// Symmetric core `t_1/2 … t_k/2 C t_k/2 … t_1/2`, where the centre `C`
    /// is the trailing block of `centre` mutually commuting terms at full step.
    fn emit_symmetric(&self, out: &mut Circuit, terms: &[Term], centre: usize, dt: f64) -> Result<()> {
        let (init, mid) = terms.split_at(terms.len() - centre.min(terms.len()));
        self.emit(out, init, dt / 2.0)?;
        self.emit(out, mid, dt)?;
        self.emit_rev(out, init, dt / 2.0)?;
        Ok(())
    }
}

/// One Trotter step of `exp(−iH dt)`.
///
/// First order emits every term once in the fixed order. Second order
/// emits the symmetric sequence with half steps on all but the last term.
pub fn trotter_step(model: &EpModel, layout: &QubitLayout, dt: f64, order: TrotterOrder) -> Result<Circuit> {
    let plan = Plan::new(model, layout)?;
    let mut c = Circuit::new(layout.n_qubits());
    match order {
        TrotterOrder::First => plan.emit(&mut c, &plan.terms, dt)?,
        TrotterOrder::Second => plan.emit_symmetric(&mut c, &plan.terms, plan.centre, dt)?,
    }
    Ok(c)
}

/// `steps` Trotter steps of size `time/steps`.
///
/// For second order, the leading kinetic half steps of consecutive steps
/// commute and are merged into one full step, so the result equals
/// `trotter_step` repeated `steps` times while emitting fewer Fourier
/// transforms.
pub fn trotter_evolution(
    model: &EpModel,
    layout: &QubitLayout,
    time: f64,
    steps: usize,
    order: TrotterOrder,
) -> Result<Circuit> {
    if steps == 0 {
        return Err(Error::InvalidParameter("zero Trotter steps".into()));
    }
    let dt = time / steps as f64;
    let plan = Plan::new(model, layout)?;
    let mut c = Circuit::new(layout.n_qubits());
    match order {
        TrotterOrder::First => {
            let step = trotter_step(model, layout, dt, order)?;
            for _ in 0..steps {
                c.append(&step);
            }
        }
        TrotterOrder::Second => {
            let lead = plan.terms.iter().take_while(|t| matches!(t, Term::Kinetic { .. })).count();
            if lead == 0 || lead == plan.terms.len() {
                let step = trotter_step(model, layout, dt, order)?;
                for _ in 0..steps {
                    c.append(&step);
                }
                return Ok(c);
            }
            let (outer, inner) = plan.terms.split_at(lead);
            let mut core = Circuit::new(layout.n_qubits());
            plan.emit_symmetric(&mut core, inner, plan.centre, dt)?;
            let mut full = Circuit::new(layout.n_qubits());
            plan.emit(&mut full, outer, dt)?;
            plan.emit(&mut c, outer, dt / 2.0)?;
            for s in 0..steps {
                c.append(&core);
                if s + 1 < steps {
                    c.append(&full);
                }
            }
            plan.emit(&mut c, outer, dt / 2.0)?;
        }
    }
    Ok(c)
}
