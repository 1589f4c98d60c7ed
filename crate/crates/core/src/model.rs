//! Lattice electron-phonon Hamiltonians and their qubit layout.
//!
//! All quantities are stored in rescaled units: every oscillator has unit
//! mass, so a mode of frequency `ω` contributes `P²/2 + ω²X²/2`. Each
//! hopping or off-diagonal coupling entry stands for the symmetrized pair
//! `c†_i c_j + c†_j c_i`. A density coupling with `i == j` stands for the
//! single term `c†_i c_i X_n`.

use std::fmt::Write as _;
use std::ops::Range;

use crate::{Error, Result};

/// Largest phonon register supported by the grid code.
pub const MAX_NX: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hopping {
    pub i: usize,
    pub j: usize,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub site: usize,
    pub omega: f64,
}

/// `g (c†_i c_j + c†_j c_i) X_mode`, or `g c†_i c_i X_mode` when `i == j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityCoupling {
    pub i: usize,
    pub j: usize,
    pub mode: usize,
    pub g: f64,
}

/// `k X_n X_m` between two distinct modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhononCoupling {
    pub n: usize,
    pub m: usize,
    pub k: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidParameter(format!("unknown boundary '{other}'"))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

/// General electron-phonon model: `H = H_e + H_p + H_ep` without the
/// four-fermion term.
#[derive(Clone, Debug, PartialEq)]
pub struct EpModel {
    n_sites: usize,
    n_x: usize,
    hoppings: Vec<Hopping>,
    modes: Vec<Mode>,
    density_couplings: Vec<DensityCoupling>,
    phonon_couplings: Vec<PhononCoupling>,
}

impl EpModel {
    pub fn builder(n_sites: usize, n_x: usize) -> EpModelBuilder {
        EpModelBuilder {
            model: EpModel {
                n_sites,
                n_x,
                hoppings: Vec::new(),
                modes: Vec::new(),
                density_couplings: Vec::new(),
                phonon_couplings: Vec::new(),
            },
        }
    }

    /// Number of electron orbitals (one per site).
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Qubits per phonon register.
    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn hoppings(&self) -> &[Hopping] {
        &self.hoppings
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn density_couplings(&self) -> &[DensityCoupling] {
        &self.density_couplings
    }

    pub fn phonon_couplings(&self) -> &[PhononCoupling] {
        &self.phonon_couplings
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Canonical layout with no ancillas.
    pub fn layout(&self) -> QubitLayout {
        QubitLayout::new(self.n_sites, self.modes.len(), self.n_x, 0)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if self.n_sites == 0 {
            return bad("model needs at least one site".into());
        }
        if self.n_x == 0 || self.n_x > MAX_NX {
            return bad(format!("n_x = {} outside 1..={MAX_NX}", self.n_x));
        }
        for h in &self.hoppings {
            if h.i >= self.n_sites || h.j >= self.n_sites {
                return bad(format!("hopping ({}, {}) references a missing orbital", h.i, h.j));
            }
            if h.i == h.j {
                return bad(format!("hopping ({0}, {0}) is on-site", h.i));
            }
            if !h.t.is_finite() {
                return bad("non-finite hopping".into());
            }
        }
        for m in &self.modes {
            if m.site >= self.n_sites {
                return bad(format!("mode on missing site {}", m.site));
            }
            if !(m.omega > 0.0) || !m.omega.is_finite() {
                return bad(format!("mode frequency {} must be positive", m.omega));
            }
        }
        for c in &self.density_couplings {
            if c.i >= self.n_sites || c.j >= self.n_sites {
                return bad(format!("coupling ({}, {}) references a missing orbital", c.i, c.j));
            }
            if c.mode >= self.modes.len() {
                return bad(format!("coupling references missing mode {}", c.mode));
            }
            if !c.g.is_finite() {
                return bad("non-finite coupling".into());
            }
        }
        for c in &self.phonon_couplings {
            if c.n >= self.modes.len() || c.m >= self.modes.len() {
                return bad(format!("phonon coupling ({}, {}) references a missing mode", c.n, c.m));
            }
            if c.n == c.m {
                return bad(format!("phonon coupling ({0}, {0}) needs distinct modes", c.n));
            }
            if !c.k.is_finite() {
                return bad("non-finite phonon coupling".into());
            }
        }
        Ok(())
    }
}

pub struct EpModelBuilder {
    model: EpModel,
}

impl EpModelBuilder {
    pub fn hopping(mut self, i: usize, j: usize, t: f64) -> Self {
        self.model.hoppings.push(Hopping { i, j, t });
        self
    }

    pub fn mode(mut self, site: usize, omega: f64) -> Self {
        self.model.modes.push(Mode { site, omega });
        self
    }

    pub fn density_coupling(mut self, i: usize, j: usize, mode: usize, g: f64) -> Self {
        self.model.density_couplings.push(DensityCoupling { i, j, mode, g });
        self
    }

    pub fn phonon_coupling(mut self, n: usize, m: usize, k: f64) -> Self {
        self.model.phonon_couplings.push(PhononCoupling { n, m, k });
        self
    }

    pub fn build(self) -> Result<EpModel> {
        self.model.validate()?;
        Ok(self.model)
    }
}

/// Holstein model: `H = t Σ_<ij> (c†_i c_j + h.c.) + g Σ_i n_i X_i + Σ_i (P_i²/2 + ω²X_i²/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolsteinModel {
    pub n_sites: usize,
    pub t: f64,
    pub omega: f64,
    pub g: f64,
    pub n_x: usize,
    pub boundary: Boundary,
}

impl HolsteinModel {
    pub fn new(n_sites: usize, t: f64, omega: f64, g: f64, n_x: usize) -> Result<Self> {
        let h = HolsteinModel { n_sites, t, omega, g, n_x, boundary: Boundary::Open };
        h.validate()?;
        Ok(h)
    }

    /// Model with `g` chosen so that `g²/(2ω²t) = alpha`.
    pub fn from_alpha(n_sites: usize, t: f64, omega: f64, alpha: f64, n_x: usize) -> Result<Self> {
        if !(t > 0.0) || !(omega > 0.0) {
            return Err(Error::InvalidParameter("alpha parametrization needs t > 0 and omega > 0".into()));
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be non-negative")));
        }
        Self::new(n_sites, t, omega, omega * (2.0 * alpha * t).sqrt(), n_x)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidModel("model needs at least one site".into()));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidModel(format!("omega = {} must be positive", self.omega)));
        }
        if !self.t.is_finite() || !self.g.is_finite() {
            return Err(Error::InvalidModel("non-finite t or g".into()));
        }
        if self.n_x == 0 || self.n_x > MAX_NX {
            return Err(Error::InvalidModel(format!("n_x = {} outside 1..={MAX_NX}", self.n_x)));
        }
        Ok(())
    }

    /// Dimensionless coupling `α = g²/(2ω²t)`.
    pub fn alpha(&self) -> Result<f64> {
        coupling_alpha(self)
    }

    /// Nearest-neighbour bonds. The wrap-around bond is only added for
    /// periodic chains of three or more sites.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds: Vec<_> = (0..self.n_sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && self.n_sites > 2 {
            bonds.push((0, self.n_sites - 1));
        }
        bonds
    }

    pub fn to_ep(&self) -> EpModel {
        holstein_to_ep(self)
    }

    pub fn layout(&self) -> QubitLayout {
        QubitLayout::new(self.n_sites, self.n_sites, self.n_x, 0)
    }

    /// Parses the key/value model file format.
    ///
    /// ```text
    /// # 2-site polaron
    /// sites = 2
    /// t = 1.0
    /// omega = 1.0
    /// g = 1.4142135623730951   # or: alpha = 1.0
    /// n_x = 6
    /// boundary = open
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let kv = parse_key_values(text)?;
        let mut sites = None;
        let mut t = 1.0;
        let mut omega = 1.0;
        let mut g = None;
        let mut alpha = None;
        let mut n_x = 6;
        let mut boundary = Boundary::Open;
        for (line, key, value) in kv {
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad number '{v}'") })
            };
            let int = |v: &str| -> Result<usize> {
                v.parse::<usize>().map_err(|_| Error::Parse { line, msg: format!("bad integer '{v}'") })
            };
            match key.as_str() {
                "sites" => sites = Some(int(&value)?),
                "t" => t = num(&value)?,
                "omega" => omega = num(&value)?,
                "g" => g = Some(num(&value)?),
                "alpha" => alpha = Some(num(&value)?),
                "n_x" => n_x = int(&value)?,
                "boundary" => boundary = value.parse().map_err(|e: Error| Error::Parse { line, msg: e.to_string() })?,
                other => return Err(Error::Parse { line, msg: format!("unknown key '{other}'") }),
            }
        }
        let sites = sites.ok_or(Error::Parse { line: 0, msg: "missing 'sites'".into() })?;
        let model = match (g, alpha) {
            (Some(_), Some(_)) => {
                return Err(Error::Parse { line: 0, msg: "give either 'g' or 'alpha', not both".into() })
            }
            (Some(g), None) => HolsteinModel::new(sites, t, omega, g, n_x)?,
            (None, Some(a)) => HolsteinModel::from_alpha(sites, t, omega, a, n_x)?,
            (None, None) => HolsteinModel::new(sites, t, omega, 0.0, n_x)?,
        };
        Ok(model.with_boundary(boundary))
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "sites = {}", self.n_sites);
        let _ = writeln!(s, "t = {}", self.t);
        let _ = writeln!(s, "omega = {}", self.omega);
        let _ = writeln!(s, "g = {}", self.g);
        let _ = writeln!(s, "n_x = {}", self.n_x);
        let _ = writeln!(s, "boundary = {}", self.boundary);
        s
    }
}

/// Splits `key = value` lines, dropping `#` comments and blank lines.
pub(crate) fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or(Error::Parse { line: idx + 1, msg: format!("expected 'key = value', got '{line}'") })?;
        out.push((idx + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn holstein_to_ep(h: &HolsteinModel) -> EpModel {
    let mut b = EpModel::builder(h.n_sites, h.n_x);
    for (i, j) in h.bonds() {
        b = b.hopping(i, j, h.t);
    }
    for site in 0..h.n_sites {
        b = b.mode(site, h.omega);
    }
    if h.g != 0.0 {
        for site in 0..h.n_sites {
            b = b.density_coupling(site, site, site, h.g);
        }
    }
    b.build().expect("a valid Holstein model maps to a valid EP model")
}

pub fn coupling_alpha(h: &HolsteinModel) -> Result<f64> {
    if !(h.t > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha needs t > 0, got {}", h.t)));
    }
    if !(h.omega > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha needs omega > 0, got {}", h.omega)));
    }
    Ok(h.g * h.g / (2.0 * h.omega * h.omega * h.t))
}

/// Qubit assignment: electron orbitals first (Jordan-Wigner order), then
/// one contiguous `n_x`-qubit register per phonon mode, then ancillas.
/// Qubit `q` is bit `q` of a basis-state index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitLayout {
    n_orbitals: usize,
    n_modes: usize,
    n_x: usize,
    n_ancilla: usize,
}

impl QubitLayout {
    pub fn new(n_orbitals: usize, n_modes: usize, n_x: usize, n_ancilla: usize) -> Self {
        QubitLayout { n_orbitals, n_modes, n_x, n_ancilla }
    }

    pub fn with_ancillas(&self, n_ancilla: usize) -> Self {
        QubitLayout { n_ancilla, ..self.clone() }
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_ancilla
    }

    pub fn electron(&self, orbital: usize) -> usize {
        assert!(orbital < self.n_orbitals, "orbital {orbital} out of range");
        orbital
    }

    pub fn electrons(&self) -> Range<usize> {
        0..self.n_orbitals
    }

    pub fn phonon(&self, mode: usize) -> Range<usize> {
        assert!(mode < self.n_modes, "mode {mode} out of range");
        let start = self.n_orbitals + mode * self.n_x;
        start..start + self.n_x
    }

    pub fn phonons(&self) -> Range<usize> {
        self.n_orbitals..self.n_orbitals + self.n_modes * self.n_x
    }

    pub fn ancillas(&self) -> Range<usize> {
        let start = self.n_system();
        start..start + self.n_ancilla
    }

    /// Electron and phonon qubits.
    pub fn n_system(&self) -> usize {
        self.n_orbitals + self.n_modes * self.n_x
    }

    pub fn n_qubits(&self) -> usize {
        self.n_system() + self.n_ancilla
    }

    /// Whether a layout is consistent with a model.
    pub fn check_model(&self, model: &EpModel) -> Result<()> {
        if self.n_orbitals != model.n_sites() || self.n_modes != model.n_modes() || self.n_x != model.n_x() {
            return Err(Error::LayoutMismatch(format!(
                "layout ({} orbitals, {} modes, n_x={}) vs model ({} orbitals, {} modes, n_x={})",
                self.n_orbitals,
                self.n_modes,
                self.n_x,
                model.n_sites(),
                model.n_modes(),
                model.n_x()
            )));
        }
        Ok(())
    }
}
