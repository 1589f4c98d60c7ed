//! Exact diagonalization of the single-electron Holstein model, in a
//! truncated Fock basis and on the phonon grid.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::grid::{p_squared_real, GridSpec};
use crate::lanczos::{default_start, lowest_eigenpair, Eigenpair, LanczosOptions};
use crate::model::HolsteinModel;
use crate::{Error, Result};

/// Largest total-occupation cutoff accepted.
pub const MAX_NCUT: usize = 80;

/// Cutoff increment used by the convergence check.
pub const CUTOFF_STEP: usize = 5;

/// Energy change below which the cutoff counts as converged.
pub const CUTOFF_TOL: f64 = 1e-10;

/// Single-electron Fock basis with `Σ n_i ≤ N_cut`.
///
/// States are grouped by electron site; within a site, phonon
/// configurations run in lexicographic order of `(n_0, n_1, …)`.
#[derive(Clone, Debug)]
pub struct FockBasis {
    n_sites: usize,
    n_cut: usize,
    configs: Vec<Vec<u16>>,
    lookup: HashMap<Vec<u16>, usize>,
}

impl FockBasis {
    pub fn new(n_sites: usize, n_cut: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidModel("basis needs at least one site".into()));
        }
        let mut configs = Vec::new();
        let mut cur = vec![0u16; n_sites];
        fn rec(pos: usize, left: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
            if pos == cur.len() {
                out.push(cur.clone());
                return;
            }
            for n in 0..=left {
                cur[pos] = n as u16;
                rec(pos + 1, left - n, cur, out);
            }
            cur[pos] = 0;
        }
        rec(0, n_cut, &mut cur, &mut configs);
        let lookup = configs.iter().enumerate().map(|(k, c)| (c.clone(), k)).collect();
        Ok(FockBasis { n_sites, n_cut, configs, lookup })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn n_configs(&self) -> usize {
        self.configs.len()
    }

    pub fn dim(&self) -> usize {
        self.n_sites * self.configs.len()
    }

    pub fn index(&self, site: usize, occupations: &[u16]) -> Option<usize> {
        if site >= self.n_sites {
            return None;
        }
        self.lookup.get(occupations).map(|k| site * self.configs.len() + k)
    }

    /// `(electron site, phonon occupations)` of basis state `k`.
    pub fn state(&self, k: usize) -> (usize, &[u16]) {
        let nc = self.configs.len();
        (k / nc, &self.configs[k % nc])
    }

    pub fn total_phonons(&self, k: usize) -> usize {
        self.state(k).1.iter().map(|&n| n as usize).sum()
    }
}

/// Sparse symmetric matrix in row-list form.
struct SparseRows {
    rows: Vec<Vec<(u32, f64)>>,
}

impl SparseRows {
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.par_iter_mut().zip(&self.rows).for_each(|(o, row)| {
            *o = row.iter().map(|&(c, a)| a * v[c as usize]).sum();
        });
    }
}

fn fock_hamiltonian(h: &HolsteinModel, basis: &FockBasis) -> SparseRows {
    let nc = basis.n_configs();
    let lam = h.g / (2.0 * h.omega).sqrt();
    let bonds = h.bonds();
    let rows = (0..basis.dim())
        .map(|k| {
            let (site, occ) = basis.state(k);
            let cfg = k % nc;
            let mut row = Vec::new();
            let total: usize = occ.iter().map(|&n| n as usize).sum();
            row.push((k as u32, h.omega * (total as f64 + 0.5 * h.n_sites as f64)));
            for &(i, j) in &bonds {
                let other = if site == i {
                    j
                } else if site == j {
                    i
                } else {
                    continue;
                };
                row.push(((other * nc + cfg) as u32, h.t));
            }
            if lam != 0.0 {
                let mut shifted = occ.to_vec();
                let n = occ[site] as usize;
                if total < basis.n_cut() {
                    shifted[site] = (n + 1) as u16;
                    let idx = basis.index(site, &shifted).expect("in basis");
                    row.push((idx as u32, lam * ((n + 1) as f64).sqrt()));
                }
                if n > 0 {
                    shifted[site] = (n - 1) as u16;
                    let idx = basis.index(site, &shifted).expect("in basis");
                    row.push((idx as u32, lam * (n as f64).sqrt()));
                }
            }
            row
        })
        .collect();
    SparseRows { rows }
}

/// Ground state of the one-electron sector at a fixed cutoff.
#[derive(Clone, Debug)]
pub struct FockGroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub basis: FockBasis,
    /// `Z(n)`, the weight on total phonon number `n = 0..=N_cut`.
    pub z: Vec<f64>,
}

pub fn holstein_ground_state(h: &HolsteinModel, n_cut: usize) -> Result<FockGroundState> {
    h.validate()?;
    if n_cut > MAX_NCUT + CUTOFF_STEP {
        return Err(Error::InvalidParameter(format!("N_cut = {n_cut} exceeds {MAX_NCUT}")));
    }
    let basis = FockBasis::new(h.n_sites, n_cut)?;
    let m = fock_hamiltonian(h, &basis);
    let dim = basis.dim();
    let opts = LanczosOptions { max_iter: 600.min(dim), tol: 1e-11 };
    let pair = lowest_eigenpair(dim, |v, out| m.apply(v, out), &default_start(dim), opts)?;
    let mut z = vec![0.0; n_cut + 1];
    for (k, a) in pair.vector.iter().enumerate() {
        z[basis.total_phonons(k)] += a * a;
    }
    Ok(FockGroundState { energy: pair.value, vector: pair.vector, basis, z })
}

#[derive(Clone, Debug)]
pub struct EdResult {
    pub ground: FockGroundState,
    /// `|E₀(N_cut + 5) − E₀(N_cut)|`.
    pub cutoff_change: f64,
    pub cutoff_converged: bool,
}

impl EdResult {
    pub fn energy(&self) -> f64 {
        self.ground.energy
    }

    pub fn z(&self) -> &[f64] {
        &self.ground.z
    }
}

/// Fock-basis ground state with a cutoff convergence check against
/// `N_cut + 5`.
pub fn holstein_ed(h: &HolsteinModel, n_cut: usize) -> Result<EdResult> {
    if n_cut > MAX_NCUT {
        return Err(Error::InvalidParameter(format!("N_cut = {n_cut} exceeds {MAX_NCUT}")));
    }
    let ground = holstein_ground_state(h, n_cut)?;
    let bigger = holstein_ground_state(h, n_cut + CUTOFF_STEP)?;
    let cutoff_change = (bigger.energy - ground.energy).abs();
    Ok(EdResult { ground, cutoff_change, cutoff_converged: cutoff_change < CUTOFF_TOL })
}

/// Largest grid-ED dimension accepted.
pub const MAX_GRID_DIM: usize = 1 << 22;

/// Ground energy of the one-electron sector with every phonon on the
/// `2^n_x`-point grid, using the same operators as the circuits.
pub fn grid_ed(h: &HolsteinModel, n_x: usize) -> Result<f64> {
    Ok(grid_ground_state(h, n_x)?.value)
}

/// Ground eigenpair behind [`grid_ed`]. Index `site·N_x^S + Σ_m x_m N_x^m`
/// (mode 0 fastest).
pub fn grid_ground_state(h: &HolsteinModel, n_x: usize) -> Result<Eigenpair> {
    h.validate()?;
    let grid = GridSpec::new(n_x)?;
    let np = grid.n_points();
    let n_ph_states = (np as u128).checked_pow(h.n_sites as u32).unwrap_or(u128::MAX);
    let dim128 = n_ph_states.saturating_mul(h.n_sites as u128);
    if dim128 > MAX_GRID_DIM as u128 {
        return Err(Error::ResourceCap { requested: dim128.min(usize::MAX as u128) as usize, cap: MAX_GRID_DIM });
    }
    let n_ph_states = n_ph_states as usize;
    let dim = dim128 as usize;
    let p2 = p_squared_real(&grid);
    let xs = grid.x_values();
    let w = h.omega;
    let coupling = h.g / w.sqrt();
    let bonds = h.bonds();
    let stride: Vec<usize> = (0..h.n_sites).map(|m| np.pow(m as u32)).collect();

    let diag: Vec<f64> = (0..dim)
        .map(|k| {
            let (site, ph) = (k / n_ph_states, k % n_ph_states);
            let mut d = 0.0;
            for (m, &s) in stride.iter().enumerate() {
                let x = xs[(ph / s) % np];
                d += 0.5 * w * x * x;
                if m == site {
                    d += coupling * x;
                }
            }
            d
        })
        .collect();

    let apply = |v: &[f64], out: &mut [f64]| {
        out.par_iter_mut().enumerate().for_each(|(k, o)| {
            let (site, ph) = (k / n_ph_states, k % n_ph_states);
            let mut acc = diag[k] * v[k];
            for &s in &stride {
                let xm = (ph / s) % np;
                let base = k - xm * s;
                for y in 0..np {
                    acc += 0.5 * w * p2[(xm, y)] * v[base + y * s];
                }
            }
            for &(i, j) in &bonds {
                let other = if site == i {
                    j
                } else if site == j {
                    i
                } else {
                    continue;
                };
                acc += h.t * v[other * n_ph_states + ph];
            }
            *o = acc;
        });
    };
    let opts = LanczosOptions { max_iter: 800.min(dim), tol: 1e-10 };
    lowest_eigenpair(dim, apply, &default_start(dim), opts)
}

/// One row of the committed ED reference table.
#[derive(Clone, Debug, PartialEq)]
pub struct GoldenRow {
    pub alpha: f64,
    pub e0: f64,
    pub z: Vec<f64>,
}

/// Writes `alpha,E0,Z0,Z1,…` rows behind `#` comment lines.
pub fn format_golden(comments: &[String], rows: &[GoldenRow]) -> String {
    let mut s = String::new();
    for c in comments {
        let _ = writeln!(s, "# {c}");
    }
    let width = rows.iter().map(|r| r.z.len()).max().unwrap_or(0);
    let mut header = vec!["alpha".to_string(), "E0".to_string()];
    header.extend((0..width).map(|n| format!("Z{n}")));
    let _ = writeln!(s, "{}", header.join(","));
    for r in rows {
        let mut cols = vec![format!("{}", r.alpha), format!("{:.15e}", r.e0)];
        cols.extend((0..width).map(|n| format!("{:.15e}", r.z.get(n).copied().unwrap_or(0.0))));
        let _ = writeln!(s, "{}", cols.join(","));
    }
    s
}

pub fn parse_golden(text: &str) -> Result<Vec<GoldenRow>> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            seen_header = true;
            if line.starts_with("alpha") {
                continue;
            }
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: idx + 1, msg: e.to_string() })?;
        if vals.len() < 2 {
            return Err(Error::Parse { line: idx + 1, msg: "expected alpha,E0,Z…".into() });
        }
        rows.push(GoldenRow { alpha: vals[0], e0: vals[1], z: vals[2..].to_vec() });
    }
    Ok(rows)
}

/// Total-variation distance `½ Σ |p_n − q_n|`, padding the shorter input
/// with zeros.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n).map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}
