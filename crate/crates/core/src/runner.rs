//! Experiment drivers behind the `phonon-qsim` binary. Every driver returns
//! a [`Csv`] whose comment header names the tool version and the full
//! configuration; bodies depend only on the configuration.

use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::circuits::{resource_count, trotter_evolution, trotter_step, TrotterOrder};
use crate::ed::{format_golden, holstein_ed, total_variation, GoldenRow};
use crate::grid::{epsilon_bound, error_law_fit, truncation_report, ErrorLawFit, GridSpec};
use crate::model::{EpModel, HolsteinModel};
use crate::qpe::{ground_state_qpe, phonon_distribution, phonon_qpe_config, GroundSchedule};
use crate::stateprep::{assemble_input, optimize_gaussian, FitStatus, GaussianFit, OptimizeOptions, VariationalParams};
use crate::statevector::DEFAULT_MAX_QUBITS;
use crate::{Error, Result};

pub const TOOL: &str = concat!("phonon-qsim ", env!("CARGO_PKG_VERSION"));

/// Process exit code for an error: 2 configuration, 3 convergence,
/// 4 resource cap, 1 anything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidModel(_)
        | Error::InvalidParameter(_)
        | Error::LayoutMismatch(_)
        | Error::Parse { .. }
        | Error::QubitOutOfRange { .. }
        | Error::DuplicateQubit(_)
        | Error::OverlappingRegisters(_) => 2,
        Error::NotConverged(_) | Error::NoDominantPeak(_) | Error::WindowViolation(_) => 3,
        Error::ResourceCap { .. } => 4,
        Error::Io(_) => 1,
    }
}

/// Comment header, column names, and rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Csv {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Comment lines written after the rows (fits and summaries).
    pub trailer: Vec<String>,
}

impl Csv {
    pub fn new(command: &str, config: Vec<String>, columns: &[&str]) -> Self {
        let mut comments = vec![TOOL.to_string(), format!("command = {command}")];
        comments.extend(config);
        Csv { comments, columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Rows without the comment lines.
    pub fn body(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

impl fmt::Display for Csv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.comments {
            writeln!(f, "# {c}")?;
        }
        f.write_str(&self.body())?;
        for c in &self.trailer {
            writeln!(f, "# {c}")?;
        }
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

fn list<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

// ---------------------------------------------------------------------------
// truncation study

#[derive(Clone, Debug)]
pub struct TruncationConfig {
    pub n_x: Vec<usize>,
    /// Accuracies at which the error law is fitted; empty skips the fit.
    pub fit_eps: Vec<f64>,
    pub fit_sizes: Vec<usize>,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig { n_x: vec![6, 7], fit_eps: vec![1e-3, 1e-7], fit_sizes: (4..=16).map(|k| 16 * k).collect() }
    }
}

/// Per-level spectrum and residuals for each register width, plus fitted
/// error-law slopes in the trailer.
pub fn truncation_study(cfg: &TruncationConfig) -> Result<(Csv, Vec<ErrorLawFit>)> {
    if cfg.n_x.is_empty() {
        return Err(Error::InvalidParameter("empty n_x list".into()));
    }
    let config = vec![
        format!("n_x = {}", list(&cfg.n_x)),
        format!("fit_eps = {}", list(&cfg.fit_eps)),
        format!("fit_sizes = {}", list(&cfg.fit_sizes)),
    ];
    let mut csv = Csv::new(
        "truncation-study",
        config,
        &["n_x", "n", "energy", "energy_residual", "overlap_deficit", "commutator_residual", "epsilon_bound"],
    );
    for &n_x in &cfg.n_x {
        let grid = GridSpec::new(n_x)?;
        let r = truncation_report(&grid)?;
        for n in 0..r.n_points {
            csv.push(vec![
                n_x.to_string(),
                n.to_string(),
                num(r.energies[n]),
                num(r.energy_residual[n]),
                num(r.overlap_deficit[n]),
                num(r.commutator_residual[n]),
                num(epsilon_bound(r.n_points, n)),
            ]);
        }
    }
    let fits = cfg.fit_eps.iter().map(|&eps| error_law_fit(eps, &cfg.fit_sizes)).collect::<Result<Vec<_>>>()?;
    for f in &fits {
        csv.trailer.push(format!("error_law eps = {:e} slope = {:.4} intercept = {:.4}", f.eps, f.slope, f.intercept));
    }
    Ok((csv, fits))
}

// ---------------------------------------------------------------------------
// Gaussian preparation

/// Parameter file for a fit: comment header, parameters, achieved fidelity.
pub fn gaussian_params_text(fit: &GaussianFit, seed: u64, opts: &OptimizeOptions) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {TOOL}");
    let _ = writeln!(s, "# command = prep-gaussian");
    let _ = writeln!(s, "# seed = {seed}");
    let _ = writeln!(s, "# target = {}", opts.target);
    let _ = writeln!(s, "# restarts = {}", opts.restarts);
    let _ = writeln!(s, "# max_sweeps = {}", opts.max_sweeps);
    let _ = writeln!(s, "# restarts_used = {}", fit.restarts_used);
    let status = match fit.status {
        FitStatus::Reached => "reached",
        FitStatus::BudgetExhausted => "budget-exhausted",
    };
    let _ = writeln!(s, "# status = {status}");
    s.push_str(&fit.params.to_text());
    let _ = writeln!(s, "fidelity = {:?}", fit.fidelity);
    s
}

// ---------------------------------------------------------------------------
// polaron sweep and phonon distribution

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub n_sites: usize,
    pub t: f64,
    pub omega: f64,
    pub n_x: usize,
    pub prep_steps: usize,
    pub seed: u64,
    pub prep: OptimizeOptions,
    /// Use these parameters instead of optimizing.
    pub params: Option<VariationalParams>,
    pub schedule: GroundSchedule,
    pub phonon_ancilla: usize,
    pub n_cut: usize,
    /// Largest phonon number reported.
    pub z_max: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            alphas: vec![0.25, 0.5, 1.0, 1.5, 2.0, 3.0],
            n_sites: 2,
            t: 1.0,
            omega: 1.0,
            n_x: 6,
            prep_steps: 6,
            seed: 1,
            prep: OptimizeOptions::default(),
            params: None,
            schedule: GroundSchedule::default(),
            phonon_ancilla: 8,
            n_cut: 60,
            z_max: 20,
        }
    }
}

impl SweepConfig {
    pub fn describe(&self) -> Vec<String> {
        let s = &self.schedule;
        vec![
            format!("alphas = {}", list(&self.alphas)),
            format!("sites = {}", self.n_sites),
            format!("t = {}", self.t),
            format!("omega = {}", self.omega),
            format!("n_x = {}", self.n_x),
            format!("prep_steps = {}", self.prep_steps),
            format!("seed = {}", self.seed),
            format!("prep_target = {}", self.prep.target),
            format!("prep_restarts = {}", self.prep.restarts),
            format!("params = {}", if self.params.is_some() { "file" } else { "optimized" }),
            format!("coarse_ancilla = {}", s.coarse_ancilla),
            format!("fine_ancilla = {}", s.fine_ancilla),
            format!("fine_width = {}", s.fine_width),
            format!("margin = {}", s.margin),
            format!("dt = {}", s.dt),
            format!("order = {}", u8::from(s.order)),
            format!("min_peak = {}", s.min_peak),
            format!("filter_rounds = {}", s.filter_rounds),
            format!("phonon_ancilla = {}", self.phonon_ancilla),
            format!("n_cut = {}", self.n_cut),
            format!("z_max = {}", self.z_max),
        ]
    }

    pub fn model(&self, alpha: f64) -> Result<HolsteinModel> {
        HolsteinModel::from_alpha(self.n_sites, self.t, self.omega, alpha, self.n_x)
    }

    /// The configured parameters, or a fresh optimization.
    pub fn gaussian(&self) -> Result<GaussianFit> {
        match &self.params {
            Some(p) => {
                if p.n_x != self.n_x {
                    return Err(Error::LayoutMismatch(format!("params for n_x = {}, sweep uses {}", p.n_x, self.n_x)));
                }
                let fidelity = crate::stateprep::gaussian_fidelity(p)?;
                Ok(GaussianFit { params: p.clone(), fidelity, status: FitStatus::Reached, restarts_used: 0 })
            }
            None => optimize_gaussian(self.n_x, self.prep_steps, self.seed, self.prep),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PolaronPoint {
    pub alpha: f64,
    pub e_qpe: f64,
    /// Center of the fine bin holding the peak.
    pub e_bin: f64,
    pub e_ed: f64,
    pub bin_width: f64,
    pub peak_probability: f64,
    pub filter_survival: f64,
    pub z_qpe: Vec<f64>,
    pub z_ed: Vec<f64>,
    pub z_sum: f64,
    pub ed_cutoff_converged: bool,
}

impl PolaronPoint {
    pub fn abs_err(&self) -> f64 {
        (self.e_qpe - self.e_ed).abs()
    }

    pub fn z_total_variation(&self) -> f64 {
        total_variation(&self.z_qpe, &self.z_ed)
    }
}

/// ED reference, phase estimation of the ground energy, and the phonon
/// distribution of the post-selected polaron at one coupling.
pub fn polaron_point(cfg: &SweepConfig, alpha: f64, params: &VariationalParams) -> Result<PolaronPoint> {
    let h = cfg.model(alpha)?;
    let ep = h.to_ep();
    let ed = holstein_ed(&h, cfg.n_cut)?;
    let input = assemble_input(&ep, &h.layout(), params)?;
    let g = ground_state_qpe(&ep, &input, &cfg.schedule)?;
    let pcfg = phonon_qpe_config(cfg.phonon_ancilla, cfg.omega, ep.n_modes())?;
    let z = phonon_distribution(&g.state, &ep, &pcfg, cfg.z_max)?;
    let z_ed: Vec<f64> = (0..=cfg.z_max).map(|n| ed.z().get(n).copied().unwrap_or(0.0)).collect();
    log::info!("alpha {alpha}: E_qpe {:.6} E_ed {:.6} Z0 {:.4}/{:.4}", g.energy, ed.energy(), z.z[0], z_ed[0]);
    Ok(PolaronPoint {
        alpha,
        e_qpe: g.energy,
        e_bin: g.fine.energy(g.peak_bin),
        e_ed: ed.energy(),
        bin_width: g.bin_width,
        peak_probability: g.peak_probability,
        filter_survival: g.filter_survival,
        z_sum: z.distribution.total(),
        z_qpe: z.z,
        z_ed,
        ed_cutoff_converged: ed.cutoff_converged,
    })
}

/// All couplings in parallel; results stay in configuration order.
pub fn polaron_points(cfg: &SweepConfig) -> Result<(GaussianFit, Vec<Result<PolaronPoint>>)> {
    if cfg.alphas.is_empty() {
        return Err(Error::InvalidParameter("empty alpha list".into()));
    }
    let system = cfg.n_sites * (1 + cfg.n_x);
    let ancilla = cfg.schedule.coarse_ancilla.max(cfg.schedule.fine_ancilla).max(cfg.phonon_ancilla);
    if system + ancilla > DEFAULT_MAX_QUBITS {
        return Err(Error::ResourceCap { requested: system + ancilla, cap: DEFAULT_MAX_QUBITS });
    }
    let fit = cfg.gaussian()?;
    let points = cfg.alphas.par_iter().map(|&a| polaron_point(cfg, a, &fit.params)).collect();
    Ok((fit, points))
}

fn error_marker(e: &Error) -> String {
    format!("\"error: {}\"", e.to_string().replace('"', "'"))
}

fn prep_comment(fit: &GaussianFit) -> String {
    format!("prep_fidelity = {:.6}", fit.fidelity)
}

pub fn sweep_csv(cfg: &SweepConfig, fit: &GaussianFit, points: &[Result<PolaronPoint>]) -> Csv {
    let mut config = cfg.describe();
    config.push(prep_comment(fit));
    let mut csv = Csv::new(
        "polaron-sweep",
        config,
        &[
            "alpha",
            "E_qpe",
            "E_ed",
            "abs_err",
            "Z0_qpe",
            "Z0_ed",
            "E_bin",
            "bin_width",
            "peak_probability",
            "filter_survival",
            "status",
        ],
    );
    for (alpha, p) in cfg.alphas.iter().zip(points) {
        match p {
            Ok(p) => csv.push(vec![
                alpha.to_string(),
                num(p.e_qpe),
                num(p.e_ed),
                num(p.abs_err()),
                num(p.z_qpe[0]),
                num(p.z_ed[0]),
                num(p.e_bin),
                num(p.bin_width),
                num(p.peak_probability),
                num(p.filter_survival),
                if p.ed_cutoff_converged { "ok".into() } else { "ed-cutoff-unconverged".into() },
            ]),
            Err(e) => {
                let mut row = vec![alpha.to_string()];
                row.extend(std::iter::repeat_n("NaN".to_string(), 9));
                row.push(error_marker(e));
                csv.push(row);
            }
        }
    }
    csv
}

pub fn phonon_csv(cfg: &SweepConfig, fit: &GaussianFit, points: &[Result<PolaronPoint>]) -> Csv {
    let mut config = cfg.describe();
    config.push(prep_comment(fit));
    let mut csv = Csv::new("phonon-distribution", config, &["alpha", "n", "Z_qpe", "Z_ed", "status"]);
    for (alpha, p) in cfg.alphas.iter().zip(points) {
        match p {
            Ok(p) => {
                for n in 0..=cfg.z_max {
                    csv.push(vec![alpha.to_string(), n.to_string(), num(p.z_qpe[n]), num(p.z_ed[n]), "ok".into()]);
                }
                csv.trailer.push(format!(
                    "alpha = {alpha} total_variation = {:.3e} sum_Z = {:.12}",
                    p.z_total_variation(),
                    p.z_sum
                ));
            }
            Err(e) => csv.push(vec![alpha.to_string(), "NaN".into(), "NaN".into(), "NaN".into(), error_marker(e)]),
        }
    }
    csv
}

// ---------------------------------------------------------------------------
// resources

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    /// Holstein: each site's electron density couples to its own mode.
    Local,
    /// Every orbital's density couples to every mode.
    AllToAll,
}

impl Coupling {
    pub fn name(self) -> &'static str {
        match self {
            Coupling::Local => "local",
            Coupling::AllToAll => "all-to-all",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResourceConfig {
    pub n_sites: Vec<usize>,
    pub n_x: usize,
    pub dt: f64,
    pub order: TrotterOrder,
}

impl Default for ResourceConfig {
    fn default() -> Self {
        ResourceConfig { n_sites: (2..=8).collect(), n_x: 6, dt: 0.05, order: TrotterOrder::Second }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResourceRow {
    pub n_sites: usize,
    pub coupling: Coupling,
    pub qubits: usize,
    pub phonon_qubits: usize,
    pub gates: usize,
    pub two_qubit: usize,
    pub depth: usize,
    /// Two-qubit gates contributed by the electron-phonon terms.
    pub ep_two_qubit: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResourceFits {
    /// `max − min` of the local-coupling step depth over the scanned sizes
    /// with at least three sites. A two-site chain has a single bond and
    /// one hopping layer instead of two, so it is shallower by construction.
    pub local_depth_spread: usize,
    pub local_two_qubit_exponent: f64,
    pub all_to_all_two_qubit_exponent: f64,
    pub all_to_all_ep_exponent: f64,
}

/// Open chain with unit hoppings and frequencies, coupling `g = 1`.
pub fn scaling_model(n_sites: usize, n_x: usize, coupling: Coupling, with_ep: bool) -> Result<EpModel> {
    let mut b = EpModel::builder(n_sites, n_x);
    for i in 0..n_sites.saturating_sub(1) {
        b = b.hopping(i, i + 1, 1.0);
    }
    for i in 0..n_sites {
        b = b.mode(i, 1.0);
    }
    if with_ep {
        for i in 0..n_sites {
            match coupling {
                Coupling::Local => b = b.density_coupling(i, i, i, 1.0),
                Coupling::AllToAll => {
                    for n in 0..n_sites {
                        b = b.density_coupling(i, i, n, 1.0);
                    }
                }
            }
        }
    }
    b.build()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn resource_rows(cfg: &ResourceConfig) -> Result<Vec<ResourceRow>> {
    if cfg.n_sites.is_empty() {
        return Err(Error::InvalidParameter("empty site list".into()));
    }
    let mut rows = Vec::new();
    for coupling in [Coupling::Local, Coupling::AllToAll] {
        for &n in &cfg.n_sites {
            let model = scaling_model(n, cfg.n_x, coupling, true)?;
            let bare = scaling_model(n, cfg.n_x, coupling, false)?;
            let layout = model.layout();
            let full = resource_count(&trotter_step(&model, &layout, cfg.dt, cfg.order)?);
            let without = resource_count(&trotter_step(&bare, &layout, cfg.dt, cfg.order)?);
            rows.push(ResourceRow {
                n_sites: n,
                coupling,
                qubits: layout.n_qubits(),
                phonon_qubits: layout.phonons().len(),
                gates: full.total,
                two_qubit: full.two_qubit,
                depth: full.depth,
                ep_two_qubit: full.two_qubit - without.two_qubit,
            });
        }
    }
    Ok(rows)
}

pub fn resource_fits(rows: &[ResourceRow]) -> ResourceFits {
    let pick = |c: Coupling| rows.iter().filter(move |r| r.coupling == c);
    let depths: Vec<usize> = pick(Coupling::Local).filter(|r| r.n_sites >= 3).map(|r| r.depth).collect();
    let exponent = |c: Coupling, f: fn(&ResourceRow) -> usize| {
        let xs: Vec<f64> = pick(c).map(|r| r.n_sites as f64).collect();
        let ys: Vec<f64> = pick(c).map(|r| f(r) as f64).collect();
        if xs.len() < 2 {
            f64::NAN
        } else {
            loglog_slope(&xs, &ys)
        }
    };
    ResourceFits {
        local_depth_spread: depths.iter().max().unwrap_or(&0) - depths.iter().min().unwrap_or(&0),
        local_two_qubit_exponent: exponent(Coupling::Local, |r| r.two_qubit),
        all_to_all_two_qubit_exponent: exponent(Coupling::AllToAll, |r| r.two_qubit),
        all_to_all_ep_exponent: exponent(Coupling::AllToAll, |r| r.ep_two_qubit),
    }
}

pub fn resources(cfg: &ResourceConfig) -> Result<(Csv, ResourceFits)> {
    let rows = resource_rows(cfg)?;
    let fits = resource_fits(&rows);
    let config = vec![
        format!("n_sites = {}", list(&cfg.n_sites)),
        format!("n_x = {}", cfg.n_x),
        format!("dt = {}", cfg.dt),
        format!("order = {}", u8::from(cfg.order)),
    ];
    let mut csv = Csv::new(
        "resources",
        config,
        &["n_sites", "coupling", "qubits", "phonon_qubits", "gates", "two_qubit", "depth", "ep_two_qubit"],
    );
    for r in &rows {
        csv.push(vec![
            r.n_sites.to_string(),
            r.coupling.name().into(),
            r.qubits.to_string(),
            r.phonon_qubits.to_string(),
            r.gates.to_string(),
            r.two_qubit.to_string(),
            r.depth.to_string(),
            r.ep_two_qubit.to_string(),
        ]);
    }
    csv.trailer.push(format!("local depth spread (n_sites >= 3) = {}", fits.local_depth_spread));
    csv.trailer.push(format!("local two-qubit exponent = {:.3}", fits.local_two_qubit_exponent));
    csv.trailer.push(format!("all-to-all two-qubit exponent = {:.3}", fits.all_to_all_two_qubit_exponent));
    csv.trailer.push(format!("all-to-all electron-phonon two-qubit exponent = {:.3}", fits.all_to_all_ep_exponent));
    Ok((csv, fits))
}

// ---------------------------------------------------------------------------
// circuit export and ED reference

/// Trotter evolution of a Holstein model as circuit text, behind a comment
/// header (the circuit parser skips comments).
pub fn export_circuit(h: &HolsteinModel, time: f64, steps: usize, order: TrotterOrder) -> Result<String> {
    let c = trotter_evolution(&h.to_ep(), &h.layout(), time, steps, order)?;
    let mut s = String::new();
    let _ = writeln!(s, "# {TOOL}");
    let _ = writeln!(s, "# command = export-circuit");
    for line in h.to_config_string().lines() {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(s, "# time = {time}");
    let _ = writeln!(s, "# steps = {steps}");
    let _ = writeln!(s, "# order = {}", u8::from(order));
    s.push_str(&c.to_text());
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct EdReferenceConfig {
    pub alphas: Vec<f64>,
    pub n_sites: usize,
    pub t: f64,
    pub omega: f64,
    pub n_cut: usize,
    pub z_max: usize,
}

impl Default for EdReferenceConfig {
    fn default() -> Self {
        EdReferenceConfig {
            alphas: SweepConfig::default().alphas,
            n_sites: 2,
            t: 1.0,
            omega: 1.0,
            n_cut: 60,
            z_max: 30,
        }
    }
}

/// Golden-data table of Fock-basis ED results. Fails if any cutoff check
/// does not converge.
pub fn ed_reference(cfg: &EdReferenceConfig) -> Result<String> {
    let results = cfg
        .alphas
        .par_iter()
        .map(|&a| {
            let h = HolsteinModel::from_alpha(cfg.n_sites, cfg.t, cfg.omega, a, 1)?;
            let r = holstein_ed(&h, cfg.n_cut)?;
            if !r.cutoff_converged {
                return Err(Error::NotConverged(format!(
                    "alpha {a}: E0 moved by {:.3e} from N_cut {} to {}",
                    r.cutoff_change,
                    cfg.n_cut,
                    cfg.n_cut + crate::ed::CUTOFF_STEP
                )));
            }
            Ok((
                GoldenRow { alpha: a, e0: r.energy(), z: r.z().iter().take(cfg.z_max + 1).copied().collect() },
                r.cutoff_change,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut comments = vec![
        TOOL.to_string(),
        "command = ed-reference".to_string(),
        format!("sites = {}", cfg.n_sites),
        format!("t = {}", cfg.t),
        format!("omega = {}", cfg.omega),
        format!("n_cut = {}", cfg.n_cut),
        format!("z_max = {}", cfg.z_max),
    ];
    for (row, change) in &results {
        comments.push(format!(
            "alpha = {} cutoff change (N_cut + {}) = {:.3e}",
            row.alpha,
            crate::ed::CUTOFF_STEP,
            change
        ));
    }
    let rows: Vec<GoldenRow> = results.into_iter().map(|r| r.0).collect();
    Ok(format_golden(&comments, &rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut c = Csv::new("x", vec!["k = 1".into()], &["a", "b"]);
        c.push(vec!["1".into(), "2".into()]);
        c.trailer.push("done".into());
        let s = c.to_string();
        assert!(s.starts_with(&format!("# {TOOL}\n# command = x\n# k = 1\na,b\n1,2\n# done\n")));
    }

    #[test]
    fn loglog_slope_recovers_power() {
        let xs = [2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((loglog_slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), 2);
        assert_eq!(exit_code(&Error::NotConverged("x".into())), 3);
        assert_eq!(exit_code(&Error::ResourceCap { requested: 40, cap: 28 }), 4);
    }
}
