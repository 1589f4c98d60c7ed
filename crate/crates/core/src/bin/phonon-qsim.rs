use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phonon_qsim::circuits::TrotterOrder;
use phonon_qsim::model::{Boundary, HolsteinModel};
use phonon_qsim::qpe::GroundSchedule;
use phonon_qsim::runner::{self, EdReferenceConfig, ResourceConfig, SweepConfig, TruncationConfig};
use phonon_qsim::stateprep::{optimize_gaussian, FitStatus, OptimizeOptions, VariationalParams};
use phonon_qsim::{Error, Result};

/// Statevector experiments for electron-phonon models on Fourier-grid qubit registers.
///
/// Values from `--config FILE` (lines of `key = value`, keys are long flag
/// names) are applied after the command line and take precedence.
#[derive(Parser, Debug)]
#[command(name = "phonon-qsim", version, args_override_self = true)]
struct Cli {
    /// Key/value file whose entries override command-line flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "PHONON_QSIM_THREADS")]
    threads: Option<usize>,

    /// Output file (default: stdout).
    #[arg(short, long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,

    /// More log output (-v info, -vv debug). RUST_LOG also works.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectrum and residuals of the truncated oscillator, with error-law fits.
    TruncationStudy(TruncationArgs),
    /// Optimize the Gaussian-state ansatz and write its parameters.
    PrepGaussian(PrepArgs),
    /// Ground energy by phase estimation against exact diagonalization.
    PolaronSweep(SweepArgs),
    /// Phonon-number distribution of the phase-estimated polaron.
    PhononDistribution(SweepArgs),
    /// Gate counts and depth of Trotter steps versus lattice size.
    Resources(ResourceArgs),
    /// Write a Trotter evolution circuit as text.
    ExportCircuit(ExportArgs),
    /// Fock-basis ED reference table (golden data).
    EdReference(EdArgs),
}

#[derive(Args, Debug)]
struct TruncationArgs {
    #[arg(long = "n-x", value_delimiter = ',', default_values_t = [6usize, 7])]
    n_x: Vec<usize>,
    /// Accuracies for the error-law fit (the bare flag disables it).
    #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [1e-3, 1e-7])]
    fit_eps: Vec<f64>,
    /// Grid sizes used by the fit.
    #[arg(long, value_delimiter = ',', default_values_t = (4..=16).map(|k| 16 * k).collect::<Vec<usize>>())]
    fit_sizes: Vec<usize>,
}

#[derive(Args, Debug)]
struct PrepArgs {
    #[arg(long = "n-x", default_value_t = 6)]
    n_x: usize,
    #[arg(long, default_value_t = 6)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.998)]
    target: f64,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 1000)]
    max_sweeps: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0])]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    sites: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long = "n-x", default_value_t = 6)]
    n_x: usize,
    /// Ansatz steps for the Gaussian preparation.
    #[arg(long, default_value_t = 6)]
    prep_steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.998)]
    target: f64,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    /// Parameter file from `prep-gaussian` (skips optimization).
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    coarse_ancilla: usize,
    #[arg(long, default_value_t = 10)]
    fine_ancilla: usize,
    /// Energy span of the fine window.
    #[arg(long, default_value_t = 40.0)]
    fine_width: f64,
    /// Distance of the fine window below the coarse estimate.
    #[arg(long, default_value_t = 2.0)]
    margin: f64,
    #[arg(long, default_value_t = 0.025)]
    dt: f64,
    #[arg(long, default_value_t = 2)]
    order: u8,
    #[arg(long, default_value_t = 1)]
    filter_rounds: usize,
    #[arg(long, default_value_t = 8)]
    phonon_ancilla: usize,
    #[arg(long, default_value_t = 60)]
    n_cut: usize,
    #[arg(long, default_value_t = 20)]
    z_max: usize,
}

#[derive(Args, Debug)]
struct ResourceArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 5, 6, 7, 8])]
    sites: Vec<usize>,
    #[arg(long = "n-x", default_value_t = 6)]
    n_x: usize,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    #[arg(long, default_value_t = 2)]
    order: u8,
}

#[derive(Args, Debug)]
struct ExportArgs {
    /// Model file (`sites`, `t`, `omega`, `g` or `alpha`, `n_x`, `boundary`).
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    sites: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 0.0)]
    g: f64,
    #[arg(long = "n-x", default_value_t = 6)]
    n_x: usize,
    #[arg(long, default_value = "open")]
    boundary: String,
    #[arg(long, default_value_t = 0.05)]
    time: f64,
    #[arg(long, default_value_t = 1)]
    steps: usize,
    #[arg(long, default_value_t = 2)]
    order: u8,
}

#[derive(Args, Debug)]
struct EdArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0])]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    sites: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 60)]
    n_cut: usize,
    #[arg(long, default_value_t = 30)]
    z_max: usize,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Replaces command-line occurrences of every key set in the config file
/// with `--key=value`, so file entries win, including for list flags.
fn with_config_file(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let pos = argv.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="));
    let Some(pos) = pos else { return Ok(argv) };
    let path = match argv[pos].to_string_lossy().strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => match argv.get(pos + 1) {
            Some(p) => PathBuf::from(p),
            None => return Ok(argv),
        },
    };
    let text = read(&path)?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or(Error::Parse { line: idx + 1, msg: format!("expected 'key = value', got '{line}'") })?;
        let key = k.trim().replace('_', "-");
        if key == "config" {
            return Err(Error::Parse { line: idx + 1, msg: "nested config files are not supported".into() });
        }
        drop_flag(&mut argv, &key);
        argv.push(format!("--{key}={}", v.trim()).into());
    }
    Ok(argv)
}

/// Removes `--key=v` and `--key v` from `argv`.
fn drop_flag(argv: &mut Vec<OsString>, key: &str) {
    let flag = format!("--{key}");
    let mut k = 0;
    while k < argv.len() {
        let a = argv[k].to_string_lossy();
        if a == flag {
            let n = if k + 1 < argv.len() { 2 } else { 1 };
            argv.drain(k..k + n);
        } else if a.starts_with(&format!("{flag}=")) {
            argv.remove(k);
        } else {
            k += 1;
        }
    }
}

fn order(v: u8) -> Result<TrotterOrder> {
    TrotterOrder::try_from(v)
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig> {
    let params = match &a.params {
        Some(p) => Some(VariationalParams::parse(&read(p)?)?),
        None => None,
    };
    Ok(SweepConfig {
        alphas: a.alphas.clone(),
        n_sites: a.sites,
        t: a.t,
        omega: a.omega,
        n_x: a.n_x,
        prep_steps: a.prep_steps,
        seed: a.seed,
        prep: OptimizeOptions { target: a.target, restarts: a.restarts, ..OptimizeOptions::default() },
        params,
        schedule: GroundSchedule {
            coarse_ancilla: a.coarse_ancilla,
            fine_ancilla: a.fine_ancilla,
            fine_width: a.fine_width,
            margin: a.margin,
            dt: a.dt,
            order: order(a.order)?,
            filter_rounds: a.filter_rounds,
            ..GroundSchedule::default()
        },
        phonon_ancilla: a.phonon_ancilla,
        n_cut: a.n_cut,
        z_max: a.z_max,
    })
}

/// Output text and whether every row succeeded.
fn run(cmd: &Command) -> Result<(String, bool)> {
    match cmd {
        Command::TruncationStudy(a) => {
            let cfg =
                TruncationConfig { n_x: a.n_x.clone(), fit_eps: a.fit_eps.clone(), fit_sizes: a.fit_sizes.clone() };
            Ok((runner::truncation_study(&cfg)?.0.to_string(), true))
        }
        Command::PrepGaussian(a) => {
            let opts = OptimizeOptions { target: a.target, restarts: a.restarts, max_sweeps: a.max_sweeps };
            let fit = optimize_gaussian(a.n_x, a.steps, a.seed, opts)?;
            log::info!("fidelity {:.6} after {} restart(s)", fit.fidelity, fit.restarts_used);
            Ok((runner::gaussian_params_text(&fit, a.seed, &opts), fit.status == FitStatus::Reached))
        }
        Command::PolaronSweep(a) | Command::PhononDistribution(a) => {
            let cfg = sweep_config(a)?;
            let (fit, points) = runner::polaron_points(&cfg)?;
            let ok = points.iter().all(|p| p.is_ok());
            let csv = if matches!(cmd, Command::PolaronSweep(_)) {
                runner::sweep_csv(&cfg, &fit, &points)
            } else {
                runner::phonon_csv(&cfg, &fit, &points)
            };
            Ok((csv.to_string(), ok))
        }
        Command::Resources(a) => {
            let cfg = ResourceConfig { n_sites: a.sites.clone(), n_x: a.n_x, dt: a.dt, order: order(a.order)? };
            Ok((runner::resources(&cfg)?.0.to_string(), true))
        }
        Command::ExportCircuit(a) => {
            let h = match &a.model {
                Some(p) => HolsteinModel::parse(&read(p)?)?,
                None => HolsteinModel::new(a.sites, a.t, a.omega, a.g, a.n_x)?
                    .with_boundary(a.boundary.parse::<Boundary>()?),
            };
            Ok((runner::export_circuit(&h, a.time, a.steps, order(a.order)?)?, true))
        }
        Command::EdReference(a) => {
            let cfg = EdReferenceConfig {
                alphas: a.alphas.clone(),
                n_sites: a.sites,
                t: a.t,
                omega: a.omega,
                n_cut: a.n_cut,
                z_max: a.z_max,
            };
            Ok((runner::ed_reference(&cfg)?, true))
        }
    }
}

fn main() -> ExitCode {
    let argv = match with_config_file(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(runner::exit_code(&e) as u8);
        }
    };
    let cli = Cli::parse_from(argv);

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {e}");
        }
    }

    let result = run(&cli.command).and_then(|(text, ok)| {
        match &cli.output {
            Some(p) => std::fs::write(p, &text)?,
            None => print!("{text}"),
        }
        Ok(ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some rows did not complete; see the output");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(runner::exit_code(&e) as u8)
        }
    }
}
