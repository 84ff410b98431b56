//! The `cdt` command line: argument parsing, run dispatch and CSV emission.
//!
//! Every subcommand renders its whole output in memory before anything is
//! written, so a failed run never leaves a partial file behind. Output is a
//! block of `# key = value` lines recording the resolved configuration, one
//! header line, then data rows.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::dynamics::{
    evolve, initial_state_all_left, odd_even_at, scan_imbalance,
    DEFAULT_SAMPLES_PER_PERIOD, DEFAULT_T_TOTAL,
};
use crate::effective::predict_cdt_points;
use crate::error::CdtError;
use crate::floquet::{
    connect_bands, find_degeneracies, scan_spectrum, DEFAULT_THRESHOLD_PER_OMEGA, DEFAULT_TOL,
};
use crate::model::ModelParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

/// Significant digits kept when printing floats.
const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(
    name = "cdt",
    version,
    about = "Coherent destruction of tunneling in a driven two-mode boson system"
)]
pub struct Cli {
    /// Cap on worker threads for grid evaluations [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the CSV to this file instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate CDT points J0[g1(N-2i-1)/omega] = 0
    Predict(PredictArgs),
    /// Quasienergy bands along a g1/omega grid
    Spectrum(SpectrumArgs),
    /// Population imbalance S(t) for all bosons starting in the left mode
    Dynamics(DynamicsArgs),
    /// Long-time average <<S>> along a g1/omega grid
    Scan(ScanArgs),
    /// Adding one or two bosons at the CDT point of a base system
    Oddeven(OddEvenArgs),
}

/// Parameters shared by every subcommand except the particle count.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Tunneling rate v
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub v: f64,
    /// Static interaction g0
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub g0: f64,
    /// Drive angular frequency omega
    #[arg(long, default_value_t = 40.0)]
    pub omega: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DriveArgs {
    /// Drive amplitude g1
    #[arg(long, conflicts_with = "g1_over_omega", allow_negative_numbers = true)]
    pub g1: Option<f64>,
    /// Drive amplitude as g1/omega
    #[arg(long, allow_negative_numbers = true)]
    pub g1_over_omega: Option<f64>,
}

impl DriveArgs {
    fn resolve(&self, omega: f64) -> Option<f64> {
        self.g1_over_omega.or(self.g1.map(|g1| g1 / omega))
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// First g1/omega of the grid
    #[arg(long, default_value_t = 0.0)]
    pub grid_min: f64,
    /// Last g1/omega of the grid
    #[arg(long, default_value_t = 0.6)]
    pub grid_max: f64,
    /// Number of grid points (1 evaluates grid-min only)
    #[arg(long, default_value_t = 61)]
    pub grid_steps: usize,
}

impl GridArgs {
    fn points(&self) -> Result<Vec<f64>, CliError> {
        let (lo, hi, steps) = (self.grid_min, self.grid_max, self.grid_steps);
        if steps == 0 {
            return Err(usage("--grid-steps must be at least 1"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0) {
            return Err(usage("grid bounds must be finite and nonnegative"));
        }
        if steps == 1 {
            return Ok(vec![lo]);
        }
        if !(hi > lo) {
            return Err(usage("--grid-max must exceed --grid-min"));
        }
        let h = (hi - lo) / (steps - 1) as f64;
        Ok((0..steps)
            .map(|i| if i + 1 == steps { hi } else { lo + h * i as f64 })
            .collect())
    }
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Particle count N
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Highest J0 root index to include
    #[arg(long, default_value_t = 1)]
    pub max_root: usize,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Particle count N
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Quasienergy convergence tolerance
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DynamicsArgs {
    /// Particle count N
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Last sample time
    #[arg(long, default_value_t = 500.0)]
    pub t_max: f64,
    /// Sample spacing [default: one eighth of the drive period]
    #[arg(long)]
    pub sample_dt: Option<f64>,
    /// Quasienergy convergence tolerance
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Run at the numerically located degeneracy inside --bracket nearest to
    /// the requested g1/omega
    #[arg(long, requires = "bracket")]
    pub refine_degeneracy: bool,
    /// g1/omega interval searched by --refine-degeneracy
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub bracket: Option<Vec<f64>>,
    /// Degeneracy threshold [default: 1e-6 * omega]
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    /// Particle count N
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Averaging time
    #[arg(long, default_value_t = DEFAULT_T_TOTAL)]
    pub t_total: f64,
    /// Static interaction as g0/omega (overrides --g0)
    #[arg(long, allow_negative_numbers = true)]
    pub g0_over_omega: Option<f64>,
    /// Quasienergy convergence tolerance
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OddEvenArgs {
    /// Particle count whose first CDT point fixes g1/omega
    #[arg(long, default_value_t = 10)]
    pub n_base: usize,
    /// Extra particles, 1 and/or 2
    #[arg(long, value_delimiter = ',', default_value = "1,2",
          value_parser = clap::value_parser!(u8).range(1..=2))]
    pub delta: Vec<u8>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Use this g1/omega instead of the base system's first CDT point
    #[arg(long)]
    pub g1_over_omega: Option<f64>,
    /// Averaging time
    #[arg(long, default_value_t = DEFAULT_T_TOTAL)]
    pub t_total: f64,
    /// Quasienergy convergence tolerance
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(CdtError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(e) if e.is_convergence() => EXIT_CONVERGENCE,
            CliError::Numerical(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CdtError> for CliError {
    fn from(e: CdtError) -> Self {
        CliError::Numerical(e)
    }
}

fn usage(msg: &str) -> CliError {
    CliError::Usage(msg.to_string())
}

/// Shortest round-trip decimal of `x` after rounding to 12 significant digits.
/// Negative zero prints as `0`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    let magnitude = rounded.abs();
    if (1e-5..1e15).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// CSV under construction: metadata, header, rows.
struct Csv {
    text: String,
}

impl Csv {
    fn new(subcommand: &str) -> Self {
        let mut text = String::new();
        writeln!(text, "# cdt {} {subcommand}", env!("CARGO_PKG_VERSION")).unwrap();
        Self { text }
    }

    fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.text, "# {key} = {value}").unwrap();
    }

    fn meta_float(&mut self, key: &str, value: f64) {
        self.meta(key, format_float(value));
    }

    fn header(&mut self, columns: &[&str]) {
        self.text.push_str(&columns.join(","));
        self.text.push('\n');
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    fn model(&mut self, n: usize, m: &ModelArgs) {
        self.meta("n", n);
        self.meta_float("v", m.v);
        self.meta_float("g0", m.g0);
        self.meta_float("omega", m.omega);
    }

    fn grid(&mut self, g: &GridArgs) {
        self.meta_float("grid_min", g.grid_min);
        self.meta_float("grid_max", g.grid_max);
        self.meta("grid_steps", g.grid_steps);
    }
}

fn params(n: usize, m: &ModelArgs, g1_over_omega: f64) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(n, m.v, m.g0, g1_over_omega * m.omega, m.omega)?)
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Runs the parsed command on a thread pool sized by `--threads` and returns
/// the rendered CSV.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Predict(a) => cmd_predict(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Dynamics(a) => cmd_dynamics(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Oddeven(a) => cmd_oddeven(a),
    })
}

/// Runs and writes the output; returns the process exit code.
pub fn main_with(cli: &Cli) -> i32 {
    let text = match run(cli) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())
        }
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            CliError::Io(e).exit_code()
        }
    }
}

pub fn cmd_predict(a: &PredictArgs) -> Result<String, CliError> {
    let template = params(a.n, &a.model, 0.0)?;
    let predictions = predict_cdt_points(&template, a.max_root)?;
    let mut csv = Csv::new("predict");
    csv.model(a.n, &a.model);
    csv.meta("max_root", a.max_root);
    csv.header(&["i", "root_index", "g1_over_omega", "expected_pairs", "validity_ratio"]);
    for p in predictions {
        csv.row(&[
            p.i.to_string(),
            p.k.to_string(),
            format_float(p.g1_over_omega),
            p.expected_pairs.to_string(),
            format_float(p.validity_ratio),
        ]);
    }
    Ok(csv.text)
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<String, CliError> {
    let template = params(a.n, &a.model, 0.0)?;
    let grid = a.grid.points()?;
    positive("--tol", a.tol)?;
    let spectra = scan_spectrum(&template, &grid, a.tol)?;
    let bands = connect_bands(&spectra);
    let mut csv = Csv::new("spectrum");
    csv.model(a.n, &a.model);
    csv.grid(&a.grid);
    csv.meta_float("tol", a.tol);
    csv.header(&["g1_over_omega", "band_index", "quasienergy", "parity"]);
    for ((x, spectrum), order) in grid.iter().zip(&spectra).zip(&bands) {
        for (band, &k) in order.iter().enumerate() {
            csv.row(&[
                format_float(*x),
                band.to_string(),
                format_float(spectrum.quasienergies[k]),
                spectrum.parities[k].to_string(),
            ]);
        }
    }
    Ok(csv.text)
}

pub fn cmd_dynamics(a: &DynamicsArgs) -> Result<String, CliError> {
    positive("--tol", a.tol)?;
    let requested = a.drive.resolve(a.model.omega);
    let bracket = match &a.bracket {
        Some(b) => {
            let (lo, hi) = (b[0], b[1]);
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
                return Err(usage("--bracket needs 0 <= LO < HI"));
            }
            Some((lo, hi))
        }
        None => None,
    };
    let (requested, used) = if a.refine_degeneracy {
        let (lo, hi) = bracket.expect("clap enforces --bracket");
        let target = requested.unwrap_or(0.5 * (lo + hi));
        let template = params(a.n, &a.model, 0.0)?;
        let threshold = positive(
            "--threshold",
            a.threshold.unwrap_or(DEFAULT_THRESHOLD_PER_OMEGA * a.model.omega),
        )?;
        let points = find_degeneracies(&template, (lo, hi), threshold, a.tol)?;
        let nearest = points
            .iter()
            .min_by(|p, q| {
                (p.g1_over_omega - target)
                    .abs()
                    .total_cmp(&(q.g1_over_omega - target).abs())
            })
            .ok_or(CliError::Numerical(CdtError::Convergence {
                what: "degeneracy search in the given bracket",
                achieved: f64::NAN,
            }))?;
        (target, nearest.g1_over_omega)
    } else {
        let x = requested.unwrap_or(0.0);
        (x, x)
    };
    let p = params(a.n, &a.model, used)?;
    let sample_dt = positive(
        "--sample-dt",
        a.sample_dt.unwrap_or(p.period() / DEFAULT_SAMPLES_PER_PERIOD as f64),
    )?;
    if !(a.t_max.is_finite() && a.t_max >= 0.0) {
        return Err(usage("--t-max must be nonnegative and finite"));
    }
    let traj = evolve(&initial_state_all_left(&p.basis()), &p, a.t_max, sample_dt, a.tol)?;

    let mut csv = Csv::new("dynamics");
    csv.model(a.n, &a.model);
    csv.meta_float("g1_over_omega_requested", requested);
    csv.meta_float("g1_over_omega", used);
    csv.meta("refined", a.refine_degeneracy);
    if let Some((lo, hi)) = bracket {
        csv.meta("bracket", format!("{} {}", format_float(lo), format_float(hi)));
    }
    csv.meta_float("t_max", a.t_max);
    csv.meta_float("sample_dt", sample_dt);
    csv.meta_float("tol", a.tol);
    csv.meta("substeps", traj.substeps_used);
    csv.meta_float("norm_drift", traj.norm_drift);
    csv.header(&["t", "S"]);
    for (t, s) in traj.times.iter().zip(&traj.s_values) {
        csv.row(&[format_float(*t), format_float(*s)]);
    }
    Ok(csv.text)
}

pub fn cmd_scan(a: &ScanArgs) -> Result<String, CliError> {
    let template = params(a.n, &a.model, 0.0)?;
    let grid = a.grid.points()?;
    positive("--t-total", a.t_total)?;
    positive("--tol", a.tol)?;
    let g0 = a.g0_over_omega.map(|r| r * a.model.omega);
    let result = scan_imbalance(&template, &grid, a.t_total, g0, a.tol)?;
    let mut csv = Csv::new("scan");
    csv.meta("n", a.n);
    csv.meta_float("v", a.model.v);
    csv.meta_float("g0", result.params_template.g0);
    csv.meta_float("omega", a.model.omega);
    csv.grid(&a.grid);
    csv.meta_float("t_total", a.t_total);
    csv.meta("sampling", "strobed");
    csv.meta_float("tol", a.tol);
    csv.header(&["g1_over_omega", "s_avg"]);
    for (x, s) in result.grid.iter().zip(&result.s_avg) {
        csv.row(&[format_float(*x), format_float(*s)]);
    }
    Ok(csv.text)
}

pub fn cmd_oddeven(a: &OddEvenArgs) -> Result<String, CliError> {
    positive("--t-total", a.t_total)?;
    positive("--tol", a.tol)?;
    let base = params(a.n_base, &a.model, 0.0)?;
    let x = match a.g1_over_omega {
        Some(x) => x,
        None => {
            predict_cdt_points(&base, 1)?
                .into_iter()
                .find(|c| c.i == 0)
                .expect("i = 0 prediction exists")
                .g1_over_omega
        }
    };
    let mut deltas = a.delta.clone();
    deltas.sort_unstable();
    deltas.dedup();
    let mut csv = Csv::new("oddeven");
    csv.meta("n_base", a.n_base);
    csv.meta_float("v", a.model.v);
    csv.meta_float("g0", a.model.g0);
    csv.meta_float("omega", a.model.omega);
    csv.meta_float("t_total", a.t_total);
    csv.meta("sampling", "strobed");
    csv.meta_float("tol", a.tol);
    csv.header(&["delta", "g1_over_omega_used", "s_avg", "s_min"]);
    for d in deltas {
        let r = odd_even_at(a.n_base, d as usize, &base, x, a.t_total, a.tol)?;
        csv.row(&[
            d.to_string(),
            format_float(r.g1_over_omega),
            format_float(r.s_avg),
            format_float(r.s_min),
        ]);
    }
    Ok(csv.text)
}
