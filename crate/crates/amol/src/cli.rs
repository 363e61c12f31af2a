//! Command-line entry points. Exit codes: 0 success, 1 threshold failure,
//! 2 usage or invalid input, 3 I/O.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use amol_core::approx::{coefficient_fit, rate_fit, RateFit};
use amol_core::cartoon::{make_phantom, rasterize, PhantomSpec};
use amol_core::frame::{check_tight, continuity_defect, FrameSpec, LatticeMode, TightReport};
use amol_core::gramian::{
    decay_fit, gramian_row, sample_pairs, DecayFit, GramianTable, PairSampler,
};
use amol_core::metric::{
    consistency_sum_with, ConsistencyConfig, ConsistencyReport, ShearletFamily, Truncation,
};
use amol_core::parametrization::SamplingData;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::io::{self, IoError};
use crate::nterm::nterm_curve;
use crate::parallel;
use crate::transform::Transform;

pub const EXIT_OK: i32 = 0;
pub const EXIT_THRESHOLD: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Tightness threshold of `frame check`.
pub const TIGHT_TOL: f64 = 1e-8;
/// Decay fit thresholds of `gramian`.
pub const DECAY_SLOPE_MAX: f64 = -3.0;
pub const DECAY_R2_MIN: f64 = 0.8;

#[derive(Debug, Parser)]
#[command(
    name = "amol",
    version,
    about = "Multivariate alpha-molecules: 3D shearlet frame diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Frame diagnostics.
    Frame {
        #[command(subcommand)]
        action: FrameAction,
    },
    /// Sampled cross-Gramian with a decay fit against the index distance.
    Gramian(GramianArgs),
    /// Truncated consistency sums of two shearlet parametrizations.
    Consistency(ConsistencyArgs),
    /// Random cartoon-like phantom.
    Phantom(PhantomArgs),
    /// N-term approximation curve of a phantom or volume.
    Approx(ApproxArgs),
}

#[derive(Debug, Subcommand)]
enum FrameAction {
    /// Tightness and window continuity on the digital grid.
    Check(FrameCheckArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
struct FrameCheckArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    scales: u32,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct GramianArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    scales: u32,
    #[arg(long, default_value_t = 1620)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4.0)]
    omega_min: f64,
    #[arg(long, default_value_t = 200.0)]
    omega_max: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// CSV path; the fit report goes next to it with a `.json` extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
struct ConsistencyArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 4.0)]
    k: f64,
    #[arg(long, default_value_t = 2)]
    jmin: u32,
    #[arg(long, default_value_t = 5)]
    jmax: u32,
    /// Translation box at the finest level; halved per coarser level (default 2^{jmax−1}).
    #[arg(long)]
    kmax: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct PhantomArgs {
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 10.0)]
    nu: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also rasterize on an n^d grid (requires --volume).
    #[arg(long)]
    n: Option<usize>,
    /// Volume sidecar path for the rasterized phantom.
    #[arg(long)]
    volume: Option<PathBuf>,
    /// Phantom spec JSON (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct ApproxArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    nterms: Vec<usize>,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    scales: u32,
    #[arg(long, default_value_t = 10.0)]
    nu: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Volume sidecar to approximate instead of a generated phantom.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Rate CSV path (stdout when omitted); the JSON report goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] amol_core::Error),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Io(IoError::Core(_)) | CliError::Io(IoError::Format(_)) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Core(_) | CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

type CliResult = Result<i32, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Frame {
            action: FrameAction::Check(a),
        } => frame_check(&a),
        Command::Gramian(a) => gramian(&a),
        Command::Consistency(a) => consistency(&a),
        Command::Phantom(a) => phantom(&a),
        Command::Approx(a) => approx(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    match out {
        Some(p) => io::write_json(p, value)?,
        None => {
            let text = serde_json::to_string_pretty(value).map_err(IoError::from)?;
            writeln!(std::io::stdout().lock(), "{text}").map_err(|source| IoError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct FrameReport<'a> {
    config: &'a FrameCheckArgs,
    spec: FrameSpec,
    tight: TightReport,
    continuity_defect: f64,
    tolerance: f64,
    passed: bool,
}

fn frame_check(a: &FrameCheckArgs) -> CliResult {
    let spec = FrameSpec::new(a.n, a.scales)?;
    let tight = check_tight(&spec, false)?;
    let continuity = continuity_defect(&spec.profile, a.scales, 257);
    let passed = tight.max_dev <= TIGHT_TOL && continuity <= 1e-12;
    emit(
        a.out.as_deref(),
        &FrameReport {
            config: a,
            spec,
            tight,
            continuity_defect: continuity,
            tolerance: TIGHT_TOL,
            passed,
        },
    )?;
    Ok(if passed { EXIT_OK } else { EXIT_THRESHOLD })
}

#[derive(Serialize)]
struct GramianReport<'a> {
    config: &'a GramianArgs,
    spec: FrameSpec,
    pairs: usize,
    pairs_in_range: usize,
    fit: DecayFit,
    slope_max: f64,
    r2_min: f64,
    passed: bool,
}

fn gramian(a: &GramianArgs) -> CliResult {
    if a.pairs == 0 {
        return Err(CliError::Usage("--pairs must be positive".into()));
    }
    if !(a.omega_min < a.omega_max) {
        return Err(CliError::Usage(
            "--omega-min must be below --omega-max".into(),
        ));
    }
    let spec = FrameSpec::new(a.n, a.scales)?;
    let pairs = sample_pairs(
        &spec,
        &PairSampler {
            count: a.pairs,
            seed: a.seed,
        },
    )?;
    let rows = parallel::install(|| {
        pairs
            .par_iter()
            .map(|(x, y)| gramian_row(&spec, x, y, a.alpha))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let table = GramianTable::from_rows(rows);
    let mut csv = io::create(&a.out)?;
    io::write_gramian(&mut csv, &table)?;
    csv.flush().map_err(|source| IoError::Io {
        path: a.out.clone(),
        source,
    })?;
    let fit = match decay_fit(&table, a.omega_min, a.omega_max) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("decay fit unavailable: {e}");
            return Ok(EXIT_THRESHOLD);
        }
    };
    let in_range = table
        .rows
        .iter()
        .filter(|r| r.omega >= a.omega_min && r.omega <= a.omega_max)
        .count();
    let passed = fit.slope <= DECAY_SLOPE_MAX && fit.r2 >= DECAY_R2_MIN;
    let report = GramianReport {
        config: a,
        spec,
        pairs: table.len(),
        pairs_in_range: in_range,
        fit,
        slope_max: DECAY_SLOPE_MAX,
        r2_min: DECAY_R2_MIN,
        passed,
    };
    io::write_json(&a.out.with_extension("json"), &report)?;
    Ok(if passed { EXIT_OK } else { EXIT_THRESHOLD })
}

/// The two SH-style parametrizations compared by `consistency`: 𝒯 = I and 𝒯 = ¼I.
pub fn sh_families() -> (ShearletFamily, ShearletFamily) {
    (
        ShearletFamily {
            data: SamplingData::sh(vec![1.0; 3]),
        },
        ShearletFamily {
            data: SamplingData::sh(vec![0.25; 3]),
        },
    )
}

/// Consistency sums with probes evaluated on the worker pool.
pub fn run_consistency(cfg: &ConsistencyConfig) -> amol_core::Result<ConsistencyReport> {
    let (a, b) = sh_families();
    consistency_sum_with(&a, &b, cfg, |probes, f| {
        parallel::install(|| probes.par_iter().map(f).collect())
    })
}

#[derive(Serialize)]
struct ConsistencyOutput<'a> {
    config: &'a ConsistencyArgs,
    levels: Vec<Truncation>,
    report: ConsistencyReport,
}

fn consistency(a: &ConsistencyArgs) -> CliResult {
    if a.jmin > a.jmax || a.jmax > 12 {
        return Err(CliError::Usage("need jmin <= jmax <= 12".into()));
    }
    let mut cfg = ConsistencyConfig::doubling(a.alpha, a.k, a.jmin, a.jmax);
    if let Some(kmax) = a.kmax {
        if kmax < 1 {
            return Err(CliError::Usage("--kmax must be positive".into()));
        }
        for lv in &mut cfg.levels {
            lv.k_max = (kmax >> (a.jmax - lv.j_max)).max(1);
        }
    }
    let report = run_consistency(&cfg)?;
    let converged = report.converged;
    emit(
        a.out.as_deref(),
        &ConsistencyOutput {
            config: a,
            levels: cfg.levels,
            report,
        },
    )?;
    Ok(if converged { EXIT_OK } else { EXIT_THRESHOLD })
}

fn phantom(a: &PhantomArgs) -> CliResult {
    let spec: PhantomSpec = make_phantom(a.nu, a.dim, a.seed)?;
    match (a.n, &a.volume) {
        (Some(n), Some(path)) => io::write_volume(path, &rasterize(&spec, n)?)?,
        (None, None) => {}
        _ => return Err(CliError::Usage("--n and --volume go together".into())),
    }
    emit(a.out.as_deref(), &spec)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ApproxReport<'a> {
    config: &'a ApproxArgs,
    spec: FrameSpec,
    phantom: Option<PhantomSpec>,
    energy: f64,
    clamped: Vec<usize>,
    err2_fit: Option<RateFit>,
    coefficient_fit: Option<RateFit>,
    /// Reference exponent −2/(d−1) of the optimal rate.
    optimal_exponent: f64,
}

fn approx(a: &ApproxArgs) -> CliResult {
    let spec = FrameSpec::new(a.n, a.scales)?.with_lattice(LatticeMode::Decimated);
    let (volume, phantom) = match &a.input {
        Some(p) => (io::read_volume(p)?, None),
        None => {
            let ph = make_phantom(a.nu, 3, a.seed)?;
            (rasterize(&ph, a.n)?, Some(ph))
        }
    };
    let t = Transform::new(spec)?;
    let curve = nterm_curve(&t, &volume, &a.nterms)?;
    for n in &curve.clamped {
        eprintln!(
            "warning: N = {n} exceeds the {} coefficients; clamped",
            curve.ranked.len()
        );
    }
    let (lo, hi) = (a.nterms[0], *a.nterms.last().unwrap_or(&a.nterms[0]));
    let err2_fit = rate_fit(&curve.rows, (lo as f64, hi as f64)).ok();
    let coef = if lo >= 1 && hi > lo {
        coefficient_fit(&curve.ranked, (lo, hi)).ok()
    } else {
        None
    };
    match &a.out {
        Some(p) => {
            let mut f = io::create(p)?;
            io::write_rates(&mut f, &curve.rows)?;
            let report = ApproxReport {
                config: a,
                spec,
                phantom,
                energy: curve.energy,
                clamped: curve.clamped.clone(),
                err2_fit,
                coefficient_fit: coef,
                optimal_exponent: -1.0,
            };
            io::write_json(&p.with_extension("json"), &report)?;
        }
        None => io::write_rates(std::io::stdout().lock(), &curve.rows)?,
    }
    Ok(EXIT_OK)
}
