//! Command-line front end: argument parsing, dispatch to the analysis
//! routines and JSON/CSV report emission.
//!
//! Every report embeds the resolved [`RunConfig`]. Output carries no
//! timestamps, so identical arguments give byte-identical reports.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use qcayley::hus::{identity_errors, ratio_burn_in, ratio_limit, term_ratio_profile};
use qcayley::instability::canonical_sign;
use qcayley::{
    certify, eta_half_s_divergence, product_solution, synthesize, tail_sum_psi, two_cycle,
    w_zero_divergence, CayleyParams, Error, LatticeWindow, ParamGrid, PerturbationKind,
    PerturbationSpec, Range, ScaledComplex, Trajectory, Verdict, DEFAULT_K_MAX,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_DRAWS: usize = 100;
/// Burn-in tolerance for the `ratio` command.
pub const RATIO_TOL: f64 = 1e-6;

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const SINGULAR: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    /// Bound violated, or the analysis does not apply to the parameters.
    pub const VERDICT: i32 = 4;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Product solution P on the window.
    Solve,
    /// Perturbed solution bundle for the chosen forcing.
    Perturb,
    /// Stability report for a perturbed solution.
    Hus,
    /// Table of |w psi - 1|.
    Identity,
    /// Ratio profile of the tail series terms.
    Ratio,
    /// Two-cycle limit at eta = 1/2.
    Cycle,
    /// Divergence evidence at w = 0 or eta = 1/2.
    Diverge,
    /// Seeded parameter sweep of the stability report.
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Forcing {
    /// Independent uniform phases with modulus epsilon.
    RandomPhase,
    /// The constant (--e-re, --e-im), epsilon when both are omitted.
    Constant,
    /// epsilon P / |P|.
    UnitPhase,
    /// Values read from --custom.
    Custom,
}

#[derive(Debug, Parser)]
#[command(
    name = "qcayley",
    version,
    about = "Stability analysis of the Cayley quantum equation D_q x = w <x>_eta on q^N"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long = "w-re", default_value_t = 0.0, allow_negative_numbers = true)]
    pub w_re: f64,
    #[arg(long = "w-im", default_value_t = 0.0, allow_negative_numbers = true)]
    pub w_im: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, env = "QCAYLEY_KMAX", default_value_t = DEFAULT_K_MAX)]
    pub kmax: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Initial value x(1) for `perturb`/`hus`, the tested constant for `diverge`.
    #[arg(long = "c-re", default_value_t = 0.0, allow_negative_numbers = true)]
    pub c_re: f64,
    #[arg(long = "c-im", default_value_t = 0.0, allow_negative_numbers = true)]
    pub c_im: f64,
    #[arg(long, value_enum, default_value_t = Forcing::RandomPhase)]
    pub forcing: Forcing,
    #[arg(long = "e-re", allow_negative_numbers = true)]
    pub e_re: Option<f64>,
    #[arg(long = "e-im", allow_negative_numbers = true)]
    pub e_im: Option<f64>,
    /// JSON array of [re, im] pairs, zero beyond its length.
    #[arg(long)]
    pub custom: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DRAWS)]
    pub draws: usize,
    #[arg(long = "q-range", num_args = 2, value_names = ["LO", "HI"])]
    pub q_range: Option<Vec<f64>>,
    #[arg(long = "eta-range", num_args = 2, value_names = ["LO", "HI"])]
    pub eta_range: Option<Vec<f64>>,
    #[arg(long = "w-abs-range", num_args = 2, value_names = ["LO", "HI"])]
    pub w_abs_range: Option<Vec<f64>>,
    #[arg(long = "w-arg-range", num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub w_arg_range: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// The fully resolved run, echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub q: Option<f64>,
    pub eta: f64,
    pub w: Complex64,
    pub epsilon: f64,
    pub kmax: u64,
    pub seed: u64,
    pub c: Complex64,
    pub perturbation: PerturbationKind,
    pub draws: usize,
    pub grid: ParamGrid,
    pub format: Format,
    pub output: Option<PathBuf>,
}

/// A failed run: exit status plus the JSON diagnostic for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: exit::USAGE,
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn diagnostic(&self) -> String {
        serde_json::json!({
            "error": self.kind,
            "message": self.message,
            "exit_code": self.code,
        })
        .to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::InvalidParameter(_) => (exit::USAGE, "invalid_parameter"),
            Error::PerturbationBound { .. } => (exit::USAGE, "perturbation_bound"),
            Error::Forbidden { .. } => (exit::SINGULAR, "forbidden"),
            Error::NearSingular { .. } => (exit::SINGULAR, "near_singular"),
            Error::DivisionByZero => (exit::SINGULAR, "division_by_zero"),
            Error::TruncationCap { .. } => (exit::NUMERICAL, "truncation_cap"),
            Error::NoConvergence { .. } => (exit::NUMERICAL, "no_convergence"),
            Error::WindowEdge { .. } => (exit::NUMERICAL, "window_edge"),
            Error::PremiseViolated { .. } => (exit::NUMERICAL, "premise_violated"),
            Error::NotApplicable(_) => (exit::VERDICT, "not_applicable"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

pub type RunResult<T> = std::result::Result<T, Failure>;

/// A finished report and the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub artifact: String,
}

fn range(name: &str, v: &Option<Vec<f64>>, default: Range) -> RunResult<Range> {
    match v.as_deref() {
        None => Ok(default),
        Some([lo, hi]) => Ok(Range::new(*lo, *hi)),
        Some(_) => Err(Failure::usage(format!("--{name} takes two values"))),
    }
}

fn finite(name: &str, x: f64) -> RunResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::usage(format!("--{name} must be finite, got {x}")))
    }
}

impl RunConfig {
    /// Resolves defaults and validates every numeric input.
    pub fn from_cli(cli: &Cli) -> RunResult<Self> {
        for (name, x) in [
            ("eta", cli.eta),
            ("w-re", cli.w_re),
            ("w-im", cli.w_im),
            ("c-re", cli.c_re),
            ("c-im", cli.c_im),
        ] {
            finite(name, x)?;
        }
        if !(cli.epsilon.is_finite() && cli.epsilon > 0.0) {
            return Err(Failure::usage(format!(
                "--epsilon must be a finite positive real, got {}",
                cli.epsilon
            )));
        }
        if let Some(q) = cli.q {
            if !(q.is_finite() && q > 1.0) {
                return Err(Failure::usage(format!("--q must exceed 1, got {q}")));
            }
        } else if cli.command != Command::Sweep {
            return Err(Failure::usage("--q is required"));
        }
        if !(0.0..=0.5).contains(&cli.eta) {
            return Err(Failure::usage(format!(
                "--eta must lie in [0, 1/2], got {}",
                cli.eta
            )));
        }
        let perturbation = match cli.forcing {
            Forcing::RandomPhase => PerturbationKind::RandomPhase { seed: cli.seed },
            Forcing::UnitPhase => PerturbationKind::UnitPhaseOfP,
            Forcing::Constant => {
                let value = match (cli.e_re, cli.e_im) {
                    (None, None) => Complex64::new(cli.epsilon, 0.0),
                    (re, im) => Complex64::new(
                        finite("e-re", re.unwrap_or(0.0))?,
                        finite("e-im", im.unwrap_or(0.0))?,
                    ),
                };
                PerturbationKind::ConstantComplex { value }
            }
            Forcing::Custom => {
                let path = cli
                    .custom
                    .as_ref()
                    .ok_or_else(|| Failure::usage("--forcing custom needs --custom FILE"))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
                let values: Vec<Complex64> = serde_json::from_str(&text).map_err(|e| {
                    Failure::usage(format!(
                        "{} is not a list of [re, im] pairs: {e}",
                        path.display()
                    ))
                })?;
                PerturbationKind::Custom { values }
            }
        };
        PerturbationSpec::new(cli.epsilon, perturbation.clone())?;
        let defaults = ParamGrid::default();
        let grid = ParamGrid {
            q: range("q-range", &cli.q_range, defaults.q)?,
            eta: range("eta-range", &cli.eta_range, defaults.eta)?,
            w_abs: range("w-abs-range", &cli.w_abs_range, defaults.w_abs)?,
            w_arg: range("w-arg-range", &cli.w_arg_range, defaults.w_arg)?,
        };
        if cli.command == Command::Sweep {
            grid.check()?;
        }
        Ok(Self {
            command: cli.command,
            q: cli.q,
            eta: cli.eta,
            w: Complex64::new(cli.w_re, cli.w_im),
            epsilon: cli.epsilon,
            kmax: cli.kmax,
            seed: cli.seed,
            c: Complex64::new(cli.c_re, cli.c_im),
            perturbation,
            draws: cli.draws,
            grid,
            format: cli.format,
            output: cli.output.clone(),
        })
    }

    fn params(&self) -> RunResult<CayleyParams> {
        let q = self.q.ok_or_else(|| Failure::usage("--q is required"))?;
        Ok(CayleyParams::new(q, self.eta, self.w)?)
    }

    fn window(&self) -> RunResult<LatticeWindow> {
        Ok(LatticeWindow::new(
            self.q.ok_or_else(|| Failure::usage("--q is required"))?,
            self.kmax,
        )?)
    }

    fn spec(&self) -> RunResult<PerturbationSpec> {
        Ok(PerturbationSpec::new(
            self.epsilon,
            self.perturbation.clone(),
        )?)
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    report: T,
}

fn json<T: Serialize>(config: &RunConfig, report: T) -> RunResult<String> {
    let mut s = serde_json::to_string_pretty(&Report { config, report })
        .map_err(|e| Failure::usage(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> RunResult<String> {
    let fail = |e: csv::Error| Failure::usage(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| fail(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// CSV header followed by rows; serde cannot emit a header for zero rows.
fn csv_with_header<T: Serialize>(header: &[&str], rows: &[T]) -> RunResult<String> {
    if rows.is_empty() {
        return Ok(format!("{}\n", header.join(",")));
    }
    csv(rows)
}

/// `t = q^k` as a double when it fits, otherwise in decimal scientific form.
pub fn format_t(q: f64, k: u64) -> String {
    let t = q.powf(k as f64);
    if t.is_finite() {
        return t.to_string();
    }
    let log10 = k as f64 * q.log10();
    let exponent = log10.floor();
    format!("{}e{}", 10f64.powf(log10 - exponent), exponent)
}

#[derive(Serialize)]
struct TrajectoryRow {
    k: u64,
    t: String,
    re: f64,
    im: f64,
    exp2: i64,
}

fn trajectory_rows(traj: &Trajectory) -> Vec<TrajectoryRow> {
    let q = traj.window().q();
    traj.values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let (z, exp2) = scaled_projection(*v);
            TrajectoryRow {
                k: k as u64,
                t: format_t(q, k as u64),
                re: z.re,
                im: z.im,
                exp2,
            }
        })
        .collect()
}

/// `(z, 0)` when `v` fits a double, else `(mantissa, exp2)`.
pub fn scaled_projection(v: ScaledComplex) -> (Complex64, i64) {
    match v.to_complex() {
        Some(z) if v.fits_f64() => (z, 0),
        _ => (v.mantissa(), v.exp2()),
    }
}

#[derive(Serialize)]
struct IdentityRow {
    k: u64,
    psi_re: f64,
    psi_im: f64,
    error: f64,
}

#[derive(Serialize)]
struct RatioRow {
    m: u64,
    ratio: f64,
    limit: f64,
}

#[derive(Serialize)]
struct RatioReport {
    eta: f64,
    limit: f64,
    tolerance: f64,
    burn_in: Option<usize>,
    ratios: Vec<f64>,
}

#[derive(Serialize)]
struct CycleReport {
    p_star: Complex64,
    p_star_abs: f64,
    converged_at: u64,
    cycle_residual: f64,
    alternation_residual: f64,
}

/// One sweep draw. Draw failures keep their row with the error text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub draw: String,
    pub q: Option<f64>,
    pub eta: Option<f64>,
    pub w_re: Option<f64>,
    pub w_im: Option<f64>,
    pub resamples: Option<usize>,
    pub forcing_seed: Option<u64>,
    pub sup_deviation: Option<f64>,
    pub bound: Option<f64>,
    pub majorant_bound: Option<f64>,
    pub ratio: Option<f64>,
    pub identity_error: Option<f64>,
    pub verdict: String,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: [&str; 14] = [
    "draw",
    "q",
    "eta",
    "w_re",
    "w_im",
    "resamples",
    "forcing_seed",
    "sup_deviation",
    "bound",
    "majorant_bound",
    "ratio",
    "identity_error",
    "verdict",
    "error",
];

/// Forcing seeds come from a second ChaCha stream so they never coincide
/// with the parameter stream.
fn forcing_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..n).map(|_| rng.random()).collect()
}

fn sweep_row(config: &RunConfig, i: usize, draw: qcayley::Draw, seed: u64) -> (SweepRow, i32) {
    let params = draw.params;
    let mut row = SweepRow {
        draw: i.to_string(),
        q: Some(params.q),
        eta: Some(params.eta),
        w_re: Some(params.w.re),
        w_im: Some(params.w.im),
        resamples: Some(draw.resamples),
        forcing_seed: Some(seed),
        sup_deviation: None,
        bound: None,
        majorant_bound: None,
        ratio: None,
        identity_error: None,
        verdict: String::new(),
        error: None,
    };
    let report = LatticeWindow::new(params.q, config.kmax).and_then(|window| {
        let spec = PerturbationSpec::new(config.epsilon, PerturbationKind::RandomPhase { seed })?;
        let bundle = synthesize(&params, &window, &spec, config.c)?;
        certify(&params, &bundle, config.epsilon)
    });
    match report {
        Ok(r) => {
            row.sup_deviation = Some(r.sup_deviation);
            row.bound = Some(r.bound);
            row.majorant_bound = Some(r.majorant_bound);
            row.ratio = Some(r.bound_ratio());
            row.identity_error = Some(r.identity_error);
            row.verdict = verdict_name(r.verdict);
            let code = if r.verdict == Verdict::BoundHolds {
                exit::OK
            } else {
                exit::VERDICT
            };
            (row, code)
        }
        Err(e) => {
            let f = Failure::from(e);
            row.verdict = "error".into();
            row.error = Some(f.message);
            (row, f.code)
        }
    }
}

#[derive(Serialize)]
struct SweepReport {
    rows: Vec<SweepRow>,
    max_ratio: Option<f64>,
    bound_holds: usize,
    bound_violated: usize,
    errors: usize,
}

fn sweep(config: &RunConfig) -> RunResult<Outcome> {
    let draws = config.grid.draws(config.seed, config.draws)?;
    let seeds = forcing_seeds(config.seed, draws.len());
    let results: Vec<(SweepRow, i32)> = draws
        .par_iter()
        .zip(seeds.par_iter())
        .enumerate()
        .map(|(i, (draw, seed))| sweep_row(config, i, *draw, *seed))
        .collect();
    // singular and numerical failures outrank a violated bound
    let code = results
        .iter()
        .map(|(_, c)| *c)
        .max_by_key(|c| match *c {
            exit::OK => 0,
            exit::VERDICT => 1,
            c => 2 + c,
        })
        .unwrap_or(exit::OK);
    let mut rows: Vec<SweepRow> = results.into_iter().map(|(r, _)| r).collect();
    let max_ratio = rows
        .iter()
        .filter_map(|r| r.ratio)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let count = |v: &str| rows.iter().filter(|r| r.verdict == v).count();
    let (holds, violated, errors) = (
        count("bound_holds"),
        count("bound_violated"),
        count("error"),
    );
    let artifact = match config.format {
        Format::Json => json(
            config,
            SweepReport {
                rows,
                max_ratio,
                bound_holds: holds,
                bound_violated: violated,
                errors,
            },
        )?,
        Format::Csv => {
            if !rows.is_empty() {
                rows.push(SweepRow {
                    draw: "summary".into(),
                    q: None,
                    eta: None,
                    w_re: None,
                    w_im: None,
                    resamples: None,
                    forcing_seed: None,
                    sup_deviation: None,
                    bound: None,
                    majorant_bound: None,
                    ratio: max_ratio,
                    identity_error: None,
                    verdict: format!("holds={holds} violated={violated} errors={errors}"),
                    error: None,
                });
            }
            csv_with_header(&SWEEP_HEADER, &rows)?
        }
    };
    Ok(Outcome { code, artifact })
}

/// The serialized name, so CSV and JSON agree.
fn verdict_name(v: Verdict) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn ok(artifact: String) -> RunResult<Outcome> {
    Ok(Outcome {
        code: exit::OK,
        artifact,
    })
}

/// Runs one command and renders its report.
pub fn run(config: &RunConfig) -> RunResult<Outcome> {
    match config.command {
        Command::Solve => {
            let params = config.params()?;
            let p = product_solution(&params, &config.window()?)?;
            ok(match config.format {
                Format::Json => json(
                    config,
                    serde_json::json!({ "params": params, "trajectory": p }),
                )?,
                Format::Csv => csv(trajectory_rows(&p))?,
            })
        }
        Command::Perturb => {
            let params = config.params()?;
            let bundle = synthesize(&params, &config.window()?, &config.spec()?, config.c)?;
            ok(match config.format {
                Format::Json => json(config, &bundle)?,
                Format::Csv => csv(trajectory_rows(&bundle.phi))?,
            })
        }
        Command::Hus => {
            let params = config.params()?;
            let bundle = synthesize(&params, &config.window()?, &config.spec()?, config.c)?;
            let report = certify(&params, &bundle, config.epsilon)?;
            let code = match report.verdict {
                Verdict::BoundHolds => exit::OK,
                _ => exit::VERDICT,
            };
            let artifact = match config.format {
                Format::Json => json(config, &report)?,
                Format::Csv => csv([&report].map(HusRow::from))?,
            };
            Ok(Outcome { code, artifact })
        }
        Command::Identity => {
            let params = config.params()?;
            let errors = identity_errors(&params, config.kmax)?;
            let rows = (0..=config.kmax)
                .zip(errors)
                .map(|(k, error)| {
                    let psi = tail_sum_psi(&params, k)?.value;
                    Ok(IdentityRow {
                        k,
                        psi_re: psi.re,
                        psi_im: psi.im,
                        error,
                    })
                })
                .collect::<RunResult<Vec<_>>>()?;
            ok(match config.format {
                Format::Json => json(config, &rows)?,
                Format::Csv => csv(rows)?,
            })
        }
        Command::Ratio => {
            let params = config.params()?;
            let ratios = term_ratio_profile(&params, config.kmax)?;
            let limit = ratio_limit(params.eta);
            ok(match config.format {
                Format::Json => json(
                    config,
                    RatioReport {
                        eta: params.eta,
                        limit,
                        tolerance: RATIO_TOL,
                        burn_in: ratio_burn_in(&ratios, limit, RATIO_TOL),
                        ratios,
                    },
                )?,
                Format::Csv => csv_with_header(
                    &["m", "ratio", "limit"],
                    &ratios
                        .iter()
                        .enumerate()
                        .map(|(m, r)| RatioRow {
                            m: m as u64,
                            ratio: *r,
                            limit,
                        })
                        .collect::<Vec<_>>(),
                )?,
            })
        }
        Command::Cycle => {
            let params = config.params()?;
            let r = two_cycle(&params, &config.window()?)?;
            let report = CycleReport {
                p_star: canonical_sign(r.p_star),
                p_star_abs: r.p_star.norm(),
                converged_at: r.converged_at,
                cycle_residual: r.cycle_residual,
                alternation_residual: r.alternation_residual,
            };
            ok(match config.format {
                Format::Json => json(config, report)?,
                Format::Csv => csv([CycleRow::from(report)])?,
            })
        }
        Command::Diverge => {
            let params = config.params()?;
            let window = config.window()?;
            let evidence = if params.is_w_zero() {
                w_zero_divergence(&window, params.eta, config.epsilon, config.c)?
            } else if params.is_eta_half() {
                eta_half_s_divergence(&params, &window, config.epsilon, config.c)?
            } else {
                return Err(Error::NotApplicable(
                    "divergence evidence needs w = 0 or eta = 1/2".into(),
                )
                .into());
            };
            ok(match config.format {
                Format::Json => json(config, &evidence)?,
                Format::Csv => csv(&evidence.profile)?,
            })
        }
        Command::Sweep => sweep(config),
    }
}

#[derive(Serialize)]
struct HusRow {
    q: f64,
    eta: f64,
    w_re: f64,
    w_im: f64,
    epsilon: f64,
    x0_re: f64,
    x0_im: f64,
    sup_deviation: f64,
    sup_index: u64,
    bound: f64,
    majorant_bound: f64,
    identity_error: f64,
    verdict: String,
    terms_used: usize,
    tail_bound: f64,
    precision_bits: usize,
}

impl From<&qcayley::HusReport> for HusRow {
    fn from(r: &qcayley::HusReport) -> Self {
        Self {
            q: r.params.q,
            eta: r.params.eta,
            w_re: r.params.w.re,
            w_im: r.params.w.im,
            epsilon: r.epsilon,
            x0_re: r.x0.re,
            x0_im: r.x0.im,
            sup_deviation: r.sup_deviation,
            sup_index: r.sup_index,
            bound: r.bound,
            majorant_bound: r.majorant_bound,
            identity_error: r.identity_error,
            verdict: verdict_name(r.verdict),
            terms_used: r.truncation.terms_used,
            tail_bound: r.truncation.tail_bound,
            precision_bits: r.precision_bits,
        }
    }
}

#[derive(Serialize)]
struct CycleRow {
    p_star_re: f64,
    p_star_im: f64,
    p_star_abs: f64,
    converged_at: u64,
    cycle_residual: f64,
    alternation_residual: f64,
}

impl From<CycleReport> for CycleRow {
    fn from(r: CycleReport) -> Self {
        Self {
            p_star_re: r.p_star.re,
            p_star_im: r.p_star.im,
            p_star_abs: r.p_star_abs,
            converged_at: r.converged_at,
            cycle_residual: r.cycle_residual,
            alternation_residual: r.alternation_residual,
        }
    }
}

/// Parses, runs and writes the report; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return exit::OK;
            }
            eprintln!("{}", Failure::usage(e.to_string().trim_end()).diagnostic());
            return exit::USAGE;
        }
    };
    let result = RunConfig::from_cli(&cli).and_then(|config| {
        let outcome = run(&config)?;
        write_artifact(&config, &outcome.artifact)?;
        Ok(outcome.code)
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.diagnostic());
            f.code
        }
    }
}

fn write_artifact(config: &RunConfig, artifact: &str) -> RunResult<()> {
    match &config.output {
        Some(path) => std::fs::write(path, artifact).map_err(|e| Failure {
            code: exit::USAGE,
            kind: "io",
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(artifact.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure {
                    code: exit::USAGE,
                    kind: "io",
                    message: format!("cannot write to stdout: {e}"),
                })
        }
    }
}
