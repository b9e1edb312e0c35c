//! The `sqztomo` command line.
//!
//! Every output file embeds the effective configuration. Settings resolve as
//! flag, then `--config` file, then built-in default; `SQZTOMO_DEFAULT_CUTOFF`
//! replaces the built-in cutoff.
//!
//! Exit codes: 0 success, 1 runtime failure or recorded kernel discrepancy,
//! 2 invalid configuration, 3 truncation leakage or a failed mandatory check.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dynamics::{kanai_density_grid, uncertainty_audit, DensityGrid, UncertaintyAudit};
use crate::error::Error;
use crate::fock::{self, boundary_margin};
use crate::io::{format_f64, to_json, write_atomic, Csv};
use crate::states::{make_density, parse_complex, StateSpec};
use crate::tomography::kernels::KernelForm;
use crate::tomography::{
    route_tomogram, squeeze_tomogram_oracle_grid, OracleOptions, QuadratureSpec, Route, RouteOptions, SqueezeTomogram,
    TomographyFrame,
};
use crate::verify::{run_verification, VerifyConfig};
use crate::{Complex64, Diagnostic, DEFAULT_CUTOFF};

pub const CUTOFF_ENV: &str = "SQZTOMO_DEFAULT_CUTOFF";

#[derive(Debug, Parser)]
#[command(name = "sqztomo", version, about = "Squeeze tomograms of photon states")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON file of settings; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Fock cutoff N.
    #[arg(long, global = true, value_name = "N")]
    pub cutoff: Option<usize>,
    /// Largest photon number reported.
    #[arg(long = "n-max", global = true, value_name = "M")]
    pub n_max: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (a directory for `verify`); standard output if omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Reduced `verify` matrix.
    #[arg(long, global = true)]
    pub quick: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Squeeze tomogram of a state on a (lambda, theta) grid.
    Tomogram(TomogramArgs),
    /// Squeeze tomogram through an integral-transform kernel, with its
    /// deviation from the oracle.
    Transform(TransformArgs),
    /// Position density and moments of the damped (Caldirola-Kanai) oscillator.
    Dynamics(DynamicsArgs),
    /// Data grids for the two reference figures, `fig1` or `fig2`.
    Figure(FigureArgs),
    /// Cross-validate every route against the oracle.
    Verify,
    /// Print an operator or density matrix as `[re, im]` rows.
    Dump(DumpArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    /// `vacuum`, `fock:M`, `coherent:A`, `cat:A:+|-`, `thermal:T` or JSON.
    #[arg(long)]
    pub state: Option<String>,
    /// `a:b:step`, a comma list or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// A value, a comma list or `a:b:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct TomogramArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// oracle, closed_form, kernel_22, kernel_24 or kernel_eqnew04.
    #[arg(long)]
    pub route: Option<String>,
    /// Kernel variant for kernel routes.
    #[arg(long, value_enum)]
    pub form: Option<FormArg>,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Representation the kernel starts from.
    #[arg(long, value_enum)]
    pub from: Option<Source>,
    #[arg(long, value_enum)]
    pub form: Option<FormArg>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DynamicsArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Complex amplitude, e.g. `0.5+0j`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long = "t-points")]
    pub t_points: Option<usize>,
    /// Half-width of the symmetric q window.
    #[arg(long = "q-max")]
    pub q_max: Option<f64>,
    #[arg(long = "q-points")]
    pub q_points: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// `fig1` or `fig2`.
    pub id: String,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long)]
    pub route: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[arg(long, value_enum)]
    pub operator: Operator,
    /// Matrix dimension (defaults to the cutoff).
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub xi: f64,
    /// State for `--operator density`.
    #[arg(long)]
    pub state: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Literal,
    PrimesSwapped,
    Derived,
}

impl From<FormArg> for KernelForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Literal => KernelForm::Literal,
            FormArg::PrimesSwapped => KernelForm::PrimesSwapped,
            FormArg::Derived => KernelForm::Derived,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Density,
    Wigner,
    Symplectic,
}

impl Source {
    fn route(self) -> Route {
        match self {
            Source::Density => Route::Kernel22,
            Source::Wigner => Route::Kernel24,
            Source::Symplectic => Route::KernelEqnew04,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Annihilation,
    Position,
    Momentum,
    Squeeze,
    Rotation,
    Displacement,
    Density,
}

/// A list of reals in a config file: a string in flag syntax, an array or a
/// number.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RealList {
    Text(String),
    List(Vec<f64>),
    Value(f64),
}

impl RealList {
    fn resolve(&self, name: &'static str) -> Result<Vec<f64>, CliError> {
        match self {
            RealList::Text(s) => parse_real_list(s, name),
            RealList::List(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v.clone()),
            RealList::List(_) => Err(CliError::config(format!("`{name}` must be a non-empty list of finite numbers"))),
            RealList::Value(x) => Ok(vec![*x]),
        }
    }
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub cutoff: Option<usize>,
    pub n_max: Option<usize>,
    pub state: Option<String>,
    pub lambda: Option<RealList>,
    pub theta: Option<RealList>,
    pub route: Option<String>,
    pub form: Option<KernelForm>,
    pub from: Option<Source>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub quadrature: Option<QuadratureSpec>,
    pub gamma: Option<f64>,
    pub alpha: Option<String>,
    pub t_max: Option<f64>,
    pub t_points: Option<usize>,
    pub q_max: Option<f64>,
    pub q_points: Option<usize>,
}

/// Error with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self { code: 1, message: format!("{}: {e}", path.display()) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::Parse(_)
            | Error::CutoffTooSmall(_)
            | Error::DimensionMismatch { .. }
            | Error::SingularKernel { .. }
            | Error::OutsideFrameImage { .. } => 2,
            Error::TailMass { .. } | Error::TruncationLeakage { .. } => 3,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self { code: 1, message: format!("serialisation: {e}") }
    }
}

/// Parses `a:b:step` (inclusive of `b` up to rounding), `x1,x2,...` or `x`.
pub fn parse_real_list(s: &str, name: &'static str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("cannot parse `{name}` value `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(CliError::config(format!("`{name}` range `{s}` needs a <= b and step > 0")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            if n > 1_000_000 {
                return Err(CliError::config(format!("`{name}` range `{s}` has too many points")));
            }
            Ok((0..=n).map(|i| clean(a + i as f64 * step)).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

fn clean(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if (r - x).abs() < 1e-13 {
        r
    } else {
        x
    }
}

fn parse_state(s: &str) -> Result<StateSpec, CliError> {
    Ok(s.parse::<StateSpec>()?)
}

fn parse_route(s: &str) -> Result<Route, CliError> {
    Ok(s.parse::<Route>()?)
}

/// Settings shared by the grid-producing commands after resolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub cutoff: usize,
    pub n_max: usize,
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    pub route: Route,
    pub form: KernelForm,
    pub quadrature: QuadratureSpec,
    pub format: Format,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let margin = boundary_margin(self.cutoff);
        if self.cutoff <= self.n_max + margin {
            return Err(CliError::config(format!(
                "cutoff {} must exceed n_max + {margin} = {} (top levels are truncation margin)",
                self.cutoff,
                self.n_max + margin
            )));
        }
        if self.lambda.is_empty() || self.theta.is_empty() {
            return Err(CliError::config("empty lambda or theta grid"));
        }
        if let Some(l) = self.lambda.iter().find(|l| l.abs() > fock::LAMBDA_MAX) {
            return Err(CliError::config(format!("|lambda| = {} exceeds {}", l.abs(), fock::LAMBDA_MAX)));
        }
        self.quadrature.validate()?;
        Ok(())
    }

    fn frames(&self) -> Vec<TomographyFrame> {
        self.theta.iter().flat_map(|&t| self.lambda.iter().map(move |&l| TomographyFrame::new(l, t))).collect()
    }
}

/// Flags and config file together, resolving each setting in precedence order.
struct Resolver {
    common: CommonArgs,
    file: ConfigFile,
}

impl Resolver {
    fn new(common: CommonArgs) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };
        Ok(Self { common, file })
    }

    fn cutoff(&self, fallback: usize) -> Result<usize, CliError> {
        if let Some(n) = self.common.cutoff.or(self.file.cutoff) {
            return Ok(n);
        }
        match std::env::var(CUTOFF_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::config(format!("{CUTOFF_ENV}=`{v}` is not a cutoff"))),
            Err(_) => Ok(fallback),
        }
    }

    fn n_max(&self, fallback: usize) -> usize {
        self.common.n_max.or(self.file.n_max).unwrap_or(fallback)
    }

    fn format(&self) -> Format {
        self.common.format.or(self.file.format).unwrap_or(Format::Json)
    }

    fn out(&self) -> Option<PathBuf> {
        self.common.out.clone().or_else(|| self.file.out.clone())
    }

    fn quadrature(&self) -> QuadratureSpec {
        self.file.quadrature.unwrap_or_default()
    }

    fn state(&self, flag: &Option<String>) -> Result<StateSpec, CliError> {
        match flag.as_ref().or(self.file.state.as_ref()) {
            Some(s) => parse_state(s),
            None => Err(CliError::config("--state is required")),
        }
    }

    fn reals(
        &self,
        flag: &Option<String>,
        file: &Option<RealList>,
        name: &'static str,
        fallback: &[f64],
    ) -> Result<Vec<f64>, CliError> {
        match (flag, file) {
            (Some(s), _) => parse_real_list(s, name),
            (None, Some(l)) => l.resolve(name),
            (None, None) => Ok(fallback.to_vec()),
        }
    }

    fn grid_config(&self, grid: &GridArgs, route: Route, form: KernelForm) -> Result<RunConfig, CliError> {
        let cfg = RunConfig {
            cutoff: self.cutoff(DEFAULT_CUTOFF)?,
            n_max: self.n_max(40),
            lambda: self.reals(&grid.lambda, &self.file.lambda, "lambda", &[0.0])?,
            theta: self.reals(&grid.theta, &self.file.theta, "theta", &[0.0])?,
            route,
            form,
            quadrature: self.quadrature(),
            format: self.format(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn form(&self, flag: Option<FormArg>) -> KernelForm {
        flag.map(KernelForm::from).or(self.file.form).unwrap_or(KernelForm::Derived)
    }

    fn route(&self, flag: &Option<String>, fallback: Route) -> Result<Route, CliError> {
        flag.as_ref().or(self.file.route.as_ref()).map_or(Ok(fallback), |s| parse_route(s))
    }

    fn dynamics(&self, args: &DynamicsArgs, gamma: f64, alpha: Complex64) -> Result<DynamicsConfig, CliError> {
        let alpha = match args.alpha.as_ref().or(self.file.alpha.as_ref()) {
            Some(s) => parse_complex(s)?,
            None => alpha,
        };
        let cfg = DynamicsConfig {
            gamma: args.gamma.or(self.file.gamma).unwrap_or(gamma),
            alpha: [alpha.re, alpha.im],
            t_max: args.t_max.or(self.file.t_max).unwrap_or(30.0),
            t_points: args.t_points.or(self.file.t_points).unwrap_or(301),
            q_max: args.q_max.or(self.file.q_max).unwrap_or(3.0),
            q_points: args.q_points.or(self.file.q_points).unwrap_or(241),
            format: self.format(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsConfig {
    pub gamma: f64,
    pub alpha: [f64; 2],
    pub t_max: f64,
    pub t_points: usize,
    pub q_max: f64,
    pub q_points: usize,
    pub format: Format,
}

impl DynamicsConfig {
    fn validate(&self) -> Result<(), CliError> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(CliError::config(format!("gamma must satisfy 0 <= gamma < 1, got {}", self.gamma)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite() && self.q_max > 0.0 && self.q_max.is_finite()) {
            return Err(CliError::config("t_max and q_max must be positive"));
        }
        if self.t_points < 2 || self.q_points < 3 {
            return Err(CliError::config("need t_points >= 2 and q_points >= 3"));
        }
        if !self.alpha.iter().all(|x| x.is_finite()) {
            return Err(CliError::config("alpha must be finite"));
        }
        Ok(())
    }

    fn grids(&self) -> (Vec<f64>, Vec<f64>) {
        let lin = |a: f64, b: f64, n: usize| (0..n).map(|i| clean(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
        (lin(-self.q_max, self.q_max, self.q_points), lin(0.0, self.t_max, self.t_points))
    }
}

fn emit_diagnostics(diags: &[Diagnostic]) {
    let mut err = std::io::stderr().lock();
    for d in diags {
        let _ = writeln!(err, "{d}");
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(|e| CliError::io(p, e)),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// One `theta` slice of a tomogram file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    pub route: Route,
    pub form: Option<KernelForm>,
    pub state: StateSpec,
    pub theta: f64,
    pub lambda_grid: Vec<f64>,
    pub n_max: usize,
    /// `values[i][n]` at `lambda_grid[i]`.
    pub values: Vec<Vec<f64>>,
    pub total: Vec<f64>,
    pub tail_mass: Vec<f64>,
    pub min_before_clip: f64,
    /// `max_n |W - W_oracle|` per lambda, for kernel transforms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_deviation: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
struct GridFile<'a, C: Serialize> {
    config: &'a C,
    grids: &'a [GridEntry],
}

#[derive(Debug, Clone, Serialize)]
struct TomogramConfig<'a> {
    command: &'static str,
    state: StateSpec,
    #[serde(flatten)]
    run: &'a RunConfig,
}

fn split_by_theta(
    cfg: &RunConfig,
    state: StateSpec,
    tomo: &SqueezeTomogram,
    deviation: Option<&[f64]>,
) -> Vec<GridEntry> {
    let nl = cfg.lambda.len();
    let kernel = !matches!(cfg.route, Route::Oracle | Route::ClosedForm);
    cfg.theta
        .iter()
        .enumerate()
        .map(|(k, &theta)| {
            let r = k * nl..(k + 1) * nl;
            GridEntry {
                route: cfg.route,
                form: kernel.then_some(cfg.form),
                state,
                theta,
                lambda_grid: cfg.lambda.clone(),
                n_max: cfg.n_max,
                values: tomo.values[r.clone()].to_vec(),
                total: tomo.total[r.clone()].to_vec(),
                tail_mass: tomo.tail_mass[r.clone()].to_vec(),
                min_before_clip: tomo.values[r.clone()].iter().flatten().fold(tomo.min_before_clip, |m, &v| m.min(v)),
                oracle_deviation: deviation.map(|d| d[r].to_vec()),
            }
        })
        .collect()
}

fn render_grids<C: Serialize>(config: &C, grids: &[GridEntry], format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(to_json(&GridFile { config, grids })?),
        Format::Csv => {
            let deviation = grids.iter().any(|g| g.oracle_deviation.is_some());
            let mut header = vec!["theta", "lambda", "n", "W", "tail_mass"];
            if deviation {
                header.push("oracle_deviation");
            }
            let mut csv = Csv::new(&header);
            csv.comment(format!("config: {}", to_json(config)?.trim_end()));
            for g in grids {
                csv.comment(format!("route={} state={} theta={}", g.route.as_str(), g.state, format_f64(g.theta)));
            }
            for g in grids {
                for (i, &lambda) in g.lambda_grid.iter().enumerate() {
                    for (n, &w) in g.values[i].iter().enumerate() {
                        let mut row = vec![
                            format_f64(g.theta),
                            format_f64(lambda),
                            n.to_string(),
                            format_f64(w),
                            format_f64(g.tail_mass[i]),
                        ];
                        if let Some(d) = &g.oracle_deviation {
                            row.push(format_f64(d[i]));
                        }
                        csv.row(row);
                    }
                    csv.block_break();
                }
            }
            Ok(csv.render())
        }
    }
}

fn compute_grids(cfg: &RunConfig, state: StateSpec, with_oracle: bool) -> Result<Vec<GridEntry>, CliError> {
    state.validate()?;
    let frames = cfg.frames();
    let opts = RouteOptions { cutoff: cfg.cutoff, form: cfg.form, quadrature: cfg.quadrature };
    let tomo = route_tomogram(&state, cfg.route, &frames, cfg.n_max, &opts)?;
    emit_diagnostics(&tomo.diagnostics("tomogram"));
    let deviation = if with_oracle {
        let rho = make_density(&state, cfg.cutoff)?;
        let oracle = squeeze_tomogram_oracle_grid(&rho, &frames, cfg.n_max, &OracleOptions::default())?;
        Some(
            tomo.values
                .iter()
                .zip(&oracle.values)
                .map(|(a, b)| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    Ok(split_by_theta(cfg, state, &tomo, deviation.as_deref()))
}

fn cmd_tomogram(r: &Resolver, args: &TomogramArgs) -> Result<i32, CliError> {
    let route = r.route(&args.route, Route::Oracle)?;
    let cfg = r.grid_config(&args.grid, route, r.form(args.form))?;
    let state = r.state(&args.grid.state)?;
    let grids = compute_grids(&cfg, state, false)?;
    let config = TomogramConfig { command: "tomogram", state, run: &cfg };
    emit(r.out().as_deref(), &render_grids(&config, &grids, cfg.format)?)?;
    Ok(0)
}

fn cmd_transform(r: &Resolver, args: &TransformArgs) -> Result<i32, CliError> {
    let source = args.from.or(r.file.from).unwrap_or(Source::Density);
    let cfg = r.grid_config(&args.grid, source.route(), r.form(args.form))?;
    let state = r.state(&args.grid.state)?;
    let grids = compute_grids(&cfg, state, true)?;
    let config = TomogramConfig { command: "transform", state, run: &cfg };
    emit(r.out().as_deref(), &render_grids(&config, &grids, cfg.format)?)?;
    Ok(0)
}

#[derive(Debug, Clone, Serialize)]
struct DynamicsFile<'a> {
    config: &'a DynamicsConfig,
    grid: &'a DensityGrid,
    audit: &'a UncertaintyAudit,
}

fn render_dynamics(cfg: &DynamicsConfig, grid: &DensityGrid, audit: &UncertaintyAudit) -> Result<String, CliError> {
    match cfg.format {
        Format::Json => Ok(to_json(&DynamicsFile { config: cfg, grid, audit })?),
        Format::Csv => {
            let mut csv = Csv::new(&["t", "q", "density", "mean_q", "sigma_q", "sigma_p", "sigma_pq"]);
            csv.comment(format!("config: {}", to_json(cfg)?.trim_end()));
            csv.comment(format!("audit: {}", to_json(audit)?.trim_end()));
            for (i, m) in grid.moments.iter().enumerate() {
                for (j, &q) in grid.q_grid.iter().enumerate() {
                    csv.row(vec![
                        format_f64(m.t),
                        format_f64(q),
                        format_f64(grid.density[i][j]),
                        format_f64(m.mean_q),
                        format_f64(m.sigma_q),
                        format_f64(m.sigma_p),
                        format_f64(m.sigma_pq),
                    ]);
                }
                csv.block_break();
            }
            Ok(csv.render())
        }
    }
}

fn run_dynamics(cfg: &DynamicsConfig) -> Result<(DensityGrid, UncertaintyAudit), CliError> {
    let (q, t) = cfg.grids();
    let alpha = Complex64::new(cfg.alpha[0], cfg.alpha[1]);
    let grid = kanai_density_grid(cfg.gamma, alpha, &q, &t)?;
    let audit = uncertainty_audit(cfg.gamma, &t)?;
    if !audit.matches_nominal {
        eprintln!(
            "level=info code=uncertainty_constant op=dynamics value={:.16e} threshold={:.1e} reconciling_scale={:.16e}",
            audit.invariant_value, audit.nominal_value, audit.reconciling_scale
        );
    }
    Ok((grid, audit))
}

fn cmd_dynamics(r: &Resolver, args: &DynamicsArgs) -> Result<i32, CliError> {
    let gamma = args.gamma.or(r.file.gamma).ok_or_else(|| CliError::config("--gamma is required"))?;
    let cfg = r.dynamics(args, gamma, Complex64::new(0.0, 0.0))?;
    if args.alpha.is_none() && r.file.alpha.is_none() {
        return Err(CliError::config("--alpha is required"));
    }
    let (grid, audit) = run_dynamics(&cfg)?;
    let out = r.out();
    emit(out.as_deref(), &render_dynamics(&cfg, &grid, &audit)?)?;
    if let Some(p) = out {
        #[derive(Serialize)]
        struct Audit<'a> {
            config: &'a DynamicsConfig,
            audit: &'a UncertaintyAudit,
            moments: &'a [crate::dynamics::GaussianMoments],
        }
        let side = sidecar(&p, ".audit.json");
        let text = to_json(&Audit { config: &cfg, audit: &audit, moments: &grid.moments })?;
        write_atomic(&side, text.as_bytes()).map_err(|e| CliError::io(&side, e))?;
    }
    Ok(0)
}

#[derive(Debug, Clone, Serialize)]
struct FigureMeta<'a, C: Serialize> {
    figure: &'a str,
    data_file: String,
    format: Format,
    parameters: &'a C,
}

fn cmd_figure(r: &Resolver, args: &FigureArgs) -> Result<i32, CliError> {
    let format = r.format();
    let out = r.out().unwrap_or_else(|| PathBuf::from(format!("{}.{}", args.id, format.extension())));
    let (text, meta) = match args.id.as_str() {
        "fig1" => {
            let cfg = r.dynamics(&args.dynamics, 0.1, Complex64::new(0.5, 0.0))?;
            let (grid, audit) = run_dynamics(&cfg)?;
            let meta = to_json(&FigureMeta {
                figure: "fig1",
                data_file: out.display().to_string(),
                format,
                parameters: &serde_json::json!({ "dynamics": cfg, "audit": audit }),
            })?;
            (render_dynamics(&cfg, &grid, &audit)?, meta)
        }
        "fig2" => {
            let route = r.route(&args.route, Route::ClosedForm)?;
            let mut cfg = r.grid_config(
                &GridArgs {
                    state: None,
                    lambda: args.lambda.clone().or_else(|| Some("-1.5:1.5:0.05".into())),
                    theta: args.theta.clone(),
                },
                route,
                KernelForm::Derived,
            )?;
            if args.theta.is_none() && r.file.theta.is_none() {
                cfg.theta = vec![0.0];
            }
            let alpha = match args.dynamics.alpha.as_ref().or(r.file.alpha.as_ref()) {
                Some(s) => parse_complex(s)?,
                None => Complex64::new(3.0, 0.0),
            };
            let state = match &r.file.state {
                Some(s) => parse_state(s)?,
                None => StateSpec::coherent(alpha),
            };
            let grids = compute_grids(&cfg, state, false)?;
            let config = TomogramConfig { command: "figure", state, run: &cfg };
            let meta = to_json(&FigureMeta {
                figure: "fig2",
                data_file: out.display().to_string(),
                format,
                parameters: &config,
            })?;
            (render_grids(&config, &grids, cfg.format)?, meta)
        }
        other => return Err(CliError::config(format!("unknown figure `{other}` (expected fig1 or fig2)"))),
    };
    emit(Some(&out), &text)?;
    let side = sidecar(&out, ".meta.json");
    write_atomic(&side, meta.as_bytes()).map_err(|e| CliError::io(&side, e))?;
    Ok(0)
}

fn cmd_verify(r: &Resolver) -> Result<i32, CliError> {
    let quick = r.common.quick;
    let base = if quick { VerifyConfig::quick() } else { VerifyConfig::default() };
    let cfg = VerifyConfig {
        cutoff: r.cutoff(base.cutoff)?,
        n_max: r.n_max(base.n_max),
        quick,
        quadrature: r.file.quadrature.unwrap_or(base.quadrature),
    };
    let margin = boundary_margin(cfg.cutoff);
    if cfg.cutoff <= cfg.n_max + margin {
        return Err(CliError::config(format!("cutoff {} must exceed n_max + {margin}", cfg.cutoff)));
    }
    let report = run_verification(&cfg)?;
    let dir = r.out().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let md = dir.join("VERIFICATION.md");
    write_atomic(&md, report.to_markdown().as_bytes()).map_err(|e| CliError::io(&md, e))?;
    let js = dir.join("verification.json");
    write_atomic(&js, to_json(&report)?.as_bytes()).map_err(|e| CliError::io(&js, e))?;
    for row in report.rows.iter().filter(|r| r.status != crate::verify::Status::Pass) {
        eprintln!(
            "level={} code=verify_{} op={} value={} threshold={:.1e} state={}",
            if row.mandatory { "error" } else { "warn" },
            row.status.as_str(),
            row.route,
            row.max_error.map_or_else(|| "nan".to_string(), |e| format!("{e:.6e}")),
            row.tolerance,
            row.state
        );
    }
    eprintln!(
        "verify: {} rows, {} mandatory failure(s), {} discrepancy row(s), report in {}",
        report.rows.len(),
        report.mandatory_failures(),
        report.discrepancies(),
        md.display()
    );
    Ok(report.exit_code())
}

#[derive(Debug, Clone, Serialize)]
struct DumpFile<'a> {
    config: serde_json::Value,
    operator: Operator,
    dim: usize,
    tail_mass: f64,
    matrix: &'a [Vec<[f64; 2]>],
}

fn cmd_dump(r: &Resolver, args: &DumpArgs) -> Result<i32, CliError> {
    let dim = match args.dim {
        Some(d) => d,
        None => r.cutoff(DEFAULT_CUTOFF)?,
    };
    let mut state = None;
    let op = match args.operator {
        Operator::Annihilation => fock::annihilation_matrix(dim)?,
        Operator::Position => fock::quadrature_matrices(dim)?.0,
        Operator::Momentum => fock::quadrature_matrices(dim)?.1,
        Operator::Squeeze => fock::squeeze_matrix(args.lambda, dim)?,
        Operator::Rotation => fock::rotation_matrix(args.theta, dim)?,
        Operator::Displacement => fock::displacement_matrix(args.eta, args.xi, dim)?,
        Operator::Density => {
            let spec = r.state(&args.state)?;
            state = Some(spec);
            make_density(&spec, dim)?.op().clone()
        }
    };
    let rows = op.to_rows();
    let config = serde_json::json!({
        "command": "dump",
        "operator": args.operator,
        "dim": dim,
        "lambda": args.lambda,
        "theta": args.theta,
        "eta": args.eta,
        "xi": args.xi,
        "state": state,
    });
    let file = DumpFile { config, operator: args.operator, dim, tail_mass: op.tail_mass(), matrix: &rows };
    emit(r.out().as_deref(), &to_json(&file)?)?;
    Ok(0)
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let r = Resolver::new(cli.common)?;
    match &cli.command {
        Command::Tomogram(a) => cmd_tomogram(&r, a),
        Command::Transform(a) => cmd_transform(&r, a),
        Command::Dynamics(a) => cmd_dynamics(&r, a),
        Command::Figure(a) => cmd_figure(&r, a),
        Command::Verify => cmd_verify(&r),
        Command::Dump(a) => cmd_dump(&r, a),
    }
}

/// Entry point for the binary: parses `std::env::args`, reports errors on
/// standard error and returns the exit code.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
