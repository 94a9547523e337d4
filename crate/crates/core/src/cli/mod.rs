//! Command-line interface.

pub mod data;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};

use crate::bench::{self, Preset};
use crate::deepest::{composite_depth, CompositeOptions, ConstraintRegion, DepthProblem};
use crate::error::DepthError;
use crate::influence::{
    covariance_influences, glm_influences, location_influences, normalize_influences, GlmFamily,
};
use crate::model::{Dataset, DepthResult, InfluenceSet, SignConvention, SolverConfig};
use crate::oracle::{exact_depth_1d, exact_depth_2d, exact_depth_3d, grid_depth_curve, make_grid, CurveForm};
use crate::phi::{PhiFamily, PhiFunction};
use crate::solver::{sap, subspace_solve, triangle_depth};
use data::{load_csv, parse_grid, parse_values, CsvOptions};
use output::*;

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "DEPTHKIT_SEED";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Solver(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Data(s) => write!(f, "data error: {s}"),
            CliError::Solver(s) => write!(f, "solver error: {s}"),
        }
    }
}

impl From<DepthError> for CliError {
    fn from(e: DepthError) -> Self {
        if e.is_data_error() {
            CliError::Data(e.to_string())
        } else {
            CliError::Solver(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "depthkit", version, about = "Polished half-space and subspace depth")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Depth of a hypothesis point by successive accelerated projection.
    Depth(DepthArgs),
    /// Deepest parameter by the nested max-min scheme.
    Deepest(DeepestArgs),
    /// Exact depth for influences of dimension 1, 2 or 3.
    Oracle(OracleArgs),
    /// 1D depth curve over a grid of centers.
    Curve(CurveArgs),
    /// Synthetic experiment presets.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DepthKind {
    Location,
    Regression,
    Glm,
    Covariance,
    Subspace,
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Location,
    Regression,
    Glm,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file; columns named `y…` are responses.
    #[arg(long)]
    pub data: PathBuf,
    /// The file has no header row; its first column is then the response.
    #[arg(long)]
    pub no_header: bool,
    /// Treat every column as a response.
    #[arg(long)]
    pub all_y: bool,
    /// Append a column of ones to the predictors.
    #[arg(long)]
    pub intercept: bool,
}

impl DataArgs {
    fn load(&self) -> CliResult<Dataset> {
        let opts = CsvOptions {
            no_header: self.no_header,
            all_y: self.all_y,
            intercept: self.intercept,
        };
        Ok(load_csv(&self.data, opts)?)
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Surrogate family annealed by SAP.
    #[arg(long, default_value = "tanh")]
    pub phi: PhiFamily,
    #[arg(long, default_value_t = 10.0)]
    pub zeta_max: f64,
    /// Annealing factor.
    #[arg(long, default_value_t = 1.25)]
    pub alpha: f64,
    /// Number of random starting observations.
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    /// RNG seed; falls back to DEPTHKIT_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1e-2)]
    pub tol_obj: f64,
    /// Gradient max-norm tolerance.
    #[arg(long, default_value_t = 1.0)]
    pub tol_grad: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value = "right-closed")]
    pub convention: SignConvention,
    /// Worker threads for multistart (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Use the influences as given instead of rescaling them.
    #[arg(long)]
    pub no_auto_scale: bool,
}

impl SolverArgs {
    fn config(&self) -> CliResult<SolverConfig> {
        let seed = match self.seed {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{SEED_ENV}='{v}' is not an unsigned integer")))?,
                Err(_) => 0,
            },
        };
        let cfg = SolverConfig {
            phi: self.phi,
            zeta_max: self.zeta_max,
            zeta_factor: self.alpha,
            n_starts: self.starts,
            seed,
            tol_obj: self.tol_obj,
            tol_grad_maxnorm: self.tol_grad,
            max_iter: self.max_iter,
            sign_convention: self.convention,
            threads: self.threads,
            auto_scale: !self.no_auto_scale,
            ..SolverConfig::default()
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-iteration records as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Report wall-clock time (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[arg(value_enum)]
    pub kind: DepthKind,
    #[command(flatten)]
    pub data: DataArgs,
    /// Hypothesis point: inline comma list or a file; matrices are row-major.
    #[arg(long)]
    pub point: String,
    /// Model whose influences `depth subspace` uses.
    #[arg(long, value_enum, default_value = "location")]
    pub model: Model,
    #[arg(long, default_value = "gaussian")]
    pub family: GlmFamily,
    /// Use the affine-invariant normalized influences.
    #[arg(long)]
    pub normalize: bool,
    /// Subspace dimension for `depth subspace`.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DeepestArgs {
    #[arg(long, value_enum, default_value = "location")]
    pub model: Model,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "gaussian")]
    pub family: GlmFamily,
    /// Starting parameter (row-major); defaults to least squares.
    #[arg(long)]
    pub point: Option<String>,
    /// Box lower bounds (row-major), together with --upper.
    #[arg(long, requires = "upper")]
    pub lower: Option<String>,
    #[arg(long, requires = "lower")]
    pub upper: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub max_outer: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum, default_value = "location")]
    pub model: Model,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub point: String,
    #[arg(long, default_value = "gaussian")]
    pub family: GlmFamily,
    #[arg(long, default_value = "right-closed")]
    pub convention: SignConvention,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "sign")]
    pub phi: PhiFamily,
    /// Cutoff of the Huber, truncated-sign and bisquare families.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Grid as start:end:step.
    #[arg(long)]
    pub grid: String,
    /// Use the two-sided contrast form.
    #[arg(long)]
    pub contrast: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// t1, t2, t3, t4-gauss or t4-cauchy.
    #[arg(long)]
    pub preset: Preset,
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    /// Restrict to these dimensions (comma list).
    #[arg(long)]
    pub dims: Option<String>,
    /// Also emit one line per run.
    #[arg(long)]
    pub per_run: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    let res = match path {
        Some(p) => File::create(p).and_then(|f| {
            let mut w = BufWriter::new(f);
            w.write_all(text.as_bytes())?;
            w.flush()
        }),
        None => {
            let mut w = std::io::stdout().lock();
            w.write_all(text.as_bytes()).and_then(|_| w.flush())
        }
    };
    res.map_err(|e| CliError::Solver(format!("cannot write output: {e}")))
}

fn write_trace(path: Option<&Path>, res: &DepthResult) -> CliResult<()> {
    let (Some(p), Some(t)) = (path, res.trace.as_ref()) else {
        return Ok(());
    };
    File::create(p)
        .and_then(|f| {
            let mut w = BufWriter::new(f);
            t.write_jsonl(&mut w)?;
            w.flush()
        })
        .map_err(|e| CliError::Solver(format!("cannot write trace: {e}")))
}

fn matrix_from(vals: &[f64], r: usize, c: usize, what: &str) -> CliResult<DMatrix<f64>> {
    if vals.len() != r * c {
        return Err(CliError::Data(format!("{what} needs {r}×{c} = {} values, got {}", r * c, vals.len())));
    }
    Ok(DMatrix::from_row_slice(r, c, vals))
}

/// Responses, or every predictor column when the file has no response columns.
fn responses(d: &Dataset) -> DMatrix<f64> {
    if d.y().ncols() > 0 {
        d.y().clone()
    } else {
        d.x().clone()
    }
}

fn model_influences(model: Model, d: &Dataset, point: &[f64], family: GlmFamily) -> CliResult<InfluenceSet> {
    Ok(match model {
        Model::Location => {
            let z = responses(d);
            let mu = matrix_from(point, z.ncols(), 1, "the location point")?;
            location_influences(&z, &DVector::from_column_slice(mu.as_slice()))?
        }
        Model::Regression | Model::Glm => {
            let (p, m) = (d.x().ncols(), d.y().ncols());
            if p == 0 || m == 0 {
                return Err(CliError::Data("regression needs predictor and response columns".into()));
            }
            if model == Model::Regression && m != 1 {
                return Err(CliError::Data(format!("regression needs one response column, got {m}")));
            }
            let fam = if model == Model::Regression { GlmFamily::Gaussian } else { family };
            let b = matrix_from(point, p, m, "the coefficient point")?;
            glm_influences(d.x(), d.y(), &b, fam)?
        }
    })
}

fn problem_of(model: Model, d: Dataset, family: GlmFamily) -> CliResult<DepthProblem> {
    Ok(match model {
        Model::Location => DepthProblem::location(responses(&d))?,
        Model::Regression => {
            if d.y().ncols() != 1 {
                return Err(CliError::Data(format!("regression needs one response column, got {}", d.y().ncols())));
            }
            DepthProblem::glm(d, GlmFamily::Gaussian)
        }
        Model::Glm => DepthProblem::glm(d, family),
    })
}

fn run_depth(a: &DepthArgs) -> CliResult<()> {
    let mut cfg = a.solver.config()?;
    cfg.record_trace = a.output.trace.is_some();
    let d = a.data.load()?;
    let point = parse_values(&a.point)?;
    let name = format!("{:?}", a.kind).to_lowercase();
    let maybe_normalize = |inf: InfluenceSet| -> CliResult<InfluenceSet> {
        Ok(if a.normalize { normalize_influences(&inf)? } else { inf })
    };
    let res = match a.kind {
        DepthKind::Location => sap(&maybe_normalize(model_influences(Model::Location, &d, &point, a.family)?)?, &cfg)?,
        DepthKind::Regression => {
            sap(&maybe_normalize(model_influences(Model::Regression, &d, &point, a.family)?)?, &cfg)?
        }
        DepthKind::Glm => sap(&maybe_normalize(model_influences(Model::Glm, &d, &point, a.family)?)?, &cfg)?,
        DepthKind::Covariance => {
            let y = responses(&d);
            let m = y.ncols();
            let sigma = matrix_from(&point, m, m, "the covariance point")?;
            sap(&maybe_normalize(covariance_influences(&y, &sigma)?)?, &cfg)?
        }
        DepthKind::Subspace => {
            let inf = maybe_normalize(model_influences(a.model, &d, &point, a.family)?)?;
            let phi = PhiFunction::new(cfg.phi);
            subspace_solve(&inf, &phi, a.r, &cfg)?
        }
        DepthKind::Triangle => {
            if a.normalize {
                return Err(CliError::Usage("--normalize does not apply to triangle depth".into()));
            }
            let z = responses(&d);
            let mu = matrix_from(&point, z.ncols(), 1, "the location point")?;
            triangle_depth(&z, &DVector::from_column_slice(mu.as_slice()), &cfg)?
        }
    };
    write_trace(a.output.trace.as_deref(), &res)?;
    let out = DepthOutput::new(&res, ConfigEcho::new(&name, &cfg, a.normalize), a.output.timing);
    write_out(a.output.out.as_deref(), &depth_text(&out, a.output.format.unwrap_or(Format::Json)))
}

fn run_deepest(a: &DeepestArgs) -> CliResult<()> {
    let mut cfg = a.solver.config()?;
    cfg.record_trace = a.output.trace.is_some();
    let problem = problem_of(a.model, a.data.load()?, a.family)?;
    let (p, m) = problem.shape();
    let start = match &a.point {
        Some(s) => Some(matrix_from(&parse_values(s)?, p, m, "the starting point")?),
        None => None,
    };
    let region = match (&a.lower, &a.upper) {
        (Some(l), Some(u)) => ConstraintRegion::Box {
            lower: matrix_from(&parse_values(l)?, p, m, "--lower")?,
            upper: matrix_from(&parse_values(u)?, p, m, "--upper")?,
        },
        _ => ConstraintRegion::Unrestricted,
    };
    let opts = CompositeOptions { max_outer: a.max_outer, start };
    let res = composite_depth(&problem, &region, &cfg, &opts)?;
    write_trace(a.output.trace.as_deref(), &res.depth)?;
    let name = format!("deepest-{:?}", a.model).to_lowercase();
    let out = DeepestOutput {
        b: (0..p).flat_map(|i| (0..m).map(move |k| (i, k))).map(|(i, k)| res.b[(i, k)]).collect(),
        b_shape: [p, m],
        exact_count: res.exact_count,
        outer_iterations: res.outer_iterations,
        depth: DepthOutput::new(&res.depth, ConfigEcho::new(&name, &cfg, false), a.output.timing),
    };
    write_out(a.output.out.as_deref(), &deepest_text(&out, a.output.format.unwrap_or(Format::Json)))
}

fn run_oracle(a: &OracleArgs) -> CliResult<()> {
    let d = a.data.load()?;
    let inf = model_influences(a.model, &d, &parse_values(&a.point)?, a.family)?.to_explicit();
    let count = match inf.dim() {
        1 => exact_depth_1d(&inf, a.convention)?,
        2 => exact_depth_2d(&inf, a.convention)?,
        3 => exact_depth_3d(&inf, a.convention)?,
        k => return Err(CliError::Data(format!("exact depth is available up to dimension 3, got {k}"))),
    };
    let out = OracleOutput {
        depth_count: count,
        depth_fraction: count / inf.n() as f64,
        dim: inf.dim(),
        convention: a.convention.name().to_string(),
    };
    write_out(a.out.as_deref(), &oracle_text(&out, a.format.unwrap_or(Format::Json)))
}

fn run_curve(a: &CurveArgs) -> CliResult<()> {
    let z = responses(&a.data.load()?);
    if z.ncols() != 1 {
        return Err(CliError::Data(format!("curve needs one data column, got {}", z.ncols())));
    }
    let (lo, hi, step) = parse_grid(&a.grid)?;
    let grid = make_grid(lo, hi, step).map_err(|e| CliError::Usage(e.to_string()))?;
    let phi = PhiFunction::new(a.phi).with_c(a.c);
    phi.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let form = if a.contrast { CurveForm::Contrast } else { CurveForm::OneSided };
    let pts: Vec<CurvePoint> = grid_depth_curve(z.as_slice(), &phi, &grid, form)
        .into_iter()
        .map(|(mu, depth)| CurvePoint { mu, depth })
        .collect();
    write_out(a.out.as_deref(), &curve_text(&pts, a.format.unwrap_or(Format::Csv)))
}

fn run_bench(a: &BenchArgs) -> CliResult<()> {
    let cfg = a.solver.config()?;
    let dims = match &a.dims {
        Some(s) => Some(parse_values(s)?.into_iter().map(|v| v as usize).collect::<Vec<_>>()),
        None => None,
    };
    let mut lines = Vec::new();
    for case in a.preset.cases() {
        if dims.as_ref().is_some_and(|d| !d.contains(&case.dim)) {
            continue;
        }
        let (row, runs) = bench::run_case(a.preset, &case, a.runs, &cfg)?;
        if a.per_run {
            lines.extend(runs.iter().map(BenchLine::from));
        }
        lines.push(BenchLine::from(&row));
    }
    if lines.is_empty() {
        return Err(CliError::Usage("no preset case matches --dims".into()));
    }
    write_out(a.out.as_deref(), &bench_text(&lines, a.format.unwrap_or(Format::Csv)))
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Depth(a) => run_depth(a),
        Command::Deepest(a) => run_deepest(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Curve(a) => run_curve(a),
        Command::Bench(a) => run_bench(a),
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("depthkit: {e}");
            e.exit_code()
        }
    }
}
