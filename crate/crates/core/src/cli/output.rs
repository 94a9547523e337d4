//! Result records and their JSON/CSV encodings.

use serde::Serialize;

use crate::bench::{BenchRow, BenchRun};
use crate::model::{DepthResult, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub problem: String,
    pub phi: String,
    pub zeta_start: f64,
    pub zeta_max: f64,
    pub alpha: f64,
    pub rho_min: f64,
    pub beta: f64,
    pub max_searches: usize,
    pub tol_obj: f64,
    pub tol_grad: f64,
    pub max_iter: usize,
    pub starts: usize,
    pub seed: u64,
    pub convention: String,
    pub auto_scale: bool,
    pub normalize: bool,
}

impl ConfigEcho {
    pub fn new(problem: &str, cfg: &SolverConfig, normalize: bool) -> Self {
        ConfigEcho {
            problem: problem.to_string(),
            phi: cfg.phi.name().to_string(),
            zeta_start: cfg.zeta_start,
            zeta_max: cfg.zeta_max,
            alpha: cfg.zeta_factor,
            rho_min: cfg.rho_min,
            beta: cfg.beta,
            max_searches: cfg.max_searches,
            tol_obj: cfg.tol_obj,
            tol_grad: cfg.tol_grad_maxnorm,
            max_iter: cfg.max_iter,
            starts: cfg.n_starts,
            seed: cfg.seed,
            convention: cfg.sign_convention.name().to_string(),
            auto_scale: cfg.auto_scale,
            normalize,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DepthOutput {
    pub depth_count: f64,
    pub depth_fraction: f64,
    /// Row-major entries of the minimizing direction.
    pub direction: Vec<f64>,
    pub direction_shape: [usize; 2],
    pub smooth_objective: f64,
    pub iterations: usize,
    pub starts: usize,
    /// Present only with `--timing`, so that default output is reproducible.
    pub wall_time_s: Option<f64>,
    pub config_echo: ConfigEcho,
    pub warnings: Vec<String>,
}

impl DepthOutput {
    pub fn new(res: &DepthResult, echo: ConfigEcho, timing: bool) -> Self {
        let (r, c) = res.direction.matrix().shape();
        DepthOutput {
            depth_count: res.d01_count,
            depth_fraction: res.d01_fraction,
            direction: res.direction.row_major(),
            direction_shape: [r, c],
            smooth_objective: res.smooth_objective,
            iterations: res.iterations,
            starts: res.starts_used,
            wall_time_s: timing.then_some(res.wall_time_s),
            config_echo: echo,
            warnings: res.warnings.clone(),
        }
    }

    fn csv_fields(&self) -> (Vec<String>, Vec<String>) {
        let mut head: Vec<String> = [
            "depth_count",
            "depth_fraction",
            "smooth_objective",
            "iterations",
            "starts",
            "wall_time_s",
            "warnings",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let mut row = vec![
            self.depth_count.to_string(),
            self.depth_fraction.to_string(),
            self.smooth_objective.to_string(),
            self.iterations.to_string(),
            self.starts.to_string(),
            self.wall_time_s.map(|t| t.to_string()).unwrap_or_default(),
            self.warnings.join("; "),
        ];
        for (k, v) in self.direction.iter().enumerate() {
            head.push(format!("v{}", k + 1));
            row.push(v.to_string());
        }
        (head, row)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeepestOutput {
    /// Row-major entries of the deepest parameter found.
    pub b: Vec<f64>,
    pub b_shape: [usize; 2],
    pub exact_count: Option<f64>,
    pub outer_iterations: usize,
    #[serde(flatten)]
    pub depth: DepthOutput,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleOutput {
    pub depth_count: f64,
    pub depth_fraction: f64,
    pub dim: usize,
    pub convention: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub mu: f64,
    pub depth: f64,
}

/// One bench line; `run` is the run index, or `mean` for the average.
#[derive(Debug, Clone, Serialize)]
pub struct BenchLine {
    pub setting: String,
    pub dim: usize,
    pub run: String,
    pub mean_time_s: f64,
    pub mean_depth: f64,
}

impl From<&BenchRow> for BenchLine {
    fn from(r: &BenchRow) -> Self {
        BenchLine {
            setting: r.setting.clone(),
            dim: r.dim,
            run: "mean".into(),
            mean_time_s: r.mean_time_s,
            mean_depth: r.mean_depth,
        }
    }
}

impl From<&BenchRun> for BenchLine {
    fn from(r: &BenchRun) -> Self {
        BenchLine {
            setting: r.setting.clone(),
            dim: r.dim,
            run: r.run.to_string(),
            mean_time_s: r.time_s,
            mean_depth: r.depth,
        }
    }
}

fn csv_string(head: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(head).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn json_string<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

pub fn depth_text(o: &DepthOutput, f: Format) -> String {
    match f {
        Format::Json => json_string(o),
        Format::Csv => {
            let (h, r) = o.csv_fields();
            csv_string(&h, &[r])
        }
    }
}

pub fn deepest_text(o: &DeepestOutput, f: Format) -> String {
    match f {
        Format::Json => json_string(o),
        Format::Csv => {
            let (mut h, mut r) = o.depth.csv_fields();
            h.push("exact_count".into());
            r.push(o.exact_count.map(|c| c.to_string()).unwrap_or_default());
            h.push("outer_iterations".into());
            r.push(o.outer_iterations.to_string());
            for (k, v) in o.b.iter().enumerate() {
                h.push(format!("b{}", k + 1));
                r.push(v.to_string());
            }
            csv_string(&h, &[r])
        }
    }
}

pub fn oracle_text(o: &OracleOutput, f: Format) -> String {
    match f {
        Format::Json => json_string(o),
        Format::Csv => csv_string(
            &["depth_count", "depth_fraction", "dim", "convention"].map(String::from),
            &[vec![
                o.depth_count.to_string(),
                o.depth_fraction.to_string(),
                o.dim.to_string(),
                o.convention.clone(),
            ]],
        ),
    }
}

pub fn curve_text(points: &[CurvePoint], f: Format) -> String {
    match f {
        Format::Json => json_string(&points),
        Format::Csv => csv_string(
            &["mu", "depth"].map(String::from),
            &points.iter().map(|p| vec![p.mu.to_string(), p.depth.to_string()]).collect::<Vec<_>>(),
        ),
    }
}

pub fn bench_text(lines: &[BenchLine], f: Format) -> String {
    match f {
        Format::Json => json_string(&lines),
        Format::Csv => csv_string(
            &["setting", "dim", "run", "mean_time_s", "mean_depth"].map(String::from),
            &lines
                .iter()
                .map(|l| {
                    vec![
                        l.setting.clone(),
                        l.dim.to_string(),
                        l.run.clone(),
                        l.mean_time_s.to_string(),
                        l.mean_depth.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    }
}
