//! Synthetic experiment presets for location and regression depth.

use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal, Uniform};
use serde::Serialize;

use crate::error::{invalid, DepthError, Result};
use crate::influence::{location_influences, regression_influences};
use crate::model::{InfluenceSet, SolverConfig};
use crate::solver::sap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Location, n = 100, standard normal data, μ° = 0.1·1.
    T1,
    /// Location, n = 1000, otherwise as `T1`.
    T2,
    /// Location, n = 500, m = 50, U(−3, 3) data, three choices of μ°.
    T3,
    /// Regression, n = 1000, intercept, β* = 1, β° = 0, Gaussian noise.
    T4Gauss,
    /// As `T4Gauss` with standard Cauchy noise.
    T4Cauchy,
}

impl FromStr for Preset {
    type Err = DepthError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t1" => Ok(Preset::T1),
            "t2" => Ok(Preset::T2),
            "t3" => Ok(Preset::T3),
            "t4-gauss" => Ok(Preset::T4Gauss),
            "t4-cauchy" => Ok(Preset::T4Cauchy),
            other => invalid(format!("unknown preset '{other}' (t1, t2, t3, t4-gauss, t4-cauchy)")),
        }
    }
}

/// How μ° is drawn in setting 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterDraw {
    Zero,
    Normal,
    Uniform,
}

impl CenterDraw {
    fn label(self) -> &'static str {
        match self {
            CenterDraw::Zero => "mu=0",
            CenterDraw::Normal => "mu~N(0,0.01)",
            CenterDraw::Uniform => "mu~U(-0.5,0.5)",
        }
    }
}

/// One generated problem.
#[derive(Debug, Clone)]
pub struct Case {
    pub setting: String,
    pub dim: usize,
    pub variant: Option<CenterDraw>,
}

impl Preset {
    pub fn cases(self) -> Vec<Case> {
        let name = match self {
            Preset::T1 => "t1",
            Preset::T2 => "t2",
            Preset::T3 => "t3",
            Preset::T4Gauss => "t4-gauss",
            Preset::T4Cauchy => "t4-cauchy",
        };
        match self {
            Preset::T3 => [CenterDraw::Zero, CenterDraw::Normal, CenterDraw::Uniform]
                .into_iter()
                .map(|c| Case { setting: format!("{name}:{}", c.label()), dim: 50, variant: Some(c) })
                .collect(),
            _ => [10, 20, 30, 40]
                .into_iter()
                .map(|d| Case { setting: name.to_string(), dim: d, variant: None })
                .collect(),
        }
    }
}

fn normal_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Location data `n × m` with i.i.d. N(0, 1) entries and μ° = 0.1·1.
pub fn location_normal(n: usize, m: usize, seed: u64) -> Result<InfluenceSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = normal_matrix(&mut rng, n, m);
    location_influences(&z, &DVector::from_element(m, 0.1))
}

/// Location data `n × m` with i.i.d. U(−3, 3) entries and a drawn μ°.
pub fn location_uniform(n: usize, m: usize, center: CenterDraw, seed: u64) -> Result<InfluenceSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Uniform::new(-3.0, 3.0).expect("valid range");
    let z = DMatrix::from_fn(n, m, |_, _| u.sample(&mut rng));
    let mu = match center {
        CenterDraw::Zero => DVector::zeros(m),
        CenterDraw::Normal => DVector::from_fn(m, |_, _| 0.1 * rng.sample::<f64, _>(StandardNormal)),
        CenterDraw::Uniform => {
            let h = Uniform::new(-0.5, 0.5).expect("valid range");
            DVector::from_fn(m, |_, _| h.sample(&mut rng))
        }
    };
    location_influences(&z, &mu)
}

/// Regression data: intercept plus `p` standard normal predictors, all
/// coefficients 1, evaluated at β° = 0.
pub fn regression_data(n: usize, p: usize, cauchy: bool, seed: u64) -> Result<InfluenceSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::from_element(n, p + 1, 1.0);
    for i in 0..n {
        for j in 1..=p {
            x[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let beta_star = DVector::from_element(p + 1, 1.0);
    let c = Cauchy::new(0.0, 1.0).expect("valid scale");
    let eps = DVector::from_fn(n, |_, _| {
        if cauchy {
            c.sample(&mut rng)
        } else {
            rng.sample::<f64, _>(StandardNormal)
        }
    });
    let y = &x * beta_star + eps;
    regression_influences(&x, &y, &DVector::zeros(p + 1))
}

/// Influences of run `run` of a case.
pub fn generate(preset: Preset, case: &Case, run: u64, seed: u64) -> Result<InfluenceSet> {
    let s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(run);
    match preset {
        Preset::T1 => location_normal(100, case.dim, s),
        Preset::T2 => location_normal(1000, case.dim, s),
        Preset::T3 => location_uniform(500, case.dim, case.variant.unwrap_or(CenterDraw::Zero), s),
        Preset::T4Gauss => regression_data(1000, case.dim, false, s),
        Preset::T4Cauchy => regression_data(1000, case.dim, true, s),
    }
}

/// Averages over the runs of one case.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub setting: String,
    pub dim: usize,
    pub mean_time_s: f64,
    pub mean_depth: f64,
    pub runs: usize,
}

/// Per-run values of one case.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRun {
    pub setting: String,
    pub dim: usize,
    pub run: usize,
    pub time_s: f64,
    pub depth: f64,
}

/// Runs `runs` seeded instances of one case with SAP.
pub fn run_case(preset: Preset, case: &Case, runs: usize, cfg: &SolverConfig) -> Result<(BenchRow, Vec<BenchRun>)> {
    if runs == 0 {
        return invalid("need at least one run");
    }
    let mut per = Vec::with_capacity(runs);
    for r in 0..runs {
        let inf = generate(preset, case, r as u64, cfg.seed)?;
        let mut run_cfg = cfg.clone();
        run_cfg.seed = cfg.seed.wrapping_add(r as u64);
        let clock = Instant::now();
        let res = sap(&inf, &run_cfg)?;
        per.push(BenchRun {
            setting: case.setting.clone(),
            dim: case.dim,
            run: r,
            time_s: clock.elapsed().as_secs_f64(),
            depth: res.d01_fraction,
        });
    }
    let k = runs as f64;
    let row = BenchRow {
        setting: case.setting.clone(),
        dim: case.dim,
        mean_time_s: per.iter().map(|r| r.time_s).sum::<f64>() / k,
        mean_depth: per.iter().map(|r| r.depth).sum::<f64>() / k,
        runs,
    };
    Ok((row, per))
}

/// The 1D two-cluster sample: 0.5·N(−3, 1/16) + 0.5·N(3, 1/4).
pub fn bimodal_sample(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            if rng.random_bool(0.5) {
                -3.0 + 0.25 * z
            } else {
                3.0 + 0.5 * z
            }
        })
        .collect()
}
