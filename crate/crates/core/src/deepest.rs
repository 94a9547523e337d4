//! Composite depth `max_{B ∈ Ω₀} d(B)` by alternating an inner depth solve
//! with Armijo gradient ascent on `B` along the Danskin direction.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{dim_err, invalid, DepthError, Result};
use crate::influence::{glm_influences, GlmFamily};
use crate::linalg::{self, unvec, vec_of, RANK_RTOL};
use crate::model::{evaluate_d01, Dataset, DepthResult, Direction, InfluenceSet, SolverConfig};
use crate::oracle::{exact_depth_1d, exact_depth_2d, exact_depth_3d};
use crate::phi::PhiFunction;
use crate::solver::accelerated::{accelerate, AccelParams};
use crate::solver::objective::{Objective, PhiObjective};
use crate::solver::sap::{influence_scale, sap};

/// Sufficient-increase constant of the Armijo search.
pub const ARMIJO_C: f64 = 1e-4;
/// Maximum step halvings per outer iteration.
pub const MAX_HALVINGS: usize = 50;
/// Outer loop stops once the accepted step is shorter than this.
pub const STEP_TOL: f64 = 1e-6;

/// A location, regression or GLM depth problem: `R(B) = b′(XB) − Y`.
#[derive(Debug, Clone)]
pub struct DepthProblem {
    pub data: Dataset,
    pub family: GlmFamily,
}

impl DepthProblem {
    pub fn location(z: DMatrix<f64>) -> Result<Self> {
        Ok(DepthProblem {
            data: Dataset::location(z)?,
            family: GlmFamily::Gaussian,
        })
    }

    pub fn regression(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let n = y.len();
        Ok(DepthProblem {
            data: Dataset::new(x, DMatrix::from_column_slice(n, 1, y.as_slice()))?,
            family: GlmFamily::Gaussian,
        })
    }

    pub fn glm(data: Dataset, family: GlmFamily) -> Self {
        DepthProblem { data, family }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.data.p(), self.data.m())
    }

    pub fn influences(&self, b: &DMatrix<f64>) -> Result<InfluenceSet> {
        glm_influences(self.data.x(), self.data.y(), b, self.family)
    }

    /// Least-squares fit of `Y` on `X`; the coordinate mean for location data.
    pub fn default_start(&self) -> DMatrix<f64> {
        linalg::pinv(self.data.x()) * self.data.y()
    }
}

/// Feasible region Ω₀ for `B`.
#[derive(Debug, Clone)]
pub enum ConstraintRegion {
    Unrestricted,
    Box { lower: DMatrix<f64>, upper: DMatrix<f64> },
    /// `{B : A vec(B) = b}`.
    AffineSubspace { a: DMatrix<f64>, b: DVector<f64> },
}

impl ConstraintRegion {
    pub fn validate(&self, p: usize, m: usize) -> Result<()> {
        match self {
            ConstraintRegion::Unrestricted => Ok(()),
            ConstraintRegion::Box { lower, upper } => {
                if lower.shape() != (p, m) || upper.shape() != (p, m) {
                    return dim_err(format!("box bounds must be {p}×{m}"));
                }
                if lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
                    return invalid("box lower bound exceeds upper bound");
                }
                Ok(())
            }
            ConstraintRegion::AffineSubspace { a, b } => {
                if a.ncols() != p * m || a.nrows() != b.len() {
                    return dim_err(format!("affine constraint must act on vectors of length {}", p * m));
                }
                let rank = linalg::numerical_rank(&linalg::thin_svd(a).s, RANK_RTOL);
                if rank < a.nrows() {
                    return invalid("affine constraint rows are linearly dependent");
                }
                Ok(())
            }
        }
    }

    pub fn project(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            ConstraintRegion::Unrestricted => b.clone(),
            ConstraintRegion::Box { lower, upper } => {
                DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)].clamp(lower[(i, j)], upper[(i, j)]))
            }
            ConstraintRegion::AffineSubspace { a, b: rhs } => {
                let x = vec_of(b);
                let fixed = &x - linalg::pinv(a) * (a * &x - rhs);
                unvec(fixed.as_slice(), b.nrows(), b.ncols())
            }
        }
    }

    pub fn is_singleton(&self, p: usize, m: usize) -> bool {
        match self {
            ConstraintRegion::Unrestricted => false,
            ConstraintRegion::Box { lower, upper } => lower == upper,
            ConstraintRegion::AffineSubspace { a, .. } => a.nrows() >= p * m,
        }
    }
}

/// `∇_B f(B, V) = Xᵀ[R′(Θ) ∘ (diag(φ′(XVRᵀ)) X V)]` with `Θ = XB`.
pub fn danskin_grad(problem: &DepthProblem, b: &DMatrix<f64>, v: &DMatrix<f64>, phi: &PhiFunction) -> Result<DMatrix<f64>> {
    if !phi.is_smooth() {
        return invalid(format!("Danskin gradient needs a smooth φ, got {}", phi.family));
    }
    danskin_grad_scaled(problem, b, v, phi, 1.0)
}

/// Gradient of `Σ_i φ(⟨V, T_i(B)⟩/scale)` in `B`.
fn danskin_grad_scaled(
    problem: &DepthProblem,
    b: &DMatrix<f64>,
    v: &DMatrix<f64>,
    phi: &PhiFunction,
    scale: f64,
) -> Result<DMatrix<f64>> {
    let (p, m) = problem.shape();
    if b.shape() != (p, m) || v.shape() != (p, m) {
        return dim_err(format!("B and V must both be {p}×{m}"));
    }
    let x = problem.data.x();
    let inf = problem.influences(b)?;
    let proj = inf.projections(v)? / scale;
    let theta = x * b;
    let xv = x * v;
    let n = x.nrows();
    let inner = DMatrix::from_fn(n, m, |i, k| {
        problem.family.variance(theta[(i, k)]) * phi.grad(proj[i]) * xv[(i, k)] / scale
    });
    Ok(x.transpose() * inner)
}

/// One accepted outer step.
#[derive(Debug, Clone, Serialize)]
pub struct OuterRecord {
    pub t: usize,
    /// Smooth inner objective `min_V f(B, V)` at the accepted `B`.
    pub objective: f64,
    pub step: f64,
    pub halvings: usize,
    pub d01: f64,
}

#[derive(Debug, Clone)]
pub struct CompositeOptions {
    pub max_outer: usize,
    pub start: Option<DMatrix<f64>>,
}

impl Default for CompositeOptions {
    fn default() -> Self {
        CompositeOptions {
            max_outer: 100,
            start: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompositeResult {
    pub b: DMatrix<f64>,
    pub depth: DepthResult,
    /// Exact 0-1 count at `b` when the influence dimension is at most 3.
    pub exact_count: Option<f64>,
    pub outer_iterations: usize,
    pub trace: Vec<OuterRecord>,
    /// Objective-change tolerance of the inner solves.
    pub inner_tol_obj: f64,
}

fn exact_count(inf: &InfluenceSet, cfg: &SolverConfig) -> Option<f64> {
    let conv = cfg.sign_convention;
    let e = inf.to_explicit();
    match inf.dim() {
        1 => exact_depth_1d(&e, conv).ok(),
        2 => exact_depth_2d(&e, conv).ok(),
        3 if inf.n() <= crate::oracle::MAX_N_3D => exact_depth_3d(&e, conv).ok(),
        _ => None,
    }
}

fn count_at(inf: &InfluenceSet, v: &DMatrix<f64>, cfg: &SolverConfig) -> Result<f64> {
    if let Some(c) = exact_count(inf, cfg) {
        return Ok(c);
    }
    let d = Direction::from_parts_unchecked(v.clone(), 1);
    let a = evaluate_d01(inf, &d, cfg.sign_convention)?;
    let b = evaluate_d01(inf, &d.negated(), cfg.sign_convention)?;
    Ok(a.min(b))
}

/// Deepest `B` in `Ω₀` found by the nested max-min scheme. No global
/// optimality is claimed.
pub fn composite_depth(
    problem: &DepthProblem,
    region: &ConstraintRegion,
    cfg: &SolverConfig,
    opts: &CompositeOptions,
) -> Result<CompositeResult> {
    cfg.validate()?;
    if !cfg.phi.is_smooth() {
        return invalid(format!("composite depth needs a smooth φ, got {}", cfg.phi));
    }
    let (p, m) = problem.shape();
    region.validate(p, m)?;
    let b0 = match &opts.start {
        Some(b) if b.shape() != (p, m) => return dim_err(format!("start must be {p}×{m}")),
        Some(b) => b.clone(),
        None => problem.default_start(),
    };
    let mut b = region.project(&b0);
    let inf0 = problem.influences(&b)?;

    if region.is_singleton(p, m) {
        let depth = sap(&inf0, cfg)?;
        return Ok(CompositeResult {
            exact_count: exact_count(&inf0, cfg),
            b,
            depth,
            outer_iterations: 0,
            trace: Vec::new(),
            inner_tol_obj: cfg.tol_obj,
        });
    }

    let scale = if cfg.auto_scale { influence_scale(&inf0) } else { 1.0 };
    let zmax = *cfg.zeta_schedule().last().expect("non-empty schedule");
    let phi = cfg.phi_at(zmax);
    let mut params = AccelParams::from_config(cfg);
    params.zeta = zmax;
    let wrap = |e: DepthError, t: usize| match e {
        DepthError::Stall(s) => DepthError::Stall(format!("outer iteration {t}: {s}")),
        DepthError::Numeric(s) => DepthError::Numeric(format!("outer iteration {t}: {s}")),
        other => other,
    };

    // Inner solve at B: warm-started accelerated projection at the final ζ.
    let inner = |b: &DMatrix<f64>, v0: &DMatrix<f64>| -> Result<(DMatrix<f64>, f64, InfluenceSet)> {
        let inf = problem.influences(b)?;
        let work = inf.scaled(1.0 / scale);
        let (v, f, _) = accelerate(&PhiObjective::new(&work, phi), v0, &params)?;
        Ok((v, f, inf))
    };

    let start = sap(&inf0, cfg)?;
    let mut v = start.direction.matrix().clone();
    let (v1, mut g, _) = inner(&b, &v).map_err(|e| wrap(e, 0))?;
    let work0 = inf0.scaled(1.0 / scale);
    let f_start = PhiObjective::new(&work0, phi).value(&v);
    if f_start <= g {
        g = f_start;
    } else {
        v = v1;
    }
    let mut best_b = b.clone();
    let mut best_count = count_at(&inf0, &v, cfg)?.min(start.d01_count);
    let mut trace = vec![OuterRecord { t: 0, objective: g, step: 0.0, halvings: 0, d01: best_count }];
    let mut outer = 0;

    for t in 1..=opts.max_outer {
        outer = t;
        let grad = danskin_grad_scaled(problem, &b, &v, &phi, scale)?;
        if grad.amax() == 0.0 {
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for halvings in 0..=MAX_HALVINGS {
            let cand = region.project(&(&b + &grad * alpha));
            let delta = &cand - &b;
            if delta.norm() == 0.0 {
                break;
            }
            let (vc, gc, infc) = inner(&cand, &v).map_err(|e| wrap(e, t))?;
            if gc >= g + ARMIJO_C * linalg::frobenius_dot(&grad, &delta) {
                accepted = Some((cand, vc, gc, infc, delta.norm(), halvings));
                break;
            }
            alpha *= 0.5;
        }
        let Some((cand, vc, gc, infc, step, halvings)) = accepted else {
            break;
        };
        b = cand;
        v = vc;
        g = gc;
        let count = count_at(&infc, &v, cfg)?;
        if count > best_count {
            best_count = count;
            best_b = b.clone();
        }
        trace.push(OuterRecord { t, objective: g, step, halvings, d01: count });
        if step < STEP_TOL {
            break;
        }
    }

    let inf_best = problem.influences(&best_b)?;
    let depth = sap(&inf_best, cfg)?;
    Ok(CompositeResult {
        exact_count: exact_count(&inf_best, cfg),
        b: best_b,
        depth,
        outer_iterations: outer,
        trace,
        inner_tol_obj: cfg.tol_obj,
    })
}
