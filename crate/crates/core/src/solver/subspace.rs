//! Subspace (r > 1) depth over column-orthonormal frames with the product
//! objective, and projected triangle depth over m×2 frames.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{dim_err, invalid, Result};
use crate::influence::triangle_objective;
use crate::linalg::{self, RANK_RTOL};
use crate::model::{evaluate_d01, DepthResult, Direction, InfluenceSet, SolverConfig};
use crate::phi::{PhiFamily, PhiFunction};
use crate::projections::project_stiefel;
use crate::solver::init::{init_directions, random_frames};
use crate::solver::objective::{Objective, ProductObjective, TriangleObjective};
use crate::solver::sap::{anneal, reduce_outcomes, with_threads, working_influences, StartOutcome};

/// Frames built from consecutive starting directions, completed with
/// coordinate vectors when the directions are dependent.
fn initial_frames(inf: &InfluenceSet, r: usize, cfg: &SolverConfig) -> Result<(Vec<DMatrix<f64>>, Vec<String>)> {
    let init = init_directions(inf, cfg.n_starts, cfg.seed)?;
    let dirs: Vec<DMatrix<f64>> = init
        .directions
        .iter()
        .map(|d| DMatrix::from_column_slice(inf.dim(), 1, d.matrix().as_slice()))
        .collect();
    let (p, m) = inf.shape();
    let k = dirs.len();
    let mut frames = Vec::with_capacity(k);
    for s in 0..k {
        let mut y = DMatrix::zeros(p * m, r);
        for c in 0..r {
            y.set_column(c, &dirs[(s + c) % k].column(0));
        }
        let mut extra = 0;
        let frame = loop {
            match project_stiefel(&y, inf.space(), p, m) {
                Ok(f) => break Some(f.into_matrix()),
                Err(_) if extra < p * m => {
                    let col = 1 + extra % (r - 1).max(1);
                    let mut e = DVector::zeros(p * m);
                    e[extra] = 1.0;
                    let cur = y.column(col.min(r - 1)).into_owned();
                    y.set_column(col.min(r - 1), &(cur + e));
                    extra += 1;
                }
                Err(_) => break None,
            }
        };
        if let Some(f) = frame {
            frames.push(f);
        }
    }
    if frames.is_empty() {
        return invalid("could not build any feasible starting frame");
    }
    Ok((frames, init.warnings))
}

/// Lowest product-indicator count over column sign flips of `v`.
fn best_sign_flip(inf: &InfluenceSet, v: &DMatrix<f64>, cfg: &SolverConfig) -> Result<(DMatrix<f64>, f64)> {
    let r = v.ncols();
    let masks: Vec<u32> = if r <= 8 { (0..1u32 << r).collect() } else { vec![0, (1u32 << r.min(31)) - 1] };
    let mut best: Option<(DMatrix<f64>, f64)> = None;
    for mask in masks {
        let mut cand = v.clone();
        for s in 0..r {
            if mask & (1 << s) != 0 {
                cand.column_mut(s).neg_mut();
            }
        }
        let count = evaluate_d01(inf, &Direction::from_parts_unchecked(cand.clone(), r), cfg.sign_convention)?;
        if best.as_ref().map_or(true, |b| count < b.1) {
            best = Some((cand, count));
        }
    }
    Ok(best.expect("at least one mask"))
}

/// Polished subspace depth with frames of width `r`.
pub fn subspace_solve(inf: &InfluenceSet, phi: &PhiFunction, r: usize, cfg: &SolverConfig) -> Result<DepthResult> {
    cfg.validate()?;
    if !phi.is_smooth() {
        return invalid(format!("subspace annealing needs a smooth φ, got {}", phi.family));
    }
    if r == 0 {
        return invalid("subspace dimension must be at least 1");
    }
    let rank = linalg::numerical_rank(&linalg::thin_svd(&inf.explicit_matrix()).s, RANK_RTOL);
    if r > rank {
        return invalid(format!("subspace dimension {r} exceeds the influence rank {rank}"));
    }
    let clock = Instant::now();
    let (frames, mut warnings) = initial_frames(inf, r, cfg)?;
    let work = working_influences(inf, cfg);
    let base = ProductObjective::new(&work, *phi);
    let zmax = *cfg.zeta_schedule().last().expect("non-empty schedule");
    let outcomes: Vec<Result<StartOutcome>> = with_threads(cfg.threads, || {
        frames
            .par_iter()
            .enumerate()
            .map(|(k, v0)| {
                let (v, _, iterations, trace) =
                    anneal(|z| base.with_phi(phi.with_zeta(z)), v0, cfg, k)?;
                let (v, count) = best_sign_flip(inf, &v, cfg)?;
                let smooth = base.with_phi(phi.with_zeta(zmax)).value(&v);
                Ok(StartOutcome { index: k, direction: v, count, smooth, iterations, trace })
            })
            .collect()
    })?;
    let failed = outcomes.iter().filter(|o| o.is_err()).count();
    if failed > 0 && failed < outcomes.len() {
        warnings.push(format!("{failed} of {} starts failed", outcomes.len()));
    }
    let (best, used, iterations, trace) = reduce_outcomes(outcomes)?;
    Ok(DepthResult {
        d01_count: best.count,
        d01_fraction: DepthResult::fraction(best.count, inf.n()),
        smooth_objective: best.smooth,
        direction: Direction::from_parts_unchecked(best.direction, r),
        iterations,
        starts_used: used,
        wall_time_s: clock.elapsed().as_secs_f64(),
        warnings,
        trace: cfg.record_trace.then_some(trace),
    })
}

/// Projected triangle depth of `μ°`: the smallest number of data triangles
/// containing it over all orthonormal 2D projections found by annealing.
///
/// The fraction is relative to the number of triples C(n, 3).
pub fn triangle_depth(z: &DMatrix<f64>, mu: &DVector<f64>, cfg: &SolverConfig) -> Result<DepthResult> {
    cfg.validate()?;
    if !cfg.phi.is_smooth() {
        return invalid(format!("triangle annealing needs a smooth φ, got {}", cfg.phi));
    }
    let m = z.ncols();
    if mu.len() != m {
        return dim_err(format!("point has {} coordinates, data has {m}", mu.len()));
    }
    if m < 2 {
        return dim_err("projected triangle depth needs at least two coordinates");
    }
    let n = z.nrows();
    if n < 3 {
        return invalid("projected triangle depth needs at least three observations");
    }
    let clock = Instant::now();
    let ind = PhiFunction::new(PhiFamily::Indicator01);
    let mut starts = vec![DMatrix::identity(m, 2)];
    starts.extend(random_frames(m, 2, cfg.n_starts, cfg.seed));
    let mut warnings = Vec::new();
    let outcomes: Vec<Result<StartOutcome>> = with_threads(cfg.threads, || {
        starts
            .par_iter()
            .enumerate()
            .map(|(k, v0)| {
                let (v, f, iterations, trace) = if m == 2 {
                    // Every 2D frame is a rotation or reflection: barycentrics do not change.
                    (v0.clone(), 0.0, 0, Default::default())
                } else {
                    anneal(|zeta| TriangleObjective::new(z, mu, cfg.phi_at(zeta)).expect("checked shapes"), v0, cfg, k)?
                };
                let count = triangle_objective(z, mu, &ind, &v)?.value;
                Ok(StartOutcome { index: k, direction: v, count, smooth: f, iterations, trace })
            })
            .collect()
    })?;
    let (best, used, iterations, trace) = reduce_outcomes(outcomes)?;
    let deg = triangle_objective(z, mu, &ind, &best.direction)?.degenerate_triples;
    if deg > 0 {
        warnings.push(format!("{deg} degenerate triples skipped at the reported projection"));
    }
    let triples = (n * (n - 1) * (n - 2) / 6) as f64;
    Ok(DepthResult {
        d01_count: best.count,
        d01_fraction: best.count / triples,
        smooth_objective: best.smooth,
        direction: Direction::from_parts_unchecked(best.direction, 2),
        iterations,
        starts_used: used,
        wall_time_s: clock.elapsed().as_secs_f64(),
        warnings,
        trace: cfg.record_trace.then_some(trace),
    })
}
