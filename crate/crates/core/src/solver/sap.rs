//! Successive accelerated projection: anneal a sigmoid φ_ζ over a growing ζ
//! schedule from several starts and keep the lowest 0-1 count.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, DepthError, Result};
use crate::model::{evaluate_d01, DepthResult, Direction, InfluenceSet, Representation, SolverConfig};
use crate::solver::accelerated::{accelerate_with, AccelParams};
use crate::solver::init::init_directions;
use crate::solver::objective::{Objective, PhiObjective};
use crate::solver::trace::SolverTrace;

/// Typical influence magnitude: the median of `‖T_i‖_F/√(pm)`.
pub fn influence_scale(inf: &InfluenceSet) -> f64 {
    let d = (inf.dim() as f64).sqrt();
    let mut norms: Vec<f64> = match inf.representation() {
        Representation::Factored { x, r } => (0..inf.n())
            .map(|i| x.row(i).norm() * r.row(i).norm() / d)
            .collect(),
        Representation::Explicit { t } => t.row_iter().map(|row| row.norm() / d).collect(),
    };
    norms.sort_by(f64::total_cmp);
    let k = norms.len();
    let med = if k % 2 == 1 {
        norms[k / 2]
    } else {
        0.5 * (norms[k / 2 - 1] + norms[k / 2])
    };
    if med > 0.0 && med.is_finite() {
        med
    } else {
        let max = norms.last().copied().unwrap_or(0.0);
        if max > 0.0 {
            max
        } else {
            1.0
        }
    }
}

/// Influences as seen by the annealing stages (rescaled when configured).
pub(crate) fn working_influences(inf: &InfluenceSet, cfg: &SolverConfig) -> InfluenceSet {
    if cfg.auto_scale {
        inf.scaled(1.0 / influence_scale(inf))
    } else {
        inf.clone()
    }
}

/// Outcome of annealing from one start.
#[derive(Debug, Clone)]
pub struct StartOutcome {
    pub index: usize,
    pub direction: DMatrix<f64>,
    pub count: f64,
    pub smooth: f64,
    pub iterations: usize,
    pub trace: SolverTrace,
}

/// Runs every ζ stage from `v0`, warm-starting each stage at the previous result.
pub fn anneal<F, O>(
    make: F,
    v0: &DMatrix<f64>,
    cfg: &SolverConfig,
    start: usize,
) -> Result<(DMatrix<f64>, f64, usize, SolverTrace)>
where
    F: Fn(f64) -> O,
    O: Objective,
{
    anneal_with(make, v0, cfg, start, &mut |_, _| {})
}

/// [`anneal`], passing every accepted iterate and each stage's result to
/// `visit` (with the linear image when available).
pub(crate) fn anneal_with<F, O>(
    make: F,
    v0: &DMatrix<f64>,
    cfg: &SolverConfig,
    start: usize,
    visit: &mut dyn FnMut(&DMatrix<f64>, Option<&DVector<f64>>),
) -> Result<(DMatrix<f64>, f64, usize, SolverTrace)>
where
    F: Fn(f64) -> O,
    O: Objective,
{
    let mut v = v0.clone();
    let mut f = f64::NAN;
    let mut iterations = 0;
    let mut trace = SolverTrace::default();
    let mut params = AccelParams::from_config(cfg);
    params.start = start;
    for (stage, zeta) in cfg.zeta_schedule().into_iter().enumerate() {
        params.stage = stage;
        params.zeta = zeta;
        let obj = make(zeta);
        let (next, fv, tr) = accelerate_with(&obj, &v, &params, visit)?;
        iterations += tr.records.len();
        if cfg.record_trace {
            trace.extend(&tr);
        }
        visit(&next, obj.image(&next).as_ref());
        v = next;
        f = fv;
    }
    Ok((v, f, iterations, trace))
}

fn run_start(
    inf: &InfluenceSet,
    work: &InfluenceSet,
    cfg: &SolverConfig,
    index: usize,
    v0: &Direction,
) -> Result<StartOutcome> {
    // Every accepted iterate is a candidate direction; signs of the working
    // projections equal those of the original ones, so counts come from the
    // cached images and only the winner is re-evaluated exactly.
    let conv = cfg.sign_convention;
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    let mut consider = |v: &DMatrix<f64>, image: Option<&DVector<f64>>| {
        let owned;
        let a = match image {
            Some(a) => a,
            None => {
                owned = work.projections_unchecked(v);
                &owned
            }
        };
        let cp: f64 = a.iter().map(|&t| conv.indicator(t)).sum();
        let cn: f64 = a.iter().map(|&t| conv.indicator(-t)).sum();
        let (c, d) = if cn < cp { (cn, -v) } else { (cp, v.clone()) };
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, d));
        }
    };
    let (last, _, iterations, trace) = anneal_with(
        |z| PhiObjective::new(work, cfg.phi_at(z)),
        v0.matrix(),
        cfg,
        index,
        &mut consider,
    )?;
    let candidate = best.map(|(_, d)| d).unwrap_or(last);
    let pos = Direction::from_parts_unchecked(candidate, 1);
    let neg = pos.negated();
    let cp = evaluate_d01(inf, &pos, conv)?;
    let cn = evaluate_d01(inf, &neg, conv)?;
    let (count, chosen) = if cn < cp { (cn, neg) } else { (cp, pos) };
    let zmax = *cfg.zeta_schedule().last().expect("non-empty schedule");
    let smooth = PhiObjective::new(work, cfg.phi_at(zmax)).value(chosen.matrix());
    Ok(StartOutcome {
        index,
        direction: chosen.into_matrix(),
        count,
        smooth,
        iterations,
        trace,
    })
}

/// Runs `f` inside a pool of `threads` workers, or the global pool.
pub(crate) fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| DepthError::Numeric(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Picks the best outcome by (count, smooth objective, start index).
pub(crate) fn reduce_outcomes(
    outcomes: Vec<Result<StartOutcome>>,
) -> Result<(StartOutcome, usize, usize, SolverTrace)> {
    let attempted = outcomes.len();
    let mut first_err = None;
    let mut best: Option<StartOutcome> = None;
    let mut total_iters = 0;
    let mut trace = SolverTrace::default();
    let mut used = 0;
    for out in outcomes {
        match out {
            Ok(o) => {
                used += 1;
                total_iters += o.iterations;
                trace.records.extend(o.trace.records.iter().cloned());
                let better = match &best {
                    None => true,
                    Some(b) => (o.count, o.smooth, o.index)
                        .partial_cmp(&(b.count, b.smooth, b.index))
                        .map(|ord| ord.is_lt())
                        .unwrap_or(false),
                };
                if better {
                    best = Some(o);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(b) => Ok((b, used, total_iters, trace)),
        None => Err(DepthError::AllStartsFailed {
            attempted,
            first: Box::new(first_err.unwrap_or(DepthError::Stall("no starts".into()))),
        }),
    }
}

/// SAP from explicitly supplied starting directions.
pub fn sap_with_starts(
    inf: &InfluenceSet,
    cfg: &SolverConfig,
    starts: &[Direction],
    mut warnings: Vec<String>,
) -> Result<DepthResult> {
    cfg.validate()?;
    if !cfg.phi.is_smooth() {
        return invalid(format!("SAP needs a smooth φ family, got {}", cfg.phi));
    }
    if starts.is_empty() {
        return invalid("no starting directions");
    }
    let clock = Instant::now();
    let work = working_influences(inf, cfg);
    let outcomes: Vec<Result<StartOutcome>> = with_threads(cfg.threads, || {
        starts
            .par_iter()
            .enumerate()
            .map(|(k, v0)| run_start(inf, &work, cfg, k, v0))
            .collect()
    })?;
    let failed = outcomes.iter().filter(|o| o.is_err()).count();
    if failed > 0 && failed < outcomes.len() {
        warnings.push(format!("{failed} of {} starts failed", outcomes.len()));
    }
    let (best, used, iterations, trace) = reduce_outcomes(outcomes)?;
    let n = inf.n();
    Ok(DepthResult {
        d01_count: best.count,
        d01_fraction: DepthResult::fraction(best.count, n),
        smooth_objective: best.smooth,
        direction: Direction::from_parts_unchecked(best.direction, 1),
        iterations,
        starts_used: used,
        wall_time_s: clock.elapsed().as_secs_f64(),
        warnings,
        trace: cfg.record_trace.then_some(trace),
    })
}

/// Successive accelerated projection with the default starting directions.
pub fn sap(inf: &InfluenceSet, cfg: &SolverConfig) -> Result<DepthResult> {
    cfg.validate()?;
    let init = init_directions(inf, cfg.n_starts, cfg.seed)?;
    sap_with_starts(inf, cfg, &init.directions, init.warnings)
}
