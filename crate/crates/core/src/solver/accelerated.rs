//! Accelerated projection with the three-sequence momentum update and the
//! `R_t ≥ 0` line search.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, DepthError, Result};
use crate::linalg::{frobenius_dot, max_abs};
use crate::model::{Direction, InfluenceSet, SolverConfig};
use crate::phi::PhiFunction;
use crate::solver::objective::{Objective, PhiObjective};
use crate::solver::trace::{AccelTrace, IterRecord, IterateRecord};

/// Line-search and termination parameters of one accelerated run.
#[derive(Debug, Clone)]
pub struct AccelParams {
    pub rho_min: f64,
    pub beta: f64,
    pub max_searches: usize,
    pub tol_obj: f64,
    pub tol_grad: f64,
    pub max_iter: usize,
    pub record_iterates: bool,
    /// Labels copied into the records.
    pub start: usize,
    pub stage: usize,
    pub zeta: f64,
}

impl AccelParams {
    pub fn from_config(cfg: &SolverConfig) -> Self {
        AccelParams {
            rho_min: cfg.rho_min,
            beta: cfg.beta,
            max_searches: cfg.max_searches,
            tol_obj: cfg.tol_obj,
            tol_grad: cfg.tol_grad_maxnorm,
            max_iter: cfg.max_iter,
            record_iterates: cfg.record_iterates,
            start: 0,
            stage: 0,
            zeta: 1.0,
        }
    }
}

/// `θ_t` solving `θ_t²/(1 − θ_t) = ρ_{t−1}θ_{t−1}²/ρ_t`.
pub fn next_theta(theta_prev: f64, rho_prev: f64, rho: f64) -> f64 {
    let a = rho_prev * theta_prev;
    (theta_prev * (a * a + 4.0 * rho * rho_prev).sqrt() - a * theta_prev) / (2.0 * rho)
}

/// Generalized Bregman value `f(β) − f(γ) − ⟨∇f(γ), β − γ⟩`.
pub fn bregman(f_beta: f64, f_gamma: f64, grad_gamma: &DMatrix<f64>, beta: &DMatrix<f64>, gamma: &DMatrix<f64>) -> f64 {
    f_beta - f_gamma - frobenius_dot(grad_gamma, &(beta - gamma))
}

/// `‖β − γ‖_F²/2`.
pub fn d2(beta: &DMatrix<f64>, gamma: &DMatrix<f64>) -> f64 {
    0.5 * (beta - gamma).norm_squared()
}

struct Trial {
    rho: f64,
    theta: f64,
    u: DMatrix<f64>,
    w_next: DMatrix<f64>,
    v_next: DMatrix<f64>,
    f_next: f64,
    r_t: f64,
    grad_maxnorm: f64,
    xi_norm: f64,
    images: Option<(DVector<f64>, DVector<f64>)>,
}

impl Trial {
    fn score(&self) -> f64 {
        self.r_t / (self.theta * self.theta * self.rho)
    }
}

/// Minimizes `obj` from the feasible starting point `w0`.
///
/// The `V` iterates are convex combinations of feasible points and may leave
/// the unit sphere; the returned point is the better (by objective) of the
/// projected final `V` and the final `W`, both feasible.
pub fn accelerate<O: Objective + ?Sized>(
    obj: &O,
    w0: &DMatrix<f64>,
    params: &AccelParams,
) -> Result<(DMatrix<f64>, f64, AccelTrace)> {
    accelerate_with(obj, w0, params, &mut |_, _| {})
}

/// [`accelerate`], passing every accepted `W` (with its linear image, when
/// the objective has one) to `visit`.
pub(crate) fn accelerate_with<O: Objective + ?Sized>(
    obj: &O,
    w0: &DMatrix<f64>,
    params: &AccelParams,
    visit: &mut dyn FnMut(&DMatrix<f64>, Option<&DVector<f64>>),
) -> Result<(DMatrix<f64>, f64, AccelTrace)> {
    let mut trace = AccelTrace {
        w0: params.record_iterates.then(|| w0.clone()),
        ..AccelTrace::default()
    };
    let mut v = w0.clone();
    let mut w = w0.clone();
    let mut f_v = obj.value(&v);
    // Images of (V, W) under the objective's linear map, when it has one.
    let mut images = obj.image(w0).map(|a| (a.clone(), a));
    let (mut theta_prev, mut rho_prev) = (1.0, params.rho_min);

    for t in 0..params.max_iter {
        let mut rho = params.rho_min / params.beta;
        let mut best: Option<Trial> = None;
        let mut searches = 0;
        let mut forced = false;
        let chosen = loop {
            searches += 1;
            rho *= params.beta;
            let theta = if t == 0 { 1.0 } else { next_theta(theta_prev, rho_prev, rho) };
            let u = &v * (1.0 - theta) + &w * theta;
            let (f_u, g) = match &images {
                Some((av, aw)) => obj.value_grad_at(&(av * (1.0 - theta) + aw * theta)),
                None => obj.value_grad(&u),
            };
            let xi = obj.project(&(&w - &g / (theta * rho)))?;
            let w_next = xi.value;
            let v_next = &v * (1.0 - theta) + &w_next * theta;
            let (f_next, next_images) = match &images {
                Some((av, _)) => {
                    let aw_next = obj.image(&w_next).expect("linear objective");
                    let av_next = av * (1.0 - theta) + &aw_next * theta;
                    (obj.value_at(&av_next), Some((av_next, aw_next)))
                }
                None => (obj.value(&v_next), None),
            };
            if !f_next.is_finite() || !f_u.is_finite() {
                return Err(DepthError::Numeric(format!(
                    "non-finite objective at iteration {t} (ρ = {rho:.3e})"
                )));
            }
            let r_t = theta * theta * rho * d2(&w_next, &w) - bregman(f_next, f_u, &g, &v_next, &u)
                + (1.0 - theta) * bregman(f_v, f_u, &g, &v, &u);
            let trial = Trial {
                rho,
                theta,
                u,
                w_next,
                v_next,
                f_next,
                r_t,
                grad_maxnorm: max_abs(&g),
                xi_norm: xi.pre_norm,
                images: next_images,
            };
            if trial.r_t >= 0.0 {
                break trial;
            }
            best = match best {
                Some(b) if b.score() >= trial.score() => Some(b),
                _ => Some(trial),
            };
            if searches > params.max_searches {
                forced = true;
                break best.take().expect("at least one trial");
            }
        };

        trace.records.push(IterRecord {
            start: params.start,
            stage: params.stage,
            zeta: params.zeta,
            t,
            f: chosen.f_next,
            rho: chosen.rho,
            theta: chosen.theta,
            r_t: chosen.r_t,
            searches,
            forced,
            grad_maxnorm: chosen.grad_maxnorm,
            xi_norm: chosen.xi_norm,
        });
        if params.record_iterates {
            trace.iterates.push(IterateRecord {
                v: v.clone(),
                w: w.clone(),
                u: chosen.u.clone(),
                w_next: chosen.w_next.clone(),
                v_next: chosen.v_next.clone(),
            });
        }

        let change = (chosen.f_next - f_v).abs();
        theta_prev = chosen.theta;
        rho_prev = chosen.rho;
        visit(&chosen.w_next, chosen.images.as_ref().map(|(_, aw)| aw));
        v = chosen.v_next;
        w = chosen.w_next;
        images = chosen.images;
        f_v = chosen.f_next;
        if change < params.tol_obj || chosen.grad_maxnorm < params.tol_grad {
            trace.converged = true;
            break;
        }
    }

    let pv = obj.project(&v)?;
    let (f_pv, f_w) = (obj.value(&pv.value), obj.value(&w));
    if !pv.degenerate && f_pv <= f_w {
        Ok((pv.value, f_pv, trace))
    } else {
        Ok((w, f_w, trace))
    }
}

/// Accelerated projection for `Σ_i φ(⟨V, T_i⟩)` from the direction `v0`.
pub fn accelerated_solve(
    inf: &InfluenceSet,
    phi: &PhiFunction,
    v0: &Direction,
    cfg: &SolverConfig,
) -> Result<(Direction, AccelTrace)> {
    if !phi.is_smooth() {
        return invalid(format!(
            "accelerated projection needs a smooth φ, got {}; use sap with a sigmoid family",
            phi.family
        ));
    }
    cfg.validate()?;
    inf.projections(v0.matrix())?;
    let obj = PhiObjective::new(inf, *phi);
    let (v, _, trace) = accelerate(&obj, v0.matrix(), &AccelParams::from_config(cfg))?;
    Ok((Direction::from_parts_unchecked(v, 1), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn theta_coupling_holds() {
        for (tp, rp, r) in [(1.0, 1.0, 1.0), (0.5, 2.0, 8.0), (0.2, 8.0, 1.0)] {
            let th: f64 = next_theta(tp, rp, r);
            assert!(th > 0.0 && th < 1.0);
            assert_abs_diff_eq!(th * th / (1.0 - th), rp * tp * tp / r, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_rho_gives_standard_schedule() {
        let mut th = 1.0;
        for t in 1..500 {
            th = next_theta(th, 4.0, 4.0);
            assert!(th <= 2.0 / (t as f64 + 2.0) + 1e-12, "t = {t}, θ = {th}");
        }
    }
}
