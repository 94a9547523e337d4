//! Majorization-minimization step on the quadratic surrogate.

use nalgebra::DMatrix;

use crate::error::{DepthError, Result};
use crate::linalg::frobenius_dot;
use crate::solver::objective::Objective;

/// Maximum number of ρ doublings in the backtracking search.
pub const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone)]
pub struct MmStep {
    pub v_next: DMatrix<f64>,
    pub f_prev: f64,
    pub f_next: f64,
    pub rho: f64,
    pub backtracks: usize,
}

/// Surrogate `g_ρ(V, V⁻) = f(V⁻) + ⟨∇f(V⁻), V − V⁻⟩ + ρ‖V − V⁻‖²/2`.
pub fn surrogate(f_prev: f64, grad: &DMatrix<f64>, v: &DMatrix<f64>, v_prev: &DMatrix<f64>, rho: f64) -> f64 {
    let d = v - v_prev;
    f_prev + frobenius_dot(grad, &d) + 0.5 * rho * d.norm_squared()
}

/// One MM update `V⁺ = P(V − ∇f(V)/ρ)`, doubling ρ until `f(V⁺) ≤ g_ρ(V⁺, V)`.
pub fn mm_step<O: Objective + ?Sized>(obj: &O, v: &DMatrix<f64>, rho: f64) -> Result<MmStep> {
    let (f_prev, grad) = obj.value_grad(v);
    let mut rho = rho;
    for backtracks in 0..=MAX_BACKTRACKS {
        let v_next = obj.project(&(v - &grad / rho))?.value;
        let f_next = obj.value(&v_next);
        if f_next <= surrogate(f_prev, &grad, &v_next, v, rho) {
            return Ok(MmStep {
                v_next,
                f_prev,
                f_next,
                rho,
                backtracks,
            });
        }
        rho *= 2.0;
    }
    Err(DepthError::Stall(format!(
        "surrogate condition still failing after {MAX_BACKTRACKS} doublings (ρ = {rho:.3e}, f = {f_prev})"
    )))
}

/// Runs MM steps from `v0`, returning the objective sequence.
pub fn mm_solve<O: Objective + ?Sized>(
    obj: &O,
    v0: &DMatrix<f64>,
    rho: f64,
    iters: usize,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let mut v = v0.clone();
    let mut fs = vec![obj.value(&v)];
    for _ in 0..iters {
        let step = mm_step(obj, &v, rho)?;
        v = step.v_next;
        fs.push(step.f_next);
    }
    Ok((v, fs))
}
