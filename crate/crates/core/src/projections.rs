//! Closed-form projections onto unit-norm feasible sets.
//!
//! Zero inputs never randomize: each projection falls back to a fixed unit
//! vector and raises a `degenerate` flag so traces stay reproducible.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, DepthError, Result};
use crate::linalg::{self, unvec, vec_of, RANK_RTOL};
use crate::model::{Direction, InfluenceSpace, LinearConstraint};

/// Norms below this are treated as an exactly zero input.
pub const TINY_NORM: f64 = 1e-300;

/// Relative tolerance for the affine-constraint consistency check.
pub const FEASIBILITY_RTOL: f64 = 1e-10;

/// Smallest-to-largest singular value ratio accepted by [`project_stiefel`].
pub const STIEFEL_RCOND: f64 = 1e-12;

/// A unit-norm projection result.
#[derive(Debug, Clone)]
pub struct Projected {
    pub value: DMatrix<f64>,
    /// The input had no usable component and a fallback was returned.
    pub degenerate: bool,
    /// Norm of the intermediate point before normalization.
    pub pre_norm: f64,
}

impl Projected {
    pub fn into_direction(self) -> Direction {
        Direction::from_parts_unchecked(self.value, 1)
    }
}

fn e1(rows: usize, cols: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows, cols);
    if rows * cols > 0 {
        out[(0, 0)] = 1.0;
    }
    out
}

/// `Y/‖Y‖_F`, or `e₁` flagged as degenerate when `Y = 0`.
pub fn project_sphere(y: &DMatrix<f64>) -> Projected {
    let nrm = y.norm();
    if nrm < TINY_NORM || !nrm.is_finite() {
        return Projected {
            value: e1(y.nrows(), y.ncols()),
            degenerate: true,
            pre_norm: 0.0,
        };
    }
    Projected {
        value: y / nrm,
        degenerate: false,
        pre_norm: nrm,
    }
}

/// First coordinate matrix `e_k` (column-major order) whose projection onto
/// the linear space is nonzero, normalized.
fn space_fallback(space: &InfluenceSpace, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    for k in 0..rows * cols {
        let mut e = DMatrix::zeros(rows, cols);
        e[(k % rows, k / rows)] = 1.0;
        if let Some(p) = space.linear_project(&e) {
            let nrm = p.norm();
            if nrm > 1e-12 {
                return Ok(p / nrm);
            }
        }
    }
    Err(DepthError::Degenerate(format!(
        "{} space contains no nonzero {rows}×{cols} matrix",
        space.name()
    )))
}

/// Orthogonal projection onto a linear influence space followed by normalization.
pub fn project_subspace_sphere(y: &DMatrix<f64>, space: &InfluenceSpace) -> Result<Projected> {
    let Some(py) = space.linear_project(y) else {
        return Err(DepthError::Unsupported(format!(
            "{} space has no linear projector",
            space.name()
        )));
    };
    let nrm = py.norm();
    if nrm < TINY_NORM || !nrm.is_finite() {
        return Ok(Projected {
            value: space_fallback(space, y.nrows(), y.ncols())?,
            degenerate: true,
            pre_norm: 0.0,
        });
    }
    Ok(Projected {
        value: py / nrm,
        degenerate: false,
        pre_norm: nrm,
    })
}

/// Unit vector closest to `y` subject to `A y_Ω = a`.
///
/// Returns `(v, degenerate)`; the flag is set when `y` has no component in the
/// constraint null space and a null-space basis vector completes the solution.
pub fn project_linear_constraint(
    y: &DVector<f64>,
    a: &DMatrix<f64>,
    rhs: &DVector<f64>,
    omega: &[usize],
) -> Result<(DVector<f64>, bool)> {
    let cons = LinearConstraint::new(a.clone(), rhs.clone(), omega.to_vec())?;
    let full = cons.embedded(y.len())?;
    let pinv = linalg::pinv(&full);
    let x0 = &pinv * rhs;
    let resid = (&full * &x0 - rhs).norm();
    let scale = rhs.norm().max(full.norm() * x0.norm()).max(1.0);
    if resid > FEASIBILITY_RTOL * scale {
        return Err(DepthError::Infeasible(format!(
            "right-hand side is not in the column space of A (residual {resid:.3e})"
        )));
    }
    let x0_norm2 = x0.norm_squared();
    if x0_norm2.sqrt() > 1.0 + 1e-12 {
        return Err(DepthError::Infeasible(format!(
            "minimum-norm solution has norm {:.6} > 1",
            x0_norm2.sqrt()
        )));
    }
    let slack = (1.0 - x0_norm2).max(0.0).sqrt();
    let q = y - &pinv * (&full * y);
    let qn = q.norm();
    if qn > 1e-12 * y.norm().max(1.0) {
        return Ok((x0 + q * (slack / qn), false));
    }
    if slack <= 1e-12 {
        return Ok((x0, false));
    }
    let ns = linalg::null_space(&full);
    if ns.ncols() == 0 {
        return Err(DepthError::Infeasible(
            "constraint fixes a vector of norm below 1 and leaves no free direction".into(),
        ));
    }
    Ok((x0 + ns.column(0) * slack, true))
}

/// Keep the `s` largest-magnitude entries (ties by lowest index) and normalize.
pub fn project_sparse(y: &DVector<f64>, s: usize) -> Result<(DVector<f64>, bool)> {
    let p = y.len();
    if s == 0 || s > p {
        return Err(DepthError::Validation(format!("sparsity {s} outside 1..={p}")));
    }
    let mut order: Vec<usize> = (0..p).collect();
    // Stable sort keeps lower indices first among equal magnitudes.
    order.sort_by(|&i, &j| y[j].abs().total_cmp(&y[i].abs()));
    let mut out = DVector::zeros(p);
    for &i in &order[..s] {
        out[i] = y[i];
    }
    let nrm = out.norm();
    if nrm < TINY_NORM {
        let mut e = DVector::zeros(p);
        e[0] = 1.0;
        return Ok((e, true));
    }
    Ok((out / nrm, false))
}

/// Nearest unit-norm point of the space (the feasibility step of the solvers).
pub fn project_unit(y: &DMatrix<f64>, space: &InfluenceSpace) -> Result<Projected> {
    match space {
        InfluenceSpace::Sparse(s) => {
            let flat = vec_of(y);
            let (v, degenerate) = project_sparse(&flat, *s)?;
            let pre_norm = if degenerate { 0.0 } else { flat.dot(&v) };
            Ok(Projected {
                value: unvec(v.as_slice(), y.nrows(), y.ncols()),
                degenerate,
                pre_norm,
            })
        }
        InfluenceSpace::LinearConstraint(c) if !c.is_homogeneous() => {
            let flat = vec_of(y);
            let (v, degenerate) = project_linear_constraint(&flat, &c.matrix, &c.rhs, &c.omega)?;
            Ok(Projected {
                pre_norm: flat.dot(&v),
                value: unvec(v.as_slice(), y.nrows(), y.ncols()),
                degenerate,
            })
        }
        InfluenceSpace::Full => Ok(project_sphere(y)),
        _ => project_subspace_sphere(y, space),
    }
}

/// Polar factor of the space-projected frame `G(Y)`: the closest
/// column-orthonormal matrix whose columns lie in the space.
///
/// `y` is pm×r; each column is a vectorized p×m matrix.
pub fn project_stiefel(
    y: &DMatrix<f64>,
    space: &InfluenceSpace,
    p: usize,
    m: usize,
) -> Result<Direction> {
    if y.nrows() != p * m {
        return dim_err(format!("frame has {} rows, expected {}", y.nrows(), p * m));
    }
    let r = y.ncols();
    if r == 0 || r > p * m {
        return dim_err(format!("frame width {r} outside 1..={}", p * m));
    }
    let mut gy = DMatrix::zeros(p * m, r);
    for s in 0..r {
        let col: Vec<f64> = y.column(s).iter().copied().collect();
        let proj = space.linear_project(&unvec(&col, p, m)).ok_or_else(|| {
            DepthError::Unsupported(format!(
                "frames need a linear space, {} is not",
                space.name()
            ))
        })?;
        gy.set_column(s, &vec_of(&proj));
    }
    let svd = linalg::thin_svd(&gy);
    let smax = svd.s[0];
    let smin = svd.s[r - 1];
    if !(smax > 0.0) || smin < STIEFEL_RCOND * smax {
        return Err(DepthError::Degenerate(format!(
            "projected frame is rank deficient: singular values span [{smin:.3e}, {smax:.3e}], need ratio ≥ {STIEFEL_RCOND:e}"
        )));
    }
    let polar = svd.u.columns(0, r) * &svd.v_t;
    Ok(Direction::from_parts_unchecked(polar, r))
}

/// Whether the projected frame has the full rank `r` at the solver's cutoff.
pub fn frame_rank(y: &DMatrix<f64>) -> usize {
    linalg::numerical_rank(&linalg::thin_svd(y).s, RANK_RTOL)
}
