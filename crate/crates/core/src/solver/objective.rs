//! Smooth objectives minimized by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, Result};
use crate::model::{Direction, InfluenceSet, InfluenceSpace};
use crate::phi::PhiFunction;
use crate::projections::{project_stiefel, project_unit, Projected};

/// A differentiable function on a constrained set of matrices.
pub trait Objective: Sync {
    fn value(&self, v: &DMatrix<f64>) -> f64;
    fn value_grad(&self, v: &DMatrix<f64>) -> (f64, DMatrix<f64>);
    /// Nearest feasible point of `y`.
    fn project(&self, y: &DMatrix<f64>) -> Result<Projected>;
    /// A Lipschitz constant of the gradient, when known.
    fn gradient_lipschitz(&self) -> Option<f64> {
        None
    }
    /// `A v` when the objective has the form `g(A v)` with `A` linear; lets
    /// solvers update images of convex combinations without re-multiplying.
    fn image(&self, _v: &DMatrix<f64>) -> Option<DVector<f64>> {
        None
    }
    /// `g(a)`; called only when [`Objective::image`] returns `Some`.
    fn value_at(&self, _a: &DVector<f64>) -> f64 {
        unreachable!("objective has no linear image")
    }
    /// `g(a)` and `Aᵀ∇g(a)`; called only when [`Objective::image`] returns `Some`.
    fn value_grad_at(&self, _a: &DVector<f64>) -> (f64, DMatrix<f64>) {
        unreachable!("objective has no linear image")
    }
}

/// `f(V) = Σ_i φ(⟨V, T_i⟩)` over unit-norm `V` in the influence space.
pub struct PhiObjective<'a> {
    pub inf: &'a InfluenceSet,
    pub phi: PhiFunction,
}

impl<'a> PhiObjective<'a> {
    pub fn new(inf: &'a InfluenceSet, phi: PhiFunction) -> Self {
        PhiObjective { inf, phi }
    }
}

impl Objective for PhiObjective<'_> {
    fn value(&self, v: &DMatrix<f64>) -> f64 {
        self.value_at(&self.inf.projections_unchecked(v))
    }

    fn value_grad(&self, v: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        self.value_grad_at(&self.inf.projections_unchecked(v))
    }

    fn image(&self, v: &DMatrix<f64>) -> Option<DVector<f64>> {
        Some(self.inf.projections_unchecked(v))
    }

    fn value_at(&self, a: &DVector<f64>) -> f64 {
        a.iter().map(|&t| self.phi.eval(t)).sum()
    }

    fn value_grad_at(&self, a: &DVector<f64>) -> (f64, DMatrix<f64>) {
        let mut f = 0.0;
        let w = a.map(|t| {
            let (e, d) = self.phi.eval_grad(t);
            f += e;
            d
        });
        (f, self.inf.pullback(&w))
    }

    fn project(&self, y: &DMatrix<f64>) -> Result<Projected> {
        project_unit(y, self.inf.space())
    }

    fn gradient_lipschitz(&self) -> Option<f64> {
        self.phi
            .lipschitz()
            .map(|l| l * self.inf.curvature_scale())
    }
}

/// Value and gradient of `Σ_i φ(⟨V, T_i⟩)`; the gradient is
/// `Xᵀ diag(φ′) R` for factored influences and `Σ_i φ′ t_i` for explicit ones.
///
/// Non-smooth φ are accepted only when no projection sits on a kink.
pub fn objective_and_grad(
    inf: &InfluenceSet,
    phi: &PhiFunction,
    v: &Direction,
) -> Result<(f64, DMatrix<f64>)> {
    let proj = inf.projections(v.matrix())?;
    let mut w = DVector::zeros(proj.len());
    for (wi, &t) in w.iter_mut().zip(proj.iter()) {
        *wi = if phi.is_smooth() { phi.grad(t) } else { phi.grad_strict(t)? };
    }
    let f = proj.iter().map(|&t| phi.eval(t)).sum();
    Ok((f, inf.pullback(&w)))
}

/// Product objective `Σ_i Π_s φ̃(v_sᵀ t_i)` over column-orthonormal frames,
/// with φ̃ the indicator form of φ.
pub struct ProductObjective {
    t: DMatrix<f64>,
    space: InfluenceSpace,
    shape: (usize, usize),
    pub phi: PhiFunction,
}

impl ProductObjective {
    pub fn new(inf: &InfluenceSet, phi: PhiFunction) -> Self {
        ProductObjective {
            t: inf.explicit_matrix(),
            space: inf.space().clone(),
            shape: inf.shape(),
            phi,
        }
    }

    pub fn with_phi(&self, phi: PhiFunction) -> Self {
        ProductObjective {
            t: self.t.clone(),
            space: self.space.clone(),
            shape: self.shape,
            phi,
        }
    }

    fn factors(&self, v: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let proj = &self.t * v;
        let vals = proj.map(|x| self.phi.indicator_eval(x));
        let ders = proj.map(|x| self.phi.indicator_grad(x));
        (vals, ders)
    }
}

impl Objective for ProductObjective {
    fn value(&self, v: &DMatrix<f64>) -> f64 {
        let (vals, _) = self.factors(v);
        vals.row_iter().map(|r| r.iter().product::<f64>()).sum()
    }

    fn value_grad(&self, v: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        let (vals, ders) = self.factors(v);
        let (n, r) = vals.shape();
        let mut weights = DMatrix::zeros(n, r);
        let mut f = 0.0;
        for i in 0..n {
            f += vals.row(i).iter().product::<f64>();
            for s in 0..r {
                let others: f64 = (0..r).filter(|&q| q != s).map(|q| vals[(i, q)]).product();
                weights[(i, s)] = others * ders[(i, s)];
            }
        }
        (f, self.t.transpose() * weights)
    }

    fn project(&self, y: &DMatrix<f64>) -> Result<Projected> {
        let d = project_stiefel(y, &self.space, self.shape.0, self.shape.1)?;
        Ok(Projected {
            value: d.into_matrix(),
            degenerate: false,
            pre_norm: 1.0,
        })
    }
}

/// Projected triangle objective over m×2 orthonormal frames, with central
/// finite-difference gradients.
pub struct TriangleObjective<'a> {
    pub z: &'a DMatrix<f64>,
    pub mu: &'a DVector<f64>,
    pub phi: PhiFunction,
    pub step: f64,
}

impl<'a> TriangleObjective<'a> {
    pub fn new(z: &'a DMatrix<f64>, mu: &'a DVector<f64>, phi: PhiFunction) -> Result<Self> {
        if z.ncols() != mu.len() {
            return dim_err("point and data dimensions differ");
        }
        if z.ncols() < 2 {
            return dim_err("projected triangle depth needs at least two coordinates");
        }
        Ok(TriangleObjective {
            z,
            mu,
            phi,
            step: 1e-6,
        })
    }

    fn raw(&self, v: &DMatrix<f64>) -> f64 {
        let proj = self.z * v;
        let q = v.transpose() * self.mu;
        let n = proj.nrows();
        let pts: Vec<[f64; 2]> = (0..n).map(|i| [proj[(i, 0)], proj[(i, 1)]]).collect();
        let q = [q[0], q[1]];
        let mut sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if let Some(xi) = crate::influence::barycentric(pts[i], pts[j], pts[k], q) {
                        sum += xi.iter().map(|&x| self.phi.indicator_eval(x)).product::<f64>();
                    }
                }
            }
        }
        sum
    }
}

impl Objective for TriangleObjective<'_> {
    fn value(&self, v: &DMatrix<f64>) -> f64 {
        // Off-manifold points (convex combinations) are evaluated directly;
        // barycentric coordinates do not need orthonormal columns.
        self.raw(v)
    }

    fn value_grad(&self, v: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        let f = self.raw(v);
        let mut g = DMatrix::zeros(v.nrows(), v.ncols());
        for idx in 0..v.len() {
            let mut up = v.clone();
            let mut dn = v.clone();
            up[idx] += self.step;
            dn[idx] -= self.step;
            g[idx] = (self.raw(&up) - self.raw(&dn)) / (2.0 * self.step);
        }
        (f, g)
    }

    fn project(&self, y: &DMatrix<f64>) -> Result<Projected> {
        let d = project_stiefel(y, &InfluenceSpace::Full, y.nrows(), 1)?;
        Ok(Projected {
            value: d.into_matrix(),
            degenerate: false,
            pre_norm: 1.0,
        })
    }
}
