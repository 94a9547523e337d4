//! Influence constructors for location, regression, GLM, covariance and
//! meta-regression problems, the invariant-form normalization and the
//! projected triangle objective.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, invalid, DepthError, Result};
use crate::linalg::{self, vec_of, RANK_RTOL};
use crate::model::{InfluenceSet, InfluenceSpace};
use crate::phi::PhiFunction;

/// Exponential family with canonical link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlmFamily {
    Gaussian,
    Logistic,
    Poisson,
}

impl GlmFamily {
    /// Mean function b′(θ).
    pub fn mean(self, theta: f64) -> f64 {
        match self {
            GlmFamily::Gaussian => theta,
            GlmFamily::Logistic => {
                if theta >= 0.0 {
                    1.0 / (1.0 + (-theta).exp())
                } else {
                    let e = theta.exp();
                    e / (1.0 + e)
                }
            }
            GlmFamily::Poisson => theta.exp(),
        }
    }

    /// Variance function b″(θ).
    pub fn variance(self, theta: f64) -> f64 {
        match self {
            GlmFamily::Gaussian => 1.0,
            GlmFamily::Logistic => {
                let mu = self.mean(theta);
                mu * (1.0 - mu)
            }
            GlmFamily::Poisson => theta.exp(),
        }
    }

    pub fn check_response(self, y: f64) -> Result<()> {
        match self {
            GlmFamily::Gaussian => Ok(()),
            GlmFamily::Logistic if !(0.0..=1.0).contains(&y) => {
                invalid(format!("logistic responses must lie in [0, 1], got {y}"))
            }
            GlmFamily::Poisson if y < 0.0 => {
                invalid(format!("poisson responses must be nonnegative, got {y}"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GlmFamily::Gaussian => "gaussian",
            GlmFamily::Logistic => "logistic",
            GlmFamily::Poisson => "poisson",
        }
    }
}

impl std::str::FromStr for GlmFamily {
    type Err = DepthError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(GlmFamily::Gaussian),
            "logistic" | "binomial" => Ok(GlmFamily::Logistic),
            "poisson" => Ok(GlmFamily::Poisson),
            other => invalid(format!("unknown GLM family '{other}'")),
        }
    }
}

/// `T_i = μ° − z_i`, stored with a constant predictor column.
pub fn location_influences(z: &DMatrix<f64>, mu: &DVector<f64>) -> Result<InfluenceSet> {
    if z.ncols() != mu.len() {
        return dim_err(format!(
            "data has {} columns but the point has {} coordinates",
            z.ncols(),
            mu.len()
        ));
    }
    let n = z.nrows();
    let r = DMatrix::from_fn(n, z.ncols(), |i, k| mu[k] - z[(i, k)]);
    InfluenceSet::factored(DMatrix::from_element(n, 1, 1.0), r, InfluenceSpace::Full)
}

/// `T_i = (x_iᵀβ° − y_i) x_i`.
pub fn regression_influences(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: &DVector<f64>,
) -> Result<InfluenceSet> {
    glm_influences(
        x,
        &DMatrix::from_column_slice(y.len(), 1, y.as_slice()),
        &DMatrix::from_column_slice(beta.len(), 1, beta.as_slice()),
        GlmFamily::Gaussian,
    )
}

/// `R = b′(XB°) − Y` element-wise.
pub fn glm_influences(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    b: &DMatrix<f64>,
    family: GlmFamily,
) -> Result<InfluenceSet> {
    if x.nrows() != y.nrows() {
        return dim_err(format!("X has {} rows, Y has {}", x.nrows(), y.nrows()));
    }
    if b.shape() != (x.ncols(), y.ncols()) {
        return dim_err(format!(
            "coefficients are {}×{}, expected {}×{}",
            b.nrows(),
            b.ncols(),
            x.ncols(),
            y.ncols()
        ));
    }
    for &v in y.iter() {
        family.check_response(v)?;
    }
    let theta = x * b;
    let r = DMatrix::from_fn(y.nrows(), y.ncols(), |i, k| {
        family.mean(theta[(i, k)]) - y[(i, k)]
    });
    InfluenceSet::factored(x.clone(), r, InfluenceSpace::Full)
}

fn check_spd(name: &str, s: &DMatrix<f64>) -> Result<()> {
    if !s.is_square() {
        return dim_err(format!("{name} must be square, got {}×{}", s.nrows(), s.ncols()));
    }
    let asym = (s - s.transpose()).amax();
    if asym > 1e-12 * s.amax().max(1.0) {
        return invalid(format!("{name} is not symmetric (max asymmetry {asym:.3e})"));
    }
    if s.clone().cholesky().is_none() {
        return invalid(format!("{name} is not positive definite"));
    }
    Ok(())
}

/// `t_i = vec(y_i y_iᵀ − Σ°)/n` in the symmetric space.
pub fn covariance_influences(y: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<InfluenceSet> {
    let (n, m) = y.shape();
    if sigma.shape() != (m, m) {
        return dim_err(format!(
            "Σ° is {}×{}, data has {m} columns",
            sigma.nrows(),
            sigma.ncols()
        ));
    }
    check_spd("Σ°", sigma)?;
    let mut t = DMatrix::zeros(n, m * m);
    for i in 0..n {
        let yi = y.row(i).transpose();
        let ti = (&yi * yi.transpose() - sigma) / n as f64;
        t.set_row(i, &vec_of(&ti).transpose());
    }
    InfluenceSet::explicit(t, m, m, InfluenceSpace::Symmetric)
}

/// One study in a multivariate meta-regression.
#[derive(Debug, Clone)]
pub struct MetaBlock {
    /// Effect estimates, length m.
    pub y: DVector<f64>,
    /// Design, m×q.
    pub x: DMatrix<f64>,
    /// Within-study covariance, m×m.
    pub sigma: DMatrix<f64>,
}

/// `T_i = (Σ° + Σ_i)⁻¹(Σ° + Σ_i − R_i)(Σ° + Σ_i)⁻¹` with `R_i` the residual outer product.
pub fn meta_influences(
    blocks: &[MetaBlock],
    beta: &DVector<f64>,
    sigma: &DMatrix<f64>,
) -> Result<InfluenceSet> {
    if blocks.is_empty() {
        return invalid("no studies supplied");
    }
    let m = sigma.nrows();
    check_spd("Σ°", sigma)?;
    let mut t = DMatrix::zeros(blocks.len(), m * m);
    for (i, b) in blocks.iter().enumerate() {
        if b.y.len() != m || b.sigma.shape() != (m, m) || b.x.nrows() != m {
            return dim_err(format!("study {i} does not match response dimension {m}"));
        }
        if b.x.ncols() != beta.len() {
            return dim_err(format!(
                "study {i} design has {} columns, β has {}",
                b.x.ncols(),
                beta.len()
            ));
        }
        let s = sigma + &b.sigma;
        let s_inv = s.clone().try_inverse().ok_or_else(|| {
            DepthError::Numeric(format!("Σ° + Σ_i is singular for study {i}"))
        })?;
        let e = &b.y - &b.x * beta;
        let ri = &e * e.transpose();
        let ti = &s_inv * (&s - ri) * &s_inv;
        let ti = (&ti + ti.transpose()) * 0.5;
        t.set_row(i, &vec_of(&ti).transpose());
    }
    InfluenceSet::explicit(t, m, m, InfluenceSpace::Symmetric)
}

/// Rows of the left singular basis `U°` of the vectorized influence matrix.
///
/// Depth computed on the returned set is the affine-invariant form. Column
/// signs are fixed so the largest-magnitude entry of each column is positive.
pub fn normalize_influences(inf: &InfluenceSet) -> Result<InfluenceSet> {
    let t = inf.explicit_matrix();
    if t.amax() == 0.0 {
        return invalid("cannot normalize an all-zero influence matrix");
    }
    let svd = linalg::thin_svd(&t);
    let k = linalg::numerical_rank(&svd.s, RANK_RTOL);
    let mut u = svd.u.columns(0, k).into_owned();
    for mut col in u.column_iter_mut() {
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    InfluenceSet::explicit(u, k, 1, InfluenceSpace::Full)
}

/// Value of the projected triangle objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleValue {
    pub value: f64,
    /// Triples skipped because their projection is (nearly) collinear.
    pub degenerate_triples: usize,
}

/// Barycentric coordinates of `q` in the triangle `(a, b, c)`; `None` when degenerate.
pub fn barycentric(a: [f64; 2], b: [f64; 2], c: [f64; 2], q: [f64; 2]) -> Option<[f64; 3]> {
    let cross = |u: [f64; 2], v: [f64; 2]| u[0] * v[1] - u[1] * v[0];
    let sub = |u: [f64; 2], v: [f64; 2]| [u[0] - v[0], u[1] - v[1]];
    let (ab, ac) = (sub(b, a), sub(c, a));
    let det = cross(ab, ac);
    let scale = (ab[0].hypot(ab[1])) * (ac[0].hypot(ac[1]));
    if !(det.abs() >= 1e-10 * scale) || scale == 0.0 {
        return None;
    }
    let snap = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let (qa, qb, qc) = (sub(a, q), sub(b, q), sub(c, q));
    Some([
        snap(cross(qb, qc) / det),
        snap(cross(qc, qa) / det),
        snap(cross(qa, qb) / det),
    ])
}

/// `Σ_{i<j<k} Π_l φ(ξ_l)`, with `ξ` the barycentric coordinates of `Vᵀμ°` in
/// the triangle `(Vᵀz_i, Vᵀz_j, Vᵀz_k)`.
///
/// Two-sided φ enter through their indicator form `(1 + φ)/2`, so every
/// factor approximates `1_{≥0}`.
pub fn triangle_objective(
    z: &DMatrix<f64>,
    mu: &DVector<f64>,
    phi: &PhiFunction,
    v: &DMatrix<f64>,
) -> Result<TriangleValue> {
    let m = z.ncols();
    if mu.len() != m || v.shape() != (m, 2) {
        return dim_err(format!(
            "triangle objective needs μ of length {m} and V of shape {m}×2"
        ));
    }
    let gram = v.transpose() * v;
    if (gram - DMatrix::<f64>::identity(2, 2)).amax() > 1e-10 {
        return invalid("V must have orthonormal columns");
    }
    let proj = z * v;
    let pts: Vec<[f64; 2]> = (0..z.nrows()).map(|i| [proj[(i, 0)], proj[(i, 1)]]).collect();
    let qv = v.transpose() * mu;
    let q = [qv[0], qv[1]];
    let n = pts.len();
    let partial: Vec<(f64, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sum = 0.0;
            let mut bad = 0;
            for j in i + 1..n {
                for k in j + 1..n {
                    match barycentric(pts[i], pts[j], pts[k], q) {
                        Some(xi) => {
                            sum += xi.iter().map(|&x| phi.indicator_eval(x)).product::<f64>()
                        }
                        None => bad += 1,
                    }
                }
            }
            (sum, bad)
        })
        .collect();
    let value = linalg::ordered_sum(partial.iter().map(|p| p.0));
    let degenerate_triples = partial.iter().map(|p| p.1).sum();
    Ok(TriangleValue {
        value,
        degenerate_triples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::PhiFamily;
    use approx::assert_abs_diff_eq;

    fn m(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }

    #[test]
    fn location_examples() {
        let inf = location_influences(&m(1, 2, &[1.0, 0.0]), &DVector::from_vec(vec![0.0, 0.0])).unwrap();
        assert_eq!(inf.influence(0), m(1, 2, &[-1.0, 0.0]));
        let z = m(3, 1, &[1.0, 2.0, 3.0]);
        let inf = location_influences(&z, &DVector::from_vec(vec![2.0])).unwrap();
        assert_eq!(inf.explicit_matrix(), m(3, 1, &[1.0, 0.0, -1.0]));
        let z = m(3, 2, &[1.0, 2.0, -4.0, 0.5, 6.0, 1.0]);
        let mean = DVector::from_vec(vec![1.0, 3.5 / 3.0]);
        let inf = location_influences(&z, &mean).unwrap();
        let total = inf.pullback(&DVector::from_element(3, 1.0));
        assert!(total.amax() < 1e-14);
        assert!(location_influences(&z, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn regression_examples() {
        let inf = regression_influences(&m(1, 2, &[1.0, 2.0]), &DVector::from_vec(vec![3.0]), &DVector::zeros(2)).unwrap();
        assert_eq!(inf.influence(0), m(2, 1, &[-3.0, -6.0]));

        let x = m(4, 2, &[1.0, 0.3, 1.0, -1.2, 1.0, 2.2, 1.0, 0.7]);
        let y = DVector::from_vec(vec![1.0, -0.5, 3.0, 0.2]);
        let beta = (x.transpose() * &x).try_inverse().unwrap() * x.transpose() * &y;
        let inf = regression_influences(&x, &y, &beta).unwrap();
        assert!(inf.pullback(&DVector::from_element(4, 1.0)).amax() < 1e-8 * y.amax());

        let exact = &x * &beta;
        let inf = regression_influences(&x, &exact, &beta).unwrap();
        assert_eq!(inf.explicit_matrix().amax(), 0.0);
    }

    #[test]
    fn glm_examples() {
        let one = m(1, 1, &[1.0]);
        let inf = glm_influences(&one, &one, &m(1, 1, &[0.0]), GlmFamily::Logistic).unwrap();
        assert_eq!(inf.explicit_matrix()[(0, 0)], -0.5);
        let inf = glm_influences(&one, &one, &m(1, 1, &[0.0]), GlmFamily::Poisson).unwrap();
        assert_eq!(inf.explicit_matrix()[(0, 0)], 0.0);
        let err = glm_influences(&one, &m(1, 1, &[-1.0]), &m(1, 1, &[0.0]), GlmFamily::Poisson).unwrap_err();
        assert!(matches!(err, DepthError::Validation(_)));

        let x = m(3, 2, &[1.0, 0.5, 1.0, -0.2, 1.0, 1.1]);
        let y = DVector::from_vec(vec![0.4, 1.0, -2.0]);
        let b = DVector::from_vec(vec![0.3, -0.7]);
        let g = glm_influences(&x, &DMatrix::from_column_slice(3, 1, y.as_slice()), &DMatrix::from_column_slice(2, 1, b.as_slice()), GlmFamily::Gaussian).unwrap();
        let r = regression_influences(&x, &y, &b).unwrap();
        assert_eq!(g.explicit_matrix(), r.explicit_matrix());
    }

    #[test]
    fn covariance_examples() {
        let inf = covariance_influences(&m(1, 2, &[1.0, 0.0]), &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(inf.influence(0), m(2, 2, &[0.0, 0.0, 0.0, -1.0]));
        let sigma = m(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let inf = covariance_influences(&m(2, 2, &[0.0, 0.0, 1.0, 1.0]), &sigma).unwrap();
        assert_eq!(inf.influence(0), -&sigma / 2.0);
        let y = m(3, 2, &[1.0, 2.0, -1.0, 0.5, 0.3, -0.7]);
        let second = y.transpose() * &y / 3.0;
        let inf = covariance_influences(&y, &second).unwrap();
        assert!(inf.pullback(&DVector::from_element(3, 1.0)).amax() < 1e-14);
        for i in 0..3 {
            let t = inf.influence(i);
            assert_eq!(t, t.transpose());
        }
        let bad = m(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(covariance_influences(&y, &bad), Err(DepthError::Validation(_))));
    }

    #[test]
    fn meta_examples() {
        let sigma = m(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let y = DVector::from_vec(vec![1.0, -1.0]);
        let block = MetaBlock { y: y.clone(), x: DMatrix::zeros(2, 1), sigma: DMatrix::zeros(2, 2) };
        let inf = meta_influences(&[block], &DVector::zeros(1), &sigma).unwrap();
        let si = sigma.clone().try_inverse().unwrap();
        let want = &si * (&sigma - &y * y.transpose()) * &si;
        assert_abs_diff_eq!(inf.influence(0), want, epsilon = 1e-12);

        let x = m(2, 1, &[1.0, 2.0]);
        let beta = DVector::from_vec(vec![0.5]);
        let block = MetaBlock { y: &x * &beta, x: x.clone(), sigma: DMatrix::identity(2, 2) };
        let inf = meta_influences(&[block], &beta, &sigma).unwrap();
        let want = (&sigma + DMatrix::identity(2, 2)).try_inverse().unwrap();
        assert_abs_diff_eq!(inf.influence(0), want, epsilon = 1e-12);

        let block = MetaBlock { y: DVector::from_vec(vec![2f64.sqrt()]), x: m(1, 1, &[0.0]), sigma: m(1, 1, &[1.0]) };
        let inf = meta_influences(&[block], &DVector::zeros(1), &m(1, 1, &[1.0])).unwrap();
        assert_abs_diff_eq!(inf.influence(0)[(0, 0)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn meta_singular_block_reports_index() {
        let good = MetaBlock { y: DVector::from_vec(vec![1.0]), x: m(1, 1, &[1.0]), sigma: m(1, 1, &[0.0]) };
        let bad = MetaBlock { y: DVector::from_vec(vec![1.0]), x: m(1, 1, &[1.0]), sigma: m(1, 1, &[-1.0]) };
        let err = meta_influences(&[good, bad], &DVector::zeros(1), &m(1, 1, &[1.0])).unwrap_err();
        assert!(matches!(err, DepthError::Numeric(ref s) if s.contains("study 1")));
    }

    #[test]
    fn normalize_examples() {
        let inf = InfluenceSet::from_vectors(m(2, 2, &[2.0, 0.0, 0.0, 1.0])).unwrap();
        let u = normalize_influences(&inf).unwrap().explicit_matrix();
        assert_abs_diff_eq!(u, DMatrix::identity(2, 2), epsilon = 1e-14);

        let t = m(3, 2, &[1.0, 2.0, -0.5, 0.3, 0.7, -1.1]);
        let a = normalize_influences(&InfluenceSet::from_vectors(t.clone()).unwrap()).unwrap().explicit_matrix();
        let b = normalize_influences(&InfluenceSet::from_vectors(&t * -3.5).unwrap()).unwrap().explicit_matrix();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);

        let zero = InfluenceSet::from_vectors(DMatrix::zeros(3, 2)).unwrap();
        assert!(matches!(normalize_influences(&zero), Err(DepthError::Validation(_))));
    }

    #[test]
    fn barycentric_vertex_and_inside() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [0.0, 1.0];
        assert_eq!(barycentric(a, b, c, a).unwrap(), [1.0, 0.0, 0.0]);
        let xi = barycentric(a, b, c, [0.25, 0.25]).unwrap();
        assert_abs_diff_eq!(xi[0], 0.5, epsilon = 1e-15);
        assert!(barycentric(a, b, [2.0, 0.0], [0.1, 0.1]).is_none());
    }

    #[test]
    fn triangle_counts() {
        let ind = PhiFunction::new(PhiFamily::Indicator01);
        let z = m(3, 2, &[-1.0, -1.0, 1.0, -1.0, 0.0, 1.0]);
        let v = DMatrix::identity(2, 2);
        let val = triangle_objective(&z, &DVector::zeros(2), &ind, &v).unwrap();
        assert_eq!(val.value, 1.0);
        let val = triangle_objective(&z, &DVector::from_vec(vec![-1.0, -1.0]), &ind, &v).unwrap();
        assert_eq!(val.value, 1.0);
        let val = triangle_objective(&z, &DVector::from_vec(vec![5.0, 5.0]), &ind, &v).unwrap();
        assert_eq!(val.value, 0.0);
    }
}
