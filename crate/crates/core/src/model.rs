//! Core domain types: datasets, influence sets, influence spaces, directions,
//! solver configuration and depth results.
//!
//! Influences are stored either factored (`T_i = x_i r_iᵀ`, one row of `X`
//! and one row of `R` per observation) or explicitly as the `n × pm` matrix of
//! column-major vectorized influences. Location problems use the factored form
//! with a constant predictor column, so location and regression share every
//! code path.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, invalid, DepthError, Result};
use crate::linalg::{self, column_projector, unvec, vec_of};
use crate::phi::{PhiFamily, PhiFunction};

/// Absolute tolerance below which a projected influence counts as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// How exact zeros enter the 0-1 depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    /// `1_{≥0}`: zeros count fully.
    #[default]
    RightClosed,
    /// `0.5·1_{=0} + 1_{>0}`.
    HalfAtZero,
}

impl SignConvention {
    pub fn name(self) -> &'static str {
        match self {
            SignConvention::RightClosed => "right-closed",
            SignConvention::HalfAtZero => "half-at-zero",
        }
    }

    #[inline]
    pub fn indicator(self, t: f64) -> f64 {
        if t.abs() <= ZERO_TOL {
            match self {
                SignConvention::RightClosed => 1.0,
                SignConvention::HalfAtZero => 0.5,
            }
        } else if t > 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

impl std::str::FromStr for SignConvention {
    type Err = DepthError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right-closed" | "right_closed" => Ok(SignConvention::RightClosed),
            "half-at-zero" | "half_at_zero" => Ok(SignConvention::HalfAtZero),
            other => invalid(format!("unknown sign convention '{other}'")),
        }
    }
}

fn check_finite(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if let Some(pos) = m.iter().position(|x| !x.is_finite()) {
        let (r, c) = (pos % m.nrows(), pos / m.nrows());
        return invalid(format!("{name} has a non-finite entry at row {r}, column {c}"));
    }
    Ok(())
}

/// Predictors `X` (n×p) and responses `Y` (n×m).
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return dim_err(format!(
                "X has {} rows but Y has {}",
                x.nrows(),
                y.nrows()
            ));
        }
        if y.nrows() == 0 {
            return invalid("dataset has no observations");
        }
        check_finite("X", &x)?;
        check_finite("Y", &y)?;
        Ok(Dataset { x, y })
    }

    /// Location data: a constant predictor column and `z` as responses.
    pub fn location(z: DMatrix<f64>) -> Result<Self> {
        let n = z.nrows();
        Dataset::new(DMatrix::from_element(n, 1, 1.0), z)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }
    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }
    pub fn n(&self) -> usize {
        self.y.nrows()
    }
    pub fn p(&self) -> usize {
        self.x.ncols()
    }
    pub fn m(&self) -> usize {
        self.y.ncols()
    }
}

/// Linear constraint `A v_Ω = a` on a sub-vector of `vec(V)`.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub omega: Vec<usize>,
}

impl LinearConstraint {
    pub fn new(matrix: DMatrix<f64>, rhs: DVector<f64>, omega: Vec<usize>) -> Result<Self> {
        if matrix.ncols() != omega.len() {
            return dim_err(format!(
                "constraint matrix has {} columns but Ω has {} indices",
                matrix.ncols(),
                omega.len()
            ));
        }
        if matrix.nrows() != rhs.len() {
            return dim_err("constraint matrix rows and right-hand side differ");
        }
        let mut sorted = omega.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != omega.len() {
            return invalid("Ω contains duplicate indices");
        }
        Ok(LinearConstraint { matrix, rhs, omega })
    }

    /// Zero-out constraint `v_Ω = 0`.
    pub fn zeros(omega: Vec<usize>) -> Result<Self> {
        let k = omega.len();
        LinearConstraint::new(DMatrix::identity(k, k), DVector::zeros(k), omega)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rhs.iter().all(|&x| x == 0.0)
    }

    /// The constraint as a `k × dim` matrix acting on the whole vector.
    pub fn embedded(&self, dim: usize) -> Result<DMatrix<f64>> {
        if let Some(&bad) = self.omega.iter().find(|&&j| j >= dim) {
            return dim_err(format!("Ω index {bad} out of range for dimension {dim}"));
        }
        let mut full = DMatrix::zeros(self.matrix.nrows(), dim);
        for (c, &j) in self.omega.iter().enumerate() {
            full.set_column(j, &self.matrix.column(c));
        }
        Ok(full)
    }
}

/// The set the influences and projection directions live in.
#[derive(Debug, Clone)]
pub enum InfluenceSpace {
    Full,
    /// Symmetric square matrices.
    Symmetric,
    /// `{A C Bᵀ}`, stored through the projectors onto the column spaces of `A` and `B`.
    Subspace {
        proj_a: DMatrix<f64>,
        proj_b: DMatrix<f64>,
    },
    LinearConstraint(LinearConstraint),
    /// At most `s` nonzero entries in `vec(V)`.
    Sparse(usize),
}

impl InfluenceSpace {
    pub fn subspace(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Self {
        InfluenceSpace::Subspace {
            proj_a: column_projector(a),
            proj_b: column_projector(b),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InfluenceSpace::Full => "full",
            InfluenceSpace::Symmetric => "symmetric",
            InfluenceSpace::Subspace { .. } => "subspace",
            InfluenceSpace::LinearConstraint(_) => "linear-constraint",
            InfluenceSpace::Sparse(_) => "sparse",
        }
    }

    /// Whether the space is a linear subspace (so it has an orthogonal projector).
    pub fn is_linear(&self) -> bool {
        match self {
            InfluenceSpace::Sparse(_) => false,
            InfluenceSpace::LinearConstraint(c) => c.is_homogeneous(),
            _ => true,
        }
    }

    pub fn check_shape(&self, p: usize, m: usize) -> Result<()> {
        match self {
            InfluenceSpace::Full => Ok(()),
            InfluenceSpace::Symmetric => {
                if p != m {
                    return dim_err(format!("symmetric space needs a square shape, got {p}×{m}"));
                }
                Ok(())
            }
            InfluenceSpace::Subspace { proj_a, proj_b } => {
                if proj_a.nrows() != p || proj_b.nrows() != m {
                    return dim_err(format!(
                        "subspace factors are {}×· and {}×·, influences are {p}×{m}",
                        proj_a.nrows(),
                        proj_b.nrows()
                    ));
                }
                Ok(())
            }
            InfluenceSpace::LinearConstraint(c) => c.embedded(p * m).map(|_| ()),
            InfluenceSpace::Sparse(s) => {
                if *s == 0 || *s > p * m {
                    return invalid(format!("sparsity {s} outside 1..={}", p * m));
                }
                Ok(())
            }
        }
    }

    /// Orthogonal projection onto a linear space. `None` for non-linear sets.
    pub fn linear_project(&self, y: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        match self {
            InfluenceSpace::Full => Some(y.clone()),
            InfluenceSpace::Symmetric => Some((y + y.transpose()) * 0.5),
            InfluenceSpace::Subspace { proj_a, proj_b } => Some(proj_a * y * proj_b),
            InfluenceSpace::LinearConstraint(c) if c.is_homogeneous() => {
                let mut v = vec_of(y);
                let sub = DVector::from_iterator(c.omega.len(), c.omega.iter().map(|&j| v[j]));
                let pinv = linalg::pinv(&c.matrix);
                let removed = &pinv * (&c.matrix * &sub);
                for (k, &j) in c.omega.iter().enumerate() {
                    v[j] -= removed[k];
                }
                Some(unvec(v.as_slice(), y.nrows(), y.ncols()))
            }
            _ => None,
        }
    }

    /// Membership test. Exact for Full and Symmetric, tolerance-based otherwise.
    pub fn contains(&self, v: &DMatrix<f64>, tol: f64) -> bool {
        match self {
            InfluenceSpace::Full => true,
            InfluenceSpace::Symmetric => v.nrows() == v.ncols() && *v == v.transpose(),
            InfluenceSpace::Subspace { proj_a, proj_b } => {
                (v - proj_a * v * proj_b).norm() <= tol
            }
            InfluenceSpace::LinearConstraint(c) => {
                let flat = vec_of(v);
                let sub = DVector::from_iterator(c.omega.len(), c.omega.iter().map(|&j| flat[j]));
                (&c.matrix * sub - &c.rhs).norm() <= tol
            }
            InfluenceSpace::Sparse(s) => v.iter().filter(|x| **x != 0.0).count() <= *s,
        }
    }
}

/// How the influences are stored.
#[derive(Debug, Clone)]
pub enum Representation {
    /// `T_i = x_i r_iᵀ` with `X` n×p and `R` n×m.
    Factored { x: DMatrix<f64>, r: DMatrix<f64> },
    /// Row `i` is `vec(T_i)` (column-major), n×pm.
    Explicit { t: DMatrix<f64> },
}

/// Influences `T_i°` at a hypothesis point together with their space.
#[derive(Debug, Clone)]
pub struct InfluenceSet {
    repr: Representation,
    space: InfluenceSpace,
    p: usize,
    m: usize,
}

impl InfluenceSet {
    pub fn factored(x: DMatrix<f64>, r: DMatrix<f64>, space: InfluenceSpace) -> Result<Self> {
        if x.nrows() != r.nrows() {
            return dim_err(format!("X has {} rows, R has {}", x.nrows(), r.nrows()));
        }
        if x.nrows() == 0 {
            return invalid("no observations");
        }
        check_finite("X", &x)?;
        check_finite("R", &r)?;
        let (p, m) = (x.ncols(), r.ncols());
        space.check_shape(p, m)?;
        Ok(InfluenceSet {
            repr: Representation::Factored { x, r },
            space,
            p,
            m,
        })
    }

    /// `t` holds one vectorized influence per row; `(p, m)` is the matrix shape.
    pub fn explicit(t: DMatrix<f64>, p: usize, m: usize, space: InfluenceSpace) -> Result<Self> {
        if t.ncols() != p * m {
            return dim_err(format!(
                "explicit influences have {} columns, expected {}",
                t.ncols(),
                p * m
            ));
        }
        if t.nrows() == 0 {
            return invalid("no observations");
        }
        check_finite("T", &t)?;
        space.check_shape(p, m)?;
        Ok(InfluenceSet {
            repr: Representation::Explicit { t },
            space,
            p,
            m,
        })
    }

    /// Explicit influences given as plain vectors (shape `(dim, 1)`, full space).
    pub fn from_vectors(t: DMatrix<f64>) -> Result<Self> {
        let d = t.ncols();
        InfluenceSet::explicit(t, d, 1, InfluenceSpace::Full)
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }
    pub fn space(&self) -> &InfluenceSpace {
        &self.space
    }
    pub fn with_space(mut self, space: InfluenceSpace) -> Result<Self> {
        space.check_shape(self.p, self.m)?;
        self.space = space;
        Ok(self)
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.p, self.m)
    }
    pub fn dim(&self) -> usize {
        self.p * self.m
    }
    pub fn n(&self) -> usize {
        match &self.repr {
            Representation::Factored { x, .. } => x.nrows(),
            Representation::Explicit { t } => t.nrows(),
        }
    }

    fn check_direction_shape(&self, v: &DMatrix<f64>) -> Result<()> {
        if v.shape() != (self.p, self.m) {
            return dim_err(format!(
                "direction is {}×{}, influences are {}×{}",
                v.nrows(),
                v.ncols(),
                self.p,
                self.m
            ));
        }
        Ok(())
    }

    /// `⟨V, T_i⟩` for every observation.
    pub fn projections(&self, v: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.check_direction_shape(v)?;
        Ok(self.projections_unchecked(v))
    }

    pub(crate) fn projections_unchecked(&self, v: &DMatrix<f64>) -> DVector<f64> {
        match &self.repr {
            Representation::Factored { x, r } => {
                if self.p == 1 {
                    // X is a column: diag(x) R vᵀ.
                    let mut out: DVector<f64> = r * DVector::from_column_slice(v.as_slice());
                    out.component_mul_assign(&x.column(0));
                    return out;
                }
                // diag(X V Rᵀ) as row sums of (X V) ∘ R.
                let mut xv = x * v;
                xv.component_mul_assign(r);
                let mut out = DVector::zeros(x.nrows());
                for col in xv.column_iter() {
                    out += col;
                }
                out
            }
            Representation::Explicit { t } => {
                let flat = DVector::from_column_slice(v.as_slice());
                t * flat
            }
        }
    }

    /// `Σ_i w_i T_i`.
    pub fn pullback(&self, w: &DVector<f64>) -> DMatrix<f64> {
        match &self.repr {
            Representation::Factored { x, r } if self.p == 1 => {
                let xw = x.column(0).component_mul(w);
                let g = r.tr_mul(&xw);
                DMatrix::from_column_slice(1, self.m, g.as_slice())
            }
            Representation::Factored { x, r } => {
                // Xᵀ diag(w) R column by column on contiguous slices.
                let n = x.nrows();
                let (xs, rs, ws) = (x.as_slice(), r.as_slice(), w.as_slice());
                let mut wr = vec![0.0; n];
                let mut out = DMatrix::zeros(self.p, self.m);
                for k in 0..self.m {
                    for ((o, a), b) in wr.iter_mut().zip(&rs[k * n..(k + 1) * n]).zip(ws) {
                        *o = a * b;
                    }
                    for j in 0..self.p {
                        out[(j, k)] = xs[j * n..(j + 1) * n].iter().zip(&wr).map(|(a, b)| a * b).sum();
                    }
                }
                out
            }
            Representation::Explicit { t } => {
                let flat = t.tr_mul(w);
                unvec(flat.as_slice(), self.p, self.m)
            }
        }
    }

    /// The `n × pm` matrix of vectorized influences.
    pub fn explicit_matrix(&self) -> DMatrix<f64> {
        match &self.repr {
            Representation::Explicit { t } => t.clone(),
            Representation::Factored { x, r } => {
                let (n, p, m) = (x.nrows(), self.p, self.m);
                DMatrix::from_fn(n, p * m, |i, col| {
                    let (j, k) = (col % p, col / p);
                    x[(i, j)] * r[(i, k)]
                })
            }
        }
    }

    /// Influence of observation `i` as a p×m matrix.
    pub fn influence(&self, i: usize) -> DMatrix<f64> {
        match &self.repr {
            Representation::Factored { x, r } => x.row(i).transpose() * r.row(i),
            Representation::Explicit { t } => {
                let row: Vec<f64> = t.row(i).iter().copied().collect();
                unvec(&row, self.p, self.m)
            }
        }
    }

    pub fn to_explicit(&self) -> InfluenceSet {
        InfluenceSet {
            repr: Representation::Explicit {
                t: self.explicit_matrix(),
            },
            space: self.space.clone(),
            p: self.p,
            m: self.m,
        }
    }

    /// Spectral-norm factor `‖X‖₂²‖R‖₂²` (factored) or `‖T̄‖₂²` (explicit) that,
    /// times the φ′ Lipschitz constant, bounds the gradient's Lipschitz constant.
    pub fn curvature_scale(&self) -> f64 {
        match &self.repr {
            Representation::Factored { x, r } => {
                let (a, b) = (linalg::spectral_norm(x), linalg::spectral_norm(r));
                a * a * b * b
            }
            Representation::Explicit { t } => {
                let a = linalg::spectral_norm(t);
                a * a
            }
        }
    }

    /// The tighter `‖X‖₂‖R‖₂(Σ‖x_i‖²‖r_i‖²)^{1/2}` factor (factored only).
    pub fn curvature_scale_fine(&self) -> f64 {
        match &self.repr {
            Representation::Factored { x, r } => {
                let s: f64 = (0..x.nrows())
                    .map(|i| x.row(i).norm_squared() * r.row(i).norm_squared())
                    .sum();
                linalg::spectral_norm(x) * linalg::spectral_norm(r) * s.sqrt()
            }
            Representation::Explicit { .. } => self.curvature_scale(),
        }
    }

    /// Same influences multiplied by a scalar.
    pub fn scaled(&self, k: f64) -> InfluenceSet {
        let repr = match &self.repr {
            Representation::Factored { x, r } => Representation::Factored {
                x: x.clone(),
                r: r * k,
            },
            Representation::Explicit { t } => Representation::Explicit { t: t * k },
        };
        InfluenceSet {
            repr,
            space: self.space.clone(),
            p: self.p,
            m: self.m,
        }
    }
}

/// A unit direction (`r = 1`, p×m with `‖V‖_F = 1`) or a column-orthonormal
/// frame (`r > 1`, pm×r).
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    mat: DMatrix<f64>,
    r: usize,
}

impl Direction {
    pub const UNIT_TOL: f64 = 1e-12;
    pub const FRAME_TOL: f64 = 1e-10;

    pub fn unit(mat: DMatrix<f64>) -> Result<Self> {
        let nrm = mat.norm();
        if (nrm - 1.0).abs() > Self::UNIT_TOL {
            return invalid(format!("direction has Frobenius norm {nrm}, expected 1"));
        }
        Ok(Direction { mat, r: 1 })
    }

    /// Normalizes a nonzero matrix.
    pub fn normalized(mat: DMatrix<f64>) -> Result<Self> {
        let nrm = mat.norm();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return invalid("cannot normalize a zero or non-finite direction");
        }
        Ok(Direction { mat: mat / nrm, r: 1 })
    }

    pub fn frame(mat: DMatrix<f64>) -> Result<Self> {
        let r = mat.ncols();
        let gram = mat.transpose() * &mat;
        let err = (gram - DMatrix::identity(r, r)).amax();
        if err > Self::FRAME_TOL {
            return invalid(format!("frame columns deviate from orthonormality by {err}"));
        }
        Ok(Direction { mat, r })
    }

    pub(crate) fn from_parts_unchecked(mat: DMatrix<f64>, r: usize) -> Self {
        Direction { mat, r }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }
    pub fn rank(&self) -> usize {
        self.r
    }

    /// Column `s` of a frame reshaped to p×m (or the direction itself when r = 1).
    pub fn component(&self, s: usize, p: usize, m: usize) -> DMatrix<f64> {
        if self.r == 1 {
            self.mat.clone()
        } else {
            let col: Vec<f64> = self.mat.column(s).iter().copied().collect();
            unvec(&col, p, m)
        }
    }

    /// Entries in row-major order (the serialization layout).
    pub fn row_major(&self) -> Vec<f64> {
        let (rows, cols) = self.mat.shape();
        let mut out = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                out.push(self.mat[(i, j)]);
            }
        }
        out
    }

    pub fn negated(&self) -> Direction {
        Direction {
            mat: -&self.mat,
            r: self.r,
        }
    }
}

/// 0-1 depth count `Σ_i c(⟨V, T_i⟩)`; for frames the product indicator over columns.
pub fn evaluate_d01(
    influences: &InfluenceSet,
    v: &Direction,
    convention: SignConvention,
) -> Result<f64> {
    let (p, m) = influences.shape();
    if v.rank() == 1 {
        let proj = influences.projections(v.matrix())?;
        return Ok(proj.iter().map(|&t| convention.indicator(t)).sum());
    }
    if v.matrix().nrows() != p * m {
        return dim_err(format!(
            "frame has {} rows, influences have dimension {}",
            v.matrix().nrows(),
            p * m
        ));
    }
    let mut weight = DVector::from_element(influences.n(), 1.0);
    for s in 0..v.rank() {
        let proj = influences.projections_unchecked(&v.component(s, p, m));
        for (w, t) in weight.iter_mut().zip(proj.iter()) {
            *w *= convention.indicator(*t);
        }
    }
    Ok(weight.sum())
}

/// Smooth objective `Σ_i φ(⟨V, T_i⟩)` for a single direction.
pub fn phi_objective(influences: &InfluenceSet, phi: &PhiFunction, v: &DMatrix<f64>) -> Result<f64> {
    let proj = influences.projections(v)?;
    Ok(proj.iter().map(|&t| phi.eval(t)).sum())
}

/// Result of a depth computation.
#[derive(Debug, Clone)]
pub struct DepthResult {
    /// 0-1 count; half-integers are possible under [`SignConvention::HalfAtZero`].
    pub d01_count: f64,
    pub d01_fraction: f64,
    pub smooth_objective: f64,
    pub direction: Direction,
    pub iterations: usize,
    pub starts_used: usize,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
    pub trace: Option<crate::solver::SolverTrace>,
}

impl DepthResult {
    pub(crate) fn fraction(count: f64, n: usize) -> f64 {
        count / n as f64
    }
}

/// Solver parameters. Defaults follow the reference experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub phi: PhiFamily,
    pub zeta_start: f64,
    pub zeta_max: f64,
    /// Annealing factor α.
    pub zeta_factor: f64,
    pub rho_min: f64,
    /// Line-search growth factor β.
    pub beta: f64,
    /// Line-search budget M.
    pub max_searches: usize,
    pub tol_obj: f64,
    pub tol_grad_maxnorm: f64,
    pub max_iter: usize,
    /// Number of random starting observations n₀.
    pub n_starts: usize,
    pub seed: u64,
    pub sign_convention: SignConvention,
    /// Rescale influences so projections are O(1) before annealing.
    pub auto_scale: bool,
    pub threads: Option<usize>,
    /// Keep full iterates in traces (for offline verification).
    pub record_iterates: bool,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            phi: PhiFamily::Tanh,
            zeta_start: 1.0,
            zeta_max: 10.0,
            zeta_factor: 1.25,
            rho_min: 1.0,
            beta: 2.0,
            max_searches: 3,
            tol_obj: 1e-2,
            tol_grad_maxnorm: 1.0,
            max_iter: 5000,
            n_starts: 10,
            seed: 0,
            sign_convention: SignConvention::RightClosed,
            auto_scale: true,
            threads: None,
            record_iterates: false,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("zeta_start", self.zeta_start),
            ("zeta_max", self.zeta_max),
            ("rho_min", self.rho_min),
            ("tol_obj", self.tol_obj),
            ("tol_grad_maxnorm", self.tol_grad_maxnorm),
        ];
        for (name, val) in positive {
            if !(val > 0.0) || !val.is_finite() {
                return invalid(format!("{name} must be positive and finite, got {val}"));
            }
        }
        if !(self.beta > 1.0) {
            return invalid(format!("beta must exceed 1, got {}", self.beta));
        }
        if !(self.zeta_factor > 1.0) {
            return invalid(format!("zeta_factor must exceed 1, got {}", self.zeta_factor));
        }
        if self.max_searches < 1 {
            return invalid("max_searches must be at least 1");
        }
        if self.max_iter < 1 {
            return invalid("max_iter must be at least 1");
        }
        if self.n_starts < 1 {
            return invalid("n_starts must be at least 1");
        }
        if self.threads == Some(0) {
            return invalid("threads must be at least 1");
        }
        Ok(())
    }

    /// The annealing schedule ζ_start, αζ_start, … while ζ ≤ ζ_max.
    pub fn zeta_schedule(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut z = self.zeta_start;
        while z <= self.zeta_max * (1.0 + 1e-12) {
            out.push(z);
            z *= self.zeta_factor;
        }
        if out.is_empty() {
            out.push(self.zeta_max);
        }
        out
    }

    pub(crate) fn phi_at(&self, zeta: f64) -> PhiFunction {
        PhiFunction::new(self.phi).with_zeta(zeta)
    }
}
