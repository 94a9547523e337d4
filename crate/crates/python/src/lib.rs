//! Python bindings for depthkit.

use depthkit::deepest::{composite_depth, CompositeOptions, ConstraintRegion, DepthProblem};
use depthkit::oracle::{exact_depth_1d, exact_depth_2d, exact_depth_3d, grid_depth_curve, CurveForm};
use depthkit::{
    covariance_influences, evaluate_d01, glm_influences, location_influences, normalize_influences, sap,
    solver::triangle_depth, subspace_solve, DepthError, DepthResult, Direction, GlmFamily, InfluenceSet,
    PhiFamily, PhiFunction, SignConvention, SolverConfig,
};
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: DepthError) -> PyErr {
    if e.is_data_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> PyResult<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err(format!("{what} has rows of different lengths")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn parse<T: std::str::FromStr<Err = DepthError>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

/// Per-observation influences at a hypothesis point.
#[pyclass(name = "InfluenceSet", skip_from_py_object)]
#[derive(Clone)]
pub struct PyInfluenceSet {
    inner: InfluenceSet,
}

#[pymethods]
impl PyInfluenceSet {
    /// Location influences `μ − z_i` for data rows `z`.
    #[staticmethod]
    fn location(z: Vec<Vec<f64>>, mu: Vec<f64>) -> PyResult<Self> {
        let z = matrix(&z, "z")?;
        let inner = location_influences(&z, &DVector::from_vec(mu)).map_err(py_err)?;
        Ok(PyInfluenceSet { inner })
    }

    /// Linear-regression influences at coefficients `beta`.
    #[staticmethod]
    fn regression(x: Vec<Vec<f64>>, y: Vec<f64>, beta: Vec<f64>) -> PyResult<Self> {
        let x = matrix(&x, "x")?;
        let n = y.len();
        let b = DMatrix::from_vec(beta.len(), 1, beta);
        let inner =
            glm_influences(&x, &DMatrix::from_vec(n, 1, y), &b, GlmFamily::Gaussian).map_err(py_err)?;
        Ok(PyInfluenceSet { inner })
    }

    /// GLM influences with responses `y` (n×m) at coefficients `b` (p×m).
    #[staticmethod]
    #[pyo3(signature = (x, y, b, family = "gaussian"))]
    fn glm(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, b: Vec<Vec<f64>>, family: &str) -> PyResult<Self> {
        let inner = glm_influences(&matrix(&x, "x")?, &matrix(&y, "y")?, &matrix(&b, "b")?, parse(family)?)
            .map_err(py_err)?;
        Ok(PyInfluenceSet { inner })
    }

    /// Covariance influences at `sigma`.
    #[staticmethod]
    fn covariance(y: Vec<Vec<f64>>, sigma: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = covariance_influences(&matrix(&y, "y")?, &matrix(&sigma, "sigma")?).map_err(py_err)?;
        Ok(PyInfluenceSet { inner })
    }

    /// Rows of the influences as vectors (column-major vectorization).
    #[staticmethod]
    fn from_vectors(t: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = InfluenceSet::from_vectors(matrix(&t, "t")?).map_err(py_err)?;
        Ok(PyInfluenceSet { inner })
    }

    /// The affine-invariant normalized form.
    fn normalized(&self) -> PyResult<Self> {
        let inner = normalize_influences(&self.inner).map_err(py_err)?;
        Ok(PyInfluenceSet { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    /// The n×pm matrix of vectorized influences.
    fn explicit(&self) -> Vec<Vec<f64>> {
        rows_of(&self.inner.explicit_matrix())
    }

    /// `⟨V, T_i⟩` for a p×m direction.
    fn projections(&self, v: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let p = self.inner.projections(&matrix(&v, "v")?).map_err(py_err)?;
        Ok(p.iter().copied().collect())
    }

    /// 0-1 count of a unit direction.
    #[pyo3(signature = (v, convention = "right-closed"))]
    fn d01(&self, v: Vec<Vec<f64>>, convention: &str) -> PyResult<f64> {
        let d = Direction::unit(matrix(&v, "v")?).map_err(py_err)?;
        evaluate_d01(&self.inner, &d, parse(convention)?).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        let (p, m) = self.inner.shape();
        format!("InfluenceSet(n={}, shape=({p}, {m}), space={})", self.inner.n(), self.inner.space().name())
    }
}

/// Solver settings; defaults follow the library.
#[pyclass(name = "SolverConfig", skip_from_py_object, get_all, set_all)]
#[derive(Clone)]
pub struct PySolverConfig {
    phi: String,
    zeta_max: f64,
    alpha: f64,
    starts: usize,
    seed: u64,
    tol_obj: f64,
    tol_grad: f64,
    max_iter: usize,
    convention: String,
    auto_scale: bool,
    threads: Option<usize>,
}

impl Default for PySolverConfig {
    fn default() -> Self {
        let c = SolverConfig::default();
        PySolverConfig {
            phi: c.phi.name().to_string(),
            zeta_max: c.zeta_max,
            alpha: c.zeta_factor,
            starts: c.n_starts,
            seed: c.seed,
            tol_obj: c.tol_obj,
            tol_grad: c.tol_grad_maxnorm,
            max_iter: c.max_iter,
            convention: c.sign_convention.name().to_string(),
            auto_scale: c.auto_scale,
            threads: c.threads,
        }
    }
}

impl PySolverConfig {
    fn to_core(&self) -> PyResult<SolverConfig> {
        let cfg = SolverConfig {
            phi: self.phi.parse::<PhiFamily>().map_err(py_err)?,
            zeta_max: self.zeta_max,
            zeta_factor: self.alpha,
            n_starts: self.starts,
            seed: self.seed,
            tol_obj: self.tol_obj,
            tol_grad_maxnorm: self.tol_grad,
            max_iter: self.max_iter,
            sign_convention: parse(&self.convention)?,
            auto_scale: self.auto_scale,
            threads: self.threads,
            ..SolverConfig::default()
        };
        cfg.validate().map_err(py_err)?;
        Ok(cfg)
    }
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let mut out = PySolverConfig::default();
        if let Some(d) = kwargs {
            let py = d.py();
            let obj = Bound::new(py, out.clone())?;
            for (k, v) in d.iter() {
                obj.setattr(k.extract::<String>()?.as_str(), v)?;
            }
            out = obj.borrow().clone();
        }
        out.to_core()?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "SolverConfig(phi='{}', zeta_max={}, alpha={}, starts={}, seed={}, convention='{}')",
            self.phi, self.zeta_max, self.alpha, self.starts, self.seed, self.convention
        )
    }
}

fn config_of(c: Option<PyRef<'_, PySolverConfig>>) -> PyResult<SolverConfig> {
    match c {
        Some(c) => c.to_core(),
        None => Ok(SolverConfig::default()),
    }
}

/// Outcome of a depth computation.
#[pyclass(name = "DepthResult", skip_from_py_object, get_all)]
#[derive(Clone)]
pub struct PyDepthResult {
    count: f64,
    fraction: f64,
    smooth_objective: f64,
    direction: Vec<Vec<f64>>,
    iterations: usize,
    starts: usize,
    wall_time_s: f64,
    warnings: Vec<String>,
}

impl From<DepthResult> for PyDepthResult {
    fn from(r: DepthResult) -> Self {
        PyDepthResult {
            count: r.d01_count,
            fraction: r.d01_fraction,
            smooth_objective: r.smooth_objective,
            direction: rows_of(r.direction.matrix()),
            iterations: r.iterations,
            starts: r.starts_used,
            wall_time_s: r.wall_time_s,
            warnings: r.warnings,
        }
    }
}

#[pymethods]
impl PyDepthResult {
    fn __repr__(&self) -> String {
        format!("DepthResult(count={}, fraction={})", self.count, self.fraction)
    }
}

/// Half-space depth by successive accelerated projection.
#[pyfunction]
#[pyo3(signature = (influences, config = None))]
fn depth(py: Python<'_>, influences: PyRef<'_, PyInfluenceSet>, config: Option<PyRef<'_, PySolverConfig>>) -> PyResult<PyDepthResult> {
    let cfg = config_of(config)?;
    let inf = influences.inner.clone();
    let res = py.detach(move || sap(&inf, &cfg)).map_err(py_err)?;
    Ok(res.into())
}

/// Polished subspace depth with frames of width `r`.
#[pyfunction]
#[pyo3(signature = (influences, r, config = None))]
fn subspace_depth(
    py: Python<'_>,
    influences: PyRef<'_, PyInfluenceSet>,
    r: usize,
    config: Option<PyRef<'_, PySolverConfig>>,
) -> PyResult<PyDepthResult> {
    let cfg = config_of(config)?;
    let inf = influences.inner.clone();
    let phi = PhiFunction::new(cfg.phi);
    let res = py.detach(move || subspace_solve(&inf, &phi, r, &cfg)).map_err(py_err)?;
    Ok(res.into())
}

/// Projected triangle depth of `mu` among the rows of `z`.
#[pyfunction(name = "triangle_depth")]
#[pyo3(signature = (z, mu, config = None))]
fn py_triangle_depth(
    py: Python<'_>,
    z: Vec<Vec<f64>>,
    mu: Vec<f64>,
    config: Option<PyRef<'_, PySolverConfig>>,
) -> PyResult<PyDepthResult> {
    let cfg = config_of(config)?;
    let z = matrix(&z, "z")?;
    let mu = DVector::from_vec(mu);
    let res = py.detach(move || triangle_depth(&z, &mu, &cfg)).map_err(py_err)?;
    Ok(res.into())
}

/// Exact 0-1 depth for influences of dimension 1, 2 or 3.
#[pyfunction]
#[pyo3(signature = (influences, convention = "right-closed"))]
fn exact_depth(influences: PyRef<'_, PyInfluenceSet>, convention: &str) -> PyResult<f64> {
    let conv: SignConvention = parse(convention)?;
    let inf = influences.inner.to_explicit();
    match inf.dim() {
        1 => exact_depth_1d(&inf, conv),
        2 => exact_depth_2d(&inf, conv),
        3 => exact_depth_3d(&inf, conv),
        k => return Err(PyValueError::new_err(format!("exact depth needs dimension ≤ 3, got {k}"))),
    }
    .map_err(py_err)
}

/// Deepest location found by the nested max-min scheme: `(mu, result)`.
#[pyfunction]
#[pyo3(signature = (z, config = None, max_outer = 100))]
fn deepest_location(
    py: Python<'_>,
    z: Vec<Vec<f64>>,
    config: Option<PyRef<'_, PySolverConfig>>,
    max_outer: usize,
) -> PyResult<(Vec<f64>, PyDepthResult)> {
    let cfg = config_of(config)?;
    let problem = DepthProblem::location(matrix(&z, "z")?).map_err(py_err)?;
    let opts = CompositeOptions { max_outer, start: None };
    let res = py
        .detach(move || composite_depth(&problem, &ConstraintRegion::Unrestricted, &cfg, &opts))
        .map_err(py_err)?;
    Ok((res.b.iter().copied().collect(), res.depth.into()))
}

/// 1D depth curve `[(mu, depth/n)]` over `grid`.
#[pyfunction]
#[pyo3(signature = (z, grid, phi = "sign", c = 1.0, contrast = false))]
fn depth_curve(z: Vec<f64>, grid: Vec<f64>, phi: &str, c: f64, contrast: bool) -> PyResult<Vec<(f64, f64)>> {
    let f = PhiFunction::new(phi.parse::<PhiFamily>().map_err(py_err)?).with_c(c);
    f.validate().map_err(py_err)?;
    let form = if contrast { CurveForm::Contrast } else { CurveForm::OneSided };
    Ok(grid_depth_curve(&z, &f, &grid, form))
}

#[pymodule]
fn depthkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInfluenceSet>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyDepthResult>()?;
    m.add_function(wrap_pyfunction!(depth, m)?)?;
    m.add_function(wrap_pyfunction!(subspace_depth, m)?)?;
    m.add_function(wrap_pyfunction!(py_triangle_depth, m)?)?;
    m.add_function(wrap_pyfunction!(exact_depth, m)?)?;
    m.add_function(wrap_pyfunction!(deepest_location, m)?)?;
    m.add_function(wrap_pyfunction!(depth_curve, m)?)?;
    Ok(())
}
