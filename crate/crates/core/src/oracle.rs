//! Exact low-dimensional depth computations used for verification.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;

use crate::error::{dim_err, invalid, DepthError, Result};
use crate::influence::barycentric;
use crate::model::{InfluenceSet, InfluenceSpace, SignConvention, ZERO_TOL};
use crate::phi::PhiFunction;

/// Largest sample accepted by [`exact_depth_3d`].
pub const MAX_N_3D: usize = 200;

fn vectors_of(inf: &InfluenceSet, dim: usize) -> Result<Vec<Vec<f64>>> {
    if inf.dim() != dim {
        return dim_err(format!(
            "exact oracle for dimension {dim} called on influences of dimension {}",
            inf.dim()
        ));
    }
    if !matches!(inf.space(), InfluenceSpace::Full) {
        return Err(DepthError::Unsupported(format!(
            "exact oracles work in the full space, got {}",
            inf.space().name()
        )));
    }
    let t = inf.explicit_matrix();
    Ok(t.row_iter().map(|r| r.iter().copied().collect()).collect())
}

fn zero_weight(conv: SignConvention) -> f64 {
    conv.indicator(0.0)
}

/// Minimum over open angular sectors of `#{i : ⟨d, s_i⟩ > 0}` for nonzero 2D vectors.
fn min_open_count_2d(vs: &[[f64; 2]]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    let mut crit: Vec<f64> = Vec::with_capacity(2 * vs.len());
    for v in vs {
        let a = v[1].atan2(v[0]);
        for b in [a + FRAC_PI_2, a - FRAC_PI_2] {
            crit.push(b.rem_euclid(TAU));
        }
    }
    crit.sort_by(f64::total_cmp);
    crit.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let k = crit.len();
    let mut best = usize::MAX;
    for i in 0..k {
        let lo = crit[i];
        let hi = if i + 1 < k { crit[i + 1] } else { crit[0] + TAU };
        let mid = 0.5 * (lo + hi);
        let d = [mid.cos(), mid.sin()];
        let c = vs.iter().filter(|v| d[0] * v[0] + d[1] * v[1] > 0.0).count();
        best = best.min(c);
    }
    best
}

/// Exact 0-1 depth for scalar influences: the smaller count over `v = ±1`.
pub fn exact_depth_1d(inf: &InfluenceSet, conv: SignConvention) -> Result<f64> {
    let ts = vectors_of(inf, 1)?;
    let pos: f64 = ts.iter().map(|t| conv.indicator(t[0])).sum();
    let neg: f64 = ts.iter().map(|t| conv.indicator(-t[0])).sum();
    Ok(pos.min(neg))
}

/// Exact 0-1 depth for 2D influences by an angular sweep.
///
/// The minimum over all directions is attained on an open sector between
/// consecutive critical angles, under either convention.
pub fn exact_depth_2d(inf: &InfluenceSet, conv: SignConvention) -> Result<f64> {
    let ts = vectors_of(inf, 2)?;
    let mut zeros = 0usize;
    let mut vs = Vec::with_capacity(ts.len());
    for t in &ts {
        if t[0].hypot(t[1]) <= ZERO_TOL {
            zeros += 1;
        } else {
            vs.push([t[0], t[1]]);
        }
    }
    Ok(zeros as f64 * zero_weight(conv) + min_open_count_2d(&vs) as f64)
}

/// Exact 0-1 depth for 3D influences.
///
/// Every open cell of the great-circle arrangement has a vertex
/// `±t_i × t_j` on its boundary; at each vertex the adjacent cells are
/// resolved exactly by a 2D sweep over the influences orthogonal to it.
pub fn exact_depth_3d(inf: &InfluenceSet, conv: SignConvention) -> Result<f64> {
    let ts = vectors_of(inf, 3)?;
    if ts.len() > MAX_N_3D {
        return invalid(format!("exact 3D oracle supports n ≤ {MAX_N_3D}, got {}", ts.len()));
    }
    let mut zeros = 0usize;
    let mut vs: Vec<Vector3<f64>> = Vec::with_capacity(ts.len());
    for t in &ts {
        let v = Vector3::new(t[0], t[1], t[2]);
        if v.norm() <= ZERO_TOL {
            zeros += 1;
        } else {
            vs.push(v);
        }
    }
    let base = zeros as f64 * zero_weight(conv);
    if vs.is_empty() {
        return Ok(base);
    }
    let units: Vec<Vector3<f64>> = vs.iter().map(|v| v.normalize()).collect();
    let mut candidates: Vec<Vector3<f64>> = Vec::new();
    for i in 0..units.len() {
        for j in i + 1..units.len() {
            let c = units[i].cross(&units[j]);
            if c.norm() > 1e-10 {
                let c = c.normalize();
                candidates.push(c);
                candidates.push(-c);
            }
        }
    }
    if candidates.is_empty() {
        // All influences are parallel: the cells are the two open hemispheres.
        let c = units[0];
        let pos = units.iter().filter(|u| u.dot(&c) > 0.0).count();
        return Ok(base + pos.min(units.len() - pos) as f64);
    }
    let best = candidates
        .par_iter()
        .map(|c| {
            let helper = if c.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            let e1 = c.cross(&helper).normalize();
            let e2 = c.cross(&e1);
            let mut fixed = 0usize;
            let mut tangent = Vec::new();
            for u in &units {
                let d = u.dot(c);
                if d.abs() <= 1e-10 {
                    tangent.push([u.dot(&e1), u.dot(&e2)]);
                } else if d > 0.0 {
                    fixed += 1;
                }
            }
            fixed + min_open_count_2d(&tangent)
        })
        .min()
        .expect("non-empty candidates");
    Ok(base + best as f64)
}

/// Number of triangles `(z_i, z_j, z_k)`, `i < j < k`, strictly containing `μ°`.
///
/// Collinear triples and triples with `μ°` on an edge are rejected.
pub fn simplicial_depth_2d(z: &DMatrix<f64>, mu: &DVector<f64>) -> Result<usize> {
    if z.ncols() != 2 || mu.len() != 2 {
        return dim_err("simplicial depth needs 2D data and a 2D point");
    }
    let pts: Vec<[f64; 2]> = z.row_iter().map(|r| [r[0], r[1]]).collect();
    let q = [mu[0], mu[1]];
    let n = pts.len();
    let mut count = 0;
    let mut bad: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                match barycentric(pts[i], pts[j], pts[k], q) {
                    None => bad.push((i, j, k)),
                    Some(xi) if xi.iter().any(|&x| x == 0.0) => bad.push((i, j, k)),
                    Some(xi) if xi.iter().all(|&x| x > 0.0) => count += 1,
                    Some(_) => {}
                }
            }
        }
    }
    if !bad.is_empty() {
        let shown: Vec<String> = bad.iter().take(5).map(|(i, j, k)| format!("({i}, {j}, {k})")).collect();
        return invalid(format!(
            "{} degenerate triples (collinear or with the point on an edge), e.g. {}",
            bad.len(),
            shown.join(", ")
        ));
    }
    Ok(count)
}

/// Which depth formula a curve uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveForm {
    /// `min_v Σ φ(v(μ − z_i))/n`.
    OneSided,
    /// `1/2 + min_v Σ φ(v(μ − z_i))/(2n)` for two-sided φ.
    Contrast,
}

/// Exact 1D depth curve over a grid of candidate locations.
pub fn grid_depth_curve(z: &[f64], phi: &PhiFunction, grid: &[f64], form: CurveForm) -> Vec<(f64, f64)> {
    let n = z.len() as f64;
    grid.iter()
        .map(|&mu| {
            let pos: f64 = z.iter().map(|&zi| phi.eval(mu - zi)).sum();
            let neg: f64 = z.iter().map(|&zi| phi.eval(zi - mu)).sum();
            let best = pos.min(neg);
            let val = match form {
                CurveForm::OneSided => best / n,
                CurveForm::Contrast => 0.5 + best / (2.0 * n),
            };
            (mu, val)
        })
        .collect()
}

/// Evenly spaced grid `a, a + step, …` up to `b` (inclusive within half a step).
pub fn make_grid(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
        return invalid(format!("invalid grid {a}:{b}:{step}"));
    }
    let k = ((b - a) / step + 0.5).floor() as usize;
    Ok((0..=k).map(|i| a + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::PhiFamily;

    fn vecs(rows: usize, cols: usize, v: &[f64]) -> InfluenceSet {
        InfluenceSet::from_vectors(DMatrix::from_row_slice(rows, cols, v)).unwrap()
    }

    const RC: SignConvention = SignConvention::RightClosed;

    #[test]
    fn one_dimensional() {
        assert_eq!(exact_depth_1d(&vecs(2, 1, &[1.0, -1.0]), RC).unwrap(), 1.0);
        assert_eq!(exact_depth_1d(&vecs(3, 1, &[-1.0, -2.0, -3.0]), RC).unwrap(), 0.0);
        assert_eq!(exact_depth_1d(&vecs(3, 1, &[1.0, 0.0, -1.0]), RC).unwrap(), 2.0);
        assert_eq!(exact_depth_1d(&vecs(3, 1, &[1.0, 0.0, -1.0]), SignConvention::HalfAtZero).unwrap(), 1.5);
        assert!(exact_depth_1d(&vecs(1, 2, &[1.0, 0.0]), RC).is_err());
    }

    #[test]
    fn two_dimensional() {
        let cross = vecs(4, 2, &[-1.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 1.0]);
        assert_eq!(exact_depth_2d(&cross, RC).unwrap(), 2.0);
        assert_eq!(exact_depth_2d(&vecs(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]), RC).unwrap(), 0.0);
        assert_eq!(exact_depth_2d(&vecs(1, 2, &[0.3, -0.2]), RC).unwrap(), 0.0);
    }

    #[test]
    fn three_dimensional() {
        let axes = vecs(6, 3, &[1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0]);
        assert_eq!(exact_depth_3d(&axes, RC).unwrap(), 3.0);
        assert_eq!(exact_depth_3d(&vecs(3, 3, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]), RC).unwrap(), 0.0);
        assert_eq!(exact_depth_3d(&vecs(2, 3, &[1.0, 2.0, 3.0, -1.0, -2.0, -3.0]), RC).unwrap(), 1.0);
    }

    #[test]
    fn simplicial_examples() {
        let tri = DMatrix::from_row_slice(3, 2, &[-1.0, -1.0, 1.0, -1.0, 0.0, 1.0]);
        assert_eq!(simplicial_depth_2d(&tri, &DVector::zeros(2)).unwrap(), 1);
        assert_eq!(simplicial_depth_2d(&tri, &DVector::from_vec(vec![5.0, 5.0])).unwrap(), 0);
        let diamond = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        assert_eq!(simplicial_depth_2d(&diamond, &DVector::from_vec(vec![0.1, 0.1])).unwrap(), 2);
        assert!(simplicial_depth_2d(&diamond, &DVector::zeros(2)).is_err());
    }

    #[test]
    fn curve_examples() {
        let z = [1.0, 4.0, 2.0, 9.0, 5.0];
        let rs = PhiFunction::new(PhiFamily::RectifiedSign);
        let c = grid_depth_curve(&z, &rs, &[4.0, -1.0], CurveForm::OneSided);
        assert_eq!(c[0].1, 3.0 / 5.0);
        assert_eq!(c[1].1, 0.0);
        let sign = PhiFunction::new(PhiFamily::Sign);
        let grid = make_grid(-2.0, 11.0, 0.25).unwrap();
        let a = grid_depth_curve(&z, &sign, &grid, CurveForm::Contrast);
        let b = grid_depth_curve(&z, &rs, &grid, CurveForm::OneSided);
        for (x, y) in a.iter().zip(&b) {
            assert!((x.1 - y.1).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_parsing() {
        let g = make_grid(-6.0, 6.0, 0.01).unwrap();
        assert_eq!(g.len(), 1201);
        assert!((g[1200] - 6.0).abs() < 1e-9);
        assert!(make_grid(1.0, 0.0, 0.1).is_err());
    }
}
