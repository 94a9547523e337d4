//! Starting directions: negated influences of random observations plus a
//! spherical-PCA direction.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::unvec;
use crate::model::{evaluate_d01, Direction, InfluenceSet, SignConvention};
use crate::projections::project_unit;

/// Starting directions and any warnings raised while building them.
#[derive(Debug, Clone)]
pub struct InitDirections {
    pub directions: Vec<Direction>,
    pub warnings: Vec<String>,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Eigenvector of the smallest eigenvalue of the covariance of the
/// median-centered, sphere-projected vectorized influences.
pub fn spherical_pca_direction(inf: &InfluenceSet) -> Option<DMatrix<f64>> {
    let t = inf.explicit_matrix();
    let (n, d) = t.shape();
    let center = DVector::from_fn(d, |j, _| {
        let mut col: Vec<f64> = t.column(j).iter().copied().collect();
        median(&mut col)
    });
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let x = t.row(i).transpose() - &center;
        let nrm = x.norm();
        if nrm > 1e-12 {
            rows.push(x / nrm);
        }
    }
    if rows.is_empty() {
        return None;
    }
    let k = rows.len() as f64;
    let mean: DVector<f64> = rows.iter().fold(DVector::zeros(d), |a, r| a + r) / k;
    let mut cov = DMatrix::zeros(d, d);
    for r in &rows {
        let c = r - &mean;
        cov += &c * c.transpose();
    }
    cov /= k;
    let eig = cov.symmetric_eigen();
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))?;
    let vec = eig.eigenvectors.column(imin).into_owned();
    let (p, m) = inf.shape();
    Some(unvec(vec.as_slice(), p, m))
}

/// `n₀` directions `−T_i` for random observations (projected and normalized,
/// zero candidates redrawn up to `10n₀` times) plus the spherical-PCA direction
/// with its sign chosen by the lower 0-1 count.
pub fn init_directions(inf: &InfluenceSet, n0: usize, seed: u64) -> Result<InitDirections> {
    if n0 == 0 {
        return invalid("need at least one starting observation");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = inf.space();
    let (p, m) = inf.shape();
    let n = inf.n();
    let mut directions = Vec::with_capacity(n0 + 1);
    let mut warnings = Vec::new();
    let mut attempts = 0;
    while directions.len() < n0 && attempts < 10 * n0 {
        attempts += 1;
        let i = rng.random_range(0..n);
        let cand = -inf.influence(i);
        if cand.norm() <= 1e-12 {
            continue;
        }
        let proj = project_unit(&cand, space)?;
        if !proj.degenerate {
            directions.push(proj.into_direction());
        }
    }
    if directions.len() < n0 {
        warnings.push(format!(
            "only {} of {n0} sampled influences gave usable directions; filled with random directions",
            directions.len()
        ));
        while directions.len() < n0 {
            let g = DMatrix::from_fn(p, m, |_, _| rng.sample::<f64, _>(StandardNormal));
            directions.push(project_unit(&g, space)?.into_direction());
        }
    }
    let pca = spherical_pca_direction(inf)
        .map(|d| project_unit(&d, space))
        .transpose()?
        .filter(|pr| !pr.degenerate);
    match pca {
        Some(pr) => {
            let pos = pr.into_direction();
            let neg = pos.negated();
            let conv = SignConvention::RightClosed;
            let (cp, cn) = (evaluate_d01(inf, &pos, conv)?, evaluate_d01(inf, &neg, conv)?);
            directions.push(if cn < cp { neg } else { pos });
        }
        None => {
            warnings.push("spherical PCA direction unavailable; using a random direction".into());
            let g = DMatrix::from_fn(p, m, |_, _| rng.sample::<f64, _>(StandardNormal));
            directions.push(project_unit(&g, space)?.into_direction());
        }
    }
    Ok(InitDirections {
        directions,
        warnings,
    })
}

/// Random column-orthonormal frames of shape `d × r` (QR of Gaussian draws).
pub fn random_frames(d: usize, r: usize, count: usize, seed: u64) -> Vec<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g = DMatrix::from_fn(d, r, |_, _| rng.sample::<f64, _>(StandardNormal));
            g.qr().q()
        })
        .collect()
}
