#![allow(dead_code)]

use depthkit::deepest::DepthProblem;
use depthkit::influence::{covariance_influences, glm_influences, location_influences, meta_influences};
use depthkit::{normalize_influences, Dataset, GlmFamily, InfluenceSet, MetaBlock};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gauss_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    gauss(rng, d, d).qr().q()
}

pub fn spd(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let a = gauss(rng, m, m);
    &a * a.transpose() / m as f64 + DMatrix::identity(m, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Location,
    Regression,
    Logistic,
    Poisson,
    Covariance,
    Meta,
    Normalized,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::Location,
        Kind::Regression,
        Kind::Logistic,
        Kind::Poisson,
        Kind::Covariance,
        Kind::Meta,
        Kind::Normalized,
    ];
}

/// Design with an intercept column and GLM responses drawn at coefficients `b`.
pub fn glm_data(rng: &mut ChaCha8Rng, n: usize, p: usize, m: usize, family: GlmFamily) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let mut x = gauss(rng, n, p);
    x.column_mut(0).fill(1.0);
    let b = gauss(rng, p, m) * 0.3;
    let theta = &x * &b;
    let y = DMatrix::from_fn(n, m, |i, k| {
        let t = theta[(i, k)];
        match family {
            GlmFamily::Gaussian => t + rng.sample::<f64, _>(StandardNormal),
            GlmFamily::Logistic => f64::from(rng.random_bool(1.0 / (1.0 + (-t).exp()))),
            GlmFamily::Poisson => Poisson::new(t.exp()).unwrap().sample(rng),
        }
    });
    (x, y, b)
}

pub fn glm_problem(rng: &mut ChaCha8Rng, n: usize, p: usize, m: usize, family: GlmFamily) -> (DepthProblem, DMatrix<f64>) {
    let (x, y, b) = glm_data(rng, n, p, m, family);
    (DepthProblem::glm(Dataset::new(x, y).unwrap(), family), b)
}

/// A random influence set of the given kind with moderate sizes.
pub fn influences(kind: Kind, rng: &mut ChaCha8Rng) -> InfluenceSet {
    let n = rng.random_range(15..40);
    match kind {
        Kind::Location => {
            let m = rng.random_range(2..5);
            let z = gauss(rng, n, m);
            location_influences(&z, &(gauss_vec(rng, m) * 0.3)).unwrap()
        }
        Kind::Regression | Kind::Logistic | Kind::Poisson => {
            let fam = match kind {
                Kind::Regression => GlmFamily::Gaussian,
                Kind::Logistic => GlmFamily::Logistic,
                _ => GlmFamily::Poisson,
            };
            let p = rng.random_range(2..4);
            let m = if kind == Kind::Regression { 1 } else { rng.random_range(1..3) };
            let (x, y, b) = glm_data(rng, n, p, m, fam);
            let b0 = &b + gauss(rng, p, m) * 0.2;
            glm_influences(&x, &y, &b0, fam).unwrap()
        }
        Kind::Covariance => {
            let m = rng.random_range(2..4);
            let y = gauss(rng, n, m);
            covariance_influences(&y, &spd(rng, m)).unwrap()
        }
        Kind::Meta => {
            let (m, q) = (2, 2);
            let blocks: Vec<MetaBlock> = (0..n)
                .map(|_| MetaBlock {
                    y: gauss_vec(rng, m),
                    x: gauss(rng, m, q),
                    sigma: spd(rng, m) * 0.2,
                })
                .collect();
            meta_influences(&blocks, &gauss_vec(rng, q), &spd(rng, m)).unwrap()
        }
        Kind::Normalized => {
            let z = gauss(rng, n, 3);
            normalize_influences(&location_influences(&z, &DVector::zeros(3)).unwrap()).unwrap()
        }
    }
}
