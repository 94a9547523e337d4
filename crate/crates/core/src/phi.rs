//! Discrepancy functions φ.
//!
//! ψ-derived families are scaled to the range [−1, 1]; their rectified
//! versions are `max{0, ψ}`. The sigmoid families take a sharpness ζ and are
//! evaluated at `ζt`.

use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DepthError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiFamily {
    Sign,
    RectifiedSign,
    Huber,
    RectifiedHuber,
    TruncatedSign,
    RectifiedTruncatedSign,
    Bisquare,
    RectifiedBisquare,
    Indicator01,
    NormalCdf,
    Tanh,
    Arctan,
    /// φ(t) = t; only used to exercise the solver on linear objectives.
    Linear,
}

impl PhiFamily {
    pub const ALL: [PhiFamily; 13] = [
        PhiFamily::Sign,
        PhiFamily::RectifiedSign,
        PhiFamily::Huber,
        PhiFamily::RectifiedHuber,
        PhiFamily::TruncatedSign,
        PhiFamily::RectifiedTruncatedSign,
        PhiFamily::Bisquare,
        PhiFamily::RectifiedBisquare,
        PhiFamily::Indicator01,
        PhiFamily::NormalCdf,
        PhiFamily::Tanh,
        PhiFamily::Arctan,
        PhiFamily::Linear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhiFamily::Sign => "sign",
            PhiFamily::RectifiedSign => "rectified_sign",
            PhiFamily::Huber => "huber",
            PhiFamily::RectifiedHuber => "rectified_huber",
            PhiFamily::TruncatedSign => "truncated_sign",
            PhiFamily::RectifiedTruncatedSign => "rectified_truncated_sign",
            PhiFamily::Bisquare => "bisquare",
            PhiFamily::RectifiedBisquare => "rectified_bisquare",
            PhiFamily::Indicator01 => "indicator_01",
            PhiFamily::NormalCdf => "normal_cdf",
            PhiFamily::Tanh => "tanh",
            PhiFamily::Arctan => "arctan",
            PhiFamily::Linear => "linear",
        }
    }

    /// Continuously differentiable everywhere.
    pub fn is_smooth(self) -> bool {
        matches!(
            self,
            PhiFamily::NormalCdf
                | PhiFamily::Tanh
                | PhiFamily::Arctan
                | PhiFamily::Bisquare
                | PhiFamily::Linear
        )
    }

    pub fn is_sigmoid(self) -> bool {
        matches!(self, PhiFamily::NormalCdf | PhiFamily::Tanh | PhiFamily::Arctan)
    }

    /// Families with range [−1, 1] that approximate `sgn` rather than `1_{≥0}`.
    pub fn is_two_sided(self) -> bool {
        matches!(
            self,
            PhiFamily::Sign
                | PhiFamily::Huber
                | PhiFamily::TruncatedSign
                | PhiFamily::Bisquare
                | PhiFamily::Tanh
                | PhiFamily::Arctan
                | PhiFamily::Linear
        )
    }
}

impl fmt::Display for PhiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhiFamily {
    type Err = DepthError;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        PhiFamily::ALL
            .iter()
            .copied()
            .find(|f| f.name() == key)
            .ok_or_else(|| {
                let names: Vec<&str> = PhiFamily::ALL.iter().map(|f| f.name()).collect();
                DepthError::Validation(format!(
                    "unknown phi family '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[inline]
fn sgn(t: f64) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// `tanh` through one `exp`; absolute error below 1e-15.
fn fast_tanh(u: f64) -> f64 {
    let a = u.abs();
    if a > 20.0 {
        return u.signum();
    }
    let r = 1.0 - 2.0 / ((2.0 * a).exp() + 1.0);
    r.copysign(u)
}

fn normal_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / SQRT_2)
}

/// A discrepancy function with its clipping parameter `c` and sharpness `ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiFunction {
    pub family: PhiFamily,
    pub c: f64,
    pub zeta: f64,
}

impl PhiFunction {
    pub fn new(family: PhiFamily) -> Self {
        PhiFunction {
            family,
            c: 1.0,
            zeta: 1.0,
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_zeta(mut self, zeta: f64) -> Self {
        self.zeta = zeta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return invalid(format!("clipping parameter c must be positive, got {}", self.c));
        }
        if !(self.zeta > 0.0) || !self.zeta.is_finite() {
            return invalid(format!("sharpness zeta must be positive, got {}", self.zeta));
        }
        Ok(())
    }

    pub fn is_smooth(&self) -> bool {
        self.family.is_smooth()
    }

    fn bisquare_scale(&self) -> f64 {
        // max of t(1 − (t/c)²)² on [0, c] is attained at c/√5.
        1.0 / (self.c * 16.0 / (25.0 * 5f64.sqrt()))
    }

    /// φ(t).
    pub fn eval(&self, t: f64) -> f64 {
        let c = self.c;
        match self.family {
            PhiFamily::Sign => sgn(t),
            PhiFamily::RectifiedSign | PhiFamily::Indicator01 => {
                if t >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PhiFamily::Huber => t.clamp(-c, c) / c,
            PhiFamily::RectifiedHuber => (t.clamp(-c, c) / c).max(0.0),
            PhiFamily::TruncatedSign => {
                if t.abs() <= c {
                    sgn(t)
                } else {
                    0.0
                }
            }
            PhiFamily::RectifiedTruncatedSign => {
                if t >= 0.0 && t <= c {
                    1.0
                } else {
                    0.0
                }
            }
            PhiFamily::Bisquare => self.bisquare(t),
            PhiFamily::RectifiedBisquare => self.bisquare(t).max(0.0),
            PhiFamily::NormalCdf => normal_cdf(self.zeta * t),
            PhiFamily::Tanh => fast_tanh(self.zeta * t),
            PhiFamily::Arctan => FRAC_2_PI * (self.zeta * t).atan(),
            PhiFamily::Linear => t,
        }
    }

    fn bisquare(&self, t: f64) -> f64 {
        if t.abs() > self.c {
            return 0.0;
        }
        let u = 1.0 - (t / self.c).powi(2);
        self.bisquare_scale() * t * u * u
    }

    /// `(φ(t), φ′(t))`, sharing work for the sigmoid families.
    pub fn eval_grad(&self, t: f64) -> (f64, f64) {
        match self.family {
            PhiFamily::Tanh => {
                let th = fast_tanh(self.zeta * t);
                (th, self.zeta * (1.0 - th * th))
            }
            _ => (self.eval(t), self.grad(t)),
        }
    }

    /// φ′(t); at kinks of piecewise families this is the right derivative.
    pub fn grad(&self, t: f64) -> f64 {
        let c = self.c;
        match self.family {
            PhiFamily::Sign
            | PhiFamily::RectifiedSign
            | PhiFamily::Indicator01
            | PhiFamily::TruncatedSign
            | PhiFamily::RectifiedTruncatedSign => 0.0,
            PhiFamily::Huber => {
                if t >= -c && t < c {
                    1.0 / c
                } else {
                    0.0
                }
            }
            PhiFamily::RectifiedHuber => {
                if t >= 0.0 && t < c {
                    1.0 / c
                } else {
                    0.0
                }
            }
            PhiFamily::Bisquare => self.bisquare_grad(t),
            PhiFamily::RectifiedBisquare => {
                if t >= 0.0 {
                    self.bisquare_grad(t)
                } else {
                    0.0
                }
            }
            PhiFamily::NormalCdf => self.zeta * normal_pdf(self.zeta * t),
            PhiFamily::Tanh => {
                let th = fast_tanh(self.zeta * t);
                self.zeta * (1.0 - th * th)
            }
            PhiFamily::Arctan => {
                let u = self.zeta * t;
                FRAC_2_PI * self.zeta / (1.0 + u * u)
            }
            PhiFamily::Linear => 1.0,
        }
    }

    fn bisquare_grad(&self, t: f64) -> f64 {
        if t.abs() >= self.c {
            return 0.0;
        }
        let u = (t / self.c).powi(2);
        self.bisquare_scale() * (1.0 - u) * (1.0 - 5.0 * u)
    }

    /// Points where φ is not differentiable.
    pub fn kinks(&self) -> Vec<f64> {
        let c = self.c;
        match self.family {
            PhiFamily::Sign | PhiFamily::RectifiedSign | PhiFamily::Indicator01 => vec![0.0],
            PhiFamily::Huber => vec![-c, c],
            PhiFamily::TruncatedSign => vec![-c, 0.0, c],
            PhiFamily::RectifiedHuber | PhiFamily::RectifiedTruncatedSign => vec![0.0, c],
            PhiFamily::RectifiedBisquare => vec![0.0],
            _ => Vec::new(),
        }
    }

    /// φ′(t), refusing kinks.
    pub fn grad_strict(&self, t: f64) -> Result<f64> {
        if self.kinks().iter().any(|&k| k == t) {
            return Err(DepthError::NonDifferentiable {
                family: self.family.name(),
                t,
            });
        }
        Ok(self.grad(t))
    }

    /// Lipschitz constant of φ′ when one exists.
    pub fn lipschitz(&self) -> Option<f64> {
        let z2 = self.zeta * self.zeta;
        match self.family {
            // sup |d²/du² tanh u| = 4/(3√3), at tanh² u = 1/3.
            PhiFamily::Tanh => Some(4.0 / (3.0 * 3f64.sqrt()) * z2),
            // sup |u·pdf(u)| at u = 1.
            PhiFamily::NormalCdf => Some(normal_pdf(1.0) * z2),
            // sup |2u/(1+u²)²| = 3√3/8 at u = 1/√3, times 2/π.
            PhiFamily::Arctan => Some(FRAC_2_PI * 3.0 * 3f64.sqrt() / 8.0 * z2),
            PhiFamily::Bisquare => Some(25.0 * 5f64.sqrt() / (2.0 * self.c * self.c)),
            PhiFamily::Linear => Some(0.0),
            _ => None,
        }
    }

    /// `(1 + φ)/2` for two-sided families, φ otherwise: a [0, 1]-valued
    /// surrogate of `1_{≥0}` suitable for product objectives.
    pub fn indicator_eval(&self, t: f64) -> f64 {
        if self.family.is_two_sided() {
            0.5 * (1.0 + self.eval(t))
        } else {
            self.eval(t)
        }
    }

    pub fn indicator_grad(&self, t: f64) -> f64 {
        if self.family.is_two_sided() {
            0.5 * self.grad(t)
        } else {
            self.grad(t)
        }
    }
}

impl Default for PhiFunction {
    fn default() -> Self {
        PhiFunction::new(PhiFamily::Tanh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn phi(f: PhiFamily) -> PhiFunction {
        PhiFunction::new(f)
    }

    #[test]
    fn fast_tanh_matches_std() {
        for k in -4000..=4000 {
            let u = k as f64 * 0.01;
            assert!((fast_tanh(u) - u.tanh()).abs() < 1e-15, "{u}");
        }
        assert_eq!(fast_tanh(0.0), 0.0);
    }

    #[test]
    fn catalog_values() {
        assert_eq!(phi(PhiFamily::Sign).eval(0.0), 1.0);
        assert_eq!(phi(PhiFamily::Huber).eval(0.5), 0.5);
        assert_eq!(phi(PhiFamily::RectifiedBisquare).eval(1.0), 0.0);
        assert_eq!(phi(PhiFamily::Tanh).eval(0.0), 0.0);
    }

    #[test]
    fn catalog_gradients() {
        assert_abs_diff_eq!(phi(PhiFamily::Tanh).with_zeta(2.0).grad(0.0), 2.0, epsilon = 1e-15);
        // Standard normal density at zero by its Taylor series 1/√(2π).
        let series: f64 = 1.0 / (2.0 * 3.141592653589793f64).sqrt();
        assert_abs_diff_eq!(phi(PhiFamily::NormalCdf).grad(0.0), series, epsilon = 1e-15);
        assert_abs_diff_eq!(phi(PhiFamily::NormalCdf).grad(0.0), 0.39894, epsilon = 1e-5);
        assert_abs_diff_eq!(phi(PhiFamily::Arctan).grad(1.0), 0.318309886, epsilon = 1e-9);
    }

    #[test]
    fn lipschitz_catalog() {
        assert_abs_diff_eq!(phi(PhiFamily::Tanh).lipschitz().unwrap(), 0.769800358, epsilon = 1e-9);
        assert_abs_diff_eq!(phi(PhiFamily::NormalCdf).lipschitz().unwrap(), 0.24197, epsilon = 1e-5);
        assert!(phi(PhiFamily::Huber).lipschitz().is_none());
        assert!(phi(PhiFamily::Sign).lipschitz().is_none());
    }

    #[test]
    fn bisquare_peak_is_one() {
        let b = phi(PhiFamily::Bisquare).with_c(2.0);
        assert_abs_diff_eq!(b.eval(2.0 / 5f64.sqrt()), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.eval(-2.0 / 5f64.sqrt()), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn ranges_on_dense_grid() {
        for fam in PhiFamily::ALL {
            if fam == PhiFamily::Linear {
                continue;
            }
            let f = phi(fam).with_c(1.5).with_zeta(3.0);
            for k in 0..=20000 {
                let t = -10.0 + k as f64 * 1e-3;
                let v = f.eval(t);
                assert!(v.abs() <= 1.0 + 1e-15, "{fam} at {t}: {v}");
                if !fam.is_two_sided() {
                    assert!(v >= 0.0);
                }
            }
        }
    }

    #[test]
    fn lipschitz_against_grid_quotients() {
        for fam in PhiFamily::ALL {
            for zeta in [0.5, 1.0, 4.0] {
                let f = phi(fam).with_zeta(zeta).with_c(1.3);
                let Some(l) = f.lipschitz() else { continue };
                let h = 1e-4;
                let mut worst: f64 = 0.0;
                for k in 0..80000 {
                    let x = -4.0 + k as f64 * h;
                    worst = worst.max((f.grad(x + h) - f.grad(x)).abs() / h);
                }
                assert!(worst <= l * (1.0 + 1e-6) + 1e-12, "{fam} ζ={zeta}: {worst} > {l}");
                if l > 0.0 {
                    assert!(worst >= 0.99 * l, "{fam} bound {l} is loose (grid {worst})");
                }
            }
        }
    }

    #[test]
    fn sigmoids_approach_step() {
        // Φ(ζt) and (1 + tanh ζt)/2 converge to 1_{>0} at ζ = 10³.
        for fam in [PhiFamily::NormalCdf, PhiFamily::Tanh] {
            let f = phi(fam).with_zeta(1e3);
            for k in 0..2000 {
                let t = 0.01 + k as f64 * 0.005;
                assert!((f.indicator_eval(t) - 1.0).abs() <= 0.01);
                assert!(f.indicator_eval(-t).abs() <= 0.01);
            }
        }
    }

    #[test]
    fn arctan_tail_is_heavy() {
        // 1 − (2/π)atan(u) ≈ 2/(πu), so ζt = 10 leaves a gap above 0.01 in indicator form.
        let f = phi(PhiFamily::Arctan).with_zeta(1e3);
        assert!(1.0 - f.indicator_eval(0.01) > 0.01);
        assert!(1.0 - f.indicator_eval(1.0) <= 0.01);
    }

    #[test]
    fn strict_gradient_rejects_kinks() {
        let h = phi(PhiFamily::Huber);
        assert!(matches!(h.grad_strict(1.0), Err(DepthError::NonDifferentiable { .. })));
        assert_eq!(h.grad(1.0), 0.0);
        assert_eq!(h.grad(-1.0), 1.0);
        assert!(h.grad_strict(0.3).is_ok());
        assert!(phi(PhiFamily::Tanh).grad_strict(0.0).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for fam in PhiFamily::ALL {
            assert_eq!(fam.name().parse::<PhiFamily>().unwrap(), fam);
        }
        assert_eq!("rectified-truncated-sign".parse::<PhiFamily>().unwrap(), PhiFamily::RectifiedTruncatedSign);
        assert!("logit".parse::<PhiFamily>().is_err());
    }

    #[test]
    fn rectified_is_positive_part() {
        let pairs = [
            (PhiFamily::Sign, PhiFamily::RectifiedSign),
            (PhiFamily::Huber, PhiFamily::RectifiedHuber),
            (PhiFamily::TruncatedSign, PhiFamily::RectifiedTruncatedSign),
            (PhiFamily::Bisquare, PhiFamily::RectifiedBisquare),
        ];
        for (two, one) in pairs {
            for k in 0..=400 {
                let t = -2.0 + k as f64 * 0.01;
                assert_eq!(phi(one).eval(t), phi(two).eval(t).max(0.0), "{one} at {t}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn smooth_gradients_match_central_differences(
            fam_idx in 0usize..5,
            t in -6.0f64..6.0,
            zeta in 0.2f64..5.0,
        ) {
            let fam = [PhiFamily::NormalCdf, PhiFamily::Tanh, PhiFamily::Arctan, PhiFamily::Bisquare, PhiFamily::Linear][fam_idx];
            let f = phi(fam).with_zeta(zeta);
            let h = 1e-5 * t.abs().max(1.0);
            let fd = (f.eval(t + h) - f.eval(t - h)) / (2.0 * h);
            prop_assert!((fd - f.grad(t)).abs() <= 1e-5, "{} t={} fd={} g={}", fam, t, fd, f.grad(t));
        }
    }
}
