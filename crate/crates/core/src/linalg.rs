//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_RTOL: f64 = 1e-10;

/// Column-major vectorization of a matrix.
pub fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(rows, cols, v)
}

pub fn frobenius_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y)
        .sum()
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    // The Gram matrix is small (min dimension squared) for the tall inputs used here.
    let gram = if a.nrows() >= a.ncols() {
        a.transpose() * a
    } else {
        a * a.transpose()
    };
    let eig = gram.symmetric_eigenvalues();
    eig.iter().fold(0.0_f64, |acc, &x| acc.max(x)).max(0.0).sqrt()
}

/// Thin SVD with singular values sorted in decreasing order.
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

pub fn thin_svd(a: &DMatrix<f64>) -> ThinSvd {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(std::cmp::Ordering::Equal));
    let k = order.len();
    let u_sorted = DMatrix::from_fn(u.nrows(), k, |r, c| u[(r, order[c])]);
    let vt_sorted = DMatrix::from_fn(k, v_t.ncols(), |r, c| v_t[(order[r], c)]);
    let s_sorted = DVector::from_fn(k, |i, _| s[order[i]]);
    ThinSvd {
        u: u_sorted,
        s: s_sorted,
        v_t: vt_sorted,
    }
}

/// Numerical rank at the relative cutoff `rtol`.
pub fn numerical_rank(s: &DVector<f64>, rtol: f64) -> usize {
    let smax = s.iter().fold(0.0_f64, |acc, &x| acc.max(x));
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rtol * smax).count()
}

/// Moore-Penrose inverse.
pub fn pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = thin_svd(a);
    let k = numerical_rank(&svd.s, RANK_RTOL);
    let mut out = DMatrix::zeros(a.ncols(), a.nrows());
    for i in 0..k {
        let vi = svd.v_t.row(i).transpose();
        let ui = svd.u.column(i);
        out += (vi * ui.transpose()) / svd.s[i];
    }
    out
}

/// Orthogonal projector onto the column space of `a`.
pub fn column_projector(a: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = thin_svd(a);
    let k = numerical_rank(&svd.s, RANK_RTOL);
    let uk = svd.u.columns(0, k);
    &uk * uk.transpose()
}

/// Orthonormal basis of the null space of `a` (columns).
pub fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad with zero rows so the SVD returns a full right basis.
    let padded = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = thin_svd(&padded);
    let k = numerical_rank(&svd.s, RANK_RTOL);
    let v = svd.v_t.transpose();
    v.columns(k, n - k).into_owned()
}

/// Kahan-free but order-fixed sum.
pub fn ordered_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = DMatrix::from_row_slice(3, 2, &[3.0, 0.0, 0.0, -5.0, 0.0, 0.0]);
        assert_relative_eq!(spectral_norm(&a), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn pinv_of_row_vector() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let p = pinv(&a);
        assert_relative_eq!(p[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(p[(1, 0)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn null_space_is_orthogonal_to_rows() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 2.0]);
        let ns = null_space(&a);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).norm() < 1e-12);
        assert!((ns.transpose() * &ns - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn vec_roundtrip_is_column_major() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let v = vec_of(&m);
        assert_eq!(v.as_slice(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(unvec(v.as_slice(), 2, 2), m);
    }
}
