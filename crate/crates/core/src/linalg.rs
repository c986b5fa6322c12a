//! Small dense helpers: Householder complements, determinants, solves.

use nalgebra::{DMatrix, DVector};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(y: &mut [f64], c: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += c * b;
    }
}

/// Orthonormal basis of the orthogonal complement of span(vectors) in ℝ^m,
/// via Householder QR. Also returns |R_kk|, a cheap rank indicator.
pub(crate) fn complement(vectors: &[Vec<f64>], m: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let c = vectors.len();
    let mut cols: Vec<Vec<f64>> = vectors.to_vec();
    let mut reflectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(c);
    let mut diag = Vec::with_capacity(c);
    for k in 0..c {
        let x = &cols[k][k..];
        let nx = norm(x);
        if nx == 0.0 {
            reflectors.push(None);
            diag.push(0.0);
            continue;
        }
        let alpha = if x[0] >= 0.0 { -nx } else { nx };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let nv = norm(&v);
        let v: Vec<f64> = v.iter().map(|t| t / nv).collect();
        for col in cols.iter_mut().skip(k) {
            let s = 2.0 * dot(&v, &col[k..]);
            axpy(&mut col[k..], -s, &v);
        }
        diag.push(alpha.abs());
        reflectors.push(Some(v));
    }
    let basis = (c..m)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            for (k, refl) in reflectors.iter().enumerate().rev() {
                if let Some(v) = refl {
                    let s = 2.0 * dot(v, &e[k..]);
                    axpy(&mut e[k..], -s, v);
                }
            }
            e
        })
        .collect();
    (basis, diag)
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Singular values in decreasing order.
pub(crate) fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Determinant of the square matrix with the given columns.
pub(crate) fn det_cols(cols: &[Vec<f64>]) -> f64 {
    let m = cols.len();
    let flat: Vec<f64> = (0..m).flat_map(|i| cols.iter().map(move |c| c[i])).collect();
    crate::forms::small_det(&flat, m)
}

/// Solution of a square system, None if LU fails.
pub(crate) fn solve(a: DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let rhs = DVector::from_column_slice(b);
    a.lu().solve(&rhs).map(|x| x.iter().copied().collect())
}

/// Least-squares solution of a full-column-rank system via Householder QR.
/// Falls back to the minimum-norm SVD solution when R has a zero pivot.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let rhs = DVector::from_column_slice(b);
    if a.nrows() >= a.ncols() {
        let qr = a.clone().qr();
        let qtb = qr.q().transpose() * &rhs;
        let r = qr.r();
        if let Some(x) = r.solve_upper_triangular(&qtb.rows(0, a.ncols()).into_owned()) {
            if x.iter().all(|v| v.is_finite()) {
                return Some(x.iter().copied().collect());
            }
        }
    }
    let svd = a.clone().svd(true, true);
    svd.solve(&rhs, 1e-14).ok().map(|x| x.iter().copied().collect())
}

pub(crate) fn residual(a: &DMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
    let ax = a * DVector::from_column_slice(x);
    ax.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let n = vec![vec![1.0, 2.0, 0.5, -1.0], vec![0.0, 1.0, 1.0, 3.0]];
        let (b, diag) = complement(&n, 4);
        assert_eq!(b.len(), 2);
        assert!(diag.iter().all(|d| *d > 0.1));
        for (i, u) in b.iter().enumerate() {
            for v in &n {
                assert!(dot(u, v).abs() < 1e-14);
            }
            for (j, w) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, w) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn determinant_of_columns() {
        assert_eq!(det_cols(&[vec![0.0, 1.0], vec![1.0, 0.0]]), -1.0);
    }
}
