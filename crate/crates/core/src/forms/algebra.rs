//! Alternating multilinear forms on a single vector space ℝ^m.
//!
//! Coefficients are stored against strictly increasing index sets, ordered
//! colexicographically. A set is a `u32` bitmask, so colex order coincides
//! with numeric order and lifting a form to a larger ambient space does not
//! move any coefficient.

use nalgebra::DMatrix;
use std::fmt;

use super::FormError;

/// Largest ambient dimension supported by the bitmask encoding.
pub const MAX_DIM: usize = 24;

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Position of `mask` among the subsets of equal size in colex order.
pub(crate) fn rank(mask: u32) -> usize {
    let mut r = 0;
    let mut m = mask;
    let mut i = 1;
    while m != 0 {
        let c = m.trailing_zeros() as usize;
        r += binomial(c, i);
        i += 1;
        m &= m - 1;
    }
    r
}

/// All k-subsets of {0..m} in colex order (Gosper's hack).
pub(crate) fn subsets(m: usize, k: usize) -> impl Iterator<Item = u32> {
    let limit: u64 = 1u64 << m;
    let mut next: Option<u64> = if k > m {
        None
    } else if k == 0 {
        Some(0)
    } else {
        Some((1u64 << k) - 1)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let n = (((r ^ cur) >> 2) / c) | r;
            (n < limit).then_some(n)
        };
        Some(cur as u32)
    })
}

fn indices(mask: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// Sign of the shuffle that sorts the concatenation of `a` then `b`.
fn shuffle_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0u32;
    let mut m = b;
    while m != 0 {
        let j = m.trailing_zeros();
        // elements of a greater than j
        inversions += (a >> (j + 1)).count_ones();
        m &= m - 1;
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn small_det(m: &[f64], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => DMatrix::from_row_slice(k, k, m).determinant(),
    }
}

/// A k-covector on ℝ^m, i.e. an alternating form evaluated at one point.
#[derive(Clone, PartialEq)]
pub struct AltForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for AltForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AltForm(dim={}, deg={}) [", self.dim, self.degree)?;
        let mut first = true;
        for (mask, c) in subsets(self.dim, self.degree).zip(&self.coeffs) {
            if *c != 0.0 {
                if !first {
                    write!(f, ", ")?;
                }
                write!(f, "{:?}: {c:.6e}", indices(mask))?;
                first = false;
            }
        }
        write!(f, "]")
    }
}

impl AltForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM, "ambient dimension {dim} exceeds {MAX_DIM}");
        Self { dim, degree, coeffs: vec![0.0; binomial(dim, degree)] }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        Self { dim, degree: 0, coeffs: vec![value] }
    }

    /// Coefficients in colex order of the index sets.
    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self, FormError> {
        let expected = binomial(dim, degree);
        if degree > dim || coeffs.len() != expected {
            return Err(FormError::CoefficientCount { dim, degree, expected, got: coeffs.len() });
        }
        Ok(Self { dim, degree, coeffs })
    }

    /// The coordinate covector dx_i.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut out = Self::zero(dim, 1);
        out.coeffs[i] = 1.0;
        out
    }

    /// dx_{i_1} ∧ … ∧ dx_{i_k} for an arbitrary (not necessarily sorted) index list.
    pub fn monomial(dim: usize, idx: &[usize]) -> Self {
        let mut out = Self::scalar(dim, 1.0);
        for &i in idx {
            out = out.wedge(&Self::basis(dim, i)).expect("monomial degree within dimension");
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient on a strictly increasing multi-index.
    pub fn component(&self, idx: &[usize]) -> Result<f64, FormError> {
        if idx.len() != self.degree || idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&i| i >= self.dim) {
            return Err(FormError::BadIndex(idx.to_vec()));
        }
        let mask = idx.iter().fold(0u32, |m, &i| m | (1 << i));
        Ok(self.coeffs[rank(mask)])
    }

    /// Value of a top-degree form on the standard basis.
    pub fn top(&self) -> f64 {
        debug_assert_eq!(self.degree, self.dim);
        self.coeffs[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), FormError> {
        if self.dim != other.dim {
            return Err(FormError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch { left: self.degree, right: other.degree });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormError> {
        self.check_same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { coeffs, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FormError> {
        self.check_same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { coeffs, ..*self })
    }

    /// self += c * other
    pub fn axpy(&mut self, c: f64, other: &Self) -> Result<(), FormError> {
        self.check_same_shape(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| c * a).collect(), ..*self }
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, FormError> {
        if self.dim != other.dim {
            return Err(FormError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(FormError::DegreeOverflow { degree, dim: self.dim });
        }
        let mut out = Self::zero(self.dim, degree);
        for (a_mask, a) in subsets(self.dim, self.degree).zip(&self.coeffs) {
            if *a == 0.0 {
                continue;
            }
            for (b_mask, b) in subsets(self.dim, other.degree).zip(&other.coeffs) {
                if *b == 0.0 || a_mask & b_mask != 0 {
                    continue;
                }
                out.coeffs[rank(a_mask | b_mask)] += shuffle_sign(a_mask, b_mask) * a * b;
            }
        }
        Ok(out)
    }

    /// self ∧ self ∧ … (p factors); p = 0 gives the constant 1.
    pub fn power(&self, p: usize) -> Result<Self, FormError> {
        let mut out = Self::scalar(self.dim, 1.0);
        for _ in 0..p {
            out = out.wedge(self)?;
        }
        Ok(out)
    }

    /// Contraction with a vector in the first slot.
    pub fn interior(&self, v: &[f64]) -> Result<Self, FormError> {
        if self.degree == 0 {
            return Err(FormError::InteriorOfFunction);
        }
        if v.len() != self.dim {
            return Err(FormError::DimensionMismatch { left: self.dim, right: v.len() });
        }
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (mask, a) in subsets(self.dim, self.degree).zip(&self.coeffs) {
            if *a == 0.0 {
                continue;
            }
            let mut m = mask;
            let mut pos = 0;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.coeffs[rank(mask & !(1 << i))] += sign * v[i] * a;
                pos += 1;
                m &= m - 1;
            }
        }
        Ok(out)
    }

    /// Evaluate on `degree` vectors of ℝ^m.
    pub fn eval(&self, vectors: &[&[f64]]) -> Result<f64, FormError> {
        if vectors.len() != self.degree {
            return Err(FormError::ArgumentCount { degree: self.degree, got: vectors.len() });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != self.dim) {
            return Err(FormError::DimensionMismatch { left: self.dim, right: v.len() });
        }
        let k = self.degree;
        let mut minor = vec![0.0; k * k];
        let mut total = 0.0;
        for (mask, a) in subsets(self.dim, k).zip(&self.coeffs) {
            if *a == 0.0 {
                continue;
            }
            for (r, i) in indices(mask).into_iter().enumerate() {
                for (c, v) in vectors.iter().enumerate() {
                    minor[r * k + c] = v[i];
                }
            }
            total += a * small_det(&minor, k);
        }
        Ok(total)
    }

    /// Pullback by a linear map ℝ^s → ℝ^m given by the images of the standard
    /// basis vectors of ℝ^s (the columns of the Jacobian).
    pub fn pullback_columns(&self, columns: &[Vec<f64>]) -> Result<Self, FormError> {
        let s = columns.len();
        if let Some(c) = columns.iter().find(|c| c.len() != self.dim) {
            return Err(FormError::DimensionMismatch { left: self.dim, right: c.len() });
        }
        let k = self.degree;
        if k > s {
            return Err(FormError::DegreeOverflow { degree: k, dim: s });
        }
        let mut out = Self::zero(s, k);
        if k == 0 {
            out.coeffs[0] = self.coeffs[0];
            return Ok(out);
        }
        let targets: Vec<(Vec<usize>, f64)> =
            subsets(self.dim, k).zip(&self.coeffs).filter(|(_, a)| **a != 0.0).map(|(m, a)| (indices(m), *a)).collect();
        let mut minor = vec![0.0; k * k];
        for (slot, src) in subsets(s, k).enumerate() {
            let cols = indices(src);
            let mut acc = 0.0;
            for (rows, a) in &targets {
                for (r, &i) in rows.iter().enumerate() {
                    for (c, &j) in cols.iter().enumerate() {
                        minor[r * k + c] = columns[j][i];
                    }
                }
                acc += a * small_det(&minor, k);
            }
            out.coeffs[slot] = acc;
        }
        Ok(out)
    }

    /// Embed into ℝ^{dim} for dim ≥ self.dim, new coordinates appended last.
    pub fn lift(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(binomial(dim, self.degree), 0.0);
        Self { dim, degree: self.degree, coeffs }
    }
}
