//! Differential forms, vector fields and smooth maps on ambient Euclidean space.
//!
//! A [`KForm`] is a coefficient function x ↦ [`AltForm`]; everything else
//! (wedge, d, interior product, pullback) is built by composing closures.
//! Restriction to a submanifold happens at evaluation time through a tangent
//! basis, see [`KForm::restrict`].

mod algebra;
mod identities;
mod point;

pub use algebra::{AltForm, MAX_DIM};
pub use identities::{kernel_identities, random_form, test_map, KERNEL_TOL};
pub use point::Point;

pub(crate) use algebra::small_det;

use nalgebra::DMatrix;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("degree {degree} exceeds dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("expected {expected} coefficients for a {degree}-form on R^{dim}, got {got}")]
    CoefficientCount { dim: usize, degree: usize, expected: usize, got: usize },
    #[error("invalid multi-index {0:?}")]
    BadIndex(Vec<usize>),
    #[error("interior product of a 0-form")]
    InteriorOfFunction,
    #[error("a {degree}-form takes {degree} vectors, got {got}")]
    ArgumentCount { degree: usize, got: usize },
    #[error("point {point:?} lies outside the domain of the coefficient functions")]
    OutsideDomain { point: Vec<f64> },
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
}

/// Finite-difference scheme used for derivatives of coefficient functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffScheme {
    /// Second-order central difference with step h.
    Central { h: f64 },
    /// Richardson-extrapolated central difference (fourth order) from steps h and h/2.
    Richardson { h: f64 },
}

impl Default for DiffScheme {
    fn default() -> Self {
        DiffScheme::Central { h: 1e-5 }
    }
}

impl DiffScheme {
    pub fn step(&self) -> f64 {
        match *self {
            DiffScheme::Central { h } | DiffScheme::Richardson { h } => h,
        }
    }

    fn validate(&self) -> Result<(), FormError> {
        let h = self.step();
        if h > 0.0 && h.is_finite() {
            Ok(())
        } else {
            Err(FormError::BadStep(h))
        }
    }

    /// Derivative of a vector-valued function of one real variable at 0.
    pub fn derivative<E>(&self, mut f: impl FnMut(f64) -> Result<Vec<f64>, E>) -> Result<Vec<f64>, E> {
        let mut central = |h: f64| -> Result<Vec<f64>, E> {
            let plus = f(h)?;
            let minus = f(-h)?;
            Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        };
        match *self {
            DiffScheme::Central { h } => central(h),
            DiffScheme::Richardson { h } => {
                let coarse = central(h)?;
                let fine = central(h / 2.0)?;
                Ok(fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect())
            }
        }
    }
}

type CoeffFn = dyn Fn(&[f64]) -> Result<AltForm, FormError> + Send + Sync;
type DomainFn = dyn Fn(&[f64]) -> bool + Send + Sync;

/// A differential k-form on ℝ^m given by its coefficient function.
#[derive(Clone)]
pub struct KForm {
    dim: usize,
    degree: usize,
    coeff: Arc<CoeffFn>,
    domain: Option<Arc<DomainFn>>,
}

impl fmt::Debug for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KForm(dim={}, deg={})", self.dim, self.degree)
    }
}

fn offset(p: &[f64], i: usize, t: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[i] += t;
    q
}

impl KForm {
    /// General constructor from a fallible coefficient function.
    pub fn new(
        dim: usize,
        degree: usize,
        coeff: impl Fn(&[f64]) -> Result<AltForm, FormError> + Send + Sync + 'static,
    ) -> Self {
        assert!(degree <= dim, "degree {degree} exceeds dimension {dim}");
        Self { dim, degree, coeff: Arc::new(coeff), domain: None }
    }

    /// Coefficients listed in colex order of increasing multi-indices.
    pub fn from_coeffs(dim: usize, degree: usize, coeffs: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self::new(dim, degree, move |p| AltForm::from_coeffs(dim, degree, coeffs(p)))
    }

    pub fn function(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(dim, 0, move |p| Ok(AltForm::scalar(dim, f(p))))
    }

    /// A 1-form given by its m components.
    pub fn one_form(dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self::from_coeffs(dim, 1, f)
    }

    pub fn constant(value: AltForm) -> Self {
        let (dim, degree) = (value.dim(), value.degree());
        Self::new(dim, degree, move |_| Ok(value.clone()))
    }

    pub fn zero(dim: usize, degree: usize) -> Self {
        Self::constant(AltForm::zero(dim, degree))
    }

    /// dx_{i_1} ∧ … ∧ dx_{i_k} with constant coefficient.
    pub fn coordinate(dim: usize, idx: &[usize]) -> Self {
        Self::constant(AltForm::monomial(dim, idx))
    }

    /// Restrict the coefficient functions to points where `inside` holds.
    pub fn with_domain(mut self, inside: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.domain = Some(Arc::new(inside));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Pointwise value.
    pub fn eval(&self, p: &[f64]) -> Result<AltForm, FormError> {
        if p.len() != self.dim {
            return Err(FormError::DimensionMismatch { left: self.dim, right: p.len() });
        }
        if let Some(inside) = &self.domain {
            if !inside(p) {
                return Err(FormError::OutsideDomain { point: p.to_vec() });
            }
        }
        (self.coeff)(p)
    }

    /// Coefficient on a strictly increasing multi-index.
    pub fn coeff(&self, p: &[f64], idx: &[usize]) -> Result<f64, FormError> {
        self.eval(p)?.component(idx)
    }

    /// Value of a 0-form.
    pub fn value(&self, p: &[f64]) -> Result<f64, FormError> {
        if self.degree != 0 {
            return Err(FormError::DegreeMismatch { left: self.degree, right: 0 });
        }
        Ok(self.eval(p)?.coeffs()[0])
    }

    /// Evaluate at `p` on `degree` ambient vectors.
    pub fn eval_on(&self, p: &[f64], vectors: &[&[f64]]) -> Result<f64, FormError> {
        self.eval(p)?.eval(vectors)
    }

    /// Pull the value at `p` back to the span of `basis`: the result is an
    /// alternating form on ℝ^{basis.len()}.
    pub fn restrict(&self, p: &[f64], basis: &[Vec<f64>]) -> Result<AltForm, FormError> {
        self.eval(p)?.pullback_columns(basis)
    }

    fn combined_domain(a: &KForm, b: &KForm) -> Option<Arc<DomainFn>> {
        match (&a.domain, &b.domain) {
            (None, None) => None,
            (Some(d), None) | (None, Some(d)) => Some(d.clone()),
            (Some(x), Some(y)) => {
                let (x, y) = (x.clone(), y.clone());
                Some(Arc::new(move |p: &[f64]| x(p) && y(p)))
            }
        }
    }

    fn check_dim(&self, other: &KForm) -> Result<(), FormError> {
        if self.dim != other.dim {
            return Err(FormError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    pub fn wedge(&self, other: &KForm) -> Result<KForm, FormError> {
        self.check_dim(other)?;
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(FormError::DegreeOverflow { degree, dim: self.dim });
        }
        let (a, b) = (self.clone(), other.clone());
        let mut out = KForm::new(self.dim, degree, move |p| a.eval(p)?.wedge(&b.eval(p)?));
        out.domain = Self::combined_domain(self, other);
        Ok(out)
    }

    /// self ∧ … ∧ self with p factors (p = 0 gives the constant function 1).
    pub fn power(&self, p: usize) -> Result<KForm, FormError> {
        let degree = self.degree * p;
        if degree > self.dim {
            return Err(FormError::DegreeOverflow { degree, dim: self.dim });
        }
        let a = self.clone();
        Ok(KForm::new(self.dim, degree, move |x| a.eval(x)?.power(p)))
    }

    fn zip_with(&self, other: &KForm, sign: f64) -> Result<KForm, FormError> {
        self.check_dim(other)?;
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch { left: self.degree, right: other.degree });
        }
        let (a, b) = (self.clone(), other.clone());
        let mut out = KForm::new(self.dim, self.degree, move |p| {
            let mut v = a.eval(p)?;
            v.axpy(sign, &b.eval(p)?)?;
            Ok(v)
        });
        out.domain = Self::combined_domain(self, other);
        Ok(out)
    }

    pub fn add(&self, other: &KForm) -> Result<KForm, FormError> {
        self.zip_with(other, 1.0)
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm, FormError> {
        self.zip_with(other, -1.0)
    }

    pub fn scale(&self, c: f64) -> KForm {
        let a = self.clone();
        let mut out = KForm::new(self.dim, self.degree, move |p| Ok(a.eval(p)?.scale(c)));
        out.domain = self.domain.clone();
        out
    }

    /// Multiply by a scalar function given as a closure.
    pub fn mul_fn(&self, g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> KForm {
        let a = self.clone();
        let mut out = KForm::new(self.dim, self.degree, move |p| Ok(a.eval(p)?.scale(g(p))));
        out.domain = self.domain.clone();
        out
    }

    /// View the form on a larger ambient space ℝ^dim whose extra coordinates
    /// come last; coefficients ignore the extra coordinates.
    pub fn lift(&self, dim: usize) -> KForm {
        assert!(dim >= self.dim);
        let (a, m) = (self.clone(), self.dim);
        KForm::new(dim, self.degree, move |p| Ok(a.eval(&p[..m])?.lift(dim)))
    }

    /// Exterior derivative with central differences of the coefficients.
    pub fn ext_deriv(&self, scheme: DiffScheme) -> Result<KForm, FormError> {
        scheme.validate()?;
        let degree = self.degree + 1;
        if degree > self.dim {
            return Err(FormError::DegreeOverflow { degree, dim: self.dim });
        }
        let (a, m) = (self.clone(), self.dim);
        let k = self.degree;
        let mut out = KForm::new(m, degree, move |p| {
            let mut acc = AltForm::zero(m, degree);
            let src: Vec<u32> = algebra::subsets(m, k).collect();
            for i in 0..m {
                let di = scheme.derivative(|t| Ok::<_, FormError>(a.eval(&offset(p, i, t))?.coeffs().to_vec()))?;
                for (mask, c) in src.iter().zip(&di) {
                    if *c == 0.0 || mask & (1 << i) != 0 {
                        continue;
                    }
                    let below = (mask & ((1u32 << i) - 1)).count_ones();
                    let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
                    acc.coeffs_mut()[algebra::rank(mask | (1 << i))] += sign * c;
                }
            }
            Ok(acc)
        });
        out.domain = self.domain.clone();
        Ok(out)
    }

    /// d with the default scheme.
    pub fn d(&self) -> Result<KForm, FormError> {
        self.ext_deriv(DiffScheme::default())
    }

    /// Contraction ι_X.
    pub fn interior(&self, x: &VecField) -> Result<KForm, FormError> {
        if self.degree == 0 {
            return Err(FormError::InteriorOfFunction);
        }
        if x.dim() != self.dim {
            return Err(FormError::DimensionMismatch { left: self.dim, right: x.dim() });
        }
        let (a, x) = (self.clone(), x.clone());
        let mut out = KForm::new(self.dim, self.degree - 1, move |p| a.eval(p)?.interior(&x.eval(p)?));
        out.domain = self.domain.clone();
        Ok(out)
    }

    /// Pullback φ*a along a smooth map whose target is this form's ambient space.
    pub fn pullback(&self, map: &SmoothMap) -> Result<KForm, FormError> {
        if map.target_dim() != self.dim {
            return Err(FormError::DimensionMismatch { left: self.dim, right: map.target_dim() });
        }
        if self.degree > map.source_dim() {
            return Err(FormError::DegreeOverflow { degree: self.degree, dim: map.source_dim() });
        }
        let (a, map) = (self.clone(), map.clone());
        Ok(KForm::new(map.source_dim(), self.degree, move |p| {
            let image = map.eval(p)?;
            let jac = map.jacobian(p)?;
            let cols: Vec<Vec<f64>> = jac.column_iter().map(|c| c.iter().copied().collect()).collect();
            a.eval(&image)?.pullback_columns(&cols)
        }))
    }
}

type FieldFn = dyn Fn(&[f64]) -> Result<Vec<f64>, FormError> + Send + Sync;

/// A vector field on ℝ^m.
#[derive(Clone)]
pub struct VecField {
    dim: usize,
    eval: Arc<FieldFn>,
}

impl fmt::Debug for VecField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VecField(dim={})", self.dim)
    }
}

impl VecField {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { dim, eval: Arc::new(move |p| Ok(f(p))) }
    }

    pub fn fallible(dim: usize, f: impl Fn(&[f64]) -> Result<Vec<f64>, FormError> + Send + Sync + 'static) -> Self {
        Self { dim, eval: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>, FormError> {
        if p.len() != self.dim {
            return Err(FormError::DimensionMismatch { left: self.dim, right: p.len() });
        }
        let v = (self.eval)(p)?;
        if v.len() != self.dim {
            return Err(FormError::DimensionMismatch { left: self.dim, right: v.len() });
        }
        Ok(v)
    }

    pub fn scale(&self, c: f64) -> VecField {
        let x = self.clone();
        VecField::fallible(self.dim, move |p| Ok(x.eval(p)?.into_iter().map(|v| c * v).collect()))
    }
}

type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// A smooth map ℝ^s → ℝ^t with an optional analytic Jacobian.
#[derive(Clone)]
pub struct SmoothMap {
    source_dim: usize,
    target_dim: usize,
    eval: Arc<MapFn>,
    jacobian: Option<Arc<JacFn>>,
    scheme: DiffScheme,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SmoothMap(R^{} -> R^{}, analytic_jacobian={})",
            self.source_dim,
            self.target_dim,
            self.jacobian.is_some()
        )
    }
}

impl SmoothMap {
    pub fn new(source_dim: usize, target_dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { source_dim, target_dim, eval: Arc::new(f), jacobian: None, scheme: DiffScheme::default() }
    }

    /// Supply the Jacobian as a target_dim × source_dim matrix function.
    pub fn with_jacobian(mut self, j: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn with_scheme(mut self, scheme: DiffScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, dim, |p| p.to_vec()).with_jacobian(move |_| DMatrix::identity(dim, dim))
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>, FormError> {
        if p.len() != self.source_dim {
            return Err(FormError::DimensionMismatch { left: self.source_dim, right: p.len() });
        }
        let q = (self.eval)(p);
        if q.len() != self.target_dim {
            return Err(FormError::DimensionMismatch { left: self.target_dim, right: q.len() });
        }
        Ok(q)
    }

    /// Finite-difference Jacobian regardless of any analytic one.
    pub fn fd_jacobian(&self, p: &[f64], scheme: DiffScheme) -> Result<DMatrix<f64>, FormError> {
        scheme.validate()?;
        let mut jac = DMatrix::zeros(self.target_dim, self.source_dim);
        for j in 0..self.source_dim {
            let col = scheme.derivative(|t| self.eval(&offset(p, j, t)))?;
            jac.set_column(j, &nalgebra::DVector::from_vec(col));
        }
        Ok(jac)
    }

    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>, FormError> {
        match &self.jacobian {
            Some(j) => {
                if p.len() != self.source_dim {
                    return Err(FormError::DimensionMismatch { left: self.source_dim, right: p.len() });
                }
                Ok(j(p))
            }
            None => self.fd_jacobian(p, self.scheme),
        }
    }

    /// outer ∘ self
    pub fn then(&self, outer: &SmoothMap) -> Result<SmoothMap, FormError> {
        if outer.source_dim != self.target_dim {
            return Err(FormError::DimensionMismatch { left: self.target_dim, right: outer.source_dim });
        }
        let (inner, outer2) = (self.clone(), outer.clone());
        let (inner_j, outer_j) = (self.clone(), outer.clone());
        let eval = move |p: &[f64]| (outer2.eval)(&(inner.eval)(p));
        let mut out = SmoothMap::new(self.source_dim, outer.target_dim, eval);
        out.jacobian = Some(Arc::new(move |p: &[f64]| {
            let mid = (inner_j.eval)(p);
            let jo = outer_j.jacobian(&mid).expect("dimensions checked at composition");
            let ji = inner_j.jacobian(p).expect("dimensions checked at composition");
            jo * ji
        }));
        Ok(out)
    }
}
