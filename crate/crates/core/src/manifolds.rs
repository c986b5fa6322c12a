//! Constraint-defined submanifolds of ℝ^m: tangent bases, orientation, sampling.
//!
//! A submanifold is the zero set of c constraint functions. Its orientation
//! is normal-first: an ordered tangent basis (e_1..e_d) is positive when
//! (∇c_1, …, ∇c_c, e_1, …, e_d) is a positive basis of ℝ^m. For a sphere that
//! is the outward-normal-first boundary orientation.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use crate::forms::{DiffScheme, FormError, KForm, Point};
use crate::linalg;

/// Distance from the constraint set below which a point counts as on the manifold.
pub const ON_MANIFOLD_TOL: f64 = 1e-8;
/// Relative singular value threshold for the constraint Jacobian.
pub const RANK_TOL: f64 = 1e-6;
/// Sampled points must satisfy the constraints to this accuracy.
pub const SAMPLE_TOL: f64 = 1e-10;
const PROJECTION_RESTARTS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ManifoldError {
    #[error("point is off {name} (constraint residual {residual:e} > {tolerance:e})")]
    OffManifold { name: String, residual: f64, tolerance: f64 },
    #[error("constraint Jacobian of {name} is rank deficient, singular values {singular_values:?}")]
    RankDeficient { name: String, singular_values: Vec<f64> },
    #[error("no sampler registered for {0}")]
    NoSampler(String),
    #[error("sample {index} of {name} misses the constraints by {residual:e}")]
    BadSample { name: String, index: usize, residual: f64 },
    #[error("Newton projection onto {name} stalled at residual {residual:e}")]
    ProjectionFailed { name: String, residual: f64 },
    #[error("angular form vanishes on the tangent space at {point:?} (binding point)")]
    OnBinding { point: Vec<f64> },
    #[error("volume form is degenerate at {point:?} (value {value:e})")]
    DegenerateVolume { point: Vec<f64>, value: f64 },
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    NormalFirst,
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::NormalFirst => 1.0,
            Orientation::Reversed => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::NormalFirst => Orientation::Reversed,
            Orientation::Reversed => Orientation::NormalFirst,
        }
    }
}

/// Orthonormal tangent basis at a point, ordered to be positive for the convention.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedBasis {
    pub point: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// +1 if the basis is positive for the manifold's convention.
    pub sign: i8,
}

impl OrientedBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn refs(&self) -> Vec<&[f64]> {
        self.vectors.iter().map(|v| v.as_slice()).collect()
    }
}

type ConstraintFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;
type SamplerFn = dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub struct Submanifold {
    name: String,
    ambient_dim: usize,
    n_constraints: usize,
    constraints: Arc<ConstraintFn>,
    gradients: Option<Arc<GradientFn>>,
    orientation: Orientation,
    periodic: u32,
    sampler: Option<Arc<SamplerFn>>,
}

impl fmt::Debug for Submanifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Submanifold({}, dim {} in R^{}, {:?})", self.name, self.dim(), self.ambient_dim, self.orientation)
    }
}

fn gaussian_sphere(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let r = linalg::norm(&v);
        if r > 1e-3 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Uniform angle in [0, 2π).
pub fn uniform_angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>() * TAU
}

/// Point of the unit sphere in ℝ^m from normalized Gaussians.
pub fn random_unit_vector(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    gaussian_sphere(rng, m)
}

/// Generator for sample `index` of a run seeded with `seed`: one ChaCha stream per index.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

impl Submanifold {
    pub fn new(
        name: impl Into<String>,
        ambient_dim: usize,
        n_constraints: usize,
        constraints: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        assert!(n_constraints <= ambient_dim);
        Self {
            name: name.into(),
            ambient_dim,
            n_constraints,
            constraints: Arc::new(constraints),
            gradients: None,
            orientation: Orientation::NormalFirst,
            periodic: 0,
            sampler: None,
        }
    }

    /// All of ℝ^m, standard orientation.
    pub fn euclidean(name: impl Into<String>, m: usize) -> Self {
        Self::new(name, m, 0, |_| Vec::new()).with_gradients(|_| Vec::new())
    }

    /// Unit sphere S^{2n-1} ⊂ ℂ^n = ℝ^{2n}, coordinates (x_1, y_1, x_2, y_2, …).
    pub fn sphere(n: usize) -> Self {
        let m = 2 * n;
        Self::new(format!("S^{}", m - 1), m, 1, |p| vec![linalg::dot(p, p) - 1.0])
            .with_gradients(|p| vec![p.iter().map(|x| 2.0 * x).collect()])
            .with_sampler(move |rng| gaussian_sphere(rng, m))
    }

    /// Analytic constraint gradients, one row per constraint.
    pub fn with_gradients(mut self, g: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static) -> Self {
        self.gradients = Some(Arc::new(g));
        self
    }

    pub fn with_sampler(mut self, s: impl Fn(&mut ChaCha8Rng) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.sampler = Some(Arc::new(s));
        self
    }

    /// Sampler that draws a seed point and Newton-projects it onto the constraints.
    pub fn with_projection_sampler(
        mut self,
        initial: impl Fn(&mut ChaCha8Rng) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        let target = self.clone();
        // Give up after a bounded number of restarts; the unprojected point then
        // fails the residual check in `sample_one` instead of spinning forever.
        self.sampler = Some(Arc::new(move |rng| {
            let mut start = initial(rng);
            for _ in 0..PROJECTION_RESTARTS {
                match target.project(&start) {
                    Ok(p) => return p,
                    Err(_) => start = initial(rng),
                }
            }
            start
        }));
        self
    }

    pub fn with_orientation(mut self, o: Orientation) -> Self {
        self.orientation = o;
        self
    }

    pub fn reversed(&self) -> Self {
        self.clone().with_orientation(self.orientation.flipped())
    }

    pub fn with_periodic(mut self, mask: u32) -> Self {
        self.periodic = mask;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// M × T² with the two angles appended as the last ambient coordinates.
    pub fn times_torus(&self) -> Self {
        let m = self.ambient_dim;
        let base = self.clone();
        let mut out = Self::new(format!("{}xT^2", self.name), m + 2, self.n_constraints, {
            let base = base.clone();
            move |p| (base.constraints)(&p[..m])
        });
        let bg = base.clone();
        out.gradients = Some(Arc::new(move |p: &[f64]| {
            bg.gradients(&p[..m])
                .into_iter()
                .map(|mut g| {
                    g.extend([0.0, 0.0]);
                    g
                })
                .collect()
        }));
        out.orientation = self.orientation;
        out.periodic = self.periodic | (0b11 << m);
        if let Some(s) = &self.sampler {
            let s = s.clone();
            out.sampler = Some(Arc::new(move |rng| {
                let mut p = s(rng);
                p.push(uniform_angle(rng));
                p.push(uniform_angle(rng));
                p
            }));
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn n_constraints(&self) -> usize {
        self.n_constraints
    }

    pub fn dim(&self) -> usize {
        self.ambient_dim - self.n_constraints
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn periodic_mask(&self) -> u32 {
        self.periodic
    }

    pub fn has_sampler(&self) -> bool {
        self.sampler.is_some()
    }

    pub fn constraints(&self, p: &[f64]) -> Vec<f64> {
        (self.constraints)(p)
    }

    pub fn residual(&self, p: &[f64]) -> f64 {
        linalg::norm(&(self.constraints)(p))
    }

    /// Constraint gradients at p (analytic if registered, else central differences).
    pub fn gradients(&self, p: &[f64]) -> Vec<Vec<f64>> {
        if let Some(g) = &self.gradients {
            return g(p);
        }
        let scheme = DiffScheme::Central { h: 1e-6 };
        let mut rows = vec![vec![0.0; self.ambient_dim]; self.n_constraints];
        for j in 0..self.ambient_dim {
            let col = scheme
                .derivative(|t| {
                    let mut q = p.to_vec();
                    q[j] += t;
                    Ok::<_, FormError>((self.constraints)(&q))
                })
                .expect("infallible");
            for (row, v) in rows.iter_mut().zip(col) {
                row[j] = v;
            }
        }
        rows
    }

    fn check_dim(&self, p: &[f64]) -> Result<(), ManifoldError> {
        if p.len() != self.ambient_dim {
            return Err(FormError::DimensionMismatch { left: self.ambient_dim, right: p.len() }.into());
        }
        Ok(())
    }

    pub fn singular_values(&self, p: &[f64]) -> Vec<f64> {
        let g = self.gradients(p);
        linalg::singular_values(&linalg::matrix_from_rows(&g, self.ambient_dim))
    }

    fn orient(&self, normals: &[Vec<f64>], mut basis: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        if basis.is_empty() {
            return basis;
        }
        let mut all = normals.to_vec();
        all.extend(basis.iter().cloned());
        let det = linalg::det_cols(&all);
        if det * self.orientation.sign() < 0.0 {
            for x in basis.last_mut().unwrap() {
                *x = -*x;
            }
        }
        basis
    }

    /// Oriented orthonormal basis of T_pM. Checks that p is on M and that
    /// the constraint Jacobian has full rank.
    pub fn tangent_basis(&self, p: &[f64]) -> Result<OrientedBasis, ManifoldError> {
        self.check_dim(p)?;
        let residual = self.residual(p);
        if !(residual <= ON_MANIFOLD_TOL) {
            return Err(ManifoldError::OffManifold { name: self.name.clone(), residual, tolerance: ON_MANIFOLD_TOL });
        }
        let normals = self.gradients(p);
        if !normals.is_empty() {
            let sv = linalg::singular_values(&linalg::matrix_from_rows(&normals, self.ambient_dim));
            let (smax, smin) = (sv[0], *sv.last().unwrap());
            if !(smax > 0.0 && smin >= RANK_TOL * smax) {
                return Err(ManifoldError::RankDeficient { name: self.name.clone(), singular_values: sv });
            }
        }
        let (basis, _) = linalg::complement(&normals, self.ambient_dim);
        Ok(OrientedBasis { point: p.to_vec(), vectors: self.orient(&normals, basis), sign: 1 })
    }

    /// Oriented tangent frame of the level set through p, without the
    /// on-manifold and SVD checks (used inside integrators).
    pub fn level_frame(&self, p: &[f64]) -> Result<Vec<Vec<f64>>, ManifoldError> {
        self.check_dim(p)?;
        let normals = self.gradients(p);
        let (basis, diag) = linalg::complement(&normals, self.ambient_dim);
        let scale = normals.iter().map(|g| linalg::norm(g)).fold(0.0, f64::max);
        if diag.iter().any(|d| !(*d > RANK_TOL * scale)) {
            return Err(ManifoldError::RankDeficient {
                name: self.name.clone(),
                singular_values: self.singular_values(p),
            });
        }
        Ok(self.orient(&normals, basis))
    }

    /// Gauss-Newton projection p ← p − Jᵀ(JJᵀ)⁻¹c(p) onto the constraint set.
    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>, ManifoldError> {
        self.check_dim(p)?;
        let mut x = p.to_vec();
        let c = self.n_constraints;
        if c == 0 {
            return Ok(x);
        }
        for _ in 0..60 {
            let r = (self.constraints)(&x);
            let rn = linalg::norm(&r);
            if rn <= 1e-14 {
                return Ok(x);
            }
            let g = self.gradients(&x);
            let gram = DMatrix::from_fn(c, c, |i, j| linalg::dot(&g[i], &g[j]));
            let Some(mult) = linalg::solve(gram, &r) else { break };
            for (gi, mi) in g.iter().zip(&mult) {
                linalg::axpy(&mut x, -mi, gi);
            }
            if !x.iter().all(|v| v.is_finite()) {
                break;
            }
        }
        let residual = self.residual(&x);
        if residual <= 1e-12 {
            Ok(x)
        } else {
            Err(ManifoldError::ProjectionFailed { name: self.name.clone(), residual })
        }
    }

    /// One sample drawn from stream `index` of `seed`.
    pub fn sample_one(&self, seed: u64, index: u64) -> Result<Point, ManifoldError> {
        let s = self.sampler.as_ref().ok_or_else(|| ManifoldError::NoSampler(self.name.clone()))?;
        let mut rng = sample_rng(seed, index);
        let p = s(&mut rng);
        let residual = self.residual(&p);
        if !(residual <= SAMPLE_TOL) || p.len() != self.ambient_dim {
            return Err(ManifoldError::BadSample { name: self.name.clone(), index: index as usize, residual });
        }
        Ok(Point::with_periodic(p, self.periodic))
    }

    /// n points, deterministic in `seed` and independent of thread count.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Point>, ManifoldError> {
        if self.sampler.is_none() {
            return Err(ManifoldError::NoSampler(self.name.clone()));
        }
        (0..n as u64).into_par_iter().map(|i| self.sample_one(seed, i)).collect()
    }
}

/// Oriented basis of the page through p: ker(dϑ) ∩ T_pM, ordered so that any
/// R with dϑ(R) > 0 followed by the basis is positive for `volume`.
///
/// `theta_form` may be any positive multiple of dϑ, e.g. the smooth
/// f_x df_y − f_y df_x.
pub fn orient_page_basis(
    m: &Submanifold,
    p: &[f64],
    theta_form: &KForm,
    volume: &KForm,
) -> Result<OrientedBasis, ManifoldError> {
    let t = m.tangent_basis(p)?;
    page_basis_in(&t.vectors, p, theta_form, volume)
}

pub(crate) fn page_basis_in(
    frame: &[Vec<f64>],
    p: &[f64],
    theta_form: &KForm,
    volume: &KForm,
) -> Result<OrientedBasis, ManifoldError> {
    let d = frame.len();
    let w = theta_form.restrict(p, frame)?;
    let w = w.coeffs();
    let wn = linalg::norm(w);
    let scale = theta_form.eval(p)?.max_abs();
    if !(wn > 1e-12 * scale.max(1.0)) {
        return Err(ManifoldError::OnBinding { point: p.to_vec() });
    }
    let (coeffs, _) = linalg::complement(&[w.to_vec()], d);
    let to_ambient = |c: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; p.len()];
        for (cj, tj) in c.iter().zip(frame) {
            linalg::axpy(&mut v, *cj, tj);
        }
        v
    };
    let mut page: Vec<Vec<f64>> = coeffs.iter().map(|c| to_ambient(c)).collect();
    let transverse = to_ambient(&w.iter().map(|x| x / (wn * wn)).collect::<Vec<_>>());
    let mut args: Vec<&[f64]> = vec![&transverse];
    args.extend(page.iter().map(|v| v.as_slice()));
    let value = volume.eval_on(p, &args)?;
    if value == 0.0 || !value.is_finite() {
        return Err(ManifoldError::DegenerateVolume { point: p.to_vec(), value });
    }
    if value < 0.0 {
        if let Some(last) = page.last_mut() {
            last.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(OrientedBasis { point: p.to_vec(), vectors: page, sign: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_counterclockwise() {
        let c = Submanifold::sphere(1);
        let b = c.tangent_basis(&[1.0, 0.0]).unwrap();
        assert_eq!(b.vectors.len(), 1);
        assert!((b.vectors[0][0]).abs() < 1e-15 && (b.vectors[0][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn off_manifold_rejected() {
        let s = Submanifold::sphere(2);
        assert!(matches!(s.tangent_basis(&[1.1, 0.0, 0.0, 0.0]), Err(ManifoldError::OffManifold { .. })));
    }

    #[test]
    fn reversed_flips_last_vector() {
        let s = Submanifold::sphere(2);
        let p = [0.0, 0.6, 0.0, 0.8];
        let a = s.tangent_basis(&p).unwrap();
        let b = s.reversed().tangent_basis(&p).unwrap();
        let mut cols = vec![p.to_vec()];
        cols.extend(a.vectors.clone());
        assert!(linalg::det_cols(&cols) > 0.0);
        let mut cols = vec![p.to_vec()];
        cols.extend(b.vectors.clone());
        assert!(linalg::det_cols(&cols) < 0.0);
    }

    #[test]
    fn missing_sampler() {
        let s = Submanifold::euclidean("R^2", 2);
        assert!(matches!(s.sample(3, 1), Err(ManifoldError::NoSampler(_))));
    }

    #[test]
    fn projection_lands_on_sphere() {
        let s = Submanifold::sphere(3);
        let p = s.project(&[0.3, 1.2, -0.4, 0.1, 0.0, 2.0]).unwrap();
        assert!(s.residual(&p) < 1e-14);
    }
}
