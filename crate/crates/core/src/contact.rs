//! Contact forms, Reeb fields, adapted open books and representations.
//!
//! A representation is a contact form α on V together with f: V → ℂ whose
//! zero set is the binding and whose argument ϑ = f/|f| is the page fibration.
//! Anything that would divide by |f| is evaluated through the smooth
//! identities ρdρ∧dϑ = df_x∧df_y and ρ²dϑ = f_x df_y − f_y df_x.

use nalgebra::DMatrix;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use crate::forms::{AltForm, DiffScheme, FormError, KForm, Point};
use crate::linalg;
use crate::manifolds::{page_basis_in, ManifoldError, OrientedBasis, Submanifold};
use crate::report::{tally, CheckReport};

/// Points with |f| below this are treated as near-binding for quotient formulas.
pub const NEAR_BINDING: f64 = 1e-3;
/// Reeb solve residual tolerance.
pub const REEB_TOL: f64 = 1e-8;
/// Relative agreement required between the regularized and quotient volume forms.
pub const VOLUME_AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContactError {
    #[error("contact manifold must be odd-dimensional, got dimension {0}")]
    EvenDimension(usize),
    #[error("expected a 1-form on R^{expected}, got degree {degree} on R^{dim}")]
    NotOneForm { expected: usize, degree: usize, dim: usize },
    #[error("form is not contact at {point:?}: residual {residual:e}, singular values {singular_values:?}")]
    Degenerate { point: Vec<f64>, residual: f64, singular_values: Vec<f64> },
    #[error("binding sample set is empty")]
    EmptyBinding,
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A 1-form on the ambient space of an odd-dimensional submanifold.
#[derive(Clone)]
pub struct ContactFormData {
    alpha: KForm,
    dalpha: KForm,
    manifold: Submanifold,
    n: usize,
}

impl fmt::Debug for ContactFormData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContactFormData(n={}, on {:?})", self.n, self.manifold)
    }
}

/// Value of β∧(dβ)^k∧rest on an abstract basis: all inputs already restricted.
pub fn top_value(parts: &[&AltForm]) -> Result<f64, FormError> {
    let mut acc = parts[0].clone();
    for p in &parts[1..] {
        acc = acc.wedge(p)?;
    }
    Ok(acc.top())
}

impl ContactFormData {
    pub fn new(alpha: KForm, manifold: Submanifold) -> Result<Self, ContactError> {
        Self::with_scheme(alpha, manifold, DiffScheme::default())
    }

    pub fn with_scheme(alpha: KForm, manifold: Submanifold, scheme: DiffScheme) -> Result<Self, ContactError> {
        let dim = manifold.dim();
        if dim.is_multiple_of(2) {
            return Err(ContactError::EvenDimension(dim));
        }
        if alpha.degree() != 1 || alpha.dim() != manifold.ambient_dim() {
            return Err(ContactError::NotOneForm {
                expected: manifold.ambient_dim(),
                degree: alpha.degree(),
                dim: alpha.dim(),
            });
        }
        let dalpha = alpha.ext_deriv(scheme)?;
        Ok(Self { alpha, dalpha, manifold, n: (dim - 1) / 2 })
    }

    pub fn alpha(&self) -> &KForm {
        &self.alpha
    }

    pub fn dalpha(&self) -> &KForm {
        &self.dalpha
    }

    pub fn manifold(&self) -> &Submanifold {
        &self.manifold
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same form, opposite orientation convention on the manifold.
    pub fn reversed(&self) -> Self {
        Self { manifold: self.manifold.reversed(), ..self.clone() }
    }

    /// α∧(dα)ⁿ on a given basis of T_pV.
    pub fn volume_on(&self, p: &[f64], basis: &[Vec<f64>]) -> Result<f64, FormError> {
        let a = self.alpha.restrict(p, basis)?;
        let da = self.dalpha.restrict(p, basis)?;
        top_value(&[&a, &da.power(self.n)?])
    }

    /// α∧(dα)ⁿ on the oriented orthonormal tangent basis at p.
    pub fn volume_value(&self, p: &[f64]) -> Result<f64, ContactError> {
        let b = self.manifold.tangent_basis(p)?;
        Ok(self.volume_on(p, &b.vectors)?)
    }
}

/// Reeb vector together with solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ReebSolution {
    pub vector: Vec<f64>,
    pub residual: f64,
    pub singular_values: Vec<f64>,
}

/// Solve α(R) = 1, dα(R, e_i) = 0 over an orthonormal tangent basis.
pub fn reeb_field(cf: &ContactFormData, p: &[f64]) -> Result<ReebSolution, ContactError> {
    let t = cf.manifold.tangent_basis(p)?;
    let d = t.dim();
    let a = cf.alpha.restrict(p, &t.vectors)?;
    let w = cf.dalpha.restrict(p, &t.vectors)?;
    let mut sys = DMatrix::zeros(d + 1, d);
    for k in 0..d {
        sys[(0, k)] = a.coeffs()[k];
    }
    let mut e = vec![0.0; d];
    for j in 0..d {
        for k in 0..d {
            if j == k {
                continue;
            }
            e.iter_mut().for_each(|x| *x = 0.0);
            let mut f = vec![0.0; d];
            e[k] = 1.0;
            f[j] = 1.0;
            sys[(1 + j, k)] = w.eval(&[&e, &f])?;
        }
    }
    let mut rhs = vec![0.0; d + 1];
    rhs[0] = 1.0;
    let sv = linalg::singular_values(&sys);
    let degenerate = |residual| ContactError::Degenerate { point: p.to_vec(), residual, singular_values: sv.clone() };
    if !(sv.last().copied().unwrap_or(0.0) > 1e-8 * sv[0].max(1.0)) {
        return Err(degenerate(f64::NAN));
    }
    let c = linalg::lstsq(&sys, &rhs).ok_or_else(|| degenerate(f64::NAN))?;
    let residual = linalg::residual(&sys, &c, &rhs);
    if !(residual <= REEB_TOL) {
        return Err(degenerate(residual));
    }
    let mut r = vec![0.0; p.len()];
    for (ck, tk) in c.iter().zip(&t.vectors) {
        linalg::axpy(&mut r, *ck, tk);
    }
    Ok(ReebSolution { vector: r, residual, singular_values: sv })
}

/// min α∧(dα)ⁿ over samples; pass iff it exceeds `threshold`.
/// Also reports the worst Reeb solve residual.
pub fn verify_contact(cf: &ContactFormData, samples: &[Point], threshold: f64) -> CheckReport {
    let t = tally(samples, |p| {
        let v = cf.volume_value(p).map_err(|e| e.to_string())?;
        let reeb = match reeb_field(cf, p) {
            Ok(s) => s.residual,
            Err(_) => f64::INFINITY,
        };
        Ok((v, reeb))
    });
    let mut b = CheckReport::builder(
        format!("contact/{}", cf.manifold.name()),
        "alpha ^ (d alpha)^n > 0 on oriented tangent bases",
    )
    .samples(samples.len())
    .margin(t.min_margin, threshold)
    .fail_all(t.errors.into_failures("evaluation"));
    if t.max_residual.is_finite() {
        b = b.note(format!("max Reeb residual {:.3e}", t.max_residual));
    } else {
        b = b.note("Reeb solve degenerate at some sample");
    }
    b.finish()
}

type ComplexFn = dyn Fn(&[f64]) -> (f64, f64) + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync;

/// f = f_x + i f_y on ambient space, with optional analytic gradients.
#[derive(Clone)]
pub struct DefiningFunction {
    name: String,
    dim: usize,
    f: Arc<ComplexFn>,
    grad: Option<Arc<GradFn>>,
    scheme: DiffScheme,
}

impl fmt::Debug for DefiningFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DefiningFunction({} on R^{})", self.name, self.dim)
    }
}

impl DefiningFunction {
    pub fn new(name: impl Into<String>, dim: usize, f: impl Fn(&[f64]) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Self { name: name.into(), dim, f: Arc::new(f), grad: None, scheme: DiffScheme::Central { h: 1e-6 } }
    }

    /// Gradients (∇f_x, ∇f_y) in ambient coordinates.
    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn with_scheme(mut self, scheme: DiffScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, p: &[f64]) -> (f64, f64) {
        (self.f)(p)
    }

    pub fn modulus(&self, p: &[f64]) -> f64 {
        let (x, y) = self.value(p);
        x.hypot(y)
    }

    pub fn gradient(&self, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        if let Some(g) = &self.grad {
            return g(p);
        }
        let (mut gx, mut gy) = (vec![0.0; self.dim], vec![0.0; self.dim]);
        for j in 0..self.dim {
            let d = self
                .scheme
                .derivative(|t| {
                    let mut q = p.to_vec();
                    q[j] += t;
                    let (a, b) = (self.f)(&q);
                    Ok::<_, FormError>(vec![a, b])
                })
                .expect("infallible");
            gx[j] = d[0];
            gy[j] = d[1];
        }
        (gx, gy)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// f_x as a 0-form.
    pub fn fx_form(&self) -> KForm {
        let s = self.clone();
        KForm::function(self.dim, move |p| s.value(p).0)
    }

    /// f_y as a 0-form.
    pub fn fy_form(&self) -> KForm {
        let s = self.clone();
        KForm::function(self.dim, move |p| s.value(p).1)
    }

    pub fn dfx(&self) -> KForm {
        let s = self.clone();
        KForm::one_form(self.dim, move |p| s.gradient(p).0)
    }

    pub fn dfy(&self) -> KForm {
        let s = self.clone();
        KForm::one_form(self.dim, move |p| s.gradient(p).1)
    }

    /// ρ²dϑ = f_x df_y − f_y df_x (smooth everywhere).
    pub fn angular(&self) -> KForm {
        let s = self.clone();
        KForm::one_form(self.dim, move |p| {
            let (x, y) = s.value(p);
            let (gx, gy) = s.gradient(p);
            gx.iter().zip(&gy).map(|(a, b)| x * b - y * a).collect()
        })
    }

    /// dϑ, defined off the zero set.
    pub fn dtheta(&self) -> KForm {
        let s = self.clone();
        self.angular()
            .mul_fn(move |p| {
                let (x, y) = s.value(p);
                1.0 / (x * x + y * y)
            })
            .with_domain({
                let s = self.clone();
                move |p| s.modulus(p) > 0.0
            })
    }

    /// ρdρ∧dϑ = df_x∧df_y.
    pub fn area(&self) -> KForm {
        self.dfx().wedge(&self.dfy()).expect("two 1-forms on the same space")
    }

    /// Complex conjugate f̄.
    pub fn conj(&self) -> Self {
        let f = self.f.clone();
        let grad = self.grad.clone().map(|g| {
            Arc::new(move |p: &[f64]| {
                let (gx, gy) = g(p);
                (gx, gy.into_iter().map(|v| -v).collect())
            }) as Arc<GradFn>
        });
        Self {
            name: format!("conj({})", self.name),
            dim: self.dim,
            f: Arc::new(move |p| {
                let (x, y) = f(p);
                (x, -y)
            }),
            grad,
            scheme: self.scheme,
        }
    }

    /// Same function viewed on ℝ^dim ⊇ ℝ^self.dim, ignoring the extra coordinates.
    pub fn lift(&self, dim: usize) -> Self {
        let m = self.dim;
        let f = self.f.clone();
        let grad = self.grad.clone().map(|g| {
            Arc::new(move |p: &[f64]| {
                let (mut gx, mut gy) = g(&p[..m]);
                gx.resize(dim, 0.0);
                gy.resize(dim, 0.0);
                (gx, gy)
            }) as Arc<GradFn>
        });
        Self { name: self.name.clone(), dim, f: Arc::new(move |p| f(&p[..m])), grad, scheme: self.scheme }
    }

    /// Multiply by a real function χ (gradient by the product rule when analytic data exists).
    pub fn scaled_by(&self, name: impl Into<String>, chi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let f = self.f.clone();
        Self {
            name: name.into(),
            dim: self.dim,
            f: Arc::new(move |p| {
                let (x, y) = f(p);
                let c = chi(p);
                (c * x, c * y)
            }),
            grad: None,
            scheme: self.scheme,
        }
    }

    /// Singular values of (df_x, df_y) restricted to a tangent basis.
    pub fn restricted_singular_values(&self, p: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
        let (gx, gy) = self.gradient(p);
        let rows = vec![
            basis.iter().map(|e| linalg::dot(&gx, e)).collect::<Vec<_>>(),
            basis.iter().map(|e| linalg::dot(&gy, e)).collect::<Vec<_>>(),
        ];
        linalg::singular_values(&linalg::matrix_from_rows(&rows, basis.len()))
    }
}

/// Binding K = V ∩ f⁻¹(0) as a submanifold: V's constraints followed by (f_x, f_y).
pub fn binding_submanifold(v: &Submanifold, f: &DefiningFunction, name: impl Into<String>) -> Submanifold {
    let (v1, f1) = (v.clone(), f.clone());
    let (v2, f2) = (v.clone(), f.clone());
    Submanifold::new(name, v.ambient_dim(), v.n_constraints() + 2, move |p| {
        let mut c = v1.constraints(p);
        let (x, y) = f1.value(p);
        c.extend([x, y]);
        c
    })
    .with_gradients(move |p| {
        let mut g = v2.gradients(p);
        let (gx, gy) = f2.gradient(p);
        g.push(gx);
        g.push(gy);
        g
    })
    .with_orientation(v.orientation())
}

/// Contact form plus defining function, with the binding as a submanifold.
#[derive(Clone, Debug)]
pub struct RepresentationData {
    pub contact: ContactFormData,
    pub f: DefiningFunction,
    pub binding: Submanifold,
}

impl RepresentationData {
    pub fn new(contact: ContactFormData, f: DefiningFunction, binding: Submanifold) -> Self {
        Self { contact, f, binding }
    }

    pub fn manifold(&self) -> &Submanifold {
        self.contact.manifold()
    }

    pub fn n(&self) -> usize {
        self.contact.n()
    }
}

/// Raw value h_x dh_y(R) − h_y dh_x(R) at p (condition (ii) of adaptedness).
pub fn adapted_rotation(cf: &ContactFormData, h: &DefiningFunction, p: &[f64]) -> Result<f64, ContactError> {
    let r = reeb_field(cf, p)?.vector;
    let (x, y) = h.value(p);
    let (gx, gy) = h.gradient(p);
    Ok(x * linalg::dot(&gy, &r) - y * linalg::dot(&gx, &r))
}

/// α∧(dα)^{n−1}∧dh_x∧dh_y on the oriented basis of T_pV (condition (i), at binding points).
pub fn adapted_binding_value(cf: &ContactFormData, h: &DefiningFunction, p: &[f64]) -> Result<f64, ContactError> {
    let b = cf.manifold().tangent_basis(p)?;
    let a = cf.alpha().restrict(p, &b.vectors)?;
    let da = cf.dalpha().restrict(p, &b.vectors)?;
    let hx = h.dfx().restrict(p, &b.vectors)?;
    let hy = h.dfy().restrict(p, &b.vectors)?;
    Ok(top_value(&[&a, &da.power(cf.n() - 1)?, &hx, &hy])?)
}

/// Sufficient conditions for (V, α) to be adapted to the open book of h:
/// (i) α∧(dα)^{n−1}∧dh_x∧dh_y > 0 along the binding,
/// (ii) dϑ(R_α) > 0 off the binding, measured as (h_x dh_y − h_y dh_x)(R)/|h|².
pub fn verify_adapted(
    cf: &ContactFormData,
    h: &DefiningFunction,
    binding_samples: &[Point],
    off_samples: &[Point],
    threshold: f64,
) -> Result<CheckReport, ContactError> {
    if binding_samples.is_empty() {
        return Err(ContactError::EmptyBinding);
    }
    let on = tally(binding_samples, |p| {
        let r = h.modulus(p);
        if r > 1e-8 {
            return Err(format!("binding sample has |h| = {r:e}"));
        }
        Ok((adapted_binding_value(cf, h, p).map_err(|e| e.to_string())?, 0.0))
    });
    let used: Vec<&Point> = off_samples.iter().filter(|p| h.modulus(p) >= NEAR_BINDING).collect();
    let off = tally(&used, |p| {
        let r2 = h.modulus(p).powi(2);
        Ok((adapted_rotation(cf, h, p).map_err(|e| e.to_string())? / r2, 0.0))
    });
    let margin = on.min_margin.min(off.min_margin);
    Ok(CheckReport::builder(
        format!("adapted/{}", h.name()),
        "alpha^(d alpha)^(n-1)^dh_x^dh_y > 0 on K; dtheta(R_alpha) > 0 off K",
    )
    .samples(binding_samples.len() + used.len())
    .margin(margin, threshold)
    .note(format!("binding margin {:.6e}, page-rotation margin {:.6e}", on.min_margin, off.min_margin))
    .fail_all(on.errors.into_failures("binding condition"))
    .fail_all(off.errors.into_failures("rotation condition"))
    .finish())
}

/// Pointwise Ω_V = n·df_x∧df_y∧α∧(dα)^{n−1} + (f_x df_y − f_y df_x)∧(dα)ⁿ.
pub fn volume_at(
    alpha: &AltForm,
    dalpha: &AltForm,
    fv: (f64, f64),
    grad: (&[f64], &[f64]),
    n: usize,
) -> Result<AltForm, FormError> {
    let m = alpha.dim();
    let gx = AltForm::from_coeffs(m, 1, grad.0.to_vec())?;
    let gy = AltForm::from_coeffs(m, 1, grad.1.to_vec())?;
    let ang = gy.scale(fv.0).sub(&gx.scale(fv.1))?;
    let mut first = gx.wedge(&gy)?.wedge(alpha)?.wedge(&dalpha.power(n - 1)?)?.scale(n as f64);
    first.axpy(1.0, &ang.wedge(&dalpha.power(n)?)?)?;
    Ok(first)
}

/// The smooth open-book volume form Ω_V of a representation, as an ambient (2n+1)-form.
pub fn openbook_volume_form(rep: &RepresentationData) -> KForm {
    let (alpha, dalpha, f, n) = (rep.contact.alpha().clone(), rep.contact.dalpha().clone(), rep.f.clone(), rep.n());
    KForm::new(alpha.dim(), 2 * n + 1, move |p| {
        let (gx, gy) = f.gradient(p);
        volume_at(&alpha.eval(p)?, &dalpha.eval(p)?, f.value(p), (&gx, &gy), n)
    })
}

/// |f|^{n+2} dϑ∧(dλ)ⁿ with λ = α/|f|, the unregularized quotient formula.
/// dλ = (dα − d|f|/|f| ∧ α)/|f| with d|f| from the gradient of f. Defined off the binding.
pub fn volume_quotient_form(rep: &RepresentationData) -> KForm {
    let (alpha, dalpha, f, n) = (rep.contact.alpha().clone(), rep.contact.dalpha().clone(), rep.f.clone(), rep.n());
    let m = alpha.dim();
    let f2 = f.clone();
    KForm::new(m, 2 * n + 1, move |p| {
        let (x, y) = f.value(p);
        let r = x.hypot(y);
        let (gx, gy) = f.gradient(p);
        let dr: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| (x * a + y * b) / r).collect();
        let dtheta: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| (x * b - y * a) / (r * r)).collect();
        let a = alpha.eval(p)?;
        let dlog = AltForm::from_coeffs(m, 1, dr.iter().map(|v| v / r).collect())?;
        let dl = dalpha.eval(p)?.sub(&dlog.wedge(&a)?)?.scale(1.0 / r);
        let dth = AltForm::from_coeffs(m, 1, dtheta)?;
        Ok(dth.wedge(&dl.power(n)?)?.scale(r.powi(n as i32 + 2)))
    })
    .with_domain(move |p| f2.modulus(p) > 0.0)
}

/// Which representation conditions hold at the given samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationConditions {
    pub binding_nonempty: bool,
    pub regular_value: bool,
    pub submersion: bool,
    pub ideal_liouville: bool,
    pub binding_contact: bool,
    /// min Ω_V over all samples.
    pub min_volume: f64,
    /// min of the page-restricted top power ρ^{n+2}(dλ|page)ⁿ·|dϑ| off the binding.
    pub min_page: f64,
    /// min α∧(dα)^{n−1} on oriented binding bases.
    pub min_binding_contact: f64,
    /// max relative gap between the page computation and Ω_V(ν, page basis).
    pub page_disagreement: f64,
    pub messages: Vec<String>,
}

impl RepresentationConditions {
    pub fn all_hold(&self) -> bool {
        self.binding_nonempty && self.regular_value && self.submersion && self.ideal_liouville && self.binding_contact
    }

    pub fn failed(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.regular_value {
            out.push("regular-value");
        }
        if !self.binding_nonempty {
            out.push("binding-nonempty");
        }
        if !self.submersion {
            out.push("submersion");
        }
        if !self.ideal_liouville {
            out.push("ideal-liouville");
        }
        if !self.binding_contact {
            out.push("binding-contact");
        }
        out
    }
}

fn page_check(
    rep: &RepresentationData,
    omega: &KForm,
    ang: &KForm,
    frame: &OrientedBasis,
    p: &[f64],
) -> Result<(f64, f64), String> {
    let n = rep.n();
    let page = page_basis_in(&frame.vectors, p, ang, omega).map_err(|e| e.to_string())?;
    let (x, y) = rep.f.value(p);
    let r = x.hypot(y);
    let (gx, gy) = rep.f.gradient(p);
    let m = p.len();
    let a = rep.contact.alpha().eval(p).map_err(|e| e.to_string())?;
    let dr: Vec<f64> = gx.iter().zip(&gy).map(|(u, v)| (x * u + y * v) / (r * r)).collect();
    let dlog = AltForm::from_coeffs(m, 1, dr).map_err(|e| e.to_string())?;
    let dl =
        rep.contact.dalpha().eval(p).and_then(|da| da.sub(&dlog.wedge(&a)?)).map_err(|e| e.to_string())?.scale(1.0 / r);
    let restricted = dl.pullback_columns(&page.vectors).map_err(|e| e.to_string())?;
    let power = restricted.power(n).map_err(|e| e.to_string())?.top();
    let dth: Vec<f64> = gx.iter().zip(&gy).map(|(u, v)| (x * v - y * u) / (r * r)).collect();
    let dth_t: Vec<f64> = frame.vectors.iter().map(|e| linalg::dot(&dth, e)).collect();
    let dth_norm = linalg::norm(&dth_t);
    let page_value = r.powi(n as i32 + 2) * power * dth_norm;
    // unit normal to the page inside T_pV, pointing along increasing ϑ
    let mut nu = vec![0.0; m];
    for (c, e) in dth_t.iter().zip(&frame.vectors) {
        linalg::axpy(&mut nu, c / dth_norm, e);
    }
    let mut args: Vec<&[f64]> = vec![&nu];
    args.extend(page.vectors.iter().map(|v| v.as_slice()));
    let direct = omega.eval_on(p, &args).map_err(|e| e.to_string())?;
    Ok((page_value, (page_value - direct).abs() / direct.abs().max(f64::MIN_POSITIVE)))
}

/// Evaluate every representation condition at the given samples.
pub fn representation_conditions(
    rep: &RepresentationData,
    off_samples: &[Point],
    binding_samples: &[Point],
    threshold: f64,
) -> RepresentationConditions {
    let v = rep.manifold();
    let n = rep.n();
    let omega = openbook_volume_form(rep);
    let ang = rep.f.angular();
    let mut messages = Vec::new();

    // Ω_V everywhere, plus the page computation and the submersion test off the binding.
    let all: Vec<&Point> = off_samples.iter().chain(binding_samples).collect();
    let vol = tally(&all, |p| {
        let b = v.tangent_basis(p).map_err(|e| e.to_string())?;
        let mut args: Vec<&[f64]> = Vec::new();
        args.extend(b.vectors.iter().map(|e| e.as_slice()));
        Ok((omega.eval_on(p, &args).map_err(|e| e.to_string())?, 0.0))
    });
    let page = tally(off_samples, |p| {
        if rep.f.modulus(p) < NEAR_BINDING {
            return Ok((f64::INFINITY, 0.0));
        }
        let frame = v.tangent_basis(p).map_err(|e| e.to_string())?;
        page_check(rep, &omega, &ang, &frame, p)
    });
    let subm = tally(off_samples, |p| {
        let r = rep.f.modulus(p);
        if r < NEAR_BINDING {
            return Ok((f64::INFINITY, 0.0));
        }
        let frame = v.tangent_basis(p).map_err(|e| e.to_string())?;
        let (x, y) = rep.f.value(p);
        let (gx, gy) = rep.f.gradient(p);
        let d: Vec<f64> =
            frame.vectors.iter().map(|e| (x * linalg::dot(&gy, e) - y * linalg::dot(&gx, e)) / (r * r)).collect();
        let s = linalg::norm(&d);
        if s > 1e-8 {
            Ok((s, 0.0))
        } else {
            Err(format!("d theta vanishes on T_pV at {:?}", p.coords()))
        }
    });
    // near-zero values of f away from the sampled binding must still be regular
    let stray = tally(off_samples, |p| {
        let r = rep.f.modulus(p);
        if r >= NEAR_BINDING {
            return Ok((f64::INFINITY, 0.0));
        }
        let frame = v.tangent_basis(p).map_err(|e| e.to_string())?;
        let sv = rep.f.restricted_singular_values(p, &frame.vectors);
        if sv.last().copied().unwrap_or(0.0) > 1e-6 {
            Ok((f64::INFINITY, 0.0))
        } else {
            Err(format!("f degenerates at {:?} (|f| = {r:.2e}, theta undefined nearby)", p.coords()))
        }
    });
    let regular = tally(binding_samples, |p| {
        let r = rep.f.modulus(p);
        if r > 1e-8 {
            return Err(format!("binding sample with |f| = {r:e}"));
        }
        let frame = v.tangent_basis(p).map_err(|e| e.to_string())?;
        let sv = rep.f.restricted_singular_values(p, &frame.vectors);
        let smin = sv.last().copied().unwrap_or(0.0);
        if smin > 1e-6 {
            Ok((smin, 0.0))
        } else {
            Err(format!("df|TV has singular values {sv:?} at {:?}", p.coords()))
        }
    });
    let bind = tally(binding_samples, |p| {
        let b = rep.binding.tangent_basis(p).map_err(|e| e.to_string())?;
        let a = rep.contact.alpha().restrict(p, &b.vectors).map_err(|e| e.to_string())?;
        if n == 1 {
            return Ok((a.top(), 0.0));
        }
        let da = rep.contact.dalpha().restrict(p, &b.vectors).map_err(|e| e.to_string())?;
        let val = da.power(n - 1).and_then(|w| top_value(&[&a, &w])).map_err(|e| e.to_string())?;
        Ok((val, 0.0))
    });

    let binding_nonempty = !binding_samples.is_empty();
    if !binding_nonempty {
        messages.push("binding-nonempty: no binding samples".to_string());
    }
    let regular_value = binding_nonempty && regular.errors.count == 0 && stray.errors.count == 0;
    let submersion = subm.errors.count == 0 && stray.errors.count == 0;
    let page_ok = page.errors.count == 0 && page.min_margin > threshold && page.max_residual <= VOLUME_AGREEMENT_TOL;
    let ideal_liouville = vol.errors.count == 0 && vol.min_margin > threshold && page_ok;
    let binding_contact = binding_nonempty && bind.errors.count == 0 && bind.min_margin > threshold;
    if !regular.errors.first.is_empty() {
        messages.extend(regular.errors.clone().into_failures("regular-value"));
    }
    messages.extend(subm.errors.clone().into_failures("submersion"));
    messages.extend(stray.errors.clone().into_failures("submersion/regular-value"));
    messages.extend(vol.errors.clone().into_failures("ideal-liouville (volume)"));
    messages.extend(page.errors.clone().into_failures("ideal-liouville (page)"));
    messages.extend(bind.errors.clone().into_failures("binding-contact"));
    RepresentationConditions {
        binding_nonempty,
        regular_value,
        submersion,
        ideal_liouville,
        binding_contact,
        min_volume: vol.min_margin,
        min_page: page.min_margin,
        min_binding_contact: bind.min_margin,
        page_disagreement: page.max_residual,
        messages,
    }
}

/// Full representation check; the report names every failed condition.
pub fn verify_representation(
    rep: &RepresentationData,
    off_samples: &[Point],
    binding_samples: &[Point],
    threshold: f64,
) -> CheckReport {
    let c = representation_conditions(rep, off_samples, binding_samples, threshold);
    let margin = c.min_volume.min(c.min_page).min(c.min_binding_contact);
    let mut b = CheckReport::builder(
        format!("representation/{}", rep.f.name()),
        "Omega_V > 0; rho^(n+2) (d(alpha/rho)|page)^n > 0; alpha|K contact; 0 regular value; theta submersion",
    )
    .samples(off_samples.len() + binding_samples.len())
    .margin(margin, threshold)
    .residual(c.page_disagreement, VOLUME_AGREEMENT_TOL)
    .note(format!(
        "min Omega_V {:.6e}, min page power {:.6e}, min binding contact {:.6e}",
        c.min_volume, c.min_page, c.min_binding_contact
    ));
    for name in c.failed() {
        b = b.fail(format!("condition failed: {name}"));
    }
    b.fail_all(c.messages).finish()
}

/// Two-sided check of Ω_V: regularized formula against the quotient formula
/// at samples with |f| ≥ 1e-3, positivity everywhere (binding samples included).
pub fn volume_form_check(
    rep: &RepresentationData,
    off_samples: &[Point],
    binding_samples: &[Point],
    threshold: f64,
) -> CheckReport {
    let v = rep.manifold();
    let omega = openbook_volume_form(rep);
    let quotient = volume_quotient_form(rep);
    let all: Vec<&Point> = off_samples.iter().chain(binding_samples).collect();
    let t = tally(&all, |p| {
        let b = v.tangent_basis(p).map_err(|e| e.to_string())?;
        let args = b.refs();
        let reg = omega.eval_on(p, &args).map_err(|e| e.to_string())?;
        let rel = if rep.f.modulus(p) >= NEAR_BINDING {
            let q = quotient.eval_on(p, &args).map_err(|e| e.to_string())?;
            (reg - q).abs() / reg.abs()
        } else {
            0.0
        };
        Ok((reg, rel))
    });
    CheckReport::builder(
        format!("volume-form/{}", rep.f.name()),
        "n df_x^df_y^alpha^(d alpha)^(n-1) + (f_x df_y - f_y df_x)^(d alpha)^n = |f|^(n+2) dtheta^(d lambda)^n",
    )
    .samples(all.len())
    .margin(t.min_margin, threshold)
    .residual(t.max_residual, VOLUME_AGREEMENT_TOL)
    .note(format!("{} binding samples", binding_samples.len()))
    .fail_all(t.errors.into_failures("evaluation"))
    .finish()
}
