//! Bourgeois forms α_V + ε(f_x dφ₁ − f_y dφ₂) on V×T², the inverse-monodromy
//! forms α₊ − C(f_x df_y − f_y df_x) with their isotopy, and the weak-filling
//! polynomial.
//!
//! V×T² uses the ambient layout (V coordinates, φ₁, φ₂) and the product
//! orientation. Reversing the torus factor is expressed through the
//! orientation convention of the submanifold, never by changing forms.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::contact::{
    binding_submanifold, openbook_volume_form, top_value, verify_contact, verify_representation, volume_at,
    ContactError, ContactFormData, DefiningFunction, RepresentationData, NEAR_BINDING,
};
use crate::forms::{AltForm, FormError, KForm, Point, SmoothMap};
use crate::manifolds::{page_basis_in, ManifoldError, Submanifold};
use crate::report::{nan_max, nan_min, tally, CheckReport, Sweep};

/// Relative agreement between the direct and expanded top powers.
pub const EXPANSION_TOL: f64 = 1e-8;
/// Pointwise agreement of α₋ and α₊ on pages and binding.
pub const RESTRICTION_TOL: f64 = 1e-10;
/// Tolerance of the numerical pullback identities along the isotopy.
pub const ISOTOPY_TOL: f64 = 1e-6;
/// Coefficient agreement for the final angle flip.
pub const FLIP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BourgeoisError {
    #[error("defining function lives on R^{got}, contact form on R^{expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("base pair is not a representation: {}", .0.summary())]
    Representation(Box<CheckReport>),
    #[error("no C up to {max} makes the inverse form contact (best reversed margin {best:e})")]
    NoInverseConstant { max: f64, best: f64 },
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A representation (α_V, f) together with its Bourgeois form on V×T².
#[derive(Clone, Debug)]
pub struct BourgeoisFormData {
    base: RepresentationData,
    epsilon: f64,
    contact: ContactFormData,
}

/// ε(f_x dφ₁ − f_y dφ₂) on ℝ^{m+2}.
fn torus_part(f: &DefiningFunction, m: usize, epsilon: f64) -> KForm {
    let f = f.clone();
    KForm::one_form(m + 2, move |p| {
        let (x, y) = f.value(&p[..m]);
        let mut c = vec![0.0; m + 2];
        c[m] = epsilon * x;
        c[m + 1] = -epsilon * y;
        c
    })
}

fn assemble(rep: &RepresentationData, epsilon: f64) -> Result<BourgeoisFormData, BourgeoisError> {
    let m = rep.manifold().ambient_dim();
    if rep.f.dim() != m {
        return Err(BourgeoisError::DimensionMismatch { expected: m, got: rep.f.dim() });
    }
    let alpha = rep.contact.alpha().lift(m + 2).add(&torus_part(&rep.f, m, epsilon))?;
    let contact = ContactFormData::new(alpha, rep.manifold().times_torus())?;
    Ok(BourgeoisFormData { base: rep.clone(), epsilon, contact })
}

/// α = α_V + f_x dφ₁ − f_y dφ₂. Only the shapes are checked here; see
/// [`bourgeois_form_verified`] for the version that runs the representation suite first.
pub fn bourgeois_form(rep: &RepresentationData) -> Result<BourgeoisFormData, BourgeoisError> {
    assemble(rep, 1.0)
}

/// Run `verify_representation` on the base pair and build the form only if it passes.
pub fn bourgeois_form_verified(
    rep: &RepresentationData,
    off_samples: &[Point],
    binding_samples: &[Point],
    threshold: f64,
) -> Result<BourgeoisFormData, BourgeoisError> {
    let report = verify_representation(rep, off_samples, binding_samples, threshold);
    if !report.pass {
        return Err(BourgeoisError::Representation(Box::new(report)));
    }
    bourgeois_form(rep)
}

impl BourgeoisFormData {
    /// α_ε = α_V + ε(f_x dφ₁ − f_y dφ₂) for the same base.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, BourgeoisError> {
        assemble(&self.base, epsilon)
    }

    pub fn base(&self) -> &RepresentationData {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> &KForm {
        self.contact.alpha()
    }

    pub fn contact(&self) -> &ContactFormData {
        &self.contact
    }

    /// V×T².
    pub fn total(&self) -> &Submanifold {
        self.contact.manifold()
    }

    /// Half the dimension of V minus one; V×T² has dimension 2n + 3.
    pub fn n(&self) -> usize {
        self.base.n()
    }

    fn base_dim(&self) -> usize {
        self.base.manifold().ambient_dim()
    }

    /// ε²(n+1)[n df_x∧df_y∧α_V∧(dα_V)^{n−1} + (f_x df_y − f_y df_x)∧(dα_V)ⁿ]∧dφ₁∧dφ₂,
    /// each factor restricted to `basis` before wedging.
    pub fn expanded_volume(&self, p: &[f64], basis: &[Vec<f64>]) -> Result<f64, FormError> {
        let (m, n, eps) = (self.base_dim(), self.n(), self.epsilon);
        let q = &p[..m];
        let big = m + 2;
        let restrict = |a: AltForm| a.lift(big).pullback_columns(basis);
        let a = restrict(self.base.contact.alpha().eval(q)?)?;
        let da = restrict(self.base.contact.dalpha().eval(q)?)?;
        let (x, y) = self.base.f.value(q);
        let (gx, gy) = self.base.f.gradient(q);
        let dfx = restrict(AltForm::from_coeffs(m, 1, gx.clone())?)?;
        let dfy = restrict(AltForm::from_coeffs(m, 1, gy.clone())?)?;
        let ang = dfy.scale(x).sub(&dfx.scale(y))?;
        let dphi = AltForm::monomial(big, &[m, m + 1]).pullback_columns(basis)?;
        let first = top_value(&[&dfx, &dfy, &a, &da.power(n - 1)?, &dphi])? * n as f64;
        let second = top_value(&[&ang, &da.power(n)?, &dphi])?;
        Ok(eps * eps * (n as f64 + 1.0) * (first + second))
    }

    /// ε²(n+1)·Ω_V∧dφ₁∧dφ₂ evaluated as an ambient form.
    pub fn openbook_volume(&self, p: &[f64], basis: &[Vec<f64>]) -> Result<f64, FormError> {
        let (m, n, eps) = (self.base_dim(), self.n(), self.epsilon);
        let q = &p[..m];
        let (gx, gy) = self.base.f.gradient(q);
        let omega = volume_at(
            &self.base.contact.alpha().eval(q)?,
            &self.base.contact.dalpha().eval(q)?,
            self.base.f.value(q),
            (&gx, &gy),
            n,
        )?;
        let top = omega.lift(m + 2).wedge(&AltForm::monomial(m + 2, &[m, m + 1]))?;
        Ok(eps * eps * (n as f64 + 1.0) * top.pullback_columns(basis)?.top())
    }
}

/// α∧(dα)^{n+1} on V×T² three ways: directly from the assembled form, from the
/// expanded product formula, and as (n+1)Ω_V∧dφ₁∧dφ₂. Margin is the smallest
/// direct value; residual the largest relative disagreement.
pub fn verify_bg_contact(bf: &BourgeoisFormData, samples: &[Point], threshold: f64) -> CheckReport {
    let total = bf.total();
    let t = tally(samples, |p| {
        let b = total.tangent_basis(p).map_err(|e| e.to_string())?;
        let direct = bf.contact.volume_on(p, &b.vectors).map_err(|e| e.to_string())?;
        let expanded = bf.expanded_volume(p, &b.vectors).map_err(|e| e.to_string())?;
        let via_omega = bf.openbook_volume(p, &b.vectors).map_err(|e| e.to_string())?;
        let rel = ((direct - expanded).abs()).max((direct - via_omega).abs()) / direct.abs();
        Ok((direct.min(expanded), rel))
    });
    CheckReport::builder(
        format!("bourgeois-contact/{}", bf.base.f.name()),
        "alpha^(d alpha)^(n+1) = (n+1) [n df_x^df_y^alpha_V^(d alpha_V)^(n-1) + (f_x df_y - f_y df_x)^(d alpha_V)^n]^dphi1^dphi2",
    )
    .samples(samples.len())
    .margin(t.min_margin, threshold)
    .residual(t.max_residual, EXPANSION_TOL)
    .note(format!("epsilon = {}", bf.epsilon))
    .fail_all(t.errors.into_failures("evaluation"))
    .finish()
}

/// α_ε∧(dα_ε)^{n+1} = ε²·α∧(dα)^{n+1} at every sample for every ε.
/// The margin is the smallest α_ε∧(dα_ε)^{n+1}/ε².
pub fn epsilon_scaling_check(
    rep: &RepresentationData,
    epsilons: &[f64],
    samples: &[Point],
    threshold: f64,
) -> Result<CheckReport, BourgeoisError> {
    let unit = bourgeois_form(rep)?;
    let family = epsilons.iter().map(|&e| unit.with_epsilon(e)).collect::<Result<Vec<_>, _>>()?;
    let total = unit.total().clone();
    let t = tally(samples, |p| {
        let b = total.tangent_basis(p).map_err(|e| e.to_string())?;
        let base = unit.contact.volume_on(p, &b.vectors).map_err(|e| e.to_string())?;
        let mut margin = f64::INFINITY;
        let mut gap: f64 = 0.0;
        for bf in &family {
            let e2 = bf.epsilon * bf.epsilon;
            let v = bf.contact.volume_on(p, &b.vectors).map_err(|e| e.to_string())?;
            margin = nan_min(margin, v / e2);
            gap = nan_max(gap, (v - e2 * base).abs() / (e2 * base).abs());
        }
        Ok((margin, gap))
    });
    Ok(CheckReport::builder(
        format!("epsilon-scaling/{}", rep.f.name()),
        "alpha_eps^(d alpha_eps)^(n+1) = eps^2 alpha^(d alpha)^(n+1)",
    )
    .samples(samples.len())
    .margin(t.min_margin, threshold)
    .residual(t.max_residual, EXPANSION_TOL)
    .note(format!("epsilons {epsilons:?}"))
    .fail_all(t.errors.into_failures("evaluation"))
    .finish())
}

/// Read the pair (α_V, f) off the slice V×{z}: α_V is the V-part of α(·, z) and
/// f = α(∂φ₁) − iα(∂φ₂). The binding samples by projecting points of V.
pub fn characterization_extract(bf: &BourgeoisFormData, z: [f64; 2]) -> Result<RepresentationData, BourgeoisError> {
    let m = bf.base_dim();
    let v = bf.base.manifold().clone();
    let embed = move |q: &[f64]| {
        let mut p = q.to_vec();
        p.extend(z);
        p
    };
    let alpha = bf.alpha().clone();
    let slice_alpha = KForm::new(m, 1, move |q| {
        let c = alpha.eval(&embed(q))?;
        AltForm::from_coeffs(m, 1, c.coeffs()[..m].to_vec())
    });
    let alpha = bf.alpha().clone();
    let f = DefiningFunction::new(format!("slice({})", bf.base.f.name()), m, move |q| {
        let c = alpha.eval(&embed(q)).expect("slice point has full dimension");
        (c.coeffs()[m], -c.coeffs()[m + 1])
    });
    let contact = ContactFormData::new(slice_alpha, v.clone())?;
    let binding = binding_submanifold(&v, &f, format!("K({})", f.name())).with_projection_sampler(move |rng| {
        let seed: u64 = rng.random();
        v.sample_one(seed, 0).map(Point::into_coords).unwrap_or_else(|_| vec![0.0; m])
    });
    Ok(RepresentationData::new(contact, f, binding))
}

/// Extract the slice at `z` and run the representation suite on it.
pub fn characterization_check(
    bf: &BourgeoisFormData,
    z: [f64; 2],
    off_samples: &[Point],
    n_binding: usize,
    seed: u64,
    threshold: f64,
) -> Result<CheckReport, BourgeoisError> {
    let rep = characterization_extract(bf, z)?;
    let mut report = match rep.binding.sample(n_binding, seed) {
        Ok(bind) => verify_representation(&rep, off_samples, &bind, threshold),
        Err(e) => {
            verify_representation(&rep, off_samples, &[], threshold).with_failure(format!("binding sampling: {e}"))
        }
    };
    report.name = format!("characterization/{}@({:.3},{:.3})", bf.base.f.name(), z[0], z[1]);
    Ok(report)
}

/// Radial profile s ↦ φ(s): the identity on [0, r0], constant on [r1, ∞),
/// φ(s) = s − (r1 − r0)·I((s − r0)/(r1 − r0)) in between with I(t) = t⁶ − 3t⁵ + 5t⁴/2,
/// so φ is C² and nondecreasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub r0: f64,
    pub r1: f64,
}

impl Default for RadialProfile {
    fn default() -> Self {
        Self { r0: 0.2, r1: 0.4 }
    }
}

impl RadialProfile {
    fn t(&self, s: f64) -> f64 {
        ((s - self.r0) / (self.r1 - self.r0)).clamp(0.0, 1.0)
    }

    pub fn value(&self, s: f64) -> f64 {
        let t = self.t(s);
        if s <= self.r0 {
            return s;
        }
        let integral = t.powi(6) - 3.0 * t.powi(5) + 2.5 * t.powi(4);
        self.r0 + (self.r1 - self.r0) * (t - integral)
    }

    pub fn slope(&self, s: f64) -> f64 {
        if s <= self.r0 {
            return 1.0;
        }
        let t = self.t(s);
        1.0 - (6.0 * t.powi(5) - 15.0 * t.powi(4) + 10.0 * t.powi(3))
    }

    /// f ↦ φ(|f|)·f/|f|, with gradients by the chain rule from those of f.
    pub fn apply(&self, f: &DefiningFunction) -> DefiningFunction {
        let prof = *self;
        let (f1, f2) = (f.clone(), f.clone());
        DefiningFunction::new(format!("{}~", f.name()), f.dim(), move |p| {
            let (x, y) = f1.value(p);
            let r = x.hypot(y);
            let k = if r <= prof.r0 { 1.0 } else { prof.value(r) / r };
            (k * x, k * y)
        })
        .with_gradient(move |p| {
            let (x, y) = f2.value(p);
            let (gx, gy) = f2.gradient(p);
            let r = x.hypot(y);
            if r <= prof.r0 {
                return (gx, gy);
            }
            let k = prof.value(r) / r;
            let dk = (prof.slope(r) / r - prof.value(r) / (r * r)) / r;
            let grad_r: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| dk * (x * a + y * b)).collect();
            let hx = gx.iter().zip(&grad_r).map(|(a, g)| k * a + x * g).collect();
            let hy = gy.iter().zip(&grad_r).map(|(a, g)| k * a + y * g).collect();
            (hx, hy)
        })
    }
}

/// The same representation with f replaced by its profiled version.
pub fn profiled_representation(rep: &RepresentationData, profile: RadialProfile) -> RepresentationData {
    RepresentationData::new(rep.contact.clone(), profile.apply(&rep.f), rep.binding.clone())
}

/// α₋ = α₊ − C(f_x df_y − f_y df_x) on V, with the orientation of V unchanged.
/// For large C it is a contact form for the reversed orientation.
pub fn inverse_form(rep: &RepresentationData, c: f64) -> Result<ContactFormData, BourgeoisError> {
    let alpha = rep.contact.alpha().sub(&rep.f.angular().scale(c))?;
    Ok(ContactFormData::new(alpha, rep.manifold().clone())?)
}

/// α₋ contact for the reversed orientation, and α₋ = α₊ on page and binding tangent vectors.
pub fn inverse_check(
    rep: &RepresentationData,
    c: f64,
    samples: &[Point],
    binding_samples: &[Point],
    threshold: f64,
) -> Result<CheckReport, BourgeoisError> {
    let minus = inverse_form(rep, c)?;
    let contact = verify_contact(&minus.reversed(), samples, threshold);
    let plus = rep.contact.alpha();
    let ang = rep.f.angular();
    let omega = openbook_volume_form(rep);
    let v = rep.manifold();
    let gap = |p: &[f64], vectors: &[Vec<f64>]| -> Result<f64, String> {
        let a = minus.alpha().restrict(p, vectors).map_err(|e| e.to_string())?;
        let b = plus.restrict(p, vectors).map_err(|e| e.to_string())?;
        Ok(a.sub(&b).map_err(|e| e.to_string())?.max_abs())
    };
    let pages = tally(samples, |p| {
        if rep.f.modulus(p) < NEAR_BINDING {
            return Ok((f64::INFINITY, 0.0));
        }
        let frame = v.tangent_basis(p).map_err(|e| e.to_string())?;
        let page = page_basis_in(&frame.vectors, p, &ang, &omega).map_err(|e| e.to_string())?;
        Ok((f64::INFINITY, gap(p, &page.vectors)?))
    });
    let binding = tally(binding_samples, |p| {
        let b = rep.binding.tangent_basis(p).map_err(|e| e.to_string())?;
        Ok((f64::INFINITY, gap(p, &b.vectors)?))
    });
    let mut builder = CheckReport::builder(
        format!("inverse-form/{}/C={c}", rep.f.name()),
        "alpha_- = alpha_+ - C (f_x df_y - f_y df_x): contact for the reversed orientation, equal to alpha_+ on pages and binding",
    )
    .samples(samples.len() + binding_samples.len())
    .residual(pages.max_residual.max(binding.max_residual), RESTRICTION_TOL)
    .note(format!("page gap {:.3e}, binding gap {:.3e}", pages.max_residual, binding.max_residual))
    .fail_all(contact.failures.clone())
    .fail_all(pages.errors.into_failures("page restriction"))
    .fail_all(binding.errors.into_failures("binding restriction"));
    if let (Some(mm), Some(th)) = (contact.min_margin, contact.margin_threshold) {
        builder = builder.margin(mm, th);
    }
    Ok(builder.finish())
}

/// Outcome of the search for a constant making α₋ contact.
#[derive(Debug, Clone)]
pub struct InverseConstant {
    pub c: f64,
    pub report: CheckReport,
    /// Re-verification at 2C.
    pub confirm: CheckReport,
}

/// Try C = 1, 2, 4, …, 1024; accept the first C whose inverse check passes and re-verify at 2C.
pub fn find_inverse_constant(
    rep: &RepresentationData,
    samples: &[Point],
    binding_samples: &[Point],
    threshold: f64,
) -> Result<InverseConstant, BourgeoisError> {
    let mut best = f64::NEG_INFINITY;
    for k in 0..=10 {
        let c = f64::from(1u32 << k);
        let report = inverse_check(rep, c, samples, binding_samples, threshold)?;
        if report.pass {
            let confirm = inverse_check(rep, 2.0 * c, samples, binding_samples, threshold)?;
            return Ok(InverseConstant { c, report, confirm });
        }
        best = best.max(report.min_margin.unwrap_or(f64::NEG_INFINITY));
    }
    Err(BourgeoisError::NoInverseConstant { max: 1024.0, best })
}

/// The segment (1 − s)α₋[f₀] + sα₋[f₁] between two admissible profiles stays
/// contact (reversed orientation) at each s.
pub fn convexity_check(
    first: &RepresentationData,
    second: &RepresentationData,
    c: f64,
    s_values: &[f64],
    samples: &[Point],
    threshold: f64,
) -> Result<CheckReport, BourgeoisError> {
    let a = inverse_form(first, c)?;
    let b = inverse_form(second, c)?;
    let mut margin = f64::INFINITY;
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for &s in s_values {
        let alpha = a.alpha().scale(1.0 - s).add(&b.alpha().scale(s))?;
        let cf = ContactFormData::new(alpha, first.manifold().clone())?.reversed();
        let r = verify_contact(&cf, samples, threshold);
        let m = r.min_margin.unwrap_or(f64::NAN);
        margin = nan_min(margin, m);
        rows.push(vec![s, m]);
        failures.extend(r.failures);
    }
    Ok(CheckReport::builder(
        format!("inverse-convexity/{}-{}", first.f.name(), second.f.name()),
        "(1-s) alpha_-[f0] + s alpha_-[f1] contact for all s",
    )
    .samples(samples.len() * s_values.len())
    .margin(margin, threshold)
    .sweep(Sweep { columns: vec!["s".into(), "min_volume".into()], rows })
    .fail_all(failures)
    .finish())
}

/// Φ_τ(p; φ₁, φ₂) = (p; φ₁ − τC f_y, φ₂ − τC f_x) on ℝ^{m+2}, with analytic Jacobian.
pub fn isotopy_map(f: &DefiningFunction, c: f64, tau: f64) -> SmoothMap {
    let m = f.dim();
    let (f1, f2) = (f.clone(), f.clone());
    SmoothMap::new(m + 2, m + 2, move |p| {
        let (x, y) = f1.value(&p[..m]);
        let mut out = p.to_vec();
        out[m] -= tau * c * y;
        out[m + 1] -= tau * c * x;
        out
    })
    .with_jacobian(move |p| {
        let (gx, gy) = f2.gradient(&p[..m]);
        let mut j = DMatrix::identity(m + 2, m + 2);
        for k in 0..m {
            j[(m, k)] = -tau * c * gy[k];
            j[(m + 1, k)] = -tau * c * gx[k];
        }
        j
    })
}

/// (p; φ₁, φ₂) ↦ (p; φ₁, −φ₂).
pub fn angle_flip(m: usize) -> SmoothMap {
    SmoothMap::new(m + 2, m + 2, move |p| {
        let mut out = p.to_vec();
        out[m + 1] = -out[m + 1];
        out
    })
    .with_jacobian(move |_| {
        let mut j = DMatrix::identity(m + 2, m + 2);
        j[(m + 1, m + 1)] = -1.0;
        j
    })
}

/// Along α_τ = α₀ − τC(f_x df_y − f_y df_x), where α₀ is the Bourgeois form of `rep`:
/// (i) α_τ is contact on V×T², (ii) Φ_τ*α₀ = α_τ on tangent bases, (iii) the top power
/// is unchanged. At τ = 1 the flip of φ₂ turns Φ₁*α₀ into the Bourgeois form of
/// (α₋, f̄), which is contact for the reversed orientation.
pub fn isotopy_check(
    rep: &RepresentationData,
    c: f64,
    taus: &[f64],
    samples: &[Point],
    threshold: f64,
) -> Result<CheckReport, BourgeoisError> {
    let m = rep.manifold().ambient_dim();
    let start = bourgeois_form(rep)?;
    let total = start.total().clone();
    let ang = rep.f.angular().lift(m + 2);
    let mut rows = Vec::new();
    let mut margin = f64::INFINITY;
    let mut residual: f64 = 0.0;
    let mut failures = Vec::new();
    for &tau in taus {
        let alpha_tau = start.alpha().sub(&ang.scale(tau * c))?;
        let cf = ContactFormData::new(alpha_tau.clone(), total.clone())?;
        let pulled = start.alpha().pullback(&isotopy_map(&rep.f, c, tau))?;
        let t = tally(samples, |p| {
            let b = total.tangent_basis(p).map_err(|e| e.to_string())?;
            let vol = cf.volume_on(p, &b.vectors).map_err(|e| e.to_string())?;
            let vol0 = start.contact.volume_on(p, &b.vectors).map_err(|e| e.to_string())?;
            let x = pulled.restrict(p, &b.vectors).map_err(|e| e.to_string())?;
            let y = alpha_tau.restrict(p, &b.vectors).map_err(|e| e.to_string())?;
            let pull_gap = x.sub(&y).map_err(|e| e.to_string())?.max_abs();
            Ok((vol, pull_gap.max((vol - vol0).abs() / vol0.abs())))
        });
        margin = nan_min(margin, t.min_margin);
        residual = nan_max(residual, t.max_residual);
        rows.push(vec![tau, t.min_margin, t.max_residual]);
        failures.extend(t.errors.into_failures(&format!("tau={tau}")));
    }

    // τ = 1 followed by the flip of φ₂
    let minus = inverse_form(rep, c)?.reversed();
    let flipped = RepresentationData::new(minus, rep.f.conj(), rep.binding.clone());
    let target = bourgeois_form(&flipped)?;
    let composed = start.alpha().pullback(&isotopy_map(&rep.f, c, 1.0))?.pullback(&angle_flip(m))?;
    let flip = tally(samples, |p| {
        let a = composed.eval(p).map_err(|e| e.to_string())?;
        let b = target.alpha().eval(p).map_err(|e| e.to_string())?;
        let vol = target.contact.volume_value(p).map_err(|e| e.to_string())?;
        Ok((vol, a.sub(&b).map_err(|e| e.to_string())?.max_abs()))
    });
    if !(flip.max_residual <= FLIP_TOL) {
        failures.push(format!(
            "flipped time-1 form differs from the Bourgeois form of (alpha_-, conj f) by {:.3e}",
            flip.max_residual
        ));
    }
    if !(flip.min_margin > threshold) {
        failures.push(format!(
            "Bourgeois form of (alpha_-, conj f) has reversed-orientation margin {:.3e}",
            flip.min_margin
        ));
    }
    failures.extend(flip.errors.into_failures("flip"));

    Ok(CheckReport::builder(
        format!("isotopy/{}/C={c}", rep.f.name()),
        "Phi_tau^* alpha_0 = alpha_tau, (p; phi1, phi2) -> (p; phi1 - tau C f_y, phi2 - tau C f_x)",
    )
    .samples(samples.len() * (taus.len() + 1))
    .margin(margin, threshold)
    .residual(residual, ISOTOPY_TOL)
    .note(format!("flip: max coefficient gap {:.3e}, reversed margin {:.6e}", flip.max_residual, flip.min_margin))
    .sweep(Sweep { columns: vec!["tau".into(), "min_volume".into(), "max_gap".into()], rows })
    .fail_all(failures)
    .finish())
}

/// Data for the weak-filling polynomial P_ε(T) = α_ε∧(T dα_ε + ω + dφ₁∧dφ₂)^{n+1} on V×T².
#[derive(Clone, Debug)]
pub struct FillingPolyData {
    pub base: RepresentationData,
    /// Symplectic form of the filling, as a 2-form on V's ambient space.
    pub omega: KForm,
    pub t_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
}

/// {0} ∪ {10^k : k = −2..2} ∪ {0, 0.25, …, 10}, sorted.
pub fn default_t_grid() -> Vec<f64> {
    let mut t: Vec<f64> = (0..=40).map(|k| 0.25 * k as f64).collect();
    t.extend((-2..=2).map(|k| 10f64.powi(k)));
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Pointwise evaluation shared by the filling checks.
struct FillingPoint {
    /// P_ε(T) for every (ε, T), ε-major.
    values: Vec<f64>,
    /// |P₀(T) − (n+1)α∧(T dα + ω)ⁿ∧vol| relative.
    p0_gap: f64,
    /// ε > 0: α_ε∧(dα_ε)^{n+1}/ε²; ε = 0: (n+1)α∧(dα)ⁿ∧vol.
    leading: Vec<f64>,
}

fn filling_at(fp: &FillingPolyData, total: &Submanifold, p: &[f64]) -> Result<FillingPoint, BourgeoisError> {
    let m = fp.base.manifold().ambient_dim();
    let n = fp.base.n();
    let big = m + 2;
    let q = &p[..m];
    let basis = total.tangent_basis(p)?.vectors;
    let restrict = |a: AltForm| a.lift(big).pullback_columns(&basis);
    let a_v = restrict(fp.base.contact.alpha().eval(q)?)?;
    let da_v = restrict(fp.base.contact.dalpha().eval(q)?)?;
    let omega = restrict(fp.omega.eval(q)?)?;
    let (x, y) = fp.base.f.value(q);
    let (gx, gy) = fp.base.f.gradient(q);
    let mut beta = AltForm::zero(big, 1);
    beta.coeffs_mut()[m] = x;
    beta.coeffs_mut()[m + 1] = -y;
    let beta = beta.pullback_columns(&basis)?;
    let dphi1 = AltForm::basis(big, m);
    let dphi2 = AltForm::basis(big, m + 1);
    let dfx = AltForm::from_coeffs(m, 1, gx)?.lift(big);
    let dfy = AltForm::from_coeffs(m, 1, gy)?.lift(big);
    let dbeta = dfx.wedge(&dphi1)?.sub(&dfy.wedge(&dphi2)?)?.pullback_columns(&basis)?;
    let vol = dphi1.wedge(&dphi2)?.pullback_columns(&basis)?;

    let mut values = Vec::with_capacity(fp.eps_grid.len() * fp.t_grid.len());
    let mut leading = Vec::with_capacity(fp.eps_grid.len());
    let mut p0_gap: f64 = 0.0;
    for &eps in &fp.eps_grid {
        let mut a = a_v.clone();
        a.axpy(eps, &beta)?;
        let mut da = da_v.clone();
        da.axpy(eps, &dbeta)?;
        for &t in &fp.t_grid {
            let mut inner = da.scale(t);
            inner.axpy(1.0, &omega)?;
            inner.axpy(1.0, &vol)?;
            let value = top_value(&[&a, &inner.power(n + 1)?])?;
            if eps == 0.0 {
                let mut w = da.scale(t);
                w.axpy(1.0, &omega)?;
                let reduced = (n as f64 + 1.0) * top_value(&[&a, &w.power(n)?, &vol])?;
                p0_gap = nan_max(p0_gap, (value - reduced).abs() / value.abs());
            }
            values.push(value);
        }
        let lead = if eps == 0.0 {
            (n as f64 + 1.0) * top_value(&[&a, &da.power(n)?, &vol])?
        } else {
            top_value(&[&a, &da.power(n + 1)?])? / (eps * eps)
        };
        leading.push(lead);
    }
    Ok(FillingPoint { values, p0_gap, leading })
}

/// P_ε(T) > 0 on every grid pair, P₀(T) agrees with its reduced form, and the
/// leading coefficients in T (degree n for ε = 0, n + 1 for ε > 0) are positive.
/// The sweep lists min over samples of P_ε(T) per grid pair.
pub fn filling_polynomial(fp: &FillingPolyData, samples: &[Point], threshold: f64) -> CheckReport {
    let total = fp.base.manifold().times_torus();
    let cells = fp.eps_grid.len() * fp.t_grid.len();
    let per_point: Vec<Result<FillingPoint, String>> =
        samples.par_iter().map(|p| filling_at(fp, &total, p).map_err(|e| e.to_string())).collect();
    let mut min_values = vec![f64::INFINITY; cells];
    let mut min_leading = vec![f64::INFINITY; fp.eps_grid.len()];
    let mut p0_gap: f64 = 0.0;
    let mut errors = Vec::new();
    for r in per_point {
        match r {
            Ok(fpnt) => {
                for (acc, v) in min_values.iter_mut().zip(&fpnt.values) {
                    *acc = nan_min(*acc, *v);
                }
                for (acc, v) in min_leading.iter_mut().zip(&fpnt.leading) {
                    *acc = nan_min(*acc, *v);
                }
                p0_gap = nan_max(p0_gap, fpnt.p0_gap);
            }
            Err(e) => errors.push(e),
        }
    }
    let min_p = min_values.iter().copied().fold(f64::INFINITY, nan_min);
    let min_lead = min_leading.iter().copied().fold(f64::INFINITY, nan_min);
    let mut rows = Vec::with_capacity(cells);
    for (i, &eps) in fp.eps_grid.iter().enumerate() {
        for (j, &t) in fp.t_grid.iter().enumerate() {
            rows.push(vec![eps, t, min_values[i * fp.t_grid.len() + j]]);
        }
    }
    let mut b = CheckReport::builder(
        format!("filling-polynomial/{}", fp.base.f.name()),
        "P_eps(T) = alpha_eps^(T d alpha_eps + omega + dphi1^dphi2)^(n+1) > 0",
    )
    .samples(samples.len())
    .margin(nan_min(min_p, min_lead), threshold)
    .residual(p0_gap, EXPANSION_TOL)
    .note(format!("min P over grid {min_p:.6e}"))
    .sweep(Sweep { columns: vec!["eps".into(), "T".into(), "min_margin".into()], rows });
    for (eps, lead) in fp.eps_grid.iter().zip(&min_leading) {
        b = b.note(if *eps == 0.0 {
            format!("eps=0: T^n coefficient (n+1) alpha^(d alpha)^n^vol min {lead:.6e}")
        } else {
            format!("eps={eps}: T^(n+1) coefficient / eps^2 min {lead:.6e}")
        });
    }
    if !errors.is_empty() {
        b = b.fail(format!("evaluation: {} sample(s) failed", errors.len()));
        b = b.fail_all(errors.into_iter().take(3));
    }
    b.finish()
}
