//! Ideal completions of classical Liouville domains, the hypersurface with
//! trivial monodromy built from a page, Lyapunov checks for Weinstein
//! structures, and the coordinate change behind the subcritical filling.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;
use thiserror::Error;

use crate::contact::{
    binding_submanifold, verify_adapted, verify_contact, verify_representation, ContactError, ContactFormData,
    DefiningFunction, RepresentationData,
};
use crate::forms::{AltForm, DiffScheme, FormError, KForm, Point, SmoothMap, VecField};
use crate::linalg;
use crate::manifolds::{random_unit_vector, sample_rng, ManifoldError, Submanifold};
use crate::monodromy::{return_check, spinning_field_check, FlowOptions, SpinningFieldData};
use crate::report::{nan_max, nan_min, tally, CheckReport};
use crate::standard::{canonical_form, sphere_cotangent_bundle, standard_alpha, standard_symplectic};

/// Agreement required of the page-volume and contraction identities.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Smallest |du| accepted at boundary samples.
pub const BOUNDARY_REGULARITY: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum LiouvilleError {
    #[error("point lies on or outside the boundary (u = {0:e})")]
    NotInterior(f64),
    #[error("Liouville field is not transverse to the hypersurface: min u - du(X) = {0:e}")]
    Transversality(f64),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Form(#[from] FormError),
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type DrawFn = dyn Fn(&mut rand_chacha::ChaCha8Rng, f64) -> Vec<f64> + Send + Sync;

/// A classical Liouville domain F = {u ≥ 0} inside an ambient manifold, with the
/// completion function u. The boundary is the unit sphere of the coordinate block
/// `radial` (‖z‖ = 1 for disks, ‖p‖ = 1 for disk bundles).
#[derive(Clone)]
pub struct LiouvilleDomainData {
    name: String,
    ambient: Submanifold,
    lambda: KForm,
    dlambda: KForm,
    liouville: VecField,
    u: Arc<ScalarFn>,
    du: Arc<GradFn>,
    radial: Range<usize>,
    draw: Arc<DrawFn>,
}

impl fmt::Debug for LiouvilleDomainData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LiouvilleDomainData({} in {:?})", self.name, self.ambient)
    }
}

impl LiouvilleDomainData {
    /// Closed unit disk in ℂⁿ with λ₀ and u = 1 − ‖z‖⁴.
    pub fn disk(n: usize) -> Self {
        let m = 2 * n;
        Self {
            name: format!("D^{m}"),
            ambient: Submanifold::euclidean(format!("R^{m}"), m),
            lambda: standard_alpha(n),
            dlambda: standard_symplectic(n),
            liouville: VecField::new(m, |p| p.iter().map(|x| 0.5 * x).collect()),
            u: Arc::new(|p| 1.0 - linalg::dot(p, p).powi(2)),
            du: Arc::new(|p| {
                let s = linalg::dot(p, p);
                p.iter().map(|x| -4.0 * s * x).collect()
            }),
            radial: 0..m,
            draw: Arc::new(move |rng, r| random_unit_vector(rng, m).into_iter().map(|x| r * x).collect()),
        }
    }

    /// Closed unit disk bundle of T*S^{n−1} ⊂ ℝⁿ×ℝⁿ with λ_can = −Σp dq and u = 1 − ‖p‖².
    pub fn disk_bundle(n: usize) -> Self {
        // orient the bundle by (dλ_can)^{n−1} at a reference point
        let bundle = sphere_cotangent_bundle(n);
        let mut reference = vec![0.0; 2 * n];
        reference[0] = 1.0;
        let basis = bundle.tangent_basis(&reference).expect("regular point").vectors;
        let top =
            cotangent_symplectic(n).restrict(&reference, &basis).and_then(|w| w.power(n - 1)).expect("2-form").top();
        let ambient = if top > 0.0 { bundle } else { bundle.reversed() };
        Self {
            name: format!("D(T*S^{})", n - 1),
            ambient,
            lambda: canonical_form(n),
            dlambda: cotangent_symplectic(n),
            liouville: VecField::new(2 * n, move |x| {
                let mut v = vec![0.0; 2 * n];
                v[n..].copy_from_slice(&x[n..]);
                v
            }),
            u: Arc::new(move |x| 1.0 - linalg::dot(&x[n..], &x[n..])),
            du: Arc::new(move |x| {
                let mut g = vec![0.0; 2 * n];
                for j in 0..n {
                    g[n + j] = -2.0 * x[n + j];
                }
                g
            }),
            radial: n..2 * n,
            draw: Arc::new(move |rng, r| {
                let q = random_unit_vector(rng, n);
                let mut p = random_unit_vector(rng, n);
                let d = linalg::dot(&q, &p);
                linalg::axpy(&mut p, -d, &q);
                let s = r / linalg::norm(&p);
                q.into_iter().chain(p.into_iter().map(|x| s * x)).collect()
            }),
        }
    }

    /// Same domain with another completion function.
    pub fn with_completion(
        mut self,
        name: impl Into<String>,
        u: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        du: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.name = name.into();
        self.u = Arc::new(u);
        self.du = Arc::new(du);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient(&self) -> &Submanifold {
        &self.ambient
    }

    pub fn lambda(&self) -> &KForm {
        &self.lambda
    }

    pub fn dlambda(&self) -> &KForm {
        &self.dlambda
    }

    pub fn liouville(&self) -> &VecField {
        &self.liouville
    }

    /// Half the dimension of F.
    pub fn n(&self) -> usize {
        self.ambient.dim() / 2
    }

    pub fn u(&self, p: &[f64]) -> f64 {
        (self.u)(p)
    }

    pub fn du(&self, p: &[f64]) -> Vec<f64> {
        (self.du)(p)
    }

    /// du(X_λ) at p.
    pub fn du_liouville(&self, p: &[f64]) -> Result<f64, FormError> {
        Ok(linalg::dot(&self.du(p), &self.liouville.eval(p)?))
    }

    /// Radius of p in the boundary block.
    pub fn radius(&self, p: &[f64]) -> f64 {
        linalg::norm(&p[self.radial.clone()])
    }

    /// Interior samples with radii up to `max_radius`, uniform in volume along the block.
    pub fn sample_interior(&self, count: usize, seed: u64, max_radius: f64) -> Vec<Point> {
        let k = self.radial.len() as f64;
        (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(seed, i);
                let r = max_radius * rng.random::<f64>().powf(1.0 / k);
                Point::new((self.draw)(&mut rng, r))
            })
            .collect()
    }

    pub fn sample_boundary(&self, count: usize, seed: u64) -> Vec<Point> {
        (0..count as u64).into_par_iter().map(|i| Point::new((self.draw)(&mut sample_rng(seed, i), 1.0))).collect()
    }
}

/// Σ dq_j∧dp_j on ℝⁿ×ℝⁿ, the exterior derivative of −Σp dq.
pub fn cotangent_symplectic(n: usize) -> KForm {
    let mut w = AltForm::zero(2 * n, 2);
    for j in 0..n {
        w.axpy(1.0, &AltForm::monomial(2 * n, &[j, n + j])).expect("same shape");
    }
    KForm::constant(w)
}

/// Completion conditions: du(X_λ) < u inside, du(X_λ) < 0 and du ≠ 0 on the
/// boundary, and ω = d(λ_c/u) nondegenerate through
/// ι_Xωⁿ = u⁻ⁿ(1 − X(ln u))·ι_Xω_cⁿ. Also checks ι_X dλ_c = λ_c.
pub fn completion_check(
    ld: &LiouvilleDomainData,
    interior: &[Point],
    boundary: &[Point],
    threshold: f64,
) -> CheckReport {
    let n = ld.n();
    let inside = tally(interior, |p| {
        let e = |e: FormError| e.to_string();
        let u = ld.u(p);
        if !(u > 0.0) {
            return Err(format!("interior sample with u = {u:e}"));
        }
        let x = ld.liouville.eval(p).map_err(e)?;
        let dux = linalg::dot(&ld.du(p), &x);
        let basis = ld.ambient.tangent_basis(p).map_err(|e| e.to_string())?.vectors;
        let lam = ld.lambda.eval(p).map_err(e)?;
        let dlam = ld.dlambda.eval(p).map_err(e)?;
        let du = AltForm::from_coeffs(p.len(), 1, ld.du(p)).map_err(e)?;
        // Liouville relation
        let liouville_gap =
            dlam.interior(&x).and_then(|a| a.sub(&lam)).and_then(|a| a.pullback_columns(&basis)).map_err(e)?.max_abs();
        // ω = dλ_c/u − du∧λ_c/u²
        let mut omega = dlam.scale(1.0 / u);
        omega.axpy(-1.0 / (u * u), &du.wedge(&lam).map_err(e)?).map_err(e)?;
        let omega_n = omega.power(n).map_err(e)?;
        let base_n = dlam.power(n).map_err(e)?;
        let lhs = omega_n.interior(&x).and_then(|a| a.pullback_columns(&basis)).map_err(e)?;
        let factor = u.powi(-(n as i32)) * (1.0 - dux / u);
        let rhs = base_n.interior(&x).and_then(|a| a.pullback_columns(&basis)).map_err(e)?.scale(factor);
        let scale = lhs.max_abs().max(rhs.max_abs());
        let contraction_gap = if scale > 0.0 { lhs.sub(&rhs).map_err(e)?.max_abs() / scale } else { 0.0 };
        let top = omega_n.pullback_columns(&basis).map_err(e)?.top();
        let base_top = base_n.pullback_columns(&basis).map_err(e)?.top();
        if !(base_top.abs() > 1e-12) {
            return Err(format!("d lambda_c degenerate at {:?}", p.coords()));
        }
        // u − du(X) and the normalized volume uⁿ ωⁿ/ω_cⁿ = 1 − X(ln u)
        let margin = (u - dux).min(u.powi(n as i32) * top / base_top);
        Ok((margin, nan_max(liouville_gap, contraction_gap)))
    });
    let edge = tally(boundary, |p| {
        let u = ld.u(p);
        let g = linalg::norm(&ld.du(p));
        if u.abs() > 1e-12 {
            return Err(format!("boundary sample with u = {u:e}"));
        }
        if !(g >= BOUNDARY_REGULARITY) {
            return Err(format!("|du| = {g:e} on the boundary at {:?}", p.coords()));
        }
        Ok((-ld.du_liouville(p).map_err(|e| e.to_string())?, 0.0))
    });
    CheckReport::builder(
        format!("completion/{}", ld.name()),
        "du(X) < u on F, du(X) < 0 on dF; i_X omega^n = u^-n (1 - X ln u) i_X omega_c^n",
    )
    .samples(interior.len() + boundary.len())
    .margin(nan_min(inside.min_margin, edge.min_margin), threshold)
    .residual(inside.max_residual, IDENTITY_TOL)
    .note(format!("interior margin {:.6e}, boundary margin {:.6e}", inside.min_margin, edge.min_margin))
    .fail_all(inside.errors.into_failures("interior"))
    .fail_all(edge.errors.into_failures("boundary"))
    .finish()
}

/// The two ideal Liouville domains obtained by completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdealExample {
    /// Unit disk in ℂⁿ with u = 1 − ‖z‖⁴.
    Disk(usize),
    /// Unit disk bundle of T*S^{n−1} with u = 1 − ‖p‖².
    DiskBundle(usize),
}

impl IdealExample {
    pub fn domain(&self) -> LiouvilleDomainData {
        match *self {
            IdealExample::Disk(n) => LiouvilleDomainData::disk(n),
            IdealExample::DiskBundle(n) => LiouvilleDomainData::disk_bundle(n),
        }
    }

    /// z ↦ z/√(1 − ‖z‖⁴), resp. (q, p) ↦ (q, p/(1 − ‖p‖²)), with analytic Jacobians.
    pub fn interior_map(&self) -> SmoothMap {
        match *self {
            IdealExample::Disk(n) => {
                let m = 2 * n;
                SmoothMap::new(m, m, |z| {
                    let s = (1.0 - linalg::dot(z, z).powi(2)).powf(-0.5);
                    z.iter().map(|x| s * x).collect()
                })
                .with_jacobian(move |z| {
                    let t = linalg::dot(z, z);
                    let w = 1.0 - t * t;
                    let (s, ds) = (w.powf(-0.5), 2.0 * t * w.powf(-1.5));
                    DMatrix::from_fn(m, m, |i, j| (if i == j { s } else { 0.0 }) + z[i] * z[j] * ds)
                })
            }
            IdealExample::DiskBundle(n) => SmoothMap::new(2 * n, 2 * n, move |x| {
                let s = 1.0 / (1.0 - linalg::dot(&x[n..], &x[n..]));
                x[..n].iter().copied().chain(x[n..].iter().map(|v| s * v)).collect()
            })
            .with_jacobian(move |x| {
                let s = 1.0 / (1.0 - linalg::dot(&x[n..], &x[n..]));
                DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
                    (true, true) => {
                        if i == j {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    (false, false) => (if i == j { s } else { 0.0 }) + 2.0 * s * s * x[i] * x[j],
                    _ => 0.0,
                })
            }),
        }
    }

    /// Liouville form of the target: λ₀ on ℂⁿ, −Σp dq on T*S^{n−1}.
    pub fn target_form(&self) -> KForm {
        match *self {
            IdealExample::Disk(n) => standard_alpha(n),
            IdealExample::DiskBundle(n) => canonical_form(n),
        }
    }
}

/// Image of an interior point under the identification with ℂⁿ resp. T*S^{n−1}.
pub fn interior_identification(example: IdealExample, p: &[f64]) -> Result<Vec<f64>, LiouvilleError> {
    let u = example.domain().u(p);
    if !(u > 0.0) {
        return Err(LiouvilleError::NotInterior(u));
    }
    Ok(example.interior_map().eval(p)?)
}

/// Pullback of the target Liouville form equals λ_c/u on interior tangent spaces.
pub fn identification_check(example: IdealExample, samples: &[Point]) -> CheckReport {
    let ld = example.domain();
    let map = example.interior_map();
    let pulled = example.target_form().pullback(&map);
    let t = tally(samples, |p| {
        let e = |e: FormError| e.to_string();
        let pulled = pulled.as_ref().map_err(|e| e.to_string())?;
        let basis = ld.ambient.tangent_basis(p).map_err(|e| e.to_string())?.vectors;
        let lhs = pulled.restrict(p, &basis).map_err(e)?;
        let rhs = ld.lambda.restrict(p, &basis).map_err(e)?.scale(1.0 / ld.u(p));
        Ok((f64::INFINITY, lhs.sub(&rhs).map_err(e)?.max_abs()))
    });
    CheckReport::builder(
        format!("identification/{}", ld.name()),
        "interior map pulls the target Liouville form back to lambda_c/u",
    )
    .samples(samples.len())
    .residual(t.max_residual, IDENTITY_TOL)
    .fail_all(t.errors.into_failures("pullback"))
    .finish()
}

/// r^{n+2}[d(β/r)]ⁿ against ½(2u − du(X_L))(dβ)ⁿ with r = √u, d taken by
/// Richardson differences. Margin is the smallest normalized right-hand side
/// u − ½du(X_L).
pub fn page_volume_identity(ld: &LiouvilleDomainData, samples: &[Point], threshold: f64) -> CheckReport {
    let n = ld.n();
    let u = ld.u.clone();
    let scaled = ld.lambda.mul_fn(move |p| 1.0 / u(p).sqrt());
    let d_scaled = scaled.ext_deriv(DiffScheme::Richardson { h: 1e-4 });
    let t = tally(samples, |p| {
        let e = |e: FormError| e.to_string();
        let d_scaled = d_scaled.as_ref().map_err(|e| e.to_string())?;
        let basis = ld.ambient.tangent_basis(p).map_err(|e| e.to_string())?.vectors;
        let u = ld.u(p);
        let lhs =
            u.powf((n as f64 + 2.0) / 2.0) * d_scaled.restrict(p, &basis).and_then(|w| w.power(n)).map_err(e)?.top();
        let base = ld.dlambda.restrict(p, &basis).and_then(|w| w.power(n)).map_err(e)?.top();
        let dux = ld.du_liouville(p).map_err(e)?;
        let rhs = 0.5 * (2.0 * u - dux) * base;
        Ok((rhs / base, (lhs - rhs).abs() / rhs.abs()))
    });
    CheckReport::builder(
        format!("page-volume/{}", ld.name()),
        "r^(n+2) [d(beta/r)]^n = (1/2)(2u - du(X_L)) (d beta)^n > 0",
    )
    .samples(samples.len())
    .margin(t.min_margin, threshold)
    .residual(t.max_residual, IDENTITY_TOL)
    .fail_all(t.errors.into_failures("evaluation"))
    .finish()
}

/// Collar reparametrization: depth d below the boundary goes to w·h(d/w) for
/// d < w, with h(t) = t² + 3t³ − 5t⁴ + 2t⁵ (h ~ t² at 0, C² join to the identity at 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarProfile {
    pub width: f64,
}

impl Default for CollarProfile {
    fn default() -> Self {
        Self { width: 0.2 }
    }
}

impl CollarProfile {
    pub fn value(&self, depth: f64) -> f64 {
        if depth >= self.width {
            return depth;
        }
        let t = depth.max(0.0) / self.width;
        self.width * t * t * (1.0 + t * (3.0 + t * (-5.0 + 2.0 * t)))
    }

    pub fn slope(&self, depth: f64) -> f64 {
        if depth >= self.width {
            return 1.0;
        }
        let t = depth.max(0.0) / self.width;
        t * (2.0 + t * (9.0 + t * (-20.0 + 10.0 * t)))
    }
}

/// The hypersurface V = {u(p) = |z|²} ⊂ F×ℂ with α = λ_c + ½(x dy − y dx) and f = z.
#[derive(Clone, Debug)]
pub struct TrivialMonodromyData {
    pub domain: LiouvilleDomainData,
    pub rep: RepresentationData,
    /// λ_c pulled up to F×ℂ; a binding form for (α, z).
    pub binding_form: KForm,
    /// Smallest u − du(X_L) over the certification samples.
    pub transversality_margin: f64,
}

/// Build V and certify transversality of the Liouville field at interior samples
/// of F (lifted to V) and at the boundary.
pub fn hypersurface_build(
    ld: &LiouvilleDomainData,
    certify: &[Point],
    threshold: f64,
) -> Result<TrivialMonodromyData, LiouvilleError> {
    let m = ld.ambient.ambient_dim();
    let k = ld.ambient.n_constraints();
    // normal −∇(u − |z|²) points out of {|z|² ≤ u}, along the Liouville field
    let (amb, u) = (ld.ambient.clone(), ld.u.clone());
    let (amb2, du2) = (ld.ambient.clone(), ld.du.clone());
    let draw = ld.draw.clone();
    let (u3, kr) = (ld.u.clone(), ld.radial.len() as f64);
    let v = Submanifold::new(format!("V({})", ld.name()), m + 2, k + 1, move |p| {
        let mut c = amb.constraints(&p[..m]);
        c.push(p[m] * p[m] + p[m + 1] * p[m + 1] - u(&p[..m]));
        c
    })
    .with_gradients(move |p| {
        let mut g: Vec<Vec<f64>> = amb2
            .gradients(&p[..m])
            .into_iter()
            .map(|mut row| {
                row.extend([0.0, 0.0]);
                row
            })
            .collect();
        let mut last: Vec<f64> = du2(&p[..m]).into_iter().map(|x| -x).collect();
        last.extend([2.0 * p[m], 2.0 * p[m + 1]]);
        g.push(last);
        g
    })
    .with_sampler(move |rng| {
        let r = rng.random::<f64>().powf(1.0 / kr);
        let mut p = draw(rng, r);
        let (s, th) = (u3(&p).max(0.0).sqrt(), rng.random::<f64>() * TAU);
        p.extend([s * th.cos(), s * th.sin()]);
        p
    })
    .with_orientation(ld.ambient.orientation());

    let beta = ld.lambda.lift(m + 2);
    let disk = KForm::one_form(m + 2, move |p| {
        let mut c = vec![0.0; m + 2];
        c[m] = -0.5 * p[m + 1];
        c[m + 1] = 0.5 * p[m];
        c
    });
    let alpha = beta.add(&disk)?;
    let contact = ContactFormData::new(alpha, v.clone())?;
    let f = DefiningFunction::new("z", m + 2, move |p| (p[m], p[m + 1])).with_gradient(move |_| {
        let (mut gx, mut gy) = (vec![0.0; m + 2], vec![0.0; m + 2]);
        gx[m] = 1.0;
        gy[m + 1] = 1.0;
        (gx, gy)
    });
    let draw = ld.draw.clone();
    let binding = binding_submanifold(&v, &f, format!("dF({})", ld.name())).with_sampler(move |rng| {
        let mut p = draw(rng, 1.0);
        p.extend([0.0, 0.0]);
        p
    });

    let margins: Vec<Result<f64, String>> = certify
        .par_iter()
        .map(|p| {
            let x = &p[..m];
            ld.du_liouville(x).map(|dux| ld.u(x) - dux).map_err(|e| e.to_string())
        })
        .collect();
    let mut margin = f64::INFINITY;
    for r in margins {
        margin = nan_min(margin, r.map_err(|_| LiouvilleError::Transversality(f64::NAN))?);
    }
    if !(margin > threshold) {
        return Err(LiouvilleError::Transversality(margin));
    }
    Ok(TrivialMonodromyData {
        domain: ld.clone(),
        rep: RepresentationData::new(contact, f, binding),
        binding_form: beta,
        transversality_margin: margin,
    })
}

/// 2π(x∂y − y∂x) on F×ℂ.
pub fn disk_rotation(p: &[f64]) -> Vec<f64> {
    let m = p.len() - 2;
    let mut v = vec![0.0; p.len()];
    v[m] = -TAU * p[m + 1];
    v[m + 1] = TAU * p[m];
    v
}

/// Contact, representation, adaptedness, the binding-form spinning field 2π∂ϑ and
/// its time-1 return, all on V.
pub fn trivial_monodromy_reports(
    td: &TrivialMonodromyData,
    samples: usize,
    seed: u64,
    threshold: f64,
) -> Vec<CheckReport> {
    let v = td.rep.manifold();
    let mut out = Vec::new();
    let off = match v.sample(samples, seed) {
        Ok(s) => s,
        Err(e) => return vec![CheckReport::builder("hypersurface", "sampling V").fail(e.to_string()).finish()],
    };
    let bind = match td.rep.binding.sample((samples / 10).max(10), seed.wrapping_add(1)) {
        Ok(s) => s,
        Err(e) => {
            return vec![CheckReport::builder("hypersurface", "sampling the binding").fail(e.to_string()).finish()]
        }
    };
    out.push(verify_contact(&td.rep.contact, &off, threshold));
    out.push(verify_representation(&td.rep, &off, &bind, threshold));
    out.push(match verify_adapted(&td.rep.contact, &td.rep.f, &bind, &off, threshold) {
        Ok(r) => r,
        Err(e) => CheckReport::builder("adapted/z", "adapted open book").fail(e.to_string()).finish(),
    });
    match SpinningFieldData::with_binding_form(&td.rep, td.binding_form.clone()) {
        Ok(field) => {
            out.push(spinning_field_check(&field, &off, Some(&disk_rotation), 1e-7));
            let starts: Vec<Point> = off.iter().filter(|p| td.rep.f.modulus(p) > 0.05).take(10).cloned().collect();
            out.push(return_check(&field, &starts, FlowOptions::default(), 1e-7));
        }
        Err(e) => out.push(CheckReport::builder("spinning-field/z", "binding form").fail(e.to_string()).finish()),
    }
    out
}

/// Page embedding p ↦ (φ(p), ũ(p)e^{iϑ}) with ũ = √(u∘φ), where φ rescales the
/// boundary block radially by the collar profile.
pub fn page_embedding(ld: &LiouvilleDomainData, collar: CollarProfile, theta: f64) -> SmoothMap {
    let m = ld.ambient.ambient_dim();
    let (u, radial) = (ld.u.clone(), ld.radial.clone());
    SmoothMap::new(m, m + 2, move |p| {
        let mut out = collar_point(p, &radial, collar);
        let s = u(&out).max(0.0).sqrt();
        out.extend([s * theta.cos(), s * theta.sin()]);
        out
    })
    .with_scheme(DiffScheme::Richardson { h: 1e-4 })
}

fn collar_point(p: &[f64], radial: &Range<usize>, collar: CollarProfile) -> Vec<f64> {
    let r = linalg::norm(&p[radial.clone()]);
    let mut out = p.to_vec();
    if r > 0.0 {
        let s = (1.0 - collar.value(1.0 - r)) / r;
        out[radial.clone()].iter_mut().for_each(|x| *x *= s);
    }
    out
}

/// The collar-corrected page embedding lands on V, has a finite nonzero radial
/// derivative of ũ at the boundary, and pulls α/|z| back to φ*β/ũ.
pub fn page_embedding_check(td: &TrivialMonodromyData, collar: CollarProfile, samples: &[Point]) -> CheckReport {
    let ld = &td.domain;
    let m = ld.ambient.ambient_dim();
    let theta = 0.7;
    let map = page_embedding(ld, collar, theta);
    let radial = ld.radial.clone();
    let phi = {
        let radial = radial.clone();
        SmoothMap::new(m, m, move |p| collar_point(p, &radial, collar)).with_scheme(DiffScheme::Richardson { h: 1e-4 })
    };
    let alpha_over_z = {
        let f = td.rep.f.clone();
        td.rep.contact.alpha().mul_fn(move |p| 1.0 / f.modulus(p))
    };
    let pulled = alpha_over_z.pullback(&map);
    let beta_phi = ld.lambda.pullback(&phi);
    let t = tally(samples, |p| {
        let e = |e: FormError| e.to_string();
        let img = map.eval(p).map_err(e)?;
        let on_v = td.rep.manifold().residual(&img);
        let basis = ld.ambient.tangent_basis(p).map_err(|e| e.to_string())?.vectors;
        let (pulled, beta_phi) =
            (pulled.as_ref().map_err(|e| e.to_string())?, beta_phi.as_ref().map_err(|e| e.to_string())?);
        let s = ld.u(&img[..m]).sqrt();
        let lhs = pulled.restrict(p, &basis).map_err(e)?;
        let rhs = beta_phi.restrict(p, &basis).map_err(e)?.scale(1.0 / s);
        let gap = lhs.sub(&rhs).map_err(e)?.max_abs() / rhs.max_abs().max(1.0);
        Ok((f64::INFINITY, nan_max(on_v * 1e3, gap)))
    });
    // ũ along a ray: slope at the boundary should be finite and nonzero
    let dir = ld.sample_boundary(1, 99)[0].clone().into_coords();
    let scaled = |d: f64| -> Vec<f64> {
        let mut q = dir.clone();
        q[radial.clone()].iter_mut().for_each(|x| *x *= 1.0 - d);
        q
    };
    let tilde = |d: f64| ld.u(&collar_point(&scaled(d), &radial, collar)).max(0.0).sqrt();
    let slopes: Vec<f64> = [1e-3, 1e-4, 1e-5].iter().map(|&d| tilde(d) / d).collect();
    let spread = (slopes[0] - slopes[2]).abs() / slopes[2];
    let naive = ld.u(&scaled(1e-5)).sqrt() / 1e-5;
    let mut b = CheckReport::builder(
        format!("page-embedding/{}", ld.name()),
        "p -> (phi(p), sqrt(u(phi(p))) e^(i theta)) lands on V and pulls alpha/|z| back to phi^*beta / u~",
    )
    .samples(samples.len())
    .residual(t.max_residual, 1e-6)
    .note(format!(
        "u~/depth at depth 1e-3, 1e-4, 1e-5: {:.6}, {:.6}, {:.6}; without the collar sqrt(u)/depth = {naive:.3e} at 1e-5",
        slopes[0], slopes[1], slopes[2]
    ))
    .fail_all(t.errors.into_failures("pullback"));
    if !(spread < 1e-2 && slopes[2] > 0.0) {
        b = b.fail(format!("u~ is not linear in the depth at the boundary (spread {spread:.3e})"));
    }
    b.finish()
}

type LyapunovFn = dyn Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync;

/// Weinstein structure (ω, X, f) on ℝ^m with λ = ι_Xω given for the Liouville relation.
#[derive(Clone)]
pub struct WeinsteinData {
    pub name: String,
    pub omega: KForm,
    pub lambda: KForm,
    pub liouville: VecField,
    lyapunov: Arc<LyapunovFn>,
    pub delta: f64,
}

impl fmt::Debug for WeinsteinData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeinsteinData({}, delta = {})", self.name, self.delta)
    }
}

impl WeinsteinData {
    /// f with its gradient.
    pub fn new(
        name: impl Into<String>,
        omega: KForm,
        lambda: KForm,
        liouville: VecField,
        lyapunov: impl Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync + 'static,
        delta: f64,
    ) -> Self {
        Self { name: name.into(), omega, lambda, liouville, lyapunov: Arc::new(lyapunov), delta }
    }

    /// (ℂ, dx∧dy, ½(x∂x + y∂y), x² + y²); df(X) = f, ‖X‖² + ‖df‖² = 17f/4.
    pub fn complex_plane(delta: f64) -> Self {
        Self::new(
            "C",
            standard_symplectic(1),
            standard_alpha(1),
            VecField::new(2, |p| vec![0.5 * p[0], 0.5 * p[1]]),
            |p| (p[0] * p[0] + p[1] * p[1], vec![2.0 * p[0], 2.0 * p[1]]),
            delta,
        )
    }

    /// (T*T², dq∧dp, p∂p, ‖p‖²) in coordinates (q₁, q₂, p₁, p₂); ratio exactly 2/5.
    pub fn cotangent_torus(delta: f64) -> Self {
        Self::new(
            "T*T^2",
            cotangent_symplectic(2),
            canonical_form(2),
            VecField::new(4, |x| vec![0.0, 0.0, x[2], x[3]]),
            |x| (x[2] * x[2] + x[3] * x[3], vec![0.0, 0.0, 2.0 * x[2], 2.0 * x[3]]),
            delta,
        )
    }

    pub fn lyapunov(&self, p: &[f64]) -> (f64, Vec<f64>) {
        (self.lyapunov)(p)
    }
}

/// df(X) ≥ δ(‖X‖² + ‖df‖²) in the Euclidean metric, and ι_Xω = λ.
/// Margin is the smallest ratio df(X)/(‖X‖² + ‖df‖²), compared against δ.
pub fn weinstein_check(w: &WeinsteinData, samples: &[Point], delta: f64) -> CheckReport {
    let t = tally(samples, |p| {
        let e = |e: FormError| e.to_string();
        let x = w.liouville.eval(p).map_err(e)?;
        let (_, df) = w.lyapunov(p);
        let denom = linalg::dot(&x, &x) + linalg::dot(&df, &df);
        let ratio = if denom > 0.0 { linalg::dot(&df, &x) / denom } else { f64::INFINITY };
        let gap =
            w.omega.eval(p).and_then(|o| o.interior(&x)).and_then(|a| a.sub(&w.lambda.eval(p)?)).map_err(e)?.max_abs();
        Ok((ratio, gap))
    });
    CheckReport::builder(format!("weinstein/{}", w.name), "df(X) >= delta (|X|^2 + |df|^2); i_X omega = lambda")
        .samples(samples.len())
        .margin(t.min_margin, delta)
        .residual(t.max_residual, IDENTITY_TOL)
        .note(format!("delta {delta}"))
        .fail_all(t.errors.into_failures("evaluation"))
        .finish()
}

/// Samples on the annulus lo ≤ ‖p‖ ≤ hi of the last two coordinates, other
/// coordinates uniform angles (for T*T²) or absent (for ℂ).
pub fn annulus_samples(dim: usize, lo: f64, hi: f64, count: usize, seed: u64) -> Vec<Point> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let mut p: Vec<f64> = (0..dim - 2).map(|_| rng.random::<f64>() * TAU).collect();
            let (r, a) = (lo + (hi - lo) * rng.random::<f64>(), rng.random::<f64>() * TAU);
            p.extend([r * a.cos(), r * a.sin()]);
            Point::with_periodic(p, (1u32 << (dim - 2)) - 1)
        })
        .collect()
}

/// (w; x, y; φ₁, φ₂) ↦ (w; q₁, q₂; p₁, p₂) = (w; −φ₁ − y, φ₂ + x; x, y).
pub fn subcritical_coordinates(w_dim: usize, p: &[f64]) -> Vec<f64> {
    let (x, y, a, b) = (p[w_dim], p[w_dim + 1], p[w_dim + 2], p[w_dim + 3]);
    let mut out = p[..w_dim].to_vec();
    out.extend([-a - y, b + x, x, y]);
    out
}

/// The coordinate change as a map with its constant Jacobian.
pub fn subcritical_map(w_dim: usize) -> SmoothMap {
    let m = w_dim + 4;
    SmoothMap::new(m, m, move |p| subcritical_coordinates(w_dim, p)).with_jacobian(move |_| {
        let mut j = DMatrix::identity(m, m);
        let o = w_dim;
        for r in o..m {
            for c in o..m {
                j[(r, c)] = 0.0;
            }
        }
        // q₁ = −φ₁ − y, q₂ = φ₂ + x, p₁ = x, p₂ = y
        j[(o, o + 2)] = -1.0;
        j[(o, o + 1)] = -1.0;
        j[(o + 1, o + 3)] = 1.0;
        j[(o + 1, o)] = 1.0;
        j[(o + 2, o)] = 1.0;
        j[(o + 3, o + 1)] = 1.0;
        j
    })
}

/// λ_can = sign·Σp dq on the T*T² block of W×T*T²; the working convention is sign = −1.
fn torus_canonical(w_dim: usize, sign: f64) -> KForm {
    KForm::one_form(w_dim + 4, move |x| {
        let mut c = vec![0.0; w_dim + 4];
        c[w_dim] = sign * x[w_dim + 2];
        c[w_dim + 1] = sign * x[w_dim + 3];
        c
    })
}

/// λ_W = None stands for W a point. Pullback of λ_W + λ_can against λ_W + x dy − y dx + x dφ₁ − y dφ₂ (both sign
/// conventions for λ_can are tried and the winner recorded), pullback of
/// f_W + ‖p‖² against f_W + x² + y² (exact), and |det J| = 1.
pub fn subcritical_check(
    w_dim: usize,
    lambda_w: Option<&KForm>,
    f_w: &(dyn Fn(&[f64]) -> f64 + Sync),
    samples: &[Point],
) -> CheckReport {
    let m = w_dim + 4;
    let map = subcritical_map(w_dim);
    let lw = lambda_w.map_or_else(|| KForm::zero(m, 1), |l| l.lift(m));
    let expected = lw.add(&KForm::one_form(m, move |p| {
        let (x, y) = (p[w_dim], p[w_dim + 1]);
        let mut c = vec![0.0; m];
        c[w_dim] = -y;
        c[w_dim + 1] = x;
        c[w_dim + 2] = x;
        c[w_dim + 3] = -y;
        c
    }));
    let gap_for = |sign: f64| -> Result<f64, String> {
        let e = |e: FormError| e.to_string();
        let expected = expected.as_ref().map_err(|e| e.to_string())?;
        let pulled = lw.add(&torus_canonical(w_dim, sign)).and_then(|f| f.pullback(&map)).map_err(e)?;
        let mut worst: f64 = 0.0;
        for p in samples {
            worst = nan_max(worst, pulled.eval(p).and_then(|a| a.sub(&expected.eval(p)?)).map_err(e)?.max_abs());
        }
        Ok(worst)
    };
    let mut b = CheckReport::builder(
        "subcritical-coordinates",
        "(q1, q2; p1, p2) = (-phi1 - y, phi2 + x; x, y) pulls lambda_W + lambda_can back to the Bourgeois form",
    )
    .samples(samples.len());
    let (minus, plus) = (gap_for(-1.0), gap_for(1.0));
    match (&minus, &plus) {
        (Ok(mi), Ok(pl)) => {
            let winner = if mi <= pl { "lambda_can = -p dq" } else { "lambda_can = +p dq" };
            b = b
                .residual(*mi, 1e-10)
                .note(format!("gap with -p dq {mi:.3e}, with +p dq {pl:.3e}; convention {winner}"));
        }
        _ => {
            for r in [minus, plus] {
                if let Err(e) = r {
                    b = b.fail(e);
                }
            }
        }
    }
    let mut f_mismatch = 0usize;
    let mut det_gap: f64 = 0.0;
    for p in samples {
        let img = subcritical_coordinates(w_dim, p);
        let lhs = f_w(&img[..w_dim]) + img[w_dim + 2] * img[w_dim + 2] + img[w_dim + 3] * img[w_dim + 3];
        let (x, y) = (p[w_dim], p[w_dim + 1]);
        if lhs != f_w(&p[..w_dim]) + x * x + y * y {
            f_mismatch += 1;
        }
        if let Ok(j) = map.jacobian(p) {
            det_gap = det_gap.max((j.determinant().abs() - 1.0).abs());
        }
    }
    if f_mismatch > 0 {
        b = b.fail(format!("f + |p|^2 differs from f + x^2 + y^2 at {f_mismatch} samples"));
    }
    if !(det_gap <= 1e-12) {
        b = b.fail(format!("|det J| - 1 = {det_gap:.3e}"));
    }
    b.note(format!("max ||det J| - 1| {det_gap:.3e}")).finish()
}

/// Samples of W×ℂ×T² with W = ℝ^{w_dim} in a box, (x, y) in a box and uniform angles.
pub fn subcritical_samples(w_dim: usize, count: usize, seed: u64) -> Vec<Point> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let mut p: Vec<f64> = (0..w_dim + 2).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
            p.extend([rng.random::<f64>() * TAU, rng.random::<f64>() * TAU]);
            Point::with_periodic(p, 0b11 << (w_dim + 2))
        })
        .collect()
}
