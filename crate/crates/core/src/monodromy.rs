//! Spinning vector fields of a representation, their time-1 flows, the closed
//! form of the g₂ flow on the sphere, and Dehn twists of disk cotangent bundles.
//!
//! A spinning field Y for (β, f) solves dϑ(Y) = 2π and ι_Y d(β/|f|) = 0 on the
//! page through the point. Both equations are multiplied through by |f|² so the
//! system stays smooth up to the binding:
//!   (f_x df_y − f_y df_x)(Y) = 2π|f|²,
//!   (|f|² dβ − (f_x df_x + f_y df_y)∧β)(Y, e) = 0 for e tangent to the page.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use crate::contact::{volume_at, DefiningFunction, RepresentationData};
use crate::forms::{AltForm, DiffScheme, FormError, KForm, Point, SmoothMap};
use crate::linalg;
use crate::manifolds::{ManifoldError, Submanifold};
use crate::report::{nan_max, CheckReport, ErrorLog, Sweep};
use crate::standard::{g2, g2_page_embedding, g2_page_inverse, times_i};

/// Flows abort when |f| drops below this.
pub const BINDING_ABORT: f64 = 1e-6;
/// Residual tolerance of the spinning-field solve, relative to 2π|f|².
pub const SPINNING_TOL: f64 = 1e-8;
/// Largest endpoint change accepted when the step is halved.
pub const HALVING_TOL: f64 = 1e-5;
/// Disk-bundle samples with ‖p‖ above 1 − this are skipped by the monodromy comparison.
pub const COMPARE_BAND: f64 = 1e-3;
/// Digits of cancellation beyond which the coefficient form of the g₂ flow is flagged.
pub const DIGITS_LOST_LIMIT: f64 = 6.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error("|f| = {modulus:e} at {point:?} is below the binding cutoff")]
    NearBinding { point: Vec<f64>, modulus: f64 },
    #[error("spinning-field system is singular at {point:?}, singular values {singular_values:?}")]
    Singular { point: Vec<f64>, singular_values: Vec<f64> },
    #[error("spinning-field residual {residual:e} at {point:?}")]
    Residual { point: Vec<f64>, residual: f64 },
    #[error("halving the step moved the endpoint by {gap:e}")]
    NonConvergence { gap: f64 },
    #[error("|g| = {0} lies outside [0, 1]")]
    ModulusOutOfRange(f64),
    #[error("({q:?}, {p:?}) is not on the disk cotangent bundle of the sphere")]
    NotOnBundle { q: Vec<f64>, p: Vec<f64> },
    #[error("twist profile must satisfy g(1) = pi, got {0}")]
    BadProfile(f64),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Y together with diagnostics of the linear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinningSolution {
    pub vector: Vec<f64>,
    /// |Mc − b| / (2π|f|²).
    pub residual: f64,
    pub singular_values: Vec<f64>,
}

impl SpinningSolution {
    pub fn condition_number(&self) -> f64 {
        self.singular_values[0] / self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Data defining a spinning field: a binding form β, the defining function and V.
#[derive(Clone, Debug)]
pub struct SpinningFieldData {
    form: KForm,
    dform: KForm,
    f: DefiningFunction,
    manifold: Submanifold,
    n: usize,
    sign: f64,
}

impl SpinningFieldData {
    /// Spinning field of the representation itself (β = α).
    pub fn from_representation(rep: &RepresentationData) -> Self {
        Self {
            form: rep.contact.alpha().clone(),
            dform: rep.contact.dalpha().clone(),
            f: rep.f.clone(),
            manifold: rep.manifold().clone(),
            n: rep.n(),
            sign: 1.0,
        }
    }

    /// Spinning field of (β, f) on the same V, for a binding form β that agrees with
    /// α on pages and binding.
    pub fn with_binding_form(rep: &RepresentationData, beta: KForm) -> Result<Self, MonodromyError> {
        let dform = beta.d()?;
        Ok(Self { form: beta, dform, ..Self::from_representation(rep) })
    }

    /// Y₋ = −Y, the spinning field of the conjugate open book.
    pub fn reversed(&self) -> Self {
        Self { sign: -self.sign, ..self.clone() }
    }

    pub fn f(&self) -> &DefiningFunction {
        &self.f
    }

    pub fn manifold(&self) -> &Submanifold {
        &self.manifold
    }

    pub fn form(&self) -> &KForm {
        &self.form
    }

    /// Solve for Y at p; p only needs to lie near V (the frame of the level set through p is used).
    pub fn solve(&self, p: &[f64]) -> Result<SpinningSolution, MonodromyError> {
        let (x, y) = self.f.value(p);
        let r2 = x * x + y * y;
        if !(r2.sqrt() >= BINDING_ABORT) {
            return Err(MonodromyError::NearBinding { point: p.to_vec(), modulus: r2.sqrt() });
        }
        let frame = self.manifold.level_frame(p)?;
        let d = frame.len();
        let m = p.len();
        let (gx, gy) = self.f.gradient(p);
        let ang: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| x * b - y * a).collect();
        let half_dr2: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| x * a + y * b).collect();
        let w: Vec<f64> = frame.iter().map(|e| linalg::dot(&ang, e)).collect();
        let beta = self.form.eval(p)?;
        let theta = self
            .dform
            .eval(p)?
            .scale(r2)
            .sub(&AltForm::from_coeffs(m, 1, half_dr2)?.wedge(&beta)?)?
            .pullback_columns(&frame)?;
        let (page, _) = linalg::complement(std::slice::from_ref(&w), d);
        let mut sys = nalgebra::DMatrix::zeros(d, d);
        for k in 0..d {
            sys[(0, k)] = w[k];
        }
        for (i, u) in page.iter().enumerate() {
            let row = theta.interior(u)?;
            for k in 0..d {
                sys[(i + 1, k)] = row.coeffs()[k];
            }
        }
        let mut rhs = vec![0.0; d];
        rhs[0] = 2.0 * PI * r2;
        let sv = linalg::singular_values(&sys);
        if !(sv.last().copied().unwrap_or(0.0) > 1e-12 * sv[0]) {
            return Err(MonodromyError::Singular { point: p.to_vec(), singular_values: sv });
        }
        let c = linalg::solve(sys.clone(), &rhs)
            .ok_or_else(|| MonodromyError::Singular { point: p.to_vec(), singular_values: sv.clone() })?;
        let residual = linalg::residual(&sys, &c, &rhs) / rhs[0];
        if !(residual <= SPINNING_TOL) {
            return Err(MonodromyError::Residual { point: p.to_vec(), residual });
        }
        let mut v = vec![0.0; m];
        for (ck, e) in c.iter().zip(&frame) {
            linalg::axpy(&mut v, self.sign * ck, e);
        }
        Ok(SpinningSolution { vector: v, residual, singular_values: sv })
    }

    pub fn vector(&self, p: &[f64]) -> Result<Vec<f64>, MonodromyError> {
        Ok(self.solve(p)?.vector)
    }

    /// Both sides of ι_YΩ = 2π|f|²(dβ)ⁿ − πn d(|f|²)∧β∧(dβ)^{n−1}, restricted to T_pV,
    /// where Ω is the open-book volume form built from β. Returns the largest
    /// coefficient gap relative to the largest coefficient.
    pub fn volume_identity_gap(&self, p: &[f64]) -> Result<f64, MonodromyError> {
        let n = self.n;
        let m = p.len();
        let frame = self.manifold.tangent_basis(p)?.vectors;
        let y = self.vector(p)?;
        let (gx, gy) = self.f.gradient(p);
        let (fx, fy) = self.f.value(p);
        let beta = self.form.eval(p)?;
        let dbeta = self.dform.eval(p)?;
        let omega = volume_at(&beta, &dbeta, (fx, fy), (&gx, &gy), n)?;
        let lhs = omega.interior(&y)?.pullback_columns(&frame)?;
        let d_r2: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| 2.0 * (fx * a + fy * b)).collect();
        let mut rhs = dbeta.power(n)?.scale(2.0 * PI * (fx * fx + fy * fy));
        let tail = AltForm::from_coeffs(m, 1, d_r2)?.wedge(&beta)?.wedge(&dbeta.power(n - 1)?)?;
        rhs.axpy(-PI * n as f64, &tail)?;
        let rhs = rhs.pullback_columns(&frame)?;
        let scale = lhs.max_abs().max(rhs.max_abs()).max(f64::MIN_POSITIVE);
        Ok(lhs.sub(&rhs)?.max_abs() / scale)
    }
}

/// The spinning field of a representation at p.
pub fn spinning_field(rep: &RepresentationData, p: &[f64]) -> Result<Vec<f64>, MonodromyError> {
    SpinningFieldData::from_representation(rep).vector(p)
}

/// 2π(x₁∂y₁ − y₁∂x₁).
pub fn rotation_field_g1(p: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; p.len()];
    v[0] = -2.0 * PI * p[1];
    v[1] = 2.0 * PI * p[0];
    v
}

/// Spinning field of (α₀, g₁): 2π∂θ₁ + 2π·|z₁|²/(1 + |z₁|²)·iz′ with z′ = (z₂, …, zₙ).
pub fn contact_field_g1(p: &[f64]) -> Vec<f64> {
    let r2 = p[0] * p[0] + p[1] * p[1];
    let k = 2.0 * PI * r2 / (1.0 + r2);
    let mut v: Vec<f64> = times_i(p).into_iter().map(|c| k * c).collect();
    let rot = rotation_field_g1(p);
    v[0] = rot[0];
    v[1] = rot[1];
    v
}

/// πi·g₂·Σz̄_j∂_{z_j} − πi·ḡ₂·Σz_j∂_{z̄_j} as a real vector: component j is πi·g₂·z̄_j.
pub fn wirtinger_field_g2(p: &[f64]) -> Vec<f64> {
    let (gr, gi) = g2(p.len() / 2).value(p);
    let mut v = vec![0.0; p.len()];
    for j in 0..p.len() / 2 {
        let (x, y) = (p[2 * j], -p[2 * j + 1]);
        // πi·(gr + i gi)(x + i y)
        let (re, im) = (gr * x - gi * y, gr * y + gi * x);
        v[2 * j] = -PI * im;
        v[2 * j + 1] = PI * re;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub step: f64,
    /// Re-run with half the step and fail if the endpoints differ by more than [`HALVING_TOL`].
    pub check_halving: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { step: 1e-3, check_halving: false }
    }
}

/// Endpoint of a flow with integration metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub point: Vec<f64>,
    pub time: f64,
    pub steps: usize,
    pub min_modulus: f64,
    pub max_modulus: f64,
    pub max_constraint_residual: f64,
    pub halving_gap: Option<f64>,
}

fn rk4(field: &SpinningFieldData, p0: &[f64], t_end: f64, step: f64) -> Result<FlowState, MonodromyError> {
    let steps = ((t_end.abs() / step).ceil() as usize).max(1);
    let h = t_end / steps as f64;
    let v = &field.manifold;
    let mut x = p0.to_vec();
    let r0 = field.f.modulus(&x);
    let (mut min_mod, mut max_mod, mut worst) = (r0, r0, v.residual(&x));
    let shifted = |x: &[f64], k: &[f64], c: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    for _ in 0..steps {
        let k1 = field.vector(&x)?;
        let k2 = field.vector(&shifted(&x, &k1, h / 2.0))?;
        let k3 = field.vector(&shifted(&x, &k2, h / 2.0))?;
        let k4 = field.vector(&shifted(&x, &k3, h))?;
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        x = v.project(&x)?;
        worst = worst.max(v.residual(&x));
        let r = field.f.modulus(&x);
        if !(r >= BINDING_ABORT) {
            return Err(MonodromyError::NearBinding { point: x, modulus: r });
        }
        min_mod = min_mod.min(r);
        max_mod = max_mod.max(r);
    }
    Ok(FlowState {
        point: x,
        time: t_end,
        steps,
        min_modulus: min_mod,
        max_modulus: max_mod,
        max_constraint_residual: worst,
        halving_gap: None,
    })
}

/// Classical RK4 for the spinning field, projecting onto V after every step.
pub fn flow(field: &SpinningFieldData, p0: &[f64], t_end: f64, opts: FlowOptions) -> Result<FlowState, MonodromyError> {
    let mut state = rk4(field, p0, t_end, opts.step)?;
    if opts.check_halving {
        let fine = rk4(field, p0, t_end, opts.step / 2.0)?;
        let gap = state.point.iter().zip(&fine.point).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if !(gap <= HALVING_TOL) {
            return Err(MonodromyError::NonConvergence { gap });
        }
        state.halving_gap = Some(gap);
    }
    Ok(state)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// g₂(z₀) = g₀e^{iθ₀} with g₀ clamped into [0, 1]; w = e^{−iθ₀/2}z₀ has g₂(w) = g₀.
fn g2_frame(z0: &[f64]) -> Result<(f64, f64, Vec<f64>), MonodromyError> {
    let (gr, gi) = g2(z0.len() / 2).value(z0);
    let g0 = gr.hypot(gi);
    if !(g0 <= 1.0 + 1e-9) {
        return Err(MonodromyError::ModulusOutOfRange(g0));
    }
    let theta = gi.atan2(gr);
    Ok((g0.min(1.0), theta, rotate(z0, -theta / 2.0)))
}

fn rotate(z: &[f64], angle: f64) -> Vec<f64> {
    let (c, s) = (angle.cos(), angle.sin());
    let mut out = vec![0.0; z.len()];
    for j in 0..z.len() / 2 {
        out[2 * j] = c * z[2 * j] - s * z[2 * j + 1];
        out[2 * j + 1] = s * z[2 * j] + c * z[2 * j + 1];
    }
    out
}

/// Closed-form flow of the g₂ spinning field on S^{2n−1}.
///
/// In the frame where g₂(w) = g₀ ≥ 0, z(t) = e^{iθ₀/2}e^{πit}u(t) with c = √(1 − g₀²),
///   Re u = x cos(πct) + (1 + g₀)·y·πt·sinc(πct),
///   Im u = y cos(πct) − (1 − g₀)·x·πt·sinc(πct),
/// which is regular at both g₀ = 0 (binding, fixed) and g₀ = 1 (real points, z(1) = −z₀).
pub fn analytic_flow_g2(z0: &[f64], t: f64) -> Result<Vec<f64>, MonodromyError> {
    let (g0, theta, w) = g2_frame(z0)?;
    let c = (1.0 - g0 * g0).max(0.0).sqrt();
    let (cs, sn) = ((PI * c * t).cos(), PI * t * sinc(PI * c * t));
    let mut u = vec![0.0; w.len()];
    for j in 0..w.len() / 2 {
        let (x, y) = (w[2 * j], w[2 * j + 1]);
        u[2 * j] = x * cs + (1.0 + g0) * y * sn;
        u[2 * j + 1] = y * cs - (1.0 - g0) * x * sn;
    }
    Ok(rotate(&u, theta / 2.0 + PI * t))
}

/// The same flow from z(t) = A₊e^{πi(c+1)t} + A₋e^{−πi(c−1)t} with
/// A± = ½(1 ∓ √((1−g₀)/(1+g₀)))x + (i/2)(1 ∓ √((1+g₀)/(1−g₀)))y.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFlow {
    pub point: Vec<f64>,
    /// log₁₀ of the amplification of rounding errors in x, y.
    pub digits_lost: f64,
}

impl CoefficientFlow {
    pub fn flagged(&self) -> bool {
        !(self.digits_lost <= DIGITS_LOST_LIMIT)
    }
}

pub fn analytic_flow_g2_coefficients(z0: &[f64], t: f64) -> Result<CoefficientFlow, MonodromyError> {
    let (g0, theta, w) = g2_frame(z0)?;
    let c = (1.0 - g0 * g0).max(0.0).sqrt();
    let a = ((1.0 - g0) / (1.0 + g0)).sqrt();
    let b = ((1.0 + g0) / (1.0 - g0)).sqrt();
    let (p_re, p_im) = ((PI * (c + 1.0) * t).cos(), (PI * (c + 1.0) * t).sin());
    let (m_re, m_im) = ((PI * (1.0 - c) * t).cos(), (PI * (1.0 - c) * t).sin());
    let mut out = vec![0.0; w.len()];
    let mut largest: f64 = 0.0;
    for j in 0..w.len() / 2 {
        let (x, y) = (w[2 * j], w[2 * j + 1]);
        let plus = (0.5 * (1.0 - a) * x, 0.5 * (1.0 - b) * y);
        let minus = (0.5 * (1.0 + a) * x, 0.5 * (1.0 + b) * y);
        largest = largest.max(plus.0.hypot(plus.1)).max(minus.0.hypot(minus.1));
        out[2 * j] = plus.0 * p_re - plus.1 * p_im + minus.0 * m_re - minus.1 * m_im;
        out[2 * j + 1] = plus.0 * p_im + plus.1 * p_re + minus.0 * m_im + minus.1 * m_re;
    }
    let size = linalg::norm(&out).max(f64::MIN_POSITIVE);
    let amplification = a.max(b).max(largest / size).max(1.0);
    Ok(CoefficientFlow { point: rotate(&out, theta / 2.0), digits_lost: amplification.log10() })
}

type Profile = dyn Fn(f64) -> f64 + Send + Sync;

/// Reference field to compare a computed spinning field against.
pub type ExpectedField = dyn Fn(&[f64]) -> Vec<f64> + Sync;

/// Dehn twist of the disk cotangent bundle of S^{n−1} with angle ρ(r) = r·g(r²) − π.
#[derive(Clone)]
pub struct DehnTwistData {
    name: String,
    g: Arc<Profile>,
}

impl fmt::Debug for DehnTwistData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DehnTwistData({})", self.name)
    }
}

impl DehnTwistData {
    pub fn new(
        name: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, MonodromyError> {
        let at_one = g(1.0);
        if !((at_one - PI).abs() <= 1e-12) {
            return Err(MonodromyError::BadProfile(at_one));
        }
        Ok(Self { name: name.into(), g: Arc::new(g) })
    }

    /// g(r) = 2π/(1 + r), the twist produced by the g₂ open book.
    pub fn standard() -> Self {
        Self::new("2pi/(1+r)", |r| 2.0 * PI / (1.0 + r)).expect("g(1) = pi")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn angle(&self, r: f64) -> f64 {
        r * (self.g)(r * r) - PI
    }

    pub fn angle_slope(&self, r: f64) -> f64 {
        DiffScheme::Richardson { h: 1e-3 }
            .derivative(|t| Ok::<_, FormError>(vec![self.angle(r + t)]))
            .expect("infallible")[0]
    }

    /// sin ρ(r)/r, through −g(r²)·sinc(r·g(r²)) near r = 0.
    fn sin_over_r(&self, r: f64) -> f64 {
        if r > 1e-3 {
            self.angle(r).sin() / r
        } else {
            let g = (self.g)(r * r);
            -g * sinc(r * g)
        }
    }

    /// (q, p) ↦ (q cos ρ + (p/‖p‖) sin ρ, −‖p‖q sin ρ + p cos ρ), with no constraint check.
    pub fn apply_unchecked(&self, q: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let r = linalg::norm(p);
        let rho = self.angle(r);
        let (c, s) = (rho.cos(), rho.sin());
        let sr = self.sin_over_r(r);
        let q2 = q.iter().zip(p).map(|(a, b)| a * c + b * sr).collect();
        let p2 = q.iter().zip(p).map(|(a, b)| -r * a * s + b * c).collect();
        (q2, p2)
    }

    /// The twist as a map on ℝⁿ×ℝⁿ with layout (q, p).
    pub fn as_map(&self, n: usize) -> SmoothMap {
        let dt = self.clone();
        SmoothMap::new(2 * n, 2 * n, move |x| {
            let (q, p) = dt.apply_unchecked(&x[..n], &x[n..]);
            [q, p].concat()
        })
        .with_scheme(DiffScheme::Richardson { h: 1e-3 })
    }
}

/// Apply the twist to a point with ‖q‖ = 1, q ⊥ p, ‖p‖ ≤ 1.
pub fn dehn_twist(dt: &DehnTwistData, q: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>), MonodromyError> {
    let ok =
        (linalg::norm(q) - 1.0).abs() <= 1e-10 && linalg::dot(q, p).abs() <= 1e-10 && linalg::norm(p) <= 1.0 + 1e-12;
    if !ok {
        return Err(MonodromyError::NotOnBundle { q: q.to_vec(), p: p.to_vec() });
    }
    Ok(dt.apply_unchecked(q, p))
}

/// Twist invariants on bundle points (layout (q, p)): ‖p‖ preserved to 1e-12, the
/// boundary ‖p‖ = 1 fixed exactly, constraints kept to 1e-12, and
/// Φ*λ_can = λ_can − ‖p‖dρ on tangent bases (λ_can = −Σp dq) to 1e-7.
pub fn dehn_twist_check(dt: &DehnTwistData, samples: &[Point], bundle: &Submanifold) -> CheckReport {
    let n = bundle.ambient_dim() / 2;
    let map = dt.as_map(n);
    let lambda = crate::standard::canonical_form(n);
    let pulled = lambda.pullback(&map);
    let results: Vec<Result<[f64; 3], String>> = samples
        .par_iter()
        .map(|x| {
            let (q, p) = x.split_at(n);
            let (q2, p2) = dehn_twist(dt, q, p).map_err(|e| e.to_string())?;
            let r = linalg::norm(p);
            let norm_gap = (linalg::norm(&p2) - r).abs();
            let constraint = (linalg::norm(&q2) - 1.0).abs().max(linalg::dot(&q2, &p2).abs());
            // boundary point on the same ray
            let pb: Vec<f64> = if r > 0.0 { p.iter().map(|v| v / r).collect() } else { vec![0.0; n] };
            let boundary = if r > 0.0 {
                let (qb, pb2) = dt.apply_unchecked(q, &pb);
                q.iter().chain(&pb).zip(qb.iter().chain(&pb2)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            } else {
                0.0
            };
            let basis = bundle.tangent_basis(x).map_err(|e| e.to_string())?;
            let pulled = pulled.as_ref().map_err(|e| e.to_string())?;
            let slope = dt.angle_slope(r);
            let mut form_gap: f64 = 0.0;
            for v in &basis.vectors {
                let lhs = pulled.eval_on(x, &[v]).map_err(|e| e.to_string())?;
                let base = lambda.eval_on(x, &[v]).map_err(|e| e.to_string())?;
                let pdp: f64 = p.iter().zip(&v[n..]).map(|(a, b)| a * b).sum();
                form_gap = form_gap.max((lhs - (base - slope * pdp)).abs());
            }
            Ok([norm_gap.max(constraint), boundary, form_gap])
        })
        .collect();
    let mut worst = [0.0f64; 3];
    let mut errors = ErrorLog::default();
    for r in results {
        match r {
            Ok(v) => worst.iter_mut().zip(v).for_each(|(a, b)| *a = nan_max(*a, b)),
            Err(e) => errors.push(e),
        }
    }
    let mut b = CheckReport::builder(
        format!("dehn-twist/{}", dt.name()),
        "Phi^* lambda_can = lambda_can - |p| d rho; |p| preserved; identity on |p| = 1",
    )
    .samples(samples.len())
    .residual(worst[2], 1e-7)
    .note(format!("max |p| / constraint drift {:.3e}, max boundary displacement {:.3e}", worst[0], worst[1]))
    .fail_all(errors.into_failures("evaluation"));
    if !(worst[0] <= 1e-12) {
        b = b.fail(format!("norm or constraints drift by {:.3e}", worst[0]));
    }
    // the boundary is fixed exactly when |p| rounds to 1; a unit vector from normalizing may not
    if !(worst[1] <= 1e-14) {
        b = b.fail(format!("boundary moved by {:.3e}", worst[1]));
    }
    b.finish()
}

/// Per-trajectory results folded into a report.
#[derive(Default)]
struct Worst {
    values: Vec<f64>,
    errors: ErrorLog,
    skipped: usize,
}

fn fold_worst(results: Vec<Option<Result<Vec<f64>, String>>>, width: usize) -> Worst {
    let mut w = Worst { values: vec![0.0; width], ..Default::default() };
    for r in results {
        match r {
            None => w.skipped += 1,
            Some(Ok(v)) => w.values.iter_mut().zip(v).for_each(|(a, b)| *a = nan_max(*a, b)),
            Some(Err(e)) => w.errors.push(e),
        }
    }
    w
}

/// Time-1 flow returns every start to itself (trivial monodromy), to `tolerance`.
pub fn return_check(field: &SpinningFieldData, starts: &[Point], opts: FlowOptions, tolerance: f64) -> CheckReport {
    let results = starts
        .par_iter()
        .map(|p| {
            Some(
                flow(field, p, 1.0, opts)
                    .map(|s| vec![linalg::norm(&s.point.iter().zip(p.iter()).map(|(a, b)| a - b).collect::<Vec<_>>())])
                    .map_err(|e| e.to_string()),
            )
        })
        .collect();
    let w = fold_worst(results, 1);
    CheckReport::builder(format!("return/{}", field.f.name()), "time-1 flow of the spinning field is the identity")
        .samples(starts.len())
        .residual(w.values[0], tolerance)
        .note(format!("step {}", opts.step))
        .fail_all(w.errors.into_failures("flow"))
        .finish()
}

/// RK4 flow of the g₂ spinning field against the closed form at t = 1, with
/// conservation of |g₂| along the trajectory and agreement of the coefficient form.
pub fn analytic_flow_check(rep: &RepresentationData, starts: &[Point], opts: FlowOptions) -> CheckReport {
    let field = SpinningFieldData::from_representation(rep);
    let results = starts
        .par_iter()
        .map(|p| {
            let run = || -> Result<Vec<f64>, MonodromyError> {
                let g0 = rep.f.modulus(p);
                let state = flow(&field, p, 1.0, opts)?;
                let exact = analytic_flow_g2(p, 1.0)?;
                let gap = state.point.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let drift = (state.max_modulus - g0).abs().max((state.min_modulus - g0).abs());
                let coeff = analytic_flow_g2_coefficients(p, 1.0)?;
                let (coeff_gap, flagged) = if coeff.flagged() {
                    (0.0, 1.0)
                } else {
                    (coeff.point.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max), 0.0)
                };
                Ok(vec![gap, drift, coeff_gap, flagged])
            };
            Some(run().map_err(|e| e.to_string()))
        })
        .collect();
    let w = fold_worst(results, 4);
    let mut b = CheckReport::builder(
        format!("g2-flow/{}", rep.manifold().name()),
        "RK4 endpoint = e^{i theta0/2} e^{pi i} u(1); |g2| conserved along the flow",
    )
    .samples(starts.len())
    .residual(w.values[0], 1e-6)
    .note(format!(
        "max |g2| drift {:.3e}, max coefficient-form gap {:.3e}, step {}",
        w.values[1], w.values[2], opts.step
    ))
    .fail_all(w.errors.into_failures("flow"));
    if !(w.values[1] <= 1e-9) {
        b = b.fail(format!("|g2| drifts by {:.3e} along the flow", w.values[1]));
    }
    if !(w.values[2] <= 1e-6) {
        b = b.fail(format!("coefficient form disagrees by {:.3e}", w.values[2]));
    }
    if w.values[3] > 0.0 {
        b = b.note("some starts flagged for cancellation in the coefficient form");
    }
    b.finish()
}

/// (q', p', z₀, z₁): page coordinates after the time-1 flow, with the embedded
/// start and the flow endpoint.
type PageRoundTrip = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

/// ι₀⁻¹∘Φ₁∘ι₀ on the disk cotangent bundle against the Dehn twist with g(r) = 2π/(1+r).
/// The convention (twist vs. its mirror) is pinned at the zero section of the first
/// sample and recorded. Also checks that the time-1 map preserves the page and that
/// flowing Y₋ = −Y undoes it.
pub fn monodromy_compare(rep: &RepresentationData, samples: &[Point], opts: FlowOptions) -> CheckReport {
    let n = rep.n() + 1;
    let field = SpinningFieldData::from_representation(rep);
    let back_field = field.reversed();
    let embed = g2_page_embedding(n, 0.0);
    let twist = DehnTwistData::standard();
    let monodromy = |q: &[f64], p: &[f64]| -> Result<PageRoundTrip, MonodromyError> {
        let z0 = embed.eval(&[q, p].concat())?;
        let end = flow(&field, &z0, 1.0, opts)?.point;
        let (q2, p2) = g2_page_inverse(&end);
        Ok((q2, p2, z0, end))
    };

    let mut builder = CheckReport::builder(
        format!("monodromy/{}", rep.f.name()),
        "inverse(iota0) o Phi_1^Y o iota0 = Dehn twist with g(r) = 2 pi/(1+r)",
    )
    .samples(samples.len());
    // zero-section anchor: the twist sends (q, 0) to (−q, 0); its mirror would fix q
    let mirrored = match samples.first() {
        Some(x) => {
            let q = &x[..n];
            match monodromy(q, &vec![0.0; n]) {
                Ok((q2, _, _, _)) => {
                    let to_antipode = q.iter().zip(&q2).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
                    let to_self = q.iter().zip(&q2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    let mirrored = to_self < to_antipode;
                    builder = builder.note(format!(
                        "zero-section anchor: |q' + q| = {to_antipode:.3e}, |q' - q| = {to_self:.3e}; convention {}",
                        if mirrored { "mirrored" } else { "direct" }
                    ));
                    if to_antipode.min(to_self) > 1e-5 {
                        builder = builder.fail("zero-section anchor matches neither convention");
                    }
                    mirrored
                }
                Err(e) => {
                    builder = builder.fail(format!("zero-section anchor: {e}"));
                    false
                }
            }
        }
        None => false,
    };

    let page_angle = |z: &[f64]| {
        let (x, y) = rep.f.value(z);
        y.atan2(x)
    };
    let results = samples
        .par_iter()
        .map(|x| {
            let (q, p) = x.split_at(n);
            if linalg::norm(p) > 1.0 - COMPARE_BAND {
                return None;
            }
            let run = || -> Result<Vec<f64>, MonodromyError> {
                let (q2, p2, z0, end) = monodromy(q, p)?;
                let (tq, tp) = if mirrored {
                    let (a, b) = dehn_twist(&twist, q, p)?;
                    (a, b.into_iter().map(|v| -v).collect())
                } else {
                    dehn_twist(&twist, q, p)?
                };
                let gap =
                    q2.iter().chain(&p2).zip(tq.iter().chain(&tp)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let mut dtheta = (page_angle(&end) - page_angle(&z0)).rem_euclid(2.0 * PI);
                dtheta = dtheta.min(2.0 * PI - dtheta);
                let back = flow(&back_field, &end, 1.0, opts)?.point;
                let inverse = back.iter().zip(&z0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                Ok(vec![gap, dtheta, inverse])
            };
            Some(run().map_err(|e| e.to_string()))
        })
        .collect::<Vec<_>>();
    let rows = results
        .iter()
        .zip(samples)
        .enumerate()
        .filter_map(|(i, (r, x))| match r {
            Some(Ok(v)) => Some(vec![i as f64, linalg::norm(&x[n..]), v[0], v[1], v[2]]),
            _ => None,
        })
        .collect();
    let w = fold_worst(results, 3);
    builder = builder
        .sweep(Sweep {
            columns: ["sample", "p_norm", "twist_gap", "page_drift", "inverse_gap"].map(String::from).to_vec(),
            rows,
        })
        .residual(w.values[0], 1e-5)
        .note(format!(
            "max page drift {:.3e}, max inverse-flow gap {:.3e}, skipped {} samples near |p| = 1, step {}",
            w.values[1], w.values[2], w.skipped, opts.step
        ))
        .fail_all(w.errors.into_failures("flow"));
    if !(w.values[1] <= 1e-6) {
        builder = builder.fail(format!("time-1 map leaves the page by {:.3e}", w.values[1]));
    }
    if !(w.values[2] <= 1e-5) {
        builder = builder.fail(format!("flow of Y_- misses the start by {:.3e}", w.values[2]));
    }
    builder.finish()
}

/// Solve residual, dϑ(Y) = 2π and the ι_YΩ identity at samples off the binding.
pub fn spinning_field_check(
    field: &SpinningFieldData,
    samples: &[Point],
    expected: Option<&ExpectedField>,
    tolerance: f64,
) -> CheckReport {
    let dtheta = field.f.dtheta();
    let results = samples
        .par_iter()
        .map(|p| {
            if field.f.modulus(p) < COMPARE_BAND {
                return None;
            }
            let run = || -> Result<Vec<f64>, MonodromyError> {
                let s = field.solve(p)?;
                let rot = (linalg::dot(dtheta.eval(p)?.coeffs(), &s.vector) - field.sign * 2.0 * PI).abs();
                let identity = field.volume_identity_gap(p)?;
                let against = match expected {
                    Some(e) => s.vector.iter().zip(e(p)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
                    None => 0.0,
                };
                Ok(vec![s.residual, rot, identity, against, s.condition_number()])
            };
            Some(run().map_err(|e| e.to_string()))
        })
        .collect();
    let w = fold_worst(results, 5);
    let mut b = CheckReport::builder(
        format!("spinning-field/{}", field.f.name()),
        "d theta(Y) = 2 pi, i_Y d(beta/|f|)|page = 0; i_Y Omega = 2 pi |f|^2 (d beta)^n - pi n d|f|^2 ^ beta ^ (d beta)^(n-1)",
    )
    .samples(samples.len())
    .residual(nan_max(w.values[1], w.values[3]), tolerance)
    .note(format!(
        "max solve residual {:.3e}, max identity gap {:.3e}, max condition number {:.3e}, skipped {} near binding",
        w.values[0], w.values[2], w.values[4], w.skipped
    ))
    .fail_all(w.errors.into_failures("solve"));
    if !(w.values[2] <= 1e-8) {
        b = b.fail(format!("volume identity gap {:.3e}", w.values[2]));
    }
    b.finish()
}
