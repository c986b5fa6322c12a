//! Pre-Lagrangian submanifolds of Bourgeois manifolds V×T², Legendrians
//! inside a page, and straightening loops on a pre-Lagrangian into loops
//! positively transverse to its Legendrian foliation.
//!
//! Loops are parametrized over [0, 2π]. Loop integrals use composite Simpson
//! on [`GRID`] panels.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::bourgeois::{bourgeois_form, BourgeoisError, BourgeoisFormData};
use crate::contact::{ContactError, ContactFormData, RepresentationData};
use crate::forms::{DiffScheme, FormError, KForm, Point, VecField};
use crate::linalg;
use crate::manifolds::{ManifoldError, Submanifold};
use crate::report::{nan_max, tally, CheckReport};
use crate::standard;

/// dα̂ on orthonormal tangent pairs of P.
pub const PRELAGRANGIAN_TOL: f64 = 1e-7;
/// α on tangent vectors of a Legendrian and spread of ϑ along it.
pub const LEGENDRIAN_TOL: f64 = 1e-9;
/// Smallest |f| accepted as "inside a page".
pub const PAGE_MODULUS_FLOOR: f64 = 1e-9;
/// Endpoint gap of a closed loop.
pub const CLOSING_TOL: f64 = 1e-10;
/// Distance of loop points from P.
pub const ON_P_TOL: f64 = 1e-8;
/// α(Y) = 1 along the loop.
pub const UNIT_FIELD_TOL: f64 = 1e-8;
/// α(γ̃') = C/2π at grid points.
pub const SPEED_TOL: f64 = 1e-5;
/// ∫α before and after straightening.
pub const INTEGRAL_TOL: f64 = 1e-6;
/// Simpson panels over one period.
pub const GRID: usize = 2048;
/// The extension f̂_x equals f_x within this distance of L ...
pub const BUMP_INNER: f64 = 0.1;
/// ... and 1 beyond this one.
pub const BUMP_OUTER: f64 = 0.3;

const LOOP_DERIVATIVE: DiffScheme = DiffScheme::Richardson { h: 1e-3 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreLagrangianError {
    #[error("loop integral of alpha is {0:e}; straightening needs it positive")]
    NonPositiveIntegral(f64),
    #[error("flow of Y leaves P: drift {drift:e} at t = {t}")]
    Drift { t: f64, drift: f64 },
    #[error("alpha(Y) = {value} at t = {t}, expected 1")]
    NotUnitField { t: f64, value: f64 },
    #[error("loop does not close: endpoint gap {0:e}")]
    NotClosed(f64),
    #[error("loop leaves P at t = {t} (residual {residual:e})")]
    OffP { t: f64, residual: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Bourgeois(#[from] BourgeoisError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A candidate pre-Lagrangian P ⊂ V×T² together with the contact form α̂ whose
/// differential should vanish on TP.
#[derive(Clone, Debug)]
pub struct PreLagrangianData {
    pub name: String,
    pub submanifold: Submanifold,
    pub alpha_hat: ContactFormData,
}

impl PreLagrangianData {
    pub fn new(name: impl Into<String>, submanifold: Submanifold, alpha_hat: ContactFormData) -> Self {
        Self { name: name.into(), submanifold, alpha_hat }
    }

    pub fn dimension_ok(&self) -> bool {
        2 * self.submanifold.dim() == self.alpha_hat.manifold().dim() + 1
    }
}

/// C^∞ step: 1 on [0, inner], 0 on [outer, ∞).
pub fn bump(d: f64) -> f64 {
    let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let (a, b) = (psi(BUMP_OUTER - d), psi(d - BUMP_INNER));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Euclidean distance from p ∈ ℂⁿ to the real unit sphere {y = 0, |x| = 1}.
pub fn distance_to_real_sphere(p: &[f64]) -> f64 {
    let (mut xx, mut yy) = (0.0, 0.0);
    for c in p.chunks(2) {
        xx += c[0] * c[0];
        yy += c[1] * c[1];
    }
    ((xx.sqrt() - 1.0).powi(2) + yy).sqrt()
}

/// Bourgeois form divided by f̂_x = b(d)·f_x + (1 − b(d)), d the distance to L.
///
/// f_x must be positive where d < [`BUMP_OUTER`] so that f̂_x never vanishes.
pub fn rescaled_by_extension(
    bf: &BourgeoisFormData,
    distance_to_l: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
) -> Result<ContactFormData, PreLagrangianError> {
    let f = bf.base().f.clone();
    let m = bf.base().manifold().ambient_dim();
    let alpha = bf.alpha().mul_fn(move |p| {
        let b = bump(distance_to_l(&p[..m]));
        1.0 / (b * f.value(&p[..m]).0 + (1.0 - b))
    });
    Ok(ContactFormData::new(alpha, bf.total().clone())?)
}

/// Real unit circle {(q₁, 0, q₂, 0)} ⊂ S³, the zero section of the ϑ = 0 page of g₂.
pub fn real_circle() -> Submanifold {
    Submanifold::new("L(real)⊂S^3", 4, 3, |p| vec![p[0] * p[0] + p[2] * p[2] - 1.0, p[1], p[3]])
        .with_gradients(|p| {
            vec![vec![2.0 * p[0], 0.0, 2.0 * p[2], 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]
        })
        .with_sampler(|rng| {
            let t = crate::manifolds::uniform_angle(rng);
            vec![t.cos(), 0.0, t.sin(), 0.0]
        })
}

/// Hopf fiber through (1, 1)/√2: transverse to ξ, so not Legendrian.
pub fn hopf_fiber() -> Submanifold {
    let s = 0.5f64.sqrt();
    Submanifold::new("Hopf fiber", 4, 3, |p| vec![p[0] * p[0] + p[1] * p[1] - 0.5, p[2] - p[0], p[3] - p[1]])
        .with_gradients(|p| {
            vec![vec![2.0 * p[0], 2.0 * p[1], 0.0, 0.0], vec![-1.0, 0.0, 1.0, 0.0], vec![0.0, -1.0, 0.0, 1.0]]
        })
        .with_sampler(move |rng| {
            let t = crate::manifolds::uniform_angle(rng);
            vec![s * t.cos(), s * t.sin(), s * t.cos(), s * t.sin()]
        })
}

/// Equator {z₁ = 0, |z₂| = 1} ⊂ S³, the binding of g₁.
pub fn g1_binding_circle() -> Submanifold {
    Submanifold::new("K(g1)⊂S^3", 4, 3, |p| vec![p[0], p[1], p[2] * p[2] + p[3] * p[3] - 1.0])
        .with_gradients(|p| {
            vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 2.0 * p[2], 2.0 * p[3]]]
        })
        .with_sampler(|rng| {
            let t = crate::manifolds::uniform_angle(rng);
            vec![0.0, 0.0, t.cos(), t.sin()]
        })
}

/// Component {z₂ = i z₁, |z₁|² = ½} of the g₂ binding in S³.
pub fn g2_binding_component() -> Submanifold {
    let s = 0.5f64.sqrt();
    Submanifold::new("K+(g2)⊂S^3", 4, 3, |p| vec![p[0] * p[0] + p[1] * p[1] - 0.5, p[2] + p[1], p[3] - p[0]])
        .with_gradients(|p| {
            vec![vec![2.0 * p[0], 2.0 * p[1], 0.0, 0.0], vec![0.0, 1.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0, 1.0]]
        })
        .with_sampler(move |rng| {
            let t = crate::manifolds::uniform_angle(rng);
            let (x, y) = (s * t.cos(), s * t.sin());
            vec![x, y, -y, x]
        })
}

/// L×T² for the real circle, with the g₂ Bourgeois form rescaled by f̂_x.
pub fn real_circle_times_torus() -> Result<PreLagrangianData, PreLagrangianError> {
    let bf = bourgeois_form(&standard::g2_representation(2))?;
    let alpha_hat = rescaled_by_extension(&bf, distance_to_real_sphere)?;
    Ok(PreLagrangianData::new("Lx T^2 (real circle, g2)", real_circle().times_torus(), alpha_hat))
}

/// K₊×T² for a binding component of g₂, with the plain Bourgeois form.
pub fn binding_times_torus() -> Result<PreLagrangianData, PreLagrangianError> {
    let bf = bourgeois_form(&standard::g2_representation(2))?;
    Ok(PreLagrangianData::new("K x T^2 (g2 binding)", g2_binding_component().times_torus(), bf.contact().clone()))
}

/// L × {φ₂ = 0}: one dimension short of pre-Lagrangian.
pub fn wrong_dimension_fixture() -> Result<PreLagrangianData, PreLagrangianError> {
    let full = real_circle_times_torus()?;
    let l = real_circle();
    let sub = Submanifold::new("L x S^1", 6, 4, {
        let l = l.clone();
        move |p| {
            let mut c = l.constraints(&p[..4]);
            c.push(p[5]);
            c
        }
    })
    .with_gradients(move |p| {
        let mut g: Vec<Vec<f64>> = l
            .gradients(&p[..4])
            .into_iter()
            .map(|mut r| {
                r.extend([0.0, 0.0]);
                r
            })
            .collect();
        g.push(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        g
    })
    .with_periodic(0b10000)
    .with_sampler(|rng| {
        let t = crate::manifolds::uniform_angle(rng);
        vec![t.cos(), 0.0, t.sin(), 0.0, crate::manifolds::uniform_angle(rng), 0.0]
    });
    Ok(PreLagrangianData::new("L x S^1", sub, full.alpha_hat))
}

/// dim P = (dim V + 1)/2, P ⊂ V at the samples, and |dα̂(e_i, e_j)| ≤ 1e-7 on
/// orthonormal bases of TP.
pub fn verify_prelagrangian(pl: &PreLagrangianData, samples: &[Point]) -> CheckReport {
    let b = CheckReport::builder(format!("prelagrangian[{}]", pl.name), "d(alpha_hat)|TP = 0, dim P = (dim V + 1)/2")
        .samples(samples.len());
    let (dp, dv) = (pl.submanifold.dim(), pl.alpha_hat.manifold().dim());
    let b = if pl.dimension_ok() { b } else { b.fail(format!("dim P = {dp}, dim V = {dv}")) };
    let t = tally(samples, |p| {
        let inside = pl.alpha_hat.manifold().residual(p);
        if !(inside <= ON_P_TOL) {
            return Err(format!("sample not in V (residual {inside:e})"));
        }
        let basis = pl.submanifold.tangent_basis(p).map_err(|e| e.to_string())?;
        let w = pl.alpha_hat.dalpha().restrict(p, &basis.vectors).map_err(|e| e.to_string())?;
        Ok((f64::INFINITY, w.max_abs()))
    });
    b.residual(t.max_residual, PRELAGRANGIAN_TOL).fail_all(t.errors.into_failures("evaluation")).finish()
}

/// α vanishes on TL, ϑ = arg f is constant along L and |f| stays away from 0.
pub fn legendrian_check(l: &Submanifold, rep: &RepresentationData, samples: &[Point]) -> CheckReport {
    let b = CheckReport::builder(format!("legendrian[{}]", l.name()), "alpha|TL = 0, L inside one page")
        .samples(samples.len());
    if samples.is_empty() {
        return b.fail("no samples").finish();
    }
    let (fx, fy) = rep.f.value(&samples[0]);
    let theta0 = fy.atan2(fx);
    let t = tally(samples, |p| {
        let basis = l.tangent_basis(p).map_err(|e| e.to_string())?;
        let a = rep.contact.alpha().restrict(p, &basis.vectors).map_err(|e| e.to_string())?;
        let (fx, fy) = rep.f.value(p);
        let spread = angle_gap(fy.atan2(fx), theta0);
        Ok((fx.hypot(fy), nan_max(a.max_abs(), spread)))
    });
    b.margin(t.min_margin, PAGE_MODULUS_FLOOR)
        .residual(t.max_residual, LEGENDRIAN_TOL)
        .fail_all(t.errors.into_failures("evaluation"))
        .finish()
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

type LoopFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

/// A closed loop t ↦ γ(t), t ∈ [0, 2π], on a submanifold P. Coordinates in
/// the periodic mask of P close up modulo 2π.
#[derive(Clone)]
pub struct LoopData {
    gamma: Arc<LoopFn>,
    derivative: Option<Arc<LoopFn>>,
    periodic: u32,
}

impl std::fmt::Debug for LoopData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LoopData(analytic derivative: {})", self.derivative.is_some())
    }
}

impl LoopData {
    /// Checks closing and containment in P on the quadrature grid.
    pub fn new(
        gamma: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        p: &Submanifold,
    ) -> Result<Self, PreLagrangianError> {
        let ld = Self { gamma: Arc::new(gamma), derivative: None, periodic: p.periodic_mask() };
        ld.validate(p)?;
        Ok(ld)
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    fn validate(&self, p: &Submanifold) -> Result<(), PreLagrangianError> {
        let gap = self.closing_gap();
        if !(gap <= CLOSING_TOL) {
            return Err(PreLagrangianError::NotClosed(gap));
        }
        let worst = grid(GRID)
            .into_par_iter()
            .map(|t| (t, p.residual(&self.at(t))))
            .reduce(|| (0.0, 0.0), |a, b| if !(b.1 <= a.1) { b } else { a });
        if !(worst.1 <= ON_P_TOL) {
            return Err(PreLagrangianError::OffP { t: worst.0, residual: worst.1 });
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        (self.gamma)(t)
    }

    /// γ'(t): supplied, or Richardson-extrapolated central differences.
    pub fn velocity(&self, t: f64) -> Vec<f64> {
        match &self.derivative {
            Some(d) => d(t),
            None => LOOP_DERIVATIVE
                .derivative(|h| Ok::<_, std::convert::Infallible>((self.gamma)(t + h)))
                .unwrap_or_else(|e| match e {}),
        }
    }

    /// |γ(2π) − γ(0)| with periodic coordinates compared modulo 2π.
    pub fn closing_gap(&self) -> f64 {
        let (a, b) = (self.at(0.0), self.at(TAU));
        let d: Vec<f64> = a
            .iter()
            .zip(&b)
            .enumerate()
            .map(|(i, (x, y))| if self.periodic >> i & 1 == 1 { angle_gap(*x, *y) } else { x - y })
            .collect();
        linalg::norm(&d)
    }
}

fn grid(n: usize) -> Vec<f64> {
    (0..=n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// α(γ'(t)).
pub fn loop_speed(alpha: &KForm, ld: &LoopData, t: f64) -> Result<f64, FormError> {
    let p = ld.at(t);
    let v = ld.velocity(t);
    alpha.eval_on(&p, &[&v])
}

/// ∫_γ α by composite Simpson on [`GRID`] panels.
pub fn loop_integral(alpha: &KForm, ld: &LoopData) -> Result<f64, FormError> {
    Ok(cumulative_simpson(alpha, ld)?.0.last().copied().unwrap_or(0.0))
}

/// Running integrals F_k = ∫₀^{t_k} α(γ') on the grid, plus the integrand at the nodes.
fn cumulative_simpson(alpha: &KForm, ld: &LoopData) -> Result<(Vec<f64>, Vec<f64>), FormError> {
    let h = TAU / GRID as f64;
    let speed: Vec<f64> =
        (0..=2 * GRID).into_par_iter().map(|k| loop_speed(alpha, ld, 0.5 * h * k as f64)).collect::<Result<_, _>>()?;
    let mut running = Vec::with_capacity(GRID + 1);
    running.push(0.0);
    for k in 0..GRID {
        let panel = h / 6.0 * (speed[2 * k] + 4.0 * speed[2 * k + 1] + speed[2 * k + 2]);
        running.push(running[k] + panel);
    }
    let nodes = speed.into_iter().step_by(2).collect();
    Ok((running, nodes))
}

/// Cubic Hermite interpolant of a primitive from its grid values and derivatives.
#[derive(Debug, Clone)]
struct Primitive {
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Primitive {
    fn at(&self, t: f64) -> f64 {
        let h = TAU / GRID as f64;
        let k = ((t / h).floor() as isize).clamp(0, GRID as isize - 1) as usize;
        let s = (t - k as f64 * h) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.values[k]
            + (s3 - 2.0 * s2 + s) * h * self.slopes[k]
            + (-2.0 * s3 + 3.0 * s2) * self.values[k + 1]
            + (s3 - s2) * h * self.slopes[k + 1]
    }
}

/// Time-`time` RK4 flow of Y from p in `steps` equal steps.
fn flow_field(y: &VecField, p: &[f64], time: f64, steps: usize) -> Result<Vec<f64>, FormError> {
    let mut x = p.to_vec();
    if time == 0.0 {
        return Ok(x);
    }
    let h = time / steps as f64;
    let shifted = |x: &[f64], k: &[f64], c: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    for _ in 0..steps {
        let k1 = y.eval(&x)?;
        let k2 = y.eval(&shifted(&x, &k1, 0.5 * h))?;
        let k3 = y.eval(&shifted(&x, &k2, 0.5 * h))?;
        let k4 = y.eval(&shifted(&x, &k3, h))?;
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(x)
}

/// Result of [`straighten_loop`].
#[derive(Debug, Clone)]
pub struct Straightened {
    pub output: LoopData,
    /// ∫_γ α of the input.
    pub integral: f64,
}

/// Replace γ by t ↦ Φ_{f(t)}(γ(t)) with f(t) = Ct/2π − ∫₀ᵗ α(γ'), Φ the flow
/// of Y (α(Y) = 1 on P) integrated with `steps` RK4 steps. Then α(γ̃') = C/2π.
pub fn straighten_loop(
    ld: &LoopData,
    pl: &PreLagrangianData,
    y: &VecField,
    steps: usize,
) -> Result<Straightened, PreLagrangianError> {
    let alpha = pl.alpha_hat.alpha();
    let (running, nodes) = cumulative_simpson(alpha, ld)?;
    let c = running[GRID];
    if !(c > 0.0) {
        return Err(PreLagrangianError::NonPositiveIntegral(c));
    }
    let primitive = Arc::new(Primitive { values: running, slopes: nodes });
    let shift = {
        let primitive = primitive.clone();
        move |t: f64| c * t / TAU - primitive.at(t)
    };
    let steps = steps.max(1);
    let p = &pl.submanifold;

    // α(Y) = 1 on the input and the flow stays on P, checked at the grid nodes
    // and panel midpoints.
    let checks = grid(2 * GRID)
        .into_par_iter()
        .map(|t| -> Result<(), PreLagrangianError> {
            let start = ld.at(t);
            let yv = y.eval(&start)?;
            let value = alpha.eval_on(&start, &[&yv])?;
            if !((value - 1.0).abs() <= UNIT_FIELD_TOL) {
                return Err(PreLagrangianError::NotUnitField { t, value });
            }
            let end = flow_field(y, &start, shift(t), steps)?;
            let drift = p.residual(&end);
            if !(drift <= ON_P_TOL) {
                return Err(PreLagrangianError::Drift { t, drift });
            }
            Ok(())
        })
        .collect::<Vec<_>>();
    checks.into_iter().collect::<Result<(), _>>()?;

    let gamma = ld.gamma.clone();
    let y = y.clone();
    let dim = p.ambient_dim();
    let output = LoopData {
        gamma: Arc::new(move |t| flow_field(&y, &gamma(t), shift(t), steps).unwrap_or_else(|_| vec![f64::NAN; dim])),
        derivative: None,
        periodic: ld.periodic,
    };
    output.validate(p)?;
    Ok(Straightened { output, integral: c })
}

/// Speed and integral of a straightened loop against the input integral C:
/// max |α(γ̃') − C/2π| on the grid ≤ 1e-5 and |∫γ̃ α − C| ≤ 1e-6.
pub fn straightening_check(pl: &PreLagrangianData, input: &LoopData, output: &LoopData) -> CheckReport {
    let b =
        CheckReport::builder(format!("straighten[{}]", pl.name), "alpha(straightened') = C/2pi, integral preserved")
            .samples(GRID + 1);
    let alpha = pl.alpha_hat.alpha();
    let (c, after) = match (loop_integral(alpha, input), loop_integral(alpha, output)) {
        (Ok(c), Ok(a)) => (c, a),
        (Err(e), _) | (_, Err(e)) => return b.fail(e.to_string()).finish(),
    };
    let target = c / TAU;
    let worst = grid(GRID)
        .into_par_iter()
        .map(|t| loop_speed(alpha, output, t).map(|s| (s - target).abs()).unwrap_or(f64::NAN))
        .reduce(|| 0.0, nan_max);
    let drift = (after - c).abs();
    let b = b
        .residual(worst, SPEED_TOL)
        .note(format!("C = {c:.12}, C/2pi = {:.12}, integral gap {drift:.3e}", c / (2.0 * PI)));
    let b = if drift <= INTEGRAL_TOL { b } else { b.fail(format!("integral changed by {drift:e}")) };
    b.finish()
}
