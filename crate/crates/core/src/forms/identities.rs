//! Randomized self-check of the calculus kernel: d∘d = 0, the graded Leibniz
//! rule and naturality of pullback, on smooth random forms.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::{FormError, KForm, SmoothMap};
use crate::manifolds::sample_rng;
use crate::report::{nan_max, CheckReport};

/// Identities hold to this absolute tolerance at the default step.
pub const KERNEL_TOL: f64 = 1e-6;

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// k-form on ℝ^m with coefficients a·sin(b·x + c) + d·x₀, parameters drawn from `seed`.
pub fn random_form(m: usize, k: usize, seed: u64) -> KForm {
    let mut rng = sample_rng(seed, 0);
    let params: Vec<(f64, Vec<f64>, f64, f64)> = (0..binom(m, k))
        .map(|_| {
            let a = rng.random::<f64>() * 2.0 - 1.0;
            let b = (0..m).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            (a, b, rng.random::<f64>() * 6.0, rng.random::<f64>() - 0.5)
        })
        .collect();
    KForm::from_coeffs(m, k, move |x| {
        params
            .iter()
            .map(|(a, b, c, d)| a * (b.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + c).sin() + d * x[0])
            .collect()
    })
}

/// Polynomial map ℝ⁴ → ℝ⁵ with analytic Jacobian.
pub fn test_map() -> SmoothMap {
    SmoothMap::new(4, 5, |x| vec![x[0] * x[1], x[1] + x[2] * x[2], x[3] - x[0], x[0] * x[0] * x[2], x[1] * x[3] + x[2]])
        .with_jacobian(|x| {
            DMatrix::from_row_slice(
                5,
                4,
                &[
                    x[1],
                    x[0],
                    0.0,
                    0.0, //
                    0.0,
                    1.0,
                    2.0 * x[2],
                    0.0, //
                    -1.0,
                    0.0,
                    0.0,
                    1.0, //
                    2.0 * x[0] * x[2],
                    0.0,
                    x[0] * x[0],
                    0.0, //
                    0.0,
                    x[3],
                    1.0,
                    x[1],
                ],
            )
        })
}

fn point(m: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = sample_rng(seed, index);
    (0..m).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
}

/// One evaluation of identity `index % 3` with degrees and data from (seed, index).
fn identity_gap(seed: u64, index: u64) -> Result<f64, FormError> {
    let s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index);
    let k = (index / 3 % 3) as usize;
    match index % 3 {
        0 => {
            let w = random_form(4, k, s);
            Ok(w.d()?.d()?.eval(&point(4, s, 1))?.max_abs())
        }
        1 => {
            let l = (index / 9 % 3) as usize;
            let (a, b) = (random_form(5, k, s), random_form(5, l, s ^ 0x55));
            let p = point(5, s, 2);
            let lhs = a.wedge(&b)?.d()?.eval(&p)?;
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            let rhs = a.d()?.wedge(&b)?.add(&a.wedge(&b.d()?)?.scale(sign))?.eval(&p)?;
            Ok(lhs.sub(&rhs)?.max_abs())
        }
        _ => {
            let a = random_form(5, k, s);
            let phi = test_map();
            let p = point(4, s, 3);
            let lhs = a.d()?.pullback(&phi)?.eval(&p)?;
            let rhs = a.pullback(&phi)?.d()?.eval(&p)?;
            Ok(lhs.sub(&rhs)?.max_abs())
        }
    }
}

/// `count` evaluations split evenly over d² = 0, Leibniz and naturality.
pub fn kernel_identities(count: usize, seed: u64) -> CheckReport {
    let gaps: Vec<Result<f64, FormError>> = (0..count as u64).into_par_iter().map(|i| identity_gap(seed, i)).collect();
    let mut worst = [0.0f64; 3];
    let mut errors = Vec::new();
    for (i, g) in gaps.iter().enumerate() {
        match g {
            Ok(v) => worst[i % 3] = nan_max(worst[i % 3], *v),
            Err(e) if errors.len() < 3 => errors.push(format!("evaluation {i}: {e}")),
            Err(_) => {}
        }
    }
    let failed = gaps.iter().filter(|g| g.is_err()).count();
    let b = CheckReport::builder("kernel-identities", "dd = 0, d(a^b) = da^b + (-1)^k a^db, phi^* d = d phi^*")
        .samples(count)
        .seed(Some(seed))
        .residual(worst.iter().copied().fold(0.0, nan_max), KERNEL_TOL)
        .note(format!("dd {:.3e}, leibniz {:.3e}, naturality {:.3e}", worst[0], worst[1], worst[2]));
    let b = if failed == 0 { b } else { b.fail(format!("{failed} evaluation(s) failed")).fail_all(errors) };
    b.finish()
}
