//! The standard examples on ℂⁿ = ℝ^{2n} with coordinates (x_1, y_1, x_2, y_2, …):
//! the form α₀ = ½Σ(x dy − y dx), the open books of g₁ = z₁ and g₂ = Σz_j²,
//! and the page embeddings of the unit sphere.

use nalgebra::DMatrix;

use crate::contact::{binding_submanifold, ContactFormData, DefiningFunction, RepresentationData};
use crate::forms::{KForm, Point, SmoothMap, VecField};
use crate::manifolds::{random_unit_vector, sample_rng, uniform_angle, Submanifold};
use rand::Rng;

/// α₀ = ½Σ(x_j dy_j − y_j dx_j) on ℝ^{2n} (also the Liouville form λ₀ of ℂⁿ).
pub fn standard_alpha(n: usize) -> KForm {
    KForm::one_form(2 * n, move |p| {
        let mut c = vec![0.0; 2 * n];
        for j in 0..n {
            c[2 * j] = -0.5 * p[2 * j + 1];
            c[2 * j + 1] = 0.5 * p[2 * j];
        }
        c
    })
}

/// ω₀ = Σ dx_j∧dy_j.
pub fn standard_symplectic(n: usize) -> KForm {
    let mut w = crate::forms::AltForm::zero(2 * n, 2);
    for j in 0..n {
        w.axpy(1.0, &crate::forms::AltForm::monomial(2 * n, &[2 * j, 2 * j + 1])).unwrap();
    }
    KForm::constant(w)
}

/// X = ½Σ(x∂x + y∂y), the Liouville field of λ₀.
pub fn radial_field(n: usize) -> VecField {
    VecField::new(2 * n, |p| p.iter().map(|x| 0.5 * x).collect())
}

/// Multiplication by i: (x, y) ↦ (−y, x) in each factor.
pub fn times_i(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for j in 0..p.len() / 2 {
        out[2 * j] = -p[2 * j + 1];
        out[2 * j + 1] = p[2 * j];
    }
    out
}

/// Reeb field 2·(iz) of α₀ on the unit sphere.
pub fn standard_reeb(p: &[f64]) -> Vec<f64> {
    times_i(p).into_iter().map(|v| 2.0 * v).collect()
}

pub fn sphere_contact(n: usize) -> ContactFormData {
    ContactFormData::new(standard_alpha(n), Submanifold::sphere(n)).expect("odd-dimensional sphere")
}

/// g₁ = z₁.
pub fn g1(n: usize) -> DefiningFunction {
    let m = 2 * n;
    DefiningFunction::new("g1", m, |p| (p[0], p[1])).with_gradient(move |_| {
        let mut gx = vec![0.0; m];
        let mut gy = vec![0.0; m];
        gx[0] = 1.0;
        gy[1] = 1.0;
        (gx, gy)
    })
}

/// g₂ = Σ z_j².
pub fn g2(n: usize) -> DefiningFunction {
    let m = 2 * n;
    DefiningFunction::new("g2", m, move |p| {
        let mut re = 0.0;
        let mut im = 0.0;
        for j in 0..n {
            let (x, y) = (p[2 * j], p[2 * j + 1]);
            re += x * x - y * y;
            im += 2.0 * x * y;
        }
        (re, im)
    })
    .with_gradient(move |p| {
        let mut gx = vec![0.0; m];
        let mut gy = vec![0.0; m];
        for j in 0..n {
            let (x, y) = (p[2 * j], p[2 * j + 1]);
            gx[2 * j] = 2.0 * x;
            gx[2 * j + 1] = -2.0 * y;
            gy[2 * j] = 2.0 * y;
            gy[2 * j + 1] = 2.0 * x;
        }
        (gx, gy)
    })
}

/// z₁², whose zero set is the g₁ binding but with vanishing differential there.
pub fn z1_squared(n: usize) -> DefiningFunction {
    let m = 2 * n;
    DefiningFunction::new("z1^2", m, |p| (p[0] * p[0] - p[1] * p[1], 2.0 * p[0] * p[1])).with_gradient(move |p| {
        let mut gx = vec![0.0; m];
        let mut gy = vec![0.0; m];
        gx[0] = 2.0 * p[0];
        gx[1] = -2.0 * p[1];
        gy[0] = 2.0 * p[1];
        gy[1] = 2.0 * p[0];
        (gx, gy)
    })
}

/// {z₁ = 0} ∩ S^{2n−1}, sampled as a unit sphere in the remaining coordinates.
pub fn g1_binding(n: usize) -> Submanifold {
    let m = 2 * n;
    binding_submanifold(&Submanifold::sphere(n), &g1(n), format!("K(g1)⊂S^{}", m - 1)).with_sampler(move |rng| {
        let mut p = vec![0.0, 0.0];
        p.extend(random_unit_vector(rng, m - 2));
        p
    })
}

/// {Σz_j² = 0} ∩ S^{2n−1}, sampled by Newton projection of random sphere points.
pub fn g2_binding(n: usize) -> Submanifold {
    let m = 2 * n;
    binding_submanifold(&Submanifold::sphere(n), &g2(n), format!("K(g2)⊂S^{}", m - 1))
        .with_projection_sampler(move |rng| random_unit_vector(rng, m))
}

pub fn g1_representation(n: usize) -> RepresentationData {
    RepresentationData::new(sphere_contact(n), g1(n), g1_binding(n))
}

pub fn g2_representation(n: usize) -> RepresentationData {
    RepresentationData::new(sphere_contact(n), g2(n), g2_binding(n))
}

/// (α₀, z₁²): same zero set as g₁, but 0 is not a regular value.
pub fn z1_squared_representation(n: usize) -> RepresentationData {
    let m = 2 * n;
    let binding = binding_submanifold(&Submanifold::sphere(n), &z1_squared(n), "K(z1^2)").with_sampler(move |rng| {
        let mut p = vec![0.0, 0.0];
        p.extend(random_unit_vector(rng, m - 2));
        p
    });
    RepresentationData::new(sphere_contact(n), z1_squared(n), binding)
}

/// α₀ − ½(x₁dy₁ − y₁dx₁): agrees with α₀ on the pages and binding of g₁, and
/// its spinning field is the rotation 2π(x₁∂y₁ − y₁∂x₁).
pub fn g1_binding_form(n: usize) -> KForm {
    KForm::one_form(2 * n, move |p| {
        let mut c = vec![0.0; 2 * n];
        for j in 1..n {
            c[2 * j] = -0.5 * p[2 * j + 1];
            c[2 * j + 1] = 0.5 * p[2 * j];
        }
        c
    })
}

/// Page embedding of the unit disk in ℂ^{n−1} onto the page arg z₁ = t of g₁:
/// w ↦ ((1 − |w|²)e^{it}, 2w)/(1 + |w|²).
pub fn g1_page_embedding(n: usize, t: f64) -> SmoothMap {
    let src = 2 * (n - 1);
    SmoothMap::new(src, 2 * n, move |w| {
        let s: f64 = w.iter().map(|v| v * v).sum();
        let mut out = vec![(1.0 - s) * t.cos() / (1.0 + s), (1.0 - s) * t.sin() / (1.0 + s)];
        out.extend(w.iter().map(|v| 2.0 * v / (1.0 + s)));
        out
    })
}

/// Page embedding of the disk cotangent bundle of S^{n−1} onto the page of g₂:
/// (q, p) ↦ (q + ip)e^{it/2}/√(1 + |p|²). Input layout (q_1..q_n, p_1..p_n).
pub fn g2_page_embedding(n: usize, t: f64) -> SmoothMap {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    let eval = move |x: &[f64]| {
        let (q, p) = x.split_at(n);
        let sigma = (1.0 + p.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let mut out = vec![0.0; 2 * n];
        for j in 0..n {
            out[2 * j] = (q[j] * c - p[j] * s) / sigma;
            out[2 * j + 1] = (q[j] * s + p[j] * c) / sigma;
        }
        out
    };
    SmoothMap::new(2 * n, 2 * n, eval).with_jacobian(move |x| {
        let (q, p) = x.split_at(n);
        let s2 = 1.0 + p.iter().map(|v| v * v).sum::<f64>();
        let sigma = s2.sqrt();
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            let (a, b) = (q[j] * c - p[j] * s, q[j] * s + p[j] * c);
            jac[(2 * j, j)] = c / sigma;
            jac[(2 * j + 1, j)] = s / sigma;
            jac[(2 * j, n + j)] += -s / sigma;
            jac[(2 * j + 1, n + j)] += c / sigma;
            for k in 0..n {
                // ∂(1/σ)/∂p_k = −p_k/σ³
                let dk = -p[k] / (s2 * sigma);
                jac[(2 * j, n + k)] += a * dk;
                jac[(2 * j + 1, n + k)] += b * dk;
            }
        }
        jac
    })
}

/// Inverse of the g₂ page embedding on page 0: z ↦ (Re z, Im z)/|Re z|.
pub fn g2_page_inverse(z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = z.len() / 2;
    let re: Vec<f64> = (0..n).map(|j| z[2 * j]).collect();
    let im: Vec<f64> = (0..n).map(|j| z[2 * j + 1]).collect();
    let s = 1.0 / re.iter().map(|v| v * v).sum::<f64>().sqrt();
    (re.iter().map(|v| v * s).collect(), im.iter().map(|v| v * s).collect())
}

/// Disk cotangent bundle of S^{n−1} ⊂ ℝⁿ×ℝⁿ as {|q| = 1, q·p = 0} (the |p| ≤ 1 bound is not a constraint).
pub fn sphere_cotangent_bundle(n: usize) -> Submanifold {
    Submanifold::new(format!("T*S^{}", n - 1), 2 * n, 2, move |x| {
        let (q, p) = x.split_at(n);
        vec![q.iter().map(|v| v * v).sum::<f64>() - 1.0, q.iter().zip(p).map(|(a, b)| a * b).sum()]
    })
    .with_gradients(move |x| {
        let (q, p) = x.split_at(n);
        let mut g1 = vec![0.0; 2 * n];
        let mut g2 = vec![0.0; 2 * n];
        for j in 0..n {
            g1[j] = 2.0 * q[j];
            g2[j] = p[j];
            g2[n + j] = q[j];
        }
        vec![g1, g2]
    })
}

/// Points (q, p) of the closed unit disk bundle of S^{n−1}, |p| uniform in [0, 1].
pub fn disk_bundle_samples(n: usize, count: usize, seed: u64) -> Vec<Point> {
    (0..count as u64)
        .map(|k| {
            let mut rng = sample_rng(seed, k);
            let q = random_unit_vector(&mut rng, n);
            let mut p = random_unit_vector(&mut rng, n);
            let d: f64 = q.iter().zip(&p).map(|(a, b)| a * b).sum();
            p.iter_mut().zip(&q).for_each(|(x, a)| *x -= d * a);
            let scale = rng.random::<f64>() / p.iter().map(|x| x * x).sum::<f64>().sqrt();
            Point::new(q.into_iter().chain(p.into_iter().map(|x| x * scale)).collect())
        })
        .collect()
}

/// Points of S^{2n−1} with |g₂| = g0 for each requested g0: cos(s)u + i sin(s)v
/// with u ⊥ v real unit vectors has g₂ = cos 2s, then a random phase.
pub fn g2_level_samples(n: usize, moduli: &[f64], seed: u64) -> Vec<Point> {
    moduli
        .iter()
        .enumerate()
        .map(|(k, &g0)| {
            let mut rng = sample_rng(seed, k as u64);
            let s = 0.5 * g0.clamp(0.0, 1.0).acos();
            let u = random_unit_vector(&mut rng, n);
            let mut v = random_unit_vector(&mut rng, n);
            let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(&u).for_each(|(x, a)| *x -= d * a);
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let half = 0.5 * uniform_angle(&mut rng);
            let (c, sn) = (half.cos(), half.sin());
            let mut z = vec![0.0; 2 * n];
            for j in 0..n {
                let (re, im) = (s.cos() * u[j], s.sin() * v[j] / nv);
                z[2 * j] = re * c - im * sn;
                z[2 * j + 1] = re * sn + im * c;
            }
            Point::new(z)
        })
        .collect()
}

/// λ_can = −Σ p_j dq_j on ℝⁿ×ℝⁿ, layout (q, p).
pub fn canonical_form(n: usize) -> KForm {
    KForm::one_form(2 * n, move |x| {
        let mut c = vec![0.0; 2 * n];
        for j in 0..n {
            c[j] = -x[n + j];
        }
        c
    })
}
