use openbook_core::manifolds::{orient_page_basis, ManifoldError, RANK_TOL};
use openbook_core::standard::{self, g1, standard_alpha};
use openbook_core::Submanifold;
use std::f64::consts::TAU;

#[test]
fn sphere_samples_satisfy_constraints() {
    for n in [2, 3] {
        let s = Submanifold::sphere(n);
        for p in s.sample(1000, 5).unwrap() {
            assert!(s.residual(&p) <= 1e-10);
        }
    }
}

#[test]
fn sampling_is_deterministic_across_thread_counts() {
    let s = standard::g2_binding(3);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| s.sample(200, 77).unwrap());
    let b = four.install(|| s.sample(200, 77).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, s.sample(200, 78).unwrap());
}

#[test]
fn torus_factor_angles_in_range() {
    let m = Submanifold::sphere(2).times_torus();
    assert_eq!(m.dim(), 5);
    assert_eq!(m.periodic_mask(), 0b11_0000);
    for p in m.sample(500, 3).unwrap() {
        assert!(m.residual(&p) <= 1e-10);
        for &a in &p[4..] {
            assert!((0.0..TAU).contains(&a));
        }
        assert_eq!(m.tangent_basis(&p).unwrap().dim(), 5);
    }
}

#[test]
fn g2_binding_has_full_rank() {
    for n in [2, 3] {
        let k = standard::g2_binding(n);
        assert_eq!(k.dim(), 2 * n - 3);
        for p in k.sample(200, 9).unwrap() {
            assert!(k.residual(&p) <= 1e-10);
            let s = k.singular_values(&p);
            assert!(s.last().unwrap() >= &(RANK_TOL * s[0]));
        }
    }
}

#[test]
fn tangent_basis_is_orthonormal_and_tangent() {
    let s = Submanifold::sphere(3);
    for p in s.sample(100, 2).unwrap() {
        let b = s.tangent_basis(&p).unwrap();
        for (i, u) in b.vectors.iter().enumerate() {
            let along: f64 = u.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
            assert!(along.abs() < 1e-12);
            for (j, v) in b.vectors.iter().enumerate() {
                let d: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn page_basis_orientation_and_binding() {
    let n = 2;
    let s3 = Submanifold::sphere(n);
    let f = g1(n);
    let theta = f.angular();
    let a = standard_alpha(n);
    let vol = a.wedge(&a.d().unwrap()).unwrap();
    // Walk around the page arg z₁ = 0.3; the page basis should move continuously.
    let mut prev: Option<Vec<Vec<f64>>> = None;
    for k in 0..=200 {
        let s = 0.2 + 0.6 * k as f64 / 200.0;
        let (c, r) = (s, (1.0 - s * s).sqrt());
        let p = [c * 0.3f64.cos(), c * 0.3f64.sin(), r * 0.8, r * 0.6];
        let b = orient_page_basis(&s3, &p, &theta, &vol).unwrap();
        assert_eq!(b.dim(), 2);
        // dϑ restricted to the page vanishes.
        for v in &b.vectors {
            assert!(theta.eval_on(&p, &[v]).unwrap().abs() < 1e-12);
        }
        if let Some(q) = &prev {
            let jump = b
                .vectors
                .iter()
                .zip(q)
                .map(|(u, v)| u.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            assert!(jump < 0.05, "page basis jumped by {jump} at step {k}");
        }
        prev = Some(b.vectors);
    }
    let on_binding = [0.0, 0.0, 0.6, 0.8];
    assert!(matches!(orient_page_basis(&s3, &on_binding, &theta, &vol), Err(ManifoldError::OnBinding { .. })));
}
