use openbook_core::bourgeois::{
    bourgeois_form, bourgeois_form_verified, characterization_check, convexity_check, default_t_grid,
    epsilon_scaling_check, filling_polynomial, find_inverse_constant, inverse_check, inverse_form, isotopy_check,
    profiled_representation, verify_bg_contact, BourgeoisError, FillingPolyData, RadialProfile,
};
use openbook_core::contact::{top_value, verify_contact, RepresentationData};
use openbook_core::standard::{self, g2, standard_symplectic};
use openbook_core::{DefiningFunction, Point};

fn torus_samples(rep: &RepresentationData, n: usize, seed: u64) -> Vec<Point> {
    rep.manifold().times_torus().sample(n, seed).unwrap()
}

#[test]
fn assembled_form_read_off() {
    let rep = standard::g2_representation(2);
    let bf = bourgeois_form(&rep).unwrap();
    assert_eq!(bf.total().dim(), 5);
    assert_eq!(bf.alpha().dim(), 6);
    for p in torus_samples(&rep, 50, 1) {
        let a = bf.alpha().eval(&p).unwrap();
        let (x, y) = g2(2).value(&p[..4]);
        assert_eq!(a.coeffs()[4], x);
        assert_eq!(a.coeffs()[5], -y);
        // β vanishes on vectors tangent to V×{pt}
        let alpha_v = rep.contact.alpha().eval(&p[..4]).unwrap();
        assert_eq!(&a.coeffs()[..4], alpha_v.coeffs());
    }
    let s5 = bourgeois_form(&standard::g2_representation(3)).unwrap();
    assert_eq!(s5.total().dim(), 7);
}

#[test]
fn form_is_alpha_on_binding() {
    let rep = standard::g1_representation(2);
    let bf = bourgeois_form(&rep).unwrap();
    for p in rep.binding.sample(20, 3).unwrap() {
        let mut x = p.coords().to_vec();
        x.extend([0.4, 2.0]);
        let a = bf.alpha().eval(&x).unwrap();
        let b = rep.contact.alpha().eval(&p).unwrap().lift(6);
        assert!(a.sub(&b).unwrap().max_abs() < 1e-15);
    }
}

#[test]
fn non_representation_is_rejected() {
    let rep = standard::z1_squared_representation(2);
    let off = rep.manifold().sample(200, 1).unwrap();
    let bind = rep.binding.sample(20, 2).unwrap();
    match bourgeois_form_verified(&rep, &off, &bind, 1e-3) {
        Err(BourgeoisError::Representation(r)) => assert!(!r.pass),
        other => panic!("expected representation failure, got {other:?}"),
    }
}

#[test]
fn bourgeois_contact_both_open_books() {
    for rep in [standard::g1_representation(2), standard::g2_representation(2)] {
        let bf = bourgeois_form(&rep).unwrap();
        let r = verify_bg_contact(&bf, &torus_samples(&rep, 2000, 7), 1e-3);
        assert!(r.pass, "{}", r.summary());
        assert!(r.max_residual.unwrap() <= 1e-8);
    }
}

#[test]
fn bourgeois_contact_on_s5() {
    let rep = standard::g2_representation(3);
    let bf = bourgeois_form(&rep).unwrap();
    let r = verify_bg_contact(&bf, &torus_samples(&rep, 300, 8), 1e-3);
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn epsilon_family_scales_quadratically() {
    for rep in [standard::g1_representation(2), standard::g2_representation(2)] {
        let r = epsilon_scaling_check(&rep, &[0.1, 0.5, 1.0], &torus_samples(&rep, 500, 9), 1e-3).unwrap();
        assert!(r.pass, "{}", r.summary());
    }
}

#[test]
fn slices_are_representations() {
    for rep in [standard::g1_representation(2), standard::g2_representation(2)] {
        let bf = bourgeois_form(&rep).unwrap();
        let off = rep.manifold().sample(300, 10).unwrap();
        for z in [[0.0, 0.0], [1.3, 4.0]] {
            let r = characterization_check(&bf, z, &off, 50, 11, 1e-3).unwrap();
            assert!(r.pass, "{}", r.summary());
        }
    }
}

#[test]
fn slice_with_flat_region_fails_submersion() {
    // g₂ multiplied by a cutoff vanishing on {x₁ > 0.5}
    let cutoff = |p: &[f64]| {
        let t = ((0.5 - p[0]) / 0.2).clamp(0.0, 1.0);
        t * t * (3.0 - 2.0 * t)
    };
    let f = g2(2).scaled_by("g2*cutoff", cutoff);
    let rep = RepresentationData::new(standard::sphere_contact(2), f, standard::g2_binding(2));
    let bf = bourgeois_form(&rep).unwrap();
    let off = rep.manifold().sample(400, 12).unwrap();
    let r = characterization_check(&bf, [0.0, 0.0], &off, 20, 13, 1e-3).unwrap();
    assert!(!r.pass);
    assert!(r.failures.iter().any(|f| f.contains("submersion")), "{:?}", r.failures);
}

#[test]
fn radial_profile_shape() {
    let prof = RadialProfile::default();
    assert_eq!(prof.value(0.1), 0.1);
    assert!((prof.value(0.4) - 0.3).abs() < 1e-15);
    assert!((prof.value(0.9) - 0.3).abs() < 1e-15);
    assert_eq!(prof.slope(0.5), 0.0);
    let mut prev = 0.0;
    for k in 0..=1000 {
        let s = 0.5 * k as f64 / 1000.0;
        let v = prof.value(s);
        assert!(v >= prev);
        prev = v;
        let fd = (prof.value(s + 1e-6) - prof.value(s - 1e-6)) / 2e-6;
        if s > 1e-6 {
            assert!((fd - prof.slope(s)).abs() < 1e-6);
        }
    }
}

#[test]
fn profiled_gradient_matches_finite_differences() {
    let f = RadialProfile::default().apply(&g2(2));
    let fd = DefiningFunction::new("fd", 4, {
        let f = f.clone();
        move |p| f.value(p)
    });
    for p in standard::sphere_contact(2).manifold().sample(100, 5).unwrap() {
        let (ax, ay) = f.gradient(&p);
        let (bx, by) = fd.gradient(&p);
        for k in 0..4 {
            assert!((ax[k] - bx[k]).abs() < 1e-7 && (ay[k] - by[k]).abs() < 1e-7);
        }
    }
}

#[test]
fn inverse_form_trivial_constant() {
    let rep = profiled_representation(&standard::g2_representation(2), RadialProfile::default());
    let cf = inverse_form(&rep, 0.0).unwrap();
    let off = rep.manifold().sample(200, 14).unwrap();
    assert!(verify_contact(&cf, &off, 1e-3).pass);
}

#[test]
fn inverse_form_reverses_orientation() {
    let rep = profiled_representation(&standard::g2_representation(2), RadialProfile::default());
    let off = rep.manifold().sample(1000, 15).unwrap();
    let bind = rep.binding.sample(100, 16).unwrap();
    let r = inverse_check(&rep, 10.0, &off, &bind, 1e-3).unwrap();
    assert!(r.pass, "{}", r.summary());
    let found = find_inverse_constant(&rep, &off, &bind, 1e-3).unwrap();
    assert!(found.report.pass && found.confirm.pass);
    assert!(found.c <= 10.0, "C = {}", found.c);
}

#[test]
fn inverse_forms_are_convex() {
    let base = standard::g2_representation(2);
    let a = profiled_representation(&base, RadialProfile::default());
    let b = profiled_representation(&base, RadialProfile { r0: 0.15, r1: 0.5 });
    let off = base.manifold().sample(500, 17).unwrap();
    let bind = base.binding.sample(50, 18).unwrap();
    let c = find_inverse_constant(&a, &off, &bind, 1e-3).unwrap().c;
    let c = c.max(find_inverse_constant(&b, &off, &bind, 1e-3).unwrap().c);
    let r = convexity_check(&a, &b, c, &[1.0 / 6.0, 2.0 / 6.0, 0.5, 4.0 / 6.0, 5.0 / 6.0], &off, 1e-3).unwrap();
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn isotopy_to_inverse_bourgeois_form() {
    let rep = profiled_representation(&standard::g2_representation(2), RadialProfile::default());
    let samples = torus_samples(&rep, 300, 19);
    let r = isotopy_check(&rep, 10.0, &[0.0, 0.25, 0.5, 0.75, 1.0], &samples, 1e-3).unwrap();
    assert!(r.pass, "{}", r.summary());
    let sweep = r.sweep.unwrap();
    // τ = 0 is the identity map
    assert!(sweep.rows[0][2] < 1e-14, "{:?}", sweep.rows[0]);
}

#[test]
fn filling_polynomial_of_the_ball() {
    let rep = standard::g2_representation(2);
    let fp = FillingPolyData {
        base: rep.clone(),
        omega: standard_symplectic(2),
        t_grid: default_t_grid(),
        eps_grid: vec![0.0, 0.01, 0.05, 0.1, 1.0],
    };
    let samples = torus_samples(&rep, 200, 20);
    let r = filling_polynomial(&fp, &samples, 1e-3);
    assert!(r.pass, "{}", r.summary());
    assert_eq!(*fp.t_grid.last().unwrap(), 100.0);
    assert_eq!(fp.t_grid[0], 0.0);

    // P₀(T) = 2(1 + T)·α₀∧dα₀∧vol pointwise for n = 1
    let total = rep.manifold().times_torus();
    for p in samples.iter().take(20) {
        let b = total.tangent_basis(p).unwrap();
        let a = rep.contact.alpha().lift(6).restrict(p, &b.vectors).unwrap();
        let da = standard_symplectic(2).lift(6).restrict(p, &b.vectors).unwrap();
        let vol = openbook_core::AltForm::monomial(6, &[4, 5]).pullback_columns(&b.vectors).unwrap();
        let base = top_value(&[&a, &da, &vol]).unwrap();
        for t in [0.0, 0.5, 3.0, 100.0] {
            let mut w = da.scale(t + 1.0);
            w.axpy(1.0, &vol).unwrap();
            let p0 = top_value(&[&a, &w.power(2).unwrap()]).unwrap();
            assert!((p0 - 2.0 * (1.0 + t) * base).abs() <= 1e-12 * p0.abs());
        }
    }
}
