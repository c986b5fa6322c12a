use openbook_core::prelagrangian::{
    binding_times_torus, bump, g1_binding_circle, hopf_fiber, legendrian_check, loop_integral, loop_speed, real_circle,
    real_circle_times_torus, straighten_loop, straightening_check, verify_prelagrangian, wrong_dimension_fixture,
    LoopData, PreLagrangianError, GRID,
};
use openbook_core::standard;
use openbook_core::VecField;
use proptest::prelude::*;
use std::f64::consts::TAU;

fn unit_phi1() -> VecField {
    VecField::new(6, |_| vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0])
}

fn circle(t: f64) -> [f64; 4] {
    [t.cos(), 0.0, t.sin(), 0.0]
}

/// (l(t), t + a sin(kt), b sin t) on L×T².
fn wavy_loop(a: f64, k: f64, b: f64, sign: f64) -> impl Fn(f64) -> Vec<f64> + Send + Sync {
    move |t| {
        let l = circle(t);
        vec![l[0], l[1], l[2], l[3], sign * t + a * (k * t).sin(), b * t.sin()]
    }
}

#[test]
fn real_circle_times_torus_is_prelagrangian() {
    let pl = real_circle_times_torus().unwrap();
    assert!(pl.dimension_ok());
    let samples = pl.submanifold.sample(500, 1).unwrap();
    let r = verify_prelagrangian(&pl, &samples);
    assert!(r.pass, "{}", r.summary());

    // restricted form is dφ₁: evaluate on the tangent of L and on ∂φ₁, ∂φ₂
    let alpha = pl.alpha_hat.alpha();
    for p in &samples[..50] {
        let tangent = [-p[2], 0.0, p[0], 0.0, 0.0, 0.0];
        assert!(alpha.eval_on(p, &[&tangent]).unwrap().abs() <= 1e-15);
        assert!((alpha.eval_on(p, &[&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]]).unwrap() - 1.0).abs() <= 1e-15);
        assert!(alpha.eval_on(p, &[&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]]).unwrap().abs() <= 1e-15);
    }
}

#[test]
fn binding_times_torus_is_prelagrangian() {
    let pl = binding_times_torus().unwrap();
    assert!(pl.dimension_ok());
    let samples = pl.submanifold.sample(300, 2).unwrap();
    let r = verify_prelagrangian(&pl, &samples);
    assert!(r.pass, "{}", r.summary());
    // f_x, f_y vanish on K×T², so the torus coefficients are exactly zero
    let f = standard::g2(2);
    for p in &samples {
        assert_eq!(f.value(&p[..4]), (0.0, 0.0));
        let a = pl.alpha_hat.alpha().eval(p).unwrap();
        assert_eq!((a.coeffs()[4], a.coeffs()[5]), (0.0, 0.0));
    }
}

#[test]
fn wrong_dimension_fails() {
    let pl = wrong_dimension_fixture().unwrap();
    assert!(!pl.dimension_ok());
    let r = verify_prelagrangian(&pl, &pl.submanifold.sample(50, 3).unwrap());
    assert!(!r.pass);
    // dα̂ still vanishes there; only the dimension is wrong
    assert!(r.max_residual.unwrap() <= 1e-7);
}

#[test]
fn full_manifold_is_not_prelagrangian() {
    let pl = real_circle_times_torus().unwrap();
    let v = pl.alpha_hat.manifold().clone();
    let whole = openbook_core::prelagrangian::PreLagrangianData::new("V", v.clone(), pl.alpha_hat.clone());
    let r = verify_prelagrangian(&whole, &v.sample(50, 4).unwrap());
    assert!(!r.pass);
}

#[test]
fn bump_shape() {
    assert_eq!(bump(0.0), 1.0);
    assert_eq!(bump(0.1), 1.0);
    assert_eq!(bump(0.3), 0.0);
    assert_eq!(bump(1.0), 0.0);
    assert!((bump(0.2) - 0.5).abs() < 1e-15);
    for k in 1..200 {
        let d = 0.1 + 0.2 * k as f64 / 200.0;
        assert!(bump(d) <= bump(d - 1e-3));
    }
}

#[test]
fn legendrians_in_a_page() {
    let rep = standard::g2_representation(2);
    let l = real_circle();
    let r = legendrian_check(&l, &rep, &l.sample(200, 5).unwrap());
    assert!(r.pass, "{}", r.summary());
    // α₀ vanishes on real points and g₂ = 1 there, up to rounding in the tangent basis
    assert!(r.max_residual.unwrap() <= 1e-15);

    let h = hopf_fiber();
    assert!(!legendrian_check(&h, &rep, &h.sample(50, 6).unwrap()).pass);

    let rep1 = standard::g1_representation(2);
    let k = g1_binding_circle();
    let r = legendrian_check(&k, &rep1, &k.sample(50, 7).unwrap());
    assert!(!r.pass);
    // Legendrian in the α₀ sense fails only on the page condition
    assert_eq!(r.min_margin.unwrap(), 0.0);
}

#[test]
fn straightening_the_desk_loop() {
    let pl = real_circle_times_torus().unwrap();
    let input = LoopData::new(wavy_loop(0.5, 1.0, 0.0, 1.0), &pl.submanifold).unwrap();
    let alpha = pl.alpha_hat.alpha();
    // α̂(γ') = 1 + ½cos t, so C = 2π
    let c = loop_integral(alpha, &input).unwrap();
    assert!((c - TAU).abs() <= 1e-10, "{c}");
    let out = straighten_loop(&input, &pl, &unit_phi1(), 16).unwrap();
    assert!((out.integral - TAU).abs() <= 1e-10);
    let r = straightening_check(&pl, &input, &out.output);
    assert!(r.pass, "{}", r.summary());
    // the shift is −½ sin t, so γ̃ = (l(t), t, 0)
    for k in 0..=64 {
        let t = TAU * k as f64 / 64.0;
        let p = out.output.at(t);
        assert!((p[4] - t).abs() <= 1e-9, "{} vs {t}", p[4]);
        assert!((loop_speed(alpha, &out.output, t).unwrap() - 1.0).abs() <= 1e-5);
    }
}

#[test]
fn transverse_loop_is_unchanged() {
    let pl = real_circle_times_torus().unwrap();
    let input = LoopData::new(wavy_loop(0.0, 1.0, 0.3, 1.0), &pl.submanifold).unwrap();
    let out = straighten_loop(&input, &pl, &unit_phi1(), 4).unwrap();
    for k in 0..=GRID / 16 {
        let t = TAU * k as f64 / (GRID / 16) as f64;
        let (a, b) = (input.at(t), out.output.at(t));
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-10), "{a:?} {b:?}");
    }
}

#[test]
fn negative_integral_rejected() {
    let pl = real_circle_times_torus().unwrap();
    let input = LoopData::new(wavy_loop(0.2, 1.0, 0.0, -1.0), &pl.submanifold).unwrap();
    assert!(matches!(
        straighten_loop(&input, &pl, &unit_phi1(), 4),
        Err(PreLagrangianError::NonPositiveIntegral(c)) if (c + TAU).abs() < 1e-9
    ));
}

#[test]
fn fields_leaving_p_rejected() {
    let pl = real_circle_times_torus().unwrap();
    let input = LoopData::new(wavy_loop(0.5, 1.0, 0.0, 1.0), &pl.submanifold).unwrap();
    // α̂(Y) = 1 on P but Y points off L
    let off = VecField::new(6, |p| vec![0.3 + 0.0 * p[0], 0.0, 0.0, 0.0, 1.0, 0.0]);
    assert!(matches!(straighten_loop(&input, &pl, &off, 8), Err(PreLagrangianError::Drift { .. })));
    let slow = VecField::new(6, |_| vec![0.0, 0.0, 0.0, 0.0, 0.5, 0.0]);
    assert!(matches!(straighten_loop(&input, &pl, &slow, 8), Err(PreLagrangianError::NotUnitField { .. })));
}

#[test]
fn loop_validation() {
    let pl = real_circle_times_torus().unwrap();
    // φ₁ winding by 2π closes modulo 2π
    assert!(LoopData::new(wavy_loop(0.0, 1.0, 0.0, 1.0), &pl.submanifold).is_ok());
    let open = |t: f64| {
        let l = circle(t);
        vec![l[0], l[1], l[2], l[3], 0.5 * t, 0.0]
    };
    assert!(matches!(LoopData::new(open, &pl.submanifold), Err(PreLagrangianError::NotClosed(_))));
    let off = |t: f64| {
        let l = circle(t);
        vec![1.1 * l[0], l[1], 1.1 * l[2], l[3], 0.0, 0.0]
    };
    assert!(matches!(LoopData::new(off, &pl.submanifold), Err(PreLagrangianError::OffP { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn straightening_preserves_the_integral(a in -0.9f64..0.9, k in 1u32..4, b in -1.0f64..1.0) {
        let pl = real_circle_times_torus().unwrap();
        let k = k as f64;
        // keep C = 2π > 0; a·sin(kt) is periodic
        let input = LoopData::new(wavy_loop(a / k, k, b, 1.0), &pl.submanifold).unwrap();
        let out = straighten_loop(&input, &pl, &unit_phi1(), 8).unwrap();
        let r = straightening_check(&pl, &input, &out.output);
        prop_assert!(r.pass, "{}", r.summary());
    }
}

#[test]
fn straightening_with_a_rotating_field() {
    // Y = ∂φ₁ + rotation of L: tangent to P, α̂(Y) = 1, flow not a coordinate shift
    let pl = real_circle_times_torus().unwrap();
    let y = VecField::new(6, |p| vec![-p[2], 0.0, p[0], 0.0, 1.0, 0.0]);
    let input = LoopData::new(wavy_loop(0.5, 2.0, 0.4, 1.0), &pl.submanifold).unwrap();
    let out = straighten_loop(&input, &pl, &y, 64).unwrap();
    let r = straightening_check(&pl, &input, &out.output);
    assert!(r.pass, "{}", r.summary());
}
