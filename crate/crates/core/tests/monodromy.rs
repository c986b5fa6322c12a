use openbook_core::monodromy::{
    analytic_flow_check, analytic_flow_g2, analytic_flow_g2_coefficients, contact_field_g1, dehn_twist,
    dehn_twist_check, flow, monodromy_compare, return_check, rotation_field_g1, spinning_field, spinning_field_check,
    wirtinger_field_g2, DehnTwistData, FlowOptions, MonodromyError, SpinningFieldData,
};
use openbook_core::standard::{self, g2, sphere_cotangent_bundle};
use openbook_core::{Point, Submanifold};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn off_binding(m: &Submanifold, f: impl Fn(&[f64]) -> f64, count: usize, seed: u64) -> Vec<Point> {
    m.sample(4 * count, seed).unwrap().into_iter().filter(|p| f(p) > 0.05).take(count).collect()
}

/// Points of S^{2n−1} with prescribed |g₂| = g0: rotate a real unit vector into
/// cos(s)·u + i sin(s)·v with u ⊥ v, which has g₂ = cos 2s.
fn sphere_point_with_modulus(n: usize, g0: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let s = 0.5 * g0.acos();
    let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= nu);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    v.iter_mut().zip(&u).for_each(|(x, a)| *x -= d * a);
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let phase = rng.random::<f64>() * 2.0 * PI;
    let mut z = vec![0.0; 2 * n];
    for j in 0..n {
        let (re, im) = (s.cos() * u[j], s.sin() * v[j]);
        z[2 * j] = re * (phase / 2.0).cos() - im * (phase / 2.0).sin();
        z[2 * j + 1] = re * (phase / 2.0).sin() + im * (phase / 2.0).cos();
    }
    z
}

#[test]
fn g1_field_with_binding_form_is_a_rotation() {
    let rep = standard::g1_representation(2);
    let field = SpinningFieldData::with_binding_form(&rep, standard::g1_binding_form(2)).unwrap();
    for p in off_binding(rep.manifold(), |p| p[0].hypot(p[1]), 200, 1) {
        let y = field.vector(&p).unwrap();
        assert!(max_gap(&y, &rotation_field_g1(&p)) <= 1e-7, "{y:?}");
    }
    let r = spinning_field_check(&field, &rep.manifold().sample(200, 2).unwrap(), Some(&rotation_field_g1), 1e-7);
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn g1_field_of_the_contact_form() {
    for n in [2, 3] {
        let rep = standard::g1_representation(n);
        for p in off_binding(rep.manifold(), |p| p[0].hypot(p[1]), 100, 3) {
            let y = spinning_field(&rep, &p).unwrap();
            assert!(max_gap(&y, &contact_field_g1(&p)) <= 1e-7);
        }
    }
}

#[test]
fn g2_field_matches_wirtinger_expression() {
    for n in [2, 3] {
        let rep = standard::g2_representation(n);
        let field = SpinningFieldData::from_representation(&rep);
        let samples = off_binding(rep.manifold(), |p| g2(n).modulus(p), 200, 4);
        let r = spinning_field_check(&field, &samples, Some(&wirtinger_field_g2), 1e-7);
        assert!(r.pass, "{}", r.summary());
        // Y₋ = −Y
        let p = &samples[0];
        let back = field.reversed().vector(p).unwrap();
        assert!(max_gap(&back, &wirtinger_field_g2(p).iter().map(|v| -v).collect::<Vec<_>>()) <= 1e-7);
    }
}

#[test]
fn field_refuses_the_binding() {
    let rep = standard::g2_representation(2);
    let p = [0.5f64.sqrt(), 0.0, 0.0, 0.5f64.sqrt()];
    assert!(matches!(spinning_field(&rep, &p), Err(MonodromyError::NearBinding { .. })));
}

#[test]
fn g1_flow_returns_to_start() {
    let rep = standard::g1_representation(2);
    let field = SpinningFieldData::with_binding_form(&rep, standard::g1_binding_form(2)).unwrap();
    let starts = off_binding(rep.manifold(), |p| p[0].hypot(p[1]), 10, 5);
    let r = return_check(&field, &starts, FlowOptions { step: 1e-3, check_halving: true }, 1e-7);
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn g2_flow_matches_closed_form() {
    let rep = standard::g2_representation(2);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let starts: Vec<Point> =
        (0..10).map(|k| Point::new(sphere_point_with_modulus(2, 0.05 + 0.1 * k as f64, &mut rng))).collect();
    let r = analytic_flow_check(&rep, &starts, FlowOptions { step: 1e-4, check_halving: false });
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn closed_form_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // binding points are fixed
    let z = [0.5f64.sqrt(), 0.0, 0.0, 0.5f64.sqrt()];
    assert!(max_gap(&analytic_flow_g2(&z, 0.7).unwrap(), &z) < 1e-15);
    // real points go to their antipodes at t = 1
    for n in [2, 3] {
        let z = sphere_point_with_modulus(n, 1.0, &mut rng);
        let end = analytic_flow_g2(&z, 1.0).unwrap();
        assert!(max_gap(&end, &z.iter().map(|v| -v).collect::<Vec<_>>()) <= 1e-12);
        assert!(analytic_flow_g2_coefficients(&z, 1.0).unwrap().flagged());
    }
    // both closed forms agree away from |g₂| = 1
    for g0 in [0.0, 0.3, 0.9, 0.999] {
        let z = sphere_point_with_modulus(2, g0, &mut rng);
        for t in [0.1, 0.5, 1.0] {
            let c = analytic_flow_g2_coefficients(&z, t).unwrap();
            assert!(!c.flagged());
            assert!(max_gap(&c.point, &analytic_flow_g2(&z, t).unwrap()) <= 1e-12);
        }
    }
    assert!(matches!(analytic_flow_g2(&[1.0, 0.0, 1.0, 0.0], 1.0), Err(MonodromyError::ModulusOutOfRange(_))));
}

#[test]
fn flow_refuses_to_cross_binding() {
    let rep = standard::g2_representation(2);
    let field = SpinningFieldData::from_representation(&rep);
    let z = [0.5f64.sqrt(), 0.0, 0.0, 0.5f64.sqrt()];
    assert!(matches!(flow(&field, &z, 1.0, FlowOptions::default()), Err(MonodromyError::NearBinding { .. })));
}

fn bundle_samples(n: usize, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            q.iter_mut().for_each(|x| *x /= qn);
            let mut p: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let d: f64 = q.iter().zip(&p).map(|(a, b)| a * b).sum();
            p.iter_mut().zip(&q).for_each(|(x, a)| *x -= d * a);
            let np = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            let r = match k {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random::<f64>(),
            };
            p.iter_mut().for_each(|x| *x *= r / np);
            Point::new(q.into_iter().chain(p).collect())
        })
        .collect()
}

#[test]
fn twist_identities() {
    for n in [2, 3] {
        let bundle = sphere_cotangent_bundle(n);
        let samples = bundle_samples(n, 200, 8);
        let r = dehn_twist_check(&DehnTwistData::standard(), &samples, &bundle);
        assert!(r.pass, "{}", r.summary());
    }
    let dt = DehnTwistData::standard();
    // zero section goes to the antipode
    let (q, p) = dehn_twist(&dt, &[0.6, 0.8], &[0.0, 0.0]).unwrap();
    assert!(max_gap(&q, &[-0.6, -0.8]) < 1e-15 && p == vec![0.0, 0.0]);
    assert!(matches!(dehn_twist(&dt, &[1.0, 0.0], &[0.5, 0.1]), Err(MonodromyError::NotOnBundle { .. })));
    assert!(DehnTwistData::new("bad", |r| 1.0 + r).is_err());
    // |p| = 1 exactly
    let (q, p) = dehn_twist(&dt, &[0.0, 1.0], &[1.0, 0.0]).unwrap();
    assert_eq!((q, p), (vec![0.0, 1.0], vec![1.0, 0.0]));
}

#[test]
fn twist_with_other_profile() {
    let dt = DehnTwistData::new("pi(2-r)", |r| PI * (2.0 - r)).unwrap();
    let bundle = sphere_cotangent_bundle(2);
    let r = dehn_twist_check(&dt, &bundle_samples(2, 100, 9), &bundle);
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn monodromy_is_a_dehn_twist() {
    let rep = standard::g2_representation(2);
    let samples = bundle_samples(2, 12, 10);
    let r = monodromy_compare(&rep, &samples, FlowOptions { step: 1e-3, check_halving: false });
    assert!(r.pass, "{}", r.summary());
    assert!(r.notes.iter().any(|n| n.contains("direct")), "{:?}", r.notes);
}
