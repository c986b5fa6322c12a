use openbook_core::liouville::{
    annulus_samples, completion_check, hypersurface_build, identification_check, interior_identification,
    page_embedding_check, page_volume_identity, subcritical_check, subcritical_coordinates, subcritical_samples,
    trivial_monodromy_reports, weinstein_check, CollarProfile, IdealExample, LiouvilleDomainData, LiouvilleError,
    WeinsteinData,
};
use openbook_core::standard::standard_alpha;
use openbook_core::{KForm, Point, VecField};
use proptest::prelude::*;
use std::f64::consts::TAU;

#[test]
fn disk_completion() {
    for n in [1, 2] {
        let ld = LiouvilleDomainData::disk(n);
        let r = completion_check(&ld, &ld.sample_interior(500, 1, 0.999), &ld.sample_boundary(100, 2), 1e-3);
        assert!(r.pass, "{}", r.summary());
        // du(X) = −2‖z‖⁴ and, on the boundary, −2
        for p in ld.sample_boundary(10, 3) {
            assert!((ld.du_liouville(&p).unwrap() + 2.0).abs() < 1e-12);
        }
        for p in ld.sample_interior(50, 4, 1.0) {
            let s = p.iter().map(|x| x * x).sum::<f64>();
            assert!((ld.du_liouville(&p).unwrap() + 2.0 * s * s).abs() < 1e-12);
        }
        let center = vec![0.0; 2 * n];
        assert_eq!(ld.du_liouville(&center).unwrap(), 0.0);
        assert_eq!(ld.u(&center), 1.0);
    }
}

#[test]
fn bundle_completion() {
    for n in [2, 3] {
        let ld = LiouvilleDomainData::disk_bundle(n);
        let r = completion_check(&ld, &ld.sample_interior(500, 5, 0.999), &ld.sample_boundary(100, 6), 1e-3);
        assert!(r.pass, "{}", r.summary());
    }
    // −2s < 1 − s for s = ‖p‖² ∈ [0, 1)
    for k in 0..1000 {
        let s = k as f64 / 1000.0;
        assert!(-2.0 * s < 1.0 - s);
    }
}

#[test]
fn averaged_completion_functions_pass() {
    let ld = LiouvilleDomainData::disk(1);
    let avg = ld.clone().with_completion(
        "avg",
        |p| {
            let s = p[0] * p[0] + p[1] * p[1];
            0.5 * (1.0 - s * s) + 0.5 * (1.0 - s)
        },
        |p| {
            let s = p[0] * p[0] + p[1] * p[1];
            p.iter().map(|x| -2.0 * s * x - x).collect()
        },
    );
    let second = ld.clone().with_completion(
        "1-|z|^2",
        |p| 1.0 - p[0] * p[0] - p[1] * p[1],
        |p| p.iter().map(|x| -2.0 * x).collect(),
    );
    let (inside, edge) = (ld.sample_interior(300, 7, 0.999), ld.sample_boundary(50, 8));
    for d in [&ld, &second, &avg] {
        let r = completion_check(d, &inside, &edge, 1e-3);
        assert!(r.pass, "{}", r.summary());
    }
}

#[test]
fn completion_fails_when_du_x_exceeds_u() {
    // u = 1 − ‖z‖^(1/2)-like growth near the center is not allowed: use u = (1 − ‖z‖²)·e^{4‖z‖²}
    let ld = LiouvilleDomainData::disk(1).with_completion(
        "bad",
        |p| {
            let s = p[0] * p[0] + p[1] * p[1];
            (1.0 - s) * (4.0 * s).exp()
        },
        |p| {
            let s = p[0] * p[0] + p[1] * p[1];
            let g = (4.0 * s).exp() * (4.0 * (1.0 - s) - 1.0);
            p.iter().map(|x| 2.0 * g * x).collect()
        },
    );
    let r = completion_check(&ld, &ld.sample_interior(300, 9, 0.999), &ld.sample_boundary(50, 10), 1e-3);
    assert!(!r.pass);
}

#[test]
fn interior_identifications() {
    assert_eq!(interior_identification(IdealExample::Disk(2), &[0.0; 4]).unwrap(), vec![0.0; 4]);
    assert!(matches!(interior_identification(IdealExample::Disk(1), &[1.0, 0.0]), Err(LiouvilleError::NotInterior(_))));
    // disk: random points with ‖z‖ = 0.7
    let ld = LiouvilleDomainData::disk(2);
    let at_07: Vec<Point> =
        ld.sample_boundary(100, 11).into_iter().map(|p| Point::new(p.iter().map(|x| 0.7 * x).collect())).collect();
    let r = identification_check(IdealExample::Disk(2), &at_07);
    assert!(r.pass, "{}", r.summary());
    // bundle: ‖p‖ = 0.5
    let lb = LiouvilleDomainData::disk_bundle(3);
    let at_05: Vec<Point> = lb
        .sample_boundary(100, 12)
        .into_iter()
        .map(|p| Point::new(p.iter().enumerate().map(|(i, x)| if i < 3 { *x } else { 0.5 * x }).collect()))
        .collect();
    let r = identification_check(IdealExample::DiskBundle(3), &at_05);
    assert!(r.pass, "{}", r.summary());
    let r = identification_check(
        IdealExample::DiskBundle(2),
        &LiouvilleDomainData::disk_bundle(2).sample_interior(200, 13, 0.95),
    );
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn page_volume_of_the_disk() {
    let ld = LiouvilleDomainData::disk(1);
    let mut samples = ld.sample_interior(300, 14, 0.95);
    samples.push(Point::new(vec![0.0, 0.0]));
    let r = page_volume_identity(&ld, &samples, 1e-3);
    assert!(r.pass, "{}", r.summary());
    // center: u − ½du(X) = 1
    let one = page_volume_identity(&ld, &[Point::new(vec![0.0, 0.0])], 1e-3);
    assert!((one.min_margin.unwrap() - 1.0).abs() < 1e-12);
    // near the boundary the margin tends to −½du(X) = 1
    let edge = page_volume_identity(&ld, &[Point::new(vec![0.95, 0.0])], 1e-3);
    let s = 0.95f64.powi(4);
    assert!((edge.min_margin.unwrap() - (1.0 - s + s)).abs() < 1e-9);
    let r = page_volume_identity(
        &LiouvilleDomainData::disk(2),
        &LiouvilleDomainData::disk(2).sample_interior(200, 15, 0.95),
        1e-3,
    );
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn collar_profile_shape() {
    let c = CollarProfile::default();
    assert_eq!(c.value(0.0), 0.0);
    assert_eq!(c.value(0.5), 0.5);
    assert!((c.value(0.2) - 0.2).abs() < 1e-15 && (c.slope(0.2 - 1e-12) - 1.0).abs() < 1e-9);
    // germ d²/w at the boundary
    assert!((c.value(1e-4) / (1e-8 / 0.2) - 1.0).abs() < 1e-2);
    for k in 1..=1000 {
        let d = 0.2 * k as f64 / 1000.0;
        assert!(c.slope(d) > 0.0);
        let fd = (c.value(d + 1e-7) - c.value(d - 1e-7)) / 2e-7;
        assert!((fd - c.slope(d)).abs() < 1e-6);
    }
}

#[test]
fn trivial_monodromy_hypersurface_of_the_disk() {
    let ld = LiouvilleDomainData::disk(1);
    let mut certify = ld.sample_interior(500, 16, 1.0);
    certify.extend(ld.sample_boundary(50, 17));
    let td = hypersurface_build(&ld, &certify, 1e-3).unwrap();
    assert_eq!(td.rep.manifold().dim(), 3);
    assert!(td.transversality_margin > 0.9);
    for r in trivial_monodromy_reports(&td, 2000, 18, 1e-3) {
        assert!(r.pass, "{}", r.summary());
    }
    let r = page_embedding_check(&td, CollarProfile::default(), &ld.sample_interior(200, 19, 0.99));
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn trivial_monodromy_hypersurface_of_the_bundle() {
    let ld = LiouvilleDomainData::disk_bundle(2);
    let certify = ld.sample_interior(300, 20, 1.0);
    let td = hypersurface_build(&ld, &certify, 1e-3).unwrap();
    for r in trivial_monodromy_reports(&td, 500, 21, 1e-3) {
        assert!(r.pass, "{}", r.summary());
    }
}

#[test]
fn hypersurface_rejects_non_transverse_completion() {
    let ld = LiouvilleDomainData::disk(1).with_completion(
        "bad",
        |p| {
            let s = p[0] * p[0] + p[1] * p[1];
            (1.0 - s) * (4.0 * s).exp()
        },
        |p| {
            let s = p[0] * p[0] + p[1] * p[1];
            let g = (4.0 * s).exp() * (4.0 * (1.0 - s) - 1.0);
            p.iter().map(|x| 2.0 * g * x).collect()
        },
    );
    let certify = ld.sample_interior(300, 22, 1.0);
    assert!(matches!(hypersurface_build(&ld, &certify, 1e-3), Err(LiouvilleError::Transversality(_))));
}

#[test]
fn weinstein_examples() {
    let plane = WeinsteinData::complex_plane(0.2);
    let r = weinstein_check(&plane, &annulus_samples(2, 0.1, 2.0, 500, 23), 0.2);
    assert!(r.pass, "{}", r.summary());
    // df(X)/(‖X‖² + ‖df‖²) = 4/17 on ℂ
    assert!((r.min_margin.unwrap() - 4.0 / 17.0).abs() < 1e-12);
    assert!(!weinstein_check(&plane, &annulus_samples(2, 0.1, 2.0, 50, 24), 0.4).pass);

    let torus = WeinsteinData::cotangent_torus(0.2);
    let r = weinstein_check(&torus, &annulus_samples(4, 0.1, 2.0, 500, 25), 0.2);
    assert!(r.pass, "{}", r.summary());
    assert!((r.min_margin.unwrap() - 0.4).abs() < 1e-12);

    // X = 0 with a nonconstant f violates the inequality
    let dead = WeinsteinData::new(
        "X=0",
        plane.omega.clone(),
        KForm::zero(2, 1),
        VecField::new(2, |_| vec![0.0, 0.0]),
        |p| (p[0] * p[0] + p[1] * p[1], vec![2.0 * p[0], 2.0 * p[1]]),
        0.2,
    );
    assert!(!weinstein_check(&dead, &annulus_samples(2, 0.1, 2.0, 50, 26), 0.2).pass);
}

#[test]
fn subcritical_coordinate_change() {
    assert_eq!(subcritical_coordinates(0, &[0.0, 0.0, 1.5, 2.5]), vec![-1.5, 2.5, 0.0, 0.0]);
    for w_dim in [0, 2] {
        let lambda_w = (w_dim == 2).then(|| standard_alpha(1));
        let f_w = |w: &[f64]| w.iter().map(|x| x * x).sum::<f64>();
        let r = subcritical_check(w_dim, lambda_w.as_ref(), &f_w, &subcritical_samples(w_dim, 300, 27));
        assert!(r.pass, "{}", r.summary());
        assert!(r.notes.iter().any(|n| n.contains("convention lambda_can = -p dq")), "{:?}", r.notes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn subcritical_pullback_at_random_points(x in -3.0f64..3.0, y in -3.0f64..3.0, a in 0.0f64..TAU, b in 0.0f64..TAU) {
        let p = Point::new(vec![x, y, a, b]);
        let r = subcritical_check(0, None, &|_| 0.0, &[p]);
        prop_assert!(r.pass, "{}", r.summary());
    }
}
