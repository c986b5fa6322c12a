//! The verification suites, each a fixed sequence of checks in dependency
//! order: representation, Bourgeois form, monodromy, fillings.

use std::fmt::Display;

use openbook_core::bourgeois::{
    bourgeois_form, characterization_check, epsilon_scaling_check, filling_polynomial, find_inverse_constant,
    isotopy_check, profiled_representation, verify_bg_contact, FillingPolyData, RadialProfile,
};
use openbook_core::contact::{verify_adapted, verify_contact, verify_representation, volume_form_check};
use openbook_core::forms::kernel_identities;
use openbook_core::liouville::{
    annulus_samples, completion_check, hypersurface_build, identification_check, page_embedding_check,
    page_volume_identity, subcritical_check, subcritical_samples, trivial_monodromy_reports, weinstein_check,
    CollarProfile, IdealExample, LiouvilleDomainData, WeinsteinData,
};
use openbook_core::monodromy::{
    analytic_flow_check, dehn_twist_check, monodromy_compare, return_check, rotation_field_g1, spinning_field_check,
    wirtinger_field_g2, DehnTwistData, FlowOptions, SpinningFieldData,
};
use openbook_core::prelagrangian::{
    binding_times_torus, legendrian_check, real_circle, real_circle_times_torus, straighten_loop, straightening_check,
    verify_prelagrangian, LoopData,
};
use openbook_core::standard::{self, standard_alpha, standard_symplectic};
use openbook_core::{CheckReport, Point, RepresentationData, VecField};

use crate::config::{Suite, SuiteConfig};

/// Lyapunov constant used for both Weinstein factors.
pub const WEINSTEIN_DELTA: f64 = 0.2;

fn failed(name: &str, anchor: &str, err: impl Display) -> CheckReport {
    CheckReport::builder(name, anchor).fail(err.to_string()).finish()
}

fn or_failed<E: Display>(name: &str, anchor: &str, r: Result<CheckReport, E>) -> CheckReport {
    r.unwrap_or_else(|e| failed(name, anchor, e))
}

/// Sample `count` points or return the sampling failure as a report.
#[allow(clippy::result_large_err)]
fn sample(m: &openbook_core::Submanifold, count: usize, seed: u64) -> Result<Vec<Point>, CheckReport> {
    m.sample(count, seed).map_err(|e| failed(&format!("sample/{}", m.name()), "sampling", e))
}

/// Run one suite; every report carries the run seed.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let mut out = match cfg.suite {
        Suite::Kernel => kernel(cfg),
        Suite::G1S3 => g1_sphere(cfg),
        Suite::G2S3 => g2_sphere(cfg, 2),
        Suite::G2S5 => g2_sphere(cfg, 3),
        Suite::DiskHypersurface => disk_hypersurface(cfg),
        Suite::Subcritical => subcritical(cfg),
        Suite::Prelag => prelag(cfg),
        Suite::All => [
            Suite::Kernel,
            Suite::G1S3,
            Suite::G2S3,
            Suite::G2S5,
            Suite::DiskHypersurface,
            Suite::Subcritical,
            Suite::Prelag,
        ]
        .into_iter()
        .flat_map(|s| run_suite(&SuiteConfig { suite: s, ..cfg.clone() }))
        .collect(),
    };
    for r in &mut out {
        r.seed = Some(cfg.seed);
    }
    out
}

fn kernel(cfg: &SuiteConfig) -> Vec<CheckReport> {
    vec![kernel_identities(cfg.kernel_evaluations, cfg.seed)]
}

/// Contact, adaptedness, representation, volume form, Bourgeois contact, ε-scaling
/// and slice characterization for one representation on a sphere.
fn representation_block(rep: &RepresentationData, cfg: &SuiteConfig, out: &mut Vec<CheckReport>) -> Option<Vec<Point>> {
    let seed = cfg.seed;
    let off = match sample(rep.manifold(), cfg.samples, seed) {
        Ok(s) => s,
        Err(r) => {
            out.push(r);
            return None;
        }
    };
    let bind = match sample(&rep.binding, cfg.binding_samples, seed.wrapping_add(1)) {
        Ok(s) => s,
        Err(r) => {
            out.push(r);
            return None;
        }
    };
    out.push(verify_contact(&rep.contact, &off, cfg.threshold));
    out.push(or_failed(
        "adapted",
        "adapted open book",
        verify_adapted(&rep.contact, &rep.f, &bind, &off, cfg.threshold),
    ));
    out.push(verify_representation(rep, &off, &bind, cfg.threshold));
    out.push(volume_form_check(rep, &off, &bind, cfg.threshold));

    let torus = match sample(&rep.manifold().times_torus(), cfg.samples, seed.wrapping_add(2)) {
        Ok(s) => s,
        Err(r) => {
            out.push(r);
            return None;
        }
    };
    match bourgeois_form(rep) {
        Ok(bf) => {
            out.push(verify_bg_contact(&bf, &torus, cfg.threshold));
            out.push(or_failed(
                "epsilon-scaling",
                "epsilon family",
                epsilon_scaling_check(rep, &[0.1, 0.5, 1.0], &torus, cfg.threshold),
            ));
            for z in [[0.0, 0.0], [1.3, 4.0]] {
                out.push(or_failed(
                    "characterization",
                    "slices are representations",
                    characterization_check(&bf, z, &off, cfg.binding_samples, seed.wrapping_add(3), cfg.threshold),
                ));
            }
        }
        Err(e) => out.push(failed("bourgeois", "Bourgeois form", e)),
    }
    Some(torus)
}

fn filling(rep: &RepresentationData, n: usize, torus: &[Point], cfg: &SuiteConfig) -> CheckReport {
    let fp = FillingPolyData {
        base: rep.clone(),
        omega: standard_symplectic(n),
        t_grid: cfg.t_grid.clone(),
        eps_grid: cfg.eps_grid.clone(),
    };
    filling_polynomial(&fp, torus, cfg.threshold)
}

fn g1_sphere(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let rep = standard::g1_representation(2);
    let mut out = Vec::new();
    let Some(torus) = representation_block(&rep, cfg, &mut out) else { return out };
    out.push(filling(&rep, 2, &torus, cfg));
    match SpinningFieldData::with_binding_form(&rep, standard::g1_binding_form(2)) {
        Ok(field) => {
            let pts = match sample(rep.manifold(), cfg.samples, cfg.seed.wrapping_add(4)) {
                Ok(p) => p,
                Err(r) => {
                    out.push(r);
                    return out;
                }
            };
            out.push(spinning_field_check(&field, &pts, Some(&rotation_field_g1), 1e-7));
            let starts: Vec<Point> =
                pts.iter().filter(|p| p[0].hypot(p[1]) > 0.05).take(cfg.flow_starts).cloned().collect();
            let opts = FlowOptions { step: cfg.compare_step, check_halving: false };
            out.push(return_check(&field, &starts, opts, 1e-7));
        }
        Err(e) => out.push(failed("spinning-field/g1", "binding form", e)),
    }
    out
}

fn g2_sphere(cfg: &SuiteConfig, n: usize) -> Vec<CheckReport> {
    let rep = standard::g2_representation(n);
    let mut out = Vec::new();
    let Some(torus) = representation_block(&rep, cfg, &mut out) else { return out };
    if n == 2 {
        out.push(filling(&rep, n, &torus, cfg));
        // inverse monodromy: find C for the profiled pair, then the isotopy at C
        let profiled = profiled_representation(&rep, RadialProfile::default());
        let off = match sample(rep.manifold(), cfg.samples, cfg.seed.wrapping_add(5)) {
            Ok(s) => s,
            Err(r) => {
                out.push(r);
                return out;
            }
        };
        let bind = match sample(&rep.binding, cfg.binding_samples, cfg.seed.wrapping_add(6)) {
            Ok(s) => s,
            Err(r) => {
                out.push(r);
                return out;
            }
        };
        match find_inverse_constant(&profiled, &off, &bind, cfg.threshold) {
            Ok(found) => {
                let c = found.c;
                out.push(found.report);
                out.push(found.confirm);
                out.push(or_failed(
                    "isotopy",
                    "isotopy",
                    isotopy_check(&profiled, c, &cfg.tau_grid, &torus, cfg.threshold),
                ));
            }
            Err(e) => out.push(failed("inverse-form", "inverse constant search", e)),
        }
    }

    let field = SpinningFieldData::from_representation(&rep);
    let pts = match sample(rep.manifold(), cfg.samples, cfg.seed.wrapping_add(7)) {
        Ok(p) => p,
        Err(r) => {
            out.push(r);
            return out;
        }
    };
    let off_binding: Vec<Point> = pts.into_iter().filter(|p| rep.f.modulus(p) > 0.05).collect();
    out.push(spinning_field_check(&field, &off_binding, Some(&wirtinger_field_g2), 1e-7));
    let moduli: Vec<f64> =
        (0..cfg.flow_starts).map(|k| 0.05 + 0.9 * k as f64 / (cfg.flow_starts.max(2) - 1) as f64).collect();
    let starts = standard::g2_level_samples(n, &moduli, cfg.seed.wrapping_add(8));
    out.push(analytic_flow_check(&rep, &starts, FlowOptions { step: cfg.flow_step, check_halving: false }));
    let bundle = standard::disk_bundle_samples(n, cfg.monodromy_samples, cfg.seed.wrapping_add(9));
    out.push(monodromy_compare(&rep, &bundle, FlowOptions { step: cfg.compare_step, check_halving: false }));
    out.push(dehn_twist_check(
        &DehnTwistData::standard(),
        &standard::disk_bundle_samples(n, cfg.samples, cfg.seed.wrapping_add(10)),
        &standard::sphere_cotangent_bundle(n),
    ));
    out
}

fn disk_hypersurface(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let seed = cfg.seed;
    let mut out = Vec::new();
    for ld in [LiouvilleDomainData::disk(1), LiouvilleDomainData::disk(2), LiouvilleDomainData::disk_bundle(2)] {
        let inside = ld.sample_interior(cfg.samples, seed, 0.999);
        let edge = ld.sample_boundary(cfg.binding_samples, seed.wrapping_add(1));
        out.push(completion_check(&ld, &inside, &edge, cfg.threshold));
        out.push(page_volume_identity(
            &ld,
            &ld.sample_interior(cfg.samples, seed.wrapping_add(2), 0.95),
            cfg.threshold,
        ));
    }
    out.push(identification_check(
        IdealExample::Disk(2),
        &LiouvilleDomainData::disk(2).sample_interior(cfg.samples, seed.wrapping_add(3), 0.95),
    ));
    out.push(identification_check(
        IdealExample::DiskBundle(3),
        &LiouvilleDomainData::disk_bundle(3).sample_interior(cfg.samples, seed.wrapping_add(4), 0.95),
    ));

    let ld = LiouvilleDomainData::disk(1);
    let mut certify = ld.sample_interior(cfg.samples, seed.wrapping_add(5), 1.0);
    certify.extend(ld.sample_boundary(cfg.binding_samples, seed.wrapping_add(6)));
    match hypersurface_build(&ld, &certify, cfg.threshold) {
        Ok(td) => {
            out.extend(trivial_monodromy_reports(&td, cfg.samples, seed.wrapping_add(7), cfg.threshold));
            out.push(page_embedding_check(
                &td,
                CollarProfile::default(),
                &ld.sample_interior(cfg.samples, seed.wrapping_add(8), 0.99),
            ));
        }
        Err(e) => out.push(failed("hypersurface", "hypersurface build", e)),
    }
    out
}

fn subcritical(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let seed = cfg.seed;
    let mut out = Vec::new();
    let f_w = |w: &[f64]| w.iter().map(|x| x * x).sum::<f64>();
    out.push(subcritical_check(0, None, &f_w, &subcritical_samples(0, cfg.samples, seed)));
    let lambda = standard_alpha(1);
    out.push(subcritical_check(2, Some(&lambda), &f_w, &subcritical_samples(2, cfg.samples, seed.wrapping_add(1))));
    let plane = WeinsteinData::complex_plane(WEINSTEIN_DELTA);
    out.push(weinstein_check(
        &plane,
        &annulus_samples(2, 0.1, 2.0, cfg.samples, seed.wrapping_add(2)),
        WEINSTEIN_DELTA,
    ));
    let torus = WeinsteinData::cotangent_torus(WEINSTEIN_DELTA);
    out.push(weinstein_check(
        &torus,
        &annulus_samples(4, 0.1, 2.0, cfg.samples, seed.wrapping_add(3)),
        WEINSTEIN_DELTA,
    ));
    out
}

/// (l(t), t + ½ sin t, 0) on L×T², l the real circle.
pub fn desk_loop(t: f64) -> Vec<f64> {
    vec![t.cos(), 0.0, t.sin(), 0.0, t + 0.5 * t.sin(), 0.0]
}

fn prelag(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let seed = cfg.seed;
    let mut out = Vec::new();
    for built in [real_circle_times_torus(), binding_times_torus()] {
        match built {
            Ok(pl) => match sample(&pl.submanifold, cfg.samples, seed) {
                Ok(s) => out.push(verify_prelagrangian(&pl, &s)),
                Err(r) => out.push(r),
            },
            Err(e) => out.push(failed("prelagrangian", "construction", e)),
        }
    }
    let l = real_circle();
    match sample(&l, cfg.samples, seed.wrapping_add(1)) {
        Ok(s) => out.push(legendrian_check(&l, &standard::g2_representation(2), &s)),
        Err(r) => out.push(r),
    }
    let straightened = || -> Result<CheckReport, Box<dyn std::error::Error>> {
        let pl = real_circle_times_torus()?;
        let input = LoopData::new(desk_loop, &pl.submanifold)?;
        let y = VecField::new(6, |_| vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let out = straighten_loop(&input, &pl, &y, 16)?;
        Ok(straightening_check(&pl, &input, &out.output))
    };
    out.push(or_failed("straighten", "loop straightening", straightened()));
    out
}
