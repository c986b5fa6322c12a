//! Acceptance run: one line per criterion, nonzero exit if any fails.
//! Sample counts, tolerances and time limits are the release targets.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use openbook_cli::suites::{desk_loop, WEINSTEIN_DELTA};
use openbook_cli::{run_suite, ReportDocument, Suite, SuiteConfig};
use openbook_core::bourgeois::{
    bourgeois_form, epsilon_scaling_check, filling_polynomial, find_inverse_constant, isotopy_check,
    profiled_representation, verify_bg_contact, FillingPolyData, RadialProfile,
};
use openbook_core::contact::{verify_adapted, verify_contact, verify_representation, volume_form_check};
use openbook_core::forms::kernel_identities;
use openbook_core::liouville::{
    annulus_samples, completion_check, hypersurface_build, identification_check, page_embedding_check,
    page_volume_identity, subcritical_check, subcritical_samples, trivial_monodromy_reports, weinstein_check,
    CollarProfile, IdealExample, LiouvilleDomainData, WeinsteinData,
};
use openbook_core::monodromy::{
    analytic_flow_check, dehn_twist_check, monodromy_compare, return_check, DehnTwistData, FlowOptions,
    SpinningFieldData,
};
use openbook_core::prelagrangian::{
    real_circle_times_torus, straighten_loop, straightening_check, verify_prelagrangian, LoopData,
};
use openbook_core::standard::{self, standard_alpha, standard_symplectic};
use openbook_core::{CheckReport, Point, RepresentationData, Submanifold, VecField};

const SEED: u64 = 20240;
const THRESHOLD: f64 = 1e-3;

type Outcome = Result<Vec<CheckReport>, String>;

fn sample(m: &Submanifold, count: usize, seed: u64) -> Result<Vec<Point>, String> {
    m.sample(count, seed).map_err(|e| format!("sampling {}: {e}", m.name()))
}

fn kernel() -> Outcome {
    Ok(vec![kernel_identities(10_000, SEED)])
}

fn contact() -> Outcome {
    let mut out = Vec::new();
    for n in [2, 3] {
        for rep in [standard::g1_representation(n), standard::g2_representation(n)] {
            let off = sample(rep.manifold(), 2000, SEED)?;
            let bind = sample(&rep.binding, 100, SEED + 1)?;
            out.push(verify_contact(&rep.contact, &off, THRESHOLD));
            out.push(verify_adapted(&rep.contact, &rep.f, &bind, &off, THRESHOLD).map_err(|e| e.to_string())?);
            out.push(verify_representation(&rep, &off, &bind, THRESHOLD));
            out.push(volume_form_check(&rep, &off, &bind, THRESHOLD));
        }
    }
    Ok(out)
}

fn torus_samples(rep: &RepresentationData, count: usize, seed: u64) -> Result<Vec<Point>, String> {
    sample(&rep.manifold().times_torus(), count, seed)
}

fn bourgeois() -> Outcome {
    let mut out = Vec::new();
    for rep in [standard::g1_representation(2), standard::g2_representation(2)] {
        let torus = torus_samples(&rep, 1000, SEED + 2)?;
        let bf = bourgeois_form(&rep).map_err(|e| e.to_string())?;
        out.push(verify_bg_contact(&bf, &torus, THRESHOLD));
        out.push(epsilon_scaling_check(&rep, &[0.1, 0.5, 1.0], &torus, THRESHOLD).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn inverse() -> Outcome {
    let rep = standard::g2_representation(2);
    let profiled = profiled_representation(&rep, RadialProfile::default());
    let off = sample(rep.manifold(), 1000, SEED + 3)?;
    let bind = sample(&rep.binding, 100, SEED + 4)?;
    let found = find_inverse_constant(&profiled, &off, &bind, THRESHOLD).map_err(|e| e.to_string())?;
    let torus = torus_samples(&rep, 500, SEED + 5)?;
    let iso = isotopy_check(&profiled, found.c, &[0.0, 0.25, 0.5, 0.75, 1.0], &torus, THRESHOLD)
        .map_err(|e| e.to_string())?;
    Ok(vec![found.report, found.confirm, iso])
}

fn flows() -> Outcome {
    let g1 = standard::g1_representation(2);
    let field = SpinningFieldData::with_binding_form(&g1, standard::g1_binding_form(2)).map_err(|e| e.to_string())?;
    let starts: Vec<Point> =
        sample(g1.manifold(), 400, SEED + 6)?.into_iter().filter(|p| p[0].hypot(p[1]) > 0.05).take(200).collect();
    if starts.len() < 200 {
        return Err(format!("only {} g1 starts off the binding", starts.len()));
    }
    let coarse = FlowOptions { step: 1e-3, check_halving: false };
    let fine = FlowOptions { step: 1e-4, check_halving: false };
    let g2 = standard::g2_representation(2);
    let moduli: Vec<f64> = (0..200).map(|k| 0.05 + 0.9 * k as f64 / 199.0).collect();
    let level = standard::g2_level_samples(2, &moduli, SEED + 7);
    let bundle = standard::disk_bundle_samples(2, 100, SEED + 8);
    Ok(vec![
        return_check(&field, &starts, coarse, 1e-7),
        analytic_flow_check(&g2, &level, fine),
        monodromy_compare(&g2, &bundle, coarse),
    ])
}

fn dehn_twist() -> Outcome {
    let samples = standard::disk_bundle_samples(2, 200, SEED + 9);
    Ok(vec![dehn_twist_check(&DehnTwistData::standard(), &samples, &standard::sphere_cotangent_bundle(2))])
}

fn ideal_liouville() -> Outcome {
    let mut out = Vec::new();
    for ld in [LiouvilleDomainData::disk(2), LiouvilleDomainData::disk_bundle(2)] {
        let inside = ld.sample_interior(1000, SEED, 0.999);
        let edge = ld.sample_boundary(200, SEED + 1);
        out.push(completion_check(&ld, &inside, &edge, THRESHOLD));
        out.push(page_volume_identity(&ld, &ld.sample_interior(1000, SEED + 2, 0.95), THRESHOLD));
    }
    for ex in [IdealExample::Disk(2), IdealExample::DiskBundle(2)] {
        out.push(identification_check(ex, &ex.domain().sample_interior(500, SEED + 3, 0.95)));
    }
    let disk = LiouvilleDomainData::disk(1);
    let mut certify = disk.sample_interior(2000, SEED + 4, 1.0);
    certify.extend(disk.sample_boundary(200, SEED + 5));
    let td = hypersurface_build(&disk, &certify, THRESHOLD).map_err(|e| e.to_string())?;
    out.extend(trivial_monodromy_reports(&td, 2000, SEED + 6, THRESHOLD));
    out.push(page_embedding_check(&td, CollarProfile::default(), &disk.sample_interior(500, SEED + 7, 0.99)));
    Ok(out)
}

fn subcritical() -> Outcome {
    let f_w = |w: &[f64]| w.iter().map(|x| x * x).sum::<f64>();
    let lambda = standard_alpha(1);
    Ok(vec![
        subcritical_check(0, None, &f_w, &subcritical_samples(0, 1000, SEED)),
        subcritical_check(2, Some(&lambda), &f_w, &subcritical_samples(2, 1000, SEED + 1)),
        weinstein_check(
            &WeinsteinData::complex_plane(WEINSTEIN_DELTA),
            &annulus_samples(2, 0.1, 2.0, 1000, SEED + 2),
            WEINSTEIN_DELTA,
        ),
        weinstein_check(
            &WeinsteinData::cotangent_torus(WEINSTEIN_DELTA),
            &annulus_samples(4, 0.1, 2.0, 1000, SEED + 3),
            WEINSTEIN_DELTA,
        ),
    ])
}

fn filling() -> Outcome {
    let mut out = Vec::new();
    for rep in [standard::g1_representation(2), standard::g2_representation(2)] {
        let torus = torus_samples(&rep, 1000, SEED + 10)?;
        let fp = FillingPolyData {
            base: rep,
            omega: standard_symplectic(2),
            t_grid: openbook_core::bourgeois::default_t_grid(),
            eps_grid: vec![0.0, 0.01, 0.05, 0.1],
        };
        out.push(filling_polynomial(&fp, &torus, THRESHOLD));
    }
    Ok(out)
}

fn prelagrangian() -> Outcome {
    let pl = real_circle_times_torus().map_err(|e| e.to_string())?;
    let samples = sample(&pl.submanifold, 2000, SEED)?;
    let input = LoopData::new(desk_loop, &pl.submanifold).map_err(|e| e.to_string())?;
    let y = VecField::new(6, |_| vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let out = straighten_loop(&input, &pl, &y, 16).map_err(|e| e.to_string())?;
    Ok(vec![verify_prelagrangian(&pl, &samples), straightening_check(&pl, &input, &out.output)])
}

/// Two full runs with one seed, compared without timing. The time limit
/// applies to a single run.
fn determinism() -> (Outcome, Duration) {
    let cfg = SuiteConfig { suite: Suite::All, seed: SEED, ..Default::default() };
    let start = Instant::now();
    let first = ReportDocument::new(&cfg, run_suite(&cfg));
    let once = start.elapsed();
    let second = ReportDocument::new(&cfg, run_suite(&cfg));
    let (a, b) = (first.without_timing().to_json(), second.without_timing().to_json());
    let identity = if a == b {
        CheckReport::builder("rerun", "identical JSON without timing").samples(first.reports.len()).finish()
    } else {
        let line = a.lines().zip(b.lines()).position(|(x, y)| x != y).unwrap_or(0);
        CheckReport::builder("rerun", "identical JSON without timing")
            .fail(format!("runs differ from line {}", line + 1))
            .finish()
    };
    let mut reports = first.reports;
    reports.push(identity);
    (Ok(reports), once)
}

struct Criterion {
    label: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn report_line(index: usize, label: &str, outcome: &Outcome, elapsed: Duration, limit: Option<Duration>) -> bool {
    let in_time = limit.is_none_or(|l| elapsed < l);
    let limit_text = limit.map(|l| format!(" (limit {} s)", l.as_secs())).unwrap_or_default();
    let (pass, detail) = match outcome {
        Ok(reports) => {
            let passed = reports.iter().filter(|r| r.pass).count();
            (passed == reports.len() && in_time, format!("{passed}/{} checks", reports.len()))
        }
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "criterion {index:2} {} {label}: {detail}, {:.1} s{limit_text}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    if let Ok(reports) = outcome {
        for r in reports.iter().filter(|r| !r.pass) {
            println!("    {}", r.summary());
        }
    }
    if !in_time {
        println!("    over the time limit");
    }
    pass
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { label: "calculus kernel identities", limit: Some(Duration::from_secs(10)), run: kernel },
        Criterion {
            label: "contact and adapted open books on S^3, S^5",
            limit: Some(Duration::from_secs(60)),
            run: contact,
        },
        Criterion { label: "Bourgeois contact, expansion, epsilon scaling", limit: None, run: bourgeois },
        Criterion { label: "inverse monodromy form and isotopy", limit: None, run: inverse },
        Criterion { label: "spinning-field flows and monodromy", limit: Some(Duration::from_secs(300)), run: flows },
        Criterion { label: "Dehn twist identities", limit: None, run: dehn_twist },
        Criterion { label: "ideal Liouville domains and hypersurface", limit: None, run: ideal_liouville },
        Criterion { label: "subcritical filling and Weinstein factors", limit: None, run: subcritical },
        Criterion { label: "weak-filling polynomial", limit: None, run: filling },
        Criterion { label: "pre-Lagrangian and loop straightening", limit: None, run: prelagrangian },
    ];
    let mut all = true;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        all &= report_line(i + 1, c.label, &outcome, start.elapsed(), c.limit);
    }
    let (outcome, once) = determinism();
    all &= report_line(11, "deterministic full suite", &outcome, once, Some(Duration::from_secs(900)));
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
