//! Acceptance gate: nine end-to-end criteria, each printing one verdict line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines;
//! the single test fails if any criterion fails, after all nine have run.

mod common;

use echogeo::echo::{
    constancy_test, detect_multiplicity, klein_echolocate, synthesize_spectral_from_geometric,
    SpectralData,
};
use echogeo::geometry::{klein_canonicalize, HPoint, MobiusElement, Point};
use echogeo::loops::{
    looping_times, shortest_loop, translation_length, FlatDeckSpec, LoopSpace,
};
use echogeo::presets;
use echogeo::spectrum::{level_sum, levels, FlatSurface};
use echogeo::transforms::{
    curvature_estimate, smoothed_wave_spectral, SpectralQuadrature, Window, WindowProfile,
    WindowWeight,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

fn run_criterion(
    index: usize,
    title: &str,
    limit_s: f64,
    f: impl FnOnce() -> Result<String, String>,
) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) if elapsed <= limit_s => {
            println!("criterion {index}: PASS - {title} ({detail}; {elapsed:.2}s)");
            true
        }
        Ok(detail) => {
            println!(
                "criterion {index}: FAIL - {title} (passed checks but took {elapsed:.2}s > {limit_s}s; {detail})"
            );
            false
        }
        Err(reason) => {
            println!("criterion {index}: FAIL - {title} ({reason}; {elapsed:.2}s)");
            false
        }
    }
}

fn criterion_1_level_closed_form() -> Result<String, String> {
    let spec = presets::klein_2_2();
    let surface = FlatSurface::Klein(spec);
    let (a, b) = (spec.a, spec.b);
    let lambda0 = 2.0 * PI / b;
    // Normalization from the quadrature oracle: the level integrates to
    // 2 x (members) over the covering rectangle, so the cos^2 amplitude is
    // integral * 2 / (a b).
    let (lv, _) = levels(&surface, lambda0 + 0.5).map_err(|e| e.to_string())?;
    lv.iter()
        .find(|l| (l.lambda - lambda0).abs() < 1e-9)
        .ok_or("first nonconstant level not found")?;
    let integral = common::integrate_2d(
        |x1, x2| level_sum(&surface, Point::new(x1, x2), lambda0).unwrap(),
        a,
        b,
        24,
        24,
    );
    let c_fit = integral * 2.0 / (a * b);
    let mut max_dev = 0.0f64;
    for k in 0..100 {
        let x2 = b * k as f64 / 100.0;
        let s = level_sum(&surface, Point::new(0.3, x2), lambda0).map_err(|e| e.to_string())?;
        let closed = c_fit * (2.0 * PI * x2 / b).cos().powi(2);
        max_dev = max_dev.max((s - closed).abs());
    }
    if max_dev >= 1e-10 {
        return Err(format!("max deviation {max_dev:.3e} >= 1e-10"));
    }
    if (c_fit - 4.0 / (a * b)).abs() >= 1e-10 {
        return Err(format!("fitted amplitude {c_fit} differs from 4/ab"));
    }
    Ok(format!(
        "amplitude {c_fit:.12}, max closed-form deviation {max_dev:.2e}"
    ))
}

fn criterion_2_degenerate_offset() -> Result<String, String> {
    let spec = presets::klein_2_1();
    let surface = FlatSurface::Klein(spec);
    let (a, b) = (spec.a, spec.b);
    let lambda0 = 2.0 * PI / b;
    let c = 4.0 / (a * b);
    let mut offsets = Vec::with_capacity(100);
    for k in 0..100 {
        let x2 = b * k as f64 / 100.0;
        let s = level_sum(&surface, Point::new(0.7, x2), lambda0).map_err(|e| e.to_string())?;
        offsets.push(s - c * (2.0 * PI * x2 / b).cos().powi(2));
    }
    let lo = offsets.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = offsets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo >= 1e-10 {
        return Err(format!("offset varies by {:.3e}", hi - lo));
    }
    if lo <= 0.0 {
        return Err(format!("offset {lo} is not positive"));
    }
    // The constant equals the x2-independent row mass at this level: the
    // lowest translation-row pair, 4/(a b) in the quadrature normalization.
    if (lo - 4.0 / (a * b)).abs() >= 1e-10 {
        return Err(format!("offset {lo} differs from the constant-row mass"));
    }
    Ok(format!("constant offset {lo:.12}"))
}

fn criterion_3_echolocation_round_trip() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for spec in [
        presets::klein_2_1(),
        presets::klein_2_2(),
        presets::klein_4_1(),
    ] {
        let surface = FlatSurface::Klein(spec);
        let lambda0 = 2.0 * PI / spec.b;
        for _ in 0..50 {
            let p = Point::new(
                rng.random_range(0.0..spec.a),
                rng.random_range(0.0..spec.b),
            );
            let s = level_sum(&surface, p, lambda0).map_err(|e| e.to_string())?;
            let rec = klein_echolocate(&spec, s).map_err(|e| e.to_string())?;
            let canon = klein_canonicalize(&spec, p);
            let err = (rec.point.x2 - canon.x2).abs();
            worst = worst.max(err);
            if err >= 1e-9 {
                return Err(format!(
                    "a={} b={} x2={}: recovered {} vs canonical {} (err {err:.3e})",
                    spec.a, spec.b, p.x2, rec.point.x2, canon.x2
                ));
            }
        }
    }
    Ok(format!("150 round trips, worst error {worst:.2e}"))
}

fn criterion_4_constancy() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut witnesses = 0;
    for (name, surface) in [
        ("torus_unit", FlatSurface::Torus(presets::torus_unit())),
        ("torus_2_1", FlatSurface::Torus(presets::torus_2_1())),
        ("klein_2_1", FlatSurface::Klein(presets::klein_2_1())),
        ("klein_2_2", FlatSurface::Klein(presets::klein_2_2())),
        ("klein_4_1", FlatSurface::Klein(presets::klein_4_1())),
    ] {
        let (a, b) = surface.sides();
        let mut points = vec![Point::new(0.0, 0.0), Point::new(0.0, b / 4.0)];
        for _ in 0..4 {
            points.push(Point::new(
                rng.random_range(0.0..a),
                rng.random_range(0.0..b),
            ));
        }
        let res = constancy_test(&surface, 50.0, &points).map_err(|e| e.to_string())?;
        match surface {
            FlatSurface::Torus(_) => {
                if !res.constant {
                    return Err(format!("{name} reported non-constant"));
                }
            }
            FlatSurface::Klein(_) => {
                let Some(w) = res.witness else {
                    return Err(format!("{name} reported constant"));
                };
                // Validate the witness independently: both points must carry
                // this exact level, with macroscopically different sums.
                let sa = level_sum(&surface, w.point_a, w.level).map_err(|e| e.to_string())?;
                let sb = level_sum(&surface, w.point_b, w.level).map_err(|e| e.to_string())?;
                if (sa - sb).abs() <= 1e-6 {
                    return Err(format!(
                        "{name} witness at level {} is not a real disagreement",
                        w.level
                    ));
                }
                if w.level > 50.0 {
                    return Err(format!("{name} witness level {} beyond cutoff", w.level));
                }
                witnesses += 1;
            }
        }
    }
    Ok(format!(
        "2 torus presets constant, 3 klein presets witnessed ({witnesses} witnesses verified)"
    ))
}

fn criterion_5_curvature() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut worst = 0.0f64;
    for (name, surface) in [
        ("torus_unit", FlatSurface::Torus(presets::torus_unit())),
        ("torus_2_1", FlatSurface::Torus(presets::torus_2_1())),
        ("klein_2_1", FlatSurface::Klein(presets::klein_2_1())),
        ("klein_2_2", FlatSurface::Klein(presets::klein_2_2())),
        ("klein_4_1", FlatSurface::Klein(presets::klein_4_1())),
    ] {
        let (a, b) = surface.sides();
        for _ in 0..5 {
            let p = Point::new(rng.random_range(0.0..a), rng.random_range(0.0..b));
            let k = curvature_estimate(&surface, p).map_err(|e| e.to_string())?;
            worst = worst.max(k.abs());
            if k.abs() >= 1e-6 {
                return Err(format!(
                    "{name} at ({}, {}): |curvature| = {:.3e}",
                    p.x1,
                    p.x2,
                    k.abs()
                ));
            }
        }
    }
    Ok(format!("25 estimates, worst |curvature| {worst:.2e}"))
}

fn criterion_6_pre_trace_asymptotics() -> Result<String, String> {
    let surface = FlatSurface::Torus(presets::torus_unit());
    let deck = FlatDeckSpec::of_surface(&surface);
    let x = Point::new(0.0, 0.0);
    let w = Window::new(WindowProfile::CompactBump, 1.0, 0.2, WindowWeight::SqrtT)
        .map_err(|e| e.to_string())?;
    let mut errs = Vec::new();
    for lambda in [100.0, 200.0, 400.0] {
        let s = smoothed_wave_spectral(&surface, x, lambda, &w).map_err(|e| e.to_string())?;
        let g = echogeo::loops::geometric_side_flat(&deck, x, lambda, &w)
            .map_err(|e| e.to_string())?;
        let err = (s.value - g.value).norm();
        let scaled = err * lambda.sqrt();
        if scaled > 3.0 {
            return Err(format!(
                "lambda {lambda}: error x sqrt(lambda) = {scaled:.4} > 3"
            ));
        }
        errs.push(err);
    }
    let r1 = errs[0] / errs[1];
    let r2 = errs[1] / errs[2];
    for (pair, r) in [("100->200", r1), ("200->400", r2)] {
        if !(1.6..=2.4).contains(&r) {
            return Err(format!("doubling ratio {pair} = {r:.4} outside [1.6, 2.4]"));
        }
    }
    Ok(format!(
        "errors {:.4}/{:.4}/{:.4}, ratios {r1:.3} and {r2:.3}",
        errs[0], errs[1], errs[2]
    ))
}

fn criterion_7_detector_integrality() -> Result<String, String> {
    let data = SpectralData::exact_flat(
        FlatSurface::Torus(presets::torus_unit()),
        Point::new(0.0, 0.0),
    )
    .map_err(|e| e.to_string())?;
    let schedule = [100.0, 200.0, 400.0, 800.0];
    let hit = detect_multiplicity(&data, 1.0, 0.2, &schedule, WindowWeight::SqrtT)
        .map_err(|e| e.to_string())?;
    if (hit.estimate - 4.0).abs() >= 0.1 || !hit.converged {
        return Err(format!(
            "r=1 estimate {} (converged {})",
            hit.estimate, hit.converged
        ));
    }
    // The support (1.02, 1.38) of this window contains no loop length.
    let gap = detect_multiplicity(&data, 1.2, 0.18, &schedule, WindowWeight::SqrtT)
        .map_err(|e| e.to_string())?;
    if gap.estimate.abs() >= 0.1 {
        return Err(format!("gap estimate {} not within 0.1 of 0", gap.estimate));
    }
    Ok(format!(
        "r=1: {:.4}; gap window: {:.2e}",
        hit.estimate, gap.estimate
    ))
}

fn criterion_8_hyperbolic_census() -> Result<String, String> {
    let spec = presets::genus2_octagon();
    let base = spec.basepoint_lift;

    // (a) shortest loop against the independent word-enumeration oracle.
    let shortest = shortest_loop(&LoopSpace::Hyperbolic {
        spec: &spec,
        basepoint: base,
    })
    .map_err(|e| e.to_string())?;
    let oracle = common::reduced_words_min_displacement(&spec.generators, base, 6);
    if (shortest - oracle).abs() >= 1e-6 {
        return Err(format!("shortest {shortest} vs word oracle {oracle}"));
    }

    // (b) synthesized detection reproduces every tabulated multiplicity.
    let mut tabulated: Vec<(HPoint, f64, f64, u32)> = vec![
        // On-axis systolic cluster.
        (base, presets::octagon_systole(), 0.2, 8),
    ];
    let off = presets::octagon_off_axis_point();
    for (len, mult) in [
        (3.092693859705f64, 4u32),
        (3.248484879670, 4),
        (3.505962823007, 2),
        (3.771700883457, 4),
    ] {
        tabulated.push((off, len, 0.07, mult));
    }
    // Cross-check the tabulated clusters against a fresh census first.
    for &(pt, len, _, mult) in &tabulated {
        let table = looping_times(&spec, pt, len + 0.02).map_err(|e| e.to_string())?;
        let found = table
            .entries
            .iter()
            .find(|e| (e.length - len).abs() < 1e-6)
            .ok_or_else(|| format!("census missing cluster at {len}"))?;
        if found.multiplicity != mult {
            return Err(format!(
                "census multiplicity {} at {len}, tabulated {mult}",
                found.multiplicity
            ));
        }
    }
    let schedule = [150.0, 300.0];
    for &(pt, len, eps, mult) in &tabulated {
        let w = Window::new(WindowProfile::CompactBump, len, eps, WindowWeight::SqrtSinh)
            .map_err(|e| e.to_string())?;
        let data = synthesize_spectral_from_geometric(&spec, pt, &schedule, &[w])
            .map_err(|e| e.to_string())?;
        let res = detect_multiplicity(&data, len, eps, &schedule, WindowWeight::SqrtSinh)
            .map_err(|e| e.to_string())?;
        if (res.estimate - mult as f64).abs() >= 1e-9 {
            return Err(format!(
                "cluster {len}: estimate {} vs multiplicity {mult}",
                res.estimate
            ));
        }
    }

    // (c) the shortest looping time distinguishes the two observation points.
    let off_shortest = shortest_loop(&LoopSpace::Hyperbolic {
        spec: &spec,
        basepoint: off,
    })
    .map_err(|e| e.to_string())?;
    if (off_shortest - shortest).abs() <= 0.01 {
        return Err(format!(
            "on-axis {shortest} vs off-axis {off_shortest} differ by <= 0.01"
        ));
    }
    Ok(format!(
        "systole {shortest:.9}, 5 clusters detected exactly, off-axis shift {:.4}",
        off_shortest - shortest
    ))
}

fn criterion_9_invariant_suite() -> Result<String, String> {
    // Orbit invariance of Klein level sums.
    let spec = presets::klein_2_1();
    let surface = FlatSurface::Klein(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let lambda0 = 2.0 * PI / spec.b;
    for _ in 0..20 {
        let p = Point::new(
            rng.random_range(0.0..spec.a),
            rng.random_range(0.0..spec.b),
        );
        let glide = Point::new(p.x1 + spec.a / 2.0, -p.x2);
        let sp = level_sum(&surface, p, lambda0).map_err(|e| e.to_string())?;
        let sg = level_sum(&surface, glide, lambda0).map_err(|e| e.to_string())?;
        if (sp - sg).abs() >= 1e-9 {
            return Err(format!("orbit invariance broken at x2 = {}", p.x2));
        }
    }

    // Partition independence of the batched spectral evaluator.
    let w = Window::new(WindowProfile::CompactBump, 1.5, 0.2, WindowWeight::SqrtT)
        .map_err(|e| e.to_string())?;
    let lvl: Vec<(f64, f64)> = (0..800)
        .map(|_| (rng.random_range(0.0..60.0), rng.random_range(0.0..4.0)))
        .collect();
    let grid = SpectralQuadrature::new(&w, 40.0, 60.0, 1.0);
    let whole = grid.evaluate(&lvl);
    let split = grid.evaluate(&lvl[..311]) + grid.evaluate(&lvl[311..]);
    if (whole - split).norm() >= 1e-12 * whole.norm().max(1.0) {
        return Err(format!(
            "partition dependence {:.3e}",
            (whole - split).norm()
        ));
    }

    // Normalization by quadrature on the lowest levels.
    let (lv, _) = levels(&surface, 8.0).map_err(|e| e.to_string())?;
    for level in &lv {
        let integral = common::integrate_2d(
            |x1, x2| level_sum(&surface, Point::new(x1, x2), level.lambda).unwrap(),
            spec.a,
            spec.b,
            24,
            24,
        );
        let expect = 2.0 * level.members.len() as f64;
        if (integral - expect).abs() >= 1e-8 * expect {
            return Err(format!(
                "normalization off at level {}: {integral} vs {expect}",
                level.lambda
            ));
        }
    }

    // Translation length bounds every displacement.
    let octagon = presets::genus2_octagon();
    let mut letters: Vec<MobiusElement> = Vec::new();
    for g in &octagon.generators {
        letters.push(g.clone());
        letters.push(g.inverse());
    }
    let mut checked = 0;
    while checked < 50 {
        let len = rng.random_range(1..=3usize);
        let mut g = MobiusElement::identity();
        let mut last = usize::MAX;
        for _ in 0..len {
            let mut i = rng.random_range(0..8usize);
            while last != usize::MAX && i == (last ^ 1) {
                i = rng.random_range(0..8usize);
            }
            g = g.compose(&letters[i]);
            last = i;
        }
        let Ok(ell) = translation_length(&g) else {
            continue;
        };
        let d = echogeo::geometry::hyperbolic_distance(
            octagon.basepoint_lift,
            echogeo::geometry::mobius_apply(&g, octagon.basepoint_lift),
        );
        if d < ell - 1e-9 {
            return Err(format!("displacement {d} below translation length {ell}"));
        }
        checked += 1;
    }

    Ok("orbit invariance, partition independence, normalization, translation bound".into())
}

#[test]
fn acceptance_criteria() {
    let mut all = true;
    all &= run_criterion(
        1,
        "Klein level sum follows the cos^2 closed form",
        1.0,
        criterion_1_level_closed_form,
    );
    all &= run_criterion(
        2,
        "degenerate side ratio adds a constant offset",
        1.0,
        criterion_2_degenerate_offset,
    );
    all &= run_criterion(
        3,
        "echolocation round trip on Klein presets",
        5.0,
        criterion_3_echolocation_round_trip,
    );
    all &= run_criterion(
        4,
        "torus constancy and Klein non-constancy",
        10.0,
        criterion_4_constancy,
    );
    all &= run_criterion(
        5,
        "heat-trace curvature vanishes on flat surfaces",
        30.0,
        criterion_5_curvature,
    );
    all &= run_criterion(
        6,
        "pre-trace error decays like one over sqrt(frequency)",
        120.0,
        criterion_6_pre_trace_asymptotics,
    );
    all &= run_criterion(
        7,
        "detector integrality on exact torus data",
        120.0,
        criterion_7_detector_integrality,
    );
    all &= run_criterion(
        8,
        "hyperbolic loop census and synthetic detection",
        300.0,
        criterion_8_hyperbolic_census,
    );
    all &= run_criterion(
        9,
        "module invariant suite",
        600.0,
        criterion_9_invariant_suite,
    );
    assert!(all, "one or more acceptance criteria failed");
}
