//! Echo analysis: reading geometry out of pointwise spectral data.
//!
//! Overview
//! - `SpectralData` wraps what a pointwise observer can know: either exact
//!   flat eigendata (surface plus observation point) or synthetic smoothed
//!   trace values generated from a loop census.
//! - `detect_multiplicity` estimates the multiplicity of the loop-length
//!   cluster at r by rotating the two-sided windowed spectral sum with the
//!   stationary-phase factor and averaging the top half of a frequency
//!   schedule.
//! - `synthesize_spectral_from_geometric` produces trace samples on a
//!   frequency grid directly from the windowed loop sum, so detection can be
//!   exercised on surfaces without computable eigendata.
//! - `classify_curvature` maps a curvature estimate to the constant-curvature
//!   model families; `constancy_test` decides whether pointwise level data is
//!   point-independent and produces a witness when it is not.
//! - `klein_echolocate` inverts the first nonconstant level sum of a flat
//!   Klein bottle into the canonical observation point (0, x2*) with
//!   x2* in [0, b/4].
//!
//! Design notes
//! - Synthetic samples are keyed by the exact bit patterns of the window
//!   parameters and frequency, so a round trip through detection reproduces
//!   the geometric side with no quadrature in between.
//! - The degenerate Klein level (side ratio a/b an even integer) adds a
//!   constant 4/(ab) from the lowest even-row pair on top of the constant-row
//!   density; the inversion subtracts it before solving for x2*.

use crate::geometry::{klein_canonicalize, FlatKleinSpec, HPoint, HyperbolicSurfaceSpec, Point};
use crate::loops::{looping_times, windowed_loop_sum, LoopAmplitude, LoopsError};
use crate::numerics::recognize_rational;
use crate::spectrum::{density_levels, FlatSurface, SpectrumError};
use crate::transforms::{
    smoothed_wave_spectral, TraceValue, TransformsError, Window, WindowProfile, WindowWeight,
};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Errors from echo analysis.
#[derive(Debug, Error)]
pub enum EchoError {
    #[error(transparent)]
    Transforms(#[from] TransformsError),
    #[error(transparent)]
    Loops(#[from] LoopsError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(
        "synthetic data has no sample for frequency {lambda} with window (r={r}, eps={eps})"
    )]
    MissingSyntheticSample { lambda: f64, r: f64, eps: f64 },
    #[error("inconsistent spectral data: level sum {value} is outside the attainable range")]
    InconsistentSpectralData { value: f64 },
    #[error("frequency schedule must be nonempty")]
    EmptySchedule,
}

/// Provenance of spectral data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralSource {
    /// Exact eigendata of a flat surface at a point.
    ExactFlat,
    /// Smoothed trace values synthesized from a geometric loop census.
    SyntheticFromGeometric,
}

/// Exact bit-pattern key for a (window, frequency) synthetic sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct SampleKey {
    profile: u8,
    weight: u8,
    r: u64,
    eps: u64,
    lambda: u64,
}

fn sample_key(w: &Window, lambda: f64) -> SampleKey {
    SampleKey {
        profile: match w.profile {
            WindowProfile::CompactBump => 0,
            WindowProfile::GaussianBump => 1,
        },
        weight: match w.weight {
            WindowWeight::None => 0,
            WindowWeight::SqrtT => 1,
            WindowWeight::SqrtSinh => 2,
        },
        r: w.r.to_bits(),
        eps: w.eps.to_bits(),
        lambda: lambda.to_bits(),
    }
}

#[derive(Clone, Debug)]
enum Backing {
    Flat {
        surface: FlatSurface,
        x: Point,
    },
    Synthetic {
        samples: Vec<(SampleKey, Complex64)>,
        cluster_lengths: Vec<f64>,
    },
}

/// Pointwise spectral data available to an observer.
///
/// `pairs` is an inspection prefix of (frequency, density) values; exact flat
/// data regenerates whatever range an evaluation needs, while synthetic data
/// carries no eigendata at all (the prefix is empty).
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub source: SpectralSource,
    pub pairs: Vec<(f64, f64)>,
    backing: Backing,
}

/// Default frequency extent of the inspection prefix.
const PREFIX_EXTENT: f64 = 50.0;

impl SpectralData {
    /// Exact flat eigendata observed at x.
    pub fn exact_flat(surface: FlatSurface, x: Point) -> Result<Self, EchoError> {
        let pairs = density_levels(&surface, x, PREFIX_EXTENT)?;
        Ok(SpectralData {
            source: SpectralSource::ExactFlat,
            pairs,
            backing: Backing::Flat { surface, x },
        })
    }

    /// The flat surface and point behind exact data, if any.
    pub fn flat_backing(&self) -> Option<(&FlatSurface, Point)> {
        match &self.backing {
            Backing::Flat { surface, x } => Some((surface, *x)),
            _ => None,
        }
    }

    /// Loop-length clusters known to synthetic data, if any.
    pub fn synthetic_cluster_lengths(&self) -> Option<&[f64]> {
        match &self.backing {
            Backing::Synthetic {
                cluster_lengths, ..
            } => Some(cluster_lengths),
            _ => None,
        }
    }
}

/// Smoothed wave-trace value of spectral data at a frequency: exact flat data
/// evaluates the windowed spectral sum; synthetic data looks up the sample
/// generated for exactly this (window, frequency) pair.
pub fn smoothed_wave_spectral_data(
    data: &SpectralData,
    lambda: f64,
    w: &Window,
) -> Result<TraceValue, EchoError> {
    match &data.backing {
        Backing::Flat { surface, x } => Ok(smoothed_wave_spectral(surface, *x, lambda, w)?),
        Backing::Synthetic { samples, .. } => {
            let key = sample_key(w, lambda);
            for (k, v) in samples {
                if *k == key {
                    return Ok(TraceValue {
                        value: *v,
                        truncation_bound: 0.0,
                    });
                }
            }
            Err(EchoError::MissingSyntheticSample {
                lambda,
                r: w.r,
                eps: w.eps,
            })
        }
    }
}

/// Result of a multiplicity detection run.
#[derive(Clone, Debug)]
pub struct DetectionResult {
    /// Loop length probed.
    pub r: f64,
    /// Estimated cluster multiplicity (real part of the rotated sum).
    pub estimate: f64,
    /// Largest frequency of the schedule actually used.
    pub lambda_max: f64,
    /// Window width used.
    pub eps: f64,
    /// True when the top-half estimates agree within 0.05 and the average is
    /// within 0.1 of an integer.
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Detection estimate at a single frequency: the windowed spectral sum
/// rotated by the stationary-phase factor,
/// Re[ sqrt(2 pi) e^{-i pi/4 + i lambda r} lambda^{-1/2} S(lambda) ].
pub fn detection_estimate(s: Complex64, lambda: f64, r: f64) -> f64 {
    ((2.0 * PI).sqrt() * Complex64::cis(lambda * r - PI / 4.0) / lambda.sqrt() * s).re
}

/// Estimates the multiplicity of the loop-length cluster at r from smoothed
/// spectral data, averaging the top half of an ascending frequency schedule.
///
/// The window is the compact bump at (r, eps) with the provided weight
/// (sqrt sinh t for hyperbolic data, sqrt t for flat). The caller chooses eps
/// small enough to isolate one length cluster; synthetic data knows its
/// clusters and flags a non-isolating window in the warnings.
pub fn detect_multiplicity(
    data: &SpectralData,
    r: f64,
    eps: f64,
    schedule: &[f64],
    weight: WindowWeight,
) -> Result<DetectionResult, EchoError> {
    if schedule.is_empty() {
        return Err(EchoError::EmptySchedule);
    }
    let w = Window::new(WindowProfile::CompactBump, r, eps, weight)?;
    let mut lambdas: Vec<f64> = schedule.to_vec();
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut warnings = Vec::new();
    if let Some(clusters) = data.synthetic_cluster_lengths() {
        let inside = clusters
            .iter()
            .filter(|&&l| l > r - eps && l < r + eps)
            .count();
        if inside > 1 {
            warnings.push(format!(
                "window (r={r}, eps={eps}) does not isolate a single length cluster ({inside} inside)"
            ));
        }
    }
    let mut estimates = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let s = smoothed_wave_spectral_data(data, lambda, &w)?;
        estimates.push(detection_estimate(s.value, lambda, r));
    }
    let top = estimates.len().div_ceil(2);
    let top_slice = &estimates[estimates.len() - top..];
    let mean: f64 = top_slice.iter().sum::<f64>() / top as f64;
    let spread = top_slice
        .iter()
        .map(|e| (e - mean).abs())
        .fold(0.0, f64::max)
        * 2.0;
    let stabilized = spread < 0.05;
    if !stabilized {
        warnings.push(format!(
            "estimates did not stabilize across the schedule (spread {spread:.3})"
        ));
    }
    let near_integer = (mean - mean.round()).abs() < 0.1;
    Ok(DetectionResult {
        r,
        estimate: mean,
        lambda_max: *lambdas.last().unwrap(),
        eps,
        converged: stabilized && near_integer,
        warnings,
    })
}

/// Synthesizes smoothed trace samples from the loop census of a hyperbolic
/// surface: for every window and frequency, the sample is the exact windowed
/// loop sum. Detection on the result reproduces cluster multiplicities by
/// construction.
pub fn synthesize_spectral_from_geometric(
    spec: &HyperbolicSurfaceSpec,
    x: HPoint,
    lambdas: &[f64],
    windows: &[Window],
) -> Result<SpectralData, EchoError> {
    let mut samples = Vec::with_capacity(lambdas.len() * windows.len());
    let mut cluster_lengths: Vec<f64> = Vec::new();
    for w in windows {
        let (_, t_hi) = w.support();
        let table = looping_times(spec, x, t_hi)?;
        for e in &table.entries {
            if !cluster_lengths
                .iter()
                .any(|l| (l - e.length).abs() < 1e-8)
            {
                cluster_lengths.push(e.length);
            }
        }
        let entries: Vec<(f64, f64)> = table
            .entries
            .iter()
            .map(|e| (e.length, e.multiplicity as f64))
            .collect();
        for &lambda in lambdas {
            let value = windowed_loop_sum(&entries, LoopAmplitude::HyperbolicSinh, lambda, w);
            samples.push((sample_key(w, lambda), value));
        }
    }
    cluster_lengths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(SpectralData {
        source: SpectralSource::SyntheticFromGeometric,
        pairs: Vec::new(),
        backing: Backing::Synthetic {
            samples,
            cluster_lengths,
        },
    })
}

/// Constant-curvature families a curvature estimate can fall into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureClass {
    /// Positive curvature: round sphere or projective plane.
    SphereOrProjectivePlane,
    /// Curvature zero within tolerance: flat torus or Klein bottle.
    TorusOrKleinBottle,
    /// Negative curvature: hyperbolic quotient.
    HyperbolicQuotient,
}

/// Classifies a curvature estimate with a symmetric dead band of `tol`.
pub fn classify_curvature(k_hat: f64, tol: f64) -> CurvatureClass {
    if k_hat.abs() <= tol {
        CurvatureClass::TorusOrKleinBottle
    } else if k_hat > 0.0 {
        CurvatureClass::SphereOrProjectivePlane
    } else {
        CurvatureClass::HyperbolicQuotient
    }
}

/// Witness of point dependence: a level where two points disagree.
#[derive(Clone, Debug)]
pub struct ConstancyWitness {
    pub level: f64,
    pub point_a: Point,
    pub point_b: Point,
    pub value_a: f64,
    pub value_b: f64,
}

#[derive(Clone, Debug)]
pub struct ConstancyResult {
    pub constant: bool,
    pub witness: Option<ConstancyWitness>,
}

/// Density-scale guard for level-sum comparisons: canonical-equivalent points
/// may differ by rounding in the reduction, never by more than this fraction
/// of the density scale, while genuine disagreements are macroscopic.
const CONSTANCY_GUARD: f64 = 1e-9;

/// Tests whether per-level density sums are independent of the observation
/// point, over all levels up to `lambda_max`. Returns the first disagreeing
/// (level, point pair) as a witness.
pub fn constancy_test(
    surface: &FlatSurface,
    lambda_max: f64,
    points: &[Point],
) -> Result<ConstancyResult, EchoError> {
    let (a, b) = surface.sides();
    let guard = CONSTANCY_GUARD * (4.0 / (a * b)).max(1.0);
    let mut per_point: Vec<Vec<(f64, f64)>> = Vec::with_capacity(points.len());
    for p in points {
        // Canonicalize Klein points first so orbit-equivalent inputs produce
        // bitwise-identical closed forms.
        let q = match surface {
            FlatSurface::Klein(k) => klein_canonicalize(k, *p),
            FlatSurface::Torus(_) => *p,
        };
        per_point.push(density_levels(surface, q, lambda_max)?);
    }
    if let Some(first) = per_point.first() {
        for i in 1..per_point.len() {
            debug_assert_eq!(first.len(), per_point[i].len());
        }
        for li in 0..first.len() {
            for i in 0..points.len() {
                for j in (i + 1)..points.len() {
                    let va = per_point[i][li].1;
                    let vb = per_point[j][li].1;
                    if (va - vb).abs() > guard {
                        return Ok(ConstancyResult {
                            constant: false,
                            witness: Some(ConstancyWitness {
                                level: first[li].0,
                                point_a: points[i],
                                point_b: points[j],
                                value_a: va,
                                value_b: vb,
                            }),
                        });
                    }
                }
            }
        }
    }
    Ok(ConstancyResult {
        constant: true,
        witness: None,
    })
}

/// Result of inverting Klein-bottle level data into a position.
#[derive(Clone, Copy, Debug)]
pub struct EcholocationResult {
    /// Canonical recovered point (0, x2*) with x2* in [0, b/4].
    pub point: Point,
    /// Whether the first constant-row level also carries an even-row pair
    /// (side ratio a/b an even integer), whose constant offset was removed.
    pub degenerate_level: bool,
    /// Whether the side ratio was recognized exactly; when false the level
    /// was treated as nondegenerate by fallback.
    pub ratio_recognized: bool,
}

/// Recovers the canonical observation point of a flat Klein bottle from the
/// total density of the level at frequency 2 pi / b:
/// S = (4/ab) cos^2(2 pi x2 / b) + offset, where the offset 4/(ab) appears
/// exactly when a/b is an even integer. Values outside the attainable range
/// (beyond a 1e-7 slack) are rejected as inconsistent.
pub fn klein_echolocate(
    spec: &FlatKleinSpec,
    level_sum_value: f64,
) -> Result<EcholocationResult, EchoError> {
    let ab = spec.a * spec.b;
    let ratio = spec.a / spec.b;
    let recognized = recognize_rational(ratio, 10_000, 1e-12 * ratio.max(1.0));
    let (degenerate, ratio_recognized) = match recognized {
        Some((p, 1)) => (p > 0 && p % 2 == 0, true),
        Some(_) => (false, true),
        None => (false, false),
    };
    let offset = if degenerate { 4.0 / ab } else { 0.0 };
    let c = (level_sum_value - offset) * ab / 4.0;
    let slack = 1e-7;
    if !(-slack..=1.0 + slack).contains(&c) {
        return Err(EchoError::InconsistentSpectralData {
            value: level_sum_value,
        });
    }
    let c = c.clamp(0.0, 1.0);
    let x2 = spec.b / (2.0 * PI) * c.sqrt().acos();
    Ok(EcholocationResult {
        point: Point::new(0.0, x2),
        degenerate_level: degenerate,
        ratio_recognized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::spectrum::level_sum;

    #[test]
    fn classify_bands() {
        assert_eq!(
            classify_curvature(0.0, 1e-6),
            CurvatureClass::TorusOrKleinBottle
        );
        assert_eq!(
            classify_curvature(-5e-7, 1e-6),
            CurvatureClass::TorusOrKleinBottle
        );
        assert_eq!(
            classify_curvature(0.5, 1e-6),
            CurvatureClass::SphereOrProjectivePlane
        );
        assert_eq!(
            classify_curvature(-1.0, 1e-6),
            CurvatureClass::HyperbolicQuotient
        );
    }

    #[test]
    fn constancy_holds_on_torus() {
        let t = FlatSurface::Torus(presets::torus_unit());
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(0.31, 0.77),
            Point::new(0.99, 0.01),
        ];
        let res = constancy_test(&t, 15.0, &pts).unwrap();
        assert!(res.constant && res.witness.is_none());
    }

    #[test]
    fn constancy_fails_on_klein_with_witness() {
        let k = FlatSurface::Klein(presets::klein_2_2());
        let pts = [Point::new(0.0, 0.0), Point::new(0.0, 0.5)];
        let res = constancy_test(&k, 4.0, &pts).unwrap();
        assert!(!res.constant);
        let w = res.witness.unwrap();
        assert!((w.level - PI).abs() < 1e-9, "witness level {}", w.level);
        assert!((w.value_a - w.value_b).abs() > 0.5);
    }

    #[test]
    fn constancy_treats_equivalent_klein_points_as_equal() {
        let k = FlatSurface::Klein(presets::klein_2_1());
        // x2 = 0.6 and x2 = 0.1 are glide-orbit equivalent.
        let pts = [Point::new(0.0, 0.6), Point::new(0.4, 0.1)];
        let res = constancy_test(&k, 20.0, &pts).unwrap();
        assert!(res.constant, "witness: {:?}", res.witness);
    }

    #[test]
    fn echolocate_pinned_values() {
        let k22 = presets::klein_2_2();
        let r = klein_echolocate(&k22, 1.0).unwrap();
        assert!(!r.degenerate_level && r.ratio_recognized);
        assert!((r.point.x2 - 0.0).abs() < 1e-12);
        let r = klein_echolocate(&k22, 0.0).unwrap();
        assert!((r.point.x2 - 0.5).abs() < 1e-12);
        let r = klein_echolocate(&k22, 0.5).unwrap();
        assert!((r.point.x2 - 0.25).abs() < 1e-12);
        assert!(klein_echolocate(&k22, 1.2).is_err());
        assert!(klein_echolocate(&k22, -0.1).is_err());
    }

    #[test]
    fn echolocate_round_trip_degenerate() {
        let spec = presets::klein_2_1();
        let surface = FlatSurface::Klein(spec);
        let lambda0 = 2.0 * PI / spec.b;
        for x2 in [0.0, 0.07, 0.13, 0.25] {
            let x = Point::new(0.66, x2);
            let s = level_sum(&surface, x, lambda0).unwrap();
            let r = klein_echolocate(&spec, s).unwrap();
            assert!(r.degenerate_level);
            let canon = klein_canonicalize(&spec, x);
            assert!(
                (r.point.x2 - canon.x2).abs() < 1e-9,
                "x2={x2}: got {}, want {}",
                r.point.x2,
                canon.x2
            );
        }
    }

    #[test]
    fn synthetic_round_trip_is_exact() {
        let spec = presets::genus2_octagon();
        let systole = presets::octagon_systole();
        let w = Window::new(
            WindowProfile::CompactBump,
            systole,
            0.1,
            WindowWeight::SqrtSinh,
        )
        .unwrap();
        let lambdas = [100.0, 200.0];
        let data =
            synthesize_spectral_from_geometric(&spec, spec.basepoint_lift, &lambdas, &[w])
                .unwrap();
        assert_eq!(data.source, SpectralSource::SyntheticFromGeometric);
        let res =
            detect_multiplicity(&data, systole, 0.1, &lambdas, WindowWeight::SqrtSinh).unwrap();
        assert!(
            (res.estimate - 8.0).abs() < 1e-9,
            "estimate {}",
            res.estimate
        );
        assert!(res.converged);
        assert!(res.warnings.is_empty());
    }

    #[test]
    fn synthetic_missing_sample_is_an_error() {
        let spec = presets::genus2_octagon();
        let w = Window::new(WindowProfile::CompactBump, 3.0, 0.1, WindowWeight::SqrtSinh)
            .unwrap();
        let data = synthesize_spectral_from_geometric(
            &spec,
            spec.basepoint_lift,
            &[100.0],
            &[w],
        )
        .unwrap();
        let err = smoothed_wave_spectral_data(&data, 150.0, &w);
        assert!(matches!(err, Err(EchoError::MissingSyntheticSample { .. })));
    }

    #[test]
    fn detect_on_flat_exact_data() {
        let data = SpectralData::exact_flat(
            FlatSurface::Torus(presets::torus_unit()),
            Point::new(0.0, 0.0),
        )
        .unwrap();
        let res =
            detect_multiplicity(&data, 1.0, 0.2, &[100.0, 200.0], WindowWeight::SqrtT).unwrap();
        assert!(
            (res.estimate - 4.0).abs() < 0.1,
            "estimate {}",
            res.estimate
        );
        assert!(res.converged);
        assert_eq!(res.lambda_max, 200.0);
    }

    #[test]
    fn empty_schedule_rejected() {
        let data = SpectralData::exact_flat(
            FlatSurface::Torus(presets::torus_unit()),
            Point::new(0.0, 0.0),
        )
        .unwrap();
        assert!(matches!(
            detect_multiplicity(&data, 1.0, 0.2, &[], WindowWeight::SqrtT),
            Err(EchoError::EmptySchedule)
        ));
    }
}
