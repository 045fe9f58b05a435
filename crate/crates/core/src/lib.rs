//! Pointwise spectral geometry on flat and hyperbolic surfaces.
//!
//! The crate computes what an observer sitting at a single point of a closed
//! surface can learn from the Laplace spectrum weighted by eigenfunction
//! mass at that point: smoothed wave traces, heat traces, loop-length
//! detection, curvature estimates, and (for flat Klein bottles) recovery of
//! the observation point itself.
//!
//! Module map
//! - [`numerics`]: compensated summation, Gauss-Legendre and adaptive
//!   quadrature, truncated Taylor jets, rational recognition.
//! - [`geometry`]: upper half-plane points and isometries, flat surface
//!   specifications, fundamental-domain reduction and canonicalization.
//! - [`spectrum`]: exact eigendata of flat tori and Klein bottles, level
//!   grouping, pointwise Weyl counts, shell mass bounds.
//! - [`transforms`]: window profiles and their transforms, certified tail
//!   bounds, the two-sided windowed spectral sum, heat traces and the
//!   curvature estimate.
//! - [`loops`]: loop censuses through a point (hyperbolic deck enumeration
//!   and flat closed forms) and the windowed geometric side.
//! - [`echo`]: multiplicity detection, synthetic spectral data, curvature
//!   classification, constancy tests, Klein echolocation.
//! - [`presets`]: named example surfaces, including a genus-2 octagon
//!   quotient with an 8-fold systolic cluster.
//! - [`config`] and [`cli`]: file-driven command line front end.

pub mod cli;
pub mod config;
pub mod echo;
pub mod geometry;
pub mod loops;
pub mod numerics;
pub mod presets;
pub mod spectrum;
pub mod transforms;

pub use echo::{
    classify_curvature, constancy_test, detect_multiplicity, klein_echolocate,
    synthesize_spectral_from_geometric, CurvatureClass, DetectionResult, SpectralData,
};
pub use geometry::{
    hyperbolic_distance, klein_canonicalize, mobius_apply, FlatKleinSpec, FlatTorusSpec, HPoint,
    HyperbolicSurfaceSpec, MobiusElement, Point,
};
pub use loops::{
    enumerate_deck, flat_looping_times, geometric_side, geometric_side_flat, looping_times,
    shortest_loop, translation_length, FlatDeckSpec, LoopSpace, LoopTable,
};
pub use spectrum::{level_sum, levels, pointwise_weyl, surface_modes, FlatSurface, Level};
pub use transforms::{
    curvature_estimate, heat_trace, smoothed_wave_spectral, window_transform, TraceValue, Window,
    WindowProfile, WindowWeight,
};
