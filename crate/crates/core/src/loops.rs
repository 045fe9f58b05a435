//! Closed-loop censuses: deck-group enumeration on hyperbolic surfaces,
//! image-lattice enumeration on flat models, and the windowed loop sums that
//! form the geometric side of smoothed wave traces.
//!
//! Overview
//! - `enumerate_deck` walks the deck group breadth-first by word length,
//!   keeping elements whose basepoint displacement stays within a pruning
//!   radius and deduplicating matrices up to sign. The census is certified
//!   complete when two successive word lengths contribute nothing new inside
//!   the requested radius (or the frontier closes entirely); hitting the
//!   word-length cap without certification is an error carrying the partial
//!   table.
//! - `looping_times` clusters displacements into a `LoopTable` (lengths,
//!   multiplicities, representative words) and warns on near-degenerate
//!   clusters.
//! - `translation_length` gives the geodesic length 2 arccosh(|tr|/2) of a
//!   hyperbolic element and rejects non-hyperbolic ones.
//! - `geometric_side` / `geometric_side_flat` evaluate the single-frequency
//!   loop expansion sqrt(lambda/2pi) e^{i pi/4} sum_gamma chi_hat(d)
//!   e^{-i lambda d} / sqrt(sinh d) (flat models use 1/sqrt(d)), the quantity
//!   the windowed spectral sum converges to at high frequency.
//!
//! Design notes
//! - Displacement clustering uses gaps of 1e-8; clusters closer than ten
//!   times that threshold trigger a "near-degenerate lengths" warning since
//!   windowed detection cannot separate them.
//! - Flat Klein-bottle displacements depend on the point through x2 only:
//!   glide images sit at ((k + 1/2) a)^2 + (n b - 2 x2)^2.

use crate::geometry::{
    hyperbolic_distance, mobius_apply, HPoint, HyperbolicSurfaceSpec, MobiusElement, Point,
};
use crate::numerics::KahanComplex;
use crate::transforms::{TraceValue, Window};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use thiserror::Error;

/// Displacements closer than this are one cluster.
pub const LENGTH_CLUSTER_TOL: f64 = 1e-8;

/// Word-length cap for the breadth-first census.
pub const WORD_LENGTH_CAP: usize = 64;

/// Errors from loop enumeration and geometric sums.
#[derive(Debug, Error)]
pub enum LoopsError {
    #[error("matrix with trace {trace} is not hyperbolic (|trace| <= 2)")]
    NotHyperbolic { trace: f64 },
    #[error(
        "deck census not saturated within word-length cap {cap}; partial table has {} entries",
        partial.entries.len()
    )]
    SaturationNotReached { cap: usize, partial: Box<LoopTable> },
    #[error("radius {radius} must be positive and finite")]
    InvalidRadius { radius: f64 },
    #[error("no closed loop found within doubling radius cap {radius}")]
    NoLoopWithinRadius { radius: f64 },
}

/// Geodesic length of the closed loop of a hyperbolic Möbius element:
/// 2 arccosh(|trace| / 2). Errors on elements with |trace| <= 2.
pub fn translation_length(g: &MobiusElement) -> Result<f64, LoopsError> {
    let tr = g.trace().abs();
    if tr <= 2.0 {
        return Err(LoopsError::NotHyperbolic { trace: g.trace() });
    }
    Ok(2.0 * (tr / 2.0).acosh())
}

/// A deck transformation found by the census, with its basepoint
/// displacement d(x, gamma x).
#[derive(Clone, Debug)]
pub struct DeckElement {
    pub element: MobiusElement,
    pub displacement: f64,
}

/// One cluster of loop lengths at a basepoint.
#[derive(Clone, Debug)]
pub struct LoopEntry {
    pub length: f64,
    pub multiplicity: u32,
    pub words: Vec<Vec<i32>>,
}

/// Census of looping times at a basepoint: cluster lengths, multiplicities,
/// and representative words, sorted by length.
#[derive(Clone, Debug, Default)]
pub struct LoopTable {
    pub radius: f64,
    pub entries: Vec<LoopEntry>,
    pub warnings: Vec<String>,
}

/// Sign-canonical quantized key for matrix deduplication (1e-6 grid).
fn quantize(entries: [f64; 4]) -> [i64; 4] {
    let mut k = [0i64; 4];
    for (i, e) in entries.iter().enumerate() {
        k[i] = (e / 1e-6).round() as i64;
    }
    k
}

struct DedupSet {
    map: HashMap<[i64; 4], ()>,
}

impl DedupSet {
    fn new() -> Self {
        DedupSet {
            map: HashMap::new(),
        }
    }

    /// Inserts the element unless an equal one (up to sign, within 1e-9) is
    /// already present. Probes neighbor cells so near-boundary quantization
    /// cannot split duplicates.
    fn insert(&mut self, g: &MobiusElement) -> bool {
        let key = quantize(g.canonical_entries());
        let mut probe = [0i64; 4];
        for d0 in -1..=1i64 {
            for d1 in -1..=1i64 {
                for d2 in -1..=1i64 {
                    for d3 in -1..=1i64 {
                        probe = [key[0] + d0, key[1] + d1, key[2] + d2, key[3] + d3];
                        if self.map.contains_key(&probe) {
                            return false;
                        }
                    }
                }
            }
        }
        let _ = probe;
        self.map.insert(key, ());
        true
    }
}

fn bfs_census(
    generators: &[MobiusElement],
    center: HPoint,
    radius: f64,
) -> Result<Vec<DeckElement>, LoopsError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(LoopsError::InvalidRadius { radius });
    }
    let mut steps: Vec<MobiusElement> = Vec::with_capacity(generators.len() * 2);
    for g in generators {
        steps.push(g.clone());
        steps.push(g.inverse());
    }
    let max_step = steps
        .iter()
        .map(|g| hyperbolic_distance(center, mobius_apply(g, center)))
        .fold(0.0, f64::max);
    let prune = radius + 2.0 * max_step;

    let mut seen = DedupSet::new();
    seen.insert(&MobiusElement::identity());
    let mut found: Vec<DeckElement> = Vec::new();
    let mut frontier = vec![MobiusElement::identity()];
    let mut stale_levels = 0usize;
    let mut certified = false;
    for _level in 1..=WORD_LENGTH_CAP {
        let mut next = Vec::new();
        let mut added_within_radius = false;
        for base in &frontier {
            for step in &steps {
                let cand = base.compose(step);
                let disp = hyperbolic_distance(center, mobius_apply(&cand, center));
                if disp > prune {
                    continue;
                }
                if !seen.insert(&cand) {
                    continue;
                }
                if disp <= radius + 1e-12 {
                    added_within_radius = true;
                    found.push(DeckElement {
                        element: cand.clone(),
                        displacement: disp,
                    });
                }
                next.push(cand);
            }
        }
        if added_within_radius {
            stale_levels = 0;
        } else {
            stale_levels += 1;
        }
        frontier = next;
        if frontier.is_empty() || stale_levels >= 2 {
            certified = true;
            break;
        }
    }
    if !certified {
        let table = cluster_table(&found, radius);
        return Err(LoopsError::SaturationNotReached {
            cap: WORD_LENGTH_CAP,
            partial: Box::new(table),
        });
    }
    found.sort_by(|a, b| {
        a.displacement
            .partial_cmp(&b.displacement)
            .unwrap()
            .then(a.element.word().len().cmp(&b.element.word().len()))
            .then(a.element.word().cmp(b.element.word()))
    });
    Ok(found)
}

/// Enumerates the nonidentity deck transformations gamma with
/// d(x, gamma x) <= radius at the surface basepoint, certified complete by
/// saturation of the word-length search.
pub fn enumerate_deck(
    spec: &HyperbolicSurfaceSpec,
    radius: f64,
) -> Result<Vec<DeckElement>, LoopsError> {
    bfs_census(&spec.generators, spec.basepoint_lift, radius)
}

fn cluster_table(elements: &[DeckElement], radius: f64) -> LoopTable {
    let mut sorted: Vec<&DeckElement> = elements.iter().collect();
    sorted.sort_by(|a, b| a.displacement.partial_cmp(&b.displacement).unwrap());
    let mut entries: Vec<LoopEntry> = Vec::new();
    for el in sorted {
        let start_new = match entries.last() {
            Some(e) => el.displacement - e.length > LENGTH_CLUSTER_TOL,
            None => true,
        };
        if start_new {
            entries.push(LoopEntry {
                length: el.displacement,
                multiplicity: 1,
                words: vec![el.element.word().to_vec()],
            });
        } else {
            let e = entries.last_mut().unwrap();
            e.multiplicity += 1;
            e.words.push(el.element.word().to_vec());
        }
    }
    let mut warnings = Vec::new();
    for w in entries.windows(2) {
        let gap = w[1].length - w[0].length;
        if gap < 10.0 * LENGTH_CLUSTER_TOL {
            warnings.push(format!(
                "near-degenerate lengths: clusters at {:.12} and {:.12} separated by {gap:.3e}",
                w[0].length, w[1].length
            ));
        }
    }
    LoopTable {
        radius,
        entries,
        warnings,
    }
}

/// Looping times of the hyperbolic surface at the lift `x` (which may differ
/// from the stored basepoint): clustered displacements of deck elements
/// within `radius`.
pub fn looping_times(
    spec: &HyperbolicSurfaceSpec,
    x: HPoint,
    radius: f64,
) -> Result<LoopTable, LoopsError> {
    let elements = bfs_census(&spec.generators, x, radius)?;
    Ok(cluster_table(&elements, radius))
}

/// Flat deck descriptions for the two flat models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatDeckSpec {
    pub kind: FlatDeckKind,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlatDeckKind {
    /// Translations (x1, x2) -> (x1 + k a, x2 + l b).
    TorusLattice,
    /// Glide (x1, x2) -> (x1 + a/2, -x2) and translation (x1, x2) -> (x1, x2 + b).
    KleinGlide,
}

impl FlatDeckSpec {
    /// The deck description matching a flat surface spectrum.
    pub fn of_surface(surface: &crate::spectrum::FlatSurface) -> Self {
        use crate::spectrum::FlatSurface;
        match surface {
            FlatSurface::Torus(t) => FlatDeckSpec {
                kind: FlatDeckKind::TorusLattice,
                a: t.a,
                b: t.b,
            },
            FlatSurface::Klein(k) => FlatDeckSpec {
                kind: FlatDeckKind::KleinGlide,
                a: k.a,
                b: k.b,
            },
        }
    }
}

/// Looping times on a flat model at the point `x`: distances from x to its
/// nonidentity deck images, clustered like the hyperbolic table. Klein glide
/// images depend on the point through x2.
pub fn flat_looping_times(deck: &FlatDeckSpec, x: Point, radius: f64) -> Result<LoopTable, LoopsError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(LoopsError::InvalidRadius { radius });
    }
    let mut displacements: Vec<f64> = Vec::new();
    let (a, b) = (deck.a, deck.b);
    let kmax = (radius / a).ceil() as i64 + 1;
    let lmax = (radius / b).ceil() as i64 + 1;
    for k in -kmax..=kmax {
        for l in -lmax..=lmax {
            if k == 0 && l == 0 {
                continue;
            }
            let d = ((k as f64 * a).powi(2) + (l as f64 * b).powi(2)).sqrt();
            if d <= radius + 1e-12 {
                displacements.push(d);
            }
        }
    }
    if deck.kind == FlatDeckKind::KleinGlide {
        let jmax = (radius / a).ceil() as i64 + 2;
        let nmax = ((radius + 2.0 * x.x2.abs()) / b).ceil() as i64 + 2;
        for j in -jmax..=jmax {
            for n in -nmax..=nmax {
                let dx = (j as f64 + 0.5) * a;
                let dy = n as f64 * b - 2.0 * x.x2;
                let d = (dx * dx + dy * dy).sqrt();
                if d <= radius + 1e-12 {
                    displacements.push(d);
                }
            }
        }
    }
    displacements.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let elements: Vec<DeckElement> = displacements
        .into_iter()
        .map(|d| DeckElement {
            element: MobiusElement::identity(),
            displacement: d,
        })
        .collect();
    let mut table = cluster_table(&elements, radius);
    for e in table.entries.iter_mut() {
        e.words.clear();
    }
    Ok(table)
}

/// A loop census input: either a hyperbolic surface with a basepoint lift or
/// a flat deck with a plane point.
pub enum LoopSpace<'a> {
    Hyperbolic {
        spec: &'a HyperbolicSurfaceSpec,
        basepoint: HPoint,
    },
    Flat {
        deck: &'a FlatDeckSpec,
        basepoint: Point,
    },
}

impl LoopSpace<'_> {
    pub fn looping_times(&self, radius: f64) -> Result<LoopTable, LoopsError> {
        match self {
            LoopSpace::Hyperbolic { spec, basepoint } => looping_times(spec, *basepoint, radius),
            LoopSpace::Flat { deck, basepoint } => flat_looping_times(deck, *basepoint, radius),
        }
    }
}

/// Length of the shortest closed loop through the basepoint, found by
/// doubling the census radius from 2 until the table is nonempty.
pub fn shortest_loop(space: &LoopSpace) -> Result<f64, LoopsError> {
    let mut radius = 2.0;
    while radius <= 512.0 {
        let table = space.looping_times(radius)?;
        if let Some(first) = table.entries.first() {
            return Ok(first.length);
        }
        radius *= 2.0;
    }
    Err(LoopsError::NoLoopWithinRadius { radius: 512.0 })
}

/// Amplitude kind of the loop expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopAmplitude {
    /// 1 / sqrt(sinh d): hyperbolic surfaces.
    HyperbolicSinh,
    /// 1 / sqrt(d): flat models.
    FlatSqrt,
}

/// Windowed loop sum over explicit (length, weight) entries:
/// sqrt(lambda / 2 pi) e^{i pi/4} sum w_j chi_hat(d_j) e^{-i lambda d_j} amp(d_j).
///
/// This is the seam shared by the hyperbolic and flat geometric sides and by
/// synthetic trace generation; weights are usually cluster multiplicities.
pub fn windowed_loop_sum(
    entries: &[(f64, f64)],
    amplitude: LoopAmplitude,
    lambda: f64,
    w: &Window,
) -> Complex64 {
    let prefactor = (lambda / (2.0 * PI)).sqrt() * Complex64::cis(PI / 4.0);
    let mut acc = KahanComplex::new();
    for &(d, weight) in entries {
        let chi = w.chi_hat(d);
        if chi == 0.0 {
            continue;
        }
        let amp = match amplitude {
            LoopAmplitude::HyperbolicSinh => 1.0 / d.sinh().sqrt(),
            LoopAmplitude::FlatSqrt => 1.0 / d.sqrt(),
        };
        acc.add(Complex64::cis(-lambda * d) * (chi * amp * weight));
    }
    prefactor * acc.value()
}

fn table_entries(table: &LoopTable) -> Vec<(f64, f64)> {
    table
        .entries
        .iter()
        .map(|e| (e.length, e.multiplicity as f64))
        .collect()
}

/// Geometric side of the smoothed wave trace on a hyperbolic surface: the
/// windowed loop sum over the census out to the window's upper support edge.
/// The census is an exact finite sum, so the truncation bound is zero.
pub fn geometric_side(
    spec: &HyperbolicSurfaceSpec,
    x: HPoint,
    lambda: f64,
    w: &Window,
) -> Result<TraceValue, LoopsError> {
    let (_, t_hi) = w.support();
    let table = looping_times(spec, x, t_hi)?;
    let value = windowed_loop_sum(
        &table_entries(&table),
        LoopAmplitude::HyperbolicSinh,
        lambda,
        w,
    );
    Ok(TraceValue {
        value,
        truncation_bound: 0.0,
    })
}

/// Geometric side of the smoothed wave trace on a flat model.
pub fn geometric_side_flat(
    deck: &FlatDeckSpec,
    x: Point,
    lambda: f64,
    w: &Window,
) -> Result<TraceValue, LoopsError> {
    let (_, t_hi) = w.support();
    let table = flat_looping_times(deck, x, t_hi)?;
    let value = windowed_loop_sum(&table_entries(&table), LoopAmplitude::FlatSqrt, lambda, w);
    Ok(TraceValue {
        value,
        truncation_bound: 0.0,
    })
}
