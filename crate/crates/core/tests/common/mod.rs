//! Independent oracles shared by the integration suites.
//!
//! Everything here recomputes expected values by a route different from the
//! library under test: brute-force lattice loops, direct word products,
//! composite quadrature, and Gaussian image sums. Agreement between the two
//! routes is the evidence the tests rely on.

// Each integration target compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use echogeo::geometry::{hyperbolic_distance, HPoint, MobiusElement, Point};

/// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Composite 8-point Gauss-Legendre integral of `f` over
/// [0, a] x [0, b] with `px` x `py` panels.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(f: F, a: f64, b: f64, px: usize, py: usize) -> f64 {
    let hx = a / px as f64;
    let hy = b / py as f64;
    let mut total = 0.0;
    for i in 0..px {
        let cx = (i as f64 + 0.5) * hx;
        for j in 0..py {
            let cy = (j as f64 + 0.5) * hy;
            for (u, wu) in GL8 {
                for (v, wv) in GL8 {
                    total += wu * wv * f(cx + 0.5 * hx * u, cy + 0.5 * hy * v);
                }
            }
        }
    }
    total * hx * hy / 4.0
}

/// Brute-force torus loop lengths through any point: nonzero lattice vectors
/// (k a, l b) with length <= radius, clustered to 1e-9.
pub fn torus_lattice_lengths(a: f64, b: f64, radius: f64) -> Vec<(f64, u32)> {
    let mut lengths = Vec::new();
    let kmax = (radius / a).ceil() as i64 + 1;
    let lmax = (radius / b).ceil() as i64 + 1;
    for k in -kmax..=kmax {
        for l in -lmax..=lmax {
            if k == 0 && l == 0 {
                continue;
            }
            let d = ((k as f64 * a).powi(2) + (l as f64 * b).powi(2)).sqrt();
            if d <= radius {
                lengths.push(d);
            }
        }
    }
    cluster(lengths)
}

/// Brute-force Klein-bottle loop lengths through (x1, x2): translation images
/// (k a, l b) plus glide images ((j + 1/2) a, n b - 2 x2), clustered.
pub fn klein_glide_lengths(a: f64, b: f64, x2: f64, radius: f64) -> Vec<(f64, u32)> {
    let mut lengths = Vec::new();
    let kmax = (radius / a).ceil() as i64 + 2;
    let lmax = (radius / b).ceil() as i64 + 2;
    for k in -kmax..=kmax {
        for l in -lmax..=lmax {
            if k != 0 || l != 0 {
                let d = ((k as f64 * a).powi(2) + (l as f64 * b).powi(2)).sqrt();
                if d <= radius {
                    lengths.push(d);
                }
            }
        }
    }
    for j in -kmax..=kmax {
        for n in -(2 * lmax)..=(2 * lmax) {
            let dx = (j as f64 + 0.5) * a;
            let dy = n as f64 * b - 2.0 * x2;
            let d = (dx * dx + dy * dy).sqrt();
            if d <= radius {
                lengths.push(d);
            }
        }
    }
    cluster(lengths)
}

fn cluster(mut lengths: Vec<f64>) -> Vec<(f64, u32)> {
    lengths.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut out: Vec<(f64, u32)> = Vec::new();
    for d in lengths {
        match out.last_mut() {
            Some((l, m)) if (d - *l).abs() < 1e-9 => *m += 1,
            _ => out.push((d, 1)),
        }
    }
    out
}

/// Minimum basepoint displacement over all nonempty reduced words up to
/// `max_len` letters in the given generators: a word-enumeration shortest
/// loop, with no pruning and no dedup machinery.
pub fn reduced_words_min_displacement(
    gens: &[MobiusElement],
    basepoint: HPoint,
    max_len: usize,
) -> f64 {
    let mut letters: Vec<MobiusElement> = Vec::new();
    for g in gens {
        letters.push(g.clone());
        letters.push(g.inverse());
    }
    let inverse_of = |i: usize| i ^ 1;
    let mut best = f64::INFINITY;
    // Depth-first over reduced words (no letter followed by its inverse).
    let mut stack: Vec<(MobiusElement, usize, usize)> = letters
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), i, 1))
        .collect();
    while let Some((m, last, len)) = stack.pop() {
        let image = echogeo::geometry::mobius_apply(&m, basepoint);
        let d = hyperbolic_distance(basepoint, image);
        if d > 1e-9 && d < best {
            best = d;
        }
        if len < max_len {
            for (i, g) in letters.iter().enumerate() {
                if i != inverse_of(last) {
                    stack.push((m.compose(g), i, len + 1));
                }
            }
        }
    }
    best
}

/// Heat trace on a flat torus by Gaussian image summation:
/// (1 / 4 pi t) sum over lattice vectors of exp(-|v|^2 / 4 t).
pub fn images_heat_trace_torus(a: f64, b: f64, t: f64) -> f64 {
    let mut total = 0.0;
    let reach = (140.0 * t).sqrt();
    let kmax = (reach / a).ceil() as i64 + 1;
    let lmax = (reach / b).ceil() as i64 + 1;
    for k in -kmax..=kmax {
        for l in -lmax..=lmax {
            let d2 = (k as f64 * a).powi(2) + (l as f64 * b).powi(2);
            total += (-d2 / (4.0 * t)).exp();
        }
    }
    total / (4.0 * std::f64::consts::PI * t)
}

/// Heat trace on a flat Klein bottle at (x1, x2) by image summation over
/// both the translation and the glide sheets.
pub fn images_heat_trace_klein(a: f64, b: f64, x2: f64, t: f64) -> f64 {
    let mut total = 0.0;
    let reach = (140.0 * t).sqrt() + 2.0 * b;
    let kmax = (reach / a).ceil() as i64 + 2;
    let lmax = (reach / b).ceil() as i64 + 2;
    for k in -kmax..=kmax {
        for l in -lmax..=lmax {
            let d2 = (k as f64 * a).powi(2) + (l as f64 * b).powi(2);
            total += (-d2 / (4.0 * t)).exp();
        }
    }
    for j in -kmax..=kmax {
        for n in -(2 * lmax)..=(2 * lmax) {
            let dx = (j as f64 + 0.5) * a;
            let dy = n as f64 * b - 2.0 * x2;
            total += (-(dx * dx + dy * dy) / (4.0 * t)).exp();
        }
    }
    total / (4.0 * std::f64::consts::PI * t)
}

/// Uniform random point in [0, a) x [0, b) from explicit integer draws, kept
/// away from the band edges by `margin` to avoid boundary coincidences.
pub fn sample_point<R: rand::Rng>(rng: &mut R, a: f64, b: f64, margin: f64) -> Point {
    let draw = |rng: &mut R, hi: f64| loop {
        let v: f64 = rng.random_range(0.0..hi);
        let u = v.rem_euclid(hi / 4.0);
        if u > margin && (hi / 4.0 - u) > margin {
            return v;
        }
    };
    let x1 = rng.random_range(0.0..a);
    let x2 = draw(rng, b);
    Point::new(x1, x2)
}
