//! Command line front end.
//!
//! Overview
//! - `echogeo <command> --config <file> --out <dir>` reads one run file,
//!   computes, and writes exactly one output file into the out directory.
//! - Commands: `spectrum`, `weyl`, `heat`, `wavetrace`, `loops`, `detect`,
//!   `echolocate`, `constancy`, `plot`.
//! - Exit codes: 0 on success, 2 for configuration problems (bad file, bad
//!   key, wrong surface kind), 3 when a numerical contract cannot be met
//!   (tail bound violated, saturation not reached, inconsistent data).
//! - Failures print a single JSON object to stderr:
//!   `{"error":{"kind":"config"|"numerical","message":"..."}}`.
//!
//! Design notes
//! - Output is deterministic byte for byte: floats are printed with 15
//!   significant digits in scientific notation, JSON keys have a fixed
//!   order, and negative zero is normalized.
//! - Setting the environment variable `ECHOGEO_VERBOSE` (to any nonempty
//!   value) adds progress lines on stderr; it never changes output files.

use crate::config::{ConfigError, RunConfig};
use crate::echo::{
    self, classify_curvature, constancy_test, detect_multiplicity, klein_echolocate,
    synthesize_spectral_from_geometric, CurvatureClass, EchoError, SpectralData,
};
use crate::geometry::{GeometryError, HPoint, HyperbolicSurfaceSpec, Point};
use crate::loops::{geometric_side, FlatDeckSpec, LoopSpace, LoopsError};
use crate::presets::AnySurface;
use crate::spectrum::{
    density_levels, level_sum, pointwise_weyl, FlatSurface, SpectrumError,
};
use crate::transforms::{
    curvature_estimate, heat_trace, smoothed_wave_spectral, TransformsError, Window,
};
use clap::{Parser, Subcommand};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Parsed command line.
#[derive(Parser)]
#[command(
    name = "echogeo",
    version,
    about = "Pointwise spectral geometry on flat and hyperbolic surfaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Run file with `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Directory the output file is written into.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalue levels and pointwise density sums of a flat surface.
    Spectrum(RunArgs),
    /// Pointwise eigenvalue counting function against its leading term.
    Weyl(RunArgs),
    /// Pointwise heat trace samples and the curvature estimate.
    Heat(RunArgs),
    /// Windowed wave-trace values over a frequency grid.
    Wavetrace(RunArgs),
    /// Loop lengths through a point with multiplicities.
    Loops(RunArgs),
    /// Multiplicity detection for the loop cluster at a given length.
    Detect(RunArgs),
    /// Recover a Klein-bottle observation point from one level sum.
    Echolocate(RunArgs),
    /// Test whether level data is independent of the observation point.
    Constancy(RunArgs),
    /// Plot the rotated windowed trace over a frequency grid.
    Plot(RunArgs),
}

/// Errors mapped to the exit-code contract.
#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io: {e}"))
    }
}
impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<TransformsError> for CliError {
    fn from(e: TransformsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<LoopsError> for CliError {
    fn from(e: LoopsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<EchoError> for CliError {
    fn from(e: EchoError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn verbose() -> bool {
    std::env::var_os("ECHOGEO_VERBOSE").is_some_and(|v| !v.is_empty())
}

macro_rules! progress {
    ($($arg:tt)*) => {
        if verbose() {
            eprintln!($($arg)*);
        }
    };
}

/// Runs the command line and returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Spectrum(a) => dispatch(a, cmd_spectrum),
        Cmd::Weyl(a) => dispatch(a, cmd_weyl),
        Cmd::Heat(a) => dispatch(a, cmd_heat),
        Cmd::Wavetrace(a) => dispatch(a, cmd_wavetrace),
        Cmd::Loops(a) => dispatch(a, cmd_loops),
        Cmd::Detect(a) => dispatch(a, cmd_detect),
        Cmd::Echolocate(a) => dispatch(a, cmd_echolocate),
        Cmd::Constancy(a) => dispatch(a, cmd_constancy),
        Cmd::Plot(a) => dispatch(a, cmd_plot),
    };
    match result {
        Ok(path) => {
            println!("{}", path.display());
            0
        }
        Err(e) => {
            eprintln!(
                "{{\"error\":{{\"kind\":\"{}\",\"message\":\"{}\"}}}}",
                e.kind(),
                json_escape(e.message())
            );
            e.code()
        }
    }
}

fn dispatch(
    args: &RunArgs,
    f: fn(&mut RunConfig, &Path) -> Result<PathBuf, CliError>,
) -> Result<PathBuf, CliError> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    std::fs::create_dir_all(&args.out)?;
    f(&mut cfg, &args.out)
}

// ---------------------------------------------------------------------------
// Shared input plumbing

/// A surface together with the observation point, in matching coordinates.
enum Site {
    Flat(FlatSurface, Point),
    Hyperbolic(Box<HyperbolicSurfaceSpec>, HPoint),
}

fn site(cfg: &mut RunConfig) -> Result<Site, CliError> {
    match cfg.surface()? {
        AnySurface::Flat(s) => {
            let p = cfg.req_point("point")?;
            Ok(Site::Flat(s, p))
        }
        AnySurface::Hyperbolic(h) => {
            let p = match cfg.opt_point("point")? {
                Some(p) => HPoint::new(p.x1, p.x2)?,
                None => h.basepoint_lift,
            };
            Ok(Site::Hyperbolic(Box::new(h), p))
        }
    }
}

fn flat_site(cfg: &mut RunConfig) -> Result<(FlatSurface, Point), CliError> {
    match site(cfg)? {
        Site::Flat(s, p) => Ok((s, p)),
        Site::Hyperbolic(..) => Err(CliError::Config(
            "this command needs a flat surface (torus or klein)".into(),
        )),
    }
}

/// Frequency grid: `lambda.list`, or `lambda.min` / `lambda.max` /
/// `lambda.count` with inclusive endpoints.
fn lambda_grid(cfg: &mut RunConfig) -> Result<Vec<f64>, CliError> {
    if let Some(list) = cfg.opt_f64_list("lambda.list")? {
        return Ok(list);
    }
    let lo = cfg.req_f64("lambda.min")?;
    let hi = cfg.req_f64("lambda.max")?;
    let n = cfg.usize_or("lambda.count", 33)?;
    if n < 2 || hi <= lo {
        return Err(CliError::Config(
            "lambda grid needs lambda.min < lambda.max and lambda.count >= 2".into(),
        ));
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

fn write_out(out: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = out.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Deterministic formatting

/// 15 significant digits, scientific notation, negative zero normalized.
fn fmt_f(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.14e}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn json_point(p: Point) -> String {
    format!("[{},{}]", fmt_f(p.x1), fmt_f(p.x2))
}

fn curvature_class_name(c: CurvatureClass) -> &'static str {
    match c {
        CurvatureClass::SphereOrProjectivePlane => "sphere_or_projective_plane",
        CurvatureClass::TorusOrKleinBottle => "torus_or_klein_bottle",
        CurvatureClass::HyperbolicQuotient => "hyperbolic_quotient",
    }
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_spectrum(cfg: &mut RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let (surface, x) = flat_site(cfg)?;
    let lambda_max = cfg.req_f64("lambda.max")?;
    cfg.finish()?;
    progress!("enumerating levels up to {lambda_max}");
    let levels = density_levels(&surface, x, lambda_max)?;
    let mut csv = String::from("lambda,density_sum\n");
    for (l, d) in levels {
        let _ = writeln!(csv, "{},{}", fmt_f(l), fmt_f(d));
    }
    write_out(out, "spectrum.csv", &csv)
}

fn cmd_weyl(cfg: &mut RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let (surface, x) = flat_site(cfg)?;
    let lambda_max = cfg.req_f64("lambda.max")?;
    let samples = cfg.usize_or("weyl.samples", 200)?;
    cfg.finish()?;
    if samples == 0 || lambda_max <= 0.0 {
        return Err(CliError::Config(
            "weyl needs lambda.max > 0 and weyl.samples >= 1".into(),
        ));
    }
    let mut csv = String::from("lambda,count,leading_term\n");
    for i in 1..=samples {
        let l = lambda_max * i as f64 / samples as f64;
        let count = pointwise_weyl(&surface, x, l)?;
        let leading = l * l / (4.0 * PI);
        let _ = writeln!(csv, "{},{},{}", fmt_f(l), fmt_f(count), fmt_f(leading));
    }
    write_out(out, "weyl.csv", &csv)
}

fn cmd_heat(cfg: &mut RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let (surface, x) = flat_site(cfg)?;
    let times = cfg
        .opt_f64_list("heat.times")?
        .unwrap_or_else(|| vec![0.02, 0.01, 0.005]);
    let tol = cfg.f64_or("curvature.tol", 1e-6)?;
    cfg.finish()?;
    let mut samples = Vec::new();
    for &t in &times {
        progress!("heat trace at t = {t}");
        let v = heat_trace(&surface, x, t)?;
        samples.push(format!(
            "{{\"t\":{},\"value\":{},\"truncation_bound\":{}}}",
            fmt_f(t),
            fmt_f(v.value.re),
            fmt_f(v.truncation_bound)
        ));
    }
    let k_hat = curvature_estimate(&surface, x)?;
    let class = classify_curvature(k_hat, tol);
    let json = format!
        ("{{\"samples\":[{}],\"curvature_estimate\":{},\"curvature_tol\":{},\"curvature_class\":\"{}\"}}\n",
        samples.join(","),
        fmt_f(k_hat),
        fmt_f(tol),
        curvature_class_name(class)
    );
    write_out(out, "heat.json", &json)
}

fn cmd_wavetrace(cfg: &mut RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let s = site(cfg)?;
    let w = cfg.window()?;
    let grid = lambda_grid(cfg)?;
    cfg.finish()?;
    let mut csv = String::from("lambda,re,im,abs,truncation_bound\n");
    for &l in &grid {
        progress!("wave trace at lambda = {l}");
        let tv = match &s {
            Site::Flat(surface, x) => smoothed_wave_spectral(surface, *x, l, &w)?,
            Site::Hyperbolic(spec, x) => geometric_side(spec, *x, l, &w)?,
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_f(l),
            fmt_f(tv.value.re),
            fmt_f(tv.value.im),
            fmt_f(tv.value.norm()),
            fmt_f(tv.truncation_bound)
        );
    }
    write_out(out, "wavetrace.csv", &csv)
}

fn cmd_loops(cfg: &mut RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let s = site(cfg)?;
    let radius = cfg.req_f64("radius")?;
    cfg.finish()?;
    progress!("loop census within {radius}");
    let table = match &s {
        Site::Flat(surface, x) => {
            let deck = FlatDeckSpec::of_surface(surface);
            LoopSpace::Flat {
                deck: &deck,
                basepoint: *x,
            }
            .looping_times(radius)?
        }
        Site::Hyperbolic(spec, x) => LoopSpace::Hyperbolic {
            spec,
            basepoint: *x,
        }
        .looping_times(radius)?,
    };
    for warning in &table.warnings {
        eprintln!("warning: {warning}");
    }
    let mut csv = String::from("length,multiplicity,example_word\n");
    for e in &table.entries {
        let word = e
            .words
            .first()
            .map(|w| {
                w.iter()
                    .map(|g| g.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .unwrap_or_default();
        let _ = writeln!(csv, "{},{},{}", fmt_f(e.length), e.multiplicity, word);
    }
    write_out(out, "loops.csv", &csv)
}

fn cmd_detect(cfg: &mut RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let s = site(cfg)?;
    let r = cfg.req_f64("detect.r")?;
    let eps = cfg.req_f64("detect.eps")?;
    let schedule = cfg
        .opt_f64_list("detect.schedule")?
        .unwrap_or_else(|| vec![100.0, 200.0, 400.0, 800.0]);
    let weight = cfg.window_weight("detect.weight")?;
    cfg.finish()?;
    let data = match &s {
        Site::Flat(surface, x) => SpectralData::exact_flat(surface.clone(), *x)?,
        Site::Hyperbolic(spec, x) => {
            progress!("synthesizing trace data from the loop census");
            let w = Window::new(
                crate::transforms::WindowProfile::CompactBump,
                r,
                eps,
                weight,
            )
            .map_err(EchoError::from)?;
            synthesize_spectral_from_geometric(spec, *x, &schedule, &[w])?
        }
    };
    progress!("detecting multiplicity at r = {r}");
    let res = detect_multiplicity(&data, r, eps, &schedule, weight)?;
    let warnings = res
        .warnings
        .iter()
        .map(|w| format!("\"{}\"", json_escape(w)))
        .collect::<Vec<_>>()
        .join(",");
    let json = format!(
        "{{\"r\":{},\"eps\":{},\"estimate\":{},\"multiplicity\":{},\"converged\":{},\"lambda_max\":{},\"warnings\":[{}]}}\n",
        fmt_f(res.r),
        fmt_f(res.eps),
        fmt_f(res.estimate),
        res.estimate.round() as i64,
        res.converged,
        fmt_f(res.lambda_max),
        warnings
    );
    write_out(out, "detect.json", &json)
}

fn cmd_echolocate(cfg: &mut RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let (surface, spec, given_point) = match cfg.surface()? {
        AnySurface::Flat(FlatSurface::Klein(k)) => {
            let p = cfg.opt_point("point")?;
            (FlatSurface::Klein(k), k, p)
        }
        _ => {
            return Err(CliError::Config(
                "echolocate needs a flat klein surface".into(),
            ))
        }
    };
    let given_sum = cfg.opt_f64("level_sum")?;
    cfg.finish()?;
    let lambda0 = 2.0 * PI / spec.b;
    let (sum, canonical_input) = match (given_point, given_sum) {
        (Some(p), None) => {
            progress!("computing the level sum at lambda = {lambda0}");
            let s = level_sum(&surface, p, lambda0)?;
            (s, Some(crate::geometry::klein_canonicalize(&spec, p)))
        }
        (None, Some(s)) => (s, None),
        _ => {
            return Err(CliError::Config(
                "echolocate needs exactly one of `point` or `level_sum`".into(),
            ))
        }
    };
    let res = klein_echolocate(&spec, sum)?;
    let json = format!(
        "{{\"level\":{},\"level_sum\":{},\"recovered_point\":{},\"degenerate_level\":{},\"ratio_recognized\":{},\"canonical_input\":{}}}\n",
        fmt_f(lambda0),
        fmt_f(sum),
        json_point(res.point),
        res.degenerate_level,
        res.ratio_recognized,
        canonical_input.map_or("null".to_string(), json_point)
    );
    write_out(out, "echolocate.json", &json)
}

fn cmd_constancy(cfg: &mut RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let surface = match cfg.surface()? {
        AnySurface::Flat(s) => s,
        AnySurface::Hyperbolic(_) => {
            return Err(CliError::Config(
                "constancy needs a flat surface (torus or klein)".into(),
            ))
        }
    };
    let points = cfg.req_points("points")?;
    let lambda_max = cfg.req_f64("lambda.max")?;
    cfg.finish()?;
    progress!("comparing level sums at {} points", points.len());
    let res = constancy_test(&surface, lambda_max, &points)?;
    let points_json = points
        .iter()
        .map(|p| json_point(*p))
        .collect::<Vec<_>>()
        .join(",");
    let json = match &res.witness {
        Some(w) => format!(
            "{{\"constant\":false,\"witness_level\":{},\"witness_points\":[{},{}],\"witness_values\":[{},{}],\"points\":[{}]}}\n",
            fmt_f(w.level),
            json_point(w.point_a),
            json_point(w.point_b),
            fmt_f(w.value_a),
            fmt_f(w.value_b),
            points_json
        ),
        None => format!(
            "{{\"constant\":true,\"witness_level\":null,\"witness_points\":null,\"witness_values\":null,\"points\":[{}]}}\n",
            points_json
        ),
    };
    write_out(out, "constancy.json", &json)
}

fn cmd_plot(cfg: &mut RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let s = site(cfg)?;
    let w = cfg.window()?;
    let grid = lambda_grid(cfg)?;
    cfg.finish()?;
    let mut values = Vec::with_capacity(grid.len());
    for &l in &grid {
        progress!("plot sample at lambda = {l}");
        let tv = match &s {
            Site::Flat(surface, x) => smoothed_wave_spectral(surface, *x, l, &w)?,
            Site::Hyperbolic(spec, x) => geometric_side(spec, *x, l, &w)?,
        };
        values.push(echo::detection_estimate(tv.value, l, w.r));
    }
    let svg = render_plot(&grid, &values, w.r);
    write_out(out, "plot.svg", &svg)
}

/// Self-contained SVG polyline of the rotated trace against frequency.
fn render_plot(grid: &[f64], values: &[f64], r: f64) -> String {
    const W: f64 = 800.0;
    const H: f64 = 420.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 30.0;
    const B: f64 = 50.0;
    let (xmin, xmax) = (grid[0], *grid.last().unwrap());
    let mut ymin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut ymax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if ymax - ymin < 1e-12 {
        ymin -= 1.0;
        ymax += 1.0;
    }
    let pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    let px = |x: f64| L + (x - xmin) / (xmax - xmin) * (W - L - R);
    let py = |y: f64| H - B - (y - ymin) / (ymax - ymin) * (H - T - B);
    let mut pts = String::new();
    for (x, y) in grid.iter().zip(values) {
        let _ = write!(pts, "{:.2},{:.2} ", px(*x), py(*y));
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"18\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">rotated windowed trace, r = {}</text>",
        (L + W - R) / 2.0,
        fmt_f(r)
    );
    // Axes
    let _ = writeln!(
        svg,
        "<path d=\"M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2}\" stroke=\"black\" fill=\"none\"/>",
        L,
        T,
        L,
        H - B,
        W - R,
        H - B
    );
    // Zero line when visible
    if ymin < 0.0 && ymax > 0.0 {
        let _ = writeln!(
            svg,
            "<path d=\"M{:.2},{:.2} L{:.2},{:.2}\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\" fill=\"none\"/>",
            L,
            py(0.0),
            W - R,
            py(0.0)
        );
    }
    for (v, anchor, x, y) in [
        (xmin, "middle", px(xmin), H - B + 18.0),
        (xmax, "middle", px(xmax), H - B + 18.0),
    ] {
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"{anchor}\">{}</text>",
            fmt_f(v)
        );
    }
    for v in [ymin, ymax] {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            L - 6.0,
            py(v) + 4.0,
            fmt_f(v)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">lambda</text>",
        (L + W - R) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        svg,
        "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"{}\"/>",
        pts.trim_end()
    );
    let _ = writeln!(svg, "</svg>");
    svg
}
