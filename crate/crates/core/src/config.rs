//! Flat key = value run configuration.
//!
//! Overview
//! - A run file is plain text: one `key = value` pair per line, `#` starts a
//!   comment, blank lines are ignored, keys are dotted lowercase paths.
//! - Parsing is strict: duplicate keys and keys no command consumes are
//!   rejected, so a typo fails loudly instead of silently using a default.
//! - Typed getters consume keys; `finish` verifies nothing was left over.
//!
//! Design notes
//! - Values keep their raw text until a getter interprets them, so error
//!   messages can echo exactly what the file said.
//! - Compound values use commas within a tuple and semicolons between
//!   tuples: `points = 0,0; 0,0.25` or `surface.generators = a,b,c,d; ...`.

use crate::geometry::{FlatKleinSpec, FlatTorusSpec, HPoint, HyperbolicSurfaceSpec, MobiusElement, Point};
use crate::presets::{self, AnySurface};
use crate::spectrum::FlatSurface;
use crate::transforms::{Window, WindowProfile, WindowWeight};
use std::path::Path;
use thiserror::Error;

/// Errors from reading or interpreting a run file.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate config key `{key}`")]
    DuplicateKey { key: String },
    #[error("unknown config key `{key}`")]
    UnknownKey { key: String },
    #[error("missing config key `{key}`")]
    MissingKey { key: String },
    #[error("config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

/// Parsed run file: ordered key/value pairs with consumption tracking.
#[derive(Debug)]
pub struct RunConfig {
    entries: Vec<(String, String, bool)>,
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(String, String, bool)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(ConfigError::Parse {
                    line: i + 1,
                    reason: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Parse {
                    line: i + 1,
                    reason: "empty key".into(),
                });
            }
            if entries.iter().any(|(k, _, _)| *k == key) {
                return Err(ConfigError::DuplicateKey { key });
            }
            entries.push((key, value, false));
        }
        Ok(RunConfig { entries })
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Ok(Self::from_str(&std::fs::read_to_string(path)?)?)
    }

    fn take(&mut self, key: &str) -> Option<String> {
        for (k, v, used) in &mut self.entries {
            if k == key {
                *used = true;
                return Some(v.clone());
            }
        }
        None
    }

    pub fn opt_str(&mut self, key: &str) -> Option<String> {
        self.take(key)
    }

    pub fn req_str(&mut self, key: &str) -> Result<String, ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::MissingKey {
            key: key.to_string(),
        })
    }

    pub fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => parse_f64(key, &v).map(Some),
        }
    }

    pub fn req_f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        let v = self.req_str(key)?;
        parse_f64(key, &v)
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn opt_usize(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v.parse::<usize>().map(Some).map_err(|e| ConfigError::Invalid {
                key: key.to_string(),
                reason: format!("`{v}` is not a nonnegative integer ({e})"),
            }),
        }
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.opt_usize(key)?.unwrap_or(default))
    }

    /// Comma-separated list of floats.
    pub fn req_f64_list(&mut self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.req_str(key)?;
        split_list(key, &v)
    }

    pub fn opt_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => split_list(key, &v).map(Some),
        }
    }

    /// Semicolon-separated list of `x1,x2` pairs.
    pub fn req_points(&mut self, key: &str) -> Result<Vec<Point>, ConfigError> {
        let v = self.req_str(key)?;
        let mut out = Vec::new();
        for part in v.split(';') {
            let (x1, x2) = parse_pair(key, part)?;
            out.push(Point::new(x1, x2));
        }
        Ok(out)
    }

    /// Single `x1,x2` pair.
    pub fn req_point(&mut self, key: &str) -> Result<Point, ConfigError> {
        let v = self.req_str(key)?;
        let (x1, x2) = parse_pair(key, &v)?;
        Ok(Point::new(x1, x2))
    }

    pub fn opt_point(&mut self, key: &str) -> Result<Option<Point>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => {
                let (x1, x2) = parse_pair(key, &v)?;
                Ok(Some(Point::new(x1, x2)))
            }
        }
    }

    /// Fails if any key was never consumed by a getter.
    pub fn finish(&self) -> Result<(), ConfigError> {
        for (k, _, used) in &self.entries {
            if !used {
                return Err(ConfigError::UnknownKey { key: k.clone() });
            }
        }
        Ok(())
    }

    /// Surface description: `surface.preset` or explicit
    /// `surface.kind` (torus | klein | hyperbolic) with sides or generators.
    pub fn surface(&mut self) -> Result<AnySurface, ConfigError> {
        if let Some(name) = self.take("surface.preset") {
            return presets::by_name(&name).ok_or_else(|| ConfigError::Invalid {
                key: "surface.preset".into(),
                reason: format!(
                    "unknown preset `{name}` (available: {})",
                    presets::PRESET_NAMES.join(", ")
                ),
            });
        }
        let kind = self.req_str("surface.kind")?;
        match kind.as_str() {
            "torus" => {
                let a = self.req_f64("surface.a")?;
                let b = self.req_f64("surface.b")?;
                let spec = FlatTorusSpec::new(a, b).map_err(|e| ConfigError::Invalid {
                    key: "surface.a".into(),
                    reason: e.to_string(),
                })?;
                Ok(AnySurface::Flat(FlatSurface::Torus(spec)))
            }
            "klein" => {
                let a = self.req_f64("surface.a")?;
                let b = self.req_f64("surface.b")?;
                let spec = FlatKleinSpec::new(a, b).map_err(|e| ConfigError::Invalid {
                    key: "surface.a".into(),
                    reason: e.to_string(),
                })?;
                Ok(AnySurface::Flat(FlatSurface::Klein(spec)))
            }
            "hyperbolic" => {
                let gens = self.req_str("surface.generators")?;
                let mut generators = Vec::new();
                for (i, part) in gens.split(';').enumerate() {
                    let nums = split_list("surface.generators", part)?;
                    if nums.len() != 4 {
                        return Err(ConfigError::Invalid {
                            key: "surface.generators".into(),
                            reason: format!("generator {} needs 4 entries", i + 1),
                        });
                    }
                    let g = MobiusElement::new(
                        [nums[0], nums[1], nums[2], nums[3]],
                        vec![i as i32 + 1],
                    )
                    .map_err(|e| ConfigError::Invalid {
                        key: "surface.generators".into(),
                        reason: e.to_string(),
                    })?;
                    generators.push(g);
                }
                let bp = self.req_str("surface.basepoint")?;
                let (re, im) = parse_pair("surface.basepoint", &bp)?;
                let basepoint = HPoint::new(re, im).map_err(|e| ConfigError::Invalid {
                    key: "surface.basepoint".into(),
                    reason: e.to_string(),
                })?;
                let spec = HyperbolicSurfaceSpec::new(generators, basepoint).map_err(|e| {
                    ConfigError::Invalid {
                        key: "surface.generators".into(),
                        reason: e.to_string(),
                    }
                })?;
                Ok(AnySurface::Hyperbolic(spec))
            }
            other => Err(ConfigError::Invalid {
                key: "surface.kind".into(),
                reason: format!("unknown kind `{other}` (torus | klein | hyperbolic)"),
            }),
        }
    }

    /// Window description from `window.profile`, `window.r`, `window.eps`,
    /// `window.weight`.
    pub fn window(&mut self) -> Result<Window, ConfigError> {
        let profile = match self.req_str("window.profile")?.as_str() {
            "compact" => WindowProfile::CompactBump,
            "gaussian" => WindowProfile::GaussianBump,
            other => {
                return Err(ConfigError::Invalid {
                    key: "window.profile".into(),
                    reason: format!("unknown profile `{other}` (compact | gaussian)"),
                })
            }
        };
        let r = self.req_f64("window.r")?;
        let eps = self.req_f64("window.eps")?;
        let weight = self.window_weight("window.weight")?;
        Window::new(profile, r, eps, weight).map_err(|e| ConfigError::Invalid {
            key: "window.r".into(),
            reason: e.to_string(),
        })
    }

    pub fn window_weight(&mut self, key: &str) -> Result<WindowWeight, ConfigError> {
        match self.take(key).as_deref() {
            None | Some("none") => Ok(WindowWeight::None),
            Some("sqrt_t") => Ok(WindowWeight::SqrtT),
            Some("sqrt_sinh") => Ok(WindowWeight::SqrtSinh),
            Some(other) => Err(ConfigError::Invalid {
                key: key.to_string(),
                reason: format!("unknown weight `{other}` (none | sqrt_t | sqrt_sinh)"),
            }),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.trim().parse::<f64>().map_err(|e| ConfigError::Invalid {
        key: key.to_string(),
        reason: format!("`{v}` is not a number ({e})"),
    })
}

fn split_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    for part in v.split(',') {
        out.push(parse_f64(key, part)?);
    }
    if out.is_empty() {
        return Err(ConfigError::Invalid {
            key: key.to_string(),
            reason: "empty list".into(),
        });
    }
    Ok(out)
}

fn parse_pair(key: &str, v: &str) -> Result<(f64, f64), ConfigError> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 2 {
        return Err(ConfigError::Invalid {
            key: key.to_string(),
            reason: format!("`{v}` is not an `x,y` pair"),
        });
    }
    Ok((parse_f64(key, parts[0])?, parse_f64(key, parts[1])?))
}
