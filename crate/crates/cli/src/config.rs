//! Line-oriented `section.key=value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use gauss_codazzi::metric::{MetricFamily, Rect, Reciprocal};

/// Every accepted key with its default. An empty default means unset.
const SCHEMA: &[(&str, &str)] = &[
    ("metric.kind", "hyperbolic"),
    ("metric.a", "1"),
    ("metric.b", "0"),
    ("metric.c", "1"),
    ("metric.beta", "1.4142135623730951"),
    ("metric.alpha", "2"),
    ("metric.omega", "1"),
    ("domain.x0", "-1"),
    ("domain.x1", "1"),
    ("domain.y0", "1"),
    ("domain.y1", "2"),
    ("domain.nx", "20"),
    ("domain.ny", "20"),
    ("solver.n", "128"),
    ("solver.epsilon", "0.1"),
    ("solver.epsilons", ""),
    ("solver.cfl", "0.9"),
    ("solver.boundary", "dirichlet"),
    ("solver.v_floor", "1e-6"),
    ("solver.record_every", "1"),
    ("solver.record_dy", "0.05"),
    ("solver.max_dy", ""),
    ("solver.u0", "0"),
    ("solver.v0", "1"),
    ("solver.perturbation", "0"),
    ("region.w_min", "0"),
    ("region.w_max", "2"),
    ("region.z_min", "-2"),
    ("region.z_max", "0"),
    ("region.space", "box"),
    ("region.search_w", "-3,3"),
    ("region.search_z", "-3,3"),
    ("region.search_a", "0,2"),
    ("region.search_b", "0.1,2"),
    ("region.steps", "20"),
    ("region.edge_samples", "1024"),
    ("region.xy_samples", "8"),
    ("region.exact", "true"),
    ("reconstruct.source", "closed-form"),
    ("reconstruct.immersion", "enneper"),
    ("reconstruct.psi_slope", "1"),
    ("plot.u0", "-3"),
    ("plot.u1", "3"),
    ("plot.v0", "-3"),
    ("plot.v1", "3"),
    ("plot.resolution", "256"),
    ("plot.x", "0"),
    ("plot.y", "1"),
    ("plot.square", "false"),
    ("output.dir", "out"),
    ("output.stem", ""),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

fn key_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line: None, key: Some(key.to_string()), message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            values: SCHEMA.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

/// Splits `key=value`, rejecting keys outside the schema.
fn split_assignment(text: &str) -> Result<(String, String), String> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{text}`"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err("empty key".into());
    }
    if !SCHEMA.iter().any(|(k, _)| *k == key) {
        return Err(format!("unknown key `{key}`"));
    }
    Ok((key.to_string(), value.trim().to_string()))
}

impl RunConfig {
    /// Applies a configuration file's text. Blank lines and `#` comments are
    /// skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = split_assignment(line).map_err(|message| ConfigError { line: Some(idx + 1), key: None, message })?;
            self.values.insert(k, v);
        }
        Ok(())
    }

    /// Applies the `# key=value` lines of an emitted file's header.
    pub fn apply_header(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let body = match raw.strip_prefix("# ").or_else(|| raw.strip_prefix("<!-- ").and_then(|r| r.strip_suffix(" -->"))) {
                Some(b) => b,
                None => break,
            };
            if !body.contains('=') || body.starts_with("gcsurf") {
                continue;
            }
            let (k, v) = split_assignment(body).map_err(|message| ConfigError { line: Some(idx + 1), key: None, message })?;
            self.values.insert(k, v);
        }
        Ok(())
    }

    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = split_assignment(assignment).map_err(|message| ConfigError {
            line: None,
            key: None,
            message: format!("--set {message}"),
        })?;
        self.values.insert(k, v);
        Ok(())
    }

    pub fn load(path: &Path) -> Result<String, ConfigError> {
        std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            key: None,
            message: format!("cannot read {}: {e}", path.display()),
        })
    }

    /// Resolved `key=value` lines in key order.
    pub fn resolved(&self) -> Vec<String> {
        self.values.iter().map(|(k, v)| format!("{k}={v}")).collect()
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn is_set(&self, key: &str) -> bool {
        !self.raw(key).is_empty()
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let raw = self.raw(key);
        let v: f64 = raw.parse().map_err(|_| key_error(key, format!("expected a number, got `{raw}`")))?;
        if !v.is_finite() {
            return Err(key_error(key, format!("expected a finite number, got `{raw}`")));
        }
        Ok(v)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        if self.is_set(key) {
            self.f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|_| key_error(key, format!("expected a non-negative integer, got `{raw}`")))
    }

    pub fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.raw(key) {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(key_error(key, format!("expected true or false, got `{other}`"))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| key_error(key, format!("expected comma-separated numbers, got `{s}`")))
            })
            .collect()
    }

    pub fn pair(&self, key: &str) -> Result<(f64, f64), ConfigError> {
        match self.list(key)?.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(key_error(key, format!("expected `lo,hi`, got `{}`", self.raw(key)))),
        }
    }

    pub fn choice<'a>(&self, key: &str, allowed: &[&'a str]) -> Result<&'a str, ConfigError> {
        let raw = self.raw(key);
        allowed
            .iter()
            .find(|a| **a == raw)
            .copied()
            .ok_or_else(|| key_error(key, format!("expected one of {}, got `{raw}`", allowed.join("|"))))
    }

    pub fn family(&self) -> Result<MetricFamily, ConfigError> {
        let kind = self.choice(
            "metric.kind",
            &["hyperbolic", "helicoid", "catenoid", "enneper", "reciprocal-exp", "reciprocal-cosh"],
        )?;
        let family = match kind {
            "hyperbolic" => MetricFamily::Hyperbolic,
            "helicoid" => MetricFamily::HelicoidQuadratic {
                a: self.f64("metric.a")?,
                b: self.f64("metric.b")?,
                c: self.f64("metric.c")?,
            },
            "catenoid" => MetricFamily::GeneralizedCatenoid { c: self.f64("metric.c")?, beta: self.f64("metric.beta")? },
            "enneper" => MetricFamily::Enneper { alpha: self.f64("metric.alpha")? },
            "reciprocal-exp" => MetricFamily::Reciprocal(Reciprocal::Exponential {
                a: self.f64("metric.a")?,
                omega: self.f64("metric.omega")?,
            }),
            _ => MetricFamily::Reciprocal(Reciprocal::HyperbolicCosine {
                a: self.f64("metric.a")?,
                omega: self.f64("metric.omega")?,
            }),
        };
        family
            .validate()
            .map_err(|e| key_error("metric.kind", format!("{kind}: {e}")))?;
        Ok(family)
    }

    pub fn domain(&self) -> Result<Rect, ConfigError> {
        let (x0, x1, y0, y1) = (self.f64("domain.x0")?, self.f64("domain.x1")?, self.f64("domain.y0")?, self.f64("domain.y1")?);
        Rect::new(x0, x1, y0, y1).map_err(|e| key_error("domain", e.to_string()))
    }
}
