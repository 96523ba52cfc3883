//! Line-oriented experiment configuration: `key = value` lines, `#` comments.
//!
//! Parsing collects every problem it finds instead of stopping at the first,
//! and each problem carries the line it refers to when there is one.

use std::collections::BTreeMap;
use std::fmt;

use pdmp_core::models::{ModelError, ModelSpec};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Simulate,
    Couple,
    InvariantCheck,
    Moments,
    Lyapunov,
    Stability,
    Gcurve,
    Eigen,
    Properties,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Simulate,
        Kind::Couple,
        Kind::InvariantCheck,
        Kind::Moments,
        Kind::Lyapunov,
        Kind::Stability,
        Kind::Gcurve,
        Kind::Eigen,
        Kind::Properties,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Couple => "couple",
            Kind::InvariantCheck => "invariant-check",
            Kind::Moments => "moments",
            Kind::Lyapunov => "lyapunov",
            Kind::Stability => "stability",
            Kind::Gcurve => "gcurve",
            Kind::Eigen => "eigen",
            Kind::Properties => "properties",
        }
    }

    fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    fn uses_model(self) -> bool {
        matches!(
            self,
            Kind::Simulate | Kind::Couple | Kind::InvariantCheck | Kind::Moments | Kind::Eigen
        )
    }

    /// `(required, optional)` experiment keys besides `kind`, `seed`, `output`
    /// and the model block.
    fn keys(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Kind::Simulate => (&["samples", "times", "x0"], &["mode0", "se_tolerance"]),
            Kind::Couple => (
                &["coupling", "samples", "times", "x0", "y0"],
                &["mode0", "mode1", "orders", "se_tolerance"],
            ),
            Kind::InvariantCheck => (
                &["samples", "horizon"],
                &["x0", "mode0", "ks_max", "se_tolerance", "grid_points"],
            ),
            Kind::Moments => (
                &["samples", "times", "x0", "orders"],
                &["stationary_time", "se_tolerance"],
            ),
            Kind::Lyapunov => (
                &["alphas", "rs", "horizon"],
                &["tolerance", "mass_tolerance", "residual_tolerance"],
            ),
            Kind::Stability => (
                &["alphas"],
                &[
                    "expected_root",
                    "root_tolerance",
                    "random_alphas",
                    "identity_tolerance",
                    "return_tolerance",
                ],
            ),
            Kind::Gcurve => (&["rs"], &["peak_r", "peak_g", "tail_max"]),
            Kind::Eigen => (&["max_degree"], &[]),
            Kind::Properties => (&["samples"], &["horizon"]),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingKind {
    SharedNoise,
    Tv,
    Switched,
}

impl CouplingKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "shared-noise" => Some(Self::SharedNoise),
            "tv" => Some(Self::Tv),
            "switched" => Some(Self::Switched),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SharedNoise => "shared-noise",
            Self::Tv => "tv",
            Self::Switched => "switched",
        }
    }
}

/// One problem found while parsing; `line` is 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Issue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{}", render(.0))]
pub struct ConfigError(pub Vec<Issue>);

fn render(issues: &[Issue]) -> String {
    issues.iter().map(Issue::to_string).collect::<Vec<_>>().join("\n")
}

impl ConfigError {
    pub fn issues(&self) -> &[Issue] {
        &self.0
    }
}

/// A validated experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    /// Prefix of the output files.
    pub output: String,
    pub model: Option<ModelSpec>,
    pub coupling: Option<CouplingKind>,
    pub samples: usize,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub mode0: usize,
    pub mode1: usize,
    pub orders: Vec<usize>,
    pub alphas: Vec<f64>,
    pub rs: Vec<f64>,
    pub stationary_time: Option<f64>,
    pub max_degree: usize,
    pub se_tolerance: f64,
    pub ks_max: f64,
    pub tolerance: f64,
    pub mass_tolerance: f64,
    pub residual_tolerance: f64,
    pub grid_points: usize,
    pub expected_root: Option<f64>,
    pub root_tolerance: f64,
    pub random_alphas: usize,
    pub identity_tolerance: f64,
    pub return_tolerance: f64,
    pub peak_r: Option<[f64; 2]>,
    pub peak_g: Option<[f64; 2]>,
    pub tail_max: Option<f64>,
    /// Every key and value as written, for the report echo.
    pub entries: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.entries.insert("seed".into(), seed.to_string());
        self
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Reader {
    entries: BTreeMap<String, Entry>,
    issues: Vec<Issue>,
}

impl Reader {
    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    fn fail(&mut self, key: &str, message: String) {
        let line = self.line(key);
        self.issues.push(Issue { line, message });
    }

    fn raw(&mut self, key: &str, required: bool) -> Option<String> {
        match self.entries.get(key) {
            Some(e) => Some(e.value.clone()),
            None => {
                if required {
                    self.issues.push(Issue {
                        line: None,
                        message: format!("missing required key `{key}`"),
                    });
                }
                None
            }
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, required: bool, what: &str) -> Option<T> {
        let raw = self.raw(key, required)?;
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.fail(key, format!("`{key}` must be {what}, got `{raw}`"));
                None
            }
        }
    }

    fn real(&mut self, key: &str, required: bool) -> Option<f64> {
        let v: f64 = self.parsed(key, required, "a number")?;
        if v.is_finite() {
            Some(v)
        } else {
            self.fail(key, format!("`{key}` must be finite"));
            None
        }
    }

    fn positive(&mut self, key: &str, required: bool) -> Option<f64> {
        let v = self.real(key, required)?;
        if v > 0.0 {
            Some(v)
        } else {
            self.fail(key, format!("requires {key} > 0"));
            None
        }
    }

    fn count(&mut self, key: &str, required: bool, min: usize) -> Option<usize> {
        let v: usize = self.parsed(key, required, "a nonnegative integer")?;
        if v >= min {
            Some(v)
        } else {
            self.fail(key, format!("requires {key} >= {min}"));
            None
        }
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str, required: bool, what: &str) -> Option<Vec<T>> {
        let raw = self.raw(key, required)?;
        let mut out = Vec::new();
        for part in raw.split(',') {
            match part.trim().parse::<T>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.fail(key, format!("`{key}` must be a comma-separated list of {what}, got `{raw}`"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn reals(&mut self, key: &str, required: bool) -> Option<Vec<f64>> {
        let v = self.list::<f64>(key, required, "numbers")?;
        if v.iter().all(|x| x.is_finite()) {
            Some(v)
        } else {
            self.fail(key, format!("`{key}` must hold finite numbers"));
            None
        }
    }

    /// A nonempty, strictly increasing grid.
    fn grid(&mut self, key: &str, required: bool, positive: bool) -> Option<Vec<f64>> {
        let v = self.reals(key, required)?;
        if v.windows(2).any(|w| w[0] >= w[1]) {
            self.fail(key, format!("grid `{key}` must be sorted in increasing order"));
            return None;
        }
        if positive && v[0] <= 0.0 {
            self.fail(key, format!("requires every {key} value > 0"));
            return None;
        }
        Some(v)
    }

    fn pair(&mut self, key: &str) -> Option<[f64; 2]> {
        let v = self.reals(key, false)?;
        if v.len() == 2 && v[0] <= v[1] {
            Some([v[0], v[1]])
        } else {
            self.fail(key, format!("`{key}` must be `low, high` with low <= high"));
            None
        }
    }
}

/// Attributes a model constraint to the line of the parameter it names, or of
/// `variant` when no parameter is named.
fn model_issue(reader: &Reader, variant: &str, err: &ModelError) -> Issue {
    let message = err.to_string();
    let words: Vec<&str> = message
        .split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .collect();
    let line = ModelSpec::keys(variant)
        .unwrap_or(&[])
        .iter()
        .filter(|k| words.contains(k))
        .filter_map(|k| reader.line(k))
        .max()
        .or_else(|| reader.line("variant"));
    Issue { line, message }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut reader = Reader {
        entries: BTreeMap::new(),
        issues: Vec::new(),
    };
    let mut order = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            reader.issues.push(Issue {
                line: Some(line),
                message: format!("expected `key = value`, got `{content}`"),
            });
            continue;
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if let Some(prev) = reader.entries.get(&k) {
            reader.issues.push(Issue {
                line: Some(line),
                message: format!("duplicate key `{k}` (first set on line {})", prev.line),
            });
            continue;
        }
        order.push(k.clone());
        reader.entries.insert(k, Entry { line, value: v });
    }

    let kind = match reader.raw("kind", true) {
        Some(s) => match Kind::parse(&s) {
            Some(k) => Some(k),
            None => {
                let names: Vec<_> = Kind::ALL.iter().map(|k| k.as_str()).collect();
                reader.fail("kind", format!("unknown kind `{s}` (expected one of {})", names.join(", ")));
                None
            }
        },
        None => None,
    };
    let seed: Option<u64> = reader.parsed("seed", true, "a nonnegative integer");
    let output = reader.raw("output", false);

    // Unknown keys are judged against the kind and the model variant.
    let variant = reader.raw("variant", kind.is_some_and(Kind::uses_model));
    let mut allowed: Vec<&str> = vec!["kind", "seed", "output"];
    if let Some(kind) = kind {
        let (req, opt) = kind.keys();
        allowed.extend_from_slice(req);
        allowed.extend_from_slice(opt);
        if kind.uses_model() {
            allowed.push("variant");
            if let Some(keys) = variant.as_deref().and_then(ModelSpec::keys) {
                allowed.extend_from_slice(keys);
            }
        }
    }
    if kind.is_some() {
        for key in &order {
            if !allowed.contains(&key.as_str()) {
                reader.fail(key, format!("unknown key `{key}`"));
            }
        }
    }

    let model = match (kind, variant.as_deref()) {
        (Some(k), Some(v)) if k.uses_model() => match ModelSpec::keys(v) {
            None => {
                reader.fail("variant", format!("unknown model variant `{v}`"));
                None
            }
            Some(keys) => {
                let mut params = BTreeMap::new();
                for key in keys {
                    if let Some(e) = reader.entries.get(*key) {
                        params.insert(key.to_string(), e.value.clone());
                    }
                }
                match ModelSpec::from_params(v, &params) {
                    Ok(spec) => Some(spec),
                    Err(ModelError::MissingKey(key)) => {
                        reader.issues.push(Issue {
                            line: None,
                            message: format!("missing required key `{key}` for variant `{v}`"),
                        });
                        None
                    }
                    Err(ModelError::BadValue { key, value }) => {
                        reader.fail(&key, format!("invalid value `{value}` for `{key}`"));
                        None
                    }
                    Err(err) => {
                        let issue = model_issue(&reader, v, &err);
                        reader.issues.push(issue);
                        None
                    }
                }
            }
        },
        _ => None,
    };

    let Some(kind) = kind else {
        return Err(ConfigError(reader.issues));
    };
    let (required, _) = kind.keys();
    let need = |k: &str| required.contains(&k);

    let coupling = match reader.raw("coupling", need("coupling")) {
        Some(s) => match CouplingKind::parse(&s) {
            Some(c) => Some(c),
            None => {
                reader.fail(
                    "coupling",
                    format!("unknown coupling `{s}` (expected shared-noise, tv or switched)"),
                );
                None
            }
        },
        None => None,
    };
    let samples = reader.count("samples", need("samples"), 1).unwrap_or(1);
    let horizon = reader.positive("horizon", need("horizon")).unwrap_or(1.0);
    let times = reader.grid("times", need("times"), true).unwrap_or_default();
    let x0 = reader.reals("x0", need("x0")).unwrap_or_default();
    let y0 = reader.reals("y0", need("y0")).unwrap_or_default();
    let mode0 = reader.count("mode0", false, 0).unwrap_or(0);
    let mode1 = reader.count("mode1", false, 0).unwrap_or(mode0);
    let orders = reader
        .list::<usize>("orders", need("orders"), "nonnegative integers")
        .unwrap_or_else(|| vec![1]);
    let alphas = match kind {
        Kind::Stability => reader.grid("alphas", true, true),
        _ => reader.reals("alphas", need("alphas")),
    }
    .unwrap_or_default();
    let rs = match kind {
        Kind::Gcurve => reader.grid("rs", true, true),
        _ => reader.reals("rs", need("rs")),
    }
    .unwrap_or_default();
    let stationary_time = reader.positive("stationary_time", false);
    let max_degree = reader.count("max_degree", need("max_degree"), 0).unwrap_or(0);
    let se_tolerance = reader.positive("se_tolerance", false).unwrap_or(3.0);
    let ks_max = reader.positive("ks_max", false).unwrap_or(0.02);
    let tolerance = reader.positive("tolerance", false).unwrap_or(0.01);
    let mass_tolerance = reader.positive("mass_tolerance", false).unwrap_or(1e-6);
    let residual_tolerance = reader.positive("residual_tolerance", false).unwrap_or(1e-5);
    let grid_points = reader.count("grid_points", false, 2).unwrap_or(100);
    let expected_root = reader.real("expected_root", false);
    let root_tolerance = reader.positive("root_tolerance", false).unwrap_or(1e-3);
    let random_alphas = reader.count("random_alphas", false, 0).unwrap_or(50);
    let identity_tolerance = reader.positive("identity_tolerance", false).unwrap_or(1e-10);
    let return_tolerance = reader.positive("return_tolerance", false).unwrap_or(1e-6);
    let peak_r = reader.pair("peak_r");
    let peak_g = reader.pair("peak_g");
    let tail_max = reader.positive("tail_max", false);

    // Cross-key constraints.
    if kind == Kind::Lyapunov && alphas.len() != rs.len() && !alphas.is_empty() && !rs.is_empty() {
        reader.fail("rs", "requires alphas and rs of equal length".into());
    }
    if kind == Kind::Lyapunov && alphas.iter().chain(&rs).any(|v| *v <= 0.0) {
        reader.fail("alphas", "requires every alpha and r > 0".into());
    }
    if kind == Kind::Couple
        && coupling != Some(CouplingKind::Switched)
        && !x0.is_empty()
        && !y0.is_empty()
        && x0.len() != y0.len()
    {
        reader.fail("y0", "requires x0 and y0 of equal length".into());
    }
    if let (Some(spec), true) = (&model, kind.uses_model()) {
        check_model_use(&mut reader, kind, coupling, spec, &x0, &y0, mode0, mode1);
    }
    if let (Some(t), Some(&last)) = (stationary_time, times.last()) {
        if t < last {
            reader.fail("stationary_time", "requires stationary_time >= the last time".into());
        }
    }

    if !reader.issues.is_empty() {
        // Report issues in file order; missing keys (no line) go last.
        reader.issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        return Err(ConfigError(reader.issues));
    }
    let entries = reader
        .entries
        .into_iter()
        .map(|(k, e)| (k, e.value))
        .collect();
    Ok(ExperimentConfig {
        kind,
        seed: seed.unwrap_or(0),
        output: output.unwrap_or_else(|| kind.as_str().to_string()),
        model,
        coupling,
        samples,
        horizon,
        times,
        x0,
        y0,
        mode0,
        mode1,
        orders,
        alphas,
        rs,
        stationary_time,
        max_degree,
        se_tolerance,
        ks_max,
        tolerance,
        mass_tolerance,
        residual_tolerance,
        grid_points,
        expected_root,
        root_tolerance,
        random_alphas,
        identity_tolerance,
        return_tolerance,
        peak_r,
        peak_g,
        tail_max,
        entries,
    })
}

/// Which variants each experiment supports, and start-state shapes.
#[allow(clippy::too_many_arguments)]
fn check_model_use(
    reader: &mut Reader,
    kind: Kind,
    coupling: Option<CouplingKind>,
    spec: &ModelSpec,
    x0: &[f64],
    y0: &[f64],
    mode0: usize,
    mode1: usize,
) {
    let tag = spec.tag();
    let supported: &[&str] = match (kind, coupling) {
        (Kind::Couple, Some(CouplingKind::SharedNoise)) => &["storage", "tcp", "aimd"],
        (Kind::Couple, Some(CouplingKind::Tv)) => &["storage", "tcp"],
        (Kind::Couple, Some(CouplingKind::Switched)) => &["dim1", "planar-rotation", "morris-lecar"],
        (Kind::InvariantCheck, _) => &["storage", "dim1", "telegraph", "morris-lecar"],
        (Kind::Moments, _) => &["tcp"],
        (Kind::Eigen, _) => &["tcp"],
        _ => return simulate_shape(reader, spec, x0, mode0),
    };
    if !supported.contains(&tag) {
        reader.fail(
            "variant",
            format!("{kind} does not support variant `{tag}` (supported: {})", supported.join(", ")),
        );
        return;
    }
    if kind == Kind::Couple && coupling == Some(CouplingKind::Switched) {
        simulate_shape(reader, spec, x0, mode0);
        if !y0.is_empty() {
            let (d, modes) = spec.shape();
            if y0.len() != d {
                reader.fail("y0", format!("variant `{tag}` needs {d} coordinate(s) in y0"));
            } else if mode1 >= modes {
                reader.fail("mode1", format!("requires mode1 < {modes}"));
            }
        }
    }
}

fn simulate_shape(reader: &mut Reader, spec: &ModelSpec, x0: &[f64], mode0: usize) {
    let (d, modes) = spec.shape();
    if !x0.is_empty() && x0.len() != d {
        reader.fail("x0", format!("variant `{}` needs {d} coordinate(s) in x0", spec.tag()));
    }
    if mode0 >= modes {
        reader.fail("mode0", format!("requires mode0 < {modes}"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "kind = simulate\nvariant = tcp\nlambda = 1\ntimes = 10\nsamples = 1000\nx0 = 0\nseed = 42\n";

    #[test]
    fn minimal_tcp_config_is_valid() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.kind, Kind::Simulate);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.samples, 1000);
        assert!(matches!(cfg.model, Some(ModelSpec::Tcp { lambda }) if lambda == 1.0));
    }

    #[test]
    fn telegraph_order_violation_names_line() {
        let text = "kind = invariant-check\nseed = 1\nsamples = 10\nhorizon = 5\nvariant = telegraph\na = 2\nb = 1\n";
        let err = parse_config(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("requires a < b"), "{msg}");
        assert!(msg.contains("line 7"), "{msg}");
    }

    #[test]
    fn missing_seed_is_named() {
        let text = MINIMAL.replace("seed = 42\n", "");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("`seed`"), "{err}");
    }

    #[test]
    fn unknown_key_has_line_number() {
        let text = format!("{MINIMAL}# comment\nbogus = 3\n");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.issues().len(), 1);
        assert_eq!(err.issues()[0].line, Some(9));
        assert!(err.issues()[0].message.contains("bogus"));
    }

    #[test]
    fn every_problem_is_listed() {
        let text = "kind = simulate\nvariant = tcp\nlambda = -1\ntimes = 3, 2\nsamples = 0\nx0 = 0\n";
        let err = parse_config(text).unwrap_err();
        let msg = err.to_string();
        for needle in ["lambda > 0", "sorted", "samples >= 1", "`seed`"] {
            assert!(msg.contains(needle), "missing `{needle}` in:\n{msg}");
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# header\n\n{}", MINIMAL.replace("lambda = 1", "lambda = 1   # rate"));
        assert!(parse_config(&text).is_ok());
    }

    #[test]
    fn duplicate_keys_rejected() {
        let text = format!("{MINIMAL}seed = 3\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate key `seed`"));
    }

    #[test]
    fn unsupported_variant_for_kind() {
        let text = "kind = moments\nseed = 1\nvariant = storage\nalpha = 1\nbeta = 1\nsamples = 10\ntimes = 1\nx0 = 0\norders = 1\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("does not support variant `storage`"));
    }
}
