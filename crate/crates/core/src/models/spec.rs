//! Parameter records for every model variant, their validation, and the
//! canonical `key = value` text form used by experiment configs.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::ModelError;

pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type BoundFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type QuantileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Jump rate `λ(x)` of an AIMD model.
#[derive(Clone)]
pub enum AimdRate {
    Constant(f64),
    /// `intercept + slope·x`, both nonnegative.
    Linear { intercept: f64, slope: f64 },
    /// Arbitrary rate with a declared bound `bound(x, dt) ≥ sup_{s≤dt} λ(x+s)`.
    Custom { rate: RateFn, bound: BoundFn },
}

/// Multiplicative jump law `ν` on `[0, 1]`, given through its quantile function.
#[derive(Clone)]
pub enum JumpLaw {
    /// Dirac mass; `Fixed(0.5)` is the TCP halving.
    Fixed(f64),
    Uniform { low: f64, high: f64 },
    /// `Beta(θ, 1)`, quantile `u^{1/θ}`.
    Power(f64),
    Quantile(QuantileFn),
}

impl JumpLaw {
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            JumpLaw::Fixed(v) => *v,
            JumpLaw::Uniform { low, high } => low + (high - low) * u,
            JumpLaw::Power(theta) => u.powf(1.0 / theta),
            JumpLaw::Quantile(q) => q(u),
        }
    }
}

impl fmt::Debug for AimdRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AimdRate::Constant(c) => write!(f, "Constant({c})"),
            AimdRate::Linear { intercept, slope } => write!(f, "Linear({intercept} + {slope}x)"),
            AimdRate::Custom { .. } => f.write_str("Custom"),
        }
    }
}

impl fmt::Debug for JumpLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JumpLaw::Fixed(v) => write!(f, "Fixed({v})"),
            JumpLaw::Uniform { low, high } => write!(f, "Uniform({low}, {high})"),
            JumpLaw::Power(t) => write!(f, "Power({t})"),
            JumpLaw::Quantile(_) => f.write_str("Quantile"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AimdSpec {
    pub rate: AimdRate,
    pub jump: JumpLaw,
}

/// Stochastic Morris–Lecar parameters. Index 0 of the two-element arrays is
/// channel type 1, index 1 is channel type 2; the three-element arrays also
/// carry the leak term.
#[derive(Clone, Debug, PartialEq)]
pub struct MorrisLecarParams {
    pub capacitance: f64,
    pub current: f64,
    pub conductance: [f64; 3],
    pub reversal: [f64; 3],
    pub rate_scale: [f64; 2],
    pub half_activation: [f64; 2],
    pub slope: [f64; 2],
    pub channels: usize,
}

impl MorrisLecarParams {
    /// A set on the positive-voltage scale of the model, usable as a default.
    pub fn reference() -> Self {
        Self {
            capacitance: 20.0,
            current: 10.0,
            conductance: [4.4, 8.0, 2.0],
            reversal: [120.0, 1.0, 20.0],
            rate_scale: [0.1, 0.04],
            half_activation: [60.0, 70.0],
            slope: [18.0, 30.0],
            channels: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ModelSpec {
    Storage { alpha: f64, beta: f64 },
    Bandit { p: f64, q: f64, g: f64 },
    Tcp { lambda: f64 },
    Aimd(AimdSpec),
    SwitchedLinear { alpha: f64, r: f64 },
    Dim1 { alpha0: f64, alpha1: f64, lambda0: f64, lambda1: f64 },
    PlanarRotation { lambda0: f64, lambda1: f64 },
    Telegraph { a: f64, b: f64 },
    MorrisLecar(MorrisLecarParams),
}

pub const VARIANTS: [&str; 9] = [
    "storage",
    "bandit",
    "tcp",
    "aimd",
    "switched-linear",
    "dim1",
    "planar-rotation",
    "telegraph",
    "morris-lecar",
];

fn positive(model: &'static str, name: &str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::constraint(model, format!("requires {name} > 0")))
    }
}

impl ModelSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelSpec::Storage { .. } => "storage",
            ModelSpec::Bandit { .. } => "bandit",
            ModelSpec::Tcp { .. } => "tcp",
            ModelSpec::Aimd(_) => "aimd",
            ModelSpec::SwitchedLinear { .. } => "switched-linear",
            ModelSpec::Dim1 { .. } => "dim1",
            ModelSpec::PlanarRotation { .. } => "planar-rotation",
            ModelSpec::Telegraph { .. } => "telegraph",
            ModelSpec::MorrisLecar(_) => "morris-lecar",
        }
    }

    /// `(d, |E|)` for this variant.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            ModelSpec::Storage { .. }
            | ModelSpec::Bandit { .. }
            | ModelSpec::Tcp { .. }
            | ModelSpec::Aimd(_) => (1, 1),
            ModelSpec::SwitchedLinear { .. } | ModelSpec::PlanarRotation { .. } => (2, 2),
            ModelSpec::Dim1 { .. } | ModelSpec::Telegraph { .. } => (1, 2),
            ModelSpec::MorrisLecar(p) => (1, (p.channels + 1) * (p.channels + 1)),
        }
    }

    /// Checks every sign and ordering constraint of the variant.
    pub fn validate(&self) -> Result<(), ModelError> {
        let tag = self.tag();
        match self {
            ModelSpec::Storage { alpha, beta } => {
                positive(tag, "alpha", *alpha)?;
                positive(tag, "beta", *beta)
            }
            ModelSpec::Bandit { p, q, g } => {
                positive(tag, "g", *g)?;
                if !(0.0 < *q && q < p && *p < 1.0) {
                    return Err(ModelError::constraint(tag, "requires 0 < q < p < 1"));
                }
                Ok(())
            }
            ModelSpec::Tcp { lambda } => positive(tag, "lambda", *lambda),
            ModelSpec::Aimd(spec) => {
                match &spec.rate {
                    AimdRate::Constant(c) if !(c.is_finite() && *c >= 0.0) => {
                        return Err(ModelError::constraint(tag, "requires a nonnegative rate"))
                    }
                    AimdRate::Linear { intercept, slope }
                        if !(intercept.is_finite()
                            && slope.is_finite()
                            && *intercept >= 0.0
                            && *slope >= 0.0) =>
                    {
                        return Err(ModelError::constraint(
                            tag,
                            "requires nonnegative rate intercept and slope",
                        ))
                    }
                    _ => {}
                }
                match &spec.jump {
                    JumpLaw::Fixed(v) if !(0.0..=1.0).contains(v) => Err(ModelError::constraint(
                        tag,
                        "requires the jump factor in [0, 1]",
                    )),
                    JumpLaw::Uniform { low, high } if !(0.0 <= *low && low < high && *high <= 1.0) => {
                        Err(ModelError::constraint(tag, "requires 0 <= jump_low < jump_high <= 1"))
                    }
                    JumpLaw::Power(t) => positive(tag, "jump_power", *t),
                    _ => Ok(()),
                }
            }
            ModelSpec::SwitchedLinear { alpha, r } => {
                positive(tag, "alpha", *alpha)?;
                positive(tag, "r", *r)
            }
            ModelSpec::Dim1 {
                alpha0,
                alpha1,
                lambda0,
                lambda1,
            } => {
                positive(tag, "alpha0", *alpha0)?;
                positive(tag, "alpha1", *alpha1)?;
                positive(tag, "lambda0", *lambda0)?;
                positive(tag, "lambda1", *lambda1)
            }
            ModelSpec::PlanarRotation { lambda0, lambda1 } => {
                positive(tag, "lambda0", *lambda0)?;
                positive(tag, "lambda1", *lambda1)
            }
            ModelSpec::Telegraph { a, b } => {
                positive(tag, "a", *a)?;
                if !(a < b) || !b.is_finite() {
                    return Err(ModelError::constraint(tag, "requires a < b"));
                }
                Ok(())
            }
            ModelSpec::MorrisLecar(p) => {
                if p.channels < 1 {
                    return Err(ModelError::constraint(tag, "requires channels >= 1"));
                }
                positive(tag, "capacitance", p.capacitance)?;
                for (i, g) in p.conductance.iter().enumerate() {
                    positive(tag, &format!("g{}", i + 1), *g)?;
                }
                for (i, s) in p.slope.iter().enumerate() {
                    positive(tag, &format!("v{}_slope", i + 1), *s)?;
                }
                let finite = [p.current]
                    .iter()
                    .chain(&p.reversal)
                    .chain(&p.rate_scale)
                    .chain(&p.half_activation)
                    .all(|v| v.is_finite());
                if !finite {
                    return Err(ModelError::constraint(tag, "requires finite parameters"));
                }
                Ok(())
            }
        }
    }

    /// Canonical text form: `variant = <tag>` followed by one `key = value`
    /// line per parameter. Fails for AIMD laws given as closures.
    pub fn to_text(&self) -> Result<String, ModelError> {
        let mut out = format!("variant = {}\n", self.tag());
        for (k, v) in self.params()? {
            out.push_str(&format!("{k} = {v}\n"));
        }
        Ok(out)
    }

    fn params(&self) -> Result<Vec<(String, String)>, ModelError> {
        let num = |k: &str, v: f64| (k.to_string(), format!("{v}"));
        Ok(match self {
            ModelSpec::Storage { alpha, beta } => vec![num("alpha", *alpha), num("beta", *beta)],
            ModelSpec::Bandit { p, q, g } => vec![num("p", *p), num("q", *q), num("g", *g)],
            ModelSpec::Tcp { lambda } => vec![num("lambda", *lambda)],
            ModelSpec::Aimd(spec) => {
                let mut v = Vec::new();
                match &spec.rate {
                    AimdRate::Constant(c) => {
                        v.push(("rate".into(), "constant".into()));
                        v.push(num("rate_value", *c));
                    }
                    AimdRate::Linear { intercept, slope } => {
                        v.push(("rate".into(), "linear".into()));
                        v.push(num("rate_intercept", *intercept));
                        v.push(num("rate_slope", *slope));
                    }
                    AimdRate::Custom { .. } => {
                        return Err(ModelError::constraint("aimd", "custom rate has no text form"))
                    }
                }
                match &spec.jump {
                    JumpLaw::Fixed(f) => {
                        v.push(("jump".into(), "fixed".into()));
                        v.push(num("jump_value", *f));
                    }
                    JumpLaw::Uniform { low, high } => {
                        v.push(("jump".into(), "uniform".into()));
                        v.push(num("jump_low", *low));
                        v.push(num("jump_high", *high));
                    }
                    JumpLaw::Power(t) => {
                        v.push(("jump".into(), "power".into()));
                        v.push(num("jump_power", *t));
                    }
                    JumpLaw::Quantile(_) => {
                        return Err(ModelError::constraint("aimd", "custom jump law has no text form"))
                    }
                }
                v
            }
            ModelSpec::SwitchedLinear { alpha, r } => vec![num("alpha", *alpha), num("r", *r)],
            ModelSpec::Dim1 {
                alpha0,
                alpha1,
                lambda0,
                lambda1,
            } => vec![
                num("alpha0", *alpha0),
                num("alpha1", *alpha1),
                num("lambda0", *lambda0),
                num("lambda1", *lambda1),
            ],
            ModelSpec::PlanarRotation { lambda0, lambda1 } => {
                vec![num("lambda0", *lambda0), num("lambda1", *lambda1)]
            }
            ModelSpec::Telegraph { a, b } => vec![num("a", *a), num("b", *b)],
            ModelSpec::MorrisLecar(p) => vec![
                num("capacitance", p.capacitance),
                num("current", p.current),
                num("g1", p.conductance[0]),
                num("g2", p.conductance[1]),
                num("g3", p.conductance[2]),
                num("v1", p.reversal[0]),
                num("v2", p.reversal[1]),
                num("v3", p.reversal[2]),
                num("c1", p.rate_scale[0]),
                num("c2", p.rate_scale[1]),
                num("v1_half", p.half_activation[0]),
                num("v2_half", p.half_activation[1]),
                num("v1_slope", p.slope[0]),
                num("v2_slope", p.slope[1]),
                ("channels".into(), p.channels.to_string()),
            ],
        })
    }

    /// Parameter keys a variant may take (excluding `variant`).
    pub fn keys(variant: &str) -> Option<&'static [&'static str]> {
        Some(match variant {
            "storage" => &["alpha", "beta"],
            "bandit" => &["p", "q", "g"],
            "tcp" => &["lambda"],
            "aimd" => &[
                "rate",
                "rate_value",
                "rate_intercept",
                "rate_slope",
                "jump",
                "jump_value",
                "jump_low",
                "jump_high",
                "jump_power",
            ],
            "switched-linear" => &["alpha", "r"],
            "dim1" => &["alpha0", "alpha1", "lambda0", "lambda1"],
            "planar-rotation" => &["lambda0", "lambda1"],
            "telegraph" => &["a", "b"],
            "morris-lecar" => &[
                "capacitance",
                "current",
                "g1",
                "g2",
                "g3",
                "v1",
                "v2",
                "v3",
                "c1",
                "c2",
                "v1_half",
                "v2_half",
                "v1_slope",
                "v2_slope",
                "channels",
            ],
            _ => return None,
        })
    }

    /// Builds and validates a spec from already-split parameters.
    pub fn from_params(variant: &str, params: &BTreeMap<String, String>) -> Result<Self, ModelError> {
        let allowed = Self::keys(variant).ok_or_else(|| ModelError::UnknownVariant(variant.into()))?;
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ModelError::UnknownKey(k.clone()));
        }
        let text = |k: &str| -> Result<&str, ModelError> {
            params
                .get(k)
                .map(String::as_str)
                .ok_or_else(|| ModelError::MissingKey(k.into()))
        };
        let num = |k: &str| -> Result<f64, ModelError> {
            let raw = text(k)?;
            raw.trim().parse::<f64>().map_err(|_| ModelError::BadValue {
                key: k.into(),
                value: raw.into(),
            })
        };
        let spec = match variant {
            "storage" => ModelSpec::Storage {
                alpha: num("alpha")?,
                beta: num("beta")?,
            },
            "bandit" => ModelSpec::Bandit {
                p: num("p")?,
                q: num("q")?,
                g: num("g")?,
            },
            "tcp" => ModelSpec::Tcp {
                lambda: num("lambda")?,
            },
            "aimd" => {
                let rate = match text("rate")? {
                    "constant" => AimdRate::Constant(num("rate_value")?),
                    "linear" => AimdRate::Linear {
                        intercept: num("rate_intercept")?,
                        slope: num("rate_slope")?,
                    },
                    other => {
                        return Err(ModelError::BadValue {
                            key: "rate".into(),
                            value: other.into(),
                        })
                    }
                };
                let jump = match text("jump")? {
                    "fixed" => JumpLaw::Fixed(num("jump_value")?),
                    "uniform" => JumpLaw::Uniform {
                        low: num("jump_low")?,
                        high: num("jump_high")?,
                    },
                    "power" => JumpLaw::Power(num("jump_power")?),
                    other => {
                        return Err(ModelError::BadValue {
                            key: "jump".into(),
                            value: other.into(),
                        })
                    }
                };
                ModelSpec::Aimd(AimdSpec { rate, jump })
            }
            "switched-linear" => ModelSpec::SwitchedLinear {
                alpha: num("alpha")?,
                r: num("r")?,
            },
            "dim1" => ModelSpec::Dim1 {
                alpha0: num("alpha0")?,
                alpha1: num("alpha1")?,
                lambda0: num("lambda0")?,
                lambda1: num("lambda1")?,
            },
            "planar-rotation" => ModelSpec::PlanarRotation {
                lambda0: num("lambda0")?,
                lambda1: num("lambda1")?,
            },
            "telegraph" => ModelSpec::Telegraph {
                a: num("a")?,
                b: num("b")?,
            },
            "morris-lecar" => {
                let raw = text("channels")?;
                let channels = raw.trim().parse::<usize>().map_err(|_| ModelError::BadValue {
                    key: "channels".into(),
                    value: raw.into(),
                })?;
                ModelSpec::MorrisLecar(MorrisLecarParams {
                    capacitance: num("capacitance")?,
                    current: num("current")?,
                    conductance: [num("g1")?, num("g2")?, num("g3")?],
                    reversal: [num("v1")?, num("v2")?, num("v3")?],
                    rate_scale: [num("c1")?, num("c2")?],
                    half_activation: [num("v1_half")?, num("v2_half")?],
                    slope: [num("v1_slope")?, num("v2_slope")?],
                    channels,
                })
            }
            _ => unreachable!("variant checked above"),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses the canonical text form (`#` starts a comment).
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut variant = None;
        let mut params = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ModelError::BadValue {
                    key: line.into(),
                    value: String::new(),
                })?;
            let (k, v) = (k.trim(), v.trim());
            if k == "variant" {
                variant = Some(v.to_string());
            } else {
                params.insert(k.to_string(), v.to_string());
            }
        }
        let variant = variant.ok_or_else(|| ModelError::MissingKey("variant".into()))?;
        Self::from_params(&variant, &params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn telegraph_ordering_is_enforced() {
        let err = ModelSpec::Telegraph { a: 2.0, b: 1.0 }.validate().unwrap_err();
        assert!(err.to_string().contains("requires a < b"), "{err}");
    }

    #[test]
    fn zero_channels_rejected() {
        let mut p = MorrisLecarParams::reference();
        p.channels = 0;
        assert!(ModelSpec::MorrisLecar(p).validate().is_err());
    }

    #[test]
    fn bandit_ordering() {
        assert!(ModelSpec::Bandit { p: 0.5, q: 0.6, g: 1.0 }.validate().is_err());
        assert!(ModelSpec::Bandit { p: 0.6, q: 0.5, g: 1.0 }.validate().is_ok());
    }

    #[test]
    fn text_form_round_trips_every_variant() {
        let specs = vec![
            ModelSpec::Storage { alpha: 1.5, beta: 0.25 },
            ModelSpec::Bandit { p: 0.7, q: 0.2, g: 0.1 },
            ModelSpec::Tcp { lambda: 2.0 },
            ModelSpec::Aimd(AimdSpec {
                rate: AimdRate::Linear { intercept: 0.5, slope: 0.1 },
                jump: JumpLaw::Uniform { low: 0.2, high: 0.8 },
            }),
            ModelSpec::SwitchedLinear { alpha: 0.1, r: 4.6 },
            ModelSpec::Dim1 { alpha0: 1.0, alpha1: 2.0, lambda0: 0.5, lambda1: 3.0 },
            ModelSpec::PlanarRotation { lambda0: 1.0, lambda1: 2.0 },
            ModelSpec::Telegraph { a: 1.0, b: 2.0 },
            ModelSpec::MorrisLecar(MorrisLecarParams::reference()),
        ];
        for spec in specs {
            let text = spec.to_text().unwrap();
            let back = ModelSpec::parse(&text).unwrap();
            assert_eq!(back.to_text().unwrap(), text);
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ModelSpec::parse("variant = tcp\nlambda = 1\nbeta = 2\n").unwrap_err();
        assert!(matches!(err, ModelError::UnknownKey(k) if k == "beta"));
    }
}
