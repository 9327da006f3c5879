//! Typed hyperparameter spaces with expert priors.
//!
//! Numeric priors are Gaussians centered on the default in the unit
//! coordinate of the dimension (log-transformed when `log` is set),
//! truncated to `[0, 1]` and renormalized. The standard deviation is a
//! fraction of the unit range set by [`Confidence`].

mod builtin;
mod prior;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngState;

pub use builtin::{builtin_names, builtin_space, group_catalog_sizes};
pub use prior::{normal_cdf, prior_density};

/// A concrete hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Choice(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            Value::Choice(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Choice(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Choice(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Low,
    #[default]
    Medium,
    High,
    /// Flat prior over the range.
    Uniform,
}

impl Confidence {
    /// Prior standard deviation as a fraction of the unit range, `None`
    /// for a flat prior.
    pub fn std_fraction(self) -> Option<f64> {
        match self {
            Confidence::Low => Some(0.5),
            Confidence::Medium => Some(0.25),
            Confidence::High => Some(0.125),
            Confidence::Uniform => None,
        }
    }

    /// Prior mass on the default choice of a categorical dimension.
    pub fn default_choice_weight(self, n_choices: usize) -> f64 {
        match self {
            Confidence::Low => 0.25_f64.max(1.0 / n_choices as f64),
            Confidence::Medium => 0.5,
            Confidence::High => 0.75,
            Confidence::Uniform => 1.0 / n_choices as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Float { lo: f64, hi: f64 },
    Integer { lo: i64, hi: i64 },
    Categorical { choices: Vec<String> },
}

/// One hyperparameter: `name`, type and range, log flag, default and prior
/// confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DimensionRecord", into = "DimensionRecord")]
pub struct Dimension {
    pub name: String,
    pub domain: Domain,
    pub log_scale: bool,
    pub default: Value,
    pub confidence: Confidence,
}

/// On-disk layout, mirroring the table columns.
#[derive(Serialize, Deserialize)]
struct DimensionRecord {
    name: String,
    #[serde(rename = "type")]
    kind: String,
    range: RangeRecord,
    #[serde(default)]
    log: bool,
    default: Value,
    #[serde(default)]
    confidence: Confidence,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RangeRecord {
    Numeric([f64; 2]),
    Choices(Vec<String>),
}

impl TryFrom<DimensionRecord> for Dimension {
    type Error = Error;

    fn try_from(r: DimensionRecord) -> Result<Self> {
        let domain = match (r.kind.as_str(), r.range) {
            ("float", RangeRecord::Numeric([lo, hi])) => Domain::Float { lo, hi },
            ("integer", RangeRecord::Numeric([lo, hi])) => {
                if lo.fract() != 0.0 || hi.fract() != 0.0 {
                    return Err(Error::InvalidConfiguration(format!("{}: integer bounds expected", r.name)));
                }
                Domain::Integer {
                    lo: lo as i64,
                    hi: hi as i64,
                }
            }
            ("categorical", RangeRecord::Choices(choices)) => Domain::Categorical { choices },
            (kind, _) => {
                return Err(Error::InvalidConfiguration(format!(
                    "{}: type `{kind}` does not match its range",
                    r.name
                )))
            }
        };
        Dimension::new(r.name, domain, r.log, r.default, r.confidence)
    }
}

impl From<Dimension> for DimensionRecord {
    fn from(d: Dimension) -> Self {
        let (kind, range) = match d.domain {
            Domain::Float { lo, hi } => ("float", RangeRecord::Numeric([lo, hi])),
            Domain::Integer { lo, hi } => ("integer", RangeRecord::Numeric([lo as f64, hi as f64])),
            Domain::Categorical { choices } => ("categorical", RangeRecord::Choices(choices)),
        };
        DimensionRecord {
            name: d.name,
            kind: kind.to_string(),
            range,
            log: d.log_scale,
            default: d.default,
            confidence: d.confidence,
        }
    }
}

impl Dimension {
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        log_scale: bool,
        default: Value,
        confidence: Confidence,
    ) -> Result<Self> {
        let name = name.into();
        let bad = |why: String| Err(Error::InvalidConfiguration(format!("dimension `{name}`: {why}")));
        match &domain {
            Domain::Float { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!("range [{lo}, {hi}] is empty"));
                }
                if log_scale && *lo <= 0.0 {
                    return bad("log scale needs a positive lower bound".into());
                }
            }
            Domain::Integer { lo, hi } => {
                if lo >= hi {
                    return bad(format!("range [{lo}, {hi}] is empty"));
                }
                if log_scale && *lo <= 0 {
                    return bad("log scale needs a positive lower bound".into());
                }
            }
            Domain::Categorical { choices } => {
                if choices.is_empty() {
                    return bad("no choices".into());
                }
                if log_scale {
                    return bad("categorical dimensions cannot be log-scaled".into());
                }
                let mut sorted = choices.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != choices.len() {
                    return bad("duplicate choices".into());
                }
            }
        }
        let mut dim = Dimension {
            name,
            domain,
            log_scale,
            default: Value::Int(0),
            confidence,
        };
        dim.default = dim.check(&default)?;
        Ok(dim)
    }

    pub fn float(name: &str, lo: f64, hi: f64, log: bool, default: f64) -> Result<Self> {
        Self::new(name, Domain::Float { lo, hi }, log, Value::Float(default), Confidence::Medium)
    }

    pub fn integer(name: &str, lo: i64, hi: i64, log: bool, default: i64) -> Result<Self> {
        Self::new(name, Domain::Integer { lo, hi }, log, Value::Int(default), Confidence::Medium)
    }

    pub fn categorical(name: &str, choices: &[&str], default: &str) -> Result<Self> {
        Self::new(
            name,
            Domain::Categorical {
                choices: choices.iter().map(|s| s.to_string()).collect(),
            },
            false,
            Value::Choice(default.to_string()),
            Confidence::Medium,
        )
    }

    pub fn with_confidence(mut self, confidence: Confidence) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self.domain, Domain::Categorical { .. })
    }

    /// Numeric bounds (`None` for categorical).
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match self.domain {
            Domain::Float { lo, hi } => Some((lo, hi)),
            Domain::Integer { lo, hi } => Some((lo as f64, hi as f64)),
            Domain::Categorical { .. } => None,
        }
    }

    pub fn choices(&self) -> Option<&[String]> {
        match &self.domain {
            Domain::Categorical { choices } => Some(choices),
            _ => None,
        }
    }

    /// Validates `value` and returns it in canonical form (integral floats
    /// become `Int` for integer dimensions, integers become `Float` for
    /// float dimensions).
    pub fn check(&self, value: &Value) -> Result<Value> {
        let out_of_range = || {
            Error::InvalidConfiguration(format!("`{}` = {value} is outside its range", self.name))
        };
        match (&self.domain, value) {
            (Domain::Float { lo, hi }, v) if v.as_f64().is_some() => {
                let x = v.as_f64().unwrap();
                if x.is_finite() && x >= *lo && x <= *hi {
                    Ok(Value::Float(x))
                } else {
                    Err(out_of_range())
                }
            }
            (Domain::Integer { lo, hi }, v) if v.as_f64().is_some() => {
                let x = v.as_f64().unwrap();
                if x.fract() != 0.0 {
                    return Err(Error::InvalidConfiguration(format!("`{}` = {x} is not an integer", self.name)));
                }
                let i = x as i64;
                if i >= *lo && i <= *hi {
                    Ok(Value::Int(i))
                } else {
                    Err(out_of_range())
                }
            }
            (Domain::Categorical { choices }, Value::Choice(s)) => {
                if choices.contains(s) {
                    Ok(value.clone())
                } else {
                    Err(out_of_range())
                }
            }
            _ => Err(Error::InvalidConfiguration(format!(
                "`{}` = {value} has the wrong type",
                self.name
            ))),
        }
    }

    fn transform(&self, x: f64) -> f64 {
        if self.log_scale {
            x.ln()
        } else {
            x
        }
    }

    fn untransform(&self, t: f64) -> f64 {
        if self.log_scale {
            t.exp()
        } else {
            t
        }
    }

    /// Width of the mapped interval in the search coordinate (log units
    /// when log-scaled).
    pub fn search_width(&self) -> Option<f64> {
        self.span().map(|(lo, hi)| self.transform(hi) - self.transform(lo))
    }

    /// Raw interval mapped onto `[0, 1]`: the range itself for floats, and
    /// `[lo - 0.5, hi + 0.5]` for integers so each integer owns a bin of
    /// equal width.
    fn span(&self) -> Option<(f64, f64)> {
        match self.domain {
            Domain::Float { lo, hi } => Some((lo, hi)),
            Domain::Integer { lo, hi } => Some((lo as f64 - 0.5, hi as f64 + 0.5)),
            Domain::Categorical { .. } => None,
        }
    }

    /// Unit-coordinate interval of integer `k`'s bin.
    pub(crate) fn integer_bin(&self, k: i64) -> (f64, f64) {
        let (a, b) = self.span().unwrap();
        let (ta, tb) = (self.transform(a), self.transform(b));
        let u = |x: f64| ((self.transform(x) - ta) / (tb - ta)).clamp(0.0, 1.0);
        (u(k as f64 - 0.5), u(k as f64 + 0.5))
    }

    /// Position in `[0, 1]`: linear (log-linear) for numeric dimensions,
    /// bin center `(i + 0.5) / k` for the `i`-th of `k` choices.
    pub fn to_unit(&self, value: &Value) -> Result<f64> {
        let v = self.check(value)?;
        Ok(match &self.domain {
            Domain::Categorical { choices } => {
                let i = choices.iter().position(|c| Some(c.as_str()) == v.as_str()).unwrap();
                (i as f64 + 0.5) / choices.len() as f64
            }
            _ => {
                let (a, b) = self.span().unwrap();
                let (ta, tb) = (self.transform(a), self.transform(b));
                ((self.transform(v.as_f64().unwrap()) - ta) / (tb - ta)).clamp(0.0, 1.0)
            }
        })
    }

    pub fn from_unit(&self, u: f64) -> Result<Value> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidConfiguration(format!(
                "unit coordinate {u} for `{}` outside [0, 1]",
                self.name
            )));
        }
        Ok(match &self.domain {
            Domain::Categorical { choices } => {
                let k = choices.len();
                let i = ((u * k as f64).floor() as usize).min(k - 1);
                Value::Choice(choices[i].clone())
            }
            Domain::Float { lo, hi } => {
                let (tlo, thi) = (self.transform(*lo), self.transform(*hi));
                Value::Float(self.untransform(tlo + u * (thi - tlo)).clamp(*lo, *hi))
            }
            Domain::Integer { lo, hi } => {
                let (a, b) = self.span().unwrap();
                let (ta, tb) = (self.transform(a), self.transform(b));
                let x = self.untransform(ta + u * (tb - ta)).round() as i64;
                Value::Int(x.clamp(*lo, *hi))
            }
        })
    }

    /// One draw from this dimension's prior.
    pub fn sample(&self, rng: &mut RngState) -> Value {
        match &self.domain {
            Domain::Categorical { choices } => {
                let k = choices.len();
                let default = choices.iter().position(|c| Some(c.as_str()) == self.default.as_str()).unwrap();
                let w = self.confidence.default_choice_weight(k);
                if k == 1 || rng.uniform() < w {
                    Value::Choice(choices[default].clone())
                } else {
                    let mut i = rng.below(k - 1);
                    if i >= default {
                        i += 1;
                    }
                    Value::Choice(choices[i].clone())
                }
            }
            _ => {
                let u = match self.confidence.std_fraction() {
                    None => rng.uniform(),
                    Some(sd) => {
                        let center = self.to_unit(&self.default).unwrap();
                        loop {
                            let u = center + sd * rng.standard_normal();
                            if (0.0..=1.0).contains(&u) {
                                break u;
                            }
                        }
                    }
                };
                self.from_unit(u).unwrap()
            }
        }
    }
}

/// Cross-dimension validity rule attached to a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// At least one `p_*_transformations` must be positive and every
    /// `num_*_transformations` must fit its group in the default catalog.
    GroupAugment,
}

/// Replaces a dimension's prior confidence and/or default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorOverride {
    #[serde(default)]
    pub confidence: Option<Confidence>,
    #[serde(default)]
    pub default: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub name: String,
    pub dimensions: Vec<Dimension>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<Constraint>,
}

/// A point in a space: dimension name -> value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    pub values: BTreeMap<String, Value>,
}

impl Configuration {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn f64(&self, name: &str) -> Result<f64> {
        self.get(name)
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::InvalidConfiguration(format!("missing numeric `{name}`")))
    }

    pub fn set(&mut self, name: &str, value: Value) {
        self.values.insert(name.to_string(), value);
    }
}

impl FromIterator<(String, Value)> for Configuration {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Configuration {
            values: iter.into_iter().collect(),
        }
    }
}

impl SearchSpace {
    pub fn new(name: impl Into<String>, dimensions: Vec<Dimension>) -> Result<Self> {
        let space = SearchSpace {
            name: name.into(),
            dimensions,
            constraint: None,
        };
        space.check_names()?;
        Ok(space)
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraint = Some(c);
        self
    }

    fn check_names(&self) -> Result<()> {
        let mut names: Vec<&str> = self.dimensions.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfiguration(format!(
                "space `{}` has duplicate dimension names",
                self.name
            )));
        }
        Ok(())
    }

    pub fn with_overrides(mut self, overrides: &BTreeMap<String, PriorOverride>) -> Result<Self> {
        for (name, o) in overrides {
            let d = self
                .dimensions
                .iter_mut()
                .find(|d| &d.name == name)
                .ok_or_else(|| Error::InvalidConfiguration(format!("prior override for unknown `{name}`")))?;
            if let Some(c) = o.confidence {
                d.confidence = c;
            }
            if let Some(v) = &o.default {
                d.default = d.check(v)?;
            }
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.dimensions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimensions.is_empty()
    }

    pub fn dimension(&self, name: &str) -> Option<&Dimension> {
        self.dimensions.iter().find(|d| d.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d.name == name)
    }

    /// Builtin name or path to a JSON space file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if let Ok(space) = builtin_space(name_or_path) {
            return Ok(space);
        }
        let path = Path::new(name_or_path);
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let space: SearchSpace = serde_json::from_str(&text)?;
            space.check_names()?;
            return Ok(space);
        }
        Err(Error::UnknownSpace(name_or_path.to_string()))
    }

    pub fn default_configuration(&self) -> Configuration {
        self.dimensions
            .iter()
            .map(|d| (d.name.clone(), d.default.clone()))
            .collect()
    }

    /// Checks completeness, ranges and the space constraint; returns the
    /// configuration in canonical value form.
    pub fn validate(&self, cfg: &Configuration) -> Result<Configuration> {
        for key in cfg.values.keys() {
            if self.dimension(key).is_none() {
                return Err(Error::InvalidConfiguration(format!(
                    "`{key}` is not a dimension of `{}`",
                    self.name
                )));
            }
        }
        let mut out = Configuration::default();
        for d in &self.dimensions {
            let v = cfg
                .get(&d.name)
                .ok_or_else(|| Error::InvalidConfiguration(format!("`{}` is unassigned", d.name)))?;
            out.set(&d.name, d.check(v)?);
        }
        if let Some(Constraint::GroupAugment) = self.constraint {
            check_group_augment(&out)?;
        }
        Ok(out)
    }

    /// Independent per-dimension prior draws, redrawn (up to 1000 times)
    /// until the space constraint holds.
    pub fn sample_from_prior(&self, rng: &mut RngState) -> Configuration {
        for _ in 0..1000 {
            let cfg: Configuration = self
                .dimensions
                .iter()
                .map(|d| (d.name.clone(), d.sample(rng)))
                .collect();
            if self.validate(&cfg).is_ok() {
                return cfg;
            }
        }
        self.default_configuration()
    }

    /// Uniform draw in the unit cube, decoded.
    pub fn sample_uniform(&self, rng: &mut RngState) -> Configuration {
        for _ in 0..1000 {
            let u: Vec<f64> = (0..self.len()).map(|_| rng.uniform()).collect();
            let cfg = self.from_unit_cube(&u).expect("unit draw in range");
            if self.validate(&cfg).is_ok() {
                return cfg;
            }
        }
        self.default_configuration()
    }

    pub fn to_unit_cube(&self, cfg: &Configuration) -> Result<Vec<f64>> {
        self.dimensions
            .iter()
            .map(|d| {
                let v = cfg
                    .get(&d.name)
                    .ok_or_else(|| Error::InvalidConfiguration(format!("`{}` is unassigned", d.name)))?;
                d.to_unit(v)
            })
            .collect()
    }

    pub fn from_unit_cube(&self, u: &[f64]) -> Result<Configuration> {
        if u.len() != self.len() {
            return Err(Error::InvalidConfiguration(format!(
                "expected {} coordinates, got {}",
                self.len(),
                u.len()
            )));
        }
        self.dimensions
            .iter()
            .zip(u)
            .map(|(d, &x)| Ok((d.name.clone(), d.from_unit(x)?)))
            .collect::<Result<BTreeMap<_, _>>>()
            .map(|values| Configuration { values })
    }

    /// Sum of per-dimension log prior densities in unit coordinates.
    pub fn log_prior_unit(&self, u: &[f64]) -> f64 {
        self.dimensions
            .iter()
            .zip(u)
            .map(|(d, &x)| prior::unit_density(d, x).ln())
            .sum()
    }
}

pub(crate) const GROUP_PROB_DIMS: [&str; 5] = [
    "p_color_transformations",
    "p_geometric_transformations",
    "p_non_rigid_transformations",
    "p_quality_transformations",
    "p_exotic_transformations",
];

pub(crate) const GROUP_COUNT_DIMS: [&str; 5] = [
    "num_color_transformations",
    "num_geometric_transformations",
    "num_non_rigid_transformations",
    "num_quality_transformations",
    "num_exotic_transformations",
];

fn check_group_augment(cfg: &Configuration) -> Result<()> {
    let probs: Vec<f64> = GROUP_PROB_DIMS.iter().map(|n| cfg.f64(n)).collect::<Result<_>>()?;
    if probs.iter().all(|&p| p <= 0.0) {
        return Err(Error::DegenerateProbabilities);
    }
    for (name, size) in GROUP_COUNT_DIMS.iter().zip(group_catalog_sizes()) {
        let n = cfg.f64(name)?;
        if n < 1.0 || n as usize > size {
            return Err(Error::InvalidConfiguration(format!(
                "`{name}` = {n} exceeds the group size {size}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn dimension_validation() {
        assert!(Dimension::float("x", 1.0, 1.0, false, 1.0).is_err());
        assert!(Dimension::float("x", 0.0, 1.0, true, 0.5).is_err());
        assert!(Dimension::float("x", 0.0, 1.0, false, 1.5).is_err());
        assert!(Dimension::categorical("c", &["a", "a"], "a").is_err());
        assert!(Dimension::categorical("c", &["a", "b"], "z").is_err());
        assert!(Dimension::integer("i", 0, 10, false, 3).is_ok());
    }

    #[test]
    fn learning_rate_midpoint() {
        let d = Dimension::float("learning_rate", 0.003, 0.3, true, 0.03).unwrap();
        assert!((d.to_unit(&Value::Float(0.03)).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(d.to_unit(&Value::Float(0.003)).unwrap(), 0.0);
        assert_eq!(d.to_unit(&Value::Float(0.3)).unwrap(), 1.0);
    }

    #[test]
    fn from_unit_rejects_outside() {
        let space = builtin_space("randaugment").unwrap();
        assert!(space.from_unit_cube(&[0.5, 1.2]).is_err());
        assert!(space.from_unit_cube(&[0.5]).is_err());
    }

    #[test]
    fn integers_coerce() {
        let d = Dimension::integer("n", 1, 5, false, 1).unwrap();
        assert_eq!(d.check(&Value::Float(3.0)).unwrap(), Value::Int(3));
        assert!(d.check(&Value::Float(3.5)).is_err());
        assert!(d.check(&Value::Choice("3".into())).is_err());
    }

    #[test]
    fn group_constraint() {
        let space = builtin_space("group_augment").unwrap();
        let mut cfg = space.default_configuration();
        assert!(space.validate(&cfg).is_ok());
        for n in GROUP_PROB_DIMS {
            cfg.set(n, Value::Float(0.0));
        }
        assert!(matches!(space.validate(&cfg), Err(Error::DegenerateProbabilities)));
    }

    #[test]
    fn validate_rejects_extra_and_missing() {
        let space = builtin_space("randaugment").unwrap();
        let mut cfg = space.default_configuration();
        cfg.set("bogus", Value::Int(1));
        assert!(space.validate(&cfg).is_err());
        let mut cfg = space.default_configuration();
        cfg.values.remove("num_ops");
        assert!(space.validate(&cfg).is_err());
    }

    #[test]
    fn uniform_samples_valid() {
        let space = builtin_space("simsiam_training").unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let cfg = space.sample_uniform(&mut rng);
            space.validate(&cfg).unwrap();
        }
    }

    #[test]
    fn overrides() {
        let space = builtin_space("simsiam_aug").unwrap();
        let o = BTreeMap::from([(
            "p_grayscale".to_string(),
            PriorOverride {
                confidence: Some(Confidence::High),
                default: Some(Value::Float(0.6)),
            },
        )]);
        let s = space.clone().with_overrides(&o).unwrap();
        let d = s.dimension("p_grayscale").unwrap();
        assert_eq!(d.confidence, Confidence::High);
        assert_eq!(d.default, Value::Float(0.6));
        let bad = BTreeMap::from([("nope".to_string(), PriorOverride::default())]);
        assert!(space.clone().with_overrides(&bad).is_err());
        let out = BTreeMap::from([(
            "p_grayscale".to_string(),
            PriorOverride {
                confidence: None,
                default: Some(Value::Float(2.0)),
            },
        )]);
        assert!(space.with_overrides(&out).is_err());
    }

    #[test]
    fn json_schema_round_trip() {
        for name in builtin_names() {
            let space = builtin_space(name).unwrap();
            let text = serde_json::to_string(&space).unwrap();
            let back: SearchSpace = serde_json::from_str(&text).unwrap();
            assert_eq!(back, space);
        }
        let rec = serde_json::to_value(builtin_space("simsiam_training").unwrap()).unwrap();
        assert_eq!(rec["dimensions"][3]["type"], "categorical");
        assert_eq!(rec["dimensions"][0]["log"], true);
    }
}
