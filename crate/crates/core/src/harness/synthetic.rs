use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Evaluator, Objective, ObjectiveRequest, ObjectiveResponse, DEFAULT_CHANCE_LEVEL};
use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::space::{Configuration, SearchSpace};

/// Closed band of the collapse coordinate inside which `collapse_valley`
/// collapses.
pub const COLLAPSE_BAND: (f64, f64) = (0.45, 0.55);

/// Test surfaces over the unit coordinates `u` of a space with `d`
/// dimensions.
///
/// * `quadratic`: `1 - sum((u_i - 0.7)^2) / d`, maximal (1.0) at `u = 0.7`.
/// * `additive_mix`: `sum(w_i * u_i)` with `w_i` proportional to `2^-i`,
///   so earlier dimensions matter more.
/// * `collapse_valley`: collapsed at chance level when the collapse
///   coordinate (`p_grayscale` if present, else the first dimension's unit
///   value) lies in [`COLLAPSE_BAND`]; `1 - sum((u_i - 0.6)^2) / d`
///   elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    Quadratic,
    AdditiveMix,
    CollapseValley,
}

impl FromStr for Surface {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Surface::Quadratic),
            "additive_mix" => Ok(Surface::AdditiveMix),
            "collapse_valley" => Ok(Surface::CollapseValley),
            other => Err(Error::InvalidConfiguration(format!("unknown synthetic objective `{other}`"))),
        }
    }
}

impl Surface {
    pub fn name(self) -> &'static str {
        match self {
            Surface::Quadratic => "quadratic",
            Surface::AdditiveMix => "additive_mix",
            Surface::CollapseValley => "collapse_valley",
        }
    }

    pub fn additive_weights(d: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..d).map(|i| 0.5f64.powi(i as i32)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    /// Noise-free score and collapse flag.
    pub fn score(self, space: &SearchSpace, cfg: &Configuration) -> Result<(f64, bool)> {
        let cfg = space.validate(cfg)?;
        let u = space.to_unit_cube(&cfg)?;
        let d = u.len().max(1) as f64;
        let bowl = |c: f64| 1.0 - u.iter().map(|x| (x - c).powi(2)).sum::<f64>() / d;
        Ok(match self {
            Surface::Quadratic => (bowl(0.7), false),
            Surface::AdditiveMix => {
                let w = Self::additive_weights(u.len());
                (w.iter().zip(&u).map(|(w, x)| w * x).sum(), false)
            }
            Surface::CollapseValley => {
                let c = match cfg.get("p_grayscale").and_then(|v| v.as_f64()) {
                    Some(p) => p,
                    None => u.first().copied().unwrap_or(0.0),
                };
                if (COLLAPSE_BAND.0..=COLLAPSE_BAND.1).contains(&c) {
                    (DEFAULT_CHANCE_LEVEL, true)
                } else {
                    (bowl(0.6), false)
                }
            }
        })
    }
}

/// A surface bound to a space, optionally with Gaussian noise seeded by the
/// request seed (clamped to `[0, 1]`).
#[derive(Debug, Clone)]
pub struct SyntheticObjective {
    pub surface: Surface,
    pub space: SearchSpace,
    pub noise_std: f64,
}

impl SyntheticObjective {
    pub fn new(surface: Surface, space: SearchSpace) -> Self {
        Self {
            surface,
            space,
            noise_std: 0.0,
        }
    }

    pub fn with_noise(mut self, std: f64) -> Self {
        self.noise_std = std;
        self
    }

    pub fn respond(&self, req: &ObjectiveRequest) -> ObjectiveResponse {
        if req.space_name != self.space.name {
            return ObjectiveResponse::failure(
                req.trial_id,
                format!("objective is defined over `{}`, not `{}`", self.space.name, req.space_name),
            );
        }
        match self.surface.score(&self.space, &req.values) {
            Err(e) => ObjectiveResponse::failure(req.trial_id, e.to_string()),
            Ok((score, collapsed)) => {
                let score = if self.noise_std > 0.0 && !collapsed {
                    let mut rng = RngState::from_seed(req.seed);
                    (score + self.noise_std * rng.standard_normal()).clamp(0.0, 1.0)
                } else {
                    score
                };
                let mut r = ObjectiveResponse::success(req.trial_id, score, collapsed);
                r.metrics = BTreeMap::from([("embedding_std".to_string(), if collapsed { 0.0 } else { 1.0 })]);
                r
            }
        }
    }
}

struct SyntheticEvaluator<'a>(&'a SyntheticObjective);

impl Evaluator for SyntheticEvaluator<'_> {
    fn evaluate(&mut self, request: &ObjectiveRequest) -> ObjectiveResponse {
        self.0.respond(request)
    }
}

impl Objective for SyntheticObjective {
    fn spawn(&self) -> Result<Box<dyn Evaluator + '_>> {
        Ok(Box::new(SyntheticEvaluator(self)))
    }

    fn describe(&self) -> String {
        format!("synthetic:{}", self.surface.name())
    }
}
