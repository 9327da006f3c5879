use serde::{Deserialize, Serialize};

use super::{Objective, ObjectiveRequest};
use crate::bo::{best_trials, Trial};
use crate::error::{Error, Result};
use crate::rng::splitmix64;
use crate::space::Configuration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReevalEntry {
    pub trial_id: u64,
    pub configuration: Configuration,
    pub seeds: Vec<u64>,
    /// One entry per repeat; `None` where the evaluation failed.
    pub scores: Vec<Option<f64>>,
    pub errors: Vec<String>,
    pub mean: Option<f64>,
    /// Sample standard deviation over `sqrt(n)`.
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReevalReport {
    pub space: String,
    pub repeats: usize,
    pub entries: Vec<ReevalEntry>,
}

/// Seed for repeat `r` of trial `id`, distinct from the search seeds.
fn repeat_seed(base: u64, id: u64, r: usize) -> u64 {
    splitmix64(splitmix64(base ^ 0xA5A5_A5A5_A5A5_A5A5) ^ splitmix64((id << 20) ^ r as u64))
}

fn mean_se(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = xs.len();
    if n == 0 {
        return (None, None);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some((var / n as f64).sqrt()))
}

/// Evaluates each of the top-`k` trials `repeats` times with fresh seeds.
pub fn reevaluate_best(
    history: &[Trial],
    space_name: &str,
    k: usize,
    repeats: usize,
    objective: &dyn Objective,
    seed: u64,
) -> Result<ReevalReport> {
    if repeats == 0 {
        return Err(Error::param("repeats", "must be at least 1"));
    }
    let usable = history.iter().filter(|t| t.is_usable()).count();
    if usable < k {
        return Err(Error::InsufficientTrials {
            needed: k,
            have: usable,
        });
    }
    let top = best_trials(history, k)?;
    let mut evaluator = objective.spawn()?;
    let mut entries = Vec::with_capacity(top.len());
    for t in top {
        let mut entry = ReevalEntry {
            trial_id: t.id,
            configuration: t.configuration.clone(),
            seeds: Vec::with_capacity(repeats),
            scores: Vec::with_capacity(repeats),
            errors: Vec::new(),
            mean: None,
            std_error: None,
        };
        for r in 0..repeats {
            let s = repeat_seed(seed, t.id, r);
            let resp = evaluator.evaluate(&ObjectiveRequest::new(t.id, space_name, t.configuration.clone(), s));
            entry.seeds.push(s);
            if let Some(e) = &resp.error {
                entry.errors.push(format!("repeat {r}: {e}"));
            }
            entry.scores.push(resp.score);
        }
        let ok: Vec<f64> = entry.scores.iter().flatten().copied().collect();
        (entry.mean, entry.std_error) = mean_se(&ok);
        entries.push(entry);
    }
    Ok(ReevalReport {
        space: space_name.to_string(),
        repeats,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn se_reference() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, Some(2.5));
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((se.unwrap() - sd / 2.0).abs() < 1e-15);
        assert_eq!(mean_se(&[0.3; 5]).1, Some(0.0));
    }
}
