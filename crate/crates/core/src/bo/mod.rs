//! Bayesian optimization with expert priors.
//!
//! A random forest fitted in unit-cube coordinates supplies a predictive
//! mean and variance; candidates are scored by expected improvement times
//! `prior(x)^(gamma / t)`, where `t` counts completed trials, so the prior
//! dominates early and fades as evidence accumulates.

mod driver;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::forest::{Forest, ForestParams};
use crate::harness::ObjectiveResponse;
use crate::rng::{splitmix64, RngState};
use crate::space::{normal_cdf, Configuration, SearchSpace};

pub use driver::{load_history, run_search, HistoryWriter, SearchSummary, HISTORY_FILE, SUMMARY_FILE, TIMINGS_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Pending,
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub id: u64,
    #[serde(rename = "values")]
    pub configuration: Configuration,
    pub score: Option<f64>,
    pub collapsed: bool,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Trial {
    fn check(&self) -> Result<()> {
        let ok = match self.status {
            TrialStatus::Completed => self.score.is_some_and(f64::is_finite),
            TrialStatus::Failed => self.score.is_none(),
            TrialStatus::Pending => self.score.is_none(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfiguration(format!(
                "trial {} is {:?} with score {:?}",
                self.id, self.status, self.score
            )))
        }
    }

    /// Completed and not collapsed.
    pub fn is_usable(&self) -> bool {
        self.status == TrialStatus::Completed && !self.collapsed
    }
}

/// Value imputed for trials still being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Liar {
    #[default]
    Mean,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoSettings {
    /// Prior draws before the surrogate takes over.
    pub n_init: usize,
    /// Prior decay constant; `None` means `budget / 10`.
    pub gamma: Option<f64>,
    pub prior_candidates: usize,
    pub uniform_candidates: usize,
    /// Collapsed and failed trials enter the surrogate at
    /// `worst - penalty_range_units * (best - worst)`.
    pub penalty_range_units: f64,
    pub liar: Liar,
    /// Improvement margin in expected improvement.
    pub xi: f64,
    /// Chance that a post-initial suggestion is a uniform draw.
    pub random_interleave: f64,
    pub forest: ForestParams,
}

impl Default for BoSettings {
    fn default() -> Self {
        Self {
            n_init: 10,
            gamma: None,
            prior_candidates: 2048,
            uniform_candidates: 2048,
            penalty_range_units: 1.0,
            liar: Liar::Mean,
            xi: 0.0,
            random_interleave: 0.2,
            forest: ForestParams::default(),
        }
    }
}

/// `gamma / t`, with `t` floored at one.
pub fn prior_exponent(gamma: f64, t: usize) -> f64 {
    gamma / t.max(1) as f64
}

pub fn expected_improvement(mean: f64, var: f64, best: f64, xi: f64) -> f64 {
    let gain = mean - best - xi;
    let sd = var.sqrt();
    if sd <= 1e-12 {
        return gain.max(0.0);
    }
    let z = gain / sd;
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    (gain * normal_cdf(z) + sd * pdf).max(0.0)
}

/// Scored candidate set from one acquisition step.
#[derive(Debug, Clone)]
pub struct Acquisition {
    pub candidates: Vec<Configuration>,
    pub ei: Vec<f64>,
    pub log_prior: Vec<f64>,
    pub exponent: f64,
}

fn argmax(scores: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.enumerate() {
        if s.is_finite() && best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

impl Acquisition {
    /// Log of `ei * prior^exponent`; `-inf` where expected improvement is
    /// zero.
    pub fn weighted_log_scores(&self) -> Vec<f64> {
        self.ei
            .iter()
            .zip(&self.log_prior)
            .map(|(&e, &lp)| if e > 0.0 { e.ln() + self.exponent * lp } else { f64::NEG_INFINITY })
            .collect()
    }

    pub fn argmax_weighted(&self) -> Option<usize> {
        argmax(self.weighted_log_scores().into_iter())
    }

    pub fn argmax_unweighted(&self) -> Option<usize> {
        argmax(self.ei.iter().map(|&e| if e > 0.0 { e } else { f64::NEG_INFINITY }))
    }
}

/// Search state: the space, the ordered trial history and the settings
/// that, with the seed, determine every suggestion.
#[derive(Debug, Clone)]
pub struct SearchState {
    space: SearchSpace,
    history: Vec<Trial>,
    budget: usize,
    seed: u64,
    settings: BoSettings,
    exec: Execution,
    base: RngState,
}

impl SearchState {
    pub fn new(space: SearchSpace, budget: usize, seed: u64, settings: BoSettings) -> Result<Self> {
        if budget == 0 {
            return Err(Error::param("budget", "must be at least 1"));
        }
        if settings.prior_candidates + settings.uniform_candidates == 0 {
            return Err(Error::param("bo", "no acquisition candidates"));
        }
        if space.is_empty() {
            return Err(Error::InvalidConfiguration("empty search space".into()));
        }
        Ok(Self {
            space,
            history: Vec::new(),
            budget,
            seed,
            settings,
            exec: Execution::default(),
            base: RngState::from_seed(seed),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn history(&self) -> &[Trial] {
        &self.history
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn settings(&self) -> &BoSettings {
        &self.settings
    }

    pub fn gamma(&self) -> f64 {
        self.settings.gamma.unwrap_or(self.budget as f64 / 10.0)
    }

    pub fn finished(&self) -> usize {
        self.history.iter().filter(|t| t.status != TrialStatus::Pending).count()
    }

    pub fn completed(&self) -> usize {
        self.history.iter().filter(|t| t.status == TrialStatus::Completed).count()
    }

    pub fn pending(&self) -> usize {
        self.history.len() - self.finished()
    }

    /// Whether another suggestion fits in the budget.
    pub fn can_suggest(&self) -> bool {
        self.history.len() < self.budget
    }

    pub fn is_done(&self) -> bool {
        self.finished() >= self.budget
    }

    /// Seed sent to the evaluator for trial `id`.
    pub fn eval_seed(&self, id: u64) -> u64 {
        splitmix64(splitmix64(self.seed) ^ splitmix64(id.wrapping_add(0x5EED)))
    }

    /// Reinstates finished trials read back from disk. Ids must be
    /// contiguous from 0.
    pub fn restore(&mut self, trials: Vec<Trial>) -> Result<()> {
        if !self.history.is_empty() {
            return Err(Error::InvalidConfiguration("restore into a non-empty state".into()));
        }
        for (i, mut t) in trials.into_iter().enumerate() {
            if t.id != i as u64 {
                return Err(Error::InvalidConfiguration(format!("trial ids not contiguous at {}", t.id)));
            }
            if t.status == TrialStatus::Pending {
                return Err(Error::InvalidConfiguration(format!("trial {} is still pending", t.id)));
            }
            t.check()?;
            t.configuration = self.space.validate(&t.configuration)?;
            self.history.push(t);
        }
        if self.finished() > self.budget {
            return Err(Error::BudgetExhausted(self.budget));
        }
        Ok(())
    }

    /// Proposes the next configuration and registers it as pending.
    pub fn suggest(&mut self) -> Result<(u64, Configuration)> {
        if !self.can_suggest() {
            return Err(Error::BudgetExhausted(self.budget));
        }
        let id = self.history.len() as u64;
        let mut rng = self.base.fork(id);
        let interleave = rng.uniform() < self.settings.random_interleave;
        let cfg = match self.acquisition_unless(interleave, &mut rng)? {
            None => self.space.sample_from_prior(&mut rng),
            Some(None) => self.space.sample_uniform(&mut rng),
            Some(Some(acq)) => {
                let i = acq.argmax_weighted().unwrap_or(0);
                acq.candidates[i].clone()
            }
        };
        self.history.push(Trial {
            id,
            configuration: cfg.clone(),
            score: None,
            collapsed: false,
            metrics: BTreeMap::new(),
            status: TrialStatus::Pending,
            error: None,
        });
        Ok((id, cfg))
    }

    /// Surrogate targets for every trial, or `None` while the prior phase
    /// lasts.
    fn training_set(&self) -> Option<(Vec<Vec<f64>>, Vec<f64>, f64)> {
        let usable: Vec<f64> = self.history.iter().filter(|t| t.is_usable()).filter_map(|t| t.score).collect();
        if self.finished() < self.settings.n_init || usable.is_empty() {
            return None;
        }
        let best = usable.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let worst = usable.iter().copied().fold(f64::INFINITY, f64::min);
        let unit = if best > worst { best - worst } else { 1.0 };
        let penalty = worst - self.settings.penalty_range_units * unit;
        let lie = match self.settings.liar {
            Liar::Mean => usable.iter().sum::<f64>() / usable.len() as f64,
            Liar::Min => worst,
            Liar::Max => best,
        };
        let mut x = Vec::with_capacity(self.history.len());
        let mut y = Vec::with_capacity(self.history.len());
        for t in &self.history {
            x.push(self.space.to_unit_cube(&t.configuration).expect("history holds valid configurations"));
            y.push(match t.status {
                TrialStatus::Pending => lie,
                _ if t.is_usable() => t.score.unwrap(),
                _ => penalty,
            });
        }
        Some((x, y, best))
    }

    fn acquisition_unless(&self, skip: bool, rng: &mut RngState) -> Result<Option<Option<Acquisition>>> {
        if skip {
            return Ok(self.training_set().map(|_| None));
        }
        Ok(self.acquisition(rng)?.map(Some))
    }

    /// Fits the surrogate and scores a fresh candidate set drawn from
    /// `rng`; `None` during the prior phase.
    pub fn acquisition(&self, rng: &mut RngState) -> Result<Option<Acquisition>> {
        let Some((x, y, best)) = self.training_set() else {
            return Ok(None);
        };
        let forest = Forest::fit(&x, &y, self.settings.forest, &rng.split(), self.exec)?;
        let mut candidates = Vec::with_capacity(self.settings.prior_candidates + self.settings.uniform_candidates);
        for _ in 0..self.settings.prior_candidates {
            candidates.push(self.space.sample_from_prior(rng));
        }
        for _ in 0..self.settings.uniform_candidates {
            candidates.push(self.space.sample_uniform(rng));
        }
        let units: Vec<Vec<f64>> = candidates
            .iter()
            .map(|c| self.space.to_unit_cube(c).expect("sampled configurations are valid"))
            .collect();
        let xi = self.settings.xi;
        let ei = self.exec.map(&units, |_, u| {
            let (m, v) = forest.predict(u);
            expected_improvement(m, v, best, xi)
        });
        let log_prior = units.iter().map(|u| self.space.log_prior_unit(u)).collect();
        Ok(Some(Acquisition {
            candidates,
            ei,
            log_prior,
            exponent: prior_exponent(self.gamma(), self.completed()),
        }))
    }

    /// Records the outcome of pending trial `trial.id`.
    pub fn report(&mut self, trial: Trial) -> Result<()> {
        let slot = self
            .history
            .get_mut(trial.id as usize)
            .ok_or(Error::UnknownTrial(trial.id))?;
        if slot.status != TrialStatus::Pending {
            return Err(Error::DuplicateReport(trial.id));
        }
        if trial.status == TrialStatus::Pending {
            return Err(Error::InvalidConfiguration("cannot report a pending trial".into()));
        }
        if trial.configuration != slot.configuration {
            return Err(Error::InvalidConfiguration(format!(
                "trial {} reported with a different configuration",
                trial.id
            )));
        }
        trial.check()?;
        *slot = trial;
        Ok(())
    }

    /// Reports an evaluator response for its trial.
    pub fn report_response(&mut self, resp: &ObjectiveResponse) -> Result<()> {
        let configuration = self
            .history
            .get(resp.trial_id as usize)
            .ok_or(Error::UnknownTrial(resp.trial_id))?
            .configuration
            .clone();
        let failed = resp.error.is_some() || resp.score.is_none();
        self.report(Trial {
            id: resp.trial_id,
            configuration,
            score: if failed { None } else { resp.score },
            collapsed: !failed && resp.collapsed,
            metrics: resp.metrics.clone(),
            status: if failed {
                TrialStatus::Failed
            } else {
                TrialStatus::Completed
            },
            error: resp.error.clone(),
        })
    }

    /// Top-`k` completed, non-collapsed trials by score; ties go to the
    /// lower id.
    pub fn best_trials(&self, k: usize) -> Result<Vec<&Trial>> {
        best_trials(&self.history, k)
    }

    /// Best usable score after each finished trial, in id order.
    pub fn incumbent_trajectory(&self) -> Vec<Option<f64>> {
        let mut best: Option<f64> = None;
        self.history
            .iter()
            .filter(|t| t.status != TrialStatus::Pending)
            .map(|t| {
                if t.is_usable() {
                    best = Some(best.map_or(t.score.unwrap(), |b: f64| b.max(t.score.unwrap())));
                }
                best
            })
            .collect()
    }
}

pub fn best_trials(history: &[Trial], k: usize) -> Result<Vec<&Trial>> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let mut usable: Vec<&Trial> = history.iter().filter(|t| t.is_usable()).collect();
    if usable.is_empty() {
        return Err(Error::NoCompletedTrials);
    }
    usable.sort_by(|a, b| b.score.unwrap().total_cmp(&a.score.unwrap()).then(a.id.cmp(&b.id)));
    usable.truncate(k);
    Ok(usable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Confidence, Dimension, Value};

    fn line(center: f64, conf: Confidence) -> SearchSpace {
        let d = Dimension::float("x", 0.0, 1.0, false, center).unwrap().with_confidence(conf);
        SearchSpace::new("line", vec![d]).unwrap()
    }

    fn complete(state: &mut SearchState, id: u64, score: f64) {
        let cfg = state.history()[id as usize].configuration.clone();
        state
            .report(Trial {
                id,
                configuration: cfg,
                score: Some(score),
                collapsed: false,
                metrics: BTreeMap::new(),
                status: TrialStatus::Completed,
                error: None,
            })
            .unwrap();
    }

    #[test]
    fn cold_start_is_a_prior_sample() {
        let mut s = SearchState::new(line(0.7, Confidence::Medium), 5, 1, BoSettings::default()).unwrap();
        let (id, cfg) = s.suggest().unwrap();
        assert_eq!(id, 0);
        s.space().validate(&cfg).unwrap();
    }

    #[test]
    fn report_errors() {
        let mut s = SearchState::new(line(0.7, Confidence::Medium), 2, 1, BoSettings::default()).unwrap();
        s.suggest().unwrap();
        complete(&mut s, 0, 0.5);
        assert_eq!(s.best_trials(1).unwrap()[0].id, 0);
        let dup = ObjectiveResponse::success(0, 0.4, false);
        assert!(matches!(s.report_response(&dup), Err(Error::DuplicateReport(0))));
        let unknown = ObjectiveResponse::success(7, 0.4, false);
        assert!(matches!(s.report_response(&unknown), Err(Error::UnknownTrial(7))));
        s.suggest().unwrap();
        assert!(matches!(s.suggest(), Err(Error::BudgetExhausted(2))));
    }

    #[test]
    fn best_trials_tie_break() {
        let mut s = SearchState::new(line(0.7, Confidence::Medium), 4, 1, BoSettings::default()).unwrap();
        for (id, score) in [0.5, 0.9, 0.9].into_iter().enumerate() {
            s.suggest().unwrap();
            complete(&mut s, id as u64, score);
        }
        let ids: Vec<u64> = s.best_trials(2).unwrap().iter().map(|t| t.id).collect();
        assert_eq!(ids, vec![1, 2]);
        s.suggest().unwrap();
        let mut resp = ObjectiveResponse::success(3, 0.99, true);
        resp.metrics.insert("embedding_std".into(), 0.0);
        s.report_response(&resp).unwrap();
        assert_eq!(s.best_trials(1).unwrap()[0].id, 1);
        assert!(matches!(best_trials(&[], 1), Err(Error::NoCompletedTrials)));
    }

    #[test]
    fn uniform_prior_leaves_argmax_unchanged() {
        let mut s = SearchState::new(line(0.3, Confidence::Uniform), 30, 5, BoSettings::default()).unwrap();
        for id in 0..10 {
            let (_, cfg) = s.suggest().unwrap();
            let x = cfg.f64("x").unwrap();
            complete(&mut s, id, 1.0 - (x - 0.7).powi(2));
        }
        let acq = s.acquisition(&mut RngState::from_seed(3)).unwrap().unwrap();
        assert!(acq.log_prior.iter().all(|&l| l == 0.0));
        assert_eq!(acq.argmax_weighted(), acq.argmax_unweighted());
    }

    #[test]
    fn constant_objective_does_not_stall() {
        let settings = BoSettings {
            n_init: 3,
            prior_candidates: 64,
            uniform_candidates: 64,
            ..Default::default()
        };
        let mut s = SearchState::new(line(0.5, Confidence::Uniform), 12, 2, settings).unwrap();
        while s.can_suggest() {
            let (id, cfg) = s.suggest().unwrap();
            s.space().validate(&cfg).unwrap();
            complete(&mut s, id, 0.3);
        }
        assert!(s.is_done());
    }

    #[test]
    fn exponent_decreases() {
        for t in 1..100 {
            assert!(prior_exponent(5.0, t + 1) < prior_exponent(5.0, t));
        }
    }

    #[test]
    fn ei_reference_values() {
        assert_eq!(expected_improvement(1.0, 0.0, 0.5, 0.0), 0.5);
        assert_eq!(expected_improvement(0.2, 0.0, 0.5, 0.0), 0.0);
        // mean == best: sd * pdf(0)
        let ei = expected_improvement(0.5, 0.04, 0.5, 0.0);
        assert!((ei - 0.2 * 0.3989422804014327).abs() < 1e-12);
    }

    #[test]
    fn restore_requires_contiguous_ids() {
        let mut s = SearchState::new(line(0.5, Confidence::Medium), 5, 1, BoSettings::default()).unwrap();
        let t = Trial {
            id: 1,
            configuration: [("x".to_string(), Value::Float(0.2))].into_iter().collect(),
            score: Some(0.3),
            collapsed: false,
            metrics: BTreeMap::new(),
            status: TrialStatus::Completed,
            error: None,
        };
        assert!(s.restore(vec![t]).is_err());
    }
}
