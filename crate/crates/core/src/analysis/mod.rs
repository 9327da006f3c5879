//! Post-hoc study of a finished search: first-order fANOVA importance and
//! per-hyperparameter density estimates, with CSV and JSON export.

mod density;
mod export;
mod fanova;

use serde::{Deserialize, Serialize};

use crate::bo::{Trial, TrialStatus};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::forest::ForestParams;
use crate::rng::RngState;
use crate::space::SearchSpace;

pub use density::{
    density_report, kde_on_grid, silverman_bandwidth, DensityGroup, DensityReport, DimensionDensity, GroupDensity,
    GRID_POINTS,
};
pub use export::{
    export_density, export_importance, read_density_csv, read_importance_csv, DensityRow, ExportFormat,
};
pub use fanova::{fanova_shares, FanovaShares};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    All,
    Best,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    /// Fraction of non-collapsed trials forming the "best" subset.
    pub best_fraction: f64,
    pub top_fraction: f64,
    pub bad_fraction: f64,
    pub forest: ForestParams,
    pub seed: u64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            best_fraction: 0.25,
            top_fraction: 0.2,
            bad_fraction: 0.2,
            forest: ForestParams::default(),
            seed: 0,
        }
    }
}

/// Non-collapsed completed trials; for `Best`, the top `best_fraction` of
/// them by score (at least one).
fn subset_trials<'a>(trials: &'a [Trial], subset: Subset, best_fraction: f64) -> Vec<&'a Trial> {
    let mut usable: Vec<&Trial> = trials
        .iter()
        .filter(|t| t.status == TrialStatus::Completed && !t.collapsed)
        .collect();
    if subset == Subset::Best {
        usable.sort_by(|a, b| b.score.unwrap().total_cmp(&a.score.unwrap()).then(a.id.cmp(&b.id)));
        let k = ((best_fraction * usable.len() as f64).round() as usize).clamp(1, usable.len().max(1));
        usable.truncate(k);
    }
    usable
}

/// First-order fANOVA shares over a trial subset. The full set needs at
/// least `2 d` usable trials; a best subset smaller than two trials is
/// reported as constant.
pub fn fanova_importance(
    trials: &[Trial],
    space: &SearchSpace,
    subset: Subset,
    settings: &AnalysisSettings,
    exec: Execution,
) -> Result<FanovaShares> {
    if !(settings.best_fraction > 0.0 && settings.best_fraction <= 1.0) {
        return Err(Error::param("best_fraction", "not in (0, 1]"));
    }
    let all = subset_trials(trials, Subset::All, settings.best_fraction);
    let needed = 2 * space.len();
    if all.len() < needed {
        return Err(Error::InsufficientTrials {
            needed,
            have: all.len(),
        });
    }
    let chosen = subset_trials(trials, subset, settings.best_fraction);
    if chosen.len() < 2 {
        return Ok(FanovaShares {
            shares: vec![0.0; space.len()],
            constant: true,
        });
    }
    let x: Vec<Vec<f64>> = chosen
        .iter()
        .map(|t| space.to_unit_cube(&t.configuration))
        .collect::<Result<_>>()?;
    let y: Vec<f64> = chosen.iter().map(|t| t.score.unwrap()).collect();
    fanova_shares(&x, &y, settings.forest, &RngState::from_seed(settings.seed), exec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRow {
    pub dimension: String,
    pub share_all: f64,
    pub share_best: f64,
    /// Shares as whole percentages, rounded to nearest.
    pub percent_all: i64,
    pub percent_best: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub best_fraction: f64,
    pub n_all: usize,
    pub n_best: usize,
    pub constant_all: bool,
    pub constant_best: bool,
    pub rows: Vec<ImportanceRow>,
}

pub fn percent(share: f64) -> i64 {
    (share * 100.0).round() as i64
}

impl ImportanceReport {
    pub fn from_shares(names: &[String], all: &FanovaShares, best: &FanovaShares) -> Self {
        Self {
            best_fraction: 0.25,
            n_all: 0,
            n_best: 0,
            constant_all: all.constant,
            constant_best: best.constant,
            rows: names
                .iter()
                .enumerate()
                .map(|(i, n)| ImportanceRow {
                    dimension: n.clone(),
                    share_all: all.shares[i],
                    share_best: best.shares[i],
                    percent_all: percent(all.shares[i]),
                    percent_best: percent(best.shares[i]),
                })
                .collect(),
        }
    }

    /// Rows sorted by `share_all`, largest first; ties keep space order.
    pub fn ranked(&self) -> Vec<&ImportanceRow> {
        let mut rows: Vec<&ImportanceRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.share_all.total_cmp(&a.share_all));
        rows
    }
}

/// Importance over all usable trials and over the best subset.
pub fn importance_report(
    trials: &[Trial],
    space: &SearchSpace,
    settings: &AnalysisSettings,
    exec: Execution,
) -> Result<ImportanceReport> {
    let all = fanova_importance(trials, space, Subset::All, settings, exec)?;
    let best = fanova_importance(trials, space, Subset::Best, settings, exec)?;
    let names: Vec<String> = space.dimensions.iter().map(|d| d.name.clone()).collect();
    let mut report = ImportanceReport::from_shares(&names, &all, &best);
    report.best_fraction = settings.best_fraction;
    report.n_all = subset_trials(trials, Subset::All, settings.best_fraction).len();
    report.n_best = subset_trials(trials, Subset::Best, settings.best_fraction).len();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_percentages() {
        let names = vec!["p_solarize".to_string(), "saturation_strength".to_string()];
        let s = FanovaShares {
            shares: vec![0.30, 0.23],
            constant: false,
        };
        let r = ImportanceReport::from_shares(&names, &s, &s);
        assert_eq!(r.rows[0].percent_all, 30);
        assert_eq!(r.rows[1].percent_best, 23);
        assert_eq!(percent(0.005), 1);
    }
}
