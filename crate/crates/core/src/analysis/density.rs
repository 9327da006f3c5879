use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bo::{Trial, TrialStatus};
use crate::error::{Error, Result};
use crate::space::{Dimension, Domain, SearchSpace};

pub const GRID_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityGroup {
    Top,
    Bad,
    All,
    Collapsed,
}

impl DensityGroup {
    pub const ALL: [DensityGroup; 4] = [DensityGroup::Top, DensityGroup::Bad, DensityGroup::All, DensityGroup::Collapsed];

    pub fn name(self) -> &'static str {
        match self {
            DensityGroup::Top => "top",
            DensityGroup::Bad => "bad",
            DensityGroup::All => "all",
            DensityGroup::Collapsed => "collapsed",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDensity {
    pub n: usize,
    pub empty: bool,
    /// Kernel bandwidth in the search coordinate (numeric dimensions).
    pub bandwidth: Option<f64>,
    /// Density on the grid, or per-choice frequency for categorical
    /// dimensions. All zeros when `empty`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionDensity {
    pub dimension: String,
    /// Densities are with respect to `ln x` for log-scaled dimensions.
    pub log_scale: bool,
    /// Grid points (raw values) for numeric dimensions, choice names for
    /// categorical ones.
    pub grid: Vec<String>,
    pub groups: BTreeMap<DensityGroup, GroupDensity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub top_fraction: f64,
    pub bad_fraction: f64,
    pub group_sizes: BTreeMap<DensityGroup, usize>,
    pub dimensions: Vec<DimensionDensity>,
}

/// Silverman's rule, `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`, falling back
/// to whichever spread is non-zero, then to `width / 100` for a degenerate
/// sample, and never below `width / 128`.
pub fn silverman_bandwidth(xs: &[f64], width: f64) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (sorted.len() - 1) as f64;
        let (i, f) = (pos.floor() as usize, pos.fract());
        let j = (i + 1).min(sorted.len() - 1);
        sorted[i] + f * (sorted[j] - sorted[i])
    };
    let iqr = (q(0.75) - q(0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => return (width / 100.0).max(width / 128.0),
    };
    (0.9 * spread * n.powf(-0.2)).max(width / 128.0)
}

pub(crate) fn trapezoid(ys: &[f64], step: f64) -> f64 {
    if ys.len() < 2 {
        return 0.0;
    }
    step * (ys.iter().sum::<f64>() - 0.5 * (ys[0] + ys[ys.len() - 1]))
}

/// Gaussian KDE of `xs` on `GRID_POINTS` evenly spaced points of
/// `[lo, hi]`, rescaled so its trapezoid integral over the range is one.
pub fn kde_on_grid(xs: &[f64], lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + i as f64 * step).collect();
    let h = silverman_bandwidth(xs, hi - lo);
    let norm = 1.0 / (xs.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut dens: Vec<f64> = grid
        .iter()
        .map(|g| xs.iter().map(|x| (-0.5 * ((g - x) / h).powi(2)).exp()).sum::<f64>() * norm)
        .collect();
    let mass = trapezoid(&dens, step);
    if mass > 0.0 {
        dens.iter_mut().for_each(|d| *d /= mass);
    }
    (grid, dens, h)
}

fn group_members(trials: &[Trial], top_fraction: f64, bad_fraction: f64) -> BTreeMap<DensityGroup, Vec<&Trial>> {
    let completed: Vec<&Trial> = trials.iter().filter(|t| t.status == TrialStatus::Completed).collect();
    let mut ranked: Vec<&Trial> = completed.iter().copied().filter(|t| !t.collapsed).collect();
    ranked.sort_by(|a, b| b.score.unwrap().total_cmp(&a.score.unwrap()).then(a.id.cmp(&b.id)));
    let take = |f: f64| {
        if ranked.is_empty() {
            0
        } else {
            ((f * ranked.len() as f64).round() as usize).clamp(1, ranked.len())
        }
    };
    let n_top = take(top_fraction);
    let n_bad = take(bad_fraction).min(ranked.len() - n_top);
    BTreeMap::from([
        (DensityGroup::Top, ranked[..n_top].to_vec()),
        (DensityGroup::Bad, ranked[ranked.len() - n_bad..].to_vec()),
        (DensityGroup::All, completed.clone()),
        (DensityGroup::Collapsed, completed.iter().copied().filter(|t| t.collapsed).collect()),
    ])
}

fn dimension_density(d: &Dimension, members: &BTreeMap<DensityGroup, Vec<&Trial>>) -> DimensionDensity {
    let mut groups = BTreeMap::new();
    let grid;
    match &d.domain {
        Domain::Categorical { choices } => {
            grid = choices.clone();
            for (&g, ts) in members {
                let mut counts = vec![0.0; choices.len()];
                for t in ts {
                    let v = t.configuration.get(&d.name).and_then(|v| v.as_str());
                    if let Some(i) = choices.iter().position(|c| Some(c.as_str()) == v) {
                        counts[i] += 1.0;
                    }
                }
                let n = ts.len();
                if n > 0 {
                    counts.iter_mut().for_each(|c| *c /= n as f64);
                }
                groups.insert(
                    g,
                    GroupDensity {
                        n,
                        empty: n == 0,
                        bandwidth: None,
                        values: counts,
                    },
                );
            }
        }
        _ => {
            let (lo, hi) = d.bounds().unwrap();
            let t = |x: f64| if d.log_scale { x.ln() } else { x };
            let (tlo, thi) = (t(lo), t(hi));
            let step = (thi - tlo) / (GRID_POINTS - 1) as f64;
            grid = (0..GRID_POINTS)
                .map(|i| {
                    let s = tlo + i as f64 * step;
                    let x = if d.log_scale { s.exp() } else { s };
                    x.to_string()
                })
                .collect();
            for (&g, ts) in members {
                let xs: Vec<f64> = ts
                    .iter()
                    .filter_map(|tr| tr.configuration.get(&d.name).and_then(|v| v.as_f64()))
                    .map(t)
                    .collect();
                let entry = if xs.is_empty() {
                    GroupDensity {
                        n: 0,
                        empty: true,
                        bandwidth: None,
                        values: vec![0.0; GRID_POINTS],
                    }
                } else {
                    let (_, dens, h) = kde_on_grid(&xs, tlo, thi);
                    GroupDensity {
                        n: xs.len(),
                        empty: false,
                        bandwidth: Some(h),
                        values: dens,
                    }
                };
                groups.insert(g, entry);
            }
        }
    }
    DimensionDensity {
        dimension: d.name.clone(),
        log_scale: d.log_scale,
        grid,
        groups,
    }
}

/// Per-dimension densities for the top / bad (by score, among non-collapsed
/// completed trials), all completed and collapsed populations.
pub fn density_report(
    trials: &[Trial],
    space: &SearchSpace,
    top_fraction: f64,
    bad_fraction: f64,
) -> Result<DensityReport> {
    for (name, f) in [("top_fraction", top_fraction), ("bad_fraction", bad_fraction)] {
        if !(f > 0.0 && f <= 0.5) {
            return Err(Error::param(name, format!("{f} not in (0, 0.5]")));
        }
    }
    let completed = trials.iter().filter(|t| t.status == TrialStatus::Completed).count();
    if completed < 10 {
        return Err(Error::InsufficientTrials {
            needed: 10,
            have: completed,
        });
    }
    let members = group_members(trials, top_fraction, bad_fraction);
    Ok(DensityReport {
        top_fraction,
        bad_fraction,
        group_sizes: members.iter().map(|(&g, v)| (g, v.len())).collect(),
        dimensions: space.dimensions.iter().map(|d| dimension_density(d, &members)).collect(),
    })
}
