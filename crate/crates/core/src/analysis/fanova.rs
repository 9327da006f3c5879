use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Execution;
use crate::forest::{Forest, ForestParams, LeafBox, Tree};
use crate::rng::RngState;

/// First-order variance shares of one fitted forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanovaShares {
    pub shares: Vec<f64>,
    /// Every tree was constant, so no variance was attributed.
    pub constant: bool,
}

/// Marginal of `leaves` along `dim`: a step function over the sorted cut
/// points, returned as `(width, value)` pieces.
fn marginal(leaves: &[LeafBox], dim: usize) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = leaves.iter().flat_map(|l| [l.bounds[dim].0, l.bounds[dim].1]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let value: f64 = leaves
                .iter()
                .filter(|l| l.bounds[dim].0 <= mid && mid < l.bounds[dim].1)
                .map(|l| l.value * l.volume() / (l.bounds[dim].1 - l.bounds[dim].0))
                .sum();
            (w[1] - w[0], value)
        })
        .collect()
}

/// Per-dimension variance fractions of one tree, `None` if it is constant.
pub(crate) fn tree_shares(tree: &Tree, dim: usize) -> Option<Vec<f64>> {
    let leaves: Vec<LeafBox> = tree.leaf_boxes(dim).into_iter().filter(|l| l.volume() > 0.0).collect();
    let mean: f64 = leaves.iter().map(|l| l.volume() * l.value).sum();
    let total: f64 = leaves.iter().map(|l| l.volume() * (l.value - mean).powi(2)).sum();
    if total <= 1e-14 * mean.abs().max(1.0).powi(2) {
        return None;
    }
    Some(
        (0..dim)
            .map(|j| {
                let vj: f64 = marginal(&leaves, j).iter().map(|(w, v)| w * (v - mean).powi(2)).sum();
                (vj / total).clamp(0.0, 1.0)
            })
            .collect(),
    )
}

/// Fits a forest on unit-cube inputs and averages per-tree first-order
/// shares over the non-constant trees.
pub fn fanova_shares(
    x: &[Vec<f64>],
    y: &[f64],
    params: ForestParams,
    rng: &RngState,
    exec: Execution,
) -> Result<FanovaShares> {
    let forest = Forest::fit(x, y, params, rng, exec)?;
    let d = forest.dim();
    let per_tree: Vec<Option<Vec<f64>>> = exec.map(forest.trees(), |_, t| tree_shares(t, d));
    let used: Vec<&Vec<f64>> = per_tree.iter().flatten().collect();
    if used.is_empty() {
        return Ok(FanovaShares {
            shares: vec![0.0; d],
            constant: true,
        });
    }
    let n = used.len() as f64;
    let shares = (0..d).map(|j| used.iter().map(|s| s[j]).sum::<f64>() / n).collect();
    Ok(FanovaShares {
        shares,
        constant: false,
    })
}
