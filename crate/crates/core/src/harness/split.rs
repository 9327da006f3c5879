use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub dataset_name: String,
    pub validation_fraction: f64,
    pub split_seed: u64,
    #[serde(default)]
    pub use_provided_split: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitPartition {
    /// The dataset ships its own split; indices are left to the consumer.
    Provided,
    Partition { train: Vec<usize>, validation: Vec<usize> },
}

/// Holds out `round(validation_fraction * n_train)` indices chosen by
/// `split_seed`. Both index lists come back sorted.
pub fn make_split(spec: &SplitSpec, n_train: usize) -> Result<SplitPartition> {
    if spec.use_provided_split {
        return Ok(SplitPartition::Provided);
    }
    if !(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0) {
        return Err(Error::param(
            "validation_fraction",
            format!("{} not in (0, 1)", spec.validation_fraction),
        ));
    }
    if n_train < 10 {
        return Err(Error::InsufficientTrials {
            needed: 10,
            have: n_train,
        });
    }
    let m = (spec.validation_fraction * n_train as f64).round() as usize;
    let mut rng = RngState::from_seed(spec.split_seed);
    let mut validation = rng.sample_without_replacement(n_train, m);
    validation.sort_unstable();
    let mut held = vec![false; n_train];
    for &i in &validation {
        held[i] = true;
    }
    let train = (0..n_train).filter(|&i| !held[i]).collect();
    Ok(SplitPartition::Partition { train, validation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(frac: f64) -> SplitSpec {
        SplitSpec {
            dataset_name: "cifar10".into(),
            validation_fraction: frac,
            split_seed: 42,
            use_provided_split: false,
        }
    }

    #[test]
    fn ten_percent() {
        let SplitPartition::Partition { train, validation } = make_split(&spec(0.1), 50_000).unwrap() else {
            panic!()
        };
        assert_eq!(validation.len(), 5000);
        assert_eq!(train.len(), 45_000);
        let mut all: Vec<usize> = train.iter().chain(&validation).copied().collect();
        all.sort_unstable();
        assert!(all.iter().enumerate().all(|(i, &v)| i == v));
        assert_eq!(make_split(&spec(0.1), 50_000).unwrap(), make_split(&spec(0.1), 50_000).unwrap());
    }

    #[test]
    fn errors_and_passthrough() {
        assert!(make_split(&spec(0.0), 100).is_err());
        assert!(make_split(&spec(1.0), 100).is_err());
        assert!(make_split(&spec(0.1), 5).is_err());
        let mut s = spec(0.0);
        s.use_provided_split = true;
        assert_eq!(make_split(&s, 100).unwrap(), SplitPartition::Provided);
    }
}
