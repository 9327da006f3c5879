use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernels::{apply_augmentation, AugmentationKind, AugmentationSpec};
use crate::rng::RngState;
use crate::space::{Configuration, GROUP_COUNT_DIMS, GROUP_PROB_DIMS};

/// A named set of interchangeable augmentations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationGroup {
    pub id: String,
    pub members: Vec<AugmentationSpec>,
}

impl AugmentationGroup {
    pub fn new(id: &str, members: Vec<AugmentationSpec>) -> Self {
        Self {
            id: id.to_string(),
            members,
        }
    }
}

/// The five default groups, in canonical order.
pub fn default_catalog() -> Vec<AugmentationGroup> {
    use AugmentationKind::*;
    let g = |id: &str, kinds: &[AugmentationKind]| {
        AugmentationGroup::new(id, kinds.iter().map(|&k| AugmentationSpec::new(k)).collect())
    };
    vec![
        g("color", &[ColorJitter, ToGray, Solarize, Equalize, ChannelShuffle]),
        g("geometric", &[ShiftScaleRotate, HorizontalFlip]),
        g("non_rigid", &[ElasticTransform, GridDistortion, OpticalDistortion]),
        g("quality", &[GaussianBlur, GaussNoise]),
        g("exotic", &[RandomGridShuffle, Cutout]),
    ]
}

/// Scales non-negative weights to sum to one. An all-zero vector has no
/// distribution and is rejected.
pub fn normalize_probs(raw: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = raw.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::param("probabilities", format!("{bad} is not a non-negative weight")));
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateProbabilities);
    }
    Ok(raw.iter().map(|p| p / total).collect())
}

/// Inverse-CDF draw from normalized `probs`; never returns a zero-weight
/// index.
pub(crate) fn categorical(probs: &[f64], rng: &mut RngState) -> usize {
    let u = rng.uniform();
    let mut cum = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last = i;
        if u < cum {
            return i;
        }
    }
    last
}

/// One sequence of a draw: the chosen group and its members in
/// application order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawnSequence {
    pub group: String,
    pub augmentations: Vec<AugmentationSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentationSequenceList {
    pub sequences: Vec<DrawnSequence>,
}

impl AugmentationSequenceList {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }
}

/// Applies every sequence in order, each augmentation fed the previous
/// output.
pub fn apply_sequences(draw: &AugmentationSequenceList, img: &Image, rng: &mut RngState) -> Result<Image> {
    let mut out = img.clone();
    for seq in &draw.sequences {
        for spec in &seq.augmentations {
            out = apply_augmentation(spec, &out, rng)?;
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
struct GroupAugmentRecord {
    #[serde(default = "default_catalog")]
    groups: Vec<AugmentationGroup>,
    probabilities: Vec<f64>,
    counts: Vec<usize>,
    total_samples: usize,
}

/// `total_samples` sequences; each picks a group by `probabilities` (with
/// replacement across sequences) and then `counts[g]` distinct members of
/// that group uniformly at random.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GroupAugmentRecord")]
pub struct GroupAugmentPolicy {
    groups: Vec<AugmentationGroup>,
    probabilities: Vec<f64>,
    counts: Vec<usize>,
    total_samples: usize,
}

impl TryFrom<GroupAugmentRecord> for GroupAugmentPolicy {
    type Error = Error;

    fn try_from(r: GroupAugmentRecord) -> Result<Self> {
        GroupAugmentPolicy::new(r.groups, &r.probabilities, r.counts, r.total_samples)
    }
}

impl GroupAugmentPolicy {
    /// Builds a policy; `raw_probs` may be any non-negative weights.
    pub fn new(
        groups: Vec<AugmentationGroup>,
        raw_probs: &[f64],
        counts: Vec<usize>,
        total_samples: usize,
    ) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidConfiguration("no augmentation groups".into()));
        }
        if raw_probs.len() != groups.len() || counts.len() != groups.len() {
            return Err(Error::InvalidConfiguration(format!(
                "{} groups but {} probabilities and {} counts",
                groups.len(),
                raw_probs.len(),
                counts.len()
            )));
        }
        if total_samples == 0 {
            return Err(Error::param("total_samples", "must be at least 1"));
        }
        let probabilities = normalize_probs(raw_probs)?;
        for (g, &n) in groups.iter().zip(&counts) {
            if g.members.is_empty() {
                return Err(Error::InvalidConfiguration(format!("group `{}` is empty", g.id)));
            }
            if n == 0 || n > g.members.len() {
                return Err(Error::param(
                    format!("count of `{}`", g.id),
                    format!("{n} not in [1, {}]", g.members.len()),
                ));
            }
            for m in &g.members {
                m.validate()?;
            }
        }
        Ok(Self {
            groups,
            probabilities,
            counts,
            total_samples,
        })
    }

    /// Reads the eleven group-augment dimensions over the default catalog.
    pub fn from_configuration(cfg: &Configuration) -> Result<Self> {
        let probs: Vec<f64> = GROUP_PROB_DIMS.iter().map(|n| cfg.f64(n)).collect::<Result<_>>()?;
        let counts: Vec<usize> = GROUP_COUNT_DIMS
            .iter()
            .map(|n| cfg.f64(n).map(|x| x as usize))
            .collect::<Result<_>>()?;
        let total = cfg.f64("num_total_group_samples")? as usize;
        Self::new(default_catalog(), &probs, counts, total)
    }

    pub fn groups(&self) -> &[AugmentationGroup] {
        &self.groups
    }

    /// Normalized group probabilities.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total_samples(&self) -> usize {
        self.total_samples
    }

    pub fn sample_draw(&self, rng: &mut RngState) -> AugmentationSequenceList {
        let sequences = (0..self.total_samples)
            .map(|_| {
                let g = categorical(&self.probabilities, rng);
                let group = &self.groups[g];
                let picks = rng.sample_without_replacement(group.members.len(), self.counts[g]);
                DrawnSequence {
                    group: group.id.clone(),
                    augmentations: picks.into_iter().map(|i| group.members[i].clone()).collect(),
                }
            })
            .collect();
        AugmentationSequenceList { sequences }
    }

    pub fn apply(&self, img: &Image, rng: &mut RngState) -> Result<Image> {
        let draw = self.sample_draw(rng);
        apply_sequences(&draw, img, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn policy(probs: &[f64], counts: Vec<usize>, total: usize) -> GroupAugmentPolicy {
        GroupAugmentPolicy::new(default_catalog(), probs, counts, total).unwrap()
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_probs(&[1.0, 3.0]).unwrap(), vec![0.25, 0.75]);
        assert!(matches!(normalize_probs(&[0.0, 0.0]), Err(Error::DegenerateProbabilities)));
        assert!(normalize_probs(&[-1.0, 2.0]).is_err());
        assert!(normalize_probs(&[f64::NAN]).is_err());
    }

    #[test]
    fn draw_shape() {
        let p = policy(&[0.2, 0.2, 0.2, 0.2, 0.2], vec![3, 2, 2, 1, 2], 4);
        let mut rng = rng_from_seed(1);
        for _ in 0..100 {
            let d = p.sample_draw(&mut rng);
            assert_eq!(d.len(), 4);
            for s in &d.sequences {
                let g = p.groups().iter().position(|g| g.id == s.group).unwrap();
                assert_eq!(s.augmentations.len(), p.counts()[g]);
                let mut names: Vec<&str> = s.augmentations.iter().map(|a| a.name.as_str()).collect();
                names.sort_unstable();
                names.dedup();
                assert_eq!(names.len(), p.counts()[g]);
            }
        }
    }

    #[test]
    fn zero_weight_group_never_drawn() {
        let p = policy(&[0.0, 1.0, 0.0, 0.0, 0.0], vec![1; 5], 5);
        let mut rng = rng_from_seed(2);
        for _ in 0..200 {
            assert!(p.sample_draw(&mut rng).sequences.iter().all(|s| s.group == "geometric"));
        }
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(GroupAugmentPolicy::new(default_catalog(), &[1.0; 5], vec![6, 1, 1, 1, 1], 1).is_err());
        assert!(GroupAugmentPolicy::new(default_catalog(), &[1.0; 5], vec![0, 1, 1, 1, 1], 1).is_err());
        assert!(GroupAugmentPolicy::new(default_catalog(), &[1.0; 5], vec![1; 5], 0).is_err());
        assert!(GroupAugmentPolicy::new(default_catalog(), &[1.0; 4], vec![1; 5], 1).is_err());
    }

    #[test]
    fn apply_is_deterministic() {
        let p = policy(&[0.2; 5], vec![2, 1, 1, 1, 1], 3);
        let img = Image::random(24, 20, &mut rng_from_seed(9));
        let a = p.apply(&img, &mut rng_from_seed(5)).unwrap();
        let b = p.apply(&img, &mut rng_from_seed(5)).unwrap();
        assert_eq!(a, b);
        assert!(a.same_shape(&img));
    }
}
