//! Augmentation policies: GroupAugment and the three fixed-structure
//! baselines, all serializable with a `kind` tag.

mod baselines;
mod group;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::image::Image;
use crate::kernels::{map_batch, AugmentationKind, AugmentationSpec};
use crate::rng::RngState;
use crate::space::{Configuration, SearchSpace};

pub use baselines::{
    scaled_op, BaselinePolicy, RandAugmentPolicy, ScaledOp, SmartAugmentPolicy, CROP_RATIO, CROP_SCALE, MAX_LEVEL,
    SMART_COLOR_POOL, SMART_GEOMETRIC_POOL,
};
pub use group::{
    apply_sequences, default_catalog, normalize_probs, AugmentationGroup, AugmentationSequenceList, DrawnSequence,
    GroupAugmentPolicy,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Policy {
    /// Returns the input unchanged.
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "group_augment")]
    GroupAugment(GroupAugmentPolicy),
    #[serde(rename = "simsiam_baseline")]
    Baseline(BaselinePolicy),
    #[serde(rename = "randaugment")]
    RandAugment(RandAugmentPolicy),
    #[serde(rename = "smartaugment")]
    SmartAugment(SmartAugmentPolicy),
}

impl Policy {
    /// Builds the policy described by a configuration of an augmentation
    /// space (`simsiam_aug`, `group_augment`, `randaugment`,
    /// `smartaugment`).
    pub fn from_configuration(space: &SearchSpace, cfg: &Configuration) -> Result<Self> {
        let cfg = space.validate(cfg)?;
        match space.name.as_str() {
            "simsiam_aug" => BaselinePolicy::from_configuration(&cfg).map(Policy::Baseline),
            "group_augment" => GroupAugmentPolicy::from_configuration(&cfg).map(Policy::GroupAugment),
            "randaugment" => RandAugmentPolicy::from_configuration(&cfg).map(Policy::RandAugment),
            "smartaugment" => SmartAugmentPolicy::from_configuration(&cfg).map(Policy::SmartAugment),
            other => Err(Error::InvalidConfiguration(format!(
                "space `{other}` does not describe an augmentation policy"
            ))),
        }
    }

    /// Always flips: a single one-member group.
    pub fn horizontal_flip_only() -> Self {
        let g = AugmentationGroup::new("flip", vec![AugmentationSpec::new(AugmentationKind::HorizontalFlip)]);
        Policy::GroupAugment(GroupAugmentPolicy::new(vec![g], &[1.0], vec![1], 1).expect("valid"))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Policy::Identity | Policy::GroupAugment(_) => Ok(()),
            Policy::Baseline(p) => p.validate(),
            Policy::RandAugment(p) => p.validate(),
            Policy::SmartAugment(p) => p.validate(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Policy = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn apply(&self, img: &Image, rng: &mut RngState) -> Result<Image> {
        match self {
            Policy::Identity => Ok(img.clone()),
            Policy::GroupAugment(p) => p.apply(img, rng),
            Policy::Baseline(p) => p.apply(img, rng),
            Policy::RandAugment(p) => p.apply(img, rng),
            Policy::SmartAugment(p) => p.apply(img, rng),
        }
    }

    /// Two independently augmented views from split streams.
    pub fn two_views(&self, img: &Image, rng: &mut RngState) -> Result<(Image, Image)> {
        let mut a = rng.split();
        let mut b = rng.split();
        Ok((self.apply(img, &mut a)?, self.apply(img, &mut b)?))
    }

    /// Applies the policy to every image; image `i` uses `rng.fork(i)`, so
    /// the output does not depend on `exec`.
    pub fn apply_batch(&self, images: &[Image], rng: &RngState, exec: Execution) -> Result<Vec<Image>> {
        map_batch(images, rng, exec, |img, r| self.apply(img, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::space::builtin_space;

    #[test]
    fn defaults_build_policies() {
        for name in ["simsiam_aug", "group_augment", "randaugment", "smartaugment"] {
            let space = builtin_space(name).unwrap();
            let p = Policy::from_configuration(&space, &space.default_configuration()).unwrap();
            let text = serde_json::to_string(&p).unwrap();
            assert_eq!(Policy::from_json(&text).unwrap(), p);
        }
        let training = builtin_space("simsiam_training").unwrap();
        assert!(Policy::from_configuration(&training, &training.default_configuration()).is_err());
    }

    #[test]
    fn json_tag() {
        let v = serde_json::to_value(Policy::horizontal_flip_only()).unwrap();
        assert_eq!(v["kind"], "group_augment");
        assert_eq!(v["probabilities"][0], 1.0);
        let err = Policy::from_json(r#"{"kind":"group_augment","probabilities":[0,0,0,0,0],"counts":[1,1,1,1,1],"total_samples":1}"#);
        assert!(err.unwrap_err().to_string().contains("zero"));
    }

    #[test]
    fn batch_modes_agree() {
        let space = builtin_space("group_augment").unwrap();
        let mut cfg = space.default_configuration();
        cfg.set("p_quality_transformations", crate::space::Value::Float(0.5));
        let p = Policy::from_configuration(&space, &cfg).unwrap();
        let mut r = rng_from_seed(8);
        let imgs: Vec<Image> = (0..6).map(|_| Image::random(20, 20, &mut r)).collect();
        let rng = rng_from_seed(3);
        let a = p.apply_batch(&imgs, &rng, Execution::Sequential).unwrap();
        let b = p.apply_batch(&imgs, &rng, Execution::default()).unwrap();
        assert_eq!(a, b);
    }
}
