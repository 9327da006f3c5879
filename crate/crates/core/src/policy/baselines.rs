use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernels::{
    apply_augmentation, color_jitter, horizontal_flip, random_resized_crop, solarize, to_gray, AugmentationKind,
    AugmentationSpec,
};
use crate::rng::RngState;
use crate::space::Configuration;

pub const MAX_LEVEL: u32 = 30;
pub const CROP_SCALE: (f64, f64) = (0.2, 1.0);
pub const CROP_RATIO: (f64, f64) = (3.0 / 4.0, 4.0 / 3.0);

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{p} not in [0, 1]")))
    }
}

/// Random resized crop, then flip, color jitter, grayscale and solarize,
/// each gated by its own coin. Every coin is drawn regardless of outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselinePolicy {
    pub p_colorjitter: f64,
    pub p_grayscale: f64,
    pub p_horizontal_flip: f64,
    pub p_solarize: f64,
    pub brightness_strength: f64,
    pub contrast_strength: f64,
    pub saturation_strength: f64,
    pub hue_strength: f64,
    pub solarize_threshold: i64,
}

impl Default for BaselinePolicy {
    fn default() -> Self {
        Self {
            p_colorjitter: 0.8,
            p_grayscale: 0.2,
            p_horizontal_flip: 0.5,
            p_solarize: 0.2,
            brightness_strength: 0.4,
            contrast_strength: 0.4,
            saturation_strength: 0.4,
            hue_strength: 0.1,
            solarize_threshold: 127,
        }
    }
}

impl BaselinePolicy {
    pub fn from_configuration(cfg: &Configuration) -> Result<Self> {
        let p = Self {
            p_colorjitter: cfg.f64("p_colorjitter")?,
            p_grayscale: cfg.f64("p_grayscale")?,
            p_horizontal_flip: cfg.f64("p_horizontal_flip")?,
            p_solarize: cfg.f64("p_solarize")?,
            brightness_strength: cfg.f64("brightness_strength")?,
            contrast_strength: cfg.f64("contrast_strength")?,
            saturation_strength: cfg.f64("saturation_strength")?,
            hue_strength: cfg.f64("hue_strength")?,
            solarize_threshold: cfg.f64("solarize_threshold")? as i64,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("p_colorjitter", self.p_colorjitter)?;
        check_prob("p_grayscale", self.p_grayscale)?;
        check_prob("p_horizontal_flip", self.p_horizontal_flip)?;
        check_prob("p_solarize", self.p_solarize)?;
        for (name, v, max) in [
            ("brightness_strength", self.brightness_strength, 1.5),
            ("contrast_strength", self.contrast_strength, 1.5),
            ("saturation_strength", self.saturation_strength, 1.5),
            ("hue_strength", self.hue_strength, 0.5),
        ] {
            if !(0.0..=max).contains(&v) {
                return Err(Error::param(name, format!("{v} not in [0, {max}]")));
            }
        }
        if !(0..=255).contains(&self.solarize_threshold) {
            return Err(Error::param("solarize_threshold", "not in [0, 255]"));
        }
        Ok(())
    }

    pub fn apply(&self, img: &Image, rng: &mut RngState) -> Result<Image> {
        let mut out = random_resized_crop(img, CROP_SCALE, CROP_RATIO, rng);
        if rng.bernoulli(self.p_horizontal_flip) {
            out = horizontal_flip(&out);
        }
        if rng.bernoulli(self.p_colorjitter) {
            out = color_jitter(
                &out,
                self.brightness_strength,
                self.contrast_strength,
                self.saturation_strength,
                self.hue_strength,
                rng,
            )?;
        }
        if rng.bernoulli(self.p_grayscale) {
            out = to_gray(&out);
        }
        if rng.bernoulli(self.p_solarize) {
            out = solarize(&out, self.solarize_threshold)?;
        }
        Ok(out)
    }
}

/// What a kernel becomes at a given magnitude level.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaledOp {
    Skip,
    Apply(AugmentationSpec),
    /// Parameter-free kernels are applied with probability `level / 30`.
    ApplyWithProb(AugmentationSpec, f64),
}

/// Maps a level in `0..=30` onto kernel strength. Level 0 is the identity;
/// numeric strengths grow linearly and reach the registry defaults at 30.
pub fn scaled_op(kind: AugmentationKind, level: u32) -> ScaledOp {
    use AugmentationKind::*;
    if level == 0 {
        return ScaledOp::Skip;
    }
    let f = level.min(MAX_LEVEL) as f64 / MAX_LEVEL as f64;
    let spec = AugmentationSpec::new(kind);
    let scaled = |spec: AugmentationSpec, names: &[&str]| {
        names.iter().fold(spec, |s, &n| {
            let d = kind.params().iter().find(|d| d.name == n).unwrap();
            s.with(n, f * d.default.unwrap())
        })
    };
    match kind {
        ToGray | Equalize | ChannelShuffle | HorizontalFlip | RandomGridShuffle => ScaledOp::ApplyWithProb(spec, f),
        ColorJitter => ScaledOp::Apply(scaled(spec, &["brightness", "contrast", "saturation", "hue"])),
        Solarize => ScaledOp::Apply(spec.with("threshold", (255.0 - f * 128.0).round())),
        ShiftScaleRotate => ScaledOp::Apply(scaled(spec, &["shift_limit", "scale_limit", "rotate_limit"])),
        ElasticTransform => ScaledOp::Apply(scaled(spec, &["alpha", "alpha_affine"])),
        GridDistortion => ScaledOp::Apply(scaled(spec, &["distort_limit"])),
        OpticalDistortion => ScaledOp::Apply(scaled(spec, &["distort_limit", "shift_limit"])),
        GaussianBlur => ScaledOp::Apply(scaled(spec, &["sigma_min", "sigma_max"])),
        GaussNoise => ScaledOp::Apply(scaled(spec, &["var_min", "var_max"])),
        Cutout => ScaledOp::Apply(spec.with("num_holes", (f * 4.0).round().max(1.0))),
    }
}

fn apply_scaled(kind: AugmentationKind, level: u32, img: Image, rng: &mut RngState) -> Result<Image> {
    match scaled_op(kind, level) {
        ScaledOp::Skip => Ok(img),
        ScaledOp::Apply(spec) => apply_augmentation(&spec, &img, rng),
        ScaledOp::ApplyWithProb(spec, p) => {
            if rng.bernoulli(p) {
                apply_augmentation(&spec, &img, rng)
            } else {
                Ok(img)
            }
        }
    }
}

fn check_level(name: &str, level: u32) -> Result<()> {
    if level <= MAX_LEVEL {
        Ok(())
    } else {
        Err(Error::param(name, format!("{level} exceeds {MAX_LEVEL}")))
    }
}

/// `num_ops` kernels drawn uniformly with replacement from all fourteen,
/// each applied at `magnitude`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandAugmentPolicy {
    pub num_ops: usize,
    pub magnitude: u32,
}

impl RandAugmentPolicy {
    pub fn from_configuration(cfg: &Configuration) -> Result<Self> {
        let p = Self {
            num_ops: cfg.f64("num_ops")? as usize,
            magnitude: cfg.f64("magnitude")? as u32,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=15).contains(&self.num_ops) {
            return Err(Error::param("num_ops", "not in [1, 15]"));
        }
        check_level("magnitude", self.magnitude)
    }

    pub fn apply(&self, img: &Image, rng: &mut RngState) -> Result<Image> {
        let mut out = img.clone();
        for _ in 0..self.num_ops {
            let kind = AugmentationKind::ALL[rng.below(AugmentationKind::ALL.len())];
            out = apply_scaled(kind, self.magnitude, out, rng)?;
        }
        Ok(out)
    }
}

/// Color pool: color, quality and exotic kernels.
pub const SMART_COLOR_POOL: [AugmentationKind; 9] = [
    AugmentationKind::ColorJitter,
    AugmentationKind::ToGray,
    AugmentationKind::Solarize,
    AugmentationKind::Equalize,
    AugmentationKind::ChannelShuffle,
    AugmentationKind::GaussianBlur,
    AugmentationKind::GaussNoise,
    AugmentationKind::RandomGridShuffle,
    AugmentationKind::Cutout,
];

/// Geometric pool: geometric and non-rigid kernels.
pub const SMART_GEOMETRIC_POOL: [AugmentationKind; 5] = [
    AugmentationKind::ShiftScaleRotate,
    AugmentationKind::HorizontalFlip,
    AugmentationKind::ElasticTransform,
    AugmentationKind::GridDistortion,
    AugmentationKind::OpticalDistortion,
];

/// With probability `p_apply_ops`: `num_col_ops` distinct color-pool
/// kernels at `col_magnitude`, then `num_geo_ops` distinct geometric-pool
/// kernels at `geo_magnitude`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmartAugmentPolicy {
    pub num_col_ops: usize,
    pub num_geo_ops: usize,
    pub col_magnitude: u32,
    pub geo_magnitude: u32,
    pub p_apply_ops: f64,
}

impl SmartAugmentPolicy {
    pub fn from_configuration(cfg: &Configuration) -> Result<Self> {
        let p = Self {
            num_col_ops: cfg.f64("num_col_ops")? as usize,
            num_geo_ops: cfg.f64("num_geo_ops")? as usize,
            col_magnitude: cfg.f64("col_magnitude")? as u32,
            geo_magnitude: cfg.f64("geo_magnitude")? as u32,
            p_apply_ops: cfg.f64("p_apply_ops")?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=SMART_COLOR_POOL.len()).contains(&self.num_col_ops) {
            return Err(Error::param("num_col_ops", "not in [1, 9]"));
        }
        if !(1..=SMART_GEOMETRIC_POOL.len()).contains(&self.num_geo_ops) {
            return Err(Error::param("num_geo_ops", "not in [1, 5]"));
        }
        check_level("col_magnitude", self.col_magnitude)?;
        check_level("geo_magnitude", self.geo_magnitude)?;
        check_prob("p_apply_ops", self.p_apply_ops)
    }

    pub fn apply(&self, img: &Image, rng: &mut RngState) -> Result<Image> {
        let mut out = img.clone();
        if !rng.bernoulli(self.p_apply_ops) {
            return Ok(out);
        }
        for i in rng.sample_without_replacement(SMART_COLOR_POOL.len(), self.num_col_ops) {
            out = apply_scaled(SMART_COLOR_POOL[i], self.col_magnitude, out, rng)?;
        }
        for i in rng.sample_without_replacement(SMART_GEOMETRIC_POOL.len(), self.num_geo_ops) {
            out = apply_scaled(SMART_GEOMETRIC_POOL[i], self.geo_magnitude, out, rng)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn level_zero_is_identity() {
        let img = Image::random(16, 16, &mut rng_from_seed(3));
        let ra = RandAugmentPolicy {
            num_ops: 15,
            magnitude: 0,
        };
        assert_eq!(ra.apply(&img, &mut rng_from_seed(1)).unwrap(), img);
        for k in AugmentationKind::ALL {
            assert_eq!(scaled_op(k, 0), ScaledOp::Skip);
        }
    }

    #[test]
    fn full_level_reaches_defaults() {
        match scaled_op(AugmentationKind::ColorJitter, 30) {
            ScaledOp::Apply(s) => {
                assert!((s.params["brightness"] - 0.4).abs() < 1e-12);
                assert!((s.params["hue"] - 0.1).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            scaled_op(AugmentationKind::Solarize, 30),
            ScaledOp::Apply(AugmentationSpec::new(AugmentationKind::Solarize).with("threshold", 127.0))
        );
        for k in AugmentationKind::ALL {
            for level in [1, 15, 30] {
                if let ScaledOp::Apply(s) | ScaledOp::ApplyWithProb(s, _) = scaled_op(k, level) {
                    s.validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn smart_skip_when_p_zero() {
        let img = Image::random(16, 16, &mut rng_from_seed(3));
        let p = SmartAugmentPolicy {
            num_col_ops: 9,
            num_geo_ops: 5,
            col_magnitude: 30,
            geo_magnitude: 30,
            p_apply_ops: 0.0,
        };
        assert_eq!(p.apply(&img, &mut rng_from_seed(1)).unwrap(), img);
    }

    #[test]
    fn pools_partition_catalog() {
        let mut all: Vec<_> = SMART_COLOR_POOL.iter().chain(&SMART_GEOMETRIC_POOL).copied().collect();
        all.sort();
        let mut expect = AugmentationKind::ALL.to_vec();
        expect.sort();
        assert_eq!(all, expect);
    }

    #[test]
    fn baseline_validation() {
        let mut p = BaselinePolicy::default();
        p.validate().unwrap();
        p.p_solarize = 1.5;
        assert!(p.validate().is_err());
    }
}
