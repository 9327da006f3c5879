//! The fourteen augmentation kernels, their parameter registry and
//! name-based dispatch.
//!
//! Every kernel is a pure function of `(image, parameters, rng)`, preserves
//! the image shape and clamps/rounds back to 8 bits once at its end.

mod color;
mod displacement;
mod exotic;
mod geometric;
mod quality;
mod resample;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::image::Image;
use crate::rng::RngState;

pub use color::{
    channel_shuffle, channel_shuffle_with, color_jitter, color_jitter_with, equalize, solarize, to_gray,
    JitterFactors, CHANNEL_PERMUTATIONS, LUMA,
};
pub use displacement::{displacement_transform, grid_distortion_with, optical_distortion_with, Displacement};
pub use exotic::{cutout, cutout_at, grid_shuffle_with, grid_tiles, random_grid_shuffle};
pub use geometric::{
    horizontal_flip, random_resized_crop, resized_crop, shift_scale_rotate, shift_scale_rotate_with, CropBox,
    ShiftScaleRotate,
};
pub use quality::{
    auto_kernel_size, gauss_noise, gaussian_blur, gaussian_taps, random_gauss_noise, random_gaussian_blur,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationKind {
    ColorJitter,
    ToGray,
    Solarize,
    Equalize,
    ChannelShuffle,
    ShiftScaleRotate,
    HorizontalFlip,
    ElasticTransform,
    GridDistortion,
    OpticalDistortion,
    GaussianBlur,
    GaussNoise,
    RandomGridShuffle,
    Cutout,
}

/// One tunable kernel parameter. `default: None` means the value is derived
/// from the image or from other parameters when absent.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamDef {
    pub name: &'static str,
    pub default: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub integer: bool,
    pub doc: &'static str,
}

const fn p(name: &'static str, default: f64, min: f64, max: f64, doc: &'static str) -> ParamDef {
    ParamDef {
        name,
        default: Some(default),
        min,
        max,
        integer: false,
        doc,
    }
}

const fn int(name: &'static str, default: Option<f64>, min: f64, max: f64, doc: &'static str) -> ParamDef {
    ParamDef {
        name,
        default,
        min,
        max,
        integer: true,
        doc,
    }
}

const COLOR_JITTER_PARAMS: &[ParamDef] = &[
        p("brightness", 0.4, 0.0, 1.5, "brightness factor drawn from [max(0,1-s), 1+s]"),
        p("contrast", 0.4, 0.0, 1.5, "contrast factor drawn from [max(0,1-s), 1+s]"),
        p("saturation", 0.4, 0.0, 1.5, "saturation factor drawn from [max(0,1-s), 1+s]"),
        p("hue", 0.1, 0.0, 0.5, "hue shift drawn from [-h, h], fraction of the hue circle"),
];

const SHIFT_SCALE_ROTATE_PARAMS: &[ParamDef] = &[
        p("shift_limit", 0.0625, 0.0, 1.0, "shift drawn from [-l, l], fraction of side"),
        p("scale_limit", 0.1, 0.0, 0.99, "scale drawn from 1 + [-l, l]"),
        p("rotate_limit", 45.0, 0.0, 180.0, "angle drawn from [-l, l] degrees"),
];

const ELASTIC_TRANSFORM_PARAMS: &[ParamDef] = &[
        p("alpha", 0.5, 0.0, 1000.0, "displacement field scale, pixels"),
        p("sigma", 10.0, 0.01, 100.0, "displacement field smoothing, pixels"),
        p("alpha_affine", 5.0, 0.0, 100.0, "random affine magnitude, pixels"),
];

const GRID_DISTORTION_PARAMS: &[ParamDef] = &[
        int("num_steps", Some(5.0), 1.0, 64.0, "grid cells per side"),
        p("distort_limit", 0.3, 0.0, 0.99, "per-cell stretch drawn from 1 + [-l, l]"),
];

const OPTICAL_DISTORTION_PARAMS: &[ParamDef] = &[
        p("distort_limit", 0.5, 0.0, 2.0, "radial coefficient drawn from [-l, l]"),
        p("shift_limit", 0.5, 0.0, 100.0, "center shift drawn from [-l, l] pixels"),
];

const GAUSSIAN_BLUR_PARAMS: &[ParamDef] = &[
        p("sigma_min", 0.1, 0.0, 50.0, "lower end of the sigma range, pixels"),
        p("sigma_max", 2.0, 0.0, 50.0, "upper end of the sigma range, pixels"),
        int("kernel_size", None, 1.0, 301.0, "odd kernel size; 2*ceil(3*sigma)+1 when absent"),
];

const GAUSS_NOISE_PARAMS: &[ParamDef] = &[
        p("var_min", 10.0, 0.0, 65025.0, "lower end of the variance range, intensity^2"),
        p("var_max", 50.0, 0.0, 65025.0, "upper end of the variance range, intensity^2"),
];

const CUTOUT_PARAMS: &[ParamDef] = &[
        int("num_holes", Some(4.0), 0.0, 1024.0, "number of zero-filled rectangles"),
        int("hole_h", None, 1.0, 1e6, "hole height; ceil(height/8) when absent"),
        int("hole_w", None, 1.0, 1e6, "hole width; ceil(width/8) when absent"),
];

const SOLARIZE_PARAMS: &[ParamDef] = &[int("threshold", Some(127.0), 0.0, 255.0, "values >= threshold are inverted")];

const RANDOM_GRID_SHUFFLE_PARAMS: &[ParamDef] = &[int("grid", Some(3.0), 1.0, 64.0, "tiles per side")];

impl AugmentationKind {
    pub const ALL: [AugmentationKind; 14] = [
        AugmentationKind::ColorJitter,
        AugmentationKind::ToGray,
        AugmentationKind::Solarize,
        AugmentationKind::Equalize,
        AugmentationKind::ChannelShuffle,
        AugmentationKind::ShiftScaleRotate,
        AugmentationKind::HorizontalFlip,
        AugmentationKind::ElasticTransform,
        AugmentationKind::GridDistortion,
        AugmentationKind::OpticalDistortion,
        AugmentationKind::GaussianBlur,
        AugmentationKind::GaussNoise,
        AugmentationKind::RandomGridShuffle,
        AugmentationKind::Cutout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AugmentationKind::ColorJitter => "color_jitter",
            AugmentationKind::ToGray => "to_gray",
            AugmentationKind::Solarize => "solarize",
            AugmentationKind::Equalize => "equalize",
            AugmentationKind::ChannelShuffle => "channel_shuffle",
            AugmentationKind::ShiftScaleRotate => "shift_scale_rotate",
            AugmentationKind::HorizontalFlip => "horizontal_flip",
            AugmentationKind::ElasticTransform => "elastic_transform",
            AugmentationKind::GridDistortion => "grid_distortion",
            AugmentationKind::OpticalDistortion => "optical_distortion",
            AugmentationKind::GaussianBlur => "gaussian_blur",
            AugmentationKind::GaussNoise => "gauss_noise",
            AugmentationKind::RandomGridShuffle => "random_grid_shuffle",
            AugmentationKind::Cutout => "cutout",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownAugmentation(name.to_string()))
    }

    pub fn params(self) -> &'static [ParamDef] {
        use AugmentationKind::*;
        match self {
            ColorJitter => COLOR_JITTER_PARAMS,
            ShiftScaleRotate => SHIFT_SCALE_ROTATE_PARAMS,
            ElasticTransform => ELASTIC_TRANSFORM_PARAMS,
            GridDistortion => GRID_DISTORTION_PARAMS,
            OpticalDistortion => OPTICAL_DISTORTION_PARAMS,
            GaussianBlur => GAUSSIAN_BLUR_PARAMS,
            GaussNoise => GAUSS_NOISE_PARAMS,
            Cutout => CUTOUT_PARAMS,
            Solarize => SOLARIZE_PARAMS,
            RandomGridShuffle => RANDOM_GRID_SHUFFLE_PARAMS,
            ToGray | Equalize | ChannelShuffle | HorizontalFlip => &[],
        }
    }
}

impl fmt::Display for AugmentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A catalog entry: kernel name plus parameter overrides. Absent
/// parameters take the registry default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl AugmentationSpec {
    pub fn new(kind: AugmentationKind) -> Self {
        Self {
            name: kind.name().to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, param: &str, value: f64) -> Self {
        self.params.insert(param.to_string(), value);
        self
    }

    pub fn kind(&self) -> Result<AugmentationKind> {
        AugmentationKind::from_name(&self.name)
    }

    /// Checks the name and every parameter against the registry.
    pub fn validate(&self) -> Result<AugmentationKind> {
        let kind = self.kind()?;
        let defs = kind.params();
        for (key, &value) in &self.params {
            let def = defs
                .iter()
                .find(|d| d.name == key)
                .ok_or_else(|| Error::param(key.clone(), format!("not a parameter of {kind}")))?;
            if !value.is_finite() || value < def.min || value > def.max {
                return Err(Error::param(
                    key.clone(),
                    format!("{value} not in [{}, {}]", def.min, def.max),
                ));
            }
            if def.integer && value.fract() != 0.0 {
                return Err(Error::param(key.clone(), format!("{value} is not an integer")));
            }
        }
        Ok(kind)
    }

    fn get(&self, kind: AugmentationKind, name: &str) -> Option<f64> {
        self.params.get(name).copied().or_else(|| {
            kind.params()
                .iter()
                .find(|d| d.name == name)
                .and_then(|d| d.default)
        })
    }

    fn value(&self, kind: AugmentationKind, name: &str) -> f64 {
        self.get(kind, name)
            .unwrap_or_else(|| panic!("registry has no default for {kind}.{name}"))
    }
}

impl fmt::Display for AugmentationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            let parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", parts.join(", "))?;
        }
        Ok(())
    }
}

/// Dispatches `spec` to its kernel.
pub fn apply_augmentation(spec: &AugmentationSpec, img: &Image, rng: &mut RngState) -> Result<Image> {
    use AugmentationKind::*;
    let kind = spec.validate()?;
    let v = |name: &str| spec.value(kind, name);
    match kind {
        ColorJitter => color_jitter(img, v("brightness"), v("contrast"), v("saturation"), v("hue"), rng),
        ToGray => Ok(to_gray(img)),
        Solarize => solarize(img, v("threshold") as i64),
        Equalize => Ok(equalize(img)),
        ChannelShuffle => Ok(channel_shuffle(img, rng)),
        ShiftScaleRotate => shift_scale_rotate(img, v("shift_limit"), v("scale_limit"), v("rotate_limit"), rng),
        HorizontalFlip => Ok(horizontal_flip(img)),
        ElasticTransform => displacement_transform(
            img,
            Displacement::Elastic {
                alpha: v("alpha"),
                sigma: v("sigma"),
                alpha_affine: v("alpha_affine"),
            },
            rng,
        ),
        GridDistortion => displacement_transform(
            img,
            Displacement::Grid {
                num_steps: v("num_steps") as usize,
                distort_limit: v("distort_limit"),
            },
            rng,
        ),
        OpticalDistortion => displacement_transform(
            img,
            Displacement::Optical {
                distort_limit: v("distort_limit"),
                shift_limit: v("shift_limit"),
            },
            rng,
        ),
        GaussianBlur => {
            let ksize = spec.get(kind, "kernel_size").map(|k| k as usize);
            random_gaussian_blur(img, (v("sigma_min"), v("sigma_max")), ksize, rng)
        }
        GaussNoise => random_gauss_noise(img, (v("var_min"), v("var_max")), rng),
        RandomGridShuffle => random_grid_shuffle(img, v("grid") as usize, rng),
        Cutout => {
            let hole_h = spec
                .get(kind, "hole_h")
                .map_or_else(|| img.height().div_ceil(8), |x| x as usize);
            let hole_w = spec
                .get(kind, "hole_w")
                .map_or_else(|| img.width().div_ceil(8), |x| x as usize);
            let holes = v("num_holes") as usize;
            if holes == 0 {
                return Ok(img.clone());
            }
            cutout(img, holes, hole_h, hole_w, rng)
        }
    }
}

/// Applies `f` to every image with its own child stream (`rng.fork(i)`),
/// so the result is independent of the execution mode.
pub fn map_batch<F>(images: &[Image], rng: &RngState, exec: Execution, f: F) -> Result<Vec<Image>>
where
    F: Fn(&Image, &mut RngState) -> Result<Image> + Sync + Send,
{
    exec.map(images, |i, img| {
        let mut child = rng.fork(i as u64);
        f(img, &mut child)
    })
    .into_iter()
    .collect()
}

/// Machine-readable registry: one entry per kernel with its parameters.
pub fn registry_json() -> serde_json::Value {
    let entries: Vec<serde_json::Value> = AugmentationKind::ALL
        .iter()
        .map(|k| serde_json::json!({ "name": k.name(), "params": k.params() }))
        .collect();
    serde_json::Value::Array(entries)
}
