//! Photometric kernels: solarize, grayscale, color jitter, equalize and
//! channel shuffle.

use crate::error::{Error, Result};
use crate::image::{to_u8, Image};
use crate::rng::RngState;

/// ITU-R BT.601 luma weights.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

#[inline]
pub(crate) fn luma(r: f64, g: f64, b: f64) -> f64 {
    LUMA[0] * r + LUMA[1] * g + LUMA[2] * b
}

pub fn solarize(img: &Image, threshold: i64) -> Result<Image> {
    if !(0..=255).contains(&threshold) {
        return Err(Error::param("threshold", format!("{threshold} not in [0, 255]")));
    }
    let t = threshold as u16;
    Ok(img.map_pixels(|p| p.map(|v| if v as u16 >= t { 255 - v } else { v })))
}

pub fn to_gray(img: &Image) -> Image {
    img.map_pixels(|[r, g, b]| {
        let y = to_u8(luma(r as f64, g as f64, b as f64));
        [y, y, y]
    })
}

/// Concrete multiplicative factors for one color-jitter call. `hue` is a
/// shift expressed as a fraction of the hue circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterFactors {
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
    pub hue: f64,
}

impl JitterFactors {
    pub const IDENTITY: JitterFactors = JitterFactors {
        brightness: 1.0,
        contrast: 1.0,
        saturation: 1.0,
        hue: 0.0,
    };
}

/// Draws factors uniformly from `[max(0, 1-s), 1+s]` (hue from `[-h, h]`)
/// in the order brightness, contrast, saturation, hue, then applies them
/// in that same order.
pub fn color_jitter(
    img: &Image,
    brightness: f64,
    contrast: f64,
    saturation: f64,
    hue: f64,
    rng: &mut RngState,
) -> Result<Image> {
    for (name, v, max) in [
        ("brightness", brightness, 1.5),
        ("contrast", contrast, 1.5),
        ("saturation", saturation, 1.5),
        ("hue", hue, 0.5),
    ] {
        if !(0.0..=max).contains(&v) {
            return Err(Error::param(name, format!("{v} not in [0, {max}]")));
        }
    }
    let mut factor = |s: f64| rng.uniform_in((1.0 - s).max(0.0), 1.0 + s);
    let factors = JitterFactors {
        brightness: factor(brightness),
        contrast: factor(contrast),
        saturation: factor(saturation),
        hue: rng.uniform_in(-hue, hue),
    };
    Ok(color_jitter_with(img, factors))
}

pub fn color_jitter_with(img: &Image, f: JitterFactors) -> Image {
    let mut px = img.to_f64();
    if f.brightness != 1.0 {
        for v in px.iter_mut() {
            *v = (*v * f.brightness).clamp(0.0, 255.0);
        }
    }
    if f.contrast != 1.0 {
        let n = (px.len() / 3) as f64;
        let mean = px.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).sum::<f64>() / n;
        for v in px.iter_mut() {
            *v = (f.contrast * *v + (1.0 - f.contrast) * mean).clamp(0.0, 255.0);
        }
    }
    if f.saturation != 1.0 {
        for p in px.chunks_exact_mut(3) {
            let y = luma(p[0], p[1], p[2]);
            for v in p.iter_mut() {
                *v = (f.saturation * *v + (1.0 - f.saturation) * y).clamp(0.0, 255.0);
            }
        }
    }
    if f.hue != 0.0 {
        for p in px.chunks_exact_mut(3) {
            let (h, s, v) = rgb_to_hsv(p[0], p[1], p[2]);
            let [r, g, b] = hsv_to_rgb((h + f.hue).rem_euclid(1.0), s, v);
            p.copy_from_slice(&[r, g, b]);
        }
    }
    Image::from_f64(img.height(), img.width(), &px)
}

/// Hue in `[0, 1)`, saturation in `[0, 1]`, value in the input's units.
fn rgb_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    if delta == 0.0 {
        return (0.0, 0.0, max);
    }
    let s = delta / max;
    let h = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    (h / 6.0, s, max)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [f64; 3] {
    let h6 = h * 6.0;
    let sector = h6.floor();
    let frac = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * frac);
    let t = v * (1.0 - s * (1.0 - frac));
    match sector as i64 % 6 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

/// Per-channel histogram equalization with the cumulative-histogram remap
/// `lut[v] = round((cdf[v] - cdf_min) * 255 / (N - cdf_min))`. A constant
/// channel maps to itself.
pub fn equalize(img: &Image) -> Image {
    let n = img.height() * img.width();
    let mut luts = [[0u8; 256]; 3];
    for (c, lut) in luts.iter_mut().enumerate() {
        let mut hist = [0usize; 256];
        for p in img.pixels() {
            hist[p[c] as usize] += 1;
        }
        let cdf_min = hist.iter().copied().find(|&h| h > 0).unwrap_or(0);
        if n == cdf_min {
            for (v, out) in lut.iter_mut().enumerate() {
                *out = v as u8;
            }
            continue;
        }
        let scale = 255.0 / (n - cdf_min) as f64;
        let mut cdf = 0usize;
        for (v, out) in lut.iter_mut().enumerate() {
            cdf += hist[v];
            *out = to_u8(cdf.saturating_sub(cdf_min) as f64 * scale);
        }
    }
    img.map_pixels(|p| [luts[0][p[0] as usize], luts[1][p[1] as usize], luts[2][p[2] as usize]])
}

/// The six orderings of (R, G, B), lexicographic.
pub const CHANNEL_PERMUTATIONS: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn channel_shuffle(img: &Image, rng: &mut RngState) -> Image {
    let perm = CHANNEL_PERMUTATIONS[rng.below(6)];
    channel_shuffle_with(img, perm)
}

/// Output channel `c` takes input channel `perm[c]`.
pub fn channel_shuffle_with(img: &Image, perm: [usize; 3]) -> Image {
    img.map_pixels(|p| [p[perm[0]], p[perm[1]], p[perm[2]]])
}
