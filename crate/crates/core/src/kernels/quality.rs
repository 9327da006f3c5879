//! Gaussian blur and additive Gaussian noise.

use super::resample::reflect101;
use crate::error::{Error, Result};
use crate::image::{to_u8, Image};
use crate::rng::RngState;

/// `2*ceil(3*sigma) + 1`.
pub fn auto_kernel_size(sigma: f64) -> usize {
    2 * (3.0 * sigma).ceil().max(0.0) as usize + 1
}

/// Normalized 1-D Gaussian taps; `size` must be odd.
pub fn gaussian_taps(sigma: f64, size: usize) -> Vec<f64> {
    let r = (size / 2) as isize;
    if sigma <= 0.0 {
        let mut taps = vec![0.0; size];
        taps[size / 2] = 1.0;
        return taps;
    }
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|t| t / total).collect()
}

/// Separable convolution of a single `h x w` plane with reflect-101
/// borders.
pub(crate) fn convolve_plane(plane: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let mut tmp = vec![0.0; plane.len()];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * plane[y * w + reflect101(x as isize + k as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; plane.len()];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * tmp[reflect101(y as isize + k as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}

pub fn gaussian_blur(img: &Image, sigma: f64, kernel_size: usize) -> Result<Image> {
    if kernel_size % 2 == 0 {
        return Err(Error::param("kernel_size", format!("{kernel_size} is not odd")));
    }
    if sigma < 0.0 {
        return Err(Error::param("sigma", "must be non-negative"));
    }
    if kernel_size == 1 {
        return Ok(img.clone());
    }
    let taps = gaussian_taps(sigma, kernel_size);
    let (h, w) = (img.height(), img.width());
    let mut out = vec![0.0; h * w * 3];
    for c in 0..3 {
        let plane: Vec<f64> = img.data().iter().skip(c).step_by(3).map(|&v| v as f64).collect();
        for (i, v) in convolve_plane(&plane, h, w, &taps).into_iter().enumerate() {
            out[i * 3 + c] = v;
        }
    }
    Ok(Image::from_f64(h, w, &out))
}

/// Draws sigma uniformly from `sigma_range`; `kernel_size = None` sizes the
/// kernel from the drawn sigma.
pub fn random_gaussian_blur(
    img: &Image,
    sigma_range: (f64, f64),
    kernel_size: Option<usize>,
    rng: &mut RngState,
) -> Result<Image> {
    if sigma_range.0 < 0.0 || sigma_range.0 > sigma_range.1 {
        return Err(Error::param("sigma_range", format!("{sigma_range:?} is not a valid range")));
    }
    let sigma = rng.uniform_in(sigma_range.0, sigma_range.1);
    gaussian_blur(img, sigma, kernel_size.unwrap_or_else(|| auto_kernel_size(sigma)))
}

/// Adds i.i.d. `N(0, variance)` noise to every channel value.
pub fn gauss_noise(img: &Image, variance: f64, rng: &mut RngState) -> Result<Image> {
    if variance < 0.0 || !variance.is_finite() {
        return Err(Error::param("variance", format!("{variance} must be non-negative")));
    }
    if variance == 0.0 {
        return Ok(img.clone());
    }
    let sd = variance.sqrt();
    let data = img
        .data()
        .iter()
        .map(|&v| to_u8(v as f64 + sd * rng.standard_normal()))
        .collect();
    Ok(Image::from_raw(img.height(), img.width(), data))
}

pub fn random_gauss_noise(img: &Image, var_range: (f64, f64), rng: &mut RngState) -> Result<Image> {
    if var_range.0 < 0.0 || var_range.0 > var_range.1 {
        return Err(Error::param("var_range", format!("{var_range:?} is not a valid range")));
    }
    let variance = rng.uniform_in(var_range.0, var_range.1);
    gauss_noise(img, variance, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taps_normalized_and_symmetric() {
        let t = gaussian_taps(1.3, 9);
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..4 {
            assert_eq!(t[i], t[8 - i]);
        }
        assert_eq!(auto_kernel_size(1.0), 7);
        assert_eq!(auto_kernel_size(0.1), 3);
    }

    #[test]
    fn errors() {
        let img = Image::filled(3, 3, [1, 1, 1]);
        assert!(gaussian_blur(&img, 1.0, 4).is_err());
        assert!(gauss_noise(&img, -1.0, &mut crate::rng::rng_from_seed(0)).is_err());
    }
}
