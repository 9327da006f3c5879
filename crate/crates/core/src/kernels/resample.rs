//! Bicubic resampling with reflect-101 borders (`dcb|abcd|cba`), shared by
//! every geometric and non-rigid warp.

use crate::image::{to_u8, Image};

/// OpenCV's bicubic coefficient.
const CUBIC_A: f64 = -0.75;

/// Source coordinates closer than this to an integer are snapped, so exact
/// warps (identity, 90°/180° rotations) stay bit-exact.
const SNAP: f64 = 1e-9;

/// Folds any index into `0..n` by reflect-101.
#[inline]
pub(crate) fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut m = i.rem_euclid(period);
    if m >= n as isize {
        m = period - m;
    }
    m as usize
}

#[inline]
fn cubic_weights(t: f64) -> [f64; 4] {
    let a = CUBIC_A;
    let w0 = ((a * (t + 1.0) - 5.0 * a) * (t + 1.0) + 8.0 * a) * (t + 1.0) - 4.0 * a;
    let w1 = ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    let u = 1.0 - t;
    let w2 = ((a + 2.0) * u - (a + 3.0)) * u * u + 1.0;
    [w0, w1, w2, 1.0 - w0 - w1 - w2]
}

#[inline]
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v
    }
}

/// Samples all three channels at fractional source position `(sy, sx)`.
pub(crate) fn sample_bicubic(img: &Image, sy: f64, sx: f64) -> [f64; 3] {
    let (h, w) = (img.height(), img.width());
    let data = img.data();
    let (sy, sx) = (snap(sy), snap(sx));
    let (fy, fx) = (sy.floor(), sx.floor());
    let (ty, tx) = (sy - fy, sx - fx);
    let (iy, ix) = (fy as isize, fx as isize);
    if ty == 0.0 && tx == 0.0 {
        let i = (reflect101(iy, h) * w + reflect101(ix, w)) * 3;
        return [data[i] as f64, data[i + 1] as f64, data[i + 2] as f64];
    }
    let wy = cubic_weights(ty);
    let wx = cubic_weights(tx);
    let mut acc = [0.0; 3];
    for (dy, wyv) in wy.iter().enumerate() {
        if *wyv == 0.0 {
            continue;
        }
        let row = reflect101(iy + dy as isize - 1, h) * w;
        for (dx, wxv) in wx.iter().enumerate() {
            let weight = wyv * wxv;
            if weight == 0.0 {
                continue;
            }
            let i = (row + reflect101(ix + dx as isize - 1, w)) * 3;
            acc[0] += weight * data[i] as f64;
            acc[1] += weight * data[i + 1] as f64;
            acc[2] += weight * data[i + 2] as f64;
        }
    }
    acc
}

/// Inverse-maps every output pixel `(y, x)` to a source position and
/// resamples. The output has the input's shape.
pub(crate) fn remap(img: &Image, mut source: impl FnMut(usize, usize) -> (f64, f64)) -> Image {
    let (h, w) = (img.height(), img.width());
    let mut out = Vec::with_capacity(h * w * 3);
    for y in 0..h {
        for x in 0..w {
            let (sy, sx) = source(y, x);
            out.extend(sample_bicubic(img, sy, sx).map(to_u8));
        }
    }
    Image::from_raw(h, w, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflect101_folds() {
        let got: Vec<usize> = (-4..8).map(|i| reflect101(i, 4)).collect();
        assert_eq!(got, vec![2, 3, 2, 1, 0, 1, 2, 3, 2, 1, 0, 1]);
        assert_eq!(reflect101(-7, 1), 0);
    }

    #[test]
    fn cubic_weights_partition_unity() {
        for i in 0..=20 {
            let w = cubic_weights(i as f64 / 20.0);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(cubic_weights(0.0), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn identity_remap_is_exact() {
        let mut rng = crate::rng::rng_from_seed(1);
        let img = Image::random(7, 5, &mut rng);
        assert_eq!(remap(&img, |y, x| (y as f64, x as f64)), img);
    }
}
