//! Rigid/affine kernels: horizontal flip, shift-scale-rotate and the
//! random resized crop used by the baseline pipeline.

use super::resample::remap;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::RngState;

pub fn horizontal_flip(img: &Image) -> Image {
    let (h, w) = (img.height(), img.width());
    Image::from_fn(h, w, |y, x| img.pixel(y, w - 1 - x))
}

/// Forward 2x3 affine matrix `[a b c; d e f]`.
pub(crate) type Affine = [[f64; 3]; 2];

pub(crate) fn invert_affine(m: &Affine) -> Affine {
    let [[a, b, c], [d, e, f]] = *m;
    let det = a * e - b * d;
    let (ia, ib, id, ie) = (e / det, -b / det, -d / det, a / det);
    [[ia, ib, -(ia * c + ib * f)], [id, ie, -(id * c + ie * f)]]
}

/// Resamples through the inverse of a forward affine map.
pub(crate) fn warp_affine(img: &Image, forward: &Affine) -> Image {
    let inv = invert_affine(forward);
    remap(img, |y, x| {
        let (x, y) = (x as f64, y as f64);
        (
            inv[1][0] * x + inv[1][1] * y + inv[1][2],
            inv[0][0] * x + inv[0][1] * y + inv[0][2],
        )
    })
}

/// One concrete shift-scale-rotate draw. `angle_deg` is counter-clockwise
/// on screen, `shift_x`/`shift_y` are fractions of width/height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftScaleRotate {
    pub angle_deg: f64,
    pub scale: f64,
    pub shift_x: f64,
    pub shift_y: f64,
}

/// Draws angle, scale delta, x shift and y shift uniformly in their
/// symmetric limits (in that order) and warps about the image center.
pub fn shift_scale_rotate(
    img: &Image,
    shift_limit: f64,
    scale_limit: f64,
    rotate_limit: f64,
    rng: &mut RngState,
) -> Result<Image> {
    if !(0.0..1.0).contains(&scale_limit) {
        return Err(Error::param("scale_limit", format!("{scale_limit} not in [0, 1)")));
    }
    if shift_limit < 0.0 || rotate_limit < 0.0 {
        return Err(Error::param("shift_limit/rotate_limit", "must be non-negative"));
    }
    let params = ShiftScaleRotate {
        angle_deg: rng.uniform_in(-rotate_limit, rotate_limit),
        scale: 1.0 + rng.uniform_in(-scale_limit, scale_limit),
        shift_x: rng.uniform_in(-shift_limit, shift_limit),
        shift_y: rng.uniform_in(-shift_limit, shift_limit),
    };
    Ok(shift_scale_rotate_with(img, params))
}

pub fn shift_scale_rotate_with(img: &Image, p: ShiftScaleRotate) -> Image {
    let (h, w) = (img.height() as f64, img.width() as f64);
    let (cx, cy) = ((w - 1.0) / 2.0, (h - 1.0) / 2.0);
    let theta = p.angle_deg.to_radians();
    let (alpha, beta) = (p.scale * theta.cos(), p.scale * theta.sin());
    let m: Affine = [
        [alpha, beta, (1.0 - alpha) * cx - beta * cy + p.shift_x * w],
        [-beta, alpha, beta * cx + (1.0 - alpha) * cy + p.shift_y * h],
    ];
    warp_affine(img, &m)
}

/// Crop box in source pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropBox {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

/// Area fraction in `scale`, log-uniform aspect ratio in `ratio`; up to ten
/// attempts, then the whole image.
pub fn random_resized_crop(
    img: &Image,
    scale: (f64, f64),
    ratio: (f64, f64),
    rng: &mut RngState,
) -> Image {
    let (h, w) = (img.height(), img.width());
    let area = (h * w) as f64;
    let mut chosen = CropBox {
        top: 0,
        left: 0,
        height: h,
        width: w,
    };
    for _ in 0..10 {
        let target = area * rng.uniform_in(scale.0, scale.1);
        let aspect = rng.uniform_in(ratio.0.ln(), ratio.1.ln()).exp();
        let cw = (target * aspect).sqrt().round() as usize;
        let ch = (target / aspect).sqrt().round() as usize;
        if cw > 0 && ch > 0 && cw <= w && ch <= h {
            chosen = CropBox {
                top: rng.below(h - ch + 1),
                left: rng.below(w - cw + 1),
                height: ch,
                width: cw,
            };
            break;
        }
    }
    resized_crop(img, chosen)
}

/// Resizes the crop box back to the full image size with pixel-center
/// alignment.
pub fn resized_crop(img: &Image, b: CropBox) -> Image {
    let (h, w) = (img.height(), img.width());
    let sy = b.height as f64 / h as f64;
    let sx = b.width as f64 / w as f64;
    remap(img, |y, x| {
        (
            b.top as f64 + (y as f64 + 0.5) * sy - 0.5,
            b.left as f64 + (x as f64 + 0.5) * sx - 0.5,
        )
    })
}
