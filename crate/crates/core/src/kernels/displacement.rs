//! Non-rigid warps driven by a per-pixel displacement field: elastic,
//! grid distortion and optical (radial) distortion.

use super::quality::{auto_kernel_size, convolve_plane, gaussian_taps};
use super::resample::remap;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::RngState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Displacement {
    /// Random affine of magnitude `alpha_affine` pixels composed with a
    /// uniform(-1, 1) field smoothed by a Gaussian of `sigma` and scaled by
    /// `alpha`.
    Elastic {
        alpha: f64,
        sigma: f64,
        alpha_affine: f64,
    },
    /// Each of `num_steps` columns/rows is stretched by a factor drawn from
    /// `1 ± distort_limit`.
    Grid { num_steps: usize, distort_limit: f64 },
    /// Radial distortion with coefficient `k ~ U(±distort_limit)` around a
    /// center shifted by `U(±shift_limit)` pixels.
    Optical { distort_limit: f64, shift_limit: f64 },
}

impl Displacement {
    pub fn elastic() -> Self {
        Displacement::Elastic {
            alpha: 0.5,
            sigma: 10.0,
            alpha_affine: 5.0,
        }
    }

    pub fn grid() -> Self {
        Displacement::Grid {
            num_steps: 5,
            distort_limit: 0.3,
        }
    }

    pub fn optical() -> Self {
        Displacement::Optical {
            distort_limit: 0.5,
            shift_limit: 0.5,
        }
    }

    /// Default parameters for a kind named `elastic`, `grid_distortion` or
    /// `optical_distortion`.
    pub fn from_kind(kind: &str) -> Result<Self> {
        match kind {
            "elastic" | "elastic_transform" => Ok(Self::elastic()),
            "grid" | "grid_distortion" => Ok(Self::grid()),
            "optical" | "optical_distortion" => Ok(Self::optical()),
            other => Err(Error::UnknownAugmentation(format!("displacement kind `{other}`"))),
        }
    }
}

pub fn displacement_transform(img: &Image, kind: Displacement, rng: &mut RngState) -> Result<Image> {
    match kind {
        Displacement::Elastic {
            alpha,
            sigma,
            alpha_affine,
        } => elastic(img, alpha, sigma, alpha_affine, rng),
        Displacement::Grid {
            num_steps,
            distort_limit,
        } => {
            if num_steps == 0 || !(0.0..1.0).contains(&distort_limit) {
                return Err(Error::param("grid_distortion", "num_steps >= 1, distort_limit in [0, 1)"));
            }
            let mut steps = |_| 1.0 + rng.uniform_in(-distort_limit, distort_limit);
            let xs: Vec<f64> = (0..num_steps).map(&mut steps).collect();
            let ys: Vec<f64> = (0..num_steps).map(&mut steps).collect();
            Ok(grid_distortion_with(img, &xs, &ys))
        }
        Displacement::Optical {
            distort_limit,
            shift_limit,
        } => {
            if distort_limit < 0.0 || shift_limit < 0.0 {
                return Err(Error::param("optical_distortion", "limits must be non-negative"));
            }
            let k = rng.uniform_in(-distort_limit, distort_limit);
            let dx = rng.uniform_in(-shift_limit, shift_limit);
            let dy = rng.uniform_in(-shift_limit, shift_limit);
            Ok(optical_distortion_with(img, k, dx, dy))
        }
    }
}

fn elastic(img: &Image, alpha: f64, sigma: f64, alpha_affine: f64, rng: &mut RngState) -> Result<Image> {
    if alpha < 0.0 || alpha_affine < 0.0 || sigma <= 0.0 {
        return Err(Error::param("elastic_transform", "alpha, alpha_affine >= 0 and sigma > 0"));
    }
    let (h, w) = (img.height(), img.width());
    let (hf, wf) = (h as f64, w as f64);

    // three reference points around the center, each coordinate jittered
    let (cx, cy) = (wf / 2.0, hf / 2.0);
    let s = (hf.min(wf) / 3.0).max(1.0);
    let from = [(cx + s, cy + s), (cx + s, cy - s), (cx - s, cy - s)];
    let mut to = from;
    for p in to.iter_mut() {
        p.0 += rng.uniform_in(-alpha_affine, alpha_affine);
        p.1 += rng.uniform_in(-alpha_affine, alpha_affine);
    }
    let inverse = affine_from_points(&to, &from);

    let (dx, dy) = if alpha == 0.0 {
        (vec![0.0; h * w], vec![0.0; h * w])
    } else {
        let taps = gaussian_taps(sigma, auto_kernel_size(sigma));
        let mut field = || {
            let raw: Vec<f64> = (0..h * w).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            convolve_plane(&raw, h, w, &taps).into_iter().map(|v| v * alpha).collect::<Vec<_>>()
        };
        let dx = field();
        let dy = field();
        (dx, dy)
    };

    Ok(remap(img, |y, x| {
        let px = x as f64 + dx[y * w + x];
        let py = y as f64 + dy[y * w + x];
        (
            inverse[1][0] * px + inverse[1][1] * py + inverse[1][2],
            inverse[0][0] * px + inverse[0][1] * py + inverse[0][2],
        )
    }))
}

/// Affine map sending the three `src` points onto the three `dst` points.
fn affine_from_points(src: &[(f64, f64); 3], dst: &[(f64, f64); 3]) -> [[f64; 3]; 2] {
    // Solve [x y 1] * coeffs = target for each output row by Cramer's rule.
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = [
        [src[0].0, src[0].1, 1.0],
        [src[1].0, src[1].1, 1.0],
        [src[2].0, src[2].1, 1.0],
    ];
    let d = det3(a);
    let solve = |rhs: [f64; 3]| {
        let mut out = [0.0; 3];
        for (col, o) in out.iter_mut().enumerate() {
            let mut m = a;
            for row in 0..3 {
                m[row][col] = rhs[row];
            }
            *o = det3(m) / d;
        }
        out
    };
    [
        solve([dst[0].0, dst[1].0, dst[2].0]),
        solve([dst[0].1, dst[1].1, dst[2].1]),
    ]
}

/// Piecewise-linear stretch: destination cell `i` (of nominal width
/// `w / n`) reads from a source span scaled by `x_steps[i]`. All-ones
/// steps give the identity.
pub fn grid_distortion_with(img: &Image, x_steps: &[f64], y_steps: &[f64]) -> Image {
    let xmap = axis_map(img.width(), x_steps);
    let ymap = axis_map(img.height(), y_steps);
    remap(img, |y, x| (ymap[y], xmap[x]))
}

fn axis_map(len: usize, steps: &[f64]) -> Vec<f64> {
    let n = steps.len();
    let cell = len as f64 / n as f64;
    let mut starts = Vec::with_capacity(n);
    let mut acc = 0.0;
    for s in steps {
        starts.push(acc);
        acc += cell * s;
    }
    (0..len)
        .map(|x| {
            let xf = x as f64;
            let i = ((xf / cell).floor() as usize).min(n - 1);
            starts[i] + (xf - i as f64 * cell) * steps[i]
        })
        .collect()
}

/// Radial model with focal lengths equal to the image sides:
/// `src = c + (dst - c) * (1 + k r^2 + k r^4)` in normalized coordinates.
pub fn optical_distortion_with(img: &Image, k: f64, shift_x: f64, shift_y: f64) -> Image {
    let (hf, wf) = (img.height() as f64, img.width() as f64);
    let (cx, cy) = (wf / 2.0 + shift_x, hf / 2.0 + shift_y);
    remap(img, |y, x| {
        let nx = (x as f64 - cx) / wf;
        let ny = (y as f64 - cy) / hf;
        let r2 = nx * nx + ny * ny;
        let f = 1.0 + k * r2 + k * r2 * r2;
        (ny * f * hf + cy, nx * f * wf + cx)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn affine_from_points_recovers_translation() {
        let src = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
        let dst = [(2.0, 3.0), (3.0, 3.0), (2.0, 4.0)];
        let m = affine_from_points(&src, &dst);
        let expect = [[1.0, 0.0, 2.0], [0.0, 1.0, 3.0]];
        for r in 0..2 {
            for c in 0..3 {
                assert!((m[r][c] - expect[r][c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_steps_are_identity_map() {
        for len in [1, 5, 7, 32] {
            let m = axis_map(len, &[1.0; 5]);
            for (x, v) in m.iter().enumerate() {
                assert!((v - x as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_coefficient_optical_is_identity() {
        let img = Image::random(9, 6, &mut rng_from_seed(5));
        assert_eq!(optical_distortion_with(&img, 0.0, 0.3, -0.2), img);
    }

    #[test]
    fn unknown_kind() {
        assert!(Displacement::from_kind("swirl").is_err());
    }
}
