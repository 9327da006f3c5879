//! Brute-force pixel oracles for the augmentation kernels. These are
//! written directly from the per-pixel definitions and share no code with
//! the library's kernels.

use groupaug::kernels::{self, AugmentationKind, AugmentationSpec, JitterFactors, ShiftScaleRotate};
use groupaug::{Image, RngState};

type Px = [u8; 3];

fn grid(img: &Image) -> Vec<Vec<Px>> {
    (0..img.height())
        .map(|y| (0..img.width()).map(|x| img.pixel(y, x)).collect())
        .collect()
}

fn from_grid(g: &[Vec<Px>]) -> Image {
    Image::from_fn(g.len(), g[0].len(), |y, x| g[y][x])
}

fn round_clamp(v: f64) -> u8 {
    let c = if v < 0.0 {
        0.0
    } else if v > 255.0 {
        255.0
    } else {
        v
    };
    // half away from zero, by hand
    let f = c.floor();
    (if c - f >= 0.5 { f + 1.0 } else { f }) as u8
}

pub fn solarize(img: &Image, t: u8) -> Image {
    let mut g = grid(img);
    for row in g.iter_mut() {
        for px in row.iter_mut() {
            for v in px.iter_mut() {
                if *v >= t {
                    *v = 255 - *v;
                }
            }
        }
    }
    from_grid(&g)
}

pub fn gray(img: &Image) -> Image {
    let mut g = grid(img);
    for row in g.iter_mut() {
        for px in row.iter_mut() {
            let y = round_clamp(0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64);
            *px = [y, y, y];
        }
    }
    from_grid(&g)
}

pub fn flip(img: &Image) -> Image {
    let g: Vec<Vec<Px>> = grid(img).into_iter().map(|r| r.into_iter().rev().collect()).collect();
    from_grid(&g)
}

/// Equalization by counting, per value, how many pixels are `<=` it.
pub fn equalize(img: &Image) -> Image {
    let g = grid(img);
    let all: Vec<Px> = g.iter().flatten().copied().collect();
    let n = all.len();
    let mut out = g.clone();
    for c in 0..3 {
        let vals: Vec<u8> = all.iter().map(|p| p[c]).collect();
        let min = *vals.iter().min().unwrap();
        let count_min = vals.iter().filter(|&&v| v == min).count();
        for row in out.iter_mut() {
            for px in row.iter_mut() {
                if count_min == n {
                    continue;
                }
                let le = vals.iter().filter(|&&v| v <= px[c]).count();
                px[c] = round_clamp((le - count_min) as f64 * 255.0 / (n - count_min) as f64);
            }
        }
    }
    from_grid(&out)
}

pub fn brightness(img: &Image, f: f64) -> Image {
    let mut g = grid(img);
    for row in g.iter_mut() {
        for px in row.iter_mut() {
            *px = px.map(|v| round_clamp(v as f64 * f));
        }
    }
    from_grid(&g)
}

pub fn permute(img: &Image, perm: [usize; 3]) -> Image {
    let mut g = grid(img);
    for row in g.iter_mut() {
        for px in row.iter_mut() {
            let src = *px;
            for c in 0..3 {
                px[c] = src[perm[c]];
            }
        }
    }
    from_grid(&g)
}

pub fn rotate180(img: &Image) -> Image {
    let g = grid(img);
    let flat: Vec<Px> = g.iter().flatten().rev().copied().collect();
    let w = img.width();
    let rows: Vec<Vec<Px>> = flat.chunks(w).map(|c| c.to_vec()).collect();
    from_grid(&rows)
}

/// Direct (non-separable) 2-D convolution with mirrored indices.
pub fn blur(img: &Image, sigma: f64, k: usize) -> Image {
    let r = (k / 2) as i64;
    let taps: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = taps.iter().sum();
    let (h, w) = (img.height() as i64, img.width() as i64);
    let mirror = |i: i64, n: i64| -> usize {
        if n == 1 {
            return 0;
        }
        let mut i = i;
        while i < 0 || i >= n {
            if i < 0 {
                i = -i;
            }
            if i >= n {
                i = 2 * (n - 1) - i;
            }
        }
        i as usize
    };
    let g = grid(img);
    let out: Vec<Vec<Px>> = (0..h)
        .map(|y| {
            (0..w)
                .map(|x| {
                    let mut acc = [0.0f64; 3];
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let wgt = taps[(dy + r) as usize] * taps[(dx + r) as usize] / (norm * norm);
                            let p = g[mirror(y + dy, h)][mirror(x + dx, w)];
                            for c in 0..3 {
                                acc[c] += wgt * p[c] as f64;
                            }
                        }
                    }
                    acc.map(round_clamp)
                })
                .collect()
        })
        .collect();
    from_grid(&out)
}

pub fn cutout(img: &Image, top: usize, left: usize, hh: usize, hw: usize) -> Image {
    let mut g = grid(img);
    for (y, row) in g.iter_mut().enumerate() {
        for (x, px) in row.iter_mut().enumerate() {
            if y >= top && y < top + hh && x >= left && x < left + hw {
                *px = [0, 0, 0];
            }
        }
    }
    from_grid(&g)
}

/// Tile copy for an exactly divisible grid.
pub fn tile_permute(img: &Image, n: usize, perm: &[usize]) -> Image {
    let (th, tw) = (img.height() / n, img.width() / n);
    let g = grid(img);
    let mut out = g.clone();
    for dst in 0..n * n {
        let src = perm[dst];
        let (dy, dx) = (dst / n * th, dst % n * tw);
        let (sy, sx) = (src / n * th, src % n * tw);
        for r in 0..th {
            for c in 0..tw {
                out[dy + r][dx + c] = g[sy + r][sx + c];
            }
        }
    }
    from_grid(&out)
}

pub struct Case {
    pub name: String,
    pub passed: bool,
}

fn case(name: impl Into<String>, passed: bool) -> Case {
    Case {
        name: name.into(),
        passed,
    }
}

fn rand_img(seed: u64, h: usize, w: usize) -> Image {
    Image::random(h, w, &mut RngState::from_seed(seed))
}

/// Every derived kernel example, checked against the oracles above, over
/// several images each.
pub fn kernel_cases() -> Vec<Case> {
    let mut out = Vec::new();
    let seeds = [1u64, 2, 3];

    let px = Image::filled(1, 1, [200, 100, 130]);
    let got = kernels::solarize(&px, 127).unwrap();
    out.push(case("solarize (200,100,130)@127 -> (55,100,125)", got.pixel(0, 0) == [55, 100, 125] && got == solarize(&px, 127)));
    for s in seeds {
        let img = rand_img(s, 9, 7);
        let t = (s * 60) as u8;
        out.push(case(format!("solarize random seed {s} threshold {t}"), kernels::solarize(&img, t as i64).unwrap() == solarize(&img, t)));
    }

    let red = Image::filled(1, 1, [255, 0, 0]);
    out.push(case("to_gray (255,0,0) -> (76,76,76)", kernels::to_gray(&red).pixel(0, 0) == [76, 76, 76] && gray(&red) == kernels::to_gray(&red)));
    for s in seeds {
        let img = rand_img(10 + s, 8, 8);
        let g = kernels::to_gray(&img);
        out.push(case(format!("to_gray oracle + idempotence seed {s}"), g == gray(&img) && kernels::to_gray(&g) == g));
    }

    let mid = Image::filled(2, 2, [100, 100, 100]);
    let f = JitterFactors {
        brightness: 2.0,
        ..JitterFactors::IDENTITY
    };
    out.push(case("brightness x2 on (100,100,100) -> (200,200,200)", kernels::color_jitter_with(&mid, f).pixel(0, 0) == [200, 200, 200]));
    for s in seeds {
        let img = rand_img(20 + s, 6, 6);
        let b = 0.5 + 0.25 * s as f64;
        let f = JitterFactors {
            brightness: b,
            ..JitterFactors::IDENTITY
        };
        out.push(case(format!("brightness x{b} seed {s}"), kernels::color_jitter_with(&img, f) == brightness(&img, b)));
    }
    for s in seeds {
        let img = rand_img(30 + s, 6, 6);
        let f = JitterFactors {
            saturation: 0.0,
            ..JitterFactors::IDENTITY
        };
        out.push(case(format!("saturation 0 equals gray seed {s}"), kernels::color_jitter_with(&img, f) == gray(&img)));
    }

    let ramp = Image::from_fn(16, 16, |y, x| {
        let v = (y * 16 + x) as u8;
        [v, 255 - v, v]
    });
    out.push(case("equalize 0..255 once each is a fixed point", kernels::equalize(&ramp) == ramp && equalize(&ramp) == ramp));
    let two = Image::from_fn(4, 4, |y, _| if y < 2 { [0, 0, 0] } else { [255, 255, 255] });
    let eq = kernels::equalize(&two);
    out.push(case("equalize two-level -> {0,255}", eq == two && eq == equalize(&two)));
    let two_mid = Image::from_fn(2, 2, |y, _| if y == 0 { [40, 40, 40] } else { [90, 90, 90] });
    let eq = kernels::equalize(&two_mid);
    out.push(case("equalize {40,90} -> {0,255}", eq.pixel(0, 0) == [0, 0, 0] && eq.pixel(1, 0) == [255, 255, 255] && eq == equalize(&two_mid)));
    for s in seeds {
        let img = rand_img(40 + s, 7, 9);
        out.push(case(format!("equalize random seed {s}"), kernels::equalize(&img) == equalize(&img)));
    }

    let p123 = Image::filled(1, 1, [1, 2, 3]);
    out.push(case("channel shuffle (B,G,R) on (1,2,3) -> (3,2,1)", kernels::channel_shuffle_with(&p123, [2, 1, 0]).pixel(0, 0) == [3, 2, 1]));
    for s in seeds {
        let img = rand_img(50 + s, 5, 5);
        let mut rng = RngState::from_seed(s);
        let out_img = kernels::channel_shuffle(&img, &mut rng);
        let multiset = img.pixels().zip(out_img.pixels()).all(|(a, b)| {
            let (mut a, mut b) = (a, b);
            a.sort_unstable();
            b.sort_unstable();
            a == b
        });
        let matches_some_perm = kernels::CHANNEL_PERMUTATIONS.iter().any(|&p| permute(&img, p) == out_img);
        out.push(case(format!("channel shuffle multiset + uniform permutation seed {s}"), multiset && matches_some_perm));
    }

    let two_px = Image::from_fn(1, 2, |_, x| if x == 0 { [1, 1, 1] } else { [2, 2, 2] });
    let flipped = kernels::horizontal_flip(&two_px);
    out.push(case("flip 1x2", flipped.pixel(0, 0) == [2, 2, 2] && flipped.pixel(0, 1) == [1, 1, 1]));
    for s in seeds {
        let img = rand_img(60 + s, 4, 7);
        out.push(case(format!("flip oracle seed {s}"), kernels::horizontal_flip(&img) == flip(&img)));
    }

    let rot = ShiftScaleRotate {
        angle_deg: 180.0,
        scale: 1.0,
        shift_x: 0.0,
        shift_y: 0.0,
    };
    for (s, (h, w)) in [(1u64, (2usize, 2usize)), (2, (3, 5)), (3, (6, 4))] {
        let img = rand_img(70 + s, h, w);
        out.push(case(format!("rotate 180 {h}x{w} reverses raster order"), kernels::shift_scale_rotate_with(&img, rot) == rotate180(&img)));
    }

    for s in seeds {
        let img = rand_img(80 + s, 10, 12);
        let ones = vec![1.0; 5];
        out.push(case(format!("grid distortion zero perturbation identity seed {s}"), kernels::grid_distortion_with(&img, &ones, &ones) == img));
    }

    let impulse = Image::from_fn(1, 5, |_, x| if x == 2 { [255, 255, 255] } else { [0, 0, 0] });
    let blurred = kernels::gaussian_blur(&impulse, 1.0, 3).unwrap();
    let e = (-0.5f64).exp();
    let side = round_clamp(255.0 * e / (1.0 + 2.0 * e));
    let centre = round_clamp(255.0 / (1.0 + 2.0 * e));
    let row: Vec<u8> = (0..5).map(|x| blurred.pixel(0, x)[0]).collect();
    out.push(case(format!("blur impulse -> [0,{side},{centre},{side},0]"), row == vec![0, side, centre, side, 0] && (side, centre) == (70, 115)));
    for s in seeds {
        let img = rand_img(90 + s, 9, 8);
        let sigma = 0.6 * s as f64;
        let k = kernels::auto_kernel_size(sigma);
        out.push(case(format!("blur direct 2-D sigma {sigma} k {k}"), kernels::gaussian_blur(&img, sigma, k).unwrap() == blur(&img, sigma, k)));
    }

    let gray_img = Image::filled(256, 256, [128, 128, 128]);
    let variance = 30.0;
    let noisy = kernels::gauss_noise(&gray_img, variance, &mut RngState::from_seed(5)).unwrap();
    let diffs: Vec<f64> = noisy.data().iter().map(|&v| v as f64 - 128.0).collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    out.push(case(format!("noise mean {mean:.4} within 0.5"), mean.abs() <= 0.5));
    out.push(case(format!("noise variance {var:.2} within 15% of {variance}"), (var - variance).abs() <= 0.15 * variance));

    let white = Image::filled(4, 4, [255, 255, 255]);
    let holed = kernels::cutout_at(&white, &[(0, 0)], 2, 2).unwrap();
    let zeros = holed.pixels().filter(|p| *p == [0, 0, 0]).count();
    out.push(case("cutout 2x2 at (0,0) -> 4 zero pixels", zeros == 4 && holed == cutout(&white, 0, 0, 2, 2)));
    for s in seeds {
        let img = Image::filled(16, 16, [200, 150, 100]);
        let mut rng = RngState::from_seed(s);
        let holed = kernels::cutout(&img, 4, 2, 2, &mut rng).unwrap();
        let changed = img.pixels().zip(holed.pixels()).filter(|(a, b)| a != b).count();
        out.push(case(format!("cutout changes <= 16 pixels seed {s} ({changed})"), changed <= 16 && changed >= 4));
    }

    let quad = Image::from_fn(2, 2, |y, x| [(y * 2 + x) as u8 * 10, 0, 0]);
    let swapped = kernels::grid_shuffle_with(&quad, 2, &[3, 1, 2, 0]).unwrap();
    out.push(case("grid 2 diagonal swap", swapped.pixel(0, 0)[0] == 30 && swapped.pixel(1, 1)[0] == 0 && swapped.pixel(0, 1)[0] == 10));
    for s in seeds {
        let img = rand_img(100 + s, 9, 9);
        let mut perm: Vec<usize> = (0..9).collect();
        RngState::from_seed(s).shuffle(&mut perm);
        out.push(case(format!("grid 3 tile permutation seed {s}"), kernels::grid_shuffle_with(&img, 3, &perm).unwrap() == tile_permute(&img, 3, &perm)));
    }

    let img = rand_img(7, 8, 8);
    let all_ok = AugmentationKind::ALL.iter().all(|&k| {
        let spec = AugmentationSpec::new(k);
        let mut rng = RngState::from_seed(11);
        matches!(kernels::apply_augmentation(&spec, &img, &mut rng), Ok(o) if o.same_shape(&img))
    });
    out.push(case("every catalog kernel dispatches on 8x8", all_ok));
    out
}
