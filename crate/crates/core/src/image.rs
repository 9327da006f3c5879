//! 8-bit RGB raster plus PNG / binary PPM I/O.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const CHANNELS: usize = 3;

/// Row-major, interleaved RGB, 8 bits per channel. Immutable once built;
/// kernels return new images.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl Image {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {height}x{width}"
            )));
        }
        if data.len() != height * width * CHANNELS {
            return Err(Error::InvalidImage(format!(
                "expected {} bytes for {height}x{width}x3, got {}",
                height * width * CHANNELS,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Every pixel set to `rgb`.
    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> Self {
        assert!(height > 0 && width > 0);
        let data = rgb.iter().copied().cycle().take(height * width * 3).collect();
        Self {
            height,
            width,
            data,
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(height > 0 && width > 0);
        let mut data = Vec::with_capacity(height * width * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(y, x));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    /// Random image with independent uniform intensities.
    pub fn random(height: usize, width: usize, rng: &mut crate::RngState) -> Self {
        Self::from_fn(height, width, |_, _| {
            [rng.below(256) as u8, rng.below(256) as u8, rng.below(256) as u8]
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width
    }

    /// Builds an image of the same shape from a per-pixel map.
    pub fn map_pixels(&self, mut f: impl FnMut([u8; 3]) -> [u8; 3]) -> Image {
        let mut data = Vec::with_capacity(self.data.len());
        for p in self.pixels() {
            data.extend_from_slice(&f(p));
        }
        Image {
            height: self.height,
            width: self.width,
            data,
        }
    }

    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<u8>) -> Image {
        debug_assert_eq!(data.len(), height * width * 3);
        Image {
            height,
            width,
            data,
        }
    }

    /// Converts a planar-per-channel float buffer back to 8 bits with
    /// clamp-and-round.
    pub(crate) fn from_f64(height: usize, width: usize, values: &[f64]) -> Image {
        Image::from_raw(height, width, values.iter().map(|&v| to_u8(v)).collect())
    }

    pub(crate) fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| v as f64).collect()
    }
}

/// Clamp to `[0, 255]` then round half away from zero.
#[inline]
pub fn to_u8(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.clamp(0.0, 255.0).round() as u8
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(b"P6") || bytes.starts_with(b"P5") {
        decode_pnm(bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(bytes)
    } else {
        Err(Error::UnsupportedFormat(
            "expected binary PPM/PGM (P6/P5) or PNG".into(),
        ))
    }
}

/// Writes PNG when the extension is `.png`, binary PPM otherwise. The file
/// is written next to its destination and renamed into place, so a failed
/// write never leaves a truncated image behind.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let bytes = if is_png { encode_png(img)? } else { encode_ppm(img) };

    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let gray = &bytes[..2] == b"P5";
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and `#` comments between header tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Decode("malformed PNM header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Decode("malformed PNM header".into()))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "PNM maxval {maxval}; only 8-bit (255) is supported"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage("zero dimension".into()));
    }
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::Decode("malformed PNM header".into()));
    }
    pos += 1;
    let per_pixel = if gray { 1 } else { 3 };
    let need = width * height * per_pixel;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::Decode("truncated PNM raster".into()))?;
    let data = if gray {
        raster.iter().flat_map(|&v| [v, v, v]).collect()
    } else {
        raster.to_vec()
    };
    Image::new(height, width, data)
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    use image::DynamicImage;
    let dynamic = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Decode(e.to_string()))?;
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    let data = match dynamic {
        DynamicImage::ImageRgb8(buf) => buf.into_raw(),
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().flat_map(|v| [v, v, v]).collect(),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "PNG color type {:?}; only 8-bit RGB or gray is supported",
                other.color()
            )))
        }
    };
    Image::new(h, w, data)
}

fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let buf = image::RgbImage::from_raw(img.width as u32, img.height as u32, img.data.clone())
        .ok_or_else(|| Error::InvalidImage("buffer size mismatch".into()))?;
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::Decode(e.to_string()))?;
    Ok(out.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn black_ppm() {
        let bytes = b"P6\n2 2\n255\n\0\0\0\0\0\0\0\0\0\0\0\0";
        let img = decode_image(bytes).unwrap();
        assert_eq!((img.height(), img.width()), (2, 2));
        assert!(img.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn ppm_header_comments() {
        let bytes = b"P6 # made by hand\n1 1\n# max\n255\n\x01\x02\x03";
        assert_eq!(decode_image(bytes).unwrap().pixel(0, 0), [1, 2, 3]);
    }

    #[test]
    fn pgm_is_replicated() {
        let bytes = b"P5\n2 1\n255\n\x07\x09";
        let img = decode_image(bytes).unwrap();
        assert_eq!(img.data(), &[7, 7, 7, 9, 9, 9]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(decode_image(b"GIF89a"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(decode_image(b"P6\n0 2\n255\n"), Err(Error::InvalidImage(_))));
        assert!(matches!(decode_image(b"P6\n2 2\n65535\n"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(decode_image(b"P6\n2 2\n255\n\0\0"), Err(Error::Decode(_))));
        assert!(Image::new(2, 2, vec![0; 11]).is_err());
        assert!(Image::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn single_red_png() {
        let img = Image::new(1, 1, vec![255, 0, 0]).unwrap();
        let png = encode_png(&img).unwrap();
        assert_eq!(decode_image(&png).unwrap().data(), &[255, 0, 0]);
    }

    #[test]
    fn gray_png_is_replicated() {
        let buf = image::GrayImage::from_raw(2, 1, vec![10, 200]).unwrap();
        let mut out = std::io::Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png).unwrap();
        let img = decode_image(&out.into_inner()).unwrap();
        assert_eq!(img.data(), &[10, 10, 10, 200, 200, 200]);
    }

    #[test]
    fn gradient_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let img = Image::from_fn(32, 32, |y, x| [(x * 8) as u8, (y * 8) as u8, ((x + y) * 4) as u8]);
        for name in ["g.ppm", "g.png"] {
            let p = dir.path().join(name);
            save_image(&img, &p).unwrap();
            assert_eq!(load_image(&p).unwrap(), img);
        }
        let ppm = fs::read(dir.path().join("g.ppm")).unwrap();
        assert_eq!(ppm, encode_ppm(&img));
    }

    #[test]
    fn random_image_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = Image::random(3, 5, &mut rng_from_seed(7));
        let p = dir.path().join("r.ppm");
        save_image(&img, &p).unwrap();
        assert_eq!(load_image(&p).unwrap(), img);
    }

    #[test]
    fn unwritable_path_errors_without_residue() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("missing").join("x.ppm");
        let img = Image::filled(2, 2, [1, 2, 3]);
        assert!(matches!(save_image(&img, &p), Err(Error::Io { .. })));
        assert!(!p.exists());
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(to_u8(0.5), 1);
        assert_eq!(to_u8(1.49), 1);
        assert_eq!(to_u8(254.5), 255);
        assert_eq!(to_u8(-3.0), 0);
        assert_eq!(to_u8(300.0), 255);
    }
}
