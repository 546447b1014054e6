//! Raster containers, RGB-D loading, sRGB to L\*a\*b\* conversion and min–max
//! normalization.
//!
//! All maps are stored row-major as `f64`, index `y * width + x`.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader};

use crate::error::{Error, Result};

/// Smallest accepted image side.
pub const MIN_SIDE: usize = 3;

fn check_size(width: usize, height: usize) -> Result<()> {
    if width < MIN_SIDE || height < MIN_SIDE {
        return Err(Error::TooSmall { width, height });
    }
    Ok(())
}

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    if width * height != len {
        return Err(Error::InvalidValue(format!(
            "buffer of {len} values does not match {width}x{height}"
        )));
    }
    Ok(())
}

/// An RGB image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        check_size(width, height)?;
        check_len(width, height, data.len())?;
        for (index, px) in data.iter().enumerate() {
            for &c in px {
                if !c.is_finite() {
                    return Err(Error::NonFinite { index });
                }
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::InvalidValue(format!(
                        "rgb channel {c} at index {index} outside [0,1]"
                    )));
                }
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    /// Encodes the image as 8-bit RGB.
    pub fn to_rgb8(&self) -> image::RgbImage {
        let mut out = image::RgbImage::new(self.width as u32, self.height as u32);
        for (dst, src) in out.pixels_mut().zip(&self.data) {
            dst.0 = src.map(to_u8);
        }
        out
    }
}

/// Per-pixel depth in `[0, 1]`; larger values are farther from the camera.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
    constant: bool,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_size(width, height)?;
        check_len(width, height, data.len())?;
        for (index, &d) in data.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidValue(format!(
                    "depth {d} at index {index} outside [0,1]"
                )));
            }
        }
        let constant = data.iter().all(|&d| d == data[0]);
        Ok(Self {
            width,
            height,
            data,
            constant,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// True when every pixel has the same depth.
    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// Flips the near/far convention (`d -> 1 - d`).
    pub fn inverted(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|d| 1.0 - d).collect(),
            constant: self.constant,
        }
    }

    pub fn to_gray8(&self) -> GrayImage {
        gray_from(self.width, self.height, &self.data)
    }
}

/// CIE L\*a\*b\* image (D65).
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl LabImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }
}

/// An unconstrained real-valued map (all values finite).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ScalarMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// A per-pixel saliency map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl SaliencyMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, data.len())?;
        for (index, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidValue(format!(
                    "saliency {v} at index {index} outside [0,1]"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Caller guarantees every value is finite and in `[0, 1]`.
    pub(crate) fn from_unit(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, data.len());
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Self {
            width,
            height,
            data,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::from_unit(width, height, vec![0.0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Index of the first maximal pixel.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        best
    }

    /// Min–max rescaled copy; see [`normalize_map`].
    pub fn normalized(&self) -> SaliencyMap {
        SaliencyMap::from_unit(self.width, self.height, min_max(&self.data))
    }

    pub fn to_gray8(&self) -> GrayImage {
        gray_from(self.width, self.height, &self.data)
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_gray8().save(path).map_err(|e| Error::Write {
            path: path.to_path_buf(),
            source: Box::new(e),
        })
    }

    /// Reads a grayscale map, scaling by the maximum of its bit depth.
    pub fn load_png(path: &Path) -> Result<Self> {
        let img = open(path)?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        Ok(Self::from_unit(w, h, unit_gray(&img)))
    }
}

impl From<SaliencyMap> for ScalarMap {
    fn from(m: SaliencyMap) -> Self {
        ScalarMap {
            width: m.width,
            height: m.height,
            data: m.data,
        }
    }
}

pub(crate) fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn gray_from(width: usize, height: usize, data: &[f64]) -> GrayImage {
    let mut out = GrayImage::new(width as u32, height as u32);
    for (dst, &v) in out.pixels_mut().zip(data) {
        dst.0 = [to_u8(v)];
    }
    out
}

pub(crate) fn open(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let reader = reader.with_guessed_format().map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })
}

/// Single-channel view of any raster scaled to `[0, 1]` by its bit depth.
pub(crate) fn unit_gray(img: &DynamicImage) -> Vec<f64> {
    use DynamicImage::*;
    match img {
        ImageLuma8(_) | ImageLumaA8(_) | ImageRgb8(_) | ImageRgba8(_) => img
            .to_luma8()
            .pixels()
            .map(|p| p.0[0] as f64 / 255.0)
            .collect(),
        ImageLuma16(_) | ImageLumaA16(_) | ImageRgb16(_) | ImageRgba16(_) => img
            .to_luma16()
            .pixels()
            .map(|p| p.0[0] as f64 / 65535.0)
            .collect(),
        _ => img
            .to_luma32f()
            .pixels()
            .map(|p| (p.0[0] as f64).clamp(0.0, 1.0))
            .collect(),
    }
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<[f64; 3]> = match &img {
        DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageRgba16(_) => img
            .to_rgb16()
            .pixels()
            .map(|p| p.0.map(|c| c as f64 / 65535.0))
            .collect(),
        _ => img
            .to_rgb8()
            .pixels()
            .map(|p| p.0.map(|c| c as f64 / 255.0))
            .collect(),
    };
    RgbImage::new(w, h, data)
}

pub fn load_depth(path: &Path) -> Result<DepthMap> {
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    DepthMap::new(w, h, unit_gray(&img))
}

/// Loads a color image and its depth map, which must have equal dimensions.
pub fn load_rgbd(rgb_path: &Path, depth_path: &Path) -> Result<(RgbImage, DepthMap)> {
    let rgb = load_rgb(rgb_path)?;
    let depth = load_depth(depth_path)?;
    if rgb.dims() != depth.dims() {
        return Err(Error::mismatch("rgb", rgb.dims(), "depth", depth.dims()));
    }
    Ok((rgb, depth))
}

// D65 reference white.
const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Converts one sRGB pixel (channels in `[0, 1]`) to L\*a\*b\*.
pub fn srgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb.map(srgb_to_linear);
    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    let fx = lab_f(x / WHITE[0]);
    let fy = lab_f(y / WHITE[1]);
    let fz = lab_f(z / WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn rgb_to_lab(img: &RgbImage) -> LabImage {
    LabImage {
        width: img.width,
        height: img.height,
        data: img.data.iter().map(|&p| srgb_to_lab(p)).collect(),
    }
}

/// `(x - min) / (max - min)`; a constant slice maps to all zeros.
pub(crate) fn min_max(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if values.is_empty() || hi <= lo {
        return vec![0.0; values.len()];
    }
    let range = hi - lo;
    values
        .iter()
        .map(|&v| ((v - lo) / range).clamp(0.0, 1.0))
        .collect()
}

/// Min–max normalization of a slice of finite values.
pub fn normalize_values(values: &[f64]) -> Result<Vec<f64>> {
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(min_max(values))
}

/// Rescales a map to `[0, 1]`. Constant input becomes all zeros.
pub fn normalize_map(m: &ScalarMap) -> Result<SaliencyMap> {
    let data = normalize_values(&m.data)?;
    Ok(SaliencyMap::from_unit(m.width, m.height, data))
}
