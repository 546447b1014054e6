//! Deterministic synthetic RGB-D fixtures with exact ground truth.
//!
//! Each detection fixture is a saturated disk or rectangle, near the camera,
//! over a hazy textured background whose depth recedes toward the top, with
//! a pale floor band and a box of the same material as mid-depth clutter. A
//! separate set of haze-free outdoor-like scenes (saturated colors, shadows,
//! deep sky) backs the dark-channel statistic check.

use std::path::Path;

use image::{ImageBuffer, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{discover_dataset, DatasetIndex, Layout};
use crate::error::{Error, Result};
use crate::imaging::{DepthMap, RgbImage};
use crate::metrics::GroundTruth;

pub const FIXTURE_WIDTH: usize = 192;
pub const FIXTURE_HEIGHT: usize = 144;
/// Number of haze-free scenes written next to the detection fixtures.
pub const HAZE_FREE_COUNT: usize = 20;
pub const HAZE_FREE_DIR: &str = "haze_free";

#[derive(Debug, Clone)]
pub struct FixtureSample {
    pub stem: String,
    pub rgb: RgbImage,
    pub depth: DepthMap,
    pub gt: GroundTruth,
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Disk { cx: f64, cy: f64, r: f64 },
    Rect { cx: f64, cy: f64, hw: f64, hh: f64 },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Disk { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            Shape::Rect { cx, cy, hw, hh } => (x - cx).abs() <= hw && (y - cy).abs() <= hh,
        }
    }

    /// 0 at the shape center, about 1 at its edge.
    fn radial(&self, x: f64, y: f64) -> f64 {
        match *self {
            Shape::Disk { cx, cy, r } => ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() / r,
            Shape::Rect { cx, cy, hw, hh } => ((x - cx) / hw).abs().max(((y - cy) / hh).abs()),
        }
    }
}

fn hsv(h: f64, s: f64, v: f64) -> [f64; 3] {
    let h6 = (h.rem_euclid(1.0)) * 6.0;
    let c = v * s;
    let x = c * (1.0 - (h6 % 2.0 - 1.0).abs());
    let m = v - c;
    let [r, g, b] = match h6 as u32 {
        0 => [c, x, 0.0],
        1 => [x, c, 0.0],
        2 => [0.0, c, x],
        3 => [0.0, x, c],
        4 => [x, 0.0, c],
        _ => [c, 0.0, x],
    };
    [r + m, g + m, b + m]
}

fn rng_for(seed: u64, index: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream << 32 | index as u64);
    rng
}

fn clamp3(c: [f64; 3]) -> [f64; 3] {
    c.map(|v| v.clamp(0.0, 1.0))
}

/// Detection fixture `index` for `seed`.
pub fn fixture_sample(index: usize, seed: u64, width: usize, height: usize) -> FixtureSample {
    let mut rng = rng_for(seed, index, 1);
    let (w, h) = (width as f64, height as f64);

    let gray = rng.gen_range(0.58..0.72);
    let tint: [f64; 3] = [0.0; 3].map(|_| rng.gen_range(-0.04..0.04));
    let freq = [rng.gen_range(1.0..3.0), rng.gen_range(1.0..2.5)];
    let phase = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];

    let centered = index.is_multiple_of(2);
    let (cx, cy) = if centered {
        (0.5 * w, 0.5 * h)
    } else {
        let sx = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let sy = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        (
            (0.5 + sx * rng.gen_range(0.06..0.12)) * w,
            (0.5 + sy * rng.gen_range(0.04..0.10)) * h,
        )
    };
    let shape = if (index / 2).is_multiple_of(2) {
        Shape::Disk {
            cx,
            cy,
            r: rng.gen_range(0.15..0.20) * h,
        }
    } else {
        Shape::Rect {
            cx,
            cy,
            hw: rng.gen_range(0.13..0.18) * w,
            hh: rng.gen_range(0.15..0.22) * h,
        }
    };
    let object_depth = rng.gen_range(0.25..0.35);
    let object_hue = rng.gen_range(0.0..1.0);
    let object = hsv(object_hue, rng.gen_range(0.65..0.85), rng.gen_range(0.75..0.92));

    // Clutter: a pale floor band along the bottom edge and a box of the same
    // material beside the object, both at mid depth.
    let floor_top = (1.0 - rng.gen_range(0.12..0.18)) * h;
    let material = hsv(
        object_hue + rng.gen_range(0.3..0.7),
        rng.gen_range(0.45..0.6),
        rng.gen_range(0.7..0.85),
    );
    let side = if centered { rng.gen::<bool>() } else { cx < 0.5 * w };
    let bx = if side { 0.76 } else { 0.24 } * w;
    let box_shape = Shape::Rect {
        cx: bx,
        cy: rng.gen_range(0.4..0.6) * h,
        hw: rng.gen_range(0.04..0.05) * w,
        hh: rng.gen_range(0.08..0.12) * h,
    };
    let box_depth = rng.gen_range(0.5..0.58);

    let n = width * height;
    let mut rgb = Vec::with_capacity(n);
    let mut depth = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    for y in 0..height {
        for x in 0..width {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let (u, v) = (px / w, py / h);
            if shape.contains(px, py) {
                let shade = 1.0 - 0.06 * shape.radial(px, py);
                let noise = rng.gen_range(-0.015..0.015);
                rgb.push(clamp3(object.map(|c| c * shade + noise)));
                depth.push(object_depth + 0.03 * shape.radial(px, py));
                mask.push(true);
            } else if box_shape.contains(px, py) {
                let noise = rng.gen_range(-0.015..0.015);
                rgb.push(clamp3(material.map(|c| c + noise)));
                depth.push(box_depth);
                mask.push(false);
            } else if py >= floor_top {
                let noise = rng.gen_range(-0.015..0.015);
                rgb.push(clamp3(material.map(|c| c * 0.95 + noise)));
                depth.push(0.45 + 0.1 * (h - py) / (h - floor_top));
                mask.push(false);
            } else {
                let texture = 0.025
                    * (std::f64::consts::TAU * (u * freq[0] + phase[0])).sin()
                    * (std::f64::consts::TAU * (v * freq[1] + phase[1])).cos();
                let base = gray + 0.08 * (0.5 - v) + texture;
                let noise = rng.gen_range(-0.02..0.02);
                rgb.push(clamp3([
                    base + tint[0] + noise,
                    base + tint[1] + noise,
                    base + tint[2] + noise,
                ]));
                depth.push((0.95 - 0.3 * v + rng.gen_range(-0.01..0.01)).clamp(0.0, 1.0));
                mask.push(false);
            }
        }
    }
    FixtureSample {
        stem: format!("fixture_{index:03}"),
        rgb: RgbImage::new(width, height, rgb).expect("valid fixture"),
        depth: DepthMap::new(width, height, depth).expect("valid fixture"),
        gt: GroundTruth::new(width, height, mask).expect("valid fixture"),
    }
}

/// Haze-free outdoor-like scene `index` for `seed`.
pub fn haze_free_image(index: usize, seed: u64, width: usize, height: usize) -> RgbImage {
    let mut rng = rng_for(seed, index, 2);
    let (w, h) = (width as f64, height as f64);
    let horizon = rng.gen_range(0.10..0.22) * h;
    let sky = hsv(rng.gen_range(0.56..0.66), rng.gen_range(0.75..0.9), rng.gen_range(0.6..0.8));
    let ground = hsv(rng.gen_range(0.12..0.35), rng.gen_range(0.6..0.85), rng.gen_range(0.35..0.6));
    let objects: Vec<(Shape, [f64; 3])> = (0..rng.gen_range(3..6))
        .map(|_| {
            let cx = rng.gen_range(0.1..0.9) * w;
            let cy = rng.gen_range(0.3..0.9) * h;
            let shape = if rng.gen::<bool>() {
                Shape::Disk {
                    cx,
                    cy,
                    r: rng.gen_range(0.05..0.15) * h,
                }
            } else {
                Shape::Rect {
                    cx,
                    cy,
                    hw: rng.gen_range(0.04..0.12) * w,
                    hh: rng.gen_range(0.05..0.15) * h,
                }
            };
            let color = hsv(rng.gen_range(0.0..1.0), rng.gen_range(0.7..0.95), rng.gen_range(0.5..0.95));
            (shape, color)
        })
        .collect();

    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let mut color = if py < horizon {
                sky
            } else {
                let n = rng.gen_range(-0.06..0.06);
                ground.map(|c| c + n)
            };
            for (shape, c) in &objects {
                if shape.contains(px, py) {
                    color = *c;
                } else if let Shape::Rect { cx, cy, hw, hh } = shape {
                    // cast shadow to the lower right
                    if px > cx + hw && px < cx + 1.6 * hw && (py - cy).abs() <= *hh && py > horizon {
                        color = color.map(|v| v * 0.3);
                    }
                }
            }
            data.push(clamp3(color));
        }
    }
    RgbImage::new(width, height, data).expect("valid fixture")
}

fn save<P, C>(img: &ImageBuffer<P, C>, path: &Path) -> Result<()>
where
    P: image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
    C: std::ops::Deref<Target = [P::Subpixel]>,
{
    img.save(path).map_err(|e| Error::Write {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

fn depth16(depth: &DepthMap) -> ImageBuffer<Luma<u16>, Vec<u16>> {
    let mut out = ImageBuffer::new(depth.width() as u32, depth.height() as u32);
    for (px, &d) in out.pixels_mut().zip(depth.values()) {
        *px = Luma([(d * 65535.0).round() as u16]);
    }
    out
}

/// Writes `n` fixtures in the `subdirs` layout (8-bit RGB, 16-bit depth,
/// 8-bit mask) plus [`HAZE_FREE_COUNT`] haze-free scenes under
/// `haze_free/`, and returns the index of the fixtures.
pub fn generate_fixtures(out: &Path, n: usize, seed: u64) -> Result<DatasetIndex> {
    if n == 0 {
        return Err(Error::InvalidParameter("fixture count must be positive".into()));
    }
    for sub in ["RGB", "depth", "GT", HAZE_FREE_DIR] {
        let dir = out.join(sub);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    for i in 0..n {
        let f = fixture_sample(i, seed, FIXTURE_WIDTH, FIXTURE_HEIGHT);
        let name = format!("{}.png", f.stem);
        save(&f.rgb.to_rgb8(), &out.join("RGB").join(&name))?;
        save(&depth16(&f.depth), &out.join("depth").join(&name))?;
        save(&f.gt.to_gray8(), &out.join("GT").join(&name))?;
    }
    for i in 0..HAZE_FREE_COUNT {
        let img = haze_free_image(i, seed, FIXTURE_WIDTH, FIXTURE_HEIGHT);
        save(
            &img.to_rgb8(),
            &out.join(HAZE_FREE_DIR).join(format!("haze_free_{i:03}.png")),
        )?;
    }
    discover_dataset(out, Layout::Subdirs)
}
