//! Dark-channel transmission prior and boundary-seeded center prior.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::imaging::{min_max, LabImage, RgbImage, SaliencyMap, ScalarMap};
use crate::region_saliency::{euclid2, DEFAULT_SIGMA2};
use crate::segmentation::{kmeans, RegionSegmentation, RegionTable};

pub const DEFAULT_PATCH_RADIUS: usize = 7;
pub const DEFAULT_LIGHT_FRACTION: f64 = 0.001;
pub const DEFAULT_BOUNDARY_CLUSTERS: usize = 3;
/// Lower bound on every atmospheric light channel.
pub const MIN_LIGHT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkChannelParams {
    /// The patch is the `(2r + 1)^2` window around each pixel.
    pub patch_radius: usize,
    /// Fraction of brightest dark-channel pixels used for the light estimate.
    pub light_fraction: f64,
}

impl Default for DarkChannelParams {
    fn default() -> Self {
        Self {
            patch_radius: DEFAULT_PATCH_RADIUS,
            light_fraction: DEFAULT_LIGHT_FRACTION,
        }
    }
}

impl DarkChannelParams {
    pub fn new(patch_radius: usize, light_fraction: f64) -> Result<Self> {
        if patch_radius < 1 {
            return Err(Error::InvalidParameter("patch_radius must be >= 1".into()));
        }
        if !(light_fraction > 0.0 && light_fraction <= 0.01) {
            return Err(Error::InvalidParameter(format!(
                "light_fraction {light_fraction} outside (0, 0.01]"
            )));
        }
        Ok(Self {
            patch_radius,
            light_fraction,
        })
    }
}

/// Global atmospheric light, each channel in `[MIN_LIGHT, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphericLight(pub [f64; 3]);

/// Sliding-window minimum over `[i - r, i + r]` clamped to the slice, using a
/// monotone deque so the cost is independent of `r`.
fn min_filter_1d(input: &[f64], r: usize, out: &mut [f64]) {
    let n = input.len();
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(2 * r + 2);
    let mut next = 0;
    for i in 0..n {
        let hi = (i + r).min(n - 1);
        while next <= hi {
            while deque.back().is_some_and(|&b| input[b] >= input[next]) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(r);
        while deque.front().is_some_and(|&f| f < lo) {
            deque.pop_front();
        }
        out[i] = input[deque[0]];
    }
}

/// Separable `(2r + 1)^2` minimum filter with the window clamped at borders.
pub fn min_filter(values: &[f64], width: usize, height: usize, radius: usize) -> Vec<f64> {
    let mut rows = vec![0.0; values.len()];
    for (src, dst) in values.chunks(width).zip(rows.chunks_mut(width)) {
        min_filter_1d(src, radius, dst);
    }
    let mut out = vec![0.0; values.len()];
    let mut col = vec![0.0; height];
    let mut filtered = vec![0.0; height];
    for x in 0..width {
        for y in 0..height {
            col[y] = rows[y * width + x];
        }
        min_filter_1d(&col, radius, &mut filtered);
        for y in 0..height {
            out[y * width + x] = filtered[y];
        }
    }
    out
}

fn channel_min(px: &[f64; 3]) -> f64 {
    px[0].min(px[1]).min(px[2])
}

/// Per-pixel minimum over channels and over the patch around it.
pub fn dark_channel(img: &RgbImage, params: &DarkChannelParams) -> ScalarMap {
    let (w, h) = img.dims();
    let mins: Vec<f64> = img.pixels().iter().map(channel_min).collect();
    let data = min_filter(&mins, w, h, params.patch_radius);
    ScalarMap::new(w, h, data).expect("dimensions preserved")
}

/// Mean color of the brightest `light_fraction` of dark-channel pixels (at
/// least one pixel), each channel clamped to at least [`MIN_LIGHT`]. Ties in
/// dark-channel value go to the brighter image pixel, then to raster order.
pub fn atmospheric_light(
    img: &RgbImage,
    dark: &ScalarMap,
    params: &DarkChannelParams,
) -> AtmosphericLight {
    let n = dark.values().len();
    let count = ((n as f64 * params.light_fraction).ceil() as usize).clamp(1, n);
    let d = dark.values();
    let px = img.pixels();
    let intensity = |i: usize| px[i][0] + px[i][1] + px[i][2];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        d[b].total_cmp(&d[a])
            .then(intensity(b).total_cmp(&intensity(a)))
            .then(a.cmp(&b))
    });
    let mut sum = [0.0f64; 3];
    for &i in &order[..count] {
        for c in 0..3 {
            sum[c] += px[i][c];
        }
    }
    AtmosphericLight(sum.map(|s| (s / count as f64).clamp(MIN_LIGHT, 1.0)))
}

/// `1 - min_c min_patch(I^c / A^c)`, clamped to `[0, 1]`, before normalization.
pub fn raw_transmission(
    img: &RgbImage,
    light: &AtmosphericLight,
    params: &DarkChannelParams,
) -> SaliencyMap {
    let (w, h) = img.dims();
    let a = light.0;
    let ratio_min: Vec<f64> = img
        .pixels()
        .iter()
        .map(|px| (px[0] / a[0]).min(px[1] / a[1]).min(px[2] / a[2]))
        .collect();
    let filtered = min_filter(&ratio_min, w, h, params.patch_radius);
    let data = filtered
        .into_iter()
        .map(|m| (1.0 - m).clamp(0.0, 1.0))
        .collect();
    SaliencyMap::from_unit(w, h, data)
}

/// Normalized transmission map.
pub fn transmission_map(
    img: &RgbImage,
    light: &AtmosphericLight,
    params: &DarkChannelParams,
) -> SaliencyMap {
    raw_transmission(img, light, params).normalized()
}

/// Dark channel, light estimate and normalized transmission in one pass.
pub fn dark_channel_prior(img: &RgbImage, params: &DarkChannelParams) -> DarkChannelPrior {
    let dark = dark_channel(img, params);
    let light = atmospheric_light(img, &dark, params);
    let transmission = transmission_map(img, &light, params);
    DarkChannelPrior {
        dark,
        light,
        transmission,
    }
}

#[derive(Debug, Clone)]
pub struct DarkChannelPrior {
    pub dark: ScalarMap,
    pub light: AtmosphericLight,
    pub transmission: SaliencyMap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterPriorParams {
    pub boundary_clusters: usize,
    pub sigma2: f64,
    pub seed: u64,
}

impl Default for CenterPriorParams {
    fn default() -> Self {
        Self {
            boundary_clusters: DEFAULT_BOUNDARY_CLUSTERS,
            sigma2: DEFAULT_SIGMA2,
            seed: 0,
        }
    }
}

/// One cluster of image-border colors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySeed {
    pub color: [f64; 3],
    /// Mean normalized position of the member border pixels.
    pub position: [f64; 2],
    /// Share of border pixels in this cluster.
    pub weight: f64,
}

fn border_indices(width: usize, height: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(2 * (width + height));
    for y in 0..height {
        for x in 0..width {
            if x == 0 || y == 0 || x + 1 == width || y + 1 == height {
                out.push((x, y));
            }
        }
    }
    out
}

/// Clusters the one-pixel image border by color.
pub fn boundary_seeds(lab: &LabImage, params: &CenterPriorParams) -> Result<Vec<BoundarySeed>> {
    let (w, h) = lab.dims();
    let border = border_indices(w, h);
    let colors: Vec<[f64; 3]> = border.iter().map(|&(x, y)| lab.get(x, y)).collect();
    let clusters = params.boundary_clusters.min(colors.len());
    let labels = if clusters >= 2 {
        kmeans(&colors, clusters, params.seed)?.labels
    } else {
        vec![0; colors.len()]
    };
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut color = vec![[0.0f64; 3]; k];
    let mut pos = vec![[0.0f64; 2]; k];
    let mut count = vec![0usize; k];
    for ((&(x, y), c), &l) in border.iter().zip(&colors).zip(&labels) {
        count[l] += 1;
        for i in 0..3 {
            color[l][i] += c[i];
        }
        pos[l][0] += (x as f64 + 0.5) / w as f64;
        pos[l][1] += (y as f64 + 0.5) / h as f64;
    }
    let total = colors.len() as f64;
    Ok((0..k)
        .map(|j| {
            let n = count[j] as f64;
            BoundarySeed {
                color: color[j].map(|s| s / n),
                position: pos[j].map(|s| s / n),
                weight: n / total,
            }
        })
        .collect())
}

/// Per-region background contrast `sum_j weight_j * |lab_k - c_j| *
/// exp(-|P_k - q_j| / sigma2)`, before normalization.
pub fn background_contrast(table: &RegionTable, seeds: &[BoundarySeed], sigma2: f64) -> Vec<f64> {
    table
        .regions()
        .iter()
        .map(|r| {
            seeds
                .iter()
                .map(|s| {
                    let color = r
                        .mean_lab
                        .iter()
                        .zip(&s.color)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    let spatial = (-euclid2(r.centroid, s.position) / sigma2).exp();
                    s.weight * color * spatial
                })
                .sum()
        })
        .collect()
}

/// Center prior map: region-level contrast against clustered border colors.
pub fn center_saliency(
    lab: &LabImage,
    seg: &RegionSegmentation,
    table: &RegionTable,
    params: &CenterPriorParams,
) -> Result<SaliencyMap> {
    if lab.dims() != seg.dims() {
        return Err(Error::mismatch("lab", lab.dims(), "segmentation", seg.dims()));
    }
    if table.len() != seg.region_count() {
        return Err(Error::InvalidParameter(format!(
            "region table has {} rows for {} regions",
            table.len(),
            seg.region_count()
        )));
    }
    if !(params.sigma2 > 0.0) {
        return Err(Error::InvalidParameter("sigma2 must be positive".into()));
    }
    let seeds = boundary_seeds(lab, params)?;
    let per_region = min_max(&background_contrast(table, &seeds, params.sigma2));
    let (w, h) = seg.dims();
    Ok(SaliencyMap::from_unit(w, h, seg.paint(&per_region)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_min_filter(v: &[f64], w: usize, h: usize, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for y in 0..h {
            for x in 0..w {
                let mut m = f64::INFINITY;
                for yy in y.saturating_sub(r)..=(y + r).min(h - 1) {
                    for xx in x.saturating_sub(r)..=(x + r).min(w - 1) {
                        m = m.min(v[yy * w + xx]);
                    }
                }
                out[y * w + x] = m;
            }
        }
        out
    }

    #[test]
    fn min_filter_matches_brute_force() {
        let (w, h) = (13, 9);
        let v: Vec<f64> = (0..w * h).map(|i| ((i * 37 + 11) % 23) as f64).collect();
        for r in 1..8 {
            assert_eq!(min_filter(&v, w, h, r), brute_min_filter(&v, w, h, r), "r={r}");
        }
    }

    #[test]
    fn dark_channel_constant_images() {
        let p = DarkChannelParams::default();
        let black = RgbImage::new(5, 5, vec![[0.0; 3]; 25]).unwrap();
        assert!(dark_channel(&black, &p).values().iter().all(|&v| v == 0.0));
        let white = RgbImage::new(5, 5, vec![[1.0; 3]; 25]).unwrap();
        assert!(dark_channel(&white, &p).values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn dark_channel_single_dark_pixel() {
        let img = RgbImage::from_fn(5, 5, |x, y| {
            if (x, y) == (2, 1) {
                [0.9, 0.1, 0.9]
            } else {
                [1.0; 3]
            }
        })
        .unwrap();
        let p = DarkChannelParams::new(1, 0.001).unwrap();
        let d = dark_channel(&img, &p);
        for y in 0..5usize {
            for x in 0..5usize {
                let near = x.abs_diff(2) <= 1 && y.abs_diff(1) <= 1;
                let expect = if near { 0.1 } else { 1.0 };
                assert_eq!(d.values()[y * 5 + x], expect, "({x},{y})");
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(DarkChannelParams::new(0, 0.001).is_err());
        assert!(DarkChannelParams::new(1, 0.0).is_err());
        assert!(DarkChannelParams::new(1, 0.02).is_err());
        assert!(DarkChannelParams::new(1, 0.01).is_ok());
    }

    #[test]
    fn light_of_uniform_image() {
        let p = DarkChannelParams::default();
        let img = RgbImage::new(6, 6, vec![[0.3, 0.5, 0.7]; 36]).unwrap();
        let d = dark_channel(&img, &p);
        assert_eq!(atmospheric_light(&img, &d, &p).0, [0.3, 0.5, 0.7]);
        let dark = RgbImage::new(6, 6, vec![[0.01, 0.5, 0.0]; 36]).unwrap();
        let d = dark_channel(&dark, &p);
        assert_eq!(atmospheric_light(&dark, &d, &p).0, [0.05, 0.5, 0.05]);
    }

    #[test]
    fn light_from_small_white_patch() {
        // 300x300 image with a 9x10 white patch: exactly 0.1% of the area
        let img = RgbImage::from_fn(300, 300, |x, y| {
            if (140..149).contains(&x) && (60..70).contains(&y) {
                [1.0; 3]
            } else {
                [0.0; 3]
            }
        })
        .unwrap();
        for radius in [1, 7] {
            let p = DarkChannelParams::new(radius, 0.001).unwrap();
            let d = dark_channel(&img, &p);
            let a = atmospheric_light(&img, &d, &p);
            for c in a.0 {
                assert!((c - 1.0).abs() < 1e-12, "radius {radius}: {a:?}");
            }
        }
    }

    #[test]
    fn transmission_extremes() {
        let p = DarkChannelParams::new(1, 0.001).unwrap();
        let color = [0.6, 0.7, 0.8];
        let img = RgbImage::new(5, 4, vec![color; 20]).unwrap();
        let t = raw_transmission(&img, &AtmosphericLight(color), &p);
        assert!(t.values().iter().all(|&v| v.abs() < 1e-15));
        let black = RgbImage::new(5, 4, vec![[0.0; 3]; 20]).unwrap();
        let t = raw_transmission(&black, &AtmosphericLight([0.5; 3]), &p);
        assert!(t.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn unit_light_transmission_is_complement_of_dark_channel() {
        let p = DarkChannelParams::new(2, 0.001).unwrap();
        let img = RgbImage::from_fn(11, 7, |x, y| {
            [
                ((x * 3 + y) % 7) as f64 / 7.0,
                ((x + y * 5) % 11) as f64 / 11.0,
                ((x * y) % 5) as f64 / 5.0,
            ]
        })
        .unwrap();
        let d = dark_channel(&img, &p);
        let t = raw_transmission(&img, &AtmosphericLight([1.0; 3]), &p);
        for (dv, tv) in d.values().iter().zip(t.values()) {
            assert_eq!(*tv, 1.0 - dv);
        }
    }
}
