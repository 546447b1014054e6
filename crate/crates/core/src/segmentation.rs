//! K-means color segmentation in L\*a\*b\* space and per-region statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{DepthMap, LabImage};

pub const DEFAULT_REGIONS: usize = 8;
pub const MAX_ITERATIONS: usize = 100;
/// Lloyd iterations stop once no centroid moves farther than this (Lab units).
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

type Point = [f64; 3];

#[inline]
fn dist2(a: &Point, b: &Point) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

/// Output of [`kmeans`].
#[derive(Debug, Clone)]
pub struct KMeans {
    /// Cluster index per point, compacted so every cluster is non-empty.
    pub labels: Vec<usize>,
    pub centers: Vec<Point>,
    /// Sum of squared distances after each assignment step.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

fn nearest(p: &Point, centers: &[Point]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = dist2(p, &centers[0]);
    for (j, c) in centers.iter().enumerate().skip(1) {
        let d = dist2(p, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    (best, best_d)
}

fn assign(points: &[Point], centers: &[Point], labels: &mut [usize], dists: &mut [f64]) {
    const CHUNK: usize = 4096;
    labels
        .par_chunks_mut(CHUNK)
        .zip(dists.par_chunks_mut(CHUNK))
        .zip(points.par_chunks(CHUNK))
        .for_each(|((l, d), p)| {
            for i in 0..p.len() {
                let (j, dj) = nearest(&p[i], centers);
                l[i] = j;
                d[i] = dj;
            }
        });
}

fn plus_plus_init(points: &[Point], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.gen_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            points[pick]
        } else {
            // Fewer distinct points than clusters; duplicates end up empty.
            centers[0]
        };
        centers.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, &next));
        }
    }
    centers
}

/// Seeded k-means++ followed by Lloyd iterations.
///
/// Empty clusters are re-seeded to the points farthest from their current
/// center. Clusters that are still empty at the end (only possible when there
/// are fewer distinct points than `k`) are dropped and the labels compacted.
pub fn kmeans(points: &[Point], k: usize, seed: u64) -> Result<KMeans> {
    if k < 2 || k > points.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in [2, {}]",
            points.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_init(points, k, &mut rng);
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0f64; n];
    let mut objective = Vec::new();
    let mut iterations = 0;

    for _ in 0..MAX_ITERATIONS {
        iterations += 1;
        assign(points, &centers, &mut labels, &mut dists);
        objective.push(dists.iter().sum());

        let mut sums = vec![[0.0f64; 3]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for c in 0..3 {
                sums[l][c] += p[c];
            }
        }
        let mut updated: Vec<Point> = (0..k)
            .map(|j| {
                if counts[j] > 0 {
                    let n = counts[j] as f64;
                    [sums[j][0] / n, sums[j][1] / n, sums[j][2] / n]
                } else {
                    centers[j]
                }
            })
            .collect();

        let empty: Vec<usize> = (0..k).filter(|&j| counts[j] == 0).collect();
        if !empty.is_empty() {
            let mut order: Vec<usize> = (0..n).filter(|&i| dists[i] > 0.0).collect();
            order.sort_by(|&a, &b| dists[b].total_cmp(&dists[a]).then(a.cmp(&b)));
            for (j, &i) in empty.iter().zip(&order) {
                updated[*j] = points[i];
            }
        }

        let shift = centers
            .iter()
            .zip(&updated)
            .map(|(a, b)| dist2(a, b).sqrt())
            .fold(0.0, f64::max);
        centers = updated;
        if shift < CONVERGENCE_TOLERANCE {
            break;
        }
    }

    assign(points, &centers, &mut labels, &mut dists);
    let mut used = vec![false; k];
    for &l in &labels {
        used[l] = true;
    }
    let mut remap = vec![usize::MAX; k];
    let mut kept = Vec::new();
    for j in (0..k).filter(|&j| used[j]) {
        remap[j] = kept.len();
        kept.push(centers[j]);
    }
    for l in &mut labels {
        *l = remap[*l];
    }

    Ok(KMeans {
        labels,
        centers: kept,
        objective,
        iterations,
    })
}

/// Per-pixel region labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionSegmentation {
    width: usize,
    height: usize,
    labels: Vec<usize>,
    regions: usize,
}

impl RegionSegmentation {
    /// Validates that labels cover `[0, regions)` with no empty region.
    pub fn new(width: usize, height: usize, labels: Vec<usize>, regions: usize) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::InvalidValue(format!(
                "{} labels for a {width}x{height} image",
                labels.len()
            )));
        }
        let mut seen = vec![false; regions];
        for &l in &labels {
            if l >= regions {
                return Err(Error::InvalidValue(format!(
                    "label {l} out of range for {regions} regions"
                )));
            }
            seen[l] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidValue(format!("region {k} has no pixels")));
        }
        Ok(Self {
            width,
            height,
            labels,
            regions,
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

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn region_count(&self) -> usize {
        self.regions
    }

    /// Paints one value per region onto its pixels.
    pub fn paint(&self, per_region: &[f64]) -> Vec<f64> {
        debug_assert_eq!(per_region.len(), self.regions);
        self.labels.iter().map(|&l| per_region[l]).collect()
    }

    /// Label map as an RGB image with a fixed distinct color per region.
    pub fn to_color_png(&self) -> image::RgbImage {
        let mut out = image::RgbImage::new(self.width as u32, self.height as u32);
        for (px, &l) in out.pixels_mut().zip(&self.labels) {
            // golden-ratio hue spacing
            let h = (l as f64 * 0.618_033_988_75).fract() * 6.0;
            let x = 1.0 - (h % 2.0 - 1.0).abs();
            let rgb = match h as u32 {
                0 => [1.0, x, 0.0],
                1 => [x, 1.0, 0.0],
                2 => [0.0, 1.0, x],
                3 => [0.0, x, 1.0],
                4 => [x, 0.0, 1.0],
                _ => [1.0, 0.0, x],
            };
            px.0 = rgb.map(|c: f64| (c * 255.0).round() as u8);
        }
        out
    }
}

/// Clusters the pixels of `img` into at most `k` color regions.
///
/// The result may hold fewer than `k` regions when the image has fewer than
/// `k` distinct colors.
pub fn kmeans_segment(img: &LabImage, k: usize, seed: u64) -> Result<RegionSegmentation> {
    let km = kmeans(img.pixels(), k, seed)?;
    let regions = km.centers.len();
    RegionSegmentation::new(img.width(), img.height(), km.labels, regions)
}

/// Statistics of one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub mean_lab: [f64; 3],
    pub mean_depth: f64,
    /// Mean pixel-center position, `((x + 0.5) / W, (y + 0.5) / H)`.
    pub centroid: [f64; 2],
    pub pixel_count: usize,
    pub area_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionTable {
    regions: Vec<Region>,
}

impl RegionTable {
    pub fn new(regions: Vec<Region>) -> Self {
        Self { regions }
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
}

pub fn region_stats(
    seg: &RegionSegmentation,
    lab: &LabImage,
    depth: &DepthMap,
) -> Result<RegionTable> {
    if seg.dims() != lab.dims() {
        return Err(Error::mismatch("segmentation", seg.dims(), "lab", lab.dims()));
    }
    if seg.dims() != depth.dims() {
        return Err(Error::mismatch(
            "segmentation",
            seg.dims(),
            "depth",
            depth.dims(),
        ));
    }
    let (w, h) = seg.dims();
    let k = seg.region_count();
    let mut lab_sum = vec![[0.0f64; 3]; k];
    let mut depth_sum = vec![0.0f64; k];
    let mut pos_sum = vec![[0.0f64; 2]; k];
    let mut count = vec![0usize; k];
    let labels = seg.labels();
    let lab_px = lab.pixels();
    let depth_px = depth.values();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let l = labels[i];
            count[l] += 1;
            for c in 0..3 {
                lab_sum[l][c] += lab_px[i][c];
            }
            depth_sum[l] += depth_px[i];
            pos_sum[l][0] += (x as f64 + 0.5) / w as f64;
            pos_sum[l][1] += (y as f64 + 0.5) / h as f64;
        }
    }
    let total = (w * h) as f64;
    let regions = (0..k)
        .map(|l| {
            let n = count[l] as f64;
            Region {
                mean_lab: lab_sum[l].map(|s| s / n),
                mean_depth: depth_sum[l] / n,
                centroid: pos_sum[l].map(|s| s / n),
                pixel_count: count[l],
                area_ratio: n / total,
            }
        })
        .collect();
    Ok(RegionTable { regions })
}
