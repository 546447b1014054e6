//! Initial saliency from region color/depth contrast with center and depth
//! weighting.
//!
//! For regions `k` and `i` with centroid distance `D_o`, the spatial weight is
//! `exp(-D_o / sigma2)`. Color and depth saliency sum area-weighted,
//! spatially-weighted contrasts over all other regions. Each region is then
//! scaled by a center-depth weight that favors central, small, near regions
//! and the result is min–max normalized.

use std::io::Write;

use crate::error::{Error, Result};
use crate::imaging::{min_max, SaliencyMap};
use crate::segmentation::{RegionSegmentation, RegionTable};

/// Default spatial weight strength.
pub const DEFAULT_SIGMA2: f64 = 0.4;

/// Image center in normalized coordinates.
pub const CENTER: [f64; 2] = [0.5, 0.5];

/// Region depth spreads at or below this are treated as flat. Means of equal
/// pixel depths can differ by roundoff, and `mu` would explode on them.
pub const FLAT_DEPTH_RANGE: f64 = 1e-9;

pub(crate) fn euclid2(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn euclid3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Symmetric `K x K` matrix of pairwise spatial weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    size: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.size + col]
    }

    pub fn transpose(&self) -> WeightMatrix {
        let n = self.size;
        let mut data = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c];
            }
        }
        WeightMatrix { size: n, data }
    }
}

pub fn spatial_weight(table: &RegionTable, sigma2: f64) -> Result<WeightMatrix> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma2 must be positive, got {sigma2}"
        )));
    }
    let regions = table.regions();
    let n = regions.len();
    let mut data = vec![0.0; n * n];
    for k in 0..n {
        data[k * n + k] = 1.0;
        for i in k + 1..n {
            let w = (-euclid2(regions[k].centroid, regions[i].centroid) / sigma2).exp();
            data[k * n + i] = w;
            data[i * n + k] = w;
        }
    }
    Ok(WeightMatrix { size: n, data })
}

fn contrast(
    table: &RegionTable,
    w: &WeightMatrix,
    distance: impl Fn(usize, usize) -> f64,
) -> Result<Vec<f64>> {
    let n = table.len();
    if w.size() != n {
        return Err(Error::InvalidParameter(format!(
            "weight matrix is {}x{} for {n} regions",
            w.size(),
            w.size()
        )));
    }
    let regions = table.regions();
    Ok((0..n)
        .map(|k| {
            (0..n)
                .filter(|&i| i != k)
                .map(|i| regions[i].area_ratio * w.get(k, i) * distance(k, i))
                .sum()
        })
        .collect())
}

/// Color saliency: contrast of mean L\*a\*b\* colors.
pub fn color_saliency(table: &RegionTable, w: &WeightMatrix) -> Result<Vec<f64>> {
    let r = table.regions();
    contrast(table, w, |k, i| euclid3(r[k].mean_lab, r[i].mean_lab))
}

/// Depth saliency: contrast of mean depths.
pub fn depth_saliency(table: &RegionTable, w: &WeightMatrix) -> Result<Vec<f64>> {
    let r = table.regions();
    contrast(table, w, |k, i| (r[k].mean_depth - r[i].mean_depth).abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthWeights {
    pub values: Vec<f64>,
    /// Set when all region depths are equal (within [`FLAT_DEPTH_RANGE`]); every
    /// weight is then 1.
    pub flat: bool,
}

/// `(max d - d_k)^mu` with `mu = 1 / (max d - min d)` over region mean depths.
pub fn depth_weight(table: &RegionTable) -> DepthWeights {
    let depths: Vec<f64> = table.regions().iter().map(|r| r.mean_depth).collect();
    let max = depths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = depths.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max - min > FLAT_DEPTH_RANGE) {
        return DepthWeights {
            values: vec![1.0; depths.len()],
            flat: true,
        };
    }
    let mu = 1.0 / (max - min);
    DepthWeights {
        values: depths.iter().map(|d| (max - d).powf(mu)).collect(),
        flat: false,
    }
}

/// Per-region center term `1 - norm(||P_k - P_o||)`, 1 for the most central
/// region and 0 for the farthest.
pub fn center_term(table: &RegionTable) -> Vec<f64> {
    let dist: Vec<f64> = table
        .regions()
        .iter()
        .map(|r| euclid2(r.centroid, CENTER))
        .collect();
    min_max(&dist).into_iter().map(|d| 1.0 - d).collect()
}

/// `center_term(k) / N_k * DW(d_k)`.
pub fn center_depth_weight(table: &RegionTable, dw: &DepthWeights) -> Vec<f64> {
    center_term(table)
        .into_iter()
        .zip(table.regions())
        .zip(&dw.values)
        .map(|((c, r), d)| c / r.pixel_count as f64 * d)
        .collect()
}

/// Normalized `(s_c + s_d) * w_cd` per region.
pub fn initial_region_values(s_c: &[f64], s_d: &[f64], w_cd: &[f64]) -> Vec<f64> {
    let raw: Vec<f64> = s_c
        .iter()
        .zip(s_d)
        .zip(w_cd)
        .map(|((c, d), w)| c * w + d * w)
        .collect();
    min_max(&raw)
}

/// Paints the normalized per-region initial saliency onto the pixel grid.
pub fn initial_saliency(
    seg: &RegionSegmentation,
    s_c: &[f64],
    s_d: &[f64],
    w_cd: &[f64],
) -> Result<SaliencyMap> {
    let k = seg.region_count();
    if s_c.len() != k || s_d.len() != k || w_cd.len() != k {
        return Err(Error::InvalidParameter(format!(
            "per-region vectors ({}, {}, {}) do not match {k} regions",
            s_c.len(),
            s_d.len(),
            w_cd.len()
        )));
    }
    let values = initial_region_values(s_c, s_d, w_cd);
    let (w, h) = seg.dims();
    Ok(SaliencyMap::from_unit(w, h, seg.paint(&values)))
}

/// Every per-region quantity of the initialization stage.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSaliency {
    pub s_c: Vec<f64>,
    pub s_d: Vec<f64>,
    pub dw: Vec<f64>,
    pub w_cd: Vec<f64>,
    pub s1: Vec<f64>,
    pub flat_depth: bool,
}

impl RegionSaliency {
    pub fn compute(table: &RegionTable, sigma2: f64) -> Result<Self> {
        let w = spatial_weight(table, sigma2)?;
        let s_c = color_saliency(table, &w)?;
        let s_d = depth_saliency(table, &w)?;
        let dw = depth_weight(table);
        let w_cd = center_depth_weight(table, &dw);
        let s1 = initial_region_values(&s_c, &s_d, &w_cd);
        Ok(Self {
            s_c,
            s_d,
            dw: dw.values,
            w_cd,
            s1,
            flat_depth: dw.flat,
        })
    }

    pub fn paint(&self, seg: &RegionSegmentation) -> SaliencyMap {
        let (w, h) = seg.dims();
        SaliencyMap::from_unit(w, h, seg.paint(&self.s1))
    }

    /// CSV with header `k,s_c,s_d,dw,w_cd,s1`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "k,s_c,s_d,dw,w_cd,s1")?;
        for k in 0..self.s1.len() {
            writeln!(
                out,
                "{k},{:.9},{:.9},{:.9},{:.9e},{:.9}",
                self.s_c[k], self.s_d[k], self.dw[k], self.w_cd[k], self.s1[k]
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::Region;

    fn region(lab: [f64; 3], depth: f64, centroid: [f64; 2], n: usize, total: usize) -> Region {
        Region {
            mean_lab: lab,
            mean_depth: depth,
            centroid,
            pixel_count: n,
            area_ratio: n as f64 / total as f64,
        }
    }

    #[test]
    fn spatial_weight_examples() {
        let t = RegionTable::new(vec![
            region([0.0; 3], 0.0, [0.0, 0.0], 1, 3),
            region([0.0; 3], 0.0, [1.0, 0.0], 1, 3),
            region([0.0; 3], 0.0, [0.0, 0.0], 1, 3),
        ]);
        let w = spatial_weight(&t, 0.4).unwrap();
        assert_eq!(w.get(0, 2), 1.0);
        assert!((w.get(0, 1) - (-2.5f64).exp()).abs() < 1e-15);
        assert!((w.get(0, 1) - 0.0821).abs() < 1e-4);
        assert_eq!(w, w.transpose());
        assert!(spatial_weight(&t, 0.0).is_err());
        assert!(spatial_weight(&t, -1.0).is_err());
    }

    #[test]
    fn two_region_contrasts() {
        // Centroid distance chosen so the pairwise weight is exactly 0.5.
        let sigma2 = 0.4;
        let d = -sigma2 * 0.5f64.ln();
        let t = RegionTable::new(vec![
            region([50.0, 0.0, 0.0], 0.2, [0.5, 0.5], 2, 4),
            region([60.0, 0.0, 0.0], 0.8, [0.5 + d, 0.5], 2, 4),
        ]);
        let w = spatial_weight(&t, sigma2).unwrap();
        assert!((w.get(0, 1) - 0.5).abs() < 1e-12);
        let sc = color_saliency(&t, &w).unwrap();
        assert!((sc[0] - 2.5).abs() < 1e-9 && (sc[1] - 2.5).abs() < 1e-9);

        let t = RegionTable::new(vec![
            region([0.0; 3], 0.2, [0.5, 0.5], 2, 4),
            region([0.0; 3], 0.8, [0.5, 0.5], 2, 4),
        ]);
        let w = spatial_weight(&t, sigma2).unwrap();
        let sd = depth_saliency(&t, &w).unwrap();
        assert!((sd[0] - 0.3).abs() < 1e-12 && (sd[1] - 0.3).abs() < 1e-12);
        assert_eq!(color_saliency(&t, &w).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn depth_weight_examples() {
        let mk = |ds: &[f64]| {
            RegionTable::new(
                ds.iter()
                    .map(|&d| region([0.0; 3], d, [0.5, 0.5], 1, ds.len()))
                    .collect(),
            )
        };
        let dw = depth_weight(&mk(&[0.0, 0.3, 1.0]));
        assert!((dw.values[1] - 0.7).abs() < 1e-12);
        assert_eq!(dw.values[2], 0.0);
        assert!(!dw.flat);
        let dw = depth_weight(&mk(&[0.2, 0.7, 0.5]));
        assert!((dw.values[0] - 0.25).abs() < 1e-12);
        let dw = depth_weight(&mk(&[0.4, 0.4]));
        assert!(dw.flat);
        assert_eq!(dw.values, vec![1.0, 1.0]);
    }

    #[test]
    fn center_depth_weight_examples() {
        let t = RegionTable::new(vec![
            region([0.0; 3], 0.5, [0.5, 0.5], 10, 20),
            region([0.0; 3], 0.5, [0.0, 0.0], 10, 20),
        ]);
        let c = center_term(&t);
        assert!(c[0] > c[1]);

        let t = RegionTable::new(vec![
            region([0.0; 3], 0.5, [0.3, 0.5], 20, 40),
            region([0.0; 3], 0.5, [0.3, 0.5], 10, 40),
            region([0.0; 3], 0.5, [0.9, 0.1], 10, 40),
        ]);
        let dw = depth_weight(&t);
        let w = center_depth_weight(&t, &dw);
        assert!((w[1] / w[0] - 2.0).abs() < 1e-12);

        // Hand evaluation: distances 0.2, sqrt(0.05), 0.5; depths 0.1,0.3,0.6
        let t = RegionTable::new(vec![
            region([0.0; 3], 0.1, [0.3, 0.5], 10, 40),
            region([0.0; 3], 0.3, [0.6, 0.7], 20, 40),
            region([0.0; 3], 0.6, [0.5, 0.0], 10, 40),
        ]);
        let dw = depth_weight(&t);
        let w = center_depth_weight(&t, &dw);
        let dist = [0.2, 0.05f64.sqrt(), 0.5];
        let mu = 1.0 / 0.5;
        let expected: Vec<f64> = (0..3)
            .map(|k| {
                let c = 1.0 - (dist[k] - 0.2) / (0.5 - 0.2);
                let dwk = (0.6 - [0.1f64, 0.3, 0.6][k]).powf(mu);
                c / [10.0, 20.0, 10.0][k] * dwk
            })
            .collect();
        for k in 0..3 {
            assert!((w[k] - expected[k]).abs() < 1e-12, "{k}: {} vs {}", w[k], expected[k]);
        }
        assert!((w[0] - 0.025).abs() < 1e-12);
        assert_eq!(w[2], 0.0);
    }

    #[test]
    fn initial_values_normalize() {
        let v = initial_region_values(&[1.0, 3.0, 5.0], &[0.0; 3], &[1.0; 3]);
        assert_eq!(v, vec![0.0, 0.5, 1.0]);
        let v = initial_region_values(&[0.0; 3], &[0.0; 3], &[1.0; 3]);
        assert_eq!(v, vec![0.0; 3]);
    }

    #[test]
    fn csv_export() {
        let t = RegionTable::new(vec![
            region([10.0, 0.0, 0.0], 0.2, [0.5, 0.5], 2, 4),
            region([60.0, 0.0, 0.0], 0.8, [0.1, 0.5], 2, 4),
        ]);
        let rs = RegionSaliency::compute(&t, 0.4).unwrap();
        let mut buf = Vec::new();
        rs.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("k,s_c,s_d,dw,w_cd,s1\n"));
    }
}
