//! Brute-force oracles and random inputs shared by the integration tests.
//! Everything here is written directly from the formulas, without calling
//! into the library beyond constructors.

#![allow(dead_code)]

use cdcp_core::segmentation::{Region, RegionTable};
use cdcp_core::SaliencyMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn minmax(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

pub fn random_table(rng: &mut ChaCha8Rng, k: usize) -> RegionTable {
    let counts: Vec<usize> = (0..k).map(|_| rng.gen_range(1..1000)).collect();
    let total: usize = counts.iter().sum();
    let regions = counts
        .iter()
        .map(|&n| Region {
            mean_lab: [
                rng.gen_range(0.0..100.0),
                rng.gen_range(-100.0..100.0),
                rng.gen_range(-100.0..100.0),
            ],
            mean_depth: rng.gen_range(0.0..1.0),
            centroid: [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
            pixel_count: n,
            area_ratio: n as f64 / total as f64,
        })
        .collect();
    RegionTable::new(regions)
}

/// Per-region quantities of the initial saliency stage.
pub struct RegionOracle {
    pub s_c: Vec<f64>,
    pub s_d: Vec<f64>,
    pub dw: Vec<f64>,
    pub w_cd: Vec<f64>,
    pub s1: Vec<f64>,
}

pub fn region_oracle(table: &RegionTable, sigma2: f64) -> RegionOracle {
    let r = table.regions();
    let n = r.len();
    let mut s_c = vec![0.0; n];
    let mut s_d = vec![0.0; n];
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            let dx = r[k].centroid[0] - r[i].centroid[0];
            let dy = r[k].centroid[1] - r[i].centroid[1];
            let w = (-(dx * dx + dy * dy).sqrt() / sigma2).exp();
            let dl = r[k].mean_lab[0] - r[i].mean_lab[0];
            let da = r[k].mean_lab[1] - r[i].mean_lab[1];
            let db = r[k].mean_lab[2] - r[i].mean_lab[2];
            s_c[k] += r[i].area_ratio * w * (dl * dl + da * da + db * db).sqrt();
            s_d[k] += r[i].area_ratio * w * (r[k].mean_depth - r[i].mean_depth).abs();
        }
    }
    let dmax = r.iter().map(|x| x.mean_depth).fold(f64::NEG_INFINITY, f64::max);
    let dmin = r.iter().map(|x| x.mean_depth).fold(f64::INFINITY, f64::min);
    let dw: Vec<f64> = if dmax > dmin {
        r.iter()
            .map(|x| (dmax - x.mean_depth).powf(1.0 / (dmax - dmin)))
            .collect()
    } else {
        vec![1.0; n]
    };
    let center_dist: Vec<f64> = r
        .iter()
        .map(|x| ((x.centroid[0] - 0.5).powi(2) + (x.centroid[1] - 0.5).powi(2)).sqrt())
        .collect();
    let g = minmax(&center_dist);
    let w_cd: Vec<f64> = (0..n)
        .map(|k| (1.0 - g[k]) / r[k].pixel_count as f64 * dw[k])
        .collect();
    let raw: Vec<f64> = (0..n).map(|k| (s_c[k] + s_d[k]) * w_cd[k]).collect();
    RegionOracle {
        s_c,
        s_d,
        dw,
        w_cd,
        s1: minmax(&raw),
    }
}

/// Per-pixel fusion oracle: (d_dce, s_cdcp, s, s_f_raw, s_f).
pub fn fusion_oracle(
    s1: &[f64],
    depth: &[f64],
    s_csp: &[f64],
    s_dcp: &[f64],
) -> [Vec<f64>; 5] {
    let n = s1.len();
    let d_dce = minmax(&depth.iter().map(|d| 1.0 - d).collect::<Vec<_>>());
    let csp_n = minmax(s_csp);
    let dcp_n = minmax(s_dcp);
    let s_cdcp: Vec<f64> = (0..n).map(|i| csp_n[i] * dcp_n[i]).collect();
    let s: Vec<f64> = (0..n)
        .map(|i| (1.0 - (-(s1[i] + d_dce[i] + s_cdcp[i])).exp()) * s1[i] * s_csp[i])
        .collect();
    let raw: Vec<f64> = (0..n)
        .map(|i| 1.0 - (-(s1[i] * s_csp[i] * s[i])).exp())
        .collect();
    let s_f = minmax(&raw);
    [d_dce, s_cdcp, s, raw, s_f]
}

pub struct Counts {
    pub precision: f64,
    pub recall: f64,
    pub fpr: f64,
}

/// Set counting at threshold `t` with `s >= t` selected.
pub fn count_at(s: &[f64], gt: &[bool], t: f64) -> Counts {
    let (mut tp, mut fp, mut pos, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&v, &g) in s.iter().zip(gt) {
        let sel = v >= t;
        if g {
            pos += 1;
            if sel {
                tp += 1;
            }
        } else {
            neg += 1;
            if sel {
                fp += 1;
            }
        }
    }
    Counts {
        precision: if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        },
        recall: tp as f64 / pos as f64,
        fpr: fp as f64 / neg as f64,
    }
}

pub fn f_beta(p: f64, r: f64, beta2: f64) -> f64 {
    let den = beta2 * p + r;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + beta2) * p * r / den
    }
}

pub fn mae_oracle(s: &[f64], gt: &[bool]) -> f64 {
    s.iter()
        .zip(gt)
        .map(|(v, &g)| (v - if g { 1.0 } else { 0.0 }).abs())
        .sum::<f64>()
        / s.len() as f64
}

/// Random map whose values mix continuous draws with exact 8-bit levels.
pub fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize) -> SaliencyMap {
    let data = (0..w * h)
        .map(|_| {
            if rng.gen_bool(0.3) {
                rng.gen_range(0..256) as f64 / 255.0
            } else {
                rng.gen_range(0.0..=1.0)
            }
        })
        .collect();
    SaliencyMap::new(w, h, data).unwrap()
}

/// Random mask with at least one positive and one negative pixel.
pub fn random_mask(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    let p = rng.gen_range(0.05..0.6);
    let mut m: Vec<bool> = (0..n).map(|_| rng.gen_bool(p)).collect();
    m[rng.gen_range(0..n / 2)] = true;
    m[rng.gen_range(n / 2..n)] = false;
    m
}
