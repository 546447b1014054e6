//! Saliency evaluation against binary masks: PR and ROC curves over 256
//! thresholds, F-measure and mean absolute error.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{open, SaliencyMap};

/// Number of thresholds `t = i / 255`, `i = 0..=255`.
pub const LEVELS: usize = 256;
pub const DEFAULT_BETA2: f64 = 0.3;

pub fn threshold(level: usize) -> f64 {
    level as f64 / 255.0
}

/// Binary ground-truth mask; `true` marks salient pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl GroundTruth {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::InvalidValue(format!(
                "{} mask pixels for a {width}x{height} image",
                mask.len()
            )));
        }
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    /// Reads a mask PNG; 8-bit values `>= 128` are salient.
    pub fn load_png(path: &Path) -> Result<Self> {
        let img = open(path)?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mask = img.to_luma8().pixels().map(|p| p.0[0] >= 128).collect();
        Self::new(w, h, mask)
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

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn positives(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn to_gray8(&self) -> image::GrayImage {
        let mut out = image::GrayImage::new(self.width as u32, self.height as u32);
        for (px, &m) in out.pixels_mut().zip(&self.mask) {
            px.0 = [if m { 255 } else { 0 }];
        }
        out
    }
}

fn check_dims(s: &SaliencyMap, gt: &GroundTruth) -> Result<()> {
    if s.dims() != gt.dims() {
        return Err(Error::mismatch("saliency", s.dims(), "ground truth", gt.dims()));
    }
    Ok(())
}

/// `(true positives, selected, positives, total)` for `s >= t`.
fn counts(s: &SaliencyMap, gt: &GroundTruth, t: f64) -> (usize, usize, usize, usize) {
    let mut tp = 0;
    let mut selected = 0;
    let mut positives = 0;
    for (&v, &g) in s.values().iter().zip(gt.mask()) {
        let on = v >= t;
        selected += on as usize;
        positives += g as usize;
        tp += (on && g) as usize;
    }
    (tp, selected, positives, gt.mask.len())
}

/// Precision and recall of `s >= t`. Precision is 1 when nothing is selected.
pub fn pr_at_threshold(s: &SaliencyMap, gt: &GroundTruth, t: f64) -> Result<(f64, f64)> {
    check_dims(s, gt)?;
    let (tp, selected, positives, _) = counts(s, gt, t);
    if positives == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let precision = if selected == 0 {
        1.0
    } else {
        tp as f64 / selected as f64
    };
    Ok((precision, tp as f64 / positives as f64))
}

/// False and true positive rates of `s >= t`.
pub fn roc_at_threshold(s: &SaliencyMap, gt: &GroundTruth, t: f64) -> Result<(f64, f64)> {
    check_dims(s, gt)?;
    let (tp, selected, positives, total) = counts(s, gt, t);
    if positives == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let negatives = total - positives;
    if negatives == 0 {
        return Err(Error::FullGroundTruth);
    }
    let fp = selected - tp;
    Ok((fp as f64 / negatives as f64, tp as f64 / positives as f64))
}

/// Weighted harmonic mean of precision and recall; 0 when undefined.
pub fn f_measure(precision: f64, recall: f64, beta2: f64) -> f64 {
    if precision == recall {
        // any weighted mean of two equal terms; skips the roundoff
        return precision;
    }
    let denom = beta2 * precision + recall;
    if denom <= 0.0 {
        return 0.0;
    }
    (1.0 + beta2) * precision * recall / denom
}

pub fn mae(s: &SaliencyMap, gt: &GroundTruth) -> Result<f64> {
    check_dims(s, gt)?;
    let sum: f64 = s
        .values()
        .iter()
        .zip(gt.mask())
        .map(|(&v, &g)| (v - if g { 1.0 } else { 0.0 }).abs())
        .sum();
    Ok(sum / s.values().len() as f64)
}

/// Largest level `i` with `i / 255 <= v`.
fn level_of(v: f64) -> usize {
    let mut i = ((v * 255.0).floor().max(0.0) as usize).min(LEVELS - 1);
    while i + 1 < LEVELS && threshold(i + 1) <= v {
        i += 1;
    }
    while i > 0 && threshold(i) > v {
        i -= 1;
    }
    i
}

/// Metrics for one image or averaged over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Per threshold level.
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
    /// Per threshold level, number of images with an empty binarized set.
    pub empty_count: Vec<usize>,
    pub f_max: f64,
    /// Level at which `f_max` is attained (first on ties).
    pub f_max_level: usize,
    pub f_adaptive: f64,
    pub mae: f64,
    pub images: usize,
}

impl EvalReport {
    pub fn pr_curve(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.precision.iter().copied().zip(self.recall.iter().copied())
    }

    pub fn roc_curve(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.fpr.iter().copied().zip(self.tpr.iter().copied())
    }

    /// F-measure at every level.
    pub fn f_curve(&self, beta2: f64) -> Vec<f64> {
        self.pr_curve()
            .map(|(p, r)| f_measure(p, r, beta2))
            .collect()
    }

    fn max_f(precision: &[f64], recall: &[f64], beta2: f64) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, (&p, &r)) in precision.iter().zip(recall).enumerate() {
            let f = f_measure(p, r, beta2);
            if f > best.0 {
                best = (f, i);
            }
        }
        best
    }
}

/// Full evaluation of one map. The mask needs both positive and negative
/// pixels. The adaptive threshold is `2 * mean(s)`, capped at 1.
pub fn evaluate(s: &SaliencyMap, gt: &GroundTruth, beta2: f64) -> Result<EvalReport> {
    check_dims(s, gt)?;
    let mut pos_hist = [0usize; LEVELS];
    let mut neg_hist = [0usize; LEVELS];
    for (&v, &g) in s.values().iter().zip(gt.mask()) {
        let l = level_of(v);
        if g {
            pos_hist[l] += 1;
        } else {
            neg_hist[l] += 1;
        }
    }
    let positives: usize = pos_hist.iter().sum();
    let negatives: usize = neg_hist.iter().sum();
    if positives == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    if negatives == 0 {
        return Err(Error::FullGroundTruth);
    }

    let mut precision = vec![0.0; LEVELS];
    let mut recall = vec![0.0; LEVELS];
    let mut fpr = vec![0.0; LEVELS];
    let mut empty_count = vec![0; LEVELS];
    let (mut tp, mut fp) = (0usize, 0usize);
    for i in (0..LEVELS).rev() {
        tp += pos_hist[i];
        fp += neg_hist[i];
        let selected = tp + fp;
        precision[i] = if selected == 0 {
            empty_count[i] = 1;
            1.0
        } else {
            tp as f64 / selected as f64
        };
        recall[i] = tp as f64 / positives as f64;
        fpr[i] = fp as f64 / negatives as f64;
    }
    let (f_max, f_max_level) = EvalReport::max_f(&precision, &recall, beta2);
    let adaptive = (2.0 * s.mean()).min(1.0);
    let (ap, ar) = pr_at_threshold(s, gt, adaptive)?;
    Ok(EvalReport {
        tpr: recall.clone(),
        precision,
        recall,
        fpr,
        empty_count,
        f_max,
        f_max_level,
        f_adaptive: f_measure(ap, ar, beta2),
        mae: mae(s, gt)?,
        images: 1,
    })
}

/// Per-threshold mean of the curves, mean MAE and adaptive F; `f_max` is
/// recomputed from the mean PR curve.
pub fn aggregate(reports: &[EvalReport], beta2: f64) -> Result<EvalReport> {
    if reports.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let n = reports.len() as f64;
    let mean_curve = |get: fn(&EvalReport) -> &Vec<f64>| -> Vec<f64> {
        (0..LEVELS)
            .map(|i| reports.iter().map(|r| get(r)[i]).sum::<f64>() / n)
            .collect()
    };
    let precision = mean_curve(|r| &r.precision);
    let recall = mean_curve(|r| &r.recall);
    let fpr = mean_curve(|r| &r.fpr);
    let tpr = mean_curve(|r| &r.tpr);
    let empty_count = (0..LEVELS)
        .map(|i| reports.iter().map(|r| r.empty_count[i]).sum())
        .collect();
    let (f_max, f_max_level) = EvalReport::max_f(&precision, &recall, beta2);
    Ok(EvalReport {
        precision,
        recall,
        fpr,
        tpr,
        empty_count,
        f_max,
        f_max_level,
        f_adaptive: reports.iter().map(|r| r.f_adaptive).sum::<f64>() / n,
        mae: reports.iter().map(|r| r.mae).sum::<f64>() / n,
        images: reports.iter().map(|r| r.images).sum(),
    })
}
