//! The per-image detection pipeline and dataset-level batch runs.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::PipelineConfig;
use super::dataset::{DatasetIndex, Sample, SkipEntry};
use super::report;
use crate::error::{Error, Result};
use crate::fusion::FusionStages;
use crate::imaging::{load_rgbd, rgb_to_lab, DepthMap, RgbImage, SaliencyMap, ScalarMap};
use crate::metrics::{aggregate, evaluate, EvalReport, GroundTruth, DEFAULT_BETA2};
use crate::priors::{center_saliency, dark_channel_prior, AtmosphericLight};
use crate::region_saliency::RegionSaliency;
use crate::segmentation::{kmeans_segment, region_stats, RegionSegmentation};

/// Wall-clock time spent in each stage of [`detect`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub color_conversion: Duration,
    pub segmentation: Duration,
    pub region_saliency: Duration,
    pub dark_channel: Duration,
    pub center_prior: Duration,
    pub fusion: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.color_conversion
            + self.segmentation
            + self.region_saliency
            + self.dark_channel
            + self.center_prior
            + self.fusion
    }

    pub fn rows(&self) -> [(&'static str, Duration); 6] {
        [
            ("color_conversion", self.color_conversion),
            ("segmentation", self.segmentation),
            ("region_saliency", self.region_saliency),
            ("dark_channel", self.dark_channel),
            ("center_prior", self.center_prior),
            ("fusion", self.fusion),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub stages: FusionStages,
    pub segmentation: RegionSegmentation,
    pub regions: RegionSaliency,
    /// Center prior map.
    pub s_csp: SaliencyMap,
    /// Normalized transmission map.
    pub s_dcp: SaliencyMap,
    pub dark: ScalarMap,
    pub light: AtmosphericLight,
    pub timings: StageTimings,
}

impl PipelineOutput {
    /// All region depths were equal and the depth weight fell back to 1.
    pub fn flat_depth(&self) -> bool {
        self.regions.flat_depth
    }

    /// Debug rasters keyed by a short file suffix.
    pub fn debug_maps(&self) -> Vec<(&'static str, image::GrayImage)> {
        vec![
            ("s1", self.stages.s1.to_gray8()),
            ("d_dce", self.stages.d_dce.to_gray8()),
            ("s_csp", self.s_csp.to_gray8()),
            ("s_dcp", self.s_dcp.to_gray8()),
            ("s_cdcp", self.stages.s_cdcp.to_gray8()),
            ("s", self.stages.s.normalized().to_gray8()),
            ("dark", dark_gray(&self.dark)),
        ]
    }
}

impl PipelineOutput {
    /// Writes every intermediate raster, the label map and the per-region
    /// CSV into `dir` with `stem` as the file prefix.
    pub fn write_debug(&self, dir: &Path, stem: &str) -> Result<()> {
        create_dir(dir)?;
        let save_err = |path: &Path, e: image::ImageError| Error::Write {
            path: path.to_path_buf(),
            source: Box::new(e),
        };
        for (name, img) in self.debug_maps() {
            let path = dir.join(format!("{stem}_{name}.png"));
            img.save(&path).map_err(|e| save_err(&path, e))?;
        }
        let path = dir.join(format!("{stem}_labels.png"));
        self.segmentation
            .to_color_png()
            .save(&path)
            .map_err(|e| save_err(&path, e))?;
        let path = dir.join(format!("{stem}_regions.csv"));
        let mut buf = Vec::new();
        self.regions
            .write_csv(&mut buf)
            .and_then(|_| std::fs::write(&path, buf))
            .map_err(|e| Error::io(&path, e))
    }
}

fn dark_gray(dark: &ScalarMap) -> image::GrayImage {
    let (w, h) = dark.dims();
    SaliencyMap::new(w, h, dark.values().to_vec())
        .expect("dark channel lies in [0, 1]")
        .to_gray8()
}

/// Runs the full detection pipeline on an image and its depth map
/// (far = large).
pub fn detect(rgb: &RgbImage, depth: &DepthMap, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    if rgb.dims() != depth.dims() {
        return Err(Error::mismatch("rgb", rgb.dims(), "depth", depth.dims()));
    }
    cfg.validate()?;
    let mut timings = StageTimings::default();
    let mut clock = Instant::now();
    let mut lap = |slot: &mut Duration| {
        let now = Instant::now();
        *slot = now - clock;
        clock = now;
    };

    let lab = rgb_to_lab(rgb);
    lap(&mut timings.color_conversion);

    let (w, h) = rgb.dims();
    let k = cfg.regions.min(w * h);
    let segmentation = kmeans_segment(&lab, k, cfg.seed)?;
    let table = region_stats(&segmentation, &lab, depth)?;
    lap(&mut timings.segmentation);

    let regions = RegionSaliency::compute(&table, cfg.sigma2)?;
    let s1 = regions.paint(&segmentation);
    lap(&mut timings.region_saliency);

    let dcp = dark_channel_prior(rgb, &cfg.dark_channel());
    lap(&mut timings.dark_channel);

    let s_csp = center_saliency(&lab, &segmentation, &table, &cfg.center_prior())?;
    lap(&mut timings.center_prior);

    let stages = FusionStages::compute(s1, depth, &s_csp, &dcp.transmission)?;
    lap(&mut timings.fusion);

    Ok(PipelineOutput {
        stages,
        segmentation,
        regions,
        s_csp,
        s_dcp: dcp.transmission,
        dark: dcp.dark,
        light: dcp.light,
        timings,
    })
}

#[derive(Debug, Clone)]
pub struct SampleResult {
    pub stem: String,
    pub output: PipelineOutput,
    pub report: EvalReport,
}

pub(crate) fn load_sample(sample: &Sample, cfg: &PipelineConfig) -> Result<(RgbImage, DepthMap, GroundTruth)> {
    let (rgb, depth) = load_rgbd(&sample.rgb, &sample.depth)?;
    let depth = if cfg.depth_inverted {
        depth.inverted()
    } else {
        depth
    };
    let gt = GroundTruth::load_png(&sample.gt)?;
    if gt.dims() != rgb.dims() {
        return Err(Error::mismatch("rgb", rgb.dims(), "ground truth", gt.dims()));
    }
    Ok((rgb, depth, gt))
}

/// Loads, detects and evaluates one sample. When `out` is given the final
/// map is written there as `<stem>.png`.
pub fn run_pipeline(sample: &Sample, cfg: &PipelineConfig, out: Option<&Path>) -> Result<SampleResult> {
    let inner = || -> Result<SampleResult> {
        let (rgb, depth, gt) = load_sample(sample, cfg)?;
        let output = detect(&rgb, &depth, cfg)?;
        let report = evaluate(&output.stages.s_f, &gt, DEFAULT_BETA2)?;
        if let Some(dir) = out {
            output
                .stages
                .s_f
                .save_png(&dir.join(format!("{}.png", sample.stem)))?;
        }
        Ok(SampleResult {
            stem: sample.stem.clone(),
            output,
            report,
        })
    };
    inner().map_err(|e| e.in_sample(&sample.stem))
}

/// Outcome of a batch run.
#[derive(Debug, Clone)]
pub struct BatchSummary {
    /// Stem-sorted per-image rows.
    pub rows: Vec<report::ImageRow>,
    /// Discovery skips followed by processing failures.
    pub skipped: Vec<SkipEntry>,
    pub dataset: Option<EvalReport>,
    pub written: Vec<PathBuf>,
}

impl BatchSummary {
    pub fn had_skips(&self) -> bool {
        !self.skipped.is_empty()
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn finish(index: &DatasetIndex, mut rows: Vec<report::ImageRow>, reports: Vec<EvalReport>, failures: Vec<SkipEntry>, out: &Path) -> Result<BatchSummary> {
    let mut skipped = index.skipped.clone();
    skipped.extend(failures);
    rows.sort_by(|a, b| a.stem.cmp(&b.stem));
    let dataset = if reports.is_empty() {
        None
    } else {
        Some(aggregate(&reports, DEFAULT_BETA2)?)
    };
    let mut written = Vec::new();
    let mut write = |name: &str, f: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| -> Result<()> {
        let path = out.join(name);
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| Error::io(&path, e))?;
        std::fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    write("metrics.csv", &|b| report::write_image_rows(b, &rows))?;
    write("skipped.csv", &|b| report::write_skips(b, &skipped))?;
    if let Some(d) = &dataset {
        write("curves.csv", &|b| report::write_curves(b, d))?;
        write("summary.csv", &|b| report::write_summary(b, report::METHOD, &index.name, d))?;
    }
    Ok(BatchSummary {
        rows,
        skipped,
        dataset,
        written,
    })
}

/// Runs [`run_pipeline`] over every sample in parallel, writing final maps
/// and the CSV reports into `out`. Failed samples become skip rows.
/// With `debug`, intermediate maps go to `out/debug`.
pub fn detect_dataset(index: &DatasetIndex, cfg: &PipelineConfig, out: &Path, debug: bool) -> Result<BatchSummary> {
    cfg.validate()?;
    create_dir(out)?;
    let debug_dir = out.join("debug");
    let results: Vec<Result<SampleResult>> = index
        .samples
        .par_iter()
        .map(|s| {
            let r = run_pipeline(s, cfg, Some(out))?;
            if debug {
                r.output
                    .write_debug(&debug_dir, &r.stem)
                    .map_err(|e| e.in_sample(&r.stem))?;
            }
            Ok(r)
        })
        .collect();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (sample, result) in index.samples.iter().zip(results) {
        match result {
            Ok(r) => {
                rows.push(report::ImageRow::new(&r.stem, &r.report, r.output.flat_depth()));
                reports.push(r.report);
            }
            Err(e) => failures.push(SkipEntry {
                stem: sample.stem.clone(),
                reason: e.to_string(),
            }),
        }
    }
    finish(index, rows, reports, failures, out)
}

/// Evaluates precomputed maps `<maps>/<stem>.png` against the dataset masks.
pub fn evaluate_maps(index: &DatasetIndex, maps: &Path, out: &Path) -> Result<BatchSummary> {
    create_dir(out)?;
    let results: Vec<Result<EvalReport>> = index
        .samples
        .par_iter()
        .map(|s| {
            let path = maps.join(format!("{}.png", s.stem));
            if !path.is_file() {
                return Err(Error::Dataset {
                    root: maps.to_path_buf(),
                    reason: format!("missing map {}", path.display()),
                });
            }
            let map = SaliencyMap::load_png(&path)?;
            let gt = GroundTruth::load_png(&s.gt)?;
            evaluate(&map, &gt, DEFAULT_BETA2)
        })
        .collect();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (sample, result) in index.samples.iter().zip(results) {
        match result {
            Ok(r) => {
                rows.push(report::ImageRow::new(&sample.stem, &r, false));
                reports.push(r);
            }
            Err(e) => failures.push(SkipEntry {
                stem: sample.stem.clone(),
                reason: e.to_string(),
            }),
        }
    }
    finish(index, rows, reports, failures, out)
}
