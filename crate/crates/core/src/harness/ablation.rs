//! Per-stage evaluation of the fusion pipeline.

use std::path::Path;

use rayon::prelude::*;

use super::config::PipelineConfig;
use super::dataset::{DatasetIndex, SkipEntry};
use super::pipeline::{detect, load_sample};
use crate::error::{Error, Result};
use crate::fusion::AblationStage;
use crate::metrics::{aggregate, evaluate, EvalReport, DEFAULT_BETA2};

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub stage: AblationStage,
    /// Max F-measure of the mean PR curve.
    pub f_beta: f64,
    pub f_adaptive: f64,
    pub mae: f64,
}

/// Five rows in pipeline order: `S_1`, `D_dce`, `S_cdcp`, `S`, `S_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
    pub images: usize,
    pub skipped: Vec<SkipEntry>,
}

impl AblationTable {
    pub fn row(&self, stage: AblationStage) -> &AblationRow {
        self.rows
            .iter()
            .find(|r| r.stage == stage)
            .expect("every stage has a row")
    }
}

/// Evaluates every stage map of every sample. When `out` is given, each stage
/// map is written as `<stem>_<stage>.png`.
pub fn run_ablation(index: &DatasetIndex, cfg: &PipelineConfig, out: Option<&Path>) -> Result<AblationTable> {
    cfg.validate()?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let per_sample: Vec<Result<Vec<EvalReport>>> = index
        .samples
        .par_iter()
        .map(|sample| {
            let run = || -> Result<Vec<EvalReport>> {
                let (rgb, depth, gt) = load_sample(sample, cfg)?;
                let output = detect(&rgb, &depth, cfg)?;
                output
                    .stages
                    .ablation_maps()
                    .iter()
                    .map(|(stage, map)| {
                        if let Some(dir) = out {
                            map.save_png(&dir.join(format!("{}_{}.png", sample.stem, stage.label())))?;
                        }
                        evaluate(map, &gt, DEFAULT_BETA2)
                    })
                    .collect()
            };
            run().map_err(|e| e.in_sample(&sample.stem))
        })
        .collect();

    let mut by_stage: Vec<Vec<EvalReport>> = vec![Vec::new(); AblationStage::ALL.len()];
    let mut skipped = index.skipped.clone();
    for (sample, result) in index.samples.iter().zip(per_sample) {
        match result {
            Ok(reports) => {
                for (slot, r) in by_stage.iter_mut().zip(reports) {
                    slot.push(r);
                }
            }
            Err(e) => skipped.push(SkipEntry {
                stem: sample.stem.clone(),
                reason: e.to_string(),
            }),
        }
    }
    let images = by_stage[0].len();
    if images == 0 {
        return Err(Error::EmptyAggregate);
    }
    let rows = AblationStage::ALL
        .iter()
        .zip(&by_stage)
        .map(|(&stage, reports)| {
            let agg = aggregate(reports, DEFAULT_BETA2)?;
            Ok(AblationRow {
                stage,
                f_beta: agg.f_max,
                f_adaptive: agg.f_adaptive,
                mae: agg.mae,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationTable {
        rows,
        images,
        skipped,
    })
}
