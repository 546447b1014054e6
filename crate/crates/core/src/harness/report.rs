//! CSV exports. Numbers use fixed precision so repeated runs are
//! byte-identical.

use std::io::{self, Write};

use super::ablation::AblationTable;
use super::dataset::SkipEntry;
use crate::metrics::{threshold, EvalReport, LEVELS};

/// Method name used in summary rows.
pub const METHOD: &str = "CDCP";

/// One row of the per-image metrics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRow {
    pub stem: String,
    pub f_max: f64,
    pub f_adaptive: f64,
    pub mae: f64,
    pub flat_depth: bool,
}

impl ImageRow {
    pub fn new(stem: &str, report: &EvalReport, flat_depth: bool) -> Self {
        Self {
            stem: stem.to_string(),
            f_max: report.f_max,
            f_adaptive: report.f_adaptive,
            mae: report.mae,
            flat_depth,
        }
    }
}

pub fn write_image_rows(mut out: impl Write, rows: &[ImageRow]) -> io::Result<()> {
    writeln!(out, "stem,f_max,f_adaptive,mae,flat_depth")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{}",
            r.stem, r.f_max, r.f_adaptive, r.mae, r.flat_depth
        )?;
    }
    Ok(())
}

/// 256 rows, one per threshold. `empty` counts images whose binarized map
/// was empty at that threshold (precision reported as 1 there).
pub fn write_curves(mut out: impl Write, report: &EvalReport) -> io::Result<()> {
    writeln!(out, "level,threshold,precision,recall,fpr,tpr,empty")?;
    for i in 0..LEVELS {
        writeln!(
            out,
            "{i},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            threshold(i),
            report.precision[i],
            report.recall[i],
            report.fpr[i],
            report.tpr[i],
            report.empty_count[i]
        )?;
    }
    Ok(())
}

/// Method x dataset summary row: MAE and max F-measure (headline), plus the
/// adaptive-threshold F-measure.
pub fn write_summary(mut out: impl Write, method: &str, dataset: &str, report: &EvalReport) -> io::Result<()> {
    writeln!(out, "method,dataset,mae,f_beta,f_adaptive,images")?;
    writeln!(
        out,
        "{method},{dataset},{:.4},{:.4},{:.4},{}",
        report.mae, report.f_max, report.f_adaptive, report.images
    )
}

pub fn write_skips(mut out: impl Write, skipped: &[SkipEntry]) -> io::Result<()> {
    writeln!(out, "stem,reason")?;
    for s in skipped {
        writeln!(out, "{},\"{}\"", s.stem, s.reason.replace('"', "'"))?;
    }
    Ok(())
}

pub fn write_ablation(mut out: impl Write, table: &AblationTable) -> io::Result<()> {
    writeln!(out, "stage,f_beta,f_adaptive,mae,images,mode")?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{},cumulative",
            r.stage.label(),
            r.f_beta,
            r.f_adaptive,
            r.mae,
            table.images
        )?;
    }
    Ok(())
}
