//! Dataset discovery for the two supported on-disk layouts.
//!
//! * `flat-suffix`: `<stem>_rgb.*`, `<stem>_depth.*`, `<stem>_gt.*` in one
//!   directory.
//! * `subdirs`: `RGB/<stem>.*`, `depth/<stem>.*`, `GT/<stem>.*`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

const EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];
const PARTS: [&str; 3] = ["rgb", "depth", "gt"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    FlatSuffix,
    Subdirs,
}

impl Layout {
    /// `subdirs` when an `RGB` directory exists under `root`, else `flat-suffix`.
    pub fn detect(root: &Path) -> Layout {
        if find_subdir(root, "RGB").is_some() {
            Layout::Subdirs
        } else {
            Layout::FlatSuffix
        }
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat-suffix" => Ok(Layout::FlatSuffix),
            "subdirs" => Ok(Layout::Subdirs),
            other => Err(Error::Config(format!(
                "unknown layout {other:?} (expected flat-suffix or subdirs)"
            ))),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layout::FlatSuffix => "flat-suffix",
            Layout::Subdirs => "subdirs",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub stem: String,
    pub rgb: PathBuf,
    pub depth: PathBuf,
    pub gt: PathBuf,
}

/// A sample that produced no result, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkipEntry {
    pub stem: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetIndex {
    pub name: String,
    pub root: PathBuf,
    /// Sorted by stem.
    pub samples: Vec<Sample>,
    pub skipped: Vec<SkipEntry>,
}

impl DatasetIndex {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn find_subdir(root: &Path, name: &str) -> Option<PathBuf> {
    let exact = root.join(name);
    if exact.is_dir() {
        return Some(exact);
    }
    std::fs::read_dir(root).ok()?.flatten().find_map(|e| {
        let p = e.path();
        (p.is_dir() && e.file_name().to_string_lossy().eq_ignore_ascii_case(name)).then_some(p)
    })
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && is_image(&path) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

type Parts = [Option<PathBuf>; 3];

fn insert(table: &mut BTreeMap<String, Parts>, root: &Path, stem: String, part: usize, path: PathBuf) -> Result<()> {
    let slot = &mut table.entry(stem.clone()).or_default()[part];
    if slot.is_some() {
        return Err(Error::Dataset {
            root: root.to_path_buf(),
            reason: format!("duplicate {} file for stem {stem:?}", PARTS[part]),
        });
    }
    *slot = Some(path);
    Ok(())
}

fn collect_flat(root: &Path) -> Result<BTreeMap<String, Parts>> {
    let mut table = BTreeMap::new();
    for path in list_images(root)? {
        let name = file_stem(&path);
        for (part, suffix) in PARTS.iter().enumerate() {
            if let Some(stem) = name.strip_suffix(&format!("_{suffix}")) {
                insert(&mut table, root, stem.to_string(), part, path.clone())?;
                break;
            }
        }
    }
    Ok(table)
}

fn collect_subdirs(root: &Path) -> Result<BTreeMap<String, Parts>> {
    let mut table = BTreeMap::new();
    for (part, dir) in ["RGB", "depth", "GT"].iter().enumerate() {
        let Some(dir) = find_subdir(root, dir) else {
            continue;
        };
        for path in list_images(&dir)? {
            insert(&mut table, root, file_stem(&path), part, path)?;
        }
    }
    Ok(table)
}

/// Indexes every complete (rgb, depth, gt) triple under `root`.
///
/// Incomplete stems are listed in [`DatasetIndex::skipped`]. Fails when a
/// stem appears twice for the same part or when no triple is complete.
pub fn discover_dataset(root: &Path, layout: Layout) -> Result<DatasetIndex> {
    if !root.is_dir() {
        return Err(Error::Dataset {
            root: root.to_path_buf(),
            reason: "not a directory".into(),
        });
    }
    let table = match layout {
        Layout::FlatSuffix => collect_flat(root)?,
        Layout::Subdirs => collect_subdirs(root)?,
    };
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for (stem, parts) in table {
        match parts {
            [Some(rgb), Some(depth), Some(gt)] => samples.push(Sample {
                stem,
                rgb,
                depth,
                gt,
            }),
            parts => {
                let missing: Vec<&str> = parts
                    .iter()
                    .zip(PARTS)
                    .filter(|(p, _)| p.is_none())
                    .map(|(_, name)| name)
                    .collect();
                skipped.push(SkipEntry {
                    stem,
                    reason: format!("missing {}", missing.join("+")),
                });
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::Dataset {
            root: root.to_path_buf(),
            reason: format!("no complete samples found with layout {layout}"),
        });
    }
    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Ok(DatasetIndex {
        name,
        root: root.to_path_buf(),
        samples,
        skipped,
    })
}
