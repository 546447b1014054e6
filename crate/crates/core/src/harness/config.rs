//! Pipeline parameters and the flat `key = value` config format.
//!
//! ```text
//! # comments start with '#'
//! k = 8
//! sigma2 = 0.4
//! depth_inverted = true
//! ```

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::priors::{
    CenterPriorParams, DarkChannelParams, DEFAULT_BOUNDARY_CLUSTERS, DEFAULT_LIGHT_FRACTION,
    DEFAULT_PATCH_RADIUS,
};
use crate::region_saliency::DEFAULT_SIGMA2;
use crate::segmentation::DEFAULT_REGIONS;

/// Environment variable naming a config file.
pub const CONFIG_ENV: &str = "CDCP_CONFIG";

pub const KEYS: [&str; 7] = [
    "k",
    "sigma2",
    "patch_radius",
    "light_fraction",
    "boundary_clusters",
    "seed",
    "depth_inverted",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Number of k-means color regions.
    pub regions: usize,
    pub sigma2: f64,
    pub patch_radius: usize,
    pub light_fraction: f64,
    pub boundary_clusters: usize,
    pub seed: u64,
    /// Set for datasets that store near = large depth.
    pub depth_inverted: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            regions: DEFAULT_REGIONS,
            sigma2: DEFAULT_SIGMA2,
            patch_radius: DEFAULT_PATCH_RADIUS,
            light_fraction: DEFAULT_LIGHT_FRACTION,
            boundary_clusters: DEFAULT_BOUNDARY_CLUSTERS,
            seed: 0,
            depth_inverted: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: {value:?}")))
}

impl PipelineConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "k" => self.regions = parse_num(key, value)?,
            "sigma2" => self.sigma2 = parse_num(key, value)?,
            "patch_radius" => self.patch_radius = parse_num(key, value)?,
            "light_fraction" => self.light_fraction = parse_num(key, value)?,
            "boundary_clusters" => self.boundary_clusters = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "depth_inverted" => {
                self.depth_inverted = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(Error::Config(format!("bad boolean {value:?}"))),
                }
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every setting in `text` on top of `self`.
    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults overlaid with the file. Values are not range-checked here so
    /// that later overrides can still fix them; call [`Self::validate`].
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.merge_str(&text)?;
        Ok(cfg)
    }

    /// Defaults, overlaid with the file named by `CDCP_CONFIG` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) => Self::from_file(Path::new(&path)),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.regions < 2 {
            return Err(Error::Config("k must be at least 2".into()));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::Config("sigma2 must be positive".into()));
        }
        if self.boundary_clusters < 1 {
            return Err(Error::Config("boundary_clusters must be at least 1".into()));
        }
        DarkChannelParams::new(self.patch_radius, self.light_fraction)?;
        Ok(())
    }

    pub fn dark_channel(&self) -> DarkChannelParams {
        DarkChannelParams {
            patch_radius: self.patch_radius,
            light_fraction: self.light_fraction,
        }
    }

    pub fn center_prior(&self) -> CenterPriorParams {
        CenterPriorParams {
            boundary_clusters: self.boundary_clusters,
            sigma2: self.sigma2,
            seed: self.seed,
        }
    }
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k = {}", self.regions)?;
        writeln!(f, "sigma2 = {}", self.sigma2)?;
        writeln!(f, "patch_radius = {}", self.patch_radius)?;
        writeln!(f, "light_fraction = {}", self.light_fraction)?;
        writeln!(f, "boundary_clusters = {}", self.boundary_clusters)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "depth_inverted = {}", self.depth_inverted)
    }
}
