//! Salient object detection for RGB-D images using a center-dark channel prior.
//!
//! The pipeline runs in three phases:
//!
//! 1. **Initialization**: the color image is clustered into regions in L\*a\*b\*
//!    space ([`segmentation`]) and each region is scored by color and depth
//!    contrast, weighted toward central and near regions ([`region_saliency`]).
//! 2. **Priors**: a boundary-seeded center map and a dark-channel transmission
//!    map are computed from the image ([`priors`]).
//! 3. **Fusion**: the initial map, a depth cue and both priors are combined
//!    multiplicatively and passed through exponential saturation ([`fusion`]).
//!
//! [`metrics`] evaluates maps against binary masks (PR/ROC curves, F-measure,
//! MAE) and [`harness`] drives datasets, ablations and synthetic fixtures.

pub mod error;
pub mod fusion;
pub mod harness;
pub mod imaging;
pub mod metrics;
pub mod priors;
pub mod region_saliency;
pub mod segmentation;

pub use crate::error::{Error, Result};
pub use crate::imaging::{DepthMap, LabImage, RgbImage, SaliencyMap, ScalarMap};
