//! Updated fusion of the initial map with the depth cue and the
//! center-dark channel prior.
//!
//! All stages are evaluated per pixel after region values have been painted.

use crate::error::{Error, Result};
use crate::imaging::{min_max, DepthMap, SaliencyMap};

/// Upper bound of the raw fused map.
pub const FUSED_CEILING: f64 = 1.0 - 0.049_787_068_367_863_944; // 1 - e^-3
/// Upper bound of the raw final map.
pub const FINAL_CEILING: f64 = 1.0 - 0.367_879_441_171_442_33; // 1 - e^-1

fn same_dims(maps: &[(&'static str, &SaliencyMap)]) -> Result<(usize, usize)> {
    let (first_name, first) = maps[0];
    for &(name, m) in &maps[1..] {
        if m.dims() != first.dims() {
            return Err(Error::mismatch(first_name, first.dims(), name, m.dims()));
        }
    }
    Ok(first.dims())
}

/// Near pixels score high: normalized complement of depth.
pub fn depth_cue_enhancement(depth: &DepthMap) -> SaliencyMap {
    let (w, h) = depth.dims();
    let complement: Vec<f64> = depth.values().iter().map(|d| 1.0 - d).collect();
    SaliencyMap::from_unit(w, h, min_max(&complement))
}

/// Product of the normalized center prior and normalized transmission.
pub fn center_dark_channel_prior(s_csp: &SaliencyMap, s_dcp: &SaliencyMap) -> Result<SaliencyMap> {
    let (w, h) = same_dims(&[("s_csp", s_csp), ("s_dcp", s_dcp)])?;
    let a = min_max(s_csp.values());
    let b = min_max(s_dcp.values());
    Ok(SaliencyMap::from_unit(
        w,
        h,
        a.iter().zip(&b).map(|(x, y)| x * y).collect(),
    ))
}

#[inline]
pub fn fused_value(s1: f64, d_dce: f64, s_cdcp: f64, s_csp: f64) -> f64 {
    (1.0 - (-(s1 + d_dce + s_cdcp)).exp()) * s1 * s_csp
}

#[inline]
pub fn final_value(s1: f64, s_csp: f64, s: f64) -> f64 {
    1.0 - (-(s1 * s_csp * s)).exp()
}

/// Raw fused map `(1 - e^-(S1 + Ddce + Scdcp)) * S1 * Scsp`, in `[0, 1 - e^-3]`.
pub fn fused_saliency(
    s1: &SaliencyMap,
    d_dce: &SaliencyMap,
    s_cdcp: &SaliencyMap,
    s_csp: &SaliencyMap,
) -> Result<SaliencyMap> {
    let (w, h) = same_dims(&[
        ("s1", s1),
        ("d_dce", d_dce),
        ("s_cdcp", s_cdcp),
        ("s_csp", s_csp),
    ])?;
    let data = (0..w * h)
        .map(|i| {
            fused_value(
                s1.values()[i],
                d_dce.values()[i],
                s_cdcp.values()[i],
                s_csp.values()[i],
            )
        })
        .collect();
    Ok(SaliencyMap::from_unit(w, h, data))
}

/// Raw final map `1 - e^-(S1 * Scsp * S)`, in `[0, 1 - e^-1]`.
pub fn final_saliency_raw(
    s1: &SaliencyMap,
    s_csp: &SaliencyMap,
    s: &SaliencyMap,
) -> Result<SaliencyMap> {
    let (w, h) = same_dims(&[("s1", s1), ("s_csp", s_csp), ("s", s)])?;
    let data = (0..w * h)
        .map(|i| final_value(s1.values()[i], s_csp.values()[i], s.values()[i]))
        .collect();
    Ok(SaliencyMap::from_unit(w, h, data))
}

/// Min–max normalized final map.
pub fn final_saliency(
    s1: &SaliencyMap,
    s_csp: &SaliencyMap,
    s: &SaliencyMap,
) -> Result<SaliencyMap> {
    Ok(final_saliency_raw(s1, s_csp, s)?.normalized())
}

/// Every intermediate map of the fusion stage.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionStages {
    pub s1: SaliencyMap,
    pub d_dce: SaliencyMap,
    pub s_cdcp: SaliencyMap,
    /// Raw fused map.
    pub s: SaliencyMap,
    /// Raw final map.
    pub s_f_raw: SaliencyMap,
    /// Normalized final map.
    pub s_f: SaliencyMap,
}

impl FusionStages {
    pub fn compute(
        s1: SaliencyMap,
        depth: &DepthMap,
        s_csp: &SaliencyMap,
        s_dcp: &SaliencyMap,
    ) -> Result<Self> {
        if depth.dims() != s1.dims() {
            return Err(Error::mismatch("s1", s1.dims(), "depth", depth.dims()));
        }
        let d_dce = depth_cue_enhancement(depth);
        let s_cdcp = center_dark_channel_prior(s_csp, s_dcp)?;
        let s = fused_saliency(&s1, &d_dce, &s_cdcp, s_csp)?;
        let s_f_raw = final_saliency_raw(&s1, s_csp, &s)?;
        let s_f = s_f_raw.normalized();
        Ok(Self {
            s1,
            d_dce,
            s_cdcp,
            s,
            s_f_raw,
            s_f,
        })
    }

    /// Stage maps evaluated by the ablation, each normalized to `[0, 1]`.
    ///
    /// The enhancement terms are added progressively to the saturating factor
    /// that multiplies `S1`:
    ///
    /// | row      | map                                         |
    /// |----------|---------------------------------------------|
    /// | `S_1`    | `S1`                                        |
    /// | `D_dce`  | `(1 - e^-(S1 + Ddce)) * S1`                 |
    /// | `S_cdcp` | `(1 - e^-(S1 + Ddce + Scdcp)) * S1`         |
    /// | `S`      | `(1 - e^-(S1 + Ddce + Scdcp)) * S1 * Scsp`  |
    /// | `S_f`    | `1 - e^-(S1 * Scsp * S)`                    |
    pub fn ablation_maps(&self) -> [(AblationStage, SaliencyMap); 5] {
        let (w, h) = self.s1.dims();
        let s1 = self.s1.values();
        let d = self.d_dce.values();
        let c = self.s_cdcp.values();
        let depth_enhanced: Vec<f64> = (0..w * h)
            .map(|i| (1.0 - (-(s1[i] + d[i])).exp()) * s1[i])
            .collect();
        let prior_enhanced: Vec<f64> = (0..w * h)
            .map(|i| (1.0 - (-(s1[i] + d[i] + c[i])).exp()) * s1[i])
            .collect();
        [
            (AblationStage::Initial, self.s1.normalized()),
            (
                AblationStage::DepthCue,
                SaliencyMap::from_unit(w, h, min_max(&depth_enhanced)),
            ),
            (
                AblationStage::CenterDarkChannel,
                SaliencyMap::from_unit(w, h, min_max(&prior_enhanced)),
            ),
            (AblationStage::Fused, self.s.normalized()),
            (AblationStage::Final, self.s_f.clone()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AblationStage {
    Initial,
    DepthCue,
    CenterDarkChannel,
    Fused,
    Final,
}

impl AblationStage {
    pub const ALL: [AblationStage; 5] = [
        AblationStage::Initial,
        AblationStage::DepthCue,
        AblationStage::CenterDarkChannel,
        AblationStage::Fused,
        AblationStage::Final,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AblationStage::Initial => "S_1",
            AblationStage::DepthCue => "D_dce",
            AblationStage::CenterDarkChannel => "S_cdcp",
            AblationStage::Fused => "S",
            AblationStage::Final => "S_f",
        }
    }
}
