//! Handle cost `f_c = w1·a_b + w2·a_axis + w3·c_z` and ascending-cost ranking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::{HandleId, ValidatedHandle};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            w1: 0.4,
            w2: 0.3,
            w3: 0.3,
        }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        let ws = [self.w1, self.w2, self.w3];
        if ws.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) || ws.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "cost weights must be non-negative with a positive sum (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Cost inputs, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostFeatures {
    /// 1 − |u₊·u₋|: deviation of the boundary lines from parallel.
    pub a_b: f64,
    /// |â_img·u_avg|: deviation of the closing axis from the line normal.
    pub a_axis: f64,
    /// Center depth, min-max normalized over the handle set.
    pub c_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedHandle {
    pub handle: ValidatedHandle,
    pub features: CostFeatures,
    pub f_c: f64,
    /// 1-based.
    pub rank: usize,
}

pub fn compute_features(handles: &[ValidatedHandle]) -> Vec<CostFeatures> {
    let zs: Vec<f64> = handles.iter().map(|h| h.hypothesis.c.z).collect();
    let zmin = zs.iter().copied().fold(f64::INFINITY, f64::min);
    let zmax = zs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    handles
        .iter()
        .zip(&zs)
        .map(|(h, &z)| CostFeatures {
            a_b: (1.0 - h.a_b_raw).clamp(0.0, 1.0),
            a_axis: h.a_axis_raw.clamp(0.0, 1.0),
            c_z: if zmax > zmin {
                ((z - zmin) / (zmax - zmin)).clamp(0.0, 1.0)
            } else {
                0.0
            },
        })
        .collect()
}

pub fn score(f: &CostFeatures, w: &CostWeights) -> f64 {
    w.w1 * f.a_b + w.w2 * f.a_axis + w.w3 * f.c_z
}

/// Indices of `items` in ranking order: ascending cost, then nearer center,
/// then handle id.
pub fn order(items: &[(CostFeatures, HandleId)], w: &CostWeights) -> Vec<usize> {
    let costs: Vec<f64> = items.iter().map(|(f, _)| score(f, w)).collect();
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by(|&i, &j| {
        costs[i]
            .total_cmp(&costs[j])
            .then(items[i].0.c_z.total_cmp(&items[j].0.c_z))
            .then(items[i].1.cmp(&items[j].1))
    });
    idx
}

/// Scores and sorts `handles`, keeping at most `top_k`.
pub fn rank(handles: &[ValidatedHandle], w: &CostWeights, top_k: usize) -> Vec<RankedHandle> {
    let feats = compute_features(handles);
    let items: Vec<(CostFeatures, HandleId)> = feats.iter().zip(handles).map(|(f, h)| (*f, h.hypothesis.id)).collect();
    order(&items, w)
        .into_iter()
        .take(top_k)
        .enumerate()
        .map(|(k, i)| RankedHandle {
            handle: handles[i],
            features: feats[i],
            f_c: score(&feats[i], w),
            rank: k + 1,
        })
        .collect()
}
