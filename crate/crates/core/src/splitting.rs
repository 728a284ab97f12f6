//! Binary information design: a prior `p = P(u₁)` is split by a two-message
//! signal into posteriors `(p₁, p₂)`.
//!
//! The signal is parametrized as
//!
//! ```text
//!         w₁      w₂
//!   u₁   1 − α    α
//!   u₂    β     1 − β
//! ```
//!
//! so `p₁ = P(u₁|w₁)` and `p₂ = P(u₁|w₂)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::prob::{binary_entropy, plog2p, StochasticMatrix};

/// Slack tolerance for closed feasibility constraints.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Default posterior grid step for region scans.
pub const DEFAULT_REGION_RESOLUTION: f64 = 1.0 / 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinarySignal {
    pub alpha: f64,
    pub beta: f64,
}

impl BinarySignal {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_probability("alpha", alpha)?;
        check_probability("beta", beta)?;
        Ok(BinarySignal { alpha, beta })
    }

    /// Canonical signal for the no-information split.
    pub fn uninformative() -> Self {
        BinarySignal {
            alpha: 0.5,
            beta: 0.5,
        }
    }

    /// `Q(w|u)` as a 2×2 table.
    pub fn to_matrix(&self) -> StochasticMatrix {
        StochasticMatrix::new(vec![
            vec![1.0 - self.alpha, self.alpha],
            vec![self.beta, 1.0 - self.beta],
        ])
        .expect("alpha and beta are validated probabilities")
    }

    /// `P(w₁) = p(1 − α) + (1 − p)β`.
    pub fn weight_w1(&self, p: f64) -> f64 {
        p * (1.0 - self.alpha) + (1.0 - p) * self.beta
    }

    /// Swap the labels of both the states and the messages.
    pub fn relabeled(&self) -> Self {
        BinarySignal {
            alpha: self.beta,
            beta: self.alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorPair {
    pub p1: f64,
    pub p2: f64,
}

impl PosteriorPair {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        check_probability("p1", p1)?;
        check_probability("p2", p2)?;
        Ok(PosteriorPair { p1, p2 })
    }

    /// Weight of message w₁ in the Bayes-plausible split of `p`.
    pub fn weight_w1(&self, p: f64) -> f64 {
        if self.p1 == self.p2 {
            1.0
        } else {
            (self.p2 - p) / (self.p2 - self.p1)
        }
    }
}

/// Posteriors induced by a signal. A message that is never sent has an
/// undefined posterior; it is reported as 1/2 and flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedPosteriors {
    pub pair: PosteriorPair,
    pub weight_w1: f64,
    pub undefined: [bool; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityMode {
    Unconstrained,
    OneShot,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// bits for block mode, probability margin for one-shot mode
    pub slack: f64,
    pub mode: FeasibilityMode,
}

impl FeasibilityVerdict {
    pub fn from_slack(slack: f64, mode: FeasibilityMode) -> Self {
        FeasibilityVerdict {
            feasible: slack >= -FEASIBILITY_TOL,
            slack,
            mode,
        }
    }
}

pub fn posteriors_from_signal(p: f64, s: &BinarySignal) -> Result<InducedPosteriors> {
    check_probability("p", p)?;
    let m1 = p * (1.0 - s.alpha);
    let w1 = m1 + (1.0 - p) * s.beta;
    let m2 = p * s.alpha;
    let w2 = m2 + (1.0 - p) * (1.0 - s.beta);
    let undefined = [w1 <= 0.0, w2 <= 0.0];
    let p1 = if undefined[0] {
        0.5
    } else {
        (m1 / w1).min(1.0)
    };
    let p2 = if undefined[1] {
        0.5
    } else {
        (m2 / w2).min(1.0)
    };
    Ok(InducedPosteriors {
        pair: PosteriorPair { p1, p2 },
        weight_w1: w1,
        undefined,
    })
}

/// A split is valid when the prior is non-degenerate and lies strictly
/// between the two posteriors.
pub fn is_valid_split(p: f64, t: &PosteriorPair) -> bool {
    p > 0.0 && p < 1.0 && ((t.p1 < p && p < t.p2) || (t.p2 < p && p < t.p1))
}

/// The `(α, β)` inducing posteriors `t` from prior `p` (the inverse of
/// [`posteriors_from_signal`]), without validation.
#[inline]
pub(crate) fn required_parameters(p: f64, t: &PosteriorPair) -> (f64, f64) {
    let d = t.p1 - t.p2;
    let alpha = t.p2 * (t.p1 - p) / (p * d);
    let beta = (1.0 - t.p1) * (p - t.p2) / ((1.0 - p) * d);
    (alpha.clamp(0.0, 1.0), beta.clamp(0.0, 1.0))
}

fn check_split(p: f64, t: &PosteriorPair) -> Result<()> {
    check_probability("p", p)?;
    check_probability("p1", t.p1)?;
    check_probability("p2", t.p2)?;
    if t.p1 == t.p2 {
        return Err(Error::NoInformation(t.p1));
    }
    if !is_valid_split(p, t) {
        return Err(Error::InvalidSplit {
            prior: p,
            p1: t.p1,
            p2: t.p2,
        });
    }
    Ok(())
}

pub fn signal_from_posteriors(p: f64, t: &PosteriorPair) -> Result<BinarySignal> {
    check_split(p, t)?;
    let (alpha, beta) = required_parameters(p, t);
    Ok(BinarySignal { alpha, beta })
}

#[inline]
pub(crate) fn one_shot_slack(p: f64, t: &PosteriorPair, eps: f64) -> f64 {
    let (a, b) = required_parameters(p, t);
    let margin = |x: f64| (x - eps).min(1.0 - eps - x);
    margin(a).min(margin(b))
}

/// Whether the split is reachable by a single symbol over a BSC(`eps`): the
/// end-to-end parameters must lie in the attainable band `[eps, 1 − eps]`.
pub fn one_shot_feasible(p: f64, t: &PosteriorPair, eps: f64) -> Result<FeasibilityVerdict> {
    check_split(p, t)?;
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: "[0, 0.5]",
        });
    }
    Ok(FeasibilityVerdict::from_slack(
        one_shot_slack(p, t, eps),
        FeasibilityMode::OneShot,
    ))
}

/// `I(U;W)` in bits for the binary signal `s` and prior `p`.
pub fn signal_information(p: f64, s: &BinarySignal) -> Result<f64> {
    check_probability("p", p)?;
    Ok(information_unchecked(p, s.alpha, s.beta))
}

#[inline]
pub(crate) fn information_unchecked(p: f64, alpha: f64, beta: f64) -> f64 {
    let w1 = p * (1.0 - alpha) + (1.0 - p) * beta;
    let h = |x: f64| plog2p(x) + plog2p(1.0 - x);
    (h(w1) - p * h(alpha) - (1.0 - p) * h(beta)).max(0.0)
}

/// Block-coding feasibility: `cap − I(U;W) ≥ 0`.
pub fn block_feasible(p: f64, s: &BinarySignal, cap: f64) -> Result<FeasibilityVerdict> {
    let info = signal_information(p, s)?;
    Ok(FeasibilityVerdict::from_slack(
        cap - info,
        FeasibilityMode::Block,
    ))
}

/// `1 − h(eps)`, the capacity of a BSC.
pub fn bsc_capacity(eps: f64) -> Result<f64> {
    Ok(1.0 - binary_entropy(eps)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegionLabel {
    OneShot,
    BlockOnly,
    Infeasible,
    InvalidSplit,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::OneShot => "ONE_SHOT",
            RegionLabel::BlockOnly => "BLOCK_ONLY",
            RegionLabel::Infeasible => "INFEASIBLE",
            RegionLabel::InvalidSplit => "INVALID_SPLIT",
        }
    }

    pub fn block_feasible(&self) -> bool {
        matches!(self, RegionLabel::OneShot | RegionLabel::BlockOnly)
    }
}

impl std::str::FromStr for RegionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ONE_SHOT" => Ok(RegionLabel::OneShot),
            "BLOCK_ONLY" => Ok(RegionLabel::BlockOnly),
            "INFEASIBLE" => Ok(RegionLabel::Infeasible),
            "INVALID_SPLIT" => Ok(RegionLabel::InvalidSplit),
            other => Err(Error::Parse(format!("unknown region label {other:?}"))),
        }
    }
}

/// Label of one `(p₁, p₂)` cell for a BSC(`eps`) link of capacity `cap`.
pub(crate) fn classify(p: f64, t: &PosteriorPair, eps: f64, cap: f64) -> RegionLabel {
    if !is_valid_split(p, t) {
        return RegionLabel::InvalidSplit;
    }
    if one_shot_slack(p, t, eps) >= -FEASIBILITY_TOL {
        return RegionLabel::OneShot;
    }
    let (a, b) = required_parameters(p, t);
    if cap - information_unchecked(p, a, b) >= -FEASIBILITY_TOL {
        RegionLabel::BlockOnly
    } else {
        RegionLabel::Infeasible
    }
}

/// Posterior grid `0, r, 2r, …` up to 1. When `1/r` is an integer the points
/// are computed as `i/N` so that grid values are exact decimals.
pub fn grid_axis(resolution: f64) -> Result<Vec<f64>> {
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::OutOfRange {
            name: "resolution",
            value: resolution,
            range: "(0, 0.5]",
        });
    }
    let inv = 1.0 / resolution;
    let steps = inv.round();
    if (steps * resolution - 1.0).abs() < 1e-9 {
        let n = steps as usize;
        Ok((0..=n).map(|i| i as f64 / steps).collect())
    } else {
        let n = (inv + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| i as f64 * resolution).collect())
    }
}

/// Region labels over the posterior grid, row-major with `p₁` as the row.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub prior: f64,
    pub eps: f64,
    pub capacity: f64,
    pub axis: Vec<f64>,
    pub labels: Vec<RegionLabel>,
}

impl RegionGrid {
    pub fn label(&self, i: usize, j: usize) -> RegionLabel {
        self.labels[i * self.axis.len() + j]
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, RegionLabel)> + '_ {
        let n = self.axis.len();
        self.labels
            .iter()
            .enumerate()
            .map(move |(k, &l)| (self.axis[k / n], self.axis[k % n], l))
    }

    pub fn count(&self, label: RegionLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        nearest_index(&self.axis, x)
    }
}

pub(crate) fn nearest_index(axis: &[f64], x: f64) -> usize {
    axis.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

pub fn region_scan(p: f64, eps: f64, resolution: f64) -> Result<RegionGrid> {
    check_probability("p", p)?;
    let capacity = bsc_capacity(eps)?;
    if eps > 0.5 {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: "[0, 0.5]",
        });
    }
    let axis = grid_axis(resolution)?;
    let labels = axis
        .par_iter()
        .flat_map_iter(|&p1| {
            axis.iter()
                .map(move |&p2| classify(p, &PosteriorPair { p1, p2 }, eps, capacity))
        })
        .collect();
    Ok(RegionGrid {
        prior: p,
        eps,
        capacity,
        axis,
        labels,
    })
}
