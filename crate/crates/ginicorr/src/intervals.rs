//! Confidence intervals for the categorical Gini correlation: inversion of
//! the empirical-likelihood statistics over `[0, 1]` and the
//! normal-approximation interval from the jackknife variance.

use serde::{Deserialize, Serialize};

use crate::el_solver::{
    ajel_stat, default_adjustment, jel_stat, spatial_depth_weights, wjel_stat, WeightVector,
};
use crate::error::{Error, Result};
use crate::gmd::{GmdSummary, LabeledSample};
use crate::jackknife::{jackknife_variance_from_summary, pseudo_values, PseudoValueSet};
pub use crate::special::{chi2_quantile_1df, normal_quantile};

/// Interval-construction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Jackknife empirical likelihood.
    Jel,
    /// Adjusted jackknife empirical likelihood (always-feasible variant).
    Ajel,
    /// Spatial-depth-weighted jackknife empirical likelihood.
    Wjel,
    /// Normal approximation with jackknife variance.
    Jv,
}

impl Method {
    /// All four methods, in reporting order.
    pub const ALL: [Method; 4] = [Method::Jel, Method::Ajel, Method::Wjel, Method::Jv];

    /// Lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            Method::Jel => "jel",
            Method::Ajel => "ajel",
            Method::Wjel => "wjel",
            Method::Jv => "jv",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jel" => Ok(Method::Jel),
            "ajel" => Ok(Method::Ajel),
            "wjel" => Ok(Method::Wjel),
            "jv" => Ok(Method::Jv),
            other => Err(Error::InvalidParameter {
                name: "method",
                message: format!("unknown method '{other}' (expected jel, ajel, wjel, or jv)"),
            }),
        }
    }
}

/// Outcome of an interval construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalStatus {
    /// Both endpoints found strictly inside `[0, 1]`.
    #[serde(rename = "ok")]
    Ok,
    /// Lower endpoint clipped to 0.
    #[serde(rename = "clipped-at-0")]
    ClippedAtZero,
    /// Upper endpoint clipped to 1.
    #[serde(rename = "clipped-at-1")]
    ClippedAtOne,
    /// Both endpoints clipped.
    #[serde(rename = "clipped-both")]
    ClippedBoth,
    /// No interval could be formed (degenerate sample, or no candidate
    /// value passed the threshold); endpoints are NaN.
    #[serde(rename = "failed")]
    Failed,
}

impl std::fmt::Display for IntervalStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IntervalStatus::Ok => "ok",
            IntervalStatus::ClippedAtZero => "clipped-at-0",
            IntervalStatus::ClippedAtOne => "clipped-at-1",
            IntervalStatus::ClippedBoth => "clipped-both",
            IntervalStatus::Failed => "failed",
        })
    }
}

/// A two-sided confidence interval for the categorical Gini correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    /// Construction method.
    pub method: Method,
    /// Nominal coverage level, e.g. 0.95.
    pub level: f64,
    /// Lower endpoint (NaN when `status` is `Failed`).
    pub lower: f64,
    /// Upper endpoint (NaN when `status` is `Failed`).
    pub upper: f64,
    /// V-statistic point estimate.
    pub point: f64,
    /// U-statistic anchor of the empirical-likelihood statistics; `None`
    /// for the normal-approximation method.
    pub anchor: Option<f64>,
    /// Outcome.
    pub status: IntervalStatus,
    /// True when the below-threshold region was not contiguous on the
    /// search grid; the reported interval spans the outermost crossings.
    pub multimodal: bool,
    /// True when the anchor estimate is within `2/sqrt(n)` of zero, where
    /// the chi-square calibration of the empirical-likelihood statistics is
    /// unreliable (the population statistic is degenerate at independence).
    pub near_zero_warning: bool,
}

/// Confidence intervals for several methods from one shared set of cached
/// aggregates. The O(n^2) distance pass, pseudo-values, and depth weights
/// are each computed at most once.
pub fn confidence_intervals(
    sample: &LabeledSample,
    level: f64,
    methods: &[Method],
) -> Result<Vec<ConfidenceInterval>> {
    let summary = GmdSummary::compute(sample);
    let mut pv: Option<PseudoValueSet> = None;
    let mut weights: Option<WeightVector> = None;
    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let ci = match method {
            Method::Jv => jv_from_summary(sample, &summary, level)?,
            _ => {
                if pv.is_none() {
                    pv = Some(pseudo_values(sample, &summary)?);
                }
                if method == Method::Wjel && weights.is_none() {
                    weights = Some(spatial_depth_weights(sample));
                }
                el_from_parts(
                    sample.n(),
                    &summary,
                    pv.as_ref().unwrap(),
                    weights.as_ref(),
                    level,
                    method,
                )?
            }
        };
        out.push(ci);
    }
    Ok(out)
}

/// Empirical-likelihood confidence interval (JEL, AJEL, or WJEL): the set of
/// `rho` in `[0, 1]` whose calibrated statistic stays at or below the
/// chi-square(1) quantile of `level`.
pub fn el_interval(
    sample: &LabeledSample,
    level: f64,
    method: Method,
) -> Result<ConfidenceInterval> {
    if method == Method::Jv {
        return jv_interval(sample, level);
    }
    Ok(confidence_intervals(sample, level, &[method])?.pop().unwrap())
}

/// Normal-approximation interval: point estimate plus/minus the normal
/// quantile times the jackknife standard error, clipped to `[0, 1]`.
pub fn jv_interval(sample: &LabeledSample, level: f64) -> Result<ConfidenceInterval> {
    let summary = GmdSummary::compute(sample);
    jv_from_summary(sample, &summary, level)
}

fn check_level(level: f64, min: f64) -> Result<()> {
    if !(level > min && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    Ok(())
}

fn near_zero(anchor: f64, n: usize) -> bool {
    anchor < 2.0 / (n as f64).sqrt()
}

fn jv_from_summary(
    sample: &LabeledSample,
    summary: &GmdSummary,
    level: f64,
) -> Result<ConfidenceInterval> {
    check_level(level, 0.0)?;
    let point = summary.rho_v()?;
    let anchor = summary.rho_u()?;
    let jv = jackknife_variance_from_summary(sample, summary)?;
    let z = normal_quantile((1.0 + level) / 2.0)?;
    let half = z * jv.sigma2_hat.sqrt();
    let (raw_lower, raw_upper) = (point - half, point + half);
    let clip_low = raw_lower < 0.0;
    let clip_high = raw_upper > 1.0;
    let status = match (clip_low, clip_high) {
        (false, false) => IntervalStatus::Ok,
        (true, false) => IntervalStatus::ClippedAtZero,
        (false, true) => IntervalStatus::ClippedAtOne,
        (true, true) => IntervalStatus::ClippedBoth,
    };
    Ok(ConfidenceInterval {
        method: Method::Jv,
        level,
        lower: raw_lower.max(0.0),
        upper: raw_upper.min(1.0),
        point,
        anchor: None,
        status,
        multimodal: false,
        near_zero_warning: near_zero(anchor, sample.n()),
    })
}

fn el_from_parts(
    n: usize,
    summary: &GmdSummary,
    pv: &PseudoValueSet,
    weights: Option<&WeightVector>,
    level: f64,
    method: Method,
) -> Result<ConfidenceInterval> {
    check_level(level, 0.5)?;
    let threshold = chi2_quantile_1df(level)?;
    let failed = |point: f64, anchor: Option<f64>, warn: bool| ConfidenceInterval {
        method,
        level,
        lower: f64::NAN,
        upper: f64::NAN,
        point,
        anchor,
        status: IntervalStatus::Failed,
        multimodal: false,
        near_zero_warning: warn,
    };
    let (point, anchor) = match (summary.rho_v(), summary.rho_u()) {
        (Ok(point), Ok(anchor)) => (point, anchor),
        _ => return Ok(failed(f64::NAN, None, false)),
    };
    let a_n = default_adjustment(n);
    let stat_at = |rho: f64| -> f64 {
        match method {
            Method::Jel => jel_stat(pv, rho).stat,
            Method::Ajel => ajel_stat(pv, rho, a_n).stat,
            Method::Wjel => wjel_stat(pv, rho, weights.unwrap()).stat,
            Method::Jv => unreachable!("jv handled separately"),
        }
    };

    // Candidate grid: anchor plus 0.01 steps out to both domain edges, the
    // edges themselves, and (for the weighted statistic) the weighted root,
    // whose below-threshold region need not contain the unweighted anchor.
    let mut grid = vec![0.0, 1.0];
    let center = anchor.clamp(0.0, 1.0);
    grid.push(center);
    let mut k = 1;
    loop {
        let step = 0.01 * k as f64;
        let mut any = false;
        if center - step > 0.0 {
            grid.push(center - step);
            any = true;
        }
        if center + step < 1.0 {
            grid.push(center + step);
            any = true;
        }
        if !any {
            break;
        }
        k += 1;
    }
    if method == Method::Wjel {
        grid.push(pv.weighted_root(&weights.unwrap().w).clamp(0.0, 1.0));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let diffs: Vec<f64> = grid.iter().map(|&rho| stat_at(rho) - threshold).collect();
    let below: Vec<usize> = (0..grid.len()).filter(|&i| diffs[i] <= 0.0).collect();
    let (&jmin, &jmax) = match (below.first(), below.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(failed(point, Some(anchor), near_zero(anchor, n))),
    };
    let multimodal = below.len() != jmax - jmin + 1;

    let bisect = |mut outside: f64, mut inside: f64| -> f64 {
        while (inside - outside).abs() > 1e-10 {
            let mid = 0.5 * (outside + inside);
            if stat_at(mid) - threshold <= 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (outside + inside)
    };

    let (lower, clip_low) = if grid[jmin] <= 1e-9 {
        (0.0, true)
    } else {
        (bisect(grid[jmin - 1], grid[jmin]), false)
    };
    let (upper, clip_high) = if grid[jmax] >= 1.0 - 1e-9 {
        (1.0, true)
    } else {
        (bisect(grid[jmax + 1], grid[jmax]), false)
    };
    let status = match (clip_low, clip_high) {
        (false, false) => IntervalStatus::Ok,
        (true, false) => IntervalStatus::ClippedAtZero,
        (false, true) => IntervalStatus::ClippedAtOne,
        (true, true) => IntervalStatus::ClippedBoth,
    };
    Ok(ConfidenceInterval {
        method,
        level,
        lower,
        upper,
        point,
        anchor: Some(anchor),
        status,
        multimodal,
        near_zero_warning: near_zero(anchor, n),
    })
}
