//! Empirical-likelihood inner solve: the Lagrange-multiplier score equation,
//! the calibrated log-likelihood-ratio statistics (standard, adjusted, and
//! weighted), and spatial-depth observation weights.
//!
//! For pseudo-values `v_1..v_n` and probability weights `w_1..w_n`, the
//! multiplier solves the score equation
//!
//! ```text
//! sum_i w_i * v_i / (1 + lambda * v_i) = 0
//! ```
//!
//! on the feasibility interval `(-1/max(v), -1/min(v))`, where the score is
//! strictly decreasing, so the root is unique when the values straddle zero.

use crate::error::{Error, Result};
use crate::gmd::LabeledSample;
use crate::jackknife::PseudoValueSet;
use crate::numeric::{self, Neumaier};

/// Outcome of the multiplier solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElStatus {
    /// Score driven below the tolerance.
    Converged,
    /// The bracketing interval collapsed before the score tolerance was met;
    /// the root sits essentially on the feasibility boundary.
    AtBoundary,
    /// All values on one side of zero: the mean-zero constraint is
    /// infeasible and the statistic is `+inf`.
    NoSolution,
}

/// One evaluation of an empirical-likelihood statistic at a candidate `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElEvaluation {
    /// The candidate value the statistic was evaluated at.
    pub rho: f64,
    /// Lagrange multiplier solving the score equation (0 when the values
    /// already average to zero).
    pub lambda: f64,
    /// Calibrated statistic, compared against a chi-square(1) quantile;
    /// `+inf` when the constraint is infeasible.
    pub stat: f64,
    /// Solver iterations used.
    pub iterations: usize,
    /// Solver outcome.
    pub status: ElStatus,
}

/// Result of [`solve_lambda`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSolution {
    /// The multiplier (meaningful unless status is `NoSolution`).
    pub lambda: f64,
    /// Iterations used.
    pub iterations: usize,
    /// Outcome.
    pub status: ElStatus,
}

/// Nonnegative observation weights summing to one, plus the Wilks scaling
/// constant `c_factor = n * sum_i w_i^2` used to calibrate the weighted
/// statistic (1 for uniform weights).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    /// The weights.
    pub w: Vec<f64>,
    /// `n * sum w_i^2`.
    pub c_factor: f64,
    /// True when the weights fell back to uniform because every observation
    /// was identical (depth is uninformative there).
    pub fallback_uniform: bool,
}

impl WeightVector {
    /// Validates and normalizes raw weights: all entries must be
    /// nonnegative and sum to 1 within 1e-12 (the sum is then normalized
    /// away exactly).
    pub fn new(mut w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidParameter {
                name: "weights",
                message: "empty weight vector".into(),
            });
        }
        let mut total = Neumaier::new();
        for (i, &wi) in w.iter().enumerate() {
            if !(wi >= 0.0) || !wi.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "weights",
                    message: format!("weight {i} is {wi}; weights must be finite and >= 0"),
                });
            }
            total.add(wi);
        }
        let sum = total.total();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "weights",
                message: format!("weights sum to {sum}, expected 1"),
            });
        }
        for wi in &mut w {
            *wi /= sum;
        }
        let n = w.len() as f64;
        let c_factor = n * numeric::sum(w.iter().map(|&wi| wi * wi));
        Ok(Self {
            w,
            c_factor,
            fallback_uniform: false,
        })
    }

    /// Uniform weights `1/n` with `c_factor = 1`.
    pub fn uniform(n: usize) -> Self {
        Self {
            w: vec![1.0 / n as f64; n],
            c_factor: 1.0,
            fallback_uniform: false,
        }
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.w.len()
    }
}

const SCORE_TOL: f64 = 1e-10;
const MAX_ITER: usize = 100;

fn weighted_score(values: &[f64], weights: &[f64], lambda: f64) -> (f64, f64) {
    let mut s = Neumaier::new();
    let mut d = Neumaier::new();
    for (&v, &w) in values.iter().zip(weights) {
        let denom = 1.0 + lambda * v;
        let t = w * v / denom;
        s.add(t);
        d.add(-t * v / denom);
    }
    (s.total(), d.total())
}

/// Solves the weighted score equation for the Lagrange multiplier.
///
/// `weights` must be nonnegative and sum to one (use 1/n for the unweighted
/// statistics). Newton iteration from 0 with a maintained bisection bracket;
/// converged when `|score| < 1e-10`. Returns `NoSolution` when the values do
/// not straddle zero, and `AtBoundary` when the bracket collapses (width
/// below 1e-14 relative) before the score tolerance is met.
pub fn solve_lambda(values: &[f64], weights: &[f64]) -> LambdaSolution {
    debug_assert_eq!(values.len(), weights.len());
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for &v in values {
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    if vmin == 0.0 && vmax == 0.0 {
        return LambdaSolution {
            lambda: 0.0,
            iterations: 0,
            status: ElStatus::Converged,
        };
    }
    if vmin >= 0.0 || vmax <= 0.0 {
        return LambdaSolution {
            lambda: 0.0,
            iterations: 0,
            status: ElStatus::NoSolution,
        };
    }
    // Already balanced: the root is 0 up to rounding noise.
    let wmean = numeric::sum(values.iter().zip(weights).map(|(&v, &w)| w * v));
    let wabs = numeric::sum(values.iter().zip(weights).map(|(&v, &w)| w * v.abs()));
    if wmean.abs() <= 1e-13 * wabs {
        return LambdaSolution {
            lambda: 0.0,
            iterations: 0,
            status: ElStatus::Converged,
        };
    }
    // Feasibility interval, each endpoint pulled inward by a relative margin
    // so the logs stay finite even for a root hugging one side.
    let mut lo = (-1.0 / vmax) * (1.0 - 1e-10);
    let mut hi = (-1.0 / vmin) * (1.0 - 1e-10);
    let mut lambda = 0.0;
    for iterations in 1..=MAX_ITER {
        let (s, d) = weighted_score(values, weights, lambda);
        if s.abs() < SCORE_TOL {
            return LambdaSolution {
                lambda,
                iterations,
                status: ElStatus::Converged,
            };
        }
        // The score decreases in lambda, so its sign places the root.
        if s > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let newton = lambda - s / d;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-14 * lo.abs().max(hi.abs()).max(1.0) {
            return LambdaSolution {
                lambda: next,
                iterations,
                status: ElStatus::AtBoundary,
            };
        }
        lambda = next;
    }
    LambdaSolution {
        lambda,
        iterations: MAX_ITER,
        status: ElStatus::AtBoundary,
    }
}

fn log_ratio_sum(values: &[f64], lambda: f64) -> f64 {
    let mut acc = Neumaier::new();
    for &v in values {
        acc.add((lambda * v).ln_1p());
    }
    acc.total()
}

fn evaluate_uniform(rho: f64, values: &[f64]) -> ElEvaluation {
    let n = values.len();
    let weights = vec![1.0 / n as f64; n];
    let sol = solve_lambda(values, &weights);
    let stat = match sol.status {
        ElStatus::NoSolution => f64::INFINITY,
        _ => (2.0 * log_ratio_sum(values, sol.lambda)).max(0.0),
    };
    ElEvaluation {
        rho,
        lambda: sol.lambda,
        stat,
        iterations: sol.iterations,
        status: sol.status,
    }
}

/// Jackknife empirical-likelihood statistic `-2 log R(rho)`, calibrated
/// against chi-square(1).
pub fn jel_stat(pv: &PseudoValueSet, rho: f64) -> ElEvaluation {
    evaluate_uniform(rho, &pv.values_at(rho))
}

/// Default adjustment constant for the adjusted statistic:
/// `max(1, ln(n)/2)`.
pub fn default_adjustment(n: usize) -> f64 {
    ((n as f64).ln() / 2.0).max(1.0)
}

/// Adjusted jackknife empirical-likelihood statistic: appends the artificial
/// pseudo-value `-(a_n/n) * sum_i v_i`, which sits on the opposite side of
/// zero from the sample mean, then runs the (n+1)-point solve. This keeps
/// the constraint feasible at every `rho`.
pub fn ajel_stat(pv: &PseudoValueSet, rho: f64, a_n: f64) -> ElEvaluation {
    let mut values = pv.values_at(rho);
    let mean = numeric::mean(&values);
    values.push(-a_n * mean);
    evaluate_uniform(rho, &values)
}

/// Spatial-depth weights on the pooled coordinates, ignoring labels.
///
/// The depth of `x` is `1 - || mean_j unit(x - X_j) ||`, with the `0/0`
/// self-term taken as the zero vector. Weights are depths normalized to sum
/// one. When every observation is identical the depth carries no
/// information and the result is uniform with `fallback_uniform` set.
pub fn spatial_depth_weights(sample: &LabeledSample) -> WeightVector {
    let n = sample.n();
    let d = sample.dim();
    let nf = n as f64;
    let mut depths = vec![0.0; n];
    let mut any_distinct = false;
    let mut grad = vec![0.0; d];
    for i in 0..n {
        let xi = sample.row(i);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for j in 0..n {
            let xj = sample.row(j);
            let dist = numeric::dist(xi, xj);
            if dist > 0.0 {
                any_distinct = true;
                for (g, (a, b)) in grad.iter_mut().zip(xi.iter().zip(xj)) {
                    *g += (a - b) / dist;
                }
            }
        }
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt() / nf;
        depths[i] = 1.0 - norm;
    }
    if !any_distinct {
        let mut w = WeightVector::uniform(n);
        w.fallback_uniform = true;
        return w;
    }
    let total = numeric::sum(depths.iter().copied());
    let w: Vec<f64> = depths.iter().map(|&dep| dep / total).collect();
    let c_factor = nf * numeric::sum(w.iter().map(|&wi| wi * wi));
    WeightVector {
        w,
        c_factor,
        fallback_uniform: false,
    }
}

/// Weighted jackknife empirical-likelihood statistic
/// `l(rho) / (n * sum w_i^2)`, calibrated against chi-square(1). With
/// uniform weights this is exactly [`jel_stat`].
pub fn wjel_stat(pv: &PseudoValueSet, rho: f64, weights: &WeightVector) -> ElEvaluation {
    let values = pv.values_at(rho);
    let n = values.len() as f64;
    let sol = solve_lambda(&values, &weights.w);
    let stat = match sol.status {
        ElStatus::NoSolution => f64::INFINITY,
        _ => {
            let weighted_log = numeric::sum(
                values
                    .iter()
                    .zip(&weights.w)
                    .map(|(&v, &w)| w * (sol.lambda * v).ln_1p()),
            );
            (2.0 * n * weighted_log / weights.c_factor).max(0.0)
        }
    };
    ElEvaluation {
        rho,
        lambda: sol.lambda,
        stat,
        iterations: sol.iterations,
        status: sol.status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmd::GmdSummary;
    use crate::jackknife::pseudo_values;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn symmetric_pair_gives_zero() {
        let sol = solve_lambda(&[-1.0, 1.0], &uniform(2));
        assert_eq!(sol.lambda, 0.0);
        assert_eq!(sol.status, ElStatus::Converged);
    }

    #[test]
    fn two_value_closed_form() {
        // (-1)/(1 - lambda) + 2/(1 + 2 lambda) = 0  =>  lambda = 1/4.
        let sol = solve_lambda(&[-1.0, 2.0], &uniform(2));
        assert_eq!(sol.status, ElStatus::Converged);
        assert!((sol.lambda - 0.25).abs() < 1e-10, "lambda = {}", sol.lambda);
        let (score, _) = super::weighted_score(&[-1.0, 2.0], &uniform(2), sol.lambda);
        assert!(score.abs() < 1e-10);
    }

    #[test]
    fn one_sided_values_are_infeasible() {
        let sol = solve_lambda(&[0.5, 1.0, 2.0], &uniform(3));
        assert_eq!(sol.status, ElStatus::NoSolution);
        let sol = solve_lambda(&[-0.5, -1.0, 0.0], &uniform(3));
        assert_eq!(sol.status, ElStatus::NoSolution);
    }

    #[test]
    fn zero_vector_is_trivial() {
        let sol = solve_lambda(&[0.0, 0.0, 0.0], &uniform(3));
        assert_eq!(sol.lambda, 0.0);
        assert_eq!(sol.status, ElStatus::Converged);
    }

    #[test]
    fn solver_stays_feasible_and_accurate() {
        // A root very close to the feasibility boundary: one large positive
        // value, several small negatives.
        let values = [-0.01, -0.02, -0.015, 5.0];
        let w = uniform(4);
        let sol = solve_lambda(&values, &w);
        assert_eq!(sol.status, ElStatus::Converged);
        for &v in &values {
            assert!(1.0 + sol.lambda * v > 0.0);
        }
        let (score, _) = super::weighted_score(&values, &w, sol.lambda);
        assert!(score.abs() < 1e-10);
    }

    fn demo_pv() -> (PseudoValueSet, GmdSummary) {
        let sample = LabeledSample::new(
            vec![
                vec![0.0],
                vec![2.0],
                vec![4.0],
                vec![10.0],
                vec![12.0],
                vec![14.0],
            ],
            vec![0, 0, 0, 1, 1, 1],
        )
        .unwrap();
        let summary = GmdSummary::compute(&sample);
        let pv = pseudo_values(&sample, &summary).unwrap();
        (pv, summary)
    }

    #[test]
    fn jel_is_zero_at_anchor() {
        let (pv, summary) = demo_pv();
        let anchor = summary.rho_u().unwrap();
        let eval = jel_stat(&pv, anchor);
        assert_eq!(eval.lambda, 0.0);
        assert_eq!(eval.stat, 0.0);
        assert_eq!(eval.status, ElStatus::Converged);
    }

    #[test]
    fn jel_matches_quadratic_expansion_near_anchor() {
        let (pv, summary) = demo_pv();
        let anchor = summary.rho_u().unwrap();
        let n = pv.n() as f64;
        for rho in [anchor - 1e-3, anchor + 1e-3] {
            let values = pv.values_at(rho);
            let mean = crate::numeric::mean(&values);
            let var = crate::numeric::mean(
                &values.iter().map(|v| (v - mean) * (v - mean)).collect::<Vec<_>>(),
            );
            let quad = n * mean * mean / var;
            let eval = jel_stat(&pv, rho);
            assert!(eval.stat > 0.0);
            assert!(
                (eval.stat - quad).abs() < 0.05 * quad,
                "rho {rho}: stat {} vs quadratic {quad}",
                eval.stat
            );
        }
    }

    #[test]
    fn jel_stat_is_scale_invariant() {
        let rows = vec![
            vec![0.3],
            vec![1.9],
            vec![4.2],
            vec![9.5],
            vec![12.0],
            vec![15.1],
        ];
        let labels = vec![0, 0, 0, 1, 1, 1];
        let s1 = LabeledSample::new(rows.clone(), labels.clone()).unwrap();
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v * 3.7).collect())
            .collect();
        let s2 = LabeledSample::new(scaled, labels).unwrap();
        let pv1 = pseudo_values(&s1, &GmdSummary::compute(&s1)).unwrap();
        let pv2 = pseudo_values(&s2, &GmdSummary::compute(&s2)).unwrap();
        for rho in [0.2, 0.6, 0.85] {
            let e1 = jel_stat(&pv1, rho);
            let e2 = jel_stat(&pv2, rho);
            assert!(
                (e1.stat - e2.stat).abs() < 1e-8 * e1.stat.max(1.0),
                "rho {rho}: {} vs {}",
                e1.stat,
                e2.stat
            );
        }
    }

    #[test]
    fn infeasible_rho_gives_infinite_stat() {
        let (pv, _) = demo_pv();
        // Far outside [0, 1]: every pseudo-value has the same sign.
        let eval = jel_stat(&pv, -30.0);
        assert_eq!(eval.status, ElStatus::NoSolution);
        assert!(eval.stat.is_infinite());
    }

    #[test]
    fn ajel_matches_direct_three_point_solve() {
        // Synthetic pseudo-values: at rho = 0, values are exactly (-1, 2).
        let pv = PseudoValueSet {
            a: vec![-1.0, 2.0],
            c: vec![0.0, 0.0],
        };
        let eval = ajel_stat(&pv, 0.0, 1.0);
        // mean = 0.5, so the augmented set is (-1, 2, -0.5).
        let augmented = [-1.0, 2.0, -0.5];
        let sol = solve_lambda(&augmented, &uniform(3));
        assert!((eval.lambda - sol.lambda).abs() < 1e-12);
        let direct = 2.0 * super::log_ratio_sum(&augmented, sol.lambda);
        assert!((eval.stat - direct).abs() < 1e-12 * direct.max(1.0));
    }

    #[test]
    fn ajel_never_exceeds_jel_on_grid() {
        let (pv, _) = demo_pv();
        let a_n = default_adjustment(pv.n());
        for step in 0..=20 {
            let rho = step as f64 / 20.0;
            let j = jel_stat(&pv, rho);
            let a = ajel_stat(&pv, rho, a_n);
            if j.stat.is_finite() {
                assert!(
                    a.stat <= j.stat + 1e-9,
                    "rho {rho}: ajel {} > jel {}",
                    a.stat,
                    j.stat
                );
            }
        }
    }

    #[test]
    fn ajel_preserves_anchor() {
        let (pv, summary) = demo_pv();
        let anchor = summary.rho_u().unwrap();
        let eval = ajel_stat(&pv, anchor, default_adjustment(pv.n()));
        assert_eq!(eval.stat, 0.0);
    }

    #[test]
    fn depth_weights_match_hand_values() {
        // {-1, 0, 1} doubled (the constructor needs two classes of two or
        // more). Duplicates contribute zero unit vectors, so the sign sums
        // are (-4, 0, 4, -4, 0, 4)/6, depths (1/3, 1, 1/3, 1/3, 1, 1/3), and
        // weights keep the 1:3:1 depth ratio of the underlying point set.
        let s = LabeledSample::new(
            vec![vec![-1.0], vec![0.0], vec![1.0], vec![-1.0], vec![0.0], vec![1.0]],
            vec![0, 0, 0, 1, 1, 1],
        )
        .unwrap();
        let w = spatial_depth_weights(&s);
        let expect = [0.1, 0.3, 0.1, 0.1, 0.3, 0.1];
        for (got, want) in w.w.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "weights {:?}", w.w);
        }
        assert!(!w.fallback_uniform);
        let c_hand = 6.0 * expect.iter().map(|x| x * x).sum::<f64>();
        assert!((w.c_factor - c_hand).abs() < 1e-12);
    }

    #[test]
    fn equilateral_triangle_weights_are_equal() {
        // Two copies of an equilateral triangle (classes need >= 2 points);
        // symmetry still forces equal weights.
        let h = 3f64.sqrt() / 2.0;
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.5, h]];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, p) in tri.iter().enumerate() {
            rows.push(p.to_vec());
            labels.push(if i < 2 { 0 } else { 1 });
        }
        for (i, p) in tri.iter().enumerate() {
            rows.push(p.to_vec());
            labels.push(if i < 1 { 0 } else { 1 });
        }
        let s = LabeledSample::new(rows, labels).unwrap();
        let w = spatial_depth_weights(&s);
        for &wi in &w.w {
            assert!((wi - 1.0 / 6.0).abs() < 1e-12, "weights {:?}", w.w);
        }
    }

    #[test]
    fn identical_points_fall_back_to_uniform() {
        let s = LabeledSample::new(vec![vec![3.0]; 6], vec![0, 0, 0, 1, 1, 1]).unwrap();
        let w = spatial_depth_weights(&s);
        assert!(w.fallback_uniform);
        for &wi in &w.w {
            assert_eq!(wi, 1.0 / 6.0);
        }
        assert_eq!(w.c_factor, 1.0);
    }

    #[test]
    fn wjel_with_uniform_weights_is_jel() {
        let (pv, _) = demo_pv();
        let w = WeightVector::uniform(pv.n());
        for step in 0..=10 {
            let rho = step as f64 / 10.0;
            let j = jel_stat(&pv, rho);
            let wj = wjel_stat(&pv, rho, &w);
            if j.stat.is_finite() {
                assert!((j.stat - wj.stat).abs() < 1e-12 * j.stat.max(1.0));
                assert!((j.lambda - wj.lambda).abs() < 1e-12 * j.lambda.abs().max(1.0));
            } else {
                assert!(wj.stat.is_infinite());
            }
        }
    }

    #[test]
    fn wjel_zero_at_weighted_anchor() {
        let (pv, _) = demo_pv();
        let mut w = WeightVector::uniform(pv.n());
        // Tilt the weights, renormalize, and evaluate at the weighted root.
        w.w[0] *= 2.0;
        let total: f64 = w.w.iter().sum();
        let w = WeightVector::new(w.w.iter().map(|x| x / total).collect()).unwrap();
        let anchor = pv.weighted_root(&w.w);
        let eval = wjel_stat(&pv, anchor, &w);
        assert!(eval.stat < 1e-18, "stat = {}", eval.stat);
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![]).is_err());
        assert!(WeightVector::new(vec![0.5, -0.1, 0.6]).is_err());
        assert!(WeightVector::new(vec![0.5, 0.4]).is_err());
        let w = WeightVector::new(vec![0.25; 4]).unwrap();
        assert!((w.c_factor - 1.0).abs() < 1e-15);
    }

    #[test]
    fn default_adjustment_values() {
        assert_eq!(default_adjustment(2), 1.0);
        let n = 200;
        assert!((default_adjustment(n) - (n as f64).ln() / 2.0).abs() < 1e-15);
    }
}
