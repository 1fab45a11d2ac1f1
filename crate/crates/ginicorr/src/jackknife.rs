//! Leave-one-out machinery: jackknife pseudo-values of the estimating
//! function in affine-in-rho form, and the jackknife variance of the point
//! estimator.
//!
//! Both constructions reuse the cached row sums from [`GmdSummary`], so the
//! whole leave-one-out pass costs O(n) on top of the O(n^2) distance pass.

use crate::error::{Error, Result};
use crate::gmd::{GmdSummary, LabeledSample};
use crate::numeric::{self, Neumaier};

/// Jackknife pseudo-values of the estimating function, stored in affine
/// form: `V_i(rho) = (1 - rho) * a_i - c_i`.
///
/// `a_i` is the leave-one-out pseudo-value of the pooled U-statistic mean
/// distance; `c_i` collects the class terms (with full-sample class
/// proportions held fixed). Keeping the affine representation lets interval
/// inversion re-evaluate the pseudo-values at many `rho` without touching
/// the data again.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoValueSet {
    /// Pseudo-values of the pooled mean distance; `mean(a)` equals the
    /// pooled U-statistic exactly.
    pub a: Vec<f64>,
    /// Constant terms; `mean(c)` equals the class-weighted within mean
    /// distance exactly.
    pub c: Vec<f64>,
}

impl PseudoValueSet {
    /// Number of observations.
    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Evaluates all pseudo-values at `rho`.
    pub fn values_at(&self, rho: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.fill_values_at(rho, &mut out);
        out
    }

    /// Evaluates all pseudo-values at `rho` into an existing buffer.
    pub fn fill_values_at(&self, rho: f64, out: &mut [f64]) {
        let s = 1.0 - rho;
        for ((o, &a), &c) in out.iter_mut().zip(&self.a).zip(&self.c) {
            *o = s * a - c;
        }
    }

    /// The `rho` at which the `weights`-weighted mean of the pseudo-values
    /// vanishes: `1 - (sum w_i c_i) / (sum w_i a_i)`. With uniform weights
    /// this is the U-statistic point estimate.
    pub fn weighted_root(&self, weights: &[f64]) -> f64 {
        let wa = numeric::sum(weights.iter().zip(&self.a).map(|(w, a)| w * a));
        let wc = numeric::sum(weights.iter().zip(&self.c).map(|(w, c)| w * c));
        1.0 - wc / wa
    }
}

/// Computes the jackknife pseudo-values of the estimating function.
///
/// Every class must have at least three observations so that each
/// leave-one-out class still defines a mean pairwise distance. Class
/// proportions stay fixed at their full-sample values inside the
/// leave-one-out terms; only the deleted class's mean distance changes.
pub fn pseudo_values(sample: &LabeledSample, summary: &GmdSummary) -> Result<PseudoValueSet> {
    sample.require_class_size(3)?;
    let n = sample.n();
    let nf = n as f64;
    let pairs_del = (nf - 1.0) * (nf - 2.0) / 2.0;
    let within = summary.within_u();
    let mut a = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        // Pooled mean distance with row i deleted, from cached row sums.
        let u_del = (summary.pair_sum - summary.row_sums[i]) / pairs_del;
        a.push(nf * summary.u_pooled - (nf - 1.0) * u_del);

        let k = sample.label(i);
        let m = sample.class_counts()[k] as f64;
        let class_pairs_del = (m - 1.0) * (m - 2.0) / 2.0;
        let uk_del =
            (summary.class_pair_sums[k] - summary.class_row_sums[i]) / class_pairs_del;
        let p_k = summary.p_hat[k];
        let others = within - p_k * summary.u_class[k];
        c.push(p_k * (nf * summary.u_class[k] - (nf - 1.0) * uk_del) + others);
    }
    Ok(PseudoValueSet { a, c })
}

/// Jackknife variance of the V-statistic point estimate, with the
/// leave-one-out replicates it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct JackknifeVariance {
    /// `((n-1)/n) * sum_i (replicate_i - mean)^2`.
    pub sigma2_hat: f64,
    /// Leave-one-out point estimates, in observation order.
    pub replicates: Vec<f64>,
}

/// Jackknife variance of the point estimator.
///
/// Unlike the pseudo-values, each replicate is the full point estimate of
/// the deleted sample: class proportions, class mean distances, and the
/// pooled mean distance are all recomputed on the n-1 remaining rows.
pub fn jackknife_variance(sample: &LabeledSample) -> Result<JackknifeVariance> {
    let summary = GmdSummary::compute(sample);
    jackknife_variance_from_summary(sample, &summary)
}

/// As [`jackknife_variance`], reusing an existing summary.
pub fn jackknife_variance_from_summary(
    sample: &LabeledSample,
    summary: &GmdSummary,
) -> Result<JackknifeVariance> {
    sample.require_class_size(3)?;
    let n = sample.n();
    let nf = n as f64;
    let n1 = nf - 1.0;
    let mut replicates = Vec::with_capacity(n);
    for i in 0..n {
        let v_del = (2.0 * summary.pair_sum - 2.0 * summary.row_sums[i]) / (n1 * n1);
        if v_del <= 0.0 {
            return Err(Error::DegenerateDeletion { row: i });
        }
        let k = sample.label(i);
        // sum_l p'_l v'_l over the deleted sample, where class k loses row i:
        // p'_l = m_l/(n-1), v'_l = 2 s_l / m_l^2, so each term is
        // 2 s_l / (m_l (n-1)) with post-deletion counts and pair sums.
        let mut within = Neumaier::new();
        for l in 0..sample.num_classes() {
            let (m_l, s_l) = if l == k {
                (
                    sample.class_counts()[l] as f64 - 1.0,
                    summary.class_pair_sums[l] - summary.class_row_sums[i],
                )
            } else {
                (
                    sample.class_counts()[l] as f64,
                    summary.class_pair_sums[l],
                )
            };
            within.add(2.0 * s_l / (m_l * n1));
        }
        replicates.push(1.0 - within.total() / v_del);
    }
    let mean = numeric::mean(&replicates);
    let mut acc = Neumaier::new();
    for &r in &replicates {
        let d = r - mean;
        acc.add(d * d);
    }
    Ok(JackknifeVariance {
        sigma2_hat: (n1 / nf) * acc.total(),
        replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmd;

    fn univariate(points: &[f64], labels: &[usize]) -> LabeledSample {
        LabeledSample::new(
            points.iter().map(|&v| vec![v]).collect(),
            labels.to_vec(),
        )
        .unwrap()
    }

    /// Naive leave-one-out evaluation of the estimating function on the
    /// deleted sample, with full-sample class proportions held fixed.
    fn naive_pseudo_value(sample: &LabeledSample, i: usize, rho: f64) -> f64 {
        let summary = GmdSummary::compute(sample);
        let n = sample.n() as f64;
        let w_full = summary.w_n(rho);

        let keep: Vec<usize> = (0..sample.n()).filter(|&j| j != i).collect();
        let pooled: Vec<Vec<f64>> = keep.iter().map(|&j| sample.row(j).to_vec()).collect();
        let u_del = gmd::gmd_u(&pooled).unwrap();
        let mut within = 0.0;
        for l in 0..sample.num_classes() {
            let members: Vec<Vec<f64>> = keep
                .iter()
                .filter(|&&j| sample.label(j) == l)
                .map(|&j| sample.row(j).to_vec())
                .collect();
            within += summary.p_hat[l] * gmd::gmd_u(&members).unwrap();
        }
        let w_del = u_del * (1.0 - rho) - within;
        n * w_full - (n - 1.0) * w_del
    }

    #[test]
    fn pseudo_values_match_naive_oracle() {
        let s = univariate(&[0.0, 2.0, 4.0, 10.0, 12.0, 14.0], &[0, 0, 0, 1, 1, 1]);
        let summary = GmdSummary::compute(&s);
        let pv = pseudo_values(&s, &summary).unwrap();
        for rho in [0.0, 0.7] {
            let values = pv.values_at(rho);
            for i in 0..s.n() {
                let naive = naive_pseudo_value(&s, i, rho);
                let scale = naive.abs().max(1.0);
                assert!(
                    (values[i] - naive).abs() < 1e-12 * scale,
                    "rho={rho} i={i}: {} vs naive {naive}",
                    values[i]
                );
            }
        }
    }

    #[test]
    fn mean_identities_hold() {
        let s = univariate(
            &[0.0, 1.0, 3.0, 7.5, 9.0, 10.5, 20.0, 22.0, 25.0],
            &[0, 0, 0, 1, 1, 1, 2, 2, 2],
        );
        let summary = GmdSummary::compute(&s);
        let pv = pseudo_values(&s, &summary).unwrap();
        let mean_a = crate::numeric::mean(&pv.a);
        let mean_c = crate::numeric::mean(&pv.c);
        assert!((mean_a - summary.u_pooled).abs() < 1e-12 * summary.u_pooled);
        assert!((mean_c - summary.within_u()).abs() < 1e-12 * summary.within_u());
        // Consequence: the mean pseudo-value at any rho equals W_n(rho).
        for rho in [0.0, 0.3, 0.9] {
            let mean_v = crate::numeric::mean(&pv.values_at(rho));
            assert!((mean_v - summary.w_n(rho)).abs() < 1e-12 * summary.u_pooled);
        }
        // Uniform-weight root is the U-statistic point estimate.
        let w = vec![1.0 / s.n() as f64; s.n()];
        assert!((pv.weighted_root(&w) - summary.rho_u().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn affine_representation_is_exact() {
        let s = univariate(&[0.0, 2.0, 4.0, 10.0, 12.0, 14.0], &[0, 0, 0, 1, 1, 1]);
        let summary = GmdSummary::compute(&s);
        let pv = pseudo_values(&s, &summary).unwrap();
        let values = pv.values_at(0.7);
        for i in 0..pv.n() {
            assert_eq!(values[i], (1.0 - 0.7) * pv.a[i] - pv.c[i]);
        }
    }

    #[test]
    fn pseudo_values_require_three_per_class() {
        let s = univariate(&[0.0, 1.0, 5.0, 6.0], &[0, 0, 1, 1]);
        let summary = GmdSummary::compute(&s);
        assert!(matches!(
            pseudo_values(&s, &summary),
            Err(Error::ClassTooSmallForJackknife { class: 0, count: 2 })
        ));
    }

    #[test]
    fn jackknife_variance_matches_naive_oracle() {
        let s = univariate(
            &[0.0, 1.0, 3.0, 7.5, 9.0, 10.5, 20.0, 22.0, 25.0],
            &[0, 0, 0, 1, 1, 1, 2, 2, 2],
        );
        let jv = jackknife_variance(&s).unwrap();
        let n = s.n();
        let mut naive = Vec::with_capacity(n);
        for i in 0..n {
            let rows: Vec<Vec<f64>> = (0..n)
                .filter(|&j| j != i)
                .map(|j| s.row(j).to_vec())
                .collect();
            let labels: Vec<usize> = (0..n).filter(|&j| j != i).map(|j| s.label(j)).collect();
            let deleted = LabeledSample::new(rows, labels).unwrap();
            naive.push(gmd::gini_correlation_point(&deleted).unwrap());
        }
        for i in 0..n {
            assert!(
                (jv.replicates[i] - naive[i]).abs() < 1e-12,
                "replicate {i}: {} vs naive {}",
                jv.replicates[i],
                naive[i]
            );
        }
        let mean = crate::numeric::mean(&naive);
        let nf = n as f64;
        let sigma2: f64 =
            (nf - 1.0) / nf * naive.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>();
        assert!((jv.sigma2_hat - sigma2).abs() < 1e-12 * sigma2.max(1e-300));
    }

    #[test]
    fn tight_classes_far_apart_give_tiny_variance() {
        let s = univariate(
            &[0.0, 0.001, 0.002, 100.0, 100.001, 100.002],
            &[0, 0, 0, 1, 1, 1],
        );
        let jv = jackknife_variance(&s).unwrap();
        assert!(jv.sigma2_hat >= 0.0);
        assert!(jv.sigma2_hat < 1e-6, "sigma2 = {}", jv.sigma2_hat);
    }

    #[test]
    fn degenerate_deletion_is_reported() {
        let s = univariate(&[5.0; 6], &[0, 0, 0, 1, 1, 1]);
        assert!(matches!(
            jackknife_variance(&s),
            Err(Error::DegenerateDeletion { row: 0 })
        ));
    }
}
