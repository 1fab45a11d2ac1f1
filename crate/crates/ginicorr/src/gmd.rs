//! Labeled samples, pairwise-distance aggregation, and the Gini-correlation
//! point estimators.
//!
//! For numeric observations X with class labels Y, the categorical Gini
//! correlation compares the within-class Gini mean differences (expected
//! pairwise Euclidean distances) to the pooled one:
//!
//! ```text
//! rho = 1 - (sum_k p_k * Delta_k) / Delta
//! ```
//!
//! Two plug-in estimators are provided: the V-statistic version (all ordered
//! pairs, the headline point estimate) and the U-statistic version (distinct
//! pairs, the anchor of the empirical-likelihood statistic).

use crate::error::{Error, Result};
use crate::numeric::{self, Neumaier};

/// A numeric sample with class labels: the input to every estimator.
///
/// Construction validates the invariants once; downstream code relies on
/// them. Labels are contiguous class indices `0..k` and every class must
/// contain at least two observations.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    x: Vec<f64>, // row-major n*d
    d: usize,
    y: Vec<usize>,
    class_counts: Vec<usize>,
    class_index: Vec<Vec<usize>>,
}

impl LabeledSample {
    /// Builds a sample from per-observation coordinate rows.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map(Vec::len).unwrap_or(0);
        let mut flat = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                    row: i,
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(flat, d, labels)
    }

    /// Builds a sample from a row-major flat buffer of `labels.len() * d`
    /// coordinates.
    pub fn from_flat(x: Vec<f64>, d: usize, labels: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        if d == 0 || x.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d.max(1),
                got: x.len(),
                row: 0,
            });
        }
        for (idx, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteCoordinate {
                    row: idx / d,
                    col: idx % d,
                });
            }
        }
        let k = labels.iter().copied().max().unwrap() + 1;
        if k < 2 {
            return Err(Error::TooFewClasses(k));
        }
        let mut class_index = vec![Vec::new(); k];
        for (i, &label) in labels.iter().enumerate() {
            class_index[label].push(i);
        }
        let class_counts: Vec<usize> = class_index.iter().map(Vec::len).collect();
        for (class, &count) in class_counts.iter().enumerate() {
            if count < 2 {
                return Err(Error::ClassTooSmall { class, count });
            }
        }
        Ok(Self {
            x,
            d,
            y: labels,
            class_counts,
            class_index,
        })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Coordinate dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of classes.
    pub fn num_classes(&self) -> usize {
        self.class_counts.len()
    }

    /// Class label of observation `i`.
    pub fn label(&self, i: usize) -> usize {
        self.y[i]
    }

    /// All labels, in observation order.
    pub fn labels(&self) -> &[usize] {
        &self.y
    }

    /// Coordinates of observation `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    /// Row-major coordinate buffer.
    pub fn coordinates(&self) -> &[f64] {
        &self.x
    }

    /// Per-class observation counts.
    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// Per-class lists of observation indices.
    pub fn class_index(&self) -> &[Vec<usize>] {
        &self.class_index
    }

    /// Sample class proportions `n_k / n`.
    pub fn p_hat(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.class_counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Errors unless every class has at least `min` observations.
    pub(crate) fn require_class_size(&self, min: usize) -> Result<()> {
        for (class, &count) in self.class_counts.iter().enumerate() {
            if count < min {
                return Err(Error::ClassTooSmallForJackknife { class, count });
            }
        }
        Ok(())
    }
}

/// Pooled and per-observation pairwise-distance sums.
///
/// Returns `(row_sums, class_row_sums)` where `row_sums[i]` is the distance
/// from observation `i` to every observation and `class_row_sums[i]`
/// restricts that to observations sharing `i`'s class. Accumulation order is
/// fixed (ascending index) so results are reproducible bit-for-bit on one
/// platform.
pub fn pairwise_row_sums(sample: &LabeledSample) -> (Vec<f64>, Vec<f64>) {
    let n = sample.n();
    let mut row_sums = vec![0.0; n];
    let mut class_row_sums = vec![0.0; n];
    for i in 0..n {
        let xi = sample.row(i);
        let yi = sample.label(i);
        let mut pooled = Neumaier::new();
        let mut within = Neumaier::new();
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = numeric::dist(xi, sample.row(j));
            pooled.add(d);
            if sample.label(j) == yi {
                within.add(d);
            }
        }
        row_sums[i] = pooled.total();
        class_row_sums[i] = within.total();
    }
    (row_sums, class_row_sums)
}

/// Cached pairwise-distance aggregates for one sample: the U- and
/// V-statistic Gini mean differences (pooled and per class), row sums, and
/// class proportions. Everything downstream (point estimates, jackknife,
/// empirical likelihood) is O(n) once this O(n^2) pass has run.
#[derive(Debug, Clone, PartialEq)]
pub struct GmdSummary {
    /// Pooled U-statistic mean distance.
    pub u_pooled: f64,
    /// Within-class U-statistic mean distances.
    pub u_class: Vec<f64>,
    /// Pooled V-statistic mean distance.
    pub v_pooled: f64,
    /// Within-class V-statistic mean distances.
    pub v_class: Vec<f64>,
    /// Distance from each observation to the whole sample.
    pub row_sums: Vec<f64>,
    /// Distance from each observation to its own class.
    pub class_row_sums: Vec<f64>,
    /// Class proportions.
    pub p_hat: Vec<f64>,
    /// Total distinct-pair distance sum, pooled.
    pub pair_sum: f64,
    /// Total distinct-pair distance sums per class.
    pub class_pair_sums: Vec<f64>,
}

impl GmdSummary {
    /// Runs the O(n^2) pairwise pass and derives every aggregate.
    pub fn compute(sample: &LabeledSample) -> Self {
        let n = sample.n();
        let k = sample.num_classes();
        let (row_sums, class_row_sums) = pairwise_row_sums(sample);
        // Each distinct pair appears in exactly two row sums.
        let pair_sum = numeric::sum(row_sums.iter().copied()) / 2.0;
        let mut class_pair_sums = vec![0.0; k];
        for (class, members) in sample.class_index().iter().enumerate() {
            class_pair_sums[class] =
                numeric::sum(members.iter().map(|&i| class_row_sums[i])) / 2.0;
        }
        let nf = n as f64;
        let u_pooled = pair_sum / (nf * (nf - 1.0) / 2.0);
        let v_pooled = 2.0 * pair_sum / (nf * nf);
        let mut u_class = vec![0.0; k];
        let mut v_class = vec![0.0; k];
        for class in 0..k {
            let m = sample.class_counts()[class] as f64;
            u_class[class] = class_pair_sums[class] / (m * (m - 1.0) / 2.0);
            v_class[class] = 2.0 * class_pair_sums[class] / (m * m);
        }
        Self {
            u_pooled,
            u_class,
            v_pooled,
            v_class,
            row_sums,
            class_row_sums,
            p_hat: sample.p_hat(),
            pair_sum,
            class_pair_sums,
        }
    }

    /// V-statistic point estimate `1 - sum_k p_k V_k / V`.
    pub fn rho_v(&self) -> Result<f64> {
        if self.v_pooled <= 0.0 {
            return Err(Error::DegenerateSample);
        }
        Ok(1.0 - self.within_v() / self.v_pooled)
    }

    /// U-statistic point estimate `1 - sum_k p_k U_k / U`; the unique root of
    /// [`GmdSummary::w_n`].
    pub fn rho_u(&self) -> Result<f64> {
        if self.u_pooled <= 0.0 {
            return Err(Error::DegenerateSample);
        }
        Ok(1.0 - self.within_u() / self.u_pooled)
    }

    /// V-statistic Gini covariance `V - sum_k p_k V_k` (the between-class
    /// part of the pooled variability).
    pub fn gcov_v(&self) -> f64 {
        self.v_pooled - self.within_v()
    }

    /// Estimating function `W_n(rho) = U * (1 - rho) - sum_k p_k U_k`,
    /// linear and decreasing in `rho`.
    pub fn w_n(&self, rho: f64) -> f64 {
        self.u_pooled * (1.0 - rho) - self.within_u()
    }

    /// `sum_k p_k U_k`.
    pub fn within_u(&self) -> f64 {
        numeric::sum(
            self.p_hat
                .iter()
                .zip(&self.u_class)
                .map(|(p, u)| p * u),
        )
    }

    fn within_v(&self) -> f64 {
        numeric::sum(
            self.p_hat
                .iter()
                .zip(&self.v_class)
                .map(|(p, v)| p * v),
        )
    }
}

/// U-statistic Gini mean difference of a plain point set: the average
/// Euclidean distance over distinct pairs.
pub fn gmd_u<R: AsRef<[f64]>>(points: &[R]) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    let d = points[0].as_ref().len();
    let mut acc = Neumaier::new();
    for i in 0..n {
        let a = points[i].as_ref();
        if a.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.len(),
                row: i,
            });
        }
        for j in (i + 1)..n {
            acc.add(numeric::dist(a, points[j].as_ref()));
        }
    }
    let nf = n as f64;
    Ok(acc.total() / (nf * (nf - 1.0) / 2.0))
}

/// V-statistic point estimate of the categorical Gini correlation — the
/// value reported to users.
pub fn gini_correlation_point(sample: &LabeledSample) -> Result<f64> {
    GmdSummary::compute(sample).rho_v()
}

/// U-statistic point estimate — the empirical-likelihood anchor.
pub fn gini_correlation_point_u(sample: &LabeledSample) -> Result<f64> {
    GmdSummary::compute(sample).rho_u()
}

/// Estimating function `W_n` evaluated at `rho`.
pub fn w_n(sample: &LabeledSample, rho: f64) -> f64 {
    GmdSummary::compute(sample).w_n(rho)
}
