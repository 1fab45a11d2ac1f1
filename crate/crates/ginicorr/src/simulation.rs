//! Mixture scenarios, seeded sampling, and the coverage-study runner.
//!
//! A [`Scenario`] is a finite mixture: class `k` occurs with probability
//! `weight_k` and its coordinates follow the component distribution.
//! [`coverage_study`] repeatedly samples a scenario, builds confidence
//! intervals with the requested methods, and reports how often they cover a
//! supplied population value, batching replications the way large
//! simulation studies report their Monte Carlo standard deviations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmd::LabeledSample;
use crate::intervals::{confidence_intervals, IntervalStatus, Method};
use crate::numeric;

/// How the RNG is wired, recorded in every report for reproducibility.
pub const RNG_DESCRIPTION: &str = "chacha12; 64-bit seed; one stream per replication";

/// One mixture component's coordinate distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ComponentDist {
    /// Univariate normal with the given mean and standard deviation.
    Normal { mean: f64, sd: f64 },
    /// Univariate exponential with the given mean.
    Exponential { mean: f64 },
    /// Multivariate normal with covariance `cov_scale * I`.
    MultiNormal { mean: Vec<f64>, cov_scale: f64 },
    /// Independent exponential coordinates with the given means.
    MultiExponential { means: Vec<f64> },
}

impl ComponentDist {
    /// Coordinate dimension.
    pub fn dim(&self) -> usize {
        match self {
            ComponentDist::Normal { .. } | ComponentDist::Exponential { .. } => 1,
            ComponentDist::MultiNormal { mean, .. } => mean.len(),
            ComponentDist::MultiExponential { means } => means.len(),
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |message: String| {
            Err(Error::InvalidScenario(format!("component {index}: {message}")))
        };
        match self {
            ComponentDist::Normal { mean, sd } => {
                if !mean.is_finite() || !sd.is_finite() || *sd <= 0.0 {
                    return bad(format!("normal(mean={mean}, sd={sd}) needs finite mean, sd > 0"));
                }
            }
            ComponentDist::Exponential { mean } => {
                if !mean.is_finite() || *mean <= 0.0 {
                    return bad(format!("exponential(mean={mean}) needs mean > 0"));
                }
            }
            ComponentDist::MultiNormal { mean, cov_scale } => {
                if mean.is_empty() || mean.iter().any(|m| !m.is_finite()) {
                    return bad("multi_normal mean vector must be nonempty and finite".into());
                }
                if !cov_scale.is_finite() || *cov_scale <= 0.0 {
                    return bad(format!("multi_normal cov_scale={cov_scale} must be > 0"));
                }
            }
            ComponentDist::MultiExponential { means } => {
                if means.is_empty() || means.iter().any(|m| !m.is_finite() || *m <= 0.0) {
                    return bad("multi_exponential means must be nonempty and > 0".into());
                }
            }
        }
        Ok(())
    }
}

/// A weighted mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// Class probability.
    pub weight: f64,
    /// Coordinate distribution.
    #[serde(flatten)]
    pub dist: ComponentDist,
}

/// A mixture scenario: the joint law of (X, Y) the study samples from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Name used in reports.
    #[serde(default)]
    pub id: String,
    /// Mixture components, one per class.
    pub components: Vec<Component>,
}

impl Scenario {
    /// Number of classes.
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    /// Coordinate dimension.
    pub fn dim(&self) -> usize {
        self.components.first().map(|c| c.dist.dim()).unwrap_or(0)
    }

    /// Class probabilities.
    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    /// Checks weights (positive, summing to 1 within 1e-9), dimensions
    /// (all equal), and per-component parameter domains.
    pub fn validate(&self) -> Result<()> {
        if self.components.len() < 2 {
            return Err(Error::InvalidScenario(format!(
                "{} components; a scenario needs at least 2 classes",
                self.components.len()
            )));
        }
        let d = self.dim();
        let mut total = 0.0;
        for (i, comp) in self.components.iter().enumerate() {
            if !comp.weight.is_finite() || comp.weight <= 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "component {i}: weight {} must be > 0",
                    comp.weight
                )));
            }
            total += comp.weight;
            if comp.dist.dim() != d {
                return Err(Error::InvalidScenario(format!(
                    "component {i} has dimension {}, component 0 has {d}",
                    comp.dist.dim()
                )));
            }
            comp.dist.validate(i)?;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidScenario(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(())
    }
}

/// How class sizes are assigned in a sampled dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Allocation {
    /// Class labels drawn independently per row (class sizes multinomial),
    /// matching a draw from the joint distribution of (X, Y).
    #[default]
    Multinomial,
    /// Class sizes fixed at the largest-remainder rounding of `n * weight`.
    Fixed,
}

impl std::str::FromStr for Allocation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "multinomial" => Ok(Allocation::Multinomial),
            "fixed" => Ok(Allocation::Fixed),
            other => Err(Error::InvalidParameter {
                name: "allocation",
                message: format!("unknown allocation '{other}' (expected multinomial or fixed)"),
            }),
        }
    }
}

const MIN_CLASS: usize = 3;
const MAX_LABEL_ATTEMPTS: usize = 100;

fn class_counts(labels: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0usize; k];
    for &label in labels {
        counts[label] += 1;
    }
    counts
}

fn draw_labels<R: Rng + ?Sized>(
    weights: &[f64],
    n: usize,
    rng: &mut R,
    allocation: Allocation,
) -> Result<Vec<usize>> {
    let k = weights.len();
    match allocation {
        Allocation::Multinomial => {
            for attempt in 1..=MAX_LABEL_ATTEMPTS {
                let labels: Vec<usize> = (0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        let mut acc = 0.0;
                        for (class, &w) in weights.iter().enumerate() {
                            acc += w;
                            if u < acc {
                                return class;
                            }
                        }
                        k - 1
                    })
                    .collect();
                let counts = class_counts(&labels, k);
                match counts.iter().position(|&c| c < MIN_CLASS) {
                    None => return Ok(labels),
                    Some(class) => {
                        if attempt == MAX_LABEL_ATTEMPTS {
                            return Err(Error::AllocationFailed {
                                class,
                                attempts: attempt,
                            });
                        }
                    }
                }
            }
            unreachable!("loop always returns")
        }
        Allocation::Fixed => {
            let counts = largest_remainder(weights, n);
            if let Some(class) = counts.iter().position(|&c| c < MIN_CLASS) {
                return Err(Error::AllocationFailed { class, attempts: 1 });
            }
            let mut labels = Vec::with_capacity(n);
            for (class, &count) in counts.iter().enumerate() {
                labels.extend(std::iter::repeat(class).take(count));
            }
            Ok(labels)
        }
    }
}

/// Largest-remainder rounding of `n * weights` to integer counts summing
/// to `n` (ties broken by class index).
pub fn largest_remainder(weights: &[f64], n: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = Vec::with_capacity(weights.len());
    let mut fractions: Vec<(usize, f64)> = Vec::with_capacity(weights.len());
    let mut assigned = 0usize;
    for (class, &w) in weights.iter().enumerate() {
        let exact = w * n as f64;
        let base = exact.floor() as usize;
        counts.push(base);
        assigned += base;
        fractions.push((class, exact - base as f64));
    }
    fractions.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for &(class, _) in fractions.iter().take(n - assigned) {
        counts[class] += 1;
    }
    counts
}

enum Sampler {
    Normal(Normal<f64>),
    Exponential(Exp<f64>),
    MultiNormal { mean: Vec<f64>, sd: f64 },
    MultiExponential(Vec<Exp<f64>>),
}

impl Sampler {
    fn build(dist: &ComponentDist) -> Self {
        match dist {
            ComponentDist::Normal { mean, sd } => Sampler::Normal(Normal::new(*mean, *sd).unwrap()),
            ComponentDist::Exponential { mean } => {
                Sampler::Exponential(Exp::new(1.0 / mean).unwrap())
            }
            ComponentDist::MultiNormal { mean, cov_scale } => Sampler::MultiNormal {
                mean: mean.clone(),
                sd: cov_scale.sqrt(),
            },
            ComponentDist::MultiExponential { means } => Sampler::MultiExponential(
                means.iter().map(|m| Exp::new(1.0 / m).unwrap()).collect(),
            ),
        }
    }

    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            Sampler::Normal(dist) => out.push(dist.sample(rng)),
            Sampler::Exponential(dist) => out.push(dist.sample(rng)),
            Sampler::MultiNormal { mean, sd } => {
                for &m in mean {
                    let z: f64 = StandardNormal.sample(rng);
                    out.push(m + sd * z);
                }
            }
            Sampler::MultiExponential(dists) => {
                for dist in dists {
                    out.push(dist.sample(rng));
                }
            }
        }
    }
}

/// Draws one labeled sample of size `n` from the scenario with multinomial
/// class sizes. Deterministic given the generator state.
pub fn sample_scenario<R: Rng + ?Sized>(
    scenario: &Scenario,
    n: usize,
    rng: &mut R,
) -> Result<LabeledSample> {
    sample_scenario_with(scenario, n, rng, Allocation::Multinomial)
}

/// As [`sample_scenario`] with an explicit allocation mode.
///
/// Multinomial label draws are redrawn (up to 100 attempts) until every
/// class has at least three observations, so downstream jackknife
/// machinery always applies; persistent shortfalls error out.
pub fn sample_scenario_with<R: Rng + ?Sized>(
    scenario: &Scenario,
    n: usize,
    rng: &mut R,
    allocation: Allocation,
) -> Result<LabeledSample> {
    scenario.validate()?;
    let k = scenario.num_components();
    if n < MIN_CLASS * k {
        return Err(Error::InvalidParameter {
            name: "n",
            message: format!("n = {n} too small: {k} classes need at least {}", MIN_CLASS * k),
        });
    }
    let weights = scenario.weights();
    let labels = draw_labels(&weights, n, rng, allocation)?;
    let samplers: Vec<Sampler> = scenario
        .components
        .iter()
        .map(|c| Sampler::build(&c.dist))
        .collect();
    let d = scenario.dim();
    let mut x = Vec::with_capacity(n * d);
    for &label in &labels {
        samplers[label].draw_into(rng, &mut x);
    }
    LabeledSample::from_flat(x, d, labels)
}

/// Everything a coverage study needs.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyDesign {
    /// The mixture sampled from.
    pub scenario: Scenario,
    /// Sample size per replication.
    pub n: usize,
    /// Interval methods to evaluate.
    pub methods: Vec<Method>,
    /// Nominal coverage level.
    pub level: f64,
    /// Replications per batch.
    pub replications: usize,
    /// Number of batches (dispersion across batches is the reported SD).
    pub batches: usize,
    /// Population value the intervals are checked against.
    pub rho_true: f64,
    /// Master seed; replication `i` uses stream `i` of this seed.
    pub seed: u64,
    /// Class-size allocation mode.
    pub allocation: Allocation,
}

impl StudyDesign {
    fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter {
                name: "methods",
                message: "at least one method is required".into(),
            });
        }
        if self.replications < 100 {
            return Err(Error::InvalidParameter {
                name: "replications",
                message: format!(
                    "{} replications; at least 100 are needed for a meaningful coverage estimate",
                    self.replications
                ),
            });
        }
        if self.batches == 0 {
            return Err(Error::InvalidParameter {
                name: "batches",
                message: "at least one batch is required".into(),
            });
        }
        if !(self.rho_true.is_finite() && (0.0..=1.0).contains(&self.rho_true)) {
            return Err(Error::InvalidParameter {
                name: "rho_true",
                message: format!("rho_true = {} must lie in [0, 1]", self.rho_true),
            });
        }
        Ok(())
    }
}

/// Coverage and mean interval length for one method in one study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Scenario name.
    pub scenario_id: String,
    /// Sample size per replication.
    pub n: usize,
    /// Interval method.
    pub method: Method,
    /// Nominal level.
    pub level: f64,
    /// Replications per batch.
    pub replications: usize,
    /// Number of batches.
    pub batches: usize,
    /// Mean over batches of the per-batch coverage fraction.
    pub coverage: f64,
    /// Mean over batches of the per-batch mean interval length.
    pub mean_length: f64,
    /// Sample standard deviation of per-batch coverage (0 for one batch).
    pub sd_coverage: f64,
    /// Sample standard deviation of per-batch mean length.
    pub sd_length: f64,
    /// Population value used.
    pub rho_true: f64,
    /// Master seed.
    pub seed: u64,
    /// RNG wiring, for reproducibility.
    pub rng: String,
    /// Replications (across all batches) that produced no usable interval
    /// for this method; they are excluded from the means.
    pub failures: usize,
}

fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = numeric::mean(values);
    let ss = numeric::sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Runs the coverage study: `replications * batches` independent samples,
/// each scored by every requested method.
///
/// Replications are independent work items parallelized across threads;
/// results are aggregated in replication order, so reports are identical
/// regardless of thread count. A replication that fails to produce a usable
/// interval for a method (sampling shortfall or a failed inversion) is
/// counted and excluded; more than 1% failures within a batch aborts the
/// study.
pub fn coverage_study(design: &StudyDesign) -> Result<Vec<CoverageReport>> {
    design.validate()?;
    let total = design.replications * design.batches;
    let outcomes: Vec<Vec<Option<(bool, f64)>>> = (0..total)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha12Rng::seed_from_u64(design.seed);
            rng.set_stream(rep as u64);
            run_replication(design, &mut rng)
        })
        .collect();

    let m = design.methods.len();
    let mut batch_coverage = vec![Vec::with_capacity(design.batches); m];
    let mut batch_length = vec![Vec::with_capacity(design.batches); m];
    let mut failures = vec![0usize; m];
    for batch in 0..design.batches {
        let rows = &outcomes[batch * design.replications..(batch + 1) * design.replications];
        for mi in 0..m {
            let mut covered = 0usize;
            let mut ok = 0usize;
            let mut length = numeric::Neumaier::new();
            let mut failed = 0usize;
            for row in rows {
                match row[mi] {
                    Some((contains, len)) => {
                        ok += 1;
                        covered += contains as usize;
                        length.add(len);
                    }
                    None => failed += 1,
                }
            }
            if failed as f64 > 0.01 * design.replications as f64 {
                return Err(Error::ExcessiveFailures {
                    batch,
                    failures: failed,
                    replications: design.replications,
                });
            }
            failures[mi] += failed;
            batch_coverage[mi].push(covered as f64 / ok as f64);
            batch_length[mi].push(length.total() / ok as f64);
        }
    }

    Ok(design
        .methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| CoverageReport {
            scenario_id: design.scenario.id.clone(),
            n: design.n,
            method,
            level: design.level,
            replications: design.replications,
            batches: design.batches,
            coverage: numeric::mean(&batch_coverage[mi]),
            mean_length: numeric::mean(&batch_length[mi]),
            sd_coverage: sample_sd(&batch_coverage[mi]),
            sd_length: sample_sd(&batch_length[mi]),
            rho_true: design.rho_true,
            seed: design.seed,
            rng: RNG_DESCRIPTION.to_string(),
            failures: failures[mi],
        })
        .collect())
}

fn run_replication<R: Rng + ?Sized>(
    design: &StudyDesign,
    rng: &mut R,
) -> Vec<Option<(bool, f64)>> {
    let none = vec![None; design.methods.len()];
    let sample = match sample_scenario_with(&design.scenario, design.n, rng, design.allocation) {
        Ok(sample) => sample,
        Err(_) => return none,
    };
    match confidence_intervals(&sample, design.level, &design.methods) {
        Ok(cis) => cis
            .into_iter()
            .map(|ci| {
                if ci.status == IntervalStatus::Failed
                    || !ci.lower.is_finite()
                    || !ci.upper.is_finite()
                {
                    None
                } else {
                    Some((
                        ci.lower <= design.rho_true && design.rho_true <= ci.upper,
                        ci.upper - ci.lower,
                    ))
                }
            })
            .collect(),
        Err(_) => none,
    }
}

/// A full study configuration as read from a TOML file. Unknown keys are
/// rejected so typos surface instead of silently using defaults.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// Scenario name used in reports.
    pub id: String,
    /// Sample size per replication.
    pub n: usize,
    /// Nominal level (default 0.95).
    #[serde(default = "default_level")]
    pub level: f64,
    /// Methods to run (default: all four).
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Replications per batch.
    pub replications: usize,
    /// Number of batches.
    pub batches: usize,
    /// Master seed; may instead be supplied on the command line.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Population value coverage is measured against.
    pub rho_true: f64,
    /// Class-size allocation (default multinomial).
    #[serde(default)]
    pub allocation: Allocation,
    /// Mixture components.
    pub components: Vec<Component>,
}

fn default_level() -> f64 {
    0.95
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

impl StudyConfig {
    /// Parses a TOML study configuration; syntax and schema errors carry
    /// the offending line.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidScenario(format!("config: {e}")))
    }

    /// Converts into a runnable design. The seed must have been supplied
    /// (in the file or injected by the caller) — studies without an
    /// explicit seed are not reproducible and are refused.
    pub fn into_design(self) -> Result<StudyDesign> {
        let seed = self.seed.ok_or(Error::InvalidParameter {
            name: "seed",
            message: "no seed given: set `seed` in the config or pass --seed".into(),
        })?;
        Ok(StudyDesign {
            scenario: Scenario {
                id: self.id,
                components: self.components,
            },
            n: self.n,
            methods: self.methods,
            level: self.level,
            replications: self.replications,
            batches: self.batches,
            rho_true: self.rho_true,
            seed,
            allocation: self.allocation,
        })
    }
}

/// Lenient scenario extraction from a (possibly full study) TOML file:
/// only `id` and `components` are read; study-only keys are ignored.
#[derive(Debug, Clone, Deserialize)]
struct ScenarioOnly {
    #[serde(default)]
    id: String,
    components: Vec<Component>,
}

/// Reads just the scenario (id + components) out of a TOML document,
/// tolerating extra study-level keys.
pub fn scenario_from_toml_str(text: &str) -> Result<Scenario> {
    let parsed: ScenarioOnly =
        toml::from_str(text).map_err(|e| Error::InvalidScenario(format!("config: {e}")))?;
    let scenario = Scenario {
        id: parsed.id,
        components: parsed.components,
    };
    scenario.validate()?;
    Ok(scenario)
}
