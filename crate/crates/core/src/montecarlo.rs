//! Replication harness and the statistics used to summarize it.
//!
//! Replicate `r` of a plan draws from `derive_stream(seed, r)`. Replicates run
//! on a rayon pool of the requested size and are collected in replicate order
//! before any reduction, and every reduction is a pairwise sum in that order,
//! so results are bit-identical for any worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::analysis::{autocov_empirical, curvature_series, discrete_curvature, lipschitz_constant};
use crate::error::{Error, Result};
use crate::limits::{self, max_speed_deviation, LimitKind, LimitRealization, LimitSpec};
use crate::plane::UnitVec2;
use crate::sampling::{derive_stream, RandomSource, Seed};
use crate::walks::{self, rescale, Polyline, RescaleMode, StepSeq, WalkSpec};

/// Below this length `pairwise_sum` adds sequentially.
const PAIRWISE_BLOCK: usize = 32;

/// Recursive pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator, 0 for one value).
    pub sd: f64,
    pub ci_halfwidth_95: f64,
    pub count: usize,
}

impl SummaryStats {
    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        self.sd / (self.count as f64).sqrt()
    }
}

pub fn aggregate(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput("aggregate"));
    }
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let sd = if values.len() > 1 {
        let dev: Vec<f64> = values.iter().map(|x| (x - mean).powi(2)).collect();
        (pairwise_sum(&dev) / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SummaryStats {
        mean,
        sd,
        ci_halfwidth_95: 1.96 * sd / n.sqrt(),
        count: values.len(),
    })
}

pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("median"));
    }
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, &mut upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if v.len() % 2 == 1 {
        return Ok(upper);
    }
    let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(0.5 * (lower + upper))
}

/// Lag-1 sample autocorrelation.
pub fn lag1_autocorrelation(values: &[f64]) -> Result<f64> {
    let st = aggregate(values)?;
    if values.len() < 2 || st.sd == 0.0 {
        return Err(Error::Degenerate("lag-1 autocorrelation of a constant series".into()));
    }
    let prods: Vec<f64> = values
        .windows(2)
        .map(|w| (w[0] - st.mean) * (w[1] - st.mean))
        .collect();
    let dev: Vec<f64> = values.iter().map(|x| (x - st.mean).powi(2)).collect();
    Ok(pairwise_sum(&prods) / pairwise_sum(&dev))
}

/// Two-sample Kolmogorov–Smirnov statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub n1: usize,
    pub n2: usize,
}

impl KsResult {
    fn effective_n(&self) -> f64 {
        let (a, b) = (self.n1 as f64, self.n2 as f64);
        a * b / (a + b)
    }

    /// Asymptotic critical value `c(level)·√((n1 + n2)/(n1·n2))` with
    /// `c(level) = √(−ln(level/2)/2)`.
    pub fn critical_value(&self, level: f64) -> f64 {
        (-(level / 2.0).ln() / 2.0).sqrt() / self.effective_n().sqrt()
    }

    /// Asymptotic p-value from the Kolmogorov distribution.
    pub fn p_value(&self) -> f64 {
        let ne = self.effective_n().sqrt();
        let lambda = (ne + 0.12 + 0.11 / ne) * self.statistic;
        if lambda < 1e-3 {
            return 1.0;
        }
        let mut sum = 0.0;
        for j in 1..=100 {
            let jf = j as f64;
            let term = 2.0 * (-2.0 * jf * jf * lambda * lambda).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term < 1e-12 {
                break;
            }
        }
        sum.clamp(0.0, 1.0)
    }
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("ks_two_sample"));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n1, n2) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    Ok(KsResult {
        statistic: d.min(1.0),
        n1: xs.len(),
        n2: ys.len(),
    })
}

/// Run `f` on a rayon pool with exactly `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to build worker pool");
    pool.install(f)
}

/// Evaluate `f(r, derive_stream(master, r))` for `r < count` on the current
/// pool, returning results in replicate order.
pub fn replicate<T, F>(master: Seed, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut RandomSource) -> T + Sync,
{
    (0..count as u64)
        .into_par_iter()
        .map(|r| f(r, &mut derive_stream(master, r)))
        .collect()
}

/// Fallible [`replicate`]; the first error in replicate order wins.
pub fn try_replicate<T, F>(master: Seed, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut RandomSource) -> Result<T> + Sync,
{
    replicate(master, count, f).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Walk(WalkSpec),
    Limit(LimitSpec),
}

/// Estimator identifier plus numeric parameters, as written in plan files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl EstimatorSpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// Estimators understood by [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// `‖X(1)‖²`.
    EndpointSqNorm,
    EndpointX,
    EndpointY,
    /// `‖X(1)‖²/2`, the per-coordinate second moment.
    CoordSecondMoment,
    /// `‖X(1) − U‖²` with `U` the initial direction.
    StraightLineDeviationSq,
    /// Median circumradius curvature over interior vertices.
    MedianCurvature,
    /// Circumradius curvature at vertex `⌊t·n⌋`.
    CurvatureAt { t: f64 },
    Lipschitz { grid: usize },
    /// Walk step autocovariance at lag `k`.
    Autocov { k: usize },
    /// Limit unit-speed defect.
    MaxSpeedDeviation,
    /// `c·|B_t|` of a C2 realization.
    LimitCurvatureAt { t: f64 },
}

pub const ESTIMATOR_NAMES: &[&str] = &[
    "endpoint_sq_norm",
    "endpoint_x",
    "endpoint_y",
    "coord_second_moment",
    "straight_line_deviation_sq",
    "median_curvature",
    "curvature_at",
    "lipschitz",
    "autocov",
    "max_speed_deviation",
    "limit_curvature_at",
];

impl Estimator {
    pub fn resolve(spec: &EstimatorSpec) -> Result<Estimator> {
        let param = |key: &str, default: f64| spec.params.get(key).copied().unwrap_or(default);
        let unit_time = |t: f64| -> Result<f64> {
            if (0.0..=1.0).contains(&t) {
                Ok(t)
            } else {
                Err(Error::TimeOutOfRange(t))
            }
        };
        Ok(match spec.name.as_str() {
            "endpoint_sq_norm" => Estimator::EndpointSqNorm,
            "endpoint_x" => Estimator::EndpointX,
            "endpoint_y" => Estimator::EndpointY,
            "coord_second_moment" => Estimator::CoordSecondMoment,
            "straight_line_deviation_sq" => Estimator::StraightLineDeviationSq,
            "median_curvature" => Estimator::MedianCurvature,
            "curvature_at" => Estimator::CurvatureAt {
                t: unit_time(param("t", 0.5))?,
            },
            "lipschitz" => Estimator::Lipschitz {
                grid: param("grid", 1000.0).max(2.0) as usize,
            },
            "autocov" => Estimator::Autocov {
                k: param("k", 1.0).max(0.0) as usize,
            },
            "max_speed_deviation" => Estimator::MaxSpeedDeviation,
            "limit_curvature_at" => Estimator::LimitCurvatureAt {
                t: unit_time(param("t", 0.5))?,
            },
            other => return Err(Error::UnknownEstimator(other.to_string())),
        })
    }

    fn evaluate(&self, real: &Realization) -> Result<f64> {
        let path = &real.path;
        Ok(match *self {
            Estimator::EndpointSqNorm => path.end().norm_sq(),
            Estimator::EndpointX => path.end().x,
            Estimator::EndpointY => path.end().y,
            Estimator::CoordSecondMoment => 0.5 * path.end().norm_sq(),
            Estimator::StraightLineDeviationSq => {
                let u = real.direction.ok_or(Error::WrongKind {
                    expected: "walk, c1 or c2",
                    found: "bm",
                })?;
                (path.end() - u.point()).norm_sq()
            }
            Estimator::MedianCurvature => median(&curvature_series(path)?)?,
            Estimator::CurvatureAt { t } => {
                let n = path.n();
                if n < 2 {
                    return Err(Error::Degenerate("curvature needs at least two segments".into()));
                }
                let i = ((t * n as f64).floor() as usize).clamp(1, n - 1);
                discrete_curvature(path, i)?.curvature
            }
            Estimator::Lipschitz { grid } => lipschitz_constant(path, grid)?,
            Estimator::Autocov { k } => {
                let steps = real.steps.ok_or(Error::WrongKind {
                    expected: "walk",
                    found: "limit",
                })?;
                autocov_empirical(steps, k)?
            }
            Estimator::MaxSpeedDeviation => {
                match real.limit.map(|l| l.kind) {
                    Some(LimitKind::C1 { .. } | LimitKind::C2 { .. }) => max_speed_deviation(path),
                    _ => {
                        return Err(Error::WrongKind {
                            expected: "c1 or c2",
                            found: real.tag,
                        })
                    }
                }
            }
            Estimator::LimitCurvatureAt { t } => {
                let limit = real.limit.ok_or(Error::WrongKind {
                    expected: "c2",
                    found: real.tag,
                })?;
                let series = limits::limit_curvature_series(limit)?;
                let k = (t * (series.len() - 1) as f64).round() as usize;
                series[k].1
            }
        })
    }
}

struct Realization<'a> {
    tag: &'static str,
    path: Polyline,
    direction: Option<UnitVec2>,
    steps: Option<&'a StepSeq>,
    limit: Option<&'a LimitRealization>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(deserialize_with = "seed_from_number_or_text")]
    pub seed: Seed,
    pub replicates: usize,
    pub target: Target,
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default)]
    pub rescale: RescaleMode,
}

fn seed_from_number_or_text<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Seed, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(u64),
        Text(String),
    }
    match Raw::deserialize(de)? {
        Raw::Number(n) => Ok(Seed(n)),
        Raw::Text(t) => Seed::parse(&t).map_err(serde::de::Error::custom),
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<Vec<Estimator>> {
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("replicates must be ≥ 1".into()));
        }
        match &self.target {
            Target::Walk(w) => w.validate()?,
            Target::Limit(l) => l.validate()?,
        }
        self.estimators.iter().map(Estimator::resolve).collect()
    }
}

/// Per-estimator replicate values, `values[e][r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub seed: Seed,
    pub estimators: Vec<EstimatorSpec>,
    pub values: Vec<Vec<f64>>,
}

/// One JSON-lines output record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl RunOutput {
    pub fn records(&self) -> Result<Vec<EstimateRecord>> {
        self.estimators
            .iter()
            .zip(&self.values)
            .map(|(spec, vals)| {
                let st = aggregate(vals)?;
                Ok(EstimateRecord {
                    name: spec.name.clone(),
                    params: spec.params.clone(),
                    value: st.mean,
                    stderr: st.stderr(),
                    n_samples: st.count,
                    seed: self.seed.0,
                })
            })
            .collect()
    }
}

fn evaluate_replicate(plan: &ExperimentPlan, estimators: &[Estimator], src: &mut RandomSource) -> Result<Vec<f64>> {
    match &plan.target {
        Target::Walk(spec) => {
            let walk = walks::simulate_walk(spec, src)?;
            let real = Realization {
                tag: spec.construction.tag(),
                path: rescale(&walk.path, plan.rescale),
                direction: Some(walk.u1),
                steps: Some(&walk.steps),
                limit: None,
            };
            estimators.iter().map(|e| e.evaluate(&real)).collect()
        }
        Target::Limit(spec) => {
            let limit = limits::simulate(spec, src)?;
            let real = Realization {
                tag: spec.kind.tag(),
                path: rescale(&limit.path, plan.rescale),
                direction: limit.direction,
                steps: None,
                limit: Some(&limit),
            };
            estimators.iter().map(|e| e.evaluate(&real)).collect()
        }
    }
}

/// Execute a plan on `workers` threads.
pub fn run(plan: &ExperimentPlan, workers: usize) -> Result<RunOutput> {
    let estimators = plan.validate()?;
    let rows = with_workers(workers, || {
        try_replicate(plan.seed, plan.replicates, |_, src| evaluate_replicate(plan, &estimators, src))
    })?;
    let mut values = vec![Vec::with_capacity(plan.replicates); estimators.len()];
    for row in rows {
        for (col, v) in values.iter_mut().zip(row) {
            col.push(v);
        }
    }
    Ok(RunOutput {
        seed: plan.seed,
        estimators: plan.estimators.clone(),
        values,
    })
}
