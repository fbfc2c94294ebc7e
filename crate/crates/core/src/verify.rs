//! Repeated-trial statistics, query-scaling sweeps and empirical checks of
//! the sampling lemmas.
//!
//! Every report is a deterministic function of its inputs and base seed:
//! trial `i` always runs on `split_seed(base_seed, i)`, and results are
//! reduced in trial order whatever the thread schedule.

use std::collections::BTreeMap;
use std::io::Write;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{
    coin_toss, mean_est, no_advice, DegreeEstimate, EstimateError, EstimatorConfig, Sampling,
    TerminationPath,
};
use crate::generators::{forest_union_truth, gen_forest_union_padded, GenError};
use crate::graph::{partition_by_threshold, Graph, GraphError, GroundTruth};
use crate::oracle::{QueryCounters, QueryOracle};
use crate::rational::{to_big, within_relative};
use crate::rng::split_seed;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sweep needs at least {MIN_SWEEP_POINTS} points, got {0}")]
    InsufficientPoints(usize),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub const MIN_SWEEP_POINTS: usize = 4;

/// One `no_advice` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub instance_id: String,
    pub trial: u64,
    pub seed: u64,
    pub estimate: Result<DegreeEstimate, String>,
    pub success: bool,
}

impl TrialRecord {
    pub fn counters(&self) -> QueryCounters {
        self.estimate
            .as_ref()
            .map(|e| e.counters)
            .unwrap_or_default()
    }
}

/// Mean, median and 95th percentile of one per-trial count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
}

impl CountSummary {
    pub fn of(values: &[u64]) -> Self {
        if values.is_empty() {
            return CountSummary::default();
        }
        let mut v = values.to_vec();
        v.sort_unstable();
        let n = v.len();
        let mean = v.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            v[n / 2] as f64
        } else {
            (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
        };
        // Nearest-rank percentile.
        let p95 = v[(n * 95).div_ceil(100).max(1) - 1] as f64;
        CountSummary { mean, median, p95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialBatchReport {
    pub instance_id: String,
    pub trials: u64,
    pub base_seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub avg_degree: Ratio<u64>,
    /// Trials with `d̂ ∈ [(1−ε)d, (1+ε)d]`, decided in exact arithmetic.
    pub success_count: u64,
    pub error_count: u64,
    /// Error message → occurrences.
    pub errors: BTreeMap<String, u64>,
    pub degree_random: CountSummary,
    pub degree_of: CountSummary,
    pub rand_edge: CountSummary,
    pub total_queries: CountSummary,
    /// Mean `tau_used` over trials that returned an estimate.
    pub mean_tau_used: f64,
    pub fallback_count: u64,
}

impl TrialBatchReport {
    pub fn success_rate(&self) -> f64 {
        self.success_count as f64 / self.trials as f64
    }

    pub fn mean_degree_queries(&self) -> f64 {
        self.degree_random.mean + self.degree_of.mean
    }
}

#[derive(Debug, Clone)]
pub struct TrialBatch {
    pub report: TrialBatchReport,
    pub records: Vec<TrialRecord>,
}

/// Runs `trials` independent `no_advice` estimates on `g`. Estimator errors
/// are recorded per trial and count as failures.
pub fn run_trials(
    instance_id: &str,
    g: &Graph,
    truth: &GroundTruth,
    cfg: &EstimatorConfig,
    trials: u64,
    base_seed: u64,
) -> Result<TrialBatch, VerifyError> {
    if trials == 0 {
        return Err(VerifyError::InvalidArgument(
            "trials must be at least 1".into(),
        ));
    }
    cfg.validate()?;
    let target = to_big(&truth.avg_degree);
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = split_seed(base_seed, trial);
            let estimate =
                no_advice(&mut QueryOracle::new(g, seed), cfg).map_err(|e| e.to_string());
            let success = estimate
                .as_ref()
                .is_ok_and(|e| within_relative(&to_big(&e.d_hat), &target, cfg.epsilon));
            TrialRecord {
                instance_id: instance_id.to_string(),
                trial,
                seed,
                estimate,
                success,
            }
        })
        .collect();
    let report = summarize(instance_id, truth, cfg, base_seed, &records);
    Ok(TrialBatch { report, records })
}

fn summarize(
    instance_id: &str,
    truth: &GroundTruth,
    cfg: &EstimatorConfig,
    base_seed: u64,
    records: &[TrialRecord],
) -> TrialBatchReport {
    let counts =
        |f: fn(&QueryCounters) -> u64| records.iter().map(|r| f(&r.counters())).collect::<Vec<_>>();
    let mut errors = BTreeMap::new();
    let (mut tau_sum, mut tau_n, mut fallback) = (0f64, 0u64, 0u64);
    for r in records {
        match &r.estimate {
            Ok(e) => {
                tau_sum += e.tau_used as f64;
                tau_n += 1;
                fallback += u64::from(e.path == TerminationPath::ThresholdFallback);
            }
            Err(msg) => *errors.entry(msg.clone()).or_insert(0) += 1,
        }
    }
    TrialBatchReport {
        instance_id: instance_id.to_string(),
        trials: records.len() as u64,
        base_seed,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        avg_degree: truth.avg_degree,
        success_count: records.iter().filter(|r| r.success).count() as u64,
        error_count: records.len() as u64 - tau_n,
        errors,
        degree_random: CountSummary::of(&counts(|c| c.degree_random)),
        degree_of: CountSummary::of(&counts(|c| c.degree_of)),
        rand_edge: CountSummary::of(&counts(|c| c.rand_edge)),
        total_queries: CountSummary::of(&counts(|c| c.total())),
        mean_tau_used: if tau_n > 0 {
            tau_sum / tau_n as f64
        } else {
            0.0
        },
        fallback_count: fallback,
    }
}

pub const TRIAL_CSV_HEADER: [&str; 10] = [
    "instance_id",
    "seed",
    "d_hat_num",
    "d_hat_den",
    "success",
    "tau_used",
    "degree_random",
    "degree_of",
    "rand_edge",
    "path",
];

/// Writes one row per trial. Failed trials leave the estimate columns empty
/// and put `error` in `path`.
pub fn write_trials_csv<'a, W: Write>(
    out: W,
    records: impl IntoIterator<Item = &'a TrialRecord>,
) -> Result<(), VerifyError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_CSV_HEADER)?;
    for r in records {
        let c = r.counters();
        let (num, den, tau, path) = match &r.estimate {
            Ok(e) => (
                e.d_hat.numer().to_string(),
                e.d_hat.denom().to_string(),
                e.tau_used.to_string(),
                match e.path {
                    TerminationPath::AllAdvice => "all_advice",
                    TerminationPath::ThresholdFallback => "threshold_fallback",
                }
                .to_string(),
            ),
            Err(_) => (
                String::new(),
                String::new(),
                String::new(),
                "error".to_string(),
            ),
        };
        w.write_record([
            r.instance_id.clone(),
            r.seed.to_string(),
            num,
            den,
            r.success.to_string(),
            tau,
            c.degree_random.to_string(),
            c.degree_of.to_string(),
            c.rand_edge.to_string(),
            path,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Alpha,
    AvgDegree,
    Epsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub x: f64,
    pub instance_id: String,
    pub mean_degree_queries: f64,
    pub mean_rand_edge_queries: f64,
    pub mean_total_queries: f64,
    pub mean_tau_used: f64,
    pub success_count: u64,
    pub trials: u64,
    pub error_count: u64,
}

/// Least-squares slope of `ln y` against `ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub variable: SweepVariable,
    /// Sorted by `x`.
    pub points: Vec<ScalingPoint>,
    /// Degree queries against `x`, unadjusted.
    pub degree_fit: LogLogFit,
    /// Degree queries divided by `log₂⁴(τ_used)` against `x`.
    pub degree_fit_log4: LogLogFit,
    pub rand_edge_fit: LogLogFit,
    pub total_fit: LogLogFit,
    /// `max / min` of the mean RandEdge counts across points.
    pub rand_edge_spread: f64,
}

impl ScalingReport {
    /// Ratios of mean total queries between consecutive points.
    pub fn successive_total_ratios(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| w[1].mean_total_queries / w[0].mean_total_queries)
            .collect()
    }
}

pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Option<LogLogFit> {
    if xs.len() != ys.len()
        || xs.len() < 2
        || xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite()))
    {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LogLogFit {
        exponent,
        intercept: my - exponent * mx,
        r_squared,
    })
}

/// `log₂⁴ τ`, floored at 1 so that `τ ≤ 2` does not zero the correction.
pub fn log4_correction(tau: f64) -> f64 {
    tau.log2().max(1.0).powi(4)
}

/// One sweep point before it is run.
pub struct SweepInput {
    pub x: f64,
    pub instance_id: String,
    pub graph: Graph,
    pub truth: GroundTruth,
    pub cfg: EstimatorConfig,
}

/// Runs every point with `trials` trials and fits the scaling exponents.
/// Point `j` uses base seed `split_seed(base_seed, j)`.
pub fn run_sweep(
    variable: SweepVariable,
    inputs: Vec<SweepInput>,
    trials: u64,
    base_seed: u64,
) -> Result<(ScalingReport, Vec<TrialBatch>), VerifyError> {
    if inputs.len() < MIN_SWEEP_POINTS {
        return Err(VerifyError::InsufficientPoints(inputs.len()));
    }
    let mut inputs = inputs;
    inputs.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut points = Vec::with_capacity(inputs.len());
    let mut batches = Vec::with_capacity(inputs.len());
    for (j, p) in inputs.iter().enumerate() {
        let batch = run_trials(
            &p.instance_id,
            &p.graph,
            &p.truth,
            &p.cfg,
            trials,
            split_seed(base_seed, j as u64),
        )?;
        let r = &batch.report;
        points.push(ScalingPoint {
            x: p.x,
            instance_id: p.instance_id.clone(),
            mean_degree_queries: r.mean_degree_queries(),
            mean_rand_edge_queries: r.rand_edge.mean,
            mean_total_queries: r.total_queries.mean,
            mean_tau_used: r.mean_tau_used,
            success_count: r.success_count,
            trials: r.trials,
            error_count: r.error_count,
        });
        batches.push(batch);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let fit = |ys: Vec<f64>, what: &str| {
        log_log_fit(&xs, &ys).ok_or_else(|| {
            VerifyError::InvalidArgument(format!(
                "cannot fit {what}: non-positive or constant data"
            ))
        })
    };
    let degree = fit(
        points.iter().map(|p| p.mean_degree_queries).collect(),
        "degree queries",
    )?;
    let degree_log4 = fit(
        points
            .iter()
            .map(|p| p.mean_degree_queries / log4_correction(p.mean_tau_used))
            .collect(),
        "corrected degree queries",
    )?;
    let rand_edge = fit(
        points.iter().map(|p| p.mean_rand_edge_queries).collect(),
        "randedge queries",
    )?;
    let total = fit(
        points.iter().map(|p| p.mean_total_queries).collect(),
        "total queries",
    )?;
    let re: Vec<f64> = points.iter().map(|p| p.mean_rand_edge_queries).collect();
    let spread =
        re.iter().cloned().fold(f64::MIN, f64::max) / re.iter().cloned().fold(f64::MAX, f64::min);
    let report = ScalingReport {
        variable,
        points,
        degree_fit: degree,
        degree_fit_log4: degree_log4,
        rand_edge_fit: rand_edge,
        total_fit: total,
        rand_edge_spread: spread,
    };
    Ok((report, batches))
}

/// Padded forest unions on `n` vertices: `alpha` forests over
/// `core = round(n·d/(2α))` vertices, so every point has average degree
/// close to `d` (slightly below, since each forest has `core − 1` edges).
pub fn forest_union_point(
    n: usize,
    d: f64,
    alpha: u32,
    seed: u64,
) -> Result<(Graph, GroundTruth), VerifyError> {
    let core = (n as f64 * d / (2.0 * alpha as f64)).round() as usize;
    if core < 2 || core > n {
        return Err(VerifyError::InvalidArgument(format!(
            "n = {n}, d = {d}, alpha = {alpha} gives a core of {core} vertices"
        )));
    }
    let fu = gen_forest_union_padded(n, core, alpha, seed)?;
    let truth = forest_union_truth(&fu)?;
    Ok((fu.graph, truth))
}

/// Query counts against arboricity at (approximately) fixed average degree.
pub fn sweep_alpha(
    cfg: &EstimatorConfig,
    n: usize,
    d: f64,
    alphas: &[u32],
    trials: u64,
    base_seed: u64,
) -> Result<(ScalingReport, Vec<TrialBatch>), VerifyError> {
    if alphas.len() < MIN_SWEEP_POINTS {
        return Err(VerifyError::InsufficientPoints(alphas.len()));
    }
    let inputs = alphas
        .iter()
        .map(|&a| {
            let (graph, truth) =
                forest_union_point(n, d, a, split_seed(base_seed, 1_000_000 + a as u64))?;
            Ok(SweepInput {
                x: a as f64,
                instance_id: format!("forest_union_n{n}_a{a}"),
                graph,
                truth,
                cfg: *cfg,
            })
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;
    run_sweep(SweepVariable::Alpha, inputs, trials, base_seed)
}

/// Query counts against average degree at fixed arboricity.
pub fn sweep_avg_degree(
    cfg: &EstimatorConfig,
    n: usize,
    alpha: u32,
    degrees: &[f64],
    trials: u64,
    base_seed: u64,
) -> Result<(ScalingReport, Vec<TrialBatch>), VerifyError> {
    if degrees.len() < MIN_SWEEP_POINTS {
        return Err(VerifyError::InsufficientPoints(degrees.len()));
    }
    let inputs = degrees
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let (graph, truth) =
                forest_union_point(n, d, alpha, split_seed(base_seed, 1_000_000 + j as u64))?;
            let x = crate::rational::ratio_to_f64(&truth.avg_degree);
            Ok(SweepInput {
                x,
                instance_id: format!("forest_union_n{n}_a{alpha}_d{d}"),
                graph,
                truth,
                cfg: *cfg,
            })
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;
    run_sweep(SweepVariable::AvgDegree, inputs, trials, base_seed)
}

/// Query counts against `ε` on one graph.
pub fn sweep_epsilon(
    cfg: &EstimatorConfig,
    graph: &Graph,
    truth: &GroundTruth,
    instance_id: &str,
    epsilons: &[f64],
    trials: u64,
    base_seed: u64,
) -> Result<(ScalingReport, Vec<TrialBatch>), VerifyError> {
    if epsilons.len() < MIN_SWEEP_POINTS {
        return Err(VerifyError::InsufficientPoints(epsilons.len()));
    }
    let inputs = epsilons
        .iter()
        .map(|&eps| {
            let cfg = EstimatorConfig {
                epsilon: eps,
                ..*cfg
            };
            cfg.validate()?;
            Ok(SweepInput {
                x: eps,
                instance_id: format!("{instance_id}_eps{eps}"),
                graph: graph.clone(),
                truth: truth.clone(),
                cfg,
            })
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;
    run_sweep(SweepVariable::Epsilon, inputs, trials, base_seed)
}

pub const MIN_LEMMA_REPEATS: u64 = 10_000;
/// Failure probability behind the classifier budget in [`lemma_checks`].
pub const CLASSIFIER_DELTA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    /// `None` when the check does not apply to this `(graph, τ)`.
    pub pass: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub tau: u64,
    pub repeats: u64,
    pub seed: u64,
    pub rho_light: Ratio<u64>,
    pub light_mean: Ratio<u64>,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass != Some(false))
    }

    pub fn check(&self, name: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Sample moments from exact integer sums.
struct Moments {
    sum: u128,
    sum_sq: u128,
    n: u64,
}

impl Moments {
    fn mean(&self) -> f64 {
        self.sum as f64 / self.n as f64
    }

    /// Unbiased sample variance.
    fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as u128;
        // n·Σx² − (Σx)², exact while it fits.
        let num = n * self.sum_sq - self.sum * self.sum;
        num as f64 / (n as f64 * (n - 1) as f64)
    }
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Coin-toss tosses used for the goodness-classifier check:
/// `⌈c_add · ln(2/δ)⌉` at `δ = 0.01`.
pub fn classifier_tosses(cfg: &EstimatorConfig) -> u64 {
    (cfg.c_add * (2.0 / CLASSIFIER_DELTA).ln()).ceil() as u64
}

/// Empirical checks at threshold `tau`:
///
/// - `coin_toss` with one toss has mean `ρ_L` (within 4 standard errors);
/// - `mean_est` with one sample has mean `m_L/n` (within 4 standard errors);
/// - its variance is at most `τ · m_L/n` (5% slack);
/// - the 5/16 goodness test errs in at most a `δ` fraction of repeats when
///   `ρ_L < 1/4` (must fail) or `ρ_L ≥ 3/8` (must pass).
pub fn lemma_checks(
    g: &Graph,
    tau: u64,
    repeats: u64,
    seed: u64,
    cfg: &EstimatorConfig,
) -> Result<LemmaReport, VerifyError> {
    if repeats < MIN_LEMMA_REPEATS {
        return Err(VerifyError::InvalidArgument(format!(
            "repeats must be at least {MIN_LEMMA_REPEATS}, got {repeats}"
        )));
    }
    if tau == 0 {
        return Err(VerifyError::InvalidArgument(
            "tau must be at least 1".into(),
        ));
    }
    if g.m() == 0 {
        return Err(GraphError::EmptyEdgeSet.into());
    }
    let part = partition_by_threshold(g, tau);
    let rho = part.rho_light().expect("graph has edges");
    let light_mean = part.light_mean();
    let mut checks = Vec::new();

    let mut o = QueryOracle::new(g, split_seed(seed, 0));
    let mut light = 0u64;
    for _ in 0..repeats {
        light += coin_toss(&mut o, tau, 1, Sampling::PerQuery)?.light;
    }
    let p = ratio_f64(rho);
    let se = (p * (1.0 - p) / repeats as f64).sqrt();
    let mean = light as f64 / repeats as f64;
    checks.push(within_se("coin_toss_unbiased", mean, p, se));

    let mut o = QueryOracle::new(g, split_seed(seed, 1));
    let mut m = Moments {
        sum: 0,
        sum_sq: 0,
        n: repeats,
    };
    for _ in 0..repeats {
        let w = mean_est(&mut o, tau, 1, Sampling::PerQuery)?.truncated_sum;
        m.sum += w;
        m.sum_sq += w * w;
    }
    let mu = ratio_f64(light_mean);
    let second: f64 = part
        .light
        .iter()
        .map(|&v| (g.degree(v) as f64).powi(2))
        .sum::<f64>()
        / g.n() as f64;
    let sd_w = (second - mu * mu).max(0.0).sqrt();
    checks.push(within_se(
        "mean_est_unbiased",
        m.mean(),
        mu,
        sd_w / (repeats as f64).sqrt(),
    ));
    let var_bound = tau as f64 * mu * 1.05;
    let var = m.variance();
    checks.push(LemmaCheck {
        name: "mean_est_variance".into(),
        measured: var,
        bound: var_bound,
        pass: Some(var <= var_bound),
        detail: format!(
            "sample variance of single-sample ŵ vs (τ/q)·m_L/n·1.05, q = 1, exact variance {:.6}",
            second - mu * mu
        ),
    });

    let r = classifier_tosses(cfg);
    let expect = if rho < Ratio::new(1, 4) {
        Some(false)
    } else if rho >= Ratio::new(3, 8) {
        Some(true)
    } else {
        None
    };
    let mut o = QueryOracle::new(g, split_seed(seed, 2));
    let check = match expect {
        Some(expected) => {
            let mut wrong = 0u64;
            for _ in 0..repeats {
                if coin_toss(&mut o, tau, r, Sampling::Bulk)?.passes_goodness_test() != expected {
                    wrong += 1;
                }
            }
            let rate = wrong as f64 / repeats as f64;
            LemmaCheck {
                name: "goodness_classifier".into(),
                measured: rate,
                bound: CLASSIFIER_DELTA,
                pass: Some(rate <= CLASSIFIER_DELTA),
                detail: format!(
                    "misclassification rate with r = {r}; expected {}",
                    if expected { "good" } else { "not good" }
                ),
            }
        }
        None => LemmaCheck {
            name: "goodness_classifier".into(),
            measured: f64::NAN,
            bound: CLASSIFIER_DELTA,
            pass: None,
            detail: "1/4 ≤ ρ_L < 3/8: either outcome is allowed".into(),
        },
    };
    checks.push(check);

    Ok(LemmaReport {
        tau,
        repeats,
        seed,
        rho_light: rho,
        light_mean,
        checks,
    })
}

fn within_se(name: &str, measured: f64, expected: f64, se: f64) -> LemmaCheck {
    let gap = (measured - expected).abs();
    // A zero standard error means the samples are constant; allow rounding only.
    let pass = if se == 0.0 {
        gap <= 1e-12 * expected.abs().max(1.0)
    } else {
        gap <= 4.0 * se
    };
    LemmaCheck {
        name: name.into(),
        measured,
        bound: expected,
        pass: Some(pass),
        detail: format!("|mean − exact| = {gap:.6}, 4 s.e. = {:.6}", 4.0 * se),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_circulant, gen_clique_matching};
    use crate::graph::ground_truth;

    fn truth(g: &Graph) -> GroundTruth {
        ground_truth(g, 15).unwrap()
    }

    #[test]
    fn four_cycle_always_succeeds() {
        let g = gen_circulant(4, &[1]).unwrap();
        let batch = run_trials("c4", &g, &truth(&g), &EstimatorConfig::default(), 100, 1).unwrap();
        assert_eq!(batch.report.success_count, 100);
        assert_eq!(batch.report.error_count, 0);
        assert_eq!(batch.records.len(), 100);
        assert!(batch
            .records
            .iter()
            .all(|r| r.estimate.as_ref().unwrap().d_hat == Ratio::from_integer(2)));
    }

    #[test]
    fn matching_success_rate() {
        let g = gen_clique_matching(10_000, 2, 0, 4).unwrap().graph;
        let batch = run_trials(
            "matching",
            &g,
            &truth(&g),
            &EstimatorConfig::default(),
            200,
            2,
        )
        .unwrap();
        assert!(
            batch.report.success_count >= 170,
            "{}",
            batch.report.success_count
        );
    }

    #[test]
    fn reports_do_not_depend_on_thread_count() {
        let g = gen_clique_matching(400, 8, 10, 4).unwrap().graph;
        let t = truth(&g);
        let cfg = EstimatorConfig::default();
        let a = run_trials("x", &g, &t, &cfg, 24, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool
            .install(|| run_trials("x", &g, &t, &cfg, 24, 9))
            .unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn zero_trials_rejected() {
        let g = gen_circulant(4, &[1]).unwrap();
        assert!(run_trials("c4", &g, &truth(&g), &EstimatorConfig::default(), 0, 1).is_err());
    }

    #[test]
    fn csv_columns() {
        let g = gen_circulant(4, &[1]).unwrap();
        let batch = run_trials("c4", &g, &truth(&g), &EstimatorConfig::default(), 2, 1).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &batch.records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRIAL_CSV_HEADER.join(","));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "c4");
        assert_eq!((row[2], row[3], row[4]), ("2", "1", "true"));
        assert_eq!(row[9], "all_advice");
    }

    #[test]
    fn count_summaries() {
        let s = CountSummary::of(&[1, 2, 3, 4]);
        assert_eq!((s.mean, s.median, s.p95), (2.5, 2.5, 4.0));
        let s = CountSummary::of(&(1..=100).collect::<Vec<_>>());
        assert_eq!((s.median, s.p95), (50.5, 95.0));
    }

    #[test]
    fn fits_recover_power_laws() {
        let xs = [2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let f = log_log_fit(&xs, &ys).unwrap();
        assert!((f.exponent - 1.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(log_log_fit(&[1.0, 1.0], &[1.0, 2.0]).is_none());
        assert!(log_log_fit(&[1.0, 2.0], &[0.0, 2.0]).is_none());
    }

    #[test]
    fn sweeps_need_four_points() {
        let cfg = EstimatorConfig::default();
        assert!(matches!(
            sweep_alpha(&cfg, 1000, 2.0, &[2], 1, 0),
            Err(VerifyError::InsufficientPoints(1))
        ));
        let g = gen_circulant(4, &[1]).unwrap();
        let t = truth(&g);
        assert!(matches!(
            sweep_epsilon(&cfg, &g, &t, "c4", &[0.1, 0.2, 0.3], 1, 0),
            Err(VerifyError::InsufficientPoints(3))
        ));
    }

    #[test]
    fn lemma_checks_on_small_graphs() {
        let cfg = EstimatorConfig::default();
        let star = Graph::new(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let r = lemma_checks(&star, 1, 10_000, 3, &cfg).unwrap();
        assert_eq!(r.rho_light, Ratio::new(1, 2));
        assert_eq!(r.check("coin_toss_unbiased").unwrap().pass, Some(true));
        assert!(r.all_pass(), "{r:#?}");

        let triangle = gen_circulant(3, &[1]).unwrap();
        let r = lemma_checks(&triangle, 2, 10_000, 3, &cfg).unwrap();
        let v = r.check("mean_est_variance").unwrap();
        assert_eq!((v.measured, v.pass), (0.0, Some(true)));

        let r = lemma_checks(&triangle, 1, 10_000, 3, &cfg).unwrap();
        let c = r.check("goodness_classifier").unwrap();
        assert_eq!((c.measured, c.pass), (0.0, Some(true)));
        assert!(lemma_checks(&triangle, 1, 100, 3, &cfg).is_err());
    }
}
