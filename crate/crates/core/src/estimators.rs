//! Average-degree estimators over a [`QueryOracle`].
//!
//! The estimate is `d̂ = ŵ / ρ̂` where, for a threshold `τ`,
//!
//! - `ŵ` ([`mean_est`]) averages random-vertex degrees truncated to zero above
//!   `τ`, an unbiased estimate of `m_L / n`;
//! - `ρ̂` ([`coin_toss`]) is the fraction of uniform edge endpoints whose
//!   degree is at most `τ`, an unbiased estimate of `ρ_L = m_L / 2m`.
//!
//! [`all_advice`] combines them given `τ` and a degree guess `d̃`,
//! [`threshold_advice`] searches `d̃ = τ/2, τ/4, …` for a guess that the
//! estimates themselves certify, and [`no_advice`] doubles `τ` until a
//! coin-toss test declares it good. None of them uses `n`, `m` or the
//! arboricity.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GraphError;
use crate::oracle::{QueryCounters, QueryOracle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    /// No light endpoint was seen, so `ρ̂ = 0` and `ŵ/ρ̂` is undefined.
    /// Signals that `τ` is not a good threshold.
    #[error("zero light-edge density at threshold {tau}")]
    ZeroDensity { tau: u64 },
    #[error("no good threshold found within {doublings} doublings")]
    SafetyCap { doublings: u32 },
    #[error("query budget overflow: {0}")]
    BudgetOverflow(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How bulk sampling loops talk to the oracle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// One histogram-valued bulk query per loop (exact in distribution).
    #[default]
    Bulk,
    /// One oracle call per sample.
    PerQuery,
}

/// Accuracy targets and the concrete constants behind every query budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Additive-Chernoff constant: `r ≥ c_add · ln(2/δ)` resolves `ρ_L` to ±1/16.
    pub c_add: f64,
    /// Multiplicative-Chernoff constant: `r ≥ c_mult · ln(2/δ) / (ε/3)²`.
    pub c_mult: f64,
    /// Chebyshev constant: `q ≥ c_mean · τ / (δ ε² d̃)`.
    pub c_mean: f64,
    pub max_threshold_doublings: u32,
    pub sampling: Sampling,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            epsilon: 0.1,
            delta: 0.1,
            c_add: 512.0,
            c_mult: 32.0,
            c_mean: 576.0,
            max_threshold_doublings: 64,
            sampling: Sampling::Bulk,
        }
    }
}

impl EstimatorConfig {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self, EstimateError> {
        let cfg = EstimatorConfig {
            epsilon,
            delta,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        let bad = |msg: String| Err(EstimateError::InvalidConfig(msg));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return bad(format!("delta must lie in (0, 1/2), got {}", self.delta));
        }
        for (name, c) in [
            ("c_add", self.c_add),
            ("c_mult", self.c_mult),
            ("c_mean", self.c_mean),
        ] {
            if !(c >= 1.0 && c.is_finite()) {
                return bad(format!("{name} must be a finite constant >= 1, got {c}"));
            }
        }
        if !(1..=64).contains(&self.max_threshold_doublings) {
            return bad(format!(
                "max_threshold_doublings must lie in 1..=64, got {}",
                self.max_threshold_doublings
            ));
        }
        Ok(())
    }

    /// `MeanEst` sample count used by `AllAdvice`.
    pub fn mean_samples(
        &self,
        tau: u64,
        d_tilde: Ratio<u128>,
        delta_local: f64,
    ) -> Result<u64, EstimateError> {
        let d = *d_tilde.numer() as f64 / *d_tilde.denom() as f64;
        budget(
            self.c_mean * tau as f64 / (delta_local * self.epsilon * self.epsilon * d),
            "mean samples",
        )
    }

    /// `CoinToss` count used by `AllAdvice`: large enough both for the ±1/16
    /// additive guarantee and for a `(1 ± ε/3)` multiplicative one at `ρ_L ≥ 1/4`.
    pub fn advice_tosses(&self, delta_local: f64) -> Result<u64, EstimateError> {
        let third = self.epsilon / 3.0;
        let c = self.c_add.max(self.c_mult / (third * third));
        budget(c * (2.0 / delta_local).ln(), "advice tosses")
    }

    /// `CoinToss` count for the goodness test at doubling step `i` (`τ = 2^i`).
    pub fn search_tosses(&self, step: u32) -> Result<u64, EstimateError> {
        let ln = (step as f64 + 2.0) * std::f64::consts::LN_2 - self.delta.ln();
        budget(self.c_add * ln, "search tosses")
    }
}

/// Largest budget accepted; keeps every count exactly representable in `f64`.
const MAX_BUDGET: f64 = (1u64 << 53) as f64;

fn budget(x: f64, what: &str) -> Result<u64, EstimateError> {
    if !(x.is_finite() && x <= MAX_BUDGET) {
        return Err(EstimateError::BudgetOverflow(format!("{what}: {x:e}")));
    }
    Ok((x.ceil() as u64).max(1))
}

/// Output of [`coin_toss`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinTossResult {
    /// Tosses that landed on a light endpoint.
    pub light: u64,
    pub tosses: u64,
}

impl CoinTossResult {
    /// `ρ̂_L`.
    pub fn rho_hat(&self) -> Ratio<u64> {
        Ratio::new(self.light, self.tosses)
    }

    /// The goodness test `ρ̂ ≥ 5/16`, evaluated exactly.
    pub fn passes_goodness_test(&self) -> bool {
        16 * self.light as u128 >= 5 * self.tosses as u128
    }
}

/// Output of [`mean_est`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanEstResult {
    /// `Σ w_i`.
    pub truncated_sum: u128,
    pub samples: u64,
}

impl MeanEstResult {
    /// `ŵ_L`.
    pub fn w_hat(&self) -> Ratio<u128> {
        Ratio::new(self.truncated_sum, self.samples as u128)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationPath {
    /// A final `AllAdvice` call with a certified (or caller-supplied) `d̃`.
    AllAdvice,
    /// The `d̃` search ran out of rounds and fell back to `d̃ = τ/2^(⌈log₂τ⌉+1)`.
    ThresholdFallback,
}

/// An estimate together with the state it was produced in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeEstimate {
    /// `d̂ = ŵ/ρ̂` of the final `AllAdvice` call.
    pub d_hat: Ratio<u128>,
    pub tau_used: u64,
    pub d_tilde_used: Option<Ratio<u128>>,
    pub path: TerminationPath,
    /// Oracle counters when the estimate was returned.
    pub counters: QueryCounters,
    pub seed: u64,
}

/// `CoinToss(τ, r)`: `r` rounds of `RandEdge`, a uniform endpoint `w`, and
/// `Degree(w) ≤ τ`.
pub fn coin_toss(
    o: &mut QueryOracle<'_>,
    tau: u64,
    r: u64,
    sampling: Sampling,
) -> Result<CoinTossResult, EstimateError> {
    if r == 0 {
        return Err(EstimateError::InvalidArgument(
            "coin_toss needs r >= 1".into(),
        ));
    }
    let mut light = 0u64;
    match sampling {
        Sampling::PerQuery => {
            for _ in 0..r {
                let (u, v) = o.q_rand_edge()?;
                let w = if o.coin_flip() { u } else { v };
                if o.q_degree_of(w)? as u64 <= tau {
                    light += 1;
                }
            }
        }
        Sampling::Bulk => {
            for (d, count) in o.q_edge_endpoint_degrees_bulk(r)? {
                if d as u64 <= tau {
                    light += count;
                }
            }
        }
    }
    Ok(CoinTossResult { light, tosses: r })
}

/// `MeanEst(τ, q)`: the mean of `q` random-vertex degrees, each replaced by 0
/// when it exceeds `τ`.
pub fn mean_est(
    o: &mut QueryOracle<'_>,
    tau: u64,
    q: u64,
    sampling: Sampling,
) -> Result<MeanEstResult, EstimateError> {
    if q == 0 {
        return Err(EstimateError::InvalidArgument(
            "mean_est needs q >= 1".into(),
        ));
    }
    let truncate = |d: u32| if d as u64 <= tau { d as u128 } else { 0 };
    let mut sum = 0u128;
    match sampling {
        Sampling::PerQuery => {
            for _ in 0..q {
                let (_, d) = o.q_degree_random()?;
                let w = truncate(d);
                debug_assert!(w <= tau as u128);
                sum += w;
            }
        }
        Sampling::Bulk => {
            for (d, count) in o.q_degree_random_bulk(q)? {
                let w = truncate(d);
                debug_assert!(w <= tau as u128);
                sum += w * count as u128;
            }
        }
    }
    Ok(MeanEstResult {
        truncated_sum: sum,
        samples: q,
    })
}

/// `AllAdvice(τ, d̃, ε, δ)`: one `MeanEst` and one `CoinToss`, budgeted so that
/// each is within `(1 ± ε/3)` when `τ` is good and `d̃ ≤ 16d`.
pub fn all_advice(
    o: &mut QueryOracle<'_>,
    tau: u64,
    d_tilde: Ratio<u128>,
    cfg: &EstimatorConfig,
    delta_local: f64,
) -> Result<DegreeEstimate, EstimateError> {
    cfg.validate()?;
    if tau == 0 {
        return Err(EstimateError::InvalidArgument(
            "all_advice needs tau >= 1".into(),
        ));
    }
    if *d_tilde.numer() == 0 {
        return Err(EstimateError::InvalidArgument(
            "all_advice needs d_tilde > 0".into(),
        ));
    }
    if !(delta_local > 0.0 && delta_local < 1.0) {
        return Err(EstimateError::InvalidArgument(format!(
            "delta must lie in (0, 1), got {delta_local}"
        )));
    }
    let q = cfg.mean_samples(tau, d_tilde, delta_local)?;
    let r = cfg.advice_tosses(delta_local)?;
    let mean = mean_est(o, tau, q, cfg.sampling)?;
    let coin = coin_toss(o, tau, r, cfg.sampling)?;
    if coin.light == 0 {
        return Err(EstimateError::ZeroDensity { tau });
    }
    let overflow = || EstimateError::BudgetOverflow("d_hat does not fit in 128 bits".into());
    let numer = mean
        .truncated_sum
        .checked_mul(r as u128)
        .ok_or_else(overflow)?;
    let denom = (q as u128)
        .checked_mul(coin.light as u128)
        .ok_or_else(overflow)?;
    Ok(DegreeEstimate {
        d_hat: Ratio::new(numer, denom),
        tau_used: tau,
        d_tilde_used: Some(d_tilde),
        path: TerminationPath::AllAdvice,
        counters: o.counters(),
        seed: o.seed(),
    })
}

/// `⌈log₂ τ⌉` for `τ ≥ 1`.
fn ceil_log2(tau: u64) -> u32 {
    64 - (tau - 1).leading_zeros()
}

/// Number of `AllAdvice` repetitions per `d̃` guess in [`threshold_advice`].
pub fn threshold_repetitions(tau: u64, delta_local: f64) -> u64 {
    let rounds = ceil_log2(tau.max(1)) as f64;
    ((rounds + 1.0).powi(2) / delta_local)
        .log2()
        .ceil()
        .max(1.0) as u64
}

/// `ThresholdAdvice(τ, ε, δ)`: for `d̃ = τ/2, τ/4, …` runs several
/// `AllAdvice` calls and accepts the first `d̃` that every estimate reaches,
/// then returns a fresh `AllAdvice` at that `d̃` with failure budget `δ/2`.
pub fn threshold_advice(
    o: &mut QueryOracle<'_>,
    tau: u64,
    cfg: &EstimatorConfig,
    delta_local: f64,
) -> Result<DegreeEstimate, EstimateError> {
    cfg.validate()?;
    if tau == 0 {
        return Err(EstimateError::InvalidArgument(
            "threshold_advice needs tau >= 1".into(),
        ));
    }
    let rounds = ceil_log2(tau);
    let reps = threshold_repetitions(tau, delta_local);
    let inner_delta = delta_local / ((rounds as f64 + 1.0).powi(2));
    let guess = |i: u32| Ratio::new(tau as u128, 1u128 << i);

    for i in 1..=rounds {
        let d_tilde = guess(i);
        let mut d_min: Option<Ratio<u128>> = None;
        for _ in 0..reps {
            let d_hat = all_advice(o, tau, d_tilde, cfg, inner_delta)?.d_hat;
            d_min = Some(d_min.map_or(d_hat, |m| m.min(d_hat)));
        }
        if d_min.is_some_and(|m| m >= d_tilde) {
            return all_advice(o, tau, d_tilde, cfg, delta_local / 2.0);
        }
    }
    let mut est = all_advice(o, tau, guess(rounds + 1), cfg, delta_local / 2.0)?;
    est.path = TerminationPath::ThresholdFallback;
    Ok(est)
}

/// `NoAdvice(ε, δ)`: tries `τ = 1, 2, 4, …`, accepting the first threshold
/// whose coin-toss estimate of `ρ_L` reaches 5/16, and hands it to
/// [`threshold_advice`] with failure budget `δ/2`.
pub fn no_advice(
    o: &mut QueryOracle<'_>,
    cfg: &EstimatorConfig,
) -> Result<DegreeEstimate, EstimateError> {
    cfg.validate()?;
    for step in 0..cfg.max_threshold_doublings {
        let tau = 1u64 << step;
        let r = cfg.search_tosses(step)?;
        if coin_toss(o, tau, r, cfg.sampling)?.passes_goodness_test() {
            return threshold_advice(o, tau, cfg, cfg.delta / 2.0);
        }
    }
    Err(EstimateError::SafetyCap {
        doublings: cfg.max_threshold_doublings,
    })
}

/// Convenience wrapper: [`no_advice`] on a fresh oracle.
pub fn estimate_average_degree(
    graph: &crate::graph::Graph,
    cfg: &EstimatorConfig,
    seed: u64,
) -> Result<DegreeEstimate, EstimateError> {
    no_advice(&mut QueryOracle::new(graph, seed), cfg)
}
