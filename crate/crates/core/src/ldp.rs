//! Large-deviation analysis of the ranking queue.
//!
//! The queue of a candidate is modelled as `Q_t = C_{t-1} - M_{t-1}` where `C`
//! and `M` are independent Poisson counting processes with per-round means
//! `Lambda` (selections) and `lambda` (merit). For `lambda > Lambda` the queue
//! drifts down and the probability that its running maximum ever exceeds a
//! valve `L = l b` decays like `exp(-l I(b))` with `I(b) = b log(lambda / Lambda)`.
//!
//! This module has the closed forms (optimal tilt, Legendre transform, rate
//! function, effective valve and effective merit) and a Monte Carlo estimator
//! of the failure probability used to check them.

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{count_where, Execution};
use crate::rng::{stream, Purpose};

/// Bundle of analysis parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdpParams {
    /// Expected merit per round.
    pub lambda: f64,
    /// Expected selections per round.
    pub big_lambda: f64,
    /// Valve slope; the valve is `l * b`.
    pub b: f64,
    pub l: f64,
    /// Voting failure tolerance in `(0, 1]`.
    pub epsilon: f64,
}

impl LdpParams {
    pub fn validate(&self) -> Result<()> {
        check_stable(self.lambda, self.big_lambda)?;
        check_epsilon(self.epsilon)?;
        if !(self.b >= 0.0 && self.l >= 0.0) {
            return Err(Error::Domain(format!(
                "b={} and l={} must be nonnegative",
                self.b, self.l
            )));
        }
        Ok(())
    }

    pub fn valve(&self) -> f64 {
        self.l * self.b
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!("{name} must be positive (got {v})")));
    }
    Ok(())
}

fn check_stable(lambda: f64, big_lambda: f64) -> Result<()> {
    check_positive("Lambda", big_lambda)?;
    check_positive("lambda", lambda)?;
    if lambda <= big_lambda {
        return Err(Error::Stability { lambda, big_lambda });
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0,1] (got {epsilon})")));
    }
    Ok(())
}

/// Objective `G(theta) = theta x - Lambda (e^theta - 1) - lambda (e^-theta - 1)`.
pub fn tilt_objective(theta: f64, x: f64, lambda: f64, big_lambda: f64) -> f64 {
    theta * x - big_lambda * (theta.exp() - 1.0) - lambda * ((-theta).exp() - 1.0)
}

/// The unique maximizer of the tilt objective, `log((x + sqrt(x^2 + 4 lambda Lambda)) / (2 Lambda))`.
pub fn theta_star(x: f64, lambda: f64, big_lambda: f64) -> Result<f64> {
    check_positive("x", x)?;
    check_positive("lambda", lambda)?;
    check_positive("Lambda", big_lambda)?;
    let root = (x * x + 4.0 * lambda * big_lambda).sqrt();
    Ok(((x + root) / (2.0 * big_lambda)).ln())
}

/// Legendre transform of the queue's cumulant generating function at `x > 0`.
pub fn legendre(x: f64, lambda: f64, big_lambda: f64) -> Result<f64> {
    let theta = theta_star(x, lambda, big_lambda)?;
    let s = x + (x * x + 4.0 * lambda * big_lambda).sqrt();
    let value = x * theta - s / 2.0 - 2.0 * big_lambda * lambda / s + lambda + big_lambda;
    // the supremum is nonnegative; tiny negatives are rounding near x = lambda - Lambda
    Ok(value.max(0.0))
}

/// Decay rate `I(b) = b log(lambda / Lambda)` of the voting failure rate.
pub fn rate_function(b: f64, lambda: f64, big_lambda: f64) -> Result<f64> {
    check_stable(lambda, big_lambda)?;
    if !(b >= 0.0) {
        return Err(Error::Domain(format!("b must be nonnegative (got {b})")));
    }
    Ok(b * (lambda / big_lambda).ln())
}

/// Time scale `b / (lambda - Lambda)` at which the rate function's infimum is attained.
pub fn rate_minimizer(b: f64, lambda: f64, big_lambda: f64) -> Result<f64> {
    check_stable(lambda, big_lambda)?;
    Ok(b / (lambda - big_lambda))
}

/// True when the rate function's minimizer falls below two rounds, i.e. the
/// infimum is only attained when short horizons are admitted.
pub fn short_horizon_regime(b: f64, lambda: f64, big_lambda: f64) -> Result<bool> {
    Ok(rate_minimizer(b, lambda, big_lambda)? < 2.0)
}

/// Effective selection valve `L*(eps) = -log eps / log(lambda / Lambda)`.
pub fn effective_valve(epsilon: f64, lambda: f64, big_lambda: f64) -> Result<f64> {
    check_stable(lambda, big_lambda)?;
    check_epsilon(epsilon)?;
    // written as a positive quotient so eps = 1 gives +0.0
    Ok((1.0 / epsilon).ln() / (lambda / big_lambda).ln())
}

/// Effective expectation of merit `lambda*(eps) = Lambda e^{-log eps / L}`.
///
/// As the valve grows this tends to `Lambda`, not to zero.
pub fn effective_merit(epsilon: f64, big_lambda: f64, valve: f64) -> Result<f64> {
    check_positive("Lambda", big_lambda)?;
    check_epsilon(epsilon)?;
    if !(valve > 0.0) {
        return Err(Error::Domain(format!("valve L must be positive (got {valve})")));
    }
    Ok(big_lambda * ((1.0 / epsilon).ln() / valve).exp())
}

/// Monte Carlo estimate of `P(sup_t Q_t > L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub probability: f64,
    pub stderr: f64,
    pub hits: u64,
    pub replicas: u64,
    pub horizon: u64,
}

impl McEstimate {
    fn from_hits(hits: u64, replicas: u64, horizon: u64) -> Self {
        let p = hits as f64 / replicas as f64;
        Self {
            probability: p,
            stderr: (p * (1.0 - p) / replicas as f64).sqrt(),
            hits,
            replicas,
            horizon,
        }
    }
}

/// Monte Carlo settings shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    /// Last round observed; the queue is watched at rounds `1..=horizon`.
    pub horizon: u64,
    pub replicas: u64,
    pub seed: u64,
    pub execution: Execution,
    /// Stop following a path once it sits so far below the valve that the
    /// chance of climbing back is under [`PRUNE_TOLERANCE`].
    pub prune: bool,
}

impl McSettings {
    pub fn new(horizon: u64, replicas: u64, seed: u64) -> Self {
        Self {
            horizon,
            replicas,
            seed,
            execution: Execution::default(),
            prune: true,
        }
    }
}

/// Upper bound on the probability that a pruned path would have crossed the valve.
pub const PRUNE_TOLERANCE: f64 = 1e-15;

/// Depth below the valve from which a return is less likely than [`PRUNE_TOLERANCE`].
///
/// In continuous time the queue jumps up with probability `Lambda / (lambda + Lambda)`
/// per jump, so it ever climbs `h` levels with probability `(Lambda / lambda)^h`.
/// Watching only at integer rounds can only lower that.
fn prune_depth(lambda: f64, big_lambda: f64) -> f64 {
    (PRUNE_TOLERANCE.ln() / (big_lambda / lambda).ln()).ceil()
}

/// Whether one replica's running maximum exceeds `level`.
fn path_exceeds(
    level: f64,
    horizon: u64,
    arrivals: &Poisson<f64>,
    services: &Poisson<f64>,
    depth: Option<f64>,
    rng: &mut impl rand::Rng,
) -> bool {
    // Q_1 = 0: both sums are empty before round 2
    let mut q = 0.0f64;
    if q > level {
        return true;
    }
    for _ in 2..=horizon {
        q += arrivals.sample(rng) - services.sample(rng);
        if q > level {
            return true;
        }
        if let Some(d) = depth {
            if q < level - d {
                return false;
            }
        }
    }
    false
}

/// Fraction of replicas whose ranking queue exceeds `level` within the horizon.
///
/// Replica `r` always draws from the stream keyed by `(seed, r)`, so runs at
/// different levels share sample paths and estimates are monotone in `level`.
pub fn mc_failure_rate(lambda: f64, big_lambda: f64, level: f64, settings: &McSettings) -> Result<McEstimate> {
    check_stable(lambda, big_lambda)?;
    if settings.horizon < 1 || settings.replicas < 1 {
        return Err(Error::Config("horizon and replicas must be at least 1".into()));
    }
    if level.is_nan() {
        return Err(Error::Domain("valve is NaN".into()));
    }
    let arrivals = Poisson::new(big_lambda).map_err(|e| Error::Domain(e.to_string()))?;
    let services = Poisson::new(lambda).map_err(|e| Error::Domain(e.to_string()))?;
    let depth = settings.prune.then(|| prune_depth(lambda, big_lambda));
    let horizon = settings.horizon;
    let seed = settings.seed;

    let hits = count_where(settings.execution, settings.replicas, |r| {
        let mut rng = stream(seed, Purpose::MonteCarlo, 0, r);
        path_exceeds(level, horizon, &arrivals, &services, depth, &mut rng)
    });
    Ok(McEstimate::from_hits(hits, settings.replicas, horizon))
}

/// Monte Carlo check of the decay rate over a list of scale parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub b: f64,
    /// `(l, estimate of P(sup Q > l b))` per scale parameter.
    pub points: Vec<(f64, McEstimate)>,
    /// Least-squares slope of `log p` against `l`; approximates `-I(b)`.
    pub slope: f64,
    pub intercept: f64,
    /// Closed-form `I(b)` for comparison.
    pub rate: f64,
}

impl DecayFit {
    /// `|slope + I(b)| / I(b)`.
    pub fn relative_error(&self) -> f64 {
        (self.slope + self.rate).abs() / self.rate
    }
}

/// Ordinary least squares `y = a + s x`; returns `(s, a)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Estimates `P(sup Q > l b)` for each `l` and fits the exponential decay in `l`.
///
/// If `log P ~ c - l I(b)` the fitted slope converges to `-I(b)` and the
/// subexponential prefactor only moves the intercept.
pub fn verify_decay(lambda: f64, big_lambda: f64, b: f64, l_values: &[f64], settings: &McSettings) -> Result<DecayFit> {
    let rate = rate_function(b, lambda, big_lambda)?;
    if l_values.len() < 2 {
        return Err(Error::Config("decay fit needs at least two scale parameters".into()));
    }
    if l_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("scale parameters must be strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let est = mc_failure_rate(lambda, big_lambda, l * b, settings)?;
        if est.hits == 0 {
            return Err(Error::InsufficientReplicas {
                level: l * b,
                replicas: settings.replicas,
            });
        }
        points.push((l, est));
    }
    let logs: Vec<f64> = points.iter().map(|(_, e)| e.probability.ln()).collect();
    let (slope, intercept) = least_squares(l_values, &logs);
    Ok(DecayFit {
        b,
        points,
        slope,
        intercept,
        rate,
    })
}
