//! Peer-prediction trust scoring.
//!
//! Each round every voter reports a prior and a posterior belief that a random
//! peer will vote for a candidate. Once the peer's actual choice is known the
//! two beliefs are scored with a proper scoring rule, mixed with weight
//! `alpha`, and centred on the round average so that trust scores for a
//! candidate sum to zero across voters.
//!
//! All empirical conditional probabilities use add-one smoothing, so they are
//! defined from the second round on even when a conditioning event never
//! occurred.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{CandidateId, HistoryLedger, VoterId};
use crate::rng::{stream, Purpose};

/// Default belief clipping before scoring.
pub const DEFAULT_CLIP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreForm {
    #[default]
    Logarithmic,
    Quadratic,
}

impl std::str::FromStr for ScoreForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" | "logarithmic" => Ok(Self::Logarithmic),
            "quad" | "quadratic" => Ok(Self::Quadratic),
            other => Err(Error::Config(format!(
                "unknown scoring form {other:?} (expected logarithmic or quadratic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustParams {
    /// Weight of the prior term; the posterior gets `1 - alpha`.
    pub alpha: f64,
    pub form: ScoreForm,
    pub clip_delta: f64,
}

impl TrustParams {
    pub fn new(alpha: f64, form: ScoreForm, clip_delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha must lie in [0,1] (got {alpha})")));
        }
        if !(clip_delta > 0.0 && clip_delta <= 0.01) {
            return Err(Error::Config(format!(
                "clip_delta must lie in (0, 0.01] (got {clip_delta})"
            )));
        }
        Ok(Self {
            alpha,
            form,
            clip_delta,
        })
    }

    pub fn clip(&self, y: f64) -> f64 {
        y.clamp(self.clip_delta, 1.0 - self.clip_delta)
    }

    /// Unshifted score `alpha W(prior, c) + (1 - alpha) W(posterior, c)`.
    pub fn raw_score(&self, prior: f64, posterior: f64, peer_choice: bool) -> Result<f64> {
        let w_prior = score_w(prior, peer_choice, self.form, self.clip_delta)?;
        let w_post = score_w(posterior, peer_choice, self.form, self.clip_delta)?;
        Ok(self.alpha * w_prior + (1.0 - self.alpha) * w_post)
    }
}

impl Default for TrustParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            form: ScoreForm::Logarithmic,
            clip_delta: DEFAULT_CLIP,
        }
    }
}

/// One voter's beliefs about its peer's vote on one candidate in one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefReport {
    pub reporter: VoterId,
    pub peer: VoterId,
    pub candidate: CandidateId,
    pub round: usize,
    pub prior: f64,
    pub posterior: f64,
}

/// The voter's forecast of whether the candidate gets elected, given its own choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectionPrediction {
    pub elected: f64,
    pub not_elected: f64,
}

fn smoothed(hits: u32, trials: u32) -> f64 {
    (f64::from(hits) + 1.0) / (f64::from(trials) + 2.0)
}

fn require_history(k: usize) -> Result<usize> {
    if k < 2 {
        return Err(Error::Domain(
            "beliefs from history need round >= 2; use cold_start_belief in round 1".into(),
        ));
    }
    Ok(k - 1)
}

/// Belief used by every voter when no history exists.
pub fn cold_start_belief() -> f64 {
    0.5
}

/// Subjective probability that a voter picks a candidate: near-certain when it
/// is in its current top K, near-impossible otherwise.
pub fn self_probability(in_top_k: bool, params: &TrustParams) -> f64 {
    if in_top_k {
        1.0 - params.clip_delta
    } else {
        params.clip_delta
    }
}

/// Prior belief of `reporter` that `peer` votes for `candidate` in round `k`.
///
/// Mixes the empirical chance that the peer agreed with the reporter's past
/// picks (and past non-picks) by the reporter's own chance of picking it now.
pub fn prior_belief(
    ledger: &HistoryLedger,
    reporter: VoterId,
    peer: VoterId,
    candidate: CandidateId,
    k: usize,
    self_prob: f64,
    params: &TrustParams,
) -> Result<f64> {
    let history = require_history(k)?;
    if !(0.0..=1.0).contains(&self_prob) {
        return Err(Error::Domain(format!("self probability {self_prob} outside [0,1]")));
    }
    let (_, mine) = ledger.cumulative(reporter, candidate, history)?;
    let (_, theirs) = ledger.cumulative(peer, candidate, history)?;
    let joint = ledger.joint_choices(reporter, peer, candidate, history)?;
    let not_mine = history as u32 - mine;

    let given_pick = smoothed(joint, mine);
    let given_skip = smoothed(theirs - joint, not_mine);
    Ok(params.clip(given_pick * self_prob + given_skip * (1.0 - self_prob)))
}

/// Forecast of the candidate's election given the voter's choice this round:
/// how often it was elected in past rounds where it made the same choice.
pub fn election_prediction(
    ledger: &HistoryLedger,
    voter: VoterId,
    candidate: CandidateId,
    k: usize,
    own_choice: bool,
) -> Result<ElectionPrediction> {
    if k < 2 {
        return Ok(ElectionPrediction {
            elected: 0.5,
            not_elected: 0.5,
        });
    }
    let history = k - 1;
    let (_, picked) = ledger.cumulative(voter, candidate, history)?;
    let picked_and_elected = ledger.chosen_and_elected(voter, candidate, history)?;
    let (elected_total, _) = ledger.election_counts(candidate, history)?;
    let p = if own_choice {
        smoothed(picked_and_elected, picked)
    } else {
        smoothed(elected_total - picked_and_elected, history as u32 - picked)
    };
    Ok(ElectionPrediction {
        elected: p,
        not_elected: 1.0 - p,
    })
}

/// Posterior belief that `peer` votes for `candidate` in round `k`, mixing the
/// peer's past voting frequency in elected and non-elected rounds by the
/// reporter's election forecast.
pub fn posterior_belief(
    ledger: &HistoryLedger,
    peer: VoterId,
    candidate: CandidateId,
    k: usize,
    prediction: ElectionPrediction,
    params: &TrustParams,
) -> Result<f64> {
    let history = require_history(k)?;
    let ElectionPrediction { elected, not_elected } = prediction;
    if !(0.0..=1.0).contains(&elected)
        || !(0.0..=1.0).contains(&not_elected)
        || (elected + not_elected - 1.0).abs() > 1e-9
    {
        return Err(Error::Validation(format!(
            "election prediction ({elected}, {not_elected}) is not a distribution"
        )));
    }
    let (_, peer_picks) = ledger.cumulative(peer, candidate, history)?;
    let peer_picks_elected = ledger.chosen_and_elected(peer, candidate, history)?;
    let (elected_rounds, _) = ledger.election_counts(candidate, history)?;

    let given_high = smoothed(peer_picks_elected, elected_rounds);
    let given_low = smoothed(peer_picks - peer_picks_elected, history as u32 - elected_rounds);
    Ok(params.clip(given_high * elected + given_low * not_elected))
}

/// Proper scoring rule `W(y, c)`.
pub fn score_w(y: f64, peer_choice: bool, form: ScoreForm, clip_delta: f64) -> Result<f64> {
    if !(y >= clip_delta && y <= 1.0 - clip_delta) {
        return Err(Error::Domain(format!(
            "belief {y} outside [{clip_delta}, {}]",
            1.0 - clip_delta
        )));
    }
    Ok(match (form, peer_choice) {
        (ScoreForm::Logarithmic, true) => y.ln(),
        (ScoreForm::Logarithmic, false) => (1.0 - y).ln(),
        (ScoreForm::Quadratic, true) => 2.0 * y - y * y,
        (ScoreForm::Quadratic, false) => 1.0 - y * y,
    })
}

/// Centering term: minus the mean raw score over one report per voter.
///
/// `peer_choices[x]` is the realized vote of `reports[x].peer`.
pub fn beta(reports: &[BeliefReport], peer_choices: &[bool], voters: usize, params: &TrustParams) -> Result<f64> {
    if reports.len() != voters || peer_choices.len() != voters || voters == 0 {
        return Err(Error::Validation(format!(
            "beta needs exactly one report per voter ({voters} voters, {} reports, {} peer choices)",
            reports.len(),
            peer_choices.len()
        )));
    }
    let mut seen = vec![false; voters];
    for r in reports {
        if r.reporter >= voters || seen[r.reporter] {
            return Err(Error::Validation(format!(
                "reports are missing or duplicated for voter {}",
                r.reporter
            )));
        }
        seen[r.reporter] = true;
    }
    let mut total = 0.0;
    for (r, &c) in reports.iter().zip(peer_choices) {
        total += params.raw_score(r.prior, r.posterior, c)?;
    }
    Ok(-total / voters as f64)
}

/// Trust score `raw + beta`. May be negative.
pub fn trustworthiness(report: &BeliefReport, peer_choice: bool, beta_value: f64, params: &TrustParams) -> Result<f64> {
    Ok(params.raw_score(report.prior, report.posterior, peer_choice)? + beta_value)
}

/// Draws a uniformly random peer other than the voter itself.
pub fn assign_peers(voters: usize, round: usize, seed: u64) -> Result<Vec<VoterId>> {
    if voters < 2 {
        return Err(Error::Config(format!(
            "peer prediction needs at least 2 voters (got {voters})"
        )));
    }
    let mut rng = stream(seed, Purpose::Peers, round as u64, 0);
    Ok((0..voters)
        .map(|i| {
            let draw = rng.random_range(0..voters - 1);
            if draw >= i {
                draw + 1
            } else {
                draw
            }
        })
        .collect())
}

/// Expected `W(y, c)` when the peer votes yes with probability `p`.
pub fn expected_score(y: f64, p: f64, form: ScoreForm) -> f64 {
    match form {
        ScoreForm::Logarithmic => p * y.ln() + (1.0 - p) * (1.0 - y).ln(),
        ScoreForm::Quadratic => p * (2.0 * y - y * y) + (1.0 - p) * (1.0 - y * y),
    }
}

/// Maximizers of expected trust found by exhaustive grid search.
///
/// A component is `None` when its weight is zero and any report is optimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcArgmax {
    pub prior: Option<f64>,
    pub posterior: Option<f64>,
}

impl IcArgmax {
    /// Largest distance from the truthful reports among the identified components.
    pub fn deviation(&self, p1: f64, p2: f64) -> f64 {
        let d1 = self.prior.map_or(0.0, |y| (y - p1).abs());
        let d2 = self.posterior.map_or(0.0, |y| (y - p2).abs());
        d1.max(d2)
    }
}

/// Report grid `step, 2 step, ...` strictly inside `(0, 1)`.
pub fn report_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (1..n).map(|m| m as f64 * step).filter(|&y| y < 1.0).collect()
}

/// Searches every `(prior, posterior)` report pair on the grid for the one that
/// maximizes expected trust when the peer votes yes with probability `p1` in
/// the prior term and `p2` in the posterior term.
pub fn ic_check(p1: f64, p2: f64, alpha: f64, form: ScoreForm, grid_step: f64) -> Result<IcArgmax> {
    if !(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0) {
        return Err(Error::Domain(format!(
            "truthful beliefs ({p1}, {p2}) must lie in (0,1)"
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [0,1]")));
    }
    if !(grid_step > 0.0 && grid_step <= 0.01) {
        return Err(Error::Domain(format!("grid step {grid_step} must lie in (0, 0.01]")));
    }
    let grid = report_grid(grid_step);
    let prior_terms: Vec<f64> = grid.iter().map(|&y| alpha * expected_score(y, p1, form)).collect();
    let post_terms: Vec<f64> = grid
        .iter()
        .map(|&y| (1.0 - alpha) * expected_score(y, p2, form))
        .collect();

    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (a, pa) in prior_terms.iter().enumerate() {
        for (b, pb) in post_terms.iter().enumerate() {
            let value = pa + pb;
            if value > best.0 {
                best = (value, a, b);
            }
        }
    }
    Ok(IcArgmax {
        prior: (alpha > 0.0).then(|| grid[best.1]),
        posterior: (alpha < 1.0).then(|| grid[best.2]),
    })
}
