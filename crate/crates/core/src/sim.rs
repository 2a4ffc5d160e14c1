//! Multi-round scenario engine.
//!
//! Each round every voter picks the K candidates with the highest selection
//! pressure, reports beliefs about a random peer's picks, and the candidates
//! are scored with stake and trust weights. The K best are elected, may fail
//! to produce a block, and split the block reward among their supporters. The
//! resulting profits feed back into next round's merit.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::election::{candidate_score, distribute_reward, elect, ScoreBoard, DEFAULT_BLOCK_REWARD};
use crate::error::{Error, Result};
use crate::ledger::{
    validate_candidates, CandidateId, CandidateProfile, HistoryLedger, PairTable, RoundData, RoundOutcome, VoterId,
    VoterProfile,
};
use crate::par::{map_indexed, Execution};
use crate::rng::{stream, Purpose};
use crate::selection::{self, AvailabilityFn, MeritParams};
use crate::trust::{self, BeliefReport, ScoreForm, TrustParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryMode {
    /// Bribed voters swap their weakest pick for the briber.
    #[default]
    OverrideChoice,
    /// As `OverrideChoice`, and bribed voters also claim their peers back the briber.
    InflateBelief,
}

impl std::str::FromStr for AdversaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "override_choice" | "override" => Ok(Self::OverrideChoice),
            "inflate_belief" | "inflate" => Ok(Self::InflateBelief),
            other => Err(Error::Config(format!(
                "unknown adversary mode {other:?} (expected override_choice or inflate_belief)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    pub briber_candidates: Vec<CandidateId>,
    pub bribed_voters: Vec<VoterId>,
    #[serde(default)]
    pub mode: AdversaryMode,
}

fn default_candidates() -> usize {
    50
}
fn default_alpha() -> f64 {
    0.5
}
fn default_rho() -> f64 {
    5.0
}
fn default_block_reward() -> f64 {
    DEFAULT_BLOCK_REWARD
}
fn default_stake_choices() -> Vec<u32> {
    vec![1, 2, 3, 4]
}
fn default_true() -> bool {
    true
}
fn default_clip() -> f64 {
    trust::DEFAULT_CLIP
}
fn default_unavailability_step() -> f64 {
    0.02
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_voters: usize,
    #[serde(default = "default_candidates")]
    pub num_candidates: usize,
    pub k_supernodes: usize,
    pub rounds: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub availability_fn: AvailabilityFn,
    #[serde(default = "default_block_reward")]
    pub block_reward: f64,
    /// Stakes are drawn uniformly from this set unless `stakes` is given.
    #[serde(default = "default_stake_choices")]
    pub stake_choices: Vec<u32>,
    /// Explicit per-voter stakes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stakes: Option<Vec<u32>>,
    #[serde(default = "default_true")]
    pub trust_enabled: bool,
    #[serde(default)]
    pub score_form: ScoreForm,
    #[serde(default = "default_clip")]
    pub clip_delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversarySpec>,
    /// Candidate ids from most to least capable. Shuffled by the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capability_order: Option<Vec<CandidateId>>,
    /// The candidate of capability rank `r` (0 = best) fails with probability `r * step`.
    #[serde(default = "default_unavailability_step")]
    pub unavailability_step: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// A config with the defaults for everything but the population size.
    pub fn new(num_voters: usize, k_supernodes: usize, rounds: usize, seed: u64) -> Self {
        Self {
            num_voters,
            num_candidates: default_candidates(),
            k_supernodes,
            rounds,
            alpha: default_alpha(),
            rho: default_rho(),
            availability_fn: AvailabilityFn::default(),
            block_reward: default_block_reward(),
            stake_choices: default_stake_choices(),
            stakes: None,
            trust_enabled: true,
            score_form: ScoreForm::default(),
            clip_delta: default_clip(),
            adversary: None,
            capability_order: None,
            unavailability_step: default_unavailability_step(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m, k) = (self.num_voters, self.num_candidates, self.k_supernodes);
        if k > m {
            return Err(Error::Config(format!(
                "k_supernodes exceeds num_candidates ({k} > {m})"
            )));
        }
        if k == 0 {
            return Err(Error::Config("k_supernodes must be at least 1".into()));
        }
        if n < 2 {
            return Err(Error::Config(format!("num_voters must be at least 2 (got {n})")));
        }
        if !(self.block_reward > 0.0 && self.block_reward.is_finite()) {
            return Err(Error::Config(format!(
                "block_reward must be positive (got {})",
                self.block_reward
            )));
        }
        self.merit_params()?;
        self.trust_params()?;
        match &self.stakes {
            Some(stakes) => {
                if stakes.len() != n {
                    return Err(Error::Config(format!(
                        "stakes lists {} voters, expected {n}",
                        stakes.len()
                    )));
                }
                if stakes.contains(&0) {
                    return Err(Error::Config("stakes must be at least 1".into()));
                }
            }
            None => {
                if self.stake_choices.is_empty() || self.stake_choices.contains(&0) {
                    return Err(Error::Config(
                        "stake_choices must be a nonempty set of positive stakes".into(),
                    ));
                }
            }
        }
        if !(self.unavailability_step >= 0.0) || self.unavailability_step * (m.saturating_sub(1)) as f64 > 1.0 {
            return Err(Error::Config(format!(
                "unavailability_step {} pushes the least capable candidate past probability 1",
                self.unavailability_step
            )));
        }
        if let Some(order) = &self.capability_order {
            let mut seen = vec![false; m];
            if order.len() != m || order.iter().any(|&j| j >= m || std::mem::replace(&mut seen[j], true)) {
                return Err(Error::Config(format!(
                    "capability_order must be a permutation of 0..{m}"
                )));
            }
        }
        if let Some(adv) = &self.adversary {
            if let Some(&j) = adv.briber_candidates.iter().find(|&&j| j >= m) {
                return Err(Error::Config(format!("briber candidate {j} does not exist")));
            }
            if let Some(&i) = adv.bribed_voters.iter().find(|&&i| i >= n) {
                return Err(Error::Config(format!("bribed voter {i} does not exist")));
            }
            if adv.briber_candidates.len() > k {
                return Err(Error::Config("more bribers than super-node seats".into()));
            }
        }
        Ok(())
    }

    pub fn merit_params(&self) -> Result<MeritParams> {
        MeritParams::new(self.rho, self.availability_fn, self.block_reward)
    }

    pub fn trust_params(&self) -> Result<TrustParams> {
        TrustParams::new(self.alpha, self.score_form, self.clip_delta)
    }
}

/// Voters and candidates of one experiment, derived from the config and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub voters: Vec<VoterProfile>,
    pub candidates: Vec<CandidateProfile>,
}

impl Population {
    pub fn stakes(&self) -> Vec<u32> {
        self.voters.iter().map(|v| v.stake).collect()
    }

    /// Candidate ids from most to least capable.
    pub fn capability_order(&self) -> Vec<CandidateId> {
        let mut order: Vec<CandidateId> = (0..self.candidates.len()).collect();
        order.sort_by_key(|&j| self.candidates[j].true_capability);
        order
    }
}

pub fn build_population(config: &ScenarioConfig) -> Result<Population> {
    config.validate()?;
    let stakes = match &config.stakes {
        Some(s) => s.clone(),
        None => {
            let mut rng = stream(config.seed, Purpose::Population, 0, 0);
            (0..config.num_voters)
                .map(|_| config.stake_choices[rng.random_range(0..config.stake_choices.len())])
                .collect()
        }
    };
    let order = match &config.capability_order {
        Some(o) => o.clone(),
        None => {
            let mut o: Vec<CandidateId> = (0..config.num_candidates).collect();
            o.shuffle(&mut stream(config.seed, Purpose::Population, 0, 1));
            o
        }
    };
    let mut candidates: Vec<CandidateProfile> = (0..config.num_candidates)
        .map(|id| CandidateProfile {
            id,
            true_unavailability: 0.0,
            true_capability: 0,
        })
        .collect();
    for (rank, &j) in order.iter().enumerate() {
        candidates[j].true_capability = rank + 1;
        candidates[j].true_unavailability = config.unavailability_step * rank as f64;
    }
    validate_candidates(&candidates)?;
    let voters = stakes
        .into_iter()
        .enumerate()
        .map(|(id, stake)| VoterProfile { id, stake })
        .collect();
    Ok(Population { voters, candidates })
}

/// Replaces each bribed voter's weakest picks with the bribers it lacks.
///
/// `choices[i]` lists voter `i`'s picks from highest to lowest pressure, so
/// the weakest pick is the last one not already taken by a briber.
pub fn apply_bribery(choices: &mut [Vec<CandidateId>], spec: &AdversarySpec) {
    for &i in &spec.bribed_voters {
        let Some(row) = choices.get_mut(i) else { continue };
        for &briber in &spec.briber_candidates {
            if row.contains(&briber) {
                continue;
            }
            if let Some(slot) = row.iter().rposition(|j| !spec.briber_candidates.contains(j)) {
                row[slot] = briber;
            }
        }
    }
}

/// Candidates ordered by ground truth: lower true unavailability first, then
/// more successful blocks so far, then lower id.
pub fn capability_ranking(candidates: &[CandidateProfile], ledger: Option<&HistoryLedger>) -> Vec<CandidateId> {
    let success = |j: CandidateId| -> u32 {
        ledger
            .and_then(|l| l.election_counts(j, l.rounds_completed()).ok())
            .map_or(0, |(e, f)| e - f)
    };
    let mut order: Vec<CandidateId> = candidates.iter().map(|c| c.id).collect();
    order.sort_by(|&a, &b| {
        candidates[a]
            .true_unavailability
            .total_cmp(&candidates[b].true_unavailability)
            .then(success(b).cmp(&success(a)))
            .then(a.cmp(&b))
    });
    order
}

/// Extra per-round detail kept next to the [`RoundOutcome`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub choices: PairTable<bool>,
    pub peers: Vec<VoterId>,
    pub profits: PairTable<f64>,
}

/// A running experiment: population, history and the config that drives it.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: ScenarioConfig,
    population: Population,
    stakes: Vec<u32>,
    ledger: HistoryLedger,
    merit_params: MeritParams,
    trust_params: TrustParams,
    execution: Execution,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let population = build_population(&config)?;
        let ledger = HistoryLedger::new(config.num_voters, config.num_candidates, config.k_supernodes)?;
        Ok(Self {
            stakes: population.stakes(),
            merit_params: config.merit_params()?,
            trust_params: config.trust_params()?,
            population,
            ledger,
            config,
            execution: Execution::default(),
        })
    }

    /// Chooses how per-voter belief computations are spread over threads.
    /// Results do not depend on it.
    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn ledger(&self) -> &HistoryLedger {
        &self.ledger
    }

    /// Plays round `k`, which must be the next one. On error nothing is recorded.
    pub fn run_round(&mut self, k: usize) -> Result<(RoundOutcome, RoundTrace)> {
        let expected = self.ledger.rounds_completed() + 1;
        if k != expected {
            return Err(Error::Sequencing { expected, got: k });
        }
        let cfg = &self.config;
        let (n, m, kk) = (cfg.num_voters, cfg.num_candidates, cfg.k_supernodes);
        let ledger = &self.ledger;
        let tp = &self.trust_params;

        // pressure and honest picks
        let pressure = selection::pressure_table(ledger, k)?;
        let honest: Vec<Vec<CandidateId>> = (0..n)
            .map(|i| selection::choose_topk(pressure.row(i), kk))
            .collect::<Result<_>>()?;

        let peers = trust::assign_peers(n, k, cfg.seed)?;

        // priors are broadcast before any bribe changes a ballot
        let priors: PairTable<f64> = if cfg.trust_enabled && k > 1 {
            let rows = map_indexed(self.execution, n, |i| {
                let mut picked = vec![false; m];
                for &j in &honest[i] {
                    picked[j] = true;
                }
                (0..m)
                    .map(|j| {
                        let sp = trust::self_probability(picked[j], tp);
                        trust::prior_belief(ledger, i, peers[i], j, k, sp, tp)
                    })
                    .collect::<Result<Vec<f64>>>()
            });
            table_from_rows(n, m, rows)?
        } else {
            PairTable::filled(n, m, trust::cold_start_belief())
        };

        let mut ballots = honest;
        if let Some(adv) = &cfg.adversary {
            apply_bribery(&mut ballots, adv);
        }
        let mut choices = PairTable::filled(n, m, false);
        for (i, row) in ballots.iter().enumerate() {
            for &j in row {
                choices.set(i, j, true);
            }
        }

        let trust_table = if cfg.trust_enabled {
            let mut posteriors: PairTable<f64> = if k > 1 {
                let rows = map_indexed(self.execution, n, |i| {
                    (0..m)
                        .map(|j| {
                            let pred = trust::election_prediction(ledger, i, j, k, *choices.get(i, j))?;
                            trust::posterior_belief(ledger, peers[i], j, k, pred, tp)
                        })
                        .collect::<Result<Vec<f64>>>()
                });
                table_from_rows(n, m, rows)?
            } else {
                PairTable::filled(n, m, trust::cold_start_belief())
            };
            let mut priors = priors;
            if let Some(adv) = cfg
                .adversary
                .as_ref()
                .filter(|a| a.mode == AdversaryMode::InflateBelief)
            {
                let claim = tp.clip(1.0);
                for &i in &adv.bribed_voters {
                    for &j in &adv.briber_candidates {
                        priors.set(i, j, claim);
                        posteriors.set(i, j, claim);
                    }
                }
            }
            Some(self.trust_scores(k, &priors, &posteriors, &choices, &peers)?)
        } else {
            None
        };

        // scores and election
        let unit = vec![1.0; n];
        let mut scores = Vec::with_capacity(m);
        for j in 0..m {
            let col: Vec<bool> = choices.column(j).copied().collect();
            let t: Vec<f64> = match &trust_table {
                Some(t) => t.column(j).copied().collect(),
                None => unit.clone(),
            };
            scores.push(candidate_score(&col, &t, &self.stakes)?);
        }
        let board = ScoreBoard {
            round: k,
            entries: scores,
        };
        let elected = elect(&board, kk)?;
        let negative_score_elected = elected.iter().any(|&j| board.entries[j] < 0.0);
        if negative_score_elected {
            log::debug!("round {k}: a candidate with a negative score filled a seat");
        }

        // block production and rewards
        let mut unavailable = Vec::new();
        let mut escrowed = Vec::new();
        let mut profits = PairTable::filled(n, m, 0.0);
        for &j in &elected {
            let mut rng = stream(cfg.seed, Purpose::Unavailability, k as u64, j as u64);
            let failed = rng.random::<f64>() < self.population.candidates[j].true_unavailability;
            if failed {
                unavailable.push(j);
            }
            let weights: Vec<f64> = (0..n)
                .map(|i| {
                    let t = trust_table.as_ref().map_or(1.0, |t| *t.get(i, j));
                    if *choices.get(i, j) {
                        f64::from(self.stakes[i]) * t
                    } else {
                        0.0
                    }
                })
                .collect();
            let split = distribute_reward(cfg.block_reward, &weights, !failed)?;
            if split.escrowed {
                escrowed.push(j);
            }
            for (i, share) in split.shares.into_iter().enumerate() {
                profits.set(i, j, share);
            }
        }
        let rewards: Vec<f64> = (0..n).map(|i| profits.row(i).iter().sum()).collect();

        // merit uses the unavailability estimate including this round
        let through = k - 1;
        let mut merits = PairTable::filled(n, m, 0.0);
        for j in 0..m {
            let (mut e, mut f) = if through > 0 {
                ledger.election_counts(j, through)?
            } else {
                (0, 0)
            };
            if elected.contains(&j) {
                e += 1;
                if unavailable.contains(&j) {
                    f += 1;
                }
            }
            let u_hat = if e == 0 { 0.0 } else { f64::from(f) / f64::from(e) };
            for i in 0..n {
                merits.set(i, j, selection::merit(u_hat, *profits.get(i, j), &self.merit_params)?);
            }
        }

        let outcome = RoundOutcome {
            round: k,
            scores: board.entries,
            elected,
            unavailable,
            rewards,
            trust: trust_table,
            escrowed,
            negative_score_elected,
        };
        let trace = RoundTrace {
            choices: choices.clone(),
            peers,
            profits: profits.clone(),
        };
        self.ledger.append_round(
            &outcome,
            RoundData {
                choices,
                merits,
                profits,
            },
        )?;
        Ok((outcome, trace))
    }

    fn trust_scores(
        &self,
        k: usize,
        priors: &PairTable<f64>,
        posteriors: &PairTable<f64>,
        choices: &PairTable<bool>,
        peers: &[VoterId],
    ) -> Result<PairTable<f64>> {
        let (n, m) = (priors.voters(), priors.candidates());
        let mut table = PairTable::filled(n, m, 0.0);
        for j in 0..m {
            let reports: Vec<BeliefReport> = (0..n)
                .map(|i| BeliefReport {
                    reporter: i,
                    peer: peers[i],
                    candidate: j,
                    round: k,
                    prior: *priors.get(i, j),
                    posterior: *posteriors.get(i, j),
                })
                .collect();
            let peer_choices: Vec<bool> = peers.iter().map(|&p| *choices.get(p, j)).collect();
            let b = trust::beta(&reports, &peer_choices, n, &self.trust_params)?;
            for (r, &c) in reports.iter().zip(&peer_choices) {
                table.set(r.reporter, j, trust::trustworthiness(r, c, b, &self.trust_params)?);
            }
        }
        Ok(table)
    }
}

fn table_from_rows(n: usize, m: usize, rows: Vec<Result<Vec<f64>>>) -> Result<PairTable<f64>> {
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    Ok(PairTable::from_fn(n, m, |i, j| rows[i][j]))
}

/// Capability and election-frequency rankings side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    /// The K most capable candidates, best first.
    pub capability: Vec<CandidateId>,
    /// The K candidates elected most often, most frequent first; ties go to the lower id.
    pub elected: Vec<CandidateId>,
}

impl RankingTable {
    /// Whether both columns hold the same set of candidates.
    pub fn sets_match(&self) -> bool {
        let mut a = self.capability.clone();
        let mut b = self.elected.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ScenarioConfig,
    pub population: Population,
    pub rounds: Vec<RoundOutcome>,
    /// `cumulative_rewards[r][i]`: voter `i`'s total reward after round `r + 1`.
    pub cumulative_rewards: Vec<Vec<f64>>,
    /// Rounds each candidate was elected.
    pub election_counts: Vec<u32>,
    /// Rounds each candidate was elected but produced no block.
    pub failure_counts: Vec<u32>,
    pub ranking: RankingTable,
    /// Non-fatal configuration concerns, such as `rho` below the stability bound.
    pub warnings: Vec<String>,
}

impl ExperimentResult {
    /// Each voter's total reward at the end of the run.
    pub fn final_rewards(&self) -> Vec<f64> {
        self.cumulative_rewards
            .last()
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.config.num_voters])
    }
}

/// The `rho` above which every candidate's ranking queue is stable, taking no
/// credit for profit and the worst true unavailability in the population.
pub fn stability_warning(config: &ScenarioConfig, population: &Population) -> Result<Option<String>> {
    let worst = population
        .candidates
        .iter()
        .map(|c| c.true_unavailability)
        .fold(0.0, f64::max);
    let big_lambda = config.k_supernodes as f64 / config.num_candidates as f64;
    let bound = match selection::min_rho(big_lambda, 0.0, config.availability_fn.eval(worst)) {
        Ok(b) => b,
        Err(Error::Singularity(msg)) => return Ok(Some(format!("least available candidate is never stable: {msg}"))),
        Err(e) => return Err(e),
    };
    Ok((config.rho <= bound).then(|| format!("rho {} does not exceed the stability bound {bound:.4}", config.rho)))
}

/// Runs all configured rounds.
pub fn run_experiment(config: &ScenarioConfig) -> Result<ExperimentResult> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ScenarioConfig, execution: Execution) -> Result<ExperimentResult> {
    let mut sim = Simulation::new(config.clone())?.with_execution(execution);
    let mut warnings = Vec::new();
    if let Some(w) = stability_warning(config, &sim.population)? {
        log::warn!("{w}");
        warnings.push(w);
    }
    let (n, m, kk) = (config.num_voters, config.num_candidates, config.k_supernodes);
    let mut rounds = Vec::with_capacity(config.rounds);
    let mut cumulative_rewards = Vec::with_capacity(config.rounds);
    let mut running = vec![0.0; n];
    let mut election_counts = vec![0u32; m];
    let mut failure_counts = vec![0u32; m];
    for k in 1..=config.rounds {
        let (outcome, _) = sim.run_round(k)?;
        for (total, r) in running.iter_mut().zip(&outcome.rewards) {
            *total += r;
        }
        cumulative_rewards.push(running.clone());
        for &j in &outcome.elected {
            election_counts[j] += 1;
        }
        for &j in &outcome.unavailable {
            failure_counts[j] += 1;
        }
        rounds.push(outcome);
    }
    let flagged = |pred: &dyn Fn(&RoundOutcome) -> bool| -> Vec<String> {
        rounds.iter().filter(|o| pred(o)).map(|o| o.round.to_string()).collect()
    };
    let negative = flagged(&|o| o.negative_score_elected);
    if !negative.is_empty() {
        warnings.push(format!(
            "negative-score candidates were elected in rounds {}",
            negative.join(",")
        ));
    }
    let withheld = flagged(&|o| !o.escrowed.is_empty());
    if !withheld.is_empty() {
        warnings.push(format!(
            "block rewards were withheld for lack of positive-weight supporters in rounds {}",
            withheld.join(",")
        ));
    }
    let capability = capability_ranking(&sim.population.candidates, Some(&sim.ledger));
    let mut by_count: Vec<CandidateId> = (0..m).collect();
    by_count.sort_by(|&a, &b| election_counts[b].cmp(&election_counts[a]).then(a.cmp(&b)));
    let ranking = RankingTable {
        capability: capability[..kk].to_vec(),
        elected: by_count[..kk].to_vec(),
    };
    Ok(ExperimentResult {
        config: config.clone(),
        population: sim.population,
        rounds,
        cumulative_rewards,
        election_counts,
        failure_counts,
        ranking,
        warnings,
    })
}

/// Runs the same scenario under each seed, concurrently when `execution` allows.
pub fn run_seeds(config: &ScenarioConfig, seeds: &[u64], execution: Execution) -> Result<Vec<ExperimentResult>> {
    map_indexed(execution, seeds.len(), |x| {
        let mut c = config.clone();
        c.seed = seeds[x];
        run_experiment_with(&c, Execution::Sequential)
    })
    .into_iter()
    .collect()
}

/// Reruns `config` once per entry of `stakes`, changing only the stake of voter
/// `probe`. Every other voter keeps the stake drawn for the original config.
pub fn probe_stake_sweep(
    config: &ScenarioConfig,
    probe: VoterId,
    stakes: &[u32],
    execution: Execution,
) -> Result<Vec<ExperimentResult>> {
    let base = build_population(config)?.stakes();
    if probe >= base.len() {
        return Err(Error::Config(format!("probe voter {probe} does not exist")));
    }
    map_indexed(execution, stakes.len(), |x| {
        let mut c = config.clone();
        let mut s = base.clone();
        s[probe] = stakes[x];
        c.stakes = Some(s);
        run_experiment_with(&c, Execution::Sequential)
    })
    .into_iter()
    .collect()
}

/// Thresholds for calling two availability functions equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InsensitivityThresholds {
    /// Minimum fraction of rounds whose elected sets agree.
    pub min_round_agreement: f64,
    /// Maximum relative difference of a voter's final cumulative reward.
    pub max_reward_gap: f64,
}

impl Default for InsensitivityThresholds {
    fn default() -> Self {
        Self {
            min_round_agreement: 0.9,
            max_reward_gap: 0.15,
        }
    }
}

/// Comparison of one scenario run under every availability function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityComparison {
    pub thresholds: InsensitivityThresholds,
    pub functions: Vec<AvailabilityFn>,
    /// Final cumulative reward per voter under each function.
    pub final_rewards: Vec<Vec<f64>>,
    /// Fraction of rounds in which every function elected the same set.
    pub round_agreement: f64,
    /// Largest `|a - b| / max(a, b)` over voters and function pairs.
    pub max_reward_gap: f64,
}

impl AvailabilityComparison {
    pub fn passes(&self) -> bool {
        self.round_agreement >= self.thresholds.min_round_agreement
            && self.max_reward_gap <= self.thresholds.max_reward_gap
    }
}

/// Runs `config` once per availability function and measures how much the outcome moves.
pub fn compare_availability(
    config: &ScenarioConfig,
    thresholds: InsensitivityThresholds,
    execution: Execution,
) -> Result<(AvailabilityComparison, Vec<ExperimentResult>)> {
    let functions = AvailabilityFn::ALL;
    let runs: Vec<ExperimentResult> = map_indexed(execution, functions.len(), |x| {
        let mut c = config.clone();
        c.availability_fn = functions[x];
        run_experiment_with(&c, Execution::Sequential)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok((compare_runs(&runs, thresholds)?, runs))
}

/// Agreement of elected sets and final rewards across runs of the same scenario.
pub fn compare_runs(runs: &[ExperimentResult], thresholds: InsensitivityThresholds) -> Result<AvailabilityComparison> {
    let Some(first) = runs.first() else {
        return Err(Error::Config("nothing to compare".into()));
    };
    let rounds = first.rounds.len();
    if runs
        .iter()
        .any(|r| r.rounds.len() != rounds || r.config.num_voters != first.config.num_voters)
    {
        return Err(Error::Config("runs differ in length or population".into()));
    }
    let sets: Vec<Vec<Vec<CandidateId>>> = runs
        .iter()
        .map(|r| {
            r.rounds
                .iter()
                .map(|o| {
                    let mut e = o.elected.clone();
                    e.sort_unstable();
                    e
                })
                .collect()
        })
        .collect();
    let agreeing = (0..rounds).filter(|&r| sets.iter().all(|s| s[r] == sets[0][r])).count();
    let round_agreement = if rounds == 0 {
        1.0
    } else {
        agreeing as f64 / rounds as f64
    };

    let final_rewards: Vec<Vec<f64>> = runs.iter().map(ExperimentResult::final_rewards).collect();
    let mut max_reward_gap: f64 = 0.0;
    for a in 0..runs.len() {
        for b in a + 1..runs.len() {
            for (x, y) in final_rewards[a].iter().zip(&final_rewards[b]) {
                let top = x.max(*y);
                if top > 0.0 {
                    max_reward_gap = max_reward_gap.max((x - y).abs() / top);
                }
            }
        }
    }
    Ok(AvailabilityComparison {
        thresholds,
        functions: runs.iter().map(|r| r.config.availability_fn).collect(),
        final_rewards,
        round_agreement,
        max_reward_gap,
    })
}
