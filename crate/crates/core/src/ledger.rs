//! Shared domain types and the append-only round history.
//!
//! Rounds are 1-indexed. Round `k` of the history holds, for every
//! `(voter, candidate)` pair, the choice indicator, the merit and the profit
//! recorded in that round, plus per-candidate election and unavailability
//! flags. Cumulative sums are kept as prefix tables so that every query is
//! exact and independent of how many times it is asked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VoterId = usize;
pub type CandidateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoterProfile {
    pub id: VoterId,
    /// Voting weight, at least 1.
    pub stake: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateProfile {
    pub id: CandidateId,
    /// Ground-truth probability of failing to produce a block when elected.
    pub true_unavailability: f64,
    /// Ordinal capability, 1 = most capable. Only scenario setup and checks read it.
    pub true_capability: usize,
}

/// Validates a voter population: ids contiguous from zero, stakes positive.
pub fn validate_voters(voters: &[VoterProfile]) -> Result<()> {
    for (pos, v) in voters.iter().enumerate() {
        if v.id != pos {
            return Err(Error::Validation(format!(
                "voter ids must be contiguous in [0, N): position {pos} holds id {}",
                v.id
            )));
        }
        if v.stake < 1 {
            return Err(Error::Validation(format!("voter {pos} has stake 0")));
        }
    }
    Ok(())
}

/// Validates candidates: ids contiguous, probabilities in range, capability a permutation.
pub fn validate_candidates(candidates: &[CandidateProfile]) -> Result<()> {
    let m = candidates.len();
    let mut seen = vec![false; m];
    for (pos, c) in candidates.iter().enumerate() {
        if c.id != pos {
            return Err(Error::Validation(format!(
                "candidate ids must be contiguous in [0, M): position {pos} holds id {}",
                c.id
            )));
        }
        if !(0.0..=1.0).contains(&c.true_unavailability) {
            return Err(Error::Validation(format!(
                "candidate {pos} unavailability {} outside [0,1]",
                c.true_unavailability
            )));
        }
        let rank = c.true_capability;
        if rank == 0 || rank > m || seen[rank - 1] {
            return Err(Error::Validation(format!(
                "capability ranks must be a permutation of 1..{m}"
            )));
        }
        seen[rank - 1] = true;
    }
    Ok(())
}

/// Dense voter × candidate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTable<T> {
    voters: usize,
    candidates: usize,
    data: Vec<T>,
}

impl<T: Clone> PairTable<T> {
    pub fn filled(voters: usize, candidates: usize, value: T) -> Self {
        Self {
            voters,
            candidates,
            data: vec![value; voters * candidates],
        }
    }
}

impl<T> PairTable<T> {
    pub fn from_fn(voters: usize, candidates: usize, mut f: impl FnMut(VoterId, CandidateId) -> T) -> Self {
        let mut data = Vec::with_capacity(voters * candidates);
        for i in 0..voters {
            for j in 0..candidates {
                data.push(f(i, j));
            }
        }
        Self {
            voters,
            candidates,
            data,
        }
    }

    pub fn voters(&self) -> usize {
        self.voters
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn get(&self, voter: VoterId, candidate: CandidateId) -> &T {
        &self.data[voter * self.candidates + candidate]
    }

    pub fn set(&mut self, voter: VoterId, candidate: CandidateId, value: T) {
        self.data[voter * self.candidates + candidate] = value;
    }

    pub fn row(&self, voter: VoterId) -> &[T] {
        &self.data[voter * self.candidates..(voter + 1) * self.candidates]
    }

    pub fn row_mut(&mut self, voter: VoterId) -> &mut [T] {
        &mut self.data[voter * self.candidates..(voter + 1) * self.candidates]
    }

    pub fn column(&self, candidate: CandidateId) -> impl Iterator<Item = &T> + '_ {
        (0..self.voters).map(move |i| self.get(i, candidate))
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    fn same_shape<U>(&self, other: &PairTable<U>) -> bool {
        self.voters == other.voters && self.candidates == other.candidates
    }
}

/// Result of one round of voting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub round: usize,
    /// Candidate scores, indexed by candidate id.
    pub scores: Vec<f64>,
    /// The K elected candidates in rank order (best first).
    pub elected: Vec<CandidateId>,
    /// Elected candidates that failed to produce a block this round.
    pub unavailable: Vec<CandidateId>,
    /// Reward earned by each voter this round, indexed by voter id.
    pub rewards: Vec<f64>,
    /// Trust score per pair; `None` when trust evaluation is disabled.
    pub trust: Option<PairTable<f64>>,
    /// Elected, available candidates whose supporters all had non-positive weight,
    /// so the block reward was withheld.
    pub escrowed: Vec<CandidateId>,
    /// Set when a candidate with a negative score had to be elected to fill K seats.
    pub negative_score_elected: bool,
}

/// Per-pair data recorded alongside a [`RoundOutcome`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoundData {
    pub choices: PairTable<bool>,
    pub merits: PairTable<f64>,
    pub profits: PairTable<f64>,
}

/// Append-only record of every completed round.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryLedger {
    voters: usize,
    candidates: usize,
    k: usize,
    choices: Vec<PairTable<bool>>,
    merits: Vec<PairTable<f64>>,
    profits: Vec<PairTable<f64>>,
    elected: Vec<Vec<bool>>,
    unavailable: Vec<Vec<bool>>,
    // prefix sums through each round; index r-1 covers rounds 1..=r
    cum_merit: Vec<PairTable<f64>>,
    cum_choice: Vec<PairTable<u32>>,
    cum_elected: Vec<Vec<u32>>,
    cum_unavailable: Vec<Vec<u32>>,
    cum_choice_elected: Vec<PairTable<u32>>,
    // bit (r-1) of choice_bits[i*M + j] is c_ij in round r
    choice_bits: Vec<Vec<u64>>,
}

/// Number of set bits among the first `len` bits of `a AND b`.
fn and_popcount(a: &[u64], b: &[u64], len: usize) -> u32 {
    let full = len / 64;
    let mut total: u32 = a[..full]
        .iter()
        .zip(&b[..full])
        .map(|(x, y)| (x & y).count_ones())
        .sum();
    let rest = len % 64;
    if rest > 0 {
        let mask = (1u64 << rest) - 1;
        total += (a[full] & b[full] & mask).count_ones();
    }
    total
}

fn push_bit(bits: &mut Vec<u64>, round: usize, value: bool) {
    let (word, bit) = ((round - 1) / 64, (round - 1) % 64);
    if word == bits.len() {
        bits.push(0);
    }
    if value {
        bits[word] |= 1 << bit;
    }
}

impl HistoryLedger {
    pub fn new(voters: usize, candidates: usize, k: usize) -> Result<Self> {
        if k == 0 || k > candidates {
            return Err(Error::Config(format!(
                "k_supernodes must be in 1..=num_candidates (got K={k}, M={candidates})"
            )));
        }
        Ok(Self {
            voters,
            candidates,
            k,
            choices: Vec::new(),
            merits: Vec::new(),
            profits: Vec::new(),
            elected: Vec::new(),
            unavailable: Vec::new(),
            cum_merit: Vec::new(),
            cum_choice: Vec::new(),
            cum_elected: Vec::new(),
            cum_unavailable: Vec::new(),
            cum_choice_elected: Vec::new(),
            choice_bits: vec![Vec::new(); voters * candidates],
        })
    }

    pub fn voters(&self) -> usize {
        self.voters
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rounds_completed(&self) -> usize {
        self.choices.len()
    }

    /// Appends round `outcome.round`, which must be the next one.
    ///
    /// On error the ledger is left untouched.
    pub fn append_round(&mut self, outcome: &RoundOutcome, data: RoundData) -> Result<()> {
        let expected = self.rounds_completed() + 1;
        if outcome.round != expected {
            return Err(Error::Sequencing {
                expected,
                got: outcome.round,
            });
        }
        self.validate(outcome, &data)?;

        let (n, m) = (self.voters, self.candidates);
        let mut elected = vec![false; m];
        for &j in &outcome.elected {
            elected[j] = true;
        }
        let mut unavailable = vec![false; m];
        for &j in &outcome.unavailable {
            unavailable[j] = true;
        }

        let cum_merit = match self.cum_merit.last() {
            Some(prev) => PairTable::from_fn(n, m, |i, j| prev.get(i, j) + data.merits.get(i, j)),
            None => data.merits.clone(),
        };
        let cum_choice = match self.cum_choice.last() {
            Some(prev) => PairTable::from_fn(n, m, |i, j| prev.get(i, j) + u32::from(*data.choices.get(i, j))),
            None => PairTable::from_fn(n, m, |i, j| u32::from(*data.choices.get(i, j))),
        };
        let bump = |prev: Option<&Vec<u32>>, flags: &[bool]| -> Vec<u32> {
            flags
                .iter()
                .enumerate()
                .map(|(j, &f)| prev.map_or(0, |p| p[j]) + u32::from(f))
                .collect()
        };
        let cum_elected = bump(self.cum_elected.last(), &elected);
        let cum_unavailable = bump(self.cum_unavailable.last(), &unavailable);
        let both = |i: usize, j: usize| u32::from(*data.choices.get(i, j) && elected[j]);
        let cum_choice_elected = match self.cum_choice_elected.last() {
            Some(prev) => PairTable::from_fn(n, m, |i, j| prev.get(i, j) + both(i, j)),
            None => PairTable::from_fn(n, m, both),
        };
        for i in 0..n {
            for j in 0..m {
                push_bit(&mut self.choice_bits[i * m + j], expected, *data.choices.get(i, j));
            }
        }

        self.choices.push(data.choices);
        self.merits.push(data.merits);
        self.profits.push(data.profits);
        self.elected.push(elected);
        self.unavailable.push(unavailable);
        self.cum_merit.push(cum_merit);
        self.cum_choice.push(cum_choice);
        self.cum_elected.push(cum_elected);
        self.cum_unavailable.push(cum_unavailable);
        self.cum_choice_elected.push(cum_choice_elected);
        Ok(())
    }

    fn validate(&self, outcome: &RoundOutcome, data: &RoundData) -> Result<()> {
        let (n, m, k) = (self.voters, self.candidates, self.k);
        let shape = PairTable::<()>::filled(n, m, ());
        if !shape.same_shape(&data.choices) || !shape.same_shape(&data.merits) || !shape.same_shape(&data.profits) {
            return Err(Error::Validation(format!(
                "round data must cover all {n}x{m} voter/candidate pairs"
            )));
        }
        if outcome.scores.len() != m || outcome.rewards.len() != n {
            return Err(Error::Validation("outcome vectors do not match N and M".into()));
        }
        for i in 0..n {
            let chosen = data.choices.row(i).iter().filter(|&&c| c).count();
            if chosen != k {
                return Err(Error::Validation(format!(
                    "voter {i} chose {chosen} candidates, exactly K={k} required"
                )));
            }
        }
        if outcome.elected.len() != k {
            return Err(Error::Validation(format!(
                "{} candidates elected, exactly K={k} required",
                outcome.elected.len()
            )));
        }
        let mut elected = vec![false; m];
        for &j in &outcome.elected {
            if j >= m || elected[j] {
                return Err(Error::Validation(format!(
                    "elected set contains invalid or repeated id {j}"
                )));
            }
            elected[j] = true;
        }
        for &j in &outcome.unavailable {
            if j >= m || !elected[j] {
                return Err(Error::Validation(format!(
                    "candidate {j} marked unavailable without being elected"
                )));
            }
        }
        if let Some(v) = data.merits.values().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Validation(format!("merit {v} is not a nonnegative real")));
        }
        if let Some(v) = data.profits.values().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Validation(format!("profit {v} is not a nonnegative real")));
        }
        for i in 0..n {
            let total: f64 = data.profits.row(i).iter().sum();
            if (total - outcome.rewards[i]).abs() > 1e-9 * (1.0 + total.abs()) {
                return Err(Error::Validation(format!(
                    "voter {i} reward {} disagrees with recorded profits {total}",
                    outcome.rewards[i]
                )));
            }
        }
        Ok(())
    }

    fn check_round(&self, through_round: usize) -> Result<()> {
        if through_round > self.rounds_completed() {
            return Err(Error::OutOfRange {
                requested: through_round,
                available: self.rounds_completed(),
            });
        }
        Ok(())
    }

    /// Cumulative merit and selection count of `candidate` for `voter` over rounds `1..=through_round`.
    pub fn cumulative(&self, voter: VoterId, candidate: CandidateId, through_round: usize) -> Result<(f64, u32)> {
        self.check_round(through_round)?;
        if through_round == 0 {
            return Ok((0.0, 0));
        }
        let r = through_round - 1;
        Ok((
            *self.cum_merit[r].get(voter, candidate),
            *self.cum_choice[r].get(voter, candidate),
        ))
    }

    /// Rounds `1..=through_round` in which `candidate` was elected, and in which it failed.
    pub fn election_counts(&self, candidate: CandidateId, through_round: usize) -> Result<(u32, u32)> {
        self.check_round(through_round)?;
        if through_round == 0 {
            return Ok((0, 0));
        }
        let r = through_round - 1;
        Ok((self.cum_elected[r][candidate], self.cum_unavailable[r][candidate]))
    }

    /// Rounds in `1..=through_round` where both voters picked `candidate`.
    pub fn joint_choices(
        &self,
        voter: VoterId,
        other: VoterId,
        candidate: CandidateId,
        through_round: usize,
    ) -> Result<u32> {
        self.check_round(through_round)?;
        let m = self.candidates;
        Ok(and_popcount(
            &self.choice_bits[voter * m + candidate],
            &self.choice_bits[other * m + candidate],
            through_round,
        ))
    }

    /// Rounds in `1..=through_round` where `voter` picked `candidate` and it was elected.
    pub fn chosen_and_elected(&self, voter: VoterId, candidate: CandidateId, through_round: usize) -> Result<u32> {
        self.check_round(through_round)?;
        if through_round == 0 {
            return Ok(0);
        }
        Ok(*self.cum_choice_elected[through_round - 1].get(voter, candidate))
    }

    /// Choice indicator `c_ij` in round `round` (1-indexed).
    pub fn choice(&self, voter: VoterId, candidate: CandidateId, round: usize) -> bool {
        *self.choices[round - 1].get(voter, candidate)
    }

    pub fn merit(&self, voter: VoterId, candidate: CandidateId, round: usize) -> f64 {
        *self.merits[round - 1].get(voter, candidate)
    }

    pub fn profit(&self, voter: VoterId, candidate: CandidateId, round: usize) -> f64 {
        *self.profits[round - 1].get(voter, candidate)
    }

    pub fn elected(&self, candidate: CandidateId, round: usize) -> bool {
        self.elected[round - 1][candidate]
    }

    pub fn unavailable(&self, candidate: CandidateId, round: usize) -> bool {
        self.unavailable[round - 1][candidate]
    }
}
