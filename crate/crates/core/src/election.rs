//! Candidate scoring, super-node election and block-reward distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::CandidateId;
use crate::selection::top_k;

/// Default reward for producing one block.
pub const DEFAULT_BLOCK_REWARD: f64 = 12.5;

/// Scores of every candidate in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBoard {
    pub round: usize,
    pub entries: Vec<f64>,
}

/// Stake-and-trust weighted support `sum_i s_i t_ij c_ij`. May be negative.
pub fn candidate_score(choices: &[bool], trust: &[f64], stakes: &[u32]) -> Result<f64> {
    if choices.len() != trust.len() || choices.len() != stakes.len() {
        return Err(Error::Validation(format!(
            "score inputs differ in length ({} choices, {} trust, {} stakes)",
            choices.len(),
            trust.len(),
            stakes.len()
        )));
    }
    Ok(choices
        .iter()
        .zip(trust)
        .zip(stakes)
        .filter(|((&c, _), _)| c)
        .map(|((_, &t), &s)| f64::from(s) * t)
        .sum())
}

/// The K highest-scoring candidates, best first; ties go to the lower id.
pub fn elect(board: &ScoreBoard, k: usize) -> Result<Vec<CandidateId>> {
    top_k(&board.entries, k)
}

/// How one elected candidate's block reward was split.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSplit {
    /// Reward per voter, indexed by voter id.
    pub shares: Vec<f64>,
    /// The candidate produced a block but no supporter had positive weight.
    pub escrowed: bool,
}

/// Splits `block_reward` among the supporters of one elected candidate in
/// proportion to their positive weights `s_i t_ij c_ij`.
///
/// Supporters with non-positive weight get nothing. An unavailable candidate
/// produces no block and pays nobody.
pub fn distribute_reward(block_reward: f64, weights: &[f64], available: bool) -> Result<RewardSplit> {
    if !(block_reward > 0.0 && block_reward.is_finite()) {
        return Err(Error::Config(format!(
            "block reward must be positive (got {block_reward})"
        )));
    }
    let zeros = vec![0.0; weights.len()];
    if !available {
        return Ok(RewardSplit {
            shares: zeros,
            escrowed: false,
        });
    }
    let total: f64 = weights.iter().filter(|&&w| w > 0.0).sum();
    if !(total > 0.0) {
        return Ok(RewardSplit {
            shares: zeros,
            escrowed: true,
        });
    }
    let shares = weights
        .iter()
        .map(|&w| if w > 0.0 { block_reward * (w / total) } else { 0.0 })
        .collect();
    Ok(RewardSplit {
        shares,
        escrowed: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn score_examples() {
        assert_abs_diff_eq!(candidate_score(&[true, true], &[0.5, -0.25], &[1, 2]).unwrap(), 0.0);
        assert_eq!(candidate_score(&[false, false], &[0.5, 3.0], &[1, 2]).unwrap(), 0.0);
        assert_eq!(
            candidate_score(&[true, false, true], &[1.0; 3], &[1, 2, 3]).unwrap(),
            4.0
        );
        assert!(matches!(
            candidate_score(&[true], &[1.0, 1.0], &[1]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn elect_examples() {
        // candidates 1, 2, 3 live at indices 0, 1, 2
        let board = ScoreBoard {
            round: 1,
            entries: vec![5.0, 3.0, 4.0],
        };
        assert_eq!(elect(&board, 2).unwrap(), vec![0, 2]);
        let flat = ScoreBoard {
            round: 1,
            entries: vec![1.0; 4],
        };
        assert_eq!(elect(&flat, 2).unwrap(), vec![0, 1]);
        assert_eq!(elect(&board, 3).unwrap().len(), 3);
        assert!(matches!(elect(&board, 4), Err(Error::Config(_))));
    }

    #[test]
    fn reward_examples() {
        let split = distribute_reward(12.5, &[1.0, 3.0], true).unwrap();
        assert_abs_diff_eq!(split.shares[0], 3.125);
        assert_abs_diff_eq!(split.shares[1], 9.375);

        let down = distribute_reward(12.5, &[1.0, 3.0], false).unwrap();
        assert_eq!(down.shares, vec![0.0, 0.0]);
        assert!(!down.escrowed);

        let solo = distribute_reward(12.5, &[0.0, 2.0, -1.0], true).unwrap();
        assert_eq!(solo.shares, vec![0.0, 12.5, 0.0]);

        let none = distribute_reward(12.5, &[-1.0, 0.0], true).unwrap();
        assert!(none.escrowed);
        assert_eq!(none.shares, vec![0.0, 0.0]);
    }

    #[test]
    fn plurality_when_trust_is_off() {
        // unit stakes, t = 1: score is the vote count
        let ballots = [
            [true, true, false],
            [false, true, true],
            [false, true, false],
            [true, false, false],
        ];
        let entries: Vec<f64> = (0..3)
            .map(|j| {
                let c: Vec<bool> = ballots.iter().map(|b| b[j]).collect();
                candidate_score(&c, &[1.0; 4], &[1; 4]).unwrap()
            })
            .collect();
        assert_eq!(entries, vec![2.0, 3.0, 1.0]);
        assert_eq!(elect(&ScoreBoard { round: 1, entries }, 1).unwrap(), vec![1]);
    }

    proptest! {
        #[test]
        fn reward_is_conserved(weights in proptest::collection::vec(-5.0f64..5.0, 1..40)) {
            let split = distribute_reward(12.5, &weights, true).unwrap();
            let total: f64 = split.shares.iter().sum();
            if weights.iter().any(|&w| w > 0.0) {
                prop_assert!((total - 12.5).abs() < 1e-9);
            } else {
                prop_assert!(split.escrowed);
                prop_assert_eq!(total, 0.0);
            }
            prop_assert!(split.shares.iter().all(|&s| s >= 0.0));
        }

        #[test]
        fn election_is_scale_invariant(scores in proptest::collection::vec(-100i32..100, 1..40), scale in 1u32..50, k_frac in 0.0f64..1.0) {
            let k = (scores.len() as f64 * k_frac) as usize;
            let a: Vec<f64> = scores.iter().map(|&s| f64::from(s)).collect();
            let b: Vec<f64> = scores.iter().map(|&s| f64::from(s) * f64::from(scale)).collect();
            prop_assert_eq!(
                elect(&ScoreBoard { round: 1, entries: a }, k).unwrap(),
                elect(&ScoreBoard { round: 1, entries: b }, k).unwrap()
            );
        }

        #[test]
        fn more_stake_never_lowers_score(
            trust in proptest::collection::vec(-2.0f64..2.0, 2..20),
            extra in 1u32..5,
        ) {
            let n = trust.len();
            let mut trust = trust;
            trust[0] = trust[0].abs() + 1e-3;
            let choices = vec![true; n];
            let stakes = vec![1u32; n];
            let mut richer = stakes.clone();
            richer[0] += extra;
            let before = candidate_score(&choices, &trust, &stakes).unwrap();
            let after = candidate_score(&choices, &trust, &richer).unwrap();
            prop_assert!(after >= before);
        }
    }
}
