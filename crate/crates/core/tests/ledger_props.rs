use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trustvote_core::{Error, HistoryLedger, PairTable, RoundData, RoundOutcome};

struct Raw {
    choices: Vec<Vec<Vec<bool>>>,
    merits: Vec<Vec<Vec<f64>>>,
    elected: Vec<Vec<bool>>,
    failed: Vec<Vec<bool>>,
}

/// Random but well-formed history, kept as plain nested vectors for the naive side.
fn history(n: usize, m: usize, k: usize, rounds: usize, seed: u64) -> Raw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Raw {
        choices: Vec::new(),
        merits: Vec::new(),
        elected: Vec::new(),
        failed: Vec::new(),
    };
    let ids: Vec<usize> = (0..m).collect();
    for _ in 0..rounds {
        let choices = (0..n)
            .map(|_| {
                let picked: Vec<usize> = ids.choose_multiple(&mut rng, k).copied().collect();
                (0..m).map(|j| picked.contains(&j)).collect()
            })
            .collect();
        let merits = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(0.0..10.0)).collect())
            .collect();
        let winners: Vec<usize> = ids.choose_multiple(&mut rng, k).copied().collect();
        let elected: Vec<bool> = (0..m).map(|j| winners.contains(&j)).collect();
        let failed = elected.iter().map(|&e| e && rng.random_bool(0.3)).collect();
        raw.choices.push(choices);
        raw.merits.push(merits);
        raw.elected.push(elected);
        raw.failed.push(failed);
    }
    raw
}

fn build(raw: &Raw, n: usize, m: usize, k: usize) -> HistoryLedger {
    let mut ledger = HistoryLedger::new(n, m, k).unwrap();
    for r in 0..raw.choices.len() {
        let outcome = RoundOutcome {
            round: r + 1,
            scores: vec![0.0; m],
            elected: (0..m).filter(|&j| raw.elected[r][j]).collect(),
            unavailable: (0..m).filter(|&j| raw.failed[r][j]).collect(),
            rewards: vec![0.0; n],
            trust: None,
            escrowed: Vec::new(),
            negative_score_elected: false,
        };
        let data = RoundData {
            choices: PairTable::from_fn(n, m, |i, j| raw.choices[r][i][j]),
            merits: PairTable::from_fn(n, m, |i, j| raw.merits[r][i][j]),
            profits: PairTable::filled(n, m, 0.0),
        };
        ledger.append_round(&outcome, data).unwrap();
    }
    ledger
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn queries_match_naive_sums(n in 1usize..5, m in 1usize..7, rounds in 0usize..70, seed in any::<u64>(), k_pick in any::<prop::sample::Index>()) {
        let k = k_pick.index(m) + 1;
        let raw = history(n, m, k, rounds, seed);
        let ledger = build(&raw, n, m, k);
        prop_assert_eq!(ledger.rounds_completed(), rounds);
        for t in 0..=rounds {
            for j in 0..m {
                let elected = (0..t).filter(|&r| raw.elected[r][j]).count() as u32;
                let failed = (0..t).filter(|&r| raw.failed[r][j]).count() as u32;
                prop_assert_eq!(ledger.election_counts(j, t).unwrap(), (elected, failed));
                for i in 0..n {
                    let merit: f64 = (0..t).map(|r| raw.merits[r][i][j]).sum();
                    let count = (0..t).filter(|&r| raw.choices[r][i][j]).count() as u32;
                    let (m_sum, c) = ledger.cumulative(i, j, t).unwrap();
                    prop_assert!((m_sum - merit).abs() <= 1e-9 * (1.0 + merit));
                    prop_assert_eq!(c, count);
                    let both = (0..t).filter(|&r| raw.choices[r][i][j] && raw.elected[r][j]).count() as u32;
                    prop_assert_eq!(ledger.chosen_and_elected(i, j, t).unwrap(), both);
                    let other = (i + 1) % n;
                    let joint = (0..t).filter(|&r| raw.choices[r][i][j] && raw.choices[r][other][j]).count() as u32;
                    prop_assert_eq!(ledger.joint_choices(i, other, j, t).unwrap(), joint);
                }
            }
        }
        let beyond = ledger.election_counts(0, rounds + 1).unwrap_err();
        let is_out_of_range = matches!(beyond, Error::OutOfRange { .. });
        prop_assert!(is_out_of_range);
    }
}

#[test]
fn out_of_order_round_is_rejected_and_ledger_unchanged() {
    let raw = history(2, 3, 1, 2, 5);
    let mut ledger = build(&raw, 2, 3, 1);
    let before = ledger.clone();
    let outcome = RoundOutcome {
        round: 5,
        scores: vec![0.0; 3],
        elected: vec![0],
        unavailable: Vec::new(),
        rewards: vec![0.0; 2],
        trust: None,
        escrowed: Vec::new(),
        negative_score_elected: false,
    };
    let data = RoundData {
        choices: PairTable::from_fn(2, 3, |_, j| j == 0),
        merits: PairTable::filled(2, 3, 0.0),
        profits: PairTable::filled(2, 3, 0.0),
    };
    assert!(matches!(
        ledger.append_round(&outcome, data),
        Err(Error::Sequencing { expected: 3, got: 5 })
    ));
    assert_eq!(ledger, before);
}
