use proptest::prelude::*;
use trustvote_core::election::DEFAULT_BLOCK_REWARD;
use trustvote_core::sim::{run_experiment_with, AdversaryMode, AdversarySpec, ScenarioConfig, Simulation};
use trustvote_core::Execution;

fn config(n: usize, m: usize, k: usize, rounds: usize, seed: u64, trust: bool) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(n, k, rounds, seed);
    c.num_candidates = m;
    c.trust_enabled = trust;
    c
}

fn small_config() -> impl Strategy<Value = ScenarioConfig> {
    (2usize..8, 3usize..12, 1usize..8, any::<u64>(), any::<bool>())
        .prop_flat_map(|(n, m, t, seed, trust)| (1..=m).prop_map(move |k| config(n, m, k, t, seed, trust)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_round_conserves_and_balances(c in small_config()) {
        let mut sim = Simulation::new(c.clone()).unwrap();
        for k in 1..=c.rounds {
            let (outcome, trace) = sim.run_round(k).unwrap();
            prop_assert_eq!(outcome.elected.len(), c.k_supernodes);
            for i in 0..c.num_voters {
                prop_assert_eq!(trace.choices.row(i).iter().filter(|&&x| x).count(), c.k_supernodes);
                prop_assert_ne!(trace.peers[i], i);
            }
            if let Some(t) = &outcome.trust {
                for j in 0..c.num_candidates {
                    let total: f64 = t.column(j).sum();
                    prop_assert!(total.abs() < 1e-9 * c.num_voters as f64, "trust column {} sums to {}", j, total);
                }
            }
            let mut paid = 0;
            for &j in &outcome.elected {
                let share: f64 = trace.profits.column(j).sum();
                if outcome.unavailable.contains(&j) || outcome.escrowed.contains(&j) {
                    prop_assert_eq!(share, 0.0);
                } else {
                    paid += 1;
                    prop_assert!((share - DEFAULT_BLOCK_REWARD).abs() < 1e-9);
                }
            }
            let total: f64 = outcome.rewards.iter().sum();
            prop_assert!((total - paid as f64 * DEFAULT_BLOCK_REWARD).abs() < 1e-9);
            prop_assert!(outcome.rewards.iter().all(|&r| r >= 0.0));
        }
    }

    #[test]
    fn cumulative_rewards_never_fall(c in small_config()) {
        let result = run_experiment_with(&c, Execution::Sequential).unwrap();
        for w in result.cumulative_rewards.windows(2) {
            prop_assert!(w[0].iter().zip(&w[1]).all(|(a, b)| b >= a));
        }
        let seats: u32 = result.election_counts.iter().sum();
        prop_assert_eq!(seats as usize, c.k_supernodes * c.rounds);
        prop_assert!(result.failure_counts.iter().zip(&result.election_counts).all(|(f, e)| f <= e));
    }

    #[test]
    fn execution_mode_does_not_change_results(c in small_config()) {
        let a = run_experiment_with(&c, Execution::Sequential).unwrap();
        let b = run_experiment_with(&c, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn same_seed_same_run() {
    let c = config(10, 20, 4, 30, 77, true);
    let a = run_experiment_with(&c, Execution::Parallel).unwrap();
    let b = run_experiment_with(&c, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let other = run_experiment_with(&ScenarioConfig { seed: 78, ..c }, Execution::Parallel).unwrap();
    assert_ne!(a.population, other.population);
}

#[test]
fn bribed_voters_always_pick_bribers() {
    let mut c = config(12, 20, 5, 20, 3, true);
    c.adversary = Some(AdversarySpec {
        briber_candidates: vec![7, 9],
        bribed_voters: vec![0, 1, 2, 3, 4, 5, 6],
        mode: AdversaryMode::OverrideChoice,
    });
    let mut sim = Simulation::new(c.clone()).unwrap();
    for k in 1..=c.rounds {
        let (_, trace) = sim.run_round(k).unwrap();
        for i in 0..7 {
            assert!(
                *trace.choices.get(i, 7) && *trace.choices.get(i, 9),
                "round {k} voter {i}"
            );
        }
    }
}

#[test]
fn trust_off_scores_are_stake_weighted_votes() {
    let c = config(6, 8, 3, 5, 9, false);
    let mut sim = Simulation::new(c.clone()).unwrap();
    let stakes = sim.population().stakes();
    for k in 1..=c.rounds {
        let (outcome, trace) = sim.run_round(k).unwrap();
        assert!(outcome.trust.is_none());
        for j in 0..c.num_candidates {
            let votes: u32 = (0..c.num_voters)
                .filter(|&i| *trace.choices.get(i, j))
                .map(|i| stakes[i])
                .sum();
            assert_eq!(outcome.scores[j], f64::from(votes));
        }
    }
}

#[test]
fn inflated_beliefs_change_trust_but_not_choices() {
    let mut c = config(12, 20, 5, 15, 21, true);
    let spec = AdversarySpec {
        briber_candidates: vec![7],
        bribed_voters: vec![0, 1, 2, 3, 4],
        mode: AdversaryMode::OverrideChoice,
    };
    c.adversary = Some(spec.clone());
    let mut inflated = c.clone();
    inflated.adversary = Some(AdversarySpec {
        mode: AdversaryMode::InflateBelief,
        ..spec
    });
    let mut a = Simulation::new(c).unwrap();
    let mut b = Simulation::new(inflated).unwrap();
    let (first_a, trace_a) = a.run_round(1).unwrap();
    let (first_b, trace_b) = b.run_round(1).unwrap();
    assert_eq!(trace_a.choices, trace_b.choices);
    let (ta, tb) = (first_a.trust.unwrap(), first_b.trust.unwrap());
    assert_ne!(ta.get(0, 7), tb.get(0, 7));
    let total: f64 = tb.column(7).sum();
    assert!(total.abs() < 1e-9);
}
