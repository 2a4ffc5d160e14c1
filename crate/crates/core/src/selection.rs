//! Selection-pressure voting: merit, pressure, ranking queue and top-K choice.
//!
//! A voter's pressure on a candidate is its cumulative merit minus the number
//! of times the voter already picked it. Each round the voter picks the K
//! candidates with the highest pressure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{CandidateId, HistoryLedger, PairTable};

/// Decreasing map from unavailability probability to availability credit.
///
/// All three satisfy `d(0) = 1`, `d(1) = 0` and are strictly decreasing on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AvailabilityFn {
    /// `1 - u^2`
    #[default]
    Power,
    /// `(e^{-3u} - e^{-3}) / (1 - e^{-3})`
    Exponential,
    /// `1 - u`
    Linear,
}

impl AvailabilityFn {
    pub const ALL: [AvailabilityFn; 3] = [Self::Power, Self::Exponential, Self::Linear];

    pub fn eval(self, u: f64) -> f64 {
        match self {
            Self::Power => 1.0 - u * u,
            Self::Exponential => {
                let floor = (-3.0f64).exp();
                ((-3.0 * u).exp() - floor) / (1.0 - floor)
            }
            Self::Linear => 1.0 - u,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Power => "power",
            Self::Exponential => "exponential",
            Self::Linear => "linear",
        }
    }
}

impl std::str::FromStr for AvailabilityFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" | "d1" => Ok(Self::Power),
            "exponential" | "d2" => Ok(Self::Exponential),
            "linear" | "d3" => Ok(Self::Linear),
            other => Err(Error::Config(format!(
                "unknown availability function {other:?} (expected power, exponential or linear)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeritParams {
    pub rho: f64,
    pub availability: AvailabilityFn,
    /// Largest profit a voter can draw from one candidate in one round.
    pub profit_cap: f64,
}

impl MeritParams {
    pub fn new(rho: f64, availability: AvailabilityFn, profit_cap: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Config(format!("rho must be positive (got {rho})")));
        }
        if !(profit_cap > 0.0 && profit_cap.is_finite()) {
            return Err(Error::Config(format!("profit cap must be positive (got {profit_cap})")));
        }
        Ok(Self {
            rho,
            availability,
            profit_cap,
        })
    }
}

/// Failed rounds divided by elected rounds over `1..=through_round`; 0 if never elected.
pub fn estimate_unavailability(ledger: &HistoryLedger, candidate: CandidateId, through_round: usize) -> Result<f64> {
    let (elected, failed) = ledger.election_counts(candidate, through_round)?;
    if elected == 0 {
        return Ok(0.0);
    }
    Ok(f64::from(failed) / f64::from(elected))
}

/// Merit `rho * d(u) + profit` of a candidate to a voter for one round.
pub fn merit(u: f64, profit: f64, params: &MeritParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("unavailability {u} outside [0,1]")));
    }
    if !(profit >= 0.0) {
        return Err(Error::Validation(format!("profit {profit} is negative")));
    }
    if profit > params.profit_cap {
        return Err(Error::Validation(format!(
            "profit {profit} exceeds cap {}",
            params.profit_cap
        )));
    }
    Ok(params.rho * params.availability.eval(u) + profit)
}

/// Selection pressure of every pair for round `t`.
pub type PressureTable = PairTable<f64>;

/// Pressure `M^{t-1} - C^{t-1}` for every pair; all zeros at `t = 1`.
pub fn pressure_table(ledger: &HistoryLedger, t: usize) -> Result<PressureTable> {
    if t == 0 {
        return Err(Error::Domain("rounds are 1-indexed".into()));
    }
    let (n, m) = (ledger.voters(), ledger.candidates());
    if t == 1 {
        return Ok(PairTable::filled(n, m, 0.0));
    }
    // validates the range once; the per-pair lookups below cannot fail
    ledger.cumulative(0, 0, t - 1)?;
    Ok(PairTable::from_fn(n, m, |i, j| {
        let (merit, count) = ledger.cumulative(i, j, t - 1).expect("range checked");
        merit - f64::from(count)
    }))
}

/// Ranking-queue lengths: the negated pressure.
pub fn ranking_queue(pressure: &PressureTable) -> PairTable<f64> {
    PairTable::from_fn(pressure.voters(), pressure.candidates(), |i, j| -pressure.get(i, j))
}

/// Indices of the `k` largest values, best first, ties broken by ascending index.
pub(crate) fn top_k(values: &[f64], k: usize) -> Result<Vec<usize>> {
    if k > values.len() {
        return Err(Error::Config(format!(
            "k_supernodes exceeds num_candidates ({k} > {})",
            values.len()
        )));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    Ok(order)
}

/// A voter's K choices from its pressure row, highest pressure first.
pub fn choose_topk(pressure_row: &[f64], k: usize) -> Result<Vec<CandidateId>> {
    top_k(pressure_row, k)
}

/// Smallest scaling parameter that keeps the ranking queue stable: `Lambda (1 - R) / d`.
///
/// The caller must pick `rho` strictly above the returned value.
pub fn min_rho(big_lambda: f64, profit_cap: f64, d_value: f64) -> Result<f64> {
    if !(big_lambda > 0.0) {
        return Err(Error::Domain(format!("Lambda must be positive (got {big_lambda})")));
    }
    if !(0.0..=1.0).contains(&profit_cap) {
        return Err(Error::Domain(format!("profit cap {profit_cap} outside [0,1]")));
    }
    if d_value == 0.0 && profit_cap < 1.0 {
        return Err(Error::Singularity(
            "availability credit is zero: the queue is unstable for every rho".into(),
        ));
    }
    if !(d_value > 0.0) {
        return Err(Error::Domain(format!("availability credit {d_value} must be positive")));
    }
    Ok(big_lambda * (1.0 - profit_cap) / d_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{RoundData, RoundOutcome};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn outcome(round: usize, m: usize, elected: Vec<usize>, unavailable: Vec<usize>) -> RoundOutcome {
        RoundOutcome {
            round,
            scores: vec![0.0; m],
            elected,
            unavailable,
            rewards: vec![0.0],
            trust: None,
            escrowed: vec![],
            negative_score_elected: false,
        }
    }

    /// One voter, `m` candidates, K=1; `picks[r]` is chosen and elected in round r+1.
    fn ledger_with(m: usize, picks: &[usize], failures: &[bool], merits: &[f64]) -> HistoryLedger {
        let mut ledger = HistoryLedger::new(1, m, 1).unwrap();
        for (r, &p) in picks.iter().enumerate() {
            let unavailable = if failures[r] { vec![p] } else { vec![] };
            let o = outcome(r + 1, m, vec![p], unavailable);
            let d = RoundData {
                choices: PairTable::from_fn(1, m, |_, j| j == p),
                merits: PairTable::filled(1, m, merits[r]),
                profits: PairTable::filled(1, m, 0.0),
            };
            ledger.append_round(&o, d).unwrap();
        }
        ledger
    }

    #[test]
    fn availability_endpoints_and_monotonicity() {
        for d in AvailabilityFn::ALL {
            assert_abs_diff_eq!(d.eval(0.0), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(d.eval(1.0), 0.0, epsilon = 1e-12);
            let mut prev = d.eval(0.0);
            for s in 1..=100 {
                let v = d.eval(s as f64 / 100.0);
                assert!(v < prev, "{d:?} not strictly decreasing at {s}");
                prev = v;
            }
        }
    }

    #[test]
    fn unavailability_estimate() {
        // elected in 4 rounds, unavailable in 1
        let ledger = ledger_with(2, &[0, 0, 0, 0], &[false, true, false, false], &[1.0; 4]);
        assert_abs_diff_eq!(estimate_unavailability(&ledger, 0, 4).unwrap(), 0.25);
        assert_eq!(estimate_unavailability(&ledger, 1, 4).unwrap(), 0.0);

        let always = ledger_with(2, &[1, 1, 1], &[true, true, true], &[1.0; 3]);
        assert_eq!(estimate_unavailability(&always, 1, 3).unwrap(), 1.0);
    }

    #[test]
    fn merit_examples() {
        let p = MeritParams::new(5.0, AvailabilityFn::Linear, 12.5).unwrap();
        assert_abs_diff_eq!(merit(0.2, 0.5, &p).unwrap(), 4.5, epsilon = 1e-12);
        assert_eq!(merit(1.0, 0.0, &p).unwrap(), 0.0);
        assert_eq!(merit(0.0, 0.0, &p).unwrap(), 5.0);
        assert!(matches!(merit(0.0, 13.0, &p), Err(Error::Validation(_))));
    }

    #[test]
    fn pressure_examples() {
        // merits [2, 3], candidate 0 chosen once -> (5.0, 1) -> F = 4
        let ledger = ledger_with(2, &[0, 1], &[false, false], &[2.0, 3.0]);
        let f = pressure_table(&ledger, 3).unwrap();
        assert_abs_diff_eq!(*f.get(0, 0), 4.0);
        // candidate 1 chosen once too: 5 - 1
        assert_abs_diff_eq!(*f.get(0, 1), 4.0);

        let zeros = pressure_table(&ledger, 1).unwrap();
        assert!(zeros.values().iter().all(|&v| v == 0.0));

        // zero merit, chosen three times -> F = -3
        let drained = ledger_with(2, &[0, 0, 0], &[false; 3], &[0.0; 3]);
        assert_abs_diff_eq!(*pressure_table(&drained, 4).unwrap().get(0, 0), -3.0);
    }

    #[test]
    fn queue_negates_pressure() {
        let mut f = PairTable::filled(1, 3, 0.0);
        f.set(0, 0, 4.0);
        f.set(0, 2, -3.0);
        let q = ranking_queue(&f);
        assert_eq!(q.row(0), &[-4.0, 0.0, 3.0]);
    }

    #[test]
    fn topk_examples() {
        assert_eq!(choose_topk(&[3.0, 1.0, 3.0], 2).unwrap(), vec![0, 2]);
        assert_eq!(choose_topk(&[3.0, 3.0, 3.0], 2).unwrap(), vec![0, 1]);
        let mut all = choose_topk(&[0.5, 2.0, -1.0], 3).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2]);
        assert!(matches!(choose_topk(&[1.0], 2), Err(Error::Config(_))));
    }

    #[test]
    fn min_rho_examples() {
        assert_abs_diff_eq!(min_rho(1.0, 0.5, 1.0).unwrap(), 0.5);
        assert_eq!(min_rho(1.0, 1.0, 0.7).unwrap(), 0.0);
        assert!(matches!(min_rho(1.0, 0.5, 0.0), Err(Error::Singularity(_))));
    }

    proptest! {
        #[test]
        fn queue_plus_pressure_is_zero(values in proptest::collection::vec(-1e6f64..1e6, 1..40)) {
            let m = values.len();
            let f = PairTable::from_fn(1, m, |_, j| values[j]);
            let q = ranking_queue(&f);
            for j in 0..m {
                prop_assert_eq!(q.get(0, j) + f.get(0, j), 0.0);
            }
        }

        // integer-valued rows keep the rescaling exact
        #[test]
        fn topk_affine_invariant(
            row in proptest::collection::vec(-50i32..50, 1..30),
            scale in 1i32..20,
            shift in -100i32..100,
            k_frac in 0.0f64..1.0,
        ) {
            let k = ((row.len() as f64) * k_frac) as usize;
            let base: Vec<f64> = row.iter().map(|&v| f64::from(v)).collect();
            let scaled: Vec<f64> = row.iter().map(|&v| f64::from(v * scale + shift)).collect();
            prop_assert_eq!(choose_topk(&base, k).unwrap(), choose_topk(&scaled, k).unwrap());
        }

        #[test]
        fn topk_matches_sort_and_cut(row in proptest::collection::vec(-20i32..20, 1..30), k_frac in 0.0f64..1.0) {
            let k = ((row.len() as f64) * k_frac) as usize;
            let values: Vec<f64> = row.iter().map(|&v| f64::from(v)).collect();
            let chosen = choose_topk(&values, k).unwrap();
            // oracle: every chosen value beats or ties every unchosen one, ties go to lower id
            for &c in &chosen {
                for u in (0..values.len()).filter(|u| !chosen.contains(u)) {
                    prop_assert!(values[c] > values[u] || (values[c] == values[u] && c < u));
                }
            }
        }
    }

    #[test]
    fn unchosen_merit_raises_next_pressure() {
        let before = ledger_with(3, &[0, 0], &[false, false], &[1.0, 1.0]);
        let after = ledger_with(3, &[0, 0, 0], &[false; 3], &[1.0, 1.0, 2.5]);
        let f2 = pressure_table(&before, 3).unwrap();
        let f3 = pressure_table(&after, 4).unwrap();
        assert_abs_diff_eq!(f3.get(0, 1) - f2.get(0, 1), 2.5);
    }
}
