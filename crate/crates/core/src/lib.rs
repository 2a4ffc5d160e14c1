//! Trust-aware stake voting for blockchain super-node election.
//!
//! Voters pick K candidates each round guided by a selection pressure built
//! from past merit, report beliefs about a randomly assigned peer's choices,
//! and are weighted by a peer-prediction trust score when candidates are
//! scored. A large-deviation module bounds how often a candidate's ranking
//! queue overflows, and [`sim`] ties everything into a multi-round simulator.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod election;
pub mod error;
pub mod ldp;
pub mod ledger;
pub mod par;
pub mod rng;
pub mod selection;
pub mod sim;
pub mod trust;

pub use error::{Error, Result};
pub use ledger::{
    CandidateId, CandidateProfile, HistoryLedger, PairTable, RoundData, RoundOutcome, VoterId, VoterProfile,
};
pub use par::Execution;
