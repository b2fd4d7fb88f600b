//! Adversarial lower-bound certification for two relaxed online packing
//! problems: online removable multiple knapsack and minimum peak appointment
//! scheduling (MPAS).

pub mod adaptive_sizing;
pub mod baselines;
pub mod certificate;
pub mod error;
pub mod knapsack;
pub mod knapsack_adversaries;
pub mod mpas;
pub mod mpas_adversaries;
pub mod numerics;
pub mod oracles;
pub mod report;

pub use error::AdversaryError;
pub use knapsack::{Action, Item, KnapsackAlgorithm, KnapsackError, KnapsackState, ProfitMode};
pub use mpas::{CoverageProfile, IntervalAssignment, MpasAlgorithm, MpasError, MpasItem};
pub use numerics::{EpsRational, Rational};
pub use certificate::{run, Adversary, AlgorithmId, Params, RatioCertificate, RunError, RunSpec};
