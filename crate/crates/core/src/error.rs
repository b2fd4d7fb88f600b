use thiserror::Error;

use crate::adaptive_sizing::SizingError;
use crate::knapsack::KnapsackError;
use crate::mpas::MpasError;

/// Failure of an adversary run.
///
/// `Referee` and `Mpas` mean the online algorithm broke the game contract.
/// `InfeasibleConstruction` and `PhaseInvariant` are bug witnesses in this
/// crate and should never surface.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("referee: {0}")]
    Referee(#[from] KnapsackError),
    #[error("assignment: {0}")]
    Mpas(#[from] MpasError),
    #[error("sizing: {0}")]
    Sizing(#[from] SizingError),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("constructed optimum is infeasible: {0}")]
    InfeasibleConstruction(String),
    #[error("game invariant violated: {0}")]
    PhaseInvariant(String),
    #[error("algorithm {0} cannot be snapshotted")]
    SnapshotUnsupported(String),
    #[error("q = {q} does not divide MN = {mn}")]
    DivisibilityViolated { q: u64, mn: u64 },
    #[error("algorithm ended with zero profit")]
    ZeroProfit,
}

impl AdversaryError {
    /// True when the error was caused by the online algorithm rather than by
    /// the request or by this crate.
    pub fn is_contract_violation(&self) -> bool {
        matches!(self, AdversaryError::Referee(_) | AdversaryError::Mpas(_))
    }
}
