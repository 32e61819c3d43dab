use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure mode of the toolkit.
///
/// Decision procedures never return an error for a negative answer; errors
/// are reserved for malformed inputs, violated preconditions, exhausted
/// search budgets and failed self-verification.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("generator index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("rank {0} is not supported (expected 1..=26)")]
    UnsupportedRank(usize),
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("invalid character {0:?} in word")]
    InvalidCharacter(char),
    #[error("malformed boundary point: {0}")]
    MalformedBoundaryPoint(String),
    #[error("not a subgroup of the ambient subgroup: {0}")]
    NotASubgroup(String),
    #[error("subgroup is trivial")]
    TrivialSubgroup,
    #[error("element is trivial")]
    TrivialElement,
    #[error("seed word {0:?} lies in the commutator subgroup")]
    SeedInCommutator(String),
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("subgroup {0} has finite index")]
    FiniteIndexInput(String),
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("not an action: {0}")]
    NotAnAction(String),
    #[error("not an automorphism: {0}")]
    NotAnAutomorphism(String),
    #[error("set of automorphisms is not closed under composition: {0}")]
    NotClosed(String),
    #[error("automorphism {0} has infinite order")]
    InfiniteOrderElement(usize),
    #[error("no admissible exponent: {0}")]
    ScalarObstruction(String),
    #[error("torsion of the commensurator is not the fiber centralizer: {0}")]
    TorsionNotSubgroup(String),
    #[error("finite part does not centralize the subgroup: {0}")]
    NotCentralized(String),
    #[error("verification failed: {0}")]
    TheoremViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
}
