//! Error type shared by every module.

use thiserror::Error;

/// Failures reported by construction, solve and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LaxError {
    /// Structurally invalid input such as an identically zero denominator.
    #[error("malformed input: {0}")]
    MalformedInput(String),
    /// A function has a pole outside the declared profile or above its order.
    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),
    /// Coincident nodes, roots or poles make a solve ill-posed.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    /// A structured matrix has a vanishing pivot.
    #[error("singular matrix: {0}")]
    Singular(String),
    /// User-supplied values disagree with the normalization of the times.
    #[error("normalization conflict: {0}")]
    NormalizationConflict(String),
    /// The pole profile has genus below one or an invalid order.
    #[error("unsupported profile: {0}")]
    UnsupportedProfile(String),
    /// Chart constraints are violated beyond tolerance.
    #[error("chart constraint violated: {0}")]
    Chart(String),
    /// An overdetermined system turned out inconsistent.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
    /// A square root or fractional power has no well-defined branch.
    #[error("branch ambiguity: {0}")]
    BranchAmbiguity(String),
    /// A deformation direction touches a frozen time.
    #[error("frozen direction: {0}")]
    FrozenDirection(String),
    /// Invalid harness configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, LaxError>;
