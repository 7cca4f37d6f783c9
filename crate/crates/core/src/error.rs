use alloc::string::String;
use alloc::vec::Vec;

use crate::fermion::GateId;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FacesError {
    #[error("Kravchuk order {order} exceeds the 64-bit capacity limit of {max}")]
    KravchukCapacity { order: usize, max: usize },

    #[error("antipode involution requires an even order, got {0}")]
    OddAntipodeOrder(usize),

    #[error("vector of length {0} does not describe an even number of modes")]
    BadModeVectorLength(usize),

    #[error("distribution is not normalized: total mass {total}")]
    NotNormalized { total: f64 },

    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("eigenvalues are non-physical: degree-{degree} probability would be {value}")]
    NonPhysicalEigenvalues { degree: usize, value: f64 },

    #[error("invalid eigenvalue {value} at degree {degree}")]
    InvalidEigenvalue { degree: usize, value: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid Majorana monomial: {0}")]
    InvalidMonomial(String),

    #[error("invalid Pauli string: {0}")]
    InvalidPauli(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("matrix is not orthogonal (max deviation {deviation:e})")]
    NotOrthogonal { deviation: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("gate {0} is not present in the noise model")]
    UnknownGate(GateId),

    #[error("invalid noise parameters: {0}")]
    InvalidNoiseParameters(String),

    #[error("inconsistent noise model entry for {gate}: twirled Pauli channel differs from stored eigenvalues by {deviation:e}")]
    InconsistentNoise { gate: GateId, deviation: f64 },

    #[error("design has {circuits} circuits but {parameters} gate parameters (need J >= K)")]
    TooFewCircuits { circuits: usize, parameters: usize },

    #[error("A is not full rank. M is not identifiable from C (deficient degree sectors: {degrees:?})")]
    NotIdentifiable { degrees: Vec<usize> },

    #[error("A is not full rank with cutoff {cutoff} (degree {degree}: {kept} rows kept for {parameters} parameters)")]
    CutoffRankLoss {
        degree: usize,
        cutoff: f64,
        kept: usize,
        parameters: usize,
    },

    #[error("matrix does not have full column rank ({rank} < {columns})")]
    RankDeficient { rank: usize, columns: usize },

    #[error("degree {degree} is out of range 1..={max}")]
    InvalidDegree { degree: usize, max: usize },

    #[error("circuit {circuit} misses its net target by {deviation:e}")]
    NetTargetViolation { circuit: usize, deviation: f64 },

    #[error("the dense oracle supports at most {max} qubits, got {qubits}")]
    OracleTooLarge { qubits: usize, max: usize },

    #[error("channel is not FLO-twirled: residual {residual:e} exceeds {threshold:e}")]
    NotTwirled { residual: f64, threshold: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, FacesError>;
