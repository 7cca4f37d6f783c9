//! Majorana operators, the Jordan-Wigner map, single-particle transforms and the gate set.

mod gates;
mod majorana;
mod pauli;
mod transform;

pub use gates::{
    gate_transition_matrix, normalize_angle, sequence_transform, u_plus_gates, GateId, GateInstance,
    ThetaBinning,
};
pub use majorana::{degree_of_pauli, jw_pauli_of_monomial, jw_single, monomial_of_pauli, MajoranaMonomial};
pub use pauli::{all_pauli_labels, PauliLabel, PauliString, Phase, MAX_QUBITS};
pub use transform::{
    compose_transforms, compound_action, givens_decompose, haar_orthogonal, GivensDecomposition,
    GivensFactor, SingleParticleTransform, ORTHOGONALITY_TOLERANCE,
};
