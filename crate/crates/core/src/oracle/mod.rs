//! Dense density-matrix reference simulator for small registers, used to cross-check
//! the fast eigenvalue pipeline.

mod born;
mod dense;
mod twirl;

pub use born::{
    born_from_matrix, born_from_state, noiseless_born, oracle_born, oracle_born_with, OracleBorn,
    TwirledNoise,
};
pub use dense::{
    conjugate, dense_degree_table, dense_flo_unitary, dense_gate, dense_givens_factor, dense_majorana,
    dense_monomial, dense_pauli, dense_sequence, hs_inner, CMatrix, DenseState, MonomialTable, C64,
    MAX_OPERATOR_QUBITS, MAX_STATE_QUBITS,
};
pub use twirl::{
    extract_fermionic_probs, matrix_from_pauli_vector, mc_flo_twirl, mc_flo_twirl_batches, pauli_vector,
    ptm_of_unitary, DenseSuperop, ExtractedTwirl, MAX_SUPEROP_QUBITS,
};
