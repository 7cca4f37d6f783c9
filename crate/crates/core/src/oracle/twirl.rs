use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use super::dense::{
    check_qubits, dense_flo_unitary, CMatrix, DenseState, MonomialTable, PauliAction,
};
use crate::error::{FacesError, Result};
use crate::fermion::{all_pauli_labels, givens_decompose, haar_orthogonal, PauliLabel};
use crate::kravchuk::{eigs_to_probs, EigenvalueVector, FermionicDistribution};
use crate::noise::PauliChannel;

/// Largest register for superoperators on the full Pauli basis.
pub const MAX_SUPEROP_QUBITS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    PauliDiagonal(Vec<f64>),
    Transfer(DMatrix<f64>),
}

/// A channel in the Pauli transfer representation: `E(sigma_b) = sum_a T[a][b] sigma_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSuperop {
    qubits: usize,
    repr: Repr,
}

fn actions(qubits: usize) -> Result<Vec<PauliAction>> {
    Ok(all_pauli_labels(qubits)?.iter().map(PauliAction::new).collect())
}

/// Pauli transfer matrix of `rho -> U rho U^dagger`.
pub fn ptm_of_unitary(u: &CMatrix) -> Result<DMatrix<f64>> {
    let dim = u.nrows();
    let qubits = dim.trailing_zeros() as usize;
    check_qubits(qubits, MAX_SUPEROP_QUBITS)?;
    let acts = actions(qubits)?;
    let size = acts.len();
    let u_dag = u.adjoint();
    let mut t = DMatrix::zeros(size, size);
    for (b, act_b) in acts.iter().enumerate() {
        let m = u * act_b.left_mul(&u_dag);
        for (a, act_a) in acts.iter().enumerate() {
            t[(a, b)] = act_a.trace_with(&m).re / dim as f64;
        }
    }
    Ok(t)
}

/// Coefficients `c_b = Tr(sigma_b rho)`.
pub fn pauli_vector(state: &DenseState) -> Result<Vec<f64>> {
    check_qubits(state.qubits(), MAX_SUPEROP_QUBITS)?;
    Ok(actions(state.qubits())?
        .iter()
        .map(|a| a.trace_with(state.matrix()).re)
        .collect())
}

/// `rho = 2^-n sum_b c_b sigma_b`.
pub fn matrix_from_pauli_vector(qubits: usize, coeffs: &[f64]) -> Result<CMatrix> {
    check_qubits(qubits, MAX_SUPEROP_QUBITS)?;
    let dim = 1usize << qubits;
    let acts = actions(qubits)?;
    if coeffs.len() != acts.len() {
        return Err(FacesError::LengthMismatch {
            expected: acts.len(),
            found: coeffs.len(),
        });
    }
    let mut rho = CMatrix::zeros(dim, dim);
    for (act, &cb) in acts.iter().zip(coeffs) {
        if cb == 0.0 {
            continue;
        }
        for k in 0..dim {
            rho[(k ^ act.flip(), k)] += act.phase(k) * (cb / dim as f64);
        }
    }
    Ok(rho)
}

impl DenseSuperop {
    pub fn identity(qubits: usize) -> Result<Self> {
        check_qubits(qubits, MAX_SUPEROP_QUBITS)?;
        Ok(Self {
            qubits,
            repr: Repr::PauliDiagonal(alloc::vec![1.0; 1 << (2 * qubits)]),
        })
    }

    /// Diagonal action `lambda_b = sum_x p_x (+1 if sigma_x commutes with sigma_b else -1)`.
    pub fn from_pauli_channel(channel: &PauliChannel) -> Result<Self> {
        let qubits = channel.qubits();
        check_qubits(qubits, MAX_SUPEROP_QUBITS)?;
        let labels = all_pauli_labels(qubits)?;
        let diag = labels
            .iter()
            .map(|b| {
                channel
                    .iter()
                    .map(|(x, &p)| if x.commutes_with(b) { p } else { -p })
                    .sum()
            })
            .collect();
        Ok(Self {
            qubits,
            repr: Repr::PauliDiagonal(diag),
        })
    }

    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        let t = ptm_of_unitary(u)?;
        Ok(Self {
            qubits: u.nrows().trailing_zeros() as usize,
            repr: Repr::Transfer(t),
        })
    }

    pub fn from_transfer(qubits: usize, t: DMatrix<f64>) -> Result<Self> {
        check_qubits(qubits, MAX_SUPEROP_QUBITS)?;
        let size = 1usize << (2 * qubits);
        if t.nrows() != size || t.ncols() != size {
            return Err(FacesError::DimensionMismatch {
                left: t.nrows(),
                right: size,
            });
        }
        Ok(Self {
            qubits,
            repr: Repr::Transfer(t),
        })
    }

    /// Exactly FLO-twirled channel with degree distribution `q`: diagonal `xi_{deg(b)}`.
    pub fn flo_twirled(q: &FermionicDistribution, table: &MonomialTable) -> Result<Self> {
        let qubits = q.qubits();
        check_qubits(qubits, MAX_SUPEROP_QUBITS)?;
        let xi = crate::kravchuk::probs_to_eigs(q)?;
        let diag = all_pauli_labels(qubits)?
            .iter()
            .map(|b| Ok(xi.get(table.degree_of(b)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            qubits,
            repr: Repr::PauliDiagonal(diag),
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn size(&self) -> usize {
        1 << (2 * self.qubits)
    }

    pub fn is_pauli_diagonal(&self) -> bool {
        matches!(self.repr, Repr::PauliDiagonal(_))
    }

    pub fn transfer_matrix(&self) -> DMatrix<f64> {
        match &self.repr {
            Repr::PauliDiagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
            Repr::Transfer(t) => t.clone(),
        }
    }

    pub fn apply_vector(&self, coeffs: &[f64]) -> Vec<f64> {
        match &self.repr {
            Repr::PauliDiagonal(d) => d.iter().zip(coeffs).map(|(a, b)| a * b).collect(),
            Repr::Transfer(t) => {
                let v = t * nalgebra::DVector::from_column_slice(coeffs);
                v.iter().copied().collect()
            }
        }
    }

    pub fn apply_state(&self, state: &DenseState) -> Result<DenseState> {
        if state.qubits() != self.qubits {
            return Err(FacesError::DimensionMismatch {
                left: state.qubits(),
                right: self.qubits,
            });
        }
        let c = self.apply_vector(&pauli_vector(state)?);
        DenseState::new(matrix_from_pauli_vector(self.qubits, &c)?)
    }

    /// Largest deviation of the first row from `e_0`.
    pub fn trace_preservation_error(&self) -> f64 {
        let t = self.transfer_matrix();
        (0..t.ncols())
            .map(|b| (t[(0, b)] - if b == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Choi matrix `2^-n sum_ab T[a][b] sigma_a (x) sigma_b^T`.
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        let dim = 1usize << self.qubits;
        let acts = actions(self.qubits)?;
        let t = self.transfer_matrix();
        let mut choi = CMatrix::zeros(dim * dim, dim * dim);
        for (a, act_a) in acts.iter().enumerate() {
            for (b, act_b) in acts.iter().enumerate() {
                let w = t[(a, b)];
                if w == 0.0 {
                    continue;
                }
                for c1 in 0..dim {
                    let r1 = c1 ^ act_a.flip();
                    let pa = act_a.phase(c1);
                    for r2 in 0..dim {
                        let c2 = r2 ^ act_b.flip();
                        let pb = act_b.phase(r2);
                        choi[(r1 * dim + r2, c1 * dim + c2)] += pa * pb * (w / dim as f64);
                    }
                }
            }
        }
        Ok(choi
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min))
    }

    pub fn is_completely_positive(&self, tol: f64) -> Result<bool> {
        Ok(self.choi_min_eigenvalue()? >= -tol)
    }

    /// Entry-wise mean of superoperators on the same register.
    pub fn mean(items: &[DenseSuperop]) -> Result<DenseSuperop> {
        let first = items
            .first()
            .ok_or_else(|| FacesError::InvalidArgument("empty superoperator list".into()))?;
        let mut acc = DMatrix::zeros(first.size(), first.size());
        for s in items {
            if s.qubits != first.qubits {
                return Err(FacesError::DimensionMismatch {
                    left: s.qubits,
                    right: first.qubits,
                });
            }
            acc += s.transfer_matrix();
        }
        acc /= items.len() as f64;
        DenseSuperop::from_transfer(first.qubits, acc)
    }
}

/// Sparse rows of a transfer matrix: `(column, value)` pairs above `1e-14`.
fn sparse_rows(t: &DMatrix<f64>) -> Vec<Vec<(usize, f64)>> {
    (0..t.nrows())
        .map(|a| {
            (0..t.ncols())
                .filter_map(|b| {
                    let v = t[(a, b)];
                    (v.abs() > 1e-14).then_some((b, v))
                })
                .collect()
        })
        .collect()
}

/// Accumulates `T E T^T` into `acc`.
fn accumulate_conjugated(acc: &mut DMatrix<f64>, t: &DMatrix<f64>, channel: &DenseSuperop) {
    match &channel.repr {
        Repr::PauliDiagonal(d) => {
            let rows = sparse_rows(t);
            let mut dense_row = alloc::vec![0.0; t.ncols()];
            for (a, row_a) in rows.iter().enumerate() {
                for &(b, v) in row_a {
                    dense_row[b] = v * d[b];
                }
                for (c, row_c) in rows.iter().enumerate() {
                    let s: f64 = row_c.iter().map(|&(b, v)| dense_row[b] * v).sum();
                    acc[(a, c)] += s;
                }
                for &(b, _) in row_a {
                    dense_row[b] = 0.0;
                }
            }
        }
        Repr::Transfer(e) => {
            *acc += t * e * t.transpose();
        }
    }
}

/// Monte-Carlo FLO twirl: the mean of `U E U^dagger` over `samples` Haar-random FLO
/// unitaries, each compiled from a Haar orthogonal matrix via Givens rotations.
pub fn mc_flo_twirl<R: Rng + ?Sized>(channel: &DenseSuperop, samples: usize, rng: &mut R) -> Result<DenseSuperop> {
    if samples == 0 {
        return Err(FacesError::InvalidArgument("twirl needs at least one sample".into()));
    }
    let qubits = channel.qubits();
    let size = channel.size();
    let mut acc = DMatrix::zeros(size, size);
    for _ in 0..samples {
        let r = haar_orthogonal(2 * qubits, rng)?;
        let u = dense_flo_unitary(&givens_decompose(&r)?)?;
        let t = ptm_of_unitary(&u)?;
        accumulate_conjugated(&mut acc, &t, channel);
    }
    acc /= samples as f64;
    DenseSuperop::from_transfer(qubits, acc)
}

/// Independent twirls of `samples` unitaries each, for batch-means error estimates.
pub fn mc_flo_twirl_batches<R: Rng + ?Sized>(
    channel: &DenseSuperop,
    samples: usize,
    batches: usize,
    rng: &mut R,
) -> Result<Vec<DenseSuperop>> {
    (0..batches.max(1)).map(|_| mc_flo_twirl(channel, samples, rng)).collect()
}

/// Degree distribution read off an (approximately) FLO-twirled channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedTwirl {
    pub q: FermionicDistribution,
    /// Mean diagonal action on each degree sector.
    pub xi: Vec<f64>,
    /// Largest spread of the diagonal within a degree, or off-diagonal magnitude.
    pub residual: f64,
}

/// Groups the diagonal of `twirled` by Majorana degree and inverts to degree probabilities.
pub fn extract_fermionic_probs(
    twirled: &DenseSuperop,
    table: &MonomialTable,
    threshold: f64,
) -> Result<ExtractedTwirl> {
    let qubits = twirled.qubits();
    let modes = 2 * qubits;
    let t = twirled.transfer_matrix();
    let labels: Vec<PauliLabel> = all_pauli_labels(qubits)?;
    let degrees: Vec<usize> = labels.iter().map(|l| table.degree_of(l)).collect::<Result<_>>()?;
    let mut sums = alloc::vec![0.0; modes + 1];
    let mut counts = alloc::vec![0usize; modes + 1];
    for (b, &d) in degrees.iter().enumerate() {
        sums[d] += t[(b, b)];
        counts[d] += 1;
    }
    let xi: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let mut residual = 0.0f64;
    for a in 0..t.nrows() {
        for b in 0..t.ncols() {
            let dev = if a == b {
                (t[(a, b)] - xi[degrees[a]]).abs()
            } else {
                t[(a, b)].abs()
            };
            residual = residual.max(dev);
        }
    }
    if residual > threshold {
        return Err(FacesError::NotTwirled { residual, threshold });
    }
    let clipped: Vec<f64> = xi.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
    let q = eigs_to_probs(&EigenvalueVector::new(clipped)?)?;
    Ok(ExtractedTwirl { q, xi, residual })
}
