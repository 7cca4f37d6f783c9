use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Complex, DMatrix};

use crate::error::{FacesError, Result};
use crate::fermion::{
    GateId, GateInstance, GivensDecomposition, GivensFactor, MajoranaMonomial, PauliLabel,
};
use crate::noise::PauliChannel;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest register for dense operator matrices.
pub const MAX_OPERATOR_QUBITS: usize = 5;
/// Largest register for dense states.
pub const MAX_STATE_QUBITS: usize = 4;

pub(crate) fn check_qubits(qubits: usize, max: usize) -> Result<()> {
    if qubits == 0 || qubits > max {
        return Err(FacesError::OracleTooLarge { qubits, max });
    }
    Ok(())
}

pub(crate) fn modulus(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn single_qubit(factor: char) -> CMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let entries = match factor {
        'X' => [z, one, one, z],
        'Y' => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        'Z' => [one, z, z, -one],
        _ => [one, z, z, one],
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut acc = CMatrix::identity(1, 1);
    for f in factors {
        acc = acc.kronecker(f);
    }
    acc
}

/// Dense matrix of a Hermitian Pauli label; qubit 1 is the leftmost tensor factor.
pub fn dense_pauli(label: &PauliLabel) -> Result<CMatrix> {
    check_qubits(label.qubits(), MAX_OPERATOR_QUBITS)?;
    let factors: Vec<CMatrix> = (1..=label.qubits()).map(|j| single_qubit(label.factor(j))).collect();
    Ok(kron_all(&factors))
}

/// Dense Jordan-Wigner Majorana operator `gamma_mode`, built as an explicit tensor product.
pub fn dense_majorana(qubits: usize, mode: usize) -> Result<CMatrix> {
    check_qubits(qubits, MAX_OPERATOR_QUBITS)?;
    if mode == 0 || mode > 2 * qubits {
        return Err(FacesError::InvalidMonomial(alloc::format!("mode {mode} out of range")));
    }
    let j = mode.div_ceil(2);
    let factors: Vec<CMatrix> = (1..=qubits)
        .map(|q| {
            if q < j {
                single_qubit('Z')
            } else if q == j {
                single_qubit(if mode % 2 == 1 { 'X' } else { 'Y' })
            } else {
                single_qubit('I')
            }
        })
        .collect();
    Ok(kron_all(&factors))
}

/// Dense `gamma_alpha` as the ordered product of its Majorana factors.
pub fn dense_monomial(alpha: &MajoranaMonomial) -> Result<CMatrix> {
    let qubits = alpha.modes() / 2;
    check_qubits(qubits, MAX_OPERATOR_QUBITS)?;
    let dim = 1usize << qubits;
    let mut acc = CMatrix::identity(dim, dim);
    for mu in alpha.indices() {
        acc *= dense_majorana(qubits, mu)?;
    }
    Ok(acc)
}

/// Basis-index bit of qubit `j` (1-based) in an `n`-qubit register.
pub(crate) fn qubit_bit(n: usize, j: usize) -> usize {
    1usize << (n - j)
}

/// `G(A, B)` acting on qubits `j, j + 1`: `A` on `|00>, |11>` and `B` on `|01>, |10>`.
fn two_qubit_matchgate(n: usize, j: usize, a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> CMatrix {
    let dim = 1usize << n;
    let hi = qubit_bit(n, j);
    let lo = qubit_bit(n, j + 1);
    let mut local = [[0.0; 4]; 4];
    local[0][0] = a[0][0];
    local[0][3] = a[0][1];
    local[3][0] = a[1][0];
    local[3][3] = a[1][1];
    local[1][1] = b[0][0];
    local[1][2] = b[0][1];
    local[2][1] = b[1][0];
    local[2][2] = b[1][1];
    let mut u = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let p_in = 2 * usize::from(col & hi != 0) + usize::from(col & lo != 0);
        let base = col & !(hi | lo);
        for (p_out, row) in local.iter().enumerate() {
            let v = row[p_in];
            if v != 0.0 {
                let r = base | if p_out & 2 != 0 { hi } else { 0 } | if p_out & 1 != 0 { lo } else { 0 };
                u[(r, col)] = c(v, 0.0);
            }
        }
    }
    u
}

/// Dense unitary of a gate instance.
pub fn dense_gate(gate: &GateInstance, qubits: usize) -> Result<CMatrix> {
    check_qubits(qubits, MAX_OPERATOR_QUBITS)?;
    let dim = 1usize << qubits;
    match (gate.id, gate.theta) {
        (GateId::ZRot { qubit, .. }, Some(theta)) if (1..=qubits).contains(&qubit) => {
            let bit = qubit_bit(qubits, qubit);
            let (s, co) = libm::sincos(theta);
            let mut u = CMatrix::zeros(dim, dim);
            for k in 0..dim {
                u[(k, k)] = if k & bit == 0 { c(co, s) } else { c(co, -s) };
            }
            Ok(u)
        }
        (GateId::FHop { qubit }, None) if qubit >= 1 && qubit < qubits => {
            let h = [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]];
            Ok(two_qubit_matchgate(qubits, qubit, h, h))
        }
        _ => Err(FacesError::InvalidGate(alloc::format!(
            "{} cannot act on {qubits} qubits",
            gate.id
        ))),
    }
}

/// Dense `U = U_L ... U_1` for gates listed in application order.
pub fn dense_sequence(gates: &[GateInstance], qubits: usize) -> Result<CMatrix> {
    let dim = 1usize << qubits;
    let mut u = CMatrix::identity(dim, dim);
    for g in gates {
        u = dense_gate(g, qubits)? * u;
    }
    Ok(u)
}

/// Unitary of one Givens factor: `gamma_1` for the reflection, and
/// `exp(angle/2 * gamma_mu gamma_{mu+1})` for a rotation.
pub fn dense_givens_factor(factor: &GivensFactor, qubits: usize) -> Result<CMatrix> {
    match *factor {
        GivensFactor::Reflection => dense_majorana(qubits, 1),
        GivensFactor::Rotation { mode, angle } => {
            let dim = 1usize << qubits;
            let pair = dense_majorana(qubits, mode)? * dense_majorana(qubits, mode + 1)?;
            let (s, co) = libm::sincos(angle / 2.0);
            Ok(CMatrix::identity(dim, dim) * c(co, 0.0) + pair * c(s, 0.0))
        }
    }
}

/// FLO unitary realising a Givens decomposition.
pub fn dense_flo_unitary(dec: &GivensDecomposition) -> Result<CMatrix> {
    let qubits = dec.modes() / 2;
    let dim = 1usize << qubits;
    let mut u = CMatrix::identity(dim, dim);
    for f in dec.factors() {
        u = dense_givens_factor(f, qubits)? * u;
    }
    Ok(u)
}

/// `U M U^dagger`.
pub fn conjugate(u: &CMatrix, m: &CMatrix) -> CMatrix {
    u * m * u.adjoint()
}

/// Frobenius inner product `Tr(A^dagger B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Dense matrices of every Majorana monomial on a register, for brute-force lookups.
pub struct MonomialTable {
    dim: usize,
    entries: Vec<(MajoranaMonomial, CMatrix)>,
}

impl MonomialTable {
    pub fn new(qubits: usize) -> Result<Self> {
        check_qubits(qubits, MAX_OPERATOR_QUBITS)?;
        let modes = 2 * qubits;
        let entries = (0..1u64 << modes)
            .map(|s| {
                let alpha = MajoranaMonomial::new(modes, s)?;
                Ok((alpha, dense_monomial(&alpha)?))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            dim: 1usize << qubits,
            entries,
        })
    }

    /// Monomial `gamma_alpha` and phase `c` with `sigma = c * gamma_alpha`, by dense matching.
    pub fn decompose(&self, label: &PauliLabel) -> Result<(MajoranaMonomial, C64)> {
        let sigma = dense_pauli(label)?;
        if sigma.nrows() != self.dim {
            return Err(FacesError::DimensionMismatch {
                left: sigma.nrows(),
                right: self.dim,
            });
        }
        let dim = self.dim as f64;
        self.entries
            .iter()
            .find_map(|(alpha, m)| {
                let overlap = hs_inner(m, &sigma);
                ((modulus(overlap) - dim).abs() < 1e-9).then(|| (*alpha, overlap / dim))
            })
            .ok_or_else(|| FacesError::InvalidPauli(alloc::format!("{label} has no monomial")))
    }

    pub fn degree_of(&self, label: &PauliLabel) -> Result<usize> {
        Ok(self.decompose(label)?.0.degree())
    }
}

/// Majorana degree of every Pauli label in dense index order, by dense matching.
pub fn dense_degree_table(qubits: usize) -> Result<Vec<usize>> {
    let table = MonomialTable::new(qubits)?;
    crate::fermion::all_pauli_labels(qubits)?
        .iter()
        .map(|l| table.degree_of(l))
        .collect()
}

/// Fast action of a Pauli label on computational basis states:
/// `sigma |k> = phase(k) |k ^ flip>`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PauliAction {
    flip: usize,
    zmask: usize,
    y_phase: C64,
}

impl PauliAction {
    pub(crate) fn new(label: &PauliLabel) -> Self {
        let n = label.qubits();
        let mut flip = 0;
        let mut zmask = 0;
        for j in 1..=n {
            let bit = qubit_bit(n, j);
            match label.factor(j) {
                'X' => flip |= bit,
                'Y' => {
                    flip |= bit;
                    zmask |= bit
                }
                'Z' => zmask |= bit,
                _ => {}
            }
        }
        let ys = (label.x_bits() & label.z_bits()).count_ones();
        let y_phase = match ys % 4 {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
        Self { flip, zmask, y_phase }
    }

    pub(crate) fn flip(&self) -> usize {
        self.flip
    }

    /// Coefficient of `|k ^ flip>` in `sigma |k>`.
    pub(crate) fn phase(&self, k: usize) -> C64 {
        if (k & self.zmask).count_ones().is_multiple_of(2) {
            self.y_phase
        } else {
            -self.y_phase
        }
    }

    /// `Tr(sigma M)`.
    pub(crate) fn trace_with(&self, m: &CMatrix) -> C64 {
        (0..m.nrows()).map(|l| self.phase(l) * m[(l, l ^ self.flip)]).sum()
    }

    /// `sigma M`.
    pub(crate) fn left_mul(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        for k in 0..m.nrows() {
            let src = k ^ self.flip;
            let ph = self.phase(src);
            for col in 0..m.ncols() {
                out[(k, col)] = ph * m[(src, col)];
            }
        }
        out
    }
}

/// A density matrix on at most [`MAX_STATE_QUBITS`] qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    qubits: usize,
    rho: CMatrix,
}

impl DenseState {
    pub fn new(rho: CMatrix) -> Result<Self> {
        let dim = rho.nrows();
        if !dim.is_power_of_two() || rho.ncols() != dim || dim < 2 {
            return Err(FacesError::DimensionMismatch {
                left: rho.nrows(),
                right: rho.ncols(),
            });
        }
        let qubits = dim.trailing_zeros() as usize;
        check_qubits(qubits, MAX_STATE_QUBITS)?;
        let state = Self { qubits, rho };
        state.validate()?;
        Ok(state)
    }

    /// Pure state `|psi><psi|` from a normalised vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    pub fn zero(qubits: usize) -> Result<Self> {
        check_qubits(qubits, MAX_STATE_QUBITS)?;
        let dim = 1usize << qubits;
        let mut rho = CMatrix::zeros(dim, dim);
        rho[(0, 0)] = c(1.0, 0.0);
        Self::new(rho)
    }

    /// `|+>^{(x) n}`.
    pub fn plus(qubits: usize) -> Result<Self> {
        check_qubits(qubits, MAX_STATE_QUBITS)?;
        let dim = 1usize << qubits;
        Self::new(CMatrix::from_element(dim, dim, c(1.0 / dim as f64, 0.0)))
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Checks Hermiticity and unit trace to `1e-10` and positivity to `-1e-8`.
    pub fn validate(&self) -> Result<()> {
        let herm = (&self.rho - self.rho.adjoint()).iter().map(|v| modulus(*v)).fold(0.0, f64::max);
        let tr = self.rho.trace();
        if herm > 1e-10 || (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(FacesError::InvalidArgument(alloc::format!(
                "not a density matrix (hermiticity {herm:e}, trace {tr})"
            )));
        }
        let min = self
            .rho
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-8 {
            return Err(FacesError::InvalidArgument(alloc::format!(
                "state has negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn apply_unitary(&self, u: &CMatrix) -> Self {
        Self {
            qubits: self.qubits,
            rho: conjugate(u, &self.rho),
        }
    }

    /// `sum_x p_x sigma_x rho sigma_x`.
    pub fn apply_pauli_channel(&self, channel: &PauliChannel) -> Result<Self> {
        if channel.qubits() != self.qubits {
            return Err(FacesError::DimensionMismatch {
                left: channel.qubits(),
                right: self.qubits,
            });
        }
        let dim = self.rho.nrows();
        let mut out = CMatrix::zeros(dim, dim);
        for (label, &p) in channel.iter() {
            let act = PauliAction::new(label);
            let left = act.left_mul(&self.rho);
            for row in 0..dim {
                for col in 0..dim {
                    out[(row, col)] += left[(row, col ^ act.flip())] * act.phase(col) * p;
                }
            }
        }
        Ok(Self {
            qubits: self.qubits,
            rho: out,
        })
    }

    /// Real part of the diagonal.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|k| self.rho[(k, k)].re).collect()
    }
}
