//! Kravchuk matrices and the transforms between fermionic probability vectors,
//! channel eigenvalues and measured Born distributions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{FacesError, Result};

/// Largest order whose Kravchuk entries are guaranteed to fit in an `i64`.
pub const MAX_KRAVCHUK_ORDER: usize = 60;

/// Tolerance on the total mass of a probability vector.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Probabilities below this are reported as non-physical rather than rounding noise.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;

/// Binomial coefficient `C(n, k)`, exact for `n <= 62`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_KRAVCHUK_ORDER {
        return Err(FacesError::KravchukCapacity {
            order,
            max: MAX_KRAVCHUK_ORDER,
        });
    }
    Ok(())
}

/// The `(order+1) x (order+1)` Kravchuk matrix with exact integer entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KravchukMatrix {
    order: usize,
    entries: Vec<i64>,
}

impl KravchukMatrix {
    pub fn new(order: usize) -> Result<Self> {
        check_order(order)?;
        let dim = order + 1;
        let mut entries = vec![0i64; dim * dim];
        for j in 0..dim {
            for k in 0..dim {
                let lo = (k + j).saturating_sub(order);
                let hi = j.min(k);
                let mut acc: i64 = 0;
                for m in lo..=hi {
                    let term = (binomial(order - j, k - m) * binomial(j, m)) as i64;
                    if m % 2 == 0 {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
                entries[j * dim + k] = acc;
            }
        }
        Ok(Self { order, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.order + 1
    }

    pub fn get(&self, j: usize, k: usize) -> i64 {
        self.entries[j * self.dim() + k]
    }

    pub fn row(&self, j: usize) -> &[i64] {
        let d = self.dim();
        &self.entries[j * d..(j + 1) * d]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    /// Exact integer square of the matrix.
    pub fn square(&self) -> Vec<i128> {
        let d = self.dim();
        let mut out = vec![0i128; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k) as i128;
                if a == 0 {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * self.get(k, j) as i128;
                }
            }
        }
        out
    }
}

/// Convenience constructor for [`KravchukMatrix`].
pub fn kravchuk_matrix(order: usize) -> Result<KravchukMatrix> {
    KravchukMatrix::new(order)
}

/// The antipode involution on `{0, ..., order}`: fixes even indices and maps odd `j` to `order - j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntipodePermutation {
    mapping: Vec<usize>,
}

impl AntipodePermutation {
    pub fn new(order: usize) -> Result<Self> {
        if !order.is_multiple_of(2) {
            return Err(FacesError::OddAntipodeOrder(order));
        }
        let mapping = (0..=order)
            .map(|j| if j % 2 == 0 { j } else { order - j })
            .collect();
        Ok(Self { mapping })
    }

    pub fn apply(&self, j: usize) -> usize {
        self.mapping[j]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }
}

/// Diagonal of binomial coefficients `C(order, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinomialDiagonal {
    diagonal: Vec<u64>,
}

impl BinomialDiagonal {
    pub fn new(order: usize) -> Result<Self> {
        check_order(order)?;
        Ok(Self {
            diagonal: (0..=order).map(|k| binomial(order, k)).collect(),
        })
    }

    pub fn get(&self, k: usize) -> u64 {
        self.diagonal[k]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.diagonal
    }
}

fn modes_from_len(len: usize) -> Result<usize> {
    if len < 3 || len.is_multiple_of(2) {
        return Err(FacesError::BadModeVectorLength(len));
    }
    Ok(len - 1)
}

/// Probability mass `q_k` on each Majorana degree `k = 0..=2n` of an FLO-twirled channel.
///
/// Entries are non-negative up to [`NEGATIVITY_TOLERANCE`] and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionicDistribution {
    q: Vec<f64>,
}

impl FermionicDistribution {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        modes_from_len(q.len())?;
        for (index, &value) in q.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(FacesError::NegativeProbability { index, value });
            }
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(FacesError::NotNormalized { total });
        }
        Ok(Self { q })
    }

    /// Distribution with all mass on degree zero.
    pub fn identity(modes: usize) -> Result<Self> {
        let mut q = vec![0.0; modes + 1];
        q[0] = 1.0;
        Self::new(q)
    }

    pub fn modes(&self) -> usize {
        self.q.len() - 1
    }

    pub fn qubits(&self) -> usize {
        self.modes() / 2
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn get(&self, k: usize) -> f64 {
        self.q[k]
    }

    /// Most negative entry, or zero when every entry is non-negative.
    pub fn negativity(&self) -> f64 {
        self.q.iter().fold(0.0f64, |acc, &v| acc.min(v))
    }
}

/// Eigenvalues `xi_k` of a twirled channel on each degree sector, with `xi_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueVector {
    xi: Vec<f64>,
}

impl EigenvalueVector {
    pub fn new(xi: Vec<f64>) -> Result<Self> {
        modes_from_len(xi.len())?;
        if (xi[0] - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(FacesError::InvalidEigenvalue {
                degree: 0,
                value: xi[0],
            });
        }
        for (degree, &value) in xi.iter().enumerate() {
            if !value.is_finite() || value.abs() > 1.0 + NORMALIZATION_TOLERANCE {
                return Err(FacesError::InvalidEigenvalue { degree, value });
            }
        }
        Ok(Self { xi })
    }

    pub fn identity(modes: usize) -> Result<Self> {
        Self::new(vec![1.0; modes + 1])
    }

    pub fn modes(&self) -> usize {
        self.xi.len() - 1
    }

    pub fn qubits(&self) -> usize {
        self.modes() / 2
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.xi
    }

    pub fn get(&self, k: usize) -> f64 {
        self.xi[k]
    }
}

/// Eigenvalues of the twirled channel with degree probabilities `q`.
pub fn probs_to_eigs(q: &FermionicDistribution) -> Result<EigenvalueVector> {
    let modes = q.modes();
    let m = KravchukMatrix::new(modes)?;
    let s = AntipodePermutation::new(modes)?;
    let d = BinomialDiagonal::new(modes)?;
    let mut xi: Vec<f64> = (0..=modes)
        .map(|j| {
            m.row(s.apply(j))
                .iter()
                .zip(q.as_slice())
                .enumerate()
                .map(|(k, (&mjk, &qk))| mjk as f64 * qk / d.get(k) as f64)
                .sum()
        })
        .collect();
    xi[0] = 1.0;
    for v in xi.iter_mut() {
        *v = v.clamp(-1.0, 1.0);
    }
    EigenvalueVector::new(xi)
}

/// Degree probabilities of the twirled channel with eigenvalues `xi`.
///
/// Entries below `-NEGATIVITY_TOLERANCE` are reported as non-physical; smaller
/// negative residuals are kept and exposed through [`FermionicDistribution::negativity`].
pub fn eigs_to_probs(xi: &EigenvalueVector) -> Result<FermionicDistribution> {
    let modes = xi.modes();
    let m = KravchukMatrix::new(modes)?;
    let s = AntipodePermutation::new(modes)?;
    let d = BinomialDiagonal::new(modes)?;
    let scale = libm::pow(2.0, -(modes as f64));
    let q: Vec<f64> = (0..=modes)
        .map(|k| {
            let acc: f64 = m
                .row(k)
                .iter()
                .enumerate()
                .map(|(i, &mki)| mki as f64 * xi.get(s.apply(i)))
                .sum();
            d.get(k) as f64 * acc * scale
        })
        .collect();
    if let Some((degree, &value)) = q
        .iter()
        .enumerate()
        .find(|(_, &v)| v < -NEGATIVITY_TOLERANCE || !v.is_finite())
    {
        return Err(FacesError::NonPhysicalEigenvalues { degree, value });
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(FacesError::NotNormalized { total });
    }
    Ok(FermionicDistribution { q })
}

/// The two circuit families: computational-basis readout of `|0..0>` preparations,
/// and Y-basis readout of the first qubit for `|+..+>` preparations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CircuitKind {
    Z,
    X,
}

impl CircuitKind {
    pub fn label(self) -> &'static str {
        match self {
            CircuitKind::Z => "z",
            CircuitKind::X => "x",
        }
    }

    /// Whether circuits of this kind carry information about degree `k` out of `2n` modes.
    pub fn observes_degree(self, degree: usize, modes: usize) -> bool {
        match self {
            CircuitKind::Z => degree.is_multiple_of(2),
            CircuitKind::X => degree < modes,
        }
    }
}

impl core::fmt::Display for CircuitKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.label())
    }
}

/// Distribution of the Hamming-weight readout of a circuit.
///
/// `Z` holds `P(w)` for `w = 0..=n`; `X` holds `P(+, w)` and `P(-, w)` for
/// `w = 0..=n-1`, where `w` is the weight of qubits `2..n`.
#[derive(Debug, Clone, PartialEq)]
pub enum BornDistribution {
    Z { weights: Vec<f64> },
    X { plus: Vec<f64>, minus: Vec<f64> },
}

impl BornDistribution {
    pub fn kind(&self) -> CircuitKind {
        match self {
            BornDistribution::Z { .. } => CircuitKind::Z,
            BornDistribution::X { .. } => CircuitKind::X,
        }
    }

    pub fn qubits(&self) -> usize {
        match self {
            BornDistribution::Z { weights } => weights.len() - 1,
            BornDistribution::X { plus, .. } => plus.len(),
        }
    }

    /// Number of readout bins for a circuit of `kind` on `qubits` qubits.
    pub fn bin_count(kind: CircuitKind, qubits: usize) -> usize {
        match kind {
            CircuitKind::Z => qubits + 1,
            CircuitKind::X => 2 * qubits,
        }
    }

    /// Bin probabilities in canonical order (`X`: all `+` bins, then all `-` bins).
    pub fn bins(&self) -> Vec<f64> {
        match self {
            BornDistribution::Z { weights } => weights.clone(),
            BornDistribution::X { plus, minus } => plus.iter().chain(minus).copied().collect(),
        }
    }

    /// Inverse of [`BornDistribution::bins`].
    pub fn from_bins(kind: CircuitKind, qubits: usize, bins: &[f64]) -> Result<Self> {
        let expected = Self::bin_count(kind, qubits);
        if bins.len() != expected || qubits == 0 {
            return Err(FacesError::LengthMismatch {
                expected,
                found: bins.len(),
            });
        }
        Ok(match kind {
            CircuitKind::Z => BornDistribution::Z {
                weights: bins.to_vec(),
            },
            CircuitKind::X => BornDistribution::X {
                plus: bins[..qubits].to_vec(),
                minus: bins[qubits..].to_vec(),
            },
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.bins().iter().sum()
    }

    /// L1 distance between two distributions of the same shape.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        let a = self.bins();
        let b = other.bins();
        if self.kind() != other.kind() || a.len() != b.len() {
            return Err(FacesError::LengthMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum())
    }
}

/// Born distribution of a circuit of `kind` whose degree eigenvalues are `lambda`.
///
/// `Z` uses the even entries of `lambda` (length `2n + 1`); `X` uses degrees `0..2n`,
/// so `lambda` may omit the top degree.
pub fn circuit_eigs_to_born(lambda: &[f64], kind: CircuitKind, qubits: usize) -> Result<BornDistribution> {
    if qubits == 0 {
        return Err(FacesError::InvalidArgument("circuit needs at least one qubit".into()));
    }
    let modes = 2 * qubits;
    let needed = match kind {
        CircuitKind::Z => modes + 1,
        CircuitKind::X => modes,
    };
    if lambda.len() < needed {
        return Err(FacesError::LengthMismatch {
            expected: needed,
            found: lambda.len(),
        });
    }
    match kind {
        CircuitKind::Z => {
            let even: Vec<f64> = (0..=qubits).map(|l| lambda[2 * l]).collect();
            Ok(BornDistribution::Z {
                weights: forward(qubits, &even)?,
            })
        }
        CircuitKind::X => {
            let even: Vec<f64> = (0..qubits).map(|l| lambda[2 * l]).collect();
            let odd: Vec<f64> = (0..qubits).map(|l| lambda[2 * l + 1]).collect();
            let sum = forward(qubits - 1, &even)?;
            let diff = forward(qubits - 1, &odd)?;
            Ok(BornDistribution::X {
                plus: sum.iter().zip(&diff).map(|(a, b)| 0.5 * (a + b)).collect(),
                minus: sum.iter().zip(&diff).map(|(a, b)| 0.5 * (a - b)).collect(),
            })
        }
    }
}

/// `2^-order d M v`.
fn forward(order: usize, v: &[f64]) -> Result<Vec<f64>> {
    let m = KravchukMatrix::new(order)?;
    let d = BinomialDiagonal::new(order)?;
    let scale = libm::pow(2.0, -(order as f64));
    Ok((0..=order)
        .map(|w| {
            let acc: f64 = m.row(w).iter().zip(v).map(|(&a, &b)| a as f64 * b).sum();
            d.get(w) as f64 * acc * scale
        })
        .collect())
}

/// `M d^-1 p`, the exact inverse of [`forward`] up to the `2^-order` normalisation.
fn backward(order: usize, p: &[f64]) -> Result<Vec<f64>> {
    let m = KravchukMatrix::new(order)?;
    let d = BinomialDiagonal::new(order)?;
    Ok((0..=order)
        .map(|l| {
            m.row(l)
                .iter()
                .zip(p)
                .enumerate()
                .map(|(w, (&a, &b))| a as f64 * b / d.get(w) as f64)
                .sum()
        })
        .collect())
}

/// Degree eigenvalues recovered from a Born distribution; degrees not observable
/// by the circuit kind are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredEigenvalues {
    kind: CircuitKind,
    values: Vec<Option<f64>>,
}

impl MeasuredEigenvalues {
    pub fn kind(&self) -> CircuitKind {
        self.kind
    }

    pub fn modes(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, degree: usize) -> Option<f64> {
        self.values.get(degree).copied().flatten()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub(crate) fn set(&mut self, degree: usize, value: f64) {
        self.values[degree] = Some(value);
    }
}

/// Inverts [`circuit_eigs_to_born`] on the degrees the circuit kind observes.
pub fn born_to_circuit_eigs(born: &BornDistribution) -> Result<MeasuredEigenvalues> {
    let qubits = born.qubits();
    if qubits == 0 {
        return Err(FacesError::InvalidArgument("circuit needs at least one qubit".into()));
    }
    let modes = 2 * qubits;
    let mut values = vec![None; modes + 1];
    match born {
        BornDistribution::Z { weights } => {
            for (l, v) in backward(qubits, weights)?.into_iter().enumerate() {
                values[2 * l] = Some(v);
            }
        }
        BornDistribution::X { plus, minus } => {
            if minus.len() != plus.len() {
                return Err(FacesError::LengthMismatch {
                    expected: plus.len(),
                    found: minus.len(),
                });
            }
            let sum: Vec<f64> = plus.iter().zip(minus).map(|(a, b)| a + b).collect();
            let diff: Vec<f64> = plus.iter().zip(minus).map(|(a, b)| a - b).collect();
            for (l, v) in backward(qubits - 1, &sum)?.into_iter().enumerate() {
                values[2 * l] = Some(v);
            }
            for (l, v) in backward(qubits - 1, &diff)?.into_iter().enumerate() {
                values[2 * l + 1] = Some(v);
            }
        }
    }
    Ok(MeasuredEigenvalues {
        kind: born.kind(),
        values,
    })
}
