//! Pauli noise channels, their FLO twirl, and per-gate noise models.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{FacesError, Result};
use crate::fermion::{degree_of_pauli, GateId, PauliLabel};
use crate::kravchuk::{probs_to_eigs, EigenvalueVector, FermionicDistribution, NORMALIZATION_TOLERANCE};

/// A Pauli channel `rho -> sum_x p_x sigma_x rho sigma_x`, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliChannel {
    qubits: usize,
    probs: BTreeMap<PauliLabel, f64>,
}

impl PauliChannel {
    /// Builds a channel from explicit probabilities; missing labels have probability zero.
    pub fn new(qubits: usize, entries: impl IntoIterator<Item = (PauliLabel, f64)>) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (label, p) in entries {
            if label.qubits() != qubits {
                return Err(FacesError::DimensionMismatch {
                    left: label.qubits(),
                    right: qubits,
                });
            }
            if !p.is_finite() || p < 0.0 {
                return Err(FacesError::NegativeProbability {
                    index: label.index(),
                    value: p,
                });
            }
            if p > 0.0 {
                *probs.entry(label).or_insert(0.0) += p;
            }
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(FacesError::NotNormalized { total });
        }
        Ok(Self { qubits, probs })
    }

    pub fn identity(qubits: usize) -> Result<Self> {
        Self::new(qubits, [(PauliLabel::identity(qubits)?, 1.0)])
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn probability(&self, label: &PauliLabel) -> f64 {
        self.probs.get(label).copied().unwrap_or(0.0)
    }

    /// Non-zero entries in label order.
    pub fn iter(&self) -> impl Iterator<Item = (&PauliLabel, &f64)> {
        self.probs.iter()
    }
}

/// Degree distribution of the FLO twirl of a Pauli channel: `q_k` is the total
/// probability of Paulis whose Majorana monomial has degree `k`.
pub fn flo_twirl_pauli(channel: &PauliChannel) -> Result<FermionicDistribution> {
    let modes = 2 * channel.qubits();
    let mut q = alloc::vec![0.0; modes + 1];
    for (label, &p) in channel.iter() {
        q[degree_of_pauli(label)?] += p;
    }
    let total: f64 = q.iter().sum();
    for v in q.iter_mut() {
        *v /= total;
    }
    FermionicDistribution::new(q)
}

/// Eigenvalues of a twirled channel from its degree distribution.
pub fn channel_eigs(q: &FermionicDistribution) -> Result<EigenvalueVector> {
    probs_to_eigs(q)
}

/// Eigenvalues of two twirled channels applied in sequence.
pub fn compose_twirled(first: &EigenvalueVector, second: &EigenvalueVector) -> Result<EigenvalueVector> {
    if first.modes() != second.modes() {
        return Err(FacesError::DimensionMismatch {
            left: first.modes(),
            right: second.modes(),
        });
    }
    EigenvalueVector::new(
        first
            .as_slice()
            .iter()
            .zip(second.as_slice())
            .map(|(a, b)| a * b)
            .collect(),
    )
}

/// Range of the random non-identity Pauli probabilities: each is uniform on
/// `[center - halfwidth, center + halfwidth]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub center: f64,
    pub halfwidth: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            center: 1e-2,
            halfwidth: 1e-3,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self, terms: usize) -> Result<()> {
        let lo = self.center - self.halfwidth;
        let hi = self.center + self.halfwidth;
        if !(lo >= 0.0 && self.halfwidth >= 0.0 && terms as f64 * hi <= 1.0) {
            return Err(FacesError::InvalidNoiseParameters(alloc::format!(
                "range [{lo}, {hi}] with {terms} terms does not leave a valid identity weight"
            )));
        }
        Ok(())
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.center - self.halfwidth + 2.0 * self.halfwidth * rng.random::<f64>()
    }
}

const SINGLE_QUBIT: [(bool, bool); 4] = [(false, false), (true, false), (true, true), (false, true)];

/// Random Pauli channel on the qubit pair `(a, b)` of an `qubits`-qubit register.
///
/// The fifteen non-identity two-qubit Paulis `P_a (x) P_b`, enumerated with `P_a` outer
/// over `I, X, Y, Z`, receive independent draws from `spec`; the identity takes the rest.
/// With a single qubit the three single-qubit Paulis are used instead.
pub fn random_two_qubit_pauli_noise<R: Rng + ?Sized>(
    qubits: usize,
    pair: (usize, usize),
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<PauliChannel> {
    let identity = PauliLabel::identity(qubits)?;
    let mut entries = Vec::with_capacity(16);
    if qubits == 1 {
        spec.validate(3)?;
        for &(x, z) in &SINGLE_QUBIT[1..] {
            entries.push((PauliLabel::new(1, x as u64, z as u64)?, spec.draw(rng)));
        }
    } else {
        let (a, b) = pair;
        if a == 0 || b == 0 || a > qubits || b > qubits || a == b {
            return Err(FacesError::InvalidArgument(alloc::format!(
                "qubit pair ({a}, {b}) invalid on {qubits} qubits"
            )));
        }
        spec.validate(15)?;
        let (ba, bb) = (1u64 << (a - 1), 1u64 << (b - 1));
        for (i, &(xa, za)) in SINGLE_QUBIT.iter().enumerate() {
            for (j, &(xb, zb)) in SINGLE_QUBIT.iter().enumerate() {
                if i == 0 && j == 0 {
                    continue;
                }
                let x = if xa { ba } else { 0 } | if xb { bb } else { 0 };
                let z = if za { ba } else { 0 } | if zb { bb } else { 0 };
                entries.push((PauliLabel::new(qubits, x, z)?, spec.draw(rng)));
            }
        }
    }
    let rest: f64 = 1.0 - entries.iter().map(|(_, p)| p).sum::<f64>();
    entries.push((identity, rest.max(0.0)));
    PauliChannel::new(qubits, entries)
}

/// Qubit pair on which the noise of `gate` acts.
pub fn noise_pair(gate: &GateId, qubits: usize) -> (usize, usize) {
    match *gate {
        GateId::ZRot { qubit, .. } if qubit < qubits => (qubit, qubit + 1),
        GateId::ZRot { .. } => (qubits.saturating_sub(1).max(1), qubits),
        GateId::FHop { qubit } => (qubit, qubit + 1),
    }
}

/// Noise attached to one gate: twirled eigenvalues, optionally with the generating Pauli channel.
#[derive(Debug, Clone, PartialEq)]
pub struct GateNoise {
    pub xi: EigenvalueVector,
    pub pauli: Option<PauliChannel>,
}

/// An eigenvalue outside the weak-noise window `[1 - c, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvalueWarning {
    pub gate: GateId,
    pub degree: usize,
    pub value: f64,
}

/// Per-gate noise for a register of `qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateNoiseModel {
    qubits: usize,
    gates: BTreeMap<GateId, GateNoise>,
}

impl GateNoiseModel {
    pub fn new(qubits: usize) -> Self {
        Self {
            qubits,
            gates: BTreeMap::new(),
        }
    }

    /// Every gate noiseless.
    pub fn noiseless<'a>(qubits: usize, gates: impl IntoIterator<Item = &'a GateId>) -> Result<Self> {
        let mut model = Self::new(qubits);
        for g in gates {
            model.insert_eigenvalues(*g, EigenvalueVector::identity(2 * qubits)?)?;
        }
        Ok(model)
    }

    /// Independent random Pauli noise for each gate, drawn in iteration order.
    pub fn random<'a, R: Rng + ?Sized>(
        qubits: usize,
        gates: impl IntoIterator<Item = &'a GateId>,
        spec: &NoiseSpec,
        rng: &mut R,
    ) -> Result<Self> {
        let mut model = Self::new(qubits);
        for g in gates {
            let channel = random_two_qubit_pauli_noise(qubits, noise_pair(g, qubits), spec, rng)?;
            model.insert_pauli(*g, channel)?;
        }
        Ok(model)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn insert_pauli(&mut self, gate: GateId, channel: PauliChannel) -> Result<()> {
        self.insert(gate, Some(channel), None)
    }

    pub fn insert_eigenvalues(&mut self, gate: GateId, xi: EigenvalueVector) -> Result<()> {
        self.insert(gate, None, Some(xi))
    }

    /// Inserts a gate's noise. When both a Pauli channel and eigenvalues are given
    /// they must agree to `1e-12`.
    pub fn insert(
        &mut self,
        gate: GateId,
        pauli: Option<PauliChannel>,
        xi: Option<EigenvalueVector>,
    ) -> Result<()> {
        let derived = match &pauli {
            Some(ch) => {
                if ch.qubits() != self.qubits {
                    return Err(FacesError::DimensionMismatch {
                        left: ch.qubits(),
                        right: self.qubits,
                    });
                }
                Some(channel_eigs(&flo_twirl_pauli(ch)?)?)
            }
            None => None,
        };
        let xi = match (derived, xi) {
            (Some(d), Some(given)) => {
                let deviation = d
                    .as_slice()
                    .iter()
                    .zip(given.as_slice())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if d.modes() != given.modes() || deviation > 1e-12 {
                    return Err(FacesError::InconsistentNoise { gate, deviation });
                }
                given
            }
            (Some(d), None) => d,
            (None, Some(given)) => given,
            (None, None) => {
                return Err(FacesError::InvalidNoiseParameters(alloc::format!(
                    "no noise given for {gate}"
                )))
            }
        };
        if xi.modes() != 2 * self.qubits {
            return Err(FacesError::DimensionMismatch {
                left: xi.modes(),
                right: 2 * self.qubits,
            });
        }
        self.gates.insert(gate, GateNoise { xi, pauli });
        Ok(())
    }

    pub fn get(&self, gate: &GateId) -> Option<&GateNoise> {
        self.gates.get(gate)
    }

    pub fn eigenvalues(&self, gate: &GateId) -> Result<&EigenvalueVector> {
        self.gates
            .get(gate)
            .map(|n| &n.xi)
            .ok_or(FacesError::UnknownGate(*gate))
    }

    pub fn pauli_channel(&self, gate: &GateId) -> Option<&PauliChannel> {
        self.gates.get(gate).and_then(|n| n.pauli.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GateId, &GateNoise)> {
        self.gates.iter()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Eigenvalues of degree `k >= 1` outside `[1 - c, 1]`.
    pub fn eigenvalue_warnings(&self, c: f64) -> Vec<EigenvalueWarning> {
        let mut out = Vec::new();
        for (gate, noise) in &self.gates {
            for (degree, &value) in noise.xi.as_slice().iter().enumerate().skip(1) {
                if value < 1.0 - c || value > 1.0 + NORMALIZATION_TOLERANCE {
                    out.push(EigenvalueWarning {
                        gate: *gate,
                        degree,
                        value,
                    });
                }
            }
        }
        out
    }
}

/// Twirled eigenvalues of `gate` under `model`.
pub fn noisy_gate_eigs<'a>(gate: &GateId, model: &'a GateNoiseModel) -> Result<&'a EigenvalueVector> {
    model.eigenvalues(gate)
}
