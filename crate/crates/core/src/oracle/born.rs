use alloc::vec::Vec;

use rand::Rng;

use super::dense::{check_qubits, dense_gate, dense_sequence, qubit_bit, CMatrix, DenseState, MAX_STATE_QUBITS};
use super::twirl::{matrix_from_pauli_vector, mc_flo_twirl_batches, ptm_of_unitary, DenseSuperop, MAX_SUPEROP_QUBITS};
use crate::design::Circuit;
use crate::error::{FacesError, Result};
use crate::fermion::GateId;
use crate::kravchuk::{BornDistribution, CircuitKind};
use crate::noise::GateNoiseModel;

/// Hamming-weight readout of a dense state.
pub fn born_from_matrix(rho: &CMatrix, kind: CircuitKind) -> Result<BornDistribution> {
    let dim = rho.nrows();
    let n = dim.trailing_zeros() as usize;
    match kind {
        CircuitKind::Z => {
            let mut weights = alloc::vec![0.0; n + 1];
            for k in 0..dim {
                weights[k.count_ones() as usize] += rho[(k, k)].re;
            }
            Ok(BornDistribution::Z { weights })
        }
        CircuitKind::X => {
            let top = qubit_bit(n, 1);
            let mut plus = alloc::vec![0.0; n];
            let mut minus = alloc::vec![0.0; n];
            for r in 0..top {
                let w = r.count_ones() as usize;
                let (r0, r1) = (r, r | top);
                let diag = rho[(r0, r0)].re + rho[(r1, r1)].re;
                // <+-y| rho |+-y> with |+-y> = (|0> +- i|1>)/sqrt2 on the first qubit.
                let coherence = (rho[(r0, r1)] - rho[(r1, r0)]) * nalgebra::Complex::new(0.0, 1.0);
                plus[w] += 0.5 * (diag + coherence.re);
                minus[w] += 0.5 * (diag - coherence.re);
            }
            Ok(BornDistribution::X { plus, minus })
        }
    }
}

pub fn born_from_state(state: &DenseState, kind: CircuitKind) -> Result<BornDistribution> {
    born_from_matrix(state.matrix(), kind)
}

fn initial_state(kind: CircuitKind, qubits: usize) -> Result<DenseState> {
    match kind {
        CircuitKind::Z => DenseState::zero(qubits),
        CircuitKind::X => DenseState::plus(qubits),
    }
}

/// Born distribution of the noiseless circuit by dense state evolution.
pub fn noiseless_born(circuit: &Circuit, qubits: usize) -> Result<BornDistribution> {
    check_qubits(qubits, MAX_STATE_QUBITS)?;
    let u = dense_sequence(&circuit.gates, qubits)?;
    let state = initial_state(circuit.kind, qubits)?.apply_unitary(&u);
    born_from_state(&state, circuit.kind)
}

/// Monte-Carlo twirled noise for every gate occurrence of a circuit, in independent batches.
#[derive(Debug, Clone)]
pub struct TwirledNoise {
    qubits: usize,
    batches: usize,
    layers: Vec<(GateId, Vec<DenseSuperop>)>,
}

impl TwirledNoise {
    /// Twirls the Pauli channel after each gate of `circuit` independently, with `batches`
    /// batches of `samples` unitaries per occurrence.
    pub fn for_circuit<R: Rng + ?Sized>(
        noise: &GateNoiseModel,
        circuit: &Circuit,
        samples: usize,
        batches: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let qubits = noise.qubits();
        check_qubits(qubits, MAX_SUPEROP_QUBITS)?;
        let batches = batches.max(1);
        let mut layers = Vec::with_capacity(circuit.gates.len());
        for g in &circuit.gates {
            let channel = noise.pauli_channel(&g.id).ok_or_else(|| {
                FacesError::InvalidNoiseParameters(alloc::format!("{} has no Pauli channel", g.id))
            })?;
            let superop = DenseSuperop::from_pauli_channel(channel)?;
            layers.push((g.id, mc_flo_twirl_batches(&superop, samples, batches, rng)?));
        }
        Ok(Self {
            qubits,
            batches,
            layers,
        })
    }

    pub fn batches(&self) -> usize {
        self.batches
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }
}

/// Oracle Born distribution with a per-bin Monte-Carlo standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleBorn {
    pub born: BornDistribution,
    /// Standard error of each bin (order of [`BornDistribution::bins`]) from the batch spread.
    pub standard_error: Vec<f64>,
}

/// Runs `circuit` on the ideal input state, applying before each gate its twirled noise,
/// once per batch; returns the batch mean and its standard error.
pub fn oracle_born_with(circuit: &Circuit, twirled: &TwirledNoise) -> Result<OracleBorn> {
    let qubits = twirled.qubits;
    let gate_ptms: Vec<DenseSuperop> = circuit
        .gates
        .iter()
        .map(|g| DenseSuperop::from_transfer(qubits, ptm_of_unitary(&dense_gate(g, qubits)?)?))
        .collect::<Result<_>>()?;
    if twirled.layers.len() != circuit.gates.len()
        || twirled.layers.iter().zip(&circuit.gates).any(|((id, _), g)| *id != g.id)
    {
        return Err(FacesError::InvalidArgument("twirled noise was built for another circuit".into()));
    }
    let start = super::twirl::pauli_vector(&initial_state(circuit.kind, qubits)?)?;
    let mut per_batch: Vec<Vec<f64>> = Vec::with_capacity(twirled.batches);
    for batch in 0..twirled.batches {
        let mut c = start.clone();
        for ((_, noise), ptm) in twirled.layers.iter().zip(&gate_ptms) {
            c = noise[batch].apply_vector(&c);
            c = ptm.apply_vector(&c);
        }
        let rho = matrix_from_pauli_vector(qubits, &c)?;
        per_batch.push(born_from_matrix(&rho, circuit.kind)?.bins());
    }
    let b = per_batch.len() as f64;
    let bins = per_batch[0].len();
    let mean: Vec<f64> = (0..bins)
        .map(|i| per_batch.iter().map(|v| v[i]).sum::<f64>() / b)
        .collect();
    let standard_error = (0..bins)
        .map(|i| {
            if per_batch.len() < 2 {
                return 0.0;
            }
            let var = per_batch
                .iter()
                .map(|v| (v[i] - mean[i]) * (v[i] - mean[i]))
                .sum::<f64>()
                / (b - 1.0);
            libm::sqrt(var / b)
        })
        .collect();
    Ok(OracleBorn {
        born: BornDistribution::from_bins(circuit.kind, qubits, &mean)?,
        standard_error,
    })
}

/// Oracle Born distribution of `circuit` with every gate occurrence's noise twirled over `samples` unitaries.
pub fn oracle_born<R: Rng + ?Sized>(
    circuit: &Circuit,
    noise: &GateNoiseModel,
    samples: usize,
    rng: &mut R,
) -> Result<BornDistribution> {
    let twirled = TwirledNoise::for_circuit(noise, circuit, samples, 1, rng)?;
    Ok(oracle_born_with(circuit, &twirled)?.born)
}
