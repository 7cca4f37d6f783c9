//! Exact circuit eigenvalues, Born distributions and shot sampling.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::design::FacesModel;
use crate::error::{FacesError, Result};
use crate::kravchuk::{circuit_eigs_to_born, BornDistribution, CircuitKind};

/// Independent random streams derived from one master seed.
pub mod streams {
    pub const NOISE: u64 = 1;
    pub const ENSEMBLE: u64 = 2;
    pub const ORACLE: u64 = 3;
    /// Shots of circuit `j` use stream `SHOTS + j`.
    pub const SHOTS: u64 = 1 << 32;
}

/// ChaCha8 generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator used for the shots of circuit `circuit`, independent of evaluation order.
pub fn shot_rng(seed: u64, circuit: usize) -> ChaCha8Rng {
    stream_rng(seed, streams::SHOTS + circuit as u64)
}

fn int_pow(base: f64, exp: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// `Lambda_{j,k} = prod_g xi_{g,k}^{A_{jg}}` for circuit `j` and every degree `k`.
pub fn circuit_eigenvalues(model: &FacesModel, circuit: usize) -> Result<Vec<f64>> {
    let design = model.design();
    if circuit >= design.rows() {
        return Err(FacesError::InvalidArgument(alloc::format!(
            "circuit {circuit} out of range 0..{}",
            design.rows()
        )));
    }
    let mut lambda = alloc::vec![1.0; model.modes() + 1];
    for (col, &count) in design.row(circuit).iter().enumerate() {
        if count == 0 {
            continue;
        }
        let xi = model.noise().eigenvalues(&model.registry().gates()[col])?;
        for (k, l) in lambda.iter_mut().enumerate() {
            *l *= int_pow(xi.get(k), count);
        }
    }
    Ok(lambda)
}

/// Noisy Born distribution of circuit `j`.
pub fn exact_born(model: &FacesModel, circuit: usize) -> Result<BornDistribution> {
    let lambda = circuit_eigenvalues(model, circuit)?;
    circuit_eigs_to_born(&lambda, model.design().kind(circuit), model.qubits())
}

/// Readout counts of one circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub circuit: usize,
    pub kind: CircuitKind,
    pub qubits: usize,
    /// Counts per bin in the order of [`BornDistribution::bins`].
    pub counts: Vec<u64>,
}

impl ShotRecord {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Draws `shots` multinomial samples from `born` by sequential binomial splitting.
pub fn sample_shots<R: Rng + ?Sized>(
    born: &BornDistribution,
    circuit: usize,
    shots: u64,
    rng: &mut R,
) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(FacesError::InvalidArgument("shot count must be positive".into()));
    }
    let bins = born.bins();
    for (index, &value) in bins.iter().enumerate() {
        if !value.is_finite() || value < -1e-12 {
            return Err(FacesError::NegativeProbability { index, value });
        }
    }
    let mut remaining_shots = shots;
    let mut remaining_mass: f64 = bins.iter().map(|p| p.max(0.0)).sum();
    let mut counts = Vec::with_capacity(bins.len());
    for (i, &p) in bins.iter().enumerate() {
        let p = p.max(0.0);
        let c = if i + 1 == bins.len() {
            remaining_shots
        } else if remaining_shots == 0 || p <= 0.0 {
            0
        } else {
            let frac = (p / remaining_mass).clamp(0.0, 1.0);
            let dist = Binomial::new(remaining_shots, frac)
                .map_err(|e| FacesError::InvalidArgument(alloc::format!("{e}")))?;
            dist.sample(rng)
        };
        counts.push(c);
        remaining_shots -= c;
        remaining_mass -= p;
    }
    Ok(ShotRecord {
        circuit,
        kind: born.kind(),
        qubits: born.qubits(),
        counts,
    })
}

/// Empirical frequencies of a shot record.
pub fn empirical_born(record: &ShotRecord) -> Result<BornDistribution> {
    let total = record.shots();
    if total == 0 {
        return Err(FacesError::InvalidArgument("record has no shots".into()));
    }
    let freqs: Vec<f64> = record.counts.iter().map(|&c| c as f64 / total as f64).collect();
    BornDistribution::from_bins(record.kind, record.qubits, &freqs)
}

/// Samples every circuit of `model` with its own shot stream.
pub fn simulate_shots(model: &FacesModel, shots: u64, seed: u64) -> Result<Vec<ShotRecord>> {
    (0..model.design().rows())
        .map(|j| sample_shots(&exact_born(model, j)?, j, shots, &mut shot_rng(seed, j)))
        .collect()
}
