use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, TAU};
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use super::transform::SingleParticleTransform;
use crate::error::{FacesError, Result};

/// Uniform partition of `[0, 2pi)` into `bins` half-open intervals, numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaBinning {
    bins: usize,
}

/// Reduces an angle into `[0, 2pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut r = theta % TAU;
    if r < 0.0 {
        r += TAU;
    }
    if r >= TAU {
        r = 0.0;
    }
    r
}

impl ThetaBinning {
    pub fn new(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(FacesError::InvalidArgument("bin count must be positive".into()));
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Bin index in `1..=bins` containing `theta` (taken modulo `2pi`).
    pub fn bin_of(&self, theta: f64) -> usize {
        let t = normalize_angle(theta);
        let k = libm::floor(t * self.bins as f64 / TAU) as usize + 1;
        k.min(self.bins)
    }

    /// Half-open interval `[lo, hi)` of bin `k`.
    pub fn bounds(&self, k: usize) -> (f64, f64) {
        let w = TAU / self.bins as f64;
        ((k - 1) as f64 * w, k as f64 * w)
    }

    /// Uniform angle inside bin `k`.
    pub fn sample_in_bin<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> f64 {
        let (lo, hi) = self.bounds(k);
        let theta = lo + (hi - lo) * rng.random::<f64>();
        if self.bin_of(theta) == k {
            theta
        } else {
            lo
        }
    }
}

/// Identifier of a gate's noise parameters: a binned `Z` rotation or a fermionic hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateId {
    ZRot { qubit: usize, bin: usize },
    FHop { qubit: usize },
}

impl GateId {
    /// Qubits on which the gate acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        match *self {
            GateId::ZRot { qubit, .. } => alloc::vec![qubit],
            GateId::FHop { qubit } => alloc::vec![qubit, qubit + 1],
        }
    }

    pub fn validate(&self, qubits: usize, bins: usize) -> Result<()> {
        let ok = match *self {
            GateId::ZRot { qubit, bin } => (1..=qubits).contains(&qubit) && (1..=bins).contains(&bin),
            GateId::FHop { qubit } => qubit >= 1 && qubit < qubits,
        };
        if ok {
            Ok(())
        } else {
            Err(FacesError::InvalidGate(alloc::format!(
                "{self} is not valid on {qubits} qubits with {bins} bins"
            )))
        }
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateId::ZRot { qubit, bin } => write!(f, "Z{qubit}:{bin}"),
            GateId::FHop { qubit } => write!(f, "G{qubit}"),
        }
    }
}

impl FromStr for GateId {
    type Err = FacesError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || FacesError::InvalidGate(s.to_string());
        if let Some(rest) = s.strip_prefix('Z') {
            let (q, b) = rest.split_once(':').ok_or_else(bad)?;
            Ok(GateId::ZRot {
                qubit: q.parse().map_err(|_| bad())?,
                bin: b.parse().map_err(|_| bad())?,
            })
        } else if let Some(rest) = s.strip_prefix('G') {
            Ok(GateId::FHop {
                qubit: rest.parse().map_err(|_| bad())?,
            })
        } else {
            Err(bad())
        }
    }
}

/// A gate occurrence in a circuit. `theta` is the exact rotation angle for `Z` rotations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateInstance {
    pub id: GateId,
    pub theta: Option<f64>,
}

impl GateInstance {
    /// `exp(i theta Z_qubit)`, labelled with the bin containing `theta`.
    pub fn zrot(qubit: usize, theta: f64, binning: &ThetaBinning) -> Self {
        let theta = normalize_angle(theta);
        Self {
            id: GateId::ZRot {
                qubit,
                bin: binning.bin_of(theta),
            },
            theta: Some(theta),
        }
    }

    /// The fermionic swap-like hop `G(H, H)` on qubits `qubit, qubit + 1`.
    pub fn fhop(qubit: usize) -> Self {
        Self {
            id: GateId::FHop { qubit },
            theta: None,
        }
    }

    /// Checks that the angle is present exactly for rotations and lies in the labelled bin.
    pub fn validate(&self, qubits: usize, binning: &ThetaBinning) -> Result<()> {
        self.id.validate(qubits, binning.bins())?;
        match (self.id, self.theta) {
            (GateId::ZRot { bin, .. }, Some(theta)) if binning.bin_of(theta) == bin => Ok(()),
            (GateId::FHop { .. }, None) => Ok(()),
            _ => Err(FacesError::InvalidGate(alloc::format!(
                "{} has inconsistent angle {:?}",
                self.id,
                self.theta
            ))),
        }
    }
}

/// Single-particle transform of a noiseless gate on `qubits` qubits.
pub fn gate_transition_matrix(gate: &GateInstance, qubits: usize) -> Result<SingleParticleTransform> {
    let modes = 2 * qubits;
    match (gate.id, gate.theta) {
        (GateId::ZRot { qubit, .. }, Some(theta)) if (1..=qubits).contains(&qubit) => {
            SingleParticleTransform::adjacent_rotation(modes, 2 * qubit - 1, 2.0 * theta)
        }
        (GateId::FHop { qubit }, None) if qubit >= 1 && qubit < qubits => {
            let mut r = nalgebra::DMatrix::identity(modes, modes);
            let o = 2 * qubit - 2;
            let local = [
                [0.0, 0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0, 0.0],
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ];
            for (i, row) in local.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    r[(o + i, o + j)] = v;
                }
            }
            SingleParticleTransform::new(r)
        }
        _ => Err(FacesError::InvalidGate(alloc::format!(
            "{} cannot act on {qubits} qubits (angle {:?})",
            gate.id,
            gate.theta
        ))),
    }
}

/// Gates preparing `(|0> + i|1>)/sqrt2 (x) |0...0>` from `|+...+>`, in application order.
pub fn u_plus_gates(qubits: usize, binning: &ThetaBinning) -> Result<Vec<GateInstance>> {
    if qubits == 0 {
        return Err(FacesError::InvalidArgument("need at least one qubit".into()));
    }
    let plus = FRAC_PI_4;
    let minus = TAU - FRAC_PI_4;
    let mut written = Vec::with_capacity(5 * qubits - 4);
    written.push(GateInstance::zrot(1, minus, binning));
    for j in 1..qubits {
        written.push(GateInstance::zrot(j + 1, minus, binning));
        written.push(GateInstance::fhop(j));
        written.push(GateInstance::zrot(j, plus, binning));
        written.push(GateInstance::fhop(j));
        written.push(GateInstance::zrot(j + 1, plus, binning));
    }
    written.reverse();
    Ok(written)
}

/// Net transform of a gate sequence in application order.
pub fn sequence_transform(gates: &[GateInstance], qubits: usize) -> Result<SingleParticleTransform> {
    let mut acc = SingleParticleTransform::identity(2 * qubits)?;
    for g in gates {
        acc = acc.compose(&gate_transition_matrix(g, qubits)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning_edges() {
        let b = ThetaBinning::new(4).unwrap();
        assert_eq!(b.bin_of(0.0), 1);
        assert_eq!(b.bin_of(TAU / 4.0), 2);
        assert_eq!(b.bin_of(TAU - 1e-12), 4);
        assert_eq!(b.bin_of(TAU), 1);
        assert_eq!(b.bin_of(-0.1), 4);
        assert_eq!(ThetaBinning::new(46).unwrap().bin_of(FRAC_PI_4), 6);
    }

    #[test]
    fn gate_ids_round_trip() {
        for id in [GateId::ZRot { qubit: 3, bin: 17 }, GateId::FHop { qubit: 2 }] {
            assert_eq!(id.to_string().parse::<GateId>().unwrap(), id);
        }
        assert!("Q1".parse::<GateId>().is_err());
        assert!("Z1".parse::<GateId>().is_err());
    }

    #[test]
    fn rotation_block() {
        let b = ThetaBinning::new(8).unwrap();
        let r = gate_transition_matrix(&GateInstance::zrot(2, 0.3, &b), 2).unwrap();
        let m = r.matrix();
        assert!((m[(2, 2)] - libm::cos(0.6)).abs() < 1e-15);
        assert!((m[(2, 3)] + libm::sin(0.6)).abs() < 1e-15);
        assert!((m[(3, 2)] - libm::sin(0.6)).abs() < 1e-15);
        assert_eq!(m[(0, 0)], 1.0);
    }

    #[test]
    fn hop_is_a_proper_involution() {
        let r = gate_transition_matrix(&GateInstance::fhop(1), 3).unwrap();
        assert!((r.determinant() - 1.0).abs() < 1e-14);
        let sq = r.compose(&r).unwrap();
        assert!(sq.max_abs_difference(&SingleParticleTransform::identity(6).unwrap()) < 1e-15);
        assert!(gate_transition_matrix(&GateInstance::fhop(3), 3).is_err());
    }

    #[test]
    fn u_plus_lengths_and_single_qubit_case() {
        let b = ThetaBinning::new(46).unwrap();
        assert_eq!(u_plus_gates(5, &b).unwrap().len(), 21);
        let one = u_plus_gates(1, &b).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].theta.unwrap() - 7.0 * FRAC_PI_4).abs() < 1e-15);
        let two = u_plus_gates(2, &b).unwrap();
        let ids: Vec<_> = two.iter().map(|g| g.id.to_string()).collect();
        assert_eq!(ids[1], "G1");
        assert_eq!(ids[3], "G1");
        assert_eq!(two[0].id, GateId::ZRot { qubit: 2, bin: 6 });
    }
}
