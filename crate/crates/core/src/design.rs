//! Gate registry, mirror circuits and the design matrix of gate counts.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{FacesError, Result};
use crate::fermion::{
    sequence_transform, u_plus_gates, GateId, GateInstance, SingleParticleTransform, ThetaBinning,
};
use crate::kravchuk::CircuitKind;
use crate::linalg::{matrix_rank, pinv_inf_norm};
use crate::noise::GateNoiseModel;

/// Allowed deviation of a circuit's net transform from its target.
pub const NET_TARGET_TOLERANCE: f64 = 1e-8;

/// The ordered list of gate parameters: every `Z` rotation bin on every qubit
/// (qubit-major), followed by the hops between neighbouring qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateRegistry {
    qubits: usize,
    binning: ThetaBinning,
    gates: Vec<GateId>,
    index: BTreeMap<GateId, usize>,
}

impl GateRegistry {
    pub fn new(qubits: usize, bins: usize) -> Result<Self> {
        if qubits == 0 || qubits > crate::fermion::MAX_QUBITS {
            return Err(FacesError::InvalidArgument(alloc::format!(
                "qubit count {qubits} outside 1..={}",
                crate::fermion::MAX_QUBITS
            )));
        }
        let binning = ThetaBinning::new(bins)?;
        let mut gates = Vec::with_capacity(qubits * bins + qubits - 1);
        for qubit in 1..=qubits {
            for bin in 1..=bins {
                gates.push(GateId::ZRot { qubit, bin });
            }
        }
        for qubit in 1..qubits {
            gates.push(GateId::FHop { qubit });
        }
        let index = gates.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        Ok(Self {
            qubits,
            binning,
            gates,
            index,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn modes(&self) -> usize {
        2 * self.qubits
    }

    pub fn binning(&self) -> &ThetaBinning {
        &self.binning
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[GateId] {
        &self.gates
    }

    pub fn column(&self, gate: &GateId) -> Option<usize> {
        self.index.get(gate).copied()
    }
}

/// A state-preparation, gate sequence and readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub id: usize,
    pub kind: CircuitKind,
    /// Gates in application order.
    pub gates: Vec<GateInstance>,
}

impl Circuit {
    pub fn transform(&self, qubits: usize) -> Result<SingleParticleTransform> {
        sequence_transform(&self.gates, qubits)
    }

    /// Largest entry-wise deviation of the net transform from the identity (`Z`)
    /// or from the `|+..+>` rotation (`X`).
    pub fn net_target_deviation(&self, registry: &GateRegistry) -> Result<f64> {
        let qubits = registry.qubits();
        for g in &self.gates {
            g.validate(qubits, registry.binning())?;
        }
        let net = self.transform(qubits)?;
        let target = match self.kind {
            CircuitKind::Z => SingleParticleTransform::identity(2 * qubits)?,
            CircuitKind::X => sequence_transform(&u_plus_gates(qubits, registry.binning())?, qubits)?,
        };
        Ok(net.max_abs_difference(&target))
    }

    pub fn verify_net_target(&self, registry: &GateRegistry) -> Result<()> {
        let deviation = self.net_target_deviation(registry)?;
        if deviation > NET_TARGET_TOLERANCE {
            return Err(FacesError::NetTargetViolation {
                circuit: self.id,
                deviation,
            });
        }
        Ok(())
    }
}

/// How a rotation `exp(i theta Z)` is undone in the second half of a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InverseStyle {
    /// A single rotation by `-theta`.
    Mirror,
    /// Two rotations by a random `phi` and `-theta - phi`, so that the inverse
    /// spreads over independent angle bins.
    #[default]
    SplitRotations,
}

/// Builds random circuits whose net action is the identity (`Z`) or the `|+..+>` rotation (`X`).
#[derive(Debug, Clone, Copy)]
pub struct CircuitBuilder<'a> {
    registry: &'a GateRegistry,
    style: InverseStyle,
}

impl<'a> CircuitBuilder<'a> {
    pub fn new(registry: &'a GateRegistry, style: InverseStyle) -> Self {
        Self { registry, style }
    }

    fn random_gate<R: Rng + ?Sized>(&self, rng: &mut R) -> GateInstance {
        let n = self.registry.qubits();
        let choice = rng.random_range(0..2 * n - 1);
        if choice < n {
            GateInstance::zrot(choice + 1, TAU * rng.random::<f64>(), self.registry.binning())
        } else {
            GateInstance::fhop(choice - n + 1)
        }
    }

    fn instance_of<R: Rng + ?Sized>(&self, gate: &GateId, rng: &mut R) -> GateInstance {
        match *gate {
            GateId::ZRot { qubit, bin } => {
                let theta = self.registry.binning().sample_in_bin(bin, rng);
                GateInstance::zrot(qubit, theta, self.registry.binning())
            }
            GateId::FHop { qubit } => GateInstance::fhop(qubit),
        }
    }

    /// Random word of `len` gates, with `forced` placed at a uniformly random position.
    pub fn random_word<R: Rng + ?Sized>(
        &self,
        len: usize,
        forced: Option<&GateId>,
        rng: &mut R,
    ) -> Vec<GateInstance> {
        let mut word: Vec<GateInstance> = (0..len).map(|_| self.random_gate(rng)).collect();
        if let Some(g) = forced {
            let pos = rng.random_range(0..len.max(1));
            let inst = self.instance_of(g, rng);
            if word.is_empty() {
                word.push(inst);
            } else {
                word[pos] = inst;
            }
        }
        word
    }

    /// `word` followed by its inverse.
    pub fn mirror<R: Rng + ?Sized>(&self, word: &[GateInstance], rng: &mut R) -> Vec<GateInstance> {
        let binning = self.registry.binning();
        let mut out = word.to_vec();
        for g in word.iter().rev() {
            match (g.id, g.theta) {
                (GateId::ZRot { qubit, .. }, Some(theta)) => match self.style {
                    InverseStyle::Mirror => out.push(GateInstance::zrot(qubit, -theta, binning)),
                    InverseStyle::SplitRotations => {
                        let phi = TAU * rng.random::<f64>();
                        out.push(GateInstance::zrot(qubit, phi, binning));
                        out.push(GateInstance::zrot(qubit, -theta - phi, binning));
                    }
                },
                _ => out.push(*g),
            }
        }
        out
    }

    pub fn z_circuit<R: Rng + ?Sized>(
        &self,
        id: usize,
        half_depth: usize,
        forced: Option<&GateId>,
        rng: &mut R,
    ) -> Circuit {
        let word = self.random_word(half_depth, forced, rng);
        Circuit {
            id,
            kind: CircuitKind::Z,
            gates: self.mirror(&word, rng),
        }
    }

    pub fn x_circuit<R: Rng + ?Sized>(
        &self,
        id: usize,
        half_depth: usize,
        forced: Option<&GateId>,
        rng: &mut R,
    ) -> Result<Circuit> {
        let word = self.random_word(half_depth, forced, rng);
        let mut gates = self.mirror(&word, rng);
        gates.extend(u_plus_gates(self.registry.qubits(), self.registry.binning())?);
        Ok(Circuit {
            id,
            kind: CircuitKind::X,
            gates,
        })
    }
}

/// Number of occurrences of each registry gate in each circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    counts: Vec<u32>,
    kinds: Vec<CircuitKind>,
}

impl DesignMatrix {
    /// Counts gates per circuit. Requires at least as many circuits as gate parameters
    /// and full column rank of the whole matrix.
    pub fn from_circuits(circuits: &[Circuit], registry: &GateRegistry) -> Result<Self> {
        let rows = circuits.len();
        let cols = registry.len();
        if rows < cols {
            return Err(FacesError::TooFewCircuits {
                circuits: rows,
                parameters: cols,
            });
        }
        let mut counts = alloc::vec![0u32; rows * cols];
        for (j, c) in circuits.iter().enumerate() {
            for g in &c.gates {
                let col = registry.column(&g.id).ok_or(FacesError::UnknownGate(g.id))?;
                counts[j * cols + col] += 1;
            }
        }
        let design = Self {
            rows,
            cols,
            counts,
            kinds: circuits.iter().map(|c| c.kind).collect(),
        };
        let all: Vec<usize> = (0..rows).collect();
        if matrix_rank(&design.submatrix(&all)) < cols {
            return Err(FacesError::NotIdentifiable {
                degrees: (1..=registry.modes()).collect(),
            });
        }
        Ok(design)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn count(&self, row: usize, col: usize) -> u32 {
        self.counts[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.counts[row * self.cols..(row + 1) * self.cols]
    }

    pub fn kind(&self, row: usize) -> CircuitKind {
        self.kinds[row]
    }

    pub fn kinds(&self) -> &[CircuitKind] {
        &self.kinds
    }

    /// Selected rows as a dense floating-point matrix.
    pub fn submatrix(&self, rows: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), self.cols, |i, j| self.count(rows[i], j) as f64)
    }

    /// Rows of circuits that observe degree `k` out of `modes`.
    pub fn rows_for_degree(&self, degree: usize, modes: usize) -> Result<Vec<usize>> {
        if degree == 0 || degree > modes {
            return Err(FacesError::InvalidDegree { degree, max: modes });
        }
        Ok((0..self.rows)
            .filter(|&j| self.kinds[j].observes_degree(degree, modes))
            .collect())
    }

    /// Degrees whose row subset does not have full column rank.
    pub fn deficient_degrees(&self, modes: usize) -> Result<Vec<usize>> {
        let mut by_rows: BTreeMap<Vec<usize>, bool> = BTreeMap::new();
        let mut out = Vec::new();
        for degree in 1..=modes {
            let rows = self.rows_for_degree(degree, modes)?;
            let full = match by_rows.get(&rows) {
                Some(&f) => f,
                None => {
                    let f = rows.len() >= self.cols && matrix_rank(&self.submatrix(&rows)) == self.cols;
                    by_rows.insert(rows, f);
                    f
                }
            };
            if !full {
                out.push(degree);
            }
        }
        Ok(out)
    }

    pub fn check_identifiable(&self, modes: usize) -> Result<()> {
        let degrees = self.deficient_degrees(modes)?;
        if degrees.is_empty() {
            Ok(())
        } else {
            Err(FacesError::NotIdentifiable { degrees })
        }
    }
}

/// Free-function form of [`DesignMatrix::from_circuits`].
pub fn design_matrix(circuits: &[Circuit], registry: &GateRegistry) -> Result<DesignMatrix> {
    DesignMatrix::from_circuits(circuits, registry)
}

/// Free-function form of [`DesignMatrix::rows_for_degree`].
pub fn per_degree_rows(design: &DesignMatrix, degree: usize, modes: usize) -> Result<Vec<usize>> {
    design.rows_for_degree(degree, modes)
}

/// `||A_k^+||_inf` for the rows observing degree `k`.
pub fn degree_pinv_inf_norm(design: &DesignMatrix, degree: usize, modes: usize) -> Result<f64> {
    let rows = design.rows_for_degree(degree, modes)?;
    pinv_inf_norm(&design.submatrix(&rows))
}

/// Parameters for a random circuit ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub count_z: usize,
    pub count_x: usize,
    /// Inclusive range of the number of random gates before the inverse.
    pub depth_min: usize,
    pub depth_max: usize,
    pub max_retries: usize,
    pub style: InverseStyle,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            count_z: 1000,
            count_x: 1000,
            depth_min: 1,
            depth_max: 4,
            max_retries: 10,
            style: InverseStyle::SplitRotations,
        }
    }
}

/// Circuits with their design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub circuits: Vec<Circuit>,
    pub design: DesignMatrix,
}

/// Draws `count_z` identity circuits followed by `count_x` `|+..+>` circuits. Circuit `i`
/// of each kind contains registry gate `i mod K`. The draw is repeated, up to
/// `max_retries` times, until every degree sector is identifiable.
pub fn generate_ensemble<R: Rng + ?Sized>(
    registry: &GateRegistry,
    spec: &EnsembleSpec,
    rng: &mut R,
) -> Result<Ensemble> {
    if spec.depth_min == 0 || spec.depth_max < spec.depth_min {
        return Err(FacesError::InvalidArgument(alloc::format!(
            "depth range {}..={} must be non-empty and start at 1 or more",
            spec.depth_min,
            spec.depth_max
        )));
    }
    let builder = CircuitBuilder::new(registry, spec.style);
    let k = registry.len();
    let mut last_err = None;
    for _ in 0..=spec.max_retries {
        let mut circuits = Vec::with_capacity(spec.count_z + spec.count_x);
        for i in 0..spec.count_z {
            let depth = rng.random_range(spec.depth_min..=spec.depth_max);
            let forced = registry.gates()[i % k];
            circuits.push(builder.z_circuit(circuits.len(), depth, Some(&forced), rng));
        }
        for i in 0..spec.count_x {
            let depth = rng.random_range(spec.depth_min..=spec.depth_max);
            let forced = registry.gates()[i % k];
            circuits.push(builder.x_circuit(circuits.len(), depth, Some(&forced), rng)?);
        }
        let design = match DesignMatrix::from_circuits(&circuits, registry) {
            Ok(d) => d,
            Err(e @ FacesError::NotIdentifiable { .. }) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        match design.check_identifiable(registry.modes()) {
            Ok(()) => return Ok(Ensemble { circuits, design }),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(FacesError::NotIdentifiable { degrees: Vec::new() }))
}

/// A validated experiment: gate registry, noise, circuits and design matrix.
#[derive(Debug, Clone)]
pub struct FacesModel {
    registry: GateRegistry,
    noise: GateNoiseModel,
    circuits: Vec<Circuit>,
    design: DesignMatrix,
}

impl FacesModel {
    /// Validates that every registry gate has noise, every circuit reaches its net
    /// target, and every degree sector is identifiable.
    pub fn new(registry: GateRegistry, noise: GateNoiseModel, circuits: Vec<Circuit>) -> Result<Self> {
        if noise.qubits() != registry.qubits() {
            return Err(FacesError::DimensionMismatch {
                left: noise.qubits(),
                right: registry.qubits(),
            });
        }
        for g in registry.gates() {
            noise.eigenvalues(g)?;
        }
        for c in &circuits {
            c.verify_net_target(&registry)?;
        }
        let design = DesignMatrix::from_circuits(&circuits, &registry)?;
        design.check_identifiable(registry.modes())?;
        Ok(Self {
            registry,
            noise,
            circuits,
            design,
        })
    }

    pub fn registry(&self) -> &GateRegistry {
        &self.registry
    }

    pub fn noise(&self) -> &GateNoiseModel {
        &self.noise
    }

    pub fn circuits(&self) -> &[Circuit] {
        &self.circuits
    }

    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn qubits(&self) -> usize {
        self.registry.qubits()
    }

    pub fn modes(&self) -> usize {
        self.registry.modes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn registry_layout() {
        let r = GateRegistry::new(5, 46).unwrap();
        assert_eq!(r.len(), 234);
        assert_eq!(r.gates()[0], GateId::ZRot { qubit: 1, bin: 1 });
        assert_eq!(r.gates()[46], GateId::ZRot { qubit: 2, bin: 1 });
        assert_eq!(r.gates()[230], GateId::FHop { qubit: 1 });
        assert_eq!(r.column(&GateId::FHop { qubit: 4 }), Some(233));
        assert_eq!(GateRegistry::new(1, 3).unwrap().len(), 3);
    }

    #[test]
    fn built_circuits_hit_their_targets() {
        let registry = GateRegistry::new(4, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for style in [InverseStyle::Mirror, InverseStyle::SplitRotations] {
            let b = CircuitBuilder::new(&registry, style);
            for depth in 1..6 {
                b.z_circuit(0, depth, None, &mut rng).verify_net_target(&registry).unwrap();
                b.x_circuit(1, depth, None, &mut rng)
                    .unwrap()
                    .verify_net_target(&registry)
                    .unwrap();
            }
        }
    }

    #[test]
    fn tampered_circuit_misses_target() {
        let registry = GateRegistry::new(2, 4).unwrap();
        let c = Circuit {
            id: 7,
            kind: CircuitKind::Z,
            gates: alloc::vec![GateInstance::fhop(1)],
        };
        assert!(matches!(
            c.verify_net_target(&registry),
            Err(FacesError::NetTargetViolation { circuit: 7, .. })
        ));
    }

    #[test]
    fn forced_gate_appears() {
        let registry = GateRegistry::new(3, 8).unwrap();
        let b = CircuitBuilder::new(&registry, InverseStyle::SplitRotations);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = GateId::ZRot { qubit: 2, bin: 5 };
        let c = b.z_circuit(0, 3, Some(&g), &mut rng);
        assert!(c.gates.iter().any(|x| x.id == g));
    }

    #[test]
    fn single_gate_design() {
        let registry = GateRegistry::new(1, 1).unwrap();
        let g = GateInstance::zrot(1, 0.5, registry.binning());
        let circuits = alloc::vec![
            Circuit { id: 0, kind: CircuitKind::Z, gates: alloc::vec![g] },
            Circuit { id: 1, kind: CircuitKind::Z, gates: alloc::vec![g, g] },
        ];
        let d = design_matrix(&circuits, &registry).unwrap();
        assert_eq!(d.row(0), &[1]);
        assert_eq!(d.row(1), &[2]);
        assert_eq!(d.deficient_degrees(2).unwrap(), alloc::vec![1]);
        assert!(matches!(
            design_matrix(&circuits[..1], &GateRegistry::new(1, 2).unwrap()),
            Err(FacesError::TooFewCircuits { .. })
        ));
    }

    #[test]
    fn degree_row_sets() {
        let registry = GateRegistry::new(1, 1).unwrap();
        let g = GateInstance::zrot(1, 0.5, registry.binning());
        let circuits = alloc::vec![
            Circuit { id: 0, kind: CircuitKind::Z, gates: alloc::vec![g] },
            Circuit { id: 1, kind: CircuitKind::X, gates: alloc::vec![g, g] },
        ];
        let d = design_matrix(&circuits, &registry).unwrap();
        assert_eq!(d.rows_for_degree(1, 2).unwrap(), alloc::vec![1]);
        assert_eq!(d.rows_for_degree(2, 2).unwrap(), alloc::vec![0]);
        assert!(d.rows_for_degree(0, 2).is_err());
        assert!(d.check_identifiable(2).is_ok());
    }

    #[test]
    fn mirror_only_designs_are_rank_deficient() {
        let registry = GateRegistry::new(2, 4).unwrap();
        let spec = EnsembleSpec {
            count_z: 60,
            count_x: 60,
            max_retries: 0,
            style: InverseStyle::Mirror,
            ..EnsembleSpec::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            generate_ensemble(&registry, &spec, &mut rng),
            Err(FacesError::NotIdentifiable { .. })
        ));
        let spec = EnsembleSpec {
            style: InverseStyle::SplitRotations,
            ..spec
        };
        let e = generate_ensemble(&registry, &spec, &mut rng).unwrap();
        assert_eq!(e.circuits.len(), 120);
        assert!(e.design.deficient_degrees(4).unwrap().is_empty());
    }
}
