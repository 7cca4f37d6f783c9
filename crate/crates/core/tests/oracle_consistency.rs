use faces_core::design::{generate_ensemble, CircuitBuilder, EnsembleSpec, GateRegistry, InverseStyle};
use faces_core::fermion::{
    all_pauli_labels, compound_action, degree_of_pauli, gate_transition_matrix, givens_decompose, haar_orthogonal,
    sequence_transform, u_plus_gates, GateInstance, MajoranaMonomial, ThetaBinning,
};
use faces_core::kravchuk::{BornDistribution, CircuitKind};
use faces_core::oracle::{
    conjugate, dense_degree_table, dense_gate, dense_flo_unitary, dense_majorana, dense_monomial, dense_sequence, hs_inner,
    noiseless_born, CMatrix, DenseState, C64,
};
use faces_core::simulate::stream_rng;
use rand::Rng;

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_gate<R: Rng>(qubits: usize, binning: &ThetaBinning, rng: &mut R) -> GateInstance {
    if qubits > 1 && rng.random_bool(0.3) {
        GateInstance::fhop(rng.random_range(1..qubits))
    } else {
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        GateInstance::zrot(rng.random_range(1..=qubits), theta, binning)
    }
}

#[test]
fn gate_conjugation_matches_transition_matrix() {
    let binning = ThetaBinning::new(8).unwrap();
    let mut rng = stream_rng(11, 0);
    for qubits in 1..=3 {
        let modes = 2 * qubits;
        let gammas: Vec<CMatrix> = (1..=modes).map(|m| dense_majorana(qubits, m).unwrap()).collect();
        for _ in 0..20 {
            let gate = random_gate(qubits, &binning, &mut rng);
            let u = dense_sequence(std::slice::from_ref(&gate), qubits).unwrap();
            let r = gate_transition_matrix(&gate, qubits).unwrap();
            for mu in 0..modes {
                let lhs = conjugate(&u, &gammas[mu]);
                let mut rhs = CMatrix::zeros(lhs.nrows(), lhs.ncols());
                for nu in 0..modes {
                    rhs += &gammas[nu] * C64::new(r.matrix()[(mu, nu)], 0.0);
                }
                assert!(max_diff(&lhs, &rhs) < 1e-12, "{} mode {}", gate.id, mu + 1);
            }
        }
    }
}

#[test]
fn sequence_conjugation_matches_compound_action() {
    let binning = ThetaBinning::new(16).unwrap();
    let mut rng = stream_rng(12, 0);
    let qubits = 3;
    let modes = 2 * qubits;
    let gates: Vec<GateInstance> = (0..12).map(|_| random_gate(qubits, &binning, &mut rng)).collect();
    let u = dense_sequence(&gates, qubits).unwrap();
    let r = sequence_transform(&gates, qubits).unwrap();
    for support in [0b11u64, 0b101, 0b1_0110, 0b11_1100, 0b11_1111, 0b1_0011] {
        let alpha = MajoranaMonomial::new(modes, support).unwrap();
        let lhs = conjugate(&u, &dense_monomial(&alpha).unwrap());
        let mut rhs = CMatrix::zeros(lhs.nrows(), lhs.ncols());
        for (beta, coeff) in compound_action(&r, &alpha).unwrap() {
            rhs += dense_monomial(&beta).unwrap() * C64::new(coeff, 0.0);
        }
        assert!(max_diff(&lhs, &rhs) < 1e-11, "{alpha}");
    }
}

#[test]
fn givens_unitary_realises_haar_transform() {
    let mut rng = stream_rng(13, 0);
    for qubits in 1..=3 {
        let modes = 2 * qubits;
        for _ in 0..5 {
            let r = haar_orthogonal(modes, &mut rng).unwrap();
            let u = dense_flo_unitary(&givens_decompose(&r).unwrap()).unwrap();
            for mu in 1..=modes {
                let lhs = conjugate(&u, &dense_majorana(qubits, mu).unwrap());
                let mut rhs = CMatrix::zeros(lhs.nrows(), lhs.ncols());
                for nu in 1..=modes {
                    rhs += dense_majorana(qubits, nu).unwrap() * C64::new(r.matrix()[(mu - 1, nu - 1)], 0.0);
                }
                assert!(max_diff(&lhs, &rhs) < 1e-10);
            }
        }
    }
}

#[test]
fn u_plus_prepares_y_eigenstate() {
    let binning = ThetaBinning::new(8).unwrap();
    for qubits in 1..=4 {
        let gates = u_plus_gates(qubits, &binning).unwrap();
        assert_eq!(gates.len(), 5 * qubits - 4);
        let u = dense_sequence(&gates, qubits).unwrap();
        let out = DenseState::plus(qubits).unwrap().apply_unitary(&u);
        let dim = 1usize << qubits;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = vec![C64::new(0.0, 0.0); dim];
        psi[0] = C64::new(s, 0.0);
        psi[dim / 2] = C64::new(0.0, s);
        let target = DenseState::pure(&psi).unwrap();
        let fidelity = hs_inner(target.matrix(), out.matrix()).re;
        assert!((fidelity - 1.0).abs() < 1e-12, "n={qubits} fidelity {fidelity}");
    }
}

#[test]
fn dense_degrees_match_symbolic_map() {
    for qubits in 1..=3 {
        let table = dense_degree_table(qubits).unwrap();
        for label in all_pauli_labels(qubits).unwrap() {
            assert_eq!(table[label.index()], degree_of_pauli(&label).unwrap(), "{label}");
        }
    }
}

#[test]
fn noiseless_circuits_return_to_the_ideal_outcome() {
    let mut rng = stream_rng(14, 0);
    for qubits in 1..=3 {
        let registry = GateRegistry::new(qubits, 6).unwrap();
        let spec = EnsembleSpec {
            count_z: 20,
            count_x: 20,
            ..EnsembleSpec::default()
        };
        let ensemble = generate_ensemble(&registry, &spec, &mut rng).unwrap();
        for circuit in &ensemble.circuits {
            let born = noiseless_born(circuit, qubits).unwrap();
            let mut ideal = vec![0.0; BornDistribution::bin_count(circuit.kind, qubits)];
            ideal[0] = 1.0;
            let expected = BornDistribution::from_bins(circuit.kind, qubits, &ideal).unwrap();
            assert!(born.l1_distance(&expected).unwrap() < 1e-10, "circuit {} {:?}", circuit.id, born);
        }
    }
}

#[test]
fn mirror_circuits_are_noiseless_identities() {
    let registry = GateRegistry::new(2, 4).unwrap();
    let builder = CircuitBuilder::new(&registry, InverseStyle::Mirror);
    let mut rng = stream_rng(15, 0);
    for id in 0..10 {
        let circuit = builder.z_circuit(id, 3, None, &mut rng);
        assert_eq!(circuit.kind, CircuitKind::Z);
        let u = dense_sequence(&circuit.gates, 2).unwrap();
        let overlap = u[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }
}

fn fixture(name: &str) -> CMatrix {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap();
    let entries: Vec<(usize, usize, C64)> = text
        .lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), C64::new(f[2].parse().unwrap(), f[3].parse().unwrap()))
        })
        .collect();
    let dim = entries.iter().map(|e| e.0 + 1).max().unwrap();
    let mut m = CMatrix::zeros(dim, dim);
    for (r, c, z) in entries {
        m[(r, c)] = z;
    }
    m
}

#[test]
fn dense_gates_match_golden_fixtures() {
    let binning = ThetaBinning::new(8).unwrap();
    let cases = [
        ("zrot_q1_n1.csv", GateInstance::zrot(1, 0.7, &binning), 1),
        ("zrot_q1_n2.csv", GateInstance::zrot(1, 0.7, &binning), 2),
        ("zrot_q2_n2.csv", GateInstance::zrot(2, 0.7, &binning), 2),
        ("fhop_q1_n2.csv", GateInstance::fhop(1), 2),
    ];
    for (name, gate, qubits) in cases {
        let u = dense_gate(&gate, qubits).unwrap();
        assert!(max_diff(&u, &fixture(name)) < 1e-14, "{name}");
    }
}
