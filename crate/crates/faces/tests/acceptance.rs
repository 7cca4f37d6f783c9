//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.
//! Pass criterion numbers as arguments to run a subset.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use faces::config::{ExperimentConfig, NoiseKind};
use faces::pipeline::{self, median};
use faces_core::design::{generate_ensemble, EnsembleSpec, FacesModel, GateRegistry};
use faces_core::fermion::{all_pauli_labels, degree_of_pauli, PauliLabel};
use faces_core::kravchuk::{
    binomial, eigs_to_probs, kravchuk_matrix, probs_to_eigs, AntipodePermutation, FermionicDistribution,
};
use faces_core::noise::{flo_twirl_pauli, random_two_qubit_pauli_noise, GateNoiseModel, NoiseSpec, PauliChannel};
use faces_core::oracle::{
    extract_fermionic_probs, mc_flo_twirl, oracle_born_with, DenseSuperop, MonomialTable, TwirledNoise,
};
use faces_core::simulate::{exact_born, stream_rng};
use rand::Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn dirichlet<R: Rng>(len: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `e_k(-1_j + 1_{l-j})` as the coefficients of `(1 - t)^j (1 + t)^(l - j)`.
fn symmetric_polynomials(order: usize, j: usize) -> Vec<i128> {
    let mut coeffs = vec![1i128];
    for i in 0..order {
        let sign = if i < j { -1 } else { 1 };
        let mut next = vec![0i128; coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k] += c;
            next[k + 1] += sign * c;
        }
        coeffs = next;
    }
    coeffs
}

/// `sum over |alpha| = k of (-1)^{|alpha ∩ [j]|}`, enumerating every subset.
fn subset_sum(order: usize, j: usize, k: usize) -> i64 {
    (0u32..1 << order)
        .filter(|s| s.count_ones() as usize == k)
        .map(|s| if (s & ((1u32 << j) - 1)).count_ones().is_multiple_of(2) { 1 } else { -1 })
        .sum()
}

fn kravchuk_involution() -> Outcome {
    for order in 0..=16 {
        let m = kravchuk_matrix(order).map_err(|e| e.to_string())?;
        let sq = m.square();
        let dim = order + 1;
        for i in 0..dim {
            for j in 0..dim {
                let expected = if i == j { 1i128 << order } else { 0 };
                if sq[i * dim + j] != expected {
                    return Err(format!("order {order}: (M^2)[{i}][{j}] = {}", sq[i * dim + j]));
                }
            }
        }
    }
    Ok("M^2 = 2^l I exactly for l = 0..=16".into())
}

fn kravchuk_antipode() -> Outcome {
    for order in (0..=16).step_by(2) {
        let m = kravchuk_matrix(order).map_err(|e| e.to_string())?;
        let s = AntipodePermutation::new(order).map_err(|e| e.to_string())?;
        for j in 0..=order {
            let e = symmetric_polynomials(order, j);
            for k in 0..=order {
                let signed = if (j * k) % 2 == 0 { e[k] } else { -e[k] };
                let sm = m.get(s.apply(j), k) as i128;
                let ms = m.get(j, s.apply(k)) as i128;
                if sm != ms || sm != signed {
                    return Err(format!("order {order} ({j},{k}): sM {sm}, Ms {ms}, formula {signed}"));
                }
            }
        }
    }
    for order in 0..=10 {
        let m = kravchuk_matrix(order).map_err(|e| e.to_string())?;
        for j in 0..=order {
            let e = symmetric_polynomials(order, j);
            for k in 0..=order {
                let brute = subset_sum(order, j, k);
                if brute != m.get(j, k) || e[k] != brute as i128 {
                    return Err(format!("order {order} ({j},{k}): subsets {brute}, matrix {}", m.get(j, k)));
                }
            }
        }
    }
    Ok("sM = Ms = signed formula for even l <= 16; subset sums agree for l <= 10".into())
}

fn duality() -> Outcome {
    let mut rng = stream_rng(3, 0);
    let mut worst_q = 0.0f64;
    let mut worst_xi = 0.0f64;
    let mut worst_dep = 0.0f64;
    for modes in (2..=12).step_by(2) {
        for _ in 0..1000 {
            let q = dirichlet(modes + 1, &mut rng);
            let xi = probs_to_eigs(&FermionicDistribution::new(q.clone()).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let q2 = eigs_to_probs(&xi).map_err(|e| e.to_string())?;
            worst_q = worst_q.max(max_abs_diff(&q, q2.as_slice()));
            let xi2 = probs_to_eigs(&q2).map_err(|e| e.to_string())?;
            worst_xi = worst_xi.max(max_abs_diff(xi.as_slice(), xi2.as_slice()));
        }
        let scale = 4f64.powi((modes / 2) as i32);
        let dep: Vec<f64> = (0..=modes).map(|k| binomial(modes, k) as f64 / scale).collect();
        let xi = probs_to_eigs(&FermionicDistribution::new(dep).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let mut target = vec![0.0; modes + 1];
        target[0] = 1.0;
        worst_dep = worst_dep.max(max_abs_diff(xi.as_slice(), &target));
    }
    let detail = format!("q->xi->q {worst_q:.2e}, xi->q->xi {worst_xi:.2e}, depolarizing {worst_dep:.2e}");
    ensure(worst_q <= 1e-12 && worst_xi <= 1e-12 && worst_dep <= 1e-12, detail)
}

fn degree_distribution(channel: &PauliChannel, table: &MonomialTable, modes: usize) -> Result<Vec<f64>, String> {
    let mut q = vec![0.0; modes + 1];
    for (label, p) in channel.iter() {
        q[table.degree_of(label).map_err(|e| e.to_string())?] += p;
    }
    Ok(q)
}

fn twirl_classification() -> Outcome {
    let mut rng = stream_rng(4, 0);
    let spec = NoiseSpec::default();
    let mut checked = 0;
    let mut worst_exact = 0.0f64;
    for qubits in 2..=5 {
        let table = MonomialTable::new(qubits).map_err(|e| e.to_string())?;
        for a in 1..qubits {
            for b in a + 1..=qubits {
                for x in 0..4u64 {
                    for z in 0..4u64 {
                        if x == 0 && z == 0 {
                            continue;
                        }
                        let bits = |v: u64| ((v & 1) << (a - 1)) | ((v >> 1) << (b - 1));
                        let label = PauliLabel::new(qubits, bits(x), bits(z)).map_err(|e| e.to_string())?;
                        let dense = table.degree_of(&label).map_err(|e| e.to_string())?;
                        let symbolic = degree_of_pauli(&label).map_err(|e| e.to_string())?;
                        if dense != symbolic {
                            return Err(format!("{label}: dense degree {dense}, symbolic {symbolic}"));
                        }
                        checked += 1;
                    }
                }
                let channel =
                    random_two_qubit_pauli_noise(qubits, (a, b), &spec, &mut rng).map_err(|e| e.to_string())?;
                let q = flo_twirl_pauli(&channel).map_err(|e| e.to_string())?;
                let dense = degree_distribution(&channel, &table, 2 * qubits)?;
                worst_exact = worst_exact.max(max_abs_diff(q.as_slice(), &dense));
            }
        }
    }
    if worst_exact > 1e-15 {
        return Err(format!("combinatorial and dense q differ by {worst_exact:.2e}"));
    }
    let samples = 4000;
    let tolerance = 4.0 / (samples as f64).sqrt();
    let mut worst_entry = 0.0f64;
    let mut worst_q = 0.0f64;
    for qubits in 2..=3 {
        let table = MonomialTable::new(qubits).map_err(|e| e.to_string())?;
        let labels = all_pauli_labels(qubits).map_err(|e| e.to_string())?;
        for i in 0..20 {
            let channel = if i % 2 == 0 {
                let a = rng.random_range(1..qubits);
                random_two_qubit_pauli_noise(qubits, (a, a + 1), &spec, &mut rng)
            } else {
                PauliChannel::new(qubits, labels.iter().copied().zip(dirichlet(labels.len(), &mut rng)))
            }
            .map_err(|e| e.to_string())?;
            let exact = flo_twirl_pauli(&channel).map_err(|e| e.to_string())?;
            let superop = DenseSuperop::from_pauli_channel(&channel).map_err(|e| e.to_string())?;
            let twirled = mc_flo_twirl(&superop, samples, &mut rng).map_err(|e| e.to_string())?;
            let reference = DenseSuperop::flo_twirled(&exact, &table).map_err(|e| e.to_string())?;
            let diff = twirled.transfer_matrix() - reference.transfer_matrix();
            worst_entry = worst_entry.max(diff.amax());
            let extracted = extract_fermionic_probs(&twirled, &table, 1.0).map_err(|e| e.to_string())?;
            worst_q = worst_q.max(max_abs_diff(exact.as_slice(), extracted.q.as_slice()));
        }
    }
    let detail = format!(
        "{checked} Pauli degrees match; exact q within {worst_exact:.1e}; MC twirl transfer matrix within {worst_entry:.4} of the exact twirl (tolerance {tolerance:.4}); degree-averaged q within {worst_q:.1e}"
    );
    ensure(worst_entry <= tolerance && worst_q <= tolerance, detail)
}

fn reference_model(qubits: usize, bins: usize, per_kind: usize, seed: u64) -> Result<FacesModel, String> {
    let registry = GateRegistry::new(qubits, bins).map_err(|e| e.to_string())?;
    let mut rng = stream_rng(seed, 1);
    let noise = GateNoiseModel::random(qubits, registry.gates(), &NoiseSpec::default(), &mut rng)
        .map_err(|e| e.to_string())?;
    let spec = EnsembleSpec {
        count_z: per_kind,
        count_x: per_kind,
        ..EnsembleSpec::default()
    };
    let ensemble = generate_ensemble(&registry, &spec, &mut stream_rng(seed, 2)).map_err(|e| e.to_string())?;
    FacesModel::new(registry, noise, ensemble.circuits).map_err(|e| e.to_string())
}

fn born_cross_validation() -> Outcome {
    let model = reference_model(3, 46, 200, 5)?;
    let mut rng = stream_rng(5, 3);
    let batches = 40;
    let per_batch = 2000 / batches;
    let rows: Vec<usize> = (0..5).chain(200..205).collect();
    let mut worst_ratio = 0.0f64;
    let mut bins = 0;
    for &j in &rows {
        let circuit = &model.circuits()[j];
        let exact = exact_born(&model, j).map_err(|e| e.to_string())?.bins();
        let twirled = TwirledNoise::for_circuit(model.noise(), circuit, per_batch, batches, &mut rng)
            .map_err(|e| e.to_string())?;
        let oracle = oracle_born_with(circuit, &twirled).map_err(|e| e.to_string())?;
        for ((e, o), se) in exact.iter().zip(oracle.born.bins()).zip(&oracle.standard_error) {
            let ratio = (e - o).abs() / (4.0 * se + 1e-10);
            worst_ratio = worst_ratio.max(ratio);
            bins += 1;
        }
    }
    let detail = format!(
        "{} circuits, {bins} bins, T = {} per gate occurrence; largest |exact - oracle| / (4 SE) = {worst_ratio:.3}",
        rows.len(),
        batches * per_batch
    );
    ensure(worst_ratio <= 1.0, detail)
}

fn temp_dir() -> Result<tempfile::TempDir, String> {
    tempfile::tempdir().map_err(|e| e.to_string())
}

fn exact_recovery() -> Outcome {
    let dir = temp_dir()?;
    let config = ExperimentConfig {
        circuits: faces::config::CircuitConfig {
            count_z: 400,
            count_x: 400,
            ..Default::default()
        },
        seed: 6,
        ..ExperimentConfig::default()
    };
    pipeline::generate(&config, dir.path()).map_err(|e| e.to_string())?;
    pipeline::run(&config, dir.path(), true, workers()).map_err(|e| e.to_string())?;
    let outcome = pipeline::estimate(&config, dir.path(), false, workers()).map_err(|e| e.to_string())?;
    let worst = outcome.summary.max_rel_error;
    let detail = format!(
        "n = 5, N = 46, 400 circuits per type, {} estimates; max relative error {worst:.2e}",
        outcome.rows.len()
    );
    ensure(worst <= 1e-8 && outcome.rows.len() == 234 * 10, detail)
}

fn reproduction() -> Outcome {
    let shots = [1_000u64, 10_000, 100_000];
    let mut medians: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let dir = temp_dir()?;
    for seed in 1..=10u64 {
        let mut config = ExperimentConfig {
            seed,
            ..ExperimentConfig::default()
        };
        pipeline::generate(&config, dir.path()).map_err(|e| e.to_string())?;
        for &s in &shots {
            config.shots = s;
            pipeline::run(&config, dir.path(), false, workers()).map_err(|e| e.to_string())?;
            let outcome = pipeline::estimate(&config, dir.path(), false, workers()).map_err(|e| e.to_string())?;
            medians.entry(s).or_default().push(outcome.summary.median_rel_error);
        }
    }
    let top = &medians[&100_000];
    let worst_top = top.iter().copied().fold(0.0, f64::max);
    let decreasing = |a: u64, b: u64| medians[&a].iter().zip(&medians[&b]).filter(|(x, y)| y < x).count();
    let (first, second) = (decreasing(1_000, 10_000), decreasing(10_000, 100_000));
    let detail = format!(
        "median rel. error at S=1e5 per seed <= {worst_top:.4} (mean over seeds {:.4}); medians at S=1e3/1e4/1e5: {:.4}/{:.4}/{:.4}; decreases in {first}/10 and {second}/10 seeds",
        top.iter().sum::<f64>() / 10.0,
        median(&medians[&1_000]),
        median(&medians[&10_000]),
        median(top),
    );
    ensure(worst_top < 0.05 && first >= 9 && second >= 9, detail)
}

fn error_bound() -> Outcome {
    let dir = temp_dir()?;
    let mut qualifying = 0;
    let mut holds = 0;
    let mut tightest = 0.0f64;
    let mut seed = 0u64;
    while qualifying < 50 && seed < 200 {
        seed += 1;
        let mut config = ExperimentConfig {
            qubits: 3,
            bins: 4,
            shots: 10_000,
            seed,
            ..ExperimentConfig::default()
        };
        config.noise.center = 1e-3;
        config.noise.halfwidth = 1e-4;
        config.circuits.count_z = 40;
        config.circuits.count_x = 40;
        pipeline::generate(&config, dir.path()).map_err(|e| e.to_string())?;
        pipeline::run(&config, dir.path(), false, 1).map_err(|e| e.to_string())?;
        let outcome = pipeline::estimate(&config, dir.path(), false, 1).map_err(|e| e.to_string())?;
        if !outcome.bounds.iter().all(|b| b.hypotheses_hold) {
            continue;
        }
        qualifying += 1;
        if outcome.bounds.iter().all(|b| !b.violated()) {
            holds += 1;
        }
        for b in &outcome.bounds {
            tightest = tightest.max(b.max_abs_error / b.bound);
        }
    }
    let detail = format!(
        "hypotheses held in {qualifying} of {seed} trials; bound held in {holds}/{qualifying}; largest error/bound {tightest:.3}"
    );
    ensure(qualifying == 50 && holds == 50, detail)
}

fn directory_files(root: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).map_err(|e| e.to_string())?.display().to_string();
                out.insert(rel, std::fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn determinism() -> Outcome {
    let config = ExperimentConfig {
        seed: 9,
        ..ExperimentConfig::default()
    };
    let mut trees = Vec::new();
    let mut dirs = Vec::new();
    for w in [1, 8] {
        let dir = temp_dir()?;
        let out = dir.path();
        pipeline::generate(&config, out).map_err(|e| e.to_string())?;
        pipeline::run(&config, out, false, w).map_err(|e| e.to_string())?;
        pipeline::estimate(&config, out, false, w).map_err(|e| e.to_string())?;
        faces::report::report(&config.histogram, out, &[]).map_err(|e| e.to_string())?;
        trees.push(directory_files(out)?);
        dirs.push(dir);
    }
    let differing: Vec<&String> = trees[0]
        .iter()
        .filter(|(name, bytes)| trees[1].get(*name) != Some(bytes))
        .map(|(name, _)| name)
        .collect();
    let detail = format!(
        "{} files from workers 1 and 8; {} differ{}",
        trees[0].len(),
        differing.len(),
        differing.first().map_or(String::new(), |n| format!(" (first: {n})"))
    );
    ensure(differing.is_empty() && trees[0].len() == trees[1].len(), detail)
}

fn noiseless_pipeline_is_exact() -> Outcome {
    let dir = temp_dir()?;
    let mut config = ExperimentConfig {
        qubits: 2,
        bins: 4,
        shots: 100,
        ..ExperimentConfig::default()
    };
    config.noise.kind = NoiseKind::Noiseless;
    config.circuits.count_z = 20;
    config.circuits.count_x = 20;
    pipeline::generate(&config, dir.path()).map_err(|e| e.to_string())?;
    pipeline::run(&config, dir.path(), false, 1).map_err(|e| e.to_string())?;
    let outcome = pipeline::estimate(&config, dir.path(), false, 1).map_err(|e| e.to_string())?;
    ensure(outcome.summary.max_rel_error == 0.0, format!("max relative error {}", outcome.summary.max_rel_error))
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        id: 1,
        title: "Kravchuk involution",
        limit: Duration::from_secs(1),
        run: kravchuk_involution,
    },
    Criterion {
        id: 2,
        title: "Kravchuk-antipode commutation and entry formulas",
        limit: Duration::from_secs(10),
        run: kravchuk_antipode,
    },
    Criterion {
        id: 3,
        title: "eigenvalue/probability duality",
        limit: Duration::from_secs(60),
        run: duality,
    },
    Criterion {
        id: 4,
        title: "twirled degree distribution: dense classification and Monte-Carlo twirl",
        limit: Duration::from_secs(300),
        run: twirl_classification,
    },
    Criterion {
        id: 5,
        title: "analytic Born distributions vs dense oracle",
        limit: Duration::from_secs(600),
        run: born_cross_validation,
    },
    Criterion {
        id: 6,
        title: "exact recovery from exact probabilities",
        limit: Duration::from_secs(120),
        run: exact_recovery,
    },
    Criterion {
        id: 7,
        title: "10-mode reproduction with finite shots",
        limit: Duration::from_secs(1800),
        run: reproduction,
    },
    Criterion {
        id: 8,
        title: "deterministic error bound",
        limit: Duration::from_secs(600),
        run: error_bound,
    },
    Criterion {
        id: 9,
        title: "determinism across worker counts",
        limit: Duration::from_secs(600),
        run: determinism,
    },
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for c in CRITERIA.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let (passed, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] criterion {}: {} ({:.2} s, limit {} s): {}",
            if passed { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            detail
        );
    }
    if selected.is_empty() {
        match noiseless_pipeline_is_exact() {
            Ok(d) => println!("[PASS] noiseless pipeline: {d}"),
            Err(d) => {
                failures += 1;
                println!("[FAIL] noiseless pipeline: {d}");
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
