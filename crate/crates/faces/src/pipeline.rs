//! The four experiment stages: generate, run, estimate and report.

use std::fs;
use std::path::Path;

use faces_core::design::{generate_ensemble, FacesModel, GateRegistry};
use faces_core::estimate::{error_bounds, estimate_circuit_eigs, estimate_gate_eigs, DegreeBound};
use faces_core::kravchuk::{BornDistribution, CircuitKind};
use faces_core::noise::GateNoiseModel;
use faces_core::simulate::{
    circuit_eigenvalues, empirical_born, exact_born, sample_shots, shot_rng, stream_rng, streams,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, NoiseKind};
use crate::error::{Error, Result};
use crate::formats::{
    create_dir, hash_files, read_circuits, read_design, read_json, read_noise_model, read_probabilities,
    read_shot_record, write_circuits, write_design, write_json, write_noise_model, write_probabilities,
    write_report_rows, write_shot_record, Layout, ReportRow, RunManifest,
};

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    Ok(pool.install(f))
}

/// Draws the noise model and circuit ensemble and writes `config.json`, `noise_model.json`,
/// `circuits.jsonl` and `design.csv` to `out`. The stored config points its output at its
/// own directory.
pub fn generate(config: &ExperimentConfig, out: &Path) -> Result<FacesModel> {
    config.validate()?;
    let layout = Layout::new(out);
    create_dir(out)?;
    let saved = ExperimentConfig {
        output: ".".into(),
        ..config.clone()
    };
    saved.save(&layout.config())?;
    let registry = GateRegistry::new(config.qubits, config.bins)?;
    let noise = match config.noise.kind {
        NoiseKind::RandomPauli => {
            let mut rng = stream_rng(config.noise_seed(), streams::NOISE);
            GateNoiseModel::random(config.qubits, registry.gates(), &config.noise.spec(), &mut rng)?
        }
        NoiseKind::Noiseless => GateNoiseModel::noiseless(config.qubits, registry.gates())?,
    };
    let mut rng = stream_rng(config.seed, streams::ENSEMBLE);
    let ensemble = generate_ensemble(&registry, &config.circuits.spec(), &mut rng)?;
    let model = FacesModel::new(registry, noise, ensemble.circuits)?;
    write_noise_model(&layout.noise_model(), model.noise())?;
    write_circuits(&layout.circuits(), model.circuits(), config.seed, streams::ENSEMBLE)?;
    write_design(&layout.design(), model.design(), model.registry())?;
    Ok(model)
}

/// Loads the generated model from `out` and checks it against the stored design.
pub fn load_model(config: &ExperimentConfig, out: &Path) -> Result<FacesModel> {
    let layout = Layout::new(out);
    let registry = GateRegistry::new(config.qubits, config.bins)?;
    let noise = read_noise_model(&layout.noise_model())?;
    if noise.qubits() != config.qubits {
        return Err(Error::format(
            layout.noise_model(),
            format!("model has {} qubits, config has {}", noise.qubits(), config.qubits),
        ));
    }
    let circuits = read_circuits(&layout.circuits())?;
    let (kinds, counts) = read_design(&layout.design(), &registry)?;
    let model = FacesModel::new(registry, noise, circuits)?;
    let design = model.design();
    let matches = kinds == design.kinds() && counts.iter().enumerate().all(|(j, row)| row == design.row(j));
    if counts.len() != design.rows() || !matches {
        return Err(Error::format(layout.design(), "design matrix does not match circuits.jsonl"));
    }
    Ok(model)
}

fn model_hash(layout: &Layout) -> Result<String> {
    hash_files(&[layout.noise_model(), layout.circuits()])
}

/// Simulates every circuit, writing either shot counts or exact probabilities plus a manifest.
pub fn run(config: &ExperimentConfig, out: &Path, exact: bool, workers: usize) -> Result<RunManifest> {
    let layout = Layout::new(out);
    let model = load_model(config, out)?;
    let rows = model.design().rows();
    let (stale, fresh) = if exact {
        (layout.shots_dir(), layout.probabilities_dir())
    } else {
        (layout.probabilities_dir(), layout.shots_dir())
    };
    for dir in [stale, fresh.clone()] {
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|source| Error::Io { path: dir, source })?;
        }
    }
    create_dir(&fresh)?;
    with_workers(workers, || {
        (0..rows).into_par_iter().try_for_each(|j| {
            let born = exact_born(&model, j)?;
            if exact {
                write_probabilities(&layout.probability_file(j), j, &born)
            } else {
                let record = sample_shots(&born, j, config.shots, &mut shot_rng(config.seed, j))?;
                write_shot_record(&layout.shot_file(j), &record)
            }
        })
    })??;
    let manifest = RunManifest {
        seed: config.seed,
        shot_stream_base: streams::SHOTS,
        shots: (!exact).then_some(config.shots),
        exact_probabilities: exact,
        circuits: rows,
        model_hash: model_hash(&layout)?,
    };
    write_json(&layout.manifest(), &manifest)?;
    Ok(manifest)
}

/// Per-degree part of the estimation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub degree: usize,
    pub estimate_type: String,
    pub rows_available: usize,
    pub rows_used: usize,
    pub rows_dropped: usize,
    pub pinv_inf_norm: f64,
    /// `max_j ||P_hat_j - P_j||_1` over the rows of this degree.
    pub epsilon: f64,
    /// `4 ||A_k^+||_inf epsilon`.
    pub bound: f64,
    pub max_abs_error: f64,
    pub median_rel_error: f64,
    pub hypotheses_hold: bool,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationSummary {
    pub qubits: usize,
    pub modes: usize,
    pub gates: usize,
    pub circuits: usize,
    /// Shots per circuit; absent for exact probabilities.
    pub shots: Option<u64>,
    pub cutoff: f64,
    pub estimator: String,
    pub epsilon: f64,
    pub median_rel_error: f64,
    pub max_rel_error: f64,
    pub fraction_below_5_percent: f64,
    pub bound_violations: Vec<usize>,
    pub degrees: Vec<DegreeSummary>,
}

/// Circuit kinds that inform degree `k`.
pub fn estimate_type(degree: usize, modes: usize) -> &'static str {
    match (
        CircuitKind::X.observes_degree(degree, modes),
        CircuitKind::Z.observes_degree(degree, modes),
    ) {
        (true, true) => "xz",
        (true, false) => "x",
        _ => "z",
    }
}

pub fn relative_error(estimate: f64, truth: f64) -> f64 {
    let diff = (estimate - truth).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / truth.abs()
    }
}

/// Median of the finite values, `NaN` when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Result of the estimation stage.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationOutcome {
    pub rows: Vec<ReportRow>,
    pub summary: EstimationSummary,
    pub bounds: Vec<DegreeBound>,
}

/// Born distributions of the run recorded in `out`, or exact ones when `exact` is set.
fn observed_born(
    config: &ExperimentConfig,
    model: &FacesModel,
    layout: &Layout,
    exact: bool,
) -> Result<(Vec<BornDistribution>, Option<u64>)> {
    let rows = model.design().rows();
    let qubits = model.qubits();
    if exact {
        let born = (0..rows).into_par_iter().map(|j| Ok(exact_born(model, j)?)).collect::<Result<_>>()?;
        return Ok((born, None));
    }
    let manifest: RunManifest = read_json(&layout.manifest())?;
    if manifest.model_hash != model_hash(layout)? || manifest.circuits != rows {
        return Err(Error::format(layout.manifest(), "run does not belong to the current model; rerun it"));
    }
    let kind = |j: usize| model.design().kind(j);
    if manifest.exact_probabilities {
        let born = (0..rows)
            .into_par_iter()
            .map(|j| read_probabilities(&layout.probability_file(j), j, kind(j), qubits))
            .collect::<Result<_>>()?;
        return Ok((born, None));
    }
    let shots = manifest.shots.unwrap_or(config.shots);
    let born = (0..rows)
        .into_par_iter()
        .map(|j| {
            let path = layout.shot_file(j);
            let record = read_shot_record(&path, j, kind(j), qubits)?;
            if record.shots() != shots {
                return Err(Error::format(path, format!("{} shots where {shots} were recorded", record.shots())));
            }
            Ok(empirical_born(&record)?)
        })
        .collect::<Result<_>>()?;
    Ok((born, Some(shots)))
}

/// Estimates every gate eigenvalue, compares against the stored truth and writes
/// `report.csv` and `report.json`.
pub fn estimate(config: &ExperimentConfig, out: &Path, exact: bool, workers: usize) -> Result<EstimationOutcome> {
    let layout = Layout::new(out);
    let model = load_model(config, out)?;
    let modes = model.modes();
    let rows = model.design().rows();
    let options = config.estimator.options();
    let (observed, shots, truth, lambda, measured, estimates) = with_workers(workers, || -> Result<_> {
        let (observed, shots) = observed_born(config, &model, &layout, exact)?;
        let truth: Vec<BornDistribution> =
            (0..rows).into_par_iter().map(|j| Ok(exact_born(&model, j)?)).collect::<Result<_>>()?;
        let lambda: Vec<Vec<f64>> =
            (0..rows).into_par_iter().map(|j| Ok(circuit_eigenvalues(&model, j)?)).collect::<Result<_>>()?;
        let measured: Vec<_> =
            observed.par_iter().map(|b| Ok(estimate_circuit_eigs(b)?)).collect::<Result<_>>()?;
        let estimates = estimate_gate_eigs(model.design(), model.registry(), &measured, &options)?;
        Ok((observed, shots, truth, lambda, measured, estimates))
    })??;
    let bounds = error_bounds(&estimates, model.design(), model.noise(), &truth, &observed, &lambda, &measured)?;
    let shots_label = shots.map_or_else(|| "exact".to_string(), |s| s.to_string());
    let mut report_rows = Vec::with_capacity(estimates.gates.len() * modes);
    for (g, gate) in estimates.gates.iter().enumerate() {
        let xi = model.noise().eigenvalues(gate)?;
        for degree in 1..=modes {
            let (t, e) = (xi.get(degree), estimates.get(g, degree));
            report_rows.push(ReportRow {
                gate_id: gate.to_string(),
                degree,
                xi_true: t,
                xi_hat: e,
                rel_error: relative_error(e, t),
                estimate_type: estimate_type(degree, modes).to_string(),
                shots: shots_label.clone(),
            });
        }
    }
    let rel: Vec<f64> = report_rows.iter().map(|r| r.rel_error).collect();
    let degrees = bounds
        .iter()
        .map(|b| {
            let fit = estimates.fit(b.degree);
            let per_degree: Vec<f64> =
                report_rows.iter().filter(|r| r.degree == b.degree).map(|r| r.rel_error).collect();
            DegreeSummary {
                degree: b.degree,
                estimate_type: estimate_type(b.degree, modes).to_string(),
                rows_available: fit.rows_available,
                rows_used: fit.rows_used.len(),
                rows_dropped: fit.rows_dropped(),
                pinv_inf_norm: b.pinv_inf_norm,
                epsilon: b.born_error,
                bound: b.bound,
                max_abs_error: b.max_abs_error,
                median_rel_error: median(&per_degree),
                hypotheses_hold: b.hypotheses_hold,
                violated: b.violated(),
            }
        })
        .collect();
    let summary = EstimationSummary {
        qubits: model.qubits(),
        modes,
        gates: estimates.gates.len(),
        circuits: rows,
        shots,
        cutoff: options.cutoff,
        estimator: serde_json::to_value(config.estimator.method)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        epsilon: bounds.iter().map(|b| b.born_error).fold(0.0, f64::max),
        median_rel_error: median(&rel),
        max_rel_error: rel.iter().copied().fold(0.0, f64::max),
        fraction_below_5_percent: fraction_below(&rel, 0.05),
        bound_violations: bounds.iter().filter(|b| b.violated()).map(|b| b.degree).collect(),
        degrees,
    };
    write_report_rows(&layout.report_csv(), &report_rows)?;
    write_json(&layout.report_json(), &summary)?;
    Ok(EstimationOutcome {
        rows: report_rows,
        summary,
        bounds,
    })
}

/// Fraction of `values` strictly below `threshold`, zero for an empty slice.
pub fn fraction_below(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v < threshold).count() as f64 / values.len() as f64
}
