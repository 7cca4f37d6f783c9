//! Experiment configuration.

use std::path::{Path, PathBuf};

use faces_core::design::{EnsembleSpec, InverseStyle};
use faces_core::estimate::{EstimationOptions, Estimator};
use faces_core::fermion::MAX_QUBITS;
use faces_core::noise::NoiseSpec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{read_json, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Independent random two-qubit Pauli channel after every gate.
    RandomPauli,
    Noiseless,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub center: f64,
    pub halfwidth: f64,
    /// Seed of the noise draw; the master seed when absent.
    pub seed: Option<u64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let spec = NoiseSpec::default();
        Self {
            kind: NoiseKind::RandomPauli,
            center: spec.center,
            halfwidth: spec.halfwidth,
            seed: None,
        }
    }
}

impl NoiseConfig {
    pub fn spec(&self) -> NoiseSpec {
        NoiseSpec {
            center: self.center,
            halfwidth: self.halfwidth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseKind {
    SplitRotations,
    Mirror,
}

impl From<InverseKind> for InverseStyle {
    fn from(kind: InverseKind) -> Self {
        match kind {
            InverseKind::SplitRotations => InverseStyle::SplitRotations,
            InverseKind::Mirror => InverseStyle::Mirror,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    pub count_z: usize,
    pub count_x: usize,
    pub depth_min: usize,
    pub depth_max: usize,
    pub max_retries: usize,
    pub inverse: InverseKind,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        let spec = EnsembleSpec::default();
        Self {
            count_z: spec.count_z,
            count_x: spec.count_x,
            depth_min: spec.depth_min,
            depth_max: spec.depth_max,
            max_retries: spec.max_retries,
            inverse: InverseKind::SplitRotations,
        }
    }
}

impl CircuitConfig {
    pub fn spec(&self) -> EnsembleSpec {
        EnsembleSpec {
            count_z: self.count_z,
            count_x: self.count_x,
            depth_min: self.depth_min,
            depth_max: self.depth_max,
            max_retries: self.max_retries,
            style: self.inverse.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Pseudoinverse,
    Nnls,
}

/// Cutoff of the experiment default. Circuits carrying the `|+..+>` preparation accumulate
/// enough gates that their eigenvalues sit near `1e-2` at the default noise level.
pub const DEFAULT_CUTOFF: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub cutoff: f64,
    pub method: EstimatorKind,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            method: EstimatorKind::Pseudoinverse,
        }
    }
}

impl EstimatorConfig {
    pub fn options(&self) -> EstimationOptions {
        EstimationOptions {
            cutoff: self.cutoff,
            estimator: match self.method {
                EstimatorKind::Pseudoinverse => Estimator::Pseudoinverse,
                EstimatorKind::Nnls => Estimator::NonNegativeLeastSquares,
            },
        }
    }
}

/// Relative-error histogram bins: `[0, w), [w, 2w), ...` up to `max_error`, then one overflow bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramConfig {
    pub bin_width: f64,
    pub max_error: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bin_width: 0.005,
            max_error: 0.2,
        }
    }
}

impl HistogramConfig {
    /// Finite bin edges from `0` to `max_error`.
    pub fn edges(&self) -> Vec<f64> {
        let bins = (self.max_error / self.bin_width).round() as usize;
        (0..=bins).map(|i| i as f64 * self.bin_width).collect()
    }
}

/// Full description of one experiment. Missing fields take the defaults of the
/// 10-mode reproduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub qubits: usize,
    pub bins: usize,
    pub noise: NoiseConfig,
    pub circuits: CircuitConfig,
    pub shots: u64,
    pub estimator: EstimatorConfig,
    pub histogram: HistogramConfig,
    pub seed: u64,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            qubits: 5,
            bins: 46,
            noise: NoiseConfig::default(),
            circuits: CircuitConfig::default(),
            shots: 100_000,
            estimator: EstimatorConfig::default(),
            histogram: HistogramConfig::default(),
            seed: 0,
            output: PathBuf::from("faces-out"),
        }
    }
}

impl ExperimentConfig {
    /// Reads and validates a config; a relative `output` is taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut config: Self = read_json(path)?;
        config.validate()?;
        if config.output.is_relative() {
            let base = path.parent().unwrap_or(Path::new(""));
            config.output = base.join(&config.output);
        }
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn modes(&self) -> usize {
        2 * self.qubits
    }

    pub fn noise_seed(&self) -> u64 {
        self.noise.seed.unwrap_or(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.qubits == 0 || self.qubits > MAX_QUBITS {
            return fail(format!("qubits must lie in 1..={MAX_QUBITS}, got {}", self.qubits));
        }
        if self.bins == 0 {
            return fail("bins must be at least 1".into());
        }
        let c = &self.circuits;
        if c.count_z + c.count_x == 0 {
            return fail("at least one circuit is required".into());
        }
        if c.depth_min == 0 || c.depth_max < c.depth_min {
            return fail(format!("depth range {}..={} is invalid", c.depth_min, c.depth_max));
        }
        if self.shots == 0 {
            return fail("shots must be at least 1".into());
        }
        let cutoff = self.estimator.cutoff;
        if !(0.0..1.0).contains(&cutoff) {
            return fail(format!("cutoff {cutoff} must lie in [0, 1)"));
        }
        let h = &self.histogram;
        if !(h.bin_width > 0.0 && h.max_error >= h.bin_width && h.max_error.is_finite()) {
            return fail(format!("histogram bins {} up to {} are invalid", h.bin_width, h.max_error));
        }
        if self.noise.kind == NoiseKind::RandomPauli {
            let terms = if self.qubits == 1 { 3 } else { 15 };
            self.noise.spec().validate(terms)?;
        }
        Ok(())
    }
}
