//! Least-squares recovery of per-gate eigenvalues from measured circuit eigenvalues.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::design::{DesignMatrix, GateRegistry};
use crate::error::{FacesError, Result};
use crate::fermion::GateId;
use crate::kravchuk::{born_to_circuit_eigs, BornDistribution, MeasuredEigenvalues};
use crate::linalg::{nnls, LeastSquares};
use crate::noise::GateNoiseModel;

/// Circuit eigenvalues estimated from an empirical Born distribution, with `Lambda_0 = 1`.
pub fn estimate_circuit_eigs(born: &BornDistribution) -> Result<MeasuredEigenvalues> {
    let mut m = born_to_circuit_eigs(born)?;
    m.set(0, 1.0);
    Ok(m)
}

/// Solver for the log-linear system `A x = -ln Lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// `x = A^+ b`, clamped to `x >= 0`.
    #[default]
    Pseudoinverse,
    /// Non-negative least squares.
    NonNegativeLeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationOptions {
    /// Rows with `Lambda_hat <= cutoff` are discarded.
    pub cutoff: f64,
    pub estimator: Estimator,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        Self {
            cutoff: 0.1,
            estimator: Estimator::Pseudoinverse,
        }
    }
}

/// Diagnostics of the fit in one degree sector.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeFit {
    pub degree: usize,
    pub rows_available: usize,
    pub rows_used: Vec<usize>,
    /// `||A_k^+||_inf` of the rows actually used.
    pub pinv_inf_norm: f64,
}

impl DegreeFit {
    pub fn rows_dropped(&self) -> usize {
        self.rows_available - self.rows_used.len()
    }
}

/// Estimated eigenvalues `xi_hat[g][k]` for every registry gate and degree.
#[derive(Debug, Clone, PartialEq)]
pub struct GateEigenvalueEstimates {
    pub modes: usize,
    pub gates: Vec<GateId>,
    pub xi: Vec<Vec<f64>>,
    /// One entry per degree `1..=modes`.
    pub fits: Vec<DegreeFit>,
}

impl GateEigenvalueEstimates {
    pub fn get(&self, gate: usize, degree: usize) -> f64 {
        self.xi[gate][degree]
    }

    pub fn fit(&self, degree: usize) -> &DegreeFit {
        &self.fits[degree - 1]
    }

    /// Largest absolute error of each degree against a reference model.
    pub fn max_abs_errors(&self, truth: &GateNoiseModel) -> Result<Vec<f64>> {
        let mut out = alloc::vec![0.0; self.modes + 1];
        for (g, gate) in self.gates.iter().enumerate() {
            let xi = truth.eigenvalues(gate)?;
            for (k, e) in out.iter_mut().enumerate() {
                *e = f64::max(*e, (self.xi[g][k] - xi.get(k)).abs());
            }
        }
        Ok(out)
    }
}

/// Fits every degree sector of the design to the measured circuit eigenvalues.
pub fn estimate_gate_eigs(
    design: &DesignMatrix,
    registry: &GateRegistry,
    measured: &[MeasuredEigenvalues],
    options: &EstimationOptions,
) -> Result<GateEigenvalueEstimates> {
    if measured.len() != design.rows() {
        return Err(FacesError::LengthMismatch {
            expected: design.rows(),
            found: measured.len(),
        });
    }
    let modes = registry.modes();
    let k_params = design.cols();
    if let Some(m) = measured.iter().find(|m| m.modes() != modes) {
        return Err(FacesError::DimensionMismatch {
            left: m.modes(),
            right: modes,
        });
    }
    let mut xi = alloc::vec![alloc::vec![1.0; modes + 1]; k_params];
    let mut fits = Vec::with_capacity(modes);
    let mut solvers: BTreeMap<Vec<usize>, LeastSquares> = BTreeMap::new();
    for degree in 1..=modes {
        let available = design.rows_for_degree(degree, modes)?;
        let mut rows = Vec::with_capacity(available.len());
        let mut rhs = Vec::with_capacity(available.len());
        for &j in &available {
            match measured[j].get(degree) {
                Some(v) if v > options.cutoff && v > 0.0 => {
                    rows.push(j);
                    rhs.push(-libm::log(v.min(1.0)));
                }
                _ => {}
            }
        }
        let rank_loss = || FacesError::CutoffRankLoss {
            degree,
            cutoff: options.cutoff,
            kept: rows.len(),
            parameters: k_params,
        };
        if rows.len() < k_params {
            return Err(rank_loss());
        }
        if !solvers.contains_key(&rows) {
            let ls = LeastSquares::new(&design.submatrix(&rows)).map_err(|_| rank_loss())?;
            solvers.insert(rows.clone(), ls);
        }
        let solver = &solvers[&rows];
        let x = match options.estimator {
            Estimator::Pseudoinverse => solver.solve(&rhs)?,
            Estimator::NonNegativeLeastSquares => nnls(&design.submatrix(&rows), &rhs)?,
        };
        for (g, &xg) in x.iter().enumerate() {
            xi[g][degree] = libm::exp(-xg.max(0.0));
        }
        fits.push(DegreeFit {
            degree,
            rows_available: available.len(),
            pinv_inf_norm: solver.inf_norm(),
            rows_used: rows,
        });
    }
    Ok(GateEigenvalueEstimates {
        modes,
        gates: registry.gates().to_vec(),
        xi,
        fits,
    })
}

/// Check of the deterministic error bound in one degree sector.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeBound {
    pub degree: usize,
    /// `max_j ||P_hat_j - P_j||_1` over the rows of this degree.
    pub born_error: f64,
    pub pinv_inf_norm: f64,
    /// `4 ||A_k^+||_inf * born_error`.
    pub bound: f64,
    pub max_abs_error: f64,
    /// All true `Lambda >= 1/2` and all estimated `Lambda_hat >= 1/4` in this sector.
    pub hypotheses_hold: bool,
}

/// Floating-point slack allowed when comparing an error with its bound.
pub const BOUND_SLACK: f64 = 1e-9;

impl DegreeBound {
    pub fn violated(&self) -> bool {
        self.hypotheses_hold && self.max_abs_error > self.bound + BOUND_SLACK
    }
}

/// Evaluates the bound `||xi_hat - xi||_inf <= 4 ||A_k^+||_inf max_j ||dP_j||_1` per degree.
pub fn error_bounds(
    estimates: &GateEigenvalueEstimates,
    design: &DesignMatrix,
    truth: &GateNoiseModel,
    exact: &[BornDistribution],
    empirical: &[BornDistribution],
    true_lambda: &[Vec<f64>],
    measured: &[MeasuredEigenvalues],
) -> Result<Vec<DegreeBound>> {
    let modes = estimates.modes;
    let errors = estimates.max_abs_errors(truth)?;
    let mut out = Vec::with_capacity(modes);
    for degree in 1..=modes {
        let rows = design.rows_for_degree(degree, modes)?;
        let mut born_error = 0.0f64;
        let mut hypotheses_hold = true;
        for &j in &rows {
            born_error = born_error.max(empirical[j].l1_distance(&exact[j])?);
            if true_lambda[j][degree] < 0.5 || measured[j].get(degree).is_none_or(|v| v < 0.25) {
                hypotheses_hold = false;
            }
        }
        let fit = estimates.fit(degree);
        if fit.rows_dropped() > 0 {
            hypotheses_hold = false;
        }
        out.push(DegreeBound {
            degree,
            born_error,
            pinv_inf_norm: fit.pinv_inf_norm,
            bound: 4.0 * fit.pinv_inf_norm * born_error,
            max_abs_error: errors[degree],
            hypotheses_hold,
        });
    }
    Ok(out)
}

/// Prefactor of the shot budget in [`required_shots`].
pub const SHOT_CONSTANT: f64 = 2.0;

/// Shots per circuit sufficient for accuracy `epsilon` with failure probability `fail_prob`:
/// `SHOT_CONSTANT * n * ||A^+||^2 * ln(m / fail_prob) / epsilon^2`, with `epsilon` in `(0, 1/4]`.
pub fn required_shots(
    qubits: usize,
    circuits: usize,
    epsilon: f64,
    fail_prob: f64,
    pinv_inf_norm: f64,
) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon <= 0.25) {
        return Err(FacesError::InvalidArgument(alloc::format!(
            "accuracy {epsilon} must lie in (0, 1/4]"
        )));
    }
    if !(fail_prob > 0.0 && fail_prob < 1.0) || circuits == 0 || qubits == 0 {
        return Err(FacesError::InvalidArgument(
            "failure probability must lie in (0, 1) and sizes must be positive".into(),
        ));
    }
    let s = SHOT_CONSTANT * qubits as f64 * pinv_inf_norm * pinv_inf_norm * libm::log(circuits as f64 / fail_prob)
        / (epsilon * epsilon);
    Ok(libm::ceil(s) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Circuit;
    use crate::fermion::GateInstance;
    use crate::kravchuk::{circuit_eigs_to_born, CircuitKind};

    #[test]
    fn single_gate_exact_recovery() {
        let registry = GateRegistry::new(1, 1).unwrap();
        let g = GateInstance::zrot(1, 0.5, registry.binning());
        let circuits = alloc::vec![
            Circuit { id: 0, kind: CircuitKind::Z, gates: alloc::vec![g] },
            Circuit { id: 1, kind: CircuitKind::X, gates: alloc::vec![g, g] },
        ];
        let design = DesignMatrix::from_circuits(&circuits, &registry).unwrap();
        let xi = [1.0, 0.9, 0.8];
        let measured: Vec<_> = circuits
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let count = design.row(j)[0] as i32;
                let lambda: Vec<f64> = xi.iter().map(|v| libm::pow(*v, count as f64)).collect();
                estimate_circuit_eigs(&circuit_eigs_to_born(&lambda, c.kind, 1).unwrap()).unwrap()
            })
            .collect();
        let est = estimate_gate_eigs(&design, &registry, &measured, &EstimationOptions::default()).unwrap();
        assert!((est.get(0, 1) - 0.9).abs() < 1e-14);
        assert!((est.get(0, 2) - 0.8).abs() < 1e-14);
        assert_eq!(est.fit(1).rows_used, alloc::vec![1]);
    }

    #[test]
    fn cutoff_can_remove_identifiability() {
        let registry = GateRegistry::new(1, 1).unwrap();
        let g = GateInstance::zrot(1, 0.5, registry.binning());
        let circuits = alloc::vec![
            Circuit { id: 0, kind: CircuitKind::Z, gates: alloc::vec![g] },
            Circuit { id: 1, kind: CircuitKind::X, gates: alloc::vec![g] },
        ];
        let design = DesignMatrix::from_circuits(&circuits, &registry).unwrap();
        let lambda = [1.0, 0.05, 0.05];
        let measured: Vec<_> = circuits
            .iter()
            .map(|c| estimate_circuit_eigs(&circuit_eigs_to_born(&lambda, c.kind, 1).unwrap()).unwrap())
            .collect();
        let err = estimate_gate_eigs(&design, &registry, &measured, &EstimationOptions::default()).unwrap_err();
        assert!(matches!(err, FacesError::CutoffRankLoss { degree: 1, .. }));
        assert!(err.to_string().starts_with("A is not full rank with cutoff"));
    }

    #[test]
    fn shot_budget_example() {
        assert_eq!(required_shots(5, 2000, 0.01, 0.05, 1.0).unwrap(), 1_059_664);
        let base = required_shots(5, 2000, 0.02, 0.05, 1.0).unwrap() as f64;
        assert!((required_shots(5, 2000, 0.01, 0.05, 1.0).unwrap() as f64 / base - 4.0).abs() < 1e-5);
        let doubled = required_shots(5, 4000, 0.01, 0.05, 1.0).unwrap() as f64;
        assert!((doubled - 1_059_664.0 - SHOT_CONSTANT * 5.0 * libm::log(2.0) / 1e-4).abs() < 2.0);
        assert!(required_shots(5, 2000, 0.3, 0.05, 1.0).is_err());
        assert!(required_shots(5, 2000, 0.0, 0.05, 1.0).is_err());
    }
}
