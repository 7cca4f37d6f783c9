use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::majorana::MajoranaMonomial;
use crate::error::{FacesError, Result};

/// Tolerance for accepting a matrix as orthogonal.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// Drift beyond which a composed transform is projected back onto O(2n).
const REORTHONORMALIZE_THRESHOLD: f64 = 1e-12;

fn orthogonality_deviation(r: &DMatrix<f64>) -> f64 {
    let g = r.transpose() * r;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Nearest orthogonal matrix in Frobenius norm.
fn polar_projection(r: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = r.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    u * v_t
}

/// Real orthogonal matrix `R` describing `U gamma_mu U^dagger = sum_nu R[mu][nu] gamma_nu`.
///
/// Transforms compose in application order: applying `a` then `b` is `a.compose(&b)`, i.e. `R_a R_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleTransform {
    matrix: DMatrix<f64>,
}

impl SingleParticleTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(FacesError::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 || !matrix.nrows().is_multiple_of(2) {
            return Err(FacesError::InvalidArgument(alloc::format!(
                "transform dimension {} must be a positive even number",
                matrix.nrows()
            )));
        }
        let deviation = orthogonality_deviation(&matrix);
        if deviation.is_nan() || deviation > ORTHOGONALITY_TOLERANCE {
            return Err(FacesError::NotOrthogonal { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity(modes: usize) -> Result<Self> {
        Self::new(DMatrix::identity(modes, modes))
    }

    /// Rotation by `angle` in the plane of adjacent modes `mode, mode + 1` (1-based).
    pub fn adjacent_rotation(modes: usize, mode: usize, angle: f64) -> Result<Self> {
        if mode == 0 || mode >= modes {
            return Err(FacesError::InvalidArgument(alloc::format!(
                "rotation plane ({mode}, {}) outside 1..={modes}",
                mode + 1
            )));
        }
        let mut m = DMatrix::identity(modes, modes);
        let (s, c) = libm::sincos(angle);
        let a = mode - 1;
        m[(a, a)] = c;
        m[(a, a + 1)] = -s;
        m[(a + 1, a)] = s;
        m[(a + 1, a + 1)] = c;
        Ok(Self { matrix: m })
    }

    /// `diag(+1, -1, ..., -1)`, the action of conjugation by `gamma_1`.
    pub fn mode_one_reflection(modes: usize) -> Result<Self> {
        let mut m = -DMatrix::<f64>::identity(modes, modes);
        m[(0, 0)] = 1.0;
        Self::new(m)
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn orthogonality_deviation(&self) -> f64 {
        orthogonality_deviation(&self.matrix)
    }

    /// `self` followed by `next`.
    pub fn compose(&self, next: &SingleParticleTransform) -> Result<Self> {
        if self.modes() != next.modes() {
            return Err(FacesError::DimensionMismatch {
                left: self.modes(),
                right: next.modes(),
            });
        }
        let mut matrix = &self.matrix * &next.matrix;
        if orthogonality_deviation(&matrix) > REORTHONORMALIZE_THRESHOLD {
            matrix = polar_projection(&matrix);
        }
        Ok(Self { matrix })
    }

    pub fn max_abs_difference(&self, other: &SingleParticleTransform) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }
}

/// Composition `R1 R2` of two transforms in application order.
pub fn compose_transforms(
    first: &SingleParticleTransform,
    second: &SingleParticleTransform,
) -> Result<SingleParticleTransform> {
    first.compose(second)
}

fn small_determinant(m: &[f64], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => {
            let mut a = m.to_vec();
            let mut det = 1.0;
            for col in 0..k {
                let pivot = (col..k)
                    .max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))
                    .unwrap_or(col);
                if a[pivot * k + col] == 0.0 {
                    return 0.0;
                }
                if pivot != col {
                    for c in 0..k {
                        a.swap(pivot * k + c, col * k + c);
                    }
                    det = -det;
                }
                let p = a[col * k + col];
                det *= p;
                for r in col + 1..k {
                    let factor = a[r * k + col] / p;
                    if factor != 0.0 {
                        for c in col..k {
                            a[r * k + c] -= factor * a[col * k + c];
                        }
                    }
                }
            }
            det
        }
    }
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Expansion `U gamma_alpha U^dagger = sum_beta det(R[alpha, beta]) gamma_beta` over
/// monomials of the same degree, omitting zero coefficients.
pub fn compound_action(
    transform: &SingleParticleTransform,
    alpha: &MajoranaMonomial,
) -> Result<Vec<(MajoranaMonomial, f64)>> {
    let modes = transform.modes();
    if alpha.modes() != modes {
        return Err(FacesError::DimensionMismatch {
            left: alpha.modes(),
            right: modes,
        });
    }
    let rows: Vec<usize> = alpha.indices().iter().map(|mu| mu - 1).collect();
    let k = rows.len();
    let r = transform.matrix();
    let mut out = Vec::new();
    let mut sub = vec![0.0; k * k];
    for cols in combinations(modes, k) {
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                sub[a * k + b] = r[(i, j)];
            }
        }
        let det = small_determinant(&sub, k);
        if det != 0.0 {
            let support = cols.iter().fold(0u64, |acc, &c| acc | 1u64 << c);
            out.push((MajoranaMonomial::new(modes, support)?, det));
        }
    }
    Ok(out)
}

/// Haar-random element of O(modes): a sign-corrected QR of a Gaussian matrix,
/// composed with the mode-one reflection with probability one half.
pub fn haar_orthogonal<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Result<SingleParticleTransform> {
    if modes == 0 || !modes.is_multiple_of(2) {
        return Err(FacesError::InvalidArgument(alloc::format!(
            "mode count {modes} must be positive and even"
        )));
    }
    let g = DMatrix::<f64>::from_fn(modes, modes, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..modes {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col.neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        let mut row = q.row_mut(0);
        row.neg_mut();
    }
    if rng.random_bool(0.5) {
        for j in 1..modes {
            let mut row = q.row_mut(j);
            row.neg_mut();
        }
    }
    SingleParticleTransform::new(q)
}

/// One factor of a Givens decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GivensFactor {
    /// The mode-one reflection `diag(1, -1, ..., -1)`.
    Reflection,
    /// Rotation by `angle` in the plane of modes `mode, mode + 1` (1-based).
    Rotation { mode: usize, angle: f64 },
}

impl GivensFactor {
    pub fn transform(&self, modes: usize) -> Result<SingleParticleTransform> {
        match *self {
            GivensFactor::Reflection => SingleParticleTransform::mode_one_reflection(modes),
            GivensFactor::Rotation { mode, angle } => {
                SingleParticleTransform::adjacent_rotation(modes, mode, angle)
            }
        }
    }
}

/// Factorisation of an orthogonal matrix into adjacent rotations, listed in application order.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensDecomposition {
    modes: usize,
    factors: Vec<GivensFactor>,
}

impl GivensDecomposition {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn factors(&self) -> &[GivensFactor] {
        &self.factors
    }

    pub fn has_reflection(&self) -> bool {
        matches!(self.factors.first(), Some(GivensFactor::Reflection))
    }

    pub fn reconstruct(&self) -> Result<SingleParticleTransform> {
        let mut acc = SingleParticleTransform::identity(self.modes)?;
        for f in &self.factors {
            acc = acc.compose(&f.transform(self.modes)?)?;
        }
        Ok(acc)
    }
}

/// Entries below this are treated as already eliminated.
const GIVENS_ZERO: f64 = 1e-14;

/// Decomposes `R` into a leading reflection (when `det R = -1`) followed by adjacent rotations.
pub fn givens_decompose(transform: &SingleParticleTransform) -> Result<GivensDecomposition> {
    let modes = transform.modes();
    let deviation = transform.orthogonality_deviation();
    if deviation > 1e-8 {
        return Err(FacesError::NotOrthogonal { deviation });
    }
    let mut w = transform.matrix().clone();
    let reflection = w.determinant() < 0.0;
    if reflection {
        for i in 1..modes {
            let mut row = w.row_mut(i);
            row.neg_mut();
        }
    }
    // W G_1^T ... G_m^T = I, hence W = G_m ... G_1.
    let mut found = Vec::new();
    for i in 0..modes {
        for mu in (i..modes - 1).rev() {
            let a = w[(i, mu)];
            let b = w[(i, mu + 1)];
            if b.abs() <= GIVENS_ZERO && (mu > i || a >= 0.0) {
                continue;
            }
            let r = libm::hypot(a, b);
            if r == 0.0 {
                continue;
            }
            let (c, s) = (a / r, -b / r);
            for row in 0..modes {
                let x = w[(row, mu)];
                let y = w[(row, mu + 1)];
                w[(row, mu)] = c * x - s * y;
                w[(row, mu + 1)] = s * x + c * y;
            }
            found.push(GivensFactor::Rotation {
                mode: mu + 1,
                angle: libm::atan2(s, c),
            });
        }
    }
    let mut factors = Vec::with_capacity(found.len() + 1);
    if reflection {
        factors.push(GivensFactor::Reflection);
    }
    factors.extend(found.into_iter().rev());
    Ok(GivensDecomposition { modes, factors })
}
