use alloc::vec::Vec;
use core::fmt;

use super::pauli::{PauliLabel, PauliString, Phase, MAX_QUBITS};
use crate::error::{FacesError, Result};

/// A Majorana monomial `gamma_alpha = gamma_{a1} ... gamma_{ak}` with `a1 < ... < ak`,
/// stored as a bit mask in which bit `mu - 1` marks mode `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MajoranaMonomial {
    modes: usize,
    support: u64,
}

impl MajoranaMonomial {
    pub fn new(modes: usize, support: u64) -> Result<Self> {
        if modes == 0 || !modes.is_multiple_of(2) || modes > 2 * MAX_QUBITS {
            return Err(FacesError::InvalidMonomial(alloc::format!(
                "mode count {modes} must be even and in 2..={}",
                2 * MAX_QUBITS
            )));
        }
        if modes < 64 && support >> modes != 0 {
            return Err(FacesError::InvalidMonomial("support exceeds mode count".into()));
        }
        Ok(Self { modes, support })
    }

    /// Monomial from 1-based mode indices, which must be strictly increasing.
    pub fn from_modes(modes: usize, indices: &[usize]) -> Result<Self> {
        let mut support = 0u64;
        let mut last = 0usize;
        for &mu in indices {
            if mu <= last || mu > modes {
                return Err(FacesError::InvalidMonomial(alloc::format!(
                    "indices {indices:?} must be strictly increasing within 1..={modes}"
                )));
            }
            support |= 1u64 << (mu - 1);
            last = mu;
        }
        Self::new(modes, support)
    }

    pub fn identity(modes: usize) -> Result<Self> {
        Self::new(modes, 0)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn support(&self) -> u64 {
        self.support
    }

    pub fn degree(&self) -> usize {
        self.support.count_ones() as usize
    }

    /// 1-based mode indices in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        (0..self.modes)
            .filter(|b| self.support >> b & 1 == 1)
            .map(|b| b + 1)
            .collect()
    }
}

impl fmt::Display for MajoranaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support == 0 {
            return f.write_str("1");
        }
        let idx = self.indices();
        for (i, mu) in idx.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "g{mu}")?;
        }
        Ok(())
    }
}

/// Jordan-Wigner image of a single Majorana operator: `gamma_{2j-1} = Z..Z X_j`,
/// `gamma_{2j} = Z..Z Y_j`.
pub fn jw_single(qubits: usize, mode: usize) -> Result<PauliLabel> {
    if mode == 0 || mode > 2 * qubits {
        return Err(FacesError::InvalidMonomial(alloc::format!(
            "mode {mode} outside 1..={}",
            2 * qubits
        )));
    }
    let j = mode.div_ceil(2);
    let string = (1u64 << (j - 1)) - 1;
    let bit = 1u64 << (j - 1);
    let z = if mode.is_multiple_of(2) { string | bit } else { string };
    PauliLabel::new(qubits, bit, z)
}

/// Pauli string `c * sigma` equal to `gamma_alpha` under Jordan-Wigner.
pub fn jw_pauli_of_monomial(alpha: &MajoranaMonomial) -> Result<PauliString> {
    let qubits = alpha.modes() / 2;
    let mut acc = PauliString::from(PauliLabel::identity(qubits)?);
    for mu in alpha.indices() {
        acc = acc.mul(&PauliString::from(jw_single(qubits, mu)?))?;
    }
    Ok(acc)
}

/// Monomial `gamma_alpha` and phase `c` with `sigma = c * gamma_alpha`.
pub fn monomial_of_pauli(sigma: &PauliString) -> Result<(MajoranaMonomial, Phase)> {
    let label = sigma.label;
    let qubits = label.qubits();
    let mut support = 0u64;
    for j in 1..=qubits {
        let string = (1u64 << (2 * (j - 1))) - 1;
        let odd = 1u64 << (2 * j - 2);
        let even = 1u64 << (2 * j - 1);
        support ^= match label.factor(j) {
            'I' => 0,
            'X' => string | odd,
            'Y' => string | even,
            _ => odd | even,
        };
    }
    let alpha = MajoranaMonomial::new(2 * qubits, support)?;
    let image = jw_pauli_of_monomial(&alpha)?;
    debug_assert_eq!(image.label, label);
    Ok((alpha, sigma.phase * image.phase.conj()))
}

/// Majorana degree of a Hermitian Pauli label.
pub fn degree_of_pauli(label: &PauliLabel) -> Result<usize> {
    Ok(monomial_of_pauli(&PauliString::from(*label))?.0.degree())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(modes: usize, idx: &[usize]) -> MajoranaMonomial {
        MajoranaMonomial::from_modes(modes, idx).unwrap()
    }

    fn label(s: &str) -> PauliLabel {
        s.parse().unwrap()
    }

    #[test]
    fn known_jordan_wigner_images() {
        let cases: &[(&[usize], Phase, &str)] = &[
            (&[1], Phase::ONE, "XI"),
            (&[2], Phase::ONE, "YI"),
            (&[3], Phase::ONE, "ZX"),
            (&[4], Phase::ONE, "ZY"),
            (&[1, 2], Phase::I, "ZI"),
            (&[2, 3], Phase::I, "XX"),
            (&[1, 2, 3], Phase::I, "IX"),
            (&[3, 4], Phase::I, "IZ"),
            (&[1, 2, 3, 4], Phase::MINUS_ONE, "ZZ"),
        ];
        for (idx, phase, pauli) in cases {
            let image = jw_pauli_of_monomial(&mono(4, idx)).unwrap();
            assert_eq!(image.phase, *phase, "{idx:?}");
            assert_eq!(image.label, label(pauli), "{idx:?}");
        }
    }

    #[test]
    fn inverse_map_examples() {
        let (alpha, c) = monomial_of_pauli(&PauliString::from(label("IX"))).unwrap();
        assert_eq!(alpha.indices(), [1, 2, 3]);
        assert_eq!(c, Phase::MINUS_I);
        let (alpha, c) = monomial_of_pauli(&PauliString::from(label("ZI"))).unwrap();
        assert_eq!(alpha.indices(), [1, 2]);
        assert_eq!(c, Phase::MINUS_I);
    }

    #[test]
    fn maps_are_mutually_inverse() {
        for modes in [2usize, 4, 6, 8] {
            for support in 0..1u64 << modes {
                let alpha = MajoranaMonomial::new(modes, support).unwrap();
                let sigma = jw_pauli_of_monomial(&alpha).unwrap();
                let (back, c) = monomial_of_pauli(&sigma).unwrap();
                assert_eq!(back, alpha);
                assert_eq!(c, Phase::ONE);
            }
        }
    }

    #[test]
    fn degree_counts_match_binomials() {
        let mut counts = [0usize; 7];
        for l in crate::fermion::all_pauli_labels(3).unwrap() {
            counts[degree_of_pauli(&l).unwrap()] += 1;
        }
        assert_eq!(counts, [1, 6, 15, 20, 15, 6, 1]);
    }

    #[test]
    fn rejects_bad_monomials() {
        assert!(MajoranaMonomial::from_modes(4, &[2, 1]).is_err());
        assert!(MajoranaMonomial::from_modes(4, &[5]).is_err());
        assert!(MajoranaMonomial::new(3, 0).is_err());
    }
}
