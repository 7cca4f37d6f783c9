use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{FacesError, Result};

/// Largest supported number of qubits (two Majorana modes each in a 64-bit mask).
pub const MAX_QUBITS: usize = 32;

/// A phase `i^k`, stored as the number of quarter turns `k mod 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_quarter_turns(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn quarter_turns(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }

    /// `(re, im)` of the phase.
    pub fn to_complex(self) -> (f64, f64) {
        match self.0 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    }
}

impl core::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        })
    }
}

/// A Hermitian Pauli operator `I, X, Y, Z` tensor product, encoded by X and Z bit masks.
/// Bit `j - 1` of each mask refers to qubit `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliLabel {
    qubits: usize,
    x: u64,
    z: u64,
}

fn mask(qubits: usize) -> u64 {
    if qubits >= 64 {
        u64::MAX
    } else {
        (1u64 << qubits) - 1
    }
}

/// Quarter-turn exponent of the phase produced by multiplying single-qubit Paulis
/// `(x1, z1) * (x2, z2)` in the Hermitian convention.
fn single_qubit_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> i64 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i64 - x2 as i64,
        (true, false) => (z2 as i64) * (2 * x2 as i64 - 1),
        (false, true) => (x2 as i64) * (1 - 2 * z2 as i64),
    }
}

impl PauliLabel {
    pub fn new(qubits: usize, x: u64, z: u64) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(FacesError::InvalidPauli(alloc::format!(
                "qubit count {qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        if x & !mask(qubits) != 0 || z & !mask(qubits) != 0 {
            return Err(FacesError::InvalidPauli("mask exceeds qubit count".into()));
        }
        Ok(Self { qubits, x, z })
    }

    pub fn identity(qubits: usize) -> Result<Self> {
        Self::new(qubits, 0, 0)
    }

    /// Label from a dense index `x | z << qubits`, the ordering used by Pauli transfer matrices.
    pub fn from_index(qubits: usize, index: usize) -> Result<Self> {
        let m = mask(qubits);
        Self::new(qubits, index as u64 & m, (index as u64 >> qubits) & m)
    }

    pub fn index(&self) -> usize {
        (self.x | (self.z << self.qubits)) as usize
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Single-qubit factor on qubit `j` (1-based) as one of `'I', 'X', 'Y', 'Z'`.
    pub fn factor(&self, j: usize) -> char {
        let bit = 1u64 << (j - 1);
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    /// Product `self * other = phase * label`.
    pub fn mul(&self, other: &PauliLabel) -> Result<(Phase, PauliLabel)> {
        if self.qubits != other.qubits {
            return Err(FacesError::DimensionMismatch {
                left: self.qubits,
                right: other.qubits,
            });
        }
        let mut turns = 0i64;
        for j in 0..self.qubits {
            let bit = 1u64 << j;
            turns += single_qubit_phase(
                self.x & bit != 0,
                self.z & bit != 0,
                other.x & bit != 0,
                other.z & bit != 0,
            );
        }
        Ok((
            Phase::from_quarter_turns(turns),
            PauliLabel {
                qubits: self.qubits,
                x: self.x ^ other.x,
                z: self.z ^ other.z,
            },
        ))
    }

    pub fn commutes_with(&self, other: &PauliLabel) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 1..=self.qubits {
            write!(f, "{}", self.factor(j))?;
        }
        Ok(())
    }
}

impl FromStr for PauliLabel {
    type Err = FacesError;

    fn from_str(s: &str) -> Result<Self> {
        let mut x = 0u64;
        let mut z = 0u64;
        let chars: Vec<char> = s.chars().collect();
        for (i, c) in chars.iter().enumerate() {
            let bit = 1u64 << i;
            match c {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit
                }
                'Z' => z |= bit,
                _ => return Err(FacesError::InvalidPauli(s.to_string())),
            }
        }
        Self::new(chars.len(), x, z)
    }
}

/// A Pauli operator with a global phase: `phase * label`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub phase: Phase,
    pub label: PauliLabel,
}

impl PauliString {
    pub fn new(phase: Phase, label: PauliLabel) -> Self {
        Self { phase, label }
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        let (p, label) = self.label.mul(&other.label)?;
        Ok(PauliString {
            phase: self.phase * other.phase * p,
            label,
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.phase, self.label)
    }
}

impl From<PauliLabel> for PauliString {
    fn from(label: PauliLabel) -> Self {
        Self::new(Phase::ONE, label)
    }
}

/// All Pauli labels on `qubits` qubits in dense index order.
pub fn all_pauli_labels(qubits: usize) -> Result<Vec<PauliLabel>> {
    if qubits > 16 {
        return Err(FacesError::InvalidArgument(String::from(
            "refusing to enumerate more than 4^16 Pauli labels",
        )));
    }
    (0..1usize << (2 * qubits))
        .map(|i| PauliLabel::from_index(qubits, i))
        .collect()
}
