use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest register a [`PauliOperator`] can describe (one machine word per
/// bitvector).
pub const MAX_QUBITS: usize = 64;

/// Single-qubit Pauli label. The discriminant is the Pauli-basis index used by
/// transfer matrices: `I = 0, X = 1, Y = 2, Z = 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliKind {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl PauliKind {
    pub const ALL: [PauliKind; 4] = [PauliKind::I, PauliKind::X, PauliKind::Y, PauliKind::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliKind::I,
            (true, false) => PauliKind::X,
            (true, true) => PauliKind::Y,
            (false, true) => PauliKind::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            PauliKind::I => (false, false),
            PauliKind::X => (true, false),
            PauliKind::Y => (true, true),
            PauliKind::Z => (false, true),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn symbol(self) -> char {
        match self {
            PauliKind::I => 'I',
            PauliKind::X => 'X',
            PauliKind::Y => 'Y',
            PauliKind::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli operator `i^phase * (σ_0 ⊗ σ_1 ⊗ ...)`.
///
/// Qubit `j` carries the Hermitian Pauli selected by bit `j` of `x` and `z`
/// (`(1,1)` is `Y`, not `XZ`). The phase exponent is kept modulo 4 so that
/// products are exact, not just up to sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliOperator {
    n_qubits: usize,
    x: u64,
    z: u64,
    phase: u8,
}

fn mask(n_qubits: usize) -> u64 {
    if n_qubits == 64 {
        u64::MAX
    } else {
        (1u64 << n_qubits) - 1
    }
}

fn check_qubit_count(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            what: "Pauli operator",
            n_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

impl PauliOperator {
    /// # Panics
    /// If `n_qubits` is zero or larger than [`MAX_QUBITS`].
    pub fn identity(n_qubits: usize) -> Self {
        assert!(
            (1..=MAX_QUBITS).contains(&n_qubits),
            "unsupported qubit count {n_qubits}"
        );
        Self {
            n_qubits,
            x: 0,
            z: 0,
            phase: 0,
        }
    }

    /// Builds an operator from raw bitvectors. Bits above `n_qubits` must be
    /// clear.
    pub fn from_bits(n_qubits: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let m = mask(n_qubits);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::InvalidParameter(format!(
                "Pauli bitvector has bits beyond qubit {}",
                n_qubits - 1
            )));
        }
        Ok(Self {
            n_qubits,
            x,
            z,
            phase: phase % 4,
        })
    }

    /// `kind` on `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, kind: PauliKind) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        if qubit >= n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits,
            });
        }
        let mut p = Self::identity(n_qubits);
        p.set_kind(qubit, kind);
        Ok(p)
    }

    /// Phase-free operator from its transfer-matrix basis index
    /// `sum_j kind_j * 4^j`.
    pub fn from_index(n_qubits: usize, mut index: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let mut p = Self::identity(n_qubits);
        for q in 0..n_qubits {
            p.set_kind(q, PauliKind::from_index(index % 4).unwrap());
            index /= 4;
        }
        if index != 0 {
            return Err(Error::InvalidParameter("Pauli index out of range".into()));
        }
        Ok(p)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Exponent `k` of the global phase `i^k`.
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn kind(&self, qubit: usize) -> PauliKind {
        PauliKind::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    pub(crate) fn set_kind(&mut self, qubit: usize, kind: PauliKind) {
        let (x, z) = kind.bits();
        let bit = 1u64 << qubit;
        self.x = (self.x & !bit) | if x { bit } else { 0 };
        self.z = (self.z & !bit) | if z { bit } else { 0 };
    }

    /// Transfer-matrix basis index, ignoring the phase.
    pub fn index(&self) -> usize {
        (0..self.n_qubits)
            .rev()
            .fold(0, |acc, q| acc * 4 + self.kind(q).index())
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0 && self.phase == 0
    }

    /// Same tensor factors, phase dropped.
    pub fn unsigned(&self) -> Self {
        Self { phase: 0, ..*self }
    }

    pub fn with_phase(&self, phase: u8) -> Self {
        Self {
            phase: phase % 4,
            ..*self
        }
    }

    /// Is this a Hermitian operator with eigenvalue sign `-1` in front?
    pub fn is_negative(&self) -> bool {
        self.phase == 2
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    pub fn inverse(&self) -> Self {
        Self {
            phase: (4 - self.phase) % 4,
            ..*self
        }
    }

    /// Group product `self * other` (`other` acts first).
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitCountMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self.mul_unchecked(other))
    }

    // σ(x,z) = i^{xz} X^x Z^z, and Z^{z1} X^{x2} = (-1)^{z1·x2} X^{x2} Z^{z1}.
    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let exponent = self.phase as u32
            + other.phase as u32
            + (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 3 * (x & z).count_ones();
        Self {
            n_qubits: self.n_qubits,
            x,
            z,
            phase: (exponent % 4) as u8,
        }
    }

    /// `c p c†` with `c` acting on `qubit`.
    pub fn conjugate_by_clifford(
        &self,
        clifford: super::SingleQubitClifford,
        qubit: usize,
    ) -> Result<Self> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(self.conjugate_by_clifford_unchecked(clifford, qubit))
    }

    pub(crate) fn conjugate_by_clifford_unchecked(
        &self,
        clifford: super::SingleQubitClifford,
        qubit: usize,
    ) -> Self {
        let (kind, negative) = clifford.image(self.kind(qubit));
        let mut out = *self;
        out.set_kind(qubit, kind);
        if negative {
            out.phase = (out.phase + 2) % 4;
        }
        out
    }

    /// `U p U†` for `U = exp(-i π/4 Z_a Z_b)`.
    pub fn conjugate_by_uzz(&self, a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidPair(a, b));
        }
        for q in [a, b] {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        Ok(self.conjugate_by_uzz_unchecked(a, b))
    }

    // Anticommuting P maps to U² P = -i ZZ P; commuting P is fixed.
    pub(crate) fn conjugate_by_uzz_unchecked(&self, a: usize, b: usize) -> Self {
        if ((self.x >> a) ^ (self.x >> b)) & 1 == 0 {
            return *self;
        }
        let zz = Self {
            n_qubits: self.n_qubits,
            x: 0,
            z: (1 << a) | (1 << b),
            phase: 3,
        };
        zz.mul_unchecked(self)
    }
}

/// Free-function form of [`PauliOperator::multiply`].
pub fn pauli_multiply(p: &PauliOperator, q: &PauliOperator) -> Result<PauliOperator> {
    p.multiply(q)
}

/// Uniform over the `4^n` phase-free Paulis.
pub fn sample_pauli<R: Rng + ?Sized>(rng: &mut R, n_qubits: usize) -> PauliOperator {
    let m = mask(n_qubits);
    let mut p = PauliOperator::identity(n_qubits);
    p.x = rng.random::<u64>() & m;
    p.z = rng.random::<u64>() & m;
    p
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        f.write_str(prefix)?;
        for q in 0..self.n_qubits {
            write!(f, "{}", self.kind(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Accepts an optional phase prefix (`+`, `-`, `i`, `+i`, `-i`) followed by
    /// one of `IXYZ` per qubit, qubit 0 first.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        check_qubit_count(n).map_err(|_| Error::Parse(format!("bad Pauli string {s:?}")))?;
        let mut p = Self::identity(n).with_phase(phase);
        for (q, c) in body.chars().enumerate() {
            let kind = match c.to_ascii_uppercase() {
                'I' => PauliKind::I,
                'X' => PauliKind::X,
                'Y' => PauliKind::Y,
                'Z' => PauliKind::Z,
                _ => return Err(Error::Parse(format!("bad Pauli character {c:?} in {s:?}"))),
            };
            p.set_kind(q, kind);
        }
        Ok(p)
    }
}

impl TryFrom<String> for PauliOperator {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<PauliOperator> for String {
    fn from(p: PauliOperator) -> Self {
        p.to_string()
    }
}
