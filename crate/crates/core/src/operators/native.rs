use serde::{Deserialize, Serialize};

use super::{PauliKind, PauliOperator, SingleQubitClifford};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NativeGateKind {
    /// `exp(-i π/4 Z⊗Z)`
    Uzz,
}

/// The native entangling gate on an ordered qubit pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NativeGate {
    pub kind: NativeGateKind,
    pub a: usize,
    pub b: usize,
}

impl NativeGate {
    pub fn uzz(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidPair(a, b));
        }
        Ok(Self {
            kind: NativeGateKind::Uzz,
            a,
            b,
        })
    }
}

/// A gate in a compiled circuit: only single-qubit Cliffords and native
/// two-qubit gates are ever executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Single {
        qubit: usize,
        clifford: SingleQubitClifford,
    },
    Native(NativeGate),
}

impl Gate {
    pub fn is_native(&self) -> bool {
        matches!(self, Gate::Native(_))
    }

    /// Largest qubit index the gate touches.
    pub fn max_qubit(&self) -> usize {
        match *self {
            Gate::Single { qubit, .. } => qubit,
            Gate::Native(g) => g.a.max(g.b),
        }
    }

    /// `G p G†`.
    pub fn conjugate(&self, p: &PauliOperator) -> Result<PauliOperator> {
        match *self {
            Gate::Single { qubit, clifford } => p.conjugate_by_clifford(clifford, qubit),
            Gate::Native(g) => p.conjugate_by_uzz(g.a, g.b),
        }
    }

    pub(crate) fn conjugate_unchecked(&self, p: &PauliOperator) -> PauliOperator {
        match *self {
            Gate::Single { qubit, clifford } => p.conjugate_by_clifford_unchecked(clifford, qubit),
            Gate::Native(g) => p.conjugate_by_uzz_unchecked(g.a, g.b),
        }
    }
}

/// Compiles `g⁻¹` as `P g P` with `P = X` on the first qubit of the pair.
///
/// `X_a` anticommutes with `Z_a Z_b`, so `X_a exp(-iθ ZZ) X_a = exp(+iθ ZZ)`
/// exactly. The returned gates are in application order.
pub fn invert_layer_native(g: NativeGate) -> [Gate; 3] {
    let x = Gate::Single {
        qubit: g.a,
        clifford: SingleQubitClifford::pauli(PauliKind::X),
    };
    [x, Gate::Native(g), x]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;
    use ndarray::Array2;
    use num_complex::Complex64;

    fn sequence_unitary(gates: &[Gate]) -> Array2<Complex64> {
        let mut u = dense::identity(4);
        for g in gates {
            match *g {
                Gate::Single { qubit, clifford } => {
                    dense::apply_single(&mut u, &clifford.matrix(), qubit)
                }
                Gate::Native(n) => dense::apply_uzz(&mut u, n.a, n.b),
            }
        }
        u
    }

    #[test]
    fn compiled_inverse_is_exact() {
        let g = NativeGate::uzz(0, 1).unwrap();
        let u = sequence_unitary(&invert_layer_native(g));
        // e^{+iZZπ/4}
        let expect = dense::uzz_matrix().mapv(|v| v.conj());
        assert!(dense::phase_insensitive_diff(&u, &expect) < 1e-13);
        let product = u.dot(&dense::uzz_matrix());
        assert!(dense::phase_insensitive_diff(&product, &dense::identity(4)) < 1e-13);
        // inverting the compiled inverse gives back the gate
        assert!(dense::phase_insensitive_diff(&dense::adjoint(&u), &dense::uzz_matrix()) < 1e-13);
    }

    #[test]
    fn zz_fixed_by_compiled_inverse() {
        let g = NativeGate::uzz(0, 1).unwrap();
        let zz: PauliOperator = "ZZ".parse().unwrap();
        let mut p = zz;
        for gate in invert_layer_native(g) {
            p = gate.conjugate(&p).unwrap();
        }
        assert_eq!(p, zz);
    }

    #[test]
    fn invalid_pair() {
        assert!(NativeGate::uzz(2, 2).is_err());
    }
}
