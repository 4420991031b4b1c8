//! Exact algebra of n-qubit Paulis, single-qubit Cliffords and the native
//! `U_zz` gate, plus a Clifford tableau for frame tracking and stabilizer
//! simulation.

mod clifford;
mod native;
mod pauli;
mod tableau;

pub use clifford::{sample_clifford, Elementary, SignedPauli, SingleQubitClifford, CLIFFORD_COUNT};
pub use native::{invert_layer_native, Gate, NativeGate, NativeGateKind};
pub use pauli::{pauli_multiply, sample_pauli, PauliKind, PauliOperator, MAX_QUBITS};
pub use tableau::StabilizerTableau;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;
    use proptest::prelude::*;

    fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliOperator> {
        (0..4usize.pow(n as u32), 0u8..4)
            .prop_map(move |(idx, ph)| PauliOperator::from_index(n, idx).unwrap().with_phase(ph))
    }

    proptest! {
        #[test]
        fn clifford_conjugation_is_an_automorphism(
            p in pauli_strategy(2),
            q in pauli_strategy(2),
            c in 0usize..CLIFFORD_COUNT,
            qubit in 0usize..2,
        ) {
            let c = SingleQubitClifford::from_index(c).unwrap();
            let lhs = p.multiply(&q).unwrap().conjugate_by_clifford(c, qubit).unwrap();
            let rhs = p
                .conjugate_by_clifford(c, qubit)
                .unwrap()
                .multiply(&q.conjugate_by_clifford(c, qubit).unwrap())
                .unwrap();
            prop_assert_eq!(lhs, rhs);

            let u = dense::embed_single(&c.matrix(), qubit, 2);
            let expect = dense::conjugate(&u, &dense::pauli_matrix(&p));
            let got = dense::pauli_matrix(&p.conjugate_by_clifford(c, qubit).unwrap());
            prop_assert!(dense::max_abs_diff(&expect, &got) < 1e-12);
        }

        #[test]
        fn uzz_conjugation_is_an_automorphism(p in pauli_strategy(3), q in pauli_strategy(3)) {
            let lhs = p.multiply(&q).unwrap().conjugate_by_uzz(2, 0).unwrap();
            let rhs = p
                .conjugate_by_uzz(2, 0)
                .unwrap()
                .multiply(&q.conjugate_by_uzz(2, 0).unwrap())
                .unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn product_with_inverse_is_identity(p in pauli_strategy(4)) {
            prop_assert!(p.multiply(&p.inverse()).unwrap().is_identity());
        }
    }
}
