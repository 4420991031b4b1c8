use rand::Rng;

use super::{Gate, PauliKind, PauliOperator, MAX_QUBITS};
use crate::{Error, Result};

/// Clifford tableau: row `j` holds `U X_j U†`, row `n + j` holds `U Z_j U†`.
///
/// Read as a state, the tableau describes `U|0…0⟩` with the Z-images as
/// stabilizers and the X-images as destabilizers, which is all the
/// measurement routine needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n_qubits: usize,
    rows: Vec<PauliOperator>,
}

impl StabilizerTableau {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                what: "stabilizer tableau",
                n_qubits,
                limit: MAX_QUBITS,
            });
        }
        let mut rows = Vec::with_capacity(2 * n_qubits);
        for kind in [PauliKind::X, PauliKind::Z] {
            for q in 0..n_qubits {
                rows.push(PauliOperator::single(n_qubits, q, kind)?);
            }
        }
        Ok(Self { n_qubits, rows })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_image(&self, qubit: usize) -> &PauliOperator {
        &self.rows[qubit]
    }

    pub fn z_image(&self, qubit: usize) -> &PauliOperator {
        &self.rows[self.n_qubits + qubit]
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        if gate.max_qubit() >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: gate.max_qubit(),
                n_qubits: self.n_qubits,
            });
        }
        for row in self.rows.iter_mut() {
            *row = gate.conjugate_unchecked(row);
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Appends a Pauli gate: rows anticommuting with it change sign.
    pub fn apply_pauli(&mut self, pauli: &PauliOperator) -> Result<()> {
        if pauli.n_qubits() != self.n_qubits {
            return Err(Error::QubitCountMismatch(self.n_qubits, pauli.n_qubits()));
        }
        for row in self.rows.iter_mut() {
            if !row.commutes_with(pauli) {
                *row = row.with_phase((row.phase_exponent() + 2) % 4);
            }
        }
        Ok(())
    }

    /// `U p U†`.
    pub fn conjugate(&self, p: &PauliOperator) -> Result<PauliOperator> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::QubitCountMismatch(self.n_qubits, p.n_qubits()));
        }
        // σ_j = i^{x_j z_j} X_j^{x_j} Z_j^{z_j}
        let phase = p.phase_exponent() as u32 + (p.x_bits() & p.z_bits()).count_ones();
        let mut out = PauliOperator::identity(self.n_qubits).with_phase((phase % 4) as u8);
        for q in 0..self.n_qubits {
            if (p.x_bits() >> q) & 1 == 1 {
                out = out.mul_unchecked(self.x_image(q));
            }
            if (p.z_bits() >> q) & 1 == 1 {
                out = out.mul_unchecked(self.z_image(q));
            }
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        self.pauli_frame().is_some_and(|p| p.unsigned() == p && p.x_bits() == 0 && p.z_bits() == 0)
    }

    /// If the tableau is a Pauli operator `P` (up to global phase), returns
    /// `P` with phase `+1`.
    pub fn pauli_frame(&self) -> Option<PauliOperator> {
        let n = self.n_qubits;
        let mut frame = PauliOperator::identity(n);
        for q in 0..n {
            let xi = self.x_image(q);
            let zi = self.z_image(q);
            let x_ok = xi.unsigned() == PauliOperator::single(n, q, PauliKind::X).ok()?;
            let z_ok = zi.unsigned() == PauliOperator::single(n, q, PauliKind::Z).ok()?;
            if !x_ok || !z_ok || xi.phase_exponent() % 2 == 1 || zi.phase_exponent() % 2 == 1 {
                return None;
            }
            // P X_q P = -X_q iff P has a Z component on q, and vice versa
            let kind = PauliKind::from_bits(zi.is_negative(), xi.is_negative());
            frame.set_kind(q, kind);
        }
        Some(frame)
    }

    /// Measures `Z_qubit` on the state `U|0…0⟩`, collapsing the tableau.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> bool {
        let n = self.n_qubits;
        let bit = 1u64 << qubit;
        let pivot = (n..2 * n).find(|&r| self.rows[r].x_bits() & bit != 0);
        match pivot {
            Some(p) => {
                let pivot_row = self.rows[p];
                for r in 0..2 * n {
                    if r != p && r != p - n && self.rows[r].x_bits() & bit != 0 {
                        self.rows[r] = self.rows[r].mul_unchecked(&pivot_row);
                    }
                }
                let outcome: bool = rng.random();
                self.rows[p - n] = pivot_row;
                let z = PauliOperator::single(n, qubit, PauliKind::Z).unwrap();
                self.rows[p] = if outcome { z.with_phase(2) } else { z };
                outcome
            }
            None => {
                let mut acc = PauliOperator::identity(n);
                for d in 0..n {
                    if self.rows[d].x_bits() & bit != 0 {
                        acc = acc.mul_unchecked(&self.rows[n + d]);
                    }
                }
                acc.is_negative()
            }
        }
    }

    /// Measures every qubit in the computational basis; bit `q` of the
    /// result is qubit `q`'s outcome.
    pub fn measure_all<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        (0..self.n_qubits).fold(0, |acc, q| acc | ((self.measure(q, rng) as u64) << q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{invert_layer_native, sample_clifford, NativeGate, SingleQubitClifford};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_gates(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Gate> {
        (0..count)
            .map(|i| {
                if i % 3 == 2 {
                    let a = rng.random_range(0..n);
                    let b = (a + rng.random_range(1..n)) % n;
                    Gate::Native(NativeGate::uzz(a, b).unwrap())
                } else {
                    Gate::Single {
                        qubit: rng.random_range(0..n),
                        clifford: sample_clifford(rng),
                    }
                }
            })
            .collect()
    }

    fn inverse_gates(gates: &[Gate]) -> Vec<Gate> {
        gates
            .iter()
            .rev()
            .flat_map(|g| match *g {
                Gate::Single { qubit, clifford } => vec![Gate::Single {
                    qubit,
                    clifford: clifford.inverse(),
                }],
                Gate::Native(n) => invert_layer_native(n).to_vec(),
            })
            .collect()
    }

    #[test]
    fn circuit_then_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 3, 6] {
            let gates = random_gates(&mut rng, n, 60);
            let mut t = StabilizerTableau::identity(n).unwrap();
            t.apply_all(&gates).unwrap();
            assert!(!t.is_identity());
            t.apply_all(&inverse_gates(&gates)).unwrap();
            assert!(t.is_identity());
        }
    }

    #[test]
    fn conjugation_matches_sequential_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 4;
        let gates = random_gates(&mut rng, n, 30);
        let mut t = StabilizerTableau::identity(n).unwrap();
        t.apply_all(&gates).unwrap();
        for idx in [1usize, 7, 38, 200, 255] {
            let p = PauliOperator::from_index(n, idx).unwrap().with_phase((idx % 4) as u8);
            let mut q = p;
            for g in &gates {
                q = g.conjugate(&q).unwrap();
            }
            assert_eq!(t.conjugate(&p).unwrap(), q);
        }
    }

    #[test]
    fn pauli_frame_extraction() {
        let n = 3;
        let mut t = StabilizerTableau::identity(n).unwrap();
        let p: PauliOperator = "XYZ".parse().unwrap();
        for q in 0..n {
            t.apply(&Gate::Single {
                qubit: q,
                clifford: SingleQubitClifford::pauli(p.kind(q)),
            })
            .unwrap();
        }
        assert_eq!(t.pauli_frame(), Some(p));
        let mut t2 = StabilizerTableau::identity(n).unwrap();
        t2.apply_pauli(&p).unwrap();
        assert_eq!(t2, t);
        t.apply(&Gate::Single {
            qubit: 0,
            clifford: SingleQubitClifford::hadamard(),
        })
        .unwrap();
        assert_eq!(t.pauli_frame(), None);
    }

    #[test]
    fn measurement_of_basis_and_superposition_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = StabilizerTableau::identity(3).unwrap();
        t.apply_pauli(&"XIX".parse().unwrap()).unwrap();
        assert_eq!(t.clone().measure_all(&mut rng), 0b101);

        // H on qubit 0 then UZZ: outcomes of qubit 0 are uniform, qubit 1 stays 0
        let mut ones = 0;
        for _ in 0..2000 {
            let mut t = StabilizerTableau::identity(2).unwrap();
            t.apply(&Gate::Single {
                qubit: 0,
                clifford: SingleQubitClifford::hadamard(),
            })
            .unwrap();
            t.apply(&Gate::Native(NativeGate::uzz(0, 1).unwrap())).unwrap();
            let m = t.measure_all(&mut rng);
            assert_eq!(m & 0b10, 0);
            ones += (m & 1) as usize;
        }
        assert!((ones as f64 - 1000.0).abs() < 5.0 * 500f64.sqrt());
    }

    #[test]
    fn repeated_measurement_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let gates = random_gates(&mut rng, 5, 40);
            let mut t = StabilizerTableau::identity(5).unwrap();
            t.apply_all(&gates).unwrap();
            let first = t.measure_all(&mut rng);
            assert_eq!(t.measure_all(&mut rng), first);
        }
    }
}
