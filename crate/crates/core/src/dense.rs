//! Small dense complex-matrix helpers.
//!
//! Basis convention: computational basis index `b = sum_j bit_j << j`, i.e.
//! qubit 0 is the least significant bit. Local two-qubit matrices use the
//! same convention on the ordered pair `(a, b)`: index `bit_a + 2 * bit_b`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::operators::{NativeGate, PauliOperator, SingleQubitClifford};

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Array2<Complex64> {
    Array2::from_diag_elem(dim, c64(1.0, 0.0))
}

pub fn adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|v| v.conj())
}

/// `u m u†`
pub fn conjugate(u: &Array2<Complex64>, m: &Array2<Complex64>) -> Array2<Complex64> {
    u.dot(m).dot(&adjoint(u))
}

pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Distance between `a` and `b` after removing the best global phase.
pub fn phase_insensitive_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    if overlap.norm() < 1e-300 {
        return max_abs_diff(a, b);
    }
    let phase = overlap / overlap.norm();
    let rotated = a.mapv(|v| v * phase);
    max_abs_diff(&rotated, b)
}

pub fn trace(m: &Array2<Complex64>) -> Complex64 {
    m.diag().sum()
}

/// Dense matrix of a Pauli operator including its phase.
pub fn pauli_matrix(p: &PauliOperator) -> Array2<Complex64> {
    let dim = 1usize << p.n_qubits();
    let x = p.x_bits() as usize;
    let z = p.z_bits() as usize;
    let base = i_pow(p.phase_exponent() as u32 + (x & z).count_ones());
    let mut m = Array2::zeros((dim, dim));
    for col in 0..dim {
        let sign = if (z & col).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        m[[col ^ x, col]] = base * sign;
    }
    m
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => c64(1.0, 0.0),
        1 => c64(0.0, 1.0),
        2 => c64(-1.0, 0.0),
        _ => c64(0.0, -1.0),
    }
}

pub fn hadamard() -> Array2<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Array2::from_shape_vec((2, 2), vec![c64(h, 0.0), c64(h, 0.0), c64(h, 0.0), c64(-h, 0.0)])
        .unwrap()
}

pub fn phase_gate() -> Array2<Complex64> {
    Array2::from_shape_vec((2, 2), vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 1.0)])
        .unwrap()
}

/// `exp(-i π/4 Z⊗Z)` on a local pair.
pub fn uzz_matrix() -> Array2<Complex64> {
    let phase = c64(0.0, -std::f64::consts::FRAC_PI_4).exp();
    let mut m = Array2::zeros((4, 4));
    for b in 0..4usize {
        let parity = (b & 1) ^ (b >> 1);
        m[[b, b]] = if parity == 0 { phase } else { phase.conj() };
    }
    m
}

/// Embeds a one-qubit matrix acting on `qubit` into an `n`-qubit register.
pub fn embed_single(m: &Array2<Complex64>, qubit: usize, n_qubits: usize) -> Array2<Complex64> {
    let dim = 1usize << n_qubits;
    let mut out = Array2::zeros((dim, dim));
    let bit = 1usize << qubit;
    for col in 0..dim {
        let cb = (col >> qubit) & 1;
        for rb in 0..2 {
            let row = (col & !bit) | (rb << qubit);
            out[[row, col]] = m[[rb, cb]];
        }
    }
    out
}

/// Embeds a local two-qubit matrix acting on the ordered pair `(a, b)`.
pub fn embed_pair(m: &Array2<Complex64>, a: usize, b: usize, n_qubits: usize) -> Array2<Complex64> {
    let dim = 1usize << n_qubits;
    let mut out = Array2::zeros((dim, dim));
    let clear = !((1usize << a) | (1usize << b));
    for col in 0..dim {
        let local_col = ((col >> a) & 1) | (((col >> b) & 1) << 1);
        for local_row in 0..4 {
            let row = (col & clear) | ((local_row & 1) << a) | ((local_row >> 1) << b);
            out[[row, col]] = m[[local_row, local_col]];
        }
    }
    out
}

/// Left-multiplies `target` in place by a one-qubit matrix on `qubit`.
pub fn apply_single(target: &mut Array2<Complex64>, m: &Array2<Complex64>, qubit: usize) {
    let dim = target.nrows();
    let bit = 1usize << qubit;
    let (m00, m01, m10, m11) = (m[[0, 0]], m[[0, 1]], m[[1, 0]], m[[1, 1]]);
    for row0 in (0..dim).filter(|r| r & bit == 0) {
        let row1 = row0 | bit;
        for col in 0..target.ncols() {
            let a = target[[row0, col]];
            let b = target[[row1, col]];
            target[[row0, col]] = m00 * a + m01 * b;
            target[[row1, col]] = m10 * a + m11 * b;
        }
    }
}

/// Left-multiplies `target` in place by `exp(-i π/4 Z_a Z_b)` (diagonal).
pub fn apply_uzz(target: &mut Array2<Complex64>, a: usize, b: usize) {
    let phase = c64(0.0, -std::f64::consts::FRAC_PI_4).exp();
    for (row, mut line) in target.rows_mut().into_iter().enumerate() {
        let parity = ((row >> a) ^ (row >> b)) & 1;
        let f = if parity == 0 { phase } else { phase.conj() };
        line.mapv_inplace(|v| v * f);
    }
}

pub fn clifford_matrix(c: SingleQubitClifford) -> Array2<Complex64> {
    c.matrix()
}

pub fn native_matrix(_gate: &NativeGate) -> Array2<Complex64> {
    uzz_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_matches_in_place_application() {
        let h = hadamard();
        let mut target = identity(8);
        apply_single(&mut target, &h, 1);
        assert!(max_abs_diff(&target, &embed_single(&h, 1, 3)) < 1e-14);

        let mut target = identity(8);
        apply_uzz(&mut target, 2, 0);
        assert!(max_abs_diff(&target, &embed_pair(&uzz_matrix(), 2, 0, 3)) < 1e-14);
    }

    #[test]
    fn uzz_is_exponential_of_zz() {
        // cos(π/4) I - i sin(π/4) ZZ
        let zz = pauli_matrix(&"ZZ".parse().unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = identity(4).mapv(|v| v * s) + zz.mapv(|v| v * c64(0.0, -s));
        assert!(max_abs_diff(&expect, &uzz_matrix()) < 1e-14);
    }
}
