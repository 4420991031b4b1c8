//! Pauli transfer matrix algebra.
//!
//! A [`SuperOp`] stores `M_ij = (1/d) Tr(P_i M(P_j))` in the normalized Pauli
//! basis with `P_0 = I` and the basis index `sum_j kind_j 4^j`. Composition is
//! the matrix product, the dual is the transpose, and for unitary channels the
//! inverse is the transpose as well. Everything here is dense and exact; it is
//! the oracle the simulators and fits are checked against, so it is capped at
//! four qubits.

use ndarray::{s, Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::operators::{PauliKind, PauliOperator, SingleQubitClifford};
use crate::{Error, Result};

pub const MAX_DENSE_QUBITS: usize = 4;

/// Tolerance used by the trace-preservation and unitality checks.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SuperOp {
    n_qubits: usize,
    matrix: Array2<f64>,
}

fn check_dense(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            what: "dense superoperator",
            n_qubits,
            limit: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidParameter(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

impl SuperOp {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_dense(n_qubits)?;
        Ok(Self {
            n_qubits,
            matrix: Array2::eye(1 << (2 * n_qubits)),
        })
    }

    pub fn from_matrix(n_qubits: usize, matrix: Array2<f64>) -> Result<Self> {
        check_dense(n_qubits)?;
        let size = 1 << (2 * n_qubits);
        if matrix.dim() != (size, size) {
            return Err(Error::DimensionMismatch(format!(
                "expected {size}x{size} transfer matrix, got {:?}",
                matrix.dim()
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Diagonal transfer matrix (Pauli channels).
    pub fn from_diagonal(n_qubits: usize, diag: &[f64]) -> Result<Self> {
        Self::from_matrix(n_qubits, Array2::from_diag(&Array1::from(diag.to_vec())))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Hilbert-space dimension `d`.
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Number of Pauli basis elements, `d²`.
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit vs {}-qubit superoperator",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(())
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: self.matrix.dot(&other.matrix),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * factor,
        }
    }

    pub fn dual(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: self.matrix.t().to_owned(),
        }
    }

    /// `self ⊗ upper`, with `self` on the low qubits.
    pub fn tensor(&self, upper: &Self) -> Result<Self> {
        let n = self.n_qubits + upper.n_qubits;
        check_dense(n)?;
        let lo = self.size();
        let hi = upper.size();
        let mut m = Array2::zeros((lo * hi, lo * hi));
        for ((ib, jb), &vb) in upper.matrix.indexed_iter() {
            if vb == 0.0 {
                continue;
            }
            let mut block = m.slice_mut(s![ib * lo..(ib + 1) * lo, jb * lo..(jb + 1) * lo]);
            block.assign(&(&self.matrix * vb));
        }
        Self::from_matrix(n, m)
    }

    /// `self^{⊗count}`.
    pub fn tensor_power(&self, count: usize) -> Result<Self> {
        let mut out = self.clone();
        for _ in 1..count {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// First row is `(1, 0, …, 0)`.
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.matrix
            .row(0)
            .iter()
            .enumerate()
            .all(|(j, &v)| (v - if j == 0 { 1.0 } else { 0.0 }).abs() <= tol)
    }

    /// First column is `(1, 0, …, 0)ᵀ`.
    pub fn is_unital(&self, tol: f64) -> bool {
        self.matrix
            .column(0)
            .iter()
            .enumerate()
            .all(|(i, &v)| (v - if i == 0 { 1.0 } else { 0.0 }).abs() <= tol)
    }

    pub fn apply(&self, vector: &Array1<f64>) -> Array1<f64> {
        self.matrix.dot(vector)
    }

    /// Applies this `k`-qubit map to qubits `targets` of an `n`-qubit Pauli
    /// coefficient vector (length `4^n`), in place. `targets[m]` receives the
    /// map's local qubit `m`.
    pub fn apply_local(&self, state: &mut [f64], targets: &[usize]) -> Result<()> {
        if targets.len() != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit map applied to {} targets",
                self.n_qubits,
                targets.len()
            )));
        }
        let total = state.len();
        let local = self.size();
        let strides: Vec<usize> = targets.iter().map(|&q| 1usize << (2 * q)).collect();
        if strides.iter().any(|&s| s * 4 > total) {
            return Err(Error::DimensionMismatch("target qubit beyond state".into()));
        }
        let offsets: Vec<usize> = (0..local)
            .map(|l| {
                strides
                    .iter()
                    .enumerate()
                    .map(|(m, &st)| ((l >> (2 * m)) & 3) * st)
                    .sum()
            })
            .collect();
        let target_mask: usize = strides.iter().map(|&st| 3 * st).sum();
        let mut gathered = vec![0.0; local];
        for base in (0..total).filter(|b| b & target_mask == 0) {
            for (g, &off) in gathered.iter_mut().zip(&offsets) {
                *g = state[base + off];
            }
            for (i, &off) in offsets.iter().enumerate() {
                state[base + off] = self
                    .matrix
                    .row(i)
                    .iter()
                    .zip(&gathered)
                    .map(|(m, v)| m * v)
                    .sum();
            }
        }
        Ok(())
    }
}

/// Projector onto `span{I}`.
pub fn pi1(n_qubits: usize) -> Result<SuperOp> {
    check_dense(n_qubits)?;
    let size = 1 << (2 * n_qubits);
    let mut m = Array2::zeros((size, size));
    m[[0, 0]] = 1.0;
    SuperOp::from_matrix(n_qubits, m)
}

/// Projector onto the traceless operators.
pub fn pi2(n_qubits: usize) -> Result<SuperOp> {
    let mut m = SuperOp::identity(n_qubits)?.matrix;
    m[[0, 0]] = 0.0;
    SuperOp::from_matrix(n_qubits, m)
}

/// Noise channel description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelParams {
    /// `D(X) = (1-p) X + p Tr(X) I/d` on the whole slot.
    Depolarizing { p: f64 },
    /// Probabilities of the non-identity Paulis of a `k`-qubit register, in
    /// basis-index order (`4^k - 1` entries); the identity takes the rest. A
    /// one-qubit channel placed on a wider slot acts on every qubit.
    StochasticPauli { probs: Vec<f64> },
    /// `exp(-i θ/2 P)` for a Hermitian Pauli axis. A one-qubit axis placed on
    /// a wider slot rotates every qubit.
    UnitaryError { axis: PauliOperator, theta: f64 },
    /// Amplitude damping with decay probability `gamma` on every qubit.
    AmplitudeDamping { gamma: f64 },
    /// `Π₁ + E_n + E_u†` of the inner channel: same non-unital part, dual
    /// unital part.
    InverseHalf { of: Box<ChannelParams> },
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelParams::Depolarizing { p } => check_probability("depolarizing p", *p),
            ChannelParams::StochasticPauli { probs } => {
                let len = probs.len() + 1;
                if len < 4 || !len.is_power_of_two() || len.trailing_zeros() % 2 != 0 {
                    return Err(Error::InvalidParameter(format!(
                        "stochastic Pauli channel needs 4^k - 1 probabilities, got {}",
                        probs.len()
                    )));
                }
                for &p in probs {
                    check_probability("Pauli probability", p)?;
                }
                let total: f64 = probs.iter().sum();
                if total > 1.0 + 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "Pauli probabilities sum to {total} > 1"
                    )));
                }
                Ok(())
            }
            ChannelParams::UnitaryError { theta, .. } => {
                if theta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("rotation angle {theta}")))
                }
            }
            ChannelParams::AmplitudeDamping { gamma } => check_probability("gamma", *gamma),
            ChannelParams::InverseHalf { of } => of.validate(),
        }
    }

    /// Whether the channel is a stochastic Pauli channel (and so can be
    /// sampled as Pauli faults).
    pub fn is_pauli(&self) -> bool {
        match self {
            ChannelParams::Depolarizing { .. } | ChannelParams::StochasticPauli { .. } => true,
            ChannelParams::InverseHalf { of } => of.is_pauli(),
            ChannelParams::UnitaryError { .. } | ChannelParams::AmplitudeDamping { .. } => false,
        }
    }

    /// Fault distribution on an `n_qubits` slot: `(Pauli, probability)` pairs
    /// over all `4^n` Paulis in basis-index order.
    pub fn pauli_distribution(&self, n_qubits: usize) -> Result<Vec<(PauliOperator, f64)>> {
        self.validate()?;
        let count = 1usize << (2 * n_qubits);
        let probs: Vec<f64> = match self {
            ChannelParams::Depolarizing { p } => (0..count)
                .map(|i| p / count as f64 + if i == 0 { 1.0 - p } else { 0.0 })
                .collect(),
            ChannelParams::StochasticPauli { probs } => {
                let full = full_pauli_probs(probs);
                let k = arity(full.len());
                if k == n_qubits {
                    full
                } else if k == 1 {
                    (0..count)
                        .map(|i| (0..n_qubits).map(|q| full[(i >> (2 * q)) & 3]).product())
                        .collect()
                } else {
                    return Err(Error::DimensionMismatch(format!(
                        "{k}-qubit Pauli channel on a {n_qubits}-qubit slot"
                    )));
                }
            }
            ChannelParams::InverseHalf { of } if of.is_pauli() => {
                return of.pauli_distribution(n_qubits)
            }
            other => return Err(Error::NonPauliChannel(format!("{other:?}"))),
        };
        probs
            .into_iter()
            .enumerate()
            .map(|(i, p)| Ok((PauliOperator::from_index(n_qubits, i)?, p)))
            .collect()
    }
}

fn full_pauli_probs(non_identity: &[f64]) -> Vec<f64> {
    let rest: f64 = non_identity.iter().sum();
    std::iter::once((1.0 - rest).max(0.0))
        .chain(non_identity.iter().copied())
        .collect()
}

fn arity(len: usize) -> usize {
    len.trailing_zeros() as usize / 2
}

/// `(-1)^{[P_i, P_j] ≠ 0}` for phase-free Paulis given by basis index.
fn commutation_sign(i: usize, j: usize) -> f64 {
    // per qubit: two distinct non-identity Paulis anticommute
    let mut anti = 0;
    let (mut a, mut b) = (i, j);
    while a > 0 || b > 0 {
        let (ka, kb) = (a & 3, b & 3);
        if ka != 0 && kb != 0 && ka != kb {
            anti ^= 1;
        }
        a >>= 2;
        b >>= 2;
    }
    if anti == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Transfer matrix of the requested channel on `n_qubits`.
pub fn superop_of(params: &ChannelParams, n_qubits: usize) -> Result<SuperOp> {
    check_dense(n_qubits)?;
    params.validate()?;
    match params {
        ChannelParams::Depolarizing { p } => {
            let size = 1usize << (2 * n_qubits);
            let diag: Vec<f64> = (0..size).map(|i| if i == 0 { 1.0 } else { 1.0 - p }).collect();
            SuperOp::from_diagonal(n_qubits, &diag)
        }
        ChannelParams::StochasticPauli { probs } => {
            let full = full_pauli_probs(probs);
            let k = arity(full.len());
            let local_n = if k == n_qubits || k == 1 {
                k
            } else {
                return Err(Error::DimensionMismatch(format!(
                    "{k}-qubit Pauli channel on {n_qubits} qubits"
                )));
            };
            let size = full.len();
            let diag: Vec<f64> = (0..size)
                .map(|i| (0..size).map(|j| full[j] * commutation_sign(i, j)).sum())
                .collect();
            SuperOp::from_diagonal(local_n, &diag)?.tensor_power(n_qubits / local_n)
        }
        ChannelParams::UnitaryError { axis, theta } => {
            let k = axis.n_qubits();
            if k != n_qubits && k != 1 {
                return Err(Error::DimensionMismatch(format!(
                    "{k}-qubit rotation axis on {n_qubits} qubits"
                )));
            }
            let p = dense::pauli_matrix(&axis.unsigned());
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let u = dense::identity(p.nrows()).mapv(|v| v * c) + p.mapv(|v| v * Complex64::new(0.0, -s));
            superop_of_unitary(&u)?.tensor_power(n_qubits / k)
        }
        ChannelParams::AmplitudeDamping { gamma } => {
            let r = (1.0 - gamma).sqrt();
            let mut m = Array2::zeros((4, 4));
            m[[0, 0]] = 1.0;
            m[[1, 1]] = r;
            m[[2, 2]] = r;
            m[[3, 3]] = 1.0 - gamma;
            m[[3, 0]] = *gamma;
            SuperOp::from_matrix(1, m)?.tensor_power(n_qubits)
        }
        ChannelParams::InverseHalf { of } => inverse_half_channel(&superop_of(of, n_qubits)?),
    }
}

/// Transfer matrix of `ρ ↦ U ρ U†`.
pub fn superop_of_unitary(u: &Array2<Complex64>) -> Result<SuperOp> {
    let dim = u.nrows();
    if u.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
        return Err(Error::DimensionMismatch(format!("unitary of shape {:?}", u.dim())));
    }
    let n = dim.trailing_zeros() as usize;
    check_dense(n)?;
    let size = dim * dim;
    let paulis: Vec<PauliOperator> = (0..size)
        .map(|i| PauliOperator::from_index(n, i))
        .collect::<Result<_>>()?;
    let ud = dense::adjoint(u);
    let mut m = Array2::zeros((size, size));
    for (j, pj) in paulis.iter().enumerate() {
        let image = u.dot(&dense::pauli_matrix(pj)).dot(&ud);
        for (i, pi) in paulis.iter().enumerate() {
            // Tr(P_i A) using the monomial structure of P_i
            let pm = dense::pauli_matrix(pi);
            let mut tr = Complex64::new(0.0, 0.0);
            for col in 0..dim {
                let row = col ^ pi.x_bits() as usize;
                tr += pm[[row, col]] * image[[col, row]];
            }
            m[[i, j]] = tr.re / dim as f64;
        }
    }
    SuperOp::from_matrix(n, m)
}

/// Exact transfer matrix of a single-qubit Clifford (a signed permutation).
pub fn clifford_superop(c: SingleQubitClifford) -> SuperOp {
    let mut m = Array2::zeros((4, 4));
    for kind in PauliKind::ALL {
        let (image, negative) = c.image(kind);
        m[[image.index(), kind.index()]] = if negative { -1.0 } else { 1.0 };
    }
    SuperOp { n_qubits: 1, matrix: m }
}

/// Exact transfer matrix of `U_zz` on a local pair.
pub fn uzz_superop() -> SuperOp {
    let mut m = Array2::zeros((16, 16));
    for j in 0..16 {
        let p = PauliOperator::from_index(2, j).unwrap();
        let image = p.conjugate_by_uzz_unchecked(0, 1);
        m[[image.index(), j]] = if image.is_negative() { -1.0 } else { 1.0 };
    }
    SuperOp { n_qubits: 2, matrix: m }
}

/// The 24 single-qubit Clifford channels.
pub fn single_qubit_clifford_group() -> Vec<SuperOp> {
    SingleQubitClifford::all().map(clifford_superop).collect()
}

pub fn dual(e: &SuperOp) -> SuperOp {
    e.dual()
}

fn traceless_dim(e: &SuperOp) -> f64 {
    (e.size() - 1) as f64
}

/// `f(E) = (1/D) Tr(Π₂ E)`.
pub fn f_value(e: &SuperOp) -> f64 {
    let tr: f64 = e.matrix.diag().iter().skip(1).sum();
    tr / traceless_dim(e)
}

/// Process (entanglement) fidelity to the identity, `(1 + Σ_{i>0} E_ii)/d²`.
pub fn process_fidelity(e: &SuperOp) -> f64 {
    let tr: f64 = e.matrix.diag().iter().skip(1).sum();
    (1.0 + tr) / e.size() as f64
}

/// `u(E) = (1/D) Tr(Π₂ E† Π₂ E)`: sum of squares of the traceless block.
pub fn unitarity(e: &SuperOp) -> f64 {
    let block = e.matrix.slice(s![1.., 1..]);
    block.iter().map(|v| v * v).sum::<f64>() / traceless_dim(e)
}

/// `(1/D) Tr(Π₂ E_inv Π₂ E)`: the decay rate when the inverse half carries
/// `E_inv`. Equals [`unitarity`] for `E_inv = E†`.
pub fn decay_rate(e: &SuperOp, e_inv: &SuperOp) -> Result<f64> {
    e.check_same(e_inv)?;
    let a = e_inv.matrix.slice(s![1.., 1..]);
    let b = e.matrix.slice(s![1.., 1..]);
    // Tr(A B) = Σ_ij A_ij B_ji
    let tr: f64 = a
        .indexed_iter()
        .map(|((i, j), v)| v * b[[j, i]])
        .sum();
    Ok(tr / traceless_dim(e))
}

/// `E_T = (1/|G|) Σ g⁻¹ E g` for unitary channels `g` (so `g⁻¹ = gᵀ`).
pub fn twirl_over_group(e: &SuperOp, group: &[SuperOp]) -> Result<SuperOp> {
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let mut acc = Array2::zeros(e.matrix.dim());
    for g in group {
        e.check_same(g)?;
        acc = acc + g.matrix.t().dot(&e.matrix).dot(&g.matrix);
    }
    SuperOp::from_matrix(e.n_qubits, acc / group.len() as f64)
}

/// `T_1 = E_T`, `T_{l+1} = (E_inv T_l E)_T`, with `E_inv = E†` by default.
pub fn t_sequence(e: &SuperOp, e_inv: Option<&SuperOp>, group: &[SuperOp], l: usize) -> Result<SuperOp> {
    if l < 1 {
        return Err(Error::InvalidParameter("sequence length must be ≥ 1".into()));
    }
    let dual_e;
    let inv = match e_inv {
        Some(inv) => {
            e.check_same(inv)?;
            inv
        }
        None => {
            dual_e = e.dual();
            &dual_e
        }
    };
    let mut t = twirl_over_group(e, group)?;
    for _ in 1..l {
        t = twirl_over_group(&inv.compose(&t)?.compose(e)?, group)?;
    }
    Ok(t)
}

/// Process-fidelity bounds `((1 + D u)/d², (1 + D √u)/d²)` implied by the
/// unitarity of a stochastic Pauli channel on a `dim`-dimensional system.
/// Outside that channel class the bounds are not guaranteed.
pub fn fidelity_bounds(u: f64, dim: usize) -> Result<(f64, f64)> {
    check_probability("unitarity", u)?;
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dimension {dim}")));
    }
    let d2 = (dim * dim) as f64;
    let big_d = d2 - 1.0;
    Ok(((1.0 + big_d * u) / d2, (1.0 + big_d * u.sqrt()) / d2))
}

/// `(E_n, E_u) = (Π₂ E Π₁, Π₂ E Π₂)`.
pub fn nonunital_split(e: &SuperOp) -> (SuperOp, SuperOp) {
    let mut nonunital = Array2::zeros(e.matrix.dim());
    nonunital
        .slice_mut(s![1.., 0])
        .assign(&e.matrix.slice(s![1.., 0]));
    let mut unital = Array2::zeros(e.matrix.dim());
    unital
        .slice_mut(s![1.., 1..])
        .assign(&e.matrix.slice(s![1.., 1..]));
    (
        SuperOp { n_qubits: e.n_qubits, matrix: nonunital },
        SuperOp { n_qubits: e.n_qubits, matrix: unital },
    )
}

/// `E' = Π₁ + E_n + E_u†`: the channel assumed after inverse layers when
/// `E` is not unital.
pub fn inverse_half_channel(e: &SuperOp) -> Result<SuperOp> {
    let (nonunital, unital) = nonunital_split(e);
    pi1(e.n_qubits)?.add(&nonunital)?.add(&unital.dual())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Closed-form unitarity of `N` parallel two-qubit depolarizing channels.
///
/// Sums over the pair-weight `w` of the Pauli: there are `15^w C(N,w)` of
/// them, each contracted by `Σ_j C(N-w,j)(1-p)^{N-j} p^j`. The normalization
/// is the number of non-identity Paulis on `2N` qubits, `16^N - 1`.
pub fn depolarizing_tensor_unitarity(p: f64, pairs: usize) -> Result<f64> {
    check_probability("depolarizing p", p)?;
    if pairs == 0 {
        return Err(Error::InvalidParameter("need at least one qubit pair".into()));
    }
    let n = pairs;
    let mut total = 0.0;
    for w in 1..=n {
        let contraction: f64 = (0..=n - w)
            .map(|j| binomial(n - w, j) * (1.0 - p).powi((n - j) as i32) * p.powi(j as i32))
            .sum();
        total += 15f64.powi(w as i32) * binomial(n, w) * contraction * contraction;
    }
    Ok(total / (16f64.powi(n as i32) - 1.0))
}

/// Two-qubit depolarizing parameter whose `N`-pair tensor product has
/// unitarity `target`. Bisection: the closed form decreases monotonically on
/// `p ∈ [0, 1]`.
pub fn depolarizing_for_unitarity(target: f64, pairs: usize) -> Result<f64> {
    check_probability("target unitarity", target)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if target > depolarizing_tensor_unitarity(lo, pairs)? || target < depolarizing_tensor_unitarity(hi, pairs)? {
        return Err(Error::InvalidParameter(format!("unitarity {target} unreachable")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if depolarizing_tensor_unitarity(mid, pairs)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Normalized-basis vectors for a measurement effect and an input state.
#[derive(Clone, Debug, PartialEq)]
pub struct Spam {
    pub effect: Array1<f64>,
    pub state: Array1<f64>,
}

impl Spam {
    /// `E = ρ = |0…0⟩⟨0…0|`.
    pub fn ideal(n_qubits: usize) -> Result<Self> {
        check_dense(n_qubits)?;
        let size = 1usize << (2 * n_qubits);
        let norm = 1.0 / ((1usize << n_qubits) as f64).sqrt();
        // Tr(P ρ) = 1 exactly when P ∈ {I, Z}^n
        let v = Array1::from_iter((0..size).map(|i| {
            let diagonal = (0..n_qubits).all(|q| matches!((i >> (2 * q)) & 3, 0 | 3));
            if diagonal {
                norm
            } else {
                0.0
            }
        }));
        Ok(Self {
            effect: v.clone(),
            state: v,
        })
    }

    /// `⟨⟨E| M |ρ⟩⟩`.
    pub fn expectation(&self, m: &SuperOp) -> f64 {
        self.effect.dot(&m.apply(&self.state))
    }
}

/// Constants of the survival law `p(L) = A f u^{L-1} + B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayLawParams {
    pub a: f64,
    pub b: f64,
    pub f: f64,
    pub u: f64,
}

impl DecayLawParams {
    pub fn survival(&self, length: usize) -> f64 {
        self.a * self.f * self.u.powi(length as i32 - 1) + self.b
    }
}

/// Predicted decay for error channel `e` (and `e_inv` on the inverse half,
/// `e†` when `None`).
pub fn decay_law(e: &SuperOp, e_inv: Option<&SuperOp>, spam: &Spam) -> Result<DecayLawParams> {
    let n = e.n_qubits;
    let u = match e_inv {
        Some(inv) => decay_rate(e, inv)?,
        None => unitarity(e),
    };
    Ok(DecayLawParams {
        a: spam.expectation(&pi2(n)?),
        b: spam.expectation(&pi1(n)?),
        f: f_value(e),
        u,
    })
}

/// Random stochastic Pauli channel: symmetric Dirichlet weights over all
/// `4^n` Paulis scaled by one half, with the other half on the identity.
pub fn random_stochastic_pauli<R: Rng + ?Sized>(rng: &mut R, n_qubits: usize) -> ChannelParams {
    let count = 1usize << (2 * n_qubits);
    let draws: Vec<f64> = (0..count).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    ChannelParams::StochasticPauli {
        probs: draws[1..].iter().map(|w| 0.5 * w / total).collect(),
    }
}
