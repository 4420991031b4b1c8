use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PauliKind, PauliOperator};
use crate::{dense, Error, Result};

/// Number of single-qubit Clifford elements (modulo global phase).
pub const CLIFFORD_COUNT: usize = 24;

/// Generators used to spell every table entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elementary {
    H,
    S,
}

/// Signed image of a Pauli: `(kind, negative)`.
pub type SignedPauli = (PauliKind, bool);

/// Images of I, X, Y, Z in that order.
type Action = [SignedPauli; 4];

struct Table {
    actions: Vec<Action>,
    words: Vec<Vec<Elementary>>,
    compose: Vec<[u8; CLIFFORD_COUNT]>,
    inverse: Vec<u8>,
}

fn single(kind: PauliKind, negative: bool) -> PauliOperator {
    let p = PauliOperator::single(1, 0, kind).unwrap();
    if negative {
        p.with_phase(2)
    } else {
        p
    }
}

/// Completes an action from the images of X and Z using `Y = i X Z`.
fn complete(x: SignedPauli, z: SignedPauli) -> Action {
    let prod = single(x.0, x.1).mul_unchecked(&single(z.0, z.1));
    let y = prod.with_phase((prod.phase_exponent() + 1) % 4);
    debug_assert!(y.phase_exponent() % 2 == 0, "X and Z images must anticommute");
    [(PauliKind::I, false), x, (y.kind(0), y.is_negative()), z]
}

/// `outer ∘ inner`: image under `inner` first, then `outer`.
fn chain(outer: &Action, inner: &Action) -> Action {
    let mut out = *inner;
    for entry in out.iter_mut() {
        let (kind, neg) = outer[entry.0.index()];
        *entry = (kind, neg ^ entry.1);
    }
    out
}

fn key(action: &Action) -> (SignedPauli, SignedPauli) {
    (action[1], action[3])
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        use PauliKind::*;
        let identity = complete((X, false), (Z, false));
        let h = complete((Z, false), (X, false));
        let s = complete((Y, false), (Z, false));

        let mut actions = vec![identity];
        let mut words = vec![Vec::new()];
        let mut index: HashMap<_, usize> = HashMap::from([(key(&identity), 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(cur) = queue.pop_front() {
            for (gen, action) in [(Elementary::H, &h), (Elementary::S, &s)] {
                let next = chain(action, &actions[cur]);
                if index.contains_key(&key(&next)) {
                    continue;
                }
                index.insert(key(&next), actions.len());
                let mut word = words[cur].clone();
                word.push(gen);
                actions.push(next);
                words.push(word);
                queue.push_back(actions.len() - 1);
            }
        }
        assert_eq!(actions.len(), CLIFFORD_COUNT);

        let compose: Vec<[u8; CLIFFORD_COUNT]> = actions
            .iter()
            .map(|outer| {
                let mut row = [0u8; CLIFFORD_COUNT];
                for (j, inner) in actions.iter().enumerate() {
                    row[j] = index[&key(&chain(outer, inner))] as u8;
                }
                row
            })
            .collect();
        let inverse = (0..CLIFFORD_COUNT)
            .map(|a| (0..CLIFFORD_COUNT).find(|&b| compose[a][b] == 0).unwrap() as u8)
            .collect();
        Table {
            actions,
            words,
            compose,
            inverse,
        }
    })
}

/// One of the 24 single-qubit Clifford unitaries, identified by its index in
/// a fixed table spelled as words in `H` and `S`. Index 0 is the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SingleQubitClifford(u8);

impl SingleQubitClifford {
    pub fn from_index(index: usize) -> Result<Self> {
        if index >= CLIFFORD_COUNT {
            return Err(Error::InvalidParameter(format!(
                "Clifford index {index} outside [0, {CLIFFORD_COUNT})"
            )));
        }
        Ok(Self(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (0..CLIFFORD_COUNT as u8).map(Self)
    }

    pub fn identity() -> Self {
        Self(0)
    }

    fn find(x: SignedPauli, z: SignedPauli) -> Self {
        let t = table();
        let idx = t
            .actions
            .iter()
            .position(|a| a[1] == x && a[3] == z)
            .expect("valid symplectic action");
        Self(idx as u8)
    }

    pub fn hadamard() -> Self {
        Self::find((PauliKind::Z, false), (PauliKind::X, false))
    }

    /// The phase gate `S = diag(1, i)`.
    pub fn phase() -> Self {
        Self::find((PauliKind::Y, false), (PauliKind::Z, false))
    }

    /// The Clifford equal (up to global phase) to the given Pauli.
    pub fn pauli(kind: PauliKind) -> Self {
        let id = table().actions[0];
        let p = single(kind, false);
        let mut images = [(PauliKind::I, false); 2];
        for (slot, k) in images.iter_mut().zip([PauliKind::X, PauliKind::Z]) {
            let neg = !p.commutes_with(&single(k, false));
            *slot = (id[k.index()].0, neg);
        }
        Self::find(images[0], images[1])
    }

    /// Signed image `c P c†` of a single-qubit Pauli.
    pub fn image(self, kind: PauliKind) -> SignedPauli {
        table().actions[self.index()][kind.index()]
    }

    /// Unitary product `self · other` (`other` applied first).
    pub fn compose(self, other: Self) -> Self {
        Self(table().compose[self.index()][other.index()])
    }

    /// `other` applied after `self`.
    pub fn then(self, other: Self) -> Self {
        other.compose(self)
    }

    pub fn inverse(self) -> Self {
        Self(table().inverse[self.index()])
    }

    pub fn is_pauli(self) -> bool {
        PauliKind::ALL.iter().any(|&k| Self::pauli(k) == self)
    }

    /// Generator word in application order.
    pub fn word(self) -> &'static [Elementary] {
        &table().words[self.index()]
    }

    /// A 2×2 unitary representative (global phase fixed by the word).
    pub fn matrix(self) -> Array2<Complex64> {
        let mut m = dense::identity(2);
        for g in self.word() {
            let gate = match g {
                Elementary::H => dense::hadamard(),
                Elementary::S => dense::phase_gate(),
            };
            m = gate.dot(&m);
        }
        m
    }
}

impl TryFrom<u8> for SingleQubitClifford {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Self::from_index(v as usize)
    }
}

impl From<SingleQubitClifford> for u8 {
    fn from(c: SingleQubitClifford) -> u8 {
        c.0
    }
}

impl fmt::Display for SingleQubitClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

pub fn sample_clifford<R: Rng + ?Sized>(rng: &mut R) -> SingleQubitClifford {
    SingleQubitClifford(rng.random_range(0..CLIFFORD_COUNT as u8))
}
