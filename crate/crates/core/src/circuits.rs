//! Mirror-circuit construction.
//!
//! A layer is a random single-qubit Clifford on every qubit followed by
//! `U_zz` on every pair of a random perfect matching. The mirrored circuit
//! applies `L` layers and then their exact inverses in reverse order, with
//! each inverse `U_zz` compiled as `X_a U_zz X_a`. Gates are organised in
//! rounds: a single-qubit round, an entangling round, and so on, closing with
//! one final single-qubit round, so there are `2L` entangling rounds and
//! `2L + 1` single-qubit rounds.
//!
//! Pauli randomization inserts a random Pauli `R_k` right before entangling
//! round `k` and its pushed-through partner `U R_k U†` right after it; both
//! are merged into the neighbouring single-qubit rounds, so the executed
//! circuit contains only Cliffords and `U_zz` gates. A final random Pauli
//! before measurement moves the ideal outcome to a random bitstring.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::operators::{
    sample_clifford, sample_pauli, Elementary, Gate, NativeGate, PauliKind, PauliOperator,
    SingleQubitClifford, StabilizerTableau, MAX_QUBITS,
};
use crate::{Error, Result};

/// Circuit JSON schema version.
pub const CIRCUIT_FORMAT_VERSION: u32 = 1;

/// Largest register for dense unitaries.
pub const MAX_UNITARY_QUBITS: usize = 8;

/// Perfect matching as ordered pairs `(a, b)`; `a` is the lower-indexed
/// qubit picked first by the sampler.
pub type Matching = Vec<(usize, usize)>;

fn check_even(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits % 2 != 0 {
        return Err(Error::OddQubitCount(n_qubits));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            what: "mirror circuit",
            n_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Uniform perfect matching: repeatedly pair the lowest unpaired qubit with
/// a uniformly chosen unpaired partner.
pub fn sample_matching<R: Rng + ?Sized>(rng: &mut R, n_qubits: usize) -> Result<Matching> {
    check_even(n_qubits)?;
    let mut unpaired: Vec<usize> = (0..n_qubits).collect();
    let mut matching = Vec::with_capacity(n_qubits / 2);
    while !unpaired.is_empty() {
        let a = unpaired.remove(0);
        let b = unpaired.remove(rng.random_range(0..unpaired.len()));
        matching.push((a, b));
    }
    Ok(matching)
}

fn validate_matching(matching: &[(usize, usize)], n_qubits: usize) -> Result<()> {
    let mut seen = vec![false; n_qubits];
    for &(a, b) in matching {
        if a == b {
            return Err(Error::InvalidPair(a, b));
        }
        for q in [a, b] {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::MalformedCircuit(format!("qubit {q} paired twice")));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::MalformedCircuit("matching does not cover every qubit".into()));
    }
    Ok(())
}

/// One random layer `g_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub cliffords: Vec<SingleQubitClifford>,
    pub matching: Matching,
}

impl LayerSpec {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_qubits: usize) -> Result<Self> {
        let cliffords = (0..n_qubits).map(|_| sample_clifford(rng)).collect();
        let matching = sample_matching(rng, n_qubits)?;
        Ok(Self { cliffords, matching })
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.cliffords.len() != n_qubits {
            return Err(Error::MalformedCircuit(format!(
                "layer has {} Cliffords for {n_qubits} qubits",
                self.cliffords.len()
            )));
        }
        validate_matching(&self.matching, n_qubits)
    }

    /// The layer as executable gates.
    pub fn gates(&self) -> Result<Vec<Gate>> {
        let singles = self
            .cliffords
            .iter()
            .enumerate()
            .map(|(qubit, &clifford)| Ok(Gate::Single { qubit, clifford }));
        let pairs = self.matching.iter().map(|&(a, b)| Ok(Gate::Native(NativeGate::uzz(a, b)?)));
        singles.chain(pairs).collect()
    }

    /// Left-multiplies `target` by this layer's unitary.
    fn apply_dense(&self, target: &mut Array2<Complex64>) {
        for (q, c) in self.cliffords.iter().enumerate() {
            dense::apply_single(target, &c.matrix(), q);
        }
        for &(a, b) in &self.matching {
            dense::apply_uzz(target, a, b);
        }
    }
}

/// Declarative description of one mirror circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MirrorCircuitSpec {
    pub n_qubits: usize,
    pub length: usize,
    pub layers: Vec<LayerSpec>,
    /// One Pauli per entangling round (`2L`), inserted before the round.
    pub randomizing_paulis: Vec<PauliOperator>,
    pub final_pauli: PauliOperator,
    pub seed: u64,
}

impl MirrorCircuitSpec {
    /// Fully random spec drawn from a generator seeded with `seed`.
    pub fn random(n_qubits: usize, length: usize, seed: u64) -> Result<Self> {
        check_even(n_qubits)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = (0..length)
            .map(|_| LayerSpec::random(&mut rng, n_qubits))
            .collect::<Result<_>>()?;
        let randomizing_paulis = (0..2 * length).map(|_| sample_pauli(&mut rng, n_qubits)).collect();
        let final_pauli = sample_pauli(&mut rng, n_qubits);
        Ok(Self {
            n_qubits,
            length,
            layers,
            randomizing_paulis,
            final_pauli,
            seed,
        })
    }

    /// Spec with the given layers and no Pauli randomization.
    pub fn unrandomized(n_qubits: usize, layers: Vec<LayerSpec>, seed: u64) -> Result<Self> {
        check_even(n_qubits)?;
        let length = layers.len();
        let spec = Self {
            n_qubits,
            length,
            layers,
            randomizing_paulis: vec![PauliOperator::identity(n_qubits); 2 * length],
            final_pauli: PauliOperator::identity(n_qubits),
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_even(self.n_qubits)?;
        if self.layers.len() != self.length {
            return Err(Error::MalformedCircuit(format!(
                "{} layers for sequence length {}",
                self.layers.len(),
                self.length
            )));
        }
        for layer in &self.layers {
            layer.validate(self.n_qubits)?;
        }
        if self.randomizing_paulis.len() != 2 * self.length {
            return Err(Error::MalformedCircuit(format!(
                "{} randomizing Paulis for {} entangling rounds",
                self.randomizing_paulis.len(),
                2 * self.length
            )));
        }
        for p in self.randomizing_paulis.iter().chain([&self.final_pauli]) {
            if p.n_qubits() != self.n_qubits {
                return Err(Error::QubitCountMismatch(self.n_qubits, p.n_qubits()));
            }
        }
        Ok(())
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        2 * self.length * (self.n_qubits / 2)
    }

    pub fn two_qubit_depth(&self) -> usize {
        2 * self.length
    }
}

/// Executable gate list of one mirror circuit and its ideal outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledCircuit {
    pub n_qubits: usize,
    pub length: usize,
    pub seed: u64,
    pub gates: Vec<Gate>,
    /// Index of the first gate of the mirrored half.
    pub mirror_start: usize,
    /// Ideal measured bitstring; bit `q` is qubit `q`.
    pub expected_outcome: u64,
}

impl CompiledCircuit {
    pub fn tableau(&self) -> Result<StabilizerTableau> {
        let mut t = StabilizerTableau::identity(self.n_qubits)?;
        t.apply_all(&self.gates)?;
        Ok(t)
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_native()).count()
    }

    /// Whether gate `index` belongs to the mirrored (inverse) half.
    pub fn in_mirror_half(&self, index: usize) -> bool {
        index >= self.mirror_start
    }

    pub fn expected_bits(&self) -> String {
        bitstring(self.expected_outcome, self.n_qubits)
    }

    /// Dense unitary of the gate list.
    pub fn unitary(&self) -> Result<Array2<Complex64>> {
        check_unitary_size(self.n_qubits)?;
        let mut u = dense::identity(1 << self.n_qubits);
        for g in &self.gates {
            match *g {
                Gate::Single { qubit, clifford } => dense::apply_single(&mut u, &clifford.matrix(), qubit),
                Gate::Native(n) => dense::apply_uzz(&mut u, n.a, n.b),
            }
        }
        Ok(u)
    }
}

fn bitstring(bits: u64, n: usize) -> String {
    (0..n).map(|q| if (bits >> q) & 1 == 1 { '1' } else { '0' }).collect()
}

fn parse_bitstring(s: &str) -> Result<u64> {
    s.chars().enumerate().try_fold(0u64, |acc, (q, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | (1 << q)),
        _ => Err(Error::Parse(format!("bad outcome bitstring {s:?}"))),
    })
}

fn check_unitary_size(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits {
            what: "dense unitary",
            n_qubits,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    Ok(())
}

fn apply_pauli_after(round: &mut [SingleQubitClifford], p: &PauliOperator) {
    for (q, c) in round.iter_mut().enumerate() {
        *c = c.then(SingleQubitClifford::pauli(p.kind(q)));
    }
}

fn apply_pauli_before(round: &mut [SingleQubitClifford], p: &PauliOperator) {
    for (q, c) in round.iter_mut().enumerate() {
        *c = SingleQubitClifford::pauli(p.kind(q)).then(*c);
    }
}

/// Compiles a spec into executable gates and computes its ideal outcome by
/// tableau propagation.
pub fn build_mirror_circuit(spec: &MirrorCircuitSpec) -> Result<CompiledCircuit> {
    spec.validate()?;
    let n = spec.n_qubits;
    let l = spec.length;
    let x = SingleQubitClifford::pauli(PauliKind::X);
    let mut rounds = vec![vec![SingleQubitClifford::identity(); n]; 2 * l + 1];
    let mut entangling: Vec<&Matching> = Vec::with_capacity(2 * l);

    for (k, layer) in spec.layers.iter().enumerate() {
        rounds[k].clone_from(&layer.cliffords);
        entangling.push(&layer.matching);
    }
    for m in 0..l {
        let layer = &spec.layers[l - 1 - m];
        entangling.push(&layer.matching);
        for &(a, _) in &layer.matching {
            rounds[l + m][a] = rounds[l + m][a].then(x);
            rounds[l + m + 1][a] = rounds[l + m + 1][a].then(x);
        }
        for (c, inv) in rounds[l + m + 1].iter_mut().zip(&layer.cliffords) {
            *c = c.then(inv.inverse());
        }
    }

    for (k, r) in spec.randomizing_paulis.iter().enumerate() {
        apply_pauli_after(&mut rounds[k], r);
        let mut pushed = *r;
        for &(a, b) in entangling[k] {
            pushed = pushed.conjugate_by_uzz(a, b)?;
        }
        apply_pauli_before(&mut rounds[k + 1], &pushed.unsigned());
    }
    apply_pauli_after(&mut rounds[2 * l], &spec.final_pauli);

    let mut gates = Vec::with_capacity((2 * l + 1) * n + 2 * l * (n / 2));
    let mut mirror_start = 0;
    for (k, round) in rounds.iter().enumerate() {
        if k == l {
            mirror_start = gates.len();
        }
        gates.extend(
            round
                .iter()
                .enumerate()
                .map(|(qubit, &clifford)| Gate::Single { qubit, clifford }),
        );
        if let Some(matching) = entangling.get(k) {
            for &(a, b) in matching.iter() {
                gates.push(Gate::Native(NativeGate::uzz(a, b)?));
            }
        }
    }

    let mut tableau = StabilizerTableau::identity(n)?;
    tableau.apply_all(&gates)?;
    let frame = tableau.pauli_frame().ok_or_else(|| {
        Error::MalformedCircuit("mirrored circuit is not a Pauli operator".into())
    })?;
    if frame != spec.final_pauli.unsigned() {
        return Err(Error::MalformedCircuit(format!(
            "residual frame {frame} differs from final Pauli {}",
            spec.final_pauli
        )));
    }

    Ok(CompiledCircuit {
        n_qubits: n,
        length: l,
        seed: spec.seed,
        gates,
        mirror_start,
        expected_outcome: frame.x_bits(),
    })
}

/// `circuits_per_length` independent specs per sequence length, each with
/// its own recorded seed drawn from `rng`.
pub fn sample_experiment<R: Rng + ?Sized>(
    rng: &mut R,
    n_qubits: usize,
    lengths: &[usize],
    circuits_per_length: usize,
) -> Result<Vec<MirrorCircuitSpec>> {
    check_even(n_qubits)?;
    if circuits_per_length == 0 {
        return Err(Error::InvalidParameter("need at least one circuit per length".into()));
    }
    let mut specs = Vec::with_capacity(lengths.len() * circuits_per_length);
    for &length in lengths {
        for _ in 0..circuits_per_length {
            specs.push(MirrorCircuitSpec::random(n_qubits, length, rng.random())?);
        }
    }
    Ok(specs)
}

/// Dense `U = g_L ⋯ g_1` of the first-half layers (no mirroring, no Pauli
/// randomization).
pub fn unitary_of(n_qubits: usize, layers: &[LayerSpec]) -> Result<Array2<Complex64>> {
    check_unitary_size(n_qubits)?;
    let mut u = dense::identity(1 << n_qubits);
    for layer in layers {
        layer.validate(n_qubits)?;
        layer.apply_dense(&mut u);
    }
    Ok(u)
}

/// OpenQASM 2.0 text. Every compiled gate becomes exactly one instruction:
/// Clifford `k` is a `c<k>` gate defined from `h`/`s`, and `U_zz` is a
/// `uzz` gate defined as `cx; rz(pi/2); cx` (equal up to global phase).
pub fn to_qasm(circuit: &CompiledCircuit) -> String {
    let mut used: Vec<usize> = circuit
        .gates
        .iter()
        .filter_map(|g| match g {
            Gate::Single { clifford, .. } => Some(clifford.index()),
            Gate::Native(_) => None,
        })
        .collect();
    used.sort_unstable();
    used.dedup();

    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(
        out,
        "// mirror circuit: n={} L={} seed={} expected={}",
        circuit.n_qubits,
        circuit.length,
        circuit.seed,
        circuit.expected_bits()
    );
    out.push_str("gate uzz a,b { cx a,b; rz(pi/2) b; cx a,b; }\n");
    for idx in used {
        let word = SingleQubitClifford::from_index(idx).unwrap().word();
        let body: Vec<&str> = word
            .iter()
            .map(|g| match g {
                Elementary::H => "h a;",
                Elementary::S => "s a;",
            })
            .collect();
        let body = if body.is_empty() { "id a;".to_string() } else { body.join(" ") };
        let _ = writeln!(out, "gate c{idx} a {{ {body} }}");
    }
    let _ = writeln!(out, "qreg q[{}];", circuit.n_qubits);
    let _ = writeln!(out, "creg c[{}];", circuit.n_qubits);
    for g in &circuit.gates {
        match *g {
            Gate::Single { qubit, clifford } => {
                let _ = writeln!(out, "c{} q[{qubit}];", clifford.index());
            }
            Gate::Native(n) => {
                let _ = writeln!(out, "uzz q[{}],q[{}];", n.a, n.b);
            }
        }
    }
    out.push_str("measure q -> c;\n");
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateRecord {
    pub name: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clifford: Option<SingleQubitClifford>,
    /// Set when the Clifford is itself a Pauli.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<String>,
}

impl GateRecord {
    fn from_gate(g: &Gate) -> Self {
        match *g {
            Gate::Single { qubit, clifford } => Self {
                name: "clifford".into(),
                qubits: vec![qubit],
                clifford: Some(clifford),
                pauli: PauliKind::ALL
                    .into_iter()
                    .find(|&k| SingleQubitClifford::pauli(k) == clifford)
                    .map(|k| k.symbol().to_string()),
            },
            Gate::Native(n) => Self {
                name: "uzz".into(),
                qubits: vec![n.a, n.b],
                clifford: None,
                pauli: None,
            },
        }
    }

    fn to_gate(&self) -> Result<Gate> {
        match (self.name.as_str(), self.qubits.as_slice(), self.clifford) {
            ("clifford", &[qubit], Some(clifford)) => Ok(Gate::Single { qubit, clifford }),
            ("uzz", &[a, b], None) => Ok(Gate::Native(NativeGate::uzz(a, b)?)),
            _ => Err(Error::MalformedCircuit(format!("bad gate record {self:?}"))),
        }
    }
}

/// On-disk circuit record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub version: u32,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: usize,
    pub seed: u64,
    pub layers: Vec<LayerSpec>,
    pub randomizing_paulis: Vec<PauliOperator>,
    pub final_pauli: PauliOperator,
    pub mirror_start: usize,
    pub gates: Vec<GateRecord>,
    pub expected_outcome: String,
}

impl CircuitFile {
    pub fn new(spec: &MirrorCircuitSpec, compiled: &CompiledCircuit) -> Self {
        Self {
            version: CIRCUIT_FORMAT_VERSION,
            n: spec.n_qubits,
            length: spec.length,
            seed: spec.seed,
            layers: spec.layers.clone(),
            randomizing_paulis: spec.randomizing_paulis.clone(),
            final_pauli: spec.final_pauli,
            mirror_start: compiled.mirror_start,
            gates: compiled.gates.iter().map(GateRecord::from_gate).collect(),
            expected_outcome: compiled.expected_bits(),
        }
    }

    /// Rebuilds the spec, recompiles it and checks the stored gates and
    /// outcome against the recompilation.
    pub fn into_parts(self) -> Result<(MirrorCircuitSpec, CompiledCircuit)> {
        if self.version != CIRCUIT_FORMAT_VERSION {
            return Err(Error::MalformedCircuit(format!(
                "unsupported circuit format version {}",
                self.version
            )));
        }
        let spec = MirrorCircuitSpec {
            n_qubits: self.n,
            length: self.length,
            layers: self.layers,
            randomizing_paulis: self.randomizing_paulis,
            final_pauli: self.final_pauli,
            seed: self.seed,
        };
        let compiled = build_mirror_circuit(&spec)?;
        let gates = self.gates.iter().map(GateRecord::to_gate).collect::<Result<Vec<_>>>()?;
        if gates != compiled.gates || self.mirror_start != compiled.mirror_start {
            return Err(Error::MalformedCircuit("gate list does not match its layers".into()));
        }
        if parse_bitstring(&self.expected_outcome)? != compiled.expected_outcome
            || self.expected_outcome.len() != self.n
        {
            return Err(Error::MalformedCircuit("expected outcome does not match gates".into()));
        }
        Ok((spec, compiled))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn normalize(m: &Matching) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = m.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        v.sort_unstable();
        v
    }

    /// All perfect matchings of `0..n` by recursion.
    fn enumerate_matchings(qubits: &[usize]) -> Vec<Vec<(usize, usize)>> {
        if qubits.is_empty() {
            return vec![vec![]];
        }
        let a = qubits[0];
        let mut out = Vec::new();
        for i in 1..qubits.len() {
            let rest: Vec<usize> = qubits[1..].iter().copied().filter(|&q| q != qubits[i]).collect();
            for mut m in enumerate_matchings(&rest) {
                m.push((a, qubits[i]));
                m.sort_unstable();
                out.push(m);
            }
        }
        out
    }

    #[test]
    fn matching_sampler_is_uniform() {
        assert_eq!(sample_matching(&mut rng(0), 2).unwrap(), vec![(0, 1)]);
        assert!(matches!(sample_matching(&mut rng(0), 5), Err(Error::OddQubitCount(5))));
        for (n, draws) in [(4usize, 6000usize), (6, 15_000)] {
            let all = enumerate_matchings(&(0..n).collect::<Vec<_>>());
            assert_eq!(all.len(), if n == 4 { 3 } else { 15 });
            let mut counts: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
            let mut r = rng(n as u64);
            for _ in 0..draws {
                let m = sample_matching(&mut r, n).unwrap();
                validate_matching(&m, n).unwrap();
                *counts.entry(normalize(&m)).or_default() += 1;
            }
            assert_eq!(counts.len(), all.len());
            let p = 1.0 / all.len() as f64;
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            for m in &all {
                let c = counts[m] as f64;
                assert!((c - draws as f64 * p).abs() < 5.0 * sigma, "{m:?}: {c}");
            }
        }
    }

    #[test]
    fn gate_count_and_depth() {
        let spec = MirrorCircuitSpec::random(10, 16, 1).unwrap();
        assert_eq!(spec.two_qubit_gate_count(), 160);
        assert_eq!(spec.two_qubit_depth(), 32);
        let c = build_mirror_circuit(&spec).unwrap();
        assert_eq!(c.two_qubit_gate_count(), 160);
        for (n, l) in [(2, 1), (4, 3), (6, 7), (12, 5)] {
            let spec = MirrorCircuitSpec::random(n, l, 9).unwrap();
            let c = build_mirror_circuit(&spec).unwrap();
            assert_eq!(c.two_qubit_gate_count(), spec.two_qubit_gate_count());
            assert_eq!(c.gates.len(), (2 * l + 1) * n + 2 * l * n / 2);
        }
    }

    #[test]
    fn unrandomized_mirror_is_identity() {
        let mut r = rng(3);
        for n in [2, 4, 6] {
            let layers = (0..5).map(|_| LayerSpec::random(&mut r, n).unwrap()).collect();
            let spec = MirrorCircuitSpec::unrandomized(n, layers, 0).unwrap();
            let c = build_mirror_circuit(&spec).unwrap();
            assert!(c.tableau().unwrap().is_identity());
            assert_eq!(c.expected_outcome, 0);
        }
    }

    #[test]
    fn final_all_x_flips_every_bit() {
        let mut r = rng(4);
        let n = 6;
        let layers = (0..3).map(|_| LayerSpec::random(&mut r, n).unwrap()).collect();
        let mut spec = MirrorCircuitSpec::unrandomized(n, layers, 0).unwrap();
        spec.final_pauli = "XXXXXX".parse().unwrap();
        let c = build_mirror_circuit(&spec).unwrap();
        assert_eq!(c.expected_bits(), "111111");
        spec.final_pauli = "ZYXIZY".parse().unwrap();
        assert_eq!(build_mirror_circuit(&spec).unwrap().expected_bits(), "011001");
    }

    #[test]
    fn randomization_leaves_unitary_unchanged() {
        for seed in 0..10 {
            for l in 1..=3 {
                let spec = MirrorCircuitSpec::random(2, l, seed).unwrap();
                let mut plain = spec.clone();
                plain.randomizing_paulis = vec![PauliOperator::identity(2); 2 * l];
                let a = build_mirror_circuit(&spec).unwrap();
                let b = build_mirror_circuit(&plain).unwrap();
                assert_ne!(a.gates, b.gates);
                let diff = dense::phase_insensitive_diff(&a.unitary().unwrap(), &b.unitary().unwrap());
                assert!(diff < 1e-12);
                // dense unitary of the full mirror is the final Pauli
                let fp = dense::pauli_matrix(&spec.final_pauli.unsigned());
                assert!(dense::phase_insensitive_diff(&a.unitary().unwrap(), &fp) < 1e-12);
            }
        }
    }

    #[test]
    fn mirror_tableau_is_final_frame() {
        for seed in 0..20 {
            let spec = MirrorCircuitSpec::random(8, 6, seed).unwrap();
            let c = build_mirror_circuit(&spec).unwrap();
            assert_eq!(c.tableau().unwrap().pauli_frame(), Some(spec.final_pauli.unsigned()));
            assert_eq!(c.expected_outcome, spec.final_pauli.x_bits());
        }
    }

    #[test]
    fn mirror_half_marker() {
        let spec = MirrorCircuitSpec::random(4, 3, 2).unwrap();
        let c = build_mirror_circuit(&spec).unwrap();
        let first_half_native = c.gates[..c.mirror_start].iter().filter(|g| g.is_native()).count();
        assert_eq!(first_half_native, 3 * 2);
        assert!(c.gates[c.mirror_start..c.mirror_start + 4]
            .iter()
            .all(|g| !g.is_native()));
    }

    #[test]
    fn experiment_sampling() {
        let specs = sample_experiment(&mut rng(7), 6, &[4, 8, 12, 16], 10).unwrap();
        assert_eq!(specs.len(), 40);
        for (i, s) in specs.iter().enumerate() {
            assert_eq!(s.length, [4, 8, 12, 16][i / 10]);
            assert_eq!(*s, MirrorCircuitSpec::random(6, s.length, s.seed).unwrap());
        }
        assert_eq!(specs, sample_experiment(&mut rng(7), 6, &[4, 8, 12, 16], 10).unwrap());
        let mut collisions = 0;
        for seed in 0..100 {
            let a = sample_experiment(&mut rng(1000 + 2 * seed), 4, &[4], 1).unwrap();
            let b = sample_experiment(&mut rng(1001 + 2 * seed), 4, &[4], 1).unwrap();
            if a[0].layers == b[0].layers {
                collisions += 1;
            }
        }
        assert_eq!(collisions, 0);
        assert!(sample_experiment(&mut rng(0), 3, &[4], 1).is_err());
        assert!(sample_experiment(&mut rng(0), 4, &[4], 0).is_err());
    }

    #[test]
    fn first_half_unitaries() {
        assert_eq!(unitary_of(4, &[]).unwrap(), dense::identity(16));
        let layer = LayerSpec {
            cliffords: vec![SingleQubitClifford::identity(); 2],
            matching: vec![(0, 1)],
        };
        assert!(dense::max_abs_diff(&unitary_of(2, &[layer]).unwrap(), &dense::uzz_matrix()) < 1e-15);
        assert!(matches!(unitary_of(10, &[]), Err(Error::TooManyQubits { .. })));
    }

    #[test]
    fn malformed_specs_rejected() {
        let mut spec = MirrorCircuitSpec::random(4, 2, 0).unwrap();
        spec.layers[0].matching = vec![(0, 1), (1, 2)];
        assert!(build_mirror_circuit(&spec).is_err());
        let mut spec = MirrorCircuitSpec::random(4, 2, 0).unwrap();
        spec.randomizing_paulis.pop();
        assert!(build_mirror_circuit(&spec).is_err());
        let mut spec = MirrorCircuitSpec::random(4, 2, 0).unwrap();
        spec.layers[1].cliffords.pop();
        assert!(build_mirror_circuit(&spec).is_err());
    }

    #[test]
    fn json_round_trip_and_tamper_detection() {
        let spec = MirrorCircuitSpec::random(6, 4, 42).unwrap();
        let c = build_mirror_circuit(&spec).unwrap();
        let file = CircuitFile::new(&spec, &c);
        let text = file.to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["version", "n", "L", "seed", "layers", "final_pauli", "gates", "expected_outcome"] {
            assert!(value.get(key).is_some(), "{key}");
        }
        let (spec2, c2) = CircuitFile::from_json(&text).unwrap().into_parts().unwrap();
        assert_eq!((spec2, c2), (spec, c));

        let mut bad = file.clone();
        bad.expected_outcome = "111111".into();
        if bad.expected_outcome != file.expected_outcome {
            assert!(bad.into_parts().is_err());
        }
        let mut bad = file;
        bad.gates.swap(0, 1);
        bad.gates[0].clifford = Some(SingleQubitClifford::hadamard());
        assert!(bad.into_parts().is_err());
    }

    /// Minimal interpreter for the QASM subset `to_qasm` emits.
    fn interpret_qasm(text: &str, n: usize) -> (Vec<Gate>, Array2<Complex64>) {
        let mut defs: HashMap<String, Array2<Complex64>> = HashMap::new();
        let mut gates = Vec::new();
        let mut u = dense::identity(1 << n);
        let qubit = |s: &str| -> usize {
            s.trim().trim_start_matches("q[").trim_end_matches(']').parse().unwrap()
        };
        for line in text.lines() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("gate c") {
                let (idx, body) = rest.split_once(" a {").unwrap();
                let mut m = dense::identity(2);
                for instr in body.trim_end_matches('}').split(';') {
                    match instr.trim() {
                        "h a" => m = dense::hadamard().dot(&m),
                        "s a" => m = dense::phase_gate().dot(&m),
                        "id a" | "" => {}
                        other => panic!("unexpected {other}"),
                    }
                }
                defs.insert(format!("c{idx}"), m);
            } else if let Some(args) = line.strip_prefix("uzz ") {
                let (a, b) = args.trim_end_matches(';').split_once(',').unwrap();
                let (a, b) = (qubit(a), qubit(b));
                gates.push(Gate::Native(NativeGate::uzz(a, b).unwrap()));
                // cx a,b; rz(pi/2) b; cx a,b
                let cx = {
                    let dim = 1usize << n;
                    let mut m = Array2::zeros((dim, dim));
                    for col in 0..dim {
                        let row = if (col >> a) & 1 == 1 { col ^ (1 << b) } else { col };
                        m[[row, col]] = dense::c64(1.0, 0.0);
                    }
                    m
                };
                let rz = Array2::from_diag(&ndarray::arr1(&[
                    dense::c64(0.0, -std::f64::consts::FRAC_PI_4).exp(),
                    dense::c64(0.0, std::f64::consts::FRAC_PI_4).exp(),
                ]));
                u = cx.dot(&u);
                dense::apply_single(&mut u, &rz, b);
                u = cx.dot(&u);
            } else if line.starts_with('c') && !line.starts_with("creg") {
                let (name, q) = line.trim_end_matches(';').split_once(' ').unwrap();
                let q = qubit(q);
                let idx: usize = name[1..].parse().unwrap();
                gates.push(Gate::Single {
                    qubit: q,
                    clifford: SingleQubitClifford::from_index(idx).unwrap(),
                });
                dense::apply_single(&mut u, &defs[name], q);
            }
        }
        (gates, u)
    }

    #[test]
    fn qasm_round_trips_gate_for_gate() {
        let spec = MirrorCircuitSpec::random(4, 3, 5).unwrap();
        let c = build_mirror_circuit(&spec).unwrap();
        let text = to_qasm(&c);
        assert!(text.starts_with("OPENQASM 2.0;"));
        assert!(text.contains("measure q -> c;"));
        let (gates, u) = interpret_qasm(&text, 4);
        assert_eq!(gates, c.gates);
        assert!(dense::phase_insensitive_diff(&u, &c.unitary().unwrap()) < 1e-12);
    }
}
