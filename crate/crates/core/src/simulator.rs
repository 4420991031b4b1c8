//! Noisy execution of compiled mirror circuits.
//!
//! Two backends share one [`NoiseModel`]:
//!
//! * the stabilizer backend samples Pauli faults after noisy gates and
//!   tracks them as a Pauli frame on top of the ideal Clifford evolution. The
//!   ideal circuit maps `|0…0⟩` to the basis state `|expected⟩`, so a shot
//!   fails exactly when the accumulated frame has an X or Y component;
//! * the dense backend propagates the Pauli coefficient vector
//!   `r_i = Tr(P_i ρ)` through gate and channel transfer matrices and returns
//!   the exact success probability (`n ≤ 4`).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{superop_of, uzz_superop, ChannelParams, SuperOp, MAX_DENSE_QUBITS};
use crate::circuits::{build_mirror_circuit, CompiledCircuit, MirrorCircuitSpec};
use crate::operators::{Gate, PauliOperator};
use crate::{Error, Result};

/// Gate-level noise. Every channel acts on the qubits of the gate it follows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Applied after every `U_zz`.
    #[serde(default)]
    pub two_qubit: Option<ChannelParams>,
    /// Applied after every single-qubit gate.
    #[serde(default)]
    pub single_qubit: Option<ChannelParams>,
    /// Replaces `two_qubit` on the `U_zz` gates of the mirrored half.
    #[serde(default)]
    pub inverse_half_override: Option<ChannelParams>,
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    /// Two-qubit depolarizing noise with parameter `p` on every `U_zz`.
    pub fn depolarizing(p: f64) -> Self {
        Self {
            two_qubit: Some(ChannelParams::Depolarizing { p }),
            ..Self::default()
        }
    }

    fn channels(&self) -> impl Iterator<Item = &ChannelParams> {
        [&self.two_qubit, &self.single_qubit, &self.inverse_half_override]
            .into_iter()
            .flatten()
    }

    pub fn validate(&self) -> Result<()> {
        self.channels().try_for_each(ChannelParams::validate)
    }

    /// Whether the stabilizer backend can run this model.
    pub fn is_pauli(&self) -> bool {
        self.channels().all(ChannelParams::is_pauli)
    }
}

/// Which simulator executes the shots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Pauli-fault Monte Carlo (any `n` up to 64, Pauli noise only).
    #[default]
    Stabilizer,
    /// Exact probability, then binomial shot sampling (`n ≤ 4`).
    Dense,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stabilizer" => Ok(Backend::Stabilizer),
            "dense" => Ok(Backend::Dense),
            other => Err(Error::Parse(format!("unknown backend {other:?}"))),
        }
    }
}

/// Outcome counts of one circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub circuit_id: usize,
    #[serde(rename = "L")]
    pub length: usize,
    pub shots: u64,
    pub successes: u64,
    /// Seed the circuit was generated from.
    pub seed: u64,
}

impl ShotRecord {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.shots as f64
    }
}

/// Inverse-CDF sampler over the non-identity faults of one channel.
#[derive(Clone, Debug)]
struct FaultSampler {
    faults: Vec<PauliOperator>,
    cumulative: Vec<f64>,
    fault_probability: f64,
}

impl FaultSampler {
    fn new(params: &ChannelParams, n_qubits: usize) -> Result<Self> {
        let dist = params.pauli_distribution(n_qubits)?;
        let mut faults = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (p, prob) in dist.into_iter().skip(1) {
            if prob > 0.0 {
                acc += prob;
                faults.push(p);
                cumulative.push(acc);
            }
        }
        Ok(Self {
            faults,
            cumulative,
            fault_probability: acc,
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&PauliOperator> {
        if self.faults.is_empty() {
            return None;
        }
        let u: f64 = rng.random();
        if u >= self.fault_probability {
            return None;
        }
        let idx = self.cumulative.partition_point(|&c| c <= u);
        Some(&self.faults[idx.min(self.faults.len() - 1)])
    }
}

/// Lifts a fault on a local slot onto the register.
fn embed_fault(fault: &PauliOperator, targets: &[usize], n_qubits: usize) -> PauliOperator {
    let mut out = PauliOperator::identity(n_qubits);
    for (local, &q) in targets.iter().enumerate() {
        out.set_kind(q, fault.kind(local));
    }
    out
}

struct FaultPlan {
    single: Option<FaultSampler>,
    two: Option<FaultSampler>,
    inverse_two: Option<FaultSampler>,
}

impl FaultPlan {
    fn new(noise: &NoiseModel) -> Result<Self> {
        noise.validate()?;
        let build = |c: &Option<ChannelParams>, k: usize| -> Result<Option<FaultSampler>> {
            match c {
                None => Ok(None),
                Some(p) if p.is_pauli() => FaultSampler::new(p, k).map(Some),
                Some(p) => Err(Error::NonPauliChannel(format!(
                    "stabilizer backend cannot sample {p:?}"
                ))),
            }
        };
        Ok(Self {
            single: build(&noise.single_qubit, 1)?,
            two: build(&noise.two_qubit, 2)?,
            inverse_two: build(&noise.inverse_half_override, 2)?,
        })
    }

    fn sampler(&self, circuit: &CompiledCircuit, index: usize) -> Option<&FaultSampler> {
        match circuit.gates[index] {
            Gate::Single { .. } => self.single.as_ref(),
            Gate::Native(_) if circuit.in_mirror_half(index) && self.inverse_two.is_some() => {
                self.inverse_two.as_ref()
            }
            Gate::Native(_) => self.two.as_ref(),
        }
    }
}

fn gate_targets(g: &Gate) -> ([usize; 2], usize) {
    match *g {
        Gate::Single { qubit, .. } => ([qubit, 0], 1),
        Gate::Native(n) => ([n.a, n.b], 2),
    }
}

/// Monte-Carlo execution with Pauli fault injection.
pub fn run_stabilizer<R: Rng + ?Sized>(
    circuit: &CompiledCircuit,
    noise: &NoiseModel,
    shots: u64,
    rng: &mut R,
) -> Result<ShotRecord> {
    let plan = FaultPlan::new(noise)?;
    let n = circuit.n_qubits;
    let samplers: Vec<Option<&FaultSampler>> =
        (0..circuit.gates.len()).map(|i| plan.sampler(circuit, i)).collect();
    let noiseless = samplers.iter().all(|s| s.is_none_or(|s| s.faults.is_empty()));

    let mut successes = 0;
    for _ in 0..shots {
        if noiseless {
            successes += 1;
            continue;
        }
        let mut frame = PauliOperator::identity(n);
        for (gate, sampler) in circuit.gates.iter().zip(&samplers) {
            frame = gate.conjugate_unchecked(&frame);
            if let Some(fault) = sampler.and_then(|s| s.sample(rng)) {
                let (targets, k) = gate_targets(gate);
                frame = frame.mul_unchecked(&embed_fault(fault, &targets[..k], n));
            }
        }
        if frame.x_bits() == 0 {
            successes += 1;
        }
    }
    Ok(ShotRecord {
        circuit_id: 0,
        length: circuit.length,
        shots,
        successes,
        seed: circuit.seed,
    })
}

/// Exact success probability of `circuit` under `noise`.
pub fn run_dense(circuit: &CompiledCircuit, noise: &NoiseModel) -> Result<f64> {
    let n = circuit.n_qubits;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            what: "dense simulator",
            n_qubits: n,
            limit: MAX_DENSE_QUBITS,
        });
    }
    noise.validate()?;
    let channel = |c: &Option<ChannelParams>, k: usize| c.as_ref().map(|p| superop_of(p, k)).transpose();
    let single = channel(&noise.single_qubit, 1)?;
    let two = channel(&noise.two_qubit, 2)?;
    let inverse_two = channel(&noise.inverse_half_override, 2)?;
    let cliffords: Vec<SuperOp> = crate::channels::single_qubit_clifford_group();
    let uzz = uzz_superop();

    // |0…0⟩: r_i = 1 on {I, Z}^n, 0 elsewhere
    let size = 1usize << (2 * n);
    let mut state: Vec<f64> = (0..size).map(|i| if is_diagonal_index(i) { 1.0 } else { 0.0 }).collect();
    for (idx, gate) in circuit.gates.iter().enumerate() {
        match *gate {
            Gate::Single { qubit, clifford } => {
                cliffords[clifford.index()].apply_local(&mut state, &[qubit])?;
                if let Some(e) = &single {
                    e.apply_local(&mut state, &[qubit])?;
                }
            }
            Gate::Native(g) => {
                uzz.apply_local(&mut state, &[g.a, g.b])?;
                let e = if circuit.in_mirror_half(idx) && inverse_two.is_some() {
                    inverse_two.as_ref()
                } else {
                    two.as_ref()
                };
                if let Some(e) = e {
                    e.apply_local(&mut state, &[g.a, g.b])?;
                }
            }
        }
    }
    Ok(outcome_probability(&state, n, circuit.expected_outcome))
}

/// Every qubit's Pauli is I or Z (basis indices 0 and 3).
fn is_diagonal_index(i: usize) -> bool {
    let mut i = i;
    while i > 0 {
        if !matches!(i & 3, 0 | 3) {
            return false;
        }
        i >>= 2;
    }
    true
}

/// `⟨x|ρ|x⟩ = (1/d) Σ_{z} (-1)^{z·x} r_{Z^z}`.
fn outcome_probability(state: &[f64], n_qubits: usize, outcome: u64) -> f64 {
    let d = (1u64 << n_qubits) as f64;
    let total: f64 = (0..1u64 << n_qubits)
        .map(|z| {
            let idx: usize = (0..n_qubits).filter(|q| (z >> q) & 1 == 1).map(|q| 3usize << (2 * q)).sum();
            let sign = if (z & outcome).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            sign * state[idx]
        })
        .sum();
    total / d
}

/// Survival counts of a full experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayDataset {
    pub n_qubits: usize,
    pub entries: Vec<ShotRecord>,
}

/// Mean survival at one sequence length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    #[serde(rename = "L")]
    pub length: usize,
    /// Mean over circuits of `successes / shots`.
    pub mean: f64,
    /// Binomial standard error over all shots at this length.
    pub binomial_se: f64,
    pub circuits: usize,
    pub shots: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    n: usize,
    #[serde(rename = "L")]
    length: usize,
    circuit_id: usize,
    shots: u64,
    successes: u64,
    seed: u64,
}

impl DecayDataset {
    pub fn new(n_qubits: usize, entries: Vec<ShotRecord>) -> Result<Self> {
        let d = Self { n_qubits, entries };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if e.shots == 0 || e.successes > e.shots {
                return Err(Error::InsufficientData(format!(
                    "circuit {} has {} successes in {} shots",
                    e.circuit_id, e.successes, e.shots
                )));
            }
        }
        Ok(())
    }

    /// Distinct sequence lengths in increasing order.
    pub fn lengths(&self) -> Vec<usize> {
        let mut l: Vec<usize> = self.entries.iter().map(|e| e.length).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Records at sequence length `length`, in dataset order.
    pub fn at_length(&self, length: usize) -> impl Iterator<Item = &ShotRecord> {
        self.entries.iter().filter(move |e| e.length == length)
    }

    pub fn survival(&self) -> Vec<SurvivalPoint> {
        self.lengths()
            .into_iter()
            .map(|length| {
                let recs: Vec<_> = self.at_length(length).collect();
                let mean = recs.iter().map(|r| r.rate()).sum::<f64>() / recs.len() as f64;
                let shots: u64 = recs.iter().map(|r| r.shots).sum();
                SurvivalPoint {
                    length,
                    mean,
                    binomial_se: (mean * (1.0 - mean) / shots as f64).max(0.0).sqrt(),
                    circuits: recs.len(),
                    shots,
                }
            })
            .collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            w.serialize(CsvRow {
                n: self.n_qubits,
                length: e.length,
                circuit_id: e.circuit_id,
                shots: e.shots,
                successes: e.successes,
                seed: e.seed,
            })?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut n_qubits = None;
        let mut entries = Vec::new();
        for row in r.deserialize() {
            let row: CsvRow = row?;
            if *n_qubits.get_or_insert(row.n) != row.n {
                return Err(Error::Parse("mixed qubit counts in one dataset".into()));
            }
            entries.push(ShotRecord {
                circuit_id: row.circuit_id,
                length: row.length,
                shots: row.shots,
                successes: row.successes,
                seed: row.seed,
            });
        }
        let n_qubits = n_qubits.ok_or_else(|| Error::InsufficientData("empty dataset".into()))?;
        Self::new(n_qubits, entries)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    /// Writes CSV or JSON depending on the extension (`.json` for JSON).
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = if is_json(path) { self.to_json()? + "\n" } else { self.to_csv_string()? };
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if is_json(path) {
            Self::from_json(&text)
        } else {
            Self::from_csv_str(&text)
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Child generator for one circuit: independent stream per circuit id.
pub fn circuit_rng(master_seed: u64, circuit_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(circuit_id as u64);
    rng
}

/// Shots of one compiled circuit on the chosen backend.
pub fn run_circuit<R: Rng + ?Sized>(
    circuit: &CompiledCircuit,
    noise: &NoiseModel,
    shots: u64,
    backend: Backend,
    rng: &mut R,
) -> Result<ShotRecord> {
    match backend {
        Backend::Stabilizer => run_stabilizer(circuit, noise, shots, rng),
        Backend::Dense => {
            let p = run_dense(circuit, noise)?.clamp(0.0, 1.0);
            let successes = Binomial::new(shots, p)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .sample(rng);
            Ok(ShotRecord {
                circuit_id: 0,
                length: circuit.length,
                shots,
                successes,
                seed: circuit.seed,
            })
        }
    }
}

/// Runs every spec for `shots` shots. Circuit `i` gets id `i` and the child
/// generator [`circuit_rng`]`(master_seed, i)`, so results do not depend on
/// scheduling or thread count.
pub fn simulate_survival(
    specs: &[MirrorCircuitSpec],
    noise: &NoiseModel,
    shots: u64,
    backend: Backend,
    master_seed: u64,
) -> Result<DecayDataset> {
    let first = specs
        .first()
        .ok_or_else(|| Error::InsufficientData("no circuits to simulate".into()))?;
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be positive".into()));
    }
    if let Some(other) = specs.iter().find(|s| s.n_qubits != first.n_qubits) {
        return Err(Error::QubitCountMismatch(first.n_qubits, other.n_qubits));
    }
    noise.validate()?;
    if backend == Backend::Stabilizer && !noise.is_pauli() {
        return Err(Error::NonPauliChannel("stabilizer backend needs Pauli noise".into()));
    }
    let entries = specs
        .par_iter()
        .enumerate()
        .map(|(id, spec)| {
            let circuit = build_mirror_circuit(spec)?;
            let mut rng = circuit_rng(master_seed, id);
            let mut rec = run_circuit(&circuit, noise, shots, backend, &mut rng)?;
            rec.circuit_id = id;
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    DecayDataset::new(first.n_qubits, entries)
}
