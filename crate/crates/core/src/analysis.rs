//! Decay fitting, bootstrap intervals, frame potentials and the
//! estimated-versus-true unitarity scatter experiment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::depolarizing_tensor_unitarity;
use crate::circuits::{sample_experiment, LayerSpec, MAX_UNITARY_QUBITS};
use crate::operators::{PauliOperator, StabilizerTableau};
use crate::simulator::{simulate_survival, Backend, NoiseModel, ShotRecord, SurvivalPoint};
use crate::{Error, Result};

pub use crate::simulator::DecayDataset;

/// Floor on the per-length standard error used for weighting.
pub const SE_FLOOR: f64 = 1e-4;

/// Default number of bootstrap resamples.
pub const DEFAULT_RESAMPLES: usize = 1000;

/// Two-sided coverage of the reported interval.
pub const CI_LEVEL: f64 = 0.68;

const CI_METHOD: &str = "circuit resampling + parametric binomial bootstrap, 16th/84th percentiles";

/// Fit of `p(L) = A u^(L-1) + B` with `B = 1/2^n` held fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub n_qubits: usize,
    #[serde(rename = "A")]
    pub a: f64,
    pub u: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// Weighted residual norm `sqrt(Σ w (p̂ - model)²)`.
    pub residual_norm: f64,
    /// All mean survivals equal: `u` is not identifiable from the data.
    pub degenerate: bool,
    pub points: Vec<SurvivalPoint>,
    #[serde(default)]
    pub bootstrap: Option<BootstrapInterval>,
}

impl FitResult {
    pub fn model(&self, length: f64) -> f64 {
        self.a * self.u.powf(length - 1.0) + self.b
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub u_low: f64,
    pub u_high: f64,
    pub level: f64,
    pub resamples: usize,
    pub method: String,
}

struct Series {
    x: Vec<f64>,
    y: Vec<f64>,
    sqrt_w: Vec<f64>,
}

impl Series {
    fn new(points: &[SurvivalPoint], b: f64) -> Self {
        Self {
            x: points.iter().map(|p| p.length as f64 - 1.0).collect(),
            y: points.iter().map(|p| p.mean - b).collect(),
            sqrt_w: points.iter().map(|p| 1.0 / p.binomial_se.max(SE_FLOOR)).collect(),
        }
    }

    fn cost(&self, a: f64, u: f64) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .zip(&self.sqrt_w)
            .map(|((&x, &y), &s)| (s * (y - a * u.powf(x))).powi(2))
            .sum()
    }

    /// Weighted least-squares `A` for fixed `u`.
    fn best_a(&self, u: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((&x, &y), &s) in self.x.iter().zip(&self.y).zip(&self.sqrt_w) {
            let g = u.powf(x);
            num += s * s * y * g;
            den += s * s * g * g;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// `u` from the weighted log-slope of the positive excess survivals.
    fn log_slope_guess(&self) -> Option<f64> {
        let pts: Vec<(f64, f64, f64)> = self
            .x
            .iter()
            .zip(&self.y)
            .zip(&self.sqrt_w)
            .filter(|((_, &y), _)| y > 0.0)
            .map(|((&x, &y), &s)| (x, y.ln(), (s * y).powi(2)))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let sw: f64 = pts.iter().map(|p| p.2).sum();
        let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
        let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
        let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| (sxy / sxx).exp().clamp(0.0, 1.0))
    }

    /// Levenberg–Marquardt on `(A, u)` with `u` projected onto `[0, 1]`.
    fn levenberg_marquardt(&self, mut a: f64, mut u: f64) -> (f64, f64) {
        let mut cost = self.cost(a, u);
        let mut lambda = 1e-3;
        for _ in 0..500 {
            // normal equations JᵀJ δ = -Jᵀr with r = s (y - a g)
            let (mut jaa, mut jau, mut juu, mut ga, mut gu) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for ((&x, &y), &s) in self.x.iter().zip(&self.y).zip(&self.sqrt_w) {
                let g = u.powf(x);
                let dg = if x == 0.0 { 0.0 } else { x * u.powf(x - 1.0) };
                let r = s * (y - a * g);
                let (da, du) = (-s * g, -s * a * dg);
                jaa += da * da;
                jau += da * du;
                juu += du * du;
                ga += da * r;
                gu += du * r;
            }
            let mut improved = false;
            while lambda < 1e12 {
                let (m11, m22) = (jaa * (1.0 + lambda), juu * (1.0 + lambda));
                let det = m11 * m22 - jau * jau;
                if det.abs() < 1e-300 {
                    lambda *= 10.0;
                    continue;
                }
                let step_a = (-ga * m22 + gu * jau) / det;
                let step_u = (-gu * m11 + ga * jau) / det;
                let (na, nu) = (a + step_a, (u + step_u).clamp(0.0, 1.0));
                let nc = self.cost(na, nu);
                if nc <= cost {
                    let done = (cost - nc) <= 1e-15 * cost.max(1e-300)
                        && step_a.abs() < 1e-14
                        && (nu - u).abs() < 1e-14;
                    a = na;
                    u = nu;
                    cost = nc;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = !done;
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        (a, u)
    }
}

/// Weighted least-squares fit of the mean survival per sequence length.
///
/// Starts from the best point of a `u` grid (with `A` profiled out) and the
/// log-slope estimate, then polishes with Levenberg–Marquardt. Constant data
/// is flagged as degenerate and reported with `u = 1`.
pub fn fit_decay(data: &DecayDataset) -> Result<FitResult> {
    data.validate()?;
    let points = data.survival();
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least two sequence lengths, got {}",
            points.len()
        )));
    }
    if points[0].length == 0 {
        return Err(Error::InsufficientData("sequence length 0 cannot be fitted".into()));
    }
    let b = 1.0 / (1u64 << data.n_qubits) as f64;
    let series = Series::new(&points, b);

    let lo = points.iter().map(|p| p.mean).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.mean).fold(f64::NEG_INFINITY, f64::max);
    let degenerate = hi - lo < 1e-12;

    let (a, u) = if degenerate {
        (series.best_a(1.0), 1.0)
    } else {
        let mut starts: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
        starts.extend(series.log_slope_guess());
        let u0 = starts
            .into_iter()
            .map(|u| (series.cost(series.best_a(u), u), u))
            .min_by(|x, y| x.0.total_cmp(&y.0))
            .map(|(_, u)| u)
            .unwrap();
        series.levenberg_marquardt(series.best_a(u0), u0)
    };
    Ok(FitResult {
        n_qubits: data.n_qubits,
        a,
        u,
        b,
        residual_norm: series.cost(a, u).sqrt(),
        degenerate,
        points,
        bootstrap: None,
    })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// One bootstrap replicate: circuits redrawn with replacement within each
/// sequence length, then each drawn circuit's successes redrawn from a
/// binomial at its observed rate.
fn resample<R: Rng + ?Sized>(data: &DecayDataset, rng: &mut R) -> Result<DecayDataset> {
    let mut entries = Vec::with_capacity(data.entries.len());
    for length in data.lengths() {
        let group: Vec<&ShotRecord> = data.at_length(length).collect();
        for _ in 0..group.len() {
            let rec = group[rng.random_range(0..group.len())];
            let successes = Binomial::new(rec.shots, rec.rate())
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .sample(rng);
            entries.push(ShotRecord { successes, ..*rec });
        }
    }
    DecayDataset::new(data.n_qubits, entries)
}

/// 68% interval for `u` from `resamples` bootstrap replicates, widened if
/// needed so that it contains the point estimate.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    data: &DecayDataset,
    resamples: usize,
    rng: &mut R,
) -> Result<BootstrapInterval> {
    if resamples < 100 {
        return Err(Error::InvalidParameter(format!(
            "need at least 100 bootstrap resamples, got {resamples}"
        )));
    }
    let point = fit_decay(data)?.u;
    let master: u64 = rng.random();
    let mut us = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(master);
            r.set_stream(i as u64);
            Ok(fit_decay(&resample(data, &mut r)?)?.u)
        })
        .collect::<Result<Vec<f64>>>()?;
    us.sort_by(f64::total_cmp);
    let tail = (1.0 - CI_LEVEL) / 2.0;
    Ok(BootstrapInterval {
        u_low: percentile(&us, tail).min(point),
        u_high: percentile(&us, 1.0 - tail).max(point),
        level: CI_LEVEL,
        resamples,
        method: CI_METHOD.into(),
    })
}

/// [`fit_decay`] followed by [`bootstrap_ci`].
pub fn fit_with_bootstrap<R: Rng + ?Sized>(
    data: &DecayDataset,
    resamples: usize,
    rng: &mut R,
) -> Result<FitResult> {
    let mut fit = fit_decay(data)?;
    fit.bootstrap = Some(bootstrap_ci(data, resamples, rng)?);
    Ok(fit)
}

/// Monte-Carlo estimate of `Φ₂ = E|Tr U|⁴` over `L`-layer products.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramePotentialEstimate {
    pub n_qubits: usize,
    #[serde(rename = "L")]
    pub length: usize,
    pub samples: usize,
    pub phi2: f64,
    pub std_error: f64,
}

fn random_layers<R: Rng + ?Sized>(rng: &mut R, n_qubits: usize, length: usize) -> Result<Vec<LayerSpec>> {
    (0..length).map(|_| LayerSpec::random(rng, n_qubits)).collect()
}

/// `|Tr U|²` of a Clifford from its tableau.
///
/// `Σ_P P U P = d Tr(U) I` gives `d |Tr U|² = Σ_P Tr(U† P U P)`, and each
/// term is `±d` when `U P U† = ±P` and zero otherwise.
pub fn clifford_trace_norm_sqr(tableau: &StabilizerTableau) -> Result<f64> {
    let n = tableau.n_qubits();
    let mut total = 0i64;
    for idx in 0..1usize << (2 * n) {
        let p = PauliOperator::from_index(n, idx)?;
        let image = tableau.conjugate(&p)?;
        if image.unsigned() == p {
            total += if image.is_negative() { -1 } else { 1 };
        }
    }
    Ok(total as f64)
}

/// `|Tr U|⁴` for one random `L`-layer product.
pub fn trace_fourth_power<R: Rng + ?Sized>(rng: &mut R, n_qubits: usize, length: usize) -> Result<f64> {
    let layers = random_layers(rng, n_qubits, length)?;
    let mut tableau = StabilizerTableau::identity(n_qubits)?;
    for layer in &layers {
        layer.validate(n_qubits)?;
        tableau.apply_all(&layer.gates()?)?;
    }
    Ok(clifford_trace_norm_sqr(&tableau)?.powi(2))
}

/// Sample `i` uses its own generator, stream `i` of `seed`.
pub fn frame_potential(n_qubits: usize, length: usize, samples: usize, seed: u64) -> Result<FramePotentialEstimate> {
    if n_qubits > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits {
            what: "frame potential",
            n_qubits,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("frame potential needs at least 2 samples".into()));
    }
    let values = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            trace_fourth_power(&mut rng, n_qubits, length)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    Ok(FramePotentialEstimate {
        n_qubits,
        length,
        samples,
        phi2: mean,
        std_error: (var / samples as f64).sqrt(),
    })
}

/// Sequence lengths, circuits and shots of one simulated experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentDesign {
    pub lengths: Vec<usize>,
    pub circuits_per_length: usize,
    pub shots: u64,
}

impl Default for ExperimentDesign {
    /// Four lengths, ten circuits per length, one hundred shots per circuit.
    fn default() -> Self {
        Self {
            lengths: vec![4, 8, 12, 16],
            circuits_per_length: 10,
            shots: 100,
        }
    }
}

/// Simulates one depolarizing experiment and fits it.
pub fn simulate_and_fit(
    n_qubits: usize,
    p: f64,
    design: &ExperimentDesign,
    seed: u64,
) -> Result<(DecayDataset, FitResult)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs = sample_experiment(&mut rng, n_qubits, &design.lengths, design.circuits_per_length)?;
    let data = simulate_survival(&specs, &NoiseModel::depolarizing(p), design.shots, Backend::Stabilizer, rng.random())?;
    let fit = fit_decay(&data)?;
    Ok((data, fit))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub experiment: usize,
    pub seed: u64,
    pub p: f64,
    pub u_true: f64,
    pub u_est: f64,
}

impl ScatterRow {
    pub fn error(&self) -> f64 {
        self.u_est - self.u_true
    }
}

/// `num_experiments` experiments with `p ~ U[0, p_max]` two-qubit
/// depolarizing noise, each paired with the closed-form unitarity of the
/// per-layer channel.
pub fn scatter_experiment(
    n_qubits: usize,
    num_experiments: usize,
    p_max: f64,
    design: &ExperimentDesign,
    seed: u64,
) -> Result<Vec<ScatterRow>> {
    if n_qubits == 0 || n_qubits % 2 != 0 {
        return Err(Error::OddQubitCount(n_qubits));
    }
    if !(0.0..=1.0).contains(&p_max) {
        return Err(Error::InvalidParameter(format!("p_max = {p_max} outside [0, 1]")));
    }
    (0..num_experiments)
        .into_par_iter()
        .map(|experiment| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(experiment as u64);
            let p = rng.random::<f64>() * p_max;
            let run_seed: u64 = rng.random();
            let (_, fit) = simulate_and_fit(n_qubits, p, design, run_seed)?;
            Ok(ScatterRow {
                experiment,
                seed: run_seed,
                p,
                u_true: depolarizing_tensor_unitarity(p, n_qubits / 2)?,
                u_est: fit.u,
            })
        })
        .collect()
}

/// Mean, standard error of the mean, and sample standard deviation.
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, (var / n).sqrt(), var.sqrt())
}

pub fn write_scatter_csv(rows: &[ScatterRow], path: &std::path::Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
