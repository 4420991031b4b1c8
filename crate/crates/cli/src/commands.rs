use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use mirror_bench::analysis::{
    fit_with_bootstrap, frame_potential, scatter_experiment, summarize, write_scatter_csv, DecayDataset,
    ExperimentDesign, FramePotentialEstimate,
};
use mirror_bench::channels::depolarizing_tensor_unitarity;
use mirror_bench::circuits::{build_mirror_circuit, sample_experiment, to_qasm, CircuitFile, MirrorCircuitSpec};
use mirror_bench::plot::{Plot, Series};
use mirror_bench::simulator::{simulate_survival, Backend};

use crate::noise::parse_noise;
use crate::{
    CliError, Command, DesignArgs, FitArgs, FramePotentialArgs, GenerateArgs, RerunArgs, RunArgs, ScatterArgs,
};

type Result<T> = std::result::Result<T, CliError>;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    config: Command,
}

fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Config(msg.into()))
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", out.display())))?;
    let probe = out.join(".write-probe");
    fs::write(&probe, b"")
        .and_then(|_| fs::remove_file(&probe))
        .map_err(|e| CliError::Config(format!("output directory {} is not writable: {e}", out.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn write_manifest(out: &Path, command: &Command) -> Result<()> {
    let m = Manifest {
        tool: "mirror-bench".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: command.clone(),
    };
    write(&out.join(MANIFEST), &(serde_json::to_string_pretty(&m).map_err(runtime)? + "\n"))
}

fn check_design(d: &DesignArgs) -> Result<()> {
    if d.n == 0 || d.n % 2 != 0 {
        return config(format!("--n must be a positive even number, got {}", d.n));
    }
    if d.lengths.is_empty() {
        return config("--lengths must not be empty");
    }
    if d.circuits == 0 {
        return config("--circuits must be positive");
    }
    Ok(())
}

fn design_specs(d: &DesignArgs) -> Result<Vec<MirrorCircuitSpec>> {
    check_design(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(d.seed);
    Ok(sample_experiment(&mut rng, d.n, &d.lengths, d.circuits)?)
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a, command),
        Command::Run(a) => run(a, command),
        Command::Fit(a) => fit(a, command),
        Command::FramePotential(a) => frame(a, command),
        Command::Scatter(a) => scatter(a, command),
        Command::Rerun(a) => rerun(a),
    }
}

fn circuit_file_name(spec: &MirrorCircuitSpec, index: usize) -> String {
    format!("L{:03}_c{index:03}", spec.length)
}

fn generate(a: &GenerateArgs, command: &Command) -> Result<()> {
    let specs = design_specs(&a.design)?;
    prepare_out(&a.out)?;
    let dir = a.out.join("circuits");
    fs::create_dir_all(&dir).map_err(runtime)?;
    let mut per_length = std::collections::BTreeMap::<usize, usize>::new();
    for spec in &specs {
        let index = per_length.entry(spec.length).or_default();
        let compiled = build_mirror_circuit(spec)?;
        let stem = circuit_file_name(spec, *index);
        CircuitFile::new(spec, &compiled)
            .save(&dir.join(format!("{stem}.json")))
            .map_err(runtime)?;
        if a.qasm {
            write(&dir.join(format!("{stem}.qasm")), &to_qasm(&compiled))?;
        }
        *index += 1;
    }
    write_manifest(&a.out, command)?;
    println!("wrote {} circuits to {}", specs.len(), dir.display());
    Ok(())
}

fn load_circuits(dir: &Path) -> Result<Vec<MirrorCircuitSpec>> {
    let dir: PathBuf = if dir.join("circuits").is_dir() { dir.join("circuits") } else { dir.to_path_buf() };
    if !dir.is_dir() {
        return config(format!("circuit directory {} does not exist", dir.display()));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(runtime)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return config(format!("no circuit files in {}", dir.display()));
    }
    paths
        .iter()
        .map(|p| {
            let file = CircuitFile::load(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            let (spec, _) = file
                .into_parts()
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            Ok(spec)
        })
        .collect()
}

/// Simulation master seed, independent of the circuit-sampling stream.
fn simulation_seed(seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng.random()
}

fn run(a: &RunArgs, command: &Command) -> Result<()> {
    let backend: Backend = a.backend.parse().map_err(|e: mirror_bench::Error| CliError::Config(e.to_string()))?;
    let noise = parse_noise(&a.noise).map_err(CliError::Config)?;
    if a.shots == 0 {
        return config("--shots must be positive");
    }
    let specs = match &a.circuits_dir {
        Some(dir) => load_circuits(dir)?,
        None => design_specs(&a.design)?,
    };
    if backend == Backend::Stabilizer && !noise.is_pauli() {
        return config("the stabilizer backend accepts only depolarizing and Pauli noise; use --backend dense");
    }
    prepare_out(&a.out)?;
    let data = simulate_survival(&specs, &noise, a.shots, backend, simulation_seed(a.design.seed))?;
    data.save(&a.out.join("dataset.csv")).map_err(runtime)?;
    data.save(&a.out.join("dataset.json")).map_err(runtime)?;
    write_manifest(&a.out, command)?;
    for s in data.survival() {
        println!("L = {:>3}  p̂ = {:.4}  ({} circuits, {} shots)", s.length, s.mean, s.circuits, s.shots);
    }
    Ok(())
}

fn fit(a: &FitArgs, command: &Command) -> Result<()> {
    if !a.data.is_file() {
        return config(format!("dataset {} does not exist", a.data.display()));
    }
    let data = DecayDataset::load(&a.data).map_err(|e| CliError::Config(format!("{}: {e}", a.data.display())))?;
    prepare_out(&a.out)?;
    let result = fit_with_bootstrap(&data, a.resamples, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
    write(&a.out.join("fit.json"), &(serde_json::to_string_pretty(&result).map_err(runtime)? + "\n"))?;

    let lmax = result.points.iter().map(|p| p.length).max().unwrap_or(1) as f64;
    let curve: Vec<(f64, f64)> = (0..=100)
        .map(|k| {
            let l = 1.0 + (lmax - 1.0) * k as f64 / 100.0;
            (l, result.model(l))
        })
        .collect();
    Plot::new(format!("Mirror decay, n = {}", data.n_qubits), "sequence length L", "survival probability")
        .add(
            Series::points("mean survival", result.points.iter().map(|p| (p.length as f64, p.mean)).collect())
                .with_errors(result.points.iter().map(|p| p.binomial_se).collect()),
        )
        .add(Series::line(format!("fit u = {:.4}", result.u), curve))
        .save(&a.out.join("decay.svg"))
        .map_err(runtime)?;
    write_manifest(&a.out, command)?;

    if result.degenerate {
        eprintln!("warning: survival is constant across L; u is not identifiable (degenerate fit)");
    }
    let ci = result.bootstrap.as_ref().expect("bootstrap requested");
    println!(
        "A = {:.6}  u = {:.6}  B = {:.6}  68% CI [{:.6}, {:.6}]{}",
        result.a,
        result.u,
        result.b,
        ci.u_low,
        ci.u_high,
        if result.degenerate { "  (degenerate)" } else { "" }
    );
    Ok(())
}

fn frame(a: &FramePotentialArgs, command: &Command) -> Result<()> {
    if a.lengths.is_empty() {
        return config("--lengths must not be empty");
    }
    if a.n == 0 || a.n % 2 != 0 {
        return config(format!("--n must be a positive even number, got {}", a.n));
    }
    prepare_out(&a.out)?;
    let estimates = a
        .lengths
        .iter()
        .map(|&l| frame_potential(a.n, l, a.samples, a.seed ^ (l as u64) << 32))
        .collect::<mirror_bench::Result<Vec<FramePotentialEstimate>>>()?;
    let mut w = csv_writer(&a.out.join("frame_potential.csv"))?;
    for e in &estimates {
        w.serialize(e).map_err(runtime)?;
        println!("L = {:>3}  Φ₂ = {:.4} ± {:.4}", e.length, e.phi2, e.std_error);
    }
    w.flush().map_err(runtime)?;
    let (l0, l1) = (*a.lengths.iter().min().unwrap() as f64, *a.lengths.iter().max().unwrap() as f64);
    Plot::new(format!("Frame potential, n = {}", a.n), "sequence length L", "Φ₂")
        .add(
            Series::points("estimate", estimates.iter().map(|e| (e.length as f64, e.phi2)).collect())
                .with_errors(estimates.iter().map(|e| e.std_error).collect()),
        )
        .add(Series::line("2-design value", vec![(l0, 2.0), (l1, 2.0)]))
        .save(&a.out.join("frame_potential.svg"))
        .map_err(runtime)?;
    write_manifest(&a.out, command)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(runtime)
}

#[derive(Serialize)]
struct ScatterSummary {
    n_qubits: usize,
    experiments: usize,
    p_max: f64,
    mean_error: f64,
    std_error_of_mean: f64,
    std_error: f64,
}

fn scatter(a: &ScatterArgs, command: &Command) -> Result<()> {
    if a.n == 0 || a.n % 2 != 0 {
        return config(format!("--n must be a positive even number, got {}", a.n));
    }
    if !(0.0..=1.0).contains(&a.pmax) {
        return config(format!("--pmax must lie in [0, 1], got {}", a.pmax));
    }
    if a.experiments == 0 || a.circuits == 0 || a.shots == 0 || a.lengths.len() < 2 {
        return config("--experiments, --circuits and --shots must be positive, with at least two lengths");
    }
    prepare_out(&a.out)?;
    let design = ExperimentDesign {
        lengths: a.lengths.clone(),
        circuits_per_length: a.circuits,
        shots: a.shots,
    };
    let rows = scatter_experiment(a.n, a.experiments, a.pmax, &design, a.seed)?;
    write_scatter_csv(&rows, &a.out.join("scatter.csv")).map_err(runtime)?;
    let errors: Vec<f64> = rows.iter().map(|r| r.error()).collect();
    let (mean, se, sd) = summarize(&errors);
    let summary = ScatterSummary {
        n_qubits: a.n,
        experiments: a.experiments,
        p_max: a.pmax,
        mean_error: mean,
        std_error_of_mean: se,
        std_error: sd,
    };
    write(
        &a.out.join("scatter_summary.json"),
        &(serde_json::to_string_pretty(&summary).map_err(runtime)? + "\n"),
    )?;
    let truth = (0..=50)
        .map(|k| {
            let p = a.pmax * k as f64 / 50.0;
            depolarizing_tensor_unitarity(p, a.n / 2).map(|u| (p, u))
        })
        .collect::<mirror_bench::Result<Vec<_>>>()?;
    Plot::new(format!("Estimated vs true unitarity, n = {}", a.n), "depolarizing p", "unitarity")
        .add(Series::points("u_est", rows.iter().map(|r| (r.p, r.u_est)).collect()))
        .add(Series::line("u_true", truth))
        .save(&a.out.join("scatter.svg"))
        .map_err(runtime)?;
    write_manifest(&a.out, command)?;
    println!("mean(u_est - u_true) = {mean:.3e} ± {se:.3e}, std = {sd:.3e}");
    Ok(())
}

fn rerun(a: &RerunArgs) -> Result<()> {
    let text = fs::read_to_string(&a.manifest)
        .map_err(|e| CliError::Config(format!("{}: {e}", a.manifest.display())))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", a.manifest.display())))?;
    let mut command = manifest.config;
    if let Some(out) = &a.out {
        match &mut command {
            Command::Generate(x) => x.out = out.clone(),
            Command::Run(x) => x.out = out.clone(),
            Command::Fit(x) => x.out = out.clone(),
            Command::FramePotential(x) => x.out = out.clone(),
            Command::Scatter(x) => x.out = out.clone(),
            Command::Rerun(_) => return config("manifest records a rerun"),
        }
    }
    execute(&command)
}
