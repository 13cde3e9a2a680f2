//! Command-line experiment harness: seeded runs writing CSV/JSON artifacts
//! plus a `manifest.json` per run.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::boolfn::{named_function, TruthTable};
use crate::channel::{choi_of_circuit, choi_of_identity, read_choi_file, validate_cptp, write_choi_file, AuxState, ChoiRep};
use crate::circuit::{random_qac_with, read_circuit, QacCircuit, RandomQacSpec};
use crate::error::{Error, Result};
use crate::learning::{learn_channel, sample_choi_shadows, DensityBackend, LearnConfig, OracleMode, PurificationBackend, ShadowBackend};
use crate::linalg::set_memory_cap_bytes;
use crate::spectral::{concentration_report, correlation_report, cz_removal_report, write_curve_csv};
use crate::random::substream;

pub const DEFAULT_MEM_CAP: u64 = 2 << 30;
pub const MAX_QUBITS: usize = 13;

#[derive(Parser, Debug, Clone, Serialize)]
#[command(name = "qacspec", version, about = "Pauli-spectrum experiments on shallow CZ circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every stochastic step (required for random inputs and sampling).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    #[arg(long, global = true)]
    pub k: Option<u32>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub workers: Option<u32>,
    /// Memory cap in bytes for dense matrices.
    #[arg(long = "mem-cap", global = true, default_value_t = DEFAULT_MEM_CAP)]
    pub mem_cap: u64,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Pauli spectrum and weight profile of a circuit or Choi file.
    Spectrum(SpectrumArgs),
    /// Weight-above-k curves against the concentration bound over random circuits.
    Concentrate(ConcentrateArgs),
    /// Wide-CZ removal distances against the `m²/2^ℓ` bounds.
    Czremove(CzRemoveArgs),
    /// Agreement of random circuits with a Boolean function.
    Correlate(CorrelateArgs),
    /// Low-degree learning of a channel.
    Learn(LearnArgs),
    /// CPTP check of a Choi file.
    Validate(ValidateArgs),
}

/// Random circuit parameters.
#[derive(Args, Debug, Clone, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 4)]
    pub q: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Allowed CZ widths (default `2..=q`).
    #[arg(long, value_delimiter = ',')]
    pub widths: Vec<usize>,
    #[arg(long = "gate-prob", default_value_t = 0.5)]
    pub gate_prob: f64,
    /// `none`, `clean:A` or `dirty:A`.
    #[arg(long, default_value = "none")]
    pub aux: String,
}

impl GenArgs {
    fn spec(&self) -> RandomQacSpec {
        let widths = if self.widths.is_empty() {
            (2..=self.q).collect()
        } else {
            self.widths.clone()
        };
        RandomQacSpec {
            q: self.q,
            d: self.d,
            widths,
            gate_prob: self.gate_prob,
        }
    }

    fn generate(&self, seed: u64, index: u64) -> Result<QacCircuit> {
        check_qubits(self.q)?;
        let aux = parse_aux(&self.aux)?;
        Ok(random_qac_with(&self.spec(), &mut substream(seed, index))?.with_aux(aux))
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, conflicts_with = "choi")]
    pub circuit: Option<PathBuf>,
    #[arg(long)]
    pub choi: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GenArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConcentrateArgs {
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GenArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CzRemoveArgs {
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Remove CZ gates of width at least this.
    #[arg(long, default_value_t = 3)]
    pub ell: usize,
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GenArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CorrelateArgs {
    /// `parity`, `majority` or a hex table `n=<n>:<hex>`.
    #[arg(long = "f", default_value = "parity")]
    pub function: String,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, value_delimiter = ',')]
    pub widths: Vec<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LearnArgs {
    #[arg(long, value_parser = parse_oracle, default_value = "shadows")]
    pub oracle: OracleMode,
    #[arg(long, conflicts_with_all = ["choi", "channel"])]
    pub circuit: Option<PathBuf>,
    #[arg(long, conflicts_with = "channel")]
    pub choi: Option<PathBuf>,
    /// Named channel `identity:N`.
    #[arg(long)]
    pub channel: Option<String>,
    /// Shadow backend: `density` or `purification` (circuit sources only).
    #[arg(long, default_value = "density")]
    pub backend: String,
    /// Refuse runs needing more shots than this.
    #[arg(long = "shot-cap", default_value_t = crate::learning::DEFAULT_SHOT_CAP)]
    pub shot_cap: u64,
    /// Also write the raw shadow shots as `shots.csv`.
    #[arg(long = "dump-shots")]
    pub dump_shots: bool,
    #[command(flatten)]
    pub gen: GenArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub choi: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

fn parse_oracle(s: &str) -> std::result::Result<OracleMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `none`, `clean:A` or `dirty:A`.
pub fn parse_aux(s: &str) -> Result<AuxState> {
    let bad = || Error::InvalidArgument(format!("aux must be none, clean:A or dirty:A, got `{s}`"));
    if s == "none" {
        return Ok(AuxState::None);
    }
    let (kind, count) = s.split_once(':').ok_or_else(bad)?;
    let a: usize = count.parse().map_err(|_| bad())?;
    match (kind, a) {
        (_, 0) => Ok(AuxState::None),
        ("clean", a) => Ok(AuxState::Clean(a)),
        ("dirty", a) => Ok(AuxState::Dirty(a)),
        _ => Err(bad()),
    }
}

fn check_qubits(q: usize) -> Result<()> {
    if q > MAX_QUBITS {
        return Err(Error::Unsupported(format!(
            "q = {q} exceeds the supported maximum of {MAX_QUBITS} qubits"
        )));
    }
    Ok(())
}

fn load_circuit(path: &Path) -> Result<QacCircuit> {
    let c = read_circuit(path)?;
    check_qubits(c.num_qubits())?;
    Ok(c)
}

impl Cli {
    fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidArgument("--seed is required for this run".into()))
    }

    /// Config identity: everything except the output directory and worker count.
    pub fn config_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.config_json().as_bytes()))
    }

    fn subcommand(&self) -> &'static str {
        match self.command {
            Command::Spectrum(_) => "spectrum",
            Command::Concentrate(_) => "concentrate",
            Command::Czremove(_) => "czremove",
            Command::Correlate(_) => "correlate",
            Command::Learn(_) => "learn",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    version: &'a str,
    seed: Option<u64>,
    config_hash: String,
    config: serde_json::Value,
    artifacts: Vec<String>,
}

/// Artifacts produced by a run, relative to the output directory.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub artifacts: Vec<String>,
    /// One-line JSON summary printed on success.
    pub summary: serde_json::Value,
    /// Runs whose checks fail still write artifacts but exit nonzero.
    pub failure: Option<String>,
}

struct Writer<'a> {
    dir: &'a Path,
    artifacts: Vec<String>,
}

impl Writer<'_> {
    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, body)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.text(name, &body)
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.text(name, &String::from_utf8(buf).expect("CSV is UTF-8"))
    }
}

/// Runs the configured experiment on a dedicated thread pool and writes the manifest.
pub fn run(cli: &Cli) -> Result<RunOutput> {
    set_memory_cap_bytes(cli.mem_cap);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::InvalidArgument("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(w as usize);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    fs::create_dir_all(&cli.out)?;
    let mut w = Writer {
        dir: &cli.out,
        artifacts: Vec::new(),
    };
    let (summary, failure) = pool.install(|| dispatch(cli, &mut w))?;
    let manifest = Manifest {
        subcommand: cli.subcommand(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        config_hash: cli.config_hash(),
        config: serde_json::from_str(&cli.config_json())?,
        artifacts: w.artifacts.clone(),
    };
    w.json("manifest.json", &manifest)?;
    Ok(RunOutput {
        artifacts: w.artifacts,
        summary,
        failure,
    })
}

type Outcome = (serde_json::Value, Option<String>);

fn dispatch(cli: &Cli, w: &mut Writer<'_>) -> Result<Outcome> {
    match &cli.command {
        Command::Spectrum(a) => run_spectrum(cli, a, w),
        Command::Concentrate(a) => run_concentrate(cli, a, w),
        Command::Czremove(a) => run_czremove(cli, a, w),
        Command::Correlate(a) => run_correlate(cli, a, w),
        Command::Learn(a) => run_learn(cli, a, w),
        Command::Validate(a) => run_validate(a, w),
    }
}

fn run_spectrum(cli: &Cli, a: &SpectrumArgs, w: &mut Writer<'_>) -> Result<Outcome> {
    let phi = match (&a.circuit, &a.choi) {
        (Some(path), _) => choi_of_circuit(&load_circuit(path)?)?,
        (None, Some(path)) => read_choi_file(path)?,
        (None, None) => choi_of_circuit(&a.gen.generate(cli.require_seed()?, 0)?)?,
    };
    let spectrum = phi.spectrum()?;
    w.csv("spectrum.csv", |b| spectrum.write_csv(b))?;
    w.csv("profile.csv", |b| spectrum.write_profile_csv(b))?;
    let summary = json!({
        "n_in": phi.n_in(),
        "n_out": phi.n_out(),
        "total_weight": spectrum.total_weight(),
        "weight_profile": spectrum.weight_profile(),
        "hermiticity_residual": spectrum.hermiticity_residual(),
    });
    w.json("spectrum.json", &summary)?;
    Ok((summary, None))
}

fn run_concentrate(cli: &Cli, a: &ConcentrateArgs, w: &mut Writer<'_>) -> Result<Outcome> {
    let circuits: Vec<QacCircuit> = match &a.circuit {
        Some(path) => vec![load_circuit(path)?],
        None => {
            let seed = cli.require_seed()?;
            (0..a.trials as u64).map(|i| a.gen.generate(seed, i)).collect::<Result<_>>()?
        }
    };
    let reports = circuits
        .par_iter()
        .map(concentration_report)
        .collect::<Result<Vec<_>>>()?;
    for (i, r) in reports.iter().enumerate() {
        w.csv(&format!("curves/trial_{i:04}.csv"), |b| write_curve_csv(&r.curve, b))?;
    }
    let counterexamples = reports.iter().filter(|r| !r.all_satisfied).count();
    let summary = json!({ "trials": reports.len(), "counterexamples": counterexamples });
    w.json("concentration.json", &json!({ "summary": summary, "reports": reports }))?;
    let failure = (counterexamples > 0).then(|| format!("{counterexamples} circuits violate the bound"));
    Ok((summary, failure))
}

fn run_czremove(cli: &Cli, a: &CzRemoveArgs, w: &mut Writer<'_>) -> Result<Outcome> {
    let circuits: Vec<QacCircuit> = match &a.circuit {
        Some(path) => vec![load_circuit(path)?],
        None => {
            let seed = cli.require_seed()?;
            (0..a.trials as u64).map(|i| a.gen.generate(seed, i)).collect::<Result<_>>()?
        }
    };
    let reports = circuits
        .par_iter()
        .map(|c| cz_removal_report(c, a.ell))
        .collect::<Result<Vec<_>>>()?;
    let violations = reports.iter().filter(|r| !(r.unitary_ok && r.spectrum_ok)).count();
    let summary = json!({
        "trials": reports.len(),
        "ell": a.ell,
        "removed_total": reports.iter().map(|r| r.removed).sum::<usize>(),
        "violations": violations,
    });
    w.json("czremove.json", &json!({ "summary": summary, "reports": reports }))?;
    let failure = (violations > 0).then(|| format!("{violations} circuits violate a removal bound"));
    Ok((summary, failure))
}

fn run_correlate(cli: &Cli, a: &CorrelateArgs, w: &mut Writer<'_>) -> Result<Outcome> {
    check_qubits(a.n)?;
    let seed = cli.require_seed()?;
    let f = if a.function.starts_with("n=") {
        let f = TruthTable::from_hex(&a.function)?;
        if f.n() != a.n {
            return Err(Error::DimensionMismatch { expected: a.n, found: f.n() });
        }
        f
    } else {
        named_function(&a.function, a.n)?
    };
    let k = cli.k.map(|k| k as usize).unwrap_or(a.n.saturating_sub(1)).max(1);
    let gen = GenArgs {
        q: a.n,
        d: a.d,
        widths: a.widths.clone(),
        gate_prob: 0.5,
        aux: "none".into(),
    };
    let reports = (0..a.trials as u64)
        .into_par_iter()
        .map(|i| {
            let phi = choi_of_circuit(&gen.generate(seed, i)?)?;
            correlation_report(&phi, &f, k, Some(&a.function))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_agreement = reports.iter().map(|r| r.agreement).fold(f64::NEG_INFINITY, f64::max);
    let proof_violations = reports.iter().filter(|r| !r.proof_bound_holds).count();
    let stated_violations = reports.iter().filter(|r| !r.stated_bound_holds).count();
    let high_degree_violations = reports.iter().filter(|r| r.high_degree_bound_holds == Some(false)).count();
    let summary = json!({
        "function": a.function,
        "n": a.n,
        "k": k,
        "trials": reports.len(),
        "max_agreement": max_agreement,
        "proof_bound_violations": proof_violations,
        "stated_bound_violations": stated_violations,
        "high_degree_bound_violations": high_degree_violations,
        "discrepancies": reports.iter().filter(|r| r.discrepancy).count(),
    });
    w.json("correlate.json", &json!({ "summary": summary, "reports": reports }))?;
    let failure = (proof_violations > 0).then(|| format!("{proof_violations} circuits exceed the proof bound"));
    Ok((summary, failure))
}

/// `identity:N`.
fn named_channel(spec: &str) -> Result<ChoiRep> {
    match spec.split_once(':') {
        Some(("identity", n)) => {
            let n: usize = n
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad channel `{spec}`")))?;
            check_qubits(2 * n)?;
            Ok(choi_of_identity(n))
        }
        _ => Err(Error::InvalidArgument(format!("unknown channel `{spec}` (expected identity:N)"))),
    }
}

fn run_learn(cli: &Cli, a: &LearnArgs, w: &mut Writer<'_>) -> Result<Outcome> {
    let stochastic = a.oracle != OracleMode::Exact;
    let seed = if stochastic { cli.require_seed()? } else { cli.seed.unwrap_or(0) };
    let circuit = match (&a.circuit, &a.choi, &a.channel) {
        (Some(path), _, _) => Some(load_circuit(path)?),
        (None, None, None) => Some(a.gen.generate(cli.require_seed()?, 0)?),
        _ => None,
    };
    let truth = match (&circuit, &a.choi, &a.channel) {
        (Some(c), _, _) => choi_of_circuit(c)?,
        (None, Some(path), _) => read_choi_file(path)?,
        (None, None, Some(spec)) => named_channel(spec)?,
        (None, None, None) => unreachable!("a circuit is generated when no source is given"),
    };
    let backend = match a.backend.as_str() {
        "density" => ShadowBackend::Density,
        "purification" => ShadowBackend::Purification,
        other => return Err(Error::InvalidArgument(format!("unknown backend `{other}`"))),
    };
    let mut cfg = LearnConfig::new(
        cli.k.map(|k| k as usize).unwrap_or(2),
        cli.epsilon.unwrap_or(0.1),
        cli.delta.unwrap_or(0.1),
        seed,
    )
    .oracle(a.oracle);
    cfg.shots = cli.shots;
    cfg.shot_cap = a.shot_cap;
    cfg.backend = backend;
    let result = learn_channel(&truth, circuit.as_ref(), &cfg)?;
    w.csv("estimates.csv", |b| result.estimates.write_csv(b))?;
    w.json("learn.json", &result.report)?;
    let choi_path = w.dir.join("phi_rounded.choi");
    write_choi_file(&result.phi_rounded, &choi_path, 1e-6)?;
    w.artifacts.push("phi_rounded.choi".into());
    w.artifacts.push("phi_rounded.choi.json".into());
    if a.dump_shots && a.oracle == OracleMode::Shadows {
        let shots = result.estimates.shots_used;
        let samples = match (backend, &circuit) {
            (ShadowBackend::Purification, Some(c)) => sample_choi_shadows(&PurificationBackend::new(c)?, shots, seed)?,
            _ => sample_choi_shadows(&DensityBackend::new(&truth)?, shots, seed)?,
        };
        w.csv("shots.csv", |b| samples.write_csv(b))?;
    }
    Ok((serde_json::to_value(&result.report)?, None))
}

fn run_validate(a: &ValidateArgs, w: &mut Writer<'_>) -> Result<Outcome> {
    let phi = read_choi_file(&a.choi)?;
    let report = validate_cptp(&phi, a.tol)?;
    w.json("validate.json", &report)?;
    let failure = (!report.ok).then(|| "channel is not CPTP within tolerance".to_string());
    Ok((serde_json::to_value(&report)?, failure))
}

/// Machine-readable error object.
pub fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": kind, "message": message }).to_string()
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Capacity { .. } => "capacity",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::NotPowerOfTwo(_) => "not_power_of_two",
        Error::QubitOutOfRange { .. } => "qubit_out_of_range",
        Error::DuplicateQubit(_) => "duplicate_qubit",
        Error::NotHermitian(_) => "not_hermitian",
        Error::NotUnitary(_) => "not_unitary",
        Error::NoConvergence(_) => "no_convergence",
        Error::InvalidState(_) => "invalid_state",
        Error::InvalidChannel(_) => "invalid_channel",
        Error::InvalidCircuit(_) => "invalid_circuit",
        Error::Parse { .. } => "parse",
        Error::BudgetExceeded { .. } => "budget_exceeded",
        Error::RoundingFailed { .. } => "rounding_failed",
        Error::Unsupported(_) => "unsupported",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// Parses arguments, runs, prints a JSON line; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return 2;
        }
    };
    match run(&cli) {
        Ok(out) => match out.failure {
            None => {
                println!("{}", out.summary);
                0
            }
            Some(msg) => {
                println!("{}", out.summary);
                eprintln!("{}", error_json("check_failed", &msg));
                1
            }
        },
        Err(e) => {
            eprintln!("{}", error_json(error_kind(&e), &e.to_string()));
            1
        }
    }
}
