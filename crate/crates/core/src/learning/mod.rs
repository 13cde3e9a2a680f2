//! Low-degree learning of channels: estimate `Φ̂(P)` for `|P| ≤ k`, rebuild
//! `Φ̃`, then round to the nearest CPTP map.

pub mod queries;
pub mod rounding;
pub mod shadows;

use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::ChoiRep;
use crate::circuit::QacCircuit;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::pauli::{fmt_f64, inverse_pauli_transform, low_degree_count, low_degree_paulis, pauli_coefficient, PauliString};

pub use queries::{measurement_query, pauli_input_state, query_input_state, QueryMode};
pub use rounding::{round_to_cptp, RoundingOptions, RoundingResult};
pub use shadows::{
    sample_choi_shadows, shadow_estimate, DensityBackend, PurificationBackend, ShadowSampler, ShadowSamples, ShadowShot,
    ShadowStats,
};

pub const DEFAULT_SHOT_CAP: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Exact,
    Shadows,
    Queries,
}

impl FromStr for OracleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "shadows" => Ok(Self::Shadows),
            "queries" => Ok(Self::Queries),
            other => Err(Error::InvalidArgument(format!("unknown oracle `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShadowBackend {
    /// Pauli coefficients of the Choi state.
    Density,
    /// State-vector simulation of a circuit's purified Choi state.
    Purification,
}

/// Coefficient accuracy `η = √(ε/(2|F_k|))`.
pub fn eta_for(epsilon: f64, f_k: u64) -> f64 {
    (epsilon / (2.0 * f_k as f64)).sqrt()
}

/// Shadow shots `⌈2·3^k·ln(2|F_k|/δ)/η₀²⌉` with `η₀ = 2^{n_out}·η`.
pub fn shadow_budget(k: usize, n_out: usize, f_k: u64, eta: f64, delta: f64) -> u64 {
    let eta0 = eta * (1u64 << n_out) as f64;
    let shots = 2.0 * 3f64.powi(k as i32) * (2.0 * f_k as f64 / delta).ln() / (eta0 * eta0);
    shots.ceil() as u64
}

/// Shots per query setting `⌈2·ln(2|F_k|/δ)/η₀²⌉` with `η₀ = 2^{n_out−1}·η`.
pub fn query_shots_per_setting(n_out: usize, f_k: u64, eta: f64, delta: f64) -> u64 {
    let eta0 = eta * (1u64 << n_out) as f64 / 2.0;
    (2.0 * (2.0 * f_k as f64 / delta).ln() / (eta0 * eta0)).ceil() as u64
}

/// Estimates of `Φ̂(P)` for `P ∈ F_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatedSpectrum {
    pub n_in: usize,
    pub n_out: usize,
    pub k: usize,
    /// Target per-coefficient accuracy (0 for exact estimates).
    pub eta: f64,
    pub paulis: Vec<PauliString>,
    pub estimates: Vec<f64>,
    pub shots_used: u64,
}

impl EstimatedSpectrum {
    pub fn num_qubits(&self) -> usize {
        self.n_in + self.n_out
    }

    /// `Φ̃ = Σ_{P∈F_k} Φ̂_est(P)·P`.
    pub fn reconstruct(&self) -> Result<ChoiRep> {
        let m = self.num_qubits();
        let mut coeffs = vec![0.0; 1usize << (2 * m)];
        for (p, &v) in self.paulis.iter().zip(&self.estimates) {
            coeffs[p.code() as usize] = v;
        }
        ChoiRep::new(self.n_in, self.n_out, inverse_pauli_transform(&coeffs, m)?)
    }

    pub fn max_error(&self, phi: &ChoiRep) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (p, &v) in self.paulis.iter().zip(&self.estimates) {
            worst = worst.max((pauli_coefficient(phi.matrix(), p)?.re - v).abs());
        }
        Ok(worst)
    }

    /// CSV `pauli_code_base4,degree,coefficient`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "pauli_code_base4,degree,coefficient")?;
        for (p, &v) in self.paulis.iter().zip(&self.estimates) {
            writeln!(w, "{},{},{}", p.base4_string(), p.degree(), fmt_f64(v))?;
        }
        Ok(())
    }
}

pub fn estimate_exact(phi: &ChoiRep, k: usize) -> Result<EstimatedSpectrum> {
    let paulis = low_degree_paulis(phi.num_qubits(), k);
    let estimates = paulis
        .par_iter()
        .map(|p| pauli_coefficient(phi.matrix(), p).map(|c| c.re))
        .collect::<Result<_>>()?;
    Ok(EstimatedSpectrum {
        n_in: phi.n_in(),
        n_out: phi.n_out(),
        k,
        eta: 0.0,
        paulis,
        estimates,
        shots_used: 0,
    })
}

pub fn estimate_from_shadows(samples: &ShadowSamples, k: usize) -> EstimatedSpectrum {
    let m = samples.num_qubits();
    let n_out = samples.n_out();
    let paulis = low_degree_paulis(m, k);
    let estimates = paulis.par_iter().map(|p| samples.estimate_coefficient(p)).collect();
    EstimatedSpectrum {
        n_in: m - n_out,
        n_out,
        k,
        eta: 0.0,
        paulis,
        estimates,
        shots_used: samples.len() as u64,
    }
}

/// Query-based estimates. `Φ̂(I⊗Q) = Tr(Q·E(I/2^n))/2^{n_out}` and, for
/// `R_in ≠ I`, `Φ̂(R) = Tr(R_out·E(ρ*))/2^{n_out} − Φ̂(I⊗R_out)`. Settings
/// measuring the identity are answered without shots.
pub fn estimate_from_queries(
    phi: &ChoiRep,
    k: usize,
    shots_per_setting: Option<u64>,
    seed: u64,
) -> Result<EstimatedSpectrum> {
    let (n_in, n_out) = (phi.n_in(), phi.n_out());
    let paulis = low_degree_paulis(phi.num_qubits(), k);
    let l = (1u64 << n_out) as f64;
    let mode = match shots_per_setting {
        Some(shots) => QueryMode::Sampled { shots, seed },
        None => QueryMode::Exact,
    };
    let mixed = ComplexMatrix::identity(1 << n_in).scale(1.0 / (1u64 << n_in) as f64);
    let raw: Vec<(f64, u64)> = paulis
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let r_in = p.slice(0..n_in);
            let r_out = p.slice(n_in..n_in + n_out);
            if r_out.degree() == 0 {
                return Ok((1.0, 0));
            }
            let rho = if r_in.degree() == 0 { mixed.clone() } else { query_input_state(&r_in) };
            let shots = shots_per_setting.unwrap_or(0);
            Ok((measurement_query(phi, &rho, &r_out, mode, idx as u64)?, shots))
        })
        .collect::<Result<_>>()?;
    let mut q_type: HashMap<u64, f64> = HashMap::new();
    for (p, &(t, _)) in paulis.iter().zip(&raw) {
        if p.slice(0..n_in).degree() == 0 {
            q_type.insert(p.code(), t / l);
        }
    }
    let out_mask = (1u64 << (2 * n_out)) - 1;
    let estimates = paulis
        .iter()
        .zip(&raw)
        .map(|(p, &(t, _))| {
            if p.slice(0..n_in).degree() == 0 {
                t / l
            } else {
                t / l - q_type[&(p.code() & out_mask)]
            }
        })
        .collect();
    Ok(EstimatedSpectrum {
        n_in,
        n_out,
        k,
        eta: 0.0,
        paulis,
        estimates,
        shots_used: raw.iter().map(|&(_, s)| s).sum(),
    })
}

/// Access to the unknown channel.
#[derive(Clone, Copy)]
pub enum Oracle<'a> {
    Exact(&'a ChoiRep),
    Shadows(&'a dyn ShadowSampler),
    Queries(&'a ChoiRep),
}

impl Oracle<'_> {
    pub fn mode(&self) -> OracleMode {
        match self {
            Oracle::Exact(_) => OracleMode::Exact,
            Oracle::Shadows(_) => OracleMode::Shadows,
            Oracle::Queries(_) => OracleMode::Queries,
        }
    }

    fn shape(&self) -> (usize, usize) {
        match self {
            Oracle::Exact(phi) | Oracle::Queries(phi) => (phi.n_in(), phi.n_out()),
            Oracle::Shadows(s) => (s.num_qubits() - s.n_out(), s.n_out()),
        }
    }
}

/// Shot budget for [`estimate_low_degree`]: total shots for shadows, shots
/// per setting for queries, 0 for the exact oracle.
pub fn shot_budget(mode: OracleMode, m: usize, n_out: usize, k: usize, eta: f64, delta: f64) -> u64 {
    let f_k = low_degree_count(m, k);
    match mode {
        OracleMode::Exact => 0,
        OracleMode::Shadows => shadow_budget(k.min(m), n_out, f_k, eta, delta),
        OracleMode::Queries => query_shots_per_setting(n_out, f_k, eta, delta),
    }
}

/// Estimates `Φ̂(P)` for all `P ∈ F_k`, each within `eta` with probability at
/// least `1 − delta`. `shots` overrides the computed budget.
pub fn estimate_low_degree(
    oracle: Oracle<'_>,
    k: usize,
    eta: f64,
    delta: f64,
    seed: u64,
    shots: Option<u64>,
    shot_cap: u64,
) -> Result<EstimatedSpectrum> {
    let (n_in, n_out) = oracle.shape();
    let m = n_in + n_out;
    if k > m {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds m = {m}")));
    }
    if !(eta > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument("need eta > 0 and 0 < delta < 1".into()));
    }
    let per = shots.unwrap_or_else(|| shot_budget(oracle.mode(), m, n_out, k, eta, delta));
    let total = match oracle {
        Oracle::Queries(_) => per.saturating_mul(low_degree_count(m, k)),
        _ => per,
    };
    if total > shot_cap {
        return Err(Error::BudgetExceeded {
            requested: total,
            cap: shot_cap,
        });
    }
    let mut est = match oracle {
        Oracle::Exact(phi) => estimate_exact(phi, k)?,
        Oracle::Shadows(sampler) => estimate_from_shadows(&sample_choi_shadows(sampler, per, seed)?, k),
        Oracle::Queries(phi) => estimate_from_queries(phi, k, Some(per), seed)?,
    };
    est.eta = eta;
    Ok(est)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnConfig {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub oracle: OracleMode,
    /// Overrides the computed shot budget (per setting for queries).
    pub shots: Option<u64>,
    pub shot_cap: u64,
    pub backend: ShadowBackend,
    pub rounding: RoundingOptions,
}

impl LearnConfig {
    pub fn new(k: usize, epsilon: f64, delta: f64, seed: u64) -> Self {
        Self {
            k,
            epsilon,
            delta,
            seed,
            oracle: OracleMode::Shadows,
            shots: None,
            shot_cap: DEFAULT_SHOT_CAP,
            backend: ShadowBackend::Density,
            rounding: RoundingOptions::default(),
        }
    }

    pub fn oracle(mut self, oracle: OracleMode) -> Self {
        self.oracle = oracle;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument("need epsilon > 0 and 0 < delta < 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnReport {
    pub oracle: OracleMode,
    pub n_in: usize,
    pub n_out: usize,
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub num_coefficients: u64,
    pub shot_budget: u64,
    pub shots_used: u64,
    pub max_coefficient_error: f64,
    /// `W^{>k}[Φ]` of the true channel.
    pub truncation_weight: f64,
    pub error_pre: f64,
    pub error_post: f64,
    pub rounding_iterations: usize,
    pub rounding_converged: bool,
    pub within_epsilon_plus_tail: bool,
}

#[derive(Clone, Debug)]
pub struct LearnResult {
    pub estimates: EstimatedSpectrum,
    pub phi_tilde: ChoiRep,
    pub phi_rounded: ChoiRep,
    pub report: LearnReport,
}

/// Learns `Φ` from the chosen oracle. `circuit` enables the purification
/// backend for shadows; `truth` is the channel the oracle simulates.
pub fn learn_channel(truth: &ChoiRep, circuit: Option<&QacCircuit>, cfg: &LearnConfig) -> Result<LearnResult> {
    cfg.check()?;
    let (n_in, n_out) = (truth.n_in(), truth.n_out());
    let m = truth.num_qubits();
    let f_k = low_degree_count(m, cfg.k);
    let eta = eta_for(cfg.epsilon, f_k);
    let k = cfg.k.min(m);
    let density;
    let purification;
    let oracle = match cfg.oracle {
        OracleMode::Exact => Oracle::Exact(truth),
        OracleMode::Queries => Oracle::Queries(truth),
        OracleMode::Shadows => match (cfg.backend, circuit) {
            (ShadowBackend::Purification, Some(c)) => {
                purification = PurificationBackend::new(c)?;
                Oracle::Shadows(&purification)
            }
            (ShadowBackend::Purification, None) => {
                return Err(Error::InvalidArgument("purification backend needs a circuit".into()))
            }
            (ShadowBackend::Density, _) => {
                density = DensityBackend::new(truth)?;
                Oracle::Shadows(&density)
            }
        },
    };
    let budget = shot_budget(cfg.oracle, m, n_out, k, eta, cfg.delta);
    let estimates = estimate_low_degree(oracle, k, eta, cfg.delta, cfg.seed, cfg.shots, cfg.shot_cap)?;
    let phi_tilde = estimates.reconstruct()?;
    let rounded = round_to_cptp(&phi_tilde, &cfg.rounding)?;
    let error_pre = phi_tilde.normalized_distance_sq(truth)?;
    let error_post = rounded.choi.normalized_distance_sq(truth)?;
    let truncation_weight = truth.weight_above(cfg.k)?;
    let report = LearnReport {
        oracle: cfg.oracle,
        n_in,
        n_out,
        k: cfg.k,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        eta,
        num_coefficients: f_k,
        shot_budget: budget,
        shots_used: estimates.shots_used,
        max_coefficient_error: estimates.max_error(truth)?,
        truncation_weight,
        error_pre,
        error_post,
        rounding_iterations: rounded.iterations,
        rounding_converged: rounded.converged,
        within_epsilon_plus_tail: error_post <= cfg.epsilon + truncation_weight,
    };
    Ok(LearnResult {
        estimates,
        phi_tilde,
        phi_rounded: rounded.choi,
        report,
    })
}
