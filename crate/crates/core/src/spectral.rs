//! Explicit-constant concentration bounds, lightcone checks, the wide-gate
//! removal chain and correlation bounds against Boolean functions.

use std::io::Write;

use serde::Serialize;

use crate::boolfn::{agreement_probability, error_probabilities, fourier_weight_above, wht_fourier, TruthTable};
use crate::channel::{choi_of_circuit, choi_of_circuit_full, ChoiRep};
use crate::circuit::QacCircuit;
use crate::error::{Error, Result};
use crate::linalg::frobenius_norm;
use crate::pauli::{fmt_f64, weight_above, Pauli, PauliSpectrum, PauliString};

/// Residual allowed on statements that hold exactly.
pub const EXACT_TOL: f64 = 1e-10;

/// Smallest `ℓ ≥ 0` with `ℓ^d ≥ x`, i.e. `⌈x^{1/d}⌉` in exact arithmetic.
pub fn integer_root_ceil(x: u64, d: u32) -> u64 {
    if x == 0 {
        return 0;
    }
    let mut ell = (x as f64).powf(1.0 / d as f64).floor().max(1.0) as u64;
    while ell > 1 && (ell - 1).checked_pow(d).is_some_and(|p| p >= x) {
        ell -= 1;
    }
    while ell.checked_pow(d).is_some_and(|p| p < x) {
        ell += 1;
    }
    ell
}

/// `min(1, 32·s²·2^{a − ⌈(k−1)^{1/d}⌉}·‖ψ‖_F²)`.
///
/// For `k ≤ 1` the lightcone argument gives nothing and the trivial bound 1
/// is returned; a CZ-free circuit (`s = 0` or `d = 0`) has no weight above 2.
pub fn concentration_bound(s: usize, d: usize, a: usize, psi_frob_sq: f64, k: usize) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    if s == 0 || d == 0 {
        return 0.0;
    }
    let ell = integer_root_ceil((k - 1) as u64, d as u32);
    let exponent = a as f64 - ell as f64;
    let b = 32.0 * (s * s) as f64 * exponent.exp2() * psi_frob_sq;
    b.min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationParams {
    pub n: usize,
    pub a: usize,
    pub d: usize,
    pub s: usize,
    pub aux_kind: String,
    pub psi_frob_sq: f64,
    pub k_min: usize,
    pub k_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub k: usize,
    pub measured: f64,
    pub bound: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub params: ConcentrationParams,
    /// `W^{=k}` for `k = 0..=m`.
    pub profile: Vec<f64>,
    pub curve: Vec<CurveRow>,
    pub all_satisfied: bool,
}

impl ConcentrationReport {
    pub fn write_curve_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        write_curve_csv(&self.curve, w)
    }
}

/// CSV `k,measured,bound,satisfied`.
pub fn write_curve_csv<W: Write>(rows: &[CurveRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "k,measured,bound,satisfied")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.k, fmt_f64(r.measured), fmt_f64(r.bound), r.satisfied)?;
    }
    Ok(())
}

/// Measured `W^{>k}[Φ_{C,ψ}]` against [`concentration_bound`] for `k = 1..=m`.
pub fn concentration_report(c: &QacCircuit) -> Result<ConcentrationReport> {
    let phi = choi_of_circuit(c)?;
    let spectrum = phi.spectrum()?;
    Ok(concentration_report_from(c, &spectrum))
}

pub fn concentration_report_from(c: &QacCircuit, spectrum: &PauliSpectrum) -> ConcentrationReport {
    let profile = spectrum.weight_profile();
    let m = spectrum.num_qubits();
    let (a, d, s, psi) = (c.num_aux(), c.depth(), c.size(), c.aux().frob_sq());
    let curve: Vec<CurveRow> = (1..=m)
        .map(|k| {
            let measured = weight_above(&profile, k);
            let bound = concentration_bound(s, d, a, psi, k);
            CurveRow {
                k,
                measured,
                bound,
                satisfied: measured <= bound + 1e-12,
            }
        })
        .collect();
    ConcentrationReport {
        params: ConcentrationParams {
            n: c.num_inputs(),
            a,
            d,
            s,
            aux_kind: c.aux().kind_name().to_string(),
            psi_frob_sq: psi,
            k_min: 1,
            k_max: m,
        },
        all_satisfied: curve.iter().all(|r| r.satisfied),
        profile,
        curve,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LightconeReport {
    pub depth: usize,
    pub max_width: usize,
    pub lightcone: Vec<usize>,
    /// `ℓ^d + 1` with `ℓ` the largest CZ width.
    pub width_threshold: usize,
    pub weight_above_width_threshold: f64,
    /// `|lightcone| + 1`.
    pub lightcone_threshold: usize,
    pub weight_above_lightcone_threshold: f64,
    /// Squared weight on Paulis acting on an input qubit outside the lightcone.
    pub weight_outside_lightcone: f64,
    pub ok: bool,
}

/// Checks that `Φ_C` has no weight above `ℓ^d + 1` nor on inputs outside the lightcone.
pub fn check_lightcone_zero_weight(c: &QacCircuit) -> Result<LightconeReport> {
    let phi = choi_of_circuit(c)?;
    let spectrum = phi.spectrum()?;
    let profile = spectrum.weight_profile();
    let lightcone = c.lightcone(c.target());
    let width_threshold = c.max_width().saturating_pow(c.depth() as u32).saturating_add(1);
    let lightcone_threshold = lightcone.len() + 1;
    let n = phi.n_in();
    let outside: Vec<usize> = (0..n).filter(|j| !lightcone.contains(j)).collect();
    let weight_outside_lightcone = spectrum
        .coefficients()
        .iter()
        .enumerate()
        .filter(|(code, _)| {
            let p = PauliString::from_code(*code as u64, spectrum.num_qubits());
            outside.iter().any(|&j| p.letter(j) != Pauli::I)
        })
        .map(|(_, c)| c * c)
        .sum();
    let w1 = weight_above(&profile, width_threshold);
    let w2 = weight_above(&profile, lightcone_threshold);
    Ok(LightconeReport {
        depth: c.depth(),
        max_width: c.max_width(),
        lightcone,
        width_threshold,
        weight_above_width_threshold: w1,
        lightcone_threshold,
        weight_above_lightcone_threshold: w2,
        weight_outside_lightcone,
        ok: w1 <= EXACT_TOL && w2 <= EXACT_TOL && weight_outside_lightcone <= EXACT_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CzRemovalReport {
    pub q: usize,
    pub ell: usize,
    pub removed: usize,
    /// `(1/2^q)‖U − Ũ‖_F²`
    pub unitary_dist_sq_norm: f64,
    /// `‖Φ̂_C − Φ̂_C̃‖₂²`
    pub spectrum_dist: f64,
    pub bound_4m2: f64,
    pub bound_32m2: f64,
    pub unitary_ok: bool,
    pub spectrum_ok: bool,
}

/// Removes CZ gates of width `≥ ell` and measures the unitary and Choi-spectrum distances.
pub fn cz_removal_report(c: &QacCircuit, ell: usize) -> Result<CzRemovalReport> {
    if ell < 2 {
        return Err(Error::InvalidArgument("ell must be at least 2".into()));
    }
    let (reduced, m) = c.remove_wide_gates(ell);
    let u = c.build_unitary()?;
    let ut = reduced.build_unitary()?;
    let q = c.num_qubits();
    let du = frobenius_norm(&(&u - &ut));
    let unitary_dist_sq_norm = du * du / (1u64 << q) as f64;
    let phi = choi_of_circuit_full(c)?;
    let phit = choi_of_circuit_full(&reduced)?;
    let spectrum_dist = phi.normalized_distance_sq(&phit)?;
    let scale = (m * m) as f64 / (ell as f64).exp2();
    let bound_4m2 = 4.0 * scale;
    let bound_32m2 = 32.0 * scale;
    Ok(CzRemovalReport {
        q,
        ell,
        removed: m,
        unitary_dist_sq_norm,
        spectrum_dist,
        bound_4m2,
        bound_32m2,
        unitary_ok: unitary_dist_sq_norm <= bound_4m2 + 1e-12,
        spectrum_ok: spectrum_dist <= bound_32m2 + 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub n: usize,
    pub k: usize,
    pub function: Option<String>,
    pub agreement: f64,
    /// `1 − E_x[w_x]` from per-input channel outputs.
    pub agreement_from_errors: f64,
    /// `½ + Σ_S Φ̂(Z_S⊗Z)·f̂(S)`, exact.
    pub agreement_from_spectra: f64,
    /// `W^{>k−1}[f]`
    pub weight_f: f64,
    /// `W^{>k}[Φ]`
    pub weight_phi: f64,
    /// `W^{>k}` of the computational-basis-measured Choi matrix.
    pub weight_phi_measured: f64,
    /// `1 − max(0, ½√W^{>k−1}[f] − √W^{>k}[Φ])²`
    pub proof_bound: f64,
    pub proof_bound_holds: bool,
    /// `1 − ½√W^{>k−1}[f] + √W^{>k}[Φ]`
    pub stated_bound: f64,
    pub stated_bound_holds: bool,
    /// `½ + √(W^{>k}[Φ]·W^{>k−1}[f])`, valid when `f` has no Fourier weight up to degree `k−1`.
    pub high_degree_bound: Option<f64>,
    pub high_degree_bound_holds: Option<bool>,
    /// The proof and stated forms disagree on whether the bound holds.
    pub discrepancy: bool,
}

/// Agreement of `Φ`'s measured output with `f` and the spectral upper bounds at level `k`.
pub fn correlation_report(phi: &ChoiRep, f: &TruthTable, k: usize, function: Option<&str>) -> Result<CorrelationReport> {
    let n = f.n();
    if k == 0 || k > n + 1 {
        return Err(Error::InvalidArgument(format!("k must lie in 1..={}", n + 1)));
    }
    let agreement = agreement_probability(phi, f)?;
    let w = error_probabilities(phi, f)?;
    let agreement_from_errors = 1.0 - w.iter().sum::<f64>() / w.len() as f64;
    let fs = wht_fourier(f);
    let spectrum = phi.spectrum()?;
    let m = n + 1;
    let mut corr = 0.0;
    let mut measured_profile = vec![0.0; m + 1];
    for (code, &c) in spectrum.coefficients().iter().enumerate() {
        let p = PauliString::from_code(code as u64, m);
        if p.letters().iter().all(|&l| l == Pauli::I || l == Pauli::Z) {
            measured_profile[p.degree()] += c * c;
            if p.letter(n) == Pauli::Z {
                let subset = (0..n)
                    .filter(|&j| p.letter(j) == Pauli::Z)
                    .fold(0usize, |acc, j| acc | (1 << (n - 1 - j)));
                corr += c * fs.get(subset);
            }
        }
    }
    let weight_f = fourier_weight_above(&fs, k - 1);
    let weight_phi = spectrum.weight_above(k);
    let weight_phi_measured = weight_above(&measured_profile, k);
    let gap = (0.5 * weight_f.sqrt() - weight_phi.sqrt()).max(0.0);
    let proof_bound = 1.0 - gap * gap;
    let stated_bound = 1.0 - 0.5 * weight_f.sqrt() + weight_phi.sqrt();
    let low_f: f64 = fs
        .coeffs
        .iter()
        .enumerate()
        .filter(|(s, _)| (s.count_ones() as usize) < k)
        .map(|(_, c)| c * c)
        .sum();
    let high_degree_bound = (low_f <= 1e-12).then(|| 0.5 + (weight_phi * weight_f).sqrt());
    let tol = 1e-12;
    let proof_bound_holds = agreement <= proof_bound + tol;
    let stated_bound_holds = agreement <= stated_bound + tol;
    Ok(CorrelationReport {
        n,
        k,
        function: function.map(str::to_string),
        agreement,
        agreement_from_errors,
        agreement_from_spectra: 0.5 + corr,
        weight_f,
        weight_phi,
        weight_phi_measured,
        proof_bound,
        proof_bound_holds,
        stated_bound,
        stated_bound_holds,
        high_degree_bound,
        high_degree_bound_holds: high_degree_bound.map(|b| agreement <= b + tol),
        discrepancy: proof_bound_holds != stated_bound_holds,
    })
}
