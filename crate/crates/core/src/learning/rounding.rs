//! Frobenius projection onto CPTP Choi matrices by Dykstra's alternating
//! projections between the PSD cone and the trace-preserving affine set.

use serde::Serialize;

use crate::channel::{validate_cptp, ChoiRep};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, hermitian_eig, kron, psd_projection, ComplexMatrix, ONE};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundingOptions {
    /// Stop once successive iterates differ by at most this (Frobenius).
    pub tol: f64,
    pub max_iters: usize,
    /// Record per-iteration residuals (one extra eigendecomposition each).
    pub track_history: bool,
}

impl Default for RoundingOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
            track_history: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundingStep {
    pub iteration: usize,
    /// `‖x_{t+1} − x_t‖_F`
    pub step: f64,
    /// `‖Tr_out(y) − I‖_F` for the PSD iterate `y`.
    pub tp_residual: f64,
    /// `min(0, λ_min)` of the trace-preserving iterate `x`, negated.
    pub psd_violation: f64,
}

#[derive(Clone, Debug)]
pub struct RoundingResult {
    pub choi: ChoiRep,
    pub iterations: usize,
    pub converged: bool,
    /// Identity mixing applied to clear a residual negative eigenvalue.
    pub identity_shift: f64,
    pub history: Vec<RoundingStep>,
}

/// `Φ + (I − Tr_out Φ) ⊗ I/2^{n_out}`.
pub fn project_trace_preserving(phi: &ChoiRep) -> Result<ChoiRep> {
    let tr = phi.trace_out()?;
    let dout = 1usize << phi.n_out();
    let mut delta = tr.scale(-1.0);
    for i in 0..delta.dim() {
        delta[(i, i)] += ONE;
    }
    let corr = kron(&delta, &ComplexMatrix::identity(dout))?.scale(1.0 / dout as f64);
    ChoiRep::new(phi.n_in(), phi.n_out(), phi.matrix() + &corr)
}

pub fn project_psd(phi: &ChoiRep) -> Result<ChoiRep> {
    ChoiRep::new(phi.n_in(), phi.n_out(), psd_projection(&phi.matrix().hermitian_part())?)
}

fn tp_residual(phi: &ChoiRep) -> Result<f64> {
    let tr = phi.trace_out()?;
    Ok(frobenius_norm(&(&tr - &ComplexMatrix::identity(tr.dim()))))
}

/// Rounds `Φ̃` to the nearest CPTP Choi matrix. The output always passes
/// `validate_cptp(·, 1e−6)`; otherwise [`Error::RoundingFailed`] is returned.
pub fn round_to_cptp(phi: &ChoiRep, opts: &RoundingOptions) -> Result<RoundingResult> {
    let (n_in, n_out) = (phi.n_in(), phi.n_out());
    let dim = phi.matrix().dim();
    let mut x = ChoiRep::new(n_in, n_out, phi.matrix().hermitian_part())?;
    let mut p = ComplexMatrix::zeros(dim);
    let mut q = ComplexMatrix::zeros(dim);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let y = project_psd(&ChoiRep::new(n_in, n_out, x.matrix() + &p)?)?;
        p = &(x.matrix() + &p) - y.matrix();
        let x_next = project_trace_preserving(&ChoiRep::new(n_in, n_out, y.matrix() + &q)?)?;
        q = &(y.matrix() + &q) - x_next.matrix();
        let step = frobenius_norm(&(x_next.matrix() - x.matrix()));
        x = x_next;
        if opts.track_history {
            let lam = hermitian_eig(&x.matrix().hermitian_part())?.min_eigenvalue();
            history.push(RoundingStep {
                iteration: iterations,
                step,
                tp_residual: tp_residual(&y)?,
                psd_violation: (-lam).max(0.0),
            });
        }
        if step <= opts.tol {
            converged = true;
            break;
        }
    }
    let mut mat = x.matrix().hermitian_part();
    let lam = hermitian_eig(&mat)?.min_eigenvalue();
    let mut identity_shift = 0.0;
    if lam < 0.0 {
        // (X + c·I)/(1 + c·2^{n_out}) stays trace preserving and is PSD for c ≥ −λ_min
        let c = -lam;
        let dout = (1u64 << n_out) as f64;
        for i in 0..dim {
            mat[(i, i)] += ONE * c;
        }
        mat = mat.scale(1.0 / (1.0 + c * dout));
        identity_shift = c;
    }
    let choi = ChoiRep::new(n_in, n_out, mat)?;
    let report = validate_cptp(&choi, 1e-6)?;
    if !report.ok {
        return Err(Error::RoundingFailed {
            iterations,
            tp_residual: report.tp_residual,
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    Ok(RoundingResult {
        choi,
        iterations,
        converged,
        identity_shift,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{choi_of_circuit, choi_of_identity};
    use crate::circuit::{random_qac, RandomQacSpec};
    use crate::random::{random_hermitian, seeded};

    #[test]
    fn cptp_input_is_fixed() {
        let phi = choi_of_circuit(&random_qac(&RandomQacSpec::new(3, 2, vec![2, 3]), 1).unwrap()).unwrap();
        let r = round_to_cptp(&phi, &RoundingOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.choi.matrix().max_abs_diff(phi.matrix()) < 1e-8);
    }

    #[test]
    fn projections_are_idempotent() {
        let mut rng = seeded(2);
        let phi = ChoiRep::new(1, 1, random_hermitian(4, &mut rng)).unwrap();
        let tp = project_trace_preserving(&phi).unwrap();
        assert!(tp_residual(&tp).unwrap() < 1e-12);
        let tp2 = project_trace_preserving(&tp).unwrap();
        assert!(tp2.matrix().max_abs_diff(tp.matrix()) < 1e-12);
    }

    #[test]
    fn perturbed_channel_rounds_closer() {
        let truth = choi_of_identity(1);
        let mut rng = seeded(5);
        let noise = random_hermitian(4, &mut rng).scale(0.05);
        let noisy = ChoiRep::new(1, 1, truth.matrix() + &noise).unwrap();
        let r = round_to_cptp(
            &noisy,
            &RoundingOptions {
                track_history: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(validate_cptp(&r.choi, 1e-6).unwrap().ok);
        let before = noisy.normalized_distance_sq(&truth).unwrap();
        let after = r.choi.normalized_distance_sq(&truth).unwrap();
        assert!(after <= before + 1e-6);
        assert_eq!(r.history.len(), r.iterations);
    }
}
