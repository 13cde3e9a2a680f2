//! Measurement queries: prepare an input state, apply the channel, measure a
//! Pauli observable on the output.

use rand_distr::{Binomial, Distribution};

use crate::channel::{apply_channel_linear, ChoiRep};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE};
use crate::pauli::{pauli_matrix, PauliString};
use crate::random::substream;

/// Exact or sampled evaluation of `Tr(O·E(ρ))`. Sampling needs `n_out = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryMode {
    Exact,
    /// `shots` single-shot `±1` measurements, seeded per query.
    Sampled { shots: u64, seed: u64 },
}

/// Query input `(I + R)/2^n` for a Pauli `R` on the input register.
pub fn pauli_input_state(r_in: &PauliString) -> ComplexMatrix {
    let dim = 1usize << r_in.len();
    let mut m = pauli_matrix(r_in);
    for i in 0..dim {
        m[(i, i)] += ONE;
    }
    m.scale(1.0 / dim as f64)
}

/// Input for which `Tr(R_out·E(ρ*)) = 2^{n_out}(Φ̂(I⊗R_out) + Φ̂(R_in⊗R_out))`
/// holds exactly: `ρ* = (I + R_inᵀ)/2^n`.
pub fn query_input_state(r_in: &PauliString) -> ComplexMatrix {
    pauli_input_state(r_in).transpose()
}

/// `Tr(O·E(ρ))` exactly or from `±1` samples; `index` selects the substream.
pub fn measurement_query(
    phi: &ChoiRep,
    rho: &ComplexMatrix,
    observable: &PauliString,
    mode: QueryMode,
    index: u64,
) -> Result<f64> {
    if observable.len() != phi.n_out() {
        return Err(Error::DimensionMismatch {
            expected: phi.n_out(),
            found: observable.len(),
        });
    }
    let sigma = apply_channel_linear(phi, rho)?;
    let value = pauli_matrix(observable).matmul(&sigma).trace().re;
    match mode {
        QueryMode::Exact => Ok(value),
        QueryMode::Sampled { shots, seed } => {
            if phi.n_out() != 1 {
                return Err(Error::Unsupported("sampled queries need a single output qubit".into()));
            }
            if shots == 0 {
                return Err(Error::InvalidArgument("shots must be at least 1".into()));
            }
            let p_plus = ((1.0 + value) / 2.0).clamp(0.0, 1.0);
            let binom = Binomial::new(shots, p_plus).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let plus = binom.sample(&mut substream(seed, index));
            Ok((2.0 * plus as f64 - shots as f64) / shots as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::choi_of_identity;

    #[test]
    fn identity_channel_returns_expectations() {
        let phi = choi_of_identity(1);
        let y: PauliString = "Y".parse().unwrap();
        let rho = pauli_input_state(&y);
        let v = measurement_query(&phi, &rho, &y, QueryMode::Exact, 0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        // the transposed input flips the sign of odd-Y terms
        let v = measurement_query(&phi, &query_input_state(&y), &y, QueryMode::Exact, 0).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_queries_are_deterministic() {
        let phi = choi_of_identity(1);
        let x: PauliString = "X".parse().unwrap();
        let rho = ComplexMatrix::identity(2).scale(0.5);
        let mode = QueryMode::Sampled { shots: 10_000, seed: 4 };
        let a = measurement_query(&phi, &rho, &x, mode, 3).unwrap();
        let b = measurement_query(&phi, &rho, &x, mode, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.abs() < 5.0 / 100.0);
        let two = choi_of_identity(2);
        let zz: PauliString = "ZZ".parse().unwrap();
        let rho = ComplexMatrix::identity(4).scale(0.25);
        assert!(measurement_query(&two, &rho, &zz, mode, 0).is_err());
        assert!(measurement_query(&two, &rho, &zz, QueryMode::Exact, 0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn two_term_identity_on_z() {
        let phi = choi_of_identity(1);
        let z: PauliString = "Z".parse().unwrap();
        let v = measurement_query(&phi, &pauli_input_state(&z), &z, QueryMode::Exact, 0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let mixed = ComplexMatrix::identity(2).scale(0.5);
        assert!(measurement_query(&phi, &mixed, &z, QueryMode::Exact, 0).unwrap().abs() < 1e-12);
    }
}
