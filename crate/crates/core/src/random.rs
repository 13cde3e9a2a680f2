//! Seeded random instances: Gaussian matrices, Haar-like unitaries, states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64, ZERO};

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `seed`; used for per-shot and
/// per-instance substreams so results do not depend on scheduling.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..dim * dim).map(|_| gaussian_complex(rng)).collect();
    ComplexMatrix::from_vec(dim, data).expect("power-of-two dimension")
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    random_matrix(dim, rng).hermitian_part()
}

/// Unitary from Gram–Schmidt orthonormalisation of Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for u in &cols {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    let mut m = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    m
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Mixed state `GG†/Tr(GG†)` for a `dim × rank` Gaussian `G`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let mut rho = ComplexMatrix::zeros(dim);
    for _ in 0..rank.max(1) {
        let v: Vec<C64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        let p = ComplexMatrix::outer(&v, &v).expect("power-of-two dimension");
        rho = &rho + &p;
    }
    let tr = rho.trace().re;
    let mut out = rho.scale(1.0 / tr);
    // exact Hermitian symmetry
    out = out.hermitian_part();
    debug_assert!(out.as_slice().iter().all(|z| z.is_finite()) && out.trace() != ZERO);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded(1);
        for dim in [2, 4, 16] {
            let u = random_unitary(dim, &mut rng);
            assert!(u.unitarity_residual() < 1e-12);
        }
    }

    #[test]
    fn substreams_differ_and_repeat() {
        let a: u64 = substream(9, 0).random();
        let b: u64 = substream(9, 1).random();
        let a2: u64 = substream(9, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }

    #[test]
    fn density_is_valid() {
        let mut rng = seeded(2);
        let rho = random_density(8, 3, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.hermiticity_residual() < 1e-15);
    }
}
