//! Dense complex matrices on `2^q`-dimensional spaces.
//!
//! Qubit 0 is the most significant bit of every row and column index, so
//! `kron(A, B)` places `A` on the leading qubits. All routines return fresh
//! matrices; nothing is mutated behind a shared reference.

use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default cap on the number of complex entries in a single allocation (64M, 1 GiB).
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 26;

static MAX_ENTRIES: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_ENTRIES);

/// Sets the allocation cap from a byte budget (16 bytes per complex entry).
pub fn set_memory_cap_bytes(bytes: u64) {
    let entries = (bytes / 16).min(usize::MAX as u64) as usize;
    MAX_ENTRIES.store(entries.max(1), Ordering::Relaxed);
}

pub fn memory_cap_entries() -> usize {
    MAX_ENTRIES.load(Ordering::Relaxed)
}

/// Fails with [`Error::Capacity`] if `entries` complex numbers would exceed the cap.
pub fn check_capacity(entries: usize) -> Result<()> {
    let cap = memory_cap_entries();
    if entries > cap {
        return Err(Error::Capacity {
            requested: entries,
            cap,
        });
    }
    Ok(())
}

fn checked_square(dim: usize) -> Result<usize> {
    let entries = dim.checked_mul(dim).ok_or(Error::Capacity {
        requested: usize::MAX,
        cap: memory_cap_entries(),
    })?;
    check_capacity(entries)?;
    Ok(entries)
}

pub(crate) fn log2_exact(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Dense square complex matrix of power-of-two dimension, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Zero matrix. Panics if `dim` is not a power of two.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim.is_power_of_two(), "dimension {dim} is not a power of two");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    /// Zero matrix with the capacity check applied first.
    pub fn try_zeros(dim: usize) -> Result<Self> {
        log2_exact(dim)?;
        checked_square(dim)?;
        Ok(Self::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        log2_exact(dim)?;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from complex rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(dim, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag_real(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        log2_exact(dim)?;
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * dim + i] = C64::new(v, 0.0);
        }
        Ok(m)
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                found: v.len(),
            });
        }
        let dim = u.len();
        log2_exact(dim)?;
        checked_square(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for a in u {
            for b in v {
                data.push(a * b.conj());
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[C64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Real parts of the diagonal.
    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).collect()
    }

    /// `max |A[i][j] − conj(A[j][i])|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
            }
        }
        out
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.adjoint().matmul(self);
        frobenius_norm(&(&prod - &Self::identity(self.dim)))
    }

    /// Matrix product. Each output row is accumulated in a fixed order, so
    /// the result does not depend on the rayon pool size.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        });
        Self { dim: n, data: out }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Frobenius inner product `⟨A, B⟩ = Tr(A†B)`.
pub fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    assert_eq!(a.dim, b.dim);
    a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `(A ⊗ B)[(i1,i2),(j1,j2)] = A[i1][j1]·B[i2][j2]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a
        .dim
        .checked_mul(b.dim)
        .ok_or(Error::Capacity {
            requested: usize::MAX,
            cap: memory_cap_entries(),
        })?;
    checked_square(dim)?;
    let mut out = ComplexMatrix::zeros(dim);
    let (da, db) = (a.dim, b.dim);
    for i1 in 0..da {
        for j1 in 0..da {
            let x = a.data[i1 * da + j1];
            if x == ZERO {
                continue;
            }
            for i2 in 0..db {
                let row = (i1 * db + i2) * dim + j1 * db;
                for j2 in 0..db {
                    out.data[row + j2] = x * b.data[i2 * db + j2];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(1);
    for f in factors {
        acc = kron(&acc, f)?;
    }
    Ok(acc)
}

fn check_qubits(qubits: &[usize], q: usize) -> Result<()> {
    let mut seen = vec![false; q];
    for &t in qubits {
        if t >= q {
            return Err(Error::QubitOutOfRange { qubit: t, count: q });
        }
        if seen[t] {
            return Err(Error::DuplicateQubit(t));
        }
        seen[t] = true;
    }
    Ok(())
}

#[inline]
fn qubit_bit(qubit: usize, q: usize) -> usize {
    1 << (q - 1 - qubit)
}

/// Index offsets for every assignment of the listed qubits; `qubits[0]` is the
/// most significant bit of the local index.
pub(crate) fn local_offsets(qubits: &[usize], q: usize) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|s| {
            qubits
                .iter()
                .enumerate()
                .filter(|(i, _)| s >> (k - 1 - i) & 1 == 1)
                .map(|(_, &t)| qubit_bit(t, q))
                .sum()
        })
        .collect()
}

/// All indices whose bits on `qubits` are zero, in increasing order.
pub(crate) fn complement_bases(qubits: &[usize], q: usize) -> Vec<usize> {
    let mask: usize = qubits.iter().map(|&t| qubit_bit(t, q)).sum();
    (0..1usize << q).filter(|i| i & mask == 0).collect()
}

/// Partial trace over `traced` qubits of a `q`-qubit operator. The remaining
/// qubits keep their relative order.
pub fn partial_trace(a: &ComplexMatrix, traced: &[usize], q: usize) -> Result<ComplexMatrix> {
    if a.dim != 1usize << q {
        return Err(Error::DimensionMismatch {
            expected: 1 << q,
            found: a.dim,
        });
    }
    check_qubits(traced, q)?;
    let kept: Vec<usize> = (0..q).filter(|j| !traced.contains(j)).collect();
    let kept_off = local_offsets(&kept, q);
    let traced_off = local_offsets(traced, q);
    let out_dim = kept_off.len();
    let mut out = ComplexMatrix::zeros(out_dim);
    let n = a.dim;
    for (r, &kr) in kept_off.iter().enumerate() {
        for (c, &kc) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += a.data[(kr | t) * n + (kc | t)];
            }
            out.data[r * out_dim + c] = acc;
        }
    }
    Ok(out)
}

/// Which side a gate acts from in [`apply_gate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `G·A`
    Left,
    /// `A·G†`
    Right,
    /// `G·A·G†`
    Conjugate,
}

fn validate_gate(a_dim: usize, g: &ComplexMatrix, targets: &[usize]) -> Result<usize> {
    let q = log2_exact(a_dim)?;
    check_qubits(targets, q)?;
    if g.dim != 1usize << targets.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << targets.len(),
            found: g.dim,
        });
    }
    Ok(q)
}

/// Applies `g` (embedded on `targets`) to every fiber of a row-indexed buffer
/// with `ncols` columns: `data[(b|off[s])*ncols + c]` for fixed `b`, `c`.
fn mix_rows(data: &mut [C64], ncols: usize, g: &ComplexMatrix, offs: &[usize], bases: &[usize]) {
    let k = offs.len();
    let mut buf = vec![ZERO; k];
    for &b in bases {
        for c in 0..ncols {
            for (s, &o) in offs.iter().enumerate() {
                buf[s] = data[(b | o) * ncols + c];
            }
            for (s, &o) in offs.iter().enumerate() {
                let grow = g.row(s);
                let mut acc = ZERO;
                for (x, y) in grow.iter().zip(&buf) {
                    acc += x * y;
                }
                data[(b | o) * ncols + c] = acc;
            }
        }
    }
}

/// Right-multiplies every row by `G†` on the target column bits.
fn mix_cols_adjoint(data: &mut [C64], n: usize, g: &ComplexMatrix, offs: &[usize], bases: &[usize]) {
    let k = offs.len();
    let gc = g.conj();
    data.par_chunks_mut(n).for_each(|row| {
        let mut buf = vec![ZERO; k];
        for &b in bases {
            for (s, &o) in offs.iter().enumerate() {
                buf[s] = row[b | o];
            }
            for (s, &o) in offs.iter().enumerate() {
                let grow = gc.row(s);
                let mut acc = ZERO;
                for (x, y) in grow.iter().zip(&buf) {
                    acc += x * y;
                }
                row[b | o] = acc;
            }
        }
    });
}

/// Applies a small gate on `targets` without materialising the Kronecker
/// embedding. `targets[0]` maps to the most significant bit of `g`'s index.
pub fn apply_gate(a: &ComplexMatrix, g: &ComplexMatrix, targets: &[usize], side: Side) -> Result<ComplexMatrix> {
    let mut out = a.clone();
    apply_gate_inplace(&mut out, g, targets, side)?;
    Ok(out)
}

pub fn apply_gate_inplace(a: &mut ComplexMatrix, g: &ComplexMatrix, targets: &[usize], side: Side) -> Result<()> {
    let q = validate_gate(a.dim, g, targets)?;
    let offs = local_offsets(targets, q);
    let bases = complement_bases(targets, q);
    let n = a.dim;
    if matches!(side, Side::Left | Side::Conjugate) {
        mix_rows(&mut a.data, n, g, &offs, &bases);
    }
    if matches!(side, Side::Right | Side::Conjugate) {
        mix_cols_adjoint(&mut a.data, n, g, &offs, &bases);
    }
    Ok(())
}

/// Applies a gate to a state vector of `2^q` amplitudes.
pub fn apply_gate_to_vector(state: &mut [C64], g: &ComplexMatrix, targets: &[usize]) -> Result<()> {
    let q = validate_gate(state.len(), g, targets)?;
    let offs = local_offsets(targets, q);
    let bases = complement_bases(targets, q);
    mix_rows(state, 1, g, &offs, &bases);
    Ok(())
}

/// Explicit `I ⊗ G ⊗ I` embedding for arbitrary target order. Test oracle
/// for [`apply_gate`]; quadratic in the full dimension.
pub fn embed_gate(g: &ComplexMatrix, targets: &[usize], q: usize) -> Result<ComplexMatrix> {
    validate_gate(1 << q, g, targets)?;
    let n = 1usize << q;
    checked_square(n)?;
    let mask: usize = targets.iter().map(|&t| qubit_bit(t, q)).sum();
    let local = |idx: usize| -> usize {
        targets
            .iter()
            .fold(0, |acc, &t| (acc << 1) | usize::from(idx & qubit_bit(t, q) != 0))
    };
    let mut out = ComplexMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            if r & !mask == c & !mask {
                out.data[r * n + c] = g.get(local(r), local(c));
            }
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl EigDecomposition {
    /// `V·diag(f(λ))·V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvectors.dim;
        let v = &self.eigenvectors.data;
        let lam: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = vec![ZERO; n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (k, &l) in lam.iter().enumerate() {
                if l == 0.0 {
                    continue;
                }
                let a = v[i * n + k] * l;
                for (j, o) in row.iter_mut().enumerate() {
                    *o += a * v[j * n + k].conj();
                }
            }
        });
        ComplexMatrix { dim: n, data: out }
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

pub const EIG_MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi eigensolver. Stops once the off-diagonal Frobenius
/// norm drops below `1e-12·‖A‖_F`.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigDecomposition> {
    let n = a.dim;
    let scale = a.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let resid = a.hermiticity_residual();
    if resid > 1e-8 * scale {
        return Err(Error::NotHermitian(resid));
    }
    let mut m = a.hermitian_part().data;
    let mut v = ComplexMatrix::identity(n).data;
    let fro = frobenius_norm(a);
    let threshold = 1e-12 * fro;

    let off_norm = |m: &[C64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&m) <= threshold;
    let mut sweep = 0;
    while !converged {
        if sweep == EIG_MAX_SWEEPS {
            return Err(Error::NoConvergence(EIG_MAX_SWEEPS));
        }
        sweep += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                // Phase-rotate so the pivot is real, then do a real Jacobi rotation.
                let phase = apq / r;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G restricted to (p, q): [[c, s], [-s·conj(phase), c·conj(phase)]]
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                for k in 0..n {
                    let xp = m[k * n + p];
                    let xq = m[k * n + q];
                    m[k * n + p] = xp * gpp + xq * gqp;
                    m[k * n + q] = xp * gpq + xq * gqq;
                }
                for k in 0..n {
                    let xp = m[p * n + k];
                    let xq = m[q * n + k];
                    m[p * n + k] = gpp.conj() * xp + gqp.conj() * xq;
                    m[q * n + k] = gpq.conj() * xp + gqq.conj() * xq;
                }
                m[p * n + q] = ZERO;
                m[q * n + p] = ZERO;
                m[p * n + p] = C64::new(m[p * n + p].re, 0.0);
                m[q * n + q] = C64::new(m[q * n + q].re, 0.0);
                for k in 0..n {
                    let xp = v[k * n + p];
                    let xq = v[k * n + q];
                    v[k * n + p] = xp * gpp + xq * gqp;
                    v[k * n + q] = xp * gpq + xq * gqq;
                }
            }
        }
        converged = off_norm(&m) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut vecs = vec![ZERO; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + new_col] = v[r * n + old_col];
        }
    }
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix { dim: n, data: vecs },
    })
}

/// Frobenius projection of a Hermitian matrix onto the PSD cone.
pub fn psd_projection(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_matrix, random_unitary, seeded};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
    }

    fn hadamard() -> ComplexMatrix {
        (&pauli_x() + &pauli_z()).scale(std::f64::consts::FRAC_1_SQRT_2)
    }

    #[test]
    fn kron_identity_and_sign_pattern() {
        let i4 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
        let zz = kron(&pauli_z(), &pauli_z()).unwrap();
        assert_eq!(zz, ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0]).unwrap());
    }

    #[test]
    fn kron_matches_index_formula() {
        let (x, z) = (pauli_x(), pauli_z());
        let xz = kron(&x, &z).unwrap();
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        let expect = x.get(i1, j1) * z.get(i2, j2);
                        assert_eq!(xz.get(i1 * 2 + i2, j1 * 2 + j2), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_respects_capacity() {
        set_memory_cap_bytes(16 * 16);
        let r = kron(&ComplexMatrix::identity(4), &ComplexMatrix::identity(2));
        set_memory_cap_bytes((DEFAULT_MAX_ENTRIES * 16) as u64);
        assert!(matches!(r, Err(Error::Capacity { .. })));
    }

    #[test]
    fn kron_mixed_product_and_associativity() {
        let mut rng = seeded(7);
        let m: Vec<_> = (0..4).map(|_| random_matrix(2, &mut rng)).collect();
        let lhs = kron(&m[0], &m[1]).unwrap().matmul(&kron(&m[2], &m[3]).unwrap());
        let rhs = kron(&m[0].matmul(&m[2]), &m[1].matmul(&m[3])).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let a = kron(&kron(&m[0], &m[1]).unwrap(), &m[2]).unwrap();
        let b = kron(&m[0], &kron(&m[1], &m[2]).unwrap()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn partial_trace_examples() {
        let pt = partial_trace(&ComplexMatrix::identity(4), &[1], 2).unwrap();
        assert_eq!(pt, ComplexMatrix::identity(2).scale(2.0));

        let epr = [c(1.0), c(0.0), c(0.0), c(1.0)];
        let proj = ComplexMatrix::outer(&epr, &epr).unwrap();
        let pt = partial_trace(&proj, &[0], 2).unwrap();
        assert!(pt.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_brute_force() {
        let mut rng = seeded(11);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(2, &mut rng);
        let ab = kron(&a, &b).unwrap();
        let pt = partial_trace(&ab, &[1], 2).unwrap();
        let tr_b = b.get(0, 0) + b.get(1, 1);
        for i in 0..2 {
            for j in 0..2 {
                let brute = ab.get(2 * i, 2 * j) + ab.get(2 * i + 1, 2 * j + 1);
                assert!((pt.get(i, j) - brute).norm() < 1e-14);
                assert!((pt.get(i, j) - a.get(i, j) * tr_b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn partial_trace_composes() {
        let mut rng = seeded(3);
        let a = random_matrix(16, &mut rng);
        let both = partial_trace(&a, &[1, 3], 4).unwrap();
        let step = partial_trace(&a, &[3], 4).unwrap();
        let step = partial_trace(&step, &[1], 3).unwrap();
        assert!(both.max_abs_diff(&step) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_indices() {
        let a = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&a, &[2], 2),
            Err(Error::QubitOutOfRange { qubit: 2, count: 2 })
        ));
        assert!(matches!(partial_trace(&a, &[0, 0], 2), Err(Error::DuplicateQubit(0))));
    }

    #[test]
    fn frobenius_examples() {
        assert!((frobenius_norm(&ComplexMatrix::identity(8)) - 8f64.sqrt()).abs() < 1e-15);
        let mut cz = ComplexMatrix::identity(8);
        cz[(7, 7)] = c(-1.0);
        let d = &ComplexMatrix::identity(8) - &cz;
        assert!((frobenius_norm(&d) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn frobenius_unitary_invariance() {
        let mut rng = seeded(5);
        let a = random_matrix(8, &mut rng);
        let u = random_unitary(8, &mut rng);
        let n = frobenius_norm(&a);
        assert!((n - frobenius_norm(&u.matmul(&a))).abs() < 1e-10);
        assert!((n - frobenius_norm(&a.matmul(&u))).abs() < 1e-10);
    }

    #[test]
    fn eig_diagonal_and_pauli_x() {
        let e = hermitian_eig(&ComplexMatrix::diag_real(&[1.0, 3.0]).unwrap()).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);

        let e = hermitian_eig(&pauli_x()).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = [e.eigenvectors.get(0, 0), e.eigenvectors.get(1, 0)];
        let v1 = [e.eigenvectors.get(0, 1), e.eigenvectors.get(1, 1)];
        // up to a global phase
        assert!(((v0[0].conj() * s + v0[1].conj() * s).norm() - 1.0).abs() < 1e-12);
        assert!(((v1[0].conj() * s - v1[1].conj() * s).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = seeded(13);
        for dim in [8, 16, 32] {
            let a = random_hermitian(dim, &mut rng);
            let e = hermitian_eig(&a).unwrap();
            let rec = e.reconstruct();
            let fa = frobenius_norm(&a);
            assert!(frobenius_norm(&(&a - &rec)) <= 1e-8 * fa);
            let v = &e.eigenvectors;
            let vv = v.adjoint().matmul(v);
            assert!(frobenius_norm(&(&vv - &ComplexMatrix::identity(dim))) <= 1e-8);
            let tr: f64 = e.eigenvalues.iter().sum();
            assert!((tr - a.trace().re).abs() < 1e-8);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn apply_hadamard_left() {
        let h = hadamard();
        let out = apply_gate(&ComplexMatrix::identity(4), &h, &[0], Side::Left).unwrap();
        let expect = kron(&h, &ComplexMatrix::identity(2)).unwrap();
        assert!(out.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn cnot_from_conjugated_cz() {
        let h = hadamard();
        let cz = ComplexMatrix::diag_real(&[1.0, 1.0, 1.0, -1.0]).unwrap();
        let mut u = ComplexMatrix::identity(4);
        apply_gate_inplace(&mut u, &h, &[1], Side::Left).unwrap();
        apply_gate_inplace(&mut u, &cz, &[0, 1], Side::Left).unwrap();
        apply_gate_inplace(&mut u, &h, &[1], Side::Left).unwrap();
        let cnot = ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(u.max_abs_diff(&cnot) < 1e-12);
    }

    #[test]
    fn apply_gate_matches_kron_embedding() {
        let mut rng = seeded(17);
        let a = random_matrix(8, &mut rng);
        let g = random_unitary(4, &mut rng);
        for targets in [[0, 1], [2, 0], [1, 2]] {
            let full = embed_gate(&g, &targets, 3).unwrap();
            let left = apply_gate(&a, &g, &targets, Side::Left).unwrap();
            assert!(left.max_abs_diff(&full.matmul(&a)) < 1e-12);
            let right = apply_gate(&a, &g, &targets, Side::Right).unwrap();
            assert!(right.max_abs_diff(&a.matmul(&full.adjoint())) < 1e-12);
            let conj = apply_gate(&a, &g, &targets, Side::Conjugate).unwrap();
            assert!(conj.max_abs_diff(&full.matmul(&a).matmul(&full.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn apply_gate_rejects_overlap() {
        let g = ComplexMatrix::identity(4);
        let a = ComplexMatrix::identity(8);
        assert!(matches!(apply_gate(&a, &g, &[1, 1], Side::Left), Err(Error::DuplicateQubit(1))));
        assert!(matches!(
            apply_gate(&a, &g, &[1, 3], Side::Left),
            Err(Error::QubitOutOfRange { .. })
        ));
    }
}
