//! Pauli basis, coefficients and the fast `O(4^m·m)` Pauli transform.
//!
//! Letters are coded `I=0, X=1, Y=2, Z=3`; a length-`m` word is a base-4
//! number with qubit 0 as the most significant digit.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{check_capacity, kron_all, log2_exact, ComplexMatrix, C64, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_code(code: u8) -> Pauli {
        Self::ALL[(code & 3) as usize]
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn matrix(self) -> ComplexMatrix {
        let rows: [[C64; 2]; 2] = match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -I], [I, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        };
        ComplexMatrix::from_vec(2, rows.concat()).expect("2x2")
    }

    /// `(column, value)` of the single nonzero entry in row `bit`.
    fn row_entry(self, bit: usize) -> (usize, C64) {
        match (self, bit) {
            (Pauli::I, b) => (b, ONE),
            (Pauli::X, b) => (b ^ 1, ONE),
            (Pauli::Y, 0) => (1, -I),
            (Pauli::Y, _) => (0, I),
            (Pauli::Z, 0) => (0, ONE),
            (Pauli::Z, _) => (1, -ONE),
        }
    }

    pub fn as_char(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }
}

/// A word over `{I, X, Y, Z}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(m: usize) -> Self {
        Self {
            letters: vec![Pauli::I; m],
        }
    }

    pub fn from_code(code: u64, m: usize) -> Self {
        let letters = (0..m)
            .map(|j| Pauli::from_code((code >> (2 * (m - 1 - j))) as u8))
            .collect();
        Self { letters }
    }

    pub fn code(&self) -> u64 {
        self.letters.iter().fold(0, |acc, p| (acc << 2) | p.code() as u64)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    /// Number of non-identity letters, `|P|`.
    pub fn degree(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.letters[i] != Pauli::I).collect()
    }

    /// Concatenation `self ⊗ other`.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        PauliString { letters }
    }

    /// Sub-word on the qubit range.
    pub fn slice(&self, range: std::ops::Range<usize>) -> PauliString {
        PauliString {
            letters: self.letters[range].to_vec(),
        }
    }

    pub fn base4_string(&self) -> String {
        self.letters.iter().map(|p| char::from(b'0' + p.code())).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("not a Pauli letter: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { letters })
    }
}

/// Degree of a base-4 code over `m` letters.
pub fn code_degree(code: u64, m: usize) -> usize {
    (0..m).filter(|j| (code >> (2 * j)) & 3 != 0).count()
}

pub fn pauli_matrix(p: &PauliString) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = p.letters.iter().map(|l| l.matrix()).collect();
    kron_all(&factors).expect("Pauli matrix within capacity")
}

/// `Â(P) = Tr(P†A)/2^m`, evaluated in `O(2^m)` using the permutation structure of `P`.
pub fn pauli_coefficient(a: &ComplexMatrix, p: &PauliString) -> Result<C64> {
    let m = p.len();
    if a.dim() != 1usize << m {
        return Err(Error::DimensionMismatch {
            expected: 1 << m,
            found: a.dim(),
        });
    }
    // Tr(P A) = Σ_r P[r][c(r)]·A[c(r)][r]; P is Hermitian so P† = P.
    let dim = a.dim();
    let mut acc = ZERO;
    for r in 0..dim {
        let mut col = 0usize;
        let mut phase = ONE;
        for (j, letter) in p.letters.iter().enumerate() {
            let bit = (r >> (m - 1 - j)) & 1;
            let (cb, v) = letter.row_entry(bit);
            col |= cb << (m - 1 - j);
            phase *= v;
        }
        acc += phase * a.get(col, r);
    }
    Ok(acc / dim as f64)
}

/// Real Pauli coefficients of a Hermitian operator with per-level bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSpectrum {
    m: usize,
    coefficients: Vec<f64>,
    hermiticity_residual: f64,
}

impl PauliSpectrum {
    pub fn from_coefficients(m: usize, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != 1usize << (2 * m) {
            return Err(Error::DimensionMismatch {
                expected: 1 << (2 * m),
                found: coefficients.len(),
            });
        }
        Ok(Self {
            m,
            coefficients,
            hermiticity_residual: 0.0,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.m
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Largest imaginary part discarded by the transform.
    pub fn hermiticity_residual(&self) -> f64 {
        self.hermiticity_residual
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        assert_eq!(p.len(), self.m, "Pauli length mismatch");
        self.coefficients[p.code() as usize]
    }

    pub fn get_code(&self, code: u64) -> f64 {
        self.coefficients[code as usize]
    }

    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// Entry `k` is `Σ_{|P|=k} Â(P)²`.
    pub fn weight_profile(&self) -> Vec<f64> {
        weight_profile(self)
    }

    /// `W^{>k}`.
    pub fn weight_above(&self, k: usize) -> f64 {
        weight_above(&self.weight_profile(), k)
    }

    /// Nonzero entries (|c| > `tol`) as `(Pauli, coefficient)` in code order.
    pub fn support(&self, tol: f64) -> Vec<(PauliString, f64)> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(code, &c)| (PauliString::from_code(code as u64, self.m), c))
            .collect()
    }

    /// `Σ_P Â(P)·P`.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        inverse_pauli_transform(&self.coefficients, self.m)
    }

    /// CSV `pauli_code_base4,degree,coefficient`, one row per Pauli.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "pauli_code_base4,degree,coefficient")?;
        for (code, c) in self.coefficients.iter().enumerate() {
            let p = PauliString::from_code(code as u64, self.m);
            writeln!(w, "{},{},{}", p.base4_string(), p.degree(), fmt_f64(*c))?;
        }
        Ok(())
    }

    /// CSV `k,weight_eq_k,weight_above_k`.
    pub fn write_profile_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let profile = self.weight_profile();
        writeln!(w, "k,weight_eq_k,weight_above_k")?;
        for (k, &wk) in profile.iter().enumerate() {
            writeln!(w, "{},{},{}", k, fmt_f64(wk), fmt_f64(weight_above(&profile, k)))?;
        }
        Ok(())
    }
}

/// 17 significant digits, the round-trip precision of an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn weight_profile(s: &PauliSpectrum) -> Vec<f64> {
    let mut profile = vec![0.0; s.m + 1];
    for (code, c) in s.coefficients.iter().enumerate() {
        profile[code_degree(code as u64, s.m)] += c * c;
    }
    profile
}

/// `Σ_{j>k} profile[j]`; zero when `k` is past the last level.
pub fn weight_above(profile: &[f64], k: usize) -> f64 {
    profile.iter().skip(k + 1).fold(0.0, |acc, w| acc + w)
}

/// Spreads the low `m` bits of `x` onto even bit positions.
fn spread_bits(x: usize, m: usize) -> usize {
    (0..m).fold(0, |acc, i| acc | (((x >> i) & 1) << (2 * i)))
}

/// All `4^m` complex coefficients `Tr(P A)/2^m` via per-qubit 2×2 block maps.
pub fn pauli_transform_complex(a: &ComplexMatrix) -> Result<Vec<C64>> {
    let m = log2_exact(a.dim())?;
    let dim = a.dim();
    check_capacity(dim * dim)?;
    let spread: Vec<usize> = (0..dim).map(|x| spread_bits(x, m)).collect();
    let mut work = vec![ZERO; dim * dim];
    for r in 0..dim {
        let row = a.row(r);
        let hi = spread[r] << 1;
        for (c, &v) in row.iter().enumerate() {
            work[hi | spread[c]] = v;
        }
    }
    for j in 0..m {
        let stride = 1usize << (2 * (m - 1 - j));
        work.par_chunks_mut(4 * stride).for_each(|chunk| {
            for t in 0..stride {
                let a00 = chunk[t];
                let a01 = chunk[t + stride];
                let a10 = chunk[t + 2 * stride];
                let a11 = chunk[t + 3 * stride];
                chunk[t] = (a00 + a11) * 0.5;
                chunk[t + stride] = (a01 + a10) * 0.5;
                chunk[t + 2 * stride] = I * (a01 - a10) * 0.5;
                chunk[t + 3 * stride] = (a00 - a11) * 0.5;
            }
        });
    }
    Ok(work)
}

/// Fast Pauli transform. Non-Hermitian input is not an error: the discarded
/// imaginary parts are reported through [`PauliSpectrum::hermiticity_residual`].
pub fn pauli_transform(a: &ComplexMatrix) -> Result<PauliSpectrum> {
    let m = log2_exact(a.dim())?;
    let work = pauli_transform_complex(a)?;
    let residual = work.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(PauliSpectrum {
        m,
        coefficients: work.into_iter().map(|z| z.re).collect(),
        hermiticity_residual: residual,
    })
}

/// `Σ_P coeff(P)·P` for real coefficients in code order.
pub fn inverse_pauli_transform(coefficients: &[f64], m: usize) -> Result<ComplexMatrix> {
    let dim = 1usize << m;
    if coefficients.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: coefficients.len(),
        });
    }
    check_capacity(dim * dim)?;
    let mut work: Vec<C64> = coefficients.iter().map(|&c| C64::new(c, 0.0)).collect();
    for j in 0..m {
        let stride = 1usize << (2 * (m - 1 - j));
        work.par_chunks_mut(4 * stride).for_each(|chunk| {
            for t in 0..stride {
                let ci = chunk[t];
                let cx = chunk[t + stride];
                let cy = chunk[t + 2 * stride];
                let cz = chunk[t + 3 * stride];
                chunk[t] = ci + cz;
                chunk[t + stride] = cx - I * cy;
                chunk[t + 2 * stride] = cx + I * cy;
                chunk[t + 3 * stride] = ci - cz;
            }
        });
    }
    let spread: Vec<usize> = (0..dim).map(|x| spread_bits(x, m)).collect();
    let mut out = ComplexMatrix::zeros(dim);
    for r in 0..dim {
        let hi = spread[r] << 1;
        for c in 0..dim {
            out[(r, c)] = work[hi | spread[c]];
        }
    }
    Ok(out)
}

/// `F_k = {P : |P| ≤ k}` over `m` qubits, in increasing code order.
pub fn low_degree_paulis(m: usize, k: usize) -> Vec<PauliString> {
    let mut out = Vec::new();
    collect_low_degree(m, k, &mut Vec::with_capacity(m), &mut out);
    out
}

fn collect_low_degree(m: usize, budget: usize, prefix: &mut Vec<Pauli>, out: &mut Vec<PauliString>) {
    if prefix.len() == m {
        out.push(PauliString::new(prefix.clone()));
        return;
    }
    for p in Pauli::ALL {
        if p != Pauli::I && budget == 0 {
            continue;
        }
        prefix.push(p);
        collect_low_degree(m, budget - usize::from(p != Pauli::I), prefix, out);
        prefix.pop();
    }
}

/// `|F_k| = Σ_{j≤k} C(m,j)·3^j`.
pub fn low_degree_count(m: usize, k: usize) -> u64 {
    let mut total = 0u64;
    let mut binom = 1u64;
    for j in 0..=k.min(m) {
        total += binom * 3u64.pow(j as u32);
        binom = binom * (m - j) as u64 / (j + 1) as u64;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, inner, kron};
    use crate::random::{random_hermitian, random_unitary, seeded};

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn naive_coefficient(a: &ComplexMatrix, p: &PauliString) -> C64 {
        let pm = pauli_matrix(p);
        pm.matmul(a).trace() / a.dim() as f64
    }

    fn epr_projector() -> ComplexMatrix {
        let one = C64::new(1.0, 0.0);
        let v = [one, ZERO, ZERO, one];
        ComplexMatrix::outer(&v, &v).unwrap()
    }

    #[test]
    fn codes_round_trip() {
        let p = ps("XYZI");
        assert_eq!(p.code(), 0b01_10_11_00);
        assert_eq!(PauliString::from_code(p.code(), 4), p);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.base4_string(), "1230");
        assert_eq!(p.to_string(), "XYZI");
        assert_eq!(code_degree(p.code(), 4), 3);
    }

    #[test]
    fn pauli_matrix_examples() {
        assert_eq!(pauli_matrix(&ps("I")), ComplexMatrix::identity(2));
        assert_eq!(
            pauli_matrix(&ps("ZZ")),
            ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0]).unwrap()
        );
        let xy = pauli_matrix(&ps("XY"));
        let oracle = kron(&Pauli::X.matrix(), &Pauli::Y.matrix()).unwrap();
        assert_eq!(xy, oracle);
        // explicit entries of X⊗Y
        assert_eq!(xy.get(0, 3), -I);
        assert_eq!(xy.get(1, 2), I);
        assert_eq!(xy.get(2, 1), -I);
        assert_eq!(xy.get(3, 0), I);
    }

    #[test]
    fn coefficient_examples() {
        let c = pauli_coefficient(&ComplexMatrix::identity(4), &ps("II")).unwrap();
        assert!((c - ONE).norm() < 1e-15);
        let epr = epr_projector();
        let yy = pauli_coefficient(&epr, &ps("YY")).unwrap();
        assert!((yy.re + 0.5).abs() < 1e-15 && yy.im.abs() < 1e-15);
        for s in ["II", "XX", "ZZ"] {
            let c = pauli_coefficient(&epr, &ps(s)).unwrap();
            assert!((c.re - 0.5).abs() < 1e-15, "{s}");
        }
        assert!(matches!(
            pauli_coefficient(&epr, &ps("X")),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coefficient_matches_naive_trace() {
        let mut rng = seeded(21);
        let a = random_hermitian(8, &mut rng);
        for code in 0..64 {
            let p = PauliString::from_code(code, 3);
            let fast = pauli_coefficient(&a, &p).unwrap();
            assert!((fast - naive_coefficient(&a, &p)).norm() < 1e-12);
        }
    }

    #[test]
    fn transform_reads_out_orthonormal_basis() {
        let a = (&ComplexMatrix::identity(8) + &pauli_matrix(&ps("ZZZ"))).scale(0.5);
        let s = pauli_transform(&a).unwrap();
        for (code, &c) in s.coefficients().iter().enumerate() {
            let expect = if code as u64 == 0 || code as u64 == ps("ZZZ").code() {
                0.5
            } else {
                0.0
            };
            assert!((c - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn transform_matches_trace_oracle_and_parseval() {
        let mut rng = seeded(23);
        let a = random_hermitian(8, &mut rng);
        let s = pauli_transform(&a).unwrap();
        for code in 0..64u64 {
            let p = PauliString::from_code(code, 3);
            let naive = naive_coefficient(&a, &p);
            assert!((s.get_code(code) - naive.re).abs() < 1e-10);
        }
        let fa = frobenius_norm(&a);
        assert!((s.total_weight() - fa * fa / 8.0).abs() < 1e-9);
        assert!(s.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn non_hermitian_residual_reported() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let s = pauli_transform(&a).unwrap();
        assert!((s.hermiticity_residual() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_round_trip() {
        let mut rng = seeded(29);
        let a = random_hermitian(8, &mut rng);
        let back = pauli_transform(&a).unwrap().to_matrix().unwrap();
        assert!(frobenius_norm(&(&a - &back)) <= 1e-9 * frobenius_norm(&a));
    }

    #[test]
    fn plancherel() {
        let mut rng = seeded(31);
        let a = random_hermitian(16, &mut rng);
        let b = random_hermitian(16, &mut rng);
        let sa = pauli_transform(&a).unwrap();
        let sb = pauli_transform(&b).unwrap();
        let lhs = inner(&a, &b).re / 16.0;
        let rhs: f64 = sa.coefficients().iter().zip(sb.coefficients()).map(|(x, y)| x * y).sum();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn weight_profile_examples() {
        let s = pauli_transform(&epr_projector()).unwrap();
        let profile = s.weight_profile();
        assert_eq!(profile.len(), 3);
        assert!((profile[0] - 0.25).abs() < 1e-15);
        assert!(profile[1].abs() < 1e-15);
        assert!((profile[2] - 0.75).abs() < 1e-15);
        assert!((profile.iter().sum::<f64>() - s.total_weight()).abs() < 1e-12);
        assert!((s.weight_above(0) - 0.75).abs() < 1e-15);
        assert_eq!(s.weight_above(2), 0.0);

        // Φ of ρ ↦ Tr(ρ)·I/2 on one qubit is I⊗I/2: total weight 1/4.
        let mixing = ComplexMatrix::identity(4).scale(0.5);
        assert!((pauli_transform(&mixing).unwrap().total_weight() - 0.25).abs() < 1e-15);

        let mut rng = seeded(37);
        let u = random_unitary(8, &mut rng);
        let su = pauli_transform_complex(&u).unwrap();
        let total: f64 = su.iter().map(|z| z.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_degree_enumeration() {
        let f = low_degree_paulis(4, 2);
        assert_eq!(f.len() as u64, low_degree_count(4, 2));
        assert_eq!(f.len(), 1 + 4 * 3 + 6 * 9);
        assert!(f.iter().all(|p| p.degree() <= 2));
        assert!(f.windows(2).all(|w| w[0].code() < w[1].code()));
        assert_eq!(low_degree_count(4, 4), 256);
    }

    #[test]
    fn csv_export_shapes() {
        let s = pauli_transform(&epr_projector()).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert!(text.lines().any(|l| l == "22,2,-5.0000000000000000e-1"));
        let mut buf = Vec::new();
        s.write_profile_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0,2.5000000000000000e-1,7.5000000000000000e-1");
    }
}
