//! Classical shadows of the Choi state: random product-Pauli measurements.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{AuxState, ChoiRep};
use crate::circuit::{cz_mask, hadamard, Gate, QacCircuit};
use crate::error::{Error, Result};
use crate::linalg::{apply_gate_to_vector, check_capacity, hermitian_eig, ComplexMatrix, C64, I, ONE, ZERO};
use crate::pauli::{pauli_transform, Pauli, PauliString};
use crate::random::substream;

/// Largest `6^m` for which all per-basis outcome distributions are tabulated.
const TABLE_LIMIT: usize = 1 << 22;

/// Measurement bases per qubit (`X`, `Y` or `Z`) and `±1` outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShadowShot {
    pub bases: Vec<Pauli>,
    pub outcomes: Vec<i8>,
}

/// Packed shots: bases as 2-bit Pauli codes (qubit 0 most significant) and
/// outcomes as a bit mask with a set bit meaning `−1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShadowSamples {
    m: usize,
    n_out: usize,
    bases: Vec<u32>,
    outcomes: Vec<u32>,
}

/// Mean and single-shot variance of a shadow estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShadowStats {
    pub mean: f64,
    pub variance: f64,
    pub shots: u64,
}

impl ShadowStats {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.shots as f64).sqrt()
    }
}

impl ShadowSamples {
    pub fn num_qubits(&self) -> usize {
        self.m
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn shot(&self, i: usize) -> ShadowShot {
        let m = self.m;
        ShadowShot {
            bases: (0..m)
                .map(|j| Pauli::from_code((self.bases[i] >> (2 * (m - 1 - j))) as u8))
                .collect(),
            outcomes: (0..m)
                .map(|j| if self.outcomes[i] >> (m - 1 - j) & 1 == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    /// Single-shot estimator `∏_{i∈supp P} 3·o_i·1{b_i = P_i}` of `Tr(Pρ)`.
    pub fn stats(&self, p: &PauliString) -> ShadowStats {
        assert_eq!(p.len(), self.m, "Pauli length mismatch");
        let m = self.m;
        let support = p.support();
        let code = p.code() as u32;
        let mask: u32 = support.iter().map(|&j| 3u32 << (2 * (m - 1 - j))).sum();
        let bits: u32 = support.iter().map(|&j| 1u32 << (m - 1 - j)).sum();
        let (mut plus, mut minus) = (0u64, 0u64);
        for (&b, &o) in self.bases.iter().zip(&self.outcomes) {
            if b & mask == code {
                if (o & bits).count_ones() % 2 == 0 {
                    plus += 1;
                } else {
                    minus += 1;
                }
            }
        }
        let n = self.len() as u64;
        let scale = 3f64.powi(support.len() as i32);
        let mean = scale * (plus as f64 - minus as f64) / n as f64;
        let second = scale * scale * (plus + minus) as f64 / n as f64;
        let variance = if n > 1 {
            (second - mean * mean) * n as f64 / (n - 1) as f64
        } else {
            0.0
        };
        ShadowStats {
            mean,
            variance: variance.max(0.0),
            shots: n,
        }
    }

    /// Estimate of `Tr(Pρ_E)`.
    pub fn estimate_trace(&self, p: &PauliString) -> f64 {
        self.stats(p).mean
    }

    /// Estimate of `Φ̂(P) = Tr(Pρ_E)/2^{n_out}`.
    pub fn estimate_coefficient(&self, p: &PauliString) -> f64 {
        self.estimate_trace(p) / (1u64 << self.n_out) as f64
    }

    /// CSV `shot,bases,outcomes`, e.g. `0,XZY,+-+`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "shot,bases,outcomes")?;
        for i in 0..self.len() {
            let s = self.shot(i);
            let bases: String = s.bases.iter().map(|b| b.as_char()).collect();
            let outs: String = s.outcomes.iter().map(|&o| if o > 0 { '+' } else { '-' }).collect();
            writeln!(w, "{i},{bases},{outs}")?;
        }
        Ok(())
    }
}

/// `shadow_estimate` over an explicit shot list: mean of the single-shot estimator.
pub fn shadow_estimate(shots: &[ShadowShot], p: &PauliString) -> f64 {
    if shots.is_empty() {
        return 0.0;
    }
    let total: f64 = shots
        .iter()
        .map(|s| {
            p.support().iter().fold(1.0, |acc, &j| {
                if s.bases[j] == p.letter(j) {
                    acc * 3.0 * s.outcomes[j] as f64
                } else {
                    0.0
                }
            })
        })
        .sum();
    total / shots.len() as f64
}

/// Source of exact outcome distributions for product-basis measurements of `ρ_E`.
pub trait ShadowSampler: Sync {
    /// Qubits of the Choi state, `m = n_in + n_out`.
    fn num_qubits(&self) -> usize;
    fn n_out(&self) -> usize;
    /// `p(o)` for outcome masks `o` (bit set = `−1`, qubit 0 most significant).
    fn distribution(&self, bases: &[Pauli]) -> Result<Vec<f64>>;
}

/// Rotation taking the `+1` eigenvector of `basis` to `|0⟩`.
fn basis_rotation(basis: Pauli) -> ComplexMatrix {
    match basis {
        Pauli::X => hadamard(),
        Pauli::Y => {
            let s_dag = ComplexMatrix::from_vec(2, vec![ONE, ZERO, ZERO, -I]).expect("2x2");
            hadamard().matmul(&s_dag)
        }
        _ => ComplexMatrix::identity(2),
    }
}

/// Density-matrix backend working from the Pauli coefficients of `ρ_E`:
/// `p(o) = 2^{−m} Σ_S Tr(ρ P_S^b) ∏_{i∈S} (−1)^{o_i}`.
pub struct DensityBackend {
    m: usize,
    n_out: usize,
    /// `Tr(Pρ_E)` indexed by Pauli code.
    traces: Vec<f64>,
}

impl DensityBackend {
    pub fn new(phi: &ChoiRep) -> Result<Self> {
        let m = phi.num_qubits();
        if m > 16 {
            return Err(Error::Unsupported("shadow sampling beyond 16 qubits".into()));
        }
        let spectrum = pauli_transform(&phi.choi_state())?;
        let scale = (1u64 << m) as f64;
        Ok(Self {
            m,
            n_out: phi.n_out(),
            traces: spectrum.coefficients().iter().map(|c| c * scale).collect(),
        })
    }
}

/// In-place Walsh–Hadamard transform.
fn wht(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

impl ShadowSampler for DensityBackend {
    fn num_qubits(&self) -> usize {
        self.m
    }

    fn n_out(&self) -> usize {
        self.n_out
    }

    fn distribution(&self, bases: &[Pauli]) -> Result<Vec<f64>> {
        let m = self.m;
        let size = 1usize << m;
        let mut t = vec![0.0; size];
        for (s, slot) in t.iter_mut().enumerate() {
            let code = (0..m).fold(0u64, |acc, j| {
                let letter = if s >> (m - 1 - j) & 1 == 1 { bases[j].code() } else { 0 };
                (acc << 2) | letter as u64
            });
            *slot = self.traces[code as usize];
        }
        wht(&mut t);
        let scale = 1.0 / size as f64;
        Ok(t.into_iter().map(|x| (x * scale).max(0.0)).collect())
    }
}

/// Purification backend for circuits: the pure state
/// `(I_ref ⊗ U)(|EPR_n⟩ ⊗ |ψ-purification⟩)/√2^n`, measured on the reference
/// register and the target wire, everything else traced out.
pub struct PurificationBackend {
    n: usize,
    /// Qubit positions of the measured register in the state vector.
    measured: Vec<usize>,
    total: usize,
    state: Vec<C64>,
}

impl PurificationBackend {
    pub fn new(c: &QacCircuit) -> Result<Self> {
        c.ensure_valid()?;
        let n = c.num_inputs();
        let q = c.num_qubits();
        let a = c.num_aux();
        let (env, aux_state) = purify(c.aux())?;
        let total = n + q + env;
        if total > 30 {
            return Err(Error::Unsupported(format!("purification needs {total} qubits")));
        }
        check_capacity(1usize << total)?;
        let mut state = vec![ZERO; 1usize << total];
        let norm = 1.0 / ((1u64 << n) as f64).sqrt();
        let tail = a + env;
        for x in 0..1usize << n {
            for (k, &amp) in aux_state.iter().enumerate() {
                if amp != ZERO {
                    let idx = (((x << n) | x) << tail) | k;
                    state[idx] = amp * norm;
                }
            }
        }
        for gate in c.gates() {
            match gate {
                Gate::Single { qubit, u } => apply_gate_to_vector(&mut state, &u, &[n + qubit])?,
                Gate::Cz { qubits } => {
                    let shifted: Vec<usize> = qubits.iter().map(|&t| n + t).collect();
                    let mask = cz_mask(&shifted, total);
                    for (i, z) in state.iter_mut().enumerate() {
                        if i & mask == mask {
                            *z = -*z;
                        }
                    }
                }
            }
        }
        let mut measured: Vec<usize> = (0..n).collect();
        measured.push(n + c.target());
        Ok(Self {
            n,
            measured,
            total,
            state,
        })
    }
}

/// Purification `Σ_i √λ_i |v_i⟩|i⟩` of the aux state; returns the environment
/// size and the joint (aux, env) amplitudes.
fn purify(aux: &AuxState) -> Result<(usize, Vec<C64>)> {
    match aux {
        AuxState::None => Ok((0, vec![ONE])),
        AuxState::Clean(a) => {
            let mut v = vec![ZERO; 1 << a];
            v[0] = ONE;
            Ok((0, v))
        }
        AuxState::Dirty(a) => {
            let d = 1usize << a;
            let mut v = vec![ZERO; d * d];
            let w = C64::new(1.0 / (d as f64).sqrt(), 0.0);
            for i in 0..d {
                v[i * d + i] = w;
            }
            Ok((*a, v))
        }
        AuxState::Arbitrary(rho) => {
            let a = rho.num_qubits();
            let d = rho.dim();
            let eig = hermitian_eig(&rho.hermitian_part())?;
            let mut v = vec![ZERO; d * d];
            for (i, &lam) in eig.eigenvalues.iter().enumerate() {
                let s = lam.max(0.0).sqrt();
                for r in 0..d {
                    v[r * d + i] = eig.eigenvectors.get(r, i) * s;
                }
            }
            Ok((a, v))
        }
    }
}

impl ShadowSampler for PurificationBackend {
    fn num_qubits(&self) -> usize {
        self.n + 1
    }

    fn n_out(&self) -> usize {
        1
    }

    fn distribution(&self, bases: &[Pauli]) -> Result<Vec<f64>> {
        let mut psi = self.state.clone();
        for (&qubit, &b) in self.measured.iter().zip(bases) {
            if b != Pauli::Z {
                apply_gate_to_vector(&mut psi, &basis_rotation(b), &[qubit])?;
            }
        }
        let m = self.measured.len();
        let mut p = vec![0.0; 1 << m];
        for (idx, z) in psi.iter().enumerate() {
            let o = self
                .measured
                .iter()
                .fold(0usize, |acc, &t| (acc << 1) | (idx >> (self.total - 1 - t) & 1));
            p[o] += z.norm_sqr();
        }
        Ok(p)
    }
}

fn decode_bases(code: usize, m: usize) -> Vec<Pauli> {
    // base-3 digits 0,1,2 ↦ X,Y,Z; qubit 0 most significant
    let mut out = vec![Pauli::X; m];
    let mut c = code;
    for j in (0..m).rev() {
        out[j] = Pauli::from_code((c % 3) as u8 + 1);
        c /= 3;
    }
    out
}

fn sample_index(p: &[f64], u: f64) -> usize {
    let total: f64 = p.iter().sum();
    let mut target = u * total;
    for (i, &x) in p.iter().enumerate() {
        if target < x {
            return i;
        }
        target -= x;
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// Draws `shots` independent shadow shots; shot `i` uses the substream
/// `(seed, i)`, so the result does not depend on scheduling.
pub fn sample_choi_shadows(sampler: &dyn ShadowSampler, shots: u64, seed: u64) -> Result<ShadowSamples> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let m = sampler.num_qubits();
    if m > 16 {
        return Err(Error::Unsupported("shadow sampling beyond 16 qubits".into()));
    }
    let settings = 3usize.pow(m as u32);
    let table: Option<Vec<Vec<f64>>> = if settings.saturating_mul(1 << m) <= TABLE_LIMIT {
        Some(
            (0..settings)
                .into_par_iter()
                .map(|code| sampler.distribution(&decode_bases(code, m)))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    let draws: Vec<(u32, u32)> = (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            let setting = rng.random_range(0..settings);
            let u: f64 = rng.random();
            let bases = decode_bases(setting, m);
            let o = match &table {
                Some(t) => sample_index(&t[setting], u),
                None => sample_index(&sampler.distribution(&bases)?, u),
            };
            let code = bases.iter().fold(0u32, |acc, b| (acc << 2) | b.code() as u32);
            Ok((code, o as u32))
        })
        .collect::<Result<_>>()?;
    let (bases, outcomes) = draws.into_iter().unzip();
    Ok(ShadowSamples {
        m,
        n_out: sampler.n_out(),
        bases,
        outcomes,
    })
}
