//! Choi representations `Φ = Σ_{x,y} |x⟩⟨y| ⊗ E(|x⟩⟨y|)` with register order
//! (in, out); for circuits the input register is (in, aux).

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::boolfn::TruthTable;
use crate::circuit::{conjugate_by_diagonal_sign, cz_mask, Gate, QacCircuit};
use crate::error::{Error, Result};
use crate::linalg::{
    apply_gate_inplace, check_capacity, frobenius_norm, hermitian_eig, partial_trace, ComplexMatrix,
    Side, C64, ONE, ZERO,
};
use crate::pauli::{pauli_transform, PauliSpectrum};

/// Default tolerance for TP/PSD validation.
pub const CPTP_TOL: f64 = 1e-8;

/// State of the auxiliary register (the last `a` circuit qubits).
#[derive(Clone, Debug, PartialEq)]
pub enum AuxState {
    None,
    /// `|0^a⟩⟨0^a|`
    Clean(usize),
    /// `I/2^a`
    Dirty(usize),
    Arbitrary(ComplexMatrix),
}

impl AuxState {
    pub fn count(&self) -> usize {
        match self {
            AuxState::None => 0,
            AuxState::Clean(a) | AuxState::Dirty(a) => *a,
            AuxState::Arbitrary(rho) => rho.num_qubits(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AuxState::None => "none",
            AuxState::Clean(_) => "clean",
            AuxState::Dirty(_) => "dirty",
            AuxState::Arbitrary(_) => "arbitrary",
        }
    }

    /// Density matrix `ψ`; `None` when there is no auxiliary register.
    pub fn density(&self) -> Option<ComplexMatrix> {
        match self {
            AuxState::None => None,
            AuxState::Clean(a) => {
                let mut m = ComplexMatrix::zeros(1 << a);
                m[(0, 0)] = ONE;
                Some(m)
            }
            AuxState::Dirty(a) => Some(ComplexMatrix::identity(1 << a).scale(1.0 / (1u64 << a) as f64)),
            AuxState::Arbitrary(rho) => Some(rho.clone()),
        }
    }

    /// `‖ψ‖_F²`, equal to 1 for pure states and `2^{−a}` for the maximally mixed one.
    pub fn frob_sq(&self) -> f64 {
        match self {
            AuxState::None | AuxState::Clean(_) => 1.0,
            AuxState::Dirty(a) => 1.0 / (1u64 << a) as f64,
            AuxState::Arbitrary(rho) => frobenius_norm(rho).powi(2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let AuxState::Arbitrary(rho) = self {
            validate_state(rho, 1e-9)?;
        }
        Ok(())
    }
}

/// Checks that `rho` is Hermitian, unit-trace and PSD within `tol`.
pub fn validate_state(rho: &ComplexMatrix, tol: f64) -> Result<()> {
    let h = rho.hermiticity_residual();
    if h > tol {
        return Err(Error::InvalidState(format!("not Hermitian (residual {h:.3e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let min = hermitian_eig(&rho.hermitian_part())?.min_eigenvalue();
    if min < -tol {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiRep {
    n_in: usize,
    n_out: usize,
    mat: ComplexMatrix,
}

impl ChoiRep {
    pub fn new(n_in: usize, n_out: usize, mat: ComplexMatrix) -> Result<Self> {
        if mat.dim() != 1usize << (n_in + n_out) {
            return Err(Error::DimensionMismatch {
                expected: 1 << (n_in + n_out),
                found: mat.dim(),
            });
        }
        Ok(Self { n_in, n_out, mat })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// `m = n_in + n_out`.
    pub fn num_qubits(&self) -> usize {
        self.n_in + self.n_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// `ρ_E = Φ/2^{n_in}`.
    pub fn choi_state(&self) -> ComplexMatrix {
        self.mat.scale(1.0 / (1u64 << self.n_in) as f64)
    }

    pub fn spectrum(&self) -> Result<PauliSpectrum> {
        pauli_transform(&self.mat)
    }

    /// `W^{>k}[Φ]`.
    pub fn weight_above(&self, k: usize) -> Result<f64> {
        Ok(self.spectrum()?.weight_above(k))
    }

    /// `Tr_out(Φ)`.
    pub fn trace_out(&self) -> Result<ComplexMatrix> {
        let out: Vec<usize> = (self.n_in..self.num_qubits()).collect();
        partial_trace(&self.mat, &out, self.num_qubits())
    }

    fn same_shape(&self, other: &ChoiRep) -> Result<()> {
        if self.n_in != other.n_in || self.n_out != other.n_out {
            return Err(Error::InvalidChannel(format!(
                "register shapes differ: ({}, {}) vs ({}, {})",
                self.n_in, self.n_out, other.n_in, other.n_out
            )));
        }
        Ok(())
    }

    /// `(1/2^m)‖Φ − Ψ‖_F²`, the squared Pauli-coefficient distance.
    pub fn normalized_distance_sq(&self, other: &ChoiRep) -> Result<f64> {
        self.same_shape(other)?;
        let d = frobenius_norm(&(&self.mat - &other.mat));
        Ok(d * d / self.mat.dim() as f64)
    }
}

/// Unnormalised `|EPR_n⟩⟨EPR_n|` with register order (first copy, second copy).
pub fn epr_projector(n: usize) -> ComplexMatrix {
    let half = 1usize << n;
    let mut m = ComplexMatrix::zeros(half * half);
    for x in 0..half {
        for y in 0..half {
            m[(x * half + x, y * half + y)] = ONE;
        }
    }
    m
}

pub fn choi_of_identity(n: usize) -> ChoiRep {
    ChoiRep {
        n_in: n,
        n_out: n,
        mat: epr_projector(n),
    }
}

/// Replacement channel `ρ ↦ Tr(ρ)·σ`, Choi `I ⊗ σ`.
pub fn choi_of_replacement(n_in: usize, sigma: &ComplexMatrix) -> Result<ChoiRep> {
    let mat = crate::linalg::kron(&ComplexMatrix::identity(1 << n_in), sigma)?;
    ChoiRep::new(n_in, sigma.num_qubits(), mat)
}

/// Direct construction `Σ_{x,y} |x⟩⟨y| ⊗ E(|x⟩⟨y|)` for any linear map `E`.
pub fn choi_from_map(
    n_in: usize,
    n_out: usize,
    map: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
) -> Result<ChoiRep> {
    let din = 1usize << n_in;
    let dout = 1usize << n_out;
    check_capacity((din * dout) * (din * dout))?;
    let mut mat = ComplexMatrix::zeros(din * dout);
    for x in 0..din {
        for y in 0..din {
            let mut e = ComplexMatrix::zeros(din);
            e[(x, y)] = ONE;
            let out = map(&e)?;
            if out.dim() != dout {
                return Err(Error::DimensionMismatch {
                    expected: dout,
                    found: out.dim(),
                });
            }
            for o in 0..dout {
                for p in 0..dout {
                    mat[(x * dout + o, y * dout + p)] = out.get(o, p);
                }
            }
        }
    }
    ChoiRep::new(n_in, n_out, mat)
}

/// `I_{in∖t} ⊗ |EPR_1⟩⟨EPR_1|_{t,out}` on `n + 1` qubits.
fn routed_epr(n: usize, target: usize) -> ComplexMatrix {
    let dim = 1usize << (n + 1);
    let tbit = 1usize << (n - 1 - target);
    let mut m = ComplexMatrix::zeros(dim);
    for x in 0..1usize << n {
        let xo = usize::from(x & tbit != 0);
        for y in [x, x ^ tbit] {
            let yo = usize::from(y & tbit != 0);
            m[((x << 1) | xo, (y << 1) | yo)] = ONE;
        }
    }
    m
}

/// `Φ_U = (Uᵀ⊗I)(I⊗|EPR_1⟩⟨EPR_1|)(U*⊗I)` for the channel keeping qubit
/// `target` of `U|x⟩` and tracing out the rest.
pub fn choi_of_unitary_channel(u: &ComplexMatrix, n: usize, target: usize) -> Result<ChoiRep> {
    if u.dim() != 1usize << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: u.dim(),
        });
    }
    if target >= n {
        return Err(Error::QubitOutOfRange { qubit: target, count: n });
    }
    let res = u.unitarity_residual();
    if res > 1e-8 {
        return Err(Error::NotUnitary(res));
    }
    check_capacity(1usize << (2 * n + 2))?;
    let mut mat = routed_epr(n, target);
    let all: Vec<usize> = (0..n).collect();
    apply_gate_inplace(&mut mat, &u.transpose(), &all, Side::Conjugate)?;
    ChoiRep::new(n, 1, mat)
}

/// `Φ′ = Tr_aux(Φ·(I ⊗ ψᵀ ⊗ I))`, the aux register being the last `a` input qubits.
pub fn restrict_aux(full: &ChoiRep, aux: &AuxState) -> Result<ChoiRep> {
    let psi = aux
        .density()
        .ok_or_else(|| Error::InvalidArgument("no auxiliary register to restrict".into()))?;
    let a = aux.count();
    if full.n_in < a {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: full.n_in,
        });
    }
    let n = full.n_in - a;
    let dout = 1usize << full.n_out;
    let da = 1usize << a;
    let dn = 1usize << n;
    let dim = dn * dout;
    let src = full.mat.as_slice();
    let fdim = full.mat.dim();
    let mut mat = ComplexMatrix::zeros(dim);
    let entries: Vec<(usize, usize, C64)> = (0..da)
        .flat_map(|i| (0..da).map(move |k| (i, k)))
        .map(|(i, k)| (i, k, psi.get(i, k)))
        .filter(|(_, _, w)| *w != ZERO)
        .collect();
    let out = mat.as_mut_slice();
    for x in 0..dn {
        for o in 0..dout {
            let r = x * dout + o;
            for y in 0..dn {
                for p in 0..dout {
                    let mut acc = ZERO;
                    for &(i, k, w) in &entries {
                        let fr = (x * da + i) * dout + o;
                        let fc = (y * da + k) * dout + p;
                        acc += w * src[fr * fdim + fc];
                    }
                    out[r * dim + y * dout + p] = acc;
                }
            }
        }
    }
    ChoiRep::new(n, full.n_out, mat)
}

/// `⟨0^a|_aux Φ |0^a⟩_aux`.
pub fn postselect_clean_aux(full: &ChoiRep, a: usize) -> Result<ChoiRep> {
    let n = full.n_in.checked_sub(a).ok_or(Error::DimensionMismatch {
        expected: a,
        found: full.n_in,
    })?;
    let dout = 1usize << full.n_out;
    let keep: Vec<usize> = (0..1usize << n)
        .flat_map(|x| (0..dout).map(move |o| (x << a) * dout + o))
        .collect();
    let mut mat = ComplexMatrix::zeros(keep.len());
    for (r, &fr) in keep.iter().enumerate() {
        for (c, &fc) in keep.iter().enumerate() {
            mat[(r, c)] = full.mat.get(fr, fc);
        }
    }
    ChoiRep::new(n, full.n_out, mat)
}

/// `2^{−a}·Tr_aux(Φ)`.
pub fn trace_dirty_aux(full: &ChoiRep, a: usize) -> Result<ChoiRep> {
    let n = full.n_in.checked_sub(a).ok_or(Error::DimensionMismatch {
        expected: a,
        found: full.n_in,
    })?;
    let aux: Vec<usize> = (n..full.n_in).collect();
    let traced = partial_trace(&full.mat, &aux, full.num_qubits())?;
    ChoiRep::new(n, full.n_out, traced.scale(1.0 / (1u64 << a) as f64))
}

/// Choi representation of the circuit on all `q` inputs, before the aux
/// register is fixed. Built by conjugating `I⊗|EPR_1⟩⟨EPR_1|` with `Gᵀ`
/// for each gate in reverse temporal order.
pub fn choi_of_circuit_full(c: &QacCircuit) -> Result<ChoiRep> {
    c.ensure_valid()?;
    let q = c.num_qubits();
    check_capacity(1usize << (2 * q + 2))?;
    let mut mat = routed_epr(q, c.target());
    for gate in c.gates().into_iter().rev() {
        match gate {
            Gate::Single { qubit, u } => apply_gate_inplace(&mut mat, &u.transpose(), &[qubit], Side::Conjugate)?,
            Gate::Cz { qubits } => conjugate_by_diagonal_sign(&mut mat, cz_mask(&qubits, q + 1)),
        }
    }
    ChoiRep::new(q, 1, mat)
}

/// Choi representation of `ρ ↦ Tr_junk(U(ρ⊗ψ)U†)` for the circuit's aux state.
pub fn choi_of_circuit(c: &QacCircuit) -> Result<ChoiRep> {
    let full = choi_of_circuit_full(c)?;
    match c.aux() {
        AuxState::None => Ok(full),
        aux => restrict_aux(&full, aux),
    }
}

/// `Σ_x |x⟩⟨x| ⊗ |f(x)⟩⟨f(x)|`.
pub fn choi_of_boolfn(f: &TruthTable) -> ChoiRep {
    let n = f.n();
    let mut mat = ComplexMatrix::zeros(1 << (n + 1));
    for x in 0..1usize << n {
        let i = (x << 1) | usize::from(f.get(x));
        mat[(i, i)] = ONE;
    }
    ChoiRep { n_in: n, n_out: 1, mat }
}

/// `E(ρ) = Tr_in(Φ(ρᵀ⊗I))`, for `ρ` given as any operator on the input.
pub fn apply_channel_linear(phi: &ChoiRep, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let din = 1usize << phi.n_in;
    if rho.dim() != din {
        return Err(Error::DimensionMismatch {
            expected: din,
            found: rho.dim(),
        });
    }
    let dout = 1usize << phi.n_out;
    let dim = phi.mat.dim();
    let src = phi.mat.as_slice();
    let mut out = ComplexMatrix::zeros(dout);
    for o in 0..dout {
        for p in 0..dout {
            let mut acc = ZERO;
            for x in 0..din {
                let row = &src[(x * dout + o) * dim..(x * dout + o + 1) * dim];
                for (z, &r) in rho.row(x).iter().enumerate() {
                    acc += r * row[z * dout + p];
                }
            }
            out[(o, p)] = acc;
        }
    }
    Ok(out)
}

/// [`apply_channel_linear`] restricted to valid input states.
pub fn apply_channel(phi: &ChoiRep, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != 1usize << phi.n_in {
        return Err(Error::DimensionMismatch {
            expected: 1 << phi.n_in,
            found: rho.dim(),
        });
    }
    validate_state(rho, 1e-8)?;
    apply_channel_linear(phi, rho)
}

/// `Σ αᵢ Φᵢ` for nonnegative weights summing to 1.
pub fn convex_combination(terms: &[(f64, ChoiRep)]) -> Result<ChoiRep> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty combination".into()))?;
    if terms.iter().any(|(a, _)| !(*a >= 0.0)) {
        return Err(Error::InvalidArgument("negative weight".into()));
    }
    let total: f64 = terms.iter().map(|(a, _)| a).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
    }
    let mut mat = ComplexMatrix::zeros(first.mat.dim());
    for (a, phi) in terms {
        first.same_shape(phi)?;
        mat = &mat + &phi.mat.scale(*a);
    }
    ChoiRep::new(first.n_in, first.n_out, mat)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CptpReport {
    pub n_in: usize,
    pub n_out: usize,
    pub tol: f64,
    /// `‖Tr_out(Φ) − I‖_F`
    pub tp_residual: f64,
    pub min_eigenvalue: f64,
    pub hermiticity_residual: f64,
    pub ok: bool,
}

pub fn validate_cptp(phi: &ChoiRep, tol: f64) -> Result<CptpReport> {
    let tr_out = phi.trace_out()?;
    let tp_residual = frobenius_norm(&(&tr_out - &ComplexMatrix::identity(tr_out.dim())));
    let herm = phi.mat.hermiticity_residual();
    let min_eigenvalue = hermitian_eig(&phi.mat.hermitian_part())?.min_eigenvalue();
    Ok(CptpReport {
        n_in: phi.n_in,
        n_out: phi.n_out,
        tol,
        tp_residual,
        min_eigenvalue,
        hermiticity_residual: herm,
        ok: tp_residual <= tol && min_eigenvalue >= -tol && herm <= tol,
    })
}

const MAGIC: &[u8; 8] = b"CHOIREP1";

pub fn choi_to_bytes(phi: &ChoiRep) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 16 * phi.mat.as_slice().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(phi.n_in as u32).to_le_bytes());
    buf.extend_from_slice(&(phi.n_out as u32).to_le_bytes());
    for z in phi.mat.as_slice() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    buf
}

pub fn choi_from_bytes(bytes: &[u8]) -> Result<ChoiRep> {
    let bad = |msg: &str| Error::Parse {
        line: None,
        msg: msg.to_string(),
    };
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad("missing CHOIREP1 header"));
    }
    let n_in = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let n_out = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    if n_in + n_out > 30 {
        return Err(bad("register sizes too large"));
    }
    let dim = 1usize << (n_in + n_out);
    check_capacity(dim * dim)?;
    let body = &bytes[16..];
    if body.len() != dim * dim * 16 {
        return Err(bad("body length does not match header"));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    ChoiRep::new(n_in, n_out, ComplexMatrix::from_vec(dim, data)?)
}

/// Sidecar path `<file>.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the binary file and a JSON sidecar holding its validation report.
pub fn write_choi_file(phi: &ChoiRep, path: &Path, tol: f64) -> Result<CptpReport> {
    fs::write(path, choi_to_bytes(phi))?;
    let report = validate_cptp(phi, tol)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(report)
}

pub fn read_choi_file(path: &Path) -> Result<ChoiRep> {
    choi_from_bytes(&fs::read(path)?)
}
