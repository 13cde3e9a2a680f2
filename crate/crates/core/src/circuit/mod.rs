//! Layered QAC circuits `L0 M1 L1 … Md Ld`: single-qubit layers `L_i` and
//! CZ layers `M_i`.

mod json;

pub use json::{
    circuit_from_json, circuit_to_json, read_circuit, read_density_file, write_circuit,
    write_density_file,
};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::channel::AuxState;
use crate::error::{Error, Result};
use crate::linalg::{apply_gate_inplace, check_capacity, ComplexMatrix, Side};
use crate::random::{random_unitary, seeded};

/// Tolerance used when checking single-qubit gates for unitarity.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Single { qubit: usize, u: ComplexMatrix },
    Cz { qubits: Vec<usize> },
}

/// A single-qubit gate inside a layer.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleGate {
    pub qubit: usize,
    pub u: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QacCircuit {
    q: usize,
    aux: AuxState,
    target: usize,
    singles: Vec<Vec<SingleGate>>,
    multis: Vec<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub depth: usize,
    pub size: usize,
    pub violations: Vec<String>,
}

impl QacCircuit {
    /// Empty circuit on `q` qubits, no auxiliaries, target `q − 1`.
    pub fn new(q: usize) -> Self {
        Self {
            q,
            aux: AuxState::None,
            target: q.saturating_sub(1),
            singles: vec![Vec::new()],
            multis: Vec::new(),
        }
    }

    pub fn with_aux(mut self, aux: AuxState) -> Self {
        self.aux = aux;
        self
    }

    pub fn with_target(mut self, target: usize) -> Self {
        self.target = target;
        self
    }

    pub fn set_aux(&mut self, aux: AuxState) {
        self.aux = aux;
    }

    /// Appends a single-qubit gate to the current single-qubit layer; a gate
    /// already present on the same qubit is composed with it.
    pub fn single(&mut self, qubit: usize, u: ComplexMatrix) -> &mut Self {
        let layer = self.singles.last_mut().expect("at least one single layer");
        match layer.iter_mut().find(|g| g.qubit == qubit) {
            Some(g) => g.u = u.matmul(&g.u),
            None => layer.push(SingleGate { qubit, u }),
        }
        self
    }

    /// Appends a CZ layer followed by a fresh (identity) single-qubit layer.
    pub fn cz_layer(&mut self, gates: Vec<Vec<usize>>) -> &mut Self {
        self.multis.push(gates);
        self.singles.push(Vec::new());
        self
    }

    pub fn cz(&mut self, qubits: Vec<usize>) -> &mut Self {
        self.cz_layer(vec![qubits])
    }

    /// Toffoli on `controls → target` as `H(target)·CZ·H(target)`.
    pub fn toffoli(&mut self, controls: &[usize], target: usize) -> &mut Self {
        let mut support = controls.to_vec();
        support.push(target);
        self.single(target, hadamard());
        self.cz(support);
        self.single(target, hadamard())
    }

    pub fn num_qubits(&self) -> usize {
        self.q
    }

    pub fn num_aux(&self) -> usize {
        self.aux.count()
    }

    /// Input qubits `n = q − a`.
    pub fn num_inputs(&self) -> usize {
        self.q.saturating_sub(self.num_aux())
    }

    pub fn aux(&self) -> &AuxState {
        &self.aux
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn depth(&self) -> usize {
        self.multis.len()
    }

    /// Number of CZ gates.
    pub fn size(&self) -> usize {
        self.multis.iter().map(Vec::len).sum()
    }

    /// Largest CZ support, or 1 for CZ-free circuits.
    pub fn max_width(&self) -> usize {
        self.multis.iter().flatten().map(Vec::len).max().unwrap_or(1)
    }

    pub fn single_layers(&self) -> &[Vec<SingleGate>] {
        &self.singles
    }

    pub fn multi_layers(&self) -> &[Vec<Vec<usize>>] {
        &self.multis
    }

    /// Gates in temporal order.
    pub fn gates(&self) -> Vec<Gate> {
        let mut out = Vec::new();
        for (i, layer) in self.singles.iter().enumerate() {
            if i > 0 {
                for cz in &self.multis[i - 1] {
                    out.push(Gate::Cz { qubits: cz.clone() });
                }
            }
            for g in layer {
                out.push(Gate::Single {
                    qubit: g.qubit,
                    u: g.u.clone(),
                });
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        if self.q == 0 {
            v.push("circuit has no qubits".to_string());
        }
        if self.target >= self.q.max(1) {
            v.push(format!("target {} out of range for {} qubits", self.target, self.q));
        }
        let a = self.aux.count();
        if a >= self.q.max(1) {
            v.push(format!("{a} auxiliary qubits leave no input qubits (q = {})", self.q));
        }
        if let Err(e) = self.aux.validate() {
            v.push(format!("auxiliary state: {e}"));
        }
        for (i, layer) in self.singles.iter().enumerate() {
            let mut seen = vec![false; self.q];
            for g in layer {
                if g.qubit >= self.q {
                    v.push(format!("single layer {i}: qubit {} out of range", g.qubit));
                    continue;
                }
                if seen[g.qubit] {
                    v.push(format!("single layer {i}: qubit {} used twice", g.qubit));
                }
                seen[g.qubit] = true;
                if g.u.dim() != 2 {
                    v.push(format!("single layer {i}: gate on qubit {} is not 2x2", g.qubit));
                } else if g.u.unitarity_residual() > UNITARY_TOL {
                    v.push(format!(
                        "single layer {i}: gate on qubit {} not unitary (residual {:.3e})",
                        g.qubit,
                        g.u.unitarity_residual()
                    ));
                }
            }
        }
        for (i, layer) in self.multis.iter().enumerate() {
            let mut seen = vec![false; self.q];
            for cz in layer {
                if cz.len() < 2 {
                    v.push(format!("multi layer {}: CZ needs at least 2 qubits, got {:?}", i + 1, cz));
                }
                for &t in cz {
                    if t >= self.q {
                        v.push(format!("multi layer {}: qubit {t} out of range", i + 1));
                    } else if seen[t] {
                        v.push(format!("multi layer {}: CZ supports overlap on qubit {t}", i + 1));
                    } else {
                        seen[t] = true;
                    }
                }
            }
        }
        ValidationReport {
            ok: v.is_empty(),
            depth: self.depth(),
            size: self.size(),
            violations: v,
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.ok {
            Ok(())
        } else {
            Err(Error::InvalidCircuit(report.violations.join("; ")))
        }
    }

    /// Deletes every CZ gate acting on at least `ell` qubits, keeping the layer
    /// structure. Returns the circuit and the number `m` of removed gates.
    pub fn remove_wide_gates(&self, ell: usize) -> (QacCircuit, usize) {
        let mut out = self.clone();
        let mut removed = 0;
        for layer in &mut out.multis {
            let before = layer.len();
            layer.retain(|cz| cz.len() < ell);
            removed += before - layer.len();
        }
        (out, removed)
    }

    /// Qubits joined to `target` by a chain of CZ supports running forward in time.
    pub fn lightcone(&self, target: usize) -> Vec<usize> {
        let mut inside = vec![false; self.q];
        if target < self.q {
            inside[target] = true;
        }
        for layer in self.multis.iter().rev() {
            let hits: Vec<&Vec<usize>> = layer
                .iter()
                .filter(|cz| cz.iter().any(|&t| t < self.q && inside[t]))
                .collect();
            for cz in hits {
                for &t in cz {
                    if t < self.q {
                        inside[t] = true;
                    }
                }
            }
        }
        (0..self.q).filter(|&t| inside[t]).collect()
    }

    /// Full `2^q × 2^q` unitary, built gate by gate.
    pub fn build_unitary(&self) -> Result<ComplexMatrix> {
        self.ensure_valid()?;
        let dim = 1usize << self.q;
        check_capacity(dim * dim)?;
        let mut u = ComplexMatrix::identity(dim);
        for gate in self.gates() {
            match gate {
                Gate::Single { qubit, u: g } => apply_gate_inplace(&mut u, &g, &[qubit], Side::Left)?,
                Gate::Cz { qubits } => {
                    let mask = cz_mask(&qubits, self.q);
                    for r in 0..dim {
                        if r & mask == mask {
                            for z in &mut u.as_mut_slice()[r * dim..(r + 1) * dim] {
                                *z = -*z;
                            }
                        }
                    }
                }
            }
        }
        Ok(u)
    }
}

/// Bit mask of a CZ support inside a `q`-qubit index (qubit 0 most significant).
pub fn cz_mask(qubits: &[usize], q: usize) -> usize {
    qubits.iter().map(|&t| 1usize << (q - 1 - t)).fold(0, |a, b| a | b)
}

/// `CZ_S` as a dense diagonal matrix on `q` qubits.
pub fn cz_matrix(qubits: &[usize], q: usize) -> ComplexMatrix {
    let mask = cz_mask(qubits, q);
    let diag: Vec<f64> = (0..1usize << q)
        .map(|i| if i & mask == mask { -1.0 } else { 1.0 })
        .collect();
    ComplexMatrix::diag_real(&diag).expect("power-of-two dimension")
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]).expect("2x2")
}

/// Parameters for [`random_qac`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomQacSpec {
    pub q: usize,
    pub d: usize,
    /// Allowed CZ widths, drawn uniformly.
    pub widths: Vec<usize>,
    /// Probability of opening a gate at each free qubit while packing a layer.
    pub gate_prob: f64,
}

impl RandomQacSpec {
    pub fn new(q: usize, d: usize, widths: Vec<usize>) -> Self {
        Self {
            q,
            d,
            widths,
            gate_prob: 0.5,
        }
    }
}

/// Random circuit with exactly `d` nonempty CZ layers and a random unitary on
/// every qubit in every single-qubit layer. Deterministic in `seed`.
pub fn random_qac(spec: &RandomQacSpec, seed: u64) -> Result<QacCircuit> {
    let mut rng = seeded(seed);
    random_qac_with(spec, &mut rng)
}

pub fn random_qac_with<R: Rng + ?Sized>(spec: &RandomQacSpec, rng: &mut R) -> Result<QacCircuit> {
    if spec.q == 0 {
        return Err(Error::InvalidArgument("q must be at least 1".into()));
    }
    if spec.d > 0 {
        if spec.widths.is_empty() {
            return Err(Error::InvalidArgument("no CZ widths given".into()));
        }
        if let Some(&w) = spec.widths.iter().find(|&&w| w < 2 || w > spec.q) {
            return Err(Error::InvalidArgument(format!(
                "CZ width {w} infeasible on {} qubits",
                spec.q
            )));
        }
    }
    let min_width = spec.widths.iter().copied().min().unwrap_or(2);
    let mut c = QacCircuit::new(spec.q);
    for layer in 0..=spec.d {
        for t in 0..spec.q {
            c.single(t, random_unitary(2, rng));
        }
        if layer == spec.d {
            break;
        }
        let mut order: Vec<usize> = (0..spec.q).collect();
        order.shuffle(rng);
        let mut gates = Vec::new();
        let mut pos = 0;
        while spec.q - pos >= min_width {
            let remaining = spec.q - pos;
            if !gates.is_empty() && !rng.random_bool(spec.gate_prob.clamp(0.0, 1.0)) {
                pos += 1;
                continue;
            }
            let options: Vec<usize> = spec.widths.iter().copied().filter(|&w| w <= remaining).collect();
            let w = options[rng.random_range(0..options.len())];
            let mut support = order[pos..pos + w].to_vec();
            support.sort_unstable();
            gates.push(support);
            pos += w;
        }
        c.cz_layer(gates);
    }
    Ok(c)
}

/// Applies `CZ_S` on both sides of `a` (`CZ·A·CZ`) for a `q`-qubit operator
/// where the support bits are given by `mask`.
pub(crate) fn conjugate_by_diagonal_sign(a: &mut ComplexMatrix, mask: usize) {
    let dim = a.dim();
    let data = a.as_mut_slice();
    for r in 0..dim {
        let sr = r & mask == mask;
        for c in 0..dim {
            if sr != (c & mask == mask) {
                data[r * dim + c] = -data[r * dim + c];
            }
        }
    }
}
