//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use qacspec::boolfn::TruthTable;
use qacspec::channel::{choi_from_map, ChoiRep};
use qacspec::linalg::{ComplexMatrix, C64};
use qacspec::pauli::{Pauli, PauliString};
use qacspec::{AuxState, QacCircuit, Result};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn letter(p: Pauli) -> [[C64; 2]; 2] {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    match p {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        Pauli::Z => [[o, z], [z, -o]],
    }
}

/// Entry `(r, c)` of the dense tensor product of Pauli letters.
fn pauli_entry(p: &PauliString, r: usize, col: usize) -> C64 {
    let m = p.len();
    (0..m).fold(c(1.0, 0.0), |acc, j| {
        let shift = m - 1 - j;
        acc * letter(p.letter(j))[(r >> shift) & 1][(col >> shift) & 1]
    })
}

/// `Tr(P·A)/2^m` by the definition, `O(4^m)` per coefficient.
pub fn naive_coefficient(a: &ComplexMatrix, p: &PauliString) -> C64 {
    let dim = a.dim();
    let mut acc = c(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            acc += pauli_entry(p, i, j) * a.get(j, i);
        }
    }
    acc / dim as f64
}

/// `f̂(S) = E_x (−1)^{f(x) + S·x}`, with `S` and `x` sharing the bit order.
pub fn naive_fourier(f: &TruthTable, s: usize) -> f64 {
    let n = f.n();
    let total: f64 = (0..1usize << n)
        .map(|x| {
            let parity = (x & s).count_ones() as usize + usize::from(f.get(x));
            if parity % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .sum();
    total / (1u64 << n) as f64
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = a.get(i, j) * b.get(k, l);
                }
            }
        }
    }
    out
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let d = a.dim();
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for k in 0..d {
            let x = a.get(i, k);
            if x == c(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[(i, j)] += x * b.get(k, j);
            }
        }
    }
    out
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    let d = a.dim();
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = a.get(j, i).conj();
        }
    }
    out
}

/// Reduced operator on qubit `target` of a `q`-qubit operator.
pub fn reduce_to_qubit(m: &ComplexMatrix, q: usize, target: usize) -> ComplexMatrix {
    let shift = q - 1 - target;
    let mut out = ComplexMatrix::zeros(2);
    for r in 0..m.dim() {
        for col in 0..m.dim() {
            let rest_r = r & !(1 << shift);
            let rest_c = col & !(1 << shift);
            if rest_r == rest_c {
                out[((r >> shift) & 1, (col >> shift) & 1)] += m.get(r, col);
            }
        }
    }
    out
}

/// Aux density for a circuit, `None` when there is no aux register.
pub fn aux_density(aux: &AuxState) -> Option<ComplexMatrix> {
    match aux {
        AuxState::None => None,
        AuxState::Clean(a) => {
            let mut m = ComplexMatrix::zeros(1 << a);
            m[(0, 0)] = c(1.0, 0.0);
            Some(m)
        }
        AuxState::Dirty(a) => Some(ComplexMatrix::identity(1 << a).scale(1.0 / (1u64 << a) as f64)),
        AuxState::Arbitrary(psi) => Some(psi.clone()),
    }
}

/// `E(ρ) = Tr_{¬target}(U(ρ⊗ψ)U†)` simulated from the circuit unitary.
pub fn direct_output(u: &ComplexMatrix, c: &QacCircuit, rho: &ComplexMatrix) -> ComplexMatrix {
    let full = match aux_density(c.aux()) {
        Some(psi) => kron(rho, &psi),
        None => rho.clone(),
    };
    let evolved = matmul(&matmul(u, &full), &adjoint(u));
    reduce_to_qubit(&evolved, c.num_qubits(), c.target())
}

/// `Σ_{x,y}|x⟩⟨y| ⊗ E(|x⟩⟨y|)` with `E` simulated directly.
pub fn direct_choi(c: &QacCircuit) -> Result<ChoiRep> {
    let u = c.build_unitary()?;
    choi_from_map(c.num_inputs(), 1, |e| Ok(direct_output(&u, c, e)))
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
