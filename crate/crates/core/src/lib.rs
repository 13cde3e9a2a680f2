//! Choi-representation simulation, Pauli spectral analysis and low-degree
//! learning for shallow CZ circuits with arbitrary single-qubit gates.

pub mod boolfn;
pub mod channel;
pub mod circuit;
pub mod error;
pub mod harness;
pub mod learning;
pub mod linalg;
pub mod pauli;
pub mod random;
pub mod spectral;

pub use boolfn::TruthTable;
pub use channel::{AuxState, ChoiRep};
pub use circuit::QacCircuit;
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use pauli::{PauliSpectrum, PauliString};
