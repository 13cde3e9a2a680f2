//! Pauli spectrum of a two-qubit CZ circuit's Choi representation.

use qacspec::channel::choi_of_circuit;
use qacspec::circuit::hadamard;
use qacspec::pauli::{pauli_coefficient, PauliString};
use qacspec::{QacCircuit, Result};

fn main() -> Result<()> {
    let mut c = QacCircuit::new(2);
    c.single(0, hadamard()).single(1, hadamard());
    c.cz(vec![0, 1]);
    let phi = choi_of_circuit(&c)?;
    let spectrum = phi.spectrum()?;

    println!("m = {}, total weight = {:.6}", spectrum.num_qubits(), spectrum.total_weight());
    for (k, w) in spectrum.weight_profile().iter().enumerate() {
        println!("W^={k} = {w:.6}   W^>{k} = {:.6}", spectrum.weight_above(k));
    }
    for (p, c) in spectrum.support(1e-12) {
        println!("{p}  {c:+.6}");
    }

    let zz: PauliString = "IZX".parse()?;
    let direct = pauli_coefficient(phi.matrix(), &zz)?;
    println!("IZX via Tr(PA)/2^m: {:+.6}", direct.re);
    spectrum.write_profile_csv(std::io::stdout())?;
    Ok(())
}
