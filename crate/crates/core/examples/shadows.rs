//! Classical shadows of a circuit's Choi state with both simulation backends.

use qacspec::channel::choi_of_circuit;
use qacspec::circuit::{random_qac, RandomQacSpec};
use qacspec::learning::{sample_choi_shadows, DensityBackend, PurificationBackend};
use qacspec::pauli::{pauli_coefficient, PauliString};
use qacspec::Result;

fn main() -> Result<()> {
    let c = random_qac(&RandomQacSpec::new(3, 2, vec![2, 3]), 5)?;
    let phi = choi_of_circuit(&c)?;
    let dens = sample_choi_shadows(&DensityBackend::new(&phi)?, 20_000, 1)?;
    let pure = sample_choi_shadows(&PurificationBackend::new(&c)?, 20_000, 2)?;
    for text in ["IIIZ", "ZIIZ", "IXIY", "XXIZ"] {
        let p: PauliString = text.parse()?;
        let exact = pauli_coefficient(phi.matrix(), &p)?.re * 2.0;
        let a = dens.stats(&p);
        let b = pure.stats(&p);
        println!(
            "{text}: exact {exact:+.4}  density {:+.4}±{:.4}  purification {:+.4}±{:.4}",
            a.mean,
            a.std_error(),
            b.mean,
            b.std_error()
        );
    }
    let head = sample_choi_shadows(&DensityBackend::new(&phi)?, 5, 1)?;
    head.write_csv(std::io::stdout())?;
    Ok(())
}
