//! Fourier spectrum of a Boolean function read off its classical channel.

use qacspec::boolfn::{named_function, wht_fourier};
use qacspec::channel::choi_of_boolfn;
use qacspec::pauli::{Pauli, PauliString};
use qacspec::Result;

fn main() -> Result<()> {
    let f = named_function("majority", 3)?;
    println!("truth table {f}");
    let fourier = wht_fourier(&f);
    let spectrum = choi_of_boolfn(&f).spectrum()?;
    for s in 0..8usize {
        let mut letters: Vec<Pauli> = (0..3).map(|j| if s >> (2 - j) & 1 == 1 { Pauli::Z } else { Pauli::I }).collect();
        letters.push(Pauli::Z);
        let p = PauliString::new(letters);
        println!("S={s:03b}  f̂(S)={:+.3}  Φ̂({p})={:+.3}", fourier.get(s), spectrum.get(&p));
    }
    Ok(())
}
