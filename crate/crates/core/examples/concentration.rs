//! Weight above degree k against the explicit concentration bound, for
//! random circuits with clean auxiliary qubits.

use qacspec::circuit::{random_qac, RandomQacSpec};
use qacspec::spectral::concentration_report;
use qacspec::{AuxState, Result};

fn main() -> Result<()> {
    for seed in 0..3 {
        let c = random_qac(&RandomQacSpec::new(6, 2, vec![2, 3]), seed)?.with_aux(AuxState::Clean(1));
        let r = concentration_report(&c)?;
        println!(
            "seed {seed}: n={} a={} d={} s={} all satisfied: {}",
            r.params.n, r.params.a, r.params.d, r.params.s, r.all_satisfied
        );
        for row in &r.curve {
            println!("  k={:>2}  W^>k={:.3e}  bound={:.3e}", row.k, row.measured, row.bound);
        }
    }
    Ok(())
}
