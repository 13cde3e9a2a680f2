//! Deleting wide CZ gates changes the circuit by at most `O(m²/2^ℓ)`.

use qacspec::circuit::{random_qac, RandomQacSpec};
use qacspec::spectral::cz_removal_report;
use qacspec::Result;

fn main() -> Result<()> {
    for seed in 0..4 {
        let c = random_qac(&RandomQacSpec::new(7, 2, vec![2, 4, 5, 6]), seed)?;
        for ell in [4, 5, 6] {
            let r = cz_removal_report(&c, ell)?;
            println!(
                "seed {seed} ell={ell}: removed {} gates, unitary {:.3e} <= {:.3e}, spectrum {:.3e} <= {:.3e}",
                r.removed, r.unitary_dist_sq_norm, r.bound_4m2, r.spectrum_dist, r.bound_32m2
            );
        }
    }
    Ok(())
}
