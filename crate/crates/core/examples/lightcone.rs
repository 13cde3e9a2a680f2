//! Circuits with only narrow CZ gates have no Pauli weight above the lightcone size.

use qacspec::circuit::{random_qac, RandomQacSpec};
use qacspec::spectral::check_lightcone_zero_weight;
use qacspec::Result;

fn main() -> Result<()> {
    for (q, d) in [(5, 1), (6, 2), (7, 2)] {
        let c = random_qac(&RandomQacSpec::new(q, d, vec![2]), 42)?;
        let r = check_lightcone_zero_weight(&c)?;
        println!(
            "q={q} d={d} lightcone={:?} W^>{}={:.1e} outside={:.1e} ok={}",
            r.lightcone, r.width_threshold, r.weight_above_width_threshold, r.weight_outside_lightcone, r.ok
        );
    }
    Ok(())
}
