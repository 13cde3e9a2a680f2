//! Fixing auxiliary qubits: clean, dirty and arbitrary states.

use qacspec::channel::{choi_of_circuit_full, postselect_clean_aux, restrict_aux, trace_dirty_aux, validate_cptp};
use qacspec::circuit::{random_qac, RandomQacSpec};
use qacspec::random::{random_density, seeded};
use qacspec::{AuxState, Result};

fn main() -> Result<()> {
    let c = random_qac(&RandomQacSpec::new(4, 2, vec![2, 3]), 7)?;
    let full = choi_of_circuit_full(&c)?;
    println!("full: n_in={} W^>2={:.4}", full.n_in(), full.weight_above(2)?);

    let clean = restrict_aux(&full, &AuxState::Clean(2))?;
    let closed = postselect_clean_aux(&full, 2)?;
    println!("clean: W^>2={:.4}, closed form diff {:.1e}", clean.weight_above(2)?, clean.matrix().max_abs_diff(closed.matrix()));

    let dirty = restrict_aux(&full, &AuxState::Dirty(2))?;
    let closed = trace_dirty_aux(&full, 2)?;
    println!("dirty: W^>2={:.4}, closed form diff {:.1e}", dirty.weight_above(2)?, dirty.matrix().max_abs_diff(closed.matrix()));

    let psi = random_density(4, 2, &mut seeded(1));
    let arbitrary = restrict_aux(&full, &AuxState::Arbitrary(psi))?;
    let report = validate_cptp(&arbitrary, 1e-8)?;
    println!("arbitrary: W^>2={:.4}, CPTP {}", arbitrary.weight_above(2)?, report.ok);
    Ok(())
}
