//! Recovering Pauli coefficients from input-state preparation and output measurement.

use qacspec::channel::choi_of_circuit;
use qacspec::circuit::{random_qac, RandomQacSpec};
use qacspec::learning::{estimate_from_queries, measurement_query, query_input_state, QueryMode};
use qacspec::pauli::{pauli_coefficient, PauliString};
use qacspec::Result;

fn main() -> Result<()> {
    let c = random_qac(&RandomQacSpec::new(3, 2, vec![2, 3]), 9)?;
    let phi = choi_of_circuit(&c)?;
    let r: PauliString = "YXIZ".parse()?;
    let r_in = r.slice(0..3);
    let r_out = r.slice(3..4);
    let t = measurement_query(&phi, &query_input_state(&r_in), &r_out, QueryMode::Exact, 0)?;
    let q = pauli_coefficient(phi.matrix(), &PauliString::identity(3).tensor(&r_out))?.re;
    let direct = pauli_coefficient(phi.matrix(), &r)?.re;
    println!("Φ̂({r}) from query: {:+.6}, direct: {direct:+.6}", t / 2.0 - q);

    let sampled = estimate_from_queries(&phi, 2, Some(200_000), 3)?;
    let exact = estimate_from_queries(&phi, 2, None, 0)?;
    let worst = sampled
        .estimates
        .iter()
        .zip(&exact.estimates)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("{} coefficients, {} shots, max error {worst:.4}", sampled.paulis.len(), sampled.shots_used);
    Ok(())
}
