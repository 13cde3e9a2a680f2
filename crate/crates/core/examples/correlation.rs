//! Agreement of shallow circuits with parity, against the spectral bounds.

use qacspec::boolfn::named_function;
use qacspec::channel::{choi_of_circuit, choi_of_replacement};
use qacspec::circuit::{random_qac, RandomQacSpec};
use qacspec::linalg::ComplexMatrix;
use qacspec::spectral::correlation_report;
use qacspec::Result;

fn main() -> Result<()> {
    let n = 6;
    let parity = named_function("parity", n)?;
    let mixing = choi_of_replacement(n, &ComplexMatrix::identity(2).scale(0.5))?;
    let r = correlation_report(&mixing, &parity, n - 1, Some("parity"))?;
    println!("mixing channel: agreement {:.12}", r.agreement);

    for seed in 0..5 {
        let c = random_qac(&RandomQacSpec::new(n, 2, vec![2, 3]), seed)?;
        let r = correlation_report(&choi_of_circuit(&c)?, &parity, n - 1, Some("parity"))?;
        println!(
            "seed {seed}: agreement {:.6} proof bound {:.6} stated {:.6} high-degree {:.6}",
            r.agreement,
            r.proof_bound,
            r.stated_bound,
            r.high_degree_bound.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
