//! End-to-end low-degree learning of a circuit channel from classical shadows.

use qacspec::channel::choi_of_circuit;
use qacspec::circuit::{random_qac, RandomQacSpec};
use qacspec::learning::{learn_channel, LearnConfig, OracleMode};
use qacspec::Result;

fn main() -> Result<()> {
    let c = random_qac(&RandomQacSpec::new(3, 2, vec![2, 3]), 2)?;
    let phi = choi_of_circuit(&c)?;
    for oracle in [OracleMode::Exact, OracleMode::Queries, OracleMode::Shadows] {
        let cfg = LearnConfig::new(4, 0.1, 0.1, 17).oracle(oracle);
        let r = learn_channel(&phi, Some(&c), &cfg)?.report;
        println!(
            "{oracle:?}: shots {} error_pre {:.2e} error_post {:.2e} (W^>4 = {:.2e}, rounding {} iterations)",
            r.shots_used, r.error_pre, r.error_post, r.truncation_weight, r.rounding_iterations
        );
    }
    Ok(())
}
