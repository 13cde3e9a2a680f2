//! Rounding a noisy Choi matrix to the nearest CPTP map.

use qacspec::channel::{choi_of_identity, validate_cptp, ChoiRep};
use qacspec::learning::{round_to_cptp, RoundingOptions};
use qacspec::random::{random_hermitian, seeded};
use qacspec::Result;

fn main() -> Result<()> {
    let truth = choi_of_identity(2);
    let noise = random_hermitian(16, &mut seeded(3)).scale(0.05);
    let noisy = ChoiRep::new(2, 2, truth.matrix() + &noise)?;
    let before = validate_cptp(&noisy, 1e-6)?;
    let opts = RoundingOptions {
        track_history: true,
        ..Default::default()
    };
    let r = round_to_cptp(&noisy, &opts)?;
    let after = validate_cptp(&r.choi, 1e-6)?;
    println!("before: tp {:.3e} min eig {:+.3e}", before.tp_residual, before.min_eigenvalue);
    println!("after {} iterations: tp {:.3e} min eig {:+.3e}", r.iterations, after.tp_residual, after.min_eigenvalue);
    println!(
        "distance to truth: {:.4e} -> {:.4e}",
        noisy.normalized_distance_sq(&truth)?,
        r.choi.normalized_distance_sq(&truth)?
    );
    for step in r.history.iter().take(5) {
        println!("  iter {} step {:.3e} psd violation {:.3e}", step.iteration, step.step, step.psd_violation);
    }
    Ok(())
}
