//! Circuit JSON and Choi binary files.

use qacspec::channel::{choi_of_circuit, read_choi_file, write_choi_file};
use qacspec::circuit::{circuit_from_json, circuit_to_json, hadamard};
use qacspec::{AuxState, QacCircuit, Result};

fn main() -> Result<()> {
    let mut c = QacCircuit::new(3).with_aux(AuxState::Dirty(1)).with_target(0);
    c.single(0, hadamard());
    c.cz(vec![0, 1, 2]);
    c.single(0, hadamard());
    let text = circuit_to_json(&c, None)?;
    println!("{text}");
    let back = circuit_from_json(&text, None)?;
    assert_eq!(back, c);

    let broken = text.replacen("\"target\": 0", "\"target\": 7", 1);
    match circuit_from_json(&broken, None) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }

    let dir = std::env::temp_dir().join("qacspec-circuit-files");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("toffoli.choi");
    let report = write_choi_file(&choi_of_circuit(&c)?, &path, 1e-8)?;
    let loaded = read_choi_file(&path)?;
    println!("wrote {} (CPTP {}), reloaded n_in={} n_out={}", path.display(), report.ok, loaded.n_in(), loaded.n_out());
    Ok(())
}
