//! Circuit JSON files and the density-matrix binary used for arbitrary aux states.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::QacCircuit;
use crate::channel::AuxState;
use crate::error::{Error, Result};
use crate::linalg::{check_capacity, ComplexMatrix, C64};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aux: Option<RawAux>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<usize>,
    layers: Vec<RawLayer>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAux {
    kind: String,
    #[serde(default)]
    count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state_file: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawLayer {
    Single { gates: Vec<RawGate> },
    Multi { cz: Vec<Vec<usize>> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    q: usize,
    u: [[[f64; 2]; 2]; 2],
}

/// 1-based line of the `n`-th occurrence of `needle`, if any.
fn line_of_nth(text: &str, needle: &str, n: usize) -> Option<usize> {
    let (pos, _) = text.match_indices(needle).nth(n)?;
    Some(text[..pos].matches('\n').count() + 1)
}

fn parse_err(line: Option<usize>, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a circuit. `base_dir` resolves relative `state_file` paths.
pub fn circuit_from_json(text: &str, base_dir: Option<&Path>) -> Result<QacCircuit> {
    let raw: RawCircuit =
        serde_json::from_str(text).map_err(|e| parse_err(Some(e.line()), e.to_string()))?;
    let q = raw.q;
    if q == 0 {
        return Err(parse_err(line_of_nth(text, "\"q\"", 0), "q must be at least 1"));
    }
    let aux_line = line_of_nth(text, "\"aux\"", 0);
    let aux = match raw.aux {
        None => AuxState::None,
        Some(a) => match a.kind.as_str() {
            "none" if a.count == 0 => AuxState::None,
            "none" => return Err(parse_err(aux_line, "aux kind \"none\" requires count 0")),
            "clean" => AuxState::Clean(a.count),
            "dirty" => AuxState::Dirty(a.count),
            "arbitrary" => {
                let file = a
                    .state_file
                    .ok_or_else(|| parse_err(aux_line, "arbitrary aux requires state_file"))?;
                let path = match base_dir {
                    Some(dir) => dir.join(&file),
                    None => PathBuf::from(&file),
                };
                let rho = read_density_file(&path)
                    .map_err(|e| parse_err(aux_line, format!("state_file {file}: {e}")))?;
                if rho.dim() != 1usize << a.count {
                    return Err(parse_err(
                        aux_line,
                        format!("state_file dimension {} does not match count {}", rho.dim(), a.count),
                    ));
                }
                AuxState::Arbitrary(rho)
            }
            other => return Err(parse_err(aux_line, format!("unknown aux kind {other:?}"))),
        },
    };
    if let Err(e) = aux.validate() {
        return Err(parse_err(aux_line, e.to_string()));
    }
    if aux.count() >= q {
        return Err(parse_err(aux_line, format!("{} auxiliary qubits leave no inputs", aux.count())));
    }
    let target = raw.target.unwrap_or(q - 1);
    if target >= q {
        return Err(parse_err(
            line_of_nth(text, "\"target\"", 0),
            format!("target {target} out of range for {q} qubits"),
        ));
    }

    let mut c = QacCircuit::new(q).with_aux(aux).with_target(target);
    for (i, layer) in raw.layers.into_iter().enumerate() {
        let line = line_of_nth(text, "\"type\"", i);
        match layer {
            RawLayer::Single { gates } => {
                let mut seen = vec![false; q];
                for g in gates {
                    if g.q >= q {
                        return Err(parse_err(line, format!("layer {i}: qubit {} out of range", g.q)));
                    }
                    if seen[g.q] {
                        return Err(parse_err(line, format!("layer {i}: qubit {} used twice", g.q)));
                    }
                    seen[g.q] = true;
                    let data = g.u.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
                    let u = ComplexMatrix::from_vec(2, data)?;
                    let res = u.unitarity_residual();
                    if res > super::UNITARY_TOL {
                        return Err(parse_err(
                            line,
                            format!("layer {i}: gate on qubit {} not unitary (residual {res:.3e})", g.q),
                        ));
                    }
                    c.single(g.q, u);
                }
            }
            RawLayer::Multi { cz } => {
                let mut seen = vec![false; q];
                for support in &cz {
                    if support.len() < 2 {
                        return Err(parse_err(line, format!("layer {i}: CZ needs at least 2 qubits")));
                    }
                    for &t in support {
                        if t >= q {
                            return Err(parse_err(line, format!("layer {i}: qubit {t} out of range")));
                        }
                        if seen[t] {
                            return Err(parse_err(line, format!("layer {i}: CZ supports overlap on qubit {t}")));
                        }
                        seen[t] = true;
                    }
                }
                c.cz_layer(cz);
            }
        }
    }
    Ok(c)
}

/// Serialises in canonical form. For arbitrary aux the density matrix must
/// already be stored at `state_file`.
pub fn circuit_to_json(c: &QacCircuit, state_file: Option<&str>) -> Result<String> {
    let aux = match c.aux() {
        AuxState::None => None,
        AuxState::Clean(a) => Some(RawAux {
            kind: "clean".into(),
            count: *a,
            state_file: None,
        }),
        AuxState::Dirty(a) => Some(RawAux {
            kind: "dirty".into(),
            count: *a,
            state_file: None,
        }),
        AuxState::Arbitrary(rho) => Some(RawAux {
            kind: "arbitrary".into(),
            count: rho.num_qubits(),
            state_file: Some(
                state_file
                    .ok_or_else(|| Error::InvalidArgument("arbitrary aux needs a state file".into()))?
                    .to_string(),
            ),
        }),
    };
    let mut layers = Vec::new();
    for (i, singles) in c.single_layers().iter().enumerate() {
        if i > 0 {
            layers.push(RawLayer::Multi {
                cz: c.multi_layers()[i - 1].clone(),
            });
        }
        if !singles.is_empty() {
            let gates = singles
                .iter()
                .map(|g| {
                    let z = |r: usize, col: usize| {
                        let v = g.u.get(r, col);
                        [v.re, v.im]
                    };
                    RawGate {
                        q: g.qubit,
                        u: [[z(0, 0), z(0, 1)], [z(1, 0), z(1, 1)]],
                    }
                })
                .collect();
            layers.push(RawLayer::Single { gates });
        }
    }
    let raw = RawCircuit {
        q: c.num_qubits(),
        aux,
        target: Some(c.target()),
        layers,
    };
    Ok(serde_json::to_string_pretty(&raw)?)
}

pub fn read_circuit(path: &Path) -> Result<QacCircuit> {
    let text = fs::read_to_string(path)?;
    circuit_from_json(&text, path.parent())
}

/// Writes the circuit; an arbitrary aux state goes to `<stem>.aux.bin` next to it.
pub fn write_circuit(c: &QacCircuit, path: &Path) -> Result<()> {
    let state_name = match c.aux() {
        AuxState::Arbitrary(rho) => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("circuit");
            let name = format!("{stem}.aux.bin");
            write_density_file(rho, &path.with_file_name(&name))?;
            Some(name)
        }
        _ => None,
    };
    fs::write(path, circuit_to_json(c, state_name.as_deref())?)?;
    Ok(())
}

/// `u64` LE dimension, then row-major interleaved `f64` LE re/im.
pub fn write_density_file(rho: &ComplexMatrix, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(8 + 16 * rho.as_slice().len());
    buf.extend_from_slice(&(rho.dim() as u64).to_le_bytes());
    for z in rho.as_slice() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_density_file(path: &Path) -> Result<ComplexMatrix> {
    let bytes = fs::read(path)?;
    if bytes.len() < 8 {
        return Err(parse_err(None, "density file shorter than its header"));
    }
    let dim = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes")) as usize;
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    check_capacity(dim.saturating_mul(dim))?;
    let body = &bytes[8..];
    if body.len() != dim * dim * 16 {
        return Err(parse_err(
            None,
            format!("density file body has {} bytes, expected {}", body.len(), dim * dim * 16),
        ));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    ComplexMatrix::from_vec(dim, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{random_qac, RandomQacSpec};

    const CZ2: &str = r#"{
  "q": 2,
  "target": 1,
  "layers": [
    {"type": "multi", "cz": [[0, 1]]}
  ]
}"#;

    #[test]
    fn parses_minimal_file() {
        let c = circuit_from_json(CZ2, None).unwrap();
        assert_eq!(c.depth(), 1);
        assert_eq!(c.target(), 1);
        assert_eq!(c.num_aux(), 0);
    }

    #[test]
    fn errors_are_line_anchored() {
        let text = r#"{
  "q": 3,
  "layers": [
    {"type": "multi", "cz": [[0, 1]]},
    {"type": "multi", "cz": [[0, 1], [1, 2]]}
  ]
}"#;
        match circuit_from_json(text, None) {
            Err(Error::Parse { line: Some(5), msg }) => assert!(msg.contains("overlap")),
            other => panic!("unexpected {other:?}"),
        }
        let bad_unitary = r#"{
  "q": 1,
  "layers": [
    {"type": "single", "gates": [{"q": 0, "u": [[[1,0],[1,0]],[[0,0],[1,0]]]}]}
  ]
}"#;
        assert!(matches!(
            circuit_from_json(bad_unitary, None),
            Err(Error::Parse { line: Some(4), .. })
        ));
        assert!(matches!(
            circuit_from_json("{\n \"q\": 2,\n \"layers\": [\n oops", None),
            Err(Error::Parse { line: Some(4), .. })
        ));
    }

    #[test]
    fn round_trip_random_circuit() {
        let mut c = random_qac(&RandomQacSpec::new(4, 2, vec![2, 3]), 3).unwrap();
        c.set_aux(AuxState::Dirty(1));
        let text = circuit_to_json(&c, None).unwrap();
        let back = circuit_from_json(&text, None).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn arbitrary_aux_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rho = ComplexMatrix::diag_real(&[0.75, 0.25]).unwrap();
        let mut c = QacCircuit::new(2).with_aux(AuxState::Arbitrary(rho.clone()));
        c.cz(vec![0, 1]);
        let path = dir.path().join("c.json");
        write_circuit(&c, &path).unwrap();
        let back = read_circuit(&path).unwrap();
        assert_eq!(back, c);
        assert_eq!(read_density_file(&dir.path().join("c.aux.bin")).unwrap(), rho);
    }
}
