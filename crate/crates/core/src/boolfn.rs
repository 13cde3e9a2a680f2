//! Boolean functions `f: {0,1}^n → {0,1}` and their ±1 Fourier spectra.
//!
//! Inputs are read with `x_1` as the most significant bit of the index,
//! matching qubit 0 of the channel's input register.

use std::fmt;
use std::str::FromStr;

use crate::channel::{apply_channel_linear, ChoiRep};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn new(n: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != 1usize << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: bits.len(),
            });
        }
        Ok(Self { n, bits })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Self {
        Self {
            n,
            bits: (0..1usize << n).map(f).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize) -> bool {
        self.bits[x]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn negate(&self) -> Self {
        Self {
            n: self.n,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// `n=<n>:<hex>`, bits packed most significant first with `x = 0` leading.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 0x80 >> (i % 8);
            }
        }
        let mut digits = hex::encode(bytes);
        digits.truncate(self.bits.len().div_ceil(4));
        format!("n={}:{}", self.n, digits)
    }

    /// Inverse of [`TruthTable::to_hex`]. Without the `n=` prefix the table
    /// length is four bits per hex digit and must be a power of two.
    pub fn from_hex(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |msg: String| Error::Parse { line: None, msg };
        let (n, digits) = match text.strip_prefix("n=") {
            Some(rest) => {
                let (n, digits) = rest
                    .split_once(':')
                    .ok_or_else(|| bad("expected n=<int>:<hex>".into()))?;
                let n: usize = n.trim().parse().map_err(|_| bad(format!("bad n {n:?}")))?;
                (Some(n), digits.trim())
            }
            None => (None, text),
        };
        let digits = digits.trim_start_matches("0x");
        let len = digits.len() * 4;
        let n = match n {
            Some(n) => n,
            None if len.is_power_of_two() => len.trailing_zeros() as usize,
            None => return Err(bad(format!("{len} bits is not a power of two; add an n= prefix"))),
        };
        if n > 30 {
            return Err(bad(format!("n = {n} is too large")));
        }
        let needed = (1usize << n).div_ceil(4);
        if digits.len() != needed {
            return Err(bad(format!("expected {needed} hex digits for n = {n}, got {}", digits.len())));
        }
        let mut padded = digits.to_string();
        if padded.len() % 2 == 1 {
            padded.push('0');
        }
        let bytes = hex::decode(&padded).map_err(|e| bad(e.to_string()))?;
        let bits = (0..1usize << n).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect();
        Ok(Self { n, bits })
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for TruthTable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_hex(s)
    }
}

/// `parity` or `majority` (`1{Σx ≥ n/2}`).
pub fn named_function(name: &str, n: usize) -> Result<TruthTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    match name {
        "parity" => Ok(TruthTable::from_fn(n, |x| x.count_ones() % 2 == 1)),
        "majority" => Ok(TruthTable::from_fn(n, |x| 2 * x.count_ones() as usize >= n)),
        other => Err(Error::InvalidArgument(format!("unknown function {other:?}"))),
    }
}

/// `f̂(S)` indexed by subset mask `S`, using the same bit order as inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    pub n: usize,
    pub coeffs: Vec<f64>,
}

impl FourierSpectrum {
    pub fn get(&self, subset: usize) -> f64 {
        self.coeffs[subset]
    }
}

/// Fast Walsh–Hadamard transform of `(−1)^{f(x)}`, normalised by `2^n`.
pub fn wht_fourier(f: &TruthTable) -> FourierSpectrum {
    let mut v: Vec<f64> = f.bits.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect();
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / v.len() as f64;
    v.iter_mut().for_each(|c| *c *= scale);
    FourierSpectrum { n: f.n, coeffs: v }
}

/// `Σ_{|S|>k} f̂(S)²`.
pub fn fourier_weight_above(spec: &FourierSpectrum, k: usize) -> f64 {
    spec.coeffs
        .iter()
        .enumerate()
        .filter(|(s, _)| s.count_ones() as usize > k)
        .map(|(_, c)| c * c)
        .sum()
}

fn check_shape(phi: &ChoiRep, f: &TruthTable) -> Result<()> {
    if phi.n_in() != f.n || phi.n_out() != 1 {
        return Err(Error::InvalidChannel(format!(
            "channel shape ({}, {}) does not match a function of {} bits",
            phi.n_in(),
            phi.n_out(),
            f.n
        )));
    }
    Ok(())
}

/// `2^{−n} Σ_x ⟨f(x)|E(|x⟩⟨x|)|f(x)⟩`, read off the diagonal of `Φ`.
pub fn agreement_probability(phi: &ChoiRep, f: &TruthTable) -> Result<f64> {
    check_shape(phi, f)?;
    let m = phi.matrix();
    let total: f64 = (0..1usize << f.n)
        .map(|x| {
            let i = (x << 1) | usize::from(f.get(x));
            m.get(i, i).re
        })
        .sum();
    Ok(total / (1u64 << f.n) as f64)
}

/// `w_x = Pr[outcome ≠ f(x)]` per input, computed by applying the channel to `|x⟩⟨x|`.
pub fn error_probabilities(phi: &ChoiRep, f: &TruthTable) -> Result<Vec<f64>> {
    check_shape(phi, f)?;
    let din = 1usize << f.n;
    (0..din)
        .map(|x| {
            let mut rho = ComplexMatrix::zeros(din);
            rho[(x, x)] = ONE;
            let out = apply_channel_linear(phi, &rho)?;
            let wrong = usize::from(!f.get(x));
            Ok(out.get(wrong, wrong).re)
        })
        .collect()
}

/// `p(x) = Pr[outcome 1 | input x]`, clipped to `[0, 1]`.
pub fn output_one_probabilities(phi: &ChoiRep) -> Result<Vec<f64>> {
    if phi.n_out() != 1 {
        return Err(Error::Unsupported("probabilistic function needs one output qubit".into()));
    }
    let m = phi.matrix();
    Ok((0..1usize << phi.n_in())
        .map(|x| {
            let i = (x << 1) | 1;
            m.get(i, i).re.clamp(0.0, 1.0)
        })
        .collect())
}

/// `Pr_x[g(x) ≠ f(x)]` for the randomised function `g` with `Pr[g(x) = 1] = p(x)`.
pub fn disagreement_with(p: &[f64], f: &TruthTable) -> f64 {
    let total: f64 = p
        .iter()
        .enumerate()
        .map(|(x, &px)| if f.get(x) { 1.0 - px } else { px })
        .sum();
    total / p.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{choi_of_boolfn, choi_of_replacement};

    fn brute_fourier(f: &TruthTable, s: usize) -> f64 {
        let n = 1usize << f.n();
        (0..n)
            .map(|x| {
                let sign = if f.get(x) { -1.0 } else { 1.0 };
                let chi = if (x & s).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sign * chi
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn named_functions() {
        assert_eq!(
            named_function("parity", 2).unwrap().bits(),
            &[false, true, true, false]
        );
        let maj3 = named_function("majority", 3).unwrap();
        for x in 0..8usize {
            assert_eq!(maj3.get(x), x.count_ones() >= 2);
        }
        assert!(named_function("majority", 4).unwrap().get(0b0101));
        assert!(named_function("xor", 2).is_err());
    }

    #[test]
    fn fourier_examples() {
        let zero = TruthTable::from_fn(3, |_| false);
        let s = wht_fourier(&zero);
        assert_eq!(s.get(0), 1.0);
        assert!(s.coeffs[1..].iter().all(|&c| c == 0.0));

        let par = wht_fourier(&named_function("parity", 4).unwrap());
        assert!((par.get(0b1111) - 1.0).abs() < 1e-15);
        assert!((fourier_weight_above(&par, 3) - 1.0).abs() < 1e-15);

        let maj = named_function("majority", 3).unwrap();
        let ms = wht_fourier(&maj);
        for s in [0b001, 0b010, 0b100] {
            assert!((ms.get(s) - 0.5).abs() < 1e-15);
        }
        assert!((ms.get(0b111) + 0.5).abs() < 1e-15);
        assert!((fourier_weight_above(&ms, 2) - 0.25).abs() < 1e-15);
        assert_eq!(fourier_weight_above(&ms, 3), 0.0);
        for s in 0..8 {
            assert!((ms.get(s) - brute_fourier(&maj, s)).abs() < 1e-15);
        }
        let total: f64 = ms.coeffs.iter().map(|c| c * c).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hex_round_trip() {
        let maj = named_function("majority", 3).unwrap();
        assert_eq!(maj.to_hex(), "n=3:17");
        assert_eq!(TruthTable::from_hex("n=3:17").unwrap(), maj);
        assert_eq!(TruthTable::from_hex("17").unwrap(), maj);
        let par1 = named_function("parity", 1).unwrap();
        assert_eq!(par1.to_hex(), "n=1:4");
        assert_eq!(TruthTable::from_hex(&par1.to_hex()).unwrap(), par1);
        let big = TruthTable::from_fn(5, |x| x % 3 == 0);
        assert_eq!(big.to_hex().parse::<TruthTable>().unwrap(), big);
        assert!(TruthTable::from_hex("123").is_err());
        assert!(TruthTable::from_hex("n=3:1").is_err());
    }

    #[test]
    fn agreement_examples() {
        let f = named_function("majority", 3).unwrap();
        let phi = choi_of_boolfn(&f);
        assert!((agreement_probability(&phi, &f).unwrap() - 1.0).abs() < 1e-15);
        assert!(agreement_probability(&choi_of_boolfn(&f.negate()), &f).unwrap().abs() < 1e-15);
        let mix = choi_of_replacement(3, &ComplexMatrix::identity(2).scale(0.5)).unwrap();
        assert!((agreement_probability(&mix, &f).unwrap() - 0.5).abs() < 1e-15);
        let w = error_probabilities(&mix, &f).unwrap();
        assert!(w.iter().all(|&wx| (wx - 0.5).abs() < 1e-15));
        let p = output_one_probabilities(&phi).unwrap();
        assert_eq!(disagreement_with(&p, &f), 0.0);
        assert!(agreement_probability(&phi, &named_function("parity", 2).unwrap()).is_err());
    }
}
