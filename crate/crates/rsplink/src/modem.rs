//! Gray-coded square M-QAM bit↔symbol mapping with unit average symbol
//! energy and hard-decision demapping.
//!
//! QPSK is carried as Gray 4-QAM (two orthogonal BPSK axes), so every
//! square-QAM identity used by the closed-form error analysis applies
//! verbatim at `M = 4`. A symbol's first `v/2` bits select the in-phase
//! level and the last `v/2` bits the quadrature level, each through a
//! reflected Gray code; amplitudes are scaled so the constellation has
//! average energy exactly 1.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModemError {
    #[error("constellation order {0} is not a square power of two in 4..=256")]
    UnsupportedOrder(usize),
    #[error("bit count {bits} is not a multiple of {per_symbol} bits/symbol")]
    BitCountNotDivisible { bits: usize, per_symbol: usize },
}

/// A square Gray-mapped QAM constellation: order `M` and `v = log2(M)` bits
/// per symbol. `M = 4` doubles as QPSK.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModulationSpec {
    order: usize,
    bits_per_symbol: usize,
}

impl ModulationSpec {
    /// Supported square constellations.
    pub const SUPPORTED: [usize; 4] = [4, 16, 64, 256];

    pub fn new(order: usize) -> Result<Self, ModemError> {
        if !Self::SUPPORTED.contains(&order) {
            return Err(ModemError::UnsupportedOrder(order));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        Ok(Self {
            order,
            bits_per_symbol,
        })
    }

    pub fn qpsk() -> Self {
        Self::new(4).expect("4-QAM is always supported")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Amplitude levels per axis, `√M`.
    pub fn levels_per_axis(&self) -> usize {
        1 << (self.bits_per_symbol / 2)
    }

    /// Half the spacing between adjacent amplitude levels: `√(3 / (2(M−1)))`.
    /// This scaling gives the constellation unit average energy.
    pub fn axis_amplitude(&self) -> f64 {
        (3.0 / (2.0 * (self.order as f64 - 1.0))).sqrt()
    }

    /// Number of symbols `bits` maps to, before any padding.
    pub fn symbols_for(&self, bits: usize) -> usize {
        bits.div_ceil(self.bits_per_symbol)
    }
}

fn gray_encode(k: usize) -> usize {
    k ^ (k >> 1)
}

fn gray_decode(g: usize) -> usize {
    // Binary bit i is the XOR of all Gray bits at or above i.
    let mut k = 0usize;
    let mut cur = g;
    while cur != 0 {
        k ^= cur;
        cur >>= 1;
    }
    k
}

/// Maps the Gray label carried by `bits` (MSB first) to an amplitude level.
/// Level index `k` (0-based, from the positive end) sits at `(L−1−2k)·Δ`.
fn axis_level(bits: &[bool], spec: &ModulationSpec) -> f64 {
    let g = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    let k = gray_decode(g);
    let l = spec.levels_per_axis();
    (l as f64 - 1.0 - 2.0 * k as f64) * spec.axis_amplitude()
}

/// Hard decision on one axis: nearest level index, with exact-midpoint ties
/// broken toward the numerically lower Gray label for reproducible output.
fn axis_decide(y: f64, spec: &ModulationSpec) -> usize {
    let l = spec.levels_per_axis();
    let u = (l as f64 - 1.0 - y / spec.axis_amplitude()) / 2.0;
    if u <= 0.0 {
        return 0;
    }
    let hi = (l - 1) as f64;
    if u >= hi {
        return l - 1;
    }
    let k0 = u.floor() as usize;
    let k1 = (k0 + 1).min(l - 1);
    let d0 = u - k0 as f64;
    let d1 = k1 as f64 - u;
    if d0 < d1 {
        k0
    } else if d1 < d0 {
        k1
    } else if gray_encode(k0) <= gray_encode(k1) {
        k0
    } else {
        k1
    }
}

fn axis_bits(k: usize, spec: &ModulationSpec, out: &mut Vec<bool>) {
    let g = gray_encode(k);
    let width = spec.bits_per_symbol / 2;
    for shift in (0..width).rev() {
        out.push((g >> shift) & 1 == 1);
    }
}

/// Gray-maps `bits` onto complex symbols with `E[|s|²] = 1`. The bit count
/// must already be a multiple of `v`; see [`pad_to_symbol_multiple`].
pub fn modulate(bits: &[bool], spec: &ModulationSpec) -> Result<Vec<Complex64>, ModemError> {
    let v = spec.bits_per_symbol();
    if !bits.len().is_multiple_of(v) {
        return Err(ModemError::BitCountNotDivisible {
            bits: bits.len(),
            per_symbol: v,
        });
    }
    let half = v / 2;
    Ok(bits
        .chunks_exact(v)
        .map(|chunk| {
            Complex64::new(
                axis_level(&chunk[..half], spec),
                axis_level(&chunk[half..], spec),
            )
        })
        .collect())
}

/// Minimum-Euclidean-distance decision then Gray demap; exact inverse of
/// [`modulate`] in the noiseless case.
pub fn demodulate(symbols: &[Complex64], spec: &ModulationSpec) -> Vec<bool> {
    let mut bits = Vec::with_capacity(symbols.len() * spec.bits_per_symbol());
    for s in symbols {
        axis_bits(axis_decide(s.re, spec), spec, &mut bits);
        axis_bits(axis_decide(s.im, spec), spec, &mut bits);
    }
    bits
}

/// Appends zero bits until the count is a multiple of `v`; returns the
/// padded vector and how many bits were appended. Padding bits ride along
/// for symbol mapping but are excluded from error accounting by callers.
pub fn pad_to_symbol_multiple(bits: &[bool], spec: &ModulationSpec) -> (Vec<bool>, usize) {
    let v = spec.bits_per_symbol();
    let rem = bits.len() % v;
    let pad = if rem == 0 { 0 } else { v - rem };
    let mut padded = bits.to_vec();
    padded.extend(std::iter::repeat_n(false, pad));
    (padded, pad)
}

/// Enumerates the constellation as `(label bits, symbol)` pairs, label order
/// 0..M. Used by energy and adjacency checks and by exhaustive receivers.
pub fn constellation(spec: &ModulationSpec) -> Vec<(Vec<bool>, Complex64)> {
    let v = spec.bits_per_symbol();
    (0..spec.order())
        .map(|label| {
            let bits: Vec<bool> = (0..v)
                .rev()
                .map(|shift| (label >> shift) & 1 == 1)
                .collect();
            let symbol = modulate(&bits, spec).expect("label width is one symbol")[0];
            (bits, symbol)
        })
        .collect()
}
