//! Data-dependent interleaving patterns: generation from indexing bits,
//! apply/invert, and exhaustive pattern-space oracles.
//!
//! A pattern over a `B`-bit section is built from `B - 1` indexing bits by a
//! single left-to-right pass: stage `b` (1-based) swaps entries `b` and `b+1`
//! of the work array iff the stage is enabled by the selection mask *and* the
//! `b`-th indexing bit is one. Adjacent-swap stages give the construction a
//! Gray-code-like robustness: patterns generated from indexing strings one
//! bit apart differ by a single transposition, so one mis-decoded indexing
//! bit corrupts at most two de-interleaved positions.
//!
//! Patterns use *gather* semantics throughout: `output[i] = input[Q[i]]`.
//! Indices are stored zero-based internally; the debug serialization
//! ([`std::fmt::Display`] / [`std::str::FromStr`]) is the conventional
//! one-based listing.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bitframe::BitFramePlan;

/// Largest section length accepted by the exhaustive census (2^(B-1)
/// generator runs).
pub const CENSUS_MAX_COMMON_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterleaverError {
    #[error("indexing bits ({bits}) and mask ({mask}) must have equal length")]
    StageLengthMismatch { bits: usize, mask: usize },
    #[error("pattern length {pattern} does not match data length {data}")]
    LengthMismatch { pattern: usize, data: usize },
    #[error("census limited to common_len <= {max}, got {got}")]
    CensusTooLarge { got: usize, max: usize },
    #[error("pattern text is empty")]
    EmptyPattern,
    #[error("pattern entry {0:?} is not a positive integer")]
    BadEntry(String),
    #[error("entries are not a permutation of 1..={len}: {detail}")]
    NotAPermutation { len: usize, detail: String },
}

/// A permutation of a `B`-bit section, stored zero-based with gather
/// semantics (`output[i] = input[mapping[i]]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InterleavingPattern {
    mapping: Vec<usize>,
}

impl InterleavingPattern {
    /// The identity pattern over `len` entries (no shuffling).
    pub fn identity(len: usize) -> Self {
        Self {
            mapping: (0..len).collect(),
        }
    }

    /// Runs the generator: starting from the identity over
    /// `indexing_bits.len() + 1` entries, stage `b` swaps entries `b` and
    /// `b+1` iff `mask[b]` and `indexing_bits[b]` are both set. Stages are
    /// applied strictly left to right, so every indexing string yields one
    /// well-defined pattern.
    pub fn generate(indexing_bits: &[bool], mask: &[bool]) -> Result<Self, InterleaverError> {
        if indexing_bits.len() != mask.len() {
            return Err(InterleaverError::StageLengthMismatch {
                bits: indexing_bits.len(),
                mask: mask.len(),
            });
        }
        let mut mapping: Vec<usize> = (0..=indexing_bits.len()).collect();
        for b in 0..indexing_bits.len() {
            if mask[b] && indexing_bits[b] {
                mapping.swap(b, b + 1);
            }
        }
        Ok(Self { mapping })
    }

    /// Builds the pattern a frame transmits under: the drive bits are the
    /// first `min(L_i, B-1)` private bits, stages beyond the consumed length
    /// stay inactive, and the plan's selection mask gates every stage.
    /// Returns the empty pattern for a plan with no common section.
    pub fn for_frame(plan: &BitFramePlan, private_bits: &[bool]) -> Result<Self, InterleaverError> {
        let b = plan.common_len();
        if b == 0 {
            return Ok(Self::identity(0));
        }
        let consumed = plan.consumed_indexing_len();
        let mut drive = vec![false; b - 1];
        for (d, &bit) in drive.iter_mut().zip(private_bits.iter().take(consumed)) {
            *d = bit;
        }
        Self::generate(&drive, plan.selection_mask())
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    /// Zero-based gather map.
    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    /// One-based listing, the debug-dump convention.
    pub fn one_based(&self) -> Vec<usize> {
        self.mapping.iter().map(|&i| i + 1).collect()
    }

    /// Gathers `input` through the pattern: `output[i] = input[Q[i]]`.
    pub fn apply<T: Copy>(&self, input: &[T]) -> Result<Vec<T>, InterleaverError> {
        if input.len() != self.mapping.len() {
            return Err(InterleaverError::LengthMismatch {
                pattern: self.mapping.len(),
                data: input.len(),
            });
        }
        Ok(self.mapping.iter().map(|&i| input[i]).collect())
    }

    /// The inverse pattern: `apply(invert(Q), apply(Q, x)) == x`.
    pub fn invert(&self) -> Self {
        let mut inv = vec![0usize; self.mapping.len()];
        for (i, &v) in self.mapping.iter().enumerate() {
            inv[v] = i;
        }
        Self { mapping: inv }
    }

    /// The permutation `R` that carries this pattern's output onto `other`'s:
    /// `apply(R, apply(self, x)) == apply(other, x)` for all `x`.
    pub fn relative(&self, other: &Self) -> Result<Self, InterleaverError> {
        if self.len() != other.len() {
            return Err(InterleaverError::LengthMismatch {
                pattern: self.len(),
                data: other.len(),
            });
        }
        let inv = self.invert();
        Ok(Self {
            mapping: other.mapping.iter().map(|&v| inv.mapping[v]).collect(),
        })
    }

    /// Number of positions the pattern moves (non-fixed points).
    pub fn displaced(&self) -> usize {
        self.mapping
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i != v)
            .count()
    }
}

impl fmt::Display for InterleavingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in self.one_based() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for InterleavingPattern {
    type Err = InterleaverError;

    /// Parses the one-based listing (whitespace- or comma-separated).
    /// Rejects anything that is not a permutation of `1..=B`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens: Vec<&str> = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(InterleaverError::EmptyPattern);
        }
        let len = tokens.len();
        let mut mapping = Vec::with_capacity(len);
        for t in &tokens {
            let v: usize = t
                .parse()
                .map_err(|_| InterleaverError::BadEntry((*t).to_string()))?;
            if v == 0 || v > len {
                return Err(InterleaverError::NotAPermutation {
                    len,
                    detail: format!("entry {v} out of range"),
                });
            }
            mapping.push(v - 1);
        }
        let mut seen = vec![false; len];
        for &v in &mapping {
            if seen[v] {
                return Err(InterleaverError::NotAPermutation {
                    len,
                    detail: format!("entry {} repeated", v + 1),
                });
            }
            seen[v] = true;
        }
        Ok(Self { mapping })
    }
}

/// Classification of the relative permutation between two generated
/// patterns; see [`flip_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternDelta {
    Identity,
    Transposition,
    /// Anything larger; carries the number of displaced positions.
    Other(usize),
}

/// Generates patterns from both indexing strings (full mask) and classifies
/// the permutation between them. Strings one bit-flip apart are expected to
/// come out [`PatternDelta::Transposition`].
pub fn flip_distance(bits_a: &[bool], bits_b: &[bool]) -> Result<PatternDelta, InterleaverError> {
    if bits_a.len() != bits_b.len() {
        return Err(InterleaverError::StageLengthMismatch {
            bits: bits_a.len(),
            mask: bits_b.len(),
        });
    }
    let mask = vec![true; bits_a.len()];
    let qa = InterleavingPattern::generate(bits_a, &mask)?;
    let qb = InterleavingPattern::generate(bits_b, &mask)?;
    let rel = qa.relative(&qb)?;
    Ok(match rel.displaced() {
        0 => PatternDelta::Identity,
        2 => PatternDelta::Transposition,
        n => PatternDelta::Other(n),
    })
}

/// Exhaustive census: the number of distinct patterns the generator reaches
/// over all `2^(B-1)` indexing strings with every stage enabled. Limited to
/// small `B`; the enumeration is exact, not sampled.
pub fn census_patterns(common_len: usize) -> Result<usize, InterleaverError> {
    Ok(census_report(common_len)?.distinct)
}

/// Census plus the two counts it is compared against; see [`CensusReport`].
pub fn census_report(common_len: usize) -> Result<CensusReport, InterleaverError> {
    if !(1..=CENSUS_MAX_COMMON_LEN).contains(&common_len) {
        return Err(InterleaverError::CensusTooLarge {
            got: common_len,
            max: CENSUS_MAX_COMMON_LEN,
        });
    }
    let stages = common_len - 1;
    let mask = vec![true; stages];
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for word in 0u64..(1u64 << stages) {
        let bits: Vec<bool> = (0..stages).map(|i| (word >> i) & 1 == 1).collect();
        let q = InterleavingPattern::generate(&bits, &mask)?;
        seen.insert(q.mapping);
    }
    Ok(CensusReport {
        common_len,
        distinct: seen.len(),
        all_strings: 1usize << stages,
        stated_closed_form: if stages == 0 {
            1
        } else {
            1usize << (stages - 1)
        },
    })
}

/// Result of an exhaustive pattern census for one section length.
///
/// `distinct` is the measured truth; `all_strings` is `2^(B-1)`, the count of
/// driving strings (equal to `distinct` iff the generator is injective);
/// `stated_closed_form` is the `2^(L_i-1)` closed-form count credited to the
/// generator with `L_i = B-1`, reported for comparison rather than assumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensusReport {
    pub common_len: usize,
    pub distinct: usize,
    pub all_strings: usize,
    pub stated_closed_form: usize,
}

impl fmt::Display for CensusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "B={}: {} distinct patterns over {} indexing strings (2^(B-1) = {}, stated closed form = {})",
            self.common_len, self.distinct, self.all_strings, self.all_strings, self.stated_closed_form
        )
    }
}

/// Work measure of one generator run: the number of swap stages that fire,
/// i.e. positions where both the mask and the indexing bit are set. Over
/// uniform random indexing bits with a full mask this averages `(B-1)/2`.
pub fn swap_count(indexing_bits: &[bool], mask: &[bool]) -> usize {
    indexing_bits
        .iter()
        .zip(mask.iter())
        .filter(|&(&b, &m)| b && m)
        .count()
}
