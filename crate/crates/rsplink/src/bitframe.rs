//! Per-user bit-partition plans and their derived counting quantities.
//!
//! Every frame a user transmits is split into a *common* section of `B` bits
//! (shuffled, jointly encoded with the other users' common sections) and a
//! *private* section (never shuffled). The first `L` private bits form the
//! indexing section whose leading `L_i` bits drive the interleaver; the
//! remaining `D_u'` private bits are plain payload. A [`BitFramePlan`] pins
//! these counts plus the selection mask that decides which shuffle stages are
//! active, and answers the bookkeeping questions that follow from them: the
//! un-shuffled fraction `rho`, the reachable pattern count, and the size of
//! the search space a brute-force attacker faces.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

/// Violations reported by [`BitFramePlan`] validation, each naming the
/// relation that failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("total_bits {total} != common_len + private_len + non_indexed_len = {sum}")]
    InconsistentTotal { total: usize, sum: usize },
    #[error("indexing_len {indexing} exceeds private_len {private}")]
    IndexingExceedsPrivate { indexing: usize, private: usize },
    #[error("selection mask has length {actual}, expected common_len - 1 = {expected}")]
    MaskLength { expected: usize, actual: usize },
    #[error("common_len must be 0 or >= 2 (a single bit cannot be shuffled), got {common}")]
    CommonTooShort { common: usize },
    #[error("plan carries no private bits (private_len + non_indexed_len = 0)")]
    EmptyPrivate,
}

/// The validated bit partition of one user's frame.
///
/// Field names follow the simulator's vocabulary: `common_len` is the
/// shuffled section `B`, `private_len` the indexing-carrying section `L`,
/// `indexing_len` the number of pattern-driving bits `L_i`, and
/// `non_indexed_len` the private payload bits `D_u'` the interleaver never
/// touches. `total_bits` is the whole frame, `B + L + D_u'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitFramePlan {
    total_bits: usize,
    common_len: usize,
    private_len: usize,
    indexing_len: usize,
    non_indexed_len: usize,
    selection_mask: Vec<bool>,
    interleaved_subset: Option<usize>,
}

impl BitFramePlan {
    /// Builds a plan with the default all-ones selection mask (every shuffle
    /// stage active) and validates it.
    pub fn new(
        total_bits: usize,
        common_len: usize,
        private_len: usize,
        indexing_len: usize,
        non_indexed_len: usize,
    ) -> Result<Self, PlanError> {
        let mask = vec![true; common_len.saturating_sub(1)];
        Self::with_mask(
            total_bits,
            common_len,
            private_len,
            indexing_len,
            non_indexed_len,
            mask,
        )
    }

    /// Builds a plan with an explicit selection mask of length
    /// `common_len - 1`; stages where the mask is `false` never swap.
    pub fn with_mask(
        total_bits: usize,
        common_len: usize,
        private_len: usize,
        indexing_len: usize,
        non_indexed_len: usize,
        selection_mask: Vec<bool>,
    ) -> Result<Self, PlanError> {
        let plan = Self {
            total_bits,
            common_len,
            private_len,
            indexing_len,
            non_indexed_len,
            selection_mask,
            interleaved_subset: None,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Re-checks every plan invariant, returning the violated relation on
    /// failure. Constructors call this; it is public so deserialized or
    /// hand-assembled plans can be re-validated.
    pub fn validate(&self) -> Result<(), PlanError> {
        let sum = self.common_len + self.private_len + self.non_indexed_len;
        if self.total_bits != sum {
            return Err(PlanError::InconsistentTotal {
                total: self.total_bits,
                sum,
            });
        }
        if self.indexing_len > self.private_len {
            return Err(PlanError::IndexingExceedsPrivate {
                indexing: self.indexing_len,
                private: self.private_len,
            });
        }
        if self.common_len == 1 {
            return Err(PlanError::CommonTooShort {
                common: self.common_len,
            });
        }
        let expected = self.common_len.saturating_sub(1);
        if self.selection_mask.len() != expected {
            return Err(PlanError::MaskLength {
                expected,
                actual: self.selection_mask.len(),
            });
        }
        if self.private_len + self.non_indexed_len == 0 {
            return Err(PlanError::EmptyPrivate);
        }
        Ok(())
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    pub fn common_len(&self) -> usize {
        self.common_len
    }

    pub fn private_len(&self) -> usize {
        self.private_len
    }

    pub fn indexing_len(&self) -> usize {
        self.indexing_len
    }

    pub fn non_indexed_len(&self) -> usize {
        self.non_indexed_len
    }

    pub fn selection_mask(&self) -> &[bool] {
        &self.selection_mask
    }

    /// Number of indexing bits the generator actually consumes: a pattern
    /// over `B` entries has `B - 1` swap stages, so surplus indexing bits are
    /// carried but unused.
    pub fn consumed_indexing_len(&self) -> usize {
        self.indexing_len.min(self.common_len.saturating_sub(1))
    }

    /// Total private-section length `L + D_u'`.
    pub fn private_section_len(&self) -> usize {
        self.private_len + self.non_indexed_len
    }

    /// Records the informational "interleaved subset" size sometimes quoted
    /// alongside a plan. It never affects any computation here; every derived
    /// quantity comes from the four section lengths alone.
    pub fn with_interleaved_subset(mut self, subset: usize) -> Self {
        self.interleaved_subset = Some(subset);
        self
    }

    pub fn interleaved_subset(&self) -> Option<usize> {
        self.interleaved_subset
    }

    /// Fraction of the user's bits that stay un-shuffled:
    /// `(L + D_u') / (L + D_u' + B)`.
    pub fn rho(&self) -> f64 {
        let private = (self.private_len + self.non_indexed_len) as f64;
        private / (private + self.common_len as f64)
    }

    /// Count of distinct interleaving patterns the generator is credited
    /// with, alongside the hard upper bound. See [`SequenceCount`].
    pub fn sequence_count(&self) -> SequenceCount {
        let li = self.indexing_len;
        let bound = min_big(two_pow(li), factorial(self.common_len));
        let stated_raw = if li == 0 {
            BigUint::one()
        } else {
            two_pow(li - 1)
        };
        let stated = min_big(stated_raw, bound.clone());
        SequenceCount { stated, bound }
    }

    /// Size of the pattern space a brute-force attacker must search when the
    /// indexing bits are unknown: the falling factorial `B! / (B - L_i)!`
    /// (ordered placements of the `L_i`-driven stages). Only defined for
    /// `L_i <= B`; larger `L_i` saturates at `B!`.
    pub fn attack_search_space(&self) -> BigUint {
        let b = self.common_len;
        let li = self.indexing_len.min(b);
        falling_factorial(b, li)
    }

    /// `log2` of [`Self::attack_search_space`], for at-a-glance hardness
    /// comparisons where the integer itself is astronomically large.
    pub fn attack_search_space_log2(&self) -> f64 {
        big_log2(&self.attack_search_space())
    }
}

/// Reachable-pattern count report.
///
/// `stated` is the closed-form count credited to the generator
/// (`2^(L_i - 1)`, saturated at the bound); `bound` is the hard cap
/// `min(2^L_i, B!)` — there are only `2^L_i` driving strings and only `B!`
/// permutations. Exhaustive enumeration for small `B`
/// ([`crate::interleaver::census_patterns`]) finds `2^(B-1)` distinct
/// patterns when every stage is driven, i.e. double the stated count; both
/// numbers are reported so the discrepancy stays visible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceCount {
    pub stated: BigUint,
    pub bound: BigUint,
}

impl SequenceCount {
    pub fn stated_log2(&self) -> f64 {
        big_log2(&self.stated)
    }

    pub fn bound_log2(&self) -> f64 {
        big_log2(&self.bound)
    }
}

/// One user's frame content, split per a [`BitFramePlan`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameBits {
    /// The shuffle-eligible section, length `B`.
    pub common_bits: Vec<bool>,
    /// The private section, length `L + D_u'`; its first `L` bits carry the
    /// indexing section.
    pub private_bits: Vec<bool>,
}

impl FrameBits {
    /// Wraps pre-split sections, checking lengths against the plan.
    pub fn new(
        plan: &BitFramePlan,
        common_bits: Vec<bool>,
        private_bits: Vec<bool>,
    ) -> Result<Self, PlanError> {
        if common_bits.len() != plan.common_len() {
            return Err(PlanError::InconsistentTotal {
                total: common_bits.len(),
                sum: plan.common_len(),
            });
        }
        if private_bits.len() != plan.private_section_len() {
            return Err(PlanError::InconsistentTotal {
                total: private_bits.len(),
                sum: plan.private_section_len(),
            });
        }
        Ok(Self {
            common_bits,
            private_bits,
        })
    }

    /// Splits a flat `total_bits`-long frame: common section first, private
    /// section after.
    pub fn split(plan: &BitFramePlan, bits: &[bool]) -> Result<Self, PlanError> {
        if bits.len() != plan.total_bits() {
            return Err(PlanError::InconsistentTotal {
                total: bits.len(),
                sum: plan.total_bits(),
            });
        }
        let (common, private) = bits.split_at(plan.common_len());
        Ok(Self {
            common_bits: common.to_vec(),
            private_bits: private.to_vec(),
        })
    }

    /// The pattern-driving bits: the first `min(L_i, B-1)` private bits in
    /// transmission order.
    pub fn indexing_bits<'a>(&'a self, plan: &BitFramePlan) -> &'a [bool] {
        &self.private_bits[..plan.consumed_indexing_len()]
    }
}

// ─── big-integer helpers ───────────────────────────────────────────────────

fn two_pow(exp: usize) -> BigUint {
    BigUint::one() << exp
}

fn factorial(n: usize) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

fn falling_factorial(n: usize, k: usize) -> BigUint {
    ((n - k + 1)..=n).fold(BigUint::one(), |acc, j| acc * BigUint::from(j))
}

fn min_big(a: BigUint, b: BigUint) -> BigUint {
    if a <= b {
        a
    } else {
        b
    }
}

/// `log2` of an arbitrary-precision integer, exact to f64 precision: small
/// values convert directly, larger ones use the top 53 bits plus the shift.
fn big_log2(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        return n.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_f64().expect("53-bit top fits in f64");
    top.log2() + shift as f64
}
