//! End-to-end per-frame chains: the secure transmitter (split → interleave →
//! modulate → precode), the legitimate receiver (common demodulation → SIC →
//! private demodulation → pattern rebuild → de-interleave → scoring), and
//! eavesdropper variants with partial pattern knowledge.
//!
//! Ground truth rides alongside every frame in [`TxFrame`] so receivers can
//! be scored, but the legitimate decode path consumes only what a real
//! receiver would know: plan dimensions, the constellation, and its own
//! effective scalar gains. Ground truth enters the decode only in genie SIC
//! mode (perfect cancellation) — everywhere else it is scoring-only.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::airlink::{PrecodedFrame, Precoders};
use crate::bitframe::{BitFramePlan, FrameBits, PlanError};
use crate::interleaver::{InterleaverError, InterleavingPattern};
use crate::modem::{demodulate, modulate, pad_to_symbol_multiple, ModemError, ModulationSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("expected {expected} users' bit-vectors, got {got}")]
    UserCount { expected: usize, got: usize },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error(transparent)]
    Interleave(#[from] InterleaverError),
    #[error(transparent)]
    Air(#[from] crate::airlink::AirlinkError),
    #[error("knowledge fraction must lie in [0, 1], got {0}")]
    KnowledgeFraction(f64),
    #[error("observation carries {got} samples, expected at least {expected}")]
    ObservationLength { expected: usize, got: usize },
}

/// How the receiver cancels the common stream before private decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SicMode {
    /// Re-modulate the common-stream decisions and subtract them. Decision
    /// errors propagate into the private stream — the realistic default.
    #[default]
    Hard,
    /// Subtract the true transmitted common contribution, isolating
    /// interleaver behavior from cancellation error propagation.
    Genie,
}

/// Eavesdropper placement: a subscribed terminal that decodes the common
/// stream as part of normal operation, or an outside terminal with its own
/// channel. Both lack the target's private stream; they differ only in
/// which channel carries their observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveKind {
    Internal,
    External,
}

/// An eavesdropper's capability: placement plus the fraction κ of the
/// de-interleaving pattern it somehow knows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveProfile {
    pub kind: EveKind,
    pub zeta_knowledge: f64,
}

impl EveProfile {
    pub fn new(kind: EveKind, zeta_knowledge: f64) -> Result<Self, ChainError> {
        if !(0.0..=1.0).contains(&zeta_knowledge) {
            return Err(ChainError::KnowledgeFraction(zeta_knowledge));
        }
        Ok(Self {
            kind,
            zeta_knowledge,
        })
    }
}

/// Per-user transmit-side record: the original sections, the pattern the
/// frame was shuffled with, and the shuffled common section actually sent.
#[derive(Debug, Clone)]
pub struct UserTxRecord {
    pub bits: FrameBits,
    pub pattern: InterleavingPattern,
    pub interleaved_common: Vec<bool>,
}

/// One transmitted frame with full ground truth: per-user records, the
/// aggregate common stream (all users' interleaved sections concatenated,
/// in user order), and the modulated symbol streams with their pad counts.
/// Padding bits are carried for symbol alignment and excluded from scoring.
#[derive(Debug, Clone)]
pub struct TxFrame {
    pub plan: BitFramePlan,
    pub modulation: ModulationSpec,
    pub secure: bool,
    pub users: Vec<UserTxRecord>,
    pub aggregate_common_bits: Vec<bool>,
    pub common_pad: usize,
    pub common_symbols: Vec<Complex64>,
    pub private_pads: Vec<usize>,
    pub private_symbols: Vec<Vec<Complex64>>,
}

impl TxFrame {
    /// Bit range of user `k`'s section inside the aggregate common stream.
    fn common_slice(&self, k: usize) -> std::ops::Range<usize> {
        let b = self.plan.common_len();
        k * b..(k + 1) * b
    }
}

/// Builds one frame for transmission. Each user's frame bits are split per
/// the plan; under `secure` the common section is shuffled with the pattern
/// generated from that user's own private indexing bits (identity
/// otherwise). All users' (shuffled) common sections are concatenated into
/// one common stream, padded to a symbol boundary, and modulated; private
/// sections are modulated per user.
pub fn tx_frame(
    user_bits: &[Vec<bool>],
    plan: &BitFramePlan,
    secure: bool,
    modulation: &ModulationSpec,
) -> Result<TxFrame, ChainError> {
    if user_bits.is_empty() {
        return Err(ChainError::UserCount {
            expected: 1,
            got: 0,
        });
    }
    let mut users = Vec::with_capacity(user_bits.len());
    let mut aggregate_common_bits = Vec::with_capacity(user_bits.len() * plan.common_len());
    for bits in user_bits {
        let frame = FrameBits::split(plan, bits)?;
        let pattern = if secure {
            InterleavingPattern::for_frame(plan, &frame.private_bits)?
        } else {
            InterleavingPattern::identity(plan.common_len())
        };
        let interleaved_common = pattern.apply(&frame.common_bits)?;
        aggregate_common_bits.extend_from_slice(&interleaved_common);
        users.push(UserTxRecord {
            bits: frame,
            pattern,
            interleaved_common,
        });
    }
    let (padded_common, common_pad) = pad_to_symbol_multiple(&aggregate_common_bits, modulation);
    let common_symbols = modulate(&padded_common, modulation)?;
    let mut private_pads = Vec::with_capacity(users.len());
    let mut private_symbols = Vec::with_capacity(users.len());
    for user in &users {
        let (padded, pad) = pad_to_symbol_multiple(&user.bits.private_bits, modulation);
        private_pads.push(pad);
        private_symbols.push(modulate(&padded, modulation)?);
    }
    Ok(TxFrame {
        plan: plan.clone(),
        modulation: *modulation,
        secure,
        users,
        aggregate_common_bits,
        common_pad,
        common_symbols,
        private_pads,
        private_symbols,
    })
}

/// Wraps a frame's symbol streams with precoders for superposed
/// transmission.
pub fn precode_tx(tx: &TxFrame, precoders: Precoders) -> Result<PrecodedFrame, ChainError> {
    Ok(PrecodedFrame::new(
        tx.common_symbols.clone(),
        tx.private_symbols.clone(),
        precoders,
    )?)
}

/// What one terminal captured for one frame.
#[derive(Debug, Clone)]
pub enum FrameObservation {
    /// Analysis regime: the common stream and the terminal's private stream
    /// arrive as separate unit-gain sequences (noise already applied).
    TimeMultiplexed {
        common: Vec<Complex64>,
        private: Vec<Complex64>,
    },
    /// Superposed regime: one sample sequence carrying common + private
    /// through the terminal's channel, plus the effective scalar gains the
    /// receiver knows (`hᴴp_c`, `hᴴp_k`).
    Superposed {
        samples: Vec<Complex64>,
        common_gain: Complex64,
        private_gain: Complex64,
    },
}

/// Outcome of decoding one frame at one terminal, scored against ground
/// truth. `errors_indexing` counts wrong decisions among the consumed
/// indexing bits whose swap stage is enabled by the plan's selection mask —
/// exactly the bits that can corrupt the pattern — so `pattern_match`
/// implies `errors_indexing == 0` structurally.
#[derive(Debug, Clone)]
pub struct ReceiverReport {
    pub decoded_common_bits: Vec<bool>,
    pub decoded_private_bits: Vec<bool>,
    pub errors_common: usize,
    pub errors_private: usize,
    pub errors_indexing: usize,
    pub pattern_match: bool,
    pub sic_residual_power: f64,
}

fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b.iter()).filter(|(x, y)| x != y).count()
}

/// Demodulates the aggregate common stream from a terminal's observation
/// and returns the unpadded aggregate common bit decisions.
fn decode_aggregate_common(obs: &FrameObservation, tx: &TxFrame) -> Result<Vec<bool>, ChainError> {
    let n_common_symbols = tx.common_symbols.len();
    let raw = match obs {
        FrameObservation::TimeMultiplexed { common, .. } => {
            if common.len() < n_common_symbols {
                return Err(ChainError::ObservationLength {
                    expected: n_common_symbols,
                    got: common.len(),
                });
            }
            demodulate(&common[..n_common_symbols], &tx.modulation)
        }
        FrameObservation::Superposed {
            samples,
            common_gain,
            ..
        } => {
            if samples.len() < n_common_symbols {
                return Err(ChainError::ObservationLength {
                    expected: n_common_symbols,
                    got: samples.len(),
                });
            }
            let equalized: Vec<Complex64> = samples[..n_common_symbols]
                .iter()
                .map(|y| y / common_gain)
                .collect();
            demodulate(&equalized, &tx.modulation)
        }
    };
    let keep = tx.aggregate_common_bits.len();
    Ok(raw[..keep].to_vec())
}

/// Decodes the legitimate user `k`'s frame: common decisions first, SIC,
/// private decisions, pattern regeneration from the decoded indexing bits,
/// de-interleaving, then scoring against the frame's ground truth.
pub fn rx_legit(
    obs: &FrameObservation,
    k: usize,
    tx: &TxFrame,
    sic: SicMode,
) -> Result<ReceiverReport, ChainError> {
    let plan = &tx.plan;
    let aggregate_decisions = decode_aggregate_common(obs, tx)?;
    let interleaved_decisions = aggregate_decisions[tx.common_slice(k)].to_vec();

    // Private stream: direct demodulation in the time-multiplexed regime;
    // SIC then demodulation in the superposed regime.
    let mut sic_residual_power = 0.0;
    let private_raw: Vec<bool> = match obs {
        FrameObservation::TimeMultiplexed { private, .. } => {
            let need = tx.private_symbols[k].len();
            if private.len() < need {
                return Err(ChainError::ObservationLength {
                    expected: need,
                    got: private.len(),
                });
            }
            demodulate(&private[..need], &tx.modulation)
        }
        FrameObservation::Superposed {
            samples,
            common_gain,
            private_gain,
        } => {
            let n_common = tx.common_symbols.len();
            let need = tx.private_symbols[k].len();
            if samples.len() < need {
                return Err(ChainError::ObservationLength {
                    expected: need,
                    got: samples.len(),
                });
            }
            // Cancel the common stream over the instants it occupies.
            let cancel: Vec<Complex64> = match sic {
                SicMode::Hard => {
                    let padded: Vec<bool> = {
                        let mut p = aggregate_decisions.clone();
                        p.extend(std::iter::repeat_n(false, tx.common_pad));
                        p
                    };
                    modulate(&padded, &tx.modulation)?
                }
                SicMode::Genie => tx.common_symbols.clone(),
            };
            let mut residual_acc = 0.0;
            let cleaned: Vec<Complex64> = samples
                .iter()
                .enumerate()
                .map(|(t, y)| {
                    if t < n_common {
                        let est = common_gain * cancel[t];
                        let truth = common_gain * tx.common_symbols[t];
                        residual_acc += (est - truth).norm_sqr();
                        y - est
                    } else {
                        *y
                    }
                })
                .collect();
            sic_residual_power = if samples.is_empty() {
                0.0
            } else {
                residual_acc / samples.len() as f64
            };
            let equalized: Vec<Complex64> =
                cleaned[..need].iter().map(|y| y / private_gain).collect();
            demodulate(&equalized, &tx.modulation)
        }
    };
    let private_decisions = private_raw[..plan.private_section_len()].to_vec();

    // Rebuild the pattern from the decoded indexing bits and de-interleave.
    let rebuilt = if tx.secure {
        InterleavingPattern::for_frame(plan, &private_decisions)?
    } else {
        InterleavingPattern::identity(plan.common_len())
    };
    let decoded_common_bits = rebuilt.invert().apply(&interleaved_decisions)?;

    let truth = &tx.users[k];
    let errors_common = hamming(&decoded_common_bits, &truth.bits.common_bits);
    let errors_private = hamming(&private_decisions, &truth.bits.private_bits);
    let errors_indexing =
        active_indexing_errors(plan, &private_decisions, &truth.bits.private_bits);
    let pattern_match = rebuilt == truth.pattern;

    Ok(ReceiverReport {
        decoded_common_bits,
        decoded_private_bits: private_decisions,
        errors_common,
        errors_private,
        errors_indexing,
        pattern_match,
        sic_residual_power,
    })
}

/// Wrong decisions among consumed indexing bits whose stage the selection
/// mask enables — the only indexing bits able to alter the pattern.
fn active_indexing_errors(plan: &BitFramePlan, decided: &[bool], truth: &[bool]) -> usize {
    let consumed = plan.consumed_indexing_len();
    let mask = plan.selection_mask();
    (0..consumed)
        .filter(|&i| mask[i] && decided[i] != truth[i])
        .count()
}

/// Decodes the common stream at the eavesdropper and reassembles the target
/// user's section with partial pattern knowledge: the true source position
/// for `⌊κ·B⌋` uniformly drawn output positions, a fresh uniformly random
/// bijection over the rest. The eavesdropper has no private-stream decode
/// path — the private stream is spatially nulled at its position and it
/// lacks the split — so its report carries no private decisions.
pub fn rx_eve<R: Rng>(
    obs: &FrameObservation,
    target: usize,
    tx: &TxFrame,
    profile: &EveProfile,
    rng: &mut R,
) -> Result<ReceiverReport, ChainError> {
    if !(0.0..=1.0).contains(&profile.zeta_knowledge) {
        return Err(ChainError::KnowledgeFraction(profile.zeta_knowledge));
    }
    let aggregate_decisions = decode_aggregate_common(obs, tx)?;
    let interleaved_decisions = aggregate_decisions[tx.common_slice(target)].to_vec();

    let truth = &tx.users[target];
    let decoded_common_bits;
    let pattern_match;
    if tx.secure {
        let true_inverse = truth.pattern.invert();
        let guessed_source =
            guess_inverse_mapping(true_inverse.mapping(), profile.zeta_knowledge, rng);
        decoded_common_bits = guessed_source
            .iter()
            .map(|&src| interleaved_decisions[src])
            .collect::<Vec<bool>>();
        pattern_match = guessed_source == true_inverse.mapping();
    } else {
        // Nothing was shuffled; the eavesdropper reads the section directly.
        decoded_common_bits = interleaved_decisions;
        pattern_match = true;
    }

    let errors_common = hamming(&decoded_common_bits, &truth.bits.common_bits);
    Ok(ReceiverReport {
        decoded_common_bits,
        decoded_private_bits: Vec::new(),
        errors_common,
        errors_private: 0,
        errors_indexing: 0,
        pattern_match,
        sic_residual_power: 0.0,
    })
}

/// Builds the eavesdropper's guess at the de-interleaving map. `true_inverse`
/// maps output position → source position; the guess copies it at `⌊κ·B⌋`
/// uniformly chosen output positions and fills the remaining outputs with a
/// uniformly random bijection onto the unused source positions.
fn guess_inverse_mapping<R: Rng>(
    true_inverse: &[usize],
    knowledge: f64,
    rng: &mut R,
) -> Vec<usize> {
    let b = true_inverse.len();
    let known_count = ((knowledge * b as f64).floor() as usize).min(b);
    let mut outputs: Vec<usize> = (0..b).collect();
    outputs.shuffle(rng);
    let known: Vec<usize> = outputs[..known_count].to_vec();
    let mut guess = vec![usize::MAX; b];
    let mut used = vec![false; b];
    for &j in &known {
        guess[j] = true_inverse[j];
        used[true_inverse[j]] = true;
    }
    let mut free_sources: Vec<usize> = (0..b).filter(|&s| !used[s]).collect();
    free_sources.shuffle(rng);
    let mut next = free_sources.into_iter();
    for slot in guess.iter_mut() {
        if *slot == usize::MAX {
            *slot = next.next().expect("bijection covers all outputs");
        }
    }
    guess
}

/// When the shuffling pattern is renewed. Patterns are derived from each
/// frame's own private payload, so renewal is implicit and unconditional:
/// no pattern ever carries over to another frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternRefresh {
    EveryFrame,
}

/// The refresh policy as a function of the frame counter. Constant by
/// design; the function exists to pin the policy at a named seam.
pub fn refresh_policy(_frame_index: u64) -> PatternRefresh {
    PatternRefresh::EveryFrame
}
