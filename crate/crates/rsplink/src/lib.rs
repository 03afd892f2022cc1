//! Link-level simulator and analysis library for secure downlink RSMA with
//! data-dependent interleaving of the common stream.
//!
//! In rate-splitting multiple access (RSMA) every user's message is split into
//! a common part, jointly encoded into a stream each receiver can decode, and
//! a private part, individually precoded. Because the common stream is
//! decodable by everyone, its content leaks to any terminal that can run the
//! common demodulation stage. The scheme implemented here shuffles each user's
//! common bits with a permutation derived from that user's *own private bits*,
//! so only a receiver that has decoded the private stream can rebuild the
//! pattern and de-interleave; everyone else sees a per-frame shuffle of the
//! payload.
//!
//! The crate is organised as a pipeline plus an analysis side-car:
//!
//! * [`bitframe`] — per-user bit-partition plans (common/private/indexing
//!   sections, selection mask) and the derived counting quantities.
//! * [`interleaver`] — pattern generation from indexing bits, apply/invert,
//!   and exhaustive pattern-space oracles.
//! * [`modem`] — Gray-coded square-QAM mapping with unit average energy and
//!   hard-decision demapping (order 4 doubles as QPSK).
//! * [`airlink`] — multi-antenna downlink: precoders, superposed
//!   transmission, per-terminal reception, SINR accounting.
//! * [`terminals`] — end-to-end per-frame chains: secure transmitter,
//!   legitimate SIC receiver, and eavesdropper variants.
//! * [`theory`] — closed-form bit-error-probability curves for the scheme.
//! * [`harness`] — experiment configs, the deterministic Monte Carlo engine,
//!   and CSV reporting; the `rsplink` binary is a thin CLI over it.
//!
//! # Example
//!
//! ```
//! use rsplink::bitframe::BitFramePlan;
//! use rsplink::interleaver::InterleavingPattern;
//!
//! // A 4-bit common section with all three indexing bits set shifts the
//! // section cyclically by one.
//! let pattern = InterleavingPattern::generate(&[true, true, true], &[true, true, true]).unwrap();
//! assert_eq!(pattern.one_based(), vec![2, 3, 4, 1]);
//!
//! // Fraction of a user's frame that stays un-shuffled under the default plan.
//! let plan = BitFramePlan::new(100, 25, 50, 25, 25).unwrap();
//! assert!((plan.rho() - 0.75).abs() < 1e-12);
//! ```

pub mod airlink;
pub mod bitframe;
pub mod harness;
pub mod interleaver;
pub mod modem;
pub mod terminals;
pub mod theory;

pub use bitframe::{BitFramePlan, FrameBits};
pub use interleaver::InterleavingPattern;
pub use modem::ModulationSpec;
