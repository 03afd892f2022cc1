//! Sweep results and their CSV serialization.
//!
//! The CSV layout is part of the tool's contract: a header row, then one row
//! per SNR point with columns `snr_db`, `bits`, per-terminal `ber`/`ci`
//! pairs (legitimate receiver, unshuffled reference arm, each eavesdropper
//! profile), and the closed-form overlays `theory_eq7` (combined BER) and
//! `theory_eq14` (its high-SNR approximation). Numbers are printed in
//! scientific notation with six significant digits, rows end in `\n`, and an
//! empty sweep yields just the header — so equal results serialize to equal
//! bytes.

use std::io::{self, Write};

/// Error events over counted bits for one terminal at one sweep point.
/// Padding bits never enter these counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerminalStat {
    pub errors: u64,
    pub bits: u64,
}

impl TerminalStat {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    /// Half-width of the 95% normal-approximation binomial confidence
    /// interval on [`Self::ber`].
    pub fn ci_half_width(&self) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        let p = self.ber();
        1.96 * (p * (1.0 - p) / self.bits as f64).sqrt()
    }
}

/// Everything measured and overlaid at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub snr_db: f64,
    pub frames: u64,
    /// Target user, shuffled arm, common + private sections combined.
    pub legit: TerminalStat,
    pub legit_common: TerminalStat,
    pub legit_private: TerminalStat,
    /// Target user, unshuffled reference arm, combined sections.
    pub baseline: TerminalStat,
    /// One entry per eavesdropper profile, scored on the target's common
    /// section.
    pub eves: Vec<TerminalStat>,
    /// Frames where the receiver rebuilt a wrong de-shuffling pattern.
    pub pattern_misses: u64,
    /// Frames where the pattern was right yet the shuffled arm's common
    /// error count differed from the reference arm's. Expected to be zero
    /// under shared sign-relative noise.
    pub neutrality_breaches: u64,
    /// Closed-form combined BER at this SNR.
    pub theory_total: f64,
    /// Closed-form high-SNR approximation at this SNR.
    pub theory_high_snr: f64,
}

/// A complete sweep: per-point statistics plus the eavesdropper column
/// labels (in config order).
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub eve_labels: Vec<String>,
    pub points: Vec<PointStats>,
}

/// Six-significant-digit scientific notation, e.g. `3.87211e-6`. Stable
/// across platforms: plain `f64` formatting with a fixed mantissa width.
pub fn sig6(value: f64) -> String {
    format!("{value:.5e}")
}

/// Writes the curve as CSV. See the module docs for the column contract.
pub fn emit_csv<W: Write>(curve: &BerCurve, out: &mut W) -> io::Result<()> {
    write!(
        out,
        "snr_db,bits,legit_ber,legit_ci,baseline_ber,baseline_ci"
    )?;
    for label in &curve.eve_labels {
        write!(out, ",{label}_ber,{label}_ci")?;
    }
    writeln!(out, ",theory_eq7,theory_eq14")?;
    for p in &curve.points {
        write!(
            out,
            "{},{},{},{},{},{}",
            sig6(p.snr_db),
            p.legit.bits,
            sig6(p.legit.ber()),
            sig6(p.legit.ci_half_width()),
            sig6(p.baseline.ber()),
            sig6(p.baseline.ci_half_width()),
        )?;
        for eve in &p.eves {
            write!(out, ",{},{}", sig6(eve.ber()), sig6(eve.ci_half_width()))?;
        }
        writeln!(out, ",{},{}", sig6(p.theory_total), sig6(p.theory_high_snr))?;
    }
    Ok(())
}

/// [`emit_csv`] into an owned string (CSV is valid UTF-8 by construction).
pub fn emit_csv_string(curve: &BerCurve) -> String {
    let mut buf = Vec::new();
    emit_csv(curve, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Writes a closed-form-only sweep: `snr_db`, section BERs, the combined
/// form, and its high-SNR approximation.
pub fn emit_theory_csv<W: Write>(
    points: &[crate::harness::engine::TheoryPoint],
    out: &mut W,
) -> io::Result<()> {
    writeln!(out, "snr_db,ber_private,ber_common,theory_eq7,theory_eq14")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            sig6(p.snr_db),
            sig6(p.ber_private),
            sig6(p.ber_common),
            sig6(p.ber_total),
            sig6(p.ber_total_high_snr),
        )?;
    }
    Ok(())
}
