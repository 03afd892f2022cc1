//! Experiment configuration: a flat `key = value` text format with
//! `[section]` headers and `#` comments, hand-parsed with line-precise
//! errors. The parser accepts untrusted input: every failure path is a
//! typed error, never a panic.

use thiserror::Error;

use crate::airlink::{NoiseCoupling, PrecoderStrategy};
use crate::bitframe::{BitFramePlan, PlanError};
use crate::modem::{ModemError, ModulationSpec};
use crate::terminals::{ChainError, EveKind, EveProfile, SicMode};
use crate::theory::PrivateBerNorm;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value` or `[section]`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown section {name:?}")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key {key:?} in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: key {key:?} given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {detail}")]
    BadValue {
        line: usize,
        key: String,
        detail: String,
    },
    #[error("missing required key {key} in section [{section}]")]
    MissingKey {
        section: &'static str,
        key: &'static str,
    },
    #[error("invalid frame plan: {0}")]
    Plan(#[from] PlanError),
    #[error("invalid modulation: {0}")]
    Modem(#[from] ModemError),
    #[error("invalid eavesdropper profile: {0}")]
    Eve(#[from] ChainError),
    #[error("sweep step must be positive, got {0}")]
    SweepStep(f64),
    #[error("sweep start {start} exceeds stop {stop}")]
    SweepRange { start: f64, stop: f64 },
    #[error("min_bits must be at least 10000, got {0}")]
    MinBits(u64),
    #[error("max_frames must be positive")]
    MaxFrames,
    #[error("power split must lie in [0, 1], got {0}")]
    PowerSplit(f64),
    #[error("{0} terminals need at least {0} antennas for zero-forcing, got {1}")]
    Antennas(usize, usize),
    #[error("users must be at least 1")]
    Users,
    #[error(
        "sign-relative noise coupling is only exact for order-4 constellations in analysis mode"
    )]
    CouplingNeedsTwoLevelAxes,
    #[error("value {0} is not finite")]
    NonFinite(f64),
}

/// Per-bit SNR sweep in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSweep {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SnrSweep {
    pub fn points(&self) -> Vec<f64> {
        let mut points = Vec::new();
        let mut idx = 0u64;
        loop {
            let v = self.start_db + self.step_db * idx as f64;
            if v > self.stop_db + 1e-9 {
                break;
            }
            points.push(v);
            idx += 1;
        }
        points
    }
}

/// When a sweep point stops simulating: always at least `min_bits` counted
/// bits, then until every tracked terminal has `target_errors` error events
/// or `max_frames` frames have run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialsPolicy {
    pub min_bits: u64,
    pub max_frames: u64,
    pub target_errors: u64,
}

/// A fully validated experiment description. Everything the engine does is
/// a pure function of this struct (including the seed — there is no
/// wall-clock fallback).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub plan: BitFramePlan,
    pub users: usize,
    pub antennas: usize,
    pub analysis_mode: bool,
    pub power_split: f64,
    pub precoding: PrecoderStrategy,
    pub modulation: ModulationSpec,
    pub sweep: SnrSweep,
    pub trials: TrialsPolicy,
    pub seed: u64,
    pub secure: bool,
    pub sic: SicMode,
    pub noise_coupling: NoiseCoupling,
    pub private_norm: PrivateBerNorm,
    pub eves: Vec<EveProfile>,
}

impl ExperimentConfig {
    /// The reference experiment: two users at 100 bits each (B=25, L=50,
    /// L_i=25, D_u′=25), QPSK, per-bit SNR swept −10..20 dB in 1 dB steps,
    /// analysis mode, eavesdroppers at κ ∈ {0, 0.5, 0.75}.
    pub fn reference() -> Self {
        Self {
            plan: BitFramePlan::new(100, 25, 50, 25, 25).expect("reference plan is valid"),
            users: 2,
            antennas: 4,
            analysis_mode: true,
            power_split: 0.5,
            precoding: PrecoderStrategy::ZeroForcingPrivate,
            modulation: ModulationSpec::qpsk(),
            sweep: SnrSweep {
                start_db: -10.0,
                stop_db: 20.0,
                step_db: 1.0,
            },
            trials: TrialsPolicy {
                min_bits: 1_000_000,
                max_frames: 200_000,
                target_errors: 100,
            },
            seed: 1,
            secure: true,
            sic: SicMode::Hard,
            noise_coupling: NoiseCoupling::SymbolRelative,
            private_norm: PrivateBerNorm::ByMessageLen,
            eves: vec![
                EveProfile {
                    kind: EveKind::External,
                    zeta_knowledge: 0.0,
                },
                EveProfile {
                    kind: EveKind::External,
                    zeta_knowledge: 0.5,
                },
                EveProfile {
                    kind: EveKind::External,
                    zeta_knowledge: 0.75,
                },
            ],
        }
    }

    /// Cross-field validation beyond what each component type enforces.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.plan.validate()?;
        if self.users == 0 {
            return Err(ConfigError::Users);
        }
        if !self.analysis_mode
            && self.precoding == PrecoderStrategy::ZeroForcingPrivate
            && self.antennas < self.users
        {
            return Err(ConfigError::Antennas(self.users, self.antennas));
        }
        for v in [
            self.power_split,
            self.sweep.start_db,
            self.sweep.stop_db,
            self.sweep.step_db,
        ] {
            if !v.is_finite() {
                return Err(ConfigError::NonFinite(v));
            }
        }
        if !(0.0..=1.0).contains(&self.power_split) {
            return Err(ConfigError::PowerSplit(self.power_split));
        }
        if self.sweep.step_db <= 0.0 {
            return Err(ConfigError::SweepStep(self.sweep.step_db));
        }
        if self.sweep.start_db > self.sweep.stop_db {
            return Err(ConfigError::SweepRange {
                start: self.sweep.start_db,
                stop: self.sweep.stop_db,
            });
        }
        if self.trials.min_bits < 10_000 {
            return Err(ConfigError::MinBits(self.trials.min_bits));
        }
        if self.trials.max_frames == 0 {
            return Err(ConfigError::MaxFrames);
        }
        if self.noise_coupling == NoiseCoupling::SymbolRelative
            && !(self.modulation.order() == 4 && self.analysis_mode)
        {
            return Err(ConfigError::CouplingNeedsTwoLevelAxes);
        }
        for eve in &self.eves {
            EveProfile::new(eve.kind, eve.zeta_knowledge)?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct RawConfig {
    entries: Vec<(String, String, String, usize)>, // (section, key, value, line)
}

impl RawConfig {
    fn take(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(s, k, _, _)| s == section && k == key)
            .map(|(_, _, v, _)| v.as_str())
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "plan",
        &[
            "common_len",
            "private_len",
            "indexing_len",
            "non_indexed_len",
            "selection_mask",
        ],
    ),
    (
        "topology",
        &[
            "users",
            "antennas",
            "analysis_mode",
            "power_split",
            "precoding",
        ],
    ),
    ("modem", &["order"]),
    ("sweep", &["start_db", "stop_db", "step_db"]),
    ("trials", &["min_bits", "max_frames", "target_errors"]),
    (
        "run",
        &["seed", "secure", "sic", "noise_coupling", "private_norm"],
    ),
    ("eves", &["profiles"]),
];

fn section_keys(section: &str) -> Option<&'static [&'static str]> {
    SECTIONS
        .iter()
        .find(|(name, _)| *name == section)
        .map(|(_, keys)| *keys)
}

/// Parses the flat text format into raw (section, key, value) entries,
/// rejecting unknown sections/keys, duplicates, and malformed lines.
fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    let mut raw = RawConfig::default();
    let mut section: Option<String> = None;
    for (idx, full_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match full_line.find('#') {
            Some(pos) => &full_line[..pos],
            None => full_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                text: line.to_string(),
            })?;
            let name = name.trim();
            if section_keys(name).is_none() {
                return Err(ConfigError::UnknownSection {
                    line: line_no,
                    name: name.to_string(),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            text: line.to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        let section_name = section.clone().ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            text: format!("key {key:?} before any [section]"),
        })?;
        let allowed = section_keys(&section_name).expect("section was validated");
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: line_no,
                section: section_name,
                key: key.to_string(),
            });
        }
        if raw.take(&section_name, key).is_some() {
            return Err(ConfigError::DuplicateKey {
                line: line_no,
                key: format!("{section_name}.{key}"),
            });
        }
        raw.entries
            .push((section_name, key.to_string(), value.to_string(), line_no));
    }
    Ok(raw)
}

fn entry_line(raw: &RawConfig, section: &str, key: &str) -> usize {
    raw.entries
        .iter()
        .find(|(s, k, _, _)| s == section && k == key)
        .map(|(_, _, _, l)| *l)
        .unwrap_or(0)
}

fn parse_num<T: std::str::FromStr>(
    raw: &RawConfig,
    section: &str,
    key: &str,
    value: &str,
) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        line: entry_line(raw, section, key),
        key: format!("{section}.{key}"),
        detail: format!("{value:?} is not a valid number"),
    })
}

fn parse_bool(raw: &RawConfig, section: &str, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError::BadValue {
            line: entry_line(raw, section, key),
            key: format!("{section}.{key}"),
            detail: format!("{value:?} is not `true` or `false`"),
        }),
    }
}

macro_rules! opt_field {
    ($raw:ident, $target:expr, $section:literal, $key:literal, num) => {
        if let Some(v) = $raw.take($section, $key) {
            $target = parse_num(&$raw, $section, $key, v)?;
        }
    };
    ($raw:ident, $target:expr, $section:literal, $key:literal, bool) => {
        if let Some(v) = $raw.take($section, $key) {
            $target = parse_bool(&$raw, $section, $key, v)?;
        }
    };
}

/// Parses and validates a complete configuration. Unspecified keys keep
/// their [`ExperimentConfig::reference`] defaults, except `run.seed`, which
/// must always be given explicitly.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw = parse_raw(text)?;
    let mut cfg = ExperimentConfig::reference();

    // Plan geometry.
    let mut common = cfg.plan.common_len();
    let mut private = cfg.plan.private_len();
    let mut indexing = cfg.plan.indexing_len();
    let mut non_indexed = cfg.plan.non_indexed_len();
    if let Some(v) = raw.take("plan", "common_len") {
        common = parse_num(&raw, "plan", "common_len", v)?;
    }
    if let Some(v) = raw.take("plan", "private_len") {
        private = parse_num(&raw, "plan", "private_len", v)?;
    }
    if let Some(v) = raw.take("plan", "indexing_len") {
        indexing = parse_num(&raw, "plan", "indexing_len", v)?;
    }
    if let Some(v) = raw.take("plan", "non_indexed_len") {
        non_indexed = parse_num(&raw, "plan", "non_indexed_len", v)?;
    }
    // Cap section lengths before any plan-sized allocation happens; frames
    // beyond this are outside anything the engine could simulate anyway.
    const MAX_SECTION_LEN: usize = 1_000_000;
    for (name, value) in [
        ("common_len", common),
        ("private_len", private),
        ("indexing_len", indexing),
        ("non_indexed_len", non_indexed),
    ] {
        if value > MAX_SECTION_LEN {
            return Err(ConfigError::BadValue {
                line: entry_line(&raw, "plan", name),
                key: format!("plan.{name}"),
                detail: format!("{value} exceeds the supported maximum {MAX_SECTION_LEN}"),
            });
        }
    }
    let total = common + private + non_indexed;
    cfg.plan = match raw.take("plan", "selection_mask") {
        None => BitFramePlan::new(total, common, private, indexing, non_indexed)?,
        Some("all") => BitFramePlan::new(total, common, private, indexing, non_indexed)?,
        Some(bits) => {
            let mask = parse_bit_string(bits).map_err(|detail| ConfigError::BadValue {
                line: entry_line(&raw, "plan", "selection_mask"),
                key: "plan.selection_mask".into(),
                detail,
            })?;
            BitFramePlan::with_mask(total, common, private, indexing, non_indexed, mask)?
        }
    };

    opt_field!(raw, cfg.users, "topology", "users", num);
    opt_field!(raw, cfg.antennas, "topology", "antennas", num);
    opt_field!(raw, cfg.analysis_mode, "topology", "analysis_mode", bool);
    opt_field!(raw, cfg.power_split, "topology", "power_split", num);
    if let Some(v) = raw.take("topology", "precoding") {
        cfg.precoding = match v {
            "zero-forcing" => PrecoderStrategy::ZeroForcingPrivate,
            "matched" => PrecoderStrategy::MatchedPrivate,
            _ => {
                return Err(ConfigError::BadValue {
                    line: entry_line(&raw, "topology", "precoding"),
                    key: "topology.precoding".into(),
                    detail: format!("{v:?} is not `zero-forcing` or `matched`"),
                })
            }
        };
    }
    if let Some(v) = raw.take("modem", "order") {
        let order: usize = parse_num(&raw, "modem", "order", v)?;
        cfg.modulation = ModulationSpec::new(order)?;
    }
    opt_field!(raw, cfg.sweep.start_db, "sweep", "start_db", num);
    opt_field!(raw, cfg.sweep.stop_db, "sweep", "stop_db", num);
    opt_field!(raw, cfg.sweep.step_db, "sweep", "step_db", num);
    opt_field!(raw, cfg.trials.min_bits, "trials", "min_bits", num);
    opt_field!(raw, cfg.trials.max_frames, "trials", "max_frames", num);
    opt_field!(
        raw,
        cfg.trials.target_errors,
        "trials",
        "target_errors",
        num
    );

    let seed_text = raw.take("run", "seed").ok_or(ConfigError::MissingKey {
        section: "run",
        key: "seed",
    })?;
    cfg.seed = parse_num(&raw, "run", "seed", seed_text)?;
    opt_field!(raw, cfg.secure, "run", "secure", bool);
    if let Some(v) = raw.take("run", "sic") {
        cfg.sic = match v {
            "hard" => SicMode::Hard,
            "genie" => SicMode::Genie,
            _ => {
                return Err(ConfigError::BadValue {
                    line: entry_line(&raw, "run", "sic"),
                    key: "run.sic".into(),
                    detail: format!("{v:?} is not `hard` or `genie`"),
                })
            }
        };
    }
    if let Some(v) = raw.take("run", "noise_coupling") {
        cfg.noise_coupling = match v {
            "absolute" => NoiseCoupling::Absolute,
            "symbol-relative" => NoiseCoupling::SymbolRelative,
            _ => {
                return Err(ConfigError::BadValue {
                    line: entry_line(&raw, "run", "noise_coupling"),
                    key: "run.noise_coupling".into(),
                    detail: format!("{v:?} is not `absolute` or `symbol-relative`"),
                })
            }
        };
    }
    if let Some(v) = raw.take("run", "private_norm") {
        cfg.private_norm = match v {
            "by-message-len" => PrivateBerNorm::ByMessageLen,
            "by-non-indexed-len" => PrivateBerNorm::ByNonIndexedLen,
            _ => {
                return Err(ConfigError::BadValue {
                    line: entry_line(&raw, "run", "private_norm"),
                    key: "run.private_norm".into(),
                    detail: format!("{v:?} is not `by-message-len` or `by-non-indexed-len`"),
                })
            }
        };
    }
    if let Some(v) = raw.take("eves", "profiles") {
        cfg.eves = parse_eve_profiles(v).map_err(|detail| ConfigError::BadValue {
            line: entry_line(&raw, "eves", "profiles"),
            key: "eves.profiles".into(),
            detail,
        })?;
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Parses a 0/1 string (whitespace allowed) into a bit vector.
pub fn parse_bit_string(text: &str) -> Result<Vec<bool>, String> {
    let mut bits = Vec::new();
    for c in text.chars() {
        match c {
            '0' => bits.push(false),
            '1' => bits.push(true),
            c if c.is_whitespace() => {}
            other => return Err(format!("unexpected character {other:?} in bit string")),
        }
    }
    if bits.is_empty() {
        return Err("bit string is empty".to_string());
    }
    Ok(bits)
}

/// Parses `kind:kappa` entries separated by commas, e.g.
/// `external:0.0, external:0.5, internal:0.75`. `none` clears the list.
fn parse_eve_profiles(text: &str) -> Result<Vec<EveProfile>, String> {
    if text.trim() == "none" {
        return Ok(Vec::new());
    }
    let mut profiles = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (kind_text, kappa_text) = part
            .split_once(':')
            .ok_or_else(|| format!("expected `kind:kappa`, got {part:?}"))?;
        let kind = match kind_text.trim() {
            "external" => EveKind::External,
            "internal" => EveKind::Internal,
            other => return Err(format!("unknown eavesdropper kind {other:?}")),
        };
        let kappa: f64 = kappa_text
            .trim()
            .parse()
            .map_err(|_| format!("{kappa_text:?} is not a number"))?;
        if !(0.0..=1.0).contains(&kappa) || !kappa.is_finite() {
            return Err(format!("knowledge fraction {kappa} outside [0, 1]"));
        }
        profiles.push(EveProfile {
            kind,
            zeta_knowledge: kappa,
        });
    }
    if profiles.is_empty() {
        return Err("no profiles given (use `none` to run without eavesdroppers)".to_string());
    }
    Ok(profiles)
}
