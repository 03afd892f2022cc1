//! Multi-antenna downlink model: precoder construction, superposed
//! transmission, per-terminal reception with complex AWGN, and SINR
//! accounting.
//!
//! Two operating regimes share this module. The full regime superposes a
//! common stream and per-user private streams over an `N_t`-antenna
//! transmitter and scalar-projects them onto each terminal's channel. The
//! analysis regime bypasses spatial superposition entirely — unit gain,
//! additive noise only (see [`add_awgn`]) — so measured error rates are
//! directly comparable to closed-form AWGN expressions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AirlinkError {
    #[error("zero-forcing needs at least as many antennas as users ({users} users, {antennas} antennas)")]
    ZeroForcingNeedsAntennas { users: usize, antennas: usize },
    #[error("channel matrix is rank-deficient; zero-forcing directions do not exist")]
    RankDeficient,
    #[error("user channel directions cancel; no common precoding direction")]
    DegenerateCommonDirection,
    #[error("expected {expected} {what}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("noise variance must be positive, got {0}")]
    NoiseVariance(f64),
    #[error("power split must lie in [0, 1], got {0}")]
    PowerSplit(f64),
    #[error("precoders spend {used:.12} of a {budget:.12} power budget")]
    PowerBudgetExceeded { used: f64, budget: f64 },
}

/// Which terminal a per-terminal quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    User(usize),
    Eve,
}

/// Downlink channel state: one length-`N_t` vector per user, one for the
/// external eavesdropper, and per-terminal noise powers.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    user_channels: Vec<DVector<Complex64>>,
    eve_channel: DVector<Complex64>,
    user_noise_variances: Vec<f64>,
    eve_noise_variance: f64,
}

impl ChannelSet {
    pub fn new(
        user_channels: Vec<DVector<Complex64>>,
        eve_channel: DVector<Complex64>,
        user_noise_variances: Vec<f64>,
        eve_noise_variance: f64,
    ) -> Result<Self, AirlinkError> {
        let n_t = eve_channel.len();
        for h in &user_channels {
            if h.len() != n_t {
                return Err(AirlinkError::DimensionMismatch {
                    what: "antenna coefficients",
                    expected: n_t,
                    got: h.len(),
                });
            }
        }
        if user_noise_variances.len() != user_channels.len() {
            return Err(AirlinkError::DimensionMismatch {
                what: "noise variances",
                expected: user_channels.len(),
                got: user_noise_variances.len(),
            });
        }
        for &v in user_noise_variances.iter().chain([&eve_noise_variance]) {
            if v <= 0.0 || v.is_nan() {
                return Err(AirlinkError::NoiseVariance(v));
            }
        }
        Ok(Self {
            user_channels,
            eve_channel,
            user_noise_variances,
            eve_noise_variance,
        })
    }

    pub fn num_users(&self) -> usize {
        self.user_channels.len()
    }

    pub fn num_antennas(&self) -> usize {
        self.eve_channel.len()
    }

    pub fn user_channel(&self, k: usize) -> &DVector<Complex64> {
        &self.user_channels[k]
    }

    pub fn channel(&self, t: Terminal) -> &DVector<Complex64> {
        match t {
            Terminal::User(k) => &self.user_channels[k],
            Terminal::Eve => &self.eve_channel,
        }
    }

    pub fn noise_variance(&self, t: Terminal) -> f64 {
        match t {
            Terminal::User(k) => self.user_noise_variances[k],
            Terminal::Eve => self.eve_noise_variance,
        }
    }
}

/// Private-precoder design. The common precoder is always matched to the
/// normalized sum of user channel directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrecoderStrategy {
    /// Each user's private direction lies in the null space of every other
    /// user's channel (needs `K ≤ N_t` and full channel rank).
    #[default]
    ZeroForcingPrivate,
    /// Each user's private direction is matched to their own channel.
    MatchedPrivate,
}

/// Common and private precoding vectors plus the power bookkeeping behind
/// them: fraction `power_split` of `total_power` goes to the common stream,
/// the rest is split equally across private streams.
#[derive(Debug, Clone)]
pub struct Precoders {
    common: DVector<Complex64>,
    private: Vec<DVector<Complex64>>,
    power_split: f64,
    total_power: f64,
}

impl Precoders {
    pub fn common(&self) -> &DVector<Complex64> {
        &self.common
    }

    pub fn private(&self, k: usize) -> &DVector<Complex64> {
        &self.private[k]
    }

    pub fn num_users(&self) -> usize {
        self.private.len()
    }

    pub fn power_split(&self) -> f64 {
        self.power_split
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    /// Total transmit power spent across all precoding vectors,
    /// `tr(P Pᴴ) = ‖p_c‖² + Σ_k ‖p_k‖²` for unit-energy streams.
    pub fn spent_power(&self) -> f64 {
        self.common.norm_squared() + self.private.iter().map(|p| p.norm_squared()).sum::<f64>()
    }

    /// Enforces the transmit power budget within 1e-9 relative tolerance.
    pub fn validate_budget(&self) -> Result<(), AirlinkError> {
        let used = self.spent_power();
        if used > self.total_power * (1.0 + 1e-9) {
            return Err(AirlinkError::PowerBudgetExceeded {
                used,
                budget: self.total_power,
            });
        }
        Ok(())
    }

    /// Scalar gain the common stream sees at a terminal with channel `h`:
    /// `hᴴ p_c`.
    pub fn effective_common_gain(&self, h: &DVector<Complex64>) -> Complex64 {
        h.dotc(&self.common)
    }

    /// Scalar gain user `k`'s private stream sees at a terminal with
    /// channel `h`: `hᴴ p_k`.
    pub fn effective_private_gain(&self, h: &DVector<Complex64>, k: usize) -> Complex64 {
        h.dotc(&self.private[k])
    }
}

/// Builds the precoder set for a channel realization. `power_split` is the
/// fraction of `total_power` assigned to the common stream; private streams
/// share the remainder equally, each along a unit-norm direction.
pub fn build_precoders(
    channels: &ChannelSet,
    power_split: f64,
    total_power: f64,
    strategy: PrecoderStrategy,
) -> Result<Precoders, AirlinkError> {
    if !(0.0..=1.0).contains(&power_split) {
        return Err(AirlinkError::PowerSplit(power_split));
    }
    let k_users = channels.num_users();
    let n_t = channels.num_antennas();

    // Common precoder: matched to the normalized sum of channel directions.
    let mut sum_dir = DVector::<Complex64>::zeros(n_t);
    for h in &channels.user_channels {
        let norm = h.norm();
        if norm > 0.0 {
            sum_dir += h.map(|c| c / Complex64::new(norm, 0.0));
        }
    }
    let sum_norm = sum_dir.norm();
    if sum_norm < 1e-12 {
        return Err(AirlinkError::DegenerateCommonDirection);
    }
    let common_amp = (power_split * total_power).sqrt();
    let common = sum_dir.map(|c| c * Complex64::new(common_amp / sum_norm, 0.0));

    // Private precoders: unit-norm directions scaled to equal power.
    let per_user_power = if k_users == 0 {
        0.0
    } else {
        (1.0 - power_split) * total_power / k_users as f64
    };
    let per_user_amp = per_user_power.sqrt();
    let directions: Vec<DVector<Complex64>> = match strategy {
        PrecoderStrategy::MatchedPrivate => channels
            .user_channels
            .iter()
            .map(|h| {
                let norm = h.norm();
                if norm < 1e-12 {
                    Err(AirlinkError::RankDeficient)
                } else {
                    Ok(h.map(|c| c / Complex64::new(norm, 0.0)))
                }
            })
            .collect::<Result<_, _>>()?,
        PrecoderStrategy::ZeroForcingPrivate => {
            if k_users > n_t {
                return Err(AirlinkError::ZeroForcingNeedsAntennas {
                    users: k_users,
                    antennas: n_t,
                });
            }
            // Right inverse of the K×N_t matrix with rows h_kᴴ: its k-th
            // column is orthogonal to every other user's channel.
            let h_mat = DMatrix::<Complex64>::from_fn(k_users, n_t, |r, c| {
                channels.user_channels[r][c].conj()
            });
            let gram = &h_mat * h_mat.adjoint();
            let gram_inv = gram.try_inverse().ok_or(AirlinkError::RankDeficient)?;
            let right_inv = h_mat.adjoint() * gram_inv;
            (0..k_users)
                .map(|k| {
                    let col = right_inv.column(k).into_owned();
                    let norm = col.norm();
                    if norm < 1e-12 {
                        Err(AirlinkError::RankDeficient)
                    } else {
                        Ok(col.map(|c| c / Complex64::new(norm, 0.0)))
                    }
                })
                .collect::<Result<_, _>>()?
        }
    };
    let private = directions
        .into_iter()
        .map(|d| d.map(|c| c * Complex64::new(per_user_amp, 0.0)))
        .collect();

    let precoders = Precoders {
        common,
        private,
        power_split,
        total_power,
    };
    precoders.validate_budget()?;
    Ok(precoders)
}

/// One frame of streams ready for superposition: common symbols, per-user
/// private symbols, and the precoders that will carry them.
#[derive(Debug, Clone)]
pub struct PrecodedFrame {
    pub common_symbols: Vec<Complex64>,
    pub private_symbols: Vec<Vec<Complex64>>,
    pub precoders: Precoders,
}

impl PrecodedFrame {
    pub fn new(
        common_symbols: Vec<Complex64>,
        private_symbols: Vec<Vec<Complex64>>,
        precoders: Precoders,
    ) -> Result<Self, AirlinkError> {
        if private_symbols.len() != precoders.num_users() {
            return Err(AirlinkError::DimensionMismatch {
                what: "private symbol streams",
                expected: precoders.num_users(),
                got: private_symbols.len(),
            });
        }
        precoders.validate_budget()?;
        Ok(Self {
            common_symbols,
            private_symbols,
            precoders,
        })
    }

    /// Symbol instants in the superposed frame: the longest stream's length
    /// (shorter streams ride as zeros).
    pub fn num_instants(&self) -> usize {
        self.private_symbols
            .iter()
            .map(Vec::len)
            .chain([self.common_symbols.len()])
            .max()
            .unwrap_or(0)
    }
}

/// Superposes the streams onto the antenna array: column `t` is
/// `p_c·s_c[t] + Σ_k p_k·s_k[t]`, with shorter streams zero-padded.
pub fn transmit(frame: &PrecodedFrame) -> DMatrix<Complex64> {
    let n_t = frame.precoders.common.len();
    let instants = frame.num_instants();
    let mut x = DMatrix::<Complex64>::zeros(n_t, instants);
    for t in 0..instants {
        let mut col = x.column_mut(t);
        if let Some(&s) = frame.common_symbols.get(t) {
            col.axpy(s, &frame.precoders.common, Complex64::new(1.0, 0.0));
        }
        for (k, stream) in frame.private_symbols.iter().enumerate() {
            if let Some(&s) = stream.get(t) {
                col.axpy(s, &frame.precoders.private[k], Complex64::new(1.0, 0.0));
            }
        }
    }
    x
}

/// How additive noise couples to the signal when shared across compared
/// chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseCoupling {
    /// `y = a + n`: one absolute noise draw per instant, the standard model.
    #[default]
    Absolute,
    /// `y = a + sign(a)·n` per axis: the draw is applied relative to the
    /// transmitted axis sign. Statistically identical to [`Absolute`] for
    /// symmetric two-level axes (4-QAM), and it makes the error event a
    /// function of the (instant, axis) slot alone — two chains sharing a
    /// noise stream then see identical error patterns wherever they agree
    /// on slot usage, regardless of the bits carried.
    SymbolRelative,
}

fn sign_or_one(a: f64) -> f64 {
    if a < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Adds circularly-symmetric complex Gaussian noise of total variance
/// `noise_variance` to a scalar symbol sequence. This is the whole channel
/// in analysis mode (unit gain), and the last stage of [`receive`].
pub fn add_awgn<R: Rng>(
    symbols: &[Complex64],
    noise_variance: f64,
    coupling: NoiseCoupling,
    rng: &mut R,
) -> Vec<Complex64> {
    let sigma_axis = (noise_variance / 2.0).sqrt();
    symbols
        .iter()
        .map(|s| {
            let n_re: f64 = rng.sample(StandardNormal);
            let n_im: f64 = rng.sample(StandardNormal);
            match coupling {
                NoiseCoupling::Absolute => {
                    Complex64::new(s.re + sigma_axis * n_re, s.im + sigma_axis * n_im)
                }
                NoiseCoupling::SymbolRelative => Complex64::new(
                    s.re + sign_or_one(s.re) * sigma_axis * n_re,
                    s.im + sign_or_one(s.im) * sigma_axis * n_im,
                ),
            }
        })
        .collect()
}

/// Projects the transmitted matrix onto one terminal's channel and adds
/// receiver noise: `y_t = hᴴ x_t + n_t`.
pub fn receive<R: Rng>(
    x: &DMatrix<Complex64>,
    channel: &DVector<Complex64>,
    noise_variance: f64,
    coupling: NoiseCoupling,
    rng: &mut R,
) -> Vec<Complex64> {
    let row = channel.adjoint() * x;
    let projected: Vec<Complex64> = row.iter().copied().collect();
    add_awgn(&projected, noise_variance, coupling, rng)
}

/// Which stream's SINR to account for at a terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    /// Common stream decoded first: every private stream is interference.
    Common,
    /// Private stream `k` decoded without cancelling the common stream.
    Private(usize),
    /// Private stream `k` after the common stream has been removed.
    PostSicPrivate(usize),
}

/// Linear SINR of `stream` at a terminal with channel `h` and noise power
/// `noise_variance`, under the given precoders.
pub fn stream_sinr(
    h: &DVector<Complex64>,
    precoders: &Precoders,
    noise_variance: f64,
    stream: StreamKind,
) -> f64 {
    let common_pow = precoders.effective_common_gain(h).norm_sqr();
    let private_pow: Vec<f64> = (0..precoders.num_users())
        .map(|k| precoders.effective_private_gain(h, k).norm_sqr())
        .collect();
    let total_private: f64 = private_pow.iter().sum();
    match stream {
        StreamKind::Common => common_pow / (total_private + noise_variance),
        StreamKind::Private(k) => {
            private_pow[k] / (common_pow + total_private - private_pow[k] + noise_variance)
        }
        StreamKind::PostSicPrivate(k) => {
            private_pow[k] / (total_private - private_pow[k] + noise_variance)
        }
    }
}

/// Per-bit-SNR calibration for unit-energy symbols over a unit-gain link:
/// at average per-bit SNR `gamma_bar` (linear) with `v` bits per symbol,
/// the complex noise variance is `1 / (v·γ̄)`.
pub fn noise_variance_for_bit_snr(gamma_bar: f64, bits_per_symbol: usize) -> f64 {
    1.0 / (bits_per_symbol as f64 * gamma_bar)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Draws an `n_t`-entry channel with independent unit-variance circularly
/// symmetric complex Gaussian coefficients.
pub fn rayleigh_channel<R: Rng>(n_t: usize, rng: &mut R) -> DVector<Complex64> {
    DVector::from_fn(n_t, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(
            re * std::f64::consts::FRAC_1_SQRT_2,
            im * std::f64::consts::FRAC_1_SQRT_2,
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn cv(entries: &[(f64, f64)]) -> DVector<Complex64> {
        DVector::from_iterator(
            entries.len(),
            entries.iter().map(|&(r, i)| Complex64::new(r, i)),
        )
    }

    fn scalar_channelset() -> ChannelSet {
        ChannelSet::new(vec![cv(&[(1.0, 0.0)])], cv(&[(1.0, 0.0)]), vec![1.0], 1.0).unwrap()
    }

    #[test]
    fn scalar_channel_precoders() {
        let channels = scalar_channelset();
        let p = build_precoders(&channels, 0.5, 2.0, PrecoderStrategy::ZeroForcingPrivate).unwrap();
        assert_relative_eq!(p.common()[0].re, 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.common()[0].im, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.private(0)[0].re, 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.spent_power(), 2.0, max_relative = 1e-12);
        p.validate_budget().unwrap();
    }

    #[test]
    fn zero_forcing_on_orthogonal_channels_is_matched() {
        let channels = ChannelSet::new(
            vec![cv(&[(1.0, 0.0), (0.0, 0.0)]), cv(&[(0.0, 0.0), (1.0, 0.0)])],
            cv(&[(1.0, 0.0), (1.0, 0.0)]),
            vec![1.0, 1.0],
            1.0,
        )
        .unwrap();
        let p = build_precoders(&channels, 0.5, 1.0, PrecoderStrategy::ZeroForcingPrivate).unwrap();
        // p_1 ∝ e_1, p_2 ∝ e_2.
        assert!(p.private(0)[1].norm() < 1e-12);
        assert!(p.private(1)[0].norm() < 1e-12);
        assert!(p.private(0)[0].norm() > 0.0);
        assert!(p.private(1)[1].norm() > 0.0);
    }

    #[test]
    fn zero_forcing_nulls_cross_terms_on_random_channels() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..50 {
            let channels = ChannelSet::new(
                vec![rayleigh_channel(4, &mut rng), rayleigh_channel(4, &mut rng)],
                rayleigh_channel(4, &mut rng),
                vec![1.0, 1.0],
                1.0,
            )
            .unwrap();
            let p =
                build_precoders(&channels, 0.5, 1.0, PrecoderStrategy::ZeroForcingPrivate).unwrap();
            for j in 0..2 {
                for k in 0..2 {
                    if j != k {
                        let cross = p.effective_private_gain(channels.user_channel(j), k).norm();
                        let bound = 1e-9 * channels.user_channel(j).norm() * p.private(k).norm();
                        assert!(cross < bound.max(1e-12), "cross {cross} bound {bound}");
                    }
                }
            }
            p.validate_budget().unwrap();
        }
    }

    #[test]
    fn zero_forcing_needs_enough_antennas() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let channels = ChannelSet::new(
            vec![
                rayleigh_channel(2, &mut rng),
                rayleigh_channel(2, &mut rng),
                rayleigh_channel(2, &mut rng),
            ],
            rayleigh_channel(2, &mut rng),
            vec![1.0, 1.0, 1.0],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            build_precoders(&channels, 0.5, 1.0, PrecoderStrategy::ZeroForcingPrivate),
            Err(AirlinkError::ZeroForcingNeedsAntennas { .. })
        ));
    }

    #[test]
    fn rank_deficient_channels_rejected() {
        let h = cv(&[(1.0, 0.0), (2.0, 0.0)]);
        let channels = ChannelSet::new(
            vec![h.clone(), h],
            cv(&[(1.0, 0.0), (0.0, 0.0)]),
            vec![1.0, 1.0],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            build_precoders(&channels, 0.5, 1.0, PrecoderStrategy::ZeroForcingPrivate),
            Err(AirlinkError::RankDeficient)
        ));
    }

    #[test]
    fn transmit_superposes_streams() {
        let channels = ChannelSet::new(
            vec![cv(&[(1.0, 0.0), (0.0, 0.0)])],
            cv(&[(1.0, 0.0), (0.0, 0.0)]),
            vec![1.0],
            1.0,
        )
        .unwrap();
        let mut p = build_precoders(&channels, 0.5, 2.0, PrecoderStrategy::MatchedPrivate).unwrap();
        // Overwrite with hand-built orthogonal precoders to pin the example.
        p.common = cv(&[(1.0, 0.0), (0.0, 0.0)]);
        p.private = vec![cv(&[(0.0, 0.0), (1.0, 0.0)])];
        let frame = PrecodedFrame::new(
            vec![Complex64::new(1.0, 0.0)],
            vec![vec![Complex64::new(0.0, 1.0)]],
            p,
        )
        .unwrap();
        let x = transmit(&frame);
        assert_eq!(x.ncols(), 1);
        assert_relative_eq!(x[(0, 0)].re, 1.0, max_relative = 1e-12);
        assert_relative_eq!(x[(1, 0)].im, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn transmit_common_only_when_private_is_zero() {
        let channels = scalar_channelset();
        let p = build_precoders(&channels, 0.5, 2.0, PrecoderStrategy::ZeroForcingPrivate).unwrap();
        let s_c = Complex64::new(0.6, -0.8);
        let frame =
            PrecodedFrame::new(vec![s_c], vec![vec![Complex64::new(0.0, 0.0)]], p.clone()).unwrap();
        let x = transmit(&frame);
        assert_relative_eq!(
            (x[(0, 0)] - p.common()[0] * s_c).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn transmit_power_accounting_monte_carlo() {
        // E‖x‖² over unit-energy streams = ‖p_c‖² + Σ‖p_k‖².
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let channels = ChannelSet::new(
            vec![rayleigh_channel(4, &mut rng), rayleigh_channel(4, &mut rng)],
            rayleigh_channel(4, &mut rng),
            vec![1.0, 1.0],
            1.0,
        )
        .unwrap();
        let p = build_precoders(&channels, 0.5, 1.0, PrecoderStrategy::ZeroForcingPrivate).unwrap();
        let expect = p.spent_power();
        let frames = 10_000usize;
        let mut acc = 0.0;
        for _ in 0..frames {
            let unit = |rng: &mut ChaCha12Rng| {
                let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                Complex64::new(theta.cos(), theta.sin())
            };
            let frame = PrecodedFrame::new(
                vec![unit(&mut rng)],
                vec![vec![unit(&mut rng)], vec![unit(&mut rng)]],
                p.clone(),
            )
            .unwrap();
            let x = transmit(&frame);
            acc += x.column(0).norm_squared();
        }
        let mean = acc / frames as f64;
        assert!(
            (mean - expect).abs() / expect < 0.05,
            "mean {mean} expect {expect}"
        );
    }

    #[test]
    fn receive_noiseless_projects_onto_channel() {
        let x = DMatrix::from_column_slice(
            2,
            1,
            &[Complex64::new(0.3, 0.4), Complex64::new(-1.0, 0.25)],
        );
        let h = cv(&[(1.0, 0.0), (0.0, 0.0)]);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        // Noise variance must be positive for the model; make it negligible.
        let y = receive(&x, &h, 1e-300, NoiseCoupling::Absolute, &mut rng);
        assert_relative_eq!((y[0] - x[(0, 0)]).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn receive_noise_statistics() {
        let x = DMatrix::<Complex64>::zeros(1, 100_000);
        let h = cv(&[(1.0, 0.0)]);
        let sigma2 = 0.7;
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let y = receive(&x, &h, sigma2, NoiseCoupling::Absolute, &mut rng);
        let mean = y.iter().sum::<Complex64>() / Complex64::new(y.len() as f64, 0.0);
        let var = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        assert!(mean.norm() < 0.01, "mean {mean}");
        assert!((var - sigma2).abs() / sigma2 < 0.03, "var {var}");
    }

    #[test]
    fn receive_is_linear_under_shared_noise() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let x1 = DMatrix::from_fn(2, 8, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let x2 = DMatrix::from_fn(2, 8, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = rayleigh_channel(2, &mut rng);
        let draw = ChaCha12Rng::seed_from_u64(77);
        let y1 = receive(&x1, &h, 0.5, NoiseCoupling::Absolute, &mut draw.clone());
        let y_sum = receive(
            &(&x1 + &x2),
            &h,
            0.5,
            NoiseCoupling::Absolute,
            &mut draw.clone(),
        );
        // Same noise draw: y(x1+x2) - y(x1) must equal the noiseless part of x2.
        for t in 0..8 {
            let diff = y_sum[t] - y1[t];
            let expect = h.dotc(&x2.column(t).into_owned());
            assert_relative_eq!((diff - expect).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn symbol_relative_coupling_matches_absolute_statistics() {
        // For two-level axes the error rate is coupling-invariant.
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let n = 200_000usize;
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let symbols: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    if rng.gen() { amp } else { -amp },
                    if rng.gen() { amp } else { -amp },
                )
            })
            .collect();
        let sigma2 = 0.5;
        let mut flips = [0usize; 2];
        for (i, coupling) in [NoiseCoupling::Absolute, NoiseCoupling::SymbolRelative]
            .into_iter()
            .enumerate()
        {
            let mut noise_rng = ChaCha12Rng::seed_from_u64(55);
            let y = add_awgn(&symbols, sigma2, coupling, &mut noise_rng);
            flips[i] = symbols
                .iter()
                .zip(y.iter())
                .map(|(s, r)| {
                    (s.re.signum() != r.re.signum()) as usize
                        + (s.im.signum() != r.im.signum()) as usize
                })
                .sum();
        }
        let p0 = flips[0] as f64 / (2 * n) as f64;
        let p1 = flips[1] as f64 / (2 * n) as f64;
        assert!((p0 - p1).abs() < 0.005, "absolute {p0} vs relative {p1}");
    }

    #[test]
    fn sinr_scalar_example() {
        let channels = scalar_channelset();
        let p = build_precoders(&channels, 0.5, 2.0, PrecoderStrategy::ZeroForcingPrivate).unwrap();
        let h = channels.user_channel(0);
        // p_c = p_1 = 1 on a unit channel with σ² = 1.
        assert_relative_eq!(
            stream_sinr(h, &p, 1.0, StreamKind::Common),
            0.5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            stream_sinr(h, &p, 1.0, StreamKind::PostSicPrivate(0)),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn post_sic_private_sinr_is_interference_free_under_zero_forcing() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let channels = ChannelSet::new(
            vec![rayleigh_channel(4, &mut rng), rayleigh_channel(4, &mut rng)],
            rayleigh_channel(4, &mut rng),
            vec![0.3, 0.3],
            0.3,
        )
        .unwrap();
        let p = build_precoders(&channels, 0.5, 1.0, PrecoderStrategy::ZeroForcingPrivate).unwrap();
        for k in 0..2 {
            let h = channels.user_channel(k);
            let sinr = stream_sinr(h, &p, 0.3, StreamKind::PostSicPrivate(k));
            let direct = p.effective_private_gain(h, k).norm_sqr() / 0.3;
            assert_relative_eq!(sinr, direct, max_relative = 1e-6);
        }
    }

    #[test]
    fn sinr_vanishes_in_noise_dominated_limit() {
        let channels = scalar_channelset();
        let p = build_precoders(&channels, 0.5, 2.0, PrecoderStrategy::ZeroForcingPrivate).unwrap();
        let h = channels.user_channel(0);
        for kind in [
            StreamKind::Common,
            StreamKind::Private(0),
            StreamKind::PostSicPrivate(0),
        ] {
            assert!(stream_sinr(h, &p, 1e12, kind) < 1e-9);
        }
    }

    #[test]
    fn rayleigh_channel_unit_second_moment() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let draws = 100_000usize;
        let mut acc = 0.0;
        for _ in 0..draws {
            acc += rayleigh_channel(1, &mut rng)[0].norm_sqr();
        }
        let second_moment = acc / draws as f64;
        assert!(
            (second_moment - 1.0).abs() < 0.02,
            "second moment {second_moment}"
        );
    }

    #[test]
    fn analysis_mode_noise_calibration() {
        // σ² = 1/(v·γ̄): at γ̄ = 10 dB with 2 bits/symbol, σ² = 0.05.
        let sigma2 = noise_variance_for_bit_snr(db_to_linear(10.0), 2);
        assert_relative_eq!(sigma2, 0.05, max_relative = 1e-12);
        // Unit channel reduces receive() to y = s + n: check against add_awgn
        // with the same draw.
        let symbols = vec![Complex64::new(0.3, -0.7), Complex64::new(-1.0, 0.1)];
        let x = DMatrix::from_fn(1, 2, |_, c| symbols[c]);
        let h = cv(&[(1.0, 0.0)]);
        let y1 = receive(
            &x,
            &h,
            sigma2,
            NoiseCoupling::Absolute,
            &mut ChaCha12Rng::seed_from_u64(21),
        );
        let y2 = add_awgn(
            &symbols,
            sigma2,
            NoiseCoupling::Absolute,
            &mut ChaCha12Rng::seed_from_u64(21),
        );
        for (a, b) in y1.iter().zip(y2.iter()) {
            assert_relative_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }
}
