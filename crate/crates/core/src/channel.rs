//! Multipath channel synthesis over PRS resource grids.
//!
//! Channels are kept in the frequency domain over the grid's subcarriers;
//! there is no time-domain convolution. The estimator consumes
//! frequency-domain channel estimates anyway, so the grid-level model is
//! exact for this pipeline. Noise power is defined relative to unit PRS RE
//! power; SNR is per occupied RE.

use crate::model::{time_of_flight, Position2D};
use crate::prs::ResourceGrid;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// One propagation path: absolute delay plus complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTap {
    pub delay_s: f64,
    pub gain: Complex64,
}

/// A set of taps sorted by delay; the first tap is the first arriving path.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    taps: Vec<ChannelTap>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("two taps coincide exactly at {delay_s} s")]
    DuplicateDelay { delay_s: f64 },
    #[error("channel profile must contain at least one tap")]
    Empty,
}

impl ChannelProfile {
    /// Builds a profile from raw taps, sorting by delay.
    pub fn from_taps(mut taps: Vec<ChannelTap>) -> Result<Self, ChannelError> {
        if taps.is_empty() {
            return Err(ChannelError::Empty);
        }
        taps.sort_by(|a, b| a.delay_s.total_cmp(&b.delay_s));
        for w in taps.windows(2) {
            if w[0].delay_s == w[1].delay_s {
                return Err(ChannelError::DuplicateDelay {
                    delay_s: w[0].delay_s,
                });
            }
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[ChannelTap] {
        &self.taps
    }

    /// Delay of the first arriving path.
    pub fn first_path_delay_s(&self) -> f64 {
        self.taps[0].delay_s
    }

    /// Returns a copy with every tap delayed by `offset_s` (used to fold
    /// clock offsets into the air interface).
    pub fn delayed(&self, offset_s: f64) -> Self {
        Self {
            taps: self
                .taps
                .iter()
                .map(|t| ChannelTap {
                    delay_s: t.delay_s + offset_s,
                    gain: t.gain,
                })
                .collect(),
        }
    }

    /// H(f_k) = Σ_m gain_m · exp(−i 2π f_k delay_m) for each requested
    /// frequency.
    pub fn frequency_response(&self, freqs_hz: &[f64]) -> Vec<Complex64> {
        freqs_hz
            .iter()
            .map(|&f| {
                self.taps
                    .iter()
                    .map(|t| t.gain * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * t.delay_s))
                    .sum()
            })
            .collect()
    }

    /// Power-weighted standard deviation of the tap delays.
    pub fn rms_delay_spread_s(&self) -> f64 {
        let total: f64 = self.taps.iter().map(|t| t.gain.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mean: f64 = self
            .taps
            .iter()
            .map(|t| t.gain.norm_sqr() * t.delay_s)
            .sum::<f64>()
            / total;
        let var: f64 = self
            .taps
            .iter()
            .map(|t| t.gain.norm_sqr() * (t.delay_s - mean).powi(2))
            .sum::<f64>()
            / total;
        var.sqrt()
    }
}

/// Pure line-of-sight channel: one unit tap at the geometric time of flight.
pub fn los_profile(gnb: Position2D, ue: Position2D) -> ChannelProfile {
    ChannelProfile {
        taps: vec![ChannelTap {
            delay_s: time_of_flight(gnb, ue),
            gain: Complex64::new(1.0, 0.0),
        }],
    }
}

/// LOS tap plus one tap per echo at `tof + excess_delay`.
pub fn multipath_profile(
    gnb: Position2D,
    ue: Position2D,
    echoes: &[(f64, Complex64)],
) -> Result<ChannelProfile, ChannelError> {
    let tof = time_of_flight(gnb, ue);
    let mut taps = vec![ChannelTap {
        delay_s: tof,
        gain: Complex64::new(1.0, 0.0),
    }];
    taps.extend(echoes.iter().map(|&(excess, gain)| ChannelTap {
        delay_s: tof + excess,
        gain,
    }));
    ChannelProfile::from_taps(taps)
}

/// Per-RE noise level plus the stream that realizes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// SNR relative to unit RE power, dB. `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub rng_seed: u64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            snr_db: f64::INFINITY,
            rng_seed: 0,
        }
    }

    /// Complex noise variance per RE for unit signal power.
    pub fn noise_variance(&self) -> f64 {
        if self.snr_db.is_infinite() {
            0.0
        } else {
            10f64.powf(-self.snr_db / 10.0)
        }
    }
}

/// Applies a channel to a transmit grid: every occupied RE is multiplied by
/// H at its subcarrier frequency and i.i.d. complex Gaussian noise at the
/// configured per-RE SNR is added to every RE. Deterministic under a fixed
/// seed.
pub fn apply_channel(grid: &ResourceGrid, profile: &ChannelProfile, noise: &NoiseSpec) -> ResourceGrid {
    use rand_chacha::rand_core::SeedableRng;
    let mut rx = grid.clone();
    let freqs: Vec<f64> = (0..grid.n_subcarriers())
        .map(|k| k as f64 * grid.scs_hz)
        .collect();
    let response = profile.frequency_response(&freqs);
    for s in 0..grid.n_symbols() {
        for (k, h) in response.iter().enumerate() {
            let v = rx.get(s, k);
            if v.norm_sqr() > 0.0 {
                rx.set(s, k, v * h);
            }
        }
    }
    let var = noise.noise_variance();
    if var > 0.0 {
        let sigma = (var / 2.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(noise.rng_seed);
        for v in rx.values_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(sigma * re, sigma * im);
        }
    }
    rx
}
