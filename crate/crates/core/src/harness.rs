//! End-to-end experiment orchestration.
//!
//! A session mirrors the testbed lifecycle: the inter-gNB offsets are drawn
//! (or fixed) once when the gNBs come up and stay constant; the UE offset
//! phi is redrawn every trial because the UE restarts between trials; gNBs
//! transmit one at a time, so per (trial, gNB) the configured number of
//! channel-estimate→TOA cycles runs back to back. Campaign TOAs use the
//! measurement model directly, optionally quantized to the interpolated tap
//! grid of the configured estimator; the grid-level PRS pipeline is
//! exercised by the sweep studies where peak interactions matter.
//!
//! Trials and positions are embarrassingly parallel. Every work item draws
//! from its own seeded stream and results are collected in input order, so
//! parallel and sequential runs emit identical reports.

use crate::channel::{apply_channel, ChannelProfile, ChannelTap, NoiseSpec};
use crate::estimator::{
    detect_toa, estimate_cfr, interpolate_cir, DetectionMode, EstimatorError,
};
use crate::model::{time_of_flight, GnbDeployment, Position2D, SPEED_OF_LIGHT};
use crate::par::map_collect;
use crate::prs::{build_schedule, map_prs_to_grid, slot_duration_s, PrsConfig, PrsError, SUBCARRIERS_PER_PRB};
use crate::rng::{self, tag};
use crate::tdoa::{estimate_position, hyperbola_from_rstd, PositionEstimate, RstdRecord, TdoaError};
use crate::timing::{calibrate, simulate_toa, CalibrationError, CalibrationResult, TimingOffsets, ToaRecord};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Default width of exported TOA histogram bins, seconds (0.1 ns).
pub const DEFAULT_HISTOGRAM_BIN_S: f64 = 1e-10;

/// A scalar that is either fixed or redrawn uniformly within ±bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueSpec {
    Fixed(f64),
    DrawUniform { bound: f64 },
}

/// Inter-gNB offsets: explicit per-gNB values or per-session uniform draws.
#[derive(Debug, Clone, PartialEq)]
pub enum OffsetsSpec {
    /// One entry per gNB; entry 0 (the reference) must be zero.
    FixedDeltas(Vec<f64>),
    /// Non-reference offsets drawn once per session within ±bound.
    DrawDeltas { bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoSpec {
    pub excess_delay_s: f64,
    pub gain_re: f64,
    pub gain_im: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    /// Per-RE SNR for grid-level studies, dB; infinite disables noise.
    pub snr_db: f64,
    /// Echo list per gNB (index = gNB id − 1); missing or empty means LOS.
    pub echoes_per_gnb: Vec<Vec<EchoSpec>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub oversample_factor: usize,
    pub detection_mode: DetectionMode,
    pub native_sample_rate_hz: f64,
    /// Quantize campaign TOAs to the interpolated tap grid.
    pub quantize_toa: bool,
}

impl EstimatorConfig {
    /// Tap spacing of the interpolated impulse response, seconds.
    pub fn tap_spacing_s(&self) -> f64 {
        1.0 / (self.native_sample_rate_hz * self.oversample_factor as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub calibration_positions: Vec<Position2D>,
    pub test_positions: Vec<Position2D>,
    /// Trials (UE restarts) per calibration position and per study point.
    pub trials_per_position: usize,
    /// Channel-estimate→TOA cycles per gNB within one trial.
    pub estimates_per_gnb_per_trial: usize,
}

/// Fully validated scenario description; see [`crate::config`] for the
/// on-disk form.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub deployment: GnbDeployment,
    pub prs: PrsConfig,
    pub phi: ValueSpec,
    pub delta: OffsetsSpec,
    pub noise_sigma_s: f64,
    pub channel: ChannelSpec,
    pub estimator: EstimatorConfig,
    pub campaign: CampaignConfig,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error(transparent)]
    Deployment(#[from] crate::model::DeploymentError),
    #[error(transparent)]
    Prs(#[from] PrsError),
    #[error("delta list has {got} entries, deployment has {expected} gNBs")]
    DeltaLengthMismatch { expected: usize, got: usize },
    #[error("reference gNB delta must be exactly zero")]
    ReferenceDeltaNotZero,
    #[error("noise sigma must be finite and non-negative")]
    BadNoiseSigma,
    #[error("unknown detection mode {mode:?}")]
    UnknownDetectionMode { mode: String },
    #[error("oversample factor must be >= 1")]
    ZeroOversample,
    #[error("trials per position must be >= 1")]
    ZeroTrials,
    #[error("estimates per gNB per trial must be >= 1")]
    ZeroEstimates,
    #[error("campaign positions must be finite")]
    NonFinitePosition,
    #[error("calibration position {cal_index} coincides with test position {test_index}")]
    OverlappingPositionSets { cal_index: usize, test_index: usize },
    #[error("{subcarriers} subcarriers exceed the native rate's {native_bins} bins")]
    BandExceedsNativeRate { subcarriers: usize, native_bins: usize },
    #[error("echo list has {got} per-gNB entries, deployment has {expected} gNBs")]
    EchoListTooLong { expected: usize, got: usize },
    #[error("echo excess delays must be positive and finite")]
    BadEchoDelay,
    #[error(
        "TOA for gNB {gnb_id} at position ({x_m}, {y_m}) can leave the unambiguous range \
         [0, {range_s} s] (worst case {min_s}..{max_s} s)"
    )]
    DelayOutsideUnambiguousRange {
        gnb_id: usize,
        x_m: f64,
        y_m: f64,
        min_s: f64,
        max_s: f64,
        range_s: f64,
    },
    #[error(
        "hyperbola for gNB {gnb_id} at position ({x_m}, {y_m}) is too close to invalid: \
         |a| can reach {worst_a_m} m of d = {d_m} m"
    )]
    HyperbolaInfeasible {
        gnb_id: usize,
        x_m: f64,
        y_m: f64,
        worst_a_m: f64,
        d_m: f64,
    },
}

impl ScenarioConfig {
    fn phi_bounds(&self) -> (f64, f64) {
        match self.phi {
            ValueSpec::Fixed(v) => (v, v),
            ValueSpec::DrawUniform { bound } => (-bound, bound),
        }
    }

    fn delta_bounds(&self) -> (f64, f64) {
        match &self.delta {
            OffsetsSpec::FixedDeltas(list) => list
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &d| {
                    (acc.0.min(d), acc.1.max(d))
                }),
            OffsetsSpec::DrawDeltas { bound } => (-bound, *bound),
        }
    }

    /// Largest absolute inter-gNB offset the scenario can produce.
    pub fn max_abs_delta_s(&self) -> f64 {
        let (lo, hi) = self.delta_bounds();
        lo.abs().max(hi.abs())
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.deployment.validate()?;
        self.prs.validate(&self.deployment)?;
        let n = self.deployment.n_gnbs();
        if let OffsetsSpec::FixedDeltas(list) = &self.delta {
            if list.len() != n {
                return Err(ScenarioError::DeltaLengthMismatch {
                    expected: n,
                    got: list.len(),
                });
            }
            if list[0] != 0.0 {
                return Err(ScenarioError::ReferenceDeltaNotZero);
            }
        }
        if self.noise_sigma_s < 0.0 || !self.noise_sigma_s.is_finite() {
            return Err(ScenarioError::BadNoiseSigma);
        }
        if self.estimator.oversample_factor == 0 {
            return Err(ScenarioError::ZeroOversample);
        }
        if self.campaign.trials_per_position == 0 {
            return Err(ScenarioError::ZeroTrials);
        }
        if self.campaign.estimates_per_gnb_per_trial == 0 {
            return Err(ScenarioError::ZeroEstimates);
        }
        let native_bins =
            (self.estimator.native_sample_rate_hz / self.deployment.scs_hz).round() as usize;
        let subcarriers = self.deployment.n_prb * SUBCARRIERS_PER_PRB;
        if subcarriers > native_bins {
            return Err(ScenarioError::BandExceedsNativeRate {
                subcarriers,
                native_bins,
            });
        }
        if self.channel.echoes_per_gnb.len() > n {
            return Err(ScenarioError::EchoListTooLong {
                expected: n,
                got: self.channel.echoes_per_gnb.len(),
            });
        }
        for echoes in &self.channel.echoes_per_gnb {
            for e in echoes {
                if e.excess_delay_s <= 0.0 || !e.excess_delay_s.is_finite() {
                    return Err(ScenarioError::BadEchoDelay);
                }
            }
        }
        if self
            .campaign
            .calibration_positions
            .iter()
            .chain(&self.campaign.test_positions)
            .any(|p| !p.is_finite())
        {
            return Err(ScenarioError::NonFinitePosition);
        }
        for (ci, cal) in self.campaign.calibration_positions.iter().enumerate() {
            for (ti, test) in self.campaign.test_positions.iter().enumerate() {
                if cal == test {
                    return Err(ScenarioError::OverlappingPositionSets {
                        cal_index: ci,
                        test_index: ti,
                    });
                }
            }
        }
        self.check_unambiguous_range()?;
        self.check_hyperbola_feasibility()?;
        Ok(())
    }

    /// Worst-case TOA of every (position, gNB) pair must stay inside the
    /// circular range of the inverse transform, [0, 1/scs).
    fn check_unambiguous_range(&self) -> Result<(), ScenarioError> {
        let range_s = 1.0 / self.deployment.scs_hz;
        let (phi_lo, phi_hi) = self.phi_bounds();
        let (delta_lo, delta_hi) = self.delta_bounds();
        let guard = 8.0 * self.noise_sigma_s;
        let max_excess = self
            .channel
            .echoes_per_gnb
            .iter()
            .flatten()
            .map(|e| e.excess_delay_s)
            .fold(0.0f64, f64::max);
        for pos in self
            .campaign
            .calibration_positions
            .iter()
            .chain(&self.campaign.test_positions)
        {
            for gnb_id in 1..=self.deployment.n_gnbs() {
                let tof = time_of_flight(self.deployment.position(gnb_id), *pos);
                let min_s = tof + phi_lo + delta_lo - guard;
                let max_s = tof + phi_hi + delta_hi + guard + max_excess;
                if min_s < 0.0 || max_s >= range_s {
                    return Err(ScenarioError::DelayOutsideUnambiguousRange {
                        gnb_id,
                        x_m: pos.x,
                        y_m: pos.y,
                        min_s,
                        max_s,
                        range_s,
                    });
                }
            }
        }
        Ok(())
    }

    /// Pre-checks that no scenario position can produce |a| ≥ d even with a
    /// worst-case uncorrected offset plus noise and quantization slack.
    fn check_hyperbola_feasibility(&self) -> Result<(), ScenarioError> {
        let margin_s =
            self.max_abs_delta_s() + 6.0 * self.noise_sigma_s + 2.0 * self.estimator.tap_spacing_s();
        for pos in self
            .campaign
            .calibration_positions
            .iter()
            .chain(&self.campaign.test_positions)
        {
            for gnb_id in self.deployment.non_reference_ids() {
                let gnb = self.deployment.position(gnb_id);
                let reference = self.deployment.reference();
                let rstd = crate::timing::true_rstd(gnb, reference, *pos);
                let d_m = crate::model::euclidean_distance(gnb, reference) / 2.0;
                let worst_a_m = 0.5 * SPEED_OF_LIGHT * (rstd.abs() + margin_s);
                if worst_a_m >= d_m {
                    return Err(ScenarioError::HyperbolaInfeasible {
                        gnb_id,
                        x_m: pos.x,
                        y_m: pos.y,
                        worst_a_m,
                        d_m,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Per-(trial, gNB) TOA summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToaStats {
    pub trial_id: usize,
    pub gnb_id: usize,
    pub mean_s: f64,
    pub std_s: f64,
    pub count: usize,
}

/// Outcome of one test position.
#[derive(Debug, Clone, PartialEq)]
pub enum PositionOutcome {
    Estimated(PositionEstimate),
    InvalidHyperbola { gnb_id: usize },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionReport {
    pub position_id: usize,
    pub truth: Position2D,
    pub trial_id: usize,
    pub rstds: Vec<RstdRecord>,
    pub outcome: PositionOutcome,
}

impl PositionReport {
    pub fn error_m(&self) -> Option<f64> {
        match &self.outcome {
            PositionOutcome::Estimated(est) => {
                Some(crate::model::euclidean_distance(est.position, self.truth))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositioningReport {
    pub positions: Vec<PositionReport>,
    /// RMSE over the positions that produced an estimate.
    pub rmse_m: Option<f64>,
    /// Positions skipped for invalid hyperbolas.
    pub skipped: usize,
}

/// Everything one session produces.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub toa_records: Vec<ToaRecord>,
    pub toa_stats: Vec<ToaStats>,
    /// Ground-truth inter-gNB offsets of the session.
    pub true_delta_s: Vec<f64>,
    pub calibration: CalibrationResult,
    pub positioning: PositioningReport,
    pub airtime_per_gnb_s: f64,
    pub airtime_per_trial_s: f64,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Tdoa(#[from] TdoaError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Prs(#[from] PrsError),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
}

/// One gNB-initialization epoch: the inter-gNB offsets are drawn here and
/// stay fixed for the session's lifetime.
pub struct Session {
    config: ScenarioConfig,
    true_delta_s: Vec<f64>,
}

impl Session {
    pub fn new(config: ScenarioConfig) -> Result<Self, ScenarioError> {
        config.validate()?;
        let n = config.deployment.n_gnbs();
        let true_delta_s = match &config.delta {
            OffsetsSpec::FixedDeltas(list) => list.clone(),
            OffsetsSpec::DrawDeltas { bound } => {
                let mut rng = rng::stream(config.seed, tag::DELTA, &[]);
                let mut deltas = vec![0.0];
                deltas.extend((1..n).map(|_| rng.gen_range(-bound..=*bound)));
                deltas
            }
        };
        Ok(Self {
            config,
            true_delta_s,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Ground-truth inter-gNB offsets in effect for this session.
    pub fn true_delta_s(&self) -> &[f64] {
        &self.true_delta_s
    }

    fn phi_for_trial(&self, trial_id: usize) -> f64 {
        match self.config.phi {
            ValueSpec::Fixed(v) => v,
            ValueSpec::DrawUniform { bound } => {
                let mut rng = rng::stream(self.config.seed, tag::PHI, &[trial_id as u64]);
                rng.gen_range(-bound..=bound)
            }
        }
    }

    fn quantize(&self, toa_s: f64) -> f64 {
        if self.config.estimator.quantize_toa {
            let q = self.config.estimator.tap_spacing_s();
            (toa_s / q).round() * q
        } else {
            toa_s
        }
    }

    /// All TOA cycles of one (trial, position): gNBs transmit one at a time.
    fn trial_records(&self, trial_id: usize, position_id: usize, ue: Position2D) -> Vec<ToaRecord> {
        let offsets = TimingOffsets {
            phi_s: self.phi_for_trial(trial_id),
            delta_s: self.true_delta_s.clone(),
            noise_sigma_s: self.config.noise_sigma_s,
        };
        let n_est = self.config.campaign.estimates_per_gnb_per_trial;
        let mut records = Vec::with_capacity(self.config.deployment.n_gnbs() * n_est);
        for gnb_id in 1..=self.config.deployment.n_gnbs() {
            let tof = time_of_flight(self.config.deployment.position(gnb_id), ue);
            let mut noise_rng = rng::stream(
                self.config.seed,
                tag::TOA_NOISE,
                &[trial_id as u64, gnb_id as u64],
            );
            for _ in 0..n_est {
                let toa = simulate_toa(tof, &offsets, gnb_id, &mut noise_rng);
                records.push(ToaRecord {
                    trial_id,
                    ue_position_id: position_id,
                    gnb_id,
                    toa_s: self.quantize(toa),
                    true_tof_s: tof,
                });
            }
        }
        records
    }

    /// Calibration campaign records: `trials_per_position` UE restarts at
    /// each known position.
    pub fn calibration_records(&self) -> Vec<ToaRecord> {
        let trials = self.config.campaign.trials_per_position;
        let tasks: Vec<(usize, usize, Position2D)> = self
            .config
            .campaign
            .calibration_positions
            .iter()
            .enumerate()
            .flat_map(|(pos_id, &pos)| {
                (0..trials).map(move |t| (pos_id * trials + t, pos_id, pos))
            })
            .collect();
        map_collect(&tasks, |&(trial_id, pos_id, pos)| {
            self.trial_records(trial_id, pos_id, pos)
        })
        .into_iter()
        .flatten()
        .collect()
    }

    /// Runs the calibration campaign and estimates the inter-gNB offsets.
    pub fn run_calibration(&self) -> Result<CalibrationResult, HarnessError> {
        let records = self.calibration_records();
        Ok(calibrate(
            &records,
            &self.config.deployment,
            &self.config.campaign.calibration_positions,
        )?)
    }

    /// First trial id not used by the calibration campaign.
    fn positioning_trial_base(&self) -> usize {
        self.config.campaign.calibration_positions.len() * self.config.campaign.trials_per_position
    }

    /// Positioning campaign: per test position, a fresh trial of TOAs, mean
    /// per gNB, measured → corrected RSTDs, then the solver. Invalid
    /// hyperbolas are recorded and skipped, not fatal.
    pub fn run_positioning(
        &self,
        calibration: &CalibrationResult,
    ) -> (Vec<ToaRecord>, PositioningReport) {
        let base = self.positioning_trial_base();
        let n_cal_pos = self.config.campaign.calibration_positions.len();
        let tasks: Vec<(usize, usize, Position2D)> = self
            .config
            .campaign
            .test_positions
            .iter()
            .enumerate()
            .map(|(i, &pos)| (base + i, n_cal_pos + i, pos))
            .collect();
        let per_position = map_collect(&tasks, |&(trial_id, pos_id, pos)| {
            let records = self.trial_records(trial_id, pos_id, pos);
            let report = self.solve_position(pos_id, pos, trial_id, &records, calibration);
            (records, report)
        });
        let mut all_records = Vec::new();
        let mut positions = Vec::new();
        for (records, report) in per_position {
            all_records.extend(records);
            positions.push(report);
        }
        let estimates: Vec<Position2D> = positions
            .iter()
            .filter_map(|p| match &p.outcome {
                PositionOutcome::Estimated(e) => Some(e.position),
                _ => None,
            })
            .collect();
        let truths: Vec<Position2D> = positions
            .iter()
            .filter(|p| matches!(p.outcome, PositionOutcome::Estimated(_)))
            .map(|p| p.truth)
            .collect();
        let rmse_m = crate::tdoa::rmse(&estimates, &truths).ok();
        let skipped = positions.len() - estimates.len();
        (
            all_records,
            PositioningReport {
                positions,
                rmse_m,
                skipped,
            },
        )
    }

    fn solve_position(
        &self,
        position_id: usize,
        truth: Position2D,
        trial_id: usize,
        records: &[ToaRecord],
        calibration: &CalibrationResult,
    ) -> PositionReport {
        let n = self.config.deployment.n_gnbs();
        let mut means = vec![0.0f64; n];
        let mut counts = vec![0usize; n];
        for r in records {
            means[r.gnb_id - 1] += r.toa_s;
            counts[r.gnb_id - 1] += 1;
        }
        for j in 0..n {
            means[j] /= counts[j].max(1) as f64;
        }
        let rstds: Vec<RstdRecord> = self
            .config
            .deployment
            .non_reference_ids()
            .map(|j| {
                RstdRecord::new(
                    j,
                    crate::timing::measured_rstd(means[j - 1], means[0]),
                    calibration.delta_hat_of(j),
                )
            })
            .collect();
        // validity gate: a corrected RSTD beyond the baseline means the
        // offset estimates are bad; flag instead of solving
        for r in &rstds {
            let gnb = self.config.deployment.position(r.gnb_id);
            if let Err(TdoaError::InvalidHyperbola { .. } | TdoaError::CoincidentFoci) =
                hyperbola_from_rstd(self.config.deployment.reference(), gnb, r.corrected_rstd_s)
            {
                return PositionReport {
                    position_id,
                    truth,
                    trial_id,
                    rstds: rstds.clone(),
                    outcome: PositionOutcome::InvalidHyperbola { gnb_id: r.gnb_id },
                };
            }
        }
        let outcome = match estimate_position(&self.config.deployment, &rstds, None) {
            Ok(est) => PositionOutcome::Estimated(est),
            Err(e) => PositionOutcome::Failed {
                reason: e.to_string(),
            },
        };
        PositionReport {
            position_id,
            truth,
            trial_id,
            rstds,
            outcome,
        }
    }

    /// Full session: calibration campaign, then positioning with the
    /// estimated offsets, then aggregation.
    pub fn run(&self) -> Result<TrialReport, HarnessError> {
        let cal_records = self.calibration_records();
        let calibration = calibrate(
            &cal_records,
            &self.config.deployment,
            &self.config.campaign.calibration_positions,
        )?;
        let (pos_records, positioning) = self.run_positioning(&calibration);
        let mut toa_records = cal_records;
        toa_records.extend(pos_records);
        let toa_stats = toa_stats(&toa_records);
        let airtime_per_gnb_s = self.config.campaign.estimates_per_gnb_per_trial as f64
            * self.config.prs.resource_set_period as f64
            * slot_duration_s(self.config.deployment.scs_hz);
        Ok(TrialReport {
            toa_stats,
            true_delta_s: self.true_delta_s.clone(),
            calibration,
            positioning,
            airtime_per_gnb_s,
            airtime_per_trial_s: airtime_per_gnb_s * self.config.deployment.n_gnbs() as f64,
            toa_records,
        })
    }
}

/// Convenience wrapper: build a session and run the whole experiment.
pub fn run_session(config: &ScenarioConfig) -> Result<TrialReport, HarnessError> {
    Session::new(config.clone())?.run()
}

/// Convenience wrapper for the calibration campaign alone.
pub fn run_calibration_campaign(config: &ScenarioConfig) -> Result<CalibrationResult, HarnessError> {
    Session::new(config.clone())?.run_calibration()
}

/// Convenience wrapper for the positioning campaign alone.
pub fn run_positioning_campaign(
    config: &ScenarioConfig,
    calibration: &CalibrationResult,
) -> Result<PositioningReport, HarnessError> {
    let session = Session::new(config.clone())?;
    Ok(session.run_positioning(calibration).1)
}

/// Groups records by (trial, gNB) and summarizes them, sorted by key.
pub fn toa_stats(records: &[ToaRecord]) -> Vec<ToaStats> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.trial_id, r.gnb_id)).or_default().push(r.toa_s);
    }
    groups
        .into_iter()
        .map(|((trial_id, gnb_id), toas)| {
            let n = toas.len();
            let mean = toas.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (toas.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            ToaStats {
                trial_id,
                gnb_id,
                mean_s: mean,
                std_s: std,
                count: n,
            }
        })
        .collect()
}

/// One bin of an exported TOA histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub trial_id: usize,
    pub gnb_id: usize,
    pub bin_lo_s: f64,
    pub bin_hi_s: f64,
    pub count: usize,
}

/// Bins TOA records per (trial, gNB) with fixed-width bins aligned to the
/// bin-width grid.
pub fn toa_histogram(records: &[ToaRecord], bin_width_s: f64) -> Vec<HistogramBin> {
    use std::collections::BTreeMap;
    assert!(bin_width_s > 0.0, "bin width must be positive");
    let mut groups: BTreeMap<(usize, usize), BTreeMap<i64, usize>> = BTreeMap::new();
    for r in records {
        let bin = (r.toa_s / bin_width_s).floor() as i64;
        *groups
            .entry((r.trial_id, r.gnb_id))
            .or_default()
            .entry(bin)
            .or_default() += 1;
    }
    let mut out = Vec::new();
    for ((trial_id, gnb_id), bins) in groups {
        for (bin, count) in bins {
            out.push(HistogramBin {
                trial_id,
                gnb_id,
                bin_lo_s: bin as f64 * bin_width_s,
                bin_hi_s: (bin + 1) as f64 * bin_width_s,
                count,
            });
        }
    }
    out
}

/// One row of a sweep study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// Value of the swept parameter (excess delay in seconds, SNR in dB, or
    /// the oversample factor itself).
    pub param_value: f64,
    pub oversample_factor: usize,
    /// Mean of (estimated TOA − true first-path delay) over the trials.
    pub toa_bias_s: f64,
    /// Standard deviation of the TOA error over the trials.
    pub toa_std_s: f64,
    pub trials: usize,
}

/// Point in a grid-pipeline study: one PRS cycle through channel,
/// estimation, interpolation, and peak detection.
///
/// Per trial the LOS delay is dithered uniformly over one native tap so the
/// reported bias measures the channel, not the luck of a single delay's
/// quantization phase. Dither and noise streams are keyed by the caller's
/// site indices, never by the oversample factor, so factor sweeps see
/// paired inputs.
fn grid_toa_error(
    config: &ScenarioConfig,
    base_delay_s: f64,
    echoes: &[(f64, Complex64)],
    oversample_factor: usize,
    dither_site: u64,
    noise_site: u64,
    trial: usize,
) -> Result<f64, HarnessError> {
    let dep = &config.deployment;
    let schedule = build_schedule(&config.prs, dep.n_gnbs(), dep.scs_hz)?;
    let slot = schedule.slots_of(1)[0];
    let tx = map_prs_to_grid(&config.prs, dep, 1, slot)?;

    let native_tap = 1.0 / config.estimator.native_sample_rate_hz;
    let mut dither_rng = rng::stream(config.seed, tag::DITHER, &[dither_site, trial as u64]);
    let dither: f64 = dither_rng.gen_range(0.0..native_tap);
    let truth = base_delay_s + dither;

    let mut taps = vec![ChannelTap {
        delay_s: truth,
        gain: Complex64::new(1.0, 0.0),
    }];
    for &(excess, gain) in echoes {
        if excess == 0.0 {
            // coincident echo merges into the direct tap
            taps[0].gain += gain;
        } else {
            taps.push(ChannelTap {
                delay_s: truth + excess,
                gain,
            });
        }
    }
    let profile = ChannelProfile::from_taps(taps)?;
    let noise = NoiseSpec {
        snr_db: config.channel.snr_db,
        rng_seed: rng::derive_seed(config.seed, tag::GRID_NOISE, &[noise_site, trial as u64]),
    };
    let rx = apply_channel(&tx, &profile, &noise);
    let cfr = estimate_cfr(&rx, &tx)?;
    let cir = interpolate_cir(&cfr, oversample_factor, config.estimator.native_sample_rate_hz)?;
    let est = detect_toa(&cir, config.estimator.detection_mode)?;
    Ok(est.toa_s - truth)
}

fn study_base_delay(config: &ScenarioConfig) -> f64 {
    let ue = config
        .campaign
        .test_positions
        .first()
        .or_else(|| config.campaign.calibration_positions.first())
        .copied()
        .unwrap_or(Position2D::new(30.0, 40.0));
    time_of_flight(config.deployment.position(1), ue)
}

fn summarize(errors: &[f64]) -> (f64, f64) {
    let n = errors.len();
    let mean = errors.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Two-tap multipath study over a list of excess delays, at oversample
/// factors 1 and the configured one, through the full grid pipeline.
///
/// `echo_gain` is the complex amplitude of the echo relative to the direct
/// path; a zero gain reduces every point to the single-tap channel.
pub fn run_multipath_study(
    config: &ScenarioConfig,
    excess_delay_sweep: &[f64],
    echo_gain: Complex64,
) -> Result<Vec<SweepRow>, HarnessError> {
    config.validate()?;
    let factors = if config.estimator.oversample_factor == 1 {
        vec![1]
    } else {
        vec![1, config.estimator.oversample_factor]
    };
    let base_delay = study_base_delay(config);
    let trials = config.campaign.trials_per_position;
    let points: Vec<(usize, f64, usize)> = excess_delay_sweep
        .iter()
        .enumerate()
        .flat_map(|(i, &excess)| factors.iter().map(move |&f| (i, excess, f)))
        .collect();
    let rows: Vec<Result<SweepRow, HarnessError>> = map_collect(&points, |&(i, excess, factor)| {
        let echoes = if echo_gain.norm_sqr() == 0.0 {
            vec![]
        } else {
            vec![(excess, echo_gain)]
        };
        let errors: Vec<f64> = (0..trials)
            .map(|t| grid_toa_error(config, base_delay, &echoes, factor, i as u64, i as u64, t))
            .collect::<Result<_, _>>()?;
        let (mean, std) = summarize(&errors);
        Ok(SweepRow {
            param_value: excess,
            oversample_factor: factor,
            toa_bias_s: mean,
            toa_std_s: std,
            trials,
        })
    });
    rows.into_iter().collect()
}

/// SNR sweep on the configured gNB-1 channel at the configured oversample
/// factor.
pub fn run_snr_sweep(config: &ScenarioConfig, snrs_db: &[f64]) -> Result<Vec<SweepRow>, HarnessError> {
    config.validate()?;
    let base_delay = study_base_delay(config);
    let echoes = configured_echoes(config);
    let trials = config.campaign.trials_per_position;
    let factor = config.estimator.oversample_factor;
    let points: Vec<(usize, f64)> = snrs_db.iter().copied().enumerate().collect();
    // dither is keyed by trial alone so the quantization-jitter component is
    // identical across SNR points and only the noise part moves the std
    let rows: Vec<Result<SweepRow, HarnessError>> = map_collect(&points, |&(i, snr)| {
        let mut cfg = config.clone();
        cfg.channel.snr_db = snr;
        let errors: Vec<f64> = (0..trials)
            .map(|t| grid_toa_error(&cfg, base_delay, &echoes, factor, 0, i as u64, t))
            .collect::<Result<_, _>>()?;
        let (mean, std) = summarize(&errors);
        Ok(SweepRow {
            param_value: snr,
            oversample_factor: factor,
            toa_bias_s: mean,
            toa_std_s: std,
            trials,
        })
    });
    rows.into_iter().collect()
}

/// Oversample-factor sweep on the configured gNB-1 channel.
pub fn run_oversample_sweep(
    config: &ScenarioConfig,
    factors: &[usize],
) -> Result<Vec<SweepRow>, HarnessError> {
    config.validate()?;
    let base_delay = study_base_delay(config);
    let echoes = configured_echoes(config);
    let trials = config.campaign.trials_per_position;
    // shared dither and noise across factors: a pure resolution comparison
    let points: Vec<(usize, usize)> = factors.iter().copied().enumerate().collect();
    let rows: Vec<Result<SweepRow, HarnessError>> = map_collect(&points, |&(_i, factor)| {
        let errors: Vec<f64> = (0..trials)
            .map(|t| grid_toa_error(config, base_delay, &echoes, factor, 0, 0, t))
            .collect::<Result<_, _>>()?;
        let (mean, std) = summarize(&errors);
        Ok(SweepRow {
            param_value: factor as f64,
            oversample_factor: factor,
            toa_bias_s: mean,
            toa_std_s: std,
            trials,
        })
    });
    rows.into_iter().collect()
}

fn configured_echoes(config: &ScenarioConfig) -> Vec<(f64, Complex64)> {
    config
        .channel
        .echoes_per_gnb
        .first()
        .map(|list| {
            list.iter()
                .map(|e| (e.excess_delay_s, Complex64::new(e.gain_re, e.gain_im)))
                .collect()
        })
        .unwrap_or_default()
}
