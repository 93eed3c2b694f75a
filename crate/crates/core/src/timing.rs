//! TOA measurement model and inter-gNB offset calibration.
//!
//! A measured TOA is tof + phi + delta_j + n: the geometric time of flight,
//! the UE-gNB offset that is redrawn whenever the UE restarts, the static
//! per-gNB offset relative to the reference gNB, and zero-mean Gaussian
//! noise. Differencing against the reference gNB cancels phi; averaging the
//! (measured RSTD − true RSTD) residual at known UE positions estimates the
//! per-gNB offsets.

use crate::model::{euclidean_distance, GnbDeployment, Position2D, SPEED_OF_LIGHT};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Clock offsets and noise level of one measurement session.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingOffsets {
    /// UE-gNB offset of the current UE session, seconds.
    pub phi_s: f64,
    /// Inter-gNB offsets indexed by gNB (entry 0 is the reference and must
    /// be exactly zero).
    pub delta_s: Vec<f64>,
    /// Standard deviation of the per-measurement TOA noise, seconds.
    pub noise_sigma_s: f64,
}

impl TimingOffsets {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.delta_s.is_empty() || self.delta_s[0] != 0.0 {
            return Err(CalibrationError::ReferenceOffsetNotZero);
        }
        if !self.phi_s.is_finite()
            || !self.noise_sigma_s.is_finite()
            || self.delta_s.iter().any(|d| !d.is_finite())
        {
            return Err(CalibrationError::NonFiniteOffset);
        }
        Ok(())
    }

    /// Offset of a 1-based gNB id.
    pub fn delta_of(&self, gnb_id: usize) -> f64 {
        self.delta_s[gnb_id - 1]
    }
}

/// One TOA measurement. `toa_s` may be negative: the offsets can outweigh
/// the time of flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToaRecord {
    pub trial_id: usize,
    pub ue_position_id: usize,
    /// 1-based gNB id; id 1 is the reference.
    pub gnb_id: usize,
    pub toa_s: f64,
    /// Ground-truth time of flight, available in simulation.
    pub true_tof_s: f64,
}

/// Inter-gNB offset estimates with their evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    /// Estimated offsets indexed by gNB; entry 0 is pinned to zero.
    pub delta_hat_s: Vec<f64>,
    /// TOA records consumed per gNB.
    pub sample_counts: Vec<usize>,
    /// Standard deviation of the per-position offset residuals, per gNB.
    pub residual_std_s: Vec<f64>,
    /// Number of distinct calibration positions used.
    pub positions_used: usize,
}

impl CalibrationResult {
    /// A do-nothing calibration (all offsets zero) for `n` gNBs.
    pub fn identity(n_gnbs: usize) -> Self {
        Self {
            delta_hat_s: vec![0.0; n_gnbs],
            sample_counts: vec![0; n_gnbs],
            residual_std_s: vec![0.0; n_gnbs],
            positions_used: 0,
        }
    }

    pub fn delta_hat_of(&self, gnb_id: usize) -> f64 {
        self.delta_hat_s[gnb_id - 1]
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("position {position_id} has no reference-gNB records")]
    MissingReference { position_id: usize },
    #[error("no calibration data for gNB {gnb_id}")]
    InsufficientData { gnb_id: usize },
    #[error("record references unknown position id {position_id}")]
    UnknownPosition { position_id: usize },
    #[error("record references gNB {gnb_id} outside the deployment")]
    UnknownGnb { gnb_id: usize },
    #[error("reference gNB offset must be exactly zero")]
    ReferenceOffsetNotZero,
    #[error("offsets must be finite")]
    NonFiniteOffset,
}

/// Draws one TOA per Eq.-of-motion of the testbed: tof + phi + delta_j plus
/// Gaussian noise from the given per-gNB stream.
pub fn simulate_toa(
    true_tof_s: f64,
    offsets: &TimingOffsets,
    gnb_id: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let noise = if offsets.noise_sigma_s > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        offsets.noise_sigma_s * z
    } else {
        0.0
    };
    true_tof_s + offsets.phi_s + offsets.delta_of(gnb_id) + noise
}

/// Measured RSTD: TOA of gNB j minus TOA of the reference gNB. The shared
/// UE offset phi cancels.
pub fn measured_rstd(toa_j_s: f64, toa_ref_s: f64) -> f64 {
    toa_j_s - toa_ref_s
}

/// True RSTD: difference of the times of flight.
pub fn true_rstd(gnb_j: Position2D, gnb_ref: Position2D, ue: Position2D) -> f64 {
    (euclidean_distance(gnb_j, ue) - euclidean_distance(gnb_ref, ue)) / SPEED_OF_LIGHT
}

/// Estimates the inter-gNB offsets from TOA records taken at known UE
/// positions.
///
/// Per position, the mean TOA of gNB j (within each trial, so one phi
/// realization) is differenced against the mean reference TOA and the true
/// RSTD; per-position residuals are then averaged with equal weight, which
/// is the 1/K form of the estimator. Records must pair each gNB with
/// reference records from the same (position, trial).
pub fn calibrate(
    records: &[ToaRecord],
    deployment: &GnbDeployment,
    known_positions: &[Position2D],
) -> Result<CalibrationResult, CalibrationError> {
    use std::collections::BTreeMap;
    let n = deployment.n_gnbs();
    for r in records {
        if r.gnb_id == 0 || r.gnb_id > n {
            return Err(CalibrationError::UnknownGnb { gnb_id: r.gnb_id });
        }
        if r.ue_position_id >= known_positions.len() {
            return Err(CalibrationError::UnknownPosition {
                position_id: r.ue_position_id,
            });
        }
    }

    // (position, trial) -> per-gNB (sum, count)
    let mut cells: BTreeMap<(usize, usize), Vec<(f64, usize)>> = BTreeMap::new();
    for r in records {
        let cell = cells
            .entry((r.ue_position_id, r.trial_id))
            .or_insert_with(|| vec![(0.0, 0); n]);
        cell[r.gnb_id - 1].0 += r.toa_s;
        cell[r.gnb_id - 1].1 += 1;
    }

    // per-gNB residuals, one entry per (position, trial) cell
    let mut residuals: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut sample_counts = vec![0usize; n];
    let mut positions = std::collections::BTreeSet::new();
    for (&(pos_id, _trial), cell) in &cells {
        let (ref_sum, ref_count) = cell[0];
        if ref_count == 0 {
            return Err(CalibrationError::MissingReference { position_id: pos_id });
        }
        sample_counts[0] += ref_count;
        positions.insert(pos_id);
        let ref_mean = ref_sum / ref_count as f64;
        let ue = known_positions[pos_id];
        for j in 2..=n {
            let (sum, count) = cell[j - 1];
            if count == 0 {
                continue;
            }
            let mean = sum / count as f64;
            let expected = true_rstd(deployment.position(j), deployment.reference(), ue);
            residuals[j - 1].push(measured_rstd(mean, ref_mean) - expected);
            sample_counts[j - 1] += count;
        }
    }

    let mut delta_hat_s = vec![0.0; n];
    let mut residual_std_s = vec![0.0; n];
    for j in 2..=n {
        let res = &residuals[j - 1];
        if res.is_empty() {
            return Err(CalibrationError::InsufficientData { gnb_id: j });
        }
        let mean = res.iter().sum::<f64>() / res.len() as f64;
        delta_hat_s[j - 1] = mean;
        if res.len() > 1 {
            let var = res.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (res.len() - 1) as f64;
            residual_std_s[j - 1] = var.sqrt();
        }
    }
    Ok(CalibrationResult {
        delta_hat_s,
        sample_counts,
        residual_std_s,
        positions_used: positions.len(),
    })
}
