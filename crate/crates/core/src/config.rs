//! Scenario configuration: the on-disk TOML schema and its validation.
//!
//! All numbers are SI (seconds, meters, Hz), so unit confusion fails here
//! at parse time instead of inside the math. A parsed file turns into a validated
//! [`crate::harness::ScenarioConfig`].

use crate::harness::{
    CampaignConfig, ChannelSpec, EchoSpec, EstimatorConfig, OffsetsSpec, ScenarioConfig, ValueSpec,
};
use crate::model::{GnbDeployment, Position2D};
use crate::prs::PrsConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Validation(#[from] crate::harness::ScenarioError),
}

/// Top-level file schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    pub deployment: DeploymentSection,
    pub prs: PrsConfig,
    pub offsets: OffsetsSection,
    #[serde(default)]
    pub channel: ChannelSection,
    pub estimator: EstimatorSection,
    pub campaign: CampaignSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentSection {
    pub gnb_positions_m: Vec<[f64; 2]>,
    pub carrier_hz: f64,
    pub scs_hz: f64,
    pub n_prb: usize,
}

/// Either a fixed value or symmetric uniform draw bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrawSection {
    #[serde(default)]
    pub fixed_s: Option<f64>,
    #[serde(default)]
    pub draw_bound_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffsetsSection {
    /// UE-gNB offset: fixed, or redrawn per trial within ±bound.
    pub phi: DrawSection,
    /// Inter-gNB offsets: explicit per-gNB list (entry 1 must be zero), or
    /// per-session draws within ±bound for the non-reference gNBs.
    #[serde(default)]
    pub delta_fixed_s: Option<Vec<f64>>,
    #[serde(default)]
    pub delta_draw_bound_s: Option<f64>,
    pub noise_sigma_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    /// Per-RE SNR for grid-level studies; `inf` disables noise.
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    /// Echoes per gNB, outer index = gNB id − 1. Missing entries mean LOS.
    #[serde(default)]
    pub echoes: Vec<Vec<EchoSection>>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            snr_db: default_snr(),
            echoes: Vec::new(),
        }
    }
}

fn default_snr() -> f64 {
    20.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoSection {
    pub excess_delay_s: f64,
    pub gain_re: f64,
    #[serde(default)]
    pub gain_im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub oversample_factor: usize,
    /// "max_peak" or "first_path".
    pub detection_mode: String,
    #[serde(default)]
    pub first_path_threshold_db: Option<f64>,
    pub native_sample_rate_hz: f64,
    /// Quantize campaign TOAs to the interpolated tap grid.
    #[serde(default = "default_true")]
    pub quantize_toa: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    pub calibration_positions_m: Vec<[f64; 2]>,
    pub test_positions_m: Vec<[f64; 2]>,
    pub trials_per_position: usize,
    pub estimates_per_gnb_per_trial: usize,
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Converts into a validated runtime config.
    pub fn into_scenario(self) -> Result<ScenarioConfig, ConfigError> {
        let deployment = GnbDeployment {
            positions: self
                .deployment
                .gnb_positions_m
                .iter()
                .map(|&p| Position2D::from(p))
                .collect(),
            carrier_hz: self.deployment.carrier_hz,
            scs_hz: self.deployment.scs_hz,
            n_prb: self.deployment.n_prb,
        };
        let phi = match (self.offsets.phi.fixed_s, self.offsets.phi.draw_bound_s) {
            (Some(v), None) => ValueSpec::Fixed(v),
            (None, Some(b)) => ValueSpec::DrawUniform { bound: b },
            _ => ValueSpec::Fixed(0.0),
        };
        let delta = match (self.offsets.delta_fixed_s, self.offsets.delta_draw_bound_s) {
            (Some(list), _) => OffsetsSpec::FixedDeltas(list),
            (None, Some(b)) => OffsetsSpec::DrawDeltas { bound: b },
            (None, None) => OffsetsSpec::FixedDeltas(vec![0.0; deployment.n_gnbs()]),
        };
        let mode = match self.estimator.detection_mode.as_str() {
            "max_peak" => crate::estimator::DetectionMode::MaxPeak,
            "first_path" => crate::estimator::DetectionMode::FirstPath {
                threshold_db: self.estimator.first_path_threshold_db.unwrap_or(10.0),
            },
            other => {
                return Err(crate::harness::ScenarioError::UnknownDetectionMode {
                    mode: other.to_string(),
                }
                .into())
            }
        };
        let echoes = self
            .channel
            .echoes
            .iter()
            .map(|per_gnb| {
                per_gnb
                    .iter()
                    .map(|e| EchoSpec {
                        excess_delay_s: e.excess_delay_s,
                        gain_re: e.gain_re,
                        gain_im: e.gain_im,
                    })
                    .collect()
            })
            .collect();
        let config = ScenarioConfig {
            seed: self.seed,
            deployment,
            prs: self.prs,
            phi,
            delta,
            noise_sigma_s: self.offsets.noise_sigma_s,
            channel: ChannelSpec {
                snr_db: self.channel.snr_db,
                echoes_per_gnb: echoes,
            },
            estimator: EstimatorConfig {
                oversample_factor: self.estimator.oversample_factor,
                detection_mode: mode,
                native_sample_rate_hz: self.estimator.native_sample_rate_hz,
                quantize_toa: self.estimator.quantize_toa,
            },
            campaign: CampaignConfig {
                calibration_positions: self
                    .campaign
                    .calibration_positions_m
                    .iter()
                    .map(|&p| Position2D::from(p))
                    .collect(),
                test_positions: self
                    .campaign
                    .test_positions_m
                    .iter()
                    .map(|&p| Position2D::from(p))
                    .collect(),
                trials_per_position: self.campaign.trials_per_position,
                estimates_per_gnb_per_trial: self.campaign.estimates_per_gnb_per_trial,
            },
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses and validates a scenario in one step.
pub fn load_scenario_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    ScenarioFile::from_toml_str(text)?.into_scenario()
}
