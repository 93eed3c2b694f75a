//! Planar deployment geometry and exact time-of-flight.
//!
//! Positions are 2D and in meters; timing quantities cross API boundaries
//! in seconds. The sub-nanosecond offsets the calibration deals with need
//! the full width of an `f64`, so nothing here is stored in samples.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in m/s, exact by SI definition.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point in the horizontal plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Position2D {
    fn from(p: [f64; 2]) -> Self {
        Self { x: p[0], y: p[1] }
    }
}

impl From<Position2D> for [f64; 2] {
    fn from(p: Position2D) -> Self {
        [p.x, p.y]
    }
}

/// Euclidean distance between two points, meters.
pub fn euclidean_distance(a: Position2D, b: Position2D) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Propagation time of the first arriving path between a gNB and the UE,
/// seconds. Zero only when the two points coincide.
pub fn time_of_flight(gnb: Position2D, ue: Position2D) -> f64 {
    euclidean_distance(gnb, ue) / SPEED_OF_LIGHT
}

/// The fixed set of transmitters plus the carrier parameters they share.
///
/// gNB ids are 1-based to match the usual j ∈ {1, 2, 3} convention; id 1
/// (stored at index 0) is always the timing reference. Use
/// [`GnbDeployment::position`] to look a gNB up by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbDeployment {
    /// gNB positions; index 0 is the reference gNB (id 1).
    pub positions: Vec<Position2D>,
    /// Carrier frequency, Hz (metadata only; the pipeline is baseband).
    pub carrier_hz: f64,
    /// Subcarrier spacing, Hz.
    pub scs_hz: f64,
    /// Carrier width in physical resource blocks.
    pub n_prb: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeploymentError {
    #[error("deployment needs at least 3 gNBs, got {0}")]
    TooFewGnbs(usize),
    #[error("gNB {a} and gNB {b} are co-located")]
    CoLocatedGnbs { a: usize, b: usize },
    #[error("non-finite gNB coordinate")]
    NonFinitePosition,
    #[error("subcarrier spacing must be positive")]
    NonPositiveScs,
    #[error("PRB count must be positive")]
    NoPrbs,
}

impl GnbDeployment {
    /// Number of gNBs.
    pub fn n_gnbs(&self) -> usize {
        self.positions.len()
    }

    /// Position of a gNB by 1-based id. Panics on an out-of-range id.
    pub fn position(&self, gnb_id: usize) -> Position2D {
        assert!(
            (1..=self.positions.len()).contains(&gnb_id),
            "gNB id {gnb_id} out of range 1..={}",
            self.positions.len()
        );
        self.positions[gnb_id - 1]
    }

    /// Position of the reference gNB (id 1).
    pub fn reference(&self) -> Position2D {
        self.positions[0]
    }

    /// Ids of all non-reference gNBs, in order.
    pub fn non_reference_ids(&self) -> impl Iterator<Item = usize> {
        2..=self.n_gnbs()
    }

    pub fn validate(&self) -> Result<(), DeploymentError> {
        if self.positions.len() < 3 {
            return Err(DeploymentError::TooFewGnbs(self.positions.len()));
        }
        if self.positions.iter().any(|p| !p.is_finite()) {
            return Err(DeploymentError::NonFinitePosition);
        }
        for i in 0..self.positions.len() {
            for j in i + 1..self.positions.len() {
                if euclidean_distance(self.positions[i], self.positions[j]) == 0.0 {
                    return Err(DeploymentError::CoLocatedGnbs { a: i + 1, b: j + 1 });
                }
            }
        }
        if self.scs_hz.is_nan() || self.scs_hz <= 0.0 {
            return Err(DeploymentError::NonPositiveScs);
        }
        if self.n_prb == 0 {
            return Err(DeploymentError::NoPrbs);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Position2D {
        Position2D::new(x, y)
    }

    #[test]
    fn speed_of_light_is_exact() {
        assert_eq!(SPEED_OF_LIGHT, 299_792_458.0);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean_distance(p(0.0, 0.0), p(0.0, 0.0)), 0.0);
        assert_eq!(euclidean_distance(p(0.0, 0.0), p(3.0, 4.0)), 5.0);
        // hand check: sqrt((−2−1)² + (1−5)²) = sqrt(9 + 16) = 5
        assert_eq!(euclidean_distance(p(-2.0, 1.0), p(1.0, 5.0)), 5.0);
    }

    #[test]
    fn time_of_flight_examples() {
        assert_relative_eq!(
            time_of_flight(p(0.0, 0.0), p(299.792458, 0.0)),
            1.0e-6,
            max_relative = 1e-15
        );
        assert_eq!(time_of_flight(p(5.0, 5.0), p(5.0, 5.0)), 0.0);
        // 50 m at light speed: 50 / 299792458 ≈ 166.78 ns
        let tof = time_of_flight(p(0.0, 0.0), p(30.0, 40.0));
        assert_eq!(tof, 50.0 / SPEED_OF_LIGHT);
        assert_relative_eq!(tof, 1.66782e-7, max_relative = 1e-5);
    }

    #[test]
    fn deployment_validation() {
        let mut d = GnbDeployment {
            positions: vec![p(0.0, 0.0), p(60.0, 0.0), p(30.0, 52.0)],
            carrier_hz: 3.6e9,
            scs_hz: 30e3,
            n_prb: 106,
        };
        assert!(d.validate().is_ok());
        assert_eq!(d.position(1), p(0.0, 0.0));
        assert_eq!(d.reference(), p(0.0, 0.0));
        assert_eq!(d.non_reference_ids().collect::<Vec<_>>(), vec![2, 3]);

        d.positions[2] = d.positions[0];
        assert_eq!(
            d.validate(),
            Err(DeploymentError::CoLocatedGnbs { a: 1, b: 3 })
        );
        d.positions.truncate(2);
        assert_eq!(d.validate(), Err(DeploymentError::TooFewGnbs(2)));
    }

    proptest! {
        #[test]
        fn distance_is_symmetric(ax in -1e4..1e4f64, ay in -1e4..1e4f64,
                                 bx in -1e4..1e4f64, by in -1e4..1e4f64) {
            let (a, b) = (p(ax, ay), p(bx, by));
            prop_assert_eq!(euclidean_distance(a, b), euclidean_distance(b, a));
            prop_assert!(euclidean_distance(a, b) >= 0.0);
        }

        #[test]
        fn triangle_inequality(ax in -1e4..1e4f64, ay in -1e4..1e4f64,
                               bx in -1e4..1e4f64, by in -1e4..1e4f64,
                               cx in -1e4..1e4f64, cy in -1e4..1e4f64) {
            let (a, b, c) = (p(ax, ay), p(bx, by), p(cx, cy));
            let lhs = euclidean_distance(a, c);
            let rhs = euclidean_distance(a, b) + euclidean_distance(b, c);
            // a few ulps of slack for the two extra roundings on the right
            prop_assert!(lhs <= rhs + 1e-9 * rhs.max(1.0));
        }

        #[test]
        fn tof_scales_linearly(x in 1e-3..1e4f64, y in 1e-3..1e4f64, k in 1e-3..1e3f64) {
            let base = time_of_flight(p(0.0, 0.0), p(x, y));
            let scaled = time_of_flight(p(0.0, 0.0), p(k * x, k * y));
            prop_assert!((scaled - k * base).abs() <= 1e-12 * scaled.abs().max(k * base));
        }
    }
}
