//! Downlink-PRS TDOA positioning simulator for 5G NR.
//!
//! The crate models the full measurement chain of a three-gNB / one-UE
//! positioning testbed:
//!
//! 1. [`prs`]: PRS sequence generation (TS 38.211 Gold sequences), comb
//!    mapping onto a resource grid, and non-overlapping slot scheduling.
//! 2. [`channel`]: multipath tap profiles, their frequency response over
//!    the PRS subcarriers, and seeded per-RE noise.
//! 3. [`estimator`]: least-squares channel estimation, zero-padded
//!    frequency-domain interpolation of the impulse response, and TOA
//!    extraction from the peak channel tap.
//! 4. [`timing`]: the TOA measurement model with UE-gNB offset `phi` and
//!    inter-gNB offsets `delta`, plus the RSTD-based offset calibration.
//! 5. [`tdoa`]: corrected-RSTD hyperbolas and the least-squares position
//!    solver.
//! 6. [`harness`]: seeded end-to-end campaigns (calibration, positioning,
//!    multipath studies) that tie the above together deterministically.
//!
//! All randomness flows from a single scenario seed through named child
//! streams, so any campaign is bit-reproducible. Campaign inner loops run
//! on rayon when the `parallel` feature (default) is enabled and fall back
//! to plain iterators otherwise; both orderings produce identical output.

pub mod channel;
pub mod config;
pub mod estimator;
pub mod harness;
pub mod model;
pub mod par;
pub mod prs;
pub mod rng;
pub mod tdoa;
pub mod timing;

pub use model::{euclidean_distance, time_of_flight, GnbDeployment, Position2D, SPEED_OF_LIGHT};
