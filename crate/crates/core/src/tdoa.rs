//! Corrected-RSTD hyperbolas and least-squares position estimation.
//!
//! Each non-reference gNB contributes one hyperbola with foci at itself and
//! the reference gNB; a = (c/2)·RSTD′ and b² = d² − a². The solver does not
//! intersect sampled hyperbolas; it runs damped Gauss-Newton on the
//! range-difference residuals, which has the same minimizer on exact data
//! and still returns a sensible point when noisy hyperbolas fail to
//! intersect. Sign convention: rstd′_j = τ_j − τ_ref, so a point closer to
//! gNB j than to the reference has negative rstd′.

use crate::model::{euclidean_distance, GnbDeployment, Position2D, SPEED_OF_LIGHT};
use thiserror::Error;

/// A corrected RSTD measurement for one non-reference gNB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RstdRecord {
    /// 1-based gNB id; never the reference.
    pub gnb_id: usize,
    /// Measured RSTD, seconds.
    pub rstd_s: f64,
    /// Measured RSTD minus the calibrated offset estimate, seconds.
    pub corrected_rstd_s: f64,
}

impl RstdRecord {
    pub fn new(gnb_id: usize, rstd_s: f64, delta_hat_s: f64) -> Self {
        Self {
            gnb_id,
            rstd_s,
            corrected_rstd_s: correct_rstd(rstd_s, delta_hat_s),
        }
    }
}

/// Applies the calibrated offset: measured minus delta-hat.
pub fn correct_rstd(measured_s: f64, delta_hat_j_s: f64) -> f64 {
    measured_s - delta_hat_j_s
}

/// One TDOA locus in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolaParams {
    /// Signed semi-major axis, a = (c/2)·rstd′, meters.
    pub a_m: f64,
    /// Semi-minor axis, b = sqrt(d² − a²), meters.
    pub b_m: f64,
    /// Rotation of the focal axis, radians.
    pub theta_rad: f64,
    /// Midpoint of the foci.
    pub center: Position2D,
    /// Half the focal separation, meters.
    pub d_m: f64,
    pub focus_ref: Position2D,
    pub focus_j: Position2D,
}

#[derive(Debug, Error, PartialEq)]
pub enum TdoaError {
    #[error("|a| = {a_m} m >= d = {d_m} m: corrected RSTD exceeds the baseline, invalid hyperbola")]
    InvalidHyperbola { a_m: f64, d_m: f64 },
    #[error("foci coincide; hyperbola undefined")]
    CoincidentFoci,
    #[error("need at least {needed} measurements, got {got}")]
    NotEnoughMeasurements { needed: usize, got: usize },
    #[error("gNB geometry is degenerate (collinear) at the solution")]
    DegenerateGeometry,
    #[error("estimate/truth lists differ in length: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("record references gNB {gnb_id} outside the deployment, or the reference")]
    BadGnbId { gnb_id: usize },
}

/// Builds the hyperbola for one corrected RSTD.
///
/// Fails with [`TdoaError::InvalidHyperbola`] when a² ≥ d², the signature of
/// an invalid offset estimate.
pub fn hyperbola_from_rstd(
    gnb_ref: Position2D,
    gnb_j: Position2D,
    corrected_rstd_s: f64,
) -> Result<HyperbolaParams, TdoaError> {
    let separation = euclidean_distance(gnb_ref, gnb_j);
    if separation == 0.0 {
        return Err(TdoaError::CoincidentFoci);
    }
    let d_m = separation / 2.0;
    let a_m = 0.5 * SPEED_OF_LIGHT * corrected_rstd_s;
    if a_m.abs() >= d_m {
        return Err(TdoaError::InvalidHyperbola { a_m, d_m });
    }
    let b_m = (d_m * d_m - a_m * a_m).sqrt();
    Ok(HyperbolaParams {
        a_m,
        b_m,
        theta_rad: (gnb_j.y - gnb_ref.y).atan2(gnb_j.x - gnb_ref.x),
        center: Position2D::new((gnb_j.x + gnb_ref.x) / 2.0, (gnb_j.y + gnb_ref.y) / 2.0),
        d_m,
        focus_ref: gnb_ref,
        focus_j: gnb_j,
    })
}

/// Samples the branch the UE lies on.
///
/// In the rotated frame the branch is (−a·cosh t, b·sinh t): for rstd′ > 0
/// it opens towards the reference gNB, for rstd′ < 0 towards gNB j, and for
/// rstd′ = 0 it degenerates to the perpendicular bisector. Every sample
/// satisfies d(p, focus_j) − d(p, focus_ref) = c·rstd′.
pub fn hyperbola_points(params: &HyperbolaParams, t_range: (f64, f64), n: usize) -> Vec<Position2D> {
    assert!(n >= 2, "need at least two samples");
    let (t_min, t_max) = t_range;
    let (sin_t, cos_t) = params.theta_rad.sin_cos();
    (0..n)
        .map(|i| {
            let t = t_min + (t_max - t_min) * i as f64 / (n - 1) as f64;
            let x = -params.a_m * t.cosh();
            let y = params.b_m * t.sinh();
            Position2D::new(
                cos_t * x - sin_t * y + params.center.x,
                sin_t * x + cos_t * y + params.center.y,
            )
        })
        .collect()
}

/// Result of a position solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate {
    pub position: Position2D,
    /// Euclidean norm of the range-difference residual vector, meters.
    pub residual_norm_m: f64,
    pub iterations: usize,
    pub converged: bool,
}

const MAX_ITERATIONS: usize = 100;
const STEP_TOLERANCE_M: f64 = 1e-6;

/// Estimates the UE position from corrected RSTDs by minimizing
/// Σ_j (c·rstd′_j − (d(gnb_j, p) − d(gnb_ref, p)))².
///
/// Without an initial guess, the iteration multi-starts from the best
/// distinct cells of a coarse grid over the deployment bounding box
/// (inflated by 50%, pitch 1/20 of the diagonal) and keeps the lowest-cost
/// result: that avoids both the mirror-image local minimum of
/// two-hyperbola geometry and the far-field plateau along hyperbola
/// asymptotes where the cost also decays. Steps are capped at a tenth of
/// the search diagonal so a single descent cannot run off the map.
/// Non-convergence is reported through the `converged` flag, not an error.
pub fn estimate_position(
    deployment: &GnbDeployment,
    corrected_rstds: &[RstdRecord],
    initial_guess: Option<Position2D>,
) -> Result<PositionEstimate, TdoaError> {
    if corrected_rstds.len() < 2 {
        return Err(TdoaError::NotEnoughMeasurements {
            needed: 2,
            got: corrected_rstds.len(),
        });
    }
    let n_gnbs = deployment.n_gnbs();
    for r in corrected_rstds {
        if r.gnb_id <= 1 || r.gnb_id > n_gnbs {
            return Err(TdoaError::BadGnbId { gnb_id: r.gnb_id });
        }
    }
    let reference = deployment.reference();
    let range_diffs: Vec<(Position2D, f64)> = corrected_rstds
        .iter()
        .map(|r| {
            (
                deployment.position(r.gnb_id),
                SPEED_OF_LIGHT * r.corrected_rstd_s,
            )
        })
        .collect();

    let cost = |p: Position2D| -> f64 {
        range_diffs
            .iter()
            .map(|&(gnb, rd)| {
                let r = rd - (euclidean_distance(gnb, p) - euclidean_distance(reference, p));
                r * r
            })
            .sum()
    };

    let region = SearchRegion::around(deployment);
    let starts = match initial_guess {
        Some(p) => vec![p],
        None => region.seed_points(&cost),
    };

    let runs: Vec<(f64, Position2D, usize, bool)> = starts
        .into_iter()
        .map(|start| {
            let (point, iterations, converged) =
                refine(start, &range_diffs, reference, &cost, region.step_cap_m);
            (cost(point), point, iterations, converged)
        })
        .collect();
    // Two branches can intersect twice; with exact data both intersections
    // are global minima. Among near-tied minima, take the one nearest the
    // deployment centroid: the service area is inside the anchor hull.
    let best_cost = runs.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let tie_bound = best_cost * 2.0 + 1e-16;
    let centroid = deployment_centroid(deployment);
    let (final_cost, point, iterations, converged) = runs
        .into_iter()
        .filter(|&(c, _, _, _)| c <= tie_bound)
        .min_by(|a, b| {
            euclidean_distance(a.1, centroid).total_cmp(&euclidean_distance(b.1, centroid))
        })
        .expect("at least one start");

    if !converged && collinear(deployment) && hessian_rank_deficient(&range_diffs, reference, point)
    {
        return Err(TdoaError::DegenerateGeometry);
    }

    Ok(PositionEstimate {
        position: point,
        residual_norm_m: final_cost.sqrt(),
        iterations,
        converged,
    })
}

/// Damped Gauss-Newton descent from one start; returns (point, iterations,
/// converged).
fn refine(
    start: Position2D,
    range_diffs: &[(Position2D, f64)],
    reference: Position2D,
    cost: &dyn Fn(Position2D) -> f64,
    step_cap_m: f64,
) -> (Position2D, usize, bool) {
    let mut point = start;
    let mut lambda = 1e-9;
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        iterations += 1;
        // residuals and Jacobian of rd - (d_j(p) - d_ref(p))
        let d_ref = euclidean_distance(reference, point).max(1e-12);
        let u_ref = (
            (point.x - reference.x) / d_ref,
            (point.y - reference.y) / d_ref,
        );
        let mut jtj = [[0.0f64; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for &(gnb, rd) in range_diffs {
            let d_j = euclidean_distance(gnb, point).max(1e-12);
            let u_j = ((point.x - gnb.x) / d_j, (point.y - gnb.y) / d_j);
            let r = rd - (d_j - d_ref);
            let jx = -(u_j.0 - u_ref.0);
            let jy = -(u_j.1 - u_ref.1);
            jtj[0][0] += jx * jx;
            jtj[0][1] += jx * jy;
            jtj[1][0] += jy * jx;
            jtj[1][1] += jy * jy;
            jtr[0] += jx * r;
            jtr[1] += jy * r;
        }

        // damped normal equations; retry with more damping on a bad step
        let mut stepped = false;
        for _ in 0..8 {
            let a00 = jtj[0][0] + lambda;
            let a11 = jtj[1][1] + lambda;
            let det = a00 * a11 - jtj[0][1] * jtj[1][0];
            if det.abs() < 1e-30 {
                lambda = (lambda * 10.0).max(1e-12);
                continue;
            }
            let mut dx = (-jtr[0] * a11 + jtr[1] * jtj[0][1]) / det;
            let mut dy = (jtr[0] * jtj[1][0] - jtr[1] * a00) / det;
            let mut step = (dx * dx + dy * dy).sqrt();
            if step > step_cap_m {
                let scale = step_cap_m / step;
                dx *= scale;
                dy *= scale;
                step = step_cap_m;
            }
            let candidate = Position2D::new(point.x + dx, point.y + dy);
            if cost(candidate) <= cost(point) {
                point = candidate;
                lambda = (lambda / 10.0).max(1e-12);
                stepped = true;
                if step < STEP_TOLERANCE_M {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !stepped {
            // no damping level yields descent: already stationary
            converged = converged || cost(point).sqrt() < 1e-9;
            break;
        }
        if converged {
            break;
        }
    }
    (point, iterations, converged)
}

fn deployment_centroid(deployment: &GnbDeployment) -> Position2D {
    let n = deployment.positions.len() as f64;
    Position2D::new(
        deployment.positions.iter().map(|p| p.x).sum::<f64>() / n,
        deployment.positions.iter().map(|p| p.y).sum::<f64>() / n,
    )
}

struct SearchRegion {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    pitch_m: f64,
    step_cap_m: f64,
}

impl SearchRegion {
    /// Deployment bounding box inflated by 50% on each side.
    fn around(deployment: &GnbDeployment) -> Self {
        let xs: Vec<f64> = deployment.positions.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = deployment.positions.iter().map(|p| p.y).collect();
        let (x_min, x_max) = bounds(&xs);
        let (y_min, y_max) = bounds(&ys);
        let (w, h) = ((x_max - x_min).max(1.0), (y_max - y_min).max(1.0));
        let x_lo = x_min - 0.5 * w;
        let x_hi = x_max + 0.5 * w;
        let y_lo = y_min - 0.5 * h;
        let y_hi = y_max + 0.5 * h;
        let diagonal = ((x_hi - x_lo).powi(2) + (y_hi - y_lo).powi(2)).sqrt();
        Self {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            pitch_m: diagonal / 20.0,
            step_cap_m: diagonal / 10.0,
        }
    }

    /// Best grid cells by cost, keeping only cells at least two pitches
    /// apart so the starts probe distinct basins.
    fn seed_points(&self, cost: &dyn Fn(Position2D) -> f64) -> Vec<Position2D> {
        const STEPS: usize = 20;
        const STARTS: usize = 6;
        let mut cells: Vec<(f64, Position2D)> = Vec::with_capacity((STEPS + 1) * (STEPS + 1));
        for i in 0..=STEPS {
            for j in 0..=STEPS {
                let p = Position2D::new(
                    self.x_lo + (self.x_hi - self.x_lo) * i as f64 / STEPS as f64,
                    self.y_lo + (self.y_hi - self.y_lo) * j as f64 / STEPS as f64,
                );
                cells.push((cost(p), p));
            }
        }
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut starts: Vec<Position2D> = Vec::with_capacity(STARTS);
        for (_, p) in cells {
            if starts.len() == STARTS {
                break;
            }
            if starts
                .iter()
                .all(|s| euclidean_distance(*s, p) >= 2.0 * self.pitch_m)
                || starts.is_empty()
            {
                starts.push(p);
            }
        }
        starts
    }
}

fn bounds(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &x| {
        (acc.0.min(x), acc.1.max(x))
    })
}

fn collinear(deployment: &GnbDeployment) -> bool {
    let p = &deployment.positions;
    if p.len() < 3 {
        return true;
    }
    let (a, b) = (p[0], p[1]);
    p[2..].iter().all(|&c| {
        let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        cross.abs() < 1e-9 * euclidean_distance(a, b).max(1.0)
    })
}

fn hessian_rank_deficient(
    range_diffs: &[(Position2D, f64)],
    reference: Position2D,
    point: Position2D,
) -> bool {
    let d_ref = euclidean_distance(reference, point).max(1e-12);
    let u_ref = ((point.x - reference.x) / d_ref, (point.y - reference.y) / d_ref);
    let mut jtj = [[0.0f64; 2]; 2];
    for &(gnb, _) in range_diffs {
        let d_j = euclidean_distance(gnb, point).max(1e-12);
        let jx = -((point.x - gnb.x) / d_j - u_ref.0);
        let jy = -((point.y - gnb.y) / d_j - u_ref.1);
        jtj[0][0] += jx * jx;
        jtj[0][1] += jx * jy;
        jtj[1][0] += jy * jx;
        jtj[1][1] += jy * jy;
    }
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    let scale = (jtj[0][0] + jtj[1][1]).max(1e-30);
    det / (scale * scale) < 1e-12
}

/// Root-mean-square Euclidean error between paired estimates and truths.
pub fn rmse(estimates: &[Position2D], truths: &[Position2D]) -> Result<f64, TdoaError> {
    if estimates.len() != truths.len() || estimates.is_empty() {
        return Err(TdoaError::LengthMismatch {
            a: estimates.len(),
            b: truths.len(),
        });
    }
    let sum_sq: f64 = estimates
        .iter()
        .zip(truths)
        .map(|(e, t)| euclidean_distance(*e, *t).powi(2))
        .sum();
    Ok((sum_sq / estimates.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timing::true_rstd;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Position2D {
        Position2D::new(x, y)
    }

    fn deployment() -> GnbDeployment {
        GnbDeployment {
            positions: vec![p(0.0, 0.0), p(60.0, 0.0), p(30.0, 52.0)],
            carrier_hz: 3.6e9,
            scs_hz: 30e3,
            n_prb: 106,
        }
    }

    /// Exact corrected RSTDs from the forward model.
    fn exact_rstds(dep: &GnbDeployment, ue: Position2D) -> Vec<RstdRecord> {
        dep.non_reference_ids()
            .map(|j| {
                let rstd = true_rstd(dep.position(j), dep.reference(), ue);
                RstdRecord::new(j, rstd, 0.0)
            })
            .collect()
    }

    #[test]
    fn correct_rstd_examples() {
        assert_eq!(correct_rstd(41.2e-9, 41.2e-9), 0.0);
        assert_eq!(correct_rstd(5e-9, 0.0), 5e-9);
        assert_relative_eq!(correct_rstd(100e-9, 30.9e-9), 69.1e-9, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_hyperbola_is_the_bisector() {
        let h = hyperbola_from_rstd(p(0.0, 0.0), p(100.0, 0.0), 0.0).unwrap();
        assert_eq!(h.a_m, 0.0);
        assert_eq!(h.b_m, h.d_m);
        assert_eq!(h.d_m, 50.0);
        let pts = hyperbola_points(&h, (-1.0, 1.0), 11);
        for pt in pts {
            assert_abs_diff_eq!(pt.x, 50.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn oversized_rstd_is_invalid() {
        // (c/2) * 400 ns ≈ 59.96 m > d = 50 m
        let err = hyperbola_from_rstd(p(0.0, 0.0), p(100.0, 0.0), 400e-9).unwrap_err();
        match err {
            TdoaError::InvalidHyperbola { a_m, d_m } => {
                assert_relative_eq!(a_m, 59.9584916, max_relative = 1e-8);
                assert_eq!(d_m, 50.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            hyperbola_from_rstd(p(1.0, 2.0), p(1.0, 2.0), 0.0).unwrap_err(),
            TdoaError::CoincidentFoci
        );
    }

    #[test]
    fn uncorrected_offset_shifts_the_semi_major_axis() {
        // a 41.2 ns offset error moves |a| by (c/2)*41.2 ns ≈ 6.18 m
        let g1 = p(0.0, 0.0);
        let g2 = p(60.0, 0.0);
        let rstd = 50e-9;
        let clean = hyperbola_from_rstd(g1, g2, rstd).unwrap();
        let skewed = hyperbola_from_rstd(g1, g2, rstd + 41.2e-9).unwrap();
        let shift = skewed.a_m - clean.a_m;
        assert_abs_diff_eq!(shift, 6.18, epsilon = 0.01);
    }

    #[test]
    fn vertex_sits_at_a_from_center() {
        let h = hyperbola_from_rstd(p(0.0, 0.0), p(80.0, 30.0), 120e-9).unwrap();
        let vertex = hyperbola_points(&h, (0.0, 0.0), 2)[0];
        assert_relative_eq!(
            euclidean_distance(vertex, h.center),
            h.a_m.abs(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn canonical_form_at_zero_rotation() {
        // ref at (-d, 0), j at (+d, 0): theta = 0, center at the origin
        let h = hyperbola_from_rstd(p(-50.0, 0.0), p(50.0, 0.0), 150e-9).unwrap();
        assert_eq!(h.theta_rad, 0.0);
        assert_eq!(h.center, p(0.0, 0.0));
        for pt in hyperbola_points(&h, (-2.0, 2.0), 41) {
            let lhs = pt.x * pt.x / (h.a_m * h.a_m) - pt.y * pt.y / (h.b_m * h.b_m);
            assert_relative_eq!(lhs, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn sampled_points_satisfy_the_focal_property() {
        let cases = [
            (p(0.0, 0.0), p(60.0, 0.0), 80e-9),
            (p(0.0, 0.0), p(60.0, 0.0), -80e-9),
            (p(10.0, -20.0), p(-30.0, 45.0), 55e-9),
            (p(5.0, 5.0), p(35.0, 60.0), -110e-9),
        ];
        for (g_ref, g_j, rstd) in cases {
            let h = hyperbola_from_rstd(g_ref, g_j, rstd).unwrap();
            for pt in hyperbola_points(&h, (-3.0, 3.0), 101) {
                let diff = euclidean_distance(pt, g_j) - euclidean_distance(pt, g_ref);
                assert!(
                    (diff - SPEED_OF_LIGHT * rstd).abs() < 1e-6,
                    "focal property violated by {} m",
                    (diff - SPEED_OF_LIGHT * rstd).abs()
                );
            }
        }
    }

    #[test]
    fn centroid_of_equilateral_triangle_recovers_exactly() {
        let side = 60.0;
        let dep = GnbDeployment {
            positions: vec![
                p(0.0, 0.0),
                p(side, 0.0),
                p(side / 2.0, side * 3f64.sqrt() / 2.0),
            ],
            carrier_hz: 3.6e9,
            scs_hz: 30e3,
            n_prb: 106,
        };
        let centroid = p(side / 2.0, side * 3f64.sqrt() / 6.0);
        let rstds = exact_rstds(&dep, centroid);
        for r in &rstds {
            assert_abs_diff_eq!(r.corrected_rstd_s, 0.0, epsilon = 1e-18);
        }
        let est = estimate_position(&dep, &rstds, None).unwrap();
        assert!(est.converged);
        assert!(euclidean_distance(est.position, centroid) < 1e-6);
    }

    #[test]
    fn exact_data_recovers_in_hull_positions() {
        let dep = deployment();
        for ue in [p(25.0, 18.0), p(30.0, 30.0), p(40.0, 12.0), p(22.0, 35.0)] {
            let est = estimate_position(&dep, &exact_rstds(&dep, ue), None).unwrap();
            assert!(
                euclidean_distance(est.position, ue) < 1e-6,
                "ue {ue:?} recovered {:?}",
                est.position
            );
        }
    }

    #[test]
    fn collinear_geometry_is_degenerate() {
        let dep = GnbDeployment {
            positions: vec![p(0.0, 0.0), p(30.0, 0.0), p(60.0, 0.0)],
            carrier_hz: 3.6e9,
            scs_hz: 30e3,
            n_prb: 106,
        };
        // a point off the line cannot be told from its mirror image
        let ue = p(20.0, 25.0);
        let result = estimate_position(&dep, &exact_rstds(&dep, ue), None);
        match result {
            Err(TdoaError::DegenerateGeometry) => {}
            Ok(est) => {
                // mirror solutions share the residual; accept either side
                let mirror = p(ue.x, -ue.y);
                let err = euclidean_distance(est.position, ue)
                    .min(euclidean_distance(est.position, mirror));
                assert!(err < 1e-4, "collinear case drifted: {:?}", est.position);
            }
            Err(other) => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn not_enough_measurements() {
        let dep = deployment();
        let one = vec![RstdRecord::new(2, 10e-9, 0.0)];
        assert_eq!(
            estimate_position(&dep, &one, None).unwrap_err(),
            TdoaError::NotEnoughMeasurements { needed: 2, got: 1 }
        );
        let bad = vec![RstdRecord::new(1, 0.0, 0.0), RstdRecord::new(2, 0.0, 0.0)];
        assert_eq!(
            estimate_position(&dep, &bad, None).unwrap_err(),
            TdoaError::BadGnbId { gnb_id: 1 }
        );
    }

    #[test]
    fn rmse_examples() {
        let a = vec![p(0.0, 0.0), p(1.0, 1.0)];
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        assert_eq!(rmse(&[p(0.0, 0.0)], &[p(3.0, 0.0)]).unwrap(), 3.0);
        // errors {1,1,2,2,1,2}: sqrt(15/6)
        let est: Vec<Position2D> = [1.0, 1.0, 2.0, 2.0, 1.0, 2.0]
            .iter()
            .map(|&e| p(e, 0.0))
            .collect();
        let truth = vec![p(0.0, 0.0); 6];
        assert_relative_eq!(rmse(&est, &truth).unwrap(), (15.0f64 / 6.0).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(rmse(&est, &truth).unwrap(), 1.581, max_relative = 1e-3);
        assert!(rmse(&est, &truth[..5]).is_err());
        assert!(rmse(&[], &[]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn branch_opens_towards_the_nearer_focus(
            jx in -100.0..100.0f64, jy in -100.0..100.0f64,
            rstd_ns in 1.0..300.0f64, flip in proptest::bool::ANY,
        ) {
            let g_ref = p(0.0, 0.0);
            let g_j = p(jx, jy);
            let d = euclidean_distance(g_ref, g_j);
            let rstd = rstd_ns * 1e-9 * if flip { -1.0 } else { 1.0 };
            prop_assume!(d > 1.0);
            prop_assume!(SPEED_OF_LIGHT * rstd.abs() / 2.0 < 0.95 * d / 2.0);
            let h = hyperbola_from_rstd(g_ref, g_j, rstd).unwrap();
            for pt in hyperbola_points(&h, (-2.0, 2.0), 21) {
                let d_ref = euclidean_distance(pt, g_ref);
                let d_j = euclidean_distance(pt, g_j);
                if rstd > 0.0 {
                    // gNB j's TOA was later: the UE is closer to the reference
                    prop_assert!(d_ref < d_j);
                } else {
                    prop_assert!(d_j < d_ref);
                }
            }
        }

        #[test]
        fn solver_recovers_random_in_hull_points(
            wa in 0.05..0.9f64, wb in 0.05..0.9f64,
        ) {
            // barycentric draw inside the triangle
            prop_assume!(wa + wb < 0.95);
            let dep = deployment();
            let wc = 1.0 - wa - wb;
            let ps = &dep.positions;
            let ue = p(
                wa * ps[0].x + wb * ps[1].x + wc * ps[2].x,
                wa * ps[0].y + wb * ps[1].y + wc * ps[2].y,
            );
            let est = estimate_position(&dep, &exact_rstds(&dep, ue), None).unwrap();
            prop_assert!(euclidean_distance(est.position, ue) < 1e-5);
        }
    }
}
