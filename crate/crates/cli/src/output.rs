//! CSV and SVG emission. Schemas are stable: every writer pins its header
//! here and the golden-header tests assert them byte for byte.
//!
//! Seconds are formatted with `{:e}` (shortest round-trip, exponent form),
//! meters and ratios with plain `{}`; both are deterministic, so identical
//! runs produce identical bytes.

use crate::CliError;
use prs_tdoa::harness::{
    toa_histogram, PositionOutcome, PositioningReport, SweepRow, TrialReport,
    DEFAULT_HISTOGRAM_BIN_S,
};
use prs_tdoa::model::GnbDeployment;
use prs_tdoa::tdoa::hyperbola_from_rstd;
use prs_tdoa::timing::CalibrationResult;
use std::fmt::Write as _;
use std::path::Path;

pub const TOA_RECORDS_HEADER: &str = "trial_id,position_id,gnb_id,toa_s,true_tof_s";
pub const RSTD_RECORDS_HEADER: &str = "trial_id,position_id,gnb_id,rstd_s,corrected_rstd_s";
pub const CALIBRATION_HEADER: &str = "gnb_id,delta_hat_s,sample_count,residual_std_s";
pub const ESTIMATES_HEADER: &str = "position_id,true_x_m,true_y_m,est_x_m,est_y_m,error_m,converged";
pub const HISTOGRAM_HEADER: &str = "trial_id,gnb_id,bin_lo_s,bin_hi_s,count";
pub const HYPERBOLAS_HEADER: &str = "position_id,gnb_id,t,x_m,y_m";
pub const SWEEP_HEADER: &str = "param,value,oversample_factor,toa_bias_s,toa_std_s,trials";

/// Number of parameter samples per exported hyperbola branch.
const HYPERBOLA_SAMPLES: usize = 101;
const HYPERBOLA_T_MAX: f64 = 2.5;

pub fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn calibration_csv(cal: &CalibrationResult) -> String {
    let mut out = String::from(CALIBRATION_HEADER);
    out.push('\n');
    for (i, &delta) in cal.delta_hat_s.iter().enumerate() {
        writeln!(
            out,
            "{},{:e},{},{:e}",
            i + 1,
            delta,
            cal.sample_counts[i],
            cal.residual_std_s[i]
        )
        .unwrap();
    }
    out
}

/// Parses a calibration.csv back into a result; the inverse of
/// [`calibration_csv`]. Rows must carry contiguous 1-based gNB ids.
pub fn parse_calibration_csv(text: &str) -> Result<CalibrationResult, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CALIBRATION_HEADER => {}
        Some((_, header)) => return Err(format!("unexpected calibration header {header:?}")),
        None => return Err("empty calibration file".into()),
    }
    let mut delta_hat_s = Vec::new();
    let mut sample_counts = Vec::new();
    let mut residual_std_s = Vec::new();
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(format!("line {}: expected 4 fields", lineno + 1));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| format!("line {}: bad gnb_id {:?}", lineno + 1, fields[0]))?;
        if id != delta_hat_s.len() + 1 {
            return Err(format!(
                "line {}: gNB ids must be contiguous from 1, got {id}",
                lineno + 1
            ));
        }
        let parse_f = |s: &str, field: &str| -> Result<f64, String> {
            s.parse()
                .map_err(|_| format!("line {}: bad {field} {s:?}", lineno + 1))
        };
        delta_hat_s.push(parse_f(fields[1], "delta_hat_s")?);
        sample_counts.push(
            fields[2]
                .parse()
                .map_err(|_| format!("line {}: bad sample_count {:?}", lineno + 1, fields[2]))?,
        );
        residual_std_s.push(parse_f(fields[3], "residual_std_s")?);
    }
    if delta_hat_s.is_empty() {
        return Err("calibration file has no rows".into());
    }
    if delta_hat_s[0] != 0.0 {
        return Err("reference gNB offset must be zero".into());
    }
    let positions_used = 0; // not serialized; irrelevant for correction
    Ok(CalibrationResult {
        delta_hat_s,
        sample_counts,
        residual_std_s,
        positions_used,
    })
}

pub fn estimates_csv(report: &PositioningReport) -> String {
    let mut out = String::from(ESTIMATES_HEADER);
    out.push('\n');
    for p in &report.positions {
        match &p.outcome {
            PositionOutcome::Estimated(est) => {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    p.position_id,
                    p.truth.x,
                    p.truth.y,
                    est.position.x,
                    est.position.y,
                    p.error_m().unwrap(),
                    est.converged
                )
                .unwrap();
            }
            PositionOutcome::InvalidHyperbola { gnb_id } => {
                writeln!(
                    out,
                    "{},{},{},,,,invalid(gnb {gnb_id})",
                    p.position_id, p.truth.x, p.truth.y
                )
                .unwrap();
            }
            PositionOutcome::Failed { reason } => {
                writeln!(
                    out,
                    "{},{},{},,,,failed({reason})",
                    p.position_id, p.truth.x, p.truth.y
                )
                .unwrap();
            }
        }
    }
    match report.rmse_m {
        Some(rmse) => writeln!(out, "RMSE,,,,,{rmse},").unwrap(),
        None => writeln!(out, "RMSE,,,,,,").unwrap(),
    }
    out
}

pub fn hyperbolas_csv(report: &PositioningReport, deployment: &GnbDeployment) -> String {
    let mut out = String::from(HYPERBOLAS_HEADER);
    out.push('\n');
    for p in &report.positions {
        for r in &p.rstds {
            let params = match hyperbola_from_rstd(
                deployment.reference(),
                deployment.position(r.gnb_id),
                r.corrected_rstd_s,
            ) {
                Ok(params) => params,
                Err(_) => continue, // flagged in estimates.csv already
            };
            let points =
                prs_tdoa::tdoa::hyperbola_points(&params, (-HYPERBOLA_T_MAX, HYPERBOLA_T_MAX), HYPERBOLA_SAMPLES);
            for (i, pt) in points.iter().enumerate() {
                let t = -HYPERBOLA_T_MAX
                    + 2.0 * HYPERBOLA_T_MAX * i as f64 / (HYPERBOLA_SAMPLES - 1) as f64;
                writeln!(out, "{},{},{},{},{}", p.position_id, r.gnb_id, t, pt.x, pt.y).unwrap();
            }
        }
    }
    out
}

pub fn sweep_csv(param: &str, rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{:e},{},{:e},{:e},{}",
            param, r.param_value, r.oversample_factor, r.toa_bias_s, r.toa_std_s, r.trials
        )
        .unwrap();
    }
    out
}

/// The full simulate bundle.
pub struct OutputBundle {
    pub toa_records: String,
    pub rstd_records: String,
    pub calibration: String,
    pub estimates: String,
    pub histogram: String,
    pub hyperbolas: String,
}

impl OutputBundle {
    pub fn from_report(report: &TrialReport, deployment: &GnbDeployment) -> Self {
        let mut toa = String::from(TOA_RECORDS_HEADER);
        toa.push('\n');
        for r in &report.toa_records {
            writeln!(
                toa,
                "{},{},{},{:e},{:e}",
                r.trial_id, r.ue_position_id, r.gnb_id, r.toa_s, r.true_tof_s
            )
            .unwrap();
        }

        let mut rstd = String::from(RSTD_RECORDS_HEADER);
        rstd.push('\n');
        for p in &report.positioning.positions {
            for r in &p.rstds {
                writeln!(
                    rstd,
                    "{},{},{},{:e},{:e}",
                    p.trial_id, p.position_id, r.gnb_id, r.rstd_s, r.corrected_rstd_s
                )
                .unwrap();
            }
        }

        let mut hist = String::from(HISTOGRAM_HEADER);
        hist.push('\n');
        for bin in toa_histogram(&report.toa_records, DEFAULT_HISTOGRAM_BIN_S) {
            writeln!(
                hist,
                "{},{},{:e},{:e},{}",
                bin.trial_id, bin.gnb_id, bin.bin_lo_s, bin.bin_hi_s, bin.count
            )
            .unwrap();
        }

        Self {
            toa_records: toa,
            rstd_records: rstd,
            calibration: calibration_csv(&report.calibration),
            estimates: estimates_csv(&report.positioning),
            histogram: hist,
            hyperbolas: hyperbolas_csv(&report.positioning, deployment),
        }
    }

    pub fn write_all(&self, dir: &Path) -> Result<(), CliError> {
        write_file(dir, "toa_records.csv", &self.toa_records)?;
        write_file(dir, "rstd_records.csv", &self.rstd_records)?;
        write_file(dir, "calibration.csv", &self.calibration)?;
        write_file(dir, "estimates.csv", &self.estimates)?;
        write_file(dir, "histogram.csv", &self.histogram)?;
        write_file(dir, "hyperbolas.csv", &self.hyperbolas)?;
        Ok(())
    }
}

pub const CFR_HEADER: &str = "gnb_id,subcarrier,freq_hz,re,im,magnitude";
pub const CIR_HEADER: &str = "gnb_id,tap_index,time_s,magnitude";

/// Frequency- and time-domain channel diagnostics for each gNB's configured
/// channel, one noiseless-seeded PRS cycle each.
pub fn channel_dump_csvs(config: &prs_tdoa::harness::ScenarioConfig) -> Result<(String, String), String> {
    use num_complex::Complex64;
    use prs_tdoa::channel::{apply_channel, multipath_profile, NoiseSpec};
    use prs_tdoa::estimator::{estimate_cfr, interpolate_cir};
    use prs_tdoa::prs::{build_schedule, map_prs_to_grid};

    let dep = &config.deployment;
    let ue = config
        .campaign
        .test_positions
        .first()
        .or_else(|| config.campaign.calibration_positions.first())
        .copied()
        .ok_or("scenario has no positions to place the UE at")?;
    let schedule =
        build_schedule(&config.prs, dep.n_gnbs(), dep.scs_hz).map_err(|e| e.to_string())?;
    let mut cfr_csv = String::from(CFR_HEADER);
    cfr_csv.push('\n');
    let mut cir_csv = String::from(CIR_HEADER);
    cir_csv.push('\n');
    for gnb_id in 1..=dep.n_gnbs() {
        let echoes: Vec<(f64, Complex64)> = config
            .channel
            .echoes_per_gnb
            .get(gnb_id - 1)
            .map(|list| {
                list.iter()
                    .map(|e| (e.excess_delay_s, Complex64::new(e.gain_re, e.gain_im)))
                    .collect()
            })
            .unwrap_or_default();
        let profile =
            multipath_profile(dep.position(gnb_id), ue, &echoes).map_err(|e| e.to_string())?;
        let slot = schedule.slots_of(gnb_id)[0];
        let tx = map_prs_to_grid(&config.prs, dep, gnb_id, slot).map_err(|e| e.to_string())?;
        let noise = NoiseSpec {
            snr_db: config.channel.snr_db,
            rng_seed: prs_tdoa::rng::derive_seed(
                config.seed,
                prs_tdoa::rng::tag::GRID_NOISE,
                &[0, gnb_id as u64],
            ),
        };
        let rx = apply_channel(&tx, &profile, &noise);
        let cfr = estimate_cfr(&rx, &tx).map_err(|e| e.to_string())?;
        for (v, &k) in cfr.values.iter().zip(&cfr.subcarriers) {
            writeln!(
                cfr_csv,
                "{gnb_id},{k},{:e},{:e},{:e},{:e}",
                k as f64 * cfr.scs_hz,
                v.re,
                v.im,
                v.norm()
            )
            .unwrap();
        }
        let cir = interpolate_cir(
            &cfr,
            config.estimator.oversample_factor,
            config.estimator.native_sample_rate_hz,
        )
        .map_err(|e| e.to_string())?;
        for (i, tap) in cir.taps.iter().enumerate() {
            writeln!(
                cir_csv,
                "{gnb_id},{i},{:e},{:e}",
                i as f64 * cir.tap_spacing_s(),
                tap.norm()
            )
            .unwrap();
        }
    }
    Ok((cfr_csv, cir_csv))
}

/// Minimal scatter/polyline SVG: gNBs, truths, estimates, hyperbolas.
pub fn deployment_svg(deployment: &GnbDeployment, report: &PositioningReport) -> String {
    let mut xs: Vec<f64> = deployment.positions.iter().map(|p| p.x).collect();
    let mut ys: Vec<f64> = deployment.positions.iter().map(|p| p.y).collect();
    for p in &report.positions {
        xs.push(p.truth.x);
        ys.push(p.truth.y);
    }
    let (x_min, x_max) = min_max(&xs);
    let (y_min, y_max) = min_max(&ys);
    let pad = 0.15 * ((x_max - x_min).max(y_max - y_min)).max(1.0);
    let (x0, x1) = (x_min - pad, x_max + pad);
    let (y0, y1) = (y_min - pad, y_max + pad);
    let size = 640.0;
    let scale = size / (x1 - x0).max(y1 - y0);
    let sx = |x: f64| (x - x0) * scale;
    let sy = |y: f64| size - (y - y0) * scale; // y grows upward

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for p in &report.positions {
        for r in &p.rstds {
            if let Ok(params) = hyperbola_from_rstd(
                deployment.reference(),
                deployment.position(r.gnb_id),
                r.corrected_rstd_s,
            ) {
                let pts =
                    prs_tdoa::tdoa::hyperbola_points(&params, (-HYPERBOLA_T_MAX, HYPERBOLA_T_MAX), HYPERBOLA_SAMPLES);
                let path: Vec<String> = pts
                    .iter()
                    .map(|pt| format!("{:.2},{:.2}", sx(pt.x), sy(pt.y)))
                    .collect();
                writeln!(
                    svg,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"#9ecae1\" stroke-width=\"1\"/>",
                    path.join(" ")
                )
                .unwrap();
            }
        }
    }
    for (i, g) in deployment.positions.iter().enumerate() {
        writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"6\" fill=\"#d62728\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">gNB {}</text>",
            sx(g.x),
            sy(g.y),
            sx(g.x) + 8.0,
            sy(g.y) - 8.0,
            i + 1
        )
        .unwrap();
    }
    for p in &report.positions {
        writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"2\"/>",
            sx(p.truth.x),
            sy(p.truth.y)
        )
        .unwrap();
        if let PositionOutcome::Estimated(est) = &p.outcome {
            writeln!(
                svg,
                "<path d=\"M {x} {y0} L {x} {y1} M {x0} {y} L {x1} {y}\" stroke=\"#1f77b4\" stroke-width=\"2\"/>",
                x = sx(est.position.x),
                y = sy(est.position.y),
                x0 = sx(est.position.x) - 5.0,
                x1 = sx(est.position.x) + 5.0,
                y0 = sy(est.position.y) - 5.0,
                y1 = sy(est.position.y) + 5.0,
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &x| {
        (acc.0.min(x), acc.1.max(x))
    })
}
