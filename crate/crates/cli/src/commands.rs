//! Subcommand implementations.

use crate::output::{self, OutputBundle};
use crate::CliError;
use log::info;
use num_complex::Complex64;
use prs_tdoa::config::load_scenario_str;
use prs_tdoa::harness::{
    run_multipath_study, run_oversample_sweep, run_snr_sweep, ScenarioConfig, Session,
};
use std::path::Path;

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn load_config(path: &Path, seed_override: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let text = read_to_string(path)?;
    let mut config = load_scenario_str(&text).map_err(|e| CliError::Domain(e.to_string()))?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    Ok(config)
}

pub fn validate(config_path: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let config = load_config(config_path, seed)?;
    // load_config already ran every invariant; summarize what was checked
    println!("config ok: {}", config_path.display());
    println!(
        "  {} gNBs, {} calibration positions, {} test positions",
        config.deployment.n_gnbs(),
        config.campaign.calibration_positions.len(),
        config.campaign.test_positions.len()
    );
    println!(
        "  PRS: comb-{} x {} symbols, {} PRBs, period {} slots",
        config.prs.comb_size,
        config.prs.num_symbols,
        config.prs.num_rbs,
        config.prs.resource_set_period
    );
    println!(
        "  unambiguous range and hyperbola feasibility checks passed"
    );
    Ok(())
}

pub fn calibrate(config_path: &Path, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let config = load_config(config_path, seed)?;
    let session = Session::new(config).map_err(|e| CliError::Domain(e.to_string()))?;
    let calibration = session
        .run_calibration()
        .map_err(|e| CliError::Domain(e.to_string()))?;
    info!(
        "calibration over {} positions: {:?}",
        calibration.positions_used, calibration.delta_hat_s
    );
    let csv = output::calibration_csv(&calibration);
    output::write_file(out, "calibration.csv", &csv)?;
    println!("wrote {}", out.join("calibration.csv").display());
    Ok(())
}

pub fn locate(
    config_path: &Path,
    seed: Option<u64>,
    calibration_path: &Path,
    out: &Path,
    svg: bool,
) -> Result<(), CliError> {
    let config = load_config(config_path, seed)?;
    let calibration_text = read_to_string(calibration_path)?;
    let calibration = output::parse_calibration_csv(&calibration_text)
        .map_err(CliError::Domain)?;
    if calibration.delta_hat_s.len() != config.deployment.n_gnbs() {
        return Err(CliError::Domain(format!(
            "calibration file has {} gNBs, deployment has {}",
            calibration.delta_hat_s.len(),
            config.deployment.n_gnbs()
        )));
    }
    let session = Session::new(config).map_err(|e| CliError::Domain(e.to_string()))?;
    let (_records, report) = session.run_positioning(&calibration);
    output::write_file(out, "estimates.csv", &output::estimates_csv(&report))?;
    output::write_file(
        out,
        "hyperbolas.csv",
        &output::hyperbolas_csv(&report, &session.config().deployment),
    )?;
    if svg {
        output::write_file(
            out,
            "plot.svg",
            &output::deployment_svg(&session.config().deployment, &report),
        )?;
    }
    match report.rmse_m {
        Some(rmse) => println!(
            "located {} positions, RMSE {rmse:.3} m ({} skipped)",
            report.positions.len(),
            report.skipped
        ),
        None => println!("no position produced an estimate"),
    }
    Ok(())
}

/// Parses `PARAM=START:STOP:N`.
fn parse_sweep_spec(spec: &str) -> Result<(String, f64, f64, usize), CliError> {
    let bad = |msg: &str| CliError::Domain(format!("bad sweep spec {spec:?}: {msg}"));
    let (param, range) = spec
        .split_once('=')
        .ok_or_else(|| bad("expected PARAM=START:STOP:N"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected START:STOP:N"));
    }
    let start: f64 = parts[0].parse().map_err(|_| bad("START is not a number"))?;
    let stop: f64 = parts[1].parse().map_err(|_| bad("STOP is not a number"))?;
    let n: usize = parts[2].parse().map_err(|_| bad("N is not an integer"))?;
    if !start.is_finite() || !stop.is_finite() {
        return Err(bad("range must be finite"));
    }
    if n < 1 {
        return Err(bad("N must be >= 1"));
    }
    Ok((param.to_string(), start, stop, n))
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    (0..n)
        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Geometric progression rounded to integers, for oversample factors.
fn geomspace_usize(start: f64, stop: f64, n: usize) -> Vec<usize> {
    if n == 1 {
        return vec![start.round().max(1.0) as usize];
    }
    let ratio = (stop / start).powf(1.0 / (n - 1) as f64);
    (0..n)
        .map(|i| (start * ratio.powi(i as i32)).round().max(1.0) as usize)
        .collect()
}

pub fn sweep(
    config_path: &Path,
    seed: Option<u64>,
    sweep_spec: &str,
    out: &Path,
) -> Result<(), CliError> {
    let config = load_config(config_path, seed)?;
    let (param, start, stop, n) = parse_sweep_spec(sweep_spec)?;
    let rows = match param.as_str() {
        "excess_delay" => {
            if start < 0.0 || stop < 0.0 {
                return Err(CliError::Domain(
                    "excess delays must be non-negative".into(),
                ));
            }
            // echo gain comes from the configured gNB-1 echo, 0.5 otherwise
            let gain = config
                .channel
                .echoes_per_gnb
                .first()
                .and_then(|list| list.first())
                .map(|e| Complex64::new(e.gain_re, e.gain_im))
                .unwrap_or(Complex64::new(0.5, 0.0));
            run_multipath_study(&config, &linspace(start, stop, n), gain)
        }
        "snr_db" => run_snr_sweep(&config, &linspace(start, stop, n)),
        "oversample_factor" => run_oversample_sweep(&config, &geomspace_usize(start, stop, n)),
        other => {
            return Err(CliError::Domain(format!(
                "unknown sweep parameter {other:?} (expected excess_delay, snr_db, or oversample_factor)"
            )))
        }
    }
    .map_err(|e| CliError::Domain(e.to_string()))?;
    output::write_file(out, "sweep.csv", &output::sweep_csv(&param, &rows))?;
    println!("wrote {} ({} rows)", out.join("sweep.csv").display(), rows.len());
    Ok(())
}

pub fn simulate(
    config_path: &Path,
    seed: Option<u64>,
    out: &Path,
    svg: bool,
    dump_channel: bool,
) -> Result<(), CliError> {
    let config = load_config(config_path, seed)?;
    let session = Session::new(config).map_err(|e| CliError::Domain(e.to_string()))?;
    let report = session.run().map_err(|e| CliError::Domain(e.to_string()))?;
    let bundle = OutputBundle::from_report(&report, &session.config().deployment);
    bundle.write_all(out)?;
    if svg {
        output::write_file(
            out,
            "plot.svg",
            &output::deployment_svg(&session.config().deployment, &report.positioning),
        )?;
    }
    if dump_channel {
        let (cfr, cir) = output::channel_dump_csvs(session.config()).map_err(CliError::Domain)?;
        output::write_file(out, "cfr.csv", &cfr)?;
        output::write_file(out, "cir.csv", &cir)?;
    }
    match report.positioning.rmse_m {
        Some(rmse) => println!(
            "session complete: {} TOA records, RMSE {rmse:.3} m",
            report.toa_records.len()
        ),
        None => println!(
            "session complete: {} TOA records, no position estimates",
            report.toa_records.len()
        ),
    }
    Ok(())
}
