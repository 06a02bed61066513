//! Two-arm Bell run: θ_R scans at each θ_T setting, accidental subtraction,
//! sinusoidal fits, and the CHSH S report with both uncertainty estimates.

use std::fmt::Write as _;

use rayon::prelude::*;
use spdc_core::analysis::{
    bootstrap_sigma_s, chsh_from_scans, subtract_accidentals, MonitoredPair, ScanData, ScanPoint,
};
use spdc_core::bench::{run_point, BenchConfig, Detector, PointCounts};
use spdc_core::io::{write_scan, Report};
use spdc_core::pipeline::{estimate_accidentals, scan_point_seed, theta_r_grid};
use spdc_core::seeding::derive_seed;
use spdc_core::source::SourceConfig;

use crate::commands::{setup, thread_pool, write_file};
use crate::config::MixDefault;
use crate::{CliError, RunArgs};

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let (config, out, workers) = setup(args)?;
    if config.bench.use_beam_splitter == Some(false) {
        return Err(CliError::Config("bell-scan needs the 50/50 beam splitter".into()));
    }
    if config.scan.bell_theta_t_rad.len() != 2 {
        return Err(CliError::Config(format!(
            "bell scan needs exactly two theta_T settings, got {}",
            config.scan.bell_theta_t_rad.len()
        )));
    }
    if config.scan.bell_theta_r_points < 6 {
        return Err(CliError::Config("bell scan needs at least 6 theta_R points".into()));
    }
    let mix_p = config.mix_p_or(MixDefault::BellAnchor);
    if !(0.0..=1.0).contains(&mix_p) {
        return Err(CliError::Config(format!("mix_p {mix_p} outside [0, 1]")));
    }
    let bench = config.bench.to_core(true, mix_p);
    bench.validate()?;
    let source = config.source.to_core(config.seed);
    source.validate()?;
    let grid = theta_r_grid(config.scan.bell_theta_r_points, config.scan.bell_theta_r_step_rad);
    let seconds = config.scan.seconds_per_point;
    let pool = thread_pool(workers)?;

    let mut raw_scans = Vec::with_capacity(2);
    for (i, &theta_t) in config.scan.bell_theta_t_rad.iter().enumerate() {
        raw_scans.push(parallel_scan(
            &pool,
            &bench,
            &source,
            theta_t,
            &grid,
            seconds,
            &format!("t{i}"),
        )?);
    }
    let subtracted: Vec<ScanData> = raw_scans.iter().map(subtract_accidentals).collect();
    let result = chsh_from_scans(&subtracted[0], &subtracted[1])?;
    let boot_sigma = bootstrap_sigma_s(
        &subtracted[0],
        &subtracted[1],
        config.scan.bootstrap_draws,
        derive_seed(config.seed, "bell/bootstrap"),
    )?;

    for (i, (raw, sub)) in raw_scans.iter().zip(&subtracted).enumerate() {
        write_file(&out, &format!("bell_scan_raw_t{i}.csv"), &write_scan(raw))?;
        write_file(&out, &format!("bell_scan_subtracted_t{i}.csv"), &write_scan(sub))?;
    }
    write_file(&out, "bell_fits.csv", &fits_csv(&config.scan.bell_theta_t_rad, &result.fits))?;
    write_file(
        &out,
        "bell_fit_curves.csv",
        &fit_curves_csv(&result.fits, &grid),
    )?;

    let mut report = Report::new();
    report.push("command", "bell-scan");
    report.push("seed", config.seed);
    report.push("mix_p", mix_p);
    report.push("seconds_per_point", seconds);
    report.push("theta_r_points", grid.len());
    report.push("s_value", result.s);
    report.push("sigma_s_propagated", result.sigma_s);
    report.push("sigma_s_bootstrap", boot_sigma);
    report.push("bootstrap_draws", config.scan.bootstrap_draws);
    let e_names = ["e_t0_pi16", "e_t8_pi16", "e_t0_3pi16", "e_t8_3pi16"];
    for (name, e) in e_names.iter().zip(result.e_values.iter()) {
        report.push(name, e.value);
        report.push(&format!("{name}_sigma"), e.sigma);
    }
    for (i, fits_at_t) in result.fits.iter().enumerate() {
        for (pair, fit) in MonitoredPair::BOTH.iter().zip(fits_at_t.iter()) {
            let v = fit.visibility();
            report.push(
                &format!("visibility_t{i}_{}", pair.name().to_lowercase()),
                v.value,
            );
            report.push(
                &format!("visibility_t{i}_{}_sigma", pair.name().to_lowercase()),
                v.sigma,
            );
        }
    }
    for (i, scan) in raw_scans.iter().enumerate() {
        for (k, pair) in MonitoredPair::BOTH.iter().enumerate() {
            report.push(
                &format!("accidental_rate_t{i}_{}_per_s", pair.name().to_lowercase()),
                scan.accidentals[k].rate_per_s,
            );
        }
    }
    write_file(&out, "chsh_report.txt", &report.render())?;
    write_file(&out, "run_config.json", &config.echo_json())?;
    Ok(())
}

/// Parallel version of the core scan runner; byte-identical results (same
/// per-point seeds), order restored by collecting indexed points.
fn parallel_scan(
    pool: &rayon::ThreadPool,
    bench: &BenchConfig,
    source: &SourceConfig,
    theta_t: f64,
    grid: &[f64],
    seconds: f64,
    label: &str,
) -> Result<ScanData, CliError> {
    let bench_t = BenchConfig { setting_t: bench.setting_t.with_theta(theta_t), ..bench.clone() };
    let counts: Vec<PointCounts> = pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(i, &theta_r)| {
                let b = BenchConfig {
                    setting_r: bench_t.setting_r.with_theta(theta_r),
                    ..bench_t.clone()
                };
                let s = SourceConfig {
                    seed: scan_point_seed(source.seed, label, i),
                    ..source.clone()
                };
                run_point(&b, &s, seconds)
            })
            .collect::<Result<Vec<_>, spdc_core::Error>>()
    })?;
    let points = grid
        .iter()
        .zip(&counts)
        .map(|(&theta_r, c)| ScanPoint {
            theta_r_rad: theta_r,
            counts: [
                c.coincidences_between(Detector::TT, Detector::RT) as f64,
                c.coincidences_between(Detector::TR, Detector::RR) as f64,
            ],
            duration_s: seconds,
            floored: [false, false],
        })
        .collect();
    Ok(ScanData {
        theta_t_rad: theta_t,
        points,
        accidentals: estimate_accidentals(bench, &counts, seconds),
        seed: Some(source.seed),
    })
}

fn fits_csv(theta_t: &[f64], fits: &spdc_core::analysis::BellFits) -> String {
    let mut csv = String::from(
        "theta_t_rad,pair,offset_counts,amplitude_counts,phase_rad,visibility,visibility_sigma\n",
    );
    for (i, fits_at_t) in fits.iter().enumerate() {
        for (pair, fit) in MonitoredPair::BOTH.iter().zip(fits_at_t.iter()) {
            let v = fit.visibility();
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                theta_t[i],
                pair.name(),
                fit.offset,
                fit.amplitude,
                fit.phase,
                v.value,
                v.sigma
            );
        }
    }
    csv
}

/// Dense fitted curves for plotting, spanning the scanned range.
fn fit_curves_csv(fits: &spdc_core::analysis::BellFits, grid: &[f64]) -> String {
    let lo = *grid.first().unwrap_or(&0.0);
    let hi = *grid.last().unwrap_or(&1.0);
    let n = 256;
    let mut csv =
        String::from("theta_r_rad,fit_t0_tt_rt,fit_t0_tr_rr,fit_t1_tt_rt,fit_t1_tr_rr\n");
    for k in 0..=n {
        let theta = lo + (hi - lo) * k as f64 / n as f64;
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            theta,
            fits[0][0].value_at(theta),
            fits[0][1].value_at(theta),
            fits[1][0].value_at(theta),
            fits[1][1].value_at(theta)
        );
    }
    csv
}
