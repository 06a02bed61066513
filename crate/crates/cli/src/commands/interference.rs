//! Single-beam quantum-interference scan: coincidences between the two PBS
//! ports of the transmitted beam versus the θ_T dial, plus the two-point
//! visibility summary and an optional aperture sweep.

use std::fmt::Write as _;

use rayon::prelude::*;
use spdc_core::analysis::visibility;
use spdc_core::bench::{run_point, BenchConfig, Detector, PointCounts};
use spdc_core::io::Report;
use spdc_core::pipeline::scan_point_seed;
use spdc_core::polcore::{p_from_visibility, visibility_from_p, AnalyzerSetting};
use spdc_core::source::{IndistinguishabilityMap, SourceConfig};

use crate::commands::{setup, thread_pool, write_file};
use crate::config::{FileConfig, MixDefault};
use crate::{CliError, RunArgs};

use std::f64::consts::FRAC_PI_8;

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let (config, out, workers) = setup(args)?;
    if config.bench.use_beam_splitter == Some(true) {
        return Err(CliError::Config(
            "interference-scan runs without the 50/50 beam splitter".into(),
        ));
    }
    let thetas = &config.scan.interference_theta_t_rad;
    if thetas.is_empty() {
        return Err(CliError::Config("interference scan needs at least one angle".into()));
    }
    let mix_p = config.mix_p_or(MixDefault::FromApertureMap);
    if !(0.0..=1.0).contains(&mix_p) {
        return Err(CliError::Config(format!("mix_p {mix_p} outside [0, 1]")));
    }
    let bench = config.bench.to_core_plain_dials(false, mix_p);
    bench.validate()?;
    let source = config.source.to_core(config.seed);
    source.validate()?;
    let seconds = config.scan.seconds_per_point;
    let pool = thread_pool(workers)?;

    let points = pool.install(|| -> Result<Vec<PointCounts>, spdc_core::Error> {
        thetas
            .par_iter()
            .enumerate()
            .map(|(i, &theta)| {
                let b = BenchConfig { setting_t: AnalyzerSetting::dial(theta), ..bench.clone() };
                let s = SourceConfig {
                    seed: scan_point_seed(config.seed, "interference", i),
                    ..source.clone()
                };
                run_point(&b, &s, seconds)
            })
            .collect()
    })?;

    let mut csv = String::from(
        "theta_t_rad,coincidences,accidental_estimate,coincidences_corrected,singles_tt,\
         singles_tr,duration_s\n",
    );
    let corrected: Vec<f64> = points
        .iter()
        .map(|c| corrected_coincidences(c, bench.coincidence_window_ns, seconds))
        .collect();
    for ((&theta, counts), &corr) in thetas.iter().zip(&points).zip(&corrected) {
        let raw = counts.coincidences_between(Detector::TT, Detector::TR);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            theta,
            raw,
            raw as f64 - corr,
            corr,
            counts.singles[Detector::TT.index()],
            counts.singles[Detector::TR.index()],
            seconds
        );
    }

    let mut report = Report::new();
    report.push("command", "interference-scan");
    report.push("seed", config.seed);
    report.push("mix_p", mix_p);
    report.push("expected_visibility_from_p", visibility_from_p(mix_p));
    let corrected_at = |target: f64| -> Option<f64> {
        thetas
            .iter()
            .position(|&t| (t - target).abs() < 1e-9)
            .map(|i| corrected[i])
    };
    match (corrected_at(0.0), corrected_at(FRAC_PI_8)) {
        (Some(c0), Some(c8)) => {
            let v = visibility(c0, c8)?;
            report.push("coincidences_at_zero", c0);
            report.push("coincidences_at_pi_over_8", c8);
            report.push("visibility", v.value);
            report.push("visibility_sigma", v.sigma);
        }
        _ => {
            report.push(
                "visibility",
                "unavailable (scan lacks the 0 and pi/8 dial positions)",
            );
        }
    }

    let sweep_csv = config
        .scan
        .aperture_sweep_mm
        .as_ref()
        .map(|apertures| aperture_sweep(&config, &bench, &source, apertures, seconds, &pool))
        .transpose()?;

    write_file(&out, "interference_scan.csv", &csv)?;
    write_file(&out, "interference_summary.txt", &report.render())?;
    if let Some(sweep) = sweep_csv {
        write_file(&out, "aperture_sweep.csv", &sweep)?;
    }
    write_file(&out, "run_config.json", &config.echo_json())?;
    Ok(())
}

/// TT–TR coincidences with the analytic accidental estimate
/// N_TT·N_TR·τ removed (floored at zero), as in post-detection analysis.
fn corrected_coincidences(counts: &PointCounts, window_ns: f64, seconds: f64) -> f64 {
    let raw = counts.coincidences_between(Detector::TT, Detector::TR) as f64;
    let n_tt = counts.singles[Detector::TT.index()] as f64 / seconds;
    let n_tr = counts.singles[Detector::TR.index()] as f64 / seconds;
    let accidental = n_tt * n_tr * window_ns * 1e-9 * seconds;
    (raw - accidental).max(0.0)
}

/// For each aperture: invert the visibility map to p, measure C(0) and
/// C(π/8), and report measured against expected visibility.
fn aperture_sweep(
    config: &FileConfig,
    bench: &BenchConfig,
    source: &SourceConfig,
    apertures: &[f64],
    seconds: f64,
    pool: &rayon::ThreadPool,
) -> Result<String, CliError> {
    let map = IndistinguishabilityMap::default();
    let rows = pool.install(|| -> Result<Vec<String>, spdc_core::Error> {
        apertures
            .par_iter()
            .enumerate()
            .map(|(j, &aperture)| {
                let p = p_from_visibility(map.visibility_at(aperture));
                let bench_p = BenchConfig { mix_p: p, ..bench.clone() };
                let measure = |theta: f64, label: &str| -> Result<f64, spdc_core::Error> {
                    let b = BenchConfig {
                        setting_t: AnalyzerSetting::dial(theta),
                        ..bench_p.clone()
                    };
                    let s = SourceConfig {
                        seed: scan_point_seed(config.seed, &format!("aperture{j}/{label}"), 0),
                        ..source.clone()
                    };
                    let counts = run_point(&b, &s, seconds)?;
                    Ok(corrected_coincidences(&counts, b.coincidence_window_ns, seconds))
                };
                let c0 = measure(0.0, "zero")?;
                let c8 = measure(FRAC_PI_8, "eighth")?;
                let v = visibility(c0, c8)?;
                Ok(format!(
                    "{aperture},{p},{},{c0},{c8},{},{}",
                    visibility_from_p(p),
                    v.value,
                    v.sigma
                ))
            })
            .collect()
    })?;
    let mut csv = String::from(
        "aperture_mm,p,expected_visibility,coincidences_zero,coincidences_pi_over_8,\
         visibility,visibility_sigma\n",
    );
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    Ok(csv)
}
