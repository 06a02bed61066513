//! Scan orchestration: drive the bench over analyzer angles and package the
//! counts as [`analysis::ScanData`], with per-point seed derivation and the
//! analytic accidental-rate estimate used for subtraction.

use crate::analysis::{AccidentalRate, ScanData, ScanPoint};
use crate::bench::{run_point, BenchConfig, Detector, PointCounts};
use crate::error::Result;
use crate::seeding::derive_seed;
use crate::source::SourceConfig;

/// Raw scan plus the per-point singles it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct BellScanOutput {
    pub raw: ScanData,
    pub point_counts: Vec<PointCounts>,
}

/// Seed for one scan point, derived from the run seed and the point's place
/// in the scan.
pub fn scan_point_seed(root: u64, scan_label: &str, point_index: usize) -> u64 {
    derive_seed(root, &format!("scan/{scan_label}/point{point_index}"))
}

/// Run one θ_R scan at a fixed θ_T dial setting: for every angle the R-arm
/// analyzer is moved, an independent point seed is derived, and the full
/// pipeline is run for `seconds_per_point`.
///
/// The returned scan carries the analytic accidental-rate estimate
/// N_a·N_b·τ for each monitored pair, computed from the mean singles rates
/// over the scan (the marginal rates do not depend on analyzer settings).
pub fn run_bell_scan(
    bench: &BenchConfig,
    source: &SourceConfig,
    theta_t: f64,
    theta_r_values: &[f64],
    seconds_per_point: f64,
    scan_label: &str,
) -> Result<BellScanOutput> {
    let mut points = Vec::with_capacity(theta_r_values.len());
    let mut point_counts = Vec::with_capacity(theta_r_values.len());
    let bench_t = BenchConfig { setting_t: bench.setting_t.with_theta(theta_t), ..bench.clone() };
    for (i, &theta_r) in theta_r_values.iter().enumerate() {
        let bench_point =
            BenchConfig { setting_r: bench.setting_r.with_theta(theta_r), ..bench_t.clone() };
        let source_point = SourceConfig {
            seed: scan_point_seed(source.seed, scan_label, i),
            ..source.clone()
        };
        let counts = run_point(&bench_point, &source_point, seconds_per_point)?;
        points.push(ScanPoint {
            theta_r_rad: theta_r,
            counts: [
                counts.coincidences_between(Detector::TT, Detector::RT) as f64,
                counts.coincidences_between(Detector::TR, Detector::RR) as f64,
            ],
            duration_s: seconds_per_point,
            floored: [false, false],
        });
        point_counts.push(counts);
    }

    let accidentals = estimate_accidentals(bench, &point_counts, seconds_per_point);
    Ok(BellScanOutput {
        raw: ScanData {
            theta_t_rad: theta_t,
            points,
            accidentals,
            seed: Some(source.seed),
        },
        point_counts,
    })
}

/// Analytic accidental rates N_a·N_b·τ for the two monitored pairs from the
/// scan's mean singles rates, with the Poisson uncertainty of the means.
pub fn estimate_accidentals(
    bench: &BenchConfig,
    point_counts: &[PointCounts],
    seconds_per_point: f64,
) -> [AccidentalRate; 2] {
    let total_time = seconds_per_point * point_counts.len() as f64;
    if total_time <= 0.0 {
        return [AccidentalRate::default(); 2];
    }
    let totals = point_counts.iter().fold([0u64; 4], |mut acc, c| {
        for (total, &n) in acc.iter_mut().zip(&c.singles) {
            *total += n;
        }
        acc
    });
    let window_s = bench.coincidence_window_ns * 1e-9;
    let pair_rate = |a: Detector, b: Detector| {
        let na = totals[a.index()] as f64;
        let nb = totals[b.index()] as f64;
        let rate = (na / total_time) * (nb / total_time) * window_s;
        let rel = if na > 0.0 && nb > 0.0 { (1.0 / na + 1.0 / nb).sqrt() } else { 0.0 };
        AccidentalRate { rate_per_s: rate, sigma_per_s: rate * rel }
    };
    [
        pair_rate(Detector::TT, Detector::RT),
        pair_rate(Detector::TR, Detector::RR),
    ]
}

/// The default θ_R dial grid: `n` positions at `step` spacing starting at 0.
pub fn theta_r_grid(n: usize, step: f64) -> Vec<f64> {
    (0..n).map(|i| i as f64 * step).collect()
}
