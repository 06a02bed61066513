//! Start-stop timing histograms before and after the compensator crystal,
//! with a click-stream export for replay.

use spdc_core::bench::{run_clicks, start_stop_histogram, Detector, Histogram};
use spdc_core::io::{write_clicks, write_histogram, Report};
use spdc_core::seeding::derive_seed;
use spdc_core::source::SourceConfig;

use crate::commands::{setup, write_file};
use crate::config::MixDefault;
use crate::{CliError, RunArgs};

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let (config, out, _workers) = setup(args)?;
    let mix_p = config.mix_p_or(MixDefault::FromApertureMap);
    let use_bs = config.bench.use_beam_splitter.unwrap_or(false);
    let mut bench = config.bench.to_core_plain_dials(use_bs, mix_p);
    if config.histogram.ideal_detectors {
        // the picosecond walkoff structure is only visible without jitter
        bench.arm_transmission = 1.0;
        for d in &mut bench.detectors {
            d.efficiency = 1.0;
            d.dark_rate_per_s = 0.0;
            d.jitter_sigma_ns = 0.0;
        }
    }
    bench.validate()?;
    let base = SourceConfig {
        fluorescence_rate_per_mw: 0.0,
        duration_s: config.histogram.duration_s,
        ..config.source.to_core(config.seed)
    };
    base.validate()?;

    // delay = t_signal − t_idler: at θ_T = 0 the signal lands on TT and the
    // idler on TR, so TR starts and TT stops
    let histogram_for = |compensator_mm: f64, label: &str| -> Result<(Histogram, String), CliError> {
        let source = SourceConfig {
            compensator_length_mm: compensator_mm,
            seed: derive_seed(config.seed, label),
            ..base.clone()
        };
        let clicks = run_clicks(&bench, &source, config.histogram.duration_s)?;
        let histogram = start_stop_histogram(
            clicks.clicks(Detector::TR),
            clicks.clicks(Detector::TT),
            config.histogram.bin_width_ps,
            config.histogram.span_ns,
        )?;
        Ok((histogram, write_clicks(&clicks.records())))
    };

    let (pre, _) = histogram_for(0.0, "histogram/pre")?;
    let (post, post_clicks) = histogram_for(base.compensator_length_mm, "histogram/post")?;

    let mut report = Report::new();
    report.push("command", "histogram");
    report.push("seed", config.seed);
    report.push("duration_s", config.histogram.duration_s);
    report.push("bin_width_ps", config.histogram.bin_width_ps);
    for (name, h) in [("pre", &pre), ("post", &post)] {
        report.push(&format!("{name}_total"), h.total());
        match h.mean_ps() {
            Some(mean) => report.push(&format!("{name}_mean_ps"), mean),
            None => report.push(&format!("{name}_mean_ps"), "undefined (no counts)"),
        }
        if let Some((lo, hi)) = h.support_ps() {
            report.push(&format!("{name}_support_lo_ps"), lo);
            report.push(&format!("{name}_support_hi_ps"), hi);
        }
    }

    write_file(&out, "histogram_pre.csv", &write_histogram(&pre))?;
    write_file(&out, "histogram_post.csv", &write_histogram(&post))?;
    write_file(&out, "clicks_post.csv", &post_clicks)?;
    write_file(&out, "histogram_summary.txt", &report.render())?;
    write_file(&out, "run_config.json", &config.echo_json())?;
    Ok(())
}
