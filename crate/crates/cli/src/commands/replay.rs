//! Re-analyze an exported click stream: singles, pairwise coincidences,
//! accidental-window calibration, and a start-stop histogram.

use spdc_core::bench::{
    calibrate_accidentals, count_coincidences, start_stop_histogram, Detector, DetectorClicks,
    DETECTOR_PAIRS,
};
use spdc_core::io::{read_clicks, write_histogram, Report};

use crate::commands::{setup, write_file};
use crate::{CliError, ReplayArgs};

pub fn run(args: &ReplayArgs) -> Result<(), CliError> {
    let (config, out, _workers) = setup(&args.run)?;
    let start_detector = Detector::from_name(&args.start)
        .ok_or_else(|| CliError::Config(format!("unknown start detector {:?}", args.start)))?;
    let stop_detector = Detector::from_name(&args.stop)
        .ok_or_else(|| CliError::Config(format!("unknown stop detector {:?}", args.stop)))?;

    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", args.input.display())))?;
    let records = read_clicks(&text).map_err(CliError::runtime)?;
    let clicks = DetectorClicks::from_records(&records);

    let t_span_ps = match (records.first(), records.iter().map(|r| r.t_ps).reduce(f64::max)) {
        (Some(first), Some(last)) => (last - first.t_ps).max(0.0),
        _ => 0.0,
    };
    let duration_s = t_span_ps / 1e12;
    let window_ns = config.bench.coincidence_window_ns;

    let mut report = Report::new();
    report.push("command", "replay");
    report.push("input", args.input.display());
    report.push("clicks_total", records.len());
    report.push("time_span_s", duration_s);
    report.push("coincidence_window_ns", window_ns);
    for d in Detector::ALL {
        report.push(&format!("singles_{}", d.name().to_lowercase()), clicks.clicks(d).len());
    }
    for (a, b) in DETECTOR_PAIRS {
        let c = count_coincidences(clicks.clicks(a), clicks.clicks(b), window_ns);
        report.push(
            &format!(
                "coincidences_{}_{}",
                a.name().to_lowercase(),
                b.name().to_lowercase()
            ),
            c,
        );
    }
    if duration_s > 0.0 {
        let bench = config.bench.to_core(true, 1.0);
        match calibrate_accidentals(&bench, &clicks, duration_s) {
            Ok(calibration) => {
                for pc in calibration {
                    let key = format!(
                        "effective_window_{}_{}_ns",
                        pc.pair.0.name().to_lowercase(),
                        pc.pair.1.name().to_lowercase()
                    );
                    report.push(&key, pc.effective_window_ns);
                    report.push(&format!("{key}_sigma"), pc.window_sigma_ns);
                }
            }
            Err(e) => report.push("accidental_calibration", format!("unavailable ({e})")),
        }
    }

    let histogram = start_stop_histogram(
        clicks.clicks(start_detector),
        clicks.clicks(stop_detector),
        config.histogram.bin_width_ps,
        config.histogram.span_ns,
    )
    .map_err(CliError::runtime)?;
    report.push("histogram_start", start_detector.name());
    report.push("histogram_stop", stop_detector.name());
    report.push("histogram_counts", histogram.total());

    write_file(&out, "replay_report.txt", &report.render())?;
    write_file(&out, "replay_histogram.csv", &write_histogram(&histogram))?;
    write_file(&out, "run_config.json", &config.echo_json())?;
    Ok(())
}
