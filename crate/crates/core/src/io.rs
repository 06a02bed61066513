//! Columnar text formats: event and click streams, scan CSVs with a
//! `#`-prefixed header block, histogram CSVs, and key:value reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! file re-parses to bit-identical values and identical inputs produce
//! byte-identical files.

use std::fmt::Write as _;

use crate::analysis::{AccidentalRate, ScanData, ScanPoint};
use crate::bench::{ClickRecord, Detector, Histogram};
use crate::error::{Error, Result};
use crate::polcore::Polarization;
use crate::source::{PairEvent, SinglePhotonEvent};

/// A generated event: a photon pair or a lone background photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceEvent {
    Pair(PairEvent),
    Single(SinglePhotonEvent),
}

impl SourceEvent {
    pub fn time_ps(&self) -> f64 {
        match self {
            SourceEvent::Pair(p) => p.t_pair_ps,
            SourceEvent::Single(s) => s.t_ps,
        }
    }
}

fn pol_name(p: Polarization) -> &'static str {
    match p {
        Polarization::H => "H",
        Polarization::V => "V",
    }
}

fn parse_pol(s: &str, line: usize) -> Result<Polarization> {
    match s {
        "H" => Ok(Polarization::H),
        "V" => Ok(Polarization::V),
        other => Err(Error::Parse { line, message: format!("bad polarization {other:?}") }),
    }
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("bad {what}: {s:?}") })
}

const EVENT_HEADER: &str =
    "time_ps,kind,z_origin_mm,signal_offset_ps,idler_offset_ps,signal_pol,idler_pol";

/// Serialize a source event stream, one event per line.
pub fn write_events(events: &[SourceEvent]) -> String {
    let mut out = String::with_capacity(events.len() * 48 + 64);
    out.push_str(EVENT_HEADER);
    out.push('\n');
    for e in events {
        match e {
            SourceEvent::Pair(p) => {
                let _ = writeln!(
                    out,
                    "{},pair,{},{},{},{},{}",
                    p.t_pair_ps,
                    p.z_origin_mm,
                    p.t_signal_offset_ps,
                    p.t_idler_offset_ps,
                    pol_name(p.signal_pol),
                    pol_name(p.idler_pol)
                );
            }
            SourceEvent::Single(s) => {
                let _ = writeln!(out, "{},single,,,,{},", s.t_ps, pol_name(s.pol));
            }
        }
    }
    out
}

/// Parse a source event stream written by [`write_events`].
pub fn read_events(text: &str) -> Result<Vec<SourceEvent>> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed == EVENT_HEADER {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse { line, message: format!("expected 7 fields, got {}", fields.len()) });
        }
        let t = parse_f64(fields[0], line, "time")?;
        match fields[1] {
            "pair" => events.push(SourceEvent::Pair(PairEvent {
                t_pair_ps: t,
                z_origin_mm: parse_f64(fields[2], line, "z_origin")?,
                t_signal_offset_ps: parse_f64(fields[3], line, "signal offset")?,
                t_idler_offset_ps: parse_f64(fields[4], line, "idler offset")?,
                signal_pol: parse_pol(fields[5], line)?,
                idler_pol: parse_pol(fields[6], line)?,
            })),
            "single" => events.push(SourceEvent::Single(SinglePhotonEvent {
                t_ps: t,
                pol: parse_pol(fields[5], line)?,
            })),
            other => {
                return Err(Error::Parse { line, message: format!("unknown event kind {other:?}") })
            }
        }
    }
    Ok(events)
}

const CLICK_HEADER: &str = "detector,time_ps";

/// Serialize a click stream, one click per line.
pub fn write_clicks(records: &[ClickRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 24 + 24);
    out.push_str(CLICK_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{},{}", r.detector.name(), r.t_ps);
    }
    out
}

/// Parse a click stream written by [`write_clicks`].
pub fn read_clicks(text: &str) -> Result<Vec<ClickRecord>> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed == CLICK_HEADER {
            continue;
        }
        let (det, time) = trimmed.split_once(',').ok_or_else(|| Error::Parse {
            line,
            message: "expected detector,time_ps".into(),
        })?;
        let detector = Detector::from_name(det).ok_or_else(|| Error::Parse {
            line,
            message: format!("unknown detector {det:?}"),
        })?;
        records.push(ClickRecord { detector, t_ps: parse_f64(time, line, "time")? });
    }
    Ok(records)
}

/// Serialize a histogram as bin_center_ps,count rows.
pub fn write_histogram(histogram: &Histogram) -> String {
    let mut out = String::new();
    out.push_str("bin_center_ps,count\n");
    for (i, &c) in histogram.counts.iter().enumerate() {
        let _ = writeln!(out, "{},{}", histogram.bin_center_ps(i), c);
    }
    out
}

const SCAN_COLUMNS: &str =
    "theta_r_rad,counts_tt_rt,counts_tr_rr,duration_s,floored_tt_rt,floored_tr_rr";

/// Serialize a scan with its header block (θ_T, accidental rates, seed).
pub fn write_scan(scan: &ScanData) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# theta_t_rad: {}", scan.theta_t_rad);
    if let Some(seed) = scan.seed {
        let _ = writeln!(out, "# seed: {seed}");
    }
    for (k, name) in [(0, "tt_rt"), (1, "tr_rr")] {
        let _ = writeln!(
            out,
            "# accidental_rate_{name}_per_s: {}",
            scan.accidentals[k].rate_per_s
        );
        let _ = writeln!(
            out,
            "# accidental_sigma_{name}_per_s: {}",
            scan.accidentals[k].sigma_per_s
        );
    }
    out.push_str(SCAN_COLUMNS);
    out.push('\n');
    for p in &scan.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.theta_r_rad,
            p.counts[0],
            p.counts[1],
            p.duration_s,
            u8::from(p.floored[0]),
            u8::from(p.floored[1])
        );
    }
    out
}

/// Parse a scan written by [`write_scan`].
pub fn read_scan(text: &str) -> Result<ScanData> {
    let mut scan = ScanData {
        theta_t_rad: 0.0,
        points: Vec::new(),
        accidentals: [AccidentalRate::default(); 2],
        seed: None,
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed == SCAN_COLUMNS {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let (key, value) = rest.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: "header line without ':'".into(),
            })?;
            let value = value.trim();
            match key.trim() {
                "theta_t_rad" => scan.theta_t_rad = parse_f64(value, line, "theta_t")?,
                "seed" => {
                    scan.seed = Some(value.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("bad seed {value:?}"),
                    })?)
                }
                "accidental_rate_tt_rt_per_s" => {
                    scan.accidentals[0].rate_per_s = parse_f64(value, line, "rate")?
                }
                "accidental_sigma_tt_rt_per_s" => {
                    scan.accidentals[0].sigma_per_s = parse_f64(value, line, "sigma")?
                }
                "accidental_rate_tr_rr_per_s" => {
                    scan.accidentals[1].rate_per_s = parse_f64(value, line, "rate")?
                }
                "accidental_sigma_tr_rr_per_s" => {
                    scan.accidentals[1].sigma_per_s = parse_f64(value, line, "sigma")?
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown header key {other:?}"),
                    })
                }
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                line,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let flag = |s: &str| -> Result<bool> {
            match s {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::Parse { line, message: format!("bad flag {other:?}") }),
            }
        };
        scan.points.push(ScanPoint {
            theta_r_rad: parse_f64(fields[0], line, "theta_r")?,
            counts: [
                parse_f64(fields[1], line, "counts_tt_rt")?,
                parse_f64(fields[2], line, "counts_tr_rr")?,
            ],
            duration_s: parse_f64(fields[3], line, "duration")?,
            floored: [flag(fields[4])?, flag(fields[5])?],
        });
    }
    scan.validate()?;
    Ok(scan)
}

/// A key: value report in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}: {v}");
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{generate_fluorescence, generate_pair_stream, SourceConfig};

    #[test]
    fn events_round_trip() {
        let config = SourceConfig { duration_s: 0.001, seed: 3, ..SourceConfig::default() };
        let mut events: Vec<SourceEvent> = generate_pair_stream(&config)
            .into_iter()
            .map(SourceEvent::Pair)
            .chain(generate_fluorescence(&config).into_iter().map(SourceEvent::Single))
            .collect();
        events.sort_by(|a, b| a.time_ps().total_cmp(&b.time_ps()));
        let text = write_events(&events);
        assert_eq!(read_events(&text).unwrap(), events);
        // byte-identical on rewrite
        assert_eq!(write_events(&read_events(&text).unwrap()), text);
    }

    #[test]
    fn clicks_round_trip() {
        let records = vec![
            ClickRecord { detector: Detector::TT, t_ps: 0.125 },
            ClickRecord { detector: Detector::RR, t_ps: 1e12 / 3.0 },
        ];
        let text = write_clicks(&records);
        assert_eq!(read_clicks(&text).unwrap(), records);
    }

    #[test]
    fn bad_click_lines_are_rejected_with_line_numbers() {
        let err = read_clicks("detector,time_ps\nXX,5\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scan_round_trip_preserves_everything() {
        let scan = ScanData {
            theta_t_rad: std::f64::consts::FRAC_PI_8,
            points: (0..8)
                .map(|i| ScanPoint {
                    theta_r_rad: i as f64 * 0.19634954084936207,
                    counts: [12007.0 - i as f64, 11892.25 + i as f64 / 3.0],
                    duration_s: 10.0,
                    floored: [i == 3, false],
                })
                .collect(),
            accidentals: [
                AccidentalRate { rate_per_s: 10.08, sigma_per_s: 0.31 },
                AccidentalRate { rate_per_s: 11.3, sigma_per_s: 0.4 },
            ],
            seed: Some(42),
        };
        let text = write_scan(&scan);
        let parsed = read_scan(&text).unwrap();
        assert_eq!(parsed, scan);
        assert_eq!(write_scan(&parsed), text);
    }

    #[test]
    fn report_renders_in_order() {
        let mut r = Report::new();
        r.push("s_value", 2.711);
        r.push("sigma_s", 0.017);
        assert_eq!(r.render(), "s_value: 2.711\nsigma_s: 0.017\n");
        assert_eq!(r.get("sigma_s"), Some("0.017"));
    }
}
