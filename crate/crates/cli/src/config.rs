//! Run configuration: a single JSON file with explicit units in the key
//! names. Every field has a default; the effective configuration (defaults
//! filled in) is written next to the outputs of each run, so no value is
//! hidden.

use serde::{Deserialize, Serialize};
use spdc_core::bench::{BenchConfig, DetectorConfig};
use spdc_core::polcore::{AnalyzerSetting, BellConvention};
use spdc_core::source::{IndistinguishabilityMap, SourceConfig};

use std::f64::consts::{FRAC_PI_8, PI};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub source: SourceSection,
    pub bench: BenchSection,
    pub scan: ScanSection,
    pub histogram: HistogramSection,
    pub calibration: CalibrationSection,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            source: SourceSection::default(),
            bench: BenchSection::default(),
            scan: ScanSection::default(),
            histogram: HistogramSection::default(),
            calibration: CalibrationSection::default(),
            seed: 1,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSection {
    pub pump_power_mw: f64,
    pub pair_rate_per_mw_per_s: f64,
    pub crystal_length_mm: f64,
    pub walkoff_ps_per_mm: f64,
    /// Defaults to half the crystal length when omitted.
    pub compensator_length_mm: Option<f64>,
    pub fluorescence_rate_per_mw_per_s: f64,
    pub aperture_diameter_mm: f64,
    pub filter_bandwidth_nm: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        let core = SourceConfig::default();
        Self {
            pump_power_mw: core.pump_power_mw,
            pair_rate_per_mw_per_s: core.pair_rate_per_mw,
            crystal_length_mm: core.crystal_length_mm,
            walkoff_ps_per_mm: core.walkoff_ps_per_mm,
            compensator_length_mm: None,
            fluorescence_rate_per_mw_per_s: core.fluorescence_rate_per_mw,
            aperture_diameter_mm: core.aperture_diameter_mm,
            filter_bandwidth_nm: core.filter_bandwidth_nm,
        }
    }
}

impl SourceSection {
    pub fn to_core(&self, seed: u64) -> SourceConfig {
        SourceConfig {
            pump_power_mw: self.pump_power_mw,
            pair_rate_per_mw: self.pair_rate_per_mw_per_s,
            crystal_length_mm: self.crystal_length_mm,
            walkoff_ps_per_mm: self.walkoff_ps_per_mm,
            compensator_length_mm: self
                .compensator_length_mm
                .unwrap_or(self.crystal_length_mm / 2.0),
            fluorescence_rate_per_mw: self.fluorescence_rate_per_mw_per_s,
            aperture_diameter_mm: self.aperture_diameter_mm,
            filter_bandwidth_nm: self.filter_bandwidth_nm,
            duration_s: 0.0, // set per point
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSection {
    pub efficiency: f64,
    pub dark_rate_per_s: f64,
    pub dead_time_ns: f64,
    pub pulse_width_ns: f64,
    pub jitter_sigma_ns: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        let core = DetectorConfig::default();
        Self {
            efficiency: core.efficiency,
            dark_rate_per_s: core.dark_rate_per_s,
            dead_time_ns: core.dead_time_ns,
            pulse_width_ns: core.pulse_width_ns,
            jitter_sigma_ns: core.jitter_sigma_ns,
        }
    }
}

impl DetectorSection {
    fn to_core(&self) -> DetectorConfig {
        DetectorConfig {
            efficiency: self.efficiency,
            dark_rate_per_s: self.dark_rate_per_s,
            dead_time_ns: self.dead_time_ns,
            pulse_width_ns: self.pulse_width_ns,
            jitter_sigma_ns: self.jitter_sigma_ns,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConventionSection {
    pub offset_t_rad: f64,
    pub offset_r_rad: f64,
    pub mirrored_t: bool,
    pub mirrored_r: bool,
    pub pair_phase_rad: f64,
}

impl Default for ConventionSection {
    fn default() -> Self {
        let core = BellConvention::default();
        Self {
            offset_t_rad: core.offset_t,
            offset_r_rad: core.offset_r,
            mirrored_t: core.mirrored_t,
            mirrored_r: core.mirrored_r,
            pair_phase_rad: core.pair_phase,
        }
    }
}

impl ConventionSection {
    pub fn to_core(&self) -> BellConvention {
        BellConvention {
            offset_t: self.offset_t_rad,
            offset_r: self.offset_r_rad,
            mirrored_t: self.mirrored_t,
            mirrored_r: self.mirrored_r,
            pair_phase: self.pair_phase_rad,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchSection {
    /// Omitted: the subcommand decides (off for interference scans and
    /// histograms, on for Bell scans).
    pub use_beam_splitter: Option<bool>,
    pub coincidence_window_ns: f64,
    pub arm_transmission: f64,
    /// Omitted: 0.93 for Bell scans, the aperture/bandwidth map inversion
    /// for interference scans.
    pub mix_p: Option<f64>,
    pub detector: DetectorSection,
    pub convention: ConventionSection,
}

impl Default for BenchSection {
    fn default() -> Self {
        let core = BenchConfig::default();
        Self {
            use_beam_splitter: None,
            coincidence_window_ns: core.coincidence_window_ns,
            arm_transmission: core.arm_transmission,
            mix_p: None,
            detector: DetectorSection::default(),
            convention: ConventionSection::default(),
        }
    }
}

impl BenchSection {
    /// Assemble the core bench config. Dial angles start at zero; scans move
    /// them per point.
    pub fn to_core(&self, use_beam_splitter: bool, mix_p: f64) -> BenchConfig {
        let convention = self.convention.to_core();
        BenchConfig {
            use_beam_splitter,
            setting_t: convention.setting_t(0.0),
            setting_r: convention.setting_r(0.0),
            coincidence_window_ns: self.coincidence_window_ns,
            arm_transmission: self.arm_transmission,
            detectors: [self.detector.to_core(); 4],
            triplet_phase: convention.pair_phase,
            mix_p,
        }
    }

    /// Interference scans analyze with plain dials (no Bell-bench frame
    /// offsets): the single transmitted beam has no convention to calibrate.
    pub fn to_core_plain_dials(&self, use_beam_splitter: bool, mix_p: f64) -> BenchConfig {
        BenchConfig {
            setting_t: AnalyzerSetting::dial(0.0),
            setting_r: AnalyzerSetting::dial(0.0),
            ..self.to_core(use_beam_splitter, mix_p)
        }
    }
}

fn default_interference_thetas() -> Vec<f64> {
    (0..=8).map(|i| i as f64 * PI / 32.0).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    /// θ_T dial angles of an interference scan.
    pub interference_theta_t_rad: Vec<f64>,
    /// θ_T dial settings of a Bell run.
    pub bell_theta_t_rad: Vec<f64>,
    pub bell_theta_r_points: usize,
    pub bell_theta_r_step_rad: f64,
    pub seconds_per_point: f64,
    /// Optional aperture sweep (mm) for the interference command.
    pub aperture_sweep_mm: Option<Vec<f64>>,
    /// Bootstrap draws for the S uncertainty cross-check.
    pub bootstrap_draws: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            interference_theta_t_rad: default_interference_thetas(),
            bell_theta_t_rad: vec![0.0, FRAC_PI_8],
            bell_theta_r_points: 32,
            bell_theta_r_step_rad: PI / 16.0,
            seconds_per_point: 10.0,
            aperture_sweep_mm: None,
            bootstrap_draws: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HistogramSection {
    pub bin_width_ps: f64,
    pub span_ns: f64,
    pub duration_s: f64,
    /// Ideal detectors (unit efficiency, no darks, no jitter) so the
    /// picosecond walkoff structure is visible.
    pub ideal_detectors: bool,
}

impl Default for HistogramSection {
    fn default() -> Self {
        Self { bin_width_ps: 0.05, span_ns: 0.004, duration_s: 1.0, ideal_detectors: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSection {
    pub steps_per_quarter_turn: usize,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self { steps_per_quarter_turn: 8 }
    }
}

impl FileConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
    }

    /// Coherent pair fraction for a run: explicit value, else the
    /// command-specific default.
    pub fn mix_p_or(&self, fallback: MixDefault) -> f64 {
        if let Some(p) = self.bench.mix_p {
            return p;
        }
        match fallback {
            MixDefault::BellAnchor => 0.93,
            MixDefault::FromApertureMap => {
                let map = IndistinguishabilityMap::default();
                let source = self.source.to_core(self.seed);
                spdc_core::source::indistinguishability(&source, &map)
            }
        }
    }

    /// Serialized effective configuration, written next to every run's
    /// outputs.
    pub fn echo_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("serializable config");
        text.push('\n');
        text
    }
}

/// Command-specific default for the coherent pair fraction.
#[derive(Debug, Clone, Copy)]
pub enum MixDefault {
    BellAnchor,
    FromApertureMap,
}
