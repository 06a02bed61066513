//! The optical bench as a discrete-event machine.
//!
//! A pair stream from [`crate::source`] is routed through the (optional)
//! 50/50 beam splitter, each arm's half-wave plate and polarizing beam
//! splitter decide which of the four detectors (TT, TR, RT, RR) a photon can
//! reach, and the detector model applies efficiency, dark counts, timing
//! jitter and dead time. Coincidences are counted with AND logic over a
//! configurable window, and start-stop histograms give the high-resolution
//! timing picture.
//!
//! Split pairs sample their joint PBS outcome from
//! [`polcore::joint_pbs_probabilities`] on the configured pair state;
//! same-arm pairs sample from the single-beam interference closed form.
//! With all imperfections disabled the Monte Carlo therefore converges to
//! the polcore probabilities exactly — that equivalence is tested.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::polcore::{
    joint_pbs_probabilities, make_triplet, mix_with_classical, single_beam_coincidence_prob,
    AnalyzerSetting, BellConvention, Polarization,
};
use crate::seeding::stream_rng;
use crate::source::{
    apply_compensator, generate_fluorescence, pair_stream_iter, poisson_arrivals_ps, merge_times,
    PairEvent, SinglePhotonEvent, SourceConfig,
};

const PS_PER_NS: f64 = 1000.0;

/// The four analyzer outputs. The first letter is the beam-splitter arm
/// (T = transmitted, R = reflected), the second the PBS port in that arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Detector {
    TT,
    TR,
    RT,
    RR,
}

impl Detector {
    pub const ALL: [Detector; 4] = [Detector::TT, Detector::TR, Detector::RT, Detector::RR];

    pub fn index(self) -> usize {
        match self {
            Detector::TT => 0,
            Detector::TR => 1,
            Detector::RT => 2,
            Detector::RR => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Detector::TT => "TT",
            Detector::TR => "TR",
            Detector::RT => "RT",
            Detector::RR => "RR",
        }
    }

    pub fn from_name(name: &str) -> Option<Detector> {
        Detector::ALL.into_iter().find(|d| d.name() == name)
    }

    fn from_parts(arm: Arm, port: Polarization) -> Detector {
        match (arm, port) {
            (Arm::T, Polarization::H) => Detector::TT,
            (Arm::T, Polarization::V) => Detector::TR,
            (Arm::R, Polarization::H) => Detector::RT,
            (Arm::R, Polarization::V) => Detector::RR,
        }
    }
}

/// The six unordered detector pairs, in the fixed reporting order.
pub const DETECTOR_PAIRS: [(Detector, Detector); 6] = [
    (Detector::TT, Detector::TR),
    (Detector::TT, Detector::RT),
    (Detector::TT, Detector::RR),
    (Detector::TR, Detector::RT),
    (Detector::TR, Detector::RR),
    (Detector::RT, Detector::RR),
];

/// Index of an unordered detector pair in [`DETECTOR_PAIRS`].
pub fn pair_index(a: Detector, b: Detector) -> Option<usize> {
    DETECTOR_PAIRS
        .iter()
        .position(|&(x, y)| (x == a && y == b) || (x == b && y == a))
}

/// Beam-splitter output arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    T,
    R,
}

/// Single-photon counter model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Detection quantum efficiency.
    pub efficiency: f64,
    pub dark_rate_per_s: f64,
    /// Dead time including the output pulse width.
    pub dead_time_ns: f64,
    /// Electrical output pulse width; two pulses AND to a coincidence iff
    /// they overlap, which the window logic models directly.
    pub pulse_width_ns: f64,
    pub jitter_sigma_ns: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            efficiency: 0.525,
            dark_rate_per_s: 50.0,
            dead_time_ns: 50.0,
            pulse_width_ns: 35.0,
            jitter_sigma_ns: 0.3,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::Config(format!(
                "detector efficiency {} outside [0, 1]",
                self.efficiency
            )));
        }
        for (name, v) in [
            ("dark_rate_per_s", self.dark_rate_per_s),
            ("dead_time_ns", self.dead_time_ns),
            ("pulse_width_ns", self.pulse_width_ns),
            ("jitter_sigma_ns", self.jitter_sigma_ns),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} = {v} must be nonnegative")));
            }
        }
        Ok(())
    }
}

/// Bench layout and analyzer state for one measurement point.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub use_beam_splitter: bool,
    pub setting_t: AnalyzerSetting,
    pub setting_r: AnalyzerSetting,
    /// Full AND-logic coincidence window (total width; a pair of clicks
    /// coincides iff |Δt| ≤ window/2).
    pub coincidence_window_ns: f64,
    /// Per-photon optical transmission of each analyzer chain (filter and
    /// path optics, in front of the detector). Combined with the default
    /// detector efficiency this gives the 21% conditional detection chain.
    pub arm_transmission: f64,
    /// Detectors in index order TT, TR, RT, RR.
    pub detectors: [DetectorConfig; 4],
    /// Phase of the prepared pair state.
    pub triplet_phase: f64,
    /// Coherent (indistinguishable) pair fraction.
    pub mix_p: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let convention = BellConvention::default();
        Self {
            use_beam_splitter: true,
            setting_t: convention.setting_t(0.0),
            setting_r: convention.setting_r(0.0),
            coincidence_window_ns: 70.0,
            arm_transmission: 0.4,
            detectors: [DetectorConfig::default(); 4],
            triplet_phase: convention.pair_phase,
            mix_p: 0.93,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.coincidence_window_ns.is_finite() || self.coincidence_window_ns <= 0.0 {
            return Err(Error::Config(format!(
                "coincidence window {} ns must be positive",
                self.coincidence_window_ns
            )));
        }
        if !(0.0..=1.0).contains(&self.arm_transmission) {
            return Err(Error::Config(format!(
                "arm transmission {} outside [0, 1]",
                self.arm_transmission
            )));
        }
        if !(0.0..=1.0).contains(&self.mix_p) {
            return Err(Error::Config(format!("mix_p {} outside [0, 1]", self.mix_p)));
        }
        for d in &self.detectors {
            d.validate()?;
        }
        Ok(())
    }

    /// The prepared two-photon state for split pairs.
    pub fn pair_state(&self) -> Result<crate::polcore::TwoQubitState> {
        mix_with_classical(&make_triplet(self.triplet_phase), self.mix_p)
    }
}

/// One detector output pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickRecord {
    pub detector: Detector,
    pub t_ps: f64,
}

/// Click streams per detector, each time-ordered with dead-time gaps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectorClicks {
    pub per_detector: [Vec<f64>; 4],
}

impl DetectorClicks {
    pub fn clicks(&self, d: Detector) -> &[f64] {
        &self.per_detector[d.index()]
    }

    pub fn singles(&self) -> [u64; 4] {
        [0, 1, 2, 3].map(|i| self.per_detector[i].len() as u64)
    }

    /// Flatten to a single time-ordered record stream.
    pub fn records(&self) -> Vec<ClickRecord> {
        let mut out: Vec<ClickRecord> = Detector::ALL
            .into_iter()
            .flat_map(|d| self.clicks(d).iter().map(move |&t| ClickRecord { detector: d, t_ps: t }))
            .collect();
        out.sort_by(|a, b| a.t_ps.total_cmp(&b.t_ps));
        out
    }

    pub fn from_records(records: &[ClickRecord]) -> Self {
        let mut out = Self::default();
        for r in records {
            out.per_detector[r.detector.index()].push(r.t_ps);
        }
        for v in &mut out.per_detector {
            v.sort_by(f64::total_cmp);
        }
        out
    }
}

/// A tentative photon arrival at a detector, before the detector model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub detector: Detector,
    pub t_ps: f64,
}

/// Arm assignment for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairRouting {
    pub signal: Arm,
    pub idler: Arm,
}

impl PairRouting {
    pub fn is_split(&self) -> bool {
        self.signal != self.idler
    }
}

/// Route one pair at the beam splitter: each photon independently goes to
/// either arm with probability 1/2; with the splitter removed both photons
/// stay in the transmitted arm. Post-selection is not applied here — it
/// emerges from cross-arm coincidence detection.
pub fn route_pair<R: Rng>(bench: &BenchConfig, rng: &mut R) -> PairRouting {
    if bench.use_beam_splitter {
        let pick = |rng: &mut R| if rng.random::<bool>() { Arm::T } else { Arm::R };
        PairRouting { signal: pick(rng), idler: pick(rng) }
    } else {
        PairRouting { signal: Arm::T, idler: Arm::T }
    }
}

#[derive(Debug, Clone, Copy)]
struct HomTable {
    /// Probability that the pair splits across the two PBS ports.
    p_coincidence: f64,
    /// Given a split, probability the signal photon takes the H port.
    p_signal_h: f64,
}

impl HomTable {
    fn new(setting: AnalyzerSetting, p: f64) -> Result<Self> {
        let alpha = setting.effective_angle();
        let p_coincidence = single_beam_coincidence_prob(alpha, p)?;
        let c2 = (2.0 * alpha).cos().powi(2);
        let s2 = (2.0 * alpha).sin().powi(2);
        // amplitude-weighted photon assignment; exact in both limits
        let p_signal_h = c2 * c2 / (c2 * c2 + s2 * s2);
        Ok(Self { p_coincidence, p_signal_h })
    }
}

/// Precomputed outcome tables for one bench configuration. Building the
/// tables costs a 4×4 conjugation; sampling per pair is a few comparisons.
#[derive(Debug, Clone)]
pub struct OutcomeSampler {
    split_cumulative: [f64; 4],
    hom_t: HomTable,
    hom_r: HomTable,
    jitter: [Option<Normal<f64>>; 4],
    arm_transmission: f64,
}

impl OutcomeSampler {
    pub fn new(bench: &BenchConfig) -> Result<Self> {
        let probs = joint_pbs_probabilities(&bench.pair_state()?, bench.setting_t, bench.setting_r);
        let p = probs.as_array();
        let split_cumulative = [p[0], p[0] + p[1], p[0] + p[1] + p[2], 1.0];
        let jitter = [0, 1, 2, 3].map(|i| {
            let sigma = bench.detectors[i].jitter_sigma_ns * PS_PER_NS;
            (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma"))
        });
        Ok(Self {
            split_cumulative,
            hom_t: HomTable::new(bench.setting_t, bench.mix_p)?,
            hom_r: HomTable::new(bench.setting_r, bench.mix_p)?,
            jitter,
            arm_transmission: bench.arm_transmission,
        })
    }

    fn emit<R: Rng>(&self, out: &mut Vec<Arrival>, d: Detector, t: f64, rng: &mut R) {
        if rng.random::<f64>() < self.arm_transmission {
            let t_ps = match &self.jitter[d.index()] {
                Some(normal) => t + normal.sample(rng),
                None => t,
            };
            out.push(Arrival { detector: d, t_ps });
        }
    }

    /// Sample the PBS outcome for one (compensated) pair and append the
    /// surviving tentative arrivals.
    pub fn sample_into<R: Rng>(
        &self,
        event: &PairEvent,
        routing: PairRouting,
        rng: &mut R,
        out: &mut Vec<Arrival>,
    ) {
        let ts = event.signal_time_ps();
        let ti = event.idler_time_ps();
        if routing.is_split() {
            // Which arm holds which photon does not change the joint
            // distribution; it decides which timestamp lands where.
            let (t_t, t_r) = match routing.signal {
                Arm::T => (ts, ti),
                Arm::R => (ti, ts),
            };
            let u: f64 = rng.random();
            let k = self.split_cumulative.iter().position(|&c| u < c).unwrap_or(3);
            let (port_t, port_r) = match k {
                0 => (Polarization::H, Polarization::H),
                1 => (Polarization::H, Polarization::V),
                2 => (Polarization::V, Polarization::H),
                _ => (Polarization::V, Polarization::V),
            };
            self.emit(out, Detector::from_parts(Arm::T, port_t), t_t, rng);
            self.emit(out, Detector::from_parts(Arm::R, port_r), t_r, rng);
        } else {
            let arm = routing.signal;
            let table = match arm {
                Arm::T => &self.hom_t,
                Arm::R => &self.hom_r,
            };
            let (port_s, port_i) = if rng.random::<f64>() < table.p_coincidence {
                if rng.random::<f64>() < table.p_signal_h {
                    (Polarization::H, Polarization::V)
                } else {
                    (Polarization::V, Polarization::H)
                }
            } else if rng.random::<bool>() {
                (Polarization::H, Polarization::H)
            } else {
                (Polarization::V, Polarization::V)
            };
            self.emit(out, Detector::from_parts(arm, port_s), ts, rng);
            self.emit(out, Detector::from_parts(arm, port_i), ti, rng);
        }
    }

    /// Route one background photon through the bench.
    pub fn sample_single_into<R: Rng>(
        &self,
        event: &SinglePhotonEvent,
        use_beam_splitter: bool,
        settings: (AnalyzerSetting, AnalyzerSetting),
        rng: &mut R,
        out: &mut Vec<Arrival>,
    ) {
        let arm = if use_beam_splitter {
            if rng.random::<bool>() { Arm::T } else { Arm::R }
        } else {
            Arm::T
        };
        let setting = match arm {
            Arm::T => settings.0,
            Arm::R => settings.1,
        };
        let c2 = (2.0 * setting.effective_angle()).cos().powi(2);
        let p_h_port = match event.pol {
            Polarization::H => c2,
            Polarization::V => 1.0 - c2,
        };
        let port = if rng.random::<f64>() < p_h_port { Polarization::H } else { Polarization::V };
        self.emit(out, Detector::from_parts(arm, port), event.t_ps, rng);
    }
}

/// Analyze one pair: sample the PBS outcome for its routing and return the
/// surviving tentative arrivals (zero, one, or two) with jitter applied.
///
/// Convenience wrapper over [`OutcomeSampler`]; build the sampler once when
/// processing a stream.
pub fn measure_pair<R: Rng>(
    event: &PairEvent,
    routing: PairRouting,
    bench: &BenchConfig,
    rng: &mut R,
) -> Result<Vec<Arrival>> {
    let sampler = OutcomeSampler::new(bench)?;
    let mut out = Vec::with_capacity(2);
    sampler.sample_into(event, routing, rng, &mut out);
    Ok(out)
}

/// Apply the detector model to a time-ordered tentative-arrival stream:
/// each arrival survives with the detector's efficiency, Poisson dark counts
/// are added per detector, and arrivals inside a detector's dead window are
/// discarded. Returns time-ordered clicks per detector.
pub fn detect<R: Rng>(
    arrivals: &[Arrival],
    detectors: &[DetectorConfig; 4],
    duration_s: f64,
    rng: &mut R,
) -> Result<DetectorClicks> {
    if arrivals.windows(2).any(|w| w[1].t_ps < w[0].t_ps) {
        return Err(Error::UnorderedInput("tentative arrivals must be time-ordered".into()));
    }
    let mut per: [Vec<f64>; 4] = Default::default();
    for a in arrivals {
        let idx = a.detector.index();
        if rng.random::<f64>() < detectors[idx].efficiency {
            per[idx].push(a.t_ps);
        }
    }
    let mut out = DetectorClicks::default();
    for i in 0..4 {
        let darks = poisson_arrivals_ps(detectors[i].dark_rate_per_s, duration_s, rng);
        let merged = merge_times(&per[i], &darks);
        let dead_ps = detectors[i].dead_time_ns * PS_PER_NS;
        let mut kept = Vec::with_capacity(merged.len());
        let mut last = f64::NEG_INFINITY;
        for t in merged {
            if t - last >= dead_ps || !last.is_finite() {
                kept.push(t);
                last = t;
            }
        }
        debug_assert!(kept.windows(2).all(|w| w[1] - w[0] >= dead_ps));
        out.per_detector[i] = kept;
    }
    Ok(out)
}

/// Count AND-logic coincidences between two time-ordered click streams:
/// pairs with |t_a − t_b| ≤ window/2 (`window_ns` is the full window width),
/// each click used at most once, matched greedily in time order.
pub fn count_coincidences(clicks_a: &[f64], clicks_b: &[f64], window_ns: f64) -> u64 {
    let half = window_ns * PS_PER_NS / 2.0;
    let (mut i, mut j, mut n) = (0usize, 0usize, 0u64);
    while i < clicks_a.len() && j < clicks_b.len() {
        let dt = clicks_a[i] - clicks_b[j];
        if dt.abs() <= half {
            n += 1;
            i += 1;
            j += 1;
        } else if dt < 0.0 {
            i += 1;
        } else {
            j += 1;
        }
    }
    n
}

/// A start-stop delay histogram with fixed-width bins covering ±span.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width_ps: f64,
    pub span_ps: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bin_center_ps(&self, i: usize) -> f64 {
        -self.span_ps + (i as f64 + 0.5) * self.bin_width_ps
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Count-weighted mean delay from the bin centers.
    pub fn mean_ps(&self) -> Option<f64> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let sum: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * self.bin_center_ps(i))
            .sum();
        Some(sum / total as f64)
    }

    /// Smallest interval [lo, hi] of bin edges containing all counts.
    pub fn support_ps(&self) -> Option<(f64, f64)> {
        let first = self.counts.iter().position(|&c| c > 0)?;
        let last = self.counts.iter().rposition(|&c| c > 0)?;
        Some((
            -self.span_ps + first as f64 * self.bin_width_ps,
            -self.span_ps + (last as f64 + 1.0) * self.bin_width_ps,
        ))
    }
}

/// Histogram of stop-minus-start delays for nearest-neighbor pairs: for each
/// start click the closest stop click is taken, and the delay is binned if
/// it lies within ±span. Bit-exact for fixed inputs.
pub fn start_stop_histogram(
    starts: &[f64],
    stops: &[f64],
    bin_width_ps: f64,
    span_ns: f64,
) -> Result<Histogram> {
    if !bin_width_ps.is_finite() || bin_width_ps <= 0.0 {
        return Err(Error::Domain(format!("bin width {bin_width_ps} ps must be positive")));
    }
    let span_ps = span_ns * PS_PER_NS;
    let nbins = ((2.0 * span_ps / bin_width_ps).ceil() as usize).max(1);
    let mut counts = vec![0u64; nbins];
    for &a in starts {
        // closest stop to a: partition point gives the first stop >= a
        let right = stops.partition_point(|&t| t < a);
        let mut best: Option<f64> = None;
        if right < stops.len() {
            best = Some(stops[right] - a);
        }
        if right > 0 {
            let d = stops[right - 1] - a;
            if best.is_none_or(|b| d.abs() < b.abs()) {
                best = Some(d);
            }
        }
        if let Some(delay) = best {
            if delay.abs() <= span_ps {
                let idx = (((delay + span_ps) / bin_width_ps) as usize).min(nbins - 1);
                counts[idx] += 1;
            }
        }
    }
    Ok(Histogram { bin_width_ps, span_ps, counts })
}

/// Effective coincidence window and accidental rate for one detector pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCalibration {
    pub pair: (Detector, Detector),
    pub effective_window_ns: f64,
    pub window_sigma_ns: f64,
    pub accidental_rate_per_s: f64,
    pub rate_sigma_per_s: f64,
}

/// Calibrate the effective coincidence window from a background-only run
/// (pair generation off, dark/stray streams active): for each detector pair
/// the window is estimated as measured_coincidences · T / (N1 · N2), the
/// inversion of the accidental formula, with Poisson uncertainty.
pub fn calibrate_accidentals(
    bench: &BenchConfig,
    clicks: &DetectorClicks,
    duration_s: f64,
) -> Result<Vec<PairCalibration>> {
    if !duration_s.is_finite() || duration_s <= 0.0 {
        return Err(Error::Config(format!("duration {duration_s} s must be positive")));
    }
    let mut out = Vec::with_capacity(DETECTOR_PAIRS.len());
    for (a, b) in DETECTOR_PAIRS {
        let ca = clicks.clicks(a);
        let cb = clicks.clicks(b);
        if ca.is_empty() || cb.is_empty() {
            return Err(Error::CalibrationUndefined(format!(
                "no singles on detector {} or {}",
                a.name(),
                b.name()
            )));
        }
        let n1 = ca.len() as f64;
        let n2 = cb.len() as f64;
        let c = count_coincidences(ca, cb, bench.coincidence_window_ns) as f64;
        let window_s = c * duration_s / (n1 * n2);
        let window_sigma_s = c.sqrt() * duration_s / (n1 * n2);
        out.push(PairCalibration {
            pair: (a, b),
            effective_window_ns: window_s * 1e9,
            window_sigma_ns: window_sigma_s * 1e9,
            accidental_rate_per_s: c / duration_s,
            rate_sigma_per_s: c.sqrt() / duration_s,
        });
    }
    Ok(out)
}

/// Counts from one measurement point at fixed analyzer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCounts {
    pub duration_s: f64,
    /// Clicks per detector in index order TT, TR, RT, RR.
    pub singles: [u64; 4],
    /// Coincidences per pair in [`DETECTOR_PAIRS`] order.
    pub coincidences: [u64; 6],
}

impl PointCounts {
    pub fn coincidences_between(&self, a: Detector, b: Detector) -> u64 {
        pair_index(a, b).map(|i| self.coincidences[i]).unwrap_or(0)
    }
}

/// Run the full pipeline (generate → route → measure → detect) at fixed
/// analyzer settings and return the click streams. Deterministic given the
/// source config seed.
pub fn run_clicks(
    bench: &BenchConfig,
    source: &SourceConfig,
    duration_s: f64,
) -> Result<DetectorClicks> {
    bench.validate()?;
    source.validate()?;
    let config = SourceConfig { duration_s, ..source.clone() };
    let sampler = OutcomeSampler::new(bench)?;

    let mut routing_rng = stream_rng(config.seed, "bench/routing");
    let mut outcome_rng = stream_rng(config.seed, "bench/outcomes");
    let expected = (config.pair_rate() * duration_s * 0.85) as usize + 16;
    let mut arrivals: Vec<Arrival> = Vec::with_capacity(expected);
    for event in pair_stream_iter(&config) {
        let event = apply_compensator(&event, &config);
        let routing = route_pair(bench, &mut routing_rng);
        sampler.sample_into(&event, routing, &mut outcome_rng, &mut arrivals);
    }

    let mut fluor_rng = stream_rng(config.seed, "bench/fluorescence-routing");
    for single in generate_fluorescence(&config) {
        sampler.sample_single_into(
            &single,
            bench.use_beam_splitter,
            (bench.setting_t, bench.setting_r),
            &mut fluor_rng,
            &mut arrivals,
        );
    }

    arrivals.sort_by(|a, b| a.t_ps.total_cmp(&b.t_ps));
    let mut dark_rng = stream_rng(config.seed, "bench/darks");
    detect(&arrivals, &bench.detectors, duration_s, &mut dark_rng)
}

/// Run one measurement point and reduce to per-detector singles plus all six
/// pairwise coincidence counts.
pub fn run_point(bench: &BenchConfig, source: &SourceConfig, duration_s: f64) -> Result<PointCounts> {
    let clicks = run_clicks(bench, source, duration_s)?;
    let singles = clicks.singles();
    let mut coincidences = [0u64; 6];
    for (i, (a, b)) in DETECTOR_PAIRS.into_iter().enumerate() {
        coincidences[i] =
            count_coincidences(clicks.clicks(a), clicks.clicks(b), bench.coincidence_window_ns);
    }
    Ok(PointCounts { duration_s, singles, coincidences })
}
