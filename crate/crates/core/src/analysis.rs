//! The statistical pipeline: accidental subtraction, visibility,
//! Poisson-weighted sinusoidal fits, derived coincidences, the CHSH
//! correlation E and parameter S with uncertainty propagation, and
//! analyzer-convention calibration.
//!
//! The coincidence model for every scan curve is
//! `C(θ_R) = A + B·cos(4θ_R + δ)`. The fit is solved exactly through the
//! linear reparameterization `A + P·cos4θ + Q·sin4θ` — no iteration, no
//! starting values — and the covariance is transformed to the (A, B, δ)
//! basis afterwards.
//!
//! Two coincidence combinations are never measured directly; they are
//! derived from the fitted curves with the analyzer-rotation identity
//! `C_TT,RR(θ_T, θ_R) = C_TT,RT(θ_T, θ_R + π/4)` (and likewise for
//! `C_TR,RT` from `C_TR,RR`). E is formed from the two fitted and two
//! derived values; S combines E at θ_T ∈ {0, π/8}, θ_R ∈ {π/16, 3π/16}.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::polcore::{
    joint_pbs_probabilities, make_triplet, mix_with_classical, BellConvention, TwoQubitState,
};
use crate::seeding::stream_rng;

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

/// The two θ_T dial settings of a Bell run.
pub const THETA_T_VALUES: [f64; 2] = [0.0, FRAC_PI_8];
/// The two θ_R evaluation angles of the S combination.
pub const THETA_R_EVAL: [f64; 2] = [PI / 16.0, 3.0 * PI / 16.0];

/// A value with a one-standard-deviation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uncertain {
    pub value: f64,
    pub sigma: f64,
}

impl std::fmt::Display for Uncertain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ± {}", self.value, self.sigma)
    }
}

/// The two coincidence combinations monitored during a Bell scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitoredPair {
    /// Detectors TT and RT.
    TtRt,
    /// Detectors TR and RR.
    TrRr,
}

impl MonitoredPair {
    pub const BOTH: [MonitoredPair; 2] = [MonitoredPair::TtRt, MonitoredPair::TrRr];

    pub fn index(self) -> usize {
        match self {
            MonitoredPair::TtRt => 0,
            MonitoredPair::TrRr => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MonitoredPair::TtRt => "TT_RT",
            MonitoredPair::TrRr => "TR_RR",
        }
    }
}

/// One scan point: counts for both monitored pairs at one θ_R dial position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub theta_r_rad: f64,
    /// Counts in [`MonitoredPair`] index order (TT·RT, TR·RR). Raw scans
    /// hold integral values; accidental subtraction makes them fractional.
    pub counts: [f64; 2],
    pub duration_s: f64,
    /// Set when accidental subtraction clipped the count at zero.
    pub floored: [bool; 2],
}

/// An accidental-coincidence rate with its calibration uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AccidentalRate {
    pub rate_per_s: f64,
    pub sigma_per_s: f64,
}

/// Coincidence counts versus analyzer angle at one θ_T setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanData {
    pub theta_t_rad: f64,
    pub points: Vec<ScanPoint>,
    /// Accidental rates per monitored pair.
    pub accidentals: [AccidentalRate; 2],
    pub seed: Option<u64>,
}

impl ScanData {
    pub fn validate(&self) -> Result<()> {
        for w in self.points.windows(2) {
            if w[1].theta_r_rad <= w[0].theta_r_rad {
                return Err(Error::Config("scan angles must be strictly increasing".into()));
            }
        }
        for p in &self.points {
            if !p.duration_s.is_finite() || p.duration_s <= 0.0 {
                return Err(Error::Config(format!(
                    "scan point duration {} s must be positive",
                    p.duration_s
                )));
            }
            if p.counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
                return Err(Error::Config("scan counts must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

/// Remove the calibrated accidental contribution from every scan point:
/// counts are reduced by rate·duration, floored at zero (with the point
/// flagged), and the rate uncertainty is left to the fit weights.
pub fn subtract_accidentals(scan: &ScanData) -> ScanData {
    let mut out = scan.clone();
    for p in &mut out.points {
        for k in 0..2 {
            let expected = scan.accidentals[k].rate_per_s * p.duration_s;
            let corrected = p.counts[k] - expected;
            if corrected < 0.0 {
                p.counts[k] = 0.0;
                p.floored[k] = true;
            } else {
                p.counts[k] = corrected;
            }
        }
    }
    out
}

/// Interference visibility [C(0) − C(π/8)] / [C(0) + C(π/8)] with
/// Poisson-propagated uncertainty.
pub fn visibility(c_zero: f64, c_eighth: f64) -> Result<Uncertain> {
    let sum = c_zero + c_eighth;
    if !sum.is_finite() || sum <= 0.0 {
        return Err(Error::Undefined("visibility needs a nonzero total count".into()));
    }
    let value = (c_zero - c_eighth) / sum;
    let sigma = 2.0 * (c_zero * c_eighth).sqrt() / sum.powf(1.5);
    Ok(Uncertain { value, sigma })
}

/// A fitted coincidence curve C(θ) = A + B·cos(4θ + δ), with the covariance
/// of (A, B, δ). B is canonicalized to be nonnegative, δ to (−π, π].
#[derive(Debug, Clone, PartialEq)]
pub struct SinusoidFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub covariance: Matrix3<f64>,
    pub n_points: usize,
}

impl SinusoidFit {
    pub fn value_at(&self, theta: f64) -> f64 {
        self.offset + self.amplitude * (4.0 * theta + self.phase).cos()
    }

    /// Gradient of the curve value with respect to (A, B, δ).
    fn grad_at(&self, theta: f64) -> Vector3<f64> {
        let arg = 4.0 * theta + self.phase;
        Vector3::new(1.0, arg.cos(), -self.amplitude * arg.sin())
    }

    pub fn sigma_at(&self, theta: f64) -> f64 {
        let g = self.grad_at(theta);
        (g.dot(&(self.covariance * g))).max(0.0).sqrt()
    }

    /// Curve visibility |B|/A with first-order uncertainty.
    pub fn visibility(&self) -> Uncertain {
        let a = self.offset;
        let b = self.amplitude;
        let value = b.abs() / a;
        // d(B/A)/dA = -B/A², d(B/A)/dB = 1/A
        let ga = -b / (a * a);
        let gb = 1.0 / a;
        let var = ga * ga * self.covariance[(0, 0)]
            + gb * gb * self.covariance[(1, 1)]
            + 2.0 * ga * gb * self.covariance[(0, 1)];
        Uncertain { value, sigma: var.max(0.0).sqrt() }
    }
}

/// Weighted least-squares fit of A + B·cos(4θ + δ) to one monitored pair of
/// a scan, with Poisson weights 1/max(counts, 1).
///
/// Needs at least 6 points spanning at least half a period (π/4 in θ).
/// Solved exactly via the linear model A + P·cos4θ + Q·sin4θ; a degenerate
/// angle set makes the normal matrix singular and is reported as a fit error.
pub fn fit_sinusoid(scan: &ScanData, pair: MonitoredPair) -> Result<SinusoidFit> {
    scan.validate()?;
    let k = pair.index();
    let n = scan.points.len();
    if n < 6 {
        return Err(Error::Fit(format!("need at least 6 points, got {n}")));
    }
    let span = scan.points[n - 1].theta_r_rad - scan.points[0].theta_r_rad;
    if span < FRAC_PI_4 - 1e-12 {
        return Err(Error::Fit(format!(
            "scan span {span:.4} rad is less than half a period (π/4)"
        )));
    }

    let mut m = Matrix3::<f64>::zeros();
    let mut v = Vector3::<f64>::zeros();
    for p in &scan.points {
        let w = 1.0 / p.counts[k].max(1.0);
        let x = Vector3::new(1.0, (4.0 * p.theta_r_rad).cos(), (4.0 * p.theta_r_rad).sin());
        m += w * x * x.transpose();
        v += w * p.counts[k] * x;
    }
    let m_inv = m.try_inverse().ok_or_else(|| {
        Error::Fit("rank-deficient design (degenerate angle set)".into())
    })?;
    // guard against numerically meaningless inversions
    if (m * m_inv - Matrix3::identity()).abs().max() > 1e-6 {
        return Err(Error::Fit("ill-conditioned design matrix".into()));
    }
    let beta = m_inv * v;
    let (a, p_coef, q_coef) = (beta[0], beta[1], beta[2]);

    // A + P cos4θ + Q sin4θ = A + B cos(4θ + δ) with B = √(P²+Q²),
    // δ = atan2(−Q, P)
    let b = (p_coef * p_coef + q_coef * q_coef).sqrt();
    let delta = if b > 0.0 { (-q_coef).atan2(p_coef) } else { 0.0 };
    let jac = if b > 0.0 {
        Matrix3::new(
            1.0, 0.0, 0.0,
            0.0, p_coef / b, q_coef / b,
            0.0, q_coef / (b * b), -p_coef / (b * b),
        )
    } else {
        Matrix3::identity()
    };
    let covariance = jac * m_inv * jac.transpose();

    Ok(SinusoidFit { offset: a, amplitude: b, phase: delta, covariance, n_points: n })
}

/// Expected counts of the unmeasured combination at `theta_r`, derived from
/// a fitted curve by the θ_R → θ_R + π/4 analyzer identity.
pub fn derived_counts(fit: &SinusoidFit, theta_r: f64) -> Uncertain {
    let shifted = theta_r + FRAC_PI_4;
    Uncertain { value: fit.value_at(shifted), sigma: fit.sigma_at(shifted) }
}

struct EWithGrads {
    e: f64,
    sigma: f64,
    /// Gradient with respect to the (A, B, δ) of the TT·RT fit.
    grad_ttrt: Vector3<f64>,
    /// Gradient with respect to the (A, B, δ) of the TR·RR fit.
    grad_trrr: Vector3<f64>,
}

fn e_with_grads(
    fit_ttrt: &SinusoidFit,
    fit_trrr: &SinusoidFit,
    theta_r: f64,
) -> Result<EWithGrads> {
    let shifted = theta_r + FRAC_PI_4;
    let c1 = fit_ttrt.value_at(theta_r);
    let c2 = fit_trrr.value_at(theta_r);
    let c3 = fit_ttrt.value_at(shifted); // derived C_TT,RR
    let c4 = fit_trrr.value_at(shifted); // derived C_TR,RT
    let num = c1 + c2 - c3 - c4;
    let den = c1 + c2 + c3 + c4;
    if den.abs() < 1e-12 {
        return Err(Error::Undefined("vanishing coincidence total in E".into()));
    }
    let e = num / den;
    // dE/dC1 = dE/dC2 = (1 − E)/D, dE/dC3 = dE/dC4 = −(1 + E)/D
    let d_meas = (1.0 - e) / den;
    let d_derived = -(1.0 + e) / den;
    let grad_ttrt = d_meas * fit_ttrt.grad_at(theta_r) + d_derived * fit_ttrt.grad_at(shifted);
    let grad_trrr = d_meas * fit_trrr.grad_at(theta_r) + d_derived * fit_trrr.grad_at(shifted);
    let var = grad_ttrt.dot(&(fit_ttrt.covariance * grad_ttrt))
        + grad_trrr.dot(&(fit_trrr.covariance * grad_trrr));
    Ok(EWithGrads { e, sigma: var.max(0.0).sqrt(), grad_ttrt, grad_trrr })
}

/// The CHSH correlation E(θ_T, θ_R) built from the two fitted curves at one
/// θ_T: measured C_TT,RT and C_TR,RR enter positively, the derived C_TT,RR
/// and C_TR,RT negatively, normalized by the total.
pub fn chsh_e(
    fit_ttrt: &SinusoidFit,
    fit_trrr: &SinusoidFit,
    theta_r: f64,
) -> Result<Uncertain> {
    let e = e_with_grads(fit_ttrt, fit_trrr, theta_r)?;
    Ok(Uncertain { value: e.e, sigma: e.sigma })
}

/// The fitted curves of one Bell run: index [θ_T index][monitored pair].
pub type BellFits = [[SinusoidFit; 2]; 2];

/// The CHSH result: S, its first-order uncertainty, the four E values in
/// the order E(0,π/16), E(π/8,π/16), E(0,3π/16), E(π/8,3π/16), and the fits
/// they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshResult {
    pub s: f64,
    pub sigma_s: f64,
    pub e_values: [Uncertain; 4],
    pub fits: BellFits,
}

/// S = |E(0,π/16) − E(π/8,π/16) + E(0,3π/16) + E(π/8,3π/16)| with the
/// uncertainty propagated through the shared fit covariances (E values at
/// the two θ_R come from the same fits and are correlated).
pub fn chsh_s(fits: &BellFits) -> Result<ChshResult> {
    let [r1, r2] = THETA_R_EVAL;
    let e_0_r1 = e_with_grads(&fits[0][0], &fits[0][1], r1)?;
    let e_8_r1 = e_with_grads(&fits[1][0], &fits[1][1], r1)?;
    let e_0_r2 = e_with_grads(&fits[0][0], &fits[0][1], r2)?;
    let e_8_r2 = e_with_grads(&fits[1][0], &fits[1][1], r2)?;

    let signed = e_0_r1.e - e_8_r1.e + e_0_r2.e + e_8_r2.e;

    // per-fit gradients of the signed sum
    let blocks = [
        (&fits[0][0], e_0_r1.grad_ttrt + e_0_r2.grad_ttrt),
        (&fits[0][1], e_0_r1.grad_trrr + e_0_r2.grad_trrr),
        (&fits[1][0], -e_8_r1.grad_ttrt + e_8_r2.grad_ttrt),
        (&fits[1][1], -e_8_r1.grad_trrr + e_8_r2.grad_trrr),
    ];
    let var: f64 = blocks
        .iter()
        .map(|(fit, g)| g.dot(&(fit.covariance * g)))
        .sum();

    Ok(ChshResult {
        s: signed.abs(),
        sigma_s: var.max(0.0).sqrt(),
        e_values: [
            Uncertain { value: e_0_r1.e, sigma: e_0_r1.sigma },
            Uncertain { value: e_8_r1.e, sigma: e_8_r1.sigma },
            Uncertain { value: e_0_r2.e, sigma: e_0_r2.sigma },
            Uncertain { value: e_8_r2.e, sigma: e_8_r2.sigma },
        ],
        fits: fits.clone(),
    })
}

/// Fit both monitored pairs of both scans and form the CHSH result.
pub fn chsh_from_scans(scan_t0: &ScanData, scan_t8: &ScanData) -> Result<ChshResult> {
    let fits: BellFits = [
        [
            fit_sinusoid(scan_t0, MonitoredPair::TtRt)?,
            fit_sinusoid(scan_t0, MonitoredPair::TrRr)?,
        ],
        [
            fit_sinusoid(scan_t8, MonitoredPair::TtRt)?,
            fit_sinusoid(scan_t8, MonitoredPair::TrRr)?,
        ],
    ];
    chsh_s(&fits)
}

/// Parametric-bootstrap uncertainty on S: redraw every scan count from a
/// Poisson with the observed mean, refit, recompute S, and return the sample
/// standard deviation over `draws`. Cross-checks the first-order propagation.
pub fn bootstrap_sigma_s(
    scan_t0: &ScanData,
    scan_t8: &ScanData,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    if draws < 2 {
        return Err(Error::Domain("bootstrap needs at least 2 draws".into()));
    }
    let mut rng = stream_rng(seed, "analysis/bootstrap");
    let mut samples = Vec::with_capacity(draws);
    let resample = |scan: &ScanData, rng: &mut rand_chacha::ChaCha12Rng| -> ScanData {
        let mut out = scan.clone();
        for p in &mut out.points {
            for c in &mut p.counts {
                *c = if *c > 0.0 {
                    Poisson::new(*c).expect("positive mean").sample(rng)
                } else {
                    0.0
                };
            }
        }
        out
    };
    for _ in 0..draws {
        let t0 = resample(scan_t0, &mut rng);
        let t8 = resample(scan_t8, &mut rng);
        samples.push(chsh_from_scans(&t0, &t8)?.s);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}

/// Closed-form S for a pair state under given conventions: E values come
/// straight from [`joint_pbs_probabilities`], no fitting involved. The
/// analytic oracle for the whole Monte Carlo + fit pipeline.
pub fn chsh_closed_form_for_state(state: &TwoQubitState, convention: &BellConvention) -> f64 {
    let e = |theta_t: f64, theta_r: f64| {
        joint_pbs_probabilities(
            state,
            convention.setting_t(theta_t),
            convention.setting_r(theta_r),
        )
        .correlation()
    };
    let [t0, t8] = THETA_T_VALUES;
    let [r1, r2] = THETA_R_EVAL;
    (e(t0, r1) - e(t8, r1) + e(t0, r2) + e(t8, r2)).abs()
}

/// Closed-form S for the mixed pair state prepared with the convention's
/// phase and coherent fraction `mix_p`.
pub fn chsh_closed_form(convention: &BellConvention, mix_p: f64) -> Result<f64> {
    let state = mix_with_classical(&make_triplet(convention.pair_phase), mix_p)?;
    Ok(chsh_closed_form_for_state(&state, convention))
}

/// Result of the convention grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct ConventionCalibration {
    pub convention: BellConvention,
    /// S achieved by the returned convention for the ideal state.
    pub s: f64,
    pub grid_resolution_rad: f64,
}

/// Find the analyzer conventions (per-arm frame offsets in [0, π/2), mirror
/// flags, state phase in [0, 2π)) that maximize the CHSH combination for the
/// state produced by `make_state`, by exhaustive grid search at resolution
/// (π/2)/`steps_per_quarter_turn` followed by local refinement.
///
/// Ties (the maximum is highly degenerate) go to the lexicographically
/// smallest tuple (offset_T, offset_R, mirrored_T, mirrored_R, phase).
pub fn calibrate_conventions<F>(make_state: F, steps_per_quarter_turn: usize) -> ConventionCalibration
where
    F: Fn(f64) -> TwoQubitState,
{
    let steps = steps_per_quarter_turn.max(1);
    let res = (PI / 2.0) / steps as f64;
    let s_of = |offset_t: f64, offset_r: f64, m_t: bool, m_r: bool, phase: f64| -> f64 {
        let convention = BellConvention {
            offset_t,
            offset_r,
            mirrored_t: m_t,
            mirrored_r: m_r,
            pair_phase: phase,
        };
        chsh_closed_form_for_state(&make_state(phase), &convention)
    };

    let mut best = (0.0, 0.0, false, false, 0.0);
    let mut best_s = f64::NEG_INFINITY;
    for i in 0..steps {
        let offset_t = i as f64 * res;
        for j in 0..steps {
            let offset_r = j as f64 * res;
            for m_t in [false, true] {
                for m_r in [false, true] {
                    for k in 0..(4 * steps) {
                        let phase = k as f64 * res;
                        let s = s_of(offset_t, offset_r, m_t, m_r, phase);
                        if s > best_s + 1e-12 {
                            best_s = s;
                            best = (offset_t, offset_r, m_t, m_r, phase);
                        }
                    }
                }
            }
        }
    }

    // local coordinate refinement of the continuous parameters
    let (mut offset_t, mut offset_r, m_t, m_r, mut phase) = best;
    let mut step = res / 2.0;
    while step > 1e-10 {
        let mut improved = true;
        while improved {
            improved = false;
            for (idx, delta) in [(0usize, step), (0, -step), (1, step), (1, -step),
                                 (2, step), (2, -step)] {
                let (t, r, ph) = match idx {
                    0 => (offset_t + delta, offset_r, phase),
                    1 => (offset_t, offset_r + delta, phase),
                    _ => (offset_t, offset_r, phase + delta),
                };
                let s = s_of(t, r, m_t, m_r, ph);
                if s > best_s + 1e-14 {
                    best_s = s;
                    offset_t = t;
                    offset_r = r;
                    phase = ph;
                    improved = true;
                }
            }
        }
        step /= 2.0;
    }

    ConventionCalibration {
        convention: BellConvention {
            offset_t,
            offset_r,
            mirrored_t: m_t,
            mirrored_r: m_r,
            pair_phase: phase,
        },
        s: best_s,
        grid_resolution_rad: res,
    }
}

/// Build a noiseless scan from closed-form probabilities under a convention:
/// counts are probability × `scale` at each of `n` equally spaced θ_R dial
/// positions. Useful as a fit/E/S oracle and for synthetic data.
pub fn synthetic_scan(
    state: &TwoQubitState,
    convention: &BellConvention,
    theta_t: f64,
    n: usize,
    step: f64,
    scale: f64,
    duration_s: f64,
) -> ScanData {
    let points = (0..n)
        .map(|i| {
            let theta_r = i as f64 * step;
            let probs = joint_pbs_probabilities(
                state,
                convention.setting_t(theta_t),
                convention.setting_r(theta_r),
            );
            ScanPoint {
                theta_r_rad: theta_r,
                counts: [probs.tt_rt * scale, probs.tr_rr * scale],
                duration_s,
                floored: [false, false],
            }
        })
        .collect();
    ScanData {
        theta_t_rad: theta_t,
        points,
        accidentals: [AccidentalRate::default(); 2],
        seed: None,
    }
}

/// Add Poisson noise to every count of a scan (for fit-recovery studies).
pub fn poissonize_scan<R: Rng>(scan: &ScanData, rng: &mut R) -> ScanData {
    let mut out = scan.clone();
    for p in &mut out.points {
        for c in &mut p.counts {
            *c = if *c > 0.0 {
                Poisson::new(*c).expect("positive mean").sample(rng)
            } else {
                0.0
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

    fn flat_scan(theta_t: f64, counts: f64, n: usize) -> ScanData {
        ScanData {
            theta_t_rad: theta_t,
            points: (0..n)
                .map(|i| ScanPoint {
                    theta_r_rad: i as f64 * PI / 16.0,
                    counts: [counts, counts],
                    duration_s: 10.0,
                    floored: [false, false],
                })
                .collect(),
            accidentals: [AccidentalRate::default(); 2],
            seed: None,
        }
    }

    fn model_scan(a: f64, b: f64, delta: f64, n: usize) -> ScanData {
        ScanData {
            theta_t_rad: 0.0,
            points: (0..n)
                .map(|i| {
                    let theta = i as f64 * PI / 16.0;
                    let c = a + b * (4.0 * theta + delta).cos();
                    ScanPoint {
                        theta_r_rad: theta,
                        counts: [c, c],
                        duration_s: 10.0,
                        floored: [false, false],
                    }
                })
                .collect(),
            accidentals: [AccidentalRate::default(); 2],
            seed: None,
        }
    }

    #[test]
    fn visibility_reference_values() {
        let v = visibility(46_100.0, 11_800.0).unwrap();
        assert_abs_diff_eq!(v.value, 0.5925, epsilon = 1.0e-4);
        assert_abs_diff_eq!(visibility(500.0, 500.0).unwrap().value, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(visibility(500.0, 0.0).unwrap().value, 1.0, epsilon = 1e-15);
        assert!(visibility(0.0, 0.0).is_err());
    }

    #[test]
    fn accidental_subtraction_arithmetic() {
        let mut scan = flat_scan(0.0, 12_012.0, 8);
        scan.accidentals = [AccidentalRate { rate_per_s: 12.0, sigma_per_s: 0.5 }; 2];
        let sub = subtract_accidentals(&scan);
        assert_abs_diff_eq!(sub.points[0].counts[0], 11_892.0, epsilon = 1e-9);

        let mut scan = flat_scan(0.0, 12_120.0, 8);
        scan.accidentals = [AccidentalRate { rate_per_s: 12.0, sigma_per_s: 0.5 }; 2];
        let sub = subtract_accidentals(&scan);
        assert_abs_diff_eq!(sub.points[0].counts[0], 12_000.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_rate_subtraction_is_identity() {
        let scan = flat_scan(0.0, 321.0, 8);
        assert_eq!(subtract_accidentals(&scan), scan);
    }

    #[test]
    fn subtraction_floors_at_zero_and_flags() {
        let mut scan = flat_scan(0.0, 5.0, 8);
        scan.accidentals = [AccidentalRate { rate_per_s: 1.0, sigma_per_s: 0.1 }; 2];
        let sub = subtract_accidentals(&scan);
        assert_eq!(sub.points[0].counts[0], 0.0);
        assert!(sub.points[0].floored[0]);
    }

    #[test]
    fn subtraction_commutes_with_scan_concatenation() {
        let mut first = flat_scan(0.0, 900.0, 8);
        first.accidentals = [AccidentalRate { rate_per_s: 3.0, sigma_per_s: 0.2 }; 2];
        let mut second = flat_scan(0.0, 700.0, 8);
        for (i, p) in second.points.iter_mut().enumerate() {
            p.theta_r_rad += 8.0 * PI / 16.0 + i as f64 * 1e-9;
        }
        second.accidentals = first.accidentals;

        let merge = |a: &ScanData, b: &ScanData| {
            let mut out = a.clone();
            out.points.extend(b.points.iter().copied());
            out
        };
        let sub_then_merge = merge(&subtract_accidentals(&first), &subtract_accidentals(&second));
        let merge_then_sub = subtract_accidentals(&merge(&first, &second));
        assert_eq!(sub_then_merge, merge_then_sub);
    }

    #[test]
    fn noiseless_fit_is_exact() {
        let scan = model_scan(100.0, -90.0, 0.3, 32);
        let fit = fit_sinusoid(&scan, MonitoredPair::TtRt).unwrap();
        assert_abs_diff_eq!(fit.offset, 100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.amplitude, 90.0, epsilon = 1e-9);
        for p in &scan.points {
            assert_abs_diff_eq!(fit.value_at(p.theta_r_rad), p.counts[0], epsilon = 1e-9);
        }
        // B < 0 is absorbed into the phase
        assert!(fit.amplitude >= 0.0);
        assert!((-PI..=PI).contains(&fit.phase));
    }

    #[test]
    fn fit_rejects_degenerate_designs() {
        let scan = flat_scan(0.0, 100.0, 5);
        assert!(matches!(fit_sinusoid(&scan, MonitoredPair::TtRt), Err(Error::Fit(_))));

        // 6 points crammed into less than half a period
        let mut narrow = flat_scan(0.0, 100.0, 6);
        for (i, p) in narrow.points.iter_mut().enumerate() {
            p.theta_r_rad = i as f64 * 0.05;
        }
        assert!(matches!(fit_sinusoid(&narrow, MonitoredPair::TtRt), Err(Error::Fit(_))));
    }

    #[test]
    fn single_poisson_trial_recovers_visibility_within_3_sigma() {
        let truth = model_scan(6000.0, 5880.0, 0.4, 32);
        let mut rng = stream_rng(77, "test/fit");
        let noisy = poissonize_scan(&truth, &mut rng);
        let fit = fit_sinusoid(&noisy, MonitoredPair::TtRt).unwrap();
        let v = fit.visibility();
        assert!((v.value - 0.98).abs() < 3.0 * v.sigma, "v = {v}");
    }

    #[test]
    fn derived_counts_shift_by_quarter_period() {
        let scan = model_scan(100.0, 40.0, 0.0, 32);
        let fit = fit_sinusoid(&scan, MonitoredPair::TtRt).unwrap();
        // quarter-period shift negates the cosine
        assert_abs_diff_eq!(derived_counts(&fit, 0.0).value, 100.0 - 40.0, epsilon = 1e-9);
        // two shifts return to the original value (period π/2)
        let twice = fit.value_at(0.3 + 2.0 * FRAC_PI_4);
        assert_abs_diff_eq!(twice, fit.value_at(0.3), epsilon = 1e-9);
    }

    #[test]
    fn equal_counts_give_zero_e() {
        let scan = flat_scan(0.0, 4000.0, 32);
        let fit1 = fit_sinusoid(&scan, MonitoredPair::TtRt).unwrap();
        let fit2 = fit_sinusoid(&scan, MonitoredPair::TrRr).unwrap();
        let e = chsh_e(&fit1, &fit2, THETA_R_EVAL[0]).unwrap();
        assert_abs_diff_eq!(e.value, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn ideal_scans_reproduce_the_closed_form_e_and_s() {
        let convention = BellConvention::default();
        let state = make_triplet(convention.pair_phase);
        let scan = |theta_t: f64| {
            synthetic_scan(&state, &convention, theta_t, 32, PI / 16.0, 24_000.0, 10.0)
        };
        let t0 = scan(THETA_T_VALUES[0]);
        let t8 = scan(THETA_T_VALUES[1]);
        let result = chsh_from_scans(&t0, &t8).unwrap();
        assert_abs_diff_eq!(result.s, 2.0 * SQRT_2, epsilon = 1e-9);
        assert_abs_diff_eq!(result.e_values[0].value.abs(), SQRT_2 / 2.0, epsilon = 1e-9);
        // noiseless data: every |E| is the quantum value at these settings
        for e in result.e_values {
            assert_abs_diff_eq!(e.value.abs(), SQRT_2 / 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn classical_state_gives_sqrt_2() {
        let s = chsh_closed_form(&BellConvention::default(), 0.0).unwrap();
        assert_abs_diff_eq!(s, SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn classical_flat_curves_give_zero_e_at_pi_over_8() {
        // fully mixed state at θ_T = π/8: both monitored curves are flat and
        // E vanishes for every θ_R
        let convention = BellConvention::default();
        let state = mix_with_classical(&make_triplet(convention.pair_phase), 0.0).unwrap();
        let scan =
            synthetic_scan(&state, &convention, FRAC_PI_8, 32, PI / 16.0, 24_000.0, 10.0);
        let fit1 = fit_sinusoid(&scan, MonitoredPair::TtRt).unwrap();
        let fit2 = fit_sinusoid(&scan, MonitoredPair::TrRr).unwrap();
        for theta_r in [0.0, 0.3, THETA_R_EVAL[0], THETA_R_EVAL[1]] {
            let e = chsh_e(&fit1, &fit2, theta_r).unwrap();
            assert_abs_diff_eq!(e.value, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn nominal_convention_scores_zero() {
        let s = chsh_closed_form(&BellConvention::nominal(), 1.0).unwrap();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn calibration_finds_the_default_convention() {
        let cal = calibrate_conventions(make_triplet, 8);
        assert_abs_diff_eq!(cal.s, 2.0 * SQRT_2, epsilon = 1e-9);
        let conv = cal.convention;
        let default = BellConvention::default();
        assert_abs_diff_eq!(conv.offset_t, default.offset_t, epsilon = 1e-9);
        assert_abs_diff_eq!(conv.offset_r, default.offset_r, epsilon = 1e-9);
        assert_eq!(conv.mirrored_t, default.mirrored_t);
        assert_eq!(conv.mirrored_r, default.mirrored_r);
        assert_abs_diff_eq!(conv.pair_phase, default.pair_phase, epsilon = 1e-9);
    }

    #[test]
    fn calibrated_s_is_invariant_under_half_period_offset_shift() {
        let convention = BellConvention::default();
        let shifted = BellConvention {
            offset_r: convention.offset_r + PI / 2.0,
            ..convention
        };
        let s0 = chsh_closed_form(&convention, 1.0).unwrap();
        let s1 = chsh_closed_form(&shifted, 1.0).unwrap();
        assert_abs_diff_eq!(s0, s1, epsilon = 1e-9);
    }

    #[test]
    fn s_is_monotone_in_the_coherent_fraction() {
        let convention = BellConvention::default();
        let mut last = -1.0;
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let s = chsh_closed_form(&convention, p).unwrap();
            assert!(s >= last - 1e-12, "S({p}) = {s} < {last}");
            last = s;
        }
        assert_abs_diff_eq!(last, 2.0 * SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn propagated_sigma_matches_bootstrap() {
        let convention = BellConvention::default();
        let state = mix_with_classical(&make_triplet(convention.pair_phase), 0.93).unwrap();
        let truth_t0 =
            synthetic_scan(&state, &convention, THETA_T_VALUES[0], 32, PI / 16.0, 24_000.0, 10.0);
        let truth_t8 =
            synthetic_scan(&state, &convention, THETA_T_VALUES[1], 32, PI / 16.0, 24_000.0, 10.0);
        let mut rng = stream_rng(5, "test/sigma");
        let t0 = poissonize_scan(&truth_t0, &mut rng);
        let t8 = poissonize_scan(&truth_t8, &mut rng);
        let result = chsh_from_scans(&t0, &t8).unwrap();
        let boot = bootstrap_sigma_s(&t0, &t8, 200, 11).unwrap();
        assert!(
            result.sigma_s / boot < 1.6 && boot / result.sigma_s < 1.6,
            "propagated {} vs bootstrap {boot}",
            result.sigma_s
        );
    }

    #[test]
    fn fit_invariants_hold_on_noisy_data() {
        let convention = BellConvention::default();
        let state = mix_with_classical(&make_triplet(convention.pair_phase), 0.93).unwrap();
        let truth =
            synthetic_scan(&state, &convention, THETA_T_VALUES[1], 32, PI / 16.0, 24_000.0, 10.0);
        let mut rng = stream_rng(13, "test/fit-invariants");
        for _ in 0..20 {
            let noisy = poissonize_scan(&truth, &mut rng);
            for pair in MonitoredPair::BOTH {
                let fit = fit_sinusoid(&noisy, pair).unwrap();
                let v = fit.visibility();
                let sigma_b = fit.covariance[(1, 1)].sqrt();
                assert!(fit.offset >= fit.amplitude - 3.0 * sigma_b);
                assert!(v.value >= 0.0 && v.value <= 1.0 + 3.0 * v.sigma);
            }
        }
    }
}
