//! Exact polarization-state algebra for the two-photon bench.
//!
//! Everything here is closed-form and deterministic; the Monte Carlo code in
//! [`crate::bench`] samples from the probabilities computed in this module,
//! and the test suites use these functions as oracles.
//!
//! Conventions, pinned for bit-exact tests:
//!
//! - Single-photon basis is (H, V).
//! - Two-photon basis is ordered (HH, HV, VH, VV) with the first slot the
//!   transmitted (T) arm and the second the reflected (R) arm.
//! - A half-wave plate at dial angle θ rotates polarization by 2θ; its Jones
//!   matrix is the Hermitian reflection [cos 2α, sin 2α; sin 2α, −cos 2α]
//!   where α is the arm's effective dial angle.
//! - Each polarizing beam splitter transmits the analyzed H component and
//!   reflects the analyzed V component.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity / trace tolerance for state validation.
pub const STATE_TOL: f64 = 1e-12;
/// Eigenvalue floor for the positive-semidefinite check; accommodates
/// accumulation in 4×4 eigensolves.
pub const PSD_EIG_FLOOR: f64 = -1e-10;

/// Photon polarization label along the analysis basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn index(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// One arm's half-wave-plate dial setting.
///
/// `theta` is the dial angle actually scanned; `frame_offset` is the fixed
/// offset of that dial's zero mark; `mirrored` flags an arm whose transverse
/// frame is parity-flipped (a reflection in the beam path), which negates the
/// effective angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSetting {
    pub theta: f64,
    pub frame_offset: f64,
    pub mirrored: bool,
}

impl AnalyzerSetting {
    pub fn new(theta: f64, frame_offset: f64, mirrored: bool) -> Self {
        Self { theta, frame_offset, mirrored }
    }

    /// A plain dial setting: no offset, not mirrored.
    pub fn dial(theta: f64) -> Self {
        Self::new(theta, 0.0, false)
    }

    /// Same frame, new dial angle. Used when scanning one arm.
    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    /// Effective dial angle α; the polarization analysis direction is 2α.
    pub fn effective_angle(&self) -> f64 {
        let sign = if self.mirrored { -1.0 } else { 1.0 };
        sign * (self.theta + self.frame_offset)
    }
}

/// A 2×2 operator on the (H, V) single-photon basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolOperator {
    entries: Matrix2<Complex64>,
}

impl PolOperator {
    pub fn from_matrix(entries: Matrix2<Complex64>) -> Self {
        Self { entries }
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.entries
    }

    /// ‖M†M − 1‖_max, zero for a unitary operator.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.entries.adjoint() * self.entries - Matrix2::identity();
        d.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// ‖M·M − 1‖_max, zero for an involution (Hermitian reflection).
    pub fn involution_defect(&self) -> f64 {
        let d = self.entries * self.entries - Matrix2::identity();
        d.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Half-wave-plate operator for an analyzer setting.
///
/// With α the setting's effective angle, the matrix is
/// [cos 2α, sin 2α; sin 2α, −cos 2α]: unitary, Hermitian, self-inverse.
pub fn hwp_operator(setting: AnalyzerSetting) -> PolOperator {
    let a = 2.0 * setting.effective_angle();
    let (s, c) = a.sin_cos();
    let re = |x: f64| Complex64::new(x, 0.0);
    PolOperator::from_matrix(Matrix2::new(re(c), re(s), re(s), re(-c)))
}

/// A two-photon polarization state as a 4×4 density matrix over the ordered
/// basis (HH, HV, VH, VV); first slot is the transmitted arm.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<Complex64>,
}

impl TwoQubitState {
    /// Validate and wrap a density matrix: Hermitian and unit trace within
    /// [`STATE_TOL`], minimum eigenvalue ≥ [`PSD_EIG_FLOOR`].
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self> {
        let herm_defect = (rho - rho.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if herm_defect > STATE_TOL {
            return Err(Error::Domain(format!(
                "density matrix not Hermitian (defect {herm_defect:.3e})"
            )));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::Domain(format!("density matrix trace {trace} != 1")));
        }
        let min_eig = rho
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &e| m.min(e));
        if min_eig < PSD_EIG_FLOOR {
            return Err(Error::Domain(format!(
                "density matrix not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { rho })
    }

    fn from_pure(psi: Vector4<Complex64>) -> Self {
        let n = psi.norm();
        let psi = psi / Complex64::new(n, 0.0);
        Self { rho: psi * psi.adjoint() }
    }

    pub fn rho(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    /// Diagonal of the density matrix in basis order (HH, HV, VH, VV).
    pub fn diagonal(&self) -> [f64; 4] {
        let d = self.rho.diagonal();
        [d[0].re, d[1].re, d[2].re, d[3].re]
    }

    /// tr(ρ²); 1 for a pure state.
    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Conjugate the state by a product operator U_T ⊗ U_R.
    pub fn apply_local(&self, op_t: &PolOperator, op_r: &PolOperator) -> Self {
        let u = op_t.matrix().kronecker(op_r.matrix());
        Self { rho: u * self.rho * u.adjoint() }
    }
}

/// The pair state after both photons of a collinear pair pass the
/// polarization-erasing rotation: (|HH⟩ + e^{iφ}|VV⟩)/√2 as a density matrix.
///
/// `phase = π` gives the (|HH⟩ − |VV⟩)/√2 output of the single-beam bench.
pub fn make_biphoton(phase: f64) -> TwoQubitState {
    let z = Complex64::new(0.0, 0.0);
    let a = Complex64::new(1.0 / f64::sqrt(2.0), 0.0);
    let b = Complex64::from_polar(1.0 / f64::sqrt(2.0), phase);
    TwoQubitState::from_pure(Vector4::new(a, z, z, b))
}

/// The post-selected two-arm pair state (|H⟩_T|V⟩_R + e^{iφ}|V⟩_T|H⟩_R)/√2.
///
/// `phase = 0` is the entangled triplet produced by splitting an H/V pair on
/// a 50/50 beam splitter.
pub fn make_triplet(phase: f64) -> TwoQubitState {
    let z = Complex64::new(0.0, 0.0);
    let a = Complex64::new(1.0 / f64::sqrt(2.0), 0.0);
    let b = Complex64::from_polar(1.0 / f64::sqrt(2.0), phase);
    TwoQubitState::from_pure(Vector4::new(z, a, b, z))
}

/// Mix a state with the classically correlated H/V pair,
/// p·ρ + (1−p)·(|HV⟩⟨HV| + |VH⟩⟨VH|)/2.
///
/// The classical part models pairs that stayed distinguishable; `p` is the
/// coherent (indistinguishable) fraction.
pub fn mix_with_classical(state: &TwoQubitState, p: f64) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("mixing fraction p = {p} outside [0, 1]")));
    }
    let mut classical = Matrix4::zeros();
    classical[(1, 1)] = Complex64::new(0.5, 0.0);
    classical[(2, 2)] = Complex64::new(0.5, 0.0);
    let cp = Complex64::new(p, 0.0);
    let cq = Complex64::new(1.0 - p, 0.0);
    Ok(TwoQubitState { rho: state.rho * cp + classical * cq })
}

/// Probabilities of the four joint PBS outcomes after the arm wave plates.
///
/// Field names follow the detector pair that fires: `tt_rt` means the T-arm
/// PBS transmitted (detector TT) and the R-arm PBS transmitted (detector RT).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointProbabilities {
    pub tt_rt: f64,
    pub tt_rr: f64,
    pub tr_rt: f64,
    pub tr_rr: f64,
}

impl JointProbabilities {
    /// In the order (TT·RT, TT·RR, TR·RT, TR·RR).
    pub fn as_array(&self) -> [f64; 4] {
        [self.tt_rt, self.tt_rr, self.tr_rt, self.tr_rr]
    }

    pub fn sum(&self) -> f64 {
        self.tt_rt + self.tt_rr + self.tr_rt + self.tr_rr
    }

    /// The correlation E = P(++) + P(−−) − P(+−) − P(−+) of the transmitted
    /// ports, the per-setting ingredient of the CHSH statistic.
    pub fn correlation(&self) -> f64 {
        self.tt_rt + self.tr_rr - self.tt_rr - self.tr_rt
    }
}

/// Joint probabilities of the four PBS port outcomes for a split pair
/// analyzed with half-wave plates at `setting_t` and `setting_r`.
pub fn joint_pbs_probabilities(
    state: &TwoQubitState,
    setting_t: AnalyzerSetting,
    setting_r: AnalyzerSetting,
) -> JointProbabilities {
    let rotated = state.apply_local(&hwp_operator(setting_t), &hwp_operator(setting_r));
    let d = rotated.diagonal();
    let clamp = |x: f64| x.clamp(0.0, 1.0);
    JointProbabilities {
        tt_rt: clamp(d[0]),
        tt_rr: clamp(d[1]),
        tr_rt: clamp(d[2]),
        tr_rr: clamp(d[3]),
    }
}

/// Closed-form coincidence probability between the two PBS ports of the
/// single (transmitted) beam, normalized to 1 at θ = 0.
///
/// A fraction `p` of pairs interferes (coincidence probability cos²4θ; the
/// null at θ = π/8 is the polarization analog of the Hong-Ou-Mandel dip);
/// the rest behaves classically (1 − sin²(4θ)/2, which is 1/2 at θ = π/8).
pub fn single_beam_coincidence_prob(theta: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "indistinguishability p = {p} outside [0, 1]"
        )));
    }
    let c4 = (4.0 * theta).cos();
    let s4 = (4.0 * theta).sin();
    Ok(p * c4 * c4 + (1.0 - p) * (1.0 - 0.5 * s4 * s4))
}

/// Interference visibility [C(0) − C(π/8)] / [C(0) + C(π/8)] implied by the
/// single-beam closed form: V = (1 + p)/(3 − p).
pub fn visibility_from_p(p: f64) -> f64 {
    (1.0 + p) / (3.0 - p)
}

/// Inverse of [`visibility_from_p`], clamped into [0, 1].
pub fn p_from_visibility(v: f64) -> f64 {
    ((3.0 * v - 1.0) / (1.0 + v)).clamp(0.0, 1.0)
}

/// Analyzer dial conventions for the two-arm bench: each arm's frame offset
/// and mirror parity, plus the relative phase the pair state picks up on the
/// way to the analyzers.
///
/// These are experimental calibrations, not physics: the CHSH combination
/// used by the analysis evaluates to zero for the nominal conventions, so a
/// working bench needs the offsets found by
/// `analysis::calibrate_conventions`. `Default` is that calibrated tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellConvention {
    pub offset_t: f64,
    pub offset_r: f64,
    pub mirrored_t: bool,
    pub mirrored_r: bool,
    /// Phase of the prepared pair state, fed to [`make_triplet`].
    pub pair_phase: f64,
}

impl BellConvention {
    /// Zero offsets, no mirrors, phase 0. Yields S = 0 for the analysis
    /// module's CHSH sign pattern; kept for tests and calibration baselines.
    pub fn nominal() -> Self {
        Self {
            offset_t: 0.0,
            offset_r: 0.0,
            mirrored_t: false,
            mirrored_r: false,
            pair_phase: 0.0,
        }
    }

    /// T-arm analyzer setting at dial angle `theta`.
    pub fn setting_t(&self, theta: f64) -> AnalyzerSetting {
        AnalyzerSetting::new(theta, self.offset_t, self.mirrored_t)
    }

    /// R-arm analyzer setting at dial angle `theta`.
    pub fn setting_r(&self, theta: f64) -> AnalyzerSetting {
        AnalyzerSetting::new(theta, self.offset_r, self.mirrored_r)
    }
}

impl Default for BellConvention {
    fn default() -> Self {
        // Calibrated: smallest-offset tuple maximizing the CHSH combination
        // for the ideal pair state (S = 2√2). Pinned by tests against the
        // grid search in analysis::calibrate_conventions.
        Self {
            offset_t: 0.0,
            offset_r: std::f64::consts::FRAC_PI_8,
            mirrored_t: false,
            mirrored_r: false,
            pair_phase: std::f64::consts::PI,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_8, PI};

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn assert_state_valid(state: &TwoQubitState) {
        // new() re-validates Hermiticity, trace, and the PSD floor.
        TwoQubitState::new(*state.rho()).unwrap();
    }

    /// Concurrence of an X-shaped density matrix (all our constructed states
    /// are X-shaped): C = 2·max(0, |ρ23| − √(ρ11ρ44), |ρ14| − √(ρ22ρ33)).
    /// Test-side oracle, independent of the production code paths.
    fn x_state_concurrence(state: &TwoQubitState) -> f64 {
        let r = state.rho();
        let d = state.diagonal();
        let inner = r[(1, 2)].norm() - (d[0] * d[3]).sqrt();
        let outer = r[(0, 3)].norm() - (d[1] * d[2]).sqrt();
        (2.0 * inner.max(outer)).max(0.0)
    }

    #[test]
    fn hwp_zero_is_h_v_reflection() {
        let m = hwp_operator(AnalyzerSetting::dial(0.0));
        let e = m.matrix();
        assert_abs_diff_eq!(e[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(0, 1)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(1, 0)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(1, 1)].re, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn hwp_pi_over_8_is_quarter_turn_rotation() {
        let m = hwp_operator(AnalyzerSetting::dial(FRAC_PI_8));
        let e = m.matrix();
        assert_abs_diff_eq!(e[(0, 0)].re, SQRT_HALF, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(0, 1)].re, SQRT_HALF, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(1, 0)].re, SQRT_HALF, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(1, 1)].re, -SQRT_HALF, epsilon = 1e-15);
    }

    #[test]
    fn mirrored_setting_negates_the_angle() {
        let mirrored = hwp_operator(AnalyzerSetting::new(PI / 16.0, 0.0, true));
        let negated = hwp_operator(AnalyzerSetting::dial(-PI / 16.0));
        assert_eq!(mirrored.matrix(), negated.matrix());
    }

    #[test]
    fn biphoton_phase_pi_matches_the_minus_superposition() {
        let s = make_biphoton(PI);
        let d = s.diagonal();
        assert_abs_diff_eq!(d[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[3], 0.5, epsilon = 1e-15);
        // coherence carries the minus sign
        assert_abs_diff_eq!(s.rho()[(0, 3)].re, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.rho()[(0, 3)].im, 0.0, epsilon = 1e-12);
        assert_state_valid(&s);
    }

    #[test]
    fn biphoton_phase_zero_is_the_plus_superposition() {
        let s = make_biphoton(0.0);
        assert_abs_diff_eq!(s.rho()[(0, 3)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.diagonal()[0], 0.5, epsilon = 1e-15);
        assert_state_valid(&s);
    }

    #[test]
    fn triplet_phase_zero_diagonal_and_coherence() {
        let s = make_triplet(0.0);
        let d = s.diagonal();
        assert_abs_diff_eq!(d[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[3], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.rho()[(1, 2)].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn triplet_phase_pi_keeps_the_diagonal() {
        let s = make_triplet(PI);
        let d = s.diagonal();
        assert_abs_diff_eq!(d[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.rho()[(1, 2)].re, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn mixing_with_p_one_is_identity() {
        let t = make_triplet(0.3);
        let m = mix_with_classical(&t, 1.0).unwrap();
        assert_eq!(t.rho(), m.rho());
    }

    #[test]
    fn mixing_with_p_zero_kills_coherence() {
        let m = mix_with_classical(&make_triplet(0.0), 0.0).unwrap();
        let d = m.diagonal();
        assert_abs_diff_eq!(d[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.rho()[(1, 2)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mixing_scales_coherence_linearly() {
        let m = mix_with_classical(&make_triplet(0.0), 0.93).unwrap();
        assert_abs_diff_eq!(m.rho()[(1, 2)].norm(), 0.465, epsilon = 1e-12);
    }

    #[test]
    fn mixing_rejects_out_of_range_p() {
        let t = make_triplet(0.0);
        assert!(mix_with_classical(&t, -0.1).is_err());
        assert!(mix_with_classical(&t, 1.1).is_err());
    }

    #[test]
    fn triplet_joint_probabilities_at_zero_dials() {
        let p = joint_pbs_probabilities(
            &make_triplet(0.0),
            AnalyzerSetting::dial(0.0),
            AnalyzerSetting::dial(0.0),
        );
        assert_abs_diff_eq!(p.tt_rt, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.tt_rr, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.tr_rt, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.tr_rr, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn classical_pair_at_pi_over_8_is_flat_in_theta_r() {
        let classical = mix_with_classical(&make_triplet(0.0), 0.0).unwrap();
        for theta_r in [0.0, 0.2, 0.5, 1.1] {
            let p = joint_pbs_probabilities(
                &classical,
                AnalyzerSetting::dial(FRAC_PI_8),
                AnalyzerSetting::dial(theta_r),
            );
            assert_abs_diff_eq!(p.tt_rt, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_beam_prob_reference_points() {
        assert_abs_diff_eq!(single_beam_coincidence_prob(0.0, 0.3).unwrap(), 1.0);
        assert_abs_diff_eq!(
            single_beam_coincidence_prob(FRAC_PI_8, 1.0).unwrap(),
            0.0,
            epsilon = 1e-30
        );
        assert_abs_diff_eq!(
            single_beam_coincidence_prob(FRAC_PI_8, 0.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(single_beam_coincidence_prob(0.1, 1.5).is_err());
    }

    #[test]
    fn visibility_formula_reference_points() {
        assert_abs_diff_eq!(visibility_from_p(1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(visibility_from_p(0.0), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(visibility_from_p(0.98995), 0.99, epsilon = 5e-6);
        assert_abs_diff_eq!(p_from_visibility(0.99), 0.98995, epsilon = 5e-6);
        assert_abs_diff_eq!(p_from_visibility(0.90), (3.0 * 0.9 - 1.0) / 1.9, epsilon = 1e-15);
    }

    #[test]
    fn constructed_states_are_pure_and_maximally_entangled() {
        for phase in [0.0, 0.7, PI, 4.4] {
            let b = make_biphoton(phase);
            let t = make_triplet(phase);
            assert_abs_diff_eq!(b.purity(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(t.purity(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(x_state_concurrence(&t), 1.0, epsilon = 1e-12);
            assert_state_valid(&b);
            assert_state_valid(&t);
        }
    }

    #[test]
    fn theta_r_scan_is_a_sinusoid_in_cos_4_theta() {
        // For the coherent triplet the TT·RT probability at fixed θ_T is
        // A + B·cos(4θ_R + δ): recover (A, B, δ) from three points and check
        // the rest of a dense grid against it.
        let state = make_triplet(0.0);
        let setting_t = AnalyzerSetting::dial(0.37);
        let prob = |theta_r: f64| {
            joint_pbs_probabilities(&state, setting_t, AnalyzerSetting::dial(theta_r)).tt_rt
        };
        let p0 = prob(0.0); // A + B cos δ
        let p1 = prob(PI / 8.0); // A − B sin δ
        let p2 = prob(PI / 4.0); // A − B cos δ
        let a = 0.5 * (p0 + p2);
        let b_cos = p0 - a;
        let b_sin = a - p1;
        for k in 0..40 {
            let theta = k as f64 * 0.05;
            let expect = a + b_cos * (4.0 * theta).cos() - b_sin * (4.0 * theta).sin();
            assert_abs_diff_eq!(prob(theta), expect, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn wave_plates_are_unitary_involutions(
            theta in -10.0f64..10.0,
            offset in -3.0f64..3.0,
            mirrored in any::<bool>(),
        ) {
            let op = hwp_operator(AnalyzerSetting::new(theta, offset, mirrored));
            prop_assert!(op.unitarity_defect() < 1e-12);
            prop_assert!(op.involution_defect() < 1e-12);
        }

        #[test]
        fn joint_probabilities_sum_to_one(
            phase in 0.0f64..(2.0 * PI),
            p in 0.0f64..1.0,
            theta_t in -2.0f64..2.0,
            theta_r in -2.0f64..2.0,
            offset_t in -1.0f64..1.0,
            offset_r in -1.0f64..1.0,
        ) {
            let state = mix_with_classical(&make_triplet(phase), p).unwrap();
            let probs = joint_pbs_probabilities(
                &state,
                AnalyzerSetting::new(theta_t, offset_t, false),
                AnalyzerSetting::new(theta_r, offset_r, true),
            );
            prop_assert!((probs.sum() - 1.0).abs() < 1e-12);
            for q in probs.as_array() {
                prop_assert!((0.0..=1.0).contains(&q));
            }
        }

        #[test]
        fn dial_angle_and_frame_offset_are_interchangeable(
            theta in -2.0f64..2.0,
            delta in -2.0f64..2.0,
            mirrored in any::<bool>(),
        ) {
            let state = make_triplet(1.1);
            let shifted_dial = joint_pbs_probabilities(
                &state,
                AnalyzerSetting::new(theta + delta, 0.0, mirrored),
                AnalyzerSetting::dial(0.4),
            );
            let shifted_frame = joint_pbs_probabilities(
                &state,
                AnalyzerSetting::new(theta, delta, mirrored),
                AnalyzerSetting::dial(0.4),
            );
            // (θ+δ)+0 and θ+δ are the same floating-point sum, so this holds
            // exactly, not just within tolerance.
            prop_assert_eq!(shifted_dial.as_array(), shifted_frame.as_array());
        }

        #[test]
        fn single_beam_prob_period_and_symmetry(theta in -2.0f64..2.0, p in 0.0f64..1.0) {
            let f = |t: f64| single_beam_coincidence_prob(t, p).unwrap();
            prop_assert!((f(theta) - f(theta + PI / 4.0)).abs() < 1e-12);
            prop_assert!((f(theta) - f(-theta)).abs() < 1e-12);
        }

        #[test]
        fn mixed_states_stay_valid(phase in 0.0f64..(2.0*PI), p in 0.0f64..1.0) {
            let state = mix_with_classical(&make_triplet(phase), p).unwrap();
            prop_assert!(TwoQubitState::new(*state.rho()).is_ok());
        }
    }
}
