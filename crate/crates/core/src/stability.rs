//! Linear stability of the positive uniform steady state: kinetic
//! Jacobian entries H₀/H₁/Hₛ, the dispersion cubic, instability
//! thresholds, admissible perturbation modes, and (χ, μ) eigenvalue
//! maps.
//!
//! Perturbations ∝ e^{λt} cos(kx) with k = mπ/L satisfy the cubic
//!
//! ```text
//! λ³ + A(k²)λ² + B(k²)λ + C(k²) = 0
//! A = (2D+1)k² + (H₁−H₀+1)
//! B = D(D+2)k⁴ + [(H₁−H₀+2)D + (H₁−H₀)]k² + (H₁−H₀−Hₛ)
//! C = D²k⁶ + [D(H₁−H₀) + D²]k⁴ + [D(H₁−H₀−Hₛ) − H₁χ(1−n̄)]k²
//! ```
//!
//! with H₀, H₁, Hₛ the partial derivatives of the switching kinetics G
//! at the steady state (n̄, 1−n̄, n̄), n̄ = 0.5. Since H₁−H₀ equals the
//! steady-state switching activity μ₀₁+μ₁₀ > 0, A(k²) > 0 always holds;
//! instability enters either through C(k²) < 0 (when H₁ > 0) or through
//! A·B−C < 0 (possible only when H₁ < 0, and then with a complex pair —
//! the oscillatory route).

use crate::cubic;
use crate::math;
use crate::model::{kinetic_g, switching_rates, ModelParams, SwitchingCase, SwitchingSpec};
use alloc::vec::Vec;
use num_complex::Complex64;
use thiserror::Error;

const PI: f64 = core::f64::consts::PI;

/// Uniform steady state (n₀*, n₁*, s*) with n₀* + n₁* = 1, s* = n₀*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub n0_star: f64,
    pub n1_star: f64,
    pub s_star: f64,
}

/// Partial derivatives of G at the steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HValues {
    pub h0: f64,
    pub h1: f64,
    pub hs: f64,
}

impl HValues {
    /// H₁ − H₀, which equals [μ₀₁ + μ₁₀] at the steady state.
    pub fn activity(&self) -> f64 {
        self.h1 - self.h0
    }

    /// H₁ − H₀ − Hₛ, the homogeneous-stability margin B(0).
    pub fn margin(&self) -> f64 {
        self.h1 - self.h0 - self.hs
    }
}

/// One perturbation mode of the dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub m: u32,
    pub k_sq: f64,
    pub coeffs: (f64, f64, f64),
    /// Roots of the cubic, sorted by descending real part.
    pub eigenvalues: [Complex64; 3],
}

impl DispersionPoint {
    pub fn max_re(&self) -> f64 {
        self.eigenvalues[0].re
    }

    pub fn max_abs_im(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| math::fabs(z.im))
            .fold(0.0, f64::max)
    }

    /// True when some eigenvalue grows and rotates: Re λ > 0, Im λ ≠ 0.
    pub fn oscillatory_instability(&self) -> bool {
        self.eigenvalues.iter().any(|z| z.re > 0.0 && z.im != 0.0)
    }
}

/// Which instability branch produced the χ threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdBranch {
    /// H₁ > 0: C(k²) < 0 for small k², threshold D(H₁−H₀−Hₛ)/(H₁(1−n̄)).
    H1Positive,
    /// H₁ < 0: A·B−C < 0 route (oscillatory), threshold from the k²
    /// coefficient of A·B−C.
    H1Negative,
    /// No finite threshold on either branch (H₁ = 0, no switching, or
    /// the homogeneous state is already unstable).
    None,
}

/// Full stability summary for one parameter point and domain length.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub steady: SteadyState,
    pub h: HValues,
    pub homogeneous_stable: bool,
    pub chi_threshold: Option<f64>,
    pub threshold_branch: ThresholdBranch,
    /// Minimum domain length enabling mode m, for m = 1..=5 where defined.
    pub min_lengths: Vec<(u32, f64)>,
    pub dispersion: Vec<DispersionPoint>,
    pub predicts_oscillation: bool,
}

/// One grid point of the (χ, μ) eigenvalue map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenMapPoint {
    pub chi: f64,
    pub mu: f64,
    /// max over modes and eigenvalues of Re λ.
    pub max_re: f64,
    /// max over modes and eigenvalues of |Im λ|.
    pub max_abs_im: f64,
    /// Some mode carries an eigenvalue with Re λ > 0 and Im λ ≠ 0.
    pub oscillatory: bool,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum StabilityError {
    #[error("steady-state bisection failed to bracket a root")]
    BisectionBracket,
    #[error("steady-state root {root} is not the expected 0.5 (|Δ| = {deviation})")]
    UnexpectedRoot { root: f64, deviation: f64 },
    #[error("n0_mean must lie in (0,1), got {0}")]
    InvalidMean(f64),
    #[error("finite-difference step must lie in [1e-8, 1e-3], got {0}")]
    InvalidStep(f64),
}

/// Steady state of the kinetics.
///
/// Without switching any (n̄, 1−n̄, n̄) with the caller's n̄ ∈ (0,1) is
/// steady. With switching the unique root of
/// n̄ = μ₁₀(1, n̄) / (μ₀₁(1, n̄) + μ₁₀(1, n̄)) is found by bisection and
/// must equal 0.5 to within 1e-10 for every Table-type family.
pub fn steady_state(spec: &SwitchingSpec, n0_mean: f64) -> Result<SteadyState, StabilityError> {
    if !spec.is_active() {
        if !(n0_mean > 0.0 && n0_mean < 1.0) {
            return Err(StabilityError::InvalidMean(n0_mean));
        }
        return Ok(SteadyState {
            n0_star: n0_mean,
            n1_star: 1.0 - n0_mean,
            s_star: n0_mean,
        });
    }

    // f(x) = x·(μ₀₁+μ₁₀) − μ₁₀ evaluated at (ρ, s) = (1, x). Steep
    // attractant-dependent switching can admit spurious fixed points
    // near the density extremes, so every sign change on a scan grid is
    // bisected and the root nearest 0.5 is taken before asserting it.
    let f = |x: f64| {
        let (m01, m10) = switching_rates(spec, 1.0, x).expect("nonnegative arguments");
        x * (m01 + m10) - m10
    };
    let bisect = |mut a: f64, mut b: f64, mut fa: f64| {
        for _ in 0..120 {
            let mid = 0.5 * (a + b);
            let fm = f(mid);
            if fm == 0.0 {
                return mid;
            }
            if fa * fm < 0.0 {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        0.5 * (a + b)
    };

    const SCAN: usize = 1024;
    let x_at = |k: usize| 1e-9 + (1.0 - 2e-9) * k as f64 / SCAN as f64;
    let mut root: Option<f64> = None;
    let mut f_prev = f(x_at(0));
    for k in 1..=SCAN {
        let x = x_at(k);
        let fx = f(x);
        if f_prev == 0.0 || f_prev * fx < 0.0 {
            let r = if f_prev == 0.0 {
                x_at(k - 1)
            } else {
                bisect(x_at(k - 1), x, f_prev)
            };
            if root.map_or(true, |best: f64| math::fabs(r - 0.5) < math::fabs(best - 0.5)) {
                root = Some(r);
            }
        }
        f_prev = fx;
    }
    let root = root.ok_or(StabilityError::BisectionBracket)?;
    let deviation = math::fabs(root - 0.5);
    if deviation > 1e-10 {
        return Err(StabilityError::UnexpectedRoot { root, deviation });
    }
    Ok(SteadyState {
        n0_star: 0.5,
        n1_star: 0.5,
        s_star: 0.5,
    })
}

/// Closed-form H values at the steady state (n̄ = 0.5):
///
/// | case | H₀          | H₁          | Hₛ        |
/// |------|-------------|-------------|-----------|
/// | A    | −μ          | μ           | 0         |
/// | B₁   | −μ(2+q)/4   | μ(2−q)/4    | 0         |
/// | B₂   | μ(q−2)/4    | μ(2+q)/4    | 0         |
/// | C₁   | −μ/2        | μ/2         | −μq/(4n̄) |
/// | C₂   | −μ/2        | μ/2         | μq/(4n̄)  |
pub fn h_values_analytic(spec: &SwitchingSpec) -> HValues {
    let mu = spec.mu;
    let q = spec.q;
    let nb = spec.nbar_ref;
    match spec.case {
        SwitchingCase::NoSwitching => HValues { h0: 0.0, h1: 0.0, hs: 0.0 },
        SwitchingCase::A => HValues { h0: -mu, h1: mu, hs: 0.0 },
        SwitchingCase::B1 => HValues {
            h0: -mu * (2.0 + q) / 4.0,
            h1: mu * (2.0 - q) / 4.0,
            hs: 0.0,
        },
        SwitchingCase::B2 => HValues {
            h0: mu * (q - 2.0) / 4.0,
            h1: mu * (2.0 + q) / 4.0,
            hs: 0.0,
        },
        SwitchingCase::C1 => HValues {
            h0: -mu / 2.0,
            h1: mu / 2.0,
            hs: -mu * q / (4.0 * nb),
        },
        SwitchingCase::C2 => HValues {
            h0: -mu / 2.0,
            h1: mu / 2.0,
            hs: mu * q / (4.0 * nb),
        },
    }
}

/// H values by central finite differences of G at the steady state,
/// with the ρ = n₀ + n₁ coupling included (perturbing n₀ or n₁ also
/// perturbs ρ).
pub fn h_values_numeric(spec: &SwitchingSpec, h_step: f64) -> Result<HValues, StabilityError> {
    if !(1e-8..=1e-3).contains(&h_step) {
        return Err(StabilityError::InvalidStep(h_step));
    }
    let ss = steady_state(spec, 0.5)?;
    let (n0, n1, s) = (ss.n0_star, ss.n1_star, ss.s_star);
    let g = |a: f64, b: f64, sv: f64| kinetic_g(spec, a, b, a + b, sv).expect("steady-state neighborhood");
    let h = h_step;
    Ok(HValues {
        h0: (g(n0 + h, n1, s) - g(n0 - h, n1, s)) / (2.0 * h),
        h1: (g(n0, n1 + h, s) - g(n0, n1 - h, s)) / (2.0 * h),
        hs: (g(n0, n1, s + h) - g(n0, n1, s - h)) / (2.0 * h),
    })
}

/// Steady-state mean density n̄ entering the (1 − n̄) factor of C(k²).
const NBAR: f64 = 0.5;

/// Coefficients (A, B, C) of the dispersion cubic at squared wavenumber k².
pub fn dispersion_coeffs(params: &ModelParams, h: &HValues, k_sq: f64) -> (f64, f64, f64) {
    let d = params.d;
    let chi = params.chi;
    let hd = h.activity();
    let b0 = h.margin();
    let a = (2.0 * d + 1.0) * k_sq + (hd + 1.0);
    let b = d * (d + 2.0) * k_sq * k_sq + ((hd + 2.0) * d + hd) * k_sq + b0;
    let c = d * d * k_sq * k_sq * k_sq
        + (d * hd + d * d) * k_sq * k_sq
        + (d * b0 - h.h1 * chi * (1.0 - NBAR)) * k_sq;
    (a, b, c)
}

/// The three roots of λ³ + Aλ² + Bλ + C, sorted by descending real part.
pub fn eigenvalues(coeffs: (f64, f64, f64)) -> [Complex64; 3] {
    cubic::roots(coeffs.0, coeffs.1, coeffs.2)
}

/// Stability against spatially homogeneous perturbations: B(0) ≥ 0,
/// i.e. H₁ − H₀ − Hₛ ≥ 0. (A(0) = H₁−H₀+1 > 0 holds automatically for
/// active switching since H₁ − H₀ = [μ₀₁+μ₁₀]ₛₛ > 0; the marginal
/// B(0) = 0 case is classified as stable — a neutral mode.)
pub fn homogeneous_stability(h: &HValues) -> bool {
    h.margin() >= 0.0
}

/// Critical chemotactic sensitivity above which spatial patterns can
/// form, and the branch it came from.
///
/// Requires homogeneous stability (otherwise `(None, None)`: the state
/// is already kinetically unstable and no χ threshold applies). For
/// H₁ > 0 the threshold makes C(k²) negative at small k²; for H₁ < 0 it
/// makes A·B−C negative (the oscillatory route); H₁ = 0 admits no
/// finite threshold.
pub fn chi_threshold(spec: &SwitchingSpec, d: f64) -> (Option<f64>, ThresholdBranch) {
    let h = h_values_analytic(spec);
    if !spec.is_active() || !homogeneous_stability(&h) {
        return (None, ThresholdBranch::None);
    }
    let hd = h.activity();
    let b0 = h.margin();
    if h.h1 > 0.0 {
        let thr = d * b0 / (h.h1 * (1.0 - NBAR));
        (Some(thr), ThresholdBranch::H1Positive)
    } else if h.h1 < 0.0 {
        let numer = (b0 + hd * hd) * (d + 1.0) + (3.0 * d + 1.0) * hd + 2.0 * d;
        let thr = numer / ((-h.h1) * (1.0 - NBAR));
        (Some(thr), ThresholdBranch::H1Negative)
    } else {
        (None, ThresholdBranch::None)
    }
}

/// Minimum domain length at which perturbation mode m can grow
/// (H₁ > 0 branch):
///
/// L_min(m) = √( 2Dm²π² / ( −[(H₁−H₀)+D] + √([(H₁−H₀)−D]² + 4H₁χ(1−n̄) + 4HₛD) ) )
///
/// `None` when the inner radicand or the denominator is nonpositive —
/// no domain length makes mode m unstable.
pub fn min_domain_length(spec: &SwitchingSpec, d: f64, chi: f64, m: u32) -> Option<f64> {
    let h = h_values_analytic(spec);
    let hd = h.activity();
    let radicand = (hd - d) * (hd - d) + 4.0 * h.h1 * chi * (1.0 - NBAR) + 4.0 * h.hs * d;
    if radicand < 0.0 {
        return None;
    }
    let denom = -(hd + d) + math::sqrt(radicand);
    if denom <= 0.0 {
        return None;
    }
    let m = m as f64;
    Some(math::sqrt(2.0 * d * m * m * PI * PI / denom))
}

/// Upper end of the unstable k² window on the H₁ > 0 branch, when open.
pub fn unstable_k_sq_upper(h: &HValues, d: f64, chi: f64) -> Option<f64> {
    let hd = h.activity();
    let radicand = (hd - d) * (hd - d) + 4.0 * h.h1 * chi * (1.0 - NBAR) + 4.0 * h.hs * d;
    if radicand < 0.0 {
        return None;
    }
    let upper = (-(hd + d) + math::sqrt(radicand)) / (2.0 * d);
    (upper > 0.0).then_some(upper)
}

/// How many modes to examine for a domain of length l.
///
/// H₁ > 0: the analytic window plus a safety margin of 5. Otherwise
/// (no analytic window in the oscillatory branch) sweep k² up to 50/D.
pub fn mode_scan_bound(h: &HValues, d: f64, chi: f64, l: f64) -> u32 {
    if h.h1 > 0.0 {
        let m_max = unstable_k_sq_upper(h, d, chi)
            .map(|k2| math::floor(l * math::sqrt(k2) / PI) as u32)
            .unwrap_or(0);
        m_max + 5
    } else {
        let k2_sweep_max = 50.0 / d;
        math::floor(l * math::sqrt(k2_sweep_max) / PI) as u32 + 1
    }
}

/// Dispersion point for mode m on a domain of length l.
pub fn dispersion_point(params: &ModelParams, h: &HValues, l: f64, m: u32) -> DispersionPoint {
    let k = m as f64 * PI / l;
    let k_sq = k * k;
    let coeffs = dispersion_coeffs(params, h, k_sq);
    DispersionPoint {
        m,
        k_sq,
        coeffs,
        eigenvalues: eigenvalues(coeffs),
    }
}

/// Mode indices m ≥ 1 with max Re λ > 0 on a domain of length l.
pub fn unstable_mode_set(params: &ModelParams, h: &HValues, l: f64) -> Vec<u32> {
    let bound = mode_scan_bound(h, params.d, params.chi, l);
    (1..=bound)
        .filter(|&m| dispersion_point(params, h, l, m).max_re() > 0.0)
        .collect()
}

/// Scan all admissible modes and fold their eigenvalue extrema.
fn scan_extrema(params: &ModelParams, h: &HValues, l: f64) -> (f64, f64, bool) {
    let bound = mode_scan_bound(h, params.d, params.chi, l).max(1);
    let mut max_re = f64::NEG_INFINITY;
    let mut max_abs_im: f64 = 0.0;
    let mut oscillatory = false;
    for m in 1..=bound {
        let p = dispersion_point(params, h, l, m);
        max_re = max_re.max(p.max_re());
        max_abs_im = max_abs_im.max(p.max_abs_im());
        oscillatory |= p.oscillatory_instability();
    }
    (max_re, max_abs_im, oscillatory)
}

/// Grid of eigenvalue extrema over (χ, μ) for a fixed switching family,
/// steepness, D and domain length. Points are row-major in χ (outer)
/// then μ (inner); `mu_log` spaces μ geometrically.
#[allow(clippy::too_many_arguments)]
pub fn eigenvalue_map(
    case: SwitchingCase,
    q: f64,
    nbar_ref: f64,
    d: f64,
    chi_range: (f64, f64),
    mu_range: (f64, f64),
    l: f64,
    chi_steps: usize,
    mu_steps: usize,
    mu_log: bool,
) -> Vec<EigenMapPoint> {
    let lin = |lo: f64, hi: f64, i: usize, n: usize| {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(chi_steps * mu_steps);
    for i in 0..chi_steps {
        let chi = lin(chi_range.0, chi_range.1, i, chi_steps);
        for j in 0..mu_steps {
            let mu = if mu_log {
                math::exp(lin(math::ln(mu_range.0), math::ln(mu_range.1), j, mu_steps))
            } else {
                lin(mu_range.0, mu_range.1, j, mu_steps)
            };
            let spec = SwitchingSpec { case, mu, q, nbar_ref };
            let h = h_values_analytic(&spec);
            let params = ModelParams {
                d,
                chi,
                switching: spec,
                variant: crate::model::ModelVariant::TwoPhenotype,
            };
            let (max_re, max_abs_im, oscillatory) = scan_extrema(&params, &h, l);
            out.push(EigenMapPoint { chi, mu, max_re, max_abs_im, oscillatory });
        }
    }
    out
}

/// Assemble the full stability report for one parameter point.
///
/// `n0_mean` is only consulted for the no-switching family, where the
/// steady state is not unique.
pub fn stability_report(
    params: &ModelParams,
    l: f64,
    n0_mean: f64,
) -> Result<StabilityReport, StabilityError> {
    let spec = &params.switching;
    let steady = steady_state(spec, n0_mean)?;
    let h = h_values_analytic(spec);
    let homogeneous_stable = homogeneous_stability(&h);
    let (thr, branch) = chi_threshold(spec, params.d);
    let min_lengths = (1..=5)
        .filter_map(|m| min_domain_length(spec, params.d, params.chi, m).map(|lm| (m, lm)))
        .collect();
    let bound = mode_scan_bound(&h, params.d, params.chi, l);
    let dispersion: Vec<DispersionPoint> = (0..=bound)
        .map(|m| dispersion_point(params, &h, l, m))
        .collect();
    let predicts_oscillation = dispersion.iter().any(|p| p.oscillatory_instability());
    Ok(StabilityReport {
        steady,
        h,
        homogeneous_stable,
        chi_threshold: thr,
        threshold_branch: branch,
        min_lengths,
        dispersion,
        predicts_oscillation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelVariant;
    use crate::rng::{Rng2DSeed, Xoshiro256StarStar};
    use approx::assert_relative_eq;

    fn spec(case: SwitchingCase, mu: f64, q: f64) -> SwitchingSpec {
        SwitchingSpec::new(case, mu, q).unwrap()
    }

    fn params(case: SwitchingCase, mu: f64, q: f64, d: f64, chi: f64) -> ModelParams {
        ModelParams::new(d, chi, spec(case, mu, q), ModelVariant::TwoPhenotype).unwrap()
    }

    const ALL_CASES: [SwitchingCase; 5] = [
        SwitchingCase::A,
        SwitchingCase::B1,
        SwitchingCase::B2,
        SwitchingCase::C1,
        SwitchingCase::C2,
    ];

    #[test]
    fn steady_states() {
        let ss = steady_state(&spec(SwitchingCase::A, 1.0, 1.0), 0.123).unwrap();
        assert_eq!((ss.n0_star, ss.n1_star, ss.s_star), (0.5, 0.5, 0.5));

        let ss = steady_state(&SwitchingSpec::none(), 0.3).unwrap();
        assert_eq!((ss.n0_star, ss.n1_star, ss.s_star), (0.3, 0.7, 0.3));

        // symmetry forces 0.5 even for steep attractant-dependent switching
        let ss = steady_state(&spec(SwitchingCase::C1, 2.0, 30.0), 0.5).unwrap();
        assert_eq!(ss.n0_star, 0.5);

        for case in ALL_CASES {
            for (mu, q) in [(0.3, 0.5), (1.0, 1.0), (2.0, 7.0), (0.05, 30.0)] {
                let ss = steady_state(&spec(case, mu, q), 0.5).unwrap();
                assert_eq!(ss.n0_star, 0.5, "case {case:?} mu={mu} q={q}");
            }
        }

        assert!(steady_state(&SwitchingSpec::none(), 1.0).is_err());
    }

    #[test]
    fn analytic_h_values_match_table() {
        let h = h_values_analytic(&spec(SwitchingCase::A, 1.0, 1.0));
        assert_eq!((h.h0, h.h1, h.hs), (-1.0, 1.0, 0.0));

        let h = h_values_analytic(&spec(SwitchingCase::B1, 1.0, 1.0));
        assert_eq!((h.h0, h.h1, h.hs), (-0.75, 0.25, 0.0));

        let h = h_values_analytic(&spec(SwitchingCase::C2, 1.0, 1.0));
        assert_eq!(h.hs, 0.5);
        assert_eq!(h.margin(), 0.5);

        let h = h_values_analytic(&spec(SwitchingCase::C1, 1.0, 30.0));
        assert_eq!(h.hs, -15.0);

        assert_eq!(
            h_values_analytic(&SwitchingSpec::none()),
            HValues { h0: 0.0, h1: 0.0, hs: 0.0 }
        );
    }

    #[test]
    fn numeric_h_values_match_analytic() {
        let h = h_values_numeric(&spec(SwitchingCase::A, 1.0, 1.0), 1e-6).unwrap();
        assert_relative_eq!(h.h0, -1.0, epsilon = 1e-5);
        assert_relative_eq!(h.h1, 1.0, epsilon = 1e-5);
        assert!(h.hs.abs() < 1e-5);

        let h = h_values_numeric(&spec(SwitchingCase::B2, 1.0, 1.0), 1e-6).unwrap();
        assert_relative_eq!(h.activity(), 1.0, epsilon = 1e-5);

        let h = h_values_numeric(&spec(SwitchingCase::C1, 1.0, 30.0), 1e-6).unwrap();
        assert_relative_eq!(h.hs, -15.0, epsilon = 1e-3);

        // 50 random (μ, q) per case
        let mut rng = Xoshiro256StarStar::from_seed(Rng2DSeed::new(17));
        for case in ALL_CASES {
            for _ in 0..50 {
                let mu = 0.01 + 9.99 * rng.next_f64();
                let q = 0.5 + 29.5 * rng.next_f64();
                let sp = spec(case, mu, q);
                let ha = h_values_analytic(&sp);
                let hn = h_values_numeric(&sp, 1e-6).unwrap();
                for (a, n) in [(ha.h0, hn.h0), (ha.h1, hn.h1), (ha.hs, hn.hs)] {
                    assert!(
                        crate::math::rel_diff(a, n) < 1e-5 || (a.abs() < 1e-9 && n.abs() < 1e-7),
                        "case {case:?} mu={mu} q={q}: analytic {a} vs numeric {n}"
                    );
                }
            }
        }

        assert!(h_values_numeric(&spec(SwitchingCase::A, 1.0, 1.0), 1e-2).is_err());
    }

    #[test]
    fn h_activity_equals_switching_activity() {
        let mut rng = Xoshiro256StarStar::from_seed(Rng2DSeed::new(3));
        for case in ALL_CASES {
            for _ in 0..40 {
                let mu = 0.01 + 9.99 * rng.next_f64();
                let q = 0.5 + 29.5 * rng.next_f64();
                let sp = spec(case, mu, q);
                let h = h_values_analytic(&sp);
                let (m01, m10) = switching_rates(&sp, 1.0, sp.nbar_ref).unwrap();
                assert!(
                    (h.activity() - (m01 + m10)).abs() < 1e-10,
                    "case {case:?} mu={mu} q={q}"
                );
                assert!(h.activity() > 0.0);
            }
        }
    }

    #[test]
    fn dispersion_coefficient_examples() {
        let p = params(SwitchingCase::NoSwitching, 0.0, 1.0, 1.0, 5.0);
        let h = HValues { h0: 0.0, h1: 0.0, hs: 0.0 };
        let (a, b, c) = dispersion_coeffs(&p, &h, 1.0);
        assert_eq!((a, b, c), (4.0, 5.0, 2.0));
        let r = eigenvalues((a, b, c));
        // -1 is a double root, √ε-determined in f64
        assert_relative_eq!(r[0].re, -1.0, epsilon = 1e-7);
        assert_relative_eq!(r[2].re, -2.0, epsilon = 1e-8);

        let p = params(SwitchingCase::A, 1.0, 1.0, 1.0, 10.0);
        let h = h_values_analytic(&p.switching);
        let (_, _, c) = dispersion_coeffs(&p, &h, 0.5);
        assert_relative_eq!(c, -0.625, epsilon = 1e-12);

        for case in ALL_CASES {
            let p = params(case, 1.5, 3.0, 1.0, 7.0);
            let h = h_values_analytic(&p.switching);
            let (_, _, c) = dispersion_coeffs(&p, &h, 0.0);
            assert_eq!(c, 0.0, "C(0) must vanish for {case:?}");
        }
    }

    #[test]
    fn a_coefficient_positive_for_active_switching() {
        let mut rng = Xoshiro256StarStar::from_seed(Rng2DSeed::new(31));
        for case in ALL_CASES {
            for _ in 0..200 {
                let p = params(
                    case,
                    0.01 + 9.99 * rng.next_f64(),
                    0.5 + 29.5 * rng.next_f64(),
                    0.05 + 5.0 * rng.next_f64(),
                    20.0 * rng.next_f64(),
                );
                let h = h_values_analytic(&p.switching);
                let k_sq = 50.0 * rng.next_f64();
                let (a, _, _) = dispersion_coeffs(&p, &h, k_sq);
                assert!(a > 0.0);
            }
        }
    }

    #[test]
    fn no_switching_ab_minus_c_identity() {
        // A·B − C = 2Dk²[(D+1)²k⁴ + 2(D+1)k² + 1] without switching
        let mut rng = Xoshiro256StarStar::from_seed(Rng2DSeed::new(47));
        let h = HValues { h0: 0.0, h1: 0.0, hs: 0.0 };
        for _ in 0..100 {
            let d = 0.05 + 5.0 * rng.next_f64();
            let k_sq = 30.0 * rng.next_f64();
            let p = ModelParams::new(d, 12.0 * rng.next_f64(), SwitchingSpec::none(), ModelVariant::TwoPhenotype)
                .unwrap();
            let (a, b, c) = dispersion_coeffs(&p, &h, k_sq);
            let lhs = a * b - c;
            let dp1 = d + 1.0;
            let rhs = 2.0 * d * k_sq * (dp1 * dp1 * k_sq * k_sq + 2.0 * dp1 * k_sq + 1.0);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
        }
    }

    #[test]
    fn homogeneous_stability_examples() {
        assert!(homogeneous_stability(&h_values_analytic(&spec(SwitchingCase::A, 1.0, 1.0))));
        // C₂ at q = 30: margin 1 − 15 < 0
        let h = h_values_analytic(&spec(SwitchingCase::C2, 1.0, 30.0));
        assert_eq!(h.margin(), -14.0);
        assert!(!homogeneous_stability(&h));
        // boundary: q = 4n̄ = 2 gives margin exactly 0 → stable
        let h = h_values_analytic(&spec(SwitchingCase::C2, 1.0, 2.0));
        assert_eq!(h.margin(), 0.0);
        assert!(homogeneous_stability(&h));
    }

    #[test]
    fn chi_threshold_closed_forms() {
        // Table closed forms evaluated directly as the oracle, n̄ = 0.5
        let d = 1.0;
        let (thr, br) = chi_threshold(&spec(SwitchingCase::A, 1.0, 1.0), d);
        assert_relative_eq!(thr.unwrap(), 4.0, max_relative = 1e-12);
        assert_eq!(br, ThresholdBranch::H1Positive);

        let (thr, _) = chi_threshold(&spec(SwitchingCase::B2, 1.0, 1.0), d);
        assert_relative_eq!(thr.unwrap(), 8.0 / 3.0, max_relative = 1e-12);

        let (thr, _) = chi_threshold(&spec(SwitchingCase::C1, 1.0, 1.0), d);
        assert_relative_eq!(thr.unwrap(), 6.0, max_relative = 1e-12);

        let (thr, br) = chi_threshold(&spec(SwitchingCase::B1, 1.0, 1.0), d);
        assert_relative_eq!(thr.unwrap(), 8.0, max_relative = 1e-12);
        assert_eq!(br, ThresholdBranch::H1Positive);

        // H₁ = 0 exactly at B₁ q = 2: no finite threshold
        let (thr, br) = chi_threshold(&spec(SwitchingCase::B1, 1.0, 2.0), d);
        assert_eq!(thr, None);
        assert_eq!(br, ThresholdBranch::None);

        // homogeneous instability short-circuits
        let (thr, br) = chi_threshold(&spec(SwitchingCase::C2, 1.0, 30.0), d);
        assert_eq!(thr, None);
        assert_eq!(br, ThresholdBranch::None);

        let mut rng = Xoshiro256StarStar::from_seed(Rng2DSeed::new(53));
        for _ in 0..200 {
            let mu = 0.01 + 9.99 * rng.next_f64();
            let q = 0.5 + 29.5 * rng.next_f64();
            let d = 0.1 + 4.0 * rng.next_f64();
            let nb = 0.5;

            // case A: 2D/(1−n̄)
            let (thr, _) = chi_threshold(&spec(SwitchingCase::A, mu, q), d);
            assert_relative_eq!(thr.unwrap(), 2.0 * d / (1.0 - nb), max_relative = 1e-10);

            // case B₁: branch depends on q − 2
            let (thr, br) = chi_threshold(&spec(SwitchingCase::B1, mu, q), d);
            if q < 2.0 {
                assert_eq!(br, ThresholdBranch::H1Positive);
                assert_relative_eq!(
                    thr.unwrap(),
                    4.0 * d / ((2.0 - q) * (1.0 - nb)),
                    max_relative = 1e-10
                );
            } else if q > 2.0 {
                assert_eq!(br, ThresholdBranch::H1Negative);
                let oracle = 4.0 * (mu * mu * (d + 1.0) + 4.0 * mu * d + 2.0 * mu + 2.0 * d)
                    / (mu * (q - 2.0) * (1.0 - nb));
                assert_relative_eq!(thr.unwrap(), oracle, max_relative = 1e-10);
            }

            // case B₂: 4D/((q+2)(1−n̄))
            let (thr, _) = chi_threshold(&spec(SwitchingCase::B2, mu, q), d);
            assert_relative_eq!(
                thr.unwrap(),
                4.0 * d / ((q + 2.0) * (1.0 - nb)),
                max_relative = 1e-10
            );

            // case C₁: D(4n̄+q)/(2n̄(1−n̄))
            let (thr, _) = chi_threshold(&spec(SwitchingCase::C1, mu, q), d);
            assert_relative_eq!(
                thr.unwrap(),
                d * (4.0 * nb + q) / (2.0 * nb * (1.0 - nb)),
                max_relative = 1e-10
            );

            // case C₂ within its q ≤ 4n̄ validity window
            if q <= 4.0 * nb {
                let (thr, _) = chi_threshold(&spec(SwitchingCase::C2, mu, q), d);
                assert_relative_eq!(
                    thr.unwrap(),
                    d * (4.0 * nb - q) / (2.0 * nb * (1.0 - nb)),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn threshold_is_infimum_of_c_zero_curve() {
        // On the H₁ > 0 branch the threshold equals inf over k² > 0 of
        // the χ solving C(k²) = 0: χ(k²) = (D²k⁴ + D(H₁−H₀)k² + D·B₀)/(H₁(1−n̄))
        for (case, mu, q, d) in [
            (SwitchingCase::A, 1.0, 1.0, 1.0),
            (SwitchingCase::B2, 0.7, 3.0, 2.0),
            (SwitchingCase::C1, 2.0, 1.5, 0.5),
        ] {
            let sp = spec(case, mu, q);
            let h = h_values_analytic(&sp);
            let (thr, _) = chi_threshold(&sp, d);
            let thr = thr.unwrap();
            let chi_zero = |k2: f64| {
                (d * d * k2 * k2 + d * h.activity() * k2 + d * h.margin()) / (h.h1 * 0.5)
            };
            let mut inf = f64::INFINITY;
            let mut k2 = 1e-8;
            while k2 < 50.0 {
                inf = inf.min(chi_zero(k2));
                k2 *= 1.05;
            }
            assert!(
                (inf - thr).abs() / thr < 1e-6,
                "case {case:?}: inf {inf} vs threshold {thr}"
            );
        }
    }

    #[test]
    fn fig2_chi_values_exceed_thresholds() {
        let chis = [10.0, 15.0, 5.0, 10.0, 10.0];
        let expect = [4.0, 8.0, 8.0 / 3.0, 6.0, 2.0];
        for ((case, chi), thr_expect) in ALL_CASES.into_iter().zip(chis).zip(expect) {
            let (thr, _) = chi_threshold(&spec(case, 1.0, 1.0), 1.0);
            let thr = thr.unwrap();
            assert_relative_eq!(thr, thr_expect, max_relative = 1e-12);
            assert!(chi > thr, "case {case:?}");
        }
    }

    #[test]
    fn min_domain_length_examples() {
        // oracle: case-A closed form with μ = 1, D = 1, χ = 10
        let sp = spec(SwitchingCase::A, 1.0, 1.0);
        let l1 = min_domain_length(&sp, 1.0, 10.0, 1).unwrap();
        let denom = -(2.0 + 1.0) + math::sqrt((2.0f64 - 1.0) * (2.0 - 1.0) + 4.0 * 10.0 * 0.5);
        let oracle = math::sqrt(2.0 * PI * PI / denom);
        assert_relative_eq!(l1, oracle, max_relative = 1e-12);
        assert_relative_eq!(l1, 3.532, epsilon = 1e-3);

        let l2 = min_domain_length(&sp, 1.0, 10.0, 2).unwrap();
        assert_relative_eq!(l2, 2.0 * l1, max_relative = 1e-12);

        // at the threshold the denominator closes
        assert_eq!(min_domain_length(&sp, 1.0, 4.0, 1), None);
    }

    #[test]
    fn unstable_mode_sets() {
        let p = params(SwitchingCase::A, 1.0, 1.0, 1.0, 10.0);
        let h = h_values_analytic(&p.switching);

        let modes = unstable_mode_set(&p, &h, 40.0);
        assert!(!modes.is_empty());
        // fastest-growing region near k² ≈ 0.4 → m ≈ 8
        assert!(modes.contains(&8));
        // window upper bound (−3+√21)/2 ≈ 0.791 → every unstable k² below it
        let upper = unstable_k_sq_upper(&h, 1.0, 10.0).unwrap();
        assert_relative_eq!(upper, (-3.0 + math::sqrt(21.0)) / 2.0, max_relative = 1e-12);
        for &m in &modes {
            let k2 = (m as f64 * PI / 40.0).powi(2);
            assert!(k2 < upper);
        }

        // below L_min(1) ≈ 3.53 nothing grows
        assert!(unstable_mode_set(&p, &h, 3.0).is_empty());

        let p = ModelParams::new(1.0, 15.0, SwitchingSpec::none(), ModelVariant::TwoPhenotype).unwrap();
        let h = HValues { h0: 0.0, h1: 0.0, hs: 0.0 };
        assert!(unstable_mode_set(&p, &h, 100.0).is_empty());
    }

    #[test]
    fn eigenvalue_map_b1_sign_structure() {
        let map = eigenvalue_map(
            SwitchingCase::B1,
            30.0,
            0.5,
            1.0,
            (15.0, 15.0),
            (1.0, 1.0),
            40.0,
            1,
            1,
            false,
        );
        assert!(map[0].max_re > 0.0, "max Re λ = {}", map[0].max_re);
        assert!(map[0].max_abs_im > 0.0);
        assert!(map[0].oscillatory);

        let map = eigenvalue_map(
            SwitchingCase::B1,
            30.0,
            0.5,
            1.0,
            (1.0, 1.0),
            (0.01, 0.01),
            40.0,
            1,
            1,
            false,
        );
        assert!(map[0].max_re < 0.0);
    }

    #[test]
    fn threshold_crossing_flips_min_c_sign() {
        // max over k² of (−C) changes sign at the H₁ > 0 threshold
        let sp = spec(SwitchingCase::A, 1.0, 1.0);
        let h = h_values_analytic(&sp);
        let min_c = |chi: f64| {
            let p = params(SwitchingCase::A, 1.0, 1.0, 1.0, chi);
            let mut lo = f64::INFINITY;
            let mut k2 = 1e-6;
            while k2 < 10.0 {
                lo = lo.min(dispersion_coeffs(&p, &h, k2).2);
                k2 *= 1.02;
            }
            lo
        };
        assert!(min_c(4.0 * 1.001) < 0.0);
        assert!(min_c(4.0 * 0.999) >= 0.0);
    }

    #[test]
    fn report_assembles() {
        let p = params(SwitchingCase::A, 1.0, 1.0, 1.0, 10.0);
        let rep = stability_report(&p, 40.0, 0.5).unwrap();
        assert!(rep.homogeneous_stable);
        assert_eq!(rep.threshold_branch, ThresholdBranch::H1Positive);
        assert!(!rep.predicts_oscillation);
        assert!(rep.min_lengths.iter().any(|&(m, _)| m == 1));
        assert!(rep.dispersion.iter().any(|pt| pt.max_re() > 0.0));
        // k² = 0 carries the conservation-neutral eigenvalue λ = 0
        let origin = &rep.dispersion[0];
        assert_eq!(origin.m, 0);
        assert!(origin.eigenvalues.iter().any(|z| z.re.abs() < 1e-12 && z.im == 0.0));

        let p = params(SwitchingCase::B1, 1.0, 30.0, 1.0, 15.0);
        let rep = stability_report(&p, 40.0, 0.5).unwrap();
        assert!(rep.predicts_oscillation);
        assert_eq!(rep.threshold_branch, ThresholdBranch::H1Negative);
    }
}
