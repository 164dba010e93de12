//! Model parameters, phenotypic switching families, the kinetic coupling
//! term G, and the dimensional → dimensionless conversion.
//!
//! The two phenotypes are the attractant-secreting state (density n₀)
//! and the chemotactic state (density n₁); μ₀₁ and μ₁₀ are the
//! dimensionless switching rates 0→1 and 1→0. All switching families
//! keep μ₀₁ + μ₁₀ = μ because the paired Hill fractions are exact
//! complements:
//!
//! | case | μ₀₁                | μ₁₀                | environment cue |
//! |------|--------------------|--------------------|-----------------|
//! | A    | μ                  | μ                  | none            |
//! | B₁   | μ ρ^q/(1+ρ^q)      | μ /(1+ρ^q)         | total density ρ |
//! | B₂   | μ /(1+ρ^q)         | μ ρ^q/(1+ρ^q)      | total density ρ |
//! | C₁   | μ s^q/(n̄^q+s^q)    | μ n̄^q/(n̄^q+s^q)   | attractant s    |
//! | C₂   | μ n̄^q/(n̄^q+s^q)   | μ s^q/(n̄^q+s^q)   | attractant s    |

use crate::math;
use thiserror::Error;

/// Switching-function family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchingCase {
    /// μ₀₁ ≡ μ₁₀ ≡ 0: the phenotypes never mix.
    NoSwitching,
    /// Constant rate μ in both directions.
    A,
    /// High total density pushes cells into the chemotactic state.
    B1,
    /// High total density pushes cells into the secreting state.
    B2,
    /// High attractant pushes cells into the chemotactic state.
    C1,
    /// High attractant pushes cells into the secreting state.
    C2,
}

impl SwitchingCase {
    pub fn label(&self) -> &'static str {
        match self {
            SwitchingCase::NoSwitching => "none",
            SwitchingCase::A => "A",
            SwitchingCase::B1 => "B1",
            SwitchingCase::B2 => "B2",
            SwitchingCase::C1 => "C1",
            SwitchingCase::C2 => "C2",
        }
    }
}

/// A switching family together with its rate scale and steepness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingSpec {
    pub case: SwitchingCase,
    /// Maximum (and for case A, constant) switching rate, dimensionless.
    pub mu: f64,
    /// Hill steepness; q = 30 gives step-like switching.
    pub q: f64,
    /// Reference density n̄ in the C-case Hill denominators; this equals
    /// the uniform steady state, 0.5.
    pub nbar_ref: f64,
}

impl SwitchingSpec {
    pub fn new(case: SwitchingCase, mu: f64, q: f64) -> Result<Self, ModelError> {
        Self::with_nbar_ref(case, mu, q, 0.5)
    }

    pub fn with_nbar_ref(
        case: SwitchingCase,
        mu: f64,
        q: f64,
        nbar_ref: f64,
    ) -> Result<Self, ModelError> {
        if case != SwitchingCase::NoSwitching {
            if !(mu > 0.0) {
                return Err(ModelError::NonPositive { name: "mu", value: mu });
            }
            if !(q > 0.0) {
                return Err(ModelError::NonPositive { name: "q", value: q });
            }
        }
        if !(nbar_ref > 0.0 && nbar_ref < 1.0) {
            return Err(ModelError::OutOfRange {
                name: "nbar_ref",
                value: nbar_ref,
            });
        }
        Ok(Self { case, mu, q, nbar_ref })
    }

    pub fn none() -> Self {
        Self {
            case: SwitchingCase::NoSwitching,
            mu: 0.0,
            q: 1.0,
            nbar_ref: 0.5,
        }
    }

    pub fn is_active(&self) -> bool {
        self.case != SwitchingCase::NoSwitching
    }
}

/// Model variant solved by the PDE right-hand sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelVariant {
    /// Two-phenotype system (n₀ secretes, n₁ chemotaxes, switching couples them).
    TwoPhenotype,
    /// Minimal single-population Keller–Segel model; the density lives in
    /// the n₀ slot (it both secretes and chemotaxes), n₁ is unused, and
    /// `switching` is ignored.
    MinimalKS,
}

/// Dimensionless parameters of the PDE system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Random-motility ratio D = D_n / D_s.
    pub d: f64,
    /// Chemotactic sensitivity χ.
    pub chi: f64,
    pub switching: SwitchingSpec,
    pub variant: ModelVariant,
}

impl ModelParams {
    pub fn new(
        d: f64,
        chi: f64,
        switching: SwitchingSpec,
        variant: ModelVariant,
    ) -> Result<Self, ModelError> {
        if !(d > 0.0) {
            return Err(ModelError::NonPositive { name: "d", value: d });
        }
        if !(chi >= 0.0) {
            return Err(ModelError::NegativeInput { name: "chi", value: chi });
        }
        Ok(Self { d, chi, switching, variant })
    }
}

/// Dimensional parameters of the original system, all strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalParams {
    /// Cell random-motility coefficient.
    pub d_n: f64,
    /// Attractant diffusivity.
    pub d_s: f64,
    /// Chemotactic coefficient of the p = 1 state.
    pub chi_1: f64,
    /// Attractant production rate of the p = 0 state.
    pub alpha_0: f64,
    /// Attractant decay rate.
    pub eta: f64,
    /// Mean initial total cell density over the domain.
    pub sigma: f64,
}

/// Space/time/concentration/density scale factors of the
/// nondimensionalization: T = 1/η, X = √(D_s/η), S = α₀N/η, N = σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondimScales {
    pub x: f64,
    pub t: f64,
    pub s: f64,
    pub n: f64,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum ModelError {
    #[error("{name} must be nonnegative, got {value}")]
    NegativeInput { name: &'static str, value: f64 },
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} out of range, got {value}")]
    OutOfRange { name: &'static str, value: f64 },
}

fn check_nonneg(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::NegativeInput { name, value })
    }
}

/// Switching rates (μ₀₁, μ₁₀) at total density ρ and attractant level s.
///
/// Both rates stay in [0, μ] and the pair sums to μ for the B and C
/// families (the two Hill terms are complements of one another).
pub fn switching_rates(spec: &SwitchingSpec, rho: f64, s: f64) -> Result<(f64, f64), ModelError> {
    check_nonneg("rho", rho)?;
    check_nonneg("s", s)?;
    Ok(switching_rates_unchecked(spec, rho, s))
}

/// `switching_rates` without the domain check, for solver hot loops where
/// positivity is maintained by the scheme.
#[inline]
pub fn switching_rates_unchecked(spec: &SwitchingSpec, rho: f64, s: f64) -> (f64, f64) {
    let mu = spec.mu;
    match spec.case {
        SwitchingCase::NoSwitching => (0.0, 0.0),
        SwitchingCase::A => (mu, mu),
        SwitchingCase::B1 => {
            let f = math::hill_up(rho, 1.0, spec.q);
            let up = mu * f;
            (up, mu - up)
        }
        SwitchingCase::B2 => {
            let f = math::hill_up(rho, 1.0, spec.q);
            let down = mu * f;
            (mu - down, down)
        }
        SwitchingCase::C1 => {
            let f = math::hill_up(s, spec.nbar_ref, spec.q);
            let up = mu * f;
            (up, mu - up)
        }
        SwitchingCase::C2 => {
            let f = math::hill_up(s, spec.nbar_ref, spec.q);
            let down = mu * f;
            (mu - down, down)
        }
    }
}

/// Kinetic coupling G(n₀, n₁, ρ, s) = −μ₀₁(ρ,s) n₀ + μ₁₀(ρ,s) n₁.
///
/// ρ is passed independently of n₀ + n₁: the stability analysis
/// differentiates in n₀ and n₁ separately while ρ tracks their sum.
pub fn kinetic_g(spec: &SwitchingSpec, n0: f64, n1: f64, rho: f64, s: f64) -> Result<f64, ModelError> {
    check_nonneg("n0", n0)?;
    check_nonneg("n1", n1)?;
    let (mu01, mu10) = switching_rates(spec, rho, s)?;
    Ok(-mu01 * n0 + mu10 * n1)
}

/// Reaction (non-transport) part of the dimensionless right-hand side.
///
/// TwoPhenotype: (G, −G, n₀ − s). MinimalKS: (0, 0, n₀ − s) with the
/// single density stored in n₀.
#[inline]
pub fn rhs_reaction(params: &ModelParams, n0: f64, n1: f64, s: f64) -> (f64, f64, f64) {
    match params.variant {
        ModelVariant::TwoPhenotype => {
            let (mu01, mu10) = switching_rates_unchecked(&params.switching, n0 + n1, s);
            let g = -mu01 * n0 + mu10 * n1;
            (g, -g, n0 - s)
        }
        ModelVariant::MinimalKS => (0.0, 0.0, n0 - s),
    }
}

/// Dimensional → dimensionless conversion: D = D_n/D_s and
/// χ = χ₁ α₀ σ / (η D_s), with scales T = 1/η, X = √(D_s/η),
/// S = α₀σ/η, N = σ.
///
/// The switching rates are not converted here: the spec of a run carries
/// the already-dimensionless μ, into which the dimensional scale factors
/// Γ of the switching functions are folded as μ = (Γ/η)·γ̂.
pub fn nondimensionalize(dim: &DimensionalParams) -> Result<(f64, f64, NondimScales), ModelError> {
    for (name, value) in [
        ("d_n", dim.d_n),
        ("d_s", dim.d_s),
        ("chi_1", dim.chi_1),
        ("alpha_0", dim.alpha_0),
        ("eta", dim.eta),
        ("sigma", dim.sigma),
    ] {
        if !(value > 0.0) {
            return Err(ModelError::NonPositive { name, value });
        }
    }
    let d = dim.d_n / dim.d_s;
    let chi = dim.chi_1 * dim.alpha_0 * dim.sigma / (dim.eta * dim.d_s);
    let n = dim.sigma;
    let scales = NondimScales {
        x: math::sqrt(dim.d_s / dim.eta),
        t: 1.0 / dim.eta,
        s: dim.alpha_0 * n / dim.eta,
        n,
    };
    Ok((d, chi, scales))
}
