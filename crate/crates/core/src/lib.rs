//! Two-phenotype chemotaxis model: a population split into an
//! attractant-secreting state (n₀) and a chemotactic state (n₁), with
//! environment-dependent switching between the two, coupled to the
//! attractant field s:
//!
//! ```text
//! ∂n₀/∂t = D ∇²n₀ − μ₀₁(ρ,s) n₀ + μ₁₀(ρ,s) n₁
//! ∂n₁/∂t = D ∇²n₁ − χ ∇·(n₁ ∇s) + μ₀₁(ρ,s) n₀ − μ₁₀(ρ,s) n₁
//! ∂s/∂t  = ∇²s + n₀ − s,          ρ = n₀ + n₁
//! ```
//!
//! in dimensionless form on a domain with zero-flux boundaries and unit
//! mean total density. The crate provides the switching-function
//! families (cases A, B₁, B₂, C₁, C₂), the full linear-stability
//! toolkit for the uniform steady state (dispersion cubic, instability
//! thresholds, minimum domain lengths, (χ, μ) eigenvalue maps), and
//! conservative finite-volume solvers on a 1D interval, a 2D square and
//! a radially symmetric disc, plus pattern diagnostics (peak census,
//! oscillation/extinction detection, mass audit).
//!
//! The minimal single-population Keller–Segel model is included as a
//! variant, mainly as a blow-up positive control for the radial runs.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion
//! CLI crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod artifacts;
pub mod cubic;
pub mod grid1d;
pub mod grid2d;
pub mod math;
pub mod model;
pub mod radial;
pub mod rng;
pub mod stability;
pub mod stepper;

pub use artifacts::{Diagnostics, GridShape, ProbeSample, RunArtifacts, RunOutcome, Snapshot};
pub use model::{
    DimensionalParams, ModelError, ModelParams, ModelVariant, NondimScales, SwitchingCase,
    SwitchingSpec,
};
pub use stability::{
    DispersionPoint, HValues, StabilityReport, SteadyState, ThresholdBranch,
};
