//! Run outputs shared by the three solvers: snapshot series, probe time
//! series, and diagnostics (mass drift, CFL advisories, blow-up and
//! convergence flags).

use crate::grid1d::Grid1D;
use crate::grid2d::Grid2D;
use crate::radial::RadialGrid;
use alloc::vec::Vec;

/// Geometry a run was produced on, carrying the cell measures needed to
/// integrate densities.
#[derive(Debug, Clone, PartialEq)]
pub enum GridShape {
    Line(Grid1D),
    Square(Grid2D),
    Radial(RadialGrid),
}

impl GridShape {
    /// ∫ f dΩ over the cells of this grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        match self {
            GridShape::Line(g) => f.iter().sum::<f64>() * g.dx,
            GridShape::Square(g) => f.iter().sum::<f64>() * g.dx * g.dx,
            GridShape::Radial(g) => f
                .iter()
                .enumerate()
                .map(|(i, v)| v * g.cell_volume(i))
                .sum(),
        }
    }

    pub fn n_cells(&self) -> usize {
        match self {
            GridShape::Line(g) => g.n_cells,
            GridShape::Square(g) => g.n * g.n,
            GridShape::Radial(g) => g.n_cells,
        }
    }
}

/// Full-field state at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub n0: Vec<f64>,
    pub n1: Vec<f64>,
    pub s: Vec<f64>,
}

impl Snapshot {
    pub fn total_density(&self) -> Vec<f64> {
        self.n0.iter().zip(&self.n1).map(|(a, b)| a + b).collect()
    }
}

/// Point sample of (n₀, n₁, s) at the probe cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSample {
    pub t: f64,
    pub n0: f64,
    pub n1: f64,
    pub s: f64,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunOutcome {
    /// Integrated to t_end.
    Completed,
    /// Trailing-window max-norm change fell below the convergence
    /// tolerance at time t (radial runs).
    Converged { t: f64 },
    /// Non-finite values or the density threshold was exceeded.
    BlowUp { t: f64 },
    /// The adaptive step shrank below dt_min; stiffness or incipient
    /// blow-up suspected.
    DtUnderflow { t: f64 },
    /// A density left the nonnegative range by more than rounding in
    /// the fixed-step scheme (CFL failure).
    NegativeDensity { t: f64 },
}

impl RunOutcome {
    pub fn is_abort(&self) -> bool {
        matches!(
            self,
            RunOutcome::BlowUp { .. } | RunOutcome::DtUnderflow { .. } | RunOutcome::NegativeDensity { .. }
        )
    }

    /// Blow-up flag per the solvers' contract: hard blow-up, or dt
    /// underflow recorded as suspected blow-up.
    pub fn blowup_time(&self) -> Option<f64> {
        match self {
            RunOutcome::BlowUp { t } | RunOutcome::DtUnderflow { t } => Some(*t),
            _ => None,
        }
    }
}

/// Solver bookkeeping accumulated over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub outcome: RunOutcome,
    /// Max over snapshots of |∫ρ − ∫ρ(0)| / ∫ρ(0).
    pub mass_drift: f64,
    /// Accepted steps.
    pub steps: u64,
    /// Rejected trial steps (adaptive solvers only).
    pub rejected_steps: u64,
    /// Steps on which τ exceeded the advisory stability bound
    /// 0.9·min(dx²/(4(D+1)), dx/(2·max|b|)) (fixed-step solver only).
    pub cfl_violations: u64,
    /// First time the advisory bound was violated.
    pub first_cfl_violation: Option<f64>,
    /// (t, max ρ) sampled at probe cadence.
    pub max_density_series: Vec<(f64, f64)>,
    /// Last max-norm state change measured over the trailing convergence
    /// window (radial runs).
    pub final_window_change: Option<f64>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Self {
            outcome: RunOutcome::Completed,
            mass_drift: 0.0,
            steps: 0,
            rejected_steps: 0,
            cfl_violations: 0,
            first_cfl_violation: None,
            max_density_series: Vec::new(),
            final_window_change: None,
        }
    }
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self::new()
    }
}

/// Everything a solver hands back from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub shape: GridShape,
    pub snapshots: Vec<Snapshot>,
    pub probe: Vec<ProbeSample>,
    pub diagnostics: Diagnostics,
}

impl RunArtifacts {
    /// Relative total-mass drift of a snapshot against the first one.
    pub fn mass_drift_at(&self, idx: usize) -> f64 {
        let m0 = self.shape.integrate(&self.snapshots[0].total_density());
        let m = self.shape.integrate(&self.snapshots[idx].total_density());
        crate::math::fabs(m - m0) / m0
    }
}
