//! Finite-volume method-of-lines solver on the interval (0, L) with
//! zero-flux boundaries.
//!
//! Diffusion uses flux-form central differences; the chemotaxis flux at
//! face i+½ upwinds on the sign of b = χ(s_{i+1} − s_i)/Δx:
//!
//! ```text
//! F_{i+½} = D(n_{i+1} − n_i)/Δx − b⁺ n_i + b⁻ n_{i+1},
//! b⁺ = max(0, b), b⁻ = max(0, −b)
//! ```
//!
//! with F ≡ 0 at the two boundary faces. Each face flux is computed
//! once and applied to both neighbours, so the discrete total mass of
//! n₀ + n₁ telescopes exactly; time integration is the adaptive
//! embedded pair from [`crate::stepper`].

use crate::artifacts::{Diagnostics, GridShape, ProbeSample, RunArtifacts, RunOutcome, Snapshot};
use crate::math;
use crate::model::{rhs_reaction, ModelParams, ModelVariant};
use crate::stepper::{integrate_adaptive, StepAbort, TimeController};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;
use thiserror::Error;

/// Uniform cell-centred grid on (0, L): cell centres x_i = (i − ½)Δx.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub l: f64,
    pub n_cells: usize,
    pub dx: f64,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GridError {
    #[error("need at least 4 cells, got {0}")]
    TooFewCells(usize),
    #[error("domain length must be positive, got {0}")]
    BadLength(f64),
}

impl Grid1D {
    pub fn new(l: f64, n_cells: usize) -> Result<Self, GridError> {
        if !(l > 0.0) {
            return Err(GridError::BadLength(l));
        }
        if n_cells < 4 {
            return Err(GridError::TooFewCells(n_cells));
        }
        Ok(Self { l, n_cells, dx: l / n_cells as f64 })
    }

    /// Grid with the requested spacing; the cell count is rounded, so
    /// the realized Δx is L / round(L/Δx).
    pub fn with_spacing(l: f64, dx: f64) -> Result<Self, GridError> {
        if !(dx > 0.0) {
            return Err(GridError::BadLength(dx));
        }
        let n = math::round(l / dx) as usize;
        Self::new(l, n)
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    /// Index of the probe cell: the cell whose centre is nearest L/2
    /// (the centre is exact when n_cells is odd).
    pub fn probe_index(&self) -> usize {
        if self.n_cells % 2 == 1 {
            (self.n_cells - 1) / 2
        } else {
            self.n_cells / 2
        }
    }
}

/// Discretized (n₀, n₁, s) at time t.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField1D {
    pub n0: Vec<f64>,
    pub n1: Vec<f64>,
    pub s: Vec<f64>,
    pub t: f64,
}

/// Perturbed uniform state: n₀ ≡ n̄, n₁ ≡ 1 − n̄, and
/// s(x) = n̄ + amplitude · e^{−A(x − L/2)²} sampled at cell centres.
///
/// n̄ ∈ (0, 1]; n̄ = 1 gives the minimal-model initial state with the
/// whole population in the n₀ slot.
pub fn initial_condition_1d(
    grid: &Grid1D,
    nbar: f64,
    amplitude: f64,
    a_focus: f64,
) -> Result<StateField1D, ModelFieldError> {
    if !(nbar > 0.0 && nbar <= 1.0) {
        return Err(ModelFieldError::BadMean(nbar));
    }
    if !(a_focus > 0.0) {
        return Err(ModelFieldError::BadFocus(a_focus));
    }
    let n = grid.n_cells;
    let half = grid.l / 2.0;
    let s = (0..n)
        .map(|i| {
            let dxm = grid.center(i) - half;
            nbar + amplitude * math::exp(-a_focus * dxm * dxm)
        })
        .collect();
    Ok(StateField1D {
        n0: vec![nbar; n],
        n1: vec![1.0 - nbar; n],
        s,
        t: 0.0,
    })
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum ModelFieldError {
    #[error("mean density must lie in (0, 1], got {0}")]
    BadMean(f64),
    #[error("focus parameter must be positive, got {0}")]
    BadFocus(f64),
}

/// Spatial + reaction right-hand side, written into the output slices.
pub(crate) fn rhs_1d_into(
    params: &ModelParams,
    grid: &Grid1D,
    n0: &[f64],
    n1: &[f64],
    s: &[f64],
    dn0: &mut [f64],
    dn1: &mut [f64],
    ds: &mut [f64],
) {
    let n = grid.n_cells;
    let inv_dx = 1.0 / grid.dx;
    let d = params.d;
    let chi = params.chi;
    let minimal = params.variant == ModelVariant::MinimalKS;

    let mut f0_prev = 0.0;
    let mut f1_prev = 0.0;
    let mut fs_prev = 0.0;
    for i in 0..n {
        let (f0, f1, fs) = if i + 1 < n {
            let fs = (s[i + 1] - s[i]) * inv_dx;
            let b = chi * fs;
            let bp = b.max(0.0);
            let bm = (-b).max(0.0);
            if minimal {
                (
                    d * (n0[i + 1] - n0[i]) * inv_dx - bp * n0[i] + bm * n0[i + 1],
                    0.0,
                    fs,
                )
            } else {
                (
                    d * (n0[i + 1] - n0[i]) * inv_dx,
                    d * (n1[i + 1] - n1[i]) * inv_dx - bp * n1[i] + bm * n1[i + 1],
                    fs,
                )
            }
        } else {
            (0.0, 0.0, 0.0)
        };
        let (r0, r1, rs) = rhs_reaction(params, n0[i], n1[i], s[i]);
        dn0[i] = (f0 - f0_prev) * inv_dx + r0;
        dn1[i] = (f1 - f1_prev) * inv_dx + r1;
        ds[i] = (fs - fs_prev) * inv_dx + rs;
        f0_prev = f0;
        f1_prev = f1;
        fs_prev = fs;
    }
}

/// Right-hand side arrays (dn₀, dn₁, ds) for one state.
pub fn spatial_rhs_1d(
    params: &ModelParams,
    grid: &Grid1D,
    state: &StateField1D,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = grid.n_cells;
    let mut dn0 = vec![0.0; n];
    let mut dn1 = vec![0.0; n];
    let mut ds = vec![0.0; n];
    rhs_1d_into(params, grid, &state.n0, &state.n1, &state.s, &mut dn0, &mut dn1, &mut ds);
    (dn0, dn1, ds)
}

fn snapshot_from_flat(t: f64, y: &[f64], n: usize) -> Snapshot {
    Snapshot {
        t,
        n0: y[..n].to_vec(),
        n1: y[n..2 * n].to_vec(),
        s: y[2 * n..].to_vec(),
    }
}

/// Advance the method-of-lines system to t_end.
///
/// Snapshots are recorded at t = 0, every `snapshot_every` time units
/// (the stepper lands on those times exactly) and at the final state; a
/// probe time series at the cell nearest x = L/2 is recorded at every
/// accepted step. Aborts (dt underflow, non-finite values) return the
/// partial artifacts with the corresponding outcome flag.
pub fn integrate_1d(
    params: &ModelParams,
    grid: &Grid1D,
    ic: &StateField1D,
    ctrl: &TimeController,
) -> RunArtifacts {
    let n = grid.n_cells;
    let probe_at = grid.probe_index();

    let mut y: Vec<f64> = Vec::with_capacity(3 * n);
    y.extend_from_slice(&ic.n0);
    y.extend_from_slice(&ic.n1);
    y.extend_from_slice(&ic.s);

    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut probe: Vec<ProbeSample> = Vec::new();
    let mut max_density_series: Vec<(f64, f64)> = Vec::new();
    let mut next_snap = 0.0f64;

    let rhs = {
        let params = *params;
        let grid = grid.clone();
        move |_t: f64, y: &[f64], dy: &mut [f64]| {
            let (n0, rest) = y.split_at(n);
            let (n1, s) = rest.split_at(n);
            let (dn0, drest) = dy.split_at_mut(n);
            let (dn1, ds) = drest.split_at_mut(n);
            rhs_1d_into(&params, &grid, n0, n1, s, dn0, dn1, ds);
        }
    };

    let snapshots_ref = &mut snapshots;
    let probe_ref = &mut probe;
    let max_density_ref = &mut max_density_series;
    let observer = move |t: f64, y: &[f64]| {
        probe_ref.push(ProbeSample {
            t,
            n0: y[probe_at],
            n1: y[n + probe_at],
            s: y[2 * n + probe_at],
        });
        if t + 1e-9 >= next_snap {
            snapshots_ref.push(snapshot_from_flat(t, y, n));
            let max_rho = (0..n)
                .map(|i| y[i] + y[n + i])
                .fold(f64::NEG_INFINITY, f64::max);
            max_density_ref.push((t, max_rho));
            next_snap = (math::floor(t / ctrl.snapshot_every + 1e-9) + 1.0) * ctrl.snapshot_every;
        }
        ControlFlow::Continue(())
    };

    let result = integrate_adaptive(&mut y, ic.t, ctrl, rhs, observer);

    let mut diag = Diagnostics::new();
    let (stats, outcome) = match result {
        Ok(stats) => (stats, RunOutcome::Completed),
        Err((stats, StepAbort::DtUnderflow { t })) => (stats, RunOutcome::DtUnderflow { t }),
        Err((stats, StepAbort::NonFinite { t })) => (stats, RunOutcome::BlowUp { t }),
        // no observer in this solver halts the run
        Err((stats, StepAbort::Halted { .. })) => (stats, RunOutcome::Completed),
    };
    diag.steps = stats.accepted;
    diag.rejected_steps = stats.rejected;
    diag.outcome = outcome;

    // final state snapshot if the last recorded one is older
    if snapshots.last().map(|s| s.t) != Some(stats.t_final) {
        snapshots.push(snapshot_from_flat(stats.t_final, &y, n));
    }
    diag.max_density_series = max_density_series;

    let mut artifacts = RunArtifacts {
        shape: GridShape::Line(grid.clone()),
        snapshots,
        probe,
        diagnostics: diag,
    };
    artifacts.diagnostics.mass_drift = (0..artifacts.snapshots.len())
        .map(|i| artifacts.mass_drift_at(i))
        .fold(0.0, f64::max);
    artifacts
}
