//! Radially symmetric solver on r ∈ (0, L_r), used to probe boundedness
//! versus numerical blow-up at fine resolution.
//!
//! The grid is cell-centred with r_i = (i − ½)Δr, so no node sits on the
//! coordinate singularity: the flux through the r = 0 face is killed
//! identically by its zero face circumference, and the outer face
//! carries zero flux. Face fluxes are the 1D upwind/central forms
//! weighted by the face circumference 2πr, divergences divide by the
//! cell volume 2πr_iΔr, and mass Σ(n₀+n₁)·2πr_iΔr telescopes exactly.
//!
//! Runs integrate with the adaptive controller from the 1D solver and
//! stop when converged (trailing-window max-norm change below 1e-6 over
//! 100 time units), at t_end, or on a blow-up signal (non-finite state,
//! density above the blow-up threshold, or dt underflow — the last
//! recorded as suspected blow-up).

use crate::artifacts::{Diagnostics, GridShape, ProbeSample, RunArtifacts, RunOutcome, Snapshot};
use crate::grid1d::ModelFieldError;
use crate::math;
use crate::model::{rhs_reaction, ModelParams, ModelVariant};
use crate::stepper::{integrate_adaptive, StepAbort, TimeController};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;
use thiserror::Error;

const TWO_PI: f64 = core::f64::consts::TAU;

/// Cell-centred radial grid: r_i = (i − ½)Δr, faces at iΔr.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub l_r: f64,
    pub n_cells: usize,
    pub dr: f64,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum RadialGridError {
    #[error("need at least 4 cells, got {0}")]
    TooFewCells(usize),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
}

impl RadialGrid {
    pub fn new(l_r: f64, n_cells: usize) -> Result<Self, RadialGridError> {
        if !(l_r > 0.0) {
            return Err(RadialGridError::BadRadius(l_r));
        }
        if n_cells < 4 {
            return Err(RadialGridError::TooFewCells(n_cells));
        }
        Ok(Self { l_r, n_cells, dr: l_r / n_cells as f64 })
    }

    pub fn with_spacing(l_r: f64, dr: f64) -> Result<Self, RadialGridError> {
        if !(dr > 0.0) {
            return Err(RadialGridError::BadRadius(dr));
        }
        let n = math::round(l_r / dr) as usize;
        Self::new(l_r, n)
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr
    }

    /// Radius of the face between cells i−1 and i (face 0 is r = 0).
    pub fn face(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    /// 2π r_i Δr.
    pub fn cell_volume(&self, i: usize) -> f64 {
        TWO_PI * self.center(i) * self.dr
    }
}

/// Radial state (n₀, n₁, s) at time t.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub n0: Vec<f64>,
    pub n1: Vec<f64>,
    pub s: Vec<f64>,
    pub t: f64,
}

/// Perturbed uniform state: n₀ ≡ n̄, n₁ ≡ 1 − n̄, s = n̄ + 0.01·e^{−r²}
/// (amplitude configurable), sampled at cell centres.
pub fn initial_condition_radial(
    grid: &RadialGrid,
    nbar: f64,
    amplitude: f64,
) -> Result<RadialState, ModelFieldError> {
    if !(nbar > 0.0 && nbar <= 1.0) {
        return Err(ModelFieldError::BadMean(nbar));
    }
    let n = grid.n_cells;
    let s = (0..n)
        .map(|i| {
            let r = grid.center(i);
            nbar + amplitude * math::exp(-r * r)
        })
        .collect();
    Ok(RadialState {
        n0: vec![nbar; n],
        n1: vec![1.0 - nbar; n],
        s,
        t: 0.0,
    })
}

/// Options beyond the shared time controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    /// Blow-up when any density exceeds this multiple of the uniform
    /// scale (max of the initial fields).
    pub blowup_factor: f64,
    /// Trailing window length for the convergence check, time units.
    pub convergence_window: f64,
    /// Max-norm change over the window below which the run is converged.
    pub convergence_tol: f64,
    /// Probe and (t, max ρ) sampling cadence, time units.
    pub probe_every: f64,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self {
            blowup_factor: 1e6,
            convergence_window: 100.0,
            convergence_tol: 1e-6,
            probe_every: 1.0,
        }
    }
}

/// Precomputed face areas and inverse cell volumes; the kernel runs in
/// solver hot loops at fine resolution.
#[derive(Debug, Clone)]
pub(crate) struct RadialGeometry {
    /// 2π r_{i+½} / Δr for the face above cell i (0 at the outer face).
    area_over_dr: Vec<f64>,
    /// 1 / (2π r_i Δr).
    inv_vol: Vec<f64>,
}

impl RadialGeometry {
    pub(crate) fn new(grid: &RadialGrid) -> Self {
        let n = grid.n_cells;
        let inv_dr = 1.0 / grid.dr;
        let area_over_dr = (0..n)
            .map(|i| if i + 1 < n { TWO_PI * grid.face(i + 1) * inv_dr } else { 0.0 })
            .collect();
        let inv_vol = (0..n).map(|i| 1.0 / grid.cell_volume(i)).collect();
        Self { area_over_dr, inv_vol }
    }
}

/// Spatial + reaction right-hand side in cylindrical flux form.
pub(crate) fn radial_rhs_into(
    params: &ModelParams,
    grid: &RadialGrid,
    geom: &RadialGeometry,
    n0: &[f64],
    n1: &[f64],
    s: &[f64],
    dn0: &mut [f64],
    dn1: &mut [f64],
    ds: &mut [f64],
) {
    let n = grid.n_cells;
    let d = params.d;
    let chi = params.chi;
    let minimal = params.variant == ModelVariant::MinimalKS;

    // weighted running fluxes: (2π r_face / Δr) · Δr·F (zero at the axis
    // face by geometry, zero imposed at the outer face)
    let mut f0_prev = 0.0;
    let mut f1_prev = 0.0;
    let mut fs_prev = 0.0;
    for i in 0..n {
        let (f0, f1, fs) = if i + 1 < n {
            let area = geom.area_over_dr[i];
            let grad_s = s[i + 1] - s[i];
            let b = chi * grad_s;
            let bp = b.max(0.0);
            let bm = (-b).max(0.0);
            if minimal {
                (
                    area * (d * (n0[i + 1] - n0[i]) - bp * n0[i] + bm * n0[i + 1]),
                    0.0,
                    area * grad_s,
                )
            } else {
                (
                    area * d * (n0[i + 1] - n0[i]),
                    area * (d * (n1[i + 1] - n1[i]) - bp * n1[i] + bm * n1[i + 1]),
                    area * grad_s,
                )
            }
        } else {
            (0.0, 0.0, 0.0)
        };
        let inv_vol = geom.inv_vol[i];
        let (r0, r1, rs) = rhs_reaction(params, n0[i], n1[i], s[i]);
        dn0[i] = (f0 - f0_prev) * inv_vol + r0;
        dn1[i] = (f1 - f1_prev) * inv_vol + r1;
        ds[i] = (fs - fs_prev) * inv_vol + rs;
        f0_prev = f0;
        f1_prev = f1;
        fs_prev = fs;
    }
}

/// Right-hand side arrays (dn₀, dn₁, ds) for one radial state.
pub fn radial_rhs(
    params: &ModelParams,
    grid: &RadialGrid,
    state: &RadialState,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = grid.n_cells;
    let geom = RadialGeometry::new(grid);
    let mut dn0 = vec![0.0; n];
    let mut dn1 = vec![0.0; n];
    let mut ds = vec![0.0; n];
    radial_rhs_into(params, grid, &geom, &state.n0, &state.n1, &state.s, &mut dn0, &mut dn1, &mut ds);
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

/// Integrate the radial system until convergence, t_end, or blow-up.
///
/// Snapshots are recorded at t = 0, at four logarithmically spaced
/// times t_end·10^{-3..0}, and at the final state.
pub fn run_radial(
    params: &ModelParams,
    grid: &RadialGrid,
    ic: &RadialState,
    ctrl: &TimeController,
    opts: &RadialOptions,
) -> RunArtifacts {
    let n = grid.n_cells;
    let mut y: Vec<f64> = Vec::with_capacity(3 * n);
    y.extend_from_slice(&ic.n0);
    y.extend_from_slice(&ic.n1);
    y.extend_from_slice(&ic.s);

    let uniform_scale = y.iter().cloned().fold(0.0f64, f64::max);
    let blow_threshold = opts.blowup_factor * uniform_scale;

    let snap_times: Vec<f64> = (0..4)
        .map(|k| ctrl.t_end * math::pow(10.0, -(3.0 - k as f64)))
        .collect();
    let mut snap_idx = 0usize;

    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut probe: Vec<ProbeSample> = Vec::new();
    let mut max_density_series: Vec<(f64, f64)> = Vec::new();
    let mut next_probe = 0.0f64;

    // convergence reference state from ≥ one window ago
    let mut ref_state = y.clone();
    let mut ref_t = ic.t;
    let mut last_window_change: Option<f64> = None;

    #[derive(PartialEq, Clone, Copy)]
    enum Halt {
        None,
        Converged(f64),
        BlowUp(f64),
    }
    let mut halt = Halt::None;

    let rhs = {
        let params = *params;
        let grid = grid.clone();
        let geom = RadialGeometry::new(&grid);
        move |_t: f64, y: &[f64], dy: &mut [f64]| {
            let (n0, rest) = y.split_at(n);
            let (n1, s) = rest.split_at(n);
            let (dn0, drest) = dy.split_at_mut(n);
            let (dn1, ds) = drest.split_at_mut(n);
            radial_rhs_into(&params, &grid, &geom, n0, n1, s, dn0, dn1, ds);
        }
    };

    let snapshots_ref = &mut snapshots;
    let probe_ref = &mut probe;
    let max_density_ref = &mut max_density_series;
    let halt_ref = &mut halt;
    let ref_state_ref = &mut ref_state;
    let window_change_ref = &mut last_window_change;
    let observer = move |t: f64, y: &[f64]| {
        if t + 1e-9 >= next_probe {
            probe_ref.push(ProbeSample {
                t,
                n0: y[0],
                n1: y[n],
                s: y[2 * n],
            });
            let max_rho = (0..n).map(|i| y[i] + y[n + i]).fold(f64::NEG_INFINITY, f64::max);
            max_density_ref.push((t, max_rho));
            next_probe = (math::floor(t / opts.probe_every + 1e-9) + 1.0) * opts.probe_every;

            if max_rho > blow_threshold {
                *halt_ref = Halt::BlowUp(t);
                return ControlFlow::Break(());
            }
        }
        if snap_idx < snap_times.len() && t + 1e-9 >= snap_times[snap_idx] {
            snapshots_ref.push(snapshot_from_flat(t, y, n));
            while snap_idx < snap_times.len() && snap_times[snap_idx] <= t + 1e-9 {
                snap_idx += 1;
            }
        }
        if t - ref_t >= opts.convergence_window {
            let change = y
                .iter()
                .zip(ref_state_ref.iter())
                .map(|(a, b)| math::fabs(a - b))
                .fold(0.0f64, f64::max);
            *window_change_ref = Some(change);
            if change < opts.convergence_tol {
                *halt_ref = Halt::Converged(t);
                return ControlFlow::Break(());
            }
            ref_state_ref.copy_from_slice(y);
            ref_t = t;
        }
        ControlFlow::Continue(())
    };

    // record initial state
    let ic_snapshot = snapshot_from_flat(ic.t, &y, n);

    let result = integrate_adaptive(&mut y, ic.t, ctrl, rhs, observer);

    let mut diag = Diagnostics::new();
    let (stats, outcome) = match (result, halt) {
        (Ok(stats), _) => (stats, RunOutcome::Completed),
        (Err((stats, StepAbort::Halted { .. })), Halt::Converged(t)) => {
            (stats, RunOutcome::Converged { t })
        }
        (Err((stats, StepAbort::Halted { t })), Halt::BlowUp(_)) => (stats, RunOutcome::BlowUp { t }),
        (Err((stats, StepAbort::Halted { .. })), Halt::None) => (stats, RunOutcome::Completed),
        (Err((stats, StepAbort::DtUnderflow { t })), _) => (stats, RunOutcome::DtUnderflow { t }),
        (Err((stats, StepAbort::NonFinite { t })), _) => (stats, RunOutcome::BlowUp { t }),
    };
    diag.steps = stats.accepted;
    diag.rejected_steps = stats.rejected;
    diag.outcome = outcome;
    diag.max_density_series = max_density_series;
    diag.final_window_change = last_window_change;

    let mut all_snapshots = vec![ic_snapshot];
    all_snapshots.extend(snapshots);
    if all_snapshots.last().map(|s| s.t) != Some(stats.t_final) {
        all_snapshots.push(snapshot_from_flat(stats.t_final, &y, n));
    }

    let mut artifacts = RunArtifacts {
        shape: GridShape::Radial(grid.clone()),
        snapshots: all_snapshots,
        probe,
        diagnostics: diag,
    };
    artifacts.diagnostics.mass_drift = (0..artifacts.snapshots.len())
        .map(|i| artifacts.mass_drift_at(i))
        .fold(0.0, f64::max);
    artifacts
}
