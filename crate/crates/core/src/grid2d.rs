//! Fully explicit finite-volume solver on the square (0, L)² with
//! zero-flux boundaries and a fixed time step τ.
//!
//! One step advances, in order, the attractant w, the secreting density
//! u (= n₀), then the chemotactic density v (= n₁), every right-hand
//! side evaluated at step k. Diffusion of w and u uses the five-point
//! stencil with mirror ghost cells (w₀ⱼ = w₁ⱼ etc.); v is updated in
//! flux form,
//!
//! ```text
//! F_{i+½,j} = D(v_{i+1,j} − v_{i,j})/Δx − b⁺ v_{i,j} + b⁻ v_{i+1,j},
//! b = χ(w_{i+1,j} − w_{i,j})/Δx,  b⁺ = max(0, b),  b⁻ = max(0, −b)
//! ```
//!
//! with zero boundary fluxes F_{½,j} = F_{N+½,j} = 0. Switching rates
//! take ρ = u + v and s = w pointwise. Every face flux is computed once
//! and shared by its two cells, and the ±switching exchange is the same
//! product pair with opposite signs, so Σ(u+v) is conserved to rounding
//! across steps.

use crate::artifacts::{Diagnostics, GridShape, ProbeSample, RunArtifacts, RunOutcome, Snapshot};
use crate::grid1d::ModelFieldError;
use crate::model::{switching_rates_unchecked, ModelParams, ModelVariant};
use crate::rng::{Rng2DSeed, Xoshiro256StarStar};
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

/// Square grid, N×N cells, Δx = Δy = L/N.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub l: f64,
    pub n: usize,
    pub dx: f64,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum Grid2DError {
    #[error("need at least 8 cells per side, got {0}")]
    TooFewCells(usize),
    #[error("domain length must be positive, got {0}")]
    BadLength(f64),
}

impl Grid2D {
    pub fn new(l: f64, n: usize) -> Result<Self, Grid2DError> {
        if !(l > 0.0) {
            return Err(Grid2DError::BadLength(l));
        }
        if n < 8 {
            return Err(Grid2DError::TooFewCells(n));
        }
        Ok(Self { l, n, dx: l / n as f64 })
    }

    pub fn with_spacing(l: f64, dx: f64) -> Result<Self, Grid2DError> {
        if !(dx > 0.0) {
            return Err(Grid2DError::BadLength(dx));
        }
        let n = crate::math::round(l / dx) as usize;
        Self::new(l, n)
    }
}

/// Discretized fields at step k: u = n₀, v = n₁, w = s, row-major N×N.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField2D {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub t: f64,
    pub k_step: u64,
}

/// Uniform state with seeded uniform noise on the attractant:
/// u ≡ n̄, v ≡ 1 − n̄, w = n̄ + amplitude·R, R i.i.d. uniform on [0, 1)
/// drawn row-major from the xoshiro256** stream of `seed`.
pub fn initial_condition_2d(
    grid: &Grid2D,
    nbar: f64,
    amplitude: f64,
    seed: Rng2DSeed,
) -> Result<StateField2D, ModelFieldError> {
    if !(nbar > 0.0 && nbar <= 1.0) {
        return Err(ModelFieldError::BadMean(nbar));
    }
    let n2 = grid.n * grid.n;
    let mut rng = Xoshiro256StarStar::from_seed(seed);
    let w = (0..n2).map(|_| nbar + amplitude * rng.next_f64()).collect();
    Ok(StateField2D {
        u: vec![nbar; n2],
        v: vec![1.0 - nbar; n2],
        w,
        t: 0.0,
        k_step: 0,
    })
}

#[inline]
fn mirror(i: usize, delta: isize, n: usize) -> usize {
    // ghost cells copy the adjacent interior cell
    let j = i as isize + delta;
    if j < 0 {
        0
    } else if j >= n as isize {
        n - 1
    } else {
        j as usize
    }
}

/// Advisory CFL info produced by one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub max_abs_b: f64,
    pub max_density: f64,
    pub min_density: f64,
    pub finite: bool,
}

pub(crate) fn step_2d_into(
    params: &ModelParams,
    grid: &Grid2D,
    state: &StateField2D,
    tau: f64,
    next: &mut StateField2D,
) -> StepInfo {
    let n = grid.n;
    let dx = grid.dx;
    let inv_dx = 1.0 / dx;
    let inv_dx2 = inv_dx * inv_dx;
    let d = params.d;
    let chi = params.chi;
    let minimal = params.variant == ModelVariant::MinimalKS;
    let (u, v, w) = (&state.u[..], &state.v[..], &state.w[..]);

    let mut info = StepInfo {
        max_abs_b: 0.0,
        max_density: f64::NEG_INFINITY,
        min_density: f64::INFINITY,
        finite: true,
    };

    // w first: five-point Laplacian with mirror ghosts, source u − w
    for j in 0..n {
        for i in 0..n {
            let c = j * n + i;
            let e = j * n + mirror(i, 1, n);
            let ww = j * n + mirror(i, -1, n);
            let no = mirror(j, 1, n) * n + i;
            let so = mirror(j, -1, n) * n + i;
            let lap = (w[e] - 2.0 * w[c] + w[ww]) * inv_dx2 + (w[no] - 2.0 * w[c] + w[so]) * inv_dx2;
            next.w[c] = w[c] + tau * (lap + u[c] - w[c]);
        }
    }

    // then u: diffusion plus switching, all at step k
    if minimal {
        // minimal model: u is the single chemotactic+secreting density,
        // advanced in flux form below; no plain-diffusion pass here
    } else {
        for j in 0..n {
            for i in 0..n {
                let c = j * n + i;
                let e = j * n + mirror(i, 1, n);
                let ww = j * n + mirror(i, -1, n);
                let no = mirror(j, 1, n) * n + i;
                let so = mirror(j, -1, n) * n + i;
                let lap =
                    (u[e] - 2.0 * u[c] + u[ww]) * inv_dx2 + (u[no] - 2.0 * u[c] + u[so]) * inv_dx2;
                let (m01, m10) = switching_rates_unchecked(&params.switching, u[c] + v[c], w[c]);
                let exchange = -m01 * u[c] + m10 * v[c];
                next.u[c] = u[c] + tau * (d * lap + exchange);
            }
        }
    }

    // then v (or u for the minimal model): upwind flux form on the
    // chemotactic density, zero boundary fluxes
    {
        let field: &[f64] = if minimal { u } else { v };
        let out: &mut [f64] = if minimal { &mut next.u } else { &mut next.v };
        // bottom-face flux of the current row, per column
        let mut flux_south = vec![0.0f64; n];
        for j in 0..n {
            let mut flux_west = 0.0f64;
            for i in 0..n {
                let c = j * n + i;
                // east face
                let flux_east = if i + 1 < n {
                    let b = chi * (w[c + 1] - w[c]) * inv_dx;
                    let babs = if b < 0.0 { -b } else { b };
                    if babs > info.max_abs_b {
                        info.max_abs_b = babs;
                    }
                    let bp = b.max(0.0);
                    let bm = (-b).max(0.0);
                    d * (field[c + 1] - field[c]) * inv_dx - bp * field[c] + bm * field[c + 1]
                } else {
                    0.0
                };
                // north face
                let flux_north = if j + 1 < n {
                    let b = chi * (w[c + n] - w[c]) * inv_dx;
                    let babs = if b < 0.0 { -b } else { b };
                    if babs > info.max_abs_b {
                        info.max_abs_b = babs;
                    }
                    let bp = b.max(0.0);
                    let bm = (-b).max(0.0);
                    d * (field[c + n] - field[c]) * inv_dx - bp * field[c] + bm * field[c + n]
                } else {
                    0.0
                };
                let div = (flux_east - flux_west) * inv_dx + (flux_north - flux_south[i]) * inv_dx;
                let exchange = if minimal {
                    0.0
                } else {
                    let (m01, m10) = switching_rates_unchecked(&params.switching, u[c] + v[c], w[c]);
                    m01 * u[c] - m10 * v[c]
                };
                out[c] = field[c] + tau * (div + exchange);
                flux_west = flux_east;
                flux_south[i] = flux_north;
            }
        }
    }
    if minimal {
        next.v.copy_from_slice(v);
    }

    // density diagnostics over the new fields
    for c in 0..n * n {
        let rho = next.u[c] + next.v[c];
        if !rho.is_finite() || !next.w[c].is_finite() {
            info.finite = false;
        }
        if rho > info.max_density {
            info.max_density = rho;
        }
        let lo = next.u[c].min(next.v[c]).min(next.w[c]);
        if lo < info.min_density {
            info.min_density = lo;
        }
    }

    next.t = (state.k_step + 1) as f64 * tau;
    next.k_step = state.k_step + 1;
    info
}

/// One explicit step of length τ (allocating variant of the in-place
/// kernel used by [`run_2d`]).
pub fn step_2d(params: &ModelParams, grid: &Grid2D, state: &StateField2D, tau: f64) -> StateField2D {
    let mut next = state.clone();
    step_2d_into(params, grid, state, tau, &mut next);
    next
}

/// Advisory stability bound 0.9·min(Δx²/(4(D+1)), Δx/(2·max|b|)).
pub fn cfl_bound(d: f64, dx: f64, max_abs_b: f64) -> f64 {
    let diffusive = dx * dx / (4.0 * (d + 1.0));
    let advective = if max_abs_b > 0.0 {
        dx / (2.0 * max_abs_b)
    } else {
        f64::INFINITY
    };
    0.9 * diffusive.min(advective)
}

/// Iterate the explicit scheme to t_end.
///
/// Full-field snapshots are stored at the requested times (first step
/// reaching each time) plus the initial and final states; the probe
/// series samples the domain-centre cell every ~0.1 time units. A CFL
/// violation of the advisory bound is counted (not fatal); non-finite
/// values abort with the blow-up flag, and densities below −1e-12
/// abort as a negative-density CFL failure.
pub fn run_2d(
    params: &ModelParams,
    grid: &Grid2D,
    ic: &StateField2D,
    tau: f64,
    t_end: f64,
    snapshot_times: &[f64],
) -> RunArtifacts {
    let n = grid.n;
    let steps_total = crate::math::ceil(t_end / tau - 1e-9) as u64;
    let probe_cell = (n / 2) * n + n / 2;
    let probe_stride = ((0.1 / tau) as u64).max(1);

    let mut snaps: Vec<f64> = snapshot_times.to_vec();
    snaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    snaps.dedup();
    let mut snap_idx = 0;

    let mut state = ic.clone();
    let mut next = ic.clone();
    let mut snapshots = Vec::new();
    let mut probe = Vec::new();
    let mut diag = Diagnostics::new();

    let record = |s: &StateField2D| Snapshot {
        t: s.t,
        n0: s.u.clone(),
        n1: s.v.clone(),
        s: s.w.clone(),
    };

    snapshots.push(record(&state));
    while snap_idx < snaps.len() && snaps[snap_idx] <= state.t {
        snap_idx += 1;
    }
    probe.push(ProbeSample {
        t: state.t,
        n0: state.u[probe_cell],
        n1: state.v[probe_cell],
        s: state.w[probe_cell],
    });

    let mut outcome = RunOutcome::Completed;
    for k in 0..steps_total {
        let info = step_2d_into(params, grid, &state, tau, &mut next);
        core::mem::swap(&mut state, &mut next);
        diag.steps += 1;

        if tau > cfl_bound(params.d, grid.dx, info.max_abs_b) {
            diag.cfl_violations += 1;
            if diag.first_cfl_violation.is_none() {
                diag.first_cfl_violation = Some(state.t);
            }
        }
        if !info.finite {
            outcome = RunOutcome::BlowUp { t: state.t };
            break;
        }
        if info.min_density < -1e-12 {
            outcome = RunOutcome::NegativeDensity { t: state.t };
            break;
        }

        if (k + 1) % probe_stride == 0 || k + 1 == steps_total {
            probe.push(ProbeSample {
                t: state.t,
                n0: state.u[probe_cell],
                n1: state.v[probe_cell],
                s: state.w[probe_cell],
            });
            diag.max_density_series.push((state.t, info.max_density));
        }
        if snap_idx < snaps.len() && state.t + 1e-12 >= snaps[snap_idx] {
            snapshots.push(record(&state));
            while snap_idx < snaps.len() && snaps[snap_idx] <= state.t + 1e-12 {
                snap_idx += 1;
            }
        }
    }

    if snapshots.last().map(|s| s.t) != Some(state.t) {
        snapshots.push(record(&state));
    }
    diag.outcome = outcome;

    let mut artifacts = RunArtifacts {
        shape: GridShape::Square(grid.clone()),
        snapshots,
        probe,
        diagnostics: diag,
    };
    artifacts.diagnostics.mass_drift = (0..artifacts.snapshots.len())
        .map(|i| artifacts.mass_drift_at(i))
        .fold(0.0, f64::max);
    artifacts
}
