//! Embedded adaptive explicit time stepping for the method-of-lines
//! systems (1D interval and radial solvers).
//!
//! The pair is Bogacki–Shampine 3(2): third-order propagation with an
//! embedded second-order error estimate and first-same-as-last reuse.
//! Step control is the usual scaled-RMS error with a 0.9 safety factor;
//! a positivity guard rejects any step that drives a component below
//! −abs_tol and clips surviving undershoots in (−abs_tol, 0) to zero,
//! so densities stay nonnegative without biasing the mass budget by
//! more than abs_tol per cell.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;
use thiserror::Error;

/// Adaptive-step configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeController {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    /// Snapshot cadence in time units.
    pub snapshot_every: f64,
}

impl TimeController {
    pub fn new(t_end: f64, snapshot_every: f64) -> Self {
        Self {
            dt_init: 1e-4,
            dt_min: 1e-12,
            dt_max: 1.0,
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            t_end,
            snapshot_every,
        }
    }

    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(ControllerError::StepOrdering {
                dt_min: self.dt_min,
                dt_init: self.dt_init,
                dt_max: self.dt_max,
            });
        }
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(ControllerError::Tolerance { name, value: tol });
            }
        }
        if !(self.t_end > 0.0 && self.snapshot_every > 0.0) {
            return Err(ControllerError::Horizon {
                t_end: self.t_end,
                snapshot_every: self.snapshot_every,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum ControllerError {
    #[error("need dt_min <= dt_init <= dt_max, got {dt_min}, {dt_init}, {dt_max}")]
    StepOrdering { dt_min: f64, dt_init: f64, dt_max: f64 },
    #[error("{name} must lie in (0, 1e-2], got {value}")]
    Tolerance { name: &'static str, value: f64 },
    #[error("t_end and snapshot_every must be positive, got {t_end}, {snapshot_every}")]
    Horizon { t_end: f64, snapshot_every: f64 },
}

/// Why integration stopped before t_end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepAbort {
    /// Step size fell below dt_min while rejecting steps.
    DtUnderflow { t: f64 },
    /// The right-hand side or state went non-finite even at dt_min.
    NonFinite { t: f64 },
    /// The observer requested a stop (e.g. convergence or blow-up
    /// threshold detected outside the stepper).
    Halted { t: f64 },
}

/// Counters reported after integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub t_final: f64,
}

/// Integrate dy/dt = rhs(t, y) from t0 to ctrl.t_end.
///
/// `observer` sees every accepted state (including a final partial step
/// landing exactly on t_end) and may halt the run. The positivity guard
/// applies to all components.
pub fn integrate_adaptive<R, O>(
    y: &mut Vec<f64>,
    t0: f64,
    ctrl: &TimeController,
    mut rhs: R,
    mut observer: O,
) -> Result<StepStats, (StepStats, StepAbort)>
where
    R: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]) -> ControlFlow<()>,
{
    let n = y.len();
    let mut stats = StepStats::default();
    let mut t = t0;
    stats.t_final = t;

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    rhs(t, y, &mut k1);
    let mut h = ctrl.dt_init.min(ctrl.t_end - t).max(ctrl.dt_min);
    // Hold the step size after a rejection: stability-limited problems
    // otherwise thrash between an aggressive growth and the boundary.
    let mut recently_rejected = false;

    if let ControlFlow::Break(()) = observer(t, y) {
        return Err((stats, StepAbort::Halted { t }));
    }

    while t < ctrl.t_end {
        h = h.min(ctrl.t_end - t);

        // Bogacki–Shampine stages
        for i in 0..n {
            stage[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(t + 0.5 * h, &stage, &mut k2);
        for i in 0..n {
            stage[i] = y[i] + 0.75 * h * k2[i];
        }
        rhs(t + 0.75 * h, &stage, &mut k3);
        for i in 0..n {
            y_new[i] = y[i] + h * (2.0 / 9.0 * k1[i] + 1.0 / 3.0 * k2[i] + 4.0 / 9.0 * k3[i]);
        }
        rhs(t + h, &y_new, &mut k4);

        let mut finite = true;
        let mut err_sq = 0.0;
        let mut min_val = f64::INFINITY;
        for i in 0..n {
            let e = h
                * (-5.0 / 72.0 * k1[i] + 1.0 / 12.0 * k2[i] + 1.0 / 9.0 * k3[i]
                    - 1.0 / 8.0 * k4[i]);
            let yv = y_new[i];
            if !yv.is_finite() || !e.is_finite() {
                finite = false;
                break;
            }
            let scale = ctrl.abs_tol + ctrl.rel_tol * libm::fabs(yv).max(libm::fabs(y[i]));
            let r = e / scale;
            err_sq += r * r;
            min_val = min_val.min(yv);
        }
        let err = if finite { libm::sqrt(err_sq / n as f64) } else { f64::INFINITY };
        let positive_enough = finite && min_val >= -ctrl.abs_tol;

        if err <= 1.0 && positive_enough {
            // accept
            t += h;
            stats.accepted += 1;
            stats.t_final = t;
            for i in 0..n {
                y[i] = if y_new[i] < 0.0 { 0.0 } else { y_new[i] };
            }
            if min_val < 0.0 {
                // clipping invalidates first-same-as-last reuse
                rhs(t, y, &mut k1);
            } else {
                core::mem::swap(&mut k1, &mut k4);
            }
            if let ControlFlow::Break(()) = observer(t, y) {
                return Err((stats, StepAbort::Halted { t }));
            }
            let max_grow = if recently_rejected { 1.0 } else { 2.0 };
            let grow = if err == 0.0 {
                max_grow
            } else {
                (0.9 * libm::pow(err, -1.0 / 3.0)).clamp(0.2, max_grow)
            };
            h = (h * grow).min(ctrl.dt_max);
            recently_rejected = false;
        } else {
            stats.rejected += 1;
            recently_rejected = true;
            let shrink = if finite {
                (0.9 * libm::pow(err.max(1.0), -1.0 / 3.0)).clamp(0.1, 0.7)
            } else {
                0.25
            };
            h *= shrink;
            if h < ctrl.dt_min {
                let abort = if finite {
                    StepAbort::DtUnderflow { t }
                } else {
                    StepAbort::NonFinite { t }
                };
                return Err((stats, abort));
            }
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_is_accurate() {
        let ctrl = TimeController {
            dt_init: 1e-3,
            dt_min: 1e-14,
            dt_max: 1.0,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            t_end: 5.0,
            snapshot_every: 1.0,
        };
        let mut y = vec![1.0, 2.0];
        let stats = integrate_adaptive(
            &mut y,
            0.0,
            &ctrl,
            |_, y, dy| {
                dy[0] = -y[0];
                dy[1] = -2.0 * y[1];
            },
            |_, _| ControlFlow::Continue(()),
        )
        .unwrap();
        assert_relative_eq!(y[0], (-5.0f64).exp(), max_relative = 1e-6);
        assert_relative_eq!(y[1], 2.0 * (-10.0f64).exp(), max_relative = 1e-5);
        assert_eq!(stats.t_final, 5.0);
    }

    #[test]
    fn order_of_accuracy_is_at_least_three() {
        // fixed-tolerance runs aside, verify the one-step error scales
        // like h³ (order ≥ 2 embedded pair, order-3 propagation)
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = t * y[0];
        };
        let exact = |t: f64| (0.5 * t * t as f64).exp();
        let mut errs = [0.0f64; 2];
        for (idx, h) in [0.05, 0.025].into_iter().enumerate() {
            let mut y = vec![1.0];
            let mut t = 0.0;
            let (mut k1, mut k2, mut k3) = (vec![0.0], vec![0.0], vec![0.0]);
            let mut stage = vec![0.0];
            while t < 1.0 - 1e-12 {
                rhs(t, &y, &mut k1);
                stage[0] = y[0] + 0.5 * h * k1[0];
                rhs(t + 0.5 * h, &stage, &mut k2);
                stage[0] = y[0] + 0.75 * h * k2[0];
                rhs(t + 0.75 * h, &stage, &mut k3);
                y[0] += h * (2.0 / 9.0 * k1[0] + 1.0 / 3.0 * k2[0] + 4.0 / 9.0 * k3[0]);
                t += h;
            }
            errs[idx] = (y[0] - exact(1.0)).abs();
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 2.7, "observed order {order}");
    }

    #[test]
    fn positivity_guard_clips_undershoot() {
        let ctrl = TimeController {
            dt_init: 1e-3,
            dt_min: 1e-14,
            dt_max: 0.5,
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            t_end: 20.0,
            snapshot_every: 1.0,
        };
        let mut y = vec![1.0];
        integrate_adaptive(
            &mut y,
            0.0,
            &ctrl,
            |_, y, dy| dy[0] = -3.0 * y[0],
            |_, y| {
                assert!(y[0] >= 0.0);
                ControlFlow::Continue(())
            },
        )
        .unwrap();
        assert!(y[0] >= 0.0);
    }

    #[test]
    fn nonfinite_rhs_aborts() {
        let ctrl = TimeController::new(1.0, 1.0);
        let mut y = vec![1.0];
        let out = integrate_adaptive(
            &mut y,
            0.0,
            &ctrl,
            |_, y, dy| dy[0] = y[0] * f64::NAN,
            |_, _| ControlFlow::Continue(()),
        );
        assert!(matches!(out, Err((_, StepAbort::NonFinite { .. }))));
    }

    #[test]
    fn controller_validation() {
        let mut c = TimeController::new(10.0, 1.0);
        assert!(c.validate().is_ok());
        c.rel_tol = 0.5;
        assert!(c.validate().is_err());
        let mut c = TimeController::new(10.0, 1.0);
        c.dt_min = 1.0;
        c.dt_max = 0.1;
        assert!(c.validate().is_err());
    }
}
