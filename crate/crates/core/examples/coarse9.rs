use chemotaxis_core::model::{ModelParams, ModelVariant, SwitchingCase, SwitchingSpec};
use chemotaxis_core::radial::{initial_condition_radial, run_radial, RadialGrid, RadialOptions};
use chemotaxis_core::stepper::TimeController;

fn main() {
    let mu: f64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let rel: f64 = std::env::args().nth(2).unwrap().parse().unwrap();
    let grid = RadialGrid::with_spacing(10.0, 2e-2).unwrap();
    let params = ModelParams::new(
        1.0, 8.0,
        SwitchingSpec::new(SwitchingCase::A, mu, 1.0).unwrap(),
        ModelVariant::TwoPhenotype,
    ).unwrap();
    let mut ctrl = TimeController::new(1e4, 2500.0);
    ctrl.rel_tol = rel;
    ctrl.dt_max = 0.5;
    let ic = initial_condition_radial(&grid, 0.5, 0.01).unwrap();
    let t0 = std::time::Instant::now();
    let run = run_radial(&params, &grid, &ic, &ctrl, &RadialOptions::default());
    let last = run.snapshots.last().unwrap();
    println!(
        "mu={mu} rel={rel}: {:?}, peak n1 {:.4e}, window_change {:?}, drift {:.1e}, steps {}, rej {}, {:.1}s",
        run.diagnostics.outcome,
        last.n1.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        run.diagnostics.final_window_change,
        run.diagnostics.mass_drift,
        run.diagnostics.steps,
        run.diagnostics.rejected_steps,
        t0.elapsed().as_secs_f64()
    );
}
