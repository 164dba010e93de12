use chemotaxis_core::grid2d::{initial_condition_2d, run_2d, Grid2D};
use chemotaxis_core::model::{ModelParams, ModelVariant, SwitchingCase, SwitchingSpec};
use chemotaxis_core::rng::Rng2DSeed;

fn main() {
    let grid = Grid2D::with_spacing(40.0, 0.5).unwrap();
    let params = ModelParams::new(
        1.0, 10.0,
        SwitchingSpec::new(SwitchingCase::A, 1.0, 1.0).unwrap(),
        ModelVariant::TwoPhenotype,
    ).unwrap();
    let ic = initial_condition_2d(&grid, 0.5, 0.01, Rng2DSeed::new(7)).unwrap();
    let t0 = std::time::Instant::now();
    let run = run_2d(&params, &grid, &ic, 1e-3, 20.0, &[]);
    let dt = t0.elapsed().as_secs_f64();
    let steps = run.diagnostics.steps;
    println!(
        "N={} steps={} in {:.2}s → {:.1} ns/cell-step; t=500 run ≈ {:.0}s; outcome {:?}",
        grid.n, steps, dt, dt / steps as f64 / (grid.n * grid.n) as f64 * 1e9,
        dt * 500.0 / 20.0, run.diagnostics.outcome
    );
}
