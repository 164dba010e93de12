use chemotaxis_core::analysis::{count_peaks, detect_oscillation, detect_extinction, AnalysisThresholds};
use chemotaxis_core::grid1d::{initial_condition_1d, integrate_1d, Grid1D};
use chemotaxis_core::model::{ModelParams, ModelVariant, SwitchingCase, SwitchingSpec};
use chemotaxis_core::stepper::TimeController;

fn run_case(case: SwitchingCase, chi: f64, q: f64, amplitude: f64) {
    let params = ModelParams::new(
        1.0, chi,
        SwitchingSpec::new(case, 1.0, q).unwrap(),
        ModelVariant::TwoPhenotype,
    ).unwrap();
    let grid = Grid1D::with_spacing(40.0, 0.1).unwrap();
    let ic = initial_condition_1d(&grid, 0.5, amplitude, 100.0).unwrap();
    let ctrl = TimeController::new(500.0, 25.0);
    let t0 = std::time::Instant::now();
    let run = integrate_1d(&params, &grid, &ic, &ctrl);
    let th = AnalysisThresholds::default();
    let last = run.snapshots.last().unwrap();
    let census = count_peaks(&last.n1, grid.dx, th.peak_ratio, th.peak_merge_cells);
    let spread = last.n1.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - last.n1.iter().cloned().fold(f64::INFINITY, f64::min);
    let counts: Vec<usize> = run.snapshots.iter().filter(|s| s.t >= 99.9)
        .map(|s| count_peaks(&s.n1, grid.dx, th.peak_ratio, th.peak_merge_cells).count)
        .collect();
    let times: Vec<f64> = run.probe.iter().map(|p| p.t).collect();
    let vals: Vec<f64> = run.probe.iter().map(|p| p.n1).collect();
    let osc = detect_oscillation(&times, &vals, 400.0, 500.0, &th);
    let mean_n0: f64 = last.n0.iter().sum::<f64>() / last.n0.len() as f64;
    println!(
        "{case:?} chi={chi} q={q} amp={amplitude}: outcome {:?}, spread {:.3e}, peaks {} (h_max {:.2}), counts@t>=100 {:?}, osc {:?}, mean_n0 {:.3e}, ext {:?}, drift {:.1e}, {:.1}s",
        run.diagnostics.outcome, spread, census.count,
        census.heights.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        counts, osc.map(|o| o.map(|o| (o.period, o.amplitude))),
        mean_n0, detect_extinction(last, th.extinction_threshold),
        run.diagnostics.mass_drift,
        t0.elapsed().as_secs_f64()
    );
}

fn main() {
    run_case(SwitchingCase::A, 10.0, 1.0, 0.01);
    run_case(SwitchingCase::B1, 15.0, 1.0, 0.01);
    run_case(SwitchingCase::B2, 5.0, 1.0, 0.01);
    run_case(SwitchingCase::C1, 10.0, 1.0, 0.01);
    run_case(SwitchingCase::C2, 10.0, 1.0, 0.01);
    run_case(SwitchingCase::B1, 15.0, 30.0, 0.01);   // oscillation regime
    run_case(SwitchingCase::C2, 10.0, 30.0, -0.01);  // extinction regime
    run_case(SwitchingCase::C1, 75.0, 30.0, 0.01);   // both persist
}
