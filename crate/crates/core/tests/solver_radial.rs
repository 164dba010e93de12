//! Radial-solver checks: axis handling, volume-weighted conservation,
//! source/decay mass balance, bounded convergence for the two-phenotype
//! model, and the minimal-model blow-up control.

use chemotaxis_core::model::{ModelParams, ModelVariant, SwitchingCase, SwitchingSpec};
use chemotaxis_core::radial::{
    initial_condition_radial, radial_rhs, run_radial, RadialGrid, RadialOptions, RadialState,
};
use chemotaxis_core::rng::{Rng2DSeed, Xoshiro256StarStar};
use chemotaxis_core::stepper::TimeController;
use chemotaxis_core::RunOutcome;

fn case_a(chi: f64, mu: f64) -> ModelParams {
    ModelParams::new(
        1.0,
        chi,
        SwitchingSpec::new(SwitchingCase::A, mu, 1.0).unwrap(),
        ModelVariant::TwoPhenotype,
    )
    .unwrap()
}

fn minimal_ks(chi: f64) -> ModelParams {
    ModelParams::new(1.0, chi, SwitchingSpec::none(), ModelVariant::MinimalKS).unwrap()
}

#[test]
fn uniform_state_has_zero_rhs() {
    let grid = RadialGrid::new(10.0, 200).unwrap();
    let ic = initial_condition_radial(&grid, 0.5, 0.0).unwrap();
    let (d0, d1, ds) = radial_rhs(&case_a(8.0, 1.0), &grid, &ic);
    assert!(d0.iter().chain(&d1).chain(&ds).all(|&v| v == 0.0));
}

#[test]
fn volume_weighted_mass_is_conserved() {
    let grid = RadialGrid::new(5.0, 128).unwrap();
    let mut rng = Xoshiro256StarStar::from_seed(Rng2DSeed::new(8));
    let state = RadialState {
        n0: (0..128).map(|_| rng.next_f64() + 0.1).collect(),
        n1: (0..128).map(|_| rng.next_f64() + 0.1).collect(),
        s: (0..128).map(|_| rng.next_f64()).collect(),
        t: 0.0,
    };
    let (d0, d1, _) = radial_rhs(&case_a(8.0, 1.0), &grid, &state);
    let rate: f64 = (0..128).map(|i| (d0[i] + d1[i]) * grid.cell_volume(i)).sum();
    assert!(rate.abs() < 1e-10, "mass rate {rate}");
}

#[test]
fn attractant_mass_follows_production_minus_decay() {
    // freeze the cells and Euler-step s only: the flux divergence
    // telescopes, so dS/dt must equal ∫(n0 − s) dV exactly
    let grid = RadialGrid::new(10.0, 200).unwrap();
    let params = case_a(8.0, 1.0);
    let mut state = initial_condition_radial(&grid, 0.5, 0.1).unwrap();
    let dt = 1e-4;
    let integrate = |f: &[f64]| -> f64 {
        f.iter().enumerate().map(|(i, v)| v * grid.cell_volume(i)).sum()
    };
    for _ in 0..200 {
        let (_, _, ds) = radial_rhs(&params, &grid, &state);
        let s_mass = integrate(&state.s);
        let source: f64 = (0..grid.n_cells)
            .map(|i| (state.n0[i] - state.s[i]) * grid.cell_volume(i))
            .sum();
        let rate = integrate(&ds);
        assert!(
            (rate - source).abs() < 1e-12 * s_mass.max(1.0),
            "flux leak: dS/dt {rate} vs source {source}"
        );
        for i in 0..grid.n_cells {
            state.s[i] += dt * ds[i];
        }
    }

    // and the diffusion operator is refinement-consistent: the same
    // initial hump diffused on a dr/2 grid stays within 1%
    let fine_grid = RadialGrid::new(10.0, 400).unwrap();
    let mut fine = initial_condition_radial(&fine_grid, 0.5, 0.1).unwrap();
    let mut coarse = initial_condition_radial(&grid, 0.5, 0.1).unwrap();
    let t_target = 0.2;
    let mut t = 0.0;
    let dt_f = 2.5e-5;
    while t < t_target {
        let (_, _, ds) = radial_rhs(&params, &fine_grid, &fine);
        for i in 0..fine_grid.n_cells {
            fine.s[i] += dt_f * ds[i];
        }
        t += dt_f;
    }
    let mut t = 0.0;
    while t < t_target {
        let (_, _, ds) = radial_rhs(&params, &grid, &coarse);
        for i in 0..grid.n_cells {
            coarse.s[i] += dt * ds[i];
        }
        t += dt;
    }
    for i in 0..grid.n_cells {
        let avg = 0.5 * (fine.s[2 * i] + fine.s[2 * i + 1]);
        assert!((coarse.s[i] - avg).abs() < 0.01 * 0.6, "cell {i}");
    }
}

#[test]
fn two_phenotype_aggregate_is_bounded_and_sharpens_with_mu() {
    // coarse version of the boundedness scan: the chemotactic spike at
    // the axis grows tall (O(10)–O(10³) here) but stays far below the
    // blow-up threshold, and its height increases with μ
    let grid = RadialGrid::with_spacing(10.0, 0.1).unwrap();
    let mut ctrl = TimeController::new(1500.0, 500.0);
    ctrl.dt_max = 0.5;
    let opts = RadialOptions::default();
    let mut peaks = Vec::new();
    for mu in [0.1, 1.0] {
        let params = case_a(8.0, mu);
        let ic = initial_condition_radial(&grid, 0.5, 0.01).unwrap();
        let run = run_radial(&params, &grid, &ic, &ctrl, &opts);
        match run.diagnostics.outcome {
            RunOutcome::Converged { .. } | RunOutcome::Completed => {}
            other => panic!("unexpected outcome {other:?} for mu = {mu}"),
        }
        let last = run.snapshots.last().unwrap();
        // peak at the axis, decaying outward, bounded
        assert!(last.n1[0] > last.n1[grid.n_cells - 1]);
        assert!(last.n1.iter().all(|&v| v.is_finite() && v < opts.blowup_factor));
        assert!(run.diagnostics.mass_drift < 1e-8, "drift {}", run.diagnostics.mass_drift);
        peaks.push(last.n1[0]);
    }
    assert!(peaks[1] > peaks[0], "peaks {peaks:?} not increasing in mu");
}

#[test]
fn minimal_model_control_blows_up() {
    let grid = RadialGrid::with_spacing(10.0, 0.05).unwrap();
    let ctrl = TimeController::new(100.0, 25.0);
    let opts = RadialOptions { blowup_factor: 1e4, ..RadialOptions::default() };
    let params = minimal_ks(8.0);
    let ic = initial_condition_radial(&grid, 1.0, 0.01).unwrap();
    let run = run_radial(&params, &grid, &ic, &ctrl, &opts);
    let t_blow = run
        .diagnostics
        .outcome
        .blowup_time()
        .expect("supercritical minimal model must raise the blow-up flag");
    assert!(t_blow > 0.0 && t_blow < 100.0);
    // density really did run away
    let peak = run
        .diagnostics
        .max_density_series
        .iter()
        .map(|&(_, m)| m)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(peak > 1e3);
}
