//! Acceptance suite: every release-gating behaviour, one test per
//! criterion, each ending with an explicit PASS line.
//!
//! 1.  χ-threshold table against the closed forms.
//! 2.  Analytic vs finite-difference kinetic Jacobian.
//! 3.  Linear growth of seeded modes vs the dispersion cubic.
//! 4.  No-switching null result (no patterns at any χ).
//! 5.  1D regime reproduction across the five switching families.
//! 6.  Oscillating patterns for density-triggered step switching.
//! 7.  Phenotype extinction for attractant-triggered step switching.
//! 8.  2D aggregate-density control (low-density case ≥ 10× below
//!     constant switching).
//! 9.  Radial boundedness with the minimal-model blow-up control
//!     (coarse pre-check by default; the fine-resolution variant is
//!     `#[ignore]`d — hours of runtime — run with `--ignored`).
//! 10. Conservation and byte-level determinism.

use chemotaxis_cli::config::parse_config;
use chemotaxis_cli::runner::run_experiment;
use chemotaxis_core::analysis::{
    count_peaks, count_peaks_2d, detect_oscillation, detect_extinction, AnalysisThresholds,
    Phenotype,
};
use chemotaxis_core::grid1d::{initial_condition_1d, integrate_1d, Grid1D};
use chemotaxis_core::grid2d::{initial_condition_2d, run_2d, Grid2D};
use chemotaxis_core::radial::{initial_condition_radial, run_radial, RadialGrid, RadialOptions};
use chemotaxis_core::rng::{Rng2DSeed, Xoshiro256StarStar};
use chemotaxis_core::stability;
use chemotaxis_core::stepper::TimeController;
use chemotaxis_core::{
    ModelParams, ModelVariant, RunArtifacts, RunOutcome, SwitchingCase, SwitchingSpec,
};
use std::fs;
use std::path::PathBuf;

const ALL_CASES: [SwitchingCase; 5] = [
    SwitchingCase::A,
    SwitchingCase::B1,
    SwitchingCase::B2,
    SwitchingCase::C1,
    SwitchingCase::C2,
];

fn params(case: SwitchingCase, mu: f64, q: f64, d: f64, chi: f64) -> ModelParams {
    ModelParams::new(
        d,
        chi,
        SwitchingSpec::new(case, mu, q).unwrap(),
        ModelVariant::TwoPhenotype,
    )
    .unwrap()
}

fn tmp_out(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chemotaxis_accept_{tag}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn assert_conserved(run: &RunArtifacts, label: &str) {
    assert!(
        run.diagnostics.mass_drift < 1e-8,
        "{label}: mass drift {} breaches 1e-8",
        run.diagnostics.mass_drift
    );
}

#[test]
fn acceptance_01_threshold_table() {
    // closed forms at μ = 1, q = 1, D = 1, n̄ = ½: {4, 8, 8/3, 6, 2}
    let expected = [4.0, 8.0, 8.0 / 3.0, 6.0, 2.0];
    for (case, want) in ALL_CASES.into_iter().zip(expected) {
        let spec = SwitchingSpec::new(case, 1.0, 1.0).unwrap();
        let (thr, _) = stability::chi_threshold(&spec, 1.0);
        let got = thr.unwrap_or_else(|| panic!("{case:?} must have a finite threshold"));
        let rel = ((got - want) / want).abs();
        assert!(rel < 1e-10, "{case:?}: threshold {got} vs {want} (rel {rel})");
    }
    println!("ACCEPTANCE 1 PASS: chi thresholds equal the closed forms to 1e-10");
}

#[test]
fn acceptance_02_h_value_cross_check() {
    // finite-difference Jacobian of G vs the closed forms, 50 random
    // (μ, q) per case
    let mut rng = Xoshiro256StarStar::from_seed(Rng2DSeed::new(2));
    for case in ALL_CASES {
        for _ in 0..50 {
            let mu = 0.01 + 9.99 * rng.next_f64();
            let q = 0.5 + 29.5 * rng.next_f64();
            let spec = SwitchingSpec::new(case, mu, q).unwrap();
            let analytic = stability::h_values_analytic(&spec);
            let numeric = stability::h_values_numeric(&spec, 1e-6).unwrap();
            for (name, a, n) in [
                ("H0", analytic.h0, numeric.h0),
                ("H1", analytic.h1, numeric.h1),
                ("Hs", analytic.hs, numeric.hs),
            ] {
                let scale = a.abs().max(1e-3);
                assert!(
                    ((a - n) / scale).abs() < 1e-5,
                    "{case:?} μ={mu} q={q} {name}: analytic {a} vs numeric {n}"
                );
            }
        }
    }
    println!("ACCEPTANCE 2 PASS: H values agree to 1e-5 over 5 cases x 50 random (mu, q)");
}

// ---------------------------------------------------------------------
// criterion 3: seeded single-mode growth vs the dispersion relation
// ---------------------------------------------------------------------

/// Fit the exponential growth of one seeded cosine mode against the
/// dominant dispersion eigenvalue.
///
/// The fit lives in the amplitude window [1e-5, 1e-3] but is also
/// capped at t = 200: beyond that, modes born from f64 rounding
/// (amplitude ~1e-16) amplified at the fastest rate (λ ≈ 0.12) start
/// to couple nonlinearly and the slowest modes' coefficients no longer
/// grow at their own linear rate. Slow modes are therefore seeded at
/// the window floor so the capped fit still spans enough decades.
fn fitted_growth_rate(m: u32) -> (f64, f64) {
    const T_SAFE: f64 = 200.0;
    let p = params(SwitchingCase::A, 1.0, 1.0, 1.0, 10.0);
    let grid = Grid1D::with_spacing(40.0, 0.1).unwrap();
    let n = grid.n_cells;
    let k = m as f64 * std::f64::consts::PI / grid.l;

    let h = stability::h_values_analytic(&p.switching);
    let lambda = stability::dispersion_point(&p, &h, grid.l, m).max_re();
    assert!(lambda > 0.0, "mode {m} is not unstable");

    let eps = if (1e3f64).ln() / lambda <= 0.9 * T_SAFE { 1e-6 } else { 1e-5 };
    let mut ic = initial_condition_1d(&grid, 0.5, 0.0, 1e4).unwrap();
    for i in 0..n {
        ic.n1[i] += eps * (k * grid.center(i)).cos();
    }

    let t_end = ((1e-3f64 / eps).ln() / lambda * 1.15).min(T_SAFE);
    let mut ctrl = TimeController::new(t_end, (0.8 / lambda).clamp(0.5, 10.0));
    ctrl.rel_tol = 1e-8;
    let run = integrate_1d(&p, &grid, &ic, &ctrl);
    assert_eq!(run.diagnostics.outcome, RunOutcome::Completed);
    assert_conserved(&run, "mode growth run");

    let coeff = |n1: &[f64]| {
        let mean = n1.iter().sum::<f64>() / n as f64;
        2.0 / n as f64
            * n1.iter()
                .enumerate()
                .map(|(i, v)| (v - mean) * (k * grid.center(i)).cos())
                .sum::<f64>()
    };
    let pts: Vec<(f64, f64)> = run
        .snapshots
        .iter()
        .filter(|s| s.t <= T_SAFE)
        .map(|s| (s.t, coeff(&s.n1)))
        .filter(|&(_, a)| (1e-5..=1e-3).contains(&a))
        .map(|(t, a)| (t, a.ln()))
        .collect();
    assert!(pts.len() >= 4, "mode {m}: only {} samples in the linear window", pts.len());
    let nf = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let slope = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mt).powi(2)).sum::<f64>();
    (slope, lambda)
}

fn check_modes(modes: &[u32]) {
    let p = params(SwitchingCase::A, 1.0, 1.0, 1.0, 10.0);
    let h = stability::h_values_analytic(&p.switching);
    let unstable = stability::unstable_mode_set(&p, &h, 40.0);
    assert_eq!(unstable, (1..=11).collect::<Vec<u32>>());
    for &m in modes {
        let (fitted, predicted) = fitted_growth_rate(m);
        let rel = ((fitted - predicted) / predicted).abs();
        assert!(
            rel < 0.10,
            "mode {m}: fitted {fitted} vs dispersion {predicted} (rel {rel})"
        );
        println!("  mode {m}: fitted {fitted:.5} vs dispersion {predicted:.5}");
    }
}

#[test]
fn acceptance_03a_dispersion_vs_simulation_modes_1_to_4() {
    check_modes(&[1, 2, 3, 4]);
    println!("ACCEPTANCE 3a PASS: modes 1-4 grow at the cubic's rate within 10%");
}

#[test]
fn acceptance_03b_dispersion_vs_simulation_modes_5_to_8() {
    check_modes(&[5, 6, 7, 8]);
    println!("ACCEPTANCE 3b PASS: modes 5-8 grow at the cubic's rate within 10%");
}

#[test]
fn acceptance_03c_dispersion_vs_simulation_modes_9_to_11() {
    check_modes(&[9, 10, 11]);
    println!("ACCEPTANCE 3c PASS: modes 9-11 grow at the cubic's rate within 10%");
}

#[test]
fn acceptance_04_no_switching_null_result() {
    for chi in [5.0, 10.0, 20.0] {
        let p = ModelParams::new(1.0, chi, SwitchingSpec::none(), ModelVariant::TwoPhenotype)
            .unwrap();
        let grid = Grid1D::new(40.0, 401).unwrap();
        let ic = initial_condition_1d(&grid, 0.5, 0.01, 100.0).unwrap();
        let ctrl = TimeController::new(200.0, 50.0);
        let run = integrate_1d(&p, &grid, &ic, &ctrl);
        assert_eq!(run.diagnostics.outcome, RunOutcome::Completed);
        assert_conserved(&run, "no-switching run");
        let last = run.snapshots.last().unwrap();
        let spread = last.n1.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - last.n1.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-4, "chi = {chi}: n1 spread {spread} at t = 200");
    }
    println!("ACCEPTANCE 4 PASS: no patterns without switching for chi in {{5, 10, 20}}");
}

#[test]
fn acceptance_05_1d_regime_reproduction() {
    // the five switching families at their reference χ values, run
    // through the experiment surface as one zipped sweep
    let out = tmp_out("fig2");
    let cfg = parse_config(
        "mode = sweep\nrun_id = fig2\nsweep.sim = sim1d\n\
         sweep.cases = a,b1,b2,c1,c2\nsweep.chi = 10,15,5,10,10\n\
         mu = 1\nq = 1\na_focus = 100\ntime.snapshot_every = 25\nsweep.workers = 1\n",
        None,
    )
    .unwrap();
    let result = run_experiment(&cfg, &out).unwrap();
    assert_eq!(result.children.len(), 5);
    for child in &result.children {
        let summary = child.summary.as_ref().unwrap();
        assert!(summary.pattern_formed, "{}: no pattern formed", child.run_id);
        assert!(summary.peak_count >= 1, "{}: no peaks", child.run_id);
        assert!(summary.blowup.is_none());
        assert!(summary.mass_drift < 1e-8, "{}: drift {}", child.run_id, summary.mass_drift);
    }

    // case A merging: peak count ≥ 2 and non-increasing for t > 100
    let p = params(SwitchingCase::A, 1.0, 1.0, 1.0, 10.0);
    let grid = Grid1D::with_spacing(40.0, 0.1).unwrap();
    let ic = initial_condition_1d(&grid, 0.5, 0.01, 100.0).unwrap();
    let run = integrate_1d(&p, &grid, &ic, &TimeController::new(500.0, 25.0));
    assert_conserved(&run, "case A reference run");
    let th = AnalysisThresholds::default();
    let counts: Vec<usize> = run
        .snapshots
        .iter()
        .filter(|s| s.t >= 100.0 - 1e-6)
        .map(|s| count_peaks(&s.n1, grid.dx, th.peak_ratio, th.peak_merge_cells).count)
        .collect();
    assert!(counts[0] >= 2, "case A: {} peaks at t = 100", counts[0]);
    for w in counts.windows(2) {
        assert!(w[1] <= w[0], "case A peak count increased: {counts:?}");
    }
    let _ = fs::remove_dir_all(&out);
    println!("ACCEPTANCE 5 PASS: all five families form patterns by t = 500; case A counts {counts:?}");
}

#[test]
fn acceptance_06_oscillation_regime() {
    // B₁ with step-like switching: sustained oscillations at the probe
    let p = params(SwitchingCase::B1, 1.0, 30.0, 1.0, 15.0);
    let grid = Grid1D::new(40.0, 401).unwrap();
    let ic = initial_condition_1d(&grid, 0.5, 0.01, 100.0).unwrap();
    let run = integrate_1d(&p, &grid, &ic, &TimeController::new(500.0, 25.0));
    assert_eq!(run.diagnostics.outcome, RunOutcome::Completed);
    assert_conserved(&run, "oscillation run");
    let times: Vec<f64> = run.probe.iter().map(|s| s.t).collect();
    let values: Vec<f64> = run.probe.iter().map(|s| s.n1).collect();
    let osc = detect_oscillation(&times, &values, 400.0, 500.0, &AnalysisThresholds::default())
        .unwrap()
        .expect("oscillation must be detected on t in [400, 500]");

    // and the eigenvalue map agrees: growing rotating mode at (χ, μ) = (15, 1)
    let map = stability::eigenvalue_map(
        SwitchingCase::B1,
        30.0,
        0.5,
        1.0,
        (15.0, 15.0),
        (1.0, 1.0),
        40.0,
        1,
        1,
        false,
    );
    assert!(map[0].max_re > 0.0, "max Re lambda = {}", map[0].max_re);
    assert!(map[0].max_abs_im > 0.0, "max |Im lambda| = {}", map[0].max_abs_im);
    println!(
        "ACCEPTANCE 6 PASS: oscillation detected (period {:.2}, amplitude {:.3}); map point has Re>0, |Im|>0",
        osc.period, osc.amplitude
    );
}

#[test]
fn acceptance_07_extinction_regime() {
    // C₂ with step-like switching: the secreting phenotype dies out;
    // the run seeds the attractant-poor basin (amplitude −0.01), the
    // one the reported extinction trajectory lives in
    let p = params(SwitchingCase::C2, 1.0, 30.0, 1.0, 10.0);
    let h = stability::h_values_analytic(&p.switching);
    assert!(!stability::homogeneous_stability(&h), "C2 q=30 must be homogeneously unstable");
    assert_eq!(h.margin(), 1.0 - 15.0);

    let grid = Grid1D::new(40.0, 401).unwrap();
    let ic = initial_condition_1d(&grid, 0.5, -0.01, 100.0).unwrap();
    let run = integrate_1d(&p, &grid, &ic, &TimeController::new(500.0, 5.0));
    assert_eq!(run.diagnostics.outcome, RunOutcome::Completed);
    assert_conserved(&run, "extinction run");

    let mean_n0 = |s: &chemotaxis_core::Snapshot| s.n0.iter().sum::<f64>() / s.n0.len() as f64;
    let last = run.snapshots.last().unwrap();
    assert!(mean_n0(last) < 1e-2, "mean n0 {} at t = 500", mean_n0(last));
    assert_eq!(
        detect_extinction(last, 1e-2),
        Some(Phenotype::Secreting),
        "secreting phenotype must be extinct"
    );
    // monotone decline down to the solver's own noise floor (abs_tol =
    // 1e-9, the positivity-clipping scale), below which the mean is
    // indistinguishable from zero and only required to stay there
    let means: Vec<(f64, f64)> = run
        .snapshots
        .iter()
        .filter(|s| s.t >= 10.0 - 1e-6)
        .map(|s| (s.t, mean_n0(s)))
        .collect();
    const FLOOR: f64 = 1e-9;
    for w in means.windows(2) {
        if w[0].1 < FLOOR {
            assert!(w[1].1 < FLOOR, "mean n0 re-grew from the floor: {:?} -> {:?}", w[0], w[1]);
        } else {
            assert!(
                w[1].1 <= w[0].1 * (1.0 + 1e-9),
                "mean n0 not monotone after t = 10: {:?} -> {:?}",
                w[0],
                w[1]
            );
        }
    }
    println!("ACCEPTANCE 7 PASS: secreting phenotype extinct (mean n0 {:.2e}), decline monotone after t = 10", mean_n0(last));
}

#[test]
fn acceptance_08_aggregate_density_control_2d() {
    // same grid, same seed, t = 500 at N = 80, τ = 1e-3: density-capped
    // switching (B₂, χ=5) stays ≥ 10× below constant switching (A, χ=10)
    let grid = Grid2D::with_spacing(40.0, 0.5).unwrap();
    assert_eq!(grid.n, 80);
    let seed = Rng2DSeed::new(7);
    let tau = 1e-3;
    let snapshot_times = [250.0, 500.0];

    let ic = initial_condition_2d(&grid, 0.5, 0.01, seed).unwrap();
    let run_a = run_2d(
        &params(SwitchingCase::A, 1.0, 1.0, 1.0, 10.0),
        &grid,
        &ic,
        tau,
        500.0,
        &snapshot_times,
    );
    assert_eq!(run_a.diagnostics.outcome, RunOutcome::Completed);
    assert_conserved(&run_a, "2D case A");

    let run_b2 = run_2d(
        &params(SwitchingCase::B2, 1.0, 1.0, 1.0, 5.0),
        &grid,
        &ic,
        tau,
        500.0,
        &snapshot_times,
    );
    assert_eq!(run_b2.diagnostics.outcome, RunOutcome::Completed);
    assert_conserved(&run_b2, "2D case B2");

    let peak = |run: &RunArtifacts| {
        run.snapshots
            .last()
            .unwrap()
            .n1
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let peak_a = peak(&run_a);
    let peak_b2 = peak(&run_b2);
    assert!(
        peak_a >= 10.0 * peak_b2,
        "peak n1: case A {peak_a} vs case B2 {peak_b2} (ratio {})",
        peak_a / peak_b2
    );

    // spot pattern for case A: several maxima, well above baseline
    let census = count_peaks_2d(&run_a.snapshots.last().unwrap().n1, grid.n, 1.05);
    assert!(census.count >= 3, "case A spots: {}", census.count);
    assert!(peak_a > 5.0 * 0.5, "case A peak {peak_a} not above 5x baseline");
    println!(
        "ACCEPTANCE 8 PASS: 2D peak n1 {peak_a:.1} (A) vs {peak_b2:.2} (B2), ratio {:.1}, {} spots",
        peak_a / peak_b2,
        census.count
    );
}

// ---------------------------------------------------------------------
// criterion 9: radial boundedness with a blow-up positive control
// ---------------------------------------------------------------------

struct RadialResult {
    peak: f64,
    outcome: RunOutcome,
    window_change: Option<f64>,
}

fn radial_case_a(mu: f64, dr: f64, opts: &RadialOptions, rel_tol: f64) -> RadialResult {
    let p = params(SwitchingCase::A, mu, 1.0, 1.0, 8.0);
    let grid = RadialGrid::with_spacing(10.0, dr).unwrap();
    let ic = initial_condition_radial(&grid, 0.5, 0.01).unwrap();
    let mut ctrl = TimeController::new(1e4, 2500.0);
    ctrl.rel_tol = rel_tol;
    ctrl.dt_max = 0.5;
    let run = run_radial(&p, &grid, &ic, &ctrl, opts);
    assert_conserved(&run, &format!("radial mu={mu}"));
    let last = run.snapshots.last().unwrap();
    // bounded smooth peak at the axis
    assert!(last.n1.iter().all(|v| v.is_finite()));
    assert!(last.n1[0] > last.n1[grid.n_cells - 1]);
    RadialResult {
        peak: last.n1[0],
        outcome: run.diagnostics.outcome,
        window_change: run.diagnostics.final_window_change,
    }
}

#[test]
fn acceptance_09_radial_boundedness_coarse() {
    // coarse pre-check at dr = 2e-2: stationarity is required at 1e-3
    // in the trailing window (the 1e-6 detector belongs to the fine
    // run, where discretization error does not dominate), and the
    // blow-up threshold is 1e4x uniform because a coarse grid caps the
    // collapsed minimal-model spike near total-mass/(π dr²) ≈ 2.5e5
    let opts = RadialOptions {
        blowup_factor: 1e4,
        convergence_tol: 1e-3,
        ..RadialOptions::default()
    };
    let mut peaks = Vec::new();
    for mu in [0.1, 1.0, 10.0] {
        let result = radial_case_a(mu, 2e-2, &opts, 1e-5);
        match result.outcome {
            RunOutcome::Converged { t } => {
                println!("  mu = {mu}: converged at t = {t:.0}, peak {:.3e}", result.peak)
            }
            RunOutcome::Completed => {
                let change = result.window_change.unwrap_or(f64::INFINITY);
                assert!(
                    change < 1e-3,
                    "mu = {mu}: horizon reached with trailing change {change}"
                );
                println!("  mu = {mu}: stationary at horizon (change {change:.2e}), peak {:.3e}", result.peak)
            }
            other => panic!("mu = {mu}: unexpected outcome {other:?}"),
        }
        assert!(result.peak < 1e4, "mu = {mu}: peak {} at the blow-up scale", result.peak);
        peaks.push(result.peak);
    }
    assert!(
        peaks[0] < peaks[1] && peaks[1] < peaks[2],
        "peaks not increasing in mu: {peaks:?}"
    );
    println!("ACCEPTANCE 9 PASS (coarse): bounded stationary peaks {peaks:?} increase with mu");
}

#[test]
fn acceptance_09_minimal_ks_control_blows_up() {
    let p = ModelParams::new(1.0, 8.0, SwitchingSpec::none(), ModelVariant::MinimalKS).unwrap();
    let grid = RadialGrid::with_spacing(10.0, 2e-2).unwrap();
    let ic = initial_condition_radial(&grid, 1.0, 0.01).unwrap();
    let mut ctrl = TimeController::new(1e4, 2500.0);
    ctrl.rel_tol = 1e-5;
    ctrl.dt_max = 0.5;
    let opts = RadialOptions { blowup_factor: 1e4, ..RadialOptions::default() };
    let run = run_radial(&p, &grid, &ic, &ctrl, &opts);
    let t_blow = run
        .diagnostics
        .outcome
        .blowup_time()
        .expect("supercritical minimal model must raise the blow-up flag");
    assert!(t_blow.is_finite() && t_blow > 0.0);
    println!("ACCEPTANCE 9 PASS (control): minimal model blow-up flag at t = {t_blow:.2}");
}

/// Fine-resolution variant of criterion 9 (dr = 5e-3, defaults, t up to
/// 1e4). Hours of single-core runtime; run with `cargo test -p
/// chemotaxis-cli --test acceptance -- --ignored`.
#[test]
#[ignore = "hours-budget fine-resolution radial scan (dr = 5e-3); run with --ignored"]
fn acceptance_09_radial_boundedness_full_resolution() {
    let opts = RadialOptions::default();
    let mut peaks = Vec::new();
    for mu in [0.1, 1.0, 10.0] {
        let result = radial_case_a(mu, 5e-3, &opts, 1e-6);
        match result.outcome {
            RunOutcome::Converged { t } => {
                println!("  mu = {mu}: converged at t = {t:.0}, peak {:.3e}", result.peak)
            }
            RunOutcome::Completed => {
                let change = result.window_change.unwrap_or(f64::INFINITY);
                assert!(
                    change < 1e-6,
                    "mu = {mu}: horizon reached with trailing change {change}"
                );
            }
            other => panic!("mu = {mu}: unexpected outcome {other:?}"),
        }
        assert!(result.peak.is_finite());
        peaks.push(result.peak);
    }
    assert!(peaks[0] < peaks[1] && peaks[1] < peaks[2]);

    let p = ModelParams::new(1.0, 8.0, SwitchingSpec::none(), ModelVariant::MinimalKS).unwrap();
    let grid = RadialGrid::with_spacing(10.0, 5e-3).unwrap();
    let ic = initial_condition_radial(&grid, 1.0, 0.01).unwrap();
    let mut ctrl = TimeController::new(1e4, 2500.0);
    ctrl.dt_max = 0.5;
    let run = run_radial(&p, &grid, &ic, &ctrl, &RadialOptions::default());
    assert!(run.diagnostics.outcome.blowup_time().is_some());
    println!("ACCEPTANCE 9 PASS (full): bounded increasing peaks {peaks:?}; control blew up");
}

#[test]
fn acceptance_10_conservation_and_determinism() {
    // byte-identical outputs for identical seeds, through the full
    // experiment surface
    let text = "mode = sim2d\nrun_id = det\ncase = b2\nchi = 5\nseed = 99\n\
                grid.l = 8\ngrid.n = 16\ntime.t_end = 1\ntime.snapshot_every = 0.5\n";
    let cfg = parse_config(text, None).unwrap();
    let out_a = tmp_out("det_a");
    let out_b = tmp_out("det_b");
    run_experiment(&cfg, &out_a).unwrap();
    run_experiment(&cfg, &out_b).unwrap();
    let mut names: Vec<String> = fs::read_dir(out_a.join("det"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in &names {
        let a = fs::read(out_a.join("det").join(name)).unwrap();
        let b = fs::read(out_b.join("det").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical seeded runs");
    }
    let _ = fs::remove_dir_all(&out_a);
    let _ = fs::remove_dir_all(&out_b);

    // conservation asserted on the spot for all three geometries
    let p1 = params(SwitchingCase::A, 1.0, 1.0, 1.0, 10.0);
    let grid = Grid1D::new(40.0, 400).unwrap();
    let ic = initial_condition_1d(&grid, 0.5, 0.01, 100.0).unwrap();
    let run = integrate_1d(&p1, &grid, &ic, &TimeController::new(50.0, 10.0));
    assert_conserved(&run, "1D");

    let g2 = Grid2D::new(8.0, 16).unwrap();
    let ic2 = initial_condition_2d(&g2, 0.5, 0.01, Rng2DSeed::new(4)).unwrap();
    let run2 = run_2d(&p1, &g2, &ic2, 1e-3, 5.0, &[]);
    assert_conserved(&run2, "2D");

    let gr = RadialGrid::with_spacing(10.0, 0.1).unwrap();
    let icr = initial_condition_radial(&gr, 0.5, 0.01).unwrap();
    let runr = run_radial(
        &params(SwitchingCase::A, 1.0, 1.0, 1.0, 8.0),
        &gr,
        &icr,
        &TimeController::new(100.0, 25.0),
        &RadialOptions::default(),
    );
    assert_conserved(&runr, "radial");
    println!("ACCEPTANCE 10 PASS: identical seeds give byte-identical files; drift < 1e-8 everywhere");
}
