//! Experiment orchestration: dispatch a validated config to the right
//! solver or analysis, write the run artifacts, and fan sweeps out over
//! worker threads.

use crate::config::{
    controller, model_params, radial_options, thresholds, ExperimentConfig, Mode,
};
use crate::output::{
    eigenmap_csv, field_pgm, metadata_text, probe_csv, snapshot_2d_csv, snapshots_csv,
    stability_report_text, RunWriter,
};
use chemotaxis_core::analysis::{summarize, PatternSummary};
use chemotaxis_core::grid1d::{initial_condition_1d, integrate_1d, Grid1D};
use chemotaxis_core::grid2d::{initial_condition_2d, run_2d, Grid2D};
use chemotaxis_core::radial::{initial_condition_radial, run_radial, RadialGrid};
use chemotaxis_core::rng::Rng2DSeed;
use chemotaxis_core::stability::{eigenvalue_map, stability_report};
use chemotaxis_core::{RunArtifacts, RunOutcome};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("grid: {0}")]
    Grid(String),
    #[error("initial condition: {0}")]
    InitialCondition(String),
    #[error("stability analysis: {0}")]
    Stability(String),
}

/// What one experiment produced.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub run_id: String,
    pub dir: PathBuf,
    pub summary: Option<PatternSummary>,
    pub outcome: Option<RunOutcome>,
    /// Sub-run outputs for sweep mode, in declaration order.
    pub children: Vec<ExperimentOutput>,
}

impl ExperimentOutput {
    /// True when this run or any sweep child aborted numerically.
    pub fn aborted(&self) -> bool {
        self.outcome.map_or(false, |o| o.is_abort())
            || self.children.iter().any(|c| c.aborted())
    }
}

/// Run one experiment into `out_root/<run_id>/`.
pub fn run_experiment(cfg: &ExperimentConfig, out_root: &Path) -> Result<ExperimentOutput, RunnerError> {
    let dir = out_root.join(&cfg.run_id);
    match cfg.mode {
        Mode::Sim1D => sim_1d(cfg, &dir),
        Mode::Sim2D => sim_2d(cfg, &dir),
        Mode::Radial => sim_radial(cfg, &dir),
        Mode::Stability => stability_mode(cfg, &dir),
        Mode::EigenMap => eigenmap_mode(cfg, &dir),
        Mode::Sweep => sweep_mode(cfg, &dir),
    }
}

fn write_line_run(
    cfg: &ExperimentConfig,
    dir: &Path,
    run: &RunArtifacts,
    radial: bool,
) -> Result<ExperimentOutput, RunnerError> {
    let mut writer = RunWriter::create(dir)?;
    let summary = summarize(run, &thresholds(cfg));
    writer.write(&format!("{}_snapshots.csv", cfg.run_id), &snapshots_csv(run, radial))?;
    writer.write(&format!("{}_probe.csv", cfg.run_id), &probe_csv(run))?;
    writer.write(
        &format!("{}_meta.txt", cfg.run_id),
        &metadata_text(cfg, Some(run), Some(&summary)),
    )?;
    writer.finish_manifest(&cfg.run_id)?;
    Ok(ExperimentOutput {
        run_id: cfg.run_id.clone(),
        dir: dir.to_path_buf(),
        summary: Some(summary),
        outcome: Some(run.diagnostics.outcome),
        children: Vec::new(),
    })
}

fn sim_1d(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutput, RunnerError> {
    let params = model_params(cfg);
    let grid = Grid1D::new(cfg.grid.l, cfg.grid.n).map_err(|e| RunnerError::Grid(e.to_string()))?;
    let ic = initial_condition_1d(&grid, cfg.ic.nbar, cfg.ic.amplitude, cfg.ic.a_focus)
        .map_err(|e| RunnerError::InitialCondition(e.to_string()))?;
    let run = integrate_1d(&params, &grid, &ic, &controller(cfg));
    write_line_run(cfg, dir, &run, false)
}

fn sim_radial(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutput, RunnerError> {
    let params = model_params(cfg);
    let grid = RadialGrid::new(cfg.grid.l, cfg.grid.n_radial)
        .map_err(|e| RunnerError::Grid(e.to_string()))?;
    let ic = initial_condition_radial(&grid, cfg.ic.nbar, cfg.ic.amplitude)
        .map_err(|e| RunnerError::InitialCondition(e.to_string()))?;
    let run = run_radial(&params, &grid, &ic, &controller(cfg), &radial_options(cfg));
    write_line_run(cfg, dir, &run, true)
}

fn sim_2d(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutput, RunnerError> {
    let params = model_params(cfg);
    let grid = Grid2D::new(cfg.grid.l, cfg.grid.n).map_err(|e| RunnerError::Grid(e.to_string()))?;
    let seed = Rng2DSeed::new(cfg.ic.seed.expect("validated: 2D runs carry a seed"));
    let ic = initial_condition_2d(&grid, cfg.ic.nbar, cfg.ic.amplitude, seed)
        .map_err(|e| RunnerError::InitialCondition(e.to_string()))?;
    let snapshot_times: Vec<f64> = match &cfg.time.snapshot_times {
        Some(times) => times.clone(),
        None => {
            let mut times = Vec::new();
            let mut t = cfg.time.snapshot_every;
            while t < cfg.time.t_end - 1e-9 {
                times.push(t);
                t += cfg.time.snapshot_every;
            }
            times
        }
    };
    let run = run_2d(&params, &grid, &ic, cfg.time.tau, cfg.time.t_end, &snapshot_times);

    let mut writer = RunWriter::create(dir)?;
    let summary = summarize(&run, &thresholds(cfg));
    for (k, snap) in run.snapshots.iter().enumerate() {
        writer.write(&format!("{}_snap{k}.csv", cfg.run_id), &snapshot_2d_csv(&run, k))?;
        for (field, name) in [(&snap.n0, "n0"), (&snap.n1, "n1"), (&snap.s, "s")] {
            writer.write(
                &format!("{}_snap{k}_{name}.pgm", cfg.run_id),
                &field_pgm(field, grid.n),
            )?;
        }
    }
    writer.write(&format!("{}_probe.csv", cfg.run_id), &probe_csv(&run))?;
    writer.write(
        &format!("{}_meta.txt", cfg.run_id),
        &metadata_text(cfg, Some(&run), Some(&summary)),
    )?;
    writer.finish_manifest(&cfg.run_id)?;
    Ok(ExperimentOutput {
        run_id: cfg.run_id.clone(),
        dir: dir.to_path_buf(),
        summary: Some(summary),
        outcome: Some(run.diagnostics.outcome),
        children: Vec::new(),
    })
}

fn stability_mode(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutput, RunnerError> {
    let params = model_params(cfg);
    let report = stability_report(&params, cfg.stability.l, cfg.stability.n0_mean)
        .map_err(|e| RunnerError::Stability(e.to_string()))?;
    let mut writer = RunWriter::create(dir)?;
    writer.write(
        &format!("{}_stability.txt", cfg.run_id),
        &stability_report_text(cfg, &report),
    )?;
    writer.write(&format!("{}_meta.txt", cfg.run_id), &metadata_text(cfg, None, None))?;
    writer.finish_manifest(&cfg.run_id)?;
    Ok(ExperimentOutput {
        run_id: cfg.run_id.clone(),
        dir: dir.to_path_buf(),
        summary: None,
        outcome: None,
        children: Vec::new(),
    })
}

fn eigenmap_mode(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutput, RunnerError> {
    let em = &cfg.eigenmap;
    let points = eigenvalue_map(
        cfg.model.case,
        cfg.model.q,
        cfg.model.nbar_ref,
        cfg.model.d,
        (em.chi_min, em.chi_max),
        (em.mu_min, em.mu_max),
        em.l,
        em.chi_steps,
        em.mu_steps,
        em.mu_log,
    );
    let mut writer = RunWriter::create(dir)?;
    writer.write(&format!("{}_eigenmap.csv", cfg.run_id), &eigenmap_csv(&points))?;
    writer.write(&format!("{}_meta.txt", cfg.run_id), &metadata_text(cfg, None, None))?;
    writer.finish_manifest(&cfg.run_id)?;
    Ok(ExperimentOutput {
        run_id: cfg.run_id.clone(),
        dir: dir.to_path_buf(),
        summary: None,
        outcome: None,
        children: Vec::new(),
    })
}

/// Expand the sweep declaration into per-point configs.
///
/// `sweep.cases` zips with `sweep.chi` (a scalar χ list of equal length,
/// or a single shared χ); otherwise `sweep.chi` × `sweep.mu` crosses.
pub fn expand_sweep(cfg: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let s = &cfg.sweep;
    let mut points: Vec<(Option<chemotaxis_core::SwitchingCase>, Option<f64>, Option<f64>)> =
        Vec::new();
    if !s.cases.is_empty() {
        for (i, &case) in s.cases.iter().enumerate() {
            let chi = if s.chi.is_empty() {
                None
            } else if s.chi.len() == 1 {
                Some(s.chi[0])
            } else {
                Some(s.chi[i])
            };
            if s.mu.is_empty() {
                points.push((Some(case), chi, None));
            } else {
                for &mu in &s.mu {
                    points.push((Some(case), chi, Some(mu)));
                }
            }
        }
    } else {
        let chis: Vec<Option<f64>> = if s.chi.is_empty() {
            vec![None]
        } else {
            s.chi.iter().map(|&c| Some(c)).collect()
        };
        let mus: Vec<Option<f64>> = if s.mu.is_empty() {
            vec![None]
        } else {
            s.mu.iter().map(|&m| Some(m)).collect()
        };
        for &chi in &chis {
            for &mu in &mus {
                points.push((None, chi, mu));
            }
        }
    }

    points
        .into_iter()
        .map(|(case, chi, mu)| {
            let mut sub = cfg.clone();
            sub.mode = s.sim;
            let mut id = cfg.run_id.clone();
            if let Some(case) = case {
                sub.model.case = case;
                id.push_str(&format!("_{}", case.label().to_ascii_lowercase()));
            }
            if let Some(chi) = chi {
                sub.model.chi = chi;
                id.push_str(&format!("_chi{chi}"));
            }
            if let Some(mu) = mu {
                sub.model.mu = mu;
                id.push_str(&format!("_mu{mu}"));
            }
            sub.run_id = id.replace('.', "p");
            sub.sweep.cases.clear();
            sub.sweep.chi.clear();
            sub.sweep.mu.clear();
            sub
        })
        .collect()
}

fn sweep_mode(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutput, RunnerError> {
    let subs = expand_sweep(cfg);
    let n = subs.len();
    let workers = cfg.sweep.workers.max(1).min(n.max(1));

    // workers pull indices; results are collected by index so the
    // summary table is in declaration order regardless of scheduling
    let next = Mutex::new(0usize);
    let results: Vec<Mutex<Option<Result<ExperimentOutput, RunnerError>>>> =
        (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().unwrap();
                    let idx = *guard;
                    if idx >= n {
                        break;
                    }
                    *guard += 1;
                    idx
                };
                let out = run_experiment(&subs[idx], dir);
                *results[idx].lock().unwrap() = Some(out);
            });
        }
    });

    let mut children = Vec::with_capacity(n);
    for (slot, sub) in results.into_iter().zip(&subs) {
        let out = slot
            .into_inner()
            .unwrap()
            .unwrap_or_else(|| panic!("sweep point {} never ran", sub.run_id))?;
        children.push(out);
    }

    // summary table assembled after all workers finished
    let mut table = String::from(
        "run_id,case,chi,mu,outcome,pattern_formed,peak_count,max_n1,oscillation_period,extinct,blowup_t,mass_drift\n",
    );
    for (child, sub) in children.iter().zip(&subs) {
        let s = child.summary.as_ref();
        let outcome = child
            .outcome
            .map(|o| match o {
                RunOutcome::Completed => "completed".to_string(),
                RunOutcome::Converged { .. } => "converged".to_string(),
                RunOutcome::BlowUp { .. } => "blowup".to_string(),
                RunOutcome::DtUnderflow { .. } => "dt_underflow".to_string(),
                RunOutcome::NegativeDensity { .. } => "negative_density".to_string(),
            })
            .unwrap_or_default();
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            child.run_id,
            sub.model.case.label().to_ascii_lowercase(),
            sub.model.chi,
            sub.model.mu,
            outcome,
            s.map_or(String::new(), |s| s.pattern_formed.to_string()),
            s.map_or(String::new(), |s| s.peak_count.to_string()),
            s.map_or(String::new(), |s| s
                .peak_heights
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0)
                .to_string()),
            s.and_then(|s| s.oscillation).map_or("none".to_string(), |o| o.period.to_string()),
            s.map_or("none".to_string(), |s| match s.extinct_phenotype {
                Some(chemotaxis_core::analysis::Phenotype::Secreting) => "secreting".into(),
                Some(chemotaxis_core::analysis::Phenotype::Chemotactic) => "chemotactic".into(),
                None => "none".into(),
            }),
            s.map_or("none".to_string(), |s| s
                .blowup
                .map_or("none".to_string(), |b| b.t_blow.to_string())),
            s.map_or(String::new(), |s| s.mass_drift.to_string()),
        ));
    }
    let mut writer = RunWriter::create(dir)?;
    writer.write("sweep_summary.csv", table.as_bytes())?;
    writer.write(&format!("{}_meta.txt", cfg.run_id), &metadata_text(cfg, None, None))?;
    writer.finish_manifest(&cfg.run_id)?;

    Ok(ExperimentOutput {
        run_id: cfg.run_id.clone(),
        dir: dir.to_path_buf(),
        summary: None,
        outcome: None,
        children,
    })
}
