//! Re-analysis of a finished run directory: parse the metadata's config
//! echo, rebuild the artifacts from the CSV files, recompute the
//! pattern summary, and refresh the summary block in the metadata.

use crate::config::{parse_config, ExperimentConfig, Mode};
use crate::output::summary_block;
use chemotaxis_core::analysis::{summarize, PatternSummary};
use chemotaxis_core::grid1d::Grid1D;
use chemotaxis_core::grid2d::Grid2D;
use chemotaxis_core::radial::RadialGrid;
use chemotaxis_core::{Diagnostics, GridShape, ProbeSample, RunArtifacts, RunOutcome, Snapshot};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("run dir has no *_meta.txt")]
    NoMetadata,
    #[error("metadata config echo failed to parse: {0}")]
    BadConfigEcho(String),
    #[error("{path}: malformed data: {reason}")]
    BadData { path: PathBuf, reason: String },
    #[error("mode {0:?} runs carry no analyzable field data")]
    NotAnalyzable(Mode),
}

fn find_meta(dir: &Path) -> Result<PathBuf, AnalyzeError> {
    let mut metas: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with("_meta.txt"))
        })
        .collect();
    metas.sort();
    metas.into_iter().next().ok_or(AnalyzeError::NoMetadata)
}

/// Extract the config echo out of a metadata file.
pub fn config_from_meta(meta_text: &str) -> Result<ExperimentConfig, AnalyzeError> {
    let mut echo = String::new();
    for line in meta_text.lines() {
        if let Some(rest) = line.strip_prefix("config.") {
            // strip the provenance comment
            let clean = match rest.find('#') {
                Some(pos) => &rest[..pos],
                None => rest,
            };
            echo.push_str(clean.trim_end());
            echo.push('\n');
        }
    }
    parse_config(&echo, None).map_err(|e| AnalyzeError::BadConfigEcho(e.to_string()))
}

fn parse_csv_floats(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>, AnalyzeError> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|v| v.parse::<f64>()).collect();
        let row = row.map_err(|e| AnalyzeError::BadData {
            path: path.to_path_buf(),
            reason: format!("line {}: {e}", i + 1),
        })?;
        if row.len() != columns {
            return Err(AnalyzeError::BadData {
                path: path.to_path_buf(),
                reason: format!("line {}: expected {columns} columns, got {}", i + 1, row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

fn probe_from_csv(path: &Path) -> Result<Vec<ProbeSample>, AnalyzeError> {
    Ok(parse_csv_floats(path, 4)?
        .into_iter()
        .map(|r| ProbeSample { t: r[0], n0: r[1], n1: r[2], s: r[3] })
        .collect())
}

fn outcome_from_meta(meta_text: &str) -> RunOutcome {
    let line = meta_text
        .lines()
        .find_map(|l| l.strip_prefix("diagnostics.outcome = "))
        .unwrap_or("completed");
    let t_of = |l: &str| {
        l.split("t = ")
            .nth(1)
            .and_then(|s| s.split_whitespace().next())
            .and_then(|s| s.parse::<f64>().ok())
            .unwrap_or(f64::NAN)
    };
    if line.starts_with("blow-up") {
        RunOutcome::BlowUp { t: t_of(line) }
    } else if line.starts_with("dt underflow") {
        RunOutcome::DtUnderflow { t: t_of(line) }
    } else if line.starts_with("negative density") {
        RunOutcome::NegativeDensity { t: t_of(line) }
    } else if line.starts_with("converged") {
        RunOutcome::Converged { t: t_of(line) }
    } else {
        RunOutcome::Completed
    }
}

fn rebuild_line_run(
    cfg: &ExperimentConfig,
    dir: &Path,
    outcome: RunOutcome,
) -> Result<RunArtifacts, AnalyzeError> {
    let radial = cfg.mode == Mode::Radial;
    let shape = if radial {
        GridShape::Radial(RadialGrid::new(cfg.grid.l, cfg.grid.n_radial).map_err(|e| {
            AnalyzeError::BadConfigEcho(e.to_string())
        })?)
    } else {
        GridShape::Line(
            Grid1D::new(cfg.grid.l, cfg.grid.n)
                .map_err(|e| AnalyzeError::BadConfigEcho(e.to_string()))?,
        )
    };
    let n = shape.n_cells();

    let rows = parse_csv_floats(&dir.join(format!("{}_snapshots.csv", cfg.run_id)), 5)?;
    let mut snapshots: Vec<Snapshot> = Vec::new();
    for chunk in rows.chunks(n) {
        if chunk.len() != n {
            return Err(AnalyzeError::BadData {
                path: dir.join(format!("{}_snapshots.csv", cfg.run_id)),
                reason: format!("snapshot rows are not a multiple of {n} cells"),
            });
        }
        snapshots.push(Snapshot {
            t: chunk[0][0],
            n0: chunk.iter().map(|r| r[2]).collect(),
            n1: chunk.iter().map(|r| r[3]).collect(),
            s: chunk.iter().map(|r| r[4]).collect(),
        });
    }
    let probe = probe_from_csv(&dir.join(format!("{}_probe.csv", cfg.run_id)))?;

    let mut diagnostics = Diagnostics::new();
    diagnostics.outcome = outcome;
    let mut run = RunArtifacts { shape, snapshots, probe, diagnostics };
    run.diagnostics.mass_drift = (0..run.snapshots.len())
        .map(|i| run.mass_drift_at(i))
        .fold(0.0, f64::max);
    Ok(run)
}

fn rebuild_square_run(
    cfg: &ExperimentConfig,
    dir: &Path,
    outcome: RunOutcome,
) -> Result<RunArtifacts, AnalyzeError> {
    let grid = Grid2D::new(cfg.grid.l, cfg.grid.n)
        .map_err(|e| AnalyzeError::BadConfigEcho(e.to_string()))?;
    let n2 = grid.n * grid.n;
    let mut snapshots = Vec::new();
    for k in 0.. {
        let path = dir.join(format!("{}_snap{k}.csv", cfg.run_id));
        if !path.exists() {
            break;
        }
        let rows = parse_csv_floats(&path, 5)?;
        if rows.len() != n2 {
            return Err(AnalyzeError::BadData {
                path,
                reason: format!("expected {n2} cells, got {}", rows.len()),
            });
        }
        snapshots.push(Snapshot {
            t: k as f64,
            n0: rows.iter().map(|r| r[2]).collect(),
            n1: rows.iter().map(|r| r[3]).collect(),
            s: rows.iter().map(|r| r[4]).collect(),
        });
    }
    if snapshots.is_empty() {
        return Err(AnalyzeError::BadData {
            path: dir.join(format!("{}_snap0.csv", cfg.run_id)),
            reason: "no 2D snapshots found".into(),
        });
    }
    let probe = probe_from_csv(&dir.join(format!("{}_probe.csv", cfg.run_id)))?;
    // snapshot files carry no time column; stamp the final snapshot with
    // the probe horizon so time-windowed analyses line up
    if let (Some(last), Some(p)) = (snapshots.last_mut(), probe.last()) {
        last.t = p.t;
    }

    let mut diagnostics = Diagnostics::new();
    diagnostics.outcome = outcome;
    let mut run = RunArtifacts {
        shape: GridShape::Square(grid),
        snapshots,
        probe,
        diagnostics,
    };
    run.diagnostics.mass_drift = (0..run.snapshots.len())
        .map(|i| run.mass_drift_at(i))
        .fold(0.0, f64::max);
    Ok(run)
}

/// Recompute the pattern summary of a finished run directory and
/// refresh the summary block of its metadata file.
pub fn analyze_run_dir(dir: &Path) -> Result<PatternSummary, AnalyzeError> {
    let meta_path = find_meta(dir)?;
    let meta_text = fs::read_to_string(&meta_path)?;
    let cfg = config_from_meta(&meta_text)?;
    let outcome = outcome_from_meta(&meta_text);

    let run = match cfg.mode {
        Mode::Sim1D | Mode::Radial => rebuild_line_run(&cfg, dir, outcome)?,
        Mode::Sim2D => rebuild_square_run(&cfg, dir, outcome)?,
        mode => return Err(AnalyzeError::NotAnalyzable(mode)),
    };
    let summary = summarize(&run, &crate::config::thresholds(&cfg));

    // idempotent refresh: drop any previous summary block, append anew
    let mut kept: String = meta_text
        .lines()
        .filter(|l| !l.starts_with("summary."))
        .collect::<Vec<_>>()
        .join("\n");
    while kept.ends_with('\n') || kept.ends_with(' ') {
        kept.pop();
    }
    kept.push_str("\n\n");
    kept.push_str(&summary_block(&summary));
    fs::write(&meta_path, kept)?;

    Ok(summary)
}
