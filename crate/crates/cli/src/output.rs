//! File emission: CSV snapshot/probe series, PGM field images, the
//! stability report, the eigenvalue map, run metadata with the config
//! echo and pattern summary, and the digest manifest.
//!
//! All numbers are written with Rust's shortest round-trip formatting,
//! so files parse back to bit-identical values and identical runs
//! produce byte-identical output.

use crate::config::{emit, ExperimentConfig};
use chemotaxis_core::analysis::{PatternSummary, Phenotype};
use chemotaxis_core::stability::{EigenMapPoint, StabilityReport, ThresholdBranch};
use chemotaxis_core::{GridShape, RunArtifacts, RunOutcome};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// FNV-1a 64-bit content digest, hex-encoded.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Tracks written files so the manifest can list them with digests.
pub struct RunWriter {
    pub dir: PathBuf,
    pub files: Vec<(String, u64)>,
}

impl RunWriter {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.push((name.to_string(), fnv1a64(contents)));
        Ok(path)
    }

    /// Write `{run_id}_manifest.txt` listing every emitted file.
    pub fn finish_manifest(&mut self, run_id: &str) -> io::Result<PathBuf> {
        let mut out = String::from("# fnv1a64  filename\n");
        for (name, digest) in &self.files {
            out.push_str(&format!("{digest:016x}  {name}\n"));
        }
        let path = self.dir.join(format!("{run_id}_manifest.txt"));
        fs::write(&path, out)?;
        Ok(path)
    }
}

fn csv_line<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            w.write_all(b",")?;
        }
        write!(w, "{v}")?;
        first = false;
    }
    w.write_all(b"\n")
}

/// Interval/radial snapshot series: `t,x,n0,n1,s` (or `t,r,...`).
pub fn snapshots_csv(run: &RunArtifacts, radial: bool) -> Vec<u8> {
    let mut out = BufWriter::new(Vec::new());
    out.write_all(if radial { b"t,r,n0,n1,s\n" } else { b"t,x,n0,n1,s\n" })
        .unwrap();
    let centers: Vec<f64> = match &run.shape {
        GridShape::Line(g) => (0..g.n_cells).map(|i| g.center(i)).collect(),
        GridShape::Radial(g) => (0..g.n_cells).map(|i| g.center(i)).collect(),
        GridShape::Square(_) => panic!("2D runs emit one file per snapshot"),
    };
    for snap in &run.snapshots {
        for (i, &x) in centers.iter().enumerate() {
            csv_line(&mut out, &[snap.t, x, snap.n0[i], snap.n1[i], snap.s[i]]).unwrap();
        }
    }
    out.into_inner().unwrap()
}

/// Probe series: `t,n0,n1,s`.
pub fn probe_csv(run: &RunArtifacts) -> Vec<u8> {
    let mut out = BufWriter::new(Vec::new());
    out.write_all(b"t,n0,n1,s\n").unwrap();
    for p in &run.probe {
        csv_line(&mut out, &[p.t, p.n0, p.n1, p.s]).unwrap();
    }
    out.into_inner().unwrap()
}

/// One 2D snapshot: `x,y,n0,n1,s`.
pub fn snapshot_2d_csv(run: &RunArtifacts, idx: usize) -> Vec<u8> {
    let GridShape::Square(g) = &run.shape else {
        panic!("snapshot_2d_csv needs a square grid");
    };
    let snap = &run.snapshots[idx];
    let mut out = BufWriter::new(Vec::new());
    out.write_all(b"x,y,n0,n1,s\n").unwrap();
    for j in 0..g.n {
        let y = (j as f64 + 0.5) * g.dx;
        for i in 0..g.n {
            let x = (i as f64 + 0.5) * g.dx;
            let c = j * g.n + i;
            csv_line(&mut out, &[x, y, snap.n0[c], snap.n1[c], snap.s[c]]).unwrap();
        }
    }
    out.into_inner().unwrap()
}

/// 8-bit binary PGM of one field, scaled by its (min, max) which are
/// recorded in a comment line.
pub fn field_pgm(field: &[f64], n: usize) -> Vec<u8> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in field {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    let mut out = Vec::with_capacity(n * n + 64);
    out.extend_from_slice(format!("P5\n# min={lo} max={hi}\n{n} {n}\n255\n").as_bytes());
    for &v in field {
        let g = if span > 0.0 { ((v - lo) / span * 255.0).round() as u8 } else { 0 };
        out.push(g);
    }
    out
}

/// Key-value header plus the per-mode dispersion table.
pub fn stability_report_text(cfg: &ExperimentConfig, report: &StabilityReport) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(&format!("case = {}\n", cfg.model.case.label().to_ascii_lowercase()));
    out.push_str(&format!("mu = {}\n", cfg.model.mu));
    out.push_str(&format!("q = {}\n", cfg.model.q));
    out.push_str(&format!("d = {}\n", cfg.model.d));
    out.push_str(&format!("chi = {}\n", cfg.model.chi));
    out.push_str(&format!("l = {}\n", cfg.stability.l));
    out.push_str(&format!(
        "steady_state = {},{},{}\n",
        report.steady.n0_star, report.steady.n1_star, report.steady.s_star
    ));
    out.push_str(&format!("h0 = {}\nh1 = {}\nhs = {}\n", report.h.h0, report.h.h1, report.h.hs));
    out.push_str(&format!("homogeneous_stable = {}\n", report.homogeneous_stable));
    let margin = report.h.margin();
    let class = if margin > 0.0 {
        "stable"
    } else if margin == 0.0 {
        "neutrally_stable"
    } else {
        "unstable"
    };
    out.push_str(&format!("homogeneous_class = {class}\n"));
    out.push_str(&format!(
        "chi_threshold = {}\n",
        report.chi_threshold.map_or("none".to_string(), |v| v.to_string())
    ));
    out.push_str(&format!(
        "threshold_branch = {}\n",
        match report.threshold_branch {
            ThresholdBranch::H1Positive => "h1_positive",
            ThresholdBranch::H1Negative => "h1_negative",
            ThresholdBranch::None => "none",
        }
    ));
    out.push_str(&format!("predicts_oscillation = {}\n", report.predicts_oscillation));
    for (m, lmin) in &report.min_lengths {
        out.push_str(&format!("min_length_{m} = {lmin}\n"));
    }
    out.push('\n');
    out.push_str("m,k_sq,A,B,C,re1,im1,re2,im2,re3,im3\n");
    for p in &report.dispersion {
        let e = &p.eigenvalues;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            p.m,
            p.k_sq,
            p.coeffs.0,
            p.coeffs.1,
            p.coeffs.2,
            e[0].re,
            e[0].im,
            e[1].re,
            e[1].im,
            e[2].re,
            e[2].im
        ));
    }
    out.into_bytes()
}

/// Eigenvalue map: `chi,mu,max_re,max_abs_im,oscillatory`.
pub fn eigenmap_csv(points: &[EigenMapPoint]) -> Vec<u8> {
    let mut out = String::from("chi,mu,max_re,max_abs_im,oscillatory\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.chi, p.mu, p.max_re, p.max_abs_im, p.oscillatory as u8
        ));
    }
    out.into_bytes()
}

fn outcome_text(outcome: &RunOutcome) -> String {
    match outcome {
        RunOutcome::Completed => "completed".into(),
        RunOutcome::Converged { t } => format!("converged at t = {t}"),
        RunOutcome::BlowUp { t } => format!("blow-up at t = {t}"),
        RunOutcome::DtUnderflow { t } => {
            format!("dt underflow at t = {t} (stiffness/blow-up suspected)")
        }
        RunOutcome::NegativeDensity { t } => format!("negative density at t = {t} (CFL failure)"),
    }
}

/// Flat key-value block for the pattern summary.
pub fn summary_block(summary: &PatternSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!("summary.pattern_formed = {}\n", summary.pattern_formed));
    out.push_str(&format!("summary.peak_count = {}\n", summary.peak_count));
    if !summary.peak_heights.is_empty() {
        let heights: Vec<String> = summary.peak_heights.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("summary.peak_heights = {}\n", heights.join(",")));
    }
    if !summary.peak_widths.is_empty() {
        let widths: Vec<String> = summary.peak_widths.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("summary.peak_widths = {}\n", widths.join(",")));
    }
    match &summary.oscillation {
        Some(osc) => {
            out.push_str(&format!("summary.oscillation_period = {}\n", osc.period));
            out.push_str(&format!("summary.oscillation_amplitude = {}\n", osc.amplitude));
        }
        None => out.push_str("summary.oscillation_period = none\n"),
    }
    out.push_str(&format!(
        "summary.extinct_phenotype = {}\n",
        match summary.extinct_phenotype {
            Some(Phenotype::Secreting) => "secreting",
            Some(Phenotype::Chemotactic) => "chemotactic",
            None => "none",
        }
    ));
    out.push_str(&format!(
        "summary.blowup_t = {}\n",
        summary.blowup.map_or("none".to_string(), |b| b.t_blow.to_string())
    ));
    out.push_str(&format!("summary.mass_drift = {}\n", summary.mass_drift));
    out
}

/// Run metadata: code version, seed, config echo (parseable, prefixed
/// `config.`), diagnostics, and the pattern summary when available.
pub fn metadata_text(
    cfg: &ExperimentConfig,
    run: Option<&RunArtifacts>,
    summary: Option<&PatternSummary>,
) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    if let Some(seed) = cfg.ic.seed {
        out.push_str(&format!("seed = {seed}\n"));
        out.push_str(&format!("generator = {}\n", chemotaxis_core::rng::GENERATOR_ID));
    }
    out.push('\n');
    for line in emit(cfg).lines() {
        let provenance = line
            .split(" = ")
            .next()
            .and_then(|k| cfg.provenance.get(k))
            .map(|p| format!("  # {p}"))
            .unwrap_or_default();
        out.push_str(&format!("config.{line}{provenance}\n"));
    }
    if let Some(scales) = &cfg.scales {
        out.push('\n');
        out.push_str(&format!("scales.x = {}\n", scales.x));
        out.push_str(&format!("scales.t = {}\n", scales.t));
        out.push_str(&format!("scales.s = {}\n", scales.s));
        out.push_str(&format!("scales.n = {}\n", scales.n));
    }
    if let Some(run) = run {
        let d = &run.diagnostics;
        out.push('\n');
        out.push_str(&format!("diagnostics.outcome = {}\n", outcome_text(&d.outcome)));
        out.push_str(&format!("diagnostics.steps = {}\n", d.steps));
        out.push_str(&format!("diagnostics.rejected_steps = {}\n", d.rejected_steps));
        out.push_str(&format!("diagnostics.mass_drift = {}\n", d.mass_drift));
        out.push_str(&format!("diagnostics.cfl_violations = {}\n", d.cfl_violations));
        if let Some(t) = d.first_cfl_violation {
            out.push_str(&format!("diagnostics.first_cfl_violation = {t}\n"));
        }
        if let Some(c) = d.final_window_change {
            out.push_str(&format!("diagnostics.final_window_change = {c}\n"));
        }
    }
    if let Some(summary) = summary {
        out.push('\n');
        out.push_str(&summary_block(summary));
    }
    out.into_bytes()
}
