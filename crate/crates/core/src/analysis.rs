//! Quantifies solver output: peak census, oscillation detection,
//! phenotype-extinction detection, blow-up summary, and the mass audit.
//!
//! The thresholds are conventions, not model constants, so they live in
//! [`AnalysisThresholds`] and are echoed into run metadata: a pattern
//! counts as formed when max−min of n₁ exceeds `pattern_threshold`; an
//! oscillation is "sustained" when the dominant discrete-Fourier peak
//! of the detrended probe carries ≥ `osc_variance_fraction` of the
//! variance and the envelope decays by < `osc_envelope_decay` across
//! the window.

use crate::artifacts::{RunArtifacts, Snapshot};
use crate::math;
use alloc::vec::Vec;
use thiserror::Error;

/// Tunable detection thresholds (defaults in parentheses).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisThresholds {
    /// max−min of n₁ above which a pattern counts as formed (1e-3).
    pub pattern_threshold: f64,
    /// Peak detection level as a multiple of the spatial mean (1.05).
    pub peak_ratio: f64,
    /// Merge peaks closer than this many cells (3).
    pub peak_merge_cells: usize,
    /// Spatial-mean density below which a phenotype is extinct (1e-2).
    pub extinction_threshold: f64,
    /// Variance fraction the dominant frequency must carry (0.2).
    pub osc_variance_fraction: f64,
    /// Maximum relative envelope decay for a sustained oscillation (0.2).
    pub osc_envelope_decay: f64,
    /// Default start of the oscillation window, skipping transients (300).
    pub osc_t0: f64,
}

impl Default for AnalysisThresholds {
    fn default() -> Self {
        Self {
            pattern_threshold: 1e-3,
            peak_ratio: 1.05,
            peak_merge_cells: 3,
            extinction_threshold: 1e-2,
            osc_variance_fraction: 0.2,
            osc_envelope_decay: 0.2,
            osc_t0: 300.0,
        }
    }
}

/// Result of the 1D peak census.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakCensus {
    pub count: usize,
    pub heights: Vec<f64>,
    /// Full widths at half prominence, in length units.
    pub widths: Vec<f64>,
}

/// Detected oscillation of the probe series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    pub period: f64,
    pub amplitude: f64,
}

/// Which phenotype died out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phenotype {
    /// n₀, the attractant-secreting state.
    Secreting,
    /// n₁, the chemotactic state.
    Chemotactic,
}

/// Blow-up record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUp {
    pub t_blow: f64,
}

/// Flat summary of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSummary {
    pub peak_count: usize,
    pub peak_heights: Vec<f64>,
    pub peak_widths: Vec<f64>,
    pub pattern_formed: bool,
    pub oscillation: Option<Oscillation>,
    pub extinct_phenotype: Option<Phenotype>,
    pub blowup: Option<BlowUp>,
    pub mass_drift: f64,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum QueryError {
    #[error("oscillation window must span at least 50 time units, got {0}")]
    WindowTooShort(f64),
    #[error("probe series does not cover the window [{0}, {1}]")]
    WindowNotCovered(f64, f64),
}

/// Strict local maxima of `profile` above `threshold_ratio`× the spatial
/// mean, with maxima closer than `merge_cells` cells merged into the
/// higher one. Heights are the profile values; widths are full widths
/// at half prominence, prominence measured against the higher of the
/// two flanking minima.
pub fn count_peaks(profile: &[f64], dx: f64, threshold_ratio: f64, merge_cells: usize) -> PeakCensus {
    let n = profile.len();
    if n < 3 {
        return PeakCensus { count: 0, heights: Vec::new(), widths: Vec::new() };
    }
    let mean = profile.iter().sum::<f64>() / n as f64;
    let level = threshold_ratio * mean;

    let is_max = |i: usize| -> bool {
        let v = profile[i];
        let left_ok = i == 0 || v > profile[i - 1];
        let right_ok = i == n - 1 || v > profile[i + 1];
        left_ok && right_ok
    };

    let mut candidates: Vec<usize> = (0..n).filter(|&i| is_max(i) && profile[i] > level).collect();

    // merge close maxima, keeping the higher
    let mut merged: Vec<usize> = Vec::new();
    for &i in &candidates {
        match merged.last() {
            Some(&j) if i - j < merge_cells => {
                if profile[i] > profile[j] {
                    *merged.last_mut().unwrap() = i;
                }
            }
            _ => merged.push(i),
        }
    }
    candidates = merged;

    let mut heights = Vec::with_capacity(candidates.len());
    let mut widths = Vec::with_capacity(candidates.len());
    for &p in &candidates {
        let h = profile[p];
        // flanking minima; a boundary peak has only one flank and its
        // width is truncated at the wall
        let mut li = p;
        while li > 0 && profile[li - 1] <= profile[li] {
            li -= 1;
        }
        let mut ri = p;
        while ri + 1 < n && profile[ri + 1] <= profile[ri] {
            ri += 1;
        }
        let base = match (li < p, ri > p) {
            (true, true) => profile[li].max(profile[ri]),
            (true, false) => profile[li],
            (false, true) => profile[ri],
            (false, false) => h,
        };
        let prominence = h - base;
        let half = h - 0.5 * prominence;
        // crossing positions of the half level, linear interpolation
        let left_x = if li == p {
            p as f64
        } else {
            let mut i = p;
            while i > li && profile[i] > half {
                i -= 1;
            }
            if profile[i] > half {
                i as f64
            } else {
                let (a, b) = (profile[i], profile[i + 1]);
                i as f64 + if b > a { (half - a) / (b - a) } else { 0.0 }
            }
        };
        let right_x = if ri == p {
            p as f64
        } else {
            let mut i = p;
            while i < ri && profile[i] > half {
                i += 1;
            }
            if profile[i] > half {
                i as f64
            } else {
                let (a, b) = (profile[i - 1], profile[i]);
                (i - 1) as f64 + if b < a { (a - half) / (a - b) } else { 1.0 }
            }
        };
        heights.push(h);
        widths.push((right_x - left_x) * dx);
    }

    PeakCensus { count: candidates.len(), heights, widths }
}

/// 2D spot census: strict 8-neighbourhood local maxima of the field
/// after one pass of 3×3 binomial smoothing (Gaussian radius ~1 cell),
/// above `threshold_ratio`× the spatial mean.
pub fn count_peaks_2d(field: &[f64], n: usize, threshold_ratio: f64) -> PeakCensus {
    let idx = |i: usize, j: usize| j * n + i;
    let clamp = |v: isize| v.clamp(0, n as isize - 1) as usize;
    let mut smooth = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let mut acc = 0.0;
            for (dj, wj) in [(-1isize, 1.0), (0, 2.0), (1, 1.0)] {
                for (di, wi) in [(-1isize, 1.0), (0, 2.0), (1, 1.0)] {
                    acc += wj * wi * field[idx(clamp(i as isize + di), clamp(j as isize + dj))];
                }
            }
            smooth.push(acc / 16.0);
        }
    }
    let mean = smooth.iter().sum::<f64>() / (n * n) as f64;
    let level = threshold_ratio * mean;
    let mut heights = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let v = smooth[idx(i, j)];
            if v <= level {
                continue;
            }
            let mut is_max = true;
            'neigh: for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as isize + di, j as isize + dj);
                    if ni < 0 || nj < 0 || ni >= n as isize || nj >= n as isize {
                        continue;
                    }
                    if smooth[idx(ni as usize, nj as usize)] >= v {
                        is_max = false;
                        break 'neigh;
                    }
                }
            }
            if is_max {
                heights.push(field[idx(i, j)]);
            }
        }
    }
    heights.sort_by(|a, b| b.partial_cmp(a).unwrap());
    PeakCensus { count: heights.len(), widths: Vec::new(), heights }
}

/// Oscillation detection on the probe series over [t0, t1].
///
/// The window is resampled to a uniform grid, linearly detrended, and
/// Fourier-analysed; the dominant frequency must complete at least two
/// cycles in the window (slower components count as trend), carry the
/// configured variance fraction, and the segment-amplitude envelope
/// must decay by less than the configured bound. Returns the period and
/// the amplitude of the dominant component.
pub fn detect_oscillation(
    times: &[f64],
    values: &[f64],
    t0: f64,
    t1: f64,
    thresholds: &AnalysisThresholds,
) -> Result<Option<Oscillation>, QueryError> {
    if t1 - t0 < 50.0 {
        return Err(QueryError::WindowTooShort(t1 - t0));
    }
    if times.is_empty() || times[0] > t0 + 1e-9 || times[times.len() - 1] < t1 - 1e-9 {
        return Err(QueryError::WindowNotCovered(t0, t1));
    }

    // uniform resampling by linear interpolation
    const NS: usize = 2048;
    let mut samples = [0.0f64; NS];
    let mut cursor = 0usize;
    for (k, sample) in samples.iter_mut().enumerate() {
        let t = t0 + (t1 - t0) * k as f64 / (NS - 1) as f64;
        while cursor + 1 < times.len() && times[cursor + 1] < t {
            cursor += 1;
        }
        let j = cursor.min(times.len() - 2);
        let (ta, tb) = (times[j], times[j + 1]);
        let (va, vb) = (values[j], values[j + 1]);
        *sample = if tb > ta { va + (vb - va) * (t - ta) / (tb - ta) } else { va };
    }

    // linear detrend
    let nf = NS as f64;
    let mean_k = (nf - 1.0) / 2.0;
    let mean_v = samples.iter().sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut var_k = 0.0;
    for (k, v) in samples.iter().enumerate() {
        let dk = k as f64 - mean_k;
        cov += dk * (v - mean_v);
        var_k += dk * dk;
    }
    let slope = cov / var_k;
    let mut detrended = samples;
    for (k, v) in detrended.iter_mut().enumerate() {
        *v -= mean_v + slope * (k as f64 - mean_k);
    }

    let variance = detrended.iter().map(|v| v * v).sum::<f64>() / nf;
    if variance <= 0.0 {
        return Ok(None);
    }

    // DFT power on positive frequencies; the fundamental (one cycle per
    // window) is indistinguishable from residual trend, so an
    // oscillation must complete at least two cycles in the window
    let mut best_j = 0usize;
    let mut best_power = 0.0f64;
    for j in 2..NS / 2 {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        let w = core::f64::consts::TAU * j as f64 / nf;
        for (k, v) in detrended.iter().enumerate() {
            let phase = w * k as f64;
            re += v * math::cos(phase);
            im -= v * math::sin(phase);
        }
        // variance carried by frequency j (the conjugate pair doubles it)
        let power = 2.0 * (re * re + im * im) / (nf * nf);
        if power > best_power {
            best_power = power;
            best_j = j;
        }
    }
    if best_j == 0 || best_power < thresholds.osc_variance_fraction * variance {
        return Ok(None);
    }

    // envelope: per-quarter amplitude must not decay too much
    let quarter = NS / 4;
    let seg_amp = |seg: &[f64]| -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in seg {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        0.5 * (hi - lo)
    };
    let first = seg_amp(&detrended[..quarter]);
    let last = seg_amp(&detrended[NS - quarter..]);
    if first > 0.0 && (first - last) / first > thresholds.osc_envelope_decay {
        return Ok(None);
    }

    let period = (t1 - t0) / best_j as f64;
    let amplitude = math::sqrt(2.0 * best_power);
    Ok(Some(Oscillation { period, amplitude }))
}

/// Reports the phenotype whose spatial mean fell below `threshold`.
pub fn detect_extinction(snapshot: &Snapshot, threshold: f64) -> Option<Phenotype> {
    let n = snapshot.n0.len() as f64;
    let mean0 = snapshot.n0.iter().sum::<f64>() / n;
    let mean1 = snapshot.n1.iter().sum::<f64>() / n;
    if mean0 < threshold {
        Some(Phenotype::Secreting)
    } else if mean1 < threshold {
        Some(Phenotype::Chemotactic)
    } else {
        None
    }
}

/// Max over snapshots of |∫ρ − ∫ρ(0)| / ∫ρ(0).
pub fn mass_audit(run: &RunArtifacts) -> f64 {
    (0..run.snapshots.len())
        .map(|i| run.mass_drift_at(i))
        .fold(0.0, f64::max)
}

/// Assemble the pattern summary of a finished run.
pub fn summarize(run: &RunArtifacts, thresholds: &AnalysisThresholds) -> PatternSummary {
    let last = run.snapshots.last().expect("runs always carry snapshots");
    let (census, spread) = match &run.shape {
        crate::artifacts::GridShape::Square(g) => {
            let census = count_peaks_2d(&last.n1, g.n, thresholds.peak_ratio);
            (census, field_spread(&last.n1))
        }
        crate::artifacts::GridShape::Line(g) => (
            count_peaks(&last.n1, g.dx, thresholds.peak_ratio, thresholds.peak_merge_cells),
            field_spread(&last.n1),
        ),
        crate::artifacts::GridShape::Radial(g) => (
            count_peaks(&last.n1, g.dr, thresholds.peak_ratio, thresholds.peak_merge_cells),
            field_spread(&last.n1),
        ),
    };

    let t_end = last.t;
    let t0 = thresholds.osc_t0.min((t_end - 100.0).max(0.0));
    let oscillation = if t_end - t0 >= 50.0 && run.probe.len() > 16 {
        let times: Vec<f64> = run.probe.iter().map(|p| p.t).collect();
        let values: Vec<f64> = run.probe.iter().map(|p| p.n1).collect();
        detect_oscillation(&times, &values, t0, t_end, thresholds).unwrap_or(None)
    } else {
        None
    };

    PatternSummary {
        pattern_formed: spread > thresholds.pattern_threshold,
        peak_count: census.count,
        peak_heights: census.heights,
        peak_widths: census.widths,
        oscillation,
        extinct_phenotype: detect_extinction(last, thresholds.extinction_threshold),
        blowup: run.diagnostics.outcome.blowup_time().map(|t_blow| BlowUp { t_blow }),
        mass_drift: run.diagnostics.mass_drift,
    }
}

fn field_spread(field: &[f64]) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in field {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}
