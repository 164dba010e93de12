//! Experiment configuration: a flat `section.key = value` text format
//! with `#` comments, parsed with line-precise errors, mode-aware
//! defaults, and provenance tracking (default / user / derived).
//!
//! Canonical keys (bare aliases like `chi` or `mode` map onto them):
//!
//! ```text
//! run.id  run.mode  run.output_dir
//! model.variant  model.case  model.mu  model.q  model.nbar_ref  model.d  model.chi
//! dimensional.d_n  dimensional.d_s  dimensional.chi_1
//! dimensional.alpha_0  dimensional.eta  dimensional.sigma
//! grid.l  grid.dx  grid.n  grid.dr
//! time.t_end  time.tau  time.dt_init  time.dt_min  time.dt_max
//! time.rel_tol  time.abs_tol  time.snapshot_every  time.snapshot_times
//! ic.nbar  ic.amplitude  ic.a_focus  ic.seed
//! analysis.pattern_threshold  analysis.peak_ratio  analysis.peak_merge_cells
//! analysis.extinction_threshold  analysis.osc_variance_fraction
//! analysis.osc_envelope_decay  analysis.osc_t0  analysis.blowup_factor
//! analysis.convergence_window  analysis.convergence_tol
//! sweep.sim  sweep.cases  sweep.chi  sweep.mu  sweep.workers
//! eigenmap.chi_min  eigenmap.chi_max  eigenmap.chi_steps
//! eigenmap.mu_min  eigenmap.mu_max  eigenmap.mu_steps  eigenmap.mu_scale  eigenmap.l
//! stability.l  stability.n0_mean
//! ```
//!
//! A `dimensional.*` block (all six keys) triggers nondimensionalization:
//! `model.d` and `model.chi` are then derived and may not also be set.

use chemotaxis_core::analysis::AnalysisThresholds;
use chemotaxis_core::model::{
    nondimensionalize, DimensionalParams, ModelParams, ModelVariant, NondimScales, SwitchingCase,
    SwitchingSpec,
};
use chemotaxis_core::radial::RadialOptions;
use chemotaxis_core::stepper::TimeController;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Stability,
    Sim1D,
    Sim2D,
    Radial,
    Sweep,
    EigenMap,
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Stability => "stability",
            Mode::Sim1D => "sim1d",
            Mode::Sim2D => "sim2d",
            Mode::Radial => "radial",
            Mode::Sweep => "sweep",
            Mode::EigenMap => "eigenmap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Default,
    User,
    Derived,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Default => write!(f, "default"),
            Provenance::User => write!(f, "user"),
            Provenance::Derived => write!(f, "derived"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSection {
    pub variant: ModelVariant,
    pub case: SwitchingCase,
    pub mu: f64,
    pub q: f64,
    pub nbar_ref: f64,
    pub d: f64,
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub l: f64,
    pub dx: f64,
    pub n: usize,
    pub dr: f64,
    pub n_radial: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSection {
    pub t_end: f64,
    pub tau: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub snapshot_every: f64,
    pub snapshot_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcSection {
    pub nbar: f64,
    pub amplitude: f64,
    pub a_focus: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSection {
    pub pattern_threshold: f64,
    pub peak_ratio: f64,
    pub peak_merge_cells: usize,
    pub extinction_threshold: f64,
    pub osc_variance_fraction: f64,
    pub osc_envelope_decay: f64,
    pub osc_t0: f64,
    pub blowup_factor: f64,
    pub convergence_window: f64,
    pub convergence_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    /// Which simulator each grid point runs.
    pub sim: Mode,
    /// Optional case list; zipped against `chi` when both are given.
    pub cases: Vec<SwitchingCase>,
    pub chi: Vec<f64>,
    pub mu: Vec<f64>,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenMapSection {
    pub chi_min: f64,
    pub chi_max: f64,
    pub chi_steps: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_steps: usize,
    pub mu_log: bool,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySection {
    pub l: f64,
    pub n0_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub run_id: String,
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub model: ModelSection,
    pub dimensional: Option<DimensionalParams>,
    pub scales: Option<NondimScales>,
    pub grid: GridSection,
    pub time: TimeSection,
    pub ic: IcSection,
    pub analysis: AnalysisSection,
    pub sweep: SweepSection,
    pub eigenmap: EigenMapSection,
    pub stability: StabilitySection,
    pub provenance: BTreeMap<String, Provenance>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    BadValue { line: usize, key: String, reason: String },
    #[error("missing required key `{key}`: {reason}")]
    MissingKey { key: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

const ALIASES: &[(&str, &str)] = &[
    ("mode", "run.mode"),
    ("id", "run.id"),
    ("run_id", "run.id"),
    ("output_dir", "run.output_dir"),
    ("variant", "model.variant"),
    ("case", "model.case"),
    ("mu", "model.mu"),
    ("q", "model.q"),
    ("nbar_ref", "model.nbar_ref"),
    ("d", "model.d"),
    ("chi", "model.chi"),
    ("l", "grid.l"),
    ("dx", "grid.dx"),
    ("n", "grid.n"),
    ("dr", "grid.dr"),
    ("t_end", "time.t_end"),
    ("tau", "time.tau"),
    ("snapshot_every", "time.snapshot_every"),
    ("nbar", "ic.nbar"),
    ("amplitude", "ic.amplitude"),
    ("a_focus", "ic.a_focus"),
    ("seed", "ic.seed"),
];

const KNOWN_KEYS: &[&str] = &[
    "run.id",
    "run.mode",
    "run.output_dir",
    "model.variant",
    "model.case",
    "model.mu",
    "model.q",
    "model.nbar_ref",
    "model.d",
    "model.chi",
    "dimensional.d_n",
    "dimensional.d_s",
    "dimensional.chi_1",
    "dimensional.alpha_0",
    "dimensional.eta",
    "dimensional.sigma",
    "grid.l",
    "grid.dx",
    "grid.n",
    "grid.dr",
    "time.t_end",
    "time.tau",
    "time.dt_init",
    "time.dt_min",
    "time.dt_max",
    "time.rel_tol",
    "time.abs_tol",
    "time.snapshot_every",
    "time.snapshot_times",
    "ic.nbar",
    "ic.amplitude",
    "ic.a_focus",
    "ic.seed",
    "analysis.pattern_threshold",
    "analysis.peak_ratio",
    "analysis.peak_merge_cells",
    "analysis.extinction_threshold",
    "analysis.osc_variance_fraction",
    "analysis.osc_envelope_decay",
    "analysis.osc_t0",
    "analysis.blowup_factor",
    "analysis.convergence_window",
    "analysis.convergence_tol",
    "sweep.sim",
    "sweep.cases",
    "sweep.chi",
    "sweep.mu",
    "sweep.workers",
    "eigenmap.chi_min",
    "eigenmap.chi_max",
    "eigenmap.chi_steps",
    "eigenmap.mu_min",
    "eigenmap.mu_max",
    "eigenmap.mu_steps",
    "eigenmap.mu_scale",
    "eigenmap.l",
    "stability.l",
    "stability.n0_mean",
];

struct RawConfig {
    values: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(ConfigError::Syntax { line: line_no, text: line.to_string() });
            };
            let key_raw = line[..eq].trim();
            let value = line[eq + 1..].trim().to_string();
            let key = ALIASES
                .iter()
                .find(|(a, _)| *a == key_raw)
                .map(|(_, canon)| canon.to_string())
                .unwrap_or_else(|| key_raw.to_string());
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { line: line_no, key: key_raw.to_string() });
            }
            if values.contains_key(&key) {
                return Err(ConfigError::DuplicateKey { line: line_no, key: key_raw.to_string() });
            }
            values.insert(key, (value, line_no));
        }
        Ok(Self { values })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.values.remove(key)
    }
}

/// Typed getters that consume raw entries and record provenance.
struct Resolver {
    raw: RawConfig,
    provenance: BTreeMap<String, Provenance>,
}

impl Resolver {
    fn f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.raw.take(key) {
            None => {
                self.provenance.insert(key.to_string(), Provenance::Default);
                Ok(default)
            }
            Some((text, line)) => {
                self.provenance.insert(key.to_string(), Provenance::User);
                text.parse::<f64>().map_err(|_| ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    reason: format!("`{text}` is not a number"),
                })
            }
        }
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<(f64, usize)>, ConfigError> {
        match self.raw.take(key) {
            None => Ok(None),
            Some((text, line)) => {
                self.provenance.insert(key.to_string(), Provenance::User);
                let v = text.parse::<f64>().map_err(|_| ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    reason: format!("`{text}` is not a number"),
                })?;
                Ok(Some((v, line)))
            }
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.raw.take(key) {
            None => {
                self.provenance.insert(key.to_string(), Provenance::Default);
                Ok(default)
            }
            Some((text, line)) => {
                self.provenance.insert(key.to_string(), Provenance::User);
                text.parse::<usize>().map_err(|_| ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    reason: format!("`{text}` is not a nonnegative integer"),
                })
            }
        }
    }

    fn usize_opt(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.raw.take(key) {
            None => Ok(None),
            Some((text, line)) => {
                self.provenance.insert(key.to_string(), Provenance::User);
                text.parse::<usize>()
                    .map(Some)
                    .map_err(|_| ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        reason: format!("`{text}` is not a nonnegative integer"),
                    })
            }
        }
    }

    fn u64_opt(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.raw.take(key) {
            None => Ok(None),
            Some((text, line)) => {
                self.provenance.insert(key.to_string(), Provenance::User);
                text.parse::<u64>().map(Some).map_err(|_| ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    reason: format!("`{text}` is not an unsigned integer"),
                })
            }
        }
    }

    fn string(&mut self, key: &str, default: &str) -> String {
        match self.raw.take(key) {
            None => {
                self.provenance.insert(key.to_string(), Provenance::Default);
                default.to_string()
            }
            Some((text, _)) => {
                self.provenance.insert(key.to_string(), Provenance::User);
                text
            }
        }
    }

    fn string_opt(&mut self, key: &str) -> Option<(String, usize)> {
        let got = self.raw.take(key);
        if got.is_some() {
            self.provenance.insert(key.to_string(), Provenance::User);
        }
        got
    }

    fn f64_list(&mut self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.raw.take(key) {
            None => Ok(Vec::new()),
            Some((text, line)) => {
                self.provenance.insert(key.to_string(), Provenance::User);
                text.split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| ConfigError::BadValue {
                            line,
                            key: key.to_string(),
                            reason: format!("`{}` is not a number", s.trim()),
                        })
                    })
                    .collect()
            }
        }
    }
}

fn parse_mode(text: &str, line: usize) -> Result<Mode, ConfigError> {
    match text.to_ascii_lowercase().as_str() {
        "stability" => Ok(Mode::Stability),
        "sim1d" => Ok(Mode::Sim1D),
        "sim2d" => Ok(Mode::Sim2D),
        "radial" => Ok(Mode::Radial),
        "sweep" => Ok(Mode::Sweep),
        "eigenmap" => Ok(Mode::EigenMap),
        _ => Err(ConfigError::BadValue {
            line,
            key: "run.mode".into(),
            reason: format!("`{text}` is not one of stability|sim1d|sim2d|radial|sweep|eigenmap"),
        }),
    }
}

pub fn parse_case(text: &str) -> Option<SwitchingCase> {
    match text.to_ascii_lowercase().as_str() {
        "a" => Some(SwitchingCase::A),
        "b1" => Some(SwitchingCase::B1),
        "b2" => Some(SwitchingCase::B2),
        "c1" => Some(SwitchingCase::C1),
        "c2" => Some(SwitchingCase::C2),
        "none" | "noswitching" | "no_switching" => Some(SwitchingCase::NoSwitching),
        _ => None,
    }
}

/// Parse a config document into a fully resolved, validated config.
///
/// `mode_hint` fills `run.mode` when the document omits it (the CLI
/// passes the subcommand's natural mode).
pub fn parse_config(text: &str, mode_hint: Option<Mode>) -> Result<ExperimentConfig, ConfigError> {
    let raw = RawConfig::parse(text)?;
    let mut r = Resolver { raw, provenance: BTreeMap::new() };

    // mode first: defaults are mode-aware
    let mode = match r.string_opt("run.mode") {
        Some((text, line)) => parse_mode(&text, line)?,
        None => {
            let m = mode_hint.unwrap_or(Mode::Sim1D);
            r.provenance.insert("run.mode".into(), Provenance::Default);
            m
        }
    };

    let run_id = r.string("run.id", "run");
    if run_id.is_empty() || !run_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(ConfigError::Invalid(format!(
            "run.id `{run_id}` must be nonempty and use only [A-Za-z0-9_-]"
        )));
    }
    let output_dir = PathBuf::from(r.string("run.output_dir", "runs"));

    // model & optional dimensional block
    let variant = match r.string("model.variant", "two_phenotype").as_str() {
        "two_phenotype" => ModelVariant::TwoPhenotype,
        "minimal_ks" => ModelVariant::MinimalKS,
        other => {
            return Err(ConfigError::Invalid(format!(
                "model.variant `{other}` is not two_phenotype|minimal_ks"
            )))
        }
    };

    let case = match r.string_opt("model.case") {
        Some((text, line)) => parse_case(&text).ok_or_else(|| ConfigError::BadValue {
            line,
            key: "model.case".into(),
            reason: format!("`{text}` is not one of a|b1|b2|c1|c2|none"),
        })?,
        None => {
            if variant == ModelVariant::TwoPhenotype
                && matches!(mode, Mode::Sim1D | Mode::Sim2D | Mode::Radial | Mode::Stability | Mode::EigenMap)
            {
                return Err(ConfigError::MissingKey {
                    key: "model.case".into(),
                    reason: "two-phenotype runs need a switching family (a|b1|b2|c1|c2|none)".into(),
                });
            }
            r.provenance.insert("model.case".into(), Provenance::Default);
            SwitchingCase::NoSwitching
        }
    };

    let mu = r.f64("model.mu", 1.0)?;
    let q = r.f64("model.q", 1.0)?;
    let nbar_ref = r.f64("model.nbar_ref", 0.5)?;

    let dim_keys = [
        "dimensional.d_n",
        "dimensional.d_s",
        "dimensional.chi_1",
        "dimensional.alpha_0",
        "dimensional.eta",
        "dimensional.sigma",
    ];
    let dim_given: Vec<_> = dim_keys
        .iter()
        .map(|k| r.f64_opt(k))
        .collect::<Result<Vec<_>, _>>()?;
    let n_given = dim_given.iter().filter(|v| v.is_some()).count();
    let dimensional = if n_given == 0 {
        None
    } else if n_given < dim_keys.len() {
        let missing: Vec<&str> = dim_keys
            .iter()
            .zip(&dim_given)
            .filter(|(_, v)| v.is_none())
            .map(|(k, _)| *k)
            .collect();
        return Err(ConfigError::Invalid(format!(
            "incomplete dimensional block: missing {}",
            missing.join(", ")
        )));
    } else {
        let v: Vec<f64> = dim_given.into_iter().map(|x| x.unwrap().0).collect();
        Some(DimensionalParams {
            d_n: v[0],
            d_s: v[1],
            chi_1: v[2],
            alpha_0: v[3],
            eta: v[4],
            sigma: v[5],
        })
    };

    let d_user = r.f64_opt("model.d")?;
    let chi_user = r.f64_opt("model.chi")?;
    let (d, chi, scales) = if let Some(dim) = &dimensional {
        if d_user.is_some() || chi_user.is_some() {
            return Err(ConfigError::Invalid(
                "model.d / model.chi are derived from the dimensional block and may not also be set"
                    .into(),
            ));
        }
        let (d, chi, scales) = nondimensionalize(dim)
            .map_err(|e| ConfigError::Invalid(format!("dimensional block: {e}")))?;
        r.provenance.insert("model.d".into(), Provenance::Derived);
        r.provenance.insert("model.chi".into(), Provenance::Derived);
        (d, chi, Some(scales))
    } else {
        let d = match d_user {
            Some((v, _)) => v,
            None => {
                r.provenance.insert("model.d".into(), Provenance::Default);
                1.0
            }
        };
        let chi = match chi_user {
            Some((v, _)) => v,
            None => match mode {
                // the radial reference setting fixes χ = 8
                Mode::Radial => {
                    r.provenance.insert("model.chi".into(), Provenance::Default);
                    8.0
                }
                Mode::Sweep | Mode::EigenMap => {
                    r.provenance.insert("model.chi".into(), Provenance::Default);
                    0.0
                }
                _ => {
                    return Err(ConfigError::MissingKey {
                        key: "model.chi".into(),
                        reason: "the chemotactic sensitivity has no default for this mode".into(),
                    })
                }
            },
        };
        (d, chi, None)
    };

    let model = ModelSection { variant, case, mu, q, nbar_ref, d, chi };

    // grid
    let l_default = if mode == Mode::Radial { 10.0 } else { 40.0 };
    let l = r.f64("grid.l", l_default)?;
    if !(l > 0.0) {
        return Err(ConfigError::Invalid(format!("grid.l must be positive, got {l}")));
    }
    let dx_default = if mode == Mode::Sim2D { 0.5 } else { 0.1 };
    let n_user = r.usize_opt("grid.n")?;
    let dx = match (r.f64_opt("grid.dx")?, n_user) {
        (Some((dx, _)), _) => dx,
        (None, Some(n)) if n > 0 => {
            r.provenance.insert("grid.dx".into(), Provenance::Derived);
            l / n as f64
        }
        _ => {
            r.provenance.insert("grid.dx".into(), Provenance::Default);
            dx_default
        }
    };
    let n = match n_user {
        Some(n) => n,
        None => {
            r.provenance.insert("grid.n".into(), Provenance::Derived);
            (l / dx).round() as usize
        }
    };
    let dr = r.f64("grid.dr", 5e-3)?;
    let n_radial = (l / dr).round() as usize;

    // time
    let t_end_default = if mode == Mode::Radial { 1e4 } else { 500.0 };
    let t_end = r.f64("time.t_end", t_end_default)?;
    let tau = r.f64("time.tau", 1e-3)?;
    let dt_init = r.f64("time.dt_init", 1e-4)?;
    let dt_min = r.f64("time.dt_min", 1e-12)?;
    let dt_max = r.f64("time.dt_max", 1.0)?;
    let rel_tol = r.f64("time.rel_tol", 1e-6)?;
    let abs_tol = r.f64("time.abs_tol", 1e-9)?;
    let snapshot_every_default = if mode == Mode::Sim2D { 100.0 } else { 25.0 };
    let snapshot_every = r.f64("time.snapshot_every", snapshot_every_default)?;
    let snapshot_times = match r.raw.take("time.snapshot_times") {
        None => None,
        Some((text, line)) => {
            r.provenance.insert("time.snapshot_times".into(), Provenance::User);
            let list: Result<Vec<f64>, _> = text
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| ConfigError::BadValue {
                        line,
                        key: "time.snapshot_times".into(),
                        reason: format!("`{}` is not a number", s.trim()),
                    })
                })
                .collect();
            Some(list?)
        }
    };
    let time = TimeSection {
        t_end,
        tau,
        dt_init,
        dt_min,
        dt_max,
        rel_tol,
        abs_tol,
        snapshot_every,
        snapshot_times,
    };

    // initial condition
    let nbar_default = if variant == ModelVariant::MinimalKS { 1.0 } else { 0.5 };
    let ic = IcSection {
        nbar: r.f64("ic.nbar", nbar_default)?,
        amplitude: r.f64("ic.amplitude", 0.01)?,
        a_focus: r.f64("ic.a_focus", 1e4)?,
        seed: r.u64_opt("ic.seed")?,
    };
    if mode == Mode::Sim2D && ic.seed.is_none() {
        return Err(ConfigError::MissingKey {
            key: "ic.seed".into(),
            reason: "2D noise is seeded; reproducibility requires an explicit seed".into(),
        });
    }

    // analysis thresholds
    let defaults = AnalysisThresholds::default();
    let radial_defaults = RadialOptions::default();
    let analysis = AnalysisSection {
        pattern_threshold: r.f64("analysis.pattern_threshold", defaults.pattern_threshold)?,
        peak_ratio: r.f64("analysis.peak_ratio", defaults.peak_ratio)?,
        peak_merge_cells: r.usize("analysis.peak_merge_cells", defaults.peak_merge_cells)?,
        extinction_threshold: r.f64("analysis.extinction_threshold", defaults.extinction_threshold)?,
        osc_variance_fraction: r.f64("analysis.osc_variance_fraction", defaults.osc_variance_fraction)?,
        osc_envelope_decay: r.f64("analysis.osc_envelope_decay", defaults.osc_envelope_decay)?,
        osc_t0: r.f64("analysis.osc_t0", defaults.osc_t0)?,
        blowup_factor: r.f64("analysis.blowup_factor", radial_defaults.blowup_factor)?,
        convergence_window: r.f64("analysis.convergence_window", radial_defaults.convergence_window)?,
        convergence_tol: r.f64("analysis.convergence_tol", radial_defaults.convergence_tol)?,
    };

    // sweep
    let sweep_sim = match r.string_opt("sweep.sim") {
        None => {
            r.provenance.insert("sweep.sim".into(), Provenance::Default);
            Mode::Sim1D
        }
        Some((text, line)) => {
            let m = parse_mode(&text, line)?;
            if !matches!(m, Mode::Sim1D | Mode::Sim2D | Mode::Radial) {
                return Err(ConfigError::BadValue {
                    line,
                    key: "sweep.sim".into(),
                    reason: "sweep points must run sim1d|sim2d|radial".into(),
                });
            }
            m
        }
    };
    let sweep_cases = match r.string_opt("sweep.cases") {
        None => Vec::new(),
        Some((text, line)) => text
            .split(',')
            .map(|s| {
                parse_case(s.trim()).ok_or_else(|| ConfigError::BadValue {
                    line,
                    key: "sweep.cases".into(),
                    reason: format!("`{}` is not a switching case", s.trim()),
                })
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let sweep = SweepSection {
        sim: sweep_sim,
        cases: sweep_cases,
        chi: r.f64_list("sweep.chi")?,
        mu: r.f64_list("sweep.mu")?,
        workers: r.usize("sweep.workers", 4)?,
    };
    if mode == Mode::Sweep && sweep.chi.is_empty() && sweep.mu.is_empty() && sweep.cases.is_empty() {
        return Err(ConfigError::MissingKey {
            key: "sweep.chi".into(),
            reason: "sweep mode needs at least one of sweep.cases, sweep.chi, sweep.mu".into(),
        });
    }
    if !sweep.cases.is_empty() && sweep.chi.len() > 1 && sweep.cases.len() != sweep.chi.len() {
        return Err(ConfigError::Invalid(format!(
            "sweep.cases ({}) and sweep.chi ({}) must have equal length to zip",
            sweep.cases.len(),
            sweep.chi.len()
        )));
    }

    // eigenvalue map
    let mu_log = match r.string("eigenmap.mu_scale", "log").as_str() {
        "log" => true,
        "linear" => false,
        other => {
            return Err(ConfigError::Invalid(format!(
                "eigenmap.mu_scale `{other}` is not linear|log"
            )))
        }
    };
    let eigenmap = EigenMapSection {
        chi_min: r.f64("eigenmap.chi_min", 1.0)?,
        chi_max: r.f64("eigenmap.chi_max", 20.0)?,
        chi_steps: r.usize("eigenmap.chi_steps", 40)?,
        mu_min: r.f64("eigenmap.mu_min", 0.01)?,
        mu_max: r.f64("eigenmap.mu_max", 10.0)?,
        mu_steps: r.usize("eigenmap.mu_steps", 40)?,
        mu_log,
        l: r.f64("eigenmap.l", l)?,
    };

    let stability = StabilitySection {
        l: r.f64("stability.l", l)?,
        n0_mean: r.f64("stability.n0_mean", 0.5)?,
    };

    // anything left in the raw map was recognized but unused — impossible
    // by construction, but keep the check honest
    if let Some((key, (_, line))) = r.raw.values.iter().next() {
        return Err(ConfigError::UnknownKey { line: *line, key: key.clone() });
    }

    let cfg = ExperimentConfig {
        run_id,
        mode,
        output_dir,
        model,
        dimensional,
        scales,
        grid: GridSection { l, dx, n, dr, n_radial },
        time,
        ic,
        analysis,
        sweep,
        eigenmap,
        stability,
        provenance: r.provenance,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let m = &cfg.model;
    if m.variant == ModelVariant::TwoPhenotype && m.case != SwitchingCase::NoSwitching {
        SwitchingSpec::with_nbar_ref(m.case, m.mu, m.q, m.nbar_ref)
            .map_err(|e| ConfigError::Invalid(format!("model: {e}")))?;
    }
    ModelParams::new(m.d, m.chi, switching_spec(cfg), m.variant)
        .map_err(|e| ConfigError::Invalid(format!("model: {e}")))?;
    if !(cfg.ic.nbar > 0.0 && cfg.ic.nbar <= 1.0) {
        return Err(ConfigError::Invalid(format!(
            "ic.nbar must lie in (0, 1], got {}",
            cfg.ic.nbar
        )));
    }
    if !(cfg.ic.a_focus > 0.0) {
        return Err(ConfigError::Invalid(format!(
            "ic.a_focus must be positive, got {}",
            cfg.ic.a_focus
        )));
    }
    controller(cfg)
        .validate()
        .map_err(|e| ConfigError::Invalid(format!("time: {e}")))?;
    if cfg.mode == Mode::Sim2D && !(cfg.time.tau > 0.0) {
        return Err(ConfigError::Invalid(format!(
            "time.tau must be positive, got {}",
            cfg.time.tau
        )));
    }
    Ok(())
}

/// The switching spec described by a config.
pub fn switching_spec(cfg: &ExperimentConfig) -> SwitchingSpec {
    SwitchingSpec {
        case: cfg.model.case,
        mu: cfg.model.mu,
        q: cfg.model.q,
        nbar_ref: cfg.model.nbar_ref,
    }
}

/// The dimensionless model parameters described by a config.
pub fn model_params(cfg: &ExperimentConfig) -> ModelParams {
    ModelParams {
        d: cfg.model.d,
        chi: cfg.model.chi,
        switching: switching_spec(cfg),
        variant: cfg.model.variant,
    }
}

/// The time controller described by a config.
pub fn controller(cfg: &ExperimentConfig) -> TimeController {
    TimeController {
        dt_init: cfg.time.dt_init,
        dt_min: cfg.time.dt_min,
        dt_max: cfg.time.dt_max,
        rel_tol: cfg.time.rel_tol,
        abs_tol: cfg.time.abs_tol,
        t_end: cfg.time.t_end,
        snapshot_every: cfg.time.snapshot_every,
    }
}

/// The analysis thresholds described by a config.
pub fn thresholds(cfg: &ExperimentConfig) -> AnalysisThresholds {
    AnalysisThresholds {
        pattern_threshold: cfg.analysis.pattern_threshold,
        peak_ratio: cfg.analysis.peak_ratio,
        peak_merge_cells: cfg.analysis.peak_merge_cells,
        extinction_threshold: cfg.analysis.extinction_threshold,
        osc_variance_fraction: cfg.analysis.osc_variance_fraction,
        osc_envelope_decay: cfg.analysis.osc_envelope_decay,
        osc_t0: cfg.analysis.osc_t0,
    }
}

/// The radial solver options described by a config.
pub fn radial_options(cfg: &ExperimentConfig) -> RadialOptions {
    RadialOptions {
        blowup_factor: cfg.analysis.blowup_factor,
        convergence_window: cfg.analysis.convergence_window,
        convergence_tol: cfg.analysis.convergence_tol,
        probe_every: 1.0,
    }
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Emit the fully resolved config in canonical form; parsing the output
/// reproduces the same resolved values (round-trip property).
pub fn emit(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut push = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    push("run.id", cfg.run_id.clone());
    push("run.mode", cfg.mode.label().to_string());
    push("run.output_dir", cfg.output_dir.display().to_string());
    push(
        "model.variant",
        match cfg.model.variant {
            ModelVariant::TwoPhenotype => "two_phenotype".into(),
            ModelVariant::MinimalKS => "minimal_ks".into(),
        },
    );
    push("model.case", cfg.model.case.label().to_ascii_lowercase());
    push("model.mu", cfg.model.mu.to_string());
    push("model.q", cfg.model.q.to_string());
    push("model.nbar_ref", cfg.model.nbar_ref.to_string());
    if let Some(dim) = &cfg.dimensional {
        push("dimensional.d_n", dim.d_n.to_string());
        push("dimensional.d_s", dim.d_s.to_string());
        push("dimensional.chi_1", dim.chi_1.to_string());
        push("dimensional.alpha_0", dim.alpha_0.to_string());
        push("dimensional.eta", dim.eta.to_string());
        push("dimensional.sigma", dim.sigma.to_string());
    } else {
        push("model.d", cfg.model.d.to_string());
        push("model.chi", cfg.model.chi.to_string());
    }
    push("grid.l", cfg.grid.l.to_string());
    push("grid.dx", cfg.grid.dx.to_string());
    push("grid.n", cfg.grid.n.to_string());
    push("grid.dr", cfg.grid.dr.to_string());
    push("time.t_end", cfg.time.t_end.to_string());
    push("time.tau", cfg.time.tau.to_string());
    push("time.dt_init", cfg.time.dt_init.to_string());
    push("time.dt_min", cfg.time.dt_min.to_string());
    push("time.dt_max", cfg.time.dt_max.to_string());
    push("time.rel_tol", cfg.time.rel_tol.to_string());
    push("time.abs_tol", cfg.time.abs_tol.to_string());
    push("time.snapshot_every", cfg.time.snapshot_every.to_string());
    if let Some(times) = &cfg.time.snapshot_times {
        push("time.snapshot_times", fmt_list(times));
    }
    push("ic.nbar", cfg.ic.nbar.to_string());
    push("ic.amplitude", cfg.ic.amplitude.to_string());
    push("ic.a_focus", cfg.ic.a_focus.to_string());
    if let Some(seed) = cfg.ic.seed {
        push("ic.seed", seed.to_string());
    }
    push("analysis.pattern_threshold", cfg.analysis.pattern_threshold.to_string());
    push("analysis.peak_ratio", cfg.analysis.peak_ratio.to_string());
    push("analysis.peak_merge_cells", cfg.analysis.peak_merge_cells.to_string());
    push("analysis.extinction_threshold", cfg.analysis.extinction_threshold.to_string());
    push("analysis.osc_variance_fraction", cfg.analysis.osc_variance_fraction.to_string());
    push("analysis.osc_envelope_decay", cfg.analysis.osc_envelope_decay.to_string());
    push("analysis.osc_t0", cfg.analysis.osc_t0.to_string());
    push("analysis.blowup_factor", cfg.analysis.blowup_factor.to_string());
    push("analysis.convergence_window", cfg.analysis.convergence_window.to_string());
    push("analysis.convergence_tol", cfg.analysis.convergence_tol.to_string());
    push("sweep.sim", cfg.sweep.sim.label().to_string());
    if !cfg.sweep.cases.is_empty() {
        push(
            "sweep.cases",
            cfg.sweep
                .cases
                .iter()
                .map(|c| c.label().to_ascii_lowercase())
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    if !cfg.sweep.chi.is_empty() {
        push("sweep.chi", fmt_list(&cfg.sweep.chi));
    }
    if !cfg.sweep.mu.is_empty() {
        push("sweep.mu", fmt_list(&cfg.sweep.mu));
    }
    push("sweep.workers", cfg.sweep.workers.to_string());
    push("eigenmap.chi_min", cfg.eigenmap.chi_min.to_string());
    push("eigenmap.chi_max", cfg.eigenmap.chi_max.to_string());
    push("eigenmap.chi_steps", cfg.eigenmap.chi_steps.to_string());
    push("eigenmap.mu_min", cfg.eigenmap.mu_min.to_string());
    push("eigenmap.mu_max", cfg.eigenmap.mu_max.to_string());
    push("eigenmap.mu_steps", cfg.eigenmap.mu_steps.to_string());
    push("eigenmap.mu_scale", if cfg.eigenmap.mu_log { "log".into() } else { "linear".into() });
    push("eigenmap.l", cfg.eigenmap.l.to_string());
    push("stability.l", cfg.stability.l.to_string());
    push("stability.n0_mean", cfg.stability.n0_mean.to_string());
    out
}
