//! Parameter sweeps and their CSV output.
//!
//! A [`SweepSpec`] names a pipeline ([`SweepKind`]), fixed parameters and up
//! to two axes. [`run_sweep`] evaluates every grid point on a rayon pool and
//! assembles rows in axis order (axis2 outer, axis1 inner), so the output is
//! identical for any worker count. Failed points become rows with NaN values
//! and a nonzero `flag` (see [`flags`]).

mod kinds;
mod schema;
mod table;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::ed::CutoffPolicy;
use crate::error::{Error, Result};
use crate::observables::SpinBasis;

pub use schema::{columns, flags, summary_columns, unit};
pub use table::{parse_table, read_table, write_table, ResultTable, SCHEMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepKind {
    Observables,
    Qfi,
    Qfi3d,
    PolaronDecomposition,
    Wavefunction,
    Wigner,
    GapPtps,
    ExponentFit,
    PhaseDiagram,
}

impl SweepKind {
    pub const ALL: [SweepKind; 9] = [
        SweepKind::Observables,
        SweepKind::Qfi,
        SweepKind::Qfi3d,
        SweepKind::PolaronDecomposition,
        SweepKind::Wavefunction,
        SweepKind::Wigner,
        SweepKind::GapPtps,
        SweepKind::ExponentFit,
        SweepKind::PhaseDiagram,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Observables => "observables",
            SweepKind::Qfi => "qfi",
            SweepKind::Qfi3d => "qfi-3d",
            SweepKind::PolaronDecomposition => "polaron-decomposition",
            SweepKind::Wavefunction => "wavefunction",
            SweepKind::Wigner => "wigner",
            SweepKind::GapPtps => "gap-ptps",
            SweepKind::ExponentFit => "exponent-fit",
            SweepKind::PhaseDiagram => "phase-diagram",
        }
    }

    /// Whether the pipeline runs exact diagonalization (and so needs |χ| < 1).
    pub fn uses_ed(self) -> bool {
        self != SweepKind::PhaseDiagram
    }

    /// Whether the coupling is swept internally rather than given as an axis or fixed value.
    fn owns_coupling(self) -> bool {
        matches!(self, SweepKind::GapPtps | SweepKind::ExponentFit)
    }

    fn settings(self) -> &'static [&'static str] {
        match self {
            SweepKind::GapPtps => &["n_samples"],
            SweepKind::ExponentFit => &["n_points", "window_min", "window_max"],
            SweepKind::Wavefunction => &["n_x", "x_max"],
            SweepKind::Wigner => &["n_x", "x_max", "n_p", "p_max"],
            _ => &[],
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Validation(vec![format!("unknown sweep kind '{s}'")]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Linear,
    /// `min + (max - min) sin(π i / (2 (n - 1)))`, clustered toward `max`.
    Cosine,
    /// Logarithmically uniform; meant for the `distance` axis.
    LogDistance,
}

impl Spacing {
    pub fn as_str(self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Cosine => "cosine",
            Spacing::LogDistance => "logdist",
        }
    }
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "cosine" | "cosine-clustered" => Ok(Spacing::Cosine),
            "logdist" | "log-distance" => Ok(Spacing::LogDistance),
            _ => Err(Error::Validation(vec![format!(
                "unknown spacing '{s}' (expected linear, cosine or logdist)"
            )])),
        }
    }
}

/// Names a sweep axis may take.
pub const AXIS_NAMES: [&str; 6] = ["gbar2", "distance", "chi", "Omega", "omega_tilde_c", "chi_z"];

/// Physical parameters accepted in [`SweepSpec::fixed`].
pub const PARAM_NAMES: [&str; 7] = ["omega", "Omega", "omega_tilde_c", "chi", "chi_z", "gbar2", "distance"];

/// Ω̃_c used when neither `Omega` nor `omega_tilde_c` is given.
pub const DEFAULT_OMEGA_TILDE_C: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, count: usize, spacing: Spacing) -> Self {
        Self {
            name: name.into(),
            min,
            max,
            count,
            spacing,
        }
    }

    /// Parses `min:max:count` with an optional `@cosine` / `@logdist` suffix.
    pub fn parse(name: &str, range: &str) -> Result<Self> {
        let bad = || {
            Error::Validation(vec![format!(
                "axis {name}: '{range}' is not of the form min:max:count[@cosine|@logdist]"
            )])
        };
        let (body, spacing) = match range.split_once('@') {
            Some((b, s)) => (b, s.parse()?),
            None => (range, Spacing::Linear),
        };
        let parts: Vec<&str> = body.split(':').collect();
        let [min, max, count] = parts[..] else {
            return Err(bad());
        };
        Ok(Self::new(
            name,
            min.trim().parse().map_err(|_| bad())?,
            max.trim().parse().map_err(|_| bad())?,
            count.trim().parse().map_err(|_| bad())?,
            spacing,
        ))
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        if n < 2 {
            return vec![self.min; n];
        }
        (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * u,
                    Spacing::Cosine => self.min + (self.max - self.min) * (std::f64::consts::FRAC_PI_2 * u).sin(),
                    Spacing::LogDistance => self.min * (self.max / self.min).powf(u),
                }
            })
            .collect()
    }

    fn violations(&self, out: &mut Vec<String>) {
        let n = &self.name;
        if !AXIS_NAMES.contains(&n.as_str()) {
            out.push(format!("axis name '{n}' is not one of {}", AXIS_NAMES.join(", ")));
        }
        if self.count < 2 {
            out.push(format!("axis {n}: count must be at least 2, got {}", self.count));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            out.push(format!("axis {n}: bounds must be finite"));
        } else if !(self.min < self.max) {
            out.push(format!("axis {n}: min {} must be below max {}", self.min, self.max));
        }
        if self.spacing == Spacing::LogDistance && !(self.min > 0.0) {
            out.push(format!("axis {n}: logdist spacing needs min > 0"));
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:?}:{:?}:{}@{}",
            self.name,
            self.min,
            self.max,
            self.count,
            self.spacing.as_str()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub e_tol: f64,
    pub tail_tol: f64,
    pub n_start: usize,
    pub n_max: usize,
    /// Absolute finite-difference step in g₂; `None` picks the default per point.
    pub delta: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        let p = CutoffPolicy::default();
        Self {
            e_tol: p.e_tol,
            tail_tol: p.tail_tol,
            n_start: p.n_start,
            n_max: p.n_max,
            delta: None,
        }
    }
}

impl Tolerances {
    pub fn policy(&self) -> CutoffPolicy {
        CutoffPolicy {
            e_tol: self.e_tol,
            tail_tol: self.tail_tol,
            n_start: self.n_start,
            n_max: self.n_max,
        }
    }

    fn pairs(&self) -> Vec<(String, String)> {
        vec![
            ("tol.e_tol".into(), format!("{:?}", self.e_tol)),
            ("tol.tail_tol".into(), format!("{:?}", self.tail_tol)),
            ("tol.n_start".into(), self.n_start.to_string()),
            ("tol.n_max".into(), self.n_max.to_string()),
            (
                "tol.delta".into(),
                self.delta.map_or_else(|| "auto".into(), |d| format!("{d:?}")),
            ),
        ]
    }
}

/// Everything needed to reproduce one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// Physical parameters from [`PARAM_NAMES`] and kind-specific settings.
    pub fixed: BTreeMap<String, f64>,
    pub axis1: Option<Axis>,
    pub axis2: Option<Axis>,
    /// Spin basis of wavefunction and Wigner components.
    pub basis: SpinBasis,
    pub tolerances: Tolerances,
    /// Not hashed.
    pub output_path: Option<PathBuf>,
    /// Thread count; `None` uses all available cores. Not hashed.
    pub workers: Option<usize>,
}

impl SweepSpec {
    pub fn new(kind: SweepKind) -> Self {
        Self {
            kind,
            fixed: BTreeMap::new(),
            axis1: None,
            axis2: None,
            basis: SpinBasis::default(),
            tolerances: Tolerances::default(),
            output_path: None,
            workers: None,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.fixed.insert(key.into(), value);
        self
    }

    pub fn with_axis1(mut self, axis: Axis) -> Self {
        self.axis1 = Some(axis);
        self
    }

    pub fn with_axis2(mut self, axis: Axis) -> Self {
        self.axis2 = Some(axis);
        self
    }

    fn axes(&self) -> impl Iterator<Item = &Axis> {
        self.axis1.iter().chain(&self.axis2)
    }

    fn axis(&self, name: &str) -> Option<&Axis> {
        self.axes().find(|a| a.name == name)
    }

    fn has(&self, name: &str) -> bool {
        self.fixed.contains_key(name) || self.axis(name).is_some()
    }

    /// Smallest and largest value a parameter takes, if it is set at all.
    fn range(&self, name: &str) -> Option<(f64, f64)> {
        if let Some(a) = self.axis(name) {
            return Some((a.min.min(a.max), a.max.max(a.min)));
        }
        self.fixed.get(name).map(|&v| (v, v))
    }

    pub(crate) fn setting(&self, name: &str, default: f64) -> f64 {
        self.fixed.get(name).copied().unwrap_or(default)
    }

    /// Checks the sweep settings and lists every violation at once.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        let kind = self.kind;
        for key in self.fixed.keys() {
            if !PARAM_NAMES.contains(&key.as_str()) && !kind.settings().contains(&key.as_str()) {
                v.push(format!("unknown parameter '{key}' for kind {kind}"));
            }
        }
        for (key, val) in &self.fixed {
            if !val.is_finite() {
                v.push(format!("{key} must be finite, got {val}"));
            }
        }
        for a in self.axes() {
            a.violations(&mut v);
            if self.fixed.contains_key(&a.name) {
                v.push(format!("'{}' is both fixed and swept", a.name));
            }
        }
        if let (Some(a), Some(b)) = (&self.axis1, &self.axis2) {
            if a.name == b.name {
                v.push(format!("both axes sweep '{}'", a.name));
            }
        }

        if let Some((lo, _)) = self.range("omega") {
            if !(lo > 0.0) {
                v.push(format!("omega must be positive, got {lo}"));
            }
        }
        if let Some((lo, hi)) = self.range("chi_z") {
            if !(lo >= 0.0 && hi <= 1.0) {
                v.push(format!("chi_z must lie in [0, 1], got range [{lo}, {hi}]"));
            }
        }
        if let Some((lo, _)) = self.range("gbar2") {
            if lo < 0.0 {
                v.push(format!("gbar2 must be non-negative, got {lo}"));
            }
        }
        if let Some((lo, _)) = self.range("distance") {
            if !(lo > 0.0) {
                v.push(format!("distance must be positive, got {lo}"));
            }
        }
        if kind.uses_ed() {
            if let Some((lo, hi)) = self.range("chi") {
                let worst = lo.abs().max(hi.abs());
                if !(worst < 1.0) {
                    v.push(format!(
                        "chi = {worst} lies outside the stability disk gbar2^2 + chi^2 < 1 (|chi| must be below 1)"
                    ));
                }
            }
        }
        if self.has("gbar2") && self.has("distance") {
            v.push("give either gbar2 or distance, not both".into());
        }
        if self.has("Omega") && self.has("omega_tilde_c") {
            v.push("give either Omega or omega_tilde_c, not both".into());
        }

        let coupled = self.has("gbar2") || self.has("distance");
        if kind.owns_coupling() && coupled {
            v.push(format!("kind {kind} sweeps the coupling itself; drop gbar2/distance"));
        }
        if !kind.owns_coupling() && !coupled {
            v.push(format!("kind {kind} needs gbar2 or distance (fixed or as an axis)"));
        }
        if matches!(kind, SweepKind::Qfi3d | SweepKind::PhaseDiagram) {
            let names: Vec<&str> = self.axes().map(|a| a.name.as_str()).collect();
            let has_coupling_axis = names.contains(&"gbar2") || names.contains(&"distance");
            if !(names.contains(&"chi") && has_coupling_axis) {
                v.push(format!("kind {kind} needs a chi axis and a gbar2 (or distance) axis"));
            }
        }

        match kind {
            SweepKind::GapPtps => {
                let n = self.setting("n_samples", kinds::DEFAULT_PTPS_SAMPLES as f64);
                if !(n >= 32.0 && n.fract() == 0.0 && n % 4.0 == 0.0) {
                    v.push(format!("n_samples must be a multiple of 4 and at least 32, got {n}"));
                }
            }
            SweepKind::ExponentFit => {
                let n = self.setting("n_points", kinds::DEFAULT_FIT_POINTS as f64);
                if !(n >= 8.0 && n.fract() == 0.0) {
                    v.push(format!("n_points must be an integer >= 8, got {n}"));
                }
                let (lo, hi) = self.window();
                if !(lo > 0.0 && lo < hi) {
                    v.push(format!("fit window must satisfy 0 < min < max, got [{lo}, {hi}]"));
                }
            }
            SweepKind::Wavefunction | SweepKind::Wigner => {
                for key in ["n_x", "n_p"] {
                    if let Some(&n) = self.fixed.get(key) {
                        if !(n >= 64.0 && n.fract() == 0.0) {
                            v.push(format!("{key} must be an integer >= 64, got {n}"));
                        }
                    }
                }
                for key in ["x_max", "p_max"] {
                    if let Some(&x) = self.fixed.get(key) {
                        if !(x > 0.0) {
                            v.push(format!("{key} must be positive, got {x}"));
                        }
                    }
                }
            }
            _ => {}
        }

        let t = &self.tolerances;
        if let Err(e) = t.policy().validate() {
            v.push(e.to_string());
        }
        if let Some(d) = t.delta {
            if !(d > 0.0 && d.is_finite()) {
                v.push(format!("delta must be positive, got {d}"));
            }
        }
        if self.workers == Some(0) {
            v.push("workers must be at least 1".into());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    pub(crate) fn window(&self) -> (f64, f64) {
        (self.setting("window_min", 1e-2), self.setting("window_max", 1e-1))
    }

    /// Canonical `key = value` echo of everything that affects the numbers.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![("spec.kind".to_string(), self.kind.as_str().to_string())];
        for (k, v) in &self.fixed {
            out.push((format!("spec.fixed.{k}"), format!("{v:?}")));
        }
        for (label, axis) in [("spec.axis1", &self.axis1), ("spec.axis2", &self.axis2)] {
            if let Some(a) = axis {
                out.push((label.into(), a.to_string()));
            }
        }
        out.push(("spec.basis".into(), self.basis.as_str().into()));
        out.extend(
            self.tolerances
                .pairs()
                .into_iter()
                .map(|(k, v)| (format!("spec.{k}"), v)),
        );
        out
    }

    /// First 16 hex digits of the SHA-256 of [`echo`](Self::echo) and the crate version.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(crate::VERSION.as_bytes());
        for (k, v) in self.echo() {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// `<kind>_<hash>.csv`.
    pub fn default_file_name(&self) -> String {
        format!("{}_{}.csv", self.kind.as_str(), self.hash())
    }

    /// Where [`SweepOutput::write`] should put the main table.
    pub fn resolved_output(&self) -> PathBuf {
        self.output_path
            .clone()
            .unwrap_or_else(|| PathBuf::from(self.default_file_name()))
    }
}

/// `<stem>_summary.csv` next to `path`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    path.with_file_name(format!("{stem}_summary.csv"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub main: ResultTable,
    pub summary: Option<ResultTable>,
}

impl SweepOutput {
    /// Writes the main table to `path` and the summary beside it.
    pub fn write(&self, path: &Path) -> Result<Vec<PathBuf>> {
        let mut written = vec![path.to_path_buf()];
        write_table(&self.main, path)?;
        if let Some(s) = &self.summary {
            let sp = summary_path(path);
            write_table(s, &sp)?;
            written.push(sp);
        }
        Ok(written)
    }
}

/// Evaluates the sweep. Nothing is written; see [`SweepOutput::write`].
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    pool.install(|| kinds::run(spec))
}
