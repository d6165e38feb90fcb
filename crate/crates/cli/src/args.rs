//! Command-line surface and its mapping onto [`SweepSpec`].

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsm_core::observables::SpinBasis;
use rsm_core::sweep::{Axis, SweepKind, SweepSpec, Tolerances, DEFAULT_OMEGA_TILDE_C};
use rsm_core::Result;

const UNITS: &str = "Units: energies (omega, Omega, gaps, E0) are in units of the mode frequency \
omega, which defaults to 1. Couplings are reduced, gbar2 = g2 / g_T with g_T = omega / (2 (1 + chi_z)); \
QFI is per omega^2 and preparation times are per 1/omega.

Ranges use min:max:count with an optional @cosine (clustered toward max) or @logdist suffix. \
A --config file holds key = value lines named like the long flags; flags on the command line \
win over the file. --workers falls back to RSM_WORKERS, then to all cores.

Exit status: 0 success, 1 invalid input, 2 numerical or I/O failure.";

#[derive(Parser, Debug)]
#[command(
    name = "rsm",
    version,
    about = "Two-photon Rabi-Stark model: exact diagonalization, QFI, polaron picture, Wigner squeezing and preparation time",
    after_long_help = UNITS
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Ground and first excited energy, spin and quadrature expectations
    Observables(Common),
    /// Exact-diagonalization QFI with the analytic near-critical expansions
    Qfi(Common),
    /// QFI over a (gbar2, chi) grid; needs ranges for both --g2bar and --chi
    Qfi3d(Common),
    /// Polaron solution and the four-part QFI decomposition beside the ED QFI
    Polaron(Common),
    /// Real-space spin-component wavefunctions of the ground state
    Wavefunction(WaveArgs),
    /// Wigner functions of the spin components and their squeezing
    Wigner(WignerArgs),
    /// Gap along the coupling sweep, preparation time T and F_Q / T
    Ptps(PtpsArgs),
    /// Critical-exponent fit of the ED QFI over a distance window
    Exponent(ExponentArgs),
    /// Stability, masses and potential frequencies over the (chi, gbar2) plane
    PhaseDiagram(Common),
    /// Runs the built-in invariant checks
    Selftest,
}

/// A single value or a `min:max:count[@spacing]` range.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueOrRange {
    Value(f64),
    Range(String),
}

impl FromStr for ValueOrRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Ok(v) = s.parse::<f64>() {
            return Ok(ValueOrRange::Value(v));
        }
        Axis::parse("value", s).map_err(|e| e.to_string())?;
        Ok(ValueOrRange::Range(s.to_string()))
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Mode frequency omega, the energy unit
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Qubit splitting Omega (instead of --omega-tilde-c)
    #[arg(long = "Omega", conflicts_with = "omega_tilde_c")]
    pub splitting: Option<f64>,
    /// Flip strength at the critical point; sets Omega = chi omega + value / sqrt(1 - chi^2) per point [default: 0.2]
    #[arg(long)]
    pub omega_tilde_c: Option<f64>,
    /// Stark coupling chi: value or range
    #[arg(long, allow_hyphen_values = true)]
    pub chi: Option<ValueOrRange>,
    /// Form parameter chi_z in [0, 1]
    #[arg(long, default_value_t = 1.0)]
    pub chi_z: f64,
    /// Reduced coupling gbar2 = g2 / g_T: value or range
    #[arg(long, conflicts_with = "distance")]
    pub g2bar: Option<ValueOrRange>,
    /// Reduced distance sqrt(1 - chi^2) - gbar2 below the critical point: value or range
    #[arg(long)]
    pub distance: Option<ValueOrRange>,
    /// Output CSV path [default: <kind>_<spec hash>.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key = value file with defaults for these flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads
    #[arg(long, env = "RSM_WORKERS")]
    pub workers: Option<usize>,
    /// Cutoff convergence: tolerance on |E0(N) - E0(2N)|
    #[arg(long)]
    pub e_tol: Option<f64>,
    /// Cutoff convergence: ground-state weight allowed in the top 10% of Fock levels
    #[arg(long)]
    pub tail_tol: Option<f64>,
    /// First Fock cutoff tried
    #[arg(long)]
    pub n_start: Option<usize>,
    /// Largest Fock cutoff tried
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Finite-difference step in g2 (energy units) [default: 1e-4 g_T, 1e-5 g_T near criticality]
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Rotated,
    Unrotated,
}

#[derive(Args, Debug, Clone)]
pub struct WaveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Spin basis of the components
    #[arg(long, value_enum, default_value_t = BasisArg::Rotated)]
    pub basis: BasisArg,
    /// Position grid points (pins the grid; otherwise it widens until the tails fit)
    #[arg(long)]
    pub n_x: Option<usize>,
    /// Position grid half-width
    #[arg(long)]
    pub x_max: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct WignerArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    /// Momentum grid points [default: 201]
    #[arg(long)]
    pub n_p: Option<usize>,
    /// Momentum grid half-width [default: 6 sqrt(max(<p^2>, 1))]
    #[arg(long)]
    pub p_max: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct PtpsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Gap samples per curve, a multiple of 4
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone)]
pub struct ExponentArgs {
    #[command(flatten)]
    pub common: Common,
    /// Distance window min:max for the fit
    #[arg(long, default_value = "1e-2:1e-1")]
    pub window: String,
    /// QFI points in the window, log-spaced
    #[arg(long, default_value_t = 12)]
    pub points: usize,
}

fn put(spec: &mut SweepSpec, key: &str, v: &Option<ValueOrRange>) -> Result<()> {
    match v {
        None => {}
        Some(ValueOrRange::Value(x)) => {
            spec.fixed.insert(key.into(), *x);
        }
        Some(ValueOrRange::Range(r)) => {
            // the coupling is set first and so becomes the inner axis
            let axis = Some(Axis::parse(key, r)?);
            if spec.axis1.is_some() {
                spec.axis2 = axis;
            } else {
                spec.axis1 = axis;
            }
        }
    }
    Ok(())
}

impl Common {
    pub fn spec(&self, kind: SweepKind) -> Result<SweepSpec> {
        let mut spec = SweepSpec::new(kind).with("omega", self.omega).with("chi_z", self.chi_z);
        match self.splitting {
            Some(s) => spec.fixed.insert("Omega".into(), s),
            None => spec.fixed.insert(
                "omega_tilde_c".into(),
                self.omega_tilde_c.unwrap_or(DEFAULT_OMEGA_TILDE_C),
            ),
        };
        put(&mut spec, "gbar2", &self.g2bar)?;
        put(&mut spec, "distance", &self.distance)?;
        put(&mut spec, "chi", &self.chi)?;
        let d = Tolerances::default();
        spec.tolerances = Tolerances {
            e_tol: self.e_tol.unwrap_or(d.e_tol),
            tail_tol: self.tail_tol.unwrap_or(d.tail_tol),
            n_start: self.n_start.unwrap_or(d.n_start),
            n_max: self.n_max.unwrap_or(d.n_max),
            delta: self.delta,
        };
        spec.output_path = self.out.clone();
        spec.workers = self.workers;
        Ok(spec)
    }
}

impl WaveArgs {
    pub fn spec(&self, kind: SweepKind) -> Result<SweepSpec> {
        let mut spec = self.common.spec(kind)?;
        spec.basis = match self.basis {
            BasisArg::Rotated => SpinBasis::Rotated,
            BasisArg::Unrotated => SpinBasis::Unrotated,
        };
        if let Some(n) = self.n_x {
            spec.fixed.insert("n_x".into(), n as f64);
        }
        if let Some(x) = self.x_max {
            spec.fixed.insert("x_max".into(), x);
        }
        Ok(spec)
    }
}

impl WignerArgs {
    pub fn spec(&self) -> Result<SweepSpec> {
        let mut spec = self.wave.spec(SweepKind::Wigner)?;
        if let Some(n) = self.n_p {
            spec.fixed.insert("n_p".into(), n as f64);
        }
        if let Some(p) = self.p_max {
            spec.fixed.insert("p_max".into(), p);
        }
        Ok(spec)
    }
}

impl PtpsArgs {
    pub fn spec(&self) -> Result<SweepSpec> {
        Ok(self
            .common
            .spec(SweepKind::GapPtps)?
            .with("n_samples", self.samples as f64))
    }
}

impl ExponentArgs {
    pub fn spec(&self) -> Result<SweepSpec> {
        let bad =
            || rsm_core::Error::Validation(vec![format!("--window '{}' is not of the form min:max", self.window)]);
        let (lo, hi) = self.window.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        Ok(self
            .common
            .spec(SweepKind::ExponentFit)?
            .with("window_min", lo)
            .with("window_max", hi)
            .with("n_points", self.points as f64))
    }
}
