//! Gap along the coupling sweep and the probe-state preparation time
//! `T = ∫₀^{ḡc} dḡ / Δ(ḡ)`.
//!
//! Samples sit on `ḡ = ḡc sin(π t / 2)` with `t = i / n`, which clusters them
//! toward the critical end. Simpson's rule runs in `t`; the Jacobian
//! `ḡc (π/2) cos(π t / 2)` vanishes at `t = 1`, so a finite boundary gap
//! is all the endpoint needs.

use rayon::prelude::*;

use crate::ed::{converge_cutoff, CutoffPolicy};
use crate::error::{Error, Result};
use crate::model::{critical_coupling, ModelParams};
use crate::polaron::{optimize_closed, OptimizeOptions};
use crate::qfi::{qfi_ed, QfiPoint};

/// Reduced distance below `ḡc` at which [`ptps`] evaluates the QFI.
pub const FQ_OFFSET: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub gbar2: f64,
    pub gap: f64,
    pub cutoff_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapCurve {
    pub chi: f64,
    /// Critical coupling `sqrt(1 - χ²)`, the upper end of the sweep.
    pub endpoint: f64,
    /// Samples at `t = i / n`, `i = 0..n`, excluding the endpoint.
    pub samples: Vec<GapSample>,
    /// Gap used at `t = 1`.
    pub boundary_gap: f64,
}

/// `ḡ_i = ḡc sin(π i / (2 n))` for `i = 0..n`.
pub fn sample_couplings(endpoint: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| endpoint * (std::f64::consts::FRAC_PI_2 * i as f64 / n as f64).sin())
        .collect()
}

impl GapCurve {
    /// Curve from a gap function, mostly for testing the quadrature.
    pub fn from_fn(chi: f64, n: usize, gap: impl Fn(f64) -> f64) -> Result<Self> {
        let endpoint = critical_coupling(chi)?;
        check_count(n)?;
        Ok(Self {
            chi,
            endpoint,
            samples: sample_couplings(endpoint, n)
                .into_iter()
                .map(|g| GapSample {
                    gbar2: g,
                    gap: gap(g),
                    cutoff_used: 0,
                    converged: true,
                })
                .collect(),
            boundary_gap: gap(endpoint),
        })
    }

    pub fn gap_min(&self) -> f64 {
        self.samples.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min)
    }

    pub fn all_converged(&self) -> bool {
        self.samples.iter().all(|s| s.converged)
    }
}

fn check_count(n: usize) -> Result<()> {
    if n < 32 || !n.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "gap curve needs an even sample count >= 32, got {n}"
        )));
    }
    Ok(())
}

/// ED gaps `E1 - E0` along `χ`, each at a certified cutoff.
///
/// `template` supplies ω, Ω and χ_z; the boundary gap at `ḡc` is the polaron
/// floor `2 |S_Ω + S_κ|`.
pub fn gap_curve(template: &ModelParams, chi: f64, n_samples: usize, policy: &CutoffPolicy) -> Result<GapCurve> {
    check_count(n_samples)?;
    let endpoint = critical_coupling(chi)?;
    if !(endpoint > 0.0) {
        return Err(Error::domain("gap curve needs |chi| < 1"));
    }
    let base = template.with_chi(chi);
    let samples = sample_couplings(endpoint, n_samples)
        .into_par_iter()
        .map(|g| {
            let st = converge_cutoff(&base.with_gbar2(g), policy)?;
            Ok(GapSample {
                gbar2: g,
                gap: st.gap,
                cutoff_used: st.cutoff_used,
                converged: st.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let floor = optimize_closed(&base.with_gbar2(endpoint), &OptimizeOptions::default())?.gap_floor();
    Ok(GapCurve {
        chi,
        endpoint,
        samples,
        boundary_gap: floor,
    })
}

fn simpson(curve: &GapCurve, stride: usize) -> Result<f64> {
    let n = curve.samples.len();
    check_count(n)?;
    let m = n / stride;
    let mut ys = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let gap = if i == m {
            curve.boundary_gap
        } else {
            curve.samples[i * stride].gap
        };
        if !(gap > 0.0) {
            return Err(Error::Numeric {
                what: format!("non-positive gap {gap} in preparation-time integrand"),
                residual: gap,
            });
        }
        let t = i as f64 / m as f64;
        ys.push(curve.endpoint * std::f64::consts::FRAC_PI_2 * (std::f64::consts::FRAC_PI_2 * t).cos() / gap);
    }
    let h = 1.0 / m as f64;
    let inner: f64 = ys[1..m]
        .iter()
        .enumerate()
        .map(|(k, y)| if k % 2 == 0 { 4.0 * y } else { 2.0 * y })
        .sum();
    Ok(h / 3.0 * (ys[0] + inner + ys[m]))
}

/// Composite Simpson estimate of `T` on the curve's grid.
pub fn preparation_time(curve: &GapCurve) -> Result<f64> {
    simpson(curve, 1)
}

/// `F_Q / T`, in units of ω³ when `F_Q` is per ω² and `T` per 1/ω.
pub fn practicability(t: f64, f_q: f64) -> Result<f64> {
    if !(t > 0.0) || t.is_nan() {
        return Err(Error::domain(format!("preparation time must be positive, got {t}")));
    }
    if !(f_q >= 0.0 && f_q.is_finite()) {
        return Err(Error::domain(format!("QFI must be finite and non-negative, got {f_q}")));
    }
    Ok(f_q / t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtpsResult {
    pub chi: f64,
    pub splitting: f64,
    pub t: f64,
    /// `T` from every other sample; `|t - t_coarse| / t` gauges the quadrature.
    pub t_coarse: f64,
    pub gap_min: f64,
    pub boundary_gap: f64,
    pub fq_at_crit: f64,
    pub ratio: f64,
    pub converged: bool,
    pub curve: GapCurve,
    pub qfi: QfiPoint,
}

impl PtpsResult {
    pub fn refinement_change(&self) -> f64 {
        ((self.t - self.t_coarse) / self.t).abs()
    }
}

/// Gap curve, preparation time and `F_Q / T` with the QFI taken at
/// reduced distance [`FQ_OFFSET`] below `ḡc`.
pub fn ptps(template: &ModelParams, chi: f64, n_samples: usize, policy: &CutoffPolicy) -> Result<PtpsResult> {
    if !n_samples.is_multiple_of(4) {
        return Err(Error::domain(format!(
            "sample count must be a multiple of 4 so the coarse estimate is defined, got {n_samples}"
        )));
    }
    let curve = gap_curve(template, chi, n_samples, policy)?;
    let t = preparation_time(&curve)?;
    let t_coarse = simpson(&curve, 2)?;
    let qfi = qfi_ed(
        &template.with_chi(chi).with_gbar2(curve.endpoint - FQ_OFFSET),
        None,
        policy,
    )?;
    Ok(PtpsResult {
        chi,
        splitting: template.splitting,
        t,
        t_coarse,
        gap_min: curve.gap_min(),
        boundary_gap: curve.boundary_gap,
        fq_at_crit: qfi.f_q,
        ratio: practicability(t, qfi.f_q)?,
        converged: curve.all_converged() && qfi.converged,
        curve,
        qfi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gap() {
        let c = GapCurve::from_fn(0.6, 32, |_| 0.25).unwrap();
        assert!((preparation_time(&c).unwrap() - 0.8 / 0.25).abs() < 1e-6);
    }

    #[test]
    fn linear_gap_matches_closed_form() {
        let gc: f64 = (1.0f64 - 0.16).sqrt();
        let exact = (1.0 + gc).ln() / 0.5;
        let c = GapCurve::from_fn(0.4, 256, |g| 0.5 * (1.0 + g)).unwrap();
        assert!((preparation_time(&c).unwrap() - exact).abs() < 1e-8);
    }

    #[test]
    fn bad_inputs() {
        assert!(GapCurve::from_fn(0.0, 31, |_| 1.0).is_err());
        assert!(GapCurve::from_fn(0.0, 30, |_| 1.0).is_err());
        let c = GapCurve::from_fn(0.0, 32, |g| 0.5 - g).unwrap();
        assert!(preparation_time(&c).is_err());
        assert!(practicability(f64::INFINITY, 1.0).unwrap() == 0.0);
        assert!(practicability(0.0, 1.0).is_err());
        assert_eq!(
            practicability(2.0, 6.0).unwrap() * 2.0,
            practicability(2.0, 12.0).unwrap()
        );
    }

    #[test]
    fn decoupled_gap() {
        for split in [0.4, 1.0, 1.7] {
            let p = ModelParams::new(1.0, split, 0.0, 1.0, 0.0).unwrap();
            let st = converge_cutoff(&p, &CutoffPolicy::default()).unwrap();
            assert!((st.gap - split.min(1.0)).abs() < 1e-9);
        }
    }
}
