//! Quantum Fisher information with respect to `g₂`.
//!
//! For a real ground state the QFI is `4 ⟨ψ'|ψ'⟩`. [`qfi_ed`] estimates it
//! by a central difference of exact ground states; [`qfi_major_orders`] and
//! [`qfi_leading`] are the analytic near-critical expansions.

use crate::ed::{converge_cutoff, solve_at, CutoffPolicy, SpectralResult};
use crate::error::{Error, Result};
use crate::model::{critical_coupling, derive, require_stable, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiPoint {
    pub g2: f64,
    pub gbar2: f64,
    pub chi: f64,
    /// QFI per unit energy squared.
    pub f_q: f64,
    pub delta_used: f64,
    pub cutoff_used: usize,
    /// Both stencil states passed the cutoff certification.
    pub converged: bool,
    /// The raw estimate fell below -1e-12 and was clamped to zero.
    pub clamped: bool,
}

impl QfiPoint {
    /// Reduced distance `sqrt(1 - χ²) - gbar2` to the critical point.
    pub fn distance(&self) -> f64 {
        (1.0 - self.chi * self.chi).sqrt() - self.gbar2
    }
}

/// `1e-4 g_T`, or `1e-5 g_T` within reduced distance 0.02 of the critical point.
pub fn default_delta(params: &ModelParams) -> f64 {
    let d = params.distance_to_critical().unwrap_or(f64::INFINITY);
    let factor = if d < 0.02 { 1e-5 } else { 1e-4 };
    factor * params.g_t()
}

/// Ground state at possibly negative `g₂`.
///
/// `σx H(g₂) σx = H(-g₂)` because σx commutes with every other term, so the
/// state at `-g₂` is the one at `|g₂|` with its spin blocks swapped.
fn ground_at(params: &ModelParams, g2: f64, cutoff: Option<usize>, policy: &CutoffPolicy) -> Result<SpectralResult> {
    let p = params.with_g2(g2.abs());
    let mut st = match cutoff {
        Some(n) => solve_at(&p, n)?,
        None => converge_cutoff(&p, policy)?,
    };
    if g2 < 0.0 {
        let m = st.cutoff_used + 1;
        st.ground.rotate_left(m);
    }
    Ok(st)
}

/// `4 (⟨ψ'|ψ'⟩ - ⟨ψ'|ψ̄⟩²)` from the two stencil states, with `ψ̄` the
/// normalized midpoint. Returns the estimate and whether it was clamped.
pub fn qfi_from_pair(minus: &[f64], plus: &[f64], delta: f64) -> (f64, bool) {
    let overlap: f64 = minus.iter().zip(plus).map(|(a, b)| a * b).sum();
    let s = if overlap < 0.0 { -1.0 } else { 1.0 };
    let mut dd = 0.0;
    let mut dm = 0.0;
    let mut mm = 0.0;
    for (a, b) in minus.iter().zip(plus) {
        let a = s * a;
        let d = (b - a) / (2.0 * delta);
        let m = 0.5 * (a + b);
        dd += d * d;
        dm += d * m;
        mm += m * m;
    }
    let f = 4.0 * (dd - dm * dm / mm);
    if f < 0.0 {
        (0.0, f < -1e-12)
    } else {
        (f, false)
    }
}

/// QFI from exact ground states at `g₂ ± δ` on a common cutoff.
///
/// `delta = None` uses [`default_delta`]. Both stencil points must be inside
/// the stability disk; negative `g₂ - δ` is handled through the σx mirror.
pub fn qfi_ed(params: &ModelParams, delta: Option<f64>, policy: &CutoffPolicy) -> Result<QfiPoint> {
    params.validate()?;
    let delta = delta.unwrap_or_else(|| default_delta(params));
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!(
            "finite-difference step must be positive, got {delta}"
        )));
    }
    let (lo, hi) = (params.g2 - delta, params.g2 + delta);
    require_stable(&params.with_g2(hi)).map_err(|_| {
        Error::domain(format!(
            "stencil point g2 + delta = {hi} leaves the stability disk gbar2^2 + chi^2 < 1"
        ))
    })?;
    require_stable(&params.with_g2(lo.abs()))?;

    let mut a = ground_at(params, lo, None, policy)?;
    let mut b = ground_at(params, hi, None, policy)?;
    let converged = a.converged && b.converged;
    let n = a.cutoff_used.max(b.cutoff_used);
    if a.cutoff_used < n {
        a = ground_at(params, lo, Some(n), policy)?;
    }
    if b.cutoff_used < n {
        b = ground_at(params, hi, Some(n), policy)?;
    }
    let (f_q, clamped) = qfi_from_pair(&a.ground, &b.ground, delta);
    Ok(QfiPoint {
        g2: params.g2,
        gbar2: params.gbar2(),
        chi: params.chi,
        f_q,
        delta_used: delta,
        cutoff_used: n,
        converged,
        clamped,
    })
}

fn distance_below_critical(params: &ModelParams) -> Result<f64> {
    let d = critical_coupling(params.chi)? - params.gbar2();
    if !(d > 0.0) {
        return Err(Error::domain(format!(
            "gbar2 = {} is not below the critical coupling {}",
            params.gbar2(),
            critical_coupling(params.chi)?
        )));
    }
    Ok(d)
}

/// Near-critical expansion to the two leading orders in the distance `d`:
/// `d⁻²/(8 g_T²) - [χ² - w_z (2 - χ²)] d⁻¹ / (16 (1 + w_z) sqrt(1 - χ²) g_T²)`.
pub fn qfi_major_orders(params: &ModelParams) -> Result<f64> {
    let d = distance_below_critical(params)?;
    let dp = derive(params)?;
    let chi2 = params.chi * params.chi;
    let g2t = dp.g_t * dp.g_t;
    let sub = (chi2 - dp.w_z * (2.0 - chi2)) / (16.0 * (1.0 + dp.w_z) * (1.0 - chi2).sqrt() * g2t * d);
    Ok(1.0 / (8.0 * g2t * d * d) - sub)
}

/// Leading divergence `d⁻² / (8 g_T²)`, independent of χ.
pub fn qfi_leading(params: &ModelParams) -> Result<f64> {
    let d = distance_below_critical(params)?;
    let g_t = params.g_t();
    Ok(1.0 / (8.0 * g_t * g_t * d * d))
}

/// Power-law fit `F_Q = coefficient · d^(-gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub gamma: f64,
    pub coefficient: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Ordinary least squares of `ln F_Q` on `ln d` over the points whose
/// distance lies inside `window` (inclusive).
pub fn fit_critical_exponent(points: &[QfiPoint], window: (f64, f64)) -> Result<ExponentFit> {
    let (wmin, wmax) = window;
    if !(wmin > 0.0 && wmax > wmin) {
        return Err(Error::Fit(format!(
            "window must satisfy 0 < min < max, got ({wmin}, {wmax})"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in points {
        let d = p.distance();
        if !(d >= wmin && d <= wmax) {
            continue;
        }
        if !(p.f_q > 0.0) {
            return Err(Error::Fit(format!("non-positive F_Q = {} at distance {d}", p.f_q)));
        }
        xs.push(d.ln());
        ys.push(p.f_q.ln());
    }
    let n = xs.len();
    if n < 8 {
        return Err(Error::Fit(format!(
            "need at least 8 points inside the window, found {n}"
        )));
    }
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(ExponentFit {
        gamma: -slope,
        coefficient: intercept.exp(),
        r_squared,
        window,
        n_points: n,
    })
}

/// Slope, intercept and coefficient of determination of `y = a x + b`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}
