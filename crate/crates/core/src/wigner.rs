//! Wigner functions of the spin components and their squeezing.
//!
//! For a real component `ψ` the transform reduces to a cosine sum,
//!
//! ```text
//! W(x, p) = (1/π) ∫₀^∞ cos(p y) ψ(x + y/2) ψ(x - y/2) dy,
//! ```
//!
//! evaluated by the trapezoid rule with `y` stepping by `2Δx`, so that
//! `x ± y/2` always falls on the wavefunction grid.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::observables::{ComponentWavefunction, FockMoments};

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Row-major over `(x, p)`: entry `i * p.len() + j` is `W(x_i, p_j)`.
    pub w_plus: Vec<f64>,
    pub w_minus: Vec<f64>,
    /// Probability weights `(w₊, w₋)` of the two components.
    pub component_norms: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Plus,
    Minus,
}

impl WignerGrid {
    pub fn values(&self, c: Component) -> &[f64] {
        match c {
            Component::Plus => &self.w_plus,
            Component::Minus => &self.w_minus,
        }
    }

    pub fn norm(&self, c: Component) -> f64 {
        match c {
            Component::Plus => self.component_norms.0,
            Component::Minus => self.component_norms.1,
        }
    }

    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn dp(&self) -> f64 {
        self.p[1] - self.p[0]
    }

    /// Trapezoid `∫ W(x_i, p) dp` for every grid `x_i`.
    pub fn x_marginal(&self, c: Component) -> Vec<f64> {
        let np = self.p.len();
        let dp = self.dp();
        self.values(c)
            .chunks(np)
            .map(|row| dp * (row.iter().sum::<f64>() - 0.5 * (row[0] + row[np - 1])))
            .collect()
    }
}

/// `p_max = 6 sqrt(max(⟨p²⟩, 1))`.
pub fn default_p_max(p2: f64) -> f64 {
    6.0 * p2.max(1.0).sqrt()
}

pub const DEFAULT_P_POINTS: usize = 201;

/// Wigner functions of both components on the wavefunction's `x` grid and
/// `n_p` momenta spanning `[-p_max, p_max]`.
pub fn wigner_transform(wf: &ComponentWavefunction, p_max: f64, n_p: usize) -> Result<WignerGrid> {
    if wf.truncated {
        return Err(Error::domain(
            "wavefunction grid is too narrow (edge amplitude above 1e-6 of peak); widen x_max",
        ));
    }
    if !(p_max > 0.0) || n_p < 2 {
        return Err(Error::domain(format!(
            "need p_max > 0 and n_p >= 2, got {p_max} / {n_p}"
        )));
    }
    let p: Vec<f64> = (0..n_p)
        .map(|j| -p_max + 2.0 * p_max * j as f64 / (n_p - 1) as f64)
        .collect();
    let dx = wf.step();
    let norm = |psi: &[f64]| psi.iter().map(|v| v * v).sum::<f64>() * dx;
    Ok(WignerGrid {
        w_plus: transform(&wf.psi_plus, dx, &p),
        w_minus: transform(&wf.psi_minus, dx, &p),
        component_norms: (norm(&wf.psi_plus), norm(&wf.psi_minus)),
        x: wf.grid.clone(),
        p,
    })
}

fn transform(psi: &[f64], dx: f64, p: &[f64]) -> Vec<f64> {
    let n = psi.len();
    let dy = 2.0 * dx;
    (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let kmax = i.min(n - 1 - i);
            let prods: Vec<f64> = (0..=kmax).map(|k| psi[i + k] * psi[i - k]).collect();
            p.iter()
                .map(|&pj| {
                    let mut s = 0.5 * prods[0];
                    for (k, v) in prods.iter().enumerate().skip(1) {
                        s += (pj * dy * k as f64).cos() * v;
                    }
                    s * dy / std::f64::consts::PI
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingMetrics {
    pub var_major: f64,
    pub var_minor: f64,
    /// `var_major / var_minor`.
    pub aspect_ratio: f64,
}

impl SqueezingMetrics {
    /// Principal variances of the covariance `[[vx, c], [c, vp]]`.
    pub fn from_covariance(vx: f64, vp: f64, c: f64) -> Self {
        let mean = 0.5 * (vx + vp);
        let half = (0.5 * (vx - vp)).hypot(c);
        let (var_major, var_minor) = (mean + half, mean - half);
        Self {
            var_major,
            var_minor,
            aspect_ratio: var_major / var_minor,
        }
    }
}

/// Covariance of the normalized phase-space distribution of one component.
pub fn squeezing_metrics(grid: &WignerGrid, c: Component) -> Result<SqueezingMetrics> {
    let w = grid.values(c);
    let np = grid.p.len();
    let mut m = [0.0; 6]; // 1, x, p, x², p², xp
    for (i, &x) in grid.x.iter().enumerate() {
        for (j, &p) in grid.p.iter().enumerate() {
            let v = w[i * np + j];
            m[0] += v;
            m[1] += v * x;
            m[2] += v * p;
            m[3] += v * x * x;
            m[4] += v * p * p;
            m[5] += v * x * p;
        }
    }
    let total = m[0] * grid.dx() * grid.dp();
    if !(total > 1e-6) {
        return Err(Error::domain(format!(
            "component weight {total:e} is too small for squeezing metrics"
        )));
    }
    let (mx, mp) = (m[1] / m[0], m[2] / m[0]);
    Ok(SqueezingMetrics::from_covariance(
        m[3] / m[0] - mx * mx,
        m[4] / m[0] - mp * mp,
        m[5] / m[0] - mx * mp,
    ))
}

/// The same metrics straight from Fock-space moments of a real component.
pub fn squeezing_from_moments(m: &FockMoments) -> Result<SqueezingMetrics> {
    if !(m.weight > 1e-6) {
        return Err(Error::domain(format!(
            "component weight {:e} is too small for squeezing metrics",
            m.weight
        )));
    }
    let (vx, vp) = m.variances();
    Ok(SqueezingMetrics::from_covariance(vx, vp, 0.0))
}
