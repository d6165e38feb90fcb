//! Ground-state expectation values and real-space component wavefunctions.

use crate::ed::{build_operators, SpectralResult};
use crate::error::{Error, Result};
use crate::model::{rotated_frame, ModelParams};

/// `⟨σx⟩`, `⟨σz⟩` and, when the rotation angle is defined, their rotated counterparts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinExpectations {
    pub sx: f64,
    pub sz: f64,
    /// `(⟨σ̃x⟩, ⟨σ̃z⟩)`; `None` at `gbar2 = χ = 0`.
    pub rotated: Option<(f64, f64)>,
}

pub fn spin_expectations(state: &SpectralResult, params: &ModelParams) -> SpinExpectations {
    let (up, down) = state.spin_blocks();
    let sz = up.iter().map(|v| v * v).sum::<f64>() - down.iter().map(|v| v * v).sum::<f64>();
    let sx = 2.0 * up.iter().zip(down).map(|(a, b)| a * b).sum::<f64>();
    let rotated = rotated_frame(params).ok().map(|f| {
        (
            -f.sin_theta * sz + f.cos_theta * sx,
            f.cos_theta * sz + f.sin_theta * sx,
        )
    });
    SpinExpectations { sx, sz, rotated }
}

/// Spin-traced `⟨x²⟩` and `⟨p²⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub x2: f64,
    pub p2: f64,
}

pub fn quadrature_moments(state: &SpectralResult) -> Result<QuadratureMoments> {
    let ops = build_operators(state.cutoff_used)?;
    let (up, down) = state.spin_blocks();
    Ok(QuadratureMoments {
        x2: ops.x2.quad_form(up) + ops.x2.quad_form(down),
        p2: ops.p2.quad_form(up) + ops.p2.quad_form(down),
    })
}

/// Spin basis onto which the ground state is projected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpinBasis {
    /// Eigenbasis of σz.
    Unrotated,
    /// Eigenbasis of σ̃z, which diagonalizes the `x²` coupling.
    #[default]
    Rotated,
}

impl SpinBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            SpinBasis::Unrotated => "unrotated",
            SpinBasis::Rotated => "rotated",
        }
    }
}

/// Fock coefficients `(ψ₊, ψ₋)` of the two spin components in the requested basis.
///
/// The rotated basis is `|⇑̃⟩ = (c, s)`, `|⇓̃⟩ = (-s, c)` on `(|⇑⟩, |⇓⟩)`.
pub fn component_fock(state: &SpectralResult, params: &ModelParams, basis: SpinBasis) -> Result<(Vec<f64>, Vec<f64>)> {
    let (up, down) = state.spin_blocks();
    match basis {
        SpinBasis::Unrotated => Ok((up.to_vec(), down.to_vec())),
        SpinBasis::Rotated => {
            let (c, s) = rotated_frame(params)?.half_angle();
            let plus = up.iter().zip(down).map(|(u, d)| c * u + s * d).collect();
            let minus = up.iter().zip(down).map(|(u, d)| -s * u + c * d).collect();
            Ok((plus, minus))
        }
    }
}

/// Unnormalized moments of one real Fock-space component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockMoments {
    /// Probability weight `Σ c_n²`.
    pub weight: f64,
    pub x: f64,
    pub x2: f64,
    pub p2: f64,
}

impl FockMoments {
    /// `(Var x, Var p)` of the normalized component. `⟨p⟩` and the symmetrized
    /// `x`–`p` covariance vanish for real coefficients.
    pub fn variances(&self) -> (f64, f64) {
        let mx = self.x / self.weight;
        (self.x2 / self.weight - mx * mx, self.p2 / self.weight)
    }
}

pub fn fock_moments(coeffs: &[f64]) -> Result<FockMoments> {
    let ops = build_operators(coeffs.len().saturating_sub(1))?;
    Ok(FockMoments {
        weight: coeffs.iter().map(|v| v * v).sum(),
        x: ops.x.quad_form(coeffs),
        x2: ops.x2.quad_form(coeffs),
        p2: ops.p2.quad_form(coeffs),
    })
}

/// Symmetric position grid `[-x_max, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub const DEFAULT_POINTS: usize = 201;

    /// `x_max = 6 sqrt(max(⟨x²⟩, 1))`.
    pub fn auto(moments: &QuadratureMoments) -> Self {
        Self {
            x_max: 6.0 * moments.x2.max(1.0).sqrt(),
            n_points: Self::DEFAULT_POINTS,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|i| -self.x_max + 2.0 * self.x_max * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn step(&self) -> f64 {
        2.0 * self.x_max / (self.n_points - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentWavefunction {
    pub grid: Vec<f64>,
    pub psi_plus: Vec<f64>,
    pub psi_minus: Vec<f64>,
    pub basis: SpinBasis,
    /// Set when the amplitude at either grid edge exceeds 1e-6 of the peak.
    pub truncated: bool,
}

impl ComponentWavefunction {
    /// Uniform grid spacing.
    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// `Σ (ψ₊² + ψ₋²) Δx`.
    pub fn norm_sq(&self) -> f64 {
        let s: f64 = self.psi_plus.iter().chain(&self.psi_minus).map(|v| v * v).sum();
        s * self.step()
    }
}

pub fn component_wavefunctions(
    state: &SpectralResult,
    params: &ModelParams,
    grid: GridSpec,
    basis: SpinBasis,
) -> Result<ComponentWavefunction> {
    let (plus, minus) = component_fock(state, params, basis)?;
    wavefunction_from_fock(&plus, &minus, grid, basis)
}

/// Largest number of widenings tried by [`auto_wavefunctions`].
const MAX_WIDENINGS: usize = 8;

/// Wavefunctions on [`GridSpec::auto`], widened by 1.5x at fixed spacing
/// until the edge amplitude drops below 1e-6 of the peak. The 6σ start
/// bounds `|ψ|²`, not `ψ`, so broad or heavy-tailed states need this.
pub fn auto_wavefunctions(
    state: &SpectralResult,
    params: &ModelParams,
    basis: SpinBasis,
) -> Result<ComponentWavefunction> {
    let (plus, minus) = component_fock(state, params, basis)?;
    let start = GridSpec::auto(&quadrature_moments(state)?);
    let dx = start.step();
    let mut grid = start;
    for _ in 0..MAX_WIDENINGS {
        let wf = wavefunction_from_fock(&plus, &minus, grid, basis)?;
        if !wf.truncated {
            return Ok(wf);
        }
        let half_points = (1.5 * grid.x_max / dx).ceil() as usize;
        grid = GridSpec {
            x_max: half_points as f64 * dx,
            n_points: 2 * half_points + 1,
        };
    }
    wavefunction_from_fock(&plus, &minus, grid, basis)
}

/// Evaluates two Fock-coefficient series on a position grid.
pub fn wavefunction_from_fock(
    plus: &[f64],
    minus: &[f64],
    grid: GridSpec,
    basis: SpinBasis,
) -> Result<ComponentWavefunction> {
    if !(grid.x_max > 0.0) || grid.n_points < 64 {
        return Err(Error::domain(format!(
            "wavefunction grid needs x_max > 0 and at least 64 points (got {} / {})",
            grid.x_max, grid.n_points
        )));
    }
    let xs = grid.points();
    let psi_plus: Vec<f64> = xs.iter().map(|&x| hermite_series(plus, x)).collect();
    let psi_minus: Vec<f64> = xs.iter().map(|&x| hermite_series(minus, x)).collect();
    let peak = psi_plus.iter().chain(&psi_minus).fold(0.0f64, |m, v| m.max(v.abs()));
    let n = xs.len();
    let edge = [psi_plus[0], psi_plus[n - 1], psi_minus[0], psi_minus[n - 1]]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ComponentWavefunction {
        grid: xs,
        psi_plus,
        psi_minus,
        basis,
        truncated: edge > 1e-6 * peak,
    })
}

const RESCALE_ABOVE: f64 = 1e150;

/// `Σ_n c_n φ_n(x)` with `φ_n` the normalized Hermite functions.
///
/// The three-term recurrence runs on values scaled by `exp(x²/2)`, with
/// the running exponent tracked separately so that neither the Gaussian
/// factor nor high orders under- or overflow.
pub fn hermite_series(coeffs: &[f64], x: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let mut log_scale = -x * x / 2.0 - 0.25 * std::f64::consts::PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut acc = coeffs[0];
    for (n, &c) in coeffs.iter().enumerate().skip(1) {
        let k = (n - 1) as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * x * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        acc += c * cur;
        if cur.abs() > RESCALE_ABOVE {
            prev /= RESCALE_ABOVE;
            cur /= RESCALE_ABOVE;
            acc /= RESCALE_ABOVE;
            log_scale += RESCALE_ABOVE.ln();
        }
    }
    if acc == 0.0 {
        return 0.0;
    }
    acc.signum() * (acc.abs().ln() + log_scale).exp()
}

/// Normalized Hermite function `φ_n(x)`.
pub fn hermite_function(n: usize, x: f64) -> f64 {
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    hermite_series(&c, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::{converge_cutoff, CutoffPolicy};

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    fn physicists_hermite(n: usize, x: f64) -> f64 {
        // explicit sum Σ (-1)^m n! / (m! (n-2m)!) (2x)^(n-2m)
        (0..=n / 2)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(n) / (factorial(m) * factorial(n - 2 * m)) * (2.0 * x).powi((n - 2 * m) as i32)
            })
            .sum()
    }

    #[test]
    fn hermite_matches_closed_form() {
        for n in 0..=30 {
            let norm = 1.0 / (2f64.powi(n as i32) * factorial(n) * std::f64::consts::PI.sqrt()).sqrt();
            // the outermost maximum sits just inside the turning point sqrt(2n+1)
            for &x in &[0.0, 0.37, 1.3, (2.0 * n as f64 + 1.0).sqrt() * 0.95] {
                let exact = norm * physicists_hermite(n, x) * (-x * x / 2.0).exp();
                let got = hermite_function(n, x);
                assert!(
                    (got - exact).abs() <= 1e-8 * exact.abs().max(1e-3),
                    "n={n} x={x}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn hermite_high_order_is_normalized() {
        // φ_1500 on a fine grid: norm 1, no overflow
        let n = 1500;
        let h = 0.01;
        let edge = (2.0 * n as f64 + 1.0).sqrt() + 8.0;
        let steps = (2.0 * edge / h) as usize;
        let s: f64 = (0..=steps)
            .map(|i| {
                let v = hermite_function(n, -edge + i as f64 * h);
                v * v
            })
            .sum();
        assert!((s * h - 1.0).abs() < 1e-6, "{}", s * h);
    }

    #[test]
    fn vacuum_limits() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        let st = converge_cutoff(&p, &CutoffPolicy::default()).unwrap();
        let m = quadrature_moments(&st).unwrap();
        assert!((m.x2 - 0.5).abs() < 1e-12 && (m.p2 - 0.5).abs() < 1e-12);
        let s = spin_expectations(&st, &p);
        assert!((s.sx + 1.0).abs() < 1e-12);
        assert!(s.rotated.is_none());

        let wf = component_wavefunctions(
            &st,
            &p,
            GridSpec {
                x_max: 8.0,
                n_points: 401,
            },
            SpinBasis::Unrotated,
        )
        .unwrap();
        assert!(!wf.truncated);
        assert!((wf.norm_sq() - 1.0).abs() < 1e-6);
        for (i, &x) in wf.grid.iter().enumerate() {
            let g = (-x * x / 2.0).exp() / std::f64::consts::PI.powf(0.25) / 2f64.sqrt();
            assert!((wf.psi_plus[i] + wf.psi_minus[i]).abs() < 1e-12);
            assert!((wf.psi_plus[i].abs() - g).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_consistency() {
        for &(g, chi) in &[(0.3, 0.5), (0.55, 0.8), (0.2, -0.4), (0.7, 0.0)] {
            let p = ModelParams::from_reduced(1.0, 1.0, g, 1.0, chi).unwrap();
            let st = converge_cutoff(&p, &CutoffPolicy::default()).unwrap();
            let s = spin_expectations(&st, &p);
            let (sxt, szt) = s.rotated.unwrap();
            let r = (g * g + chi * chi).sqrt();
            let (c, sn) = (g / r, chi / r);
            assert!((szt - (c * s.sz + sn * s.sx)).abs() < 1e-10);
            assert!((sxt - (-sn * s.sz + c * s.sx)).abs() < 1e-10);
            assert!(sxt * sxt + szt * szt <= 1.0 + 1e-12);
            // σ̃z from rotated components
            let (pl, mi) = component_fock(&st, &p, SpinBasis::Rotated).unwrap();
            let direct = pl.iter().map(|v| v * v).sum::<f64>() - mi.iter().map(|v| v * v).sum::<f64>();
            assert!((direct - szt).abs() < 1e-10);
            if chi == 0.0 {
                assert!((sxt - s.sx).abs() < 1e-15 && (szt - s.sz).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fock_moments_of_number_state() {
        let mut c = vec![0.0; 10];
        c[3] = 1.0;
        let m = fock_moments(&c).unwrap();
        assert_eq!(m.weight, 1.0);
        assert!((m.x2 - 3.5).abs() < 1e-14 && (m.p2 - 3.5).abs() < 1e-14);
        assert_eq!(m.x, 0.0);
    }

    #[test]
    fn auto_grid_widens_for_broad_states() {
        let p =
            ModelParams::from_reduced(1.0, crate::equi_flip_omega(0.8, 0.1, 1.0).unwrap(), 0.594, 1.0, 0.8).unwrap();
        let st = converge_cutoff(&p, &CutoffPolicy::default()).unwrap();
        let q = quadrature_moments(&st).unwrap();
        let narrow = component_wavefunctions(&st, &p, GridSpec::auto(&q), SpinBasis::Rotated).unwrap();
        assert!(narrow.truncated);
        let wf = auto_wavefunctions(&st, &p, SpinBasis::Rotated).unwrap();
        assert!(!wf.truncated);
        assert!((wf.step() - GridSpec::auto(&q).step()).abs() < 1e-12);
        assert!((wf.norm_sq() - 1.0).abs() < 1e-6);
    }
}
