//! Closed-form parameter algebra of the two-photon Rabi-Stark model.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = ω a†a + (Ω/2) σx + g₂ σz [a†² + a² + χ_z (2n + 1)] + ω χ n σx
//! ```
//!
//! Everything here is a scalar function of the five physical inputs: the
//! coupling scale `g_T`, the spin rotation that diagonalizes the `x²`
//! coupling, the renormalized masses/frequencies and the critical coupling
//! `sqrt(1 - χ²)` (in units of `g_T`).

use crate::error::{Error, Result};

/// The five physical inputs of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Bosonic mode frequency ω.
    pub omega: f64,
    /// Qubit level splitting Ω.
    pub splitting: f64,
    /// Quadratic coupling g₂ (dimensionful).
    pub g2: f64,
    /// Form parameter χ_z: 0 is the pure two-photon coupling, 1 the full `(a† + a)²` coupling.
    pub chi_z: f64,
    /// Stark coupling χ.
    pub chi: f64,
}

impl ModelParams {
    /// Validated constructor. Stability is not checked here, see [`stability_check`].
    pub fn new(omega: f64, splitting: f64, g2: f64, chi_z: f64, chi: f64) -> Result<Self> {
        let p = Self {
            omega,
            splitting,
            g2,
            chi_z,
            chi,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the reduced coupling `gbar2 = g2 / g_T`.
    pub fn from_reduced(omega: f64, splitting: f64, gbar2: f64, chi_z: f64, chi: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::domain(format!("omega must be positive, got {omega}")));
        }
        Self::new(omega, splitting, gbar2 * coupling_scale(omega, chi_z), chi_z, chi)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.omega, self.splitting, self.g2, self.chi_z, self.chi]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::domain("model parameters must be finite"));
        }
        if self.omega <= 0.0 {
            return Err(Error::domain(format!("omega must be positive, got {}", self.omega)));
        }
        if self.g2 < 0.0 {
            return Err(Error::domain(format!("g2 must be non-negative, got {}", self.g2)));
        }
        if !(0.0..=1.0).contains(&self.chi_z) {
            return Err(Error::domain(format!("chi_z must lie in [0, 1], got {}", self.chi_z)));
        }
        Ok(())
    }

    /// Coupling scale `g_T = ω / (2 (1 + χ_z))`.
    pub fn g_t(&self) -> f64 {
        coupling_scale(self.omega, self.chi_z)
    }

    /// Reduced coupling `g₂ / g_T`.
    pub fn gbar2(&self) -> f64 {
        self.g2 / self.g_t()
    }

    /// Copy with the reduced coupling replaced.
    pub fn with_gbar2(&self, gbar2: f64) -> Self {
        Self {
            g2: gbar2 * self.g_t(),
            ..*self
        }
    }

    pub fn with_g2(&self, g2: f64) -> Self {
        Self { g2, ..*self }
    }

    pub fn with_chi(&self, chi: f64) -> Self {
        Self { chi, ..*self }
    }

    /// `gbar2² + χ²`, the squared radius in the (χ, gbar2) plane.
    pub fn radius_sq(&self) -> f64 {
        let g = self.gbar2();
        g * g + self.chi * self.chi
    }

    /// Reduced distance `sqrt(1 - χ²) - gbar2` to the critical point.
    pub fn distance_to_critical(&self) -> Result<f64> {
        Ok(critical_coupling(self.chi)? - self.gbar2())
    }
}

fn coupling_scale(omega: f64, chi_z: f64) -> f64 {
    omega / (2.0 * (1.0 + chi_z))
}

/// Scales derived from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub g_t: f64,
    pub gbar2: f64,
    /// `w_z = (1 - χ_z) / (1 + χ_z)`.
    pub w_z: f64,
    /// `Ω_χ = Ω - χ ω`.
    pub omega_chi: f64,
}

pub fn derive(params: &ModelParams) -> Result<DerivedParams> {
    if !(params.omega > 0.0) {
        return Err(Error::domain(format!("omega must be positive, got {}", params.omega)));
    }
    let g_t = params.g_t();
    Ok(DerivedParams {
        g_t,
        gbar2: params.g2 / g_t,
        w_z: (1.0 - params.chi_z) / (1.0 + params.chi_z),
        omega_chi: params.splitting - params.chi * params.omega,
    })
}

/// Critical reduced coupling `sqrt(1 - χ²)`.
pub fn critical_coupling(chi: f64) -> Result<f64> {
    if !(chi.abs() <= 1.0) {
        return Err(Error::domain(format!("|chi| must not exceed 1, got {chi}")));
    }
    Ok((1.0 - chi * chi).sqrt())
}

/// `sign[χ]` with `sign[0] = +1`.
pub fn sign_chi(chi: f64) -> f64 {
    if chi < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Quantities of the spin-rotated frame in which the `x²` coupling is diagonal.
///
/// The `_plus`/`_minus` fields refer to the rotated spin eigenvalue ±1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedFrame {
    pub gbar2: f64,
    pub chi: f64,
    pub g_t: f64,
    pub omega: f64,
    pub w_z: f64,
    /// `sqrt(gbar2² + χ²)`.
    pub radius: f64,
    pub cos_theta: f64,
    /// Signed `sin ϑ = χ / radius`.
    pub sin_theta: f64,
    /// `d cos ϑ / d g₂` (per unit energy).
    pub dcos_theta_dg2: f64,
    pub omega_tilde: f64,
    pub epsilon_tilde: f64,
    pub kappa_tilde: f64,
    pub m_tilde_plus: f64,
    pub m_tilde_minus: f64,
    pub varpi_tilde_sq_plus: f64,
    pub varpi_tilde_sq_minus: f64,
    pub gbar2c_chi: f64,
}

impl RotatedFrame {
    /// `χ² - w_z gbar2²` divided by the radius, the spin-dependent part of the inverse mass.
    pub fn mass_shift(&self) -> f64 {
        (self.chi * self.chi - self.w_z * self.gbar2 * self.gbar2) / self.radius
    }

    /// Potential stiffness `m̃ ϖ̃² = 1 ± radius` of the rotated spin component.
    pub fn stiffness(&self, spin: f64) -> f64 {
        1.0 + spin * self.radius
    }

    /// Amplitudes of the rotated basis on the unrotated one:
    /// `|⇑̃⟩ = (c, s)`, `|⇓̃⟩ = (-s, c)` with `c = sqrt((1+cosϑ)/2)` and
    /// `s = sign[χ] sqrt((1-cosϑ)/2)`.
    pub fn half_angle(&self) -> (f64, f64) {
        let c = ((1.0 + self.cos_theta) / 2.0).sqrt();
        let s = sign_chi(self.chi) * ((1.0 - self.cos_theta) / 2.0).max(0.0).sqrt();
        (c, s)
    }

    /// `⟨⇑̃'|⇑̃'⟩ = ⟨⇓̃'|⇓̃'⟩`, the squared rate of basis rotation with g₂.
    pub fn basis_variation_sq(&self) -> f64 {
        let c = self.cos_theta;
        let d = self.dcos_theta_dg2;
        if d == 0.0 {
            return 0.0;
        }
        d * d / 8.0 * (1.0 / (1.0 + c) + 1.0 / (1.0 - c))
    }

    /// `⟨⇓̃|⇑̃'⟩`, obtained by differentiating [`half_angle`](Self::half_angle) directly.
    /// `⟨⇑̃|⇓̃'⟩` is its negative.
    pub fn basis_cross_derivative(&self) -> f64 {
        let c = self.cos_theta;
        let d = self.dcos_theta_dg2;
        if d == 0.0 {
            return 0.0;
        }
        -sign_chi(self.chi) * d / 4.0 * (((1.0 + c) / (1.0 - c)).sqrt() + ((1.0 - c) / (1.0 + c)).sqrt())
    }
}

pub fn rotated_frame(params: &ModelParams) -> Result<RotatedFrame> {
    let d = derive(params)?;
    let gbar2 = d.gbar2;
    let chi = params.chi;
    let r2 = gbar2 * gbar2 + chi * chi;
    if r2 == 0.0 {
        return Err(Error::DegenerateRotation);
    }
    let r = r2.sqrt();
    let shift = (chi * chi - d.w_z * gbar2 * gbar2) / r;
    let gbar2c_chi = if chi.abs() <= 1.0 {
        (1.0 - chi * chi).sqrt()
    } else {
        f64::NAN
    };
    Ok(RotatedFrame {
        gbar2,
        chi,
        g_t: d.g_t,
        omega: params.omega,
        w_z: d.w_z,
        radius: r,
        cos_theta: gbar2 / r,
        sin_theta: chi / r,
        dcos_theta_dg2: chi * chi / (r2 * r * d.g_t),
        omega_tilde: d.omega_chi * gbar2 / r,
        epsilon_tilde: chi * d.omega_chi / (2.0 * r),
        kappa_tilde: params.omega / 2.0 * (1.0 + d.w_z) * chi * gbar2 / r,
        m_tilde_plus: 1.0 / (1.0 + shift),
        m_tilde_minus: 1.0 / (1.0 - shift),
        varpi_tilde_sq_plus: (1.0 + r) * (1.0 + shift),
        varpi_tilde_sq_minus: (1.0 - r) * (1.0 - shift),
        gbar2c_chi,
    })
}

/// Potential frequencies `(ϖ₊, ϖ₋)` without Stark coupling.
pub fn bare_frequencies(chi_z: f64, gbar2: f64) -> Result<(f64, f64)> {
    if gbar2 >= 1.0 {
        return Err(Error::Instability {
            radius_sq: gbar2 * gbar2,
        });
    }
    if !(0.0..=1.0).contains(&chi_z) || gbar2 < 0.0 {
        return Err(Error::domain("chi_z must lie in [0, 1] and gbar2 must be non-negative"));
    }
    let w_z = (1.0 - chi_z) / (1.0 + chi_z);
    let plus = ((1.0 + gbar2) * (1.0 - w_z * gbar2)).sqrt();
    let minus = ((1.0 - gbar2) * (1.0 + w_z * gbar2)).sqrt();
    Ok((plus, minus))
}

/// Splitting Ω that puts the renormalized flip strength at the critical
/// point equal to `omega_tilde_c`: `Ω_c = χ ω + Ω̃_c / sqrt(1 - χ²)`.
pub fn equi_flip_omega(chi: f64, omega_tilde_c: f64, omega: f64) -> Result<f64> {
    if !(chi.abs() < 1.0) {
        return Err(Error::domain(format!("|chi| must be below 1, got {chi}")));
    }
    Ok(chi * omega + omega_tilde_c / (1.0 - chi * chi).sqrt())
}

/// True strictly inside the stability disk `gbar2² + χ² < 1`.
pub fn stability_check(params: &ModelParams) -> bool {
    params.radius_sq() < 1.0
}

pub(crate) fn require_stable(params: &ModelParams) -> Result<()> {
    if stability_check(params) {
        Ok(())
    } else {
        Err(Error::Instability {
            radius_sq: params.radius_sq(),
        })
    }
}
