//! Variational polaron picture in the rotated spin frame.
//!
//! Each rotated spin component carries one centered Gaussian
//! `φ_σ(x) = (s_σ/π)^{1/4} exp(-s_σ x²/2)` with width parameter
//! `s_σ = m̃_σ ξ̃_σ`. The two components are coupled by the tunneling
//! `S = S_Ω + S_κ`, giving the 2×2 problem
//!
//! ```text
//! | ε̃₊  S  |
//! | S   ε̃₋ |,   E^η = e₊ + η sqrt(e₋² + S²),   e± = (ε̃₊ ± ε̃₋) / 2.
//! ```
//!
//! The frequencies `ξ̃±` minimize the lower branch `E⁻`.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;

use crate::error::{Error, Result};
use crate::model::{require_stable, rotated_frame, ModelParams, RotatedFrame};

/// Diagonal energies `(ε̃₊, ε̃₋)` of the two Gaussian components.
pub fn single_particle_energies(frame: &RotatedFrame, xi_plus: f64, xi_minus: f64) -> Result<(f64, f64)> {
    if !(xi_plus > 0.0 && xi_minus > 0.0) {
        return Err(Error::domain(format!(
            "variational frequencies must be positive, got ({xi_plus}, {xi_minus})"
        )));
    }
    Ok((branch_energy(frame, 1.0, xi_plus), branch_energy(frame, -1.0, xi_minus)))
}

fn branch_energy(f: &RotatedFrame, sigma: f64, xi: f64) -> f64 {
    let m = if sigma > 0.0 { f.m_tilde_plus } else { f.m_tilde_minus };
    f.omega * xi / 4.0 + sigma * f.epsilon_tilde + f.stiffness(sigma) * f.omega / (4.0 * m * xi)
}

fn branch_energy_slope(f: &RotatedFrame, sigma: f64, xi: f64) -> f64 {
    let m = if sigma > 0.0 { f.m_tilde_plus } else { f.m_tilde_minus };
    f.omega / 4.0 - f.stiffness(sigma) * f.omega / (4.0 * m * xi * xi)
}

/// Overlap `⟨φ_a|φ_b⟩ = (s_a s_b)^{1/4} sqrt(2 / (s_a + s_b))`.
pub fn gaussian_overlap(s_a: f64, s_b: f64) -> f64 {
    (s_a * s_b).powf(0.25) * (2.0 / (s_a + s_b)).sqrt()
}

/// `∂⟨φ_a|φ_b⟩ / ∂s_b`.
pub fn gaussian_overlap_ds(s_a: f64, s_b: f64) -> f64 {
    gaussian_overlap(s_a, s_b) * (1.0 / (4.0 * s_b) - 1.0 / (2.0 * (s_a + s_b)))
}

/// `(S_Ω, S_κ)` for Gaussian widths `s±`.
pub fn tunneling_terms(frame: &RotatedFrame, s_plus: f64, s_minus: f64) -> Result<(f64, f64)> {
    if !(s_plus > 0.0 && s_minus > 0.0) {
        return Err(Error::domain(format!(
            "Gaussian widths must be positive, got ({s_plus}, {s_minus})"
        )));
    }
    Ok(tunneling(frame, s_plus, s_minus))
}

fn tunneling(f: &RotatedFrame, sp: f64, sm: f64) -> (f64, f64) {
    let prod = sp * sm;
    let sum = sp + sm;
    let s_omega = f.omega_tilde * prod.powf(0.25) / (std::f64::consts::SQRT_2 * sum.sqrt());
    let s_kappa = std::f64::consts::SQRT_2 * f.kappa_tilde * prod.powf(1.25) / sum.powf(1.5);
    (s_omega, s_kappa)
}

/// Partial derivatives of `S_Ω + S_κ` with respect to `(s₊, s₋)`.
fn tunneling_gradient(f: &RotatedFrame, sp: f64, sm: f64) -> (f64, f64) {
    let (so, sk) = tunneling(f, sp, sm);
    let sum = sp + sm;
    let d = |s: f64| so * (0.25 / s - 0.5 / sum) + sk * (1.25 / s - 1.5 / sum);
    (d(sp), d(sm))
}

/// Optimized polaron state at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolaronSolution {
    pub xi_plus: f64,
    pub xi_minus: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub s_omega: f64,
    pub s_kappa: f64,
    /// `(ε̃₊ + ε̃₋) / 2`.
    pub e_plus: f64,
    /// `(ε̃₊ - ε̃₋) / 2`.
    pub e_minus: f64,
    /// Lower branch `E⁻`, the variational ground energy.
    pub energy_lower: f64,
    pub energy_upper: f64,
    /// Weight amplitude on `|⇑̃⟩`.
    pub c_plus: f64,
    /// Weight amplitude on `|⇓̃⟩`.
    pub c_minus: f64,
    pub gap: f64,
    /// The minimizer sits at the edge of the search box.
    pub at_boundary: bool,
}

impl PolaronSolution {
    /// Total tunneling `S_Ω + S_κ`.
    pub fn tunneling(&self) -> f64 {
        self.s_omega + self.s_kappa
    }

    /// Gap lower bound `2 |S_Ω + S_κ|`, reached at zero detuning.
    pub fn gap_floor(&self) -> f64 {
        2.0 * self.tunneling().abs()
    }
}

/// `E⁺ - E⁻ = 2 sqrt(e₋² + (S_Ω + S_κ)²)`.
pub fn polaron_gap(sol: &PolaronSolution) -> f64 {
    2.0 * sol.e_minus.hypot(sol.tunneling())
}

/// Assembles every derived field of the solution at `(ξ̃₊, ξ̃₋)`.
pub fn evaluate(frame: &RotatedFrame, xi_plus: f64, xi_minus: f64) -> Result<PolaronSolution> {
    let (eps_plus, eps_minus) = single_particle_energies(frame, xi_plus, xi_minus)?;
    let s_plus = frame.m_tilde_plus * xi_plus;
    let s_minus = frame.m_tilde_minus * xi_minus;
    let (s_omega, s_kappa) = tunneling(frame, s_plus, s_minus);
    let s = s_omega + s_kappa;
    let e_plus = (eps_plus + eps_minus) / 2.0;
    let e_minus = (eps_plus - eps_minus) / 2.0;
    let root = e_minus.hypot(s);
    let b_plus = e_minus - root;
    let b_minus = s;
    let norm = b_plus.hypot(b_minus);
    // S = 0 and e₋ > 0: the lower level is pure |⇓̃⟩
    let (c_plus, c_minus) = if norm == 0.0 {
        (0.0, 1.0)
    } else {
        (b_plus / norm, b_minus / norm)
    };
    Ok(PolaronSolution {
        xi_plus,
        xi_minus,
        s_plus,
        s_minus,
        eps_plus,
        eps_minus,
        s_omega,
        s_kappa,
        e_plus,
        e_minus,
        energy_lower: e_plus - root,
        energy_upper: e_plus + root,
        c_plus,
        c_minus,
        gap: 2.0 * root,
        at_boundary: false,
    })
}

fn lower_energy(f: &RotatedFrame, xp: f64, xm: f64) -> f64 {
    let ep = branch_energy(f, 1.0, xp);
    let em = branch_energy(f, -1.0, xm);
    let (so, sk) = tunneling(f, f.m_tilde_plus * xp, f.m_tilde_minus * xm);
    (ep + em) / 2.0 - ((ep - em) / 2.0).hypot(so + sk)
}

fn lower_energy_gradient(f: &RotatedFrame, xp: f64, xm: f64) -> [f64; 2] {
    let ep = branch_energy(f, 1.0, xp);
    let em = branch_energy(f, -1.0, xm);
    let sp = f.m_tilde_plus * xp;
    let sm = f.m_tilde_minus * xm;
    let (so, sk) = tunneling(f, sp, sm);
    let s = so + sk;
    let e_minus = (ep - em) / 2.0;
    let root = e_minus.hypot(s);
    let (dsp, dsm) = tunneling_gradient(f, sp, sm);
    let dp = branch_energy_slope(f, 1.0, xp);
    let dm = branch_energy_slope(f, -1.0, xm);
    if root == 0.0 {
        return [dp / 2.0, dm / 2.0];
    }
    [
        dp / 2.0 - (e_minus * dp / 2.0 + s * dsp * f.m_tilde_plus) / root,
        dm / 2.0 - (-e_minus * dm / 2.0 + s * dsm * f.m_tilde_minus) / root,
    ]
}

/// Search box and tolerances for [`optimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Simplex standard-deviation tolerance on `E⁻`.
    pub tol: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    /// Starting point replacing the `(ϖ̃₊, ϖ̃₋)` seed, e.g. a neighbouring solution.
    pub warm_start: Option<(f64, f64)>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            xi_min: 1e-6,
            xi_max: 50.0,
            warm_start: None,
        }
    }
}

struct LowerBranch<'a> {
    frame: &'a RotatedFrame,
    lo: f64,
    hi: f64,
}

impl CostFunction for LowerBranch<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let inside = p.iter().all(|&v| v > self.lo && v <= self.hi);
        Ok(if inside {
            lower_energy(self.frame, p[0], p[1])
        } else {
            f64::INFINITY
        })
    }
}

fn simplex_descent(frame: &RotatedFrame, start: (f64, f64), opts: &OptimizeOptions) -> Result<(f64, f64)> {
    let (a, b) = start;
    let simplex = vec![vec![a, b], vec![a * 1.1, b], vec![a, b * 1.1]];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.tol)
        .map_err(|e| Error::Numeric {
            what: format!("simplex setup: {e}"),
            residual: f64::NAN,
        })?;
    let problem = LowerBranch {
        frame,
        lo: opts.xi_min,
        hi: opts.xi_max,
    };
    let res = Executor::new(problem, solver)
        .configure(|s| s.max_iters(5000))
        .run()
        .map_err(|e| Error::Numeric {
            what: format!("simplex descent: {e}"),
            residual: f64::NAN,
        })?;
    let best = res.state().get_best_param().cloned().ok_or_else(|| Error::Numeric {
        what: "simplex descent returned no parameters".into(),
        residual: f64::NAN,
    })?;
    Ok((best[0], best[1]))
}

/// Newton iterations on the analytic gradient with a finite-difference
/// Hessian, taken only while they lower the gradient norm.
fn newton_polish(f: &RotatedFrame, mut x: [f64; 2], opts: &OptimizeOptions) -> [f64; 2] {
    let norm = |g: [f64; 2]| g[0].hypot(g[1]);
    let mut g = lower_energy_gradient(f, x[0], x[1]);
    for _ in 0..30 {
        let h = [1e-6 * x[0], 1e-6 * x[1]];
        let col = |i: usize| {
            let mut a = x;
            let mut b = x;
            a[i] += h[i];
            b[i] -= h[i];
            let ga = lower_energy_gradient(f, a[0], a[1]);
            let gb = lower_energy_gradient(f, b[0], b[1]);
            [(ga[0] - gb[0]) / (2.0 * h[i]), (ga[1] - gb[1]) / (2.0 * h[i])]
        };
        let (c0, c1) = (col(0), col(1));
        let (h00, h11) = (c0[0], c1[1]);
        let h01 = 0.5 * (c0[1] + c1[0]);
        let det = h00 * h11 - h01 * h01;
        if !(det > 0.0 && h00 > 0.0) {
            break;
        }
        let step = [(h11 * g[0] - h01 * g[1]) / det, (h00 * g[1] - h01 * g[0]) / det];
        let next = [x[0] - step[0], x[1] - step[1]];
        if !(next[0] > opts.xi_min && next[1] > opts.xi_min && next[0] <= opts.xi_max && next[1] <= opts.xi_max) {
            break;
        }
        let gn = lower_energy_gradient(f, next[0], next[1]);
        if !(norm(gn) < norm(g)) {
            break;
        }
        x = next;
        g = gn;
        if step[0].abs() <= 1e-15 * x[0] && step[1].abs() <= 1e-15 * x[1] {
            break;
        }
    }
    x
}

fn seed(frame: &RotatedFrame) -> (f64, f64) {
    let root = |v: f64| if v > 1e-6 { v.sqrt() } else { 0.1 };
    (root(frame.varpi_tilde_sq_plus), root(frame.varpi_tilde_sq_minus))
}

fn minimize(frame: &RotatedFrame, opts: &OptimizeOptions) -> Result<PolaronSolution> {
    if !(opts.tol > 0.0 && opts.xi_min > 0.0 && opts.xi_max > opts.xi_min) {
        return Err(Error::domain("optimizer needs tol > 0 and 0 < xi_min < xi_max"));
    }
    let s0 = seed(frame);
    let first = opts.warm_start.unwrap_or(s0);
    let clamp = |v: f64| v.clamp(opts.xi_min * 2.0, opts.xi_max);
    let mut best: Option<(f64, (f64, f64))> = None;
    for start in [first, (0.5 * s0.0, 0.5 * s0.1)] {
        let start = (clamp(start.0), clamp(start.1));
        let p = simplex_descent(frame, start, opts)?;
        let e = lower_energy(frame, p.0, p.1);
        if best.is_none_or(|(eb, _)| e < eb) {
            best = Some((e, p));
        }
    }
    let (_, (a, b)) = best.expect("two starts");
    let [a, b] = newton_polish(frame, [a, b], opts);
    let mut sol = evaluate(frame, a, b)?;
    let near = |v: f64| v >= opts.xi_max * (1.0 - 1e-6) || v <= opts.xi_min * (1.0 + 1e-3);
    sol.at_boundary = near(a) || near(b);
    Ok(sol)
}

/// Minimizes `E⁻` over `(ξ̃₊, ξ̃₋)` inside the stability disk.
///
/// Two simplex descents are run, from `(ϖ̃₊, ϖ̃₋)` (or the warm start) and
/// from half of it; the better one is polished by Newton steps.
pub fn optimize(params: &ModelParams, opts: &OptimizeOptions) -> Result<PolaronSolution> {
    require_stable(params)?;
    minimize(&rotated_frame(params)?, opts)
}

/// Like [`optimize`] but accepts the closed disk `gbar2² + χ² ≤ 1`, where
/// `ϖ̃₋` vanishes and the minimum is held finite by the tunneling alone.
pub fn optimize_closed(params: &ModelParams, opts: &OptimizeOptions) -> Result<PolaronSolution> {
    let r2 = params.radius_sq();
    if r2 > 1.0 + 1e-12 {
        return Err(Error::Instability { radius_sq: r2 });
    }
    minimize(&rotated_frame(params)?, opts)
}

/// Four-part split of the polaron QFI with respect to `g₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiDecomposition {
    /// Sum of the four parts.
    pub f_total: f64,
    /// `4 Σ C̃'²`, from the spin-component weights.
    pub f_rho: f64,
    /// `4 Σ C̃² ⟨φ̃'|φ̃'⟩`, from the Gaussian widths (squeezing).
    pub f_xi: f64,
    /// `4 Σ C̃² ⟨σ̃'|σ̃'⟩`, from the rotation of the spin basis.
    pub f_sigma: f64,
    /// Cross terms between basis rotation and the other two variations.
    pub f_mixed: f64,
    /// The same QFI from the full Gram expansion of `⟨ψ'|ψ'⟩`, including the
    /// products that vanish analytically.
    pub f_gram: f64,
    pub solution: PolaronSolution,
}

impl QfiDecomposition {
    /// `|f_total - f_gram| / f_gram`.
    pub fn closure_error(&self) -> f64 {
        ((self.f_total - self.f_gram) / self.f_gram).abs()
    }
}

/// Decomposes the polaron QFI at `params`.
///
/// `C̃±'` and `s±'` come from central differences of re-optimized solutions
/// at `g₂ ± δ` (default `δ = 1e-5 g_T`), warm-started from the center.
pub fn qfi_decompose(params: &ModelParams, delta: Option<f64>, warm: Option<(f64, f64)>) -> Result<QfiDecomposition> {
    let delta = delta.unwrap_or(1e-5 * params.g_t());
    if !(delta > 0.0 && params.g2 > delta) {
        return Err(Error::domain(format!(
            "decomposition needs 0 < delta < g2, got delta = {delta}, g2 = {}",
            params.g2
        )));
    }
    let opts = OptimizeOptions {
        warm_start: warm,
        ..Default::default()
    };
    let center = optimize(params, &opts)?;
    let tight = OptimizeOptions {
        tol: 1e-12,
        warm_start: Some((center.xi_plus, center.xi_minus)),
        ..opts
    };
    let lo = optimize(&params.with_g2(params.g2 - delta), &tight)?;
    let hi = optimize(&params.with_g2(params.g2 + delta), &tight)?;
    if center.at_boundary || lo.at_boundary || hi.at_boundary {
        return Err(Error::OptimizerBoundary);
    }
    let frame = rotated_frame(params)?;
    let d = |a: f64, b: f64| (b - a) / (2.0 * delta);
    let cp = [center.c_plus, center.c_minus];
    let dc = [d(lo.c_plus, hi.c_plus), d(lo.c_minus, hi.c_minus)];
    let s = [center.s_plus, center.s_minus];
    let ds = [d(lo.s_plus, hi.s_plus), d(lo.s_minus, hi.s_minus)];

    let f_rho = 4.0 * (dc[0] * dc[0] + dc[1] * dc[1]);
    let f_xi = 4.0
        * (0..2)
            .map(|i| cp[i] * cp[i] * ds[i] * ds[i] / (8.0 * s[i] * s[i]))
            .sum::<f64>();
    let f_sigma = 4.0 * frame.basis_variation_sq();
    // ⟨⇓̃|⇑̃'⟩ = x, ⟨⇑̃|⇓̃'⟩ = -x
    let x = frame.basis_cross_derivative();
    let overlap = gaussian_overlap(s[0], s[1]);
    // ⟨φ̃_a'|φ̃_b⟩ = s_a' ∂O/∂s_a
    let dphi_minus_phi_plus = ds[1] * gaussian_overlap_ds(s[0], s[1]);
    let dphi_plus_phi_minus = ds[0] * gaussian_overlap_ds(s[1], s[0]);
    let f_mixed = 8.0
        * x
        * (dc[1] * cp[0] * overlap + cp[1] * cp[0] * dphi_minus_phi_plus
            - dc[0] * cp[1] * overlap
            - cp[0] * cp[1] * dphi_plus_phi_minus);

    let f_gram = gram_qfi(&frame, cp, dc, s, ds);
    Ok(QfiDecomposition {
        f_total: f_rho + f_xi + f_sigma + f_mixed,
        f_rho,
        f_xi,
        f_sigma,
        f_mixed,
        f_gram,
        solution: center,
    })
}

/// `4 (⟨ψ'|ψ'⟩ - ⟨ψ|ψ'⟩²)` with `ψ' = Σ_σ (C' φ σ + C φ' σ + C φ σ')`
/// expanded over every pair of the six terms.
fn gram_qfi(frame: &RotatedFrame, c: [f64; 2], dc: [f64; 2], s: [f64; 2], ds: [f64; 2]) -> f64 {
    let (hc, hs) = frame.half_angle();
    let spin = [[hc, hs], [-hs, hc]];
    let dcos = frame.dcos_theta_dg2;
    let dhc = if dcos == 0.0 { 0.0 } else { dcos / (4.0 * hc) };
    let dhs = if dcos == 0.0 { 0.0 } else { -dcos / (4.0 * hs) };
    let dspin = [[dhc, dhs], [-dhs, dhc]];
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];

    // term k of component σ: (coefficient, spatial kind, spin vector)
    // spatial kind 0 = φ, 1 = φ'
    let mut terms = Vec::with_capacity(6);
    for i in 0..2 {
        terms.push((dc[i], i, 0, spin[i]));
        terms.push((c[i], i, 1, spin[i]));
        terms.push((c[i], i, 0, dspin[i]));
    }
    let spatial = |a: usize, ka: usize, b: usize, kb: usize| -> f64 {
        let (sa, sb) = (s[a], s[b]);
        let o = gaussian_overlap(sa, sb);
        let sum = sa + sb;
        let fa = 0.25 / sa - 0.5 / sum;
        let fb = 0.25 / sb - 0.5 / sum;
        match (ka, kb) {
            (0, 0) => o,
            (0, 1) => ds[b] * o * fb,
            (1, 0) => ds[a] * o * fa,
            _ => ds[a] * ds[b] * o * (fa * fb + 0.5 / (sum * sum)),
        }
    };
    let mut dd = 0.0;
    for &(ca, a, ka, va) in &terms {
        for &(cb, b, kb, vb) in &terms {
            dd += ca * cb * spatial(a, ka, b, kb) * dot(va, vb);
        }
    }
    let mut pd = 0.0;
    for i in 0..2 {
        for &(cb, b, kb, vb) in &terms {
            pd += c[i] * cb * spatial(i, 0, b, kb) * dot(spin[i], vb);
        }
    }
    4.0 * (dd - pd * pd)
}
