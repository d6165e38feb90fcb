//! Lowest eigenpairs of the Hamiltonian and adaptive Fock cutoff.

use nalgebra::{DMatrix, SymmetricEigen};

use super::banded::BandedSym;
use super::hamiltonian::{build_hamiltonian, HamiltonianMatrix};
use crate::error::{Error, Result};
use crate::model::{require_stable, ModelParams};

/// Ground state and first excitation of a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub e0: f64,
    pub e1: f64,
    /// `e1 - e0`.
    pub gap: f64,
    /// Unit ground vector in the declared basis order, sign-gauged so that
    /// its largest-magnitude component is positive.
    pub ground: Vec<f64>,
    pub cutoff_used: usize,
    /// True when the truncation was certified by [`converge_cutoff`].
    pub converged: bool,
}

impl SpectralResult {
    /// Up and down spin blocks of the ground vector.
    pub fn spin_blocks(&self) -> (&[f64], &[f64]) {
        self.ground.split_at(self.cutoff_used + 1)
    }

    /// Probability weight on the top 10% of Fock levels, both spins.
    pub fn tail_weight(&self) -> f64 {
        let m = self.cutoff_used + 1;
        let count = m.div_ceil(10);
        let (up, down) = self.spin_blocks();
        up[m - count..].iter().chain(&down[m - count..]).map(|v| v * v).sum()
    }
}

/// Eigensolver used by [`ground_state_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenBackend {
    /// Dense for small matrices, banded otherwise.
    #[default]
    Auto,
    /// Full dense symmetric eigendecomposition.
    Dense,
    /// Shift-invert Lanczos on the banded matrix with Cholesky solves.
    Banded,
}

/// Largest dimension [`EigenBackend::Auto`] hands to the dense solver.
pub const DENSE_AUTO_MAX_DIM: usize = 48;

pub fn ground_state(h: &HamiltonianMatrix) -> Result<SpectralResult> {
    ground_state_with(h, EigenBackend::Auto)
}

pub fn ground_state_with(h: &HamiltonianMatrix, backend: EigenBackend) -> Result<SpectralResult> {
    let use_dense = match backend {
        EigenBackend::Dense => true,
        EigenBackend::Banded => false,
        EigenBackend::Auto => h.dim() <= DENSE_AUTO_MAX_DIM,
    };
    let (e0, e1, mut ground) = if use_dense {
        dense_lowest(&h.to_dense())
    } else {
        let (e0, e1, v) = banded_lowest(h.band())?;
        (e0, e1, h.in_declared_order(&v))
    };
    apply_sign_gauge(&mut ground);
    let hv = h.mul_vec(&ground);
    let residual = hv
        .iter()
        .zip(&ground)
        .map(|(a, b)| (a - e0 * b).powi(2))
        .sum::<f64>()
        .sqrt();
    if !(residual < 1e-9 * e0.abs().max(1.0)) {
        return Err(Error::Numeric {
            what: format!("ground eigenpair at cutoff {}", h.cutoff()),
            residual,
        });
    }
    Ok(SpectralResult {
        e0,
        e1,
        gap: (e1 - e0).max(0.0),
        ground,
        cutoff_used: h.cutoff(),
        converged: false,
    })
}

fn dense_lowest(m: &DMatrix<f64>) -> (f64, f64, Vec<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let e0 = eig.eigenvalues[order[0]];
    let e1 = order.get(1).map_or(e0, |&k| eig.eigenvalues[k]);
    let v = eig.eigenvectors.column(order[0]).iter().copied().collect();
    (e0, e1, v)
}

/// Largest-magnitude component made positive; near-ties go to the lowest index.
pub(crate) fn apply_sign_gauge(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(&pivot) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-9)) {
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(w, q);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn pseudo_random(dim: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..dim)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
        .collect()
}

fn rayleigh(a: &BandedSym, v: &[f64]) -> f64 {
    dot(v, &a.mul_vec(v)) / dot(v, v)
}

/// Two lowest eigenvalues and the ground vector of a banded symmetric matrix.
///
/// The ground energy is bracketed by bisection on positive definiteness of
/// `A - σ`, then Lanczos runs on `(A - σ)⁻¹` with σ just below the bracket,
/// and the ground vector is polished by inverse iteration.
fn banded_lowest(a: &BandedSym) -> Result<(f64, f64, Vec<f64>)> {
    let dim = a.dim();
    let (mut lo, _) = a.gershgorin();
    let mut hi = a.min_diagonal();
    let scale = lo.abs().max(hi.abs()).max(1.0);
    lo -= 1e-9 * scale;
    while hi - lo > 1e-4 * lo.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if a.cholesky_shifted(mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let shift = lo - 1e-3 * lo.abs().max(1.0);
    let chol = a.cholesky_shifted(shift).ok_or_else(|| Error::Numeric {
        what: "shifted Cholesky failed below the ground-energy bracket".into(),
        residual: f64::NAN,
    })?;

    let max_steps = dim.min(400);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(max_steps);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = pseudo_random(dim, 7);
    normalize(&mut v);
    let mut restarts = 0u64;
    let mut ritz: Option<(f64, f64, Vec<f64>)> = None;

    for j in 0..max_steps {
        let mut w = chol.solve(&v);
        let aj = dot(&w, &v);
        q.push(v);
        alpha.push(aj);
        orthogonalize(&mut w, &q);
        let bj = dot(&w, &w).sqrt();
        let steps = j + 1;
        let check = steps >= 2 && (steps % 4 == 0 || steps == max_steps || bj == 0.0);
        if check {
            let t = DMatrix::from_fn(steps, steps, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
            let (k0, k1) = (order[0], order[1]);
            let (t0, t1) = (eig.eigenvalues[k0], eig.eigenvalues[k1]);
            let res0 = (bj * eig.eigenvectors[(steps - 1, k0)]).abs();
            let res1 = (bj * eig.eigenvectors[(steps - 1, k1)]).abs();
            if res0 <= 1e-12 * t0.abs() && res1 <= 1e-12 * t1.abs() {
                let combine = |k: usize| {
                    let mut u = vec![0.0; dim];
                    for (i, qi) in q.iter().enumerate() {
                        let c = eig.eigenvectors[(i, k)];
                        u.iter_mut().zip(qi).for_each(|(x, y)| *x += c * y);
                    }
                    u
                };
                let u0 = combine(k0);
                let u1 = combine(k1);
                ritz = Some((rayleigh(a, &u0), rayleigh(a, &u1), u0));
                break;
            }
        }
        let mut next = if bj > 1e-10 * aj.abs().max(1e-300) {
            w.iter().map(|x| x / bj).collect::<Vec<_>>()
        } else {
            // invariant subspace found; continue from a fresh orthogonal direction
            restarts += 1;
            let mut fresh = pseudo_random(dim, 7 + restarts);
            orthogonalize(&mut fresh, &q);
            normalize(&mut fresh);
            beta.push(0.0);
            v = fresh;
            continue;
        };
        orthogonalize(&mut next, &q);
        normalize(&mut next);
        beta.push(bj);
        v = next;
    }

    let (e0, e1, mut ground) = ritz.ok_or_else(|| Error::Numeric {
        what: format!("shift-invert Lanczos did not converge in {max_steps} steps"),
        residual: f64::NAN,
    })?;

    // inverse-iteration polish of the ground vector
    let mut margin = 1e-8 * e0.abs().max(1.0);
    let polish = loop {
        if let Some(c) = a.cholesky_shifted(e0 - margin) {
            break c;
        }
        margin *= 100.0;
        if margin > 1e-2 * e0.abs().max(1.0) {
            break chol;
        }
    };
    normalize(&mut ground);
    for _ in 0..2 {
        ground = polish.solve(&ground);
        normalize(&mut ground);
    }
    let e0 = rayleigh(a, &ground);
    Ok((e0, e1.max(e0), ground))
}

/// Truncation control for [`converge_cutoff`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPolicy {
    /// Absolute tolerance on `|E0(N) - E0(2N)|`.
    pub e_tol: f64,
    /// Tolerance on the ground-state weight in the top 10% of Fock levels.
    pub tail_tol: f64,
    pub n_start: usize,
    pub n_max: usize,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self {
            e_tol: 1e-9,
            tail_tol: 1e-10,
            n_start: 64,
            n_max: 4096,
        }
    }
}

impl CutoffPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.n_start < 16 || self.n_max < self.n_start {
            return Err(Error::domain(format!(
                "cutoff policy requires n_start >= 16 and n_max >= n_start (got {} / {})",
                self.n_start, self.n_max
            )));
        }
        if !(self.e_tol > 0.0 && self.tail_tol > 0.0) {
            return Err(Error::domain("cutoff tolerances must be positive"));
        }
        Ok(())
    }
}

/// Ground state at a fixed cutoff.
pub fn solve_at(params: &ModelParams, cutoff: usize) -> Result<SpectralResult> {
    ground_state(&build_hamiltonian(params, cutoff)?)
}

/// Doubles the cutoff from `n_start` until both the ground energy and the
/// tail weight are converged. The certified result at cutoff `N` is returned;
/// if `n_max` is reached first, the last result comes back with
/// `converged = false`.
pub fn converge_cutoff(params: &ModelParams, policy: &CutoffPolicy) -> Result<SpectralResult> {
    policy.validate()?;
    params.validate()?;
    require_stable(params)?;
    let mut n = policy.n_start;
    let mut current = solve_at(params, n)?;
    loop {
        if 2 * n > policy.n_max {
            return Ok(current);
        }
        let next = solve_at(params, 2 * n)?;
        if (current.e0 - next.e0).abs() < policy.e_tol && current.tail_weight() < policy.tail_tol {
            current.converged = true;
            return Ok(current);
        }
        n *= 2;
        current = next;
    }
}
