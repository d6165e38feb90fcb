//! Assembly of the model Hamiltonian in the truncated spin ⊗ Fock basis.

use nalgebra::DMatrix;

use super::banded::BandedSym;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Spin component in the unrotated σz basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }
}

/// Real symmetric Hamiltonian of dimension `2 (N + 1)`.
///
/// The declared basis order is spin-up block first: index `s·(N+1) + n`
/// with `s = 0` for ↑ and `s = 1` for ↓. Internally the matrix is kept as a
/// band of width 4 in the interleaved order `2n + s`, where every coupling
/// (σx at equal n, `a†²`/`a²` at equal spin) stays within the band.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    cutoff: usize,
    band: BandedSym,
}

impl HamiltonianMatrix {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        2 * (self.cutoff + 1)
    }

    /// Position of `(spin, n)` in the declared basis order.
    pub fn index(&self, spin: Spin, n: usize) -> usize {
        match spin {
            Spin::Up => n,
            Spin::Down => self.cutoff + 1 + n,
        }
    }

    fn to_band_index(&self, i: usize) -> usize {
        let m = self.cutoff + 1;
        2 * (i % m) + i / m
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.band.get(self.to_band_index(i), self.to_band_index(j))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.entry(i, j))
    }

    pub(crate) fn band(&self) -> &BandedSym {
        &self.band
    }

    /// Reorders a vector from the interleaved band order to the declared order.
    pub(crate) fn in_declared_order(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|i| v[self.to_band_index(i)]).collect()
    }

    /// `H v` for a vector in the declared order.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.dim()];
        for (i, &x) in v.iter().enumerate() {
            w[self.to_band_index(i)] = x;
        }
        self.in_declared_order(&self.band.mul_vec(&w))
    }

    /// Wraps an arbitrary symmetric matrix given in the declared order.
    ///
    /// Entries outside the spin/Fock band structure are rejected.
    pub fn from_dense(cutoff: usize, m: &DMatrix<f64>) -> Result<Self> {
        let dim = 2 * (cutoff + 1);
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::domain(format!("expected a {dim}x{dim} matrix")));
        }
        let mut h = Self {
            cutoff,
            band: BandedSym::zeros(dim, 4),
        };
        for i in 0..dim {
            for j in 0..=i {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                if v == 0.0 {
                    continue;
                }
                let (bi, bj) = (h.to_band_index(i), h.to_band_index(j));
                if bi.abs_diff(bj) > 4 {
                    return Err(Error::domain(format!("entry ({i},{j}) outside the Hamiltonian band")));
                }
                h.band.add(bi, bj, v);
            }
        }
        Ok(h)
    }
}

/// `H = ω n + (Ω/2) σx + g₂ σz [a†² + a² + χ_z (2n+1)] + ω χ n σx` on `N + 1` Fock levels.
pub fn build_hamiltonian(params: &ModelParams, cutoff: usize) -> Result<HamiltonianMatrix> {
    params.validate()?;
    if cutoff < 2 {
        return Err(Error::domain(format!("cutoff must be at least 2, got {cutoff}")));
    }
    let dim = 2 * (cutoff + 1);
    let mut band = BandedSym::zeros(dim, 4);
    let ModelParams {
        omega,
        splitting,
        g2,
        chi_z,
        chi,
    } = *params;
    let at = |n: usize, s: Spin| 2 * n + usize::from(s == Spin::Down);
    for n in 0..=cutoff {
        let nf = n as f64;
        for s in [Spin::Up, Spin::Down] {
            band.add(
                at(n, s),
                at(n, s),
                omega * nf + g2 * s.sign() * chi_z * (2.0 * nf + 1.0),
            );
            if n + 2 <= cutoff {
                let v = g2 * s.sign() * ((nf + 1.0) * (nf + 2.0)).sqrt();
                band.add(at(n + 2, s), at(n, s), v);
            }
        }
        band.add(at(n, Spin::Down), at(n, Spin::Up), splitting / 2.0 + omega * chi * nf);
    }
    Ok(HamiltonianMatrix { cutoff, band })
}

/// Real form of the Z₄ generator `σx ⊗ exp(iπn/2)`.
///
/// The Hamiltonian never couples even and odd photon numbers, so the odd
/// sector's common phase `i` can be dropped, leaving the pattern
/// `(+1, +1, -1, -1)` over `n mod 4`.
pub fn z4_parity(cutoff: usize) -> DMatrix<f64> {
    let m = cutoff + 1;
    let phase = |n: usize| if n % 4 < 2 { 1.0 } else { -1.0 };
    let mut p = DMatrix::zeros(2 * m, 2 * m);
    for n in 0..m {
        p[(n, m + n)] = phase(n);
        p[(m + n, n)] = phase(n);
    }
    p
}

/// Photon-number parity `1 ⊗ (-1)^n`.
pub fn photon_parity(cutoff: usize) -> DMatrix<f64> {
    let m = cutoff + 1;
    DMatrix::from_fn(2 * m, 2 * m, |i, j| {
        if i == j {
            if (i % m).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        } else {
            0.0
        }
    })
}

/// `‖[H, P]‖_F / ‖H‖_F`.
pub fn relative_commutator(h: &HamiltonianMatrix, p: &DMatrix<f64>) -> f64 {
    let hd = h.to_dense();
    let c = &hd * p - p * &hd;
    c.norm() / hd.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_ordered() {
        let p = ModelParams::new(1.0, 0.7, 0.1, 0.5, 0.3).unwrap();
        let h = build_hamiltonian(&p, 10).unwrap();
        let d = h.to_dense();
        assert_eq!(d, d.transpose());
        // diagonal of the up block: ω n + g₂ χ_z (2n+1)
        assert!((h.entry(h.index(Spin::Up, 3), h.index(Spin::Up, 3)) - (3.0 + 0.1 * 0.5 * 7.0)).abs() < 1e-15);
        assert!((h.entry(h.index(Spin::Down, 3), h.index(Spin::Down, 3)) - (3.0 - 0.1 * 0.5 * 7.0)).abs() < 1e-15);
        assert!((h.entry(h.index(Spin::Up, 4), h.index(Spin::Down, 4)) - (0.35 + 0.3 * 4.0)).abs() < 1e-15);
        let v = 0.1 * (2.0f64 * 3.0).sqrt();
        assert!((h.entry(h.index(Spin::Up, 3), h.index(Spin::Up, 1)) - v).abs() < 1e-15);
        assert!((h.entry(h.index(Spin::Down, 1), h.index(Spin::Down, 3)) + v).abs() < 1e-15);
        let back = HamiltonianMatrix::from_dense(10, &d).unwrap();
        assert_eq!(back.to_dense(), d);
    }

    #[test]
    fn mul_vec_matches_dense() {
        let p = ModelParams::new(1.0, 1.3, 0.2, 1.0, 0.4).unwrap();
        let h = build_hamiltonian(&p, 9).unwrap();
        let v: Vec<f64> = (0..h.dim()).map(|i| (i as f64).cos()).collect();
        let w = h.mul_vec(&v);
        let wd = h.to_dense() * nalgebra::DVector::from_vec(v);
        for i in 0..h.dim() {
            assert!((w[i] - wd[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn decoupled_spectrum() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&p, 6).unwrap();
        let mut ev: Vec<f64> = h.to_dense().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let mut expect: Vec<f64> = (0..=6).flat_map(|m| [m as f64 - 0.5, m as f64 + 0.5]).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetry_operators() {
        for &chi in &[0.0, 0.3, -0.7] {
            let p0 = ModelParams::new(1.0, 0.9, 0.17, 0.0, chi).unwrap();
            let h0 = build_hamiltonian(&p0, 21).unwrap();
            assert!(relative_commutator(&h0, &z4_parity(21)) < 1e-12);
            let p1 = ModelParams::new(1.0, 0.9, 0.09, 1.0, chi).unwrap();
            let h1 = build_hamiltonian(&p1, 21).unwrap();
            assert!(relative_commutator(&h1, &photon_parity(21)) < 1e-12);
            // the χ_z term breaks Z₄
            assert!(relative_commutator(&h1, &z4_parity(21)) > 1e-3);
        }
    }
}
