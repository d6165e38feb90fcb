//! Symmetric banded matrices with a positive-definite Cholesky factorization.

/// Symmetric matrix stored by its lower band: `band[i][k] = A[i, i-k]` for `k <= bw`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSym {
    dim: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSym {
    pub fn zeros(dim: usize, bw: usize) -> Self {
        Self {
            dim,
            bw,
            data: vec![0.0; dim * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        (k <= self.bw).then(|| hi * (self.bw + 1) + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to both `(i, j)` and `(j, i)`.
    ///
    /// # Panics
    /// If the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            y[i] += row[0] * x[i];
            for k in 1..=self.bw.min(i) {
                let a = row[k];
                if a != 0.0 {
                    y[i] += a * x[i - k];
                    y[i - k] += a * x[i];
                }
            }
        }
        y
    }

    /// Lower and upper Gershgorin bounds on the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.dim];
        for i in 0..self.dim {
            for k in 1..=self.bw.min(i) {
                let a = self.get(i, i - k).abs();
                radius[i] += a;
                radius[i - k] += a;
            }
        }
        (0..self.dim).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let d = self.get(i, i);
            (lo.min(d - radius[i]), hi.max(d + radius[i]))
        })
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).fold(f64::INFINITY, f64::min)
    }

    /// Frobenius norm of the full symmetric matrix.
    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for k in 0..=self.bw.min(i) {
                let a = self.get(i, i - k);
                s += if k == 0 { a * a } else { 2.0 * a * a };
            }
        }
        s.sqrt()
    }

    /// Cholesky factor of `A - shift·I`, or `None` if that matrix is not positive definite.
    pub fn cholesky_shifted(&self, shift: f64) -> Option<BandCholesky> {
        let bw = self.bw;
        let w = bw + 1;
        let mut l = self.data.clone();
        for i in 0..self.dim {
            l[i * w] -= shift;
        }
        for i in 0..self.dim {
            let jmin = i.saturating_sub(bw);
            for j in jmin..=i {
                // L[i,j] = (A[i,j] - sum_{k<j} L[i,k] L[j,k]) / L[j,j]
                let mut s = l[i * w + (i - j)];
                let kmin = jmin.max(j.saturating_sub(bw));
                for k in kmin..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return None;
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Some(BandCholesky { dim: self.dim, bw, l })
    }
}

/// Lower-triangular banded factor `L` with `A - shift·I = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    dim: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let w = self.bw + 1;
        let mut y = b.to_vec();
        for i in 0..self.dim {
            let mut s = y[i];
            for k in 1..=self.bw.min(i) {
                s -= self.l[i * w + k] * y[i - k];
            }
            y[i] = s / self.l[i * w];
        }
        for i in (0..self.dim).rev() {
            let mut s = y[i];
            for k in 1..=self.bw.min(self.dim - 1 - i) {
                s -= self.l[(i + k) * w + k] * y[i + k];
            }
            y[i] = s / self.l[i * w];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn sample(dim: usize, bw: usize) -> BandedSym {
        let mut a = BandedSym::zeros(dim, bw);
        for i in 0..dim {
            a.add(i, i, 4.0 + i as f64 * 0.1);
            for k in 1..=bw.min(i) {
                a.add(i, i - k, ((i * 7 + k * 3) % 5) as f64 * 0.2 - 0.4);
            }
        }
        a
    }

    fn dense(a: &BandedSym) -> DMatrix<f64> {
        DMatrix::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j))
    }

    #[test]
    fn matvec_matches_dense() {
        let a = sample(23, 4);
        let x: Vec<f64> = (0..23).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = a.mul_vec(&x);
        let yd = dense(&a) * nalgebra::DVector::from_vec(x);
        for i in 0..23 {
            assert!((y[i] - yd[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn cholesky_solves() {
        let a = sample(31, 4);
        let chol = a.cholesky_shifted(0.5).expect("positive definite");
        let b: Vec<f64> = (0..31).map(|i| 1.0 + i as f64).collect();
        let x = chol.solve(&b);
        let ax = a.mul_vec(&x);
        for i in 0..31 {
            assert!((ax[i] - 0.5 * x[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn cholesky_detects_indefinite() {
        let a = sample(31, 4);
        let (lo, hi) = a.gershgorin();
        assert!(a.cholesky_shifted(lo - 1e-9).is_some());
        assert!(a.cholesky_shifted(hi).is_none());
        assert!(a.cholesky_shifted(a.min_diagonal()).is_none());
    }
}
